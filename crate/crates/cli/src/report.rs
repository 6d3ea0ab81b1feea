//! Versioned machine report and the human summary.

use std::fmt::Write;

use carima_core::causal::{CausalReport, EffectTest, Estimand, Scale, TestMethod};
use carima_core::oracle::CheckOutcome;
use carima_core::regarima::RegArimaResult;
use carima_core::sim::{StudyConfig, StudyTables};
use carima_core::AnalysisConfig;
use serde::{Deserialize, Serialize};

use crate::error::IoError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "body", rename_all = "snake_case")]
pub enum ReportBody {
    Analysis {
        config: AnalysisConfig,
        report: CausalReport,
    },
    Comparison {
        config: AnalysisConfig,
        report: CausalReport,
        regarima: RegArimaResult,
    },
    Study {
        config: StudyConfig,
        tables: StudyTables,
    },
    Selftest {
        seed: u64,
        checks: Vec<CheckOutcome>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineReport {
    pub schema_version: u32,
    pub tool_version: String,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl MachineReport {
    pub fn new(body: ReportBody) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.into(),
            body,
        }
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| IoError::Invalid(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let r: Self = serde_json::from_str(text).map_err(|e| IoError::Parse {
            row: e.line(),
            column: e.column().to_string(),
            message: e.to_string(),
        })?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(IoError::Invalid(format!("unsupported schema version {}", r.schema_version)));
        }
        Ok(r)
    }

    pub fn causal(&self) -> Option<&CausalReport> {
        match &self.body {
            ReportBody::Analysis { report, .. } | ReportBody::Comparison { report, .. } => Some(report),
            _ => None,
        }
    }
}

fn scale_name(s: Scale) -> &'static str {
    match s {
        Scale::Original => "original",
        Scale::Transformed => "transformed",
    }
}

fn estimand_name(e: Estimand) -> &'static str {
    match e {
        Estimand::Point => "point",
        Estimand::Cumulative => "cumulative",
        Estimand::Average => "average",
    }
}

fn method_name(m: TestMethod) -> &'static str {
    match m {
        TestMethod::Gaussian => "gaussian",
        TestMethod::Bootstrap => "bootstrap",
    }
}

fn test_line(out: &mut String, t: &EffectTest) {
    let _ = writeln!(
        out,
        "{:>8} {:<10} {:<11} {:>12.4} {:>10.4} {:>9.4} {:>8.4} {:<3} [{:.4}, {:.4}]",
        t.horizon,
        estimand_name(t.estimand),
        method_name(t.method),
        t.estimate,
        t.std_error,
        t.statistic,
        t.p_value,
        t.stars(),
        t.lower,
        t.upper
    );
}

pub fn causal_summary(report: &CausalReport, regarima: Option<&RegArimaResult>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "series: {}", report.series);
    let _ = writeln!(out, "model: {} (log-likelihood {:.3}, BIC {:.3})", report.model.order, report.model.loglik, report.model.bic);
    match report.intervention_date {
        Some(d) => {
            let _ = writeln!(out, "last untreated day: {d} (index {})", report.t_star);
        }
        None => {
            let _ = writeln!(out, "last untreated index: {}", report.t_star);
        }
    }
    for scale in [Scale::Original, Scale::Transformed] {
        if scale == Scale::Transformed && report.model.order.diff.is_identity() && !report.log_transform {
            continue;
        }
        let _ = writeln!(out, "\n{} scale", scale_name(scale));
        let _ = writeln!(
            out,
            "{:>8} {:<10} {:<11} {:>12} {:>10} {:>9} {:>8}    interval",
            "horizon", "effect", "test", "estimate", "std.err", "stat", "p"
        );
        for t in report.tests.iter().filter(|t| t.scale == scale) {
            test_line(&mut out, t);
        }
    }
    if report.log_transform {
        let _ = writeln!(out);
        for s in &report.summaries {
            if let Some(r) = s.relative_change {
                let _ = writeln!(out, "horizon {}: average change {:+.2}%", s.horizon, 100.0 * r);
            }
        }
    }
    if let Some(r) = regarima {
        let _ = writeln!(
            out,
            "\nregression with ARIMA errors {}: step {:.4} (s.e. {:.4}, p {:.4}{}) [{:.4}, {:.4}]",
            r.model.order,
            r.beta0_hat,
            r.std_error,
            r.p_value,
            carima_core::causal::significance_stars(r.p_value),
            r.lower,
            r.upper
        );
    }
    if !report.notes.is_empty() {
        let _ = writeln!(out);
        for n in &report.notes {
            let _ = writeln!(out, "note: {n}");
        }
    }
    let _ = writeln!(out, "\nsignificance: . p<0.1, * p<0.05, ** p<0.01, *** p<0.001");
    out
}

pub fn effects_csv(report: &CausalReport) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "date", "observed", "counterfactual", "point_effect", "point_variance", "cumulative_effect", "average_effect"])?;
    let o = &report.original;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for k in 0..o.len() {
        let date = report
            .post_dates
            .as_ref()
            .map(|d| d[k].format("%Y-%m-%d").to_string())
            .unwrap_or_default();
        w.write_record([
            (k + 1).to_string(),
            date,
            cell(report.observed.get(k).copied().flatten()),
            cell(report.counterfactual.get(k).copied()),
            cell(o.tau[k]),
            o.var_tau[k].to_string(),
            o.delta[k].to_string(),
            cell(o.tau_bar[k]),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn tests_csv(report: &CausalReport) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["horizon", "scale", "estimand", "method", "estimate", "std_error", "statistic", "p_value", "lower", "upper", "alpha"])?;
    for t in &report.tests {
        w.write_record([
            t.horizon.to_string(),
            scale_name(t.scale).into(),
            estimand_name(t.estimand).into(),
            method_name(t.method).into(),
            t.estimate.to_string(),
            t.std_error.to_string(),
            t.statistic.to_string(),
            t.p_value.to_string(),
            t.lower.to_string(),
            t.upper.to_string(),
            t.alpha.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn selftest_summary(checks: &[CheckOutcome]) -> String {
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(
            out,
            "{} {} ({} cases, worst {:.3e}, tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.worst,
            c.tolerance
        );
    }
    out
}
