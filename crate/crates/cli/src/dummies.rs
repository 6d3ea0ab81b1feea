//! Calendar regressors: day-of-week and holiday indicators.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};

use crate::error::IoError;

/// Six indicators, Monday to Saturday; Sunday is the baseline.
pub const WEEKDAY_NAMES: [&str; 6] = ["mon", "tue", "wed", "thu", "fri", "sat"];

pub const HOLIDAY_NAME: &str = "holiday";

pub fn weekday_dummies(dates: &[NaiveDate]) -> Vec<(String, Vec<f64>)> {
    let days = [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri, Weekday::Sat];
    WEEKDAY_NAMES
        .iter()
        .zip(days)
        .map(|(name, day)| {
            let col = dates.iter().map(|d| f64::from(u8::from(d.weekday() == day))).collect();
            (name.to_string(), col)
        })
        .collect()
}

/// One ISO date per line; blank lines and lines starting with `#` are
/// skipped.
pub fn parse_holidays(text: &str) -> Result<BTreeSet<NaiveDate>, IoError> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let d = NaiveDate::parse_from_str(t, "%Y-%m-%d").map_err(|e| IoError::Parse {
            row: i + 1,
            column: "date".into(),
            message: format!("bad holiday date {t:?}: {e}"),
        })?;
        out.insert(d);
    }
    Ok(out)
}

pub fn read_holidays(path: &Path) -> Result<BTreeSet<NaiveDate>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    parse_holidays(&text)
}

pub fn holiday_dummy(dates: &[NaiveDate], holidays: &BTreeSet<NaiveDate>) -> Vec<f64> {
    dates.iter().map(|d| f64::from(u8::from(holidays.contains(d)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weekdays() {
        // 2020-01-05 is a Sunday
        let start = NaiveDate::from_ymd_opt(2020, 1, 5).unwrap();
        let dates: Vec<NaiveDate> = start.iter_days().take(7).collect();
        let cols = weekday_dummies(&dates);
        assert_eq!(cols.len(), 6);
        assert!(cols.iter().all(|(_, c)| c[0] == 0.0));
        for (i, (_, c)) in cols.iter().enumerate() {
            assert_eq!(c.iter().sum::<f64>(), 1.0);
            assert_eq!(c[i + 1], 1.0);
        }
    }

    #[test]
    fn holidays() {
        let set = parse_holidays("# national\n2020-01-01\n\n2020-12-25\n").unwrap();
        let start = NaiveDate::from_ymd_opt(2019, 12, 31).unwrap();
        let dates: Vec<NaiveDate> = start.iter_days().take(3).collect();
        assert_eq!(holiday_dummy(&dates, &set), vec![0.0, 1.0, 0.0]);
        assert!(matches!(parse_holidays("2020-13-01"), Err(IoError::Parse { row: 1, .. })));
    }
}
