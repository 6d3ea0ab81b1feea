//! Daily CSV datasets: one ISO date column, a target and regressor columns.

use std::io::{Read, Write};
use std::path::Path;

use carima_core::sarima::Regressors;
use carima_core::TimeSeries;
use chrono::NaiveDate;
use log::info;

use crate::error::IoError;

/// Column names to read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub date_column: String,
    pub target: String,
    pub regressors: Vec<String>,
}

impl CsvSchema {
    pub fn new(target: impl Into<String>, regressors: Vec<String>) -> Self {
        Self {
            date_column: "date".into(),
            target: target.into(),
            regressors,
        }
    }
}

/// A daily calendar with one value per day and column; missing cells and
/// days absent from the file are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub date_column: String,
    pub dates: Vec<NaiveDate>,
    pub target: String,
    pub y: Vec<Option<f64>>,
    pub regressor_names: Vec<String>,
    pub regressors: Vec<Vec<Option<f64>>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn series(&self) -> Result<TimeSeries, IoError> {
        dated(self.y.clone(), &self.dates)
    }

    pub fn regressor_set(&self) -> Result<Regressors, IoError> {
        let mut x = Regressors::none();
        for (name, col) in self.regressor_names.iter().zip(&self.regressors) {
            x.push(name.clone(), dated(col.clone(), &self.dates)?)
                .map_err(|e| IoError::Invalid(e.to_string()))?;
        }
        Ok(x)
    }

    /// Appends a fully observed column.
    pub fn push_regressor(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<(), IoError> {
        let name = name.into();
        if values.len() != self.len() {
            return Err(IoError::Invalid(format!("column {name} has {} values for {} days", values.len(), self.len())));
        }
        if name == self.target || self.regressor_names.contains(&name) || name == self.date_column {
            return Err(IoError::Invalid(format!("duplicate column {name}")));
        }
        self.regressor_names.push(name);
        self.regressors.push(values.into_iter().map(Some).collect());
        Ok(())
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Writes the dataset back to CSV; missing values become blank cells.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), IoError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.date_column.clone(), self.target.clone()];
        header.extend(self.regressor_names.iter().cloned());
        w.write_record(&header)?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for t in 0..self.len() {
            let mut row = vec![self.dates[t].format("%Y-%m-%d").to_string(), cell(self.y[t])];
            row.extend(self.regressors.iter().map(|c| cell(c[t])));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| IoError::Io(e.to_string()))?;
        Ok(())
    }
}

fn dated(values: Vec<Option<f64>>, dates: &[NaiveDate]) -> Result<TimeSeries, IoError> {
    TimeSeries::new(values)
        .and_then(|s| s.with_dates(dates.to_vec()))
        .map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset, IoError> {
    let file = std::fs::File::open(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, schema)
}

fn parse_date(text: &str, row: usize, column: &str) -> Result<NaiveDate, IoError> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").map_err(|e| IoError::Parse {
        row,
        column: column.into(),
        message: format!("bad date {text:?}: {e}"),
    })
}

fn parse_value(text: &str, row: usize, column: &str) -> Result<Option<f64>, IoError> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(IoError::Parse {
            row,
            column: column.into(),
            message: format!("not a finite number: {t:?}"),
        }),
    }
}

/// Parses a CSV with a header row. Rows are numbered from 1 for the header;
/// dates must increase strictly, and skipped days are filled with missing
/// values.
pub fn read_csv<R: Read>(input: R, schema: &CsvSchema) -> Result<Dataset, IoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize, IoError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IoError::UnknownColumn(name.into()))
    };
    let date_idx = find(&schema.date_column)?;
    let target_idx = find(&schema.target)?;
    let reg_idx: Vec<usize> = schema.regressors.iter().map(|r| find(r)).collect::<Result<_, _>>()?;

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut y = Vec::new();
    let mut regressors = vec![Vec::new(); reg_idx.len()];
    let mut n_filled = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let date = parse_date(field(date_idx), row, &schema.date_column)?;
        if let Some(&last) = dates.last() {
            if date <= last {
                return Err(IoError::NonMonotoneDates { row, date });
            }
            let mut next = last.succ_opt().expect("date in range");
            while next < date {
                dates.push(next);
                y.push(None);
                for col in regressors.iter_mut() {
                    col.push(None);
                }
                n_filled += 1;
                next = next.succ_opt().expect("date in range");
            }
        }
        dates.push(date);
        y.push(parse_value(field(target_idx), row, &schema.target)?);
        for (c, &idx) in reg_idx.iter().enumerate() {
            regressors[c].push(parse_value(field(idx), row, &schema.regressors[c])?);
        }
    }
    if dates.is_empty() {
        return Err(IoError::Invalid("no data rows".into()));
    }
    if n_filled > 0 {
        info!("filled {n_filled} missing calendar days");
    }
    Ok(Dataset {
        date_column: schema.date_column.clone(),
        dates,
        target: schema.target.clone(),
        y,
        regressor_names: schema.regressors.clone(),
        regressors,
    })
}
