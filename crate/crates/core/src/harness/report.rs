//! Sweep reports and their CSV / JSON encodings.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Measured values below this are treated as roundoff; no ratio is reported.
pub const RATIO_FLOOR: f64 = 1e-14;

/// One sample of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Curve within the experiment, e.g. `p=2 b=0.1` or `e_Q`.
    pub series: String,
    pub axis_value: f64,
    pub measured: f64,
    /// Estimate magnitude keyed by formula name; `NaN` where a formula does not apply.
    pub estimates: BTreeMap<String, f64>,
}

impl SweepRow {
    pub fn new(series: impl Into<String>, axis_value: f64, measured: f64) -> Self {
        SweepRow { series: series.into(), axis_value, measured, estimates: BTreeMap::new() }
    }

    pub fn with(mut self, formula: impl ToString, value: f64) -> Self {
        self.estimates.insert(formula.to_string(), value);
        self
    }

    /// estimate / measured, or `None` below the roundoff floor.
    pub fn ratio(&self, formula: &str) -> Option<f64> {
        let e = *self.estimates.get(formula)?;
        (self.measured > RATIO_FLOOR && e.is_finite()).then(|| e / self.measured)
    }
}

/// Output of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub experiment: String,
    pub axis_name: String,
    /// Formula columns in output order.
    pub formulas: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub meta: BTreeMap<String, Value>,
}

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::invalid(format!("unknown format {s:?} (csv or json)"))),
        }
    }
}

/// Float with 17 significant digits; `nan` / `inf` spelled out.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_num(v: f64) -> Value {
    if v.is_finite() {
        // Round-trip through the 17-digit text so JSON and CSV agree.
        serde_json::from_str(&fmt17(v)).unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}

impl SweepReport {
    pub fn new(experiment: impl Into<String>, axis_name: impl Into<String>) -> Self {
        SweepReport {
            experiment: experiment.into(),
            axis_name: axis_name.into(),
            formulas: Vec::new(),
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.meta.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// Appends rows, registering new formula columns in first-seen order.
    pub fn extend(&mut self, rows: impl IntoIterator<Item = SweepRow>) {
        for row in rows {
            for k in row.estimates.keys() {
                if !self.formulas.contains(k) {
                    self.formulas.push(k.clone());
                }
            }
            self.rows.push(row);
        }
    }

    /// Orders rows by series (first appearance) and then by axis value.
    pub fn sort_rows(&mut self) {
        let mut order: Vec<String> = Vec::new();
        for r in &self.rows {
            if !order.contains(&r.series) {
                order.push(r.series.clone());
            }
        }
        let rank = |s: &str| order.iter().position(|o| o == s).unwrap_or(usize::MAX);
        self.rows.sort_by(|a, b| rank(&a.series).cmp(&rank(&b.series)).then(a.axis_value.total_cmp(&b.axis_value)));
    }

    pub fn series(&self, name: &str) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.series == name).collect()
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["experiment", "series", "axis_name", "axis_value", "measured"].map(String::from).to_vec();
        h.extend(self.formulas.iter().cloned());
        h.extend(self.formulas.iter().map(|f| format!("ratio_{f}")));
        h
    }

    fn cells(&self, row: &SweepRow) -> Vec<String> {
        let mut c = vec![
            self.experiment.clone(),
            row.series.clone(),
            self.axis_name.clone(),
            fmt17(row.axis_value),
            fmt17(row.measured),
        ];
        for f in &self.formulas {
            c.push(fmt17(row.estimates.get(f).copied().unwrap_or(f64::NAN)));
        }
        for f in &self.formulas {
            c.push(fmt17(row.ratio(f).unwrap_or(f64::NAN)));
        }
        c
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::invalid(format!("CSV output failed: {e}"));
        w.write_record(self.header()).map_err(io)?;
        for row in &self.rows {
            w.write_record(self.cells(row)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("CSV output failed: {e}")))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let est: serde_json::Map<String, Value> =
                    self.formulas.iter().map(|f| (f.clone(), json_num(r.estimates.get(f).copied().unwrap_or(f64::NAN)))).collect();
                let ratios: serde_json::Map<String, Value> =
                    self.formulas.iter().map(|f| (f.clone(), json_num(r.ratio(f).unwrap_or(f64::NAN)))).collect();
                json!({
                    "experiment": self.experiment,
                    "series": r.series,
                    "axis_name": self.axis_name,
                    "axis_value": json_num(r.axis_value),
                    "measured": json_num(r.measured),
                    "estimates": est,
                    "ratios": ratios,
                })
            })
            .collect();
        let mut meta = serde_json::Map::new();
        meta.insert("experiment".into(), json!(self.experiment));
        meta.insert("axis_name".into(), json!(self.axis_name));
        meta.insert("formulas".into(), json!(self.formulas));
        for (k, v) in &self.meta {
            meta.insert(k.clone(), v.clone());
        }
        json!({ "meta": meta, "rows": rows })
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                let s = serde_json::to_string_pretty(&self.to_json()).map_err(|e| Error::invalid(e.to_string()))?;
                writeln!(out, "{s}").map_err(|e| Error::invalid(format!("output failed: {e}")))
            }
        }
    }
}
