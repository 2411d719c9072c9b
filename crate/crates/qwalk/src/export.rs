//! CSV tables with a fixed column order and 12-significant-digit numbers.

use std::path::Path;

use qwalk_core::spectrum::SpectrumRecord;
use qwalk_core::ProbabilityDistribution;

use crate::error::{Result, RunError};

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Float(x) => format_number(*x),
            Self::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Self::Int(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Self::Int(x as i64)
    }
}

/// Header plus rows; every row must have the header's width.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render))?;
        }
        w.into_inner()
            .map_err(|e| RunError::Io { path: "<memory>".into(), source: std::io::Error::other(e.to_string()) })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        std::fs::write(path, bytes).map_err(|source| RunError::Io { path: path.into(), source })
    }
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// scientific notation only for very small or large magnitudes.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mant));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Columns `n, P`.
pub fn distribution_table(p: &ProbabilityDistribution) -> Table {
    let mut t = Table::new(["n", "P"]);
    for (n, x) in p.iter() {
        t.push(vec![n.into(), x.into()]);
    }
    t
}

/// Columns `phi, sector_id, E, ipr`.
pub fn spectrum_table(records: &[SpectrumRecord]) -> Table {
    let mut t = Table::new(["phi", "sector_id", "E", "ipr"]);
    for r in records {
        t.push(vec![r.phi.into(), r.sector_id.into(), r.quasi_energy.into(), r.ipr.into()]);
    }
    t
}

/// Header label for a value-per-angle column.
pub fn column_label(prefix: &str, name: &str, angle: f64) -> String {
    format!("{prefix}[{name}={}]", format_number(angle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(-2.0), "-2");
        assert_eq!(format_number(1e-9), "1e-9");
        assert_eq!(format_number(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(format_number(123456.0), "123456");
        assert_eq!(format_number(1e13), "1e13");
        assert_eq!(format_number(0.0001234), "0.0001234");
        assert_eq!(format_number(-0.0), "0");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = spectrum_table(&[]);
        assert_eq!(t.to_bytes().unwrap(), b"phi,sector_id,E,ipr\n");
    }

    #[test]
    fn distribution_columns() {
        let p = ProbabilityDistribution::delta(3, 0);
        let s = String::from_utf8(distribution_table(&p).to_bytes().unwrap()).unwrap();
        assert_eq!(s, "n,P\n-1,0\n0,1\n1,0\n");
    }
}
