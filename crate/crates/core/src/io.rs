//! Plot-ready exports.
//!
//! CSV floats are written in scientific notation with 17 significant digits,
//! which round-trips every finite `f64` exactly; Rust formatting never
//! consults a locale, so the decimal separator is always `.`. A missing free
//! boundary is written as an empty field.

use std::io::Write;

use serde::Serialize;

use crate::bvp::SolutionProfile;
use crate::error::{DeadcoreError, Result};
use crate::free_boundary::SweepResult;
use crate::nonradial::EnvelopeProfile;

pub const ARTIFACT_NAME: &str = "deadcore";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header row, then one row per item; `None` becomes an empty field.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<Option<f64>>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(row.into_iter().map(|v| v.map(format_float).unwrap_or_default()))
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> DeadcoreError {
    DeadcoreError::Csv(e.to_string())
}

/// Columns `r,u`.
pub fn write_profile_csv<W: Write>(w: W, profile: &SolutionProfile) -> Result<()> {
    let rows = profile
        .grid
        .nodes
        .iter()
        .zip(&profile.values)
        .map(|(&r, &u)| vec![Some(r), Some(u)]);
    write_table(w, &["r", "u"], rows)
}

/// Columns `h,r_star`, in the (sorted) order of the sweep.
pub fn write_sweep_csv<W: Write>(w: W, sweep: &SweepResult) -> Result<()> {
    let rows = sweep.samples.iter().map(|s| vec![Some(s.h), s.r_star]);
    write_table(w, &["h", "r_star"], rows)
}

/// Columns `r,B_plus,B_minus,AB_minus`.
pub fn write_envelope_csv<W: Write>(w: W, env: &EnvelopeProfile) -> Result<()> {
    let rows = (0..env.r.len()).map(|i| {
        vec![
            Some(env.r[i]),
            Some(env.b_plus[i]),
            Some(env.b_minus[i]),
            Some(env.ab_minus[i]),
        ]
    });
    write_table(w, &["r", "B_plus", "B_minus", "AB_minus"], rows)
}

/// A parsed numeric CSV: header names and rows, `None` for empty fields.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Parse the CSV dialect written by this module: a header line, then rows of
/// floats with the header's width.
pub fn parse_numeric_csv(text: &str) -> Result<NumericTable> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().any(|h| h.is_empty()) {
        return Err(DeadcoreError::Csv("CSV header has an empty column name".into()));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>()
                        .map(Some)
                        .map_err(|e| DeadcoreError::Csv(format!("record {}: {c:?}: {e}", k + 1)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { header, rows })
}

/// JSON envelope for every artifact: what produced it, with which settings.
#[derive(Debug, Serialize)]
pub struct Document<'a, C: Serialize, T: Serialize> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub kind: &'a str,
    pub config: &'a C,
    pub result: &'a T,
}

pub fn json_document<C: Serialize, T: Serialize>(kind: &str, config: &C, result: &T) -> Result<String> {
    let doc = Document {
        artifact: ARTIFACT_NAME,
        version: ARTIFACT_VERSION,
        kind,
        config,
        result,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [
            0.0,
            1.0,
            0.1,
            1.0 / 3.0,
            4.301_929_7,
            6.02e23,
            5e-324,
            f64::MAX,
            -2.5e-7,
        ] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(|c| c.is_ascii_digit())
                .count();
            assert_eq!(digits, 17, "{s}");
            assert!(!s.contains(','));
        }
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(parse_numeric_csv("").is_err());
        assert!(parse_numeric_csv("a,b\n1,2,3\n").is_err());
        assert!(parse_numeric_csv("a,b\n1\n").is_err());
        assert!(parse_numeric_csv("a,b\n1,x\n").is_err());
        assert!(parse_numeric_csv("a,\n1,2\n").is_err());
        let t = parse_numeric_csv("h,r_star\n1e2,\n1e3,5.5\n").unwrap();
        assert_eq!(t.column("r_star").unwrap(), vec![None, Some(5.5)]);
        assert!(t.column("u").is_none());
    }

    #[test]
    fn document_embeds_version_and_config() {
        let cfg = crate::bvp::SolveConfig::default();
        let s = json_document("profile", &cfg, &[1.0, 2.0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["artifact"], ARTIFACT_NAME);
        assert_eq!(v["version"], ARTIFACT_VERSION);
        assert_eq!(v["config"]["grid_points"], 1000);
        assert_eq!(v["result"][1], 2.0);
    }

    #[test]
    fn json_numbers_parse_correctly_rounded() {
        // long mantissas are where a fast, inexact float parser drifts by an ulp
        let long = format!("1.{}", "3".repeat(120));
        let x: f64 = serde_json::from_str(&long).unwrap();
        assert_eq!(x, long.parse::<f64>().unwrap());
        let y: f64 = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(x.to_bits(), y.to_bits());
        let z: f64 = serde_json::from_str("44444444444444444444444444444444444444444444444444444444444444888").unwrap();
        assert_eq!(
            z,
            "44444444444444444444444444444444444444444444444444444444444444888"
                .parse::<f64>()
                .unwrap()
        );
    }
}
