//! Lossless CSV for fields and traces, and the JSON run manifest.
//!
//! Floats are written with 17 significant digits, so parsing them back
//! yields the same bits. `Bottom` is the token `-inf`; infeasible sum-rates
//! are `inf`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distortion::RdField;
use crate::error::{Error, Result};
use crate::iteration::{IterationTrace, SumRateField};
use crate::model::{ExtendedReal, FieldLabel, ProductPmfGrid, RateField};

pub fn format_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn format_value(v: ExtendedReal) -> String {
    match v {
        ExtendedReal::Finite(x) => format_f64(x),
        ExtendedReal::Bottom => "-inf".into(),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|e| Error::parse("number", format!("{s:?}: {e}"))),
    }
}

fn parse_value(s: &str) -> Result<ExtendedReal> {
    let x = parse_f64(s)?;
    if x == f64::NEG_INFINITY {
        Ok(ExtendedReal::Bottom)
    } else if x.is_finite() {
        Ok(ExtendedReal::Finite(x))
    } else {
        Err(Error::parse("field value", s))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn field_text(grid: ProductPmfGrid, values: impl Iterator<Item = String>) -> String {
    let mut text = String::from("p,q,value\n");
    for ((_, _, p, q), v) in grid.nodes().zip(values) {
        text.push_str(&format!("{},{},{v}\n", format_f64(p), format_f64(q)));
    }
    text
}

/// `p,q,value`, one row per node, `p` outer.
pub fn write_field_csv(path: &Path, field: &RateField) -> Result<()> {
    write_text(path, &field_text(field.grid(), field.values().iter().map(|v| format_value(*v))))
}

pub fn write_sum_rate_csv(path: &Path, field: &SumRateField) -> Result<()> {
    write_text(path, &field_text(field.grid(), field.values().iter().map(|v| format_f64(*v))))
}

/// Reads a `p,q,value` file back; the grid size is inferred from the row count.
pub fn read_field_csv(path: &Path) -> Result<RateField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("p,q,value") {
        return Err(Error::parse("field csv", "expected header p,q,value"));
    }
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::parse("field csv", format!("bad row {line:?}")));
            }
            parse_value(cols[2].trim())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = (values.len() as f64).sqrt().round() as usize;
    if n * n != values.len() {
        return Err(Error::parse("field csv", format!("{} rows is not a square grid", values.len())));
    }
    RateField::from_values(ProductPmfGrid::new(n)?, values, FieldLabel::Other)
}

/// `param,D,value` for one-line families, `p,q,D,value` for the product family.
pub fn write_rd_field_csv(path: &Path, field: &RdField) -> Result<()> {
    let d = field.domain();
    let product = d.has_b_lines();
    let mut text = String::from(if product { "p,q,D,value\n" } else { "param,D,value\n" });
    for i in 0..d.param_size() {
        for j in 0..d.line_count() {
            for k in 0..d.distortion_size() {
                let v = format_value(field.get(i, j, k));
                let (p, dd) = (format_f64(d.param(i)), format_f64(d.distortion(k)));
                if product {
                    text.push_str(&format!("{p},{},{dd},{v}\n", format_f64(d.param(j))));
                } else {
                    text.push_str(&format!("{p},{dd},{v}\n"));
                }
            }
        }
    }
    write_text(path, &text)
}

/// `D,rate` plus optional extra named columns.
pub fn write_curve_csv(path: &Path, ds: &[f64], columns: &[(&str, &[f64])]) -> Result<()> {
    let mut text = String::from("D");
    for (name, _) in columns {
        text.push(',');
        text.push_str(name);
    }
    text.push('\n');
    for (k, d) in ds.iter().enumerate() {
        text.push_str(&format_f64(*d));
        for (_, col) in columns {
            text.push(',');
            text.push_str(&format_f64(col[k]));
        }
        text.push('\n');
    }
    write_text(path, &text)
}

/// `t,terminal,sup_change,max_oracle_gap,seconds`; a missing gap is empty.
pub fn write_trace_csv(path: &Path, trace: &IterationTrace) -> Result<()> {
    let mut text = String::from("t,terminal,sup_change,max_oracle_gap,seconds\n");
    for r in &trace.records {
        let gap = r.max_oracle_gap.map(format_f64).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{gap},{}\n",
            r.messages,
            r.terminal,
            format_f64(r.sup_change),
            format_f64(r.seconds)
        ));
    }
    write_text(path, &text)
}

/// Everything needed to rerun a command. Serialized with sorted keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Command line after the binary name, enough to replay the run.
    pub args: Vec<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub tool_version: String,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        // a Value round trip sorts struct keys too
        let value = serde_json::to_value(self).map_err(|e| Error::parse("manifest", e))?;
        let text = serde_json::to_string_pretty(&value).map_err(|e| Error::parse("manifest", e))?;
        write_text(path, &(text + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse("manifest", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rho0_field, FunctionSpec};
    use crate::oracles::{rho_star_field, ClosedForm};
    use proptest::prelude::*;

    #[test]
    fn field_round_trip_keeps_bits() {
        let dir = tempfile::tempdir().unwrap();
        let grid = ProductPmfGrid::new(13).unwrap();
        for field in [rho0_field(grid, &FunctionSpec::and_at_b()), rho_star_field(grid, ClosedForm::AndBoth)] {
            let path = dir.path().join("f.csv");
            write_field_csv(&path, &field).unwrap();
            let back = read_field_csv(&path).unwrap();
            assert_eq!(back.values(), field.values());
        }
    }

    #[test]
    fn bottom_and_infinity_tokens() {
        assert_eq!(format_value(ExtendedReal::Bottom), "-inf");
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(parse_value("-inf").unwrap(), ExtendedReal::Bottom);
        assert!(parse_value("inf").is_err());
        assert!(parse_value("nan").is_err());
    }

    #[test]
    fn rejects_malformed_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "p,q,value\n0,0,1\n0,1,1\n1,0,1\n").unwrap();
        assert!(read_field_csv(&path).is_err());
        fs::write(&path, "x,y\n").unwrap();
        assert!(read_field_csv(&path).is_err());
    }

    #[test]
    fn manifest_keys_are_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let m = RunManifest {
            subcommand: "iterate".into(),
            args: vec!["iterate".into(), "--n".into(), "5".into()],
            parameters: BTreeMap::from([("z".into(), 1.into()), ("a".into(), 2.into())]),
            seed: 0,
            tool_version: "0".into(),
            wall_seconds: 0.5,
            outputs: vec![],
        };
        m.write(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let keys = ["\"args\"", "\"outputs\"", "\"parameters\"", "\"seed\"", "\"subcommand\"", "\"tool_version\"", "\"wall_seconds\""];
        let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(text.find("\"a\"").unwrap() < text.find("\"z\"").unwrap());
        assert_eq!(RunManifest::read(&path).unwrap(), m);
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            prop_assert_eq!(parse_f64(&format_f64(x)).unwrap().to_bits(), x.to_bits());
        }
    }
}
