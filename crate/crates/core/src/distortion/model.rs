use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TruthTable;

/// Per-letter cost `d(x, y, z)` of reconstructing `z` at B, with binary
/// `x`, `y`. A's cost is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionModel {
    // costs[z][x][y]
    costs: Vec<[[f64; 2]; 2]>,
    d_max: f64,
}

impl DistortionModel {
    /// `costs[z][x][y]`; `d_max` defaults to the largest entry.
    pub fn new(costs: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::InvalidConfig("reconstruction alphabet is empty".into()));
        }
        let mut d_max: f64 = 0.0;
        for table in &costs {
            for &c in table.iter().flatten() {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::InvalidConfig(format!("distortion entries must be finite and >= 0, got {c}")));
                }
                d_max = d_max.max(c);
            }
        }
        Ok(Self { costs, d_max })
    }

    /// Raises the declared bound; it may not undercut the table.
    pub fn with_d_max(mut self, d_max: f64) -> Result<Self> {
        if !(d_max >= self.d_max && d_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("d_max {d_max} is below the table maximum {}", self.d_max)));
        }
        self.d_max = d_max;
        Ok(self)
    }

    /// `1{x != z}`: B reproduces A's source.
    pub fn hamming_on_x() -> Self {
        let costs = (0..2)
            .map(|z| {
                let mut t = [[0.0; 2]; 2];
                for (x, row) in t.iter_mut().enumerate() {
                    row.fill(f64::from(u8::from(x != z)));
                }
                t
            })
            .collect();
        Self::new(costs).expect("hamming table is valid")
    }

    /// `1{f(x, y) != z}` over the distinct output symbols of `f`. At zero
    /// distortion this is computing `f` at B.
    pub fn hamming_on_function(f: &TruthTable) -> Self {
        let mut symbols: Vec<u8> = f.iter().flatten().copied().collect();
        symbols.sort_unstable();
        symbols.dedup();
        let costs = symbols
            .iter()
            .map(|&s| {
                let mut t = [[0.0; 2]; 2];
                for x in 0..2 {
                    for y in 0..2 {
                        t[x][y] = f64::from(u8::from(f[x][y] != s));
                    }
                }
                t
            })
            .collect();
        Self::new(costs).expect("hamming table is valid")
    }

    /// Reads `x,y,z,d` rows (header optional). `z` indexes the
    /// reconstruction alphabet from 0; missing entries cost 0.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut costs: Vec<[[f64; 2]; 2]> = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse("distortion table", e))?;
            if record.len() != 4 {
                return Err(Error::parse("distortion table", format!("line {}: expected x,y,z,d", line + 1)));
            }
            let parsed = (
                record[0].parse::<usize>(),
                record[1].parse::<usize>(),
                record[2].parse::<usize>(),
                record[3].parse::<f64>(),
            );
            let (x, y, z, d) = match parsed {
                (Ok(x), Ok(y), Ok(z), Ok(d)) => (x, y, z, d),
                _ if line == 0 => continue,
                _ => return Err(Error::parse("distortion table", format!("line {}: malformed row", line + 1))),
            };
            if x > 1 || y > 1 {
                return Err(Error::parse("distortion table", format!("line {}: x and y must be 0 or 1", line + 1)));
            }
            if costs.len() <= z {
                costs.resize(z + 1, [[0.0; 2]; 2]);
            }
            costs[z][x][y] = d;
        }
        Self::new(costs)
    }

    pub fn reconstruction_size(&self) -> usize {
        self.costs.len()
    }

    pub fn cost(&self, x: usize, y: usize, z: usize) -> f64 {
        self.costs[z][x][y]
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Least expected cost of a decoder that sees `y` only:
    /// `sum_y min_z sum_x p(x, y) d(x, y, z)`.
    pub fn zero_message_distortion(&self, joint: &[[f64; 2]; 2]) -> f64 {
        (0..2).map(|y| self.best_guess(|x| joint[x][y], y)).sum()
    }

    /// `min_z sum_x mass(x) d(x, y, z)`.
    pub(crate) fn best_guess(&self, mass: impl Fn(usize) -> f64, y: usize) -> f64 {
        let (m0, m1) = (mass(0), mass(1));
        self.costs
            .iter()
            .map(|t| m0 * t[0][y] + m1 * t[1][y])
            .fold(f64::INFINITY, f64::min)
    }
}
