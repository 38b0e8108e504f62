use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truth table over `{0,1}^2`, indexed `table[x][y]`. Output symbols are
/// opaque; only equality between them is ever used.
pub type TruthTable = [[u8; 2]; 2];

/// The pair of functions `f_A(x, y)` and `f_B(x, y)` that terminals A and B
/// must compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub f_a: TruthTable,
    pub f_b: TruthTable,
}

const AND: TruthTable = [*b"00", *b"01"];
const ZERO: TruthTable = [*b"00", *b"00"];

impl FunctionSpec {
    pub fn new(f_a: TruthTable, f_b: TruthTable) -> Self {
        Self { f_a, f_b }
    }

    /// Boolean AND required at both terminals.
    pub fn and_both() -> Self {
        Self::new(AND, AND)
    }

    /// Boolean AND required at terminal B only (`f_A` is constant).
    pub fn and_at_b() -> Self {
        Self::new(ZERO, AND)
    }

    /// Exchanges the roles of the two terminals: `f_A' = f_B^T`, `f_B' = f_A^T`.
    /// Pair this with `p <-> q` to obtain the mirrored problem.
    pub fn swap_terminals(&self) -> Self {
        Self::new(transpose(&self.f_b), transpose(&self.f_a))
    }

    pub fn f_a_is_constant(&self) -> bool {
        is_constant(&self.f_a)
    }

    pub fn f_b_is_constant(&self) -> bool {
        is_constant(&self.f_b)
    }

    /// Eight-symbol encoding: `f_a(0,0) f_a(0,1) f_a(1,0) f_a(1,1)` followed by
    /// the same for `f_b`.
    pub fn encode(&self) -> String {
        let mut out = String::with_capacity(8);
        for table in [&self.f_a, &self.f_b] {
            for row in table {
                for &s in row {
                    out.push(s as char);
                }
            }
        }
        out
    }
}

fn transpose(t: &TruthTable) -> TruthTable {
    [[t[0][0], t[1][0]], [t[0][1], t[1][1]]]
}

fn is_constant(t: &TruthTable) -> bool {
    t.iter().flatten().all(|&s| s == t[0][0])
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 8 || !bytes.iter().all(|b| b.is_ascii_graphic()) {
            return Err(Error::parse(
                "function truth table",
                format!("expected 8 printable ASCII symbols, got {s:?}"),
            ));
        }
        let table = |o: usize| [[bytes[o], bytes[o + 1]], [bytes[o + 2], bytes[o + 3]]];
        Ok(Self::new(table(0), table(4)))
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_roundtrip() {
        for spec in [FunctionSpec::and_both(), FunctionSpec::and_at_b()] {
            assert_eq!(spec.encode().parse::<FunctionSpec>().unwrap(), spec);
        }
        assert_eq!(FunctionSpec::and_at_b().encode(), "00000001");
        assert_eq!("0001abcd".parse::<FunctionSpec>().unwrap().f_b, [*b"ab", *b"cd"]);
    }

    #[test]
    fn rejects_bad_encodings() {
        assert!("0001".parse::<FunctionSpec>().is_err());
        assert!("0001 000".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn swap_is_an_involution() {
        let spec: FunctionSpec = "01230a1b".parse().unwrap();
        assert_eq!(spec.swap_terminals().swap_terminals(), spec);
        assert_eq!(FunctionSpec::and_both().swap_terminals(), FunctionSpec::and_both());
    }
}
