//! Single-site operator basis: generalized Gell-Mann matrices scaled to unit
//! operator norm.
//!
//! For local dimension `d` the `d² - 1` traceless elements are ordered as
//! symmetric `S_jk` for all `j < k` (lexicographic), then antisymmetric `A_jk`
//! in the same order, then diagonal `D_l` for `l = 1..d-1`. For `d = 2` this
//! gives `G0 = X`, `G1 = Y`, `G2 = Z`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteOp(pub u16);

impl SiteOp {
    pub const X: SiteOp = SiteOp(0);
    pub const Y: SiteOp = SiteOp(1);
    pub const Z: SiteOp = SiteOp(2);

    pub fn count(d: usize) -> usize {
        d * d - 1
    }

    pub fn check(self, d: usize) -> Result<()> {
        if (self.0 as usize) < Self::count(d) {
            Ok(())
        } else {
            Err(Error::InvalidTerm(format!(
                "operator {self} is not in the basis for d = {d}"
            )))
        }
    }

    /// Dense `d × d` matrix of this basis element.
    pub fn matrix(self, d: usize) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::zeros(d, d);
        let pairs = d * (d - 1) / 2;
        let idx = self.0 as usize;
        assert!(idx < Self::count(d), "operator index out of range");
        if idx < 2 * pairs {
            let (j, k) = nth_pair(d, idx % pairs);
            if idx < pairs {
                m[(j, k)] = C64::new(1.0, 0.0);
                m[(k, j)] = C64::new(1.0, 0.0);
            } else {
                m[(j, k)] = C64::new(0.0, -1.0);
                m[(k, j)] = C64::new(0.0, 1.0);
            }
        } else {
            let l = idx - 2 * pairs + 1;
            let inv = 1.0 / l as f64;
            for j in 0..l {
                m[(j, j)] = C64::new(inv, 0.0);
            }
            m[(l, l)] = C64::new(-1.0, 0.0);
        }
        m
    }
}

fn nth_pair(d: usize, mut n: usize) -> (usize, usize) {
    for j in 0..d {
        let row = d - j - 1;
        if n < row {
            return (j, j + 1 + n);
        }
        n -= row;
    }
    unreachable!("pair index out of range")
}

impl fmt::Display for SiteOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}", self.0)
    }
}

impl FromStr for SiteOp {
    type Err = Error;

    /// Accepts `X`, `Y`, `Z` (qubit aliases) or `G<index>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(SiteOp::X),
            "Y" | "y" => Ok(SiteOp::Y),
            "Z" | "z" => Ok(SiteOp::Z),
            _ => s
                .strip_prefix('G')
                .and_then(|rest| rest.parse::<u16>().ok())
                .map(SiteOp)
                .ok_or_else(|| Error::Config(format!("unknown operator name '{s}'"))),
        }
    }
}

impl Serialize for SiteOp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SiteOp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Largest singular value of a small dense matrix.
pub(crate) fn operator_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_aliases_are_paulis() {
        let x = SiteOp::X.matrix(2);
        let y = SiteOp::Y.matrix(2);
        let z = SiteOp::Z.matrix(2);
        assert_eq!(x[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(y[(0, 1)], C64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], C64::new(0.0, 1.0));
        assert_eq!(z[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], C64::new(-1.0, 0.0));
    }

    #[test]
    fn every_element_has_unit_norm_and_is_hermitian() {
        for d in 2..=4 {
            for i in 0..SiteOp::count(d) {
                let m = SiteOp(i as u16).matrix(d);
                assert!((operator_norm(&m) - 1.0).abs() < 1e-12, "d={d} i={i}");
                assert_eq!(m, m.adjoint());
                assert!(m.trace().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_elements_are_linearly_independent() {
        // Hilbert-Schmidt Gram matrix must be nonsingular.
        for d in 2..=4 {
            let c = SiteOp::count(d);
            let mats: Vec<_> = (0..c).map(|i| SiteOp(i as u16).matrix(d)).collect();
            let gram = DMatrix::<C64>::from_fn(c, c, |a, b| (mats[a].adjoint() * &mats[b]).trace());
            let sv = gram.singular_values();
            assert!(sv.min() > 1e-8, "d={d}");
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["G0", "G7", "G14"] {
            let op: SiteOp = s.parse().unwrap();
            assert_eq!(op.to_string(), s);
        }
        assert_eq!("Z".parse::<SiteOp>().unwrap(), SiteOp(2));
        assert!("Q".parse::<SiteOp>().is_err());
        assert!(SiteOp(3).check(2).is_err());
    }
}
