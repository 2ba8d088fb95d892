//! Canonical-form truncation and compressed arithmetic.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{from_mat, lossless_rank, svd, to_mat};
use super::{Mpo, ZERO};
use crate::error::{Error, Result};
use crate::C64;

/// How bonds are truncated after an operation.
///
/// `FixedTolerance(t)` drops, at every cut, the longest tail of singular
/// values whose squared weight is at most `t` times the cut's total squared
/// weight. `FixedTolerance(0.0)` is therefore lossless: it only removes
/// singular values below the roundoff floor. `FixedMaxBond(D)` keeps at most
/// `D` values per cut on top of the roundoff floor.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CompressionPolicy {
    None,
    FixedTolerance { tolerance: f64 },
    FixedMaxBond { max_bond: usize },
}

impl CompressionPolicy {
    pub const LOSSLESS: CompressionPolicy = CompressionPolicy::FixedTolerance { tolerance: 0.0 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            CompressionPolicy::FixedTolerance { tolerance } if !(tolerance >= 0.0 && tolerance.is_finite()) => {
                Err(Error::InvalidParameter(format!("tolerance must be >= 0, got {tolerance}")))
            }
            CompressionPolicy::FixedMaxBond { max_bond: 0 } => {
                Err(Error::InvalidParameter("max bond must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Whether truncation can discard more than roundoff.
    pub fn is_lossy(&self) -> bool {
        match *self {
            CompressionPolicy::None => false,
            CompressionPolicy::FixedTolerance { tolerance } => tolerance > 0.0,
            CompressionPolicy::FixedMaxBond { .. } => true,
        }
    }

    /// Parses `none`, `tol=<t>` or `maxbond=<D>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let policy = if s == "none" {
            CompressionPolicy::None
        } else if let Some(t) = s.strip_prefix("tol=") {
            let tolerance = t
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad tolerance '{t}'")))?;
            CompressionPolicy::FixedTolerance { tolerance }
        } else if let Some(b) = s.strip_prefix("maxbond=") {
            let max_bond = b
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad max bond '{b}'")))?;
            CompressionPolicy::FixedMaxBond { max_bond }
        } else {
            return Err(Error::InvalidParameter(format!(
                "compression must be none, tol=<t> or maxbond=<D>, got '{s}'"
            )));
        };
        policy.validate()?;
        Ok(policy)
    }

    fn keep(&self, s: &[f64]) -> usize {
        let floor = lossless_rank(s);
        match *self {
            CompressionPolicy::None => s.len(),
            CompressionPolicy::FixedTolerance { tolerance } => {
                let total: f64 = s.iter().map(|x| x * x).sum();
                let mut tail = 0.0;
                let mut k = s.len();
                while k > 1 && tail + s[k - 1] * s[k - 1] <= tolerance * total {
                    tail += s[k - 1] * s[k - 1];
                    k -= 1;
                }
                k.min(floor)
            }
            CompressionPolicy::FixedMaxBond { max_bond } => floor.min(max_bond),
        }
    }
}

impl std::fmt::Display for CompressionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompressionPolicy::None => write!(f, "none"),
            CompressionPolicy::FixedTolerance { tolerance } => write!(f, "tol={tolerance}"),
            CompressionPolicy::FixedMaxBond { max_bond } => write!(f, "maxbond={max_bond}"),
        }
    }
}

/// Left QR sweep then right-to-left SVD sweep. Returns the compressed MPO and
/// the summed squared singular values discarded over all cuts, which bounds
/// the squared Frobenius error. The ledger is carried over unchanged.
pub fn compress(a: &Mpo, policy: CompressionPolicy) -> (Mpo, f64) {
    if policy == CompressionPolicy::None || a.n() == 1 {
        return (a.clone(), 0.0);
    }
    let (d, mut bonds, mut cores, ledger) = a.clone().into_parts();
    let n = cores.len();
    let dd = d * d;
    for s in 0..n - 1 {
        let (l, r) = (bonds[s], bonds[s + 1]);
        let qr = to_mat(&cores[s], l * dd, r).qr();
        let q = qr.q();
        let rm = qr.r();
        let k = q.ncols();
        cores[s] = from_mat(&q);
        let next_r = bonds[s + 2];
        cores[s + 1] = from_mat(&(rm * to_mat(&cores[s + 1], r, dd * next_r)));
        bonds[s + 1] = k;
    }
    let mut discarded = 0.0;
    for s in (1..n).rev() {
        let (l, r) = (bonds[s], bonds[s + 1]);
        let f = svd(to_mat(&cores[s], l, dd * r));
        let k = policy.keep(&f.s);
        discarded += f.s[k..].iter().map(|x| x * x).sum::<f64>();
        cores[s] = from_mat(&f.v_t.rows(0, k).into_owned());
        let us = DMatrix::from_fn(l, k, |i, j| f.u[(i, j)] * f.s[j]);
        let prev_l = bonds[s - 1];
        cores[s - 1] = from_mat(&(to_mat(&cores[s - 1], prev_l * dd, l) * us));
        bonds[s] = k;
    }
    let out = Mpo::with_ledger(d, bonds, cores, ledger).expect("compression keeps shapes consistent");
    (out, discarded)
}

/// `compress(a · b)` without materializing the product bonds: a left-to-right
/// zip-up that drops only roundoff-level singular values, followed by
/// [`compress`] with `policy`. The ledger is that of the exact product.
///
/// With `CompressionPolicy::None` this is the exact product.
pub fn multiply_compressed(a: &Mpo, b: &Mpo, policy: CompressionPolicy) -> Result<(Mpo, f64)> {
    if policy == CompressionPolicy::None {
        return Ok((a.multiply(b)?, 0.0));
    }
    if a.n() != b.n() || a.d() != b.d() {
        return Err(Error::ShapeMismatch("MPO shapes differ".into()));
    }
    let n = a.n();
    let d = a.d();
    let dd = d * d;
    let ledger: Vec<f64> = (0..=n).map(|c| a.ledger()[c] + b.ledger()[c]).collect();
    let mut bonds = vec![1usize];
    let mut cores = Vec::with_capacity(n);
    // carry[nb, (la, lb)]
    let mut carry = vec![C64::new(1.0, 0.0)];
    let mut nb = 1usize;
    let mut zip_discarded = 0.0;
    for s in 0..n {
        let (la, ra) = (a.bonds()[s], a.bonds()[s + 1]);
        let (lb, rb) = (b.bonds()[s], b.bonds()[s + 1]);
        // x[(nb, lb), (o, k, ra)] = Σ_la carry[nb, la, lb] A[la, o, k, ra]
        let mut c_perm = vec![ZERO; nb * lb * la];
        for x in 0..nb {
            for ia in 0..la {
                for ib in 0..lb {
                    c_perm[(x * lb + ib) * la + ia] = carry[x * la * lb + ia * lb + ib];
                }
            }
        }
        let x = to_mat(&c_perm, nb * lb, la) * to_mat(a.core(s), la, dd * ra);
        // regroup to [(nb, o, ra), (lb, k)]
        let mut x_perm = vec![ZERO; nb * d * ra * lb * d];
        for xn in 0..nb {
            for ib in 0..lb {
                for o in 0..d {
                    for k in 0..d {
                        for ja in 0..ra {
                            let row = (xn * d + o) * ra + ja;
                            x_perm[row * lb * d + ib * d + k] = x[(xn * lb + ib, (o * d + k) * ra + ja)];
                        }
                    }
                }
            }
        }
        // y[(nb, o, ra), (i, rb)]
        let y = to_mat(&x_perm, nb * d * ra, lb * d) * to_mat(b.core(s), lb * d, d * rb);
        // t[(nb, o, i), (ra, rb)]
        let mut t = vec![ZERO; nb * dd * ra * rb];
        for xn in 0..nb {
            for o in 0..d {
                for ja in 0..ra {
                    let row = (xn * d + o) * ra + ja;
                    for i in 0..d {
                        for jb in 0..rb {
                            t[((xn * d + o) * d + i) * ra * rb + ja * rb + jb] = y[(row, i * rb + jb)];
                        }
                    }
                }
            }
        }
        if s == n - 1 {
            cores.push(t);
            bonds.push(1);
            break;
        }
        let f = svd(to_mat(&t, nb * dd, ra * rb));
        let k = lossless_rank(&f.s);
        zip_discarded += f.s[k..].iter().map(|x| x * x).sum::<f64>();
        cores.push(from_mat(&f.u.columns(0, k).into_owned()));
        carry = from_mat(&DMatrix::from_fn(k, ra * rb, |r, c| f.v_t[(r, c)] * f.s[r]));
        nb = k;
        bonds.push(k);
    }
    let zipped = Mpo::with_ledger(d, bonds, cores, ledger)?;
    let (out, discarded) = compress(&zipped, policy);
    Ok((out, discarded + zip_discarded))
}

/// `compress(a + b)`.
pub fn add_compressed(a: &Mpo, b: &Mpo, policy: CompressionPolicy) -> Result<(Mpo, f64)> {
    Ok(compress(&a.add(b)?, policy))
}
