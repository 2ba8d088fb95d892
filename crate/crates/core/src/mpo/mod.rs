//! Matrix product operators: storage, exact arithmetic, dense conversion,
//! compression, Hamiltonian builders and a binary container format.
//!
//! Site `s` holds a core of shape `(left, d_out, d_in, right)` stored row-major.
//! The first site is the most significant digit of the dense index, matching
//! [`HamiltonianSpec::dense_matrix`](crate::model::HamiltonianSpec::dense_matrix).
//!
//! Every MPO also carries a bond ledger: the natural log of the bond
//! dimension the operator would have if no rank reduction had ever been
//! applied. Products add ledgers, sums combine them with log-sum-exp.

mod compress;
mod hamiltonian;
mod io;
pub(crate) mod linalg;

use nalgebra::DMatrix;
use rand::Rng;

pub use compress::{add_compressed, compress, multiply_compressed, CompressionPolicy};
pub use hamiltonian::{boundary_mpo, generic_bond_cap, hamiltonian_mpo, region_mpo};
pub use io::{read_mpo, write_mpo, MAGIC, VERSION};
pub use linalg::LOSSLESS_RTOL;

use crate::error::{Error, Result};
use crate::model::checked_pow;
use crate::C64;
use linalg::{from_mat, ln_add_exp, svd, to_mat};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct Mpo {
    d: usize,
    bonds: Vec<usize>,
    cores: Vec<Vec<C64>>,
    ledger: Vec<f64>,
}

impl Mpo {
    /// Validates shapes; the ledger starts at the actual bonds.
    pub fn new(d: usize, bonds: Vec<usize>, cores: Vec<Vec<C64>>) -> Result<Self> {
        let ledger = bonds.iter().map(|&b| (b as f64).ln()).collect();
        Self::with_ledger(d, bonds, cores, ledger)
    }

    pub fn with_ledger(d: usize, bonds: Vec<usize>, cores: Vec<Vec<C64>>, ledger: Vec<f64>) -> Result<Self> {
        let n = cores.len();
        if n == 0 || d == 0 {
            return Err(Error::ShapeMismatch("an MPO needs at least one site".into()));
        }
        if bonds.len() != n + 1 || ledger.len() != n + 1 {
            return Err(Error::ShapeMismatch(format!("{n} cores need {} bonds", n + 1)));
        }
        if bonds[0] != 1 || bonds[n] != 1 {
            return Err(Error::ShapeMismatch("boundary bonds must be 1".into()));
        }
        for (s, core) in cores.iter().enumerate() {
            if bonds[s] == 0 || core.len() != bonds[s] * d * d * bonds[s + 1] {
                return Err(Error::ShapeMismatch(format!("core {s} does not match its bonds")));
            }
        }
        Ok(Mpo { d, bonds, cores, ledger })
    }

    pub fn identity(n: usize, d: usize) -> Self {
        let mut core = vec![ZERO; d * d];
        for o in 0..d {
            core[o * d + o] = ONE;
        }
        Mpo::new(d, vec![1; n + 1], vec![core; n]).expect("identity shapes")
    }

    pub fn zero(n: usize, d: usize) -> Self {
        Mpo::new(d, vec![1; n + 1], vec![vec![ZERO; d * d]; n]).expect("zero shapes")
    }

    /// Product operator `⊗_s ops[s]` with `d × d` factors.
    pub fn product(ops: &[DMatrix<C64>]) -> Result<Self> {
        let d = ops.first().map(|m| m.nrows()).unwrap_or(0);
        let cores = ops
            .iter()
            .map(|m| {
                if m.shape() != (d, d) {
                    return Err(Error::ShapeMismatch("product factors must be d x d".into()));
                }
                Ok(from_mat(m))
            })
            .collect::<Result<Vec<_>>>()?;
        Mpo::new(d, vec![1; ops.len() + 1], cores)
    }

    /// Uniform interior bond, entries uniform in the unit square scaled by
    /// `1 / bond`.
    pub fn random(n: usize, d: usize, bond: usize, rng: &mut impl Rng) -> Self {
        let mut bonds = vec![bond.max(1); n + 1];
        bonds[0] = 1;
        bonds[n] = 1;
        let scale = 1.0 / bond.max(1) as f64;
        let cores = (0..n)
            .map(|s| {
                (0..bonds[s] * d * d * bonds[s + 1])
                    .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
                    .collect()
            })
            .collect();
        Mpo::new(d, bonds, cores).expect("random shapes")
    }

    pub fn n(&self) -> usize {
        self.cores.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Bond profile of length `n + 1`.
    pub fn bonds(&self) -> &[usize] {
        &self.bonds
    }

    pub fn max_bond(&self) -> usize {
        self.bonds.iter().copied().max().unwrap_or(1)
    }

    /// Natural log of the uncompressed bond dimension at each cut.
    pub fn ledger(&self) -> &[f64] {
        &self.ledger
    }

    pub fn ledger_max_ln(&self) -> f64 {
        self.ledger.iter().copied().fold(0.0, f64::max)
    }

    pub fn core(&self, site: usize) -> &[C64] {
        &self.cores[site]
    }

    pub(crate) fn into_parts(self) -> (usize, Vec<usize>, Vec<Vec<C64>>, Vec<f64>) {
        (self.d, self.bonds, self.cores, self.ledger)
    }

    fn check_same_shape(&self, other: &Mpo) -> Result<()> {
        if self.n() != other.n() || self.d != other.d {
            return Err(Error::ShapeMismatch(format!(
                "MPO shapes differ: (n={}, d={}) vs (n={}, d={})",
                self.n(),
                self.d,
                other.n(),
                other.d
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: C64) -> Mpo {
        let mut out = self.clone();
        out.cores[0].iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Block-diagonal sum; interior bonds add.
    pub fn add(&self, other: &Mpo) -> Result<Mpo> {
        self.check_same_shape(other)?;
        let (n, d) = (self.n(), self.d);
        if n == 1 {
            let core = self.cores[0].iter().zip(&other.cores[0]).map(|(a, b)| a + b).collect();
            return Mpo::new(d, vec![1, 1], vec![core]);
        }
        let bonds: Vec<usize> = (0..=n)
            .map(|c| if c == 0 || c == n { 1 } else { self.bonds[c] + other.bonds[c] })
            .collect();
        let ledger = (0..=n)
            .map(|c| if c == 0 || c == n { 0.0 } else { ln_add_exp(self.ledger[c], other.ledger[c]) })
            .collect();
        let mut cores = Vec::with_capacity(n);
        for s in 0..n {
            let (l, r) = (bonds[s], bonds[s + 1]);
            let mut core = vec![ZERO; l * d * d * r];
            for (src, l_off, r_off) in [
                (self, 0, 0),
                (
                    other,
                    if s == 0 { 0 } else { self.bonds[s] },
                    if s == n - 1 { 0 } else { self.bonds[s + 1] },
                ),
            ] {
                let (sl, sr) = (src.bonds[s], src.bonds[s + 1]);
                let c = &src.cores[s];
                for a in 0..sl {
                    for oi in 0..d * d {
                        for b in 0..sr {
                            core[((a + l_off) * d * d + oi) * r + b + r_off] = c[(a * d * d + oi) * sr + b];
                        }
                    }
                }
            }
            cores.push(core);
        }
        Mpo::with_ledger(d, bonds, cores, ledger)
    }

    pub fn sub(&self, other: &Mpo) -> Result<Mpo> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Exact operator product `self · other`; bonds multiply.
    pub fn multiply(&self, other: &Mpo) -> Result<Mpo> {
        self.check_same_shape(other)?;
        let d = self.d;
        let n = self.n();
        let bonds: Vec<usize> = (0..=n).map(|c| self.bonds[c] * other.bonds[c]).collect();
        let ledger = (0..=n).map(|c| self.ledger[c] + other.ledger[c]).collect();
        let cores = (0..n)
            .map(|s| {
                let (la, ra) = (self.bonds[s], self.bonds[s + 1]);
                let (lb, rb) = (other.bonds[s], other.bonds[s + 1]);
                let (a, b) = (&self.cores[s], &other.cores[s]);
                let mut core = vec![ZERO; la * lb * d * d * ra * rb];
                let r = ra * rb;
                for ia in 0..la {
                    for o in 0..d {
                        for k in 0..d {
                            for ja in 0..ra {
                                let av = a[((ia * d + o) * d + k) * ra + ja];
                                if av == ZERO {
                                    continue;
                                }
                                for ib in 0..lb {
                                    let l = ia * lb + ib;
                                    for i in 0..d {
                                        for jb in 0..rb {
                                            let bv = b[((ib * d + k) * d + i) * rb + jb];
                                            core[((l * d + o) * d + i) * r + ja * rb + jb] += av * bv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                core
            })
            .collect();
        Mpo::with_ledger(d, bonds, cores, ledger)
    }

    /// `self ⊗ other` on the concatenated chain.
    pub fn concat(&self, other: &Mpo) -> Result<Mpo> {
        if self.d != other.d {
            return Err(Error::ShapeMismatch("local dimensions differ".into()));
        }
        let mut bonds = self.bonds.clone();
        bonds.extend_from_slice(&other.bonds[1..]);
        let mut ledger = self.ledger.clone();
        ledger.extend_from_slice(&other.ledger[1..]);
        let mut cores = self.cores.clone();
        cores.extend(other.cores.iter().cloned());
        Mpo::with_ledger(self.d, bonds, cores, ledger)
    }

    /// Full `d^n × d^n` matrix.
    pub fn densify(&self, cap: usize) -> Result<DMatrix<C64>> {
        let d = self.d;
        let n = self.n();
        let dim = checked_pow(d, n).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::DenseCapExceeded { dim, cap });
        }
        // acc[(O, I), l] with O, I over the sites contracted so far
        let mut acc = vec![ONE];
        let mut side = 1usize;
        for s in 0..n {
            let (l, r) = (self.bonds[s], self.bonds[s + 1]);
            let t = to_mat(&acc, side * side, l) * to_mat(&self.cores[s], l, d * d * r);
            let next_side = side * d;
            let mut next = vec![ZERO; next_side * next_side * r];
            for big_o in 0..side {
                for big_i in 0..side {
                    let row = big_o * side + big_i;
                    for o in 0..d {
                        for i in 0..d {
                            let dst = ((big_o * d + o) * next_side + big_i * d + i) * r;
                            for b in 0..r {
                                next[dst + b] = t[(row, (o * d + i) * r + b)];
                            }
                        }
                    }
                }
            }
            acc = next;
            side = next_side;
        }
        Ok(to_mat(&acc, side, side))
    }

    /// Exact re-encoding of a dense operator by sequential SVDs, dropping
    /// only singular values below the lossless floor.
    pub fn from_dense(m: &DMatrix<C64>, n: usize, d: usize) -> Result<Mpo> {
        let dim = checked_pow(d, n).ok_or_else(|| Error::InvalidParameter("dimension overflow".into()))?;
        if n == 0 || m.shape() != (dim, dim) {
            return Err(Error::ShapeMismatch(format!("expected {dim} x {dim}, got {:?}", m.shape())));
        }
        // interleave digits: (o1, i1, o2, i2, ...)
        let mut v = vec![ZERO; dim * dim];
        for row in 0..dim {
            for col in 0..dim {
                let mut idx = 0;
                for s in 0..n {
                    let p = checked_pow(d, n - 1 - s).unwrap();
                    idx = (idx * d + (row / p) % d) * d + (col / p) % d;
                }
                v[idx] = m[(row, col)];
            }
        }
        let mut bonds = vec![1usize];
        let mut cores = Vec::with_capacity(n);
        let mut rest = v;
        let mut left = 1usize;
        for _ in 0..n - 1 {
            let rows = left * d * d;
            let cols = rest.len() / rows;
            let f = svd(to_mat(&rest, rows, cols));
            let k = linalg::lossless_rank(&f.s);
            cores.push(from_mat(&f.u.columns(0, k).into_owned()));
            let sv = DMatrix::from_fn(k, cols, |r, c| f.v_t[(r, c)] * f.s[r]);
            rest = from_mat(&sv);
            left = k;
            bonds.push(k);
        }
        cores.push(rest);
        bonds.push(1);
        Mpo::new(d, bonds, cores)
    }

    pub fn trace(&self) -> C64 {
        let d = self.d;
        let mut v = vec![ONE];
        for (s, core) in self.cores.iter().enumerate() {
            let (l, r) = (self.bonds[s], self.bonds[s + 1]);
            let mut next = vec![ZERO; r];
            for a in 0..l {
                if v[a] == ZERO {
                    continue;
                }
                for o in 0..d {
                    for b in 0..r {
                        next[b] += v[a] * core[((a * d + o) * d + o) * r + b];
                    }
                }
            }
            v = next;
        }
        v[0]
    }
}

/// `A^q` by left fold. Without compression the bond profile is the exact
/// `q`-fold elementwise power. `bond_cap` bounds every intermediate bond and
/// fails fast with the ledger estimate attached.
pub fn power(a: &Mpo, q: usize, policy: CompressionPolicy, bond_cap: Option<usize>) -> Result<Mpo> {
    if q == 0 {
        return Err(Error::InvalidParameter("power exponent must be at least 1".into()));
    }
    let cap = bond_cap.unwrap_or(usize::MAX);
    let check = |predicted: usize, ledger_ln: f64| {
        if predicted > cap {
            Err(Error::BondCapExceeded { actual: predicted, cap, ledger_ln })
        } else {
            Ok(())
        }
    };
    check(a.max_bond(), a.ledger_max_ln())?;
    let mut acc = a.clone();
    for _ in 1..q {
        if policy == CompressionPolicy::None {
            let predicted = (0..=a.n())
                .map(|c| acc.bonds[c].saturating_mul(a.bonds[c]))
                .max()
                .unwrap_or(1);
            let ledger = (0..=a.n()).map(|c| acc.ledger[c] + a.ledger[c]).fold(0.0, f64::max);
            check(predicted, ledger)?;
            acc = acc.multiply(a)?;
        } else {
            acc = multiply_compressed(&acc, a, policy)?.0;
            check(acc.max_bond(), acc.ledger_max_ln())?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CAP: usize = 1 << 12;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_densifies_to_identity() {
        for n in 1..=3 {
            let m = Mpo::identity(n, 2).densify(CAP).unwrap();
            let dim = 1 << n;
            assert_eq!(m, DMatrix::identity(dim, dim));
        }
    }

    #[test]
    fn identity_is_neutral() {
        let a = Mpo::random(3, 2, 3, &mut rng(1));
        let p = a.multiply(&Mpo::identity(3, 2)).unwrap();
        assert!(max_diff(&p.densify(CAP).unwrap(), &a.densify(CAP).unwrap()) < 1e-14);
    }

    #[test]
    fn bond_rules() {
        let a = Mpo::random(4, 2, 2, &mut rng(2));
        let b = Mpo::random(4, 2, 2, &mut rng(3));
        assert_eq!(a.multiply(&b).unwrap().bonds(), &[1, 4, 4, 4, 1]);
        assert_eq!(a.add(&b).unwrap().bonds(), &[1, 4, 4, 4, 1]);
        let l = a.multiply(&b).unwrap().ledger().to_vec();
        assert!((l[2] - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn multiply_matches_dense() {
        let a = Mpo::random(4, 2, 3, &mut rng(4));
        let b = Mpo::random(4, 2, 3, &mut rng(5));
        let exact = a.densify(CAP).unwrap() * b.densify(CAP).unwrap();
        assert!(max_diff(&a.multiply(&b).unwrap().densify(CAP).unwrap(), &exact) < 1e-12);
    }

    #[test]
    fn add_scale_and_zero() {
        let a = Mpo::random(4, 3, 2, &mut rng(6));
        let b = Mpo::random(4, 3, 3, &mut rng(7));
        let da = a.densify(CAP).unwrap();
        let db = b.densify(CAP).unwrap();
        assert!(max_diff(&a.add(&b).unwrap().densify(CAP).unwrap(), &(&da + &db)) < 1e-12);
        assert!(max_diff(&a.add(&Mpo::zero(4, 3)).unwrap().densify(CAP).unwrap(), &da) < 1e-14);
        let z = a.scale(C64::new(0.0, 0.0)).densify(CAP).unwrap();
        assert!(z.iter().all(|x| *x == ZERO));
        let c = C64::new(0.3, -1.2);
        assert!(max_diff(&a.scale(c).densify(CAP).unwrap(), &(da * c)) < 1e-13);
    }

    #[test]
    fn single_site_add() {
        let a = Mpo::random(1, 2, 1, &mut rng(8));
        let b = Mpo::random(1, 2, 1, &mut rng(9));
        let s = a.add(&b).unwrap();
        assert_eq!(s.bonds(), &[1, 1]);
        let exact = a.densify(CAP).unwrap() + b.densify(CAP).unwrap();
        assert!(max_diff(&s.densify(CAP).unwrap(), &exact) < 1e-15);
    }

    #[test]
    fn shape_mismatch_errors() {
        let a = Mpo::identity(3, 2);
        assert!(a.multiply(&Mpo::identity(4, 2)).is_err());
        assert!(a.add(&Mpo::identity(3, 3)).is_err());
        assert!(Mpo::new(2, vec![1, 2], vec![vec![ZERO; 8]]).is_err());
    }

    #[test]
    fn concat_is_kronecker() {
        let a = Mpo::random(2, 2, 2, &mut rng(10));
        let b = Mpo::random(1, 2, 1, &mut rng(11));
        let k = a.densify(CAP).unwrap().kronecker(&b.densify(CAP).unwrap());
        assert!(max_diff(&a.concat(&b).unwrap().densify(CAP).unwrap(), &k) < 1e-14);
    }

    #[test]
    fn from_dense_round_trip() {
        let a = Mpo::random(4, 2, 3, &mut rng(12));
        let m = a.densify(CAP).unwrap();
        let b = Mpo::from_dense(&m, 4, 2).unwrap();
        assert!(max_diff(&b.densify(CAP).unwrap(), &m) < 1e-13);
        assert!(b.bonds().iter().zip(a.bonds()).all(|(x, y)| x <= y));
        let id = Mpo::from_dense(&DMatrix::identity(8, 8), 3, 2).unwrap();
        assert_eq!(id.bonds(), &[1, 1, 1, 1]);
    }

    #[test]
    fn trace_matches_dense() {
        let a = Mpo::random(4, 2, 3, &mut rng(13));
        let t = a.densify(CAP).unwrap().trace();
        assert!((a.trace() - t).norm() < 1e-13);
        assert!((Mpo::identity(5, 2).trace() - C64::new(32.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn power_matches_dense_cube() {
        let a = Mpo::random(3, 2, 2, &mut rng(14));
        let m = a.densify(CAP).unwrap();
        let p = power(&a, 3, CompressionPolicy::None, None).unwrap();
        assert_eq!(p.bonds(), &[1, 8, 8, 1]);
        assert!(max_diff(&p.densify(CAP).unwrap(), &(&m * &m * &m)) < 1e-12);
        assert_eq!(power(&a, 1, CompressionPolicy::None, None).unwrap(), a);
        let id = power(&Mpo::identity(3, 2), 5, CompressionPolicy::None, None).unwrap();
        assert_eq!(id.densify(CAP).unwrap(), DMatrix::identity(8, 8));
        assert!(power(&a, 0, CompressionPolicy::None, None).is_err());
    }

    #[test]
    fn power_cap_fails_fast_with_ledger() {
        let a = Mpo::random(3, 2, 3, &mut rng(15));
        match power(&a, 4, CompressionPolicy::None, Some(20)) {
            Err(Error::BondCapExceeded { actual, cap, ledger_ln }) => {
                assert_eq!((actual, cap), (27, 20));
                assert!((ledger_ln - 27f64.ln()).abs() < 1e-12);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn arithmetic_is_dense_exact(seed in 0u64..10_000, n in 1usize..=6, bond in 1usize..=3) {
                let mut r = rng(seed);
                let a = Mpo::random(n, 2, bond, &mut r);
                let b = Mpo::random(n, 2, bond, &mut r);
                let (da, db) = (a.densify(CAP).unwrap(), b.densify(CAP).unwrap());
                prop_assert!(max_diff(&a.multiply(&b).unwrap().densify(CAP).unwrap(), &(&da * &db)) < 1e-10);
                prop_assert!(max_diff(&a.add(&b).unwrap().densify(CAP).unwrap(), &(&da + &db)) < 1e-10);
                let c = C64::new(0.5, 0.25);
                prop_assert!(max_diff(&a.scale(c).densify(CAP).unwrap(), &(&da * c)) < 1e-10);
            }

            #[test]
            fn power_orders_agree(seed in 0u64..10_000) {
                let a = Mpo::random(3, 2, 2, &mut rng(seed));
                let left = power(&a, 3, CompressionPolicy::None, None).unwrap();
                let right = a.multiply(&a.multiply(&a).unwrap()).unwrap();
                prop_assert!(max_diff(&left.densify(CAP).unwrap(), &right.densify(CAP).unwrap()) < 1e-10);
            }
        }
    }
}
