//! Hamiltonians on a chain of `n` qudits, subset and boundary Hamiltonians,
//! and the extensivity and boundary constants every error bound depends on.
//!
//! Sites are 1-indexed. Every term is a coefficient times a tensor product of
//! unit-norm basis operators, so `||h_Z|| = |coefficient|` holds exactly and
//! `g`, `g̃` are computed rather than estimated.

mod basis;
pub mod config;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use basis::SiteOp;

use crate::error::{Error, Result};
use crate::special::zeta;
use crate::C64;

/// Default cap on the dense Hilbert-space dimension `d^n`.
pub const DEFAULT_DENSE_CAP: usize = 1 << 12;

/// Inclusive site range `[lo, hi]`, 1-indexed.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize, n: usize) -> Result<Self> {
        if lo < 1 || lo > hi || hi > n {
            return Err(Error::InvalidInterval { lo, hi, n });
        }
        Ok(Interval { lo, hi })
    }

    pub fn full(n: usize) -> Self {
        Interval { lo: 1, hi: n }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: usize) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn contains_all(&self, sites: &[usize]) -> bool {
        sites.iter().all(|&s| self.contains(s))
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Union of two adjacent intervals, `self` on the left.
    pub fn join(&self, right: &Interval) -> Result<Interval> {
        if self.hi + 1 != right.lo {
            return Err(Error::InvalidParameter(format!(
                "intervals [{}, {}] and [{}, {}] are not adjacent",
                self.lo, self.hi, right.lo, right.hi
            )));
        }
        Ok(Interval { lo: self.lo, hi: right.hi })
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// `coefficient · ⊗_{i ∈ sites} ops[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTerm {
    pub sites: Vec<usize>,
    pub ops: Vec<SiteOp>,
    pub coefficient: f64,
}

impl LocalTerm {
    pub fn new(sites: Vec<usize>, ops: Vec<SiteOp>, coefficient: f64) -> Self {
        LocalTerm { sites, ops, coefficient }
    }

    pub fn first(&self) -> usize {
        self.sites[0]
    }

    pub fn last(&self) -> usize {
        *self.sites.last().unwrap()
    }

    /// Operator norm; exact because every factor has unit norm.
    pub fn norm(&self) -> f64 {
        self.coefficient.abs()
    }

    fn crosses(&self, cut: usize) -> bool {
        self.first() <= cut && self.last() > cut
    }
}

/// One entry `J_{ξ,ξ'}` of a 2-local coupling matrix.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub left: SiteOp,
    pub right: SiteOp,
    pub j: f64,
}

/// `weight · e^{-rate · r}`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub weight: f64,
    pub rate: f64,
}

/// How the pair terms of a spec were generated. Structured specs still carry
/// the full term list; the structure only enables the compact MPO layouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Structure {
    Generic,
    /// Pair terms `J_{ξ,ξ'} / |i - i'|^α` for all `i < i'` inside the region.
    PowerLaw { alpha: f64, couplings: Vec<Coupling> },
    /// Pair terms `J_{ξ,ξ'} Σ_s w_s e^{-λ_s |i - i'|}` inside the region.
    ExpSum {
        couplings: Vec<Coupling>,
        series: Vec<ExpTerm>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    n: usize,
    d: usize,
    k: usize,
    terms: Vec<LocalTerm>,
    structure: Structure,
    /// Sites on which structured pair terms are generated.
    region: Interval,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryBound {
    /// `max_cut Σ ||h_Z||` over terms crossing the cut.
    pub measured: f64,
    /// `J̄ ζ(α - 1)` for power-law specs.
    pub analytic: Option<f64>,
}

impl HamiltonianSpec {
    /// Explicit term list. `k` must bound every support size.
    pub fn generic(n: usize, d: usize, k: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        let spec = HamiltonianSpec {
            n,
            d,
            k,
            terms,
            structure: Structure::Generic,
            region: Interval::full(n.max(1)),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `H = Σ_{i<i'} |i-i'|^{-α} Σ J_{ξ,ξ'} P_{i,ξ} P_{i',ξ'} + Σ_i Σ f P_{i}`.
    pub fn power_law(
        n: usize,
        d: usize,
        alpha: f64,
        couplings: Vec<Coupling>,
        onsite: &[(SiteOp, f64)],
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let kernel = |r: usize| (r as f64).powf(-alpha);
        let terms = pair_terms(n, &couplings, onsite, Interval::full(n.max(1)), kernel);
        let spec = HamiltonianSpec {
            n,
            d,
            k: 2,
            terms,
            structure: Structure::PowerLaw { alpha, couplings },
            region: Interval::full(n.max(1)),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Exponential-sum 2-local spec; `onsite_terms` are kept verbatim.
    pub(crate) fn exp_sum(
        n: usize,
        d: usize,
        couplings: Vec<Coupling>,
        series: Vec<ExpTerm>,
        onsite_terms: Vec<LocalTerm>,
    ) -> Result<Self> {
        let kernel = |r: usize| {
            series
                .iter()
                .map(|t| t.weight * (-t.rate * r as f64).exp())
                .sum::<f64>()
        };
        let mut terms = onsite_terms;
        terms.extend(pair_terms(n, &couplings, &[], Interval::full(n), kernel));
        let spec = HamiltonianSpec {
            n,
            d,
            k: 2,
            terms,
            structure: Structure::ExpSum { couplings, series },
            region: Interval::full(n),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(2..=8).contains(&self.d) {
            return Err(Error::InvalidParameter(format!("d = {} outside 2..=8", self.d)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let mut ops = BTreeSet::new();
        for t in &self.terms {
            if t.sites.is_empty() || t.sites.len() != t.ops.len() {
                return Err(Error::InvalidTerm(format!("malformed term {t:?}")));
            }
            if t.sites.len() > self.k {
                return Err(Error::InvalidTerm(format!(
                    "support {:?} exceeds locality k = {}",
                    t.sites, self.k
                )));
            }
            if t.sites.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidTerm(format!("sites {:?} not strictly increasing", t.sites)));
            }
            if t.first() < 1 || t.last() > self.n {
                return Err(Error::InvalidTerm(format!("sites {:?} outside [1, {}]", t.sites, self.n)));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidTerm("non-finite coefficient".into()));
            }
            for op in &t.ops {
                op.check(self.d)?;
                ops.insert(*op);
            }
        }
        if self.d <= 4 {
            for op in ops {
                let norm = basis::operator_norm(&op.matrix(self.d));
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidTerm(format!("operator {op} has norm {norm}")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn region(&self) -> Interval {
        self.region
    }

    pub fn alpha(&self) -> Option<f64> {
        match &self.structure {
            Structure::PowerLaw { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn couplings(&self) -> Option<&[Coupling]> {
        match &self.structure {
            Structure::PowerLaw { couplings, .. } | Structure::ExpSum { couplings, .. } => {
                Some(couplings)
            }
            Structure::Generic => None,
        }
    }

    /// `J̄ = Σ |J_{ξ,ξ'}|`, or `None` without a coupling matrix.
    pub fn j_bar(&self) -> Option<f64> {
        self.couplings().map(|c| c.iter().map(|c| c.j.abs()).sum())
    }

    /// Hilbert-space dimension `d^n`, saturating.
    pub fn hilbert_dim(&self) -> usize {
        checked_pow(self.d, self.n).unwrap_or(usize::MAX)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `H_L = Σ_{Z ⊆ L} h_Z`. Structure is kept; the region is narrowed.
    pub fn subset(&self, region: Interval) -> Result<HamiltonianSpec> {
        Interval::new(region.lo, region.hi, self.n)?;
        let terms = self
            .terms
            .iter()
            .filter(|t| region.contains_all(&t.sites))
            .cloned()
            .collect();
        let narrowed = self.region.intersect(&region);
        let (structure, region) = match narrowed {
            Some(r) => (self.structure.clone(), r),
            None => (Structure::Generic, region),
        };
        Ok(HamiltonianSpec {
            n: self.n,
            d: self.d,
            k: self.k,
            terms,
            structure,
            region,
        })
    }

    /// `∂h_A = H - (H_A + H_B)` for `A = [1, cut]`, `B = [cut + 1, n]`.
    pub fn boundary_interaction(&self, cut: usize) -> Result<HamiltonianSpec> {
        if cut < 1 || cut >= self.n {
            return Err(Error::InvalidCut { cut, n: self.n });
        }
        let terms = self.terms.iter().filter(|t| t.crosses(cut)).cloned().collect();
        Ok(self.with_generic_terms(terms))
    }

    /// Terms of `self` plus terms of `other`, as a generic spec.
    pub fn plus(&self, other: &HamiltonianSpec) -> Result<HamiltonianSpec> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::ShapeMismatch("specs on different chains".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        let mut spec = self.with_generic_terms(terms);
        spec.k = self.k.max(other.k);
        Ok(spec)
    }

    fn with_generic_terms(&self, terms: Vec<LocalTerm>) -> HamiltonianSpec {
        HamiltonianSpec {
            n: self.n,
            d: self.d,
            k: self.k,
            terms,
            structure: Structure::Generic,
            region: Interval::full(self.n),
        }
    }

    /// `g̃`: the largest crossing-term weight over all bipartitions
    /// `[1, c] | [c + 1, n]`, plus `J̄ ζ(α - 1)` for power-law specs.
    pub fn boundary_bound(&self) -> Result<BoundaryBound> {
        let measured = (1..self.n)
            .map(|cut| {
                self.terms
                    .iter()
                    .filter(|t| t.crosses(cut))
                    .map(LocalTerm::norm)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let analytic = match &self.structure {
            Structure::PowerLaw { alpha, couplings } => {
                if *alpha <= 2.0 {
                    return Err(Error::NotApplicable(format!(
                        "boundary interaction is only bounded for alpha > 2 (alpha = {alpha})"
                    )));
                }
                let j_bar: f64 = couplings.iter().map(|c| c.j.abs()).sum();
                let bound = j_bar * zeta(alpha - 1.0);
                if measured > bound * (1.0 + 1e-12) {
                    return Err(Error::InvalidParameter(format!(
                        "measured boundary weight {measured} exceeds J zeta(alpha - 1) = {bound}"
                    )));
                }
                Some(bound)
            }
            _ => None,
        };
        Ok(BoundaryBound { measured, analytic })
    }

    /// `g = max_i Σ_{Z ∋ i} ||h_Z||`.
    pub fn extensivity_constant(&self) -> f64 {
        let mut per_site = vec![0.0; self.n + 1];
        for t in &self.terms {
            for &s in &t.sites {
                per_site[s] += t.norm();
            }
        }
        per_site.into_iter().fold(0.0, f64::max)
    }

    /// Dense `d^n × d^n` matrix of `H`, site 1 most significant.
    pub fn dense_matrix(&self, cap: usize) -> Result<DMatrix<C64>> {
        let dim = self.hilbert_dim();
        if dim > cap {
            return Err(Error::DenseCapExceeded { dim, cap });
        }
        Ok(dense_from_terms(&self.terms, self.d, Interval::full(self.n)))
    }

    /// Dense matrix of `H_L` on the sites of `region` only.
    pub fn dense_on(&self, region: Interval, cap: usize) -> Result<DMatrix<C64>> {
        Interval::new(region.lo, region.hi, self.n)?;
        let dim = checked_pow(self.d, region.len()).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::DenseCapExceeded { dim, cap });
        }
        let terms: Vec<_> = self
            .terms
            .iter()
            .filter(|t| region.contains_all(&t.sites))
            .cloned()
            .collect();
        Ok(dense_from_terms(&terms, self.d, region))
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn pair_terms(
    n: usize,
    couplings: &[Coupling],
    onsite: &[(SiteOp, f64)],
    region: Interval,
    kernel: impl Fn(usize) -> f64,
) -> Vec<LocalTerm> {
    let mut terms = Vec::new();
    for i in region.lo..=region.hi.min(n) {
        for &(op, f) in onsite {
            if f != 0.0 {
                terms.push(LocalTerm::new(vec![i], vec![op], f));
            }
        }
    }
    for i in region.lo..=region.hi {
        for ip in i + 1..=region.hi {
            let weight = kernel(ip - i);
            for c in couplings {
                let coefficient = c.j * weight;
                if coefficient != 0.0 {
                    terms.push(LocalTerm::new(vec![i, ip], vec![c.left, c.right], coefficient));
                }
            }
        }
    }
    terms
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// Σ_terms embedded on the sites of `region`; the first site of the region is
/// the most significant digit.
pub(crate) fn dense_from_terms(terms: &[LocalTerm], d: usize, region: Interval) -> DMatrix<C64> {
    let len = region.len();
    let dim = checked_pow(d, len).expect("dimension checked by caller");
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    let stride = |site: usize| checked_pow(d, region.hi - site).unwrap();
    for t in terms {
        let mats: Vec<_> = t.ops.iter().map(|op| op.matrix(d)).collect();
        let strides: Vec<usize> = t.sites.iter().map(|&s| stride(s)).collect();
        let r = t.sites.len();
        let combos = checked_pow(d, r).unwrap();
        for col in 0..dim {
            let ins: Vec<usize> = strides.iter().map(|&st| (col / st) % d).collect();
            let base = col - ins.iter().zip(&strides).map(|(i, st)| i * st).sum::<usize>();
            for combo in 0..combos {
                let mut rem = combo;
                let mut row = base;
                let mut val = C64::new(t.coefficient, 0.0);
                for j in (0..r).rev() {
                    let out = rem % d;
                    rem /= d;
                    row += out * strides[j];
                    val *= mats[j][(out, ins[j])];
                }
                if val != C64::new(0.0, 0.0) {
                    h[(row, col)] += val;
                }
            }
        }
    }
    h
}
