//! Randomized checks of the three operator inequalities the error analysis
//! rests on. Every check is seeded and reports its worst observed
//! ratio of left-hand side to right-hand side.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::oracle::{exp_hermitian, schatten_norm, DenseOperator};
use crate::C64;

/// Largest number of qubits in any generated instance.
pub const MAX_QUBITS: u32 = 6;
pub const PNORMS: [f64; 3] = [1.0, 2.0, f64::INFINITY];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub name: String,
    pub seed: u64,
    pub instances: usize,
    pub failures: usize,
    /// `max(lhs / rhs)` over all instances and norms; at most 1 on success.
    pub worst_ratio: f64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.instances > 0
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.instances += 1;
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        self.worst_ratio = self.worst_ratio.max(ratio);
        if lhs > rhs {
            self.failures += 1;
        }
    }
}

fn report(name: &str, seed: u64) -> LemmaReport {
    LemmaReport { name: name.into(), seed, instances: 0, failures: 0, worst_ratio: 0.0 }
}

pub fn random_matrix(rng: &mut impl Rng, dim: usize) -> DenseOperator {
    DenseOperator::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> DenseOperator {
    let a = random_matrix(rng, dim);
    (&a + a.adjoint()).scale(0.5)
}

/// Rescales `e` so that `||e||_p = target`.
fn with_norm(e: DenseOperator, p: f64, target: f64) -> Result<DenseOperator> {
    let norm = schatten_norm(&e, p)?;
    Ok(e.scale(target / norm))
}

/// `A ⊗ B` against `A' ⊗ B'` with `||A - A'||_p ≤ ε ||A||_p` and likewise for
/// `B`; the product error must stay within `3ε` for `ε < 1`.
pub fn check_disjoint_product(seed: u64, instances: usize) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = report("disjoint-product", seed);
    for _ in 0..instances {
        let qa = rng.random_range(1..MAX_QUBITS);
        let qb = rng.random_range(1..=MAX_QUBITS - qa);
        let eps = rng.random_range(1e-6..0.999);
        let p = PNORMS[rng.random_range(0..PNORMS.len())];
        let a = random_matrix(&mut rng, 1 << qa);
        let b = random_matrix(&mut rng, 1 << qb);
        let ea = with_norm(random_matrix(&mut rng, 1 << qa), p, eps * schatten_norm(&a, p)?)?;
        let eb = with_norm(random_matrix(&mut rng, 1 << qb), p, eps * schatten_norm(&b, p)?)?;
        let exact = a.kronecker(&b);
        let approx = (&a + ea).kronecker(&(&b + eb));
        out.record(schatten_norm(&(&exact - approx), p)?, 3.0 * eps * schatten_norm(&exact, p)?);
    }
    Ok(out)
}

/// `||e^{A+B} - e^A||_p ≤ e^{||B||} ||B|| ||e^A||_p` for Hermitian `A`, `B`,
/// with `||B||` the operator norm.
pub fn check_perturbation(seed: u64, instances: usize) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = report("perturbation", seed);
    for _ in 0..instances {
        let q = rng.random_range(1..=MAX_QUBITS);
        let dim = 1 << q;
        let a = random_hermitian(&mut rng, dim).scale(rng.random_range(0.1..2.0));
        let b_norm = 10f64.powf(rng.random_range(-4.0..0.3));
        let b = with_norm(random_hermitian(&mut rng, dim), f64::INFINITY, b_norm)?;
        let one = C64::new(1.0, 0.0);
        let ea = exp_hermitian(&a, one);
        let eab = exp_hermitian(&(&a + &b), one);
        let diff = &eab - &ea;
        for p in PNORMS {
            out.record(schatten_norm(&diff, p)?, b_norm.exp() * b_norm * schatten_norm(&ea, p)?);
        }
    }
    Ok(out)
}

/// Powering: if `||e^{-β₀H} - M||_{p₁p₂} ≤ ε' ||e^{-β₀H}||_{p₁p₂}` then
/// `||e^{-p₁β₀H} - M^{p₁}||_{p₂} ≤ (3e/2) p₁ ε' ||e^{-p₁β₀H}||_{p₂}`.
/// Instances keep `p₁ ε' ≤ 1`, the regime in which the inequality is used.
pub fn check_powering(seed: u64, instances: usize) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = report("powering", seed);
    let factor = 1.5 * std::f64::consts::E;
    for _ in 0..instances {
        let q = rng.random_range(1..=MAX_QUBITS);
        let dim = 1 << q;
        let p1 = rng.random_range(1..=8usize);
        let p2 = [1.0, 2.0][rng.random_range(0..2)];
        let pp = p1 as f64 * p2;
        let eps = rng.random_range(1e-6..1.0) / p1 as f64;
        let h = random_hermitian(&mut rng, dim);
        let beta0 = rng.random_range(0.01..0.5);
        let g = exp_hermitian(&h, C64::new(-beta0, 0.0));
        let m = &g + with_norm(random_matrix(&mut rng, dim), pp, eps * schatten_norm(&g, pp)?)?;
        let gq = exp_hermitian(&h, C64::new(-beta0 * p1 as f64, 0.0));
        let mq = (1..p1).fold(m.clone(), |acc, _| &acc * &m);
        out.record(schatten_norm(&(&gq - mq), p2)?, factor * p1 as f64 * eps * schatten_norm(&gq, p2)?);
    }
    Ok(out)
}

/// All three checks with consecutive seeds.
pub fn run_all(seed: u64, instances: usize) -> Result<Vec<LemmaReport>> {
    Ok(vec![
        check_disjoint_product(seed, instances)?,
        check_perturbation(seed.wrapping_add(1), instances)?,
        check_powering(seed.wrapping_add(2), instances)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemmas_hold() {
        for r in run_all(7, 100).unwrap() {
            assert!(r.passed(), "{r:?}");
            assert!(r.instances >= 100);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(check_powering(3, 20).unwrap(), check_powering(3, 20).unwrap());
    }

    #[test]
    fn detects_violation() {
        let mut r = report("x", 0);
        r.record(2.0, 1.0);
        assert!(!r.passed());
        assert_eq!(r.worst_ratio, 2.0);
    }
}
