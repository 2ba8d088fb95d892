//! The truncated merging operator `Ψ̃` that joins the Gibbs states of two
//! adjacent blocks, and a dense certification of its truncation bound.
//!
//! With `X = -β₀ H_AB` and `Y = β₀ (H_A + H_B)`, where `H_AB` is the full
//! Hamiltonian of the joined block,
//! `Ψ̃ = Σ_{s₁ + s₂ ≤ m₀} X^{s₁} Y^{s₂} / (s₁! s₂!)`.
//! It is assembled in Horner form: with `T_j = Σ_{i ≤ j} Y^i / i!`,
//! `R_{m₀} = 1` and `R_j = T_{m₀ - j} + X R_{j+1} / (j + 1)`, `Ψ̃ = R_0`.
//! That needs `2 m₀` products instead of one per `(s₁, s₂)` pair.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{HamiltonianSpec, Interval};
use crate::mpo::{add_compressed, compress, multiply_compressed, region_mpo, CompressionPolicy, Mpo};
use crate::oracle::{exp_hermitian, schatten_norm, DenseOperator};
use crate::C64;

/// Largest supported truncation order.
pub const MAX_M0: usize = 60;

/// Constants derived from `(g, g̃, k)` that every bound uses.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub g: f64,
    pub g_tilde: f64,
    pub k: usize,
    /// `C = 6 g k²`.
    pub big_c: f64,
    /// `c₀ = e^{g̃ / C}`.
    pub c0: f64,
    /// `a₁ = 12 e^{g̃ / (4 g k²)}`.
    pub a1: f64,
    /// `a₂ = 2 e^{g̃ / (24 g k²)}`.
    pub a2: f64,
}

impl BoundConstants {
    pub fn new(g: f64, g_tilde: f64, k: usize) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0 && g_tilde.is_finite() && g_tilde >= 0.0) || k == 0 {
            return Err(Error::InvalidParameter(format!("bad constants g = {g}, g~ = {g_tilde}, k = {k}")));
        }
        let gk2 = g * (k * k) as f64;
        // g~ <= g holds for every spec; g = 0 means no terms at all
        let ratio = |scale: f64| if g_tilde == 0.0 { 0.0 } else { g_tilde / (scale * gk2) };
        Ok(BoundConstants {
            g,
            g_tilde,
            k,
            big_c: 6.0 * gk2,
            c0: ratio(6.0).exp(),
            a1: 12.0 * ratio(4.0).exp(),
            a2: 2.0 * ratio(24.0).exp(),
        })
    }

    /// Uses the measured `g` and `g̃` of the spec.
    pub fn from_spec(spec: &HamiltonianSpec) -> Result<Self> {
        let bb = spec.boundary_bound()?;
        Self::new(spec.extensivity_constant(), bb.measured, spec.k())
    }

    /// `1 / (24 g k²)`; infinite for an empty Hamiltonian.
    pub fn beta0_max(&self) -> f64 {
        1.0 / (4.0 * self.big_c)
    }

    /// `(2 C |β₀|)^m e^{g̃ / C}`.
    pub fn order_bound(&self, beta0_abs: f64, m: usize) -> f64 {
        (2.0 * self.big_c * beta0_abs).powi(m as i32) * self.c0
    }
}

/// Smallest integer `m₀ ≥ log₂(c₀ / δ₀)`, and 0 when `δ₀ ≥ c₀`.
pub fn truncation_order_for(delta0: f64, consts: &BoundConstants) -> Result<usize> {
    if !(delta0.is_finite() && delta0 > 0.0) {
        return Err(Error::InvalidParameter(format!("delta0 must be positive, got {delta0}")));
    }
    let x = (consts.c0 / delta0).log2();
    let m0 = (x - 1e-12).ceil().max(0.0) as usize;
    if m0 > MAX_M0 {
        return Err(Error::Budget(format!("truncation order {m0} exceeds the supported maximum {MAX_M0}")));
    }
    Ok(m0)
}

/// `ln((m₀ + 1)² D_H^{m₀})`.
pub fn ledger_bound_ln(m0: usize, d_h: f64) -> f64 {
    2.0 * ((m0 + 1) as f64).ln() + m0 as f64 * d_h.ln()
}

#[derive(Clone, Debug)]
pub struct MergeOperatorSpec<'a> {
    pub spec: &'a HamiltonianSpec,
    pub region_a: Interval,
    pub region_b: Interval,
    pub beta0: C64,
    pub m0: usize,
}

impl<'a> MergeOperatorSpec<'a> {
    pub fn new(spec: &'a HamiltonianSpec, region_a: Interval, region_b: Interval, beta0: C64, m0: usize) -> Result<Self> {
        Interval::new(region_a.lo, region_a.hi, spec.n())?;
        Interval::new(region_b.lo, region_b.hi, spec.n())?;
        if region_a.hi + 1 != region_b.lo {
            return Err(Error::InvalidParameter(format!("{region_a} and {region_b} are not adjacent")));
        }
        if m0 > MAX_M0 {
            return Err(Error::InvalidParameter(format!("m0 = {m0} exceeds {MAX_M0}")));
        }
        if !(beta0.re.is_finite() && beta0.im.is_finite()) {
            return Err(Error::InvalidParameter("beta0 must be finite".into()));
        }
        Ok(MergeOperatorSpec { spec, region_a, region_b, beta0, m0 })
    }

    pub fn joined(&self) -> Interval {
        self.region_a.join(&self.region_b).expect("validated adjacency")
    }

    /// `|β₀| ≤ 1/(24 g k²)`.
    pub fn in_certified_regime(&self, consts: &BoundConstants) -> bool {
        self.beta0.norm() <= consts.beta0_max() * (1.0 + 1e-12)
    }
}

/// The MPO factors `X = -β₀ H_AB` and `Y = β₀ (H_A + H_B)` on the joined block.
pub fn merge_generators(ms: &MergeOperatorSpec, policy: CompressionPolicy) -> Result<(Mpo, Mpo)> {
    let spec = ms.spec;
    let d = spec.d();
    let h_ab = region_mpo(spec, ms.joined())?;
    let h_a = region_mpo(spec, ms.region_a)?.concat(&Mpo::identity(ms.region_b.len(), d))?;
    let h_b = Mpo::identity(ms.region_a.len(), d).concat(&region_mpo(spec, ms.region_b)?)?;
    let x = compress(&h_ab.scale(-ms.beta0), policy).0;
    let y = compress(&h_a.add(&h_b)?.scale(ms.beta0), policy).0;
    Ok((x, y))
}

/// Builds `Ψ̃` on the sites of the joined block. Returns the MPO and the
/// total squared singular-value weight discarded by `policy`.
pub fn build_merge_mpo(ms: &MergeOperatorSpec, policy: CompressionPolicy, bond_cap: Option<usize>) -> Result<(Mpo, f64)> {
    let n = ms.joined().len();
    let d = ms.spec.d();
    let identity = Mpo::identity(n, d);
    if ms.m0 == 0 || ms.beta0 == C64::new(0.0, 0.0) {
        return Ok((identity, 0.0));
    }
    let (x, y) = merge_generators(ms, policy)?;
    let cap = bond_cap.unwrap_or(usize::MAX);
    let check = |m: &Mpo| {
        if m.max_bond() > cap {
            Err(Error::BondCapExceeded { actual: m.max_bond(), cap, ledger_ln: m.ledger_max_ln() })
        } else {
            Ok(())
        }
    };
    let mut discarded = 0.0;
    let mut partial = vec![identity.clone()];
    let mut p = identity.clone();
    for i in 1..=ms.m0 {
        let (next, w) = multiply_compressed(&y, &p, policy)?;
        p = next.scale(C64::new(1.0 / i as f64, 0.0));
        let (t, w2) = add_compressed(partial.last().unwrap(), &p, policy)?;
        discarded += w + w2 / (i * i) as f64;
        check(&t)?;
        partial.push(t);
    }
    let mut r = identity;
    for j in (0..ms.m0).rev() {
        let (xr, w) = multiply_compressed(&x, &r, policy)?;
        let xr = xr.scale(C64::new(1.0 / (j + 1) as f64, 0.0));
        let (next, w2) = add_compressed(&partial[ms.m0 - j], &xr, policy)?;
        discarded += w + w2;
        check(&next)?;
        r = next;
    }
    Ok((r, discarded))
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderNorm {
    pub m: usize,
    pub norm: f64,
    pub bound: f64,
}

/// Dense check of `||Ψ - Ψ̃||_∞ ≤ c₀ 2^{-m₀}` and of the per-order decay.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    pub model_digest: String,
    pub region_a: Interval,
    pub region_b: Interval,
    pub beta0_re: f64,
    pub beta0_im: f64,
    pub m0: usize,
    pub constants: BoundConstants,
    pub measured_error: f64,
    pub bound: f64,
    pub per_order: Vec<OrderNorm>,
    /// `|β₀|` within `1/(24 g k²)`; bounds are only claimed when true.
    pub certified_regime: bool,
    pub bond_profile: Vec<usize>,
    pub ledger_ln: Vec<f64>,
}

impl TruncationReport {
    pub fn truncation_holds(&self) -> bool {
        self.measured_error <= self.bound
    }

    pub fn decay_holds(&self) -> bool {
        self.per_order.iter().all(|o| o.norm <= o.bound)
    }

    /// Errors with both values when a bound fails in the certified regime.
    pub fn ensure(&self) -> Result<()> {
        if !self.certified_regime {
            return Ok(());
        }
        if !self.truncation_holds() {
            return Err(Error::Verification(format!(
                "||Psi - Psi~|| = {:.3e} exceeds c0 2^-m0 = {:.3e} (m0 = {})",
                self.measured_error, self.bound, self.m0
            )));
        }
        if let Some(o) = self.per_order.iter().find(|o| o.norm > o.bound) {
            return Err(Error::Verification(format!(
                "||Psi_{}|| = {:.3e} exceeds {:.3e}",
                o.m, o.norm, o.bound
            )));
        }
        Ok(())
    }
}

/// Dense `(H_AB, H_A + H_B)` on the joined block.
pub fn dense_generators(ms: &MergeOperatorSpec, cap: usize) -> Result<(DenseOperator, DenseOperator)> {
    let spec = ms.spec;
    let h_ab = spec.dense_on(ms.joined(), cap)?;
    let h_a = spec.dense_on(ms.region_a, cap)?;
    let h_b = spec.dense_on(ms.region_b, cap)?;
    let (da, db) = (h_a.nrows(), h_b.nrows());
    let split = h_a.kronecker(&DenseOperator::identity(db, db)) + DenseOperator::identity(da, da).kronecker(&h_b);
    Ok((h_ab, split))
}

/// Exact `Ψ = e^{-β₀ H_AB} e^{β₀ (H_A + H_B)}`.
pub fn dense_merging_operator(ms: &MergeOperatorSpec, cap: usize) -> Result<DenseOperator> {
    let (h_ab, split) = dense_generators(ms, cap)?;
    Ok(exp_hermitian(&h_ab, -ms.beta0) * exp_hermitian(&split, ms.beta0))
}

/// `Ψ_m = β₀^m Σ_{s₁ + s₂ = m} (-1)^{s₁} H_AB^{s₁} (H_A + H_B)^{s₂} / (s₁! s₂!)`
/// for `m = 0..=max_m`.
pub fn dense_orders(ms: &MergeOperatorSpec, max_m: usize, cap: usize) -> Result<Vec<DenseOperator>> {
    let (h_ab, split) = dense_generators(ms, cap)?;
    let dim = h_ab.nrows();
    let x = &h_ab * (-ms.beta0);
    let y = &split * ms.beta0;
    let mut xp = vec![DenseOperator::identity(dim, dim)];
    let mut yp = vec![DenseOperator::identity(dim, dim)];
    for i in 1..=max_m {
        let f = C64::new(1.0 / i as f64, 0.0);
        xp.push(&x * &xp[i - 1] * f);
        yp.push(&y * &yp[i - 1] * f);
    }
    Ok((0..=max_m)
        .map(|m| (0..=m).fold(DenseOperator::zeros(dim, dim), |acc, s1| acc + &xp[s1] * &yp[m - s1]))
        .collect())
}

/// Builds `Ψ̃` and compares it with the dense `Ψ`.
pub fn certify_truncation(
    ms: &MergeOperatorSpec,
    consts: &BoundConstants,
    policy: CompressionPolicy,
    max_order: usize,
    cap: usize,
) -> Result<TruncationReport> {
    let psi = dense_merging_operator(ms, cap)?;
    let (tilde, _) = build_merge_mpo(ms, policy, None)?;
    let measured_error = schatten_norm(&(&psi - tilde.densify(cap)?), f64::INFINITY)?;
    let beta_abs = ms.beta0.norm();
    let per_order = dense_orders(ms, max_order, cap)?
        .iter()
        .enumerate()
        .map(|(m, op)| {
            Ok(OrderNorm {
                m,
                norm: schatten_norm(op, f64::INFINITY)?,
                bound: consts.order_bound(beta_abs, m),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncationReport {
        model_digest: ms.spec.digest(),
        region_a: ms.region_a,
        region_b: ms.region_b,
        beta0_re: ms.beta0.re,
        beta0_im: ms.beta0.im,
        m0: ms.m0,
        constants: *consts,
        measured_error,
        bound: consts.c0 * 2f64.powi(-(ms.m0 as i32)),
        per_order,
        certified_regime: ms.in_certified_regime(consts),
        bond_profile: tilde.bonds().to_vec(),
        ledger_ln: tilde.ledger().to_vec(),
    })
}
