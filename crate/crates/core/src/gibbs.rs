//! The full pipeline: leaf Gibbs states, layer-by-layer merging to
//! `M_{β₀} ≈ e^{-β₀H}`, powering to `M_β = M_{β₀}^Q`, the error budget that
//! ties the truncation order to the target accuracy, and the real-time
//! variant `β = it`.
//!
//! Requests with `CompressionPolicy::None` are run with lossless rank
//! reduction: after every product, singular values below the roundoff floor
//! are dropped. The bond ledger still records the uncompressed dimensions.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{approximate_hamiltonian, ExpSumApprox};
use crate::merge::{build_merge_mpo, ledger_bound_ln, truncation_order_for, BoundConstants, MergeOperatorSpec};
use crate::model::{HamiltonianSpec, Interval, Structure, DEFAULT_DENSE_CAP};
use crate::mpo::{hamiltonian_mpo, multiply_compressed, power, CompressionPolicy, Mpo};
use crate::oracle::{exp_hermitian, pnorm_label, relative_error, schatten_norm, DenseOperator};
use crate::C64;

pub const DEFAULT_LEAF_SIZE: usize = 2;
/// Hard cap on any intermediate bond dimension.
pub const DEFAULT_BOND_CAP: usize = 4096;
pub const REPORT_VERSION: u32 = 1;

/// Constants, step sizes and predicted errors for one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub n: usize,
    /// Target relative error of the pipeline run on the (possibly
    /// approximated) Hamiltonian.
    pub epsilon: f64,
    /// `β`, or `|t|` for real-time runs.
    pub beta: f64,
    /// `|β₀| = β / Q`.
    pub beta0: f64,
    pub q: usize,
    pub q0: usize,
    pub delta0: f64,
    pub m0: usize,
    /// Truncation order required by `δ₀`; differs from `m0` when overridden.
    pub m0_required: usize,
    /// Hamiltonian-approximation error; 0 on the generic path.
    pub epsilon_h: f64,
    pub constants: BoundConstants,
    /// `ε_q` for `q = 1..=q₀`, with `ε₁ = 0`.
    pub layer_errors: Vec<f64>,
    /// `ε'₀ = a₂ δ₀ q₀ a₁^{q₀ - 2}`.
    pub eps_prime0: f64,
    /// `ε_β = 5 Q ε'₀`.
    pub eps_beta: f64,
    /// Bond dimension of the Hamiltonian MPO used in the estimates.
    pub d_h: usize,
    /// `ln` of the uncompressed bond estimate of `M_{β₀}`.
    pub predicted_bond_ln_high_temp: f64,
    /// `ln` of the uncompressed bond estimate of `M_β`.
    pub predicted_bond_ln: f64,
    /// `ln(n (D₁ D₂)² d³)` for the last powering product.
    pub predicted_multiply_cost_ln: f64,
}

/// Number of layers of the block tree, leaves included.
pub fn layer_count(n: usize, leaf_size: usize) -> usize {
    let leaves = n.div_ceil(leaf_size.max(1)).max(1);
    1 + (leaves as f64).log2().ceil() as usize
}

/// Budget for `e^{-βH}` at relative accuracy `epsilon`.
pub fn plan_budget(spec: &HamiltonianSpec, beta: f64, epsilon: f64) -> Result<ErrorBudget> {
    plan_budget_with(spec, beta, epsilon, DEFAULT_LEAF_SIZE, None)
}

pub fn plan_budget_with(
    spec: &HamiltonianSpec,
    beta: f64,
    epsilon: f64,
    leaf_size: usize,
    q_override: Option<usize>,
) -> Result<ErrorBudget> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Budget(format!("beta must be positive, got {beta}")));
    }
    if beta >= spec.n() as f64 {
        return Err(Error::Budget(format!("beta = {beta} must be below n = {}", spec.n())));
    }
    budget_for_magnitude(spec, beta, epsilon, leaf_size, q_override)
}

fn budget_for_magnitude(
    spec: &HamiltonianSpec,
    beta: f64,
    epsilon: f64,
    leaf_size: usize,
    q_override: Option<usize>,
) -> Result<ErrorBudget> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Budget(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if leaf_size == 0 {
        return Err(Error::InvalidParameter("leaf size must be positive".into()));
    }
    let constants = BoundConstants::from_spec(spec)?;
    let n = spec.n();
    let q_min = ((beta / constants.beta0_max()) - 1e-12).ceil().max(1.0) as usize;
    let q = match q_override {
        Some(0) => return Err(Error::InvalidParameter("Q must be positive".into())),
        Some(q) => q,
        None => q_min,
    };
    let beta0 = beta / q as f64;
    let q0 = layer_count(n, leaf_size);
    let (a1, a2) = (constants.a1, constants.a2);
    let delta0 = beta0 * epsilon / (5.0 * beta * a2 * (n as f64).powf((2.0 * a1).log2()));
    let m0 = truncation_order_for(delta0, &constants)?;
    let mut layer_errors = vec![0.0];
    for _ in 1..q0 {
        let prev = *layer_errors.last().unwrap();
        layer_errors.push(a2 * delta0 + a1 * prev);
    }
    let eps_prime0 = if q0 < 2 { 0.0 } else { a2 * delta0 * q0 as f64 * a1.powi(q0 as i32 - 2) };
    let d_h = hamiltonian_mpo(spec)?.max_bond();
    let d = spec.d() as f64;
    let high = (q0 - 1) as f64 * ledger_bound_ln(m0, d_h as f64) + 2.0 * d.ln();
    let full = q as f64 * high;
    let last_factor = (q.max(2) - 1) as f64 * high;
    Ok(ErrorBudget {
        n,
        epsilon,
        beta,
        beta0,
        q,
        q0,
        delta0,
        m0,
        m0_required: m0,
        epsilon_h: 0.0,
        constants,
        layer_errors,
        eps_prime0,
        eps_beta: 5.0 * q as f64 * eps_prime0,
        d_h,
        predicted_bond_ln_high_temp: high,
        predicted_bond_ln: full,
        predicted_multiply_cost_ln: (n as f64).ln() + 2.0 * (last_factor + high) + 3.0 * d.ln(),
    })
}

/// Binary block tree over the sites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MergePlan {
    pub n: usize,
    pub leaf_size: usize,
    pub q0: usize,
    /// `layers[0]` are the leaves, the last layer is `[1, n]`.
    pub layers: Vec<Vec<Interval>>,
    pub budget: ErrorBudget,
}

impl MergePlan {
    /// Adjacent pairs merge; an odd last block is carried up unchanged.
    pub fn new(n: usize, leaf_size: usize, budget: ErrorBudget) -> Result<Self> {
        if n == 0 || leaf_size == 0 {
            return Err(Error::InvalidParameter("plan needs n >= 1 and leaf size >= 1".into()));
        }
        let mut layer: Vec<Interval> = (1..=n)
            .step_by(leaf_size)
            .map(|lo| Interval { lo, hi: (lo + leaf_size - 1).min(n) })
            .collect();
        let mut layers = vec![layer.clone()];
        while layer.len() > 1 {
            layer = layer
                .chunks(2)
                .map(|c| if c.len() == 2 { Interval { lo: c[0].lo, hi: c[1].hi } } else { c[0] })
                .collect();
            layers.push(layer.clone());
        }
        Ok(MergePlan { n, leaf_size, q0: layers.len(), layers, budget })
    }
}

/// Exact `e^{-β₀ H_leaf}` re-encoded as an MPO on the leaf sites.
pub fn leaf_gibbs_mpo(spec: &HamiltonianSpec, leaf: Interval, beta0: C64) -> Result<Mpo> {
    let h = spec.dense_on(leaf, usize::MAX)?;
    Mpo::from_dense(&exp_hermitian(&h, -beta0), leaf.len(), spec.d())
}

/// Merges adjacent pairs `M = Ψ̃ (M_left ⊗ M_right)`, in parallel.
pub fn merge_layer(
    spec: &HamiltonianSpec,
    blocks: &[(Interval, Mpo)],
    beta0: C64,
    m0: usize,
    policy: CompressionPolicy,
    bond_cap: Option<usize>,
) -> Result<(Vec<(Interval, Mpo)>, f64)> {
    let merged = blocks
        .par_chunks(2)
        .map(|pair| {
            if let [(a, ma), (b, mb)] = pair {
                let ms = MergeOperatorSpec::new(spec, *a, *b, beta0, m0)?;
                let (psi, w1) = build_merge_mpo(&ms, policy, bond_cap)?;
                let (m, w2) = multiply_compressed(&psi, &ma.concat(mb)?, policy)?;
                if let Some(cap) = bond_cap {
                    if m.max_bond() > cap {
                        return Err(Error::BondCapExceeded { actual: m.max_bond(), cap, ledger_ln: m.ledger_max_ln() });
                    }
                }
                Ok(((ms.joined(), m), w1 + w2))
            } else {
                Ok((pair[0].clone(), 0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let discarded = merged.iter().map(|(_, w)| w).sum();
    Ok((merged.into_iter().map(|(b, _)| b).collect(), discarded))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub dense_cap: usize,
    pub bond_cap: Option<usize>,
    pub pnorms: Vec<f64>,
    pub leaf_size: usize,
    /// Measure errors against the dense oracle when `d^n ≤ dense_cap`.
    pub measure: bool,
    /// Forces the truncation order; runs below the required one are
    /// reported as uncertified.
    pub m0_override: Option<usize>,
    /// Forces the number of powering steps; must not be below the minimum
    /// for the run to stay certified.
    pub q_override: Option<usize>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            dense_cap: DEFAULT_DENSE_CAP,
            bond_cap: Some(DEFAULT_BOND_CAP),
            pnorms: vec![1.0, 2.0, f64::INFINITY],
            leaf_size: DEFAULT_LEAF_SIZE,
            measure: true,
            m0_override: None,
            q_override: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerRecord {
    /// 1 for the leaves.
    pub q: usize,
    pub blocks: Vec<Interval>,
    pub predicted: f64,
    /// Relative Schatten-2 error of `⊗_s M_s^{(q)}` against
    /// `e^{-β₀ Σ_s H_s^{(q)}}`.
    pub measured: Option<f64>,
    pub bond_profiles: Vec<Vec<usize>>,
    pub ledger_max_ln: f64,
    pub discarded_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PNormError {
    pub p: String,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionCheck {
    pub trace_re: f64,
    pub trace_im: f64,
    pub exact: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpSumSummary {
    pub alpha: f64,
    pub epsilon_kernel: f64,
    pub x: f64,
    pub m: usize,
    pub series_len: usize,
    pub certified_sup_error: f64,
}

impl From<&ExpSumApprox> for ExpSumSummary {
    fn from(a: &ExpSumApprox) -> Self {
        ExpSumSummary {
            alpha: a.alpha,
            epsilon_kernel: a.epsilon_kernel,
            x: a.x,
            m: a.m,
            series_len: a.terms.len(),
            certified_sup_error: a.certified_sup_error,
        }
    }
}

/// Predicted and measured errors of one run. Contains no timing data, so
/// identical inputs serialize to identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub version: u32,
    pub kind: String,
    pub model_digest: String,
    pub n: usize,
    pub d: usize,
    pub beta: f64,
    pub time: Option<f64>,
    /// Overall target.
    pub epsilon: f64,
    pub policy: String,
    pub path: String,
    pub budget: ErrorBudget,
    pub expsum: Option<ExpSumSummary>,
    pub layers: Vec<LayerRecord>,
    pub high_temp_predicted: f64,
    pub high_temp_measured: Option<f64>,
    /// Bound on the final relative error, composed with the Hamiltonian
    /// approximation on the 2-local path.
    pub predicted_error: f64,
    pub measured: Vec<PNormError>,
    pub partition: Option<PartitionCheck>,
    pub bond_profile: Vec<usize>,
    pub ledger_ln: Vec<f64>,
    pub high_temp_bond_profile: Vec<usize>,
    pub high_temp_ledger_ln: Vec<f64>,
    /// The analytic guarantee applies: `β₀` within its bound, `m₀` and `Q`
    /// not below the required values, no lossy compression, thermal run.
    pub certified: bool,
    pub notes: Vec<String>,
}

impl ErrorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn max_measured(&self) -> Option<f64> {
        self.measured.iter().map(|m| m.error).reduce(f64::max)
    }

    /// Every measured error is within the target.
    pub fn within_target(&self) -> Option<bool> {
        self.max_measured().map(|e| e <= self.epsilon)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub plan_s: f64,
    pub high_temp_s: f64,
    pub power_s: f64,
    pub oracle_s: f64,
}

pub struct PipelineOutput {
    pub mpo: Mpo,
    pub high_temp: Mpo,
    pub report: ErrorReport,
    pub timings: Timings,
}

/// Builds `M_{β₀}` from the leaves up. Returns the MPO and one record per layer
/// with the predicted errors filled in.
pub fn build_high_temp_mpo(
    spec: &HamiltonianSpec,
    plan: &MergePlan,
    beta0: C64,
    policy: CompressionPolicy,
    options: &PipelineOptions,
) -> Result<(Mpo, Vec<LayerRecord>)> {
    let m0 = plan.budget.m0;
    let mut blocks = plan.layers[0]
        .par_iter()
        .map(|&leaf| Ok((leaf, leaf_gibbs_mpo(spec, leaf, beta0)?)))
        .collect::<Result<Vec<_>>>()?;
    let record = |q: usize, blocks: &[(Interval, Mpo)], discarded: f64| LayerRecord {
        q,
        blocks: blocks.iter().map(|(b, _)| *b).collect(),
        predicted: plan.budget.layer_errors[q - 1],
        measured: None,
        bond_profiles: blocks.iter().map(|(_, m)| m.bonds().to_vec()).collect(),
        ledger_max_ln: blocks.iter().map(|(_, m)| m.ledger_max_ln()).fold(0.0, f64::max),
        discarded_weight: discarded,
    };
    let mut records = vec![record(1, &blocks, 0.0)];
    for q in 2..=plan.q0 {
        let (next, discarded) = merge_layer(spec, &blocks, beta0, m0, policy, options.bond_cap)?;
        blocks = next;
        records.push(record(q, &blocks, discarded));
    }
    let (_, top) = blocks.into_iter().next().expect("plan has a top block");
    Ok((top, records))
}

/// Dense `⊗_s e^{-β₀ H_s}` over the blocks of one layer.
fn dense_layer_gibbs(spec: &HamiltonianSpec, blocks: &[Interval], beta0: C64) -> Result<DenseOperator> {
    let mut acc = DenseOperator::identity(1, 1);
    for b in blocks {
        let h = spec.dense_on(*b, usize::MAX)?;
        acc = acc.kronecker(&exp_hermitian(&h, -beta0));
    }
    Ok(acc)
}

/// `e^{-βH} ≈ M_β`.
pub fn build_gibbs_mpo(
    spec: &HamiltonianSpec,
    beta: f64,
    epsilon: f64,
    policy: CompressionPolicy,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    run_pipeline(spec, Evolution::Thermal(beta), epsilon, policy, options)
}

/// `e^{-iHt} ≈ M_t` through the same pipeline with `β₀ = it / Q`. Constants
/// are the thermal ones evaluated at `|β₀|`; the guarantee is empirical.
pub fn build_real_time_mpo(
    spec: &HamiltonianSpec,
    t: f64,
    epsilon: f64,
    policy: CompressionPolicy,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    run_pipeline(spec, Evolution::RealTime(t), epsilon, policy, options)
}

#[derive(Copy, Clone, Debug, PartialEq)]
enum Evolution {
    Thermal(f64),
    RealTime(f64),
}

fn has_long_range_pairs(spec: &HamiltonianSpec) -> bool {
    matches!(spec.structure(), Structure::PowerLaw { .. })
        && spec.terms().iter().any(|t| t.sites.len() == 2 && t.last() - t.first() > 1)
}

fn run_pipeline(
    spec: &HamiltonianSpec,
    evolution: Evolution,
    epsilon: f64,
    policy: CompressionPolicy,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    policy.validate()?;
    let clock = Instant::now();
    let mut timings = Timings::default();
    let mut notes = Vec::new();
    let (magnitude, kind) = match evolution {
        Evolution::Thermal(beta) => (beta, "thermal"),
        Evolution::RealTime(t) => {
            if !t.is_finite() {
                return Err(Error::Budget(format!("time must be finite, got {t}")));
            }
            (t.abs(), "real-time")
        }
    };
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Budget(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let effective = if policy == CompressionPolicy::None { CompressionPolicy::LOSSLESS } else { policy };
    let policy_label = if policy == CompressionPolicy::None {
        "none (lossless rank reduction)".to_string()
    } else {
        policy.to_string()
    };

    if magnitude == 0.0 {
        if let Evolution::Thermal(_) = evolution {
            return Err(Error::Budget("beta must be positive".into()));
        }
        return Ok(trivial_real_time(spec, epsilon, policy_label, options));
    }

    // 2-local fast path: replace the power-law kernel by an exponential sum
    let (working, approx, eps_h, target) = if has_long_range_pairs(spec) {
        let eps_h = epsilon / (6.0 * magnitude);
        let (tilde, approx) = approximate_hamiltonian(spec, eps_h)?;
        (tilde, approx, eps_h, epsilon / 3.0)
    } else {
        (spec.clone(), None, 0.0, epsilon)
    };
    if let Some(a) = &approx {
        notes.extend(a.warnings.iter().cloned());
    }
    let mut budget = match evolution {
        Evolution::Thermal(beta) => {
            if beta >= spec.n() as f64 {
                return Err(Error::Budget(format!("beta = {beta} must be below n = {}", spec.n())));
            }
            budget_for_magnitude(&working, beta, target, options.leaf_size, options.q_override)?
        }
        Evolution::RealTime(_) => budget_for_magnitude(&working, magnitude, target, options.leaf_size, options.q_override)?,
    };
    budget.epsilon_h = eps_h;
    let q_min = ((magnitude / budget.constants.beta0_max()) - 1e-12).ceil().max(1.0) as usize;
    if let Some(m0) = options.m0_override {
        if m0 > crate::merge::MAX_M0 {
            return Err(Error::InvalidParameter(format!("m0 = {m0} exceeds {}", crate::merge::MAX_M0)));
        }
        budget.m0 = m0;
    }
    let plan = MergePlan::new(spec.n(), options.leaf_size, budget.clone())?;
    let beta0 = match evolution {
        Evolution::Thermal(_) => C64::new(budget.beta0, 0.0),
        Evolution::RealTime(t) => C64::new(0.0, t / budget.q as f64),
    };
    timings.plan_s = clock.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let (high, mut layers) = build_high_temp_mpo(&working, &plan, beta0, effective, options)?;
    timings.high_temp_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let mpo = power(&high, budget.q, effective, options.bond_cap)?;
    timings.power_s = t0.elapsed().as_secs_f64();

    // error composition: ||e^{-βH} - e^{-βH~}|| ≤ e^{βε_H} βε_H ||e^{-βH}||
    let approx_term = if eps_h > 0.0 {
        let x = magnitude * eps_h;
        x * x.exp()
    } else {
        0.0
    };
    let pipeline_bound = budget.eps_beta;
    let predicted_error = approx_term + pipeline_bound * (1.0 + approx_term);

    let certified_regime = q_min <= budget.q && budget.m0 >= budget.m0_required && !effective.is_lossy();
    let certified = certified_regime && matches!(evolution, Evolution::Thermal(_));
    if !certified_regime {
        notes.push("outside the certified regime: bounds are reported but not claimed".into());
    }
    if effective.is_lossy() {
        notes.push("lossy compression: predictions are heuristic".into());
    }
    if let Evolution::RealTime(_) = evolution {
        notes.push("real-time run: thermal constants at |beta0|, guarantee is empirical".into());
    }

    let mut report = ErrorReport {
        version: REPORT_VERSION,
        kind: kind.into(),
        model_digest: spec.digest(),
        n: spec.n(),
        d: spec.d(),
        beta: match evolution {
            Evolution::Thermal(b) => b,
            Evolution::RealTime(_) => 0.0,
        },
        time: match evolution {
            Evolution::Thermal(_) => None,
            Evolution::RealTime(t) => Some(t),
        },
        epsilon,
        policy: policy_label,
        path: if approx.is_some() { "two-local".into() } else { "generic".into() },
        budget: budget.clone(),
        expsum: approx.as_ref().map(ExpSumSummary::from),
        layers: Vec::new(),
        high_temp_predicted: budget.eps_prime0,
        high_temp_measured: None,
        predicted_error,
        measured: Vec::new(),
        partition: None,
        bond_profile: mpo.bonds().to_vec(),
        ledger_ln: mpo.ledger().to_vec(),
        high_temp_bond_profile: high.bonds().to_vec(),
        high_temp_ledger_ln: high.ledger().to_vec(),
        certified,
        notes,
    };

    let dim = crate::model::checked_pow(spec.d(), spec.n()).unwrap_or(usize::MAX);
    if options.measure && dim <= options.dense_cap {
        let t0 = Instant::now();
        for (layer, record) in plan.layers.iter().zip(layers.iter_mut()) {
            let exact = dense_layer_gibbs(&working, layer, beta0)?;
            let blocks = rebuild_layer(&working, &plan, record.q, beta0, effective, options)?;
            let approx_dense = blocks.densify(options.dense_cap)?;
            record.measured = Some(relative_error(&exact, &approx_dense, 2.0)?);
        }
        let h_tilde = working.dense_matrix(options.dense_cap)?;
        let high_dense = high.densify(options.dense_cap)?;
        report.high_temp_measured = Some(relative_error(&exp_hermitian(&h_tilde, -beta0), &high_dense, 2.0)?);
        let h = spec.dense_matrix(options.dense_cap)?;
        let z = match evolution {
            Evolution::Thermal(b) => C64::new(b, 0.0),
            Evolution::RealTime(t) => C64::new(0.0, t),
        };
        let exact = exp_hermitian(&h, -z);
        let approx_dense = mpo.densify(options.dense_cap)?;
        for &p in &options.pnorms {
            report.measured.push(PNormError { p: pnorm_label(p), error: relative_error(&exact, &approx_dense, p)? });
        }
        if let Evolution::Thermal(_) = evolution {
            let exact_z = exact.trace().re;
            let tr = mpo.trace();
            report.partition = Some(PartitionCheck {
                trace_re: tr.re,
                trace_im: tr.im,
                exact: exact_z,
                relative_error: (tr - exact_z).norm() / exact_z,
            });
        }
        timings.oracle_s = t0.elapsed().as_secs_f64();
    } else if options.measure {
        report.notes.push(format!("dimension {dim} beyond the dense cap: predictions only"));
    }
    report.layers = layers;
    Ok(PipelineOutput { mpo, high_temp: high, report, timings })
}

/// Recomputes the blocks of layer `q` and joins them into one chain MPO.
/// Only used for measurement on small systems.
fn rebuild_layer(
    spec: &HamiltonianSpec,
    plan: &MergePlan,
    q: usize,
    beta0: C64,
    policy: CompressionPolicy,
    options: &PipelineOptions,
) -> Result<Mpo> {
    let mut blocks = plan.layers[0]
        .iter()
        .map(|&leaf| Ok((leaf, leaf_gibbs_mpo(spec, leaf, beta0)?)))
        .collect::<Result<Vec<_>>>()?;
    for _ in 2..=q {
        blocks = merge_layer(spec, &blocks, beta0, plan.budget.m0, policy, options.bond_cap)?.0;
    }
    let mut iter = blocks.into_iter().map(|(_, m)| m);
    let first = iter.next().expect("at least one block");
    iter.try_fold(first, |acc, m| acc.concat(&m))
}

fn trivial_real_time(spec: &HamiltonianSpec, epsilon: f64, policy: String, options: &PipelineOptions) -> PipelineOutput {
    let id = Mpo::identity(spec.n(), spec.d());
    let constants = BoundConstants::from_spec(spec).unwrap_or(BoundConstants::new(0.0, 0.0, 1).expect("zero constants"));
    let budget = ErrorBudget {
        n: spec.n(),
        epsilon,
        beta: 0.0,
        beta0: 0.0,
        q: 1,
        q0: layer_count(spec.n(), options.leaf_size),
        delta0: 0.0,
        m0: 0,
        m0_required: 0,
        epsilon_h: 0.0,
        constants,
        layer_errors: vec![0.0; layer_count(spec.n(), options.leaf_size)],
        eps_prime0: 0.0,
        eps_beta: 0.0,
        d_h: 1,
        predicted_bond_ln_high_temp: 0.0,
        predicted_bond_ln: 0.0,
        predicted_multiply_cost_ln: 0.0,
    };
    let report = ErrorReport {
        version: REPORT_VERSION,
        kind: "real-time".into(),
        model_digest: spec.digest(),
        n: spec.n(),
        d: spec.d(),
        beta: 0.0,
        time: Some(0.0),
        epsilon,
        policy,
        path: "trivial".into(),
        budget,
        expsum: None,
        layers: Vec::new(),
        high_temp_predicted: 0.0,
        high_temp_measured: None,
        predicted_error: 0.0,
        measured: options
            .pnorms
            .iter()
            .map(|&p| PNormError { p: pnorm_label(p), error: 0.0 })
            .collect(),
        partition: None,
        bond_profile: id.bonds().to_vec(),
        ledger_ln: id.ledger().to_vec(),
        high_temp_bond_profile: id.bonds().to_vec(),
        high_temp_ledger_ln: id.ledger().to_vec(),
        certified: false,
        notes: vec!["t = 0: identity".into()],
    };
    PipelineOutput { mpo: id.clone(), high_temp: id, report, timings: Timings::default() }
}

/// Relative Schatten-`p` distance between an MPO and a dense operator.
pub fn mpo_relative_error(exact: &DenseOperator, mpo: &Mpo, p: f64, cap: usize) -> Result<f64> {
    relative_error(exact, &mpo.densify(cap)?, p)
}

/// Operator-norm distance `||A - M||_∞`.
pub fn mpo_operator_distance(exact: &DenseOperator, mpo: &Mpo, cap: usize) -> Result<f64> {
    schatten_norm(&(exact - mpo.densify(cap)?), f64::INFINITY)
}
