//! Hamiltonian MPOs. Term lists go through a finite-state automaton whose
//! states are the open prefixes of partially placed terms; exponential-sum
//! specs use the channel layout with one decaying channel per series term and
//! left operator.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use super::{Mpo, ZERO};
use crate::error::{Error, Result};
use crate::model::{ExpTerm, HamiltonianSpec, Interval, LocalTerm, SiteOp, Structure};
use crate::C64;

/// `H` on the whole chain.
pub fn hamiltonian_mpo(spec: &HamiltonianSpec) -> Result<Mpo> {
    region_mpo(spec, Interval::full(spec.n()))
}

/// `H_L` as an MPO on the sites of `region` only.
pub fn region_mpo(spec: &HamiltonianSpec, region: Interval) -> Result<Mpo> {
    Interval::new(region.lo, region.hi, spec.n())?;
    match spec.structure() {
        Structure::ExpSum { couplings, series } => {
            let mut left_ops: Vec<SiteOp> = couplings.iter().map(|c| c.left).collect();
            left_ops.sort();
            left_ops.dedup();
            let closers = left_ops
                .iter()
                .map(|&xi| {
                    couplings
                        .iter()
                        .filter(|c| c.left == xi)
                        .fold(DMatrix::zeros(spec.d(), spec.d()), |acc, c| {
                            acc + c.right.matrix(spec.d()) * C64::new(c.j, 0.0)
                        })
                })
                .collect();
            let onsite: Vec<&LocalTerm> = spec
                .terms()
                .iter()
                .filter(|t| t.sites.len() == 1 && region.contains(t.first()))
                .collect();
            if spec.terms().iter().any(|t| t.sites.len() > 2) {
                return Err(Error::Unsupported("exponential-sum layout needs a 2-local spec".into()));
            }
            let layout = ChannelLayout {
                d: spec.d(),
                region,
                pairs: spec.region().intersect(&region),
                left_ops,
                closers,
                series: series.clone(),
            };
            Ok(layout.build(&onsite))
        }
        _ => {
            let terms: Vec<&LocalTerm> = spec.terms().iter().filter(|t| region.contains_all(&t.sites)).collect();
            Ok(fsa_mpo(&terms, spec.d(), region))
        }
    }
}

/// `H_AB = H_{A∪B} - H_A - H_B` on the sites of `a ∪ b`, for adjacent blocks.
pub fn boundary_mpo(spec: &HamiltonianSpec, a: Interval, b: Interval) -> Result<Mpo> {
    let joined = a.join(&b)?;
    match spec.structure() {
        Structure::ExpSum { .. } => {
            let whole = region_mpo(spec, joined)?;
            let ha = region_mpo(spec, a)?.concat(&Mpo::identity(b.len(), spec.d()))?;
            let hb = Mpo::identity(a.len(), spec.d()).concat(&region_mpo(spec, b)?)?;
            whole.sub(&ha.add(&hb)?)
        }
        _ => {
            let terms: Vec<&LocalTerm> = spec
                .terms()
                .iter()
                .filter(|t| joined.contains_all(&t.sites) && t.first() <= a.hi && t.last() >= b.lo)
                .collect();
            Ok(fsa_mpo(&terms, spec.d(), joined))
        }
    }
}

/// Naive bond bound `n^k d^k` for a `k`-local spec.
pub fn generic_bond_cap(spec: &HamiltonianSpec) -> f64 {
    ((spec.n() * spec.d()) as f64).powi(spec.k() as i32)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum State {
    NotStarted,
    Open(Vec<(usize, SiteOp)>),
    Finished,
}

fn state_at(t: &LocalTerm, cut: usize) -> State {
    if t.first() > cut {
        State::NotStarted
    } else if t.last() <= cut {
        State::Finished
    } else {
        State::Open(
            t.sites
                .iter()
                .zip(&t.ops)
                .take_while(|(s, _)| **s <= cut)
                .map(|(s, o)| (*s, *o))
                .collect(),
        )
    }
}

fn fsa_mpo(terms: &[&LocalTerm], d: usize, region: Interval) -> Mpo {
    let n = region.len();
    if terms.is_empty() {
        return Mpo::zero(n, d);
    }
    // cut c sits after absolute site region.lo - 1 + c
    let abs_cut = |c: usize| region.lo - 1 + c;
    let states: Vec<BTreeMap<State, usize>> = (0..=n)
        .map(|c| {
            let set: BTreeSet<State> = terms.iter().map(|t| state_at(t, abs_cut(c))).collect();
            set.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
        })
        .collect();
    let mut op_cache: BTreeMap<SiteOp, DMatrix<C64>> = BTreeMap::new();
    let id = DMatrix::<C64>::identity(d, d);
    let mut cores = Vec::with_capacity(n);
    for s in 0..n {
        let site = region.lo + s;
        let mut entries: BTreeMap<(usize, usize), DMatrix<C64>> = BTreeMap::new();
        for t in terms {
            let ls = state_at(t, site - 1);
            let rs = state_at(t, site);
            let (li, ri) = (states[s][&ls], states[s + 1][&rs]);
            let op = match t.sites.iter().position(|&x| x == site) {
                Some(p) => op_cache.entry(t.ops[p]).or_insert_with(|| t.ops[p].matrix(d)).clone(),
                None => id.clone(),
            };
            if rs == State::Finished && ls != State::Finished {
                let e = entries.entry((li, ri)).or_insert_with(|| DMatrix::zeros(d, d));
                *e += op * C64::new(t.coefficient, 0.0);
            } else {
                entries.insert((li, ri), op);
            }
        }
        cores.push(assemble(d, states[s].len(), states[s + 1].len(), &entries));
    }
    let bonds = states.iter().map(|m| m.len()).collect();
    Mpo::new(d, bonds, cores).expect("automaton shapes are consistent")
}

fn assemble(d: usize, l: usize, r: usize, entries: &BTreeMap<(usize, usize), DMatrix<C64>>) -> Vec<C64> {
    let mut core = vec![ZERO; l * d * d * r];
    for (&(a, b), m) in entries {
        for o in 0..d {
            for i in 0..d {
                core[((a * d + o) * d + i) * r + b] += m[(o, i)];
            }
        }
    }
    core
}

struct ChannelLayout {
    d: usize,
    region: Interval,
    pairs: Option<Interval>,
    left_ops: Vec<SiteOp>,
    /// `Σ_ξ' J_{ξ,ξ'} P_ξ'` for each left operator `ξ`.
    closers: Vec<DMatrix<C64>>,
    series: Vec<ExpTerm>,
}

impl ChannelLayout {
    fn channels_at(&self, abs_cut: usize) -> usize {
        match self.pairs {
            Some(p) if p.lo <= abs_cut && abs_cut < p.hi => self.series.len() * self.left_ops.len(),
            _ => 0,
        }
    }

    fn build(&self, onsite: &[&LocalTerm]) -> Mpo {
        let d = self.d;
        let n = self.region.len();
        let abs_cut = |c: usize| self.region.lo - 1 + c;
        // layout per cut: [NotStarted?] [channels] [Finished?]
        let ns = |c: usize| if c < n { Some(0) } else { None };
        let ch = |c: usize| if c < n { 1 } else { 0 };
        let fin = |c: usize| if c > 0 { Some(ch(c) + self.channels_at(abs_cut(c))) } else { None };
        let bonds: Vec<usize> = (0..=n)
            .map(|c| usize::from(c < n) + self.channels_at(abs_cut(c)) + usize::from(c > 0))
            .collect();
        let id = DMatrix::<C64>::identity(d, d);
        let n_ops = self.left_ops.len();
        let mut cores = Vec::with_capacity(n);
        for s in 0..n {
            let site = self.region.lo + s;
            let mut e: BTreeMap<(usize, usize), DMatrix<C64>> = BTreeMap::new();
            if let (Some(a), Some(b)) = (ns(s), ns(s + 1)) {
                e.insert((a, b), id.clone());
            }
            if let (Some(a), Some(b)) = (fin(s), fin(s + 1)) {
                e.insert((a, b), id.clone());
            }
            if let (Some(a), Some(b)) = (ns(s), fin(s + 1)) {
                let field = onsite
                    .iter()
                    .filter(|t| t.first() == site)
                    .fold(DMatrix::zeros(d, d), |acc, t| acc + t.ops[0].matrix(d) * C64::new(t.coefficient, 0.0));
                e.insert((a, b), field);
            }
            let left_ch = self.channels_at(abs_cut(s));
            let right_ch = self.channels_at(abs_cut(s + 1));
            for (k, term) in self.series.iter().enumerate() {
                let decay = (-term.rate).exp();
                for x in 0..n_ops {
                    let idx = k * n_ops + x;
                    if right_ch > 0 {
                        if let Some(a) = ns(s) {
                            e.insert((a, ch(s + 1) + idx), self.left_ops[x].matrix(d));
                        }
                    }
                    if left_ch > 0 && right_ch > 0 {
                        e.insert((ch(s) + idx, ch(s + 1) + idx), &id * C64::new(decay, 0.0));
                    }
                    if left_ch > 0 {
                        let b = fin(s + 1).expect("a closing site has a right cut");
                        e.insert((ch(s) + idx, b), &self.closers[x] * C64::new(term.weight * decay, 0.0));
                    }
                }
            }
            cores.push(assemble(d, bonds[s], bonds[s + 1], &e));
        }
        Mpo::new(d, bonds, cores).expect("channel layout shapes are consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::approximate_hamiltonian;
    use crate::model::{Coupling, DEFAULT_DENSE_CAP};

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    fn check_dense(spec: &HamiltonianSpec) -> Mpo {
        let mpo = hamiltonian_mpo(spec).unwrap();
        let exact = spec.dense_matrix(DEFAULT_DENSE_CAP).unwrap();
        assert!(max_diff(&mpo.densify(DEFAULT_DENSE_CAP).unwrap(), &exact) < 1e-10);
        mpo
    }

    #[test]
    fn single_zz_term() {
        let spec = HamiltonianSpec::generic(2, 2, 2, vec![LocalTerm::new(vec![1, 2], vec![SiteOp::Z; 2], 1.0)])
            .unwrap();
        let mpo = check_dense(&spec);
        assert_eq!(mpo.bonds().len(), 3);
        assert!(mpo.bonds()[1] <= 4);
        let z = SiteOp::Z.matrix(2);
        assert!(max_diff(&mpo.densify(16).unwrap(), &z.kronecker(&z)) < 1e-15);
    }

    #[test]
    fn empty_spec_is_zero() {
        let spec = HamiltonianSpec::generic(3, 2, 2, vec![]).unwrap();
        let mpo = check_dense(&spec);
        assert_eq!(mpo.bonds(), &[1, 1, 1, 1]);
        assert!(mpo.densify(64).unwrap().iter().all(|x| *x == ZERO));
    }

    #[test]
    fn power_law_and_heisenberg_chains() {
        let zz = vec![Coupling { left: SiteOp::Z, right: SiteOp::Z, j: 1.0 }];
        let tfim = HamiltonianSpec::power_law(6, 2, 3.0, zz, &[(SiteOp::X, 0.7)]).unwrap();
        let m = check_dense(&tfim);
        assert!(m.max_bond() as f64 <= generic_bond_cap(&tfim));
        let heis: Vec<Coupling> = [SiteOp::X, SiteOp::Y, SiteOp::Z]
            .iter()
            .map(|&o| Coupling { left: o, right: o, j: 1.0 })
            .collect();
        check_dense(&HamiltonianSpec::power_law(5, 2, 2.5, heis, &[(SiteOp::Z, 0.3)]).unwrap());
    }

    #[test]
    fn three_local_terms_with_gaps() {
        let terms = vec![
            LocalTerm::new(vec![1, 3, 4], vec![SiteOp::X, SiteOp::Y, SiteOp::Z], 0.5),
            LocalTerm::new(vec![1, 3, 5], vec![SiteOp::X, SiteOp::Y, SiteOp::X], -0.25),
            LocalTerm::new(vec![2, 5], vec![SiteOp::Z, SiteOp::Z], 1.5),
            LocalTerm::new(vec![3], vec![SiteOp::X], 0.1),
            LocalTerm::new(vec![3], vec![SiteOp::X], 0.2),
        ];
        check_dense(&HamiltonianSpec::generic(5, 2, 3, terms).unwrap());
    }

    #[test]
    fn qutrit_terms() {
        let terms = vec![
            LocalTerm::new(vec![1, 2], vec![SiteOp(0), SiteOp(7)], 0.5),
            LocalTerm::new(vec![2], vec![SiteOp(4)], -1.0),
            LocalTerm::new(vec![1, 3], vec![SiteOp(3), SiteOp(3)], 0.8),
        ];
        check_dense(&HamiltonianSpec::generic(3, 3, 2, terms).unwrap());
    }

    #[test]
    fn single_exponential_channel_layout() {
        let c = vec![Coupling { left: SiteOp::Z, right: SiteOp::Z, j: 1.0 }];
        let series = vec![ExpTerm { weight: 0.8, rate: 0.5 }];
        for n in 2..=6 {
            let spec = HamiltonianSpec::exp_sum(n, 2, c.clone(), series.clone(), vec![]).unwrap();
            let m = check_dense(&spec);
            assert!(m.max_bond() <= 2 * 2 + 2);
        }
    }

    #[test]
    fn exp_sum_spec_from_fit_matches_dense() {
        let zz = vec![Coupling { left: SiteOp::Z, right: SiteOp::Z, j: 1.0 }];
        let spec = HamiltonianSpec::power_law(6, 2, 3.0, zz, &[(SiteOp::X, 1.0)]).unwrap();
        let (tilde, approx) = approximate_hamiltonian(&spec, 1e-3).unwrap();
        let m = check_dense(&tilde);
        assert_eq!(m.max_bond(), 2 + approx.unwrap().terms.len());
    }

    #[test]
    fn region_and_boundary_pieces_add_up() {
        let zz = vec![
            Coupling { left: SiteOp::Z, right: SiteOp::Z, j: 1.0 },
            Coupling { left: SiteOp::X, right: SiteOp::Y, j: 0.5 },
        ];
        let pl = HamiltonianSpec::power_law(6, 2, 3.0, zz, &[(SiteOp::X, 1.0)]).unwrap();
        let (es, _) = approximate_hamiltonian(&pl, 1e-2).unwrap();
        for spec in [pl, es] {
            let a = Interval::new(2, 3, 6).unwrap();
            let b = Interval::new(4, 6, 6).unwrap();
            let joined = a.join(&b).unwrap();
            let whole = spec.dense_on(joined, DEFAULT_DENSE_CAP).unwrap();
            let ha = spec.dense_on(a, DEFAULT_DENSE_CAP).unwrap();
            let hb = spec.dense_on(b, DEFAULT_DENSE_CAP).unwrap();
            let split = ha.kronecker(&DMatrix::identity(8, 8)) + DMatrix::<C64>::identity(4, 4).kronecker(&hb);
            let hab = boundary_mpo(&spec, a, b).unwrap().densify(DEFAULT_DENSE_CAP).unwrap();
            assert!(max_diff(&hab, &(&whole - &split)) < 1e-10);
            let ra = region_mpo(&spec, a).unwrap().densify(DEFAULT_DENSE_CAP).unwrap();
            assert!(max_diff(&ra, &ha) < 1e-10);
        }
    }
}
