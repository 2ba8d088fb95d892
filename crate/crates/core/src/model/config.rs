//! TOML model descriptions.
//!
//! ```toml
//! model = "tfim"        # tfim | heisenberg | nn-ising | power-law | custom
//! n = 8
//! alpha = 3.0           # tfim, heisenberg, power-law
//! j = 1.0               # tfim, heisenberg, nn-ising (default 1)
//! field = 1.0           # tfim, nn-ising: X field; heisenberg: Z field (default 0)
//!
//! # power-law only (d defaults to 2)
//! [[couplings]]
//! left = "X"
//! right = "X"
//! j = 0.5
//! [[onsite]]
//! op = "Z"
//! coefficient = 0.25
//!
//! # custom only; k defaults to the largest support
//! [[terms]]
//! sites = [1, 2]
//! ops = ["Z", "Z"]
//! coefficient = 1.0
//! ```
//!
//! Optional `g` and `g_tilde` are user-supplied bounds; they are checked
//! against the values computed from the terms and never used in their place.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::{Coupling, HamiltonianSpec, LocalTerm, SiteOp};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Tfim,
    Heisenberg,
    NnIsing,
    PowerLaw,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub left: SiteOp,
    pub right: SiteOp,
    pub j: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnsiteConfig {
    pub op: SiteOp,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub sites: Vec<usize>,
    pub ops: Vec<SiteOp>,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub onsite: Vec<OnsiteConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_tilde: Option<f64>,
}

const BUNDLED: &[(&str, &str)] = &[
    ("tfim-a2.5", include_str!("../../models/tfim-a2.5.toml")),
    ("tfim-a3", include_str!("../../models/tfim-a3.toml")),
    ("tfim-a4", include_str!("../../models/tfim-a4.toml")),
    ("heisenberg-a3", include_str!("../../models/heisenberg-a3.toml")),
    ("nn-ising", include_str!("../../models/nn-ising.toml")),
];

/// Names of the bundled demo models.
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

/// A bundled demo model resized to `n` sites.
pub fn bundled(name: &str, n: usize) -> Result<ModelConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(k, _)| *k == name)
        .ok_or_else(|| Error::Config(format!("no bundled model named '{name}'")))?;
    let mut cfg = ModelConfig::from_toml(text)?;
    cfg.n = n;
    Ok(cfg)
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model config serializes")
    }

    fn forbid(&self, what: &str, present: bool) -> Result<()> {
        if present {
            Err(Error::Config(format!("key '{what}' does not apply to model {:?}", self.model)))
        } else {
            Ok(())
        }
    }

    fn require_alpha(&self) -> Result<f64> {
        self.alpha
            .ok_or_else(|| Error::Config(format!("model {:?} requires 'alpha'", self.model)))
    }

    pub fn to_spec(&self) -> Result<HamiltonianSpec> {
        use ModelKind::*;
        let qubit_only = matches!(self.model, Tfim | Heisenberg | NnIsing);
        if qubit_only && self.d.is_some_and(|d| d != 2) {
            return Err(Error::Config("built-in spin models have d = 2".into()));
        }
        self.forbid("k", self.k.is_some() && self.model != Custom)?;
        self.forbid("terms", !self.terms.is_empty() && self.model != Custom)?;
        self.forbid("couplings", !self.couplings.is_empty() && self.model != PowerLaw)?;
        self.forbid("onsite", !self.onsite.is_empty() && self.model != PowerLaw)?;
        self.forbid("j", self.j.is_some() && matches!(self.model, PowerLaw | Custom))?;
        self.forbid("field", self.field.is_some() && matches!(self.model, PowerLaw | Custom))?;
        self.forbid("alpha", self.alpha.is_some() && matches!(self.model, NnIsing | Custom))?;

        let j = self.j.unwrap_or(1.0);
        let field = self.field.unwrap_or(0.0);
        let spec = match self.model {
            Tfim => HamiltonianSpec::power_law(
                self.n,
                2,
                self.require_alpha()?,
                vec![Coupling { left: SiteOp::Z, right: SiteOp::Z, j }],
                &[(SiteOp::X, field)],
            )?,
            Heisenberg => HamiltonianSpec::power_law(
                self.n,
                2,
                self.require_alpha()?,
                [SiteOp::X, SiteOp::Y, SiteOp::Z]
                    .into_iter()
                    .map(|op| Coupling { left: op, right: op, j })
                    .collect(),
                &[(SiteOp::Z, field)],
            )?,
            NnIsing => {
                let mut terms = Vec::new();
                for i in 1..=self.n {
                    if field != 0.0 {
                        terms.push(LocalTerm::new(vec![i], vec![SiteOp::X], field));
                    }
                    if i < self.n && j != 0.0 {
                        terms.push(LocalTerm::new(vec![i, i + 1], vec![SiteOp::Z, SiteOp::Z], j));
                    }
                }
                HamiltonianSpec::generic(self.n, 2, 2, terms)?
            }
            PowerLaw => {
                let couplings = self
                    .couplings
                    .iter()
                    .map(|c| Coupling { left: c.left, right: c.right, j: c.j })
                    .collect();
                let onsite: Vec<_> = self.onsite.iter().map(|o| (o.op, o.coefficient)).collect();
                HamiltonianSpec::power_law(self.n, self.d.unwrap_or(2), self.require_alpha()?, couplings, &onsite)?
            }
            Custom => {
                let terms: Vec<_> = self
                    .terms
                    .iter()
                    .map(|t| LocalTerm::new(t.sites.clone(), t.ops.clone(), t.coefficient))
                    .collect();
                let k = self
                    .k
                    .unwrap_or_else(|| terms.iter().map(|t| t.sites.len()).max().unwrap_or(1));
                HamiltonianSpec::generic(self.n, self.d.unwrap_or(2), k, terms)?
            }
        };
        self.validate_bounds(&spec)?;
        Ok(spec)
    }

    fn validate_bounds(&self, spec: &HamiltonianSpec) -> Result<()> {
        if let Some(g) = self.g {
            let computed = spec.extensivity_constant();
            if g < computed * (1.0 - 1e-12) {
                return Err(Error::Config(format!(
                    "declared g = {g} is below the computed extensivity constant {computed}"
                )));
            }
        }
        if let Some(gt) = self.g_tilde {
            let computed = spec.boundary_bound().map(|b| b.measured)?;
            if gt < computed * (1.0 - 1e-12) {
                return Err(Error::Config(format!(
                    "declared g_tilde = {gt} is below the computed boundary bound {computed}"
                )));
            }
        }
        Ok(())
    }
}
