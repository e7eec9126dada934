//! Oracles for the concave perturbation `γ`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{self, Bounds};

/// A concave continuous `γ: ℝⁿ → ℝ` given by value and supergradient
/// oracles. A supergradient `g` at `y` satisfies
/// `γ(z) ≤ γ(y) + ⟨g, z − y⟩` for all `z`.
pub trait ConcaveFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    fn supergradient(&self, y: &[f64]) -> Vec<f64>;

    /// Proximal map of the convex function `−γ`:
    /// `argmin_u  t·(−γ(u)) + ½‖u − v‖²`.
    ///
    /// Optional. When present the perturbed subproblem is solved by
    /// splitting, which also handles kinks of `γ`.
    fn prox_neg(&self, _v: &[f64], _t: f64) -> Option<Vec<f64>> {
        None
    }
}

pub type SharedConcave = Arc<dyn ConcaveFunction>;

/// Catalog entry as it appears in problem files, e.g.
/// `{"name": "linear", "params": {"c": [2.0]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum GammaSpec {
    Zero,
    Linear { c: Vec<f64> },
    /// `−‖y‖₁`
    NegAbs,
    /// `−‖y‖₂`
    NegNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogConcave {
    Zero { dim: usize },
    Linear { c: Vec<f64> },
    NegAbs { dim: usize },
    NegNorm { dim: usize },
}

impl CatalogConcave {
    pub fn from_spec(spec: &GammaSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("gamma: dim must be positive".into()));
        }
        Ok(match spec {
            GammaSpec::Zero => CatalogConcave::Zero { dim },
            GammaSpec::Linear { c } => {
                vector::check_dim(dim, c)?;
                if !vector::all_finite(c) {
                    return Err(Error::InvalidInput("gamma: non-finite coefficients".into()));
                }
                CatalogConcave::Linear { c: c.clone() }
            }
            GammaSpec::NegAbs => CatalogConcave::NegAbs { dim },
            GammaSpec::NegNorm => CatalogConcave::NegNorm { dim },
        })
    }
}

impl ConcaveFunction for CatalogConcave {
    fn dim(&self) -> usize {
        match self {
            CatalogConcave::Zero { dim }
            | CatalogConcave::NegAbs { dim }
            | CatalogConcave::NegNorm { dim } => *dim,
            CatalogConcave::Linear { c } => c.len(),
        }
    }

    fn value(&self, y: &[f64]) -> f64 {
        match self {
            CatalogConcave::Zero { .. } => 0.0,
            CatalogConcave::Linear { c } => vector::dot(c, y),
            CatalogConcave::NegAbs { .. } => -y.iter().map(|v| v.abs()).sum::<f64>(),
            CatalogConcave::NegNorm { .. } => -vector::norm(y),
        }
    }

    fn supergradient(&self, y: &[f64]) -> Vec<f64> {
        match self {
            CatalogConcave::Zero { dim } => vec![0.0; *dim],
            CatalogConcave::Linear { c } => c.clone(),
            // At a kink the element 0 of the superdifferential is returned.
            CatalogConcave::NegAbs { .. } => y
                .iter()
                .map(|v| if *v == 0.0 { 0.0 } else { -v.signum() })
                .collect(),
            CatalogConcave::NegNorm { .. } => {
                let r = vector::norm(y);
                if r == 0.0 {
                    vec![0.0; y.len()]
                } else {
                    vector::scale(y, -1.0 / r)
                }
            }
        }
    }

    fn prox_neg(&self, v: &[f64], t: f64) -> Option<Vec<f64>> {
        Some(match self {
            CatalogConcave::Zero { .. } => v.to_vec(),
            CatalogConcave::Linear { c } => vector::axpy(v, t, c),
            CatalogConcave::NegAbs { .. } => v
                .iter()
                .map(|x| x.signum() * (x.abs() - t).max(0.0))
                .collect(),
            CatalogConcave::NegNorm { .. } => {
                let r = vector::norm(v);
                if r <= t {
                    vec![0.0; v.len()]
                } else {
                    vector::scale(v, 1.0 - t / r)
                }
            }
        })
    }
}

/// Largest violation of the supergradient inequality
/// `γ(z) ≤ γ(y) + ⟨g(y), z − y⟩` over random pairs, each scaled by
/// `1 + |γ(y)|`. Non-positive (up to 1e-9) for a valid oracle.
pub fn supergradient_violation(
    gamma: &dyn ConcaveFunction,
    bounds: &Bounds,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    vector::check_dim(gamma.dim(), &bounds.lo)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let y = bounds.sample(&mut rng);
        let z = bounds.sample(&mut rng);
        let gy = gamma.value(&y);
        let g = gamma.supergradient(&y);
        let excess = gamma.value(&z) - gy - vector::dot(&g, &vector::sub(&z, &y));
        worst = worst.max(excess / (1.0 + gy.abs()));
    }
    Ok(worst)
}
