//! Problem files.
//!
//! ```json
//! {
//!   "function": {"name": "quadratic", "params": {"a": [[2, 0], [0, 2]]}},
//!   "dim": 2,
//!   "set": {"kind": "halfspace", "a": [-1, 0], "b": -2},
//!   "L": 2.0,
//!   "gamma": {"name": "linear", "params": {"c": [1, 0]}},
//!   "xstar": [0, 0],
//!   "solver": {"starts": 32, "box0": 10.0, "grad_tol": 1e-8, "max_iters": 100000, "seed": 0}
//! }
//! ```
//!
//! Only `function` and `dim` are required. `set` defaults to the whole
//! space and `L` to the constant declared by the function.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::concave::{CatalogConcave, GammaSpec};
use crate::error::{Error, Result};
use crate::function::{self, DifferentiableFunction};
use crate::saddle::MinimaxProblem;
use crate::sets::{ConvexSet, SetSpec};
use crate::solvers::{MinimizerConfig, PerturbedConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionEntry {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub function: FunctionEntry,
    pub dim: usize,
    #[serde(default)]
    pub set: Option<SetSpec>,
    #[serde(default, rename = "L", alias = "lipschitz")]
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub gamma: Option<GammaSpec>,
    /// Global minimizer of `J`, required by the thm2 recipe.
    #[serde(default)]
    pub xstar: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: Option<MinimizerConfig>,
    #[serde(default)]
    pub perturbed: Option<PerturbedConfig>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("problem file: {e}")))
    }

    /// Validates every component and assembles the problem.
    pub fn build(&self) -> Result<MinimaxProblem> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("dim must be positive".into()));
        }
        let mut params = self.function.params.clone();
        if self.function.name == "trig_coercive" && !params.contains_key("dim") {
            params.insert("dim".into(), Value::from(self.dim));
        }
        let j = function::builtin(&self.function.name, &params)?;
        if j.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: j.dim() });
        }
        let set = match &self.set {
            Some(s) => ConvexSet::from_spec(s)?,
            None => ConvexSet::whole_space(self.dim)?,
        };
        let gamma = match &self.gamma {
            Some(g) => Some(Arc::new(CatalogConcave::from_spec(g, self.dim)?) as _),
            None => None,
        };
        if let Some(x) = &self.xstar {
            crate::vector::check_dim(self.dim, x)?;
        }
        MinimaxProblem::new(Arc::new(j), self.lipschitz, set, gamma)
    }

    pub fn solver_config(&self) -> MinimizerConfig {
        self.solver.clone().unwrap_or_default()
    }

    pub fn perturbed_config(&self) -> PerturbedConfig {
        self.perturbed.clone().unwrap_or_default()
    }
}
