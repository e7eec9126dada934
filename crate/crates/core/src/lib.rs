//! Saddle points of `f(x, y) = J(x + y) − (L/2)‖y‖² (+ γ(y))` on `ℝⁿ × Y`,
//! where `J` is coercive with an `L`-Lipschitz gradient, `Y` is a nonempty
//! closed convex set and `γ` is concave.
//!
//! The saddle point is built directly from a global minimizer `x*` of `J`:
//! `ȳ` is the minimum-norm point of `Y` (or the minimizer of
//! `(L/2)‖y‖² − γ(y)` over `Y`) and `x̄ = x* − ȳ`. The [`saddle`] module
//! then checks the candidate against sampled inequalities and a brute-force
//! grid oracle.
//!
//! ```
//! use saddlepoint::saddle::{construct_saddle_thm1, example1_problem};
//! use saddlepoint::solvers::MinimizerConfig;
//!
//! let p = example1_problem();
//! let c = construct_saddle_thm1(&p, &MinimizerConfig::default()).unwrap();
//! assert!((c.value + 1.0).abs() < 1e-8);
//! ```

pub mod concave;
pub mod error;
pub mod function;
pub mod json;
pub mod problem;
pub mod saddle;
pub mod sets;
pub mod solvers;
pub mod vector;

pub use concave::{CatalogConcave, ConcaveFunction, GammaSpec};
pub use error::{Error, Result};
pub use function::{CatalogFunction, CustomFunction, DifferentiableFunction};
pub use problem::ProblemSpec;
pub use saddle::{MinimaxProblem, Recipe, SaddleCandidate, VerificationReport};
pub use sets::ConvexSet;
pub use vector::Bounds;
