//! Oracles for the smooth part `J`, the built-in catalog, and numerical
//! self-checks (finite-difference gradients, empirical Lipschitz constants).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::vector::{self, Bounds};

/// A C¹ function `J: ℝⁿ → ℝ` given by value and gradient oracles.
///
/// Implementations must be pure: they are evaluated concurrently.
pub trait DifferentiableFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Declared Lipschitz constant of the gradient.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Claim that `J(x) → +∞` as `‖x‖ → ∞`.
    fn is_coercive(&self) -> bool {
        false
    }
}

/// Shared handle used throughout the crate.
pub type SharedFunction = Arc<dyn DifferentiableFunction>;

/// Rejects declarations that cannot describe a valid smooth objective.
pub fn validate(f: &dyn DifferentiableFunction) -> Result<()> {
    if f.dim() == 0 {
        return Err(Error::InvalidInput("function dimension must be positive".into()));
    }
    if let Some(l) = f.lipschitz() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gradient Lipschitz constant must be positive and finite, got {l}"
            )));
        }
    }
    Ok(())
}

/// Catalog entry as it appears in problem files:
/// `{"name": "quadratic", "params": {"a": [[1,0],[0,1]], "b": [0,0]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum FunctionSpec {
    Example1,
    Quadratic {
        a: Vec<Vec<f64>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
    TrigCoercive {
        a: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
}

/// Built-in test functions with closed-form gradients and Lipschitz constants.
#[derive(Debug, Clone)]
pub enum CatalogFunction {
    /// The piecewise nonconvex function
    /// `(x+π)² − (x+π)` on `x ≤ −π`, `sin x` on `(−π, π)`, `(x−π)² − (x−π)` on `x ≥ π`.
    Example1,
    /// `½⟨x, Ax⟩ + ⟨b, x⟩` with `A` symmetric positive definite.
    Quadratic {
        a: DMatrix<f64>,
        b: DVector<f64>,
        lipschitz: f64,
    },
    /// `a‖x‖² + Σ sin(xᵢ)`, nonconvex when `a < 1/2`.
    TrigCoercive { a: f64, dim: usize },
}

impl CatalogFunction {
    pub fn example1() -> Self {
        CatalogFunction::Example1
    }

    pub fn quadratic(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::InvalidInput("quadratic: A must be square and nonempty".into()));
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("quadratic: non-finite entries".into()));
        }
        if (&a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
            return Err(Error::InvalidInput("quadratic: A is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(a.clone()).eigenvalues;
        let min = eig.min();
        if !(min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadratic: A is not positive definite (smallest eigenvalue {min})"
            )));
        }
        let lipschitz = eig.max();
        Ok(CatalogFunction::Quadratic { a, b, lipschitz })
    }

    /// `‖x‖²` in dimension `n`, i.e. the quadratic with `A = 2I`.
    pub fn squared_norm(n: usize) -> Self {
        Self::quadratic(DMatrix::identity(n, n) * 2.0, DVector::zeros(n))
            .expect("2I is positive definite")
    }

    pub fn trig_coercive(a: f64, dim: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput(format!("trig_coercive: a must be positive, got {a}")));
        }
        if dim == 0 {
            return Err(Error::InvalidInput("trig_coercive: dim must be positive".into()));
        }
        Ok(CatalogFunction::TrigCoercive { a, dim })
    }

    pub fn from_spec(spec: &FunctionSpec) -> Result<Self> {
        match spec {
            FunctionSpec::Example1 => Ok(Self::example1()),
            FunctionSpec::Quadratic { a, b } => {
                let n = a.len();
                if a.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidInput("quadratic: A must be square".into()));
                }
                let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
                let b = match b {
                    Some(b) => DVector::from_column_slice(b),
                    None => DVector::zeros(n),
                };
                Self::quadratic(m, b)
            }
            FunctionSpec::TrigCoercive { a, dim } => Self::trig_coercive(*a, dim.unwrap_or(1)),
        }
    }
}

/// Looks up a catalog function by name. `params` is the JSON object found
/// under `"params"` in a problem file.
pub fn builtin(name: &str, params: &Map<String, Value>) -> Result<CatalogFunction> {
    let mut obj = Map::new();
    obj.insert("name".into(), Value::String(name.to_owned()));
    if !params.is_empty() || name != "example1" {
        obj.insert("params".into(), Value::Object(params.clone()));
    }
    let spec: FunctionSpec = serde_json::from_value(Value::Object(obj))
        .map_err(|e| Error::InvalidInput(format!("function `{name}`: {e}")))?;
    CatalogFunction::from_spec(&spec)
}

fn example1_value(x: f64) -> f64 {
    if x <= -PI {
        let t = x + PI;
        t * t - t
    } else if x < PI {
        x.sin()
    } else {
        let t = x - PI;
        t * t - t
    }
}

fn example1_grad(x: f64) -> f64 {
    if x <= -PI {
        2.0 * (x + PI) - 1.0
    } else if x < PI {
        x.cos()
    } else {
        2.0 * (x - PI) - 1.0
    }
}

impl DifferentiableFunction for CatalogFunction {
    fn dim(&self) -> usize {
        match self {
            CatalogFunction::Example1 => 1,
            CatalogFunction::Quadratic { b, .. } => b.len(),
            CatalogFunction::TrigCoercive { dim, .. } => *dim,
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            CatalogFunction::Example1 => example1_value(x[0]),
            CatalogFunction::Quadratic { a, b, .. } => {
                let n = b.len();
                let mut quad = 0.0;
                for i in 0..n {
                    let mut row = 0.0;
                    for j in 0..n {
                        row += a[(i, j)] * x[j];
                    }
                    quad += x[i] * row;
                }
                0.5 * quad + vector::dot(b.as_slice(), x)
            }
            CatalogFunction::TrigCoercive { a, .. } => {
                a * vector::norm_sq(x) + x.iter().map(|v| v.sin()).sum::<f64>()
            }
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            CatalogFunction::Example1 => vec![example1_grad(x[0])],
            CatalogFunction::Quadratic { a, b, .. } => {
                let n = b.len();
                (0..n)
                    .map(|i| (0..n).map(|j| a[(i, j)] * x[j]).sum::<f64>() + b[i])
                    .collect()
            }
            CatalogFunction::TrigCoercive { a, .. } => {
                x.iter().map(|v| 2.0 * a * v + v.cos()).collect()
            }
        }
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(match self {
            CatalogFunction::Example1 => 2.0,
            CatalogFunction::Quadratic { lipschitz, .. } => *lipschitz,
            CatalogFunction::TrigCoercive { a, .. } => 2.0 * a + 1.0,
        })
    }

    fn is_coercive(&self) -> bool {
        true
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Function assembled from closures, for user-defined objectives.
pub struct CustomFunction {
    dim: usize,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
    lipschitz: Option<f64>,
    coercive: bool,
}

impl CustomFunction {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Box::new(value),
            gradient: Box::new(gradient),
            lipschitz: None,
            coercive: false,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn coercive(mut self, yes: bool) -> Self {
        self.coercive = yes;
        self
    }
}

impl DifferentiableFunction for CustomFunction {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
    fn is_coercive(&self) -> bool {
        self.coercive
    }
}

/// Finite-difference step at `x`.
pub fn fd_step(x: &[f64]) -> f64 {
    1e-6 * (1.0 + vector::norm(x))
}

/// Pass threshold for [`check_gradient`].
pub const GRADIENT_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub max_rel_err: f64,
    pub worst_point: Vec<f64>,
    pub pass: bool,
    #[serde(skip)]
    pub rel_errors: Vec<f64>,
}

/// Central-difference gradient of `f` at `x` with the step of [`fd_step`].
pub fn central_difference(f: &dyn DifferentiableFunction, x: &[f64]) -> Vec<f64> {
    let h = fd_step(x);
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f.value(&probe);
            probe[i] = x[i] - h;
            let down = f.value(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Compares `gradient` against central finite differences at `samples`
/// uniform points of `bounds`. The relative error at a point is
/// `‖g − g_fd‖ / max(1, ‖g‖, ‖g_fd‖)`.
pub fn check_gradient(
    f: &dyn DifferentiableFunction,
    bounds: &Bounds,
    samples: usize,
    seed: u64,
) -> Result<GradientCheckReport> {
    vector::check_dim(f.dim(), &bounds.lo)?;
    if samples == 0 {
        return Err(Error::InvalidInput("gradient check needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples).map(|_| bounds.sample(&mut rng)).collect();

    let errors: Vec<Result<f64>> = points
        .par_iter()
        .map(|x| {
            if !f.value(x).is_finite() {
                return Err(Error::NonFinite { what: "value", point: x.clone() });
            }
            let g = f.gradient(x);
            if g.len() != x.len() || !vector::all_finite(&g) {
                return Err(Error::NonFinite { what: "gradient", point: x.clone() });
            }
            let fd = central_difference(f, x);
            if !vector::all_finite(&fd) {
                return Err(Error::NonFinite { what: "value", point: x.clone() });
            }
            let denom = 1f64.max(vector::norm(&g)).max(vector::norm(&fd));
            Ok(vector::distance(&g, &fd) / denom)
        })
        .collect();
    let rel_errors = errors.into_iter().collect::<Result<Vec<f64>>>()?;

    let (worst, max_rel_err) = rel_errors
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, e)| if e > best.1 { (i, e) } else { best });
    Ok(GradientCheckReport {
        max_rel_err,
        worst_point: points[worst].clone(),
        pass: max_rel_err <= GRADIENT_REL_TOL,
        rel_errors,
    })
}

/// Empirical lower bound on the gradient's Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub sample_count: usize,
    pub bounds: Bounds,
    pub declared: Option<f64>,
    /// The sampled quotient exceeded the declared constant (beyond 1e-9).
    pub refuted: bool,
}

/// Maximum of `‖∇J(u) − ∇J(v)‖ / ‖u − v‖` over `pairs` random pairs in `bounds`.
pub fn estimate_lipschitz(
    f: &dyn DifferentiableFunction,
    bounds: &Bounds,
    pairs: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    vector::check_dim(f.dim(), &bounds.lo)?;
    if pairs == 0 {
        return Err(Error::InvalidInput("Lipschitz estimate needs at least one pair".into()));
    }
    if bounds.is_degenerate() {
        return Err(Error::InvalidInput("sampling box is a single point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..pairs)
        .map(|_| (bounds.sample(&mut rng), bounds.sample(&mut rng)))
        .collect();
    let value = samples
        .par_iter()
        .map(|(u, v)| {
            let d = vector::distance(u, v);
            if d == 0.0 {
                return 0.0;
            }
            vector::distance(&f.gradient(u), &f.gradient(v)) / d
        })
        .reduce(|| 0.0, f64::max);
    let declared = f.lipschitz();
    Ok(LipschitzEstimate {
        value,
        sample_count: pairs,
        bounds: bounds.clone(),
        declared,
        refuted: declared.is_some_and(|l| value > l + 1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn example1_minimum_value() {
        let f = builtin("example1", &Map::new()).unwrap();
        assert!((f.value(&[-PI / 2.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn example1_gradient_at_pi() {
        let f = CatalogFunction::example1();
        assert_eq!(f.gradient(&[PI]), vec![-1.0]);
    }

    #[test]
    fn quadratic_identity_value() {
        let f = builtin("quadratic", &params(serde_json::json!({"a": [[1, 0], [0, 1]], "b": [0, 0]})))
            .unwrap();
        assert!((f.value(&[3.0, 4.0]) - 12.5).abs() < 1e-14);
        assert_eq!(f.lipschitz(), Some(1.0));
    }

    #[test]
    fn quadratic_rejects_indefinite() {
        let r = builtin("quadratic", &params(serde_json::json!({"a": [[1, 0], [0, -1]]})));
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn trig_rejects_nonpositive_a() {
        assert!(builtin("trig_coercive", &params(serde_json::json!({"a": 0.0}))).is_err());
        assert!(builtin("trig_coercive", &params(serde_json::json!({"a": -1.0}))).is_err());
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin("rosenbrock", &Map::new()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn example1_seams_are_c1() {
        // Evaluate both branch formulas at the seams.
        let outer = |t: f64| t * t - t;
        let outer_d = |t: f64| 2.0 * t - 1.0;
        for (seam, t) in [(-PI, 0.0), (PI, 0.0)] {
            assert!((outer(t) - seam.sin()).abs() < 1e-15);
            assert!((outer_d(t) - seam.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn example1_is_nonconvex() {
        let f = CatalogFunction::example1();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = Bounds::cube(1, 6.0);
        let found = (0..10_000).any(|_| {
            use rand::Rng;
            let x = b.sample(&mut rng);
            let y = b.sample(&mut rng);
            let t: f64 = rng.gen();
            let m = [t * x[0] + (1.0 - t) * y[0]];
            f.value(&m) > t * f.value(&x) + (1.0 - t) * f.value(&y) + 1e-6
        });
        assert!(found);
    }

    #[test]
    fn gradient_check_quadratic() {
        let f = CatalogFunction::squared_norm(2);
        let r = check_gradient(&f, &Bounds::cube(2, 1.0), 100, 1).unwrap();
        assert!(r.pass && r.max_rel_err <= 1e-5, "{r:?}");
        assert_eq!(r.rel_errors.len(), 100);
    }

    #[test]
    fn gradient_check_example1() {
        let r = check_gradient(&CatalogFunction::example1(), &Bounds::cube(1, 6.0), 200, 2).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn gradient_check_detects_wrong_gradient() {
        let f = CustomFunction::new(2, vector::norm_sq, |x| vec![0.0; x.len()]);
        let r = check_gradient(&f, &Bounds::cube(2, 1.0), 100, 3).unwrap();
        assert!(!r.pass);
        assert!((r.max_rel_err - 1.0).abs() < 1e-3, "{}", r.max_rel_err);
    }

    #[test]
    fn gradient_check_reports_non_finite() {
        let f = CustomFunction::new(1, |x| if x[0] > 0.0 { f64::NAN } else { 0.0 }, |_| vec![0.0]);
        let r = check_gradient(&f, &Bounds::cube(1, 1.0), 50, 4);
        match r {
            Err(Error::NonFinite { point, .. }) => assert!(point[0] > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lipschitz_example1() {
        let f = CatalogFunction::example1();
        let est = estimate_lipschitz(&f, &Bounds::cube(1, 6.0), 10_000, 5).unwrap();
        assert!(est.value <= 2.0 + 1e-9 && est.value >= 1.9, "{}", est.value);
        assert!(!est.refuted);
    }

    #[test]
    fn lipschitz_squared_norm() {
        let f = CatalogFunction::squared_norm(3);
        let est = estimate_lipschitz(&f, &Bounds::cube(3, 1.0), 1000, 6).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lipschitz_constant_function() {
        let f = CustomFunction::new(1, |_| 3.0, |_| vec![0.0]);
        let est = estimate_lipschitz(&f, &Bounds::cube(1, 1.0), 100, 7).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn lipschitz_refutes_understated_constant() {
        let f = CustomFunction::new(1, |x| x[0] * x[0], |x| vec![2.0 * x[0]]).with_lipschitz(1.0);
        let est = estimate_lipschitz(&f, &Bounds::cube(1, 1.0), 100, 8).unwrap();
        assert!(est.refuted);
    }

    #[test]
    fn lipschitz_degenerate_box() {
        let f = CatalogFunction::example1();
        let b = Bounds::new(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(estimate_lipschitz(&f, &b, 10, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_lipschitz_rejected() {
        let f = CustomFunction::new(1, |_| 0.0, |_| vec![0.0]).with_lipschitz(0.0);
        assert!(validate(&f).is_err());
    }
}
