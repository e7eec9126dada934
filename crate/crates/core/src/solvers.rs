//! The two solvers the saddle constructions rely on.
//!
//! * [`minimize_coercive`]: multistart gradient descent with step `1/L` for a
//!   coercive `J` whose gradient is `L`-Lipschitz. Global optimality is not
//!   certified.
//! * [`solve_perturbed`]: the strongly convex problem
//!   `min_{y∈Y} (L/2)‖y‖² − γ(y)`, whose solution is unique.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concave::ConcaveFunction;
use crate::error::{Error, Result};
use crate::function::DifferentiableFunction;
use crate::sets::ConvexSet;
use crate::vector::{self, Bounds};

/// Number of starts sampled (and run in parallel) before the box is revisited.
const ROUND_SIZE: usize = 8;
const MAX_DOUBLINGS: u32 = 20;
/// Terminal values within this distance of the best are considered tied.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizerConfig {
    pub starts: usize,
    /// Half-width of the initial sampling box `[-box0, box0]ⁿ`.
    pub box0: f64,
    /// Defaults to 1e-8 in dimensions 1 and 2, 1e-6 above.
    pub grad_tol: Option<f64>,
    pub max_iters: usize,
    pub seed: u64,
    #[serde(skip)]
    pub record_trajectories: bool,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            box0: 10.0,
            grad_tol: None,
            max_iters: 100_000,
            seed: 0,
            record_trajectories: false,
        }
    }
}

impl MinimizerConfig {
    pub fn grad_tol_for(&self, dim: usize) -> f64 {
        self.grad_tol.unwrap_or(if dim <= 2 { 1e-8 } else { 1e-6 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerResult {
    pub xstar: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub starts_used: usize,
    pub converged: bool,
    pub box_doublings: u32,
    /// Largest single-step increase `J(x_{k+1}) − J(x_k)` seen on any trajectory.
    pub max_step_increase: f64,
    /// Objective values along each trajectory, when requested.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trajectories: Vec<Vec<f64>>,
}

struct Descent {
    x: Vec<f64>,
    value: f64,
    grad_norm: f64,
    start_value: f64,
    left_box: bool,
    max_increase: f64,
    values: Vec<f64>,
}

fn descend(
    f: &dyn DifferentiableFunction,
    start: Vec<f64>,
    step: f64,
    grad_tol: f64,
    max_iters: usize,
    bounds: &Bounds,
    record: bool,
) -> Result<Descent> {
    let mut x = start;
    let mut value = f.value(&x);
    let start_value = value;
    let mut g = f.gradient(&x);
    let mut grad_norm = vector::norm(&g);
    let mut left_box = false;
    let mut max_increase = f64::NEG_INFINITY;
    let mut values = if record { vec![value] } else { Vec::new() };
    for _ in 0..max_iters {
        if !value.is_finite() || !grad_norm.is_finite() {
            return Err(Error::NonFinite { what: "value or gradient", point: x });
        }
        if grad_norm <= grad_tol {
            break;
        }
        let next = vector::axpy(&x, -step, &g);
        let next_value = f.value(&next);
        max_increase = max_increase.max(next_value - value);
        x = next;
        value = next_value;
        g = f.gradient(&x);
        grad_norm = vector::norm(&g);
        left_box |= !bounds.contains(&x);
        if record {
            values.push(value);
        }
    }
    Ok(Descent { x, value, grad_norm, start_value, left_box, max_increase, values })
}

/// Multistart gradient descent for a coercive `J` with declared gradient
/// Lipschitz constant `L`, using the fixed step `1/L`.
///
/// Starts are drawn uniformly from a box that begins as `[-box0, box0]ⁿ`
/// and doubles every time a trajectory leaves it (at most 20 times).
/// Starts are processed in rounds of eight so the outcome does not depend
/// on the thread count. Among terminal points whose values are within 1e-9
/// of the best, the lexicographically smallest is returned.
pub fn minimize_coercive(
    f: &dyn DifferentiableFunction,
    config: &MinimizerConfig,
) -> Result<MinimizerResult> {
    if !f.is_coercive() {
        return Err(Error::NotCoercive);
    }
    let lipschitz = f.lipschitz().ok_or(Error::MissingLipschitz)?;
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidInput(format!("Lipschitz constant {lipschitz} is not positive")));
    }
    if config.starts == 0 || !(config.box0 > 0.0) {
        return Err(Error::InvalidInput("need at least one start and a positive box".into()));
    }
    let n = f.dim();
    let grad_tol = config.grad_tol_for(n);
    let step = 1.0 / lipschitz;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut bounds = Bounds::cube(n, config.box0);
    let mut doublings = 0;
    let mut finished: Vec<Descent> = Vec::with_capacity(config.starts);

    while finished.len() < config.starts {
        let batch = ROUND_SIZE.min(config.starts - finished.len());
        let starts: Vec<Vec<f64>> = (0..batch).map(|_| bounds.sample(&mut rng)).collect();
        let results = starts
            .into_par_iter()
            .map(|s| {
                descend(f, s, step, grad_tol, config.max_iters, &bounds, config.record_trajectories)
            })
            .collect::<Result<Vec<_>>>()?;
        for r in &results {
            if r.left_box && doublings < MAX_DOUBLINGS {
                bounds = bounds.doubled();
                doublings += 1;
            }
        }
        finished.extend(results);
    }

    let best_value = finished.iter().map(|d| d.value).fold(f64::INFINITY, f64::min);
    let best = finished
        .iter()
        .filter(|d| d.value <= best_value + TIE_TOL)
        .min_by(|a, b| vector::lex_cmp(&a.x, &b.x))
        .expect("at least one start");
    debug_assert!(finished.iter().all(|d| d.value <= d.start_value));

    Ok(MinimizerResult {
        xstar: best.x.clone(),
        value: best.value,
        grad_norm: best.grad_norm,
        starts_used: finished.len(),
        converged: best.grad_norm <= grad_tol,
        box_doublings: doublings,
        max_step_increase: finished
            .iter()
            .map(|d| d.max_increase)
            .fold(f64::NEG_INFINITY, f64::max),
        trajectories: finished
            .into_iter()
            .map(|d| d.values)
            .filter(|v| !v.is_empty())
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbedConfig {
    /// Initial point; defaults to the origin.
    pub start: Option<Vec<f64>>,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PerturbedConfig {
    fn default() -> Self {
        Self { start: None, tol: 1e-10, max_iters: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbedMethod {
    /// `y ← P_Y(y − (1/(2L))(L y − g(y)))` with `g` a supergradient of `γ`.
    ProjectedSupergradient,
    /// Douglas–Rachford splitting between `(L/2)‖·‖² − γ` and the indicator of `Y`.
    DouglasRachford,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedSolveResult {
    pub ybar: Vec<f64>,
    /// `(L/2)‖ȳ‖² − γ(ȳ)`
    pub objective: f64,
    pub iterations: usize,
    /// `‖ȳ − P_Y(ȳ − (1/L)(L ȳ − g(ȳ)))‖` with `g` the oracle's supergradient.
    pub fixed_point_residual: f64,
    pub converged: bool,
    pub method: PerturbedMethod,
}

/// Residual of the fixed-point form of `0 ∈ L ȳ − ∂γ(ȳ) + N_Y(ȳ)`.
pub fn perturbed_fixed_point_residual(
    lipschitz: f64,
    gamma: &dyn ConcaveFunction,
    set: &ConvexSet,
    y: &[f64],
) -> Result<f64> {
    let g = gamma.supergradient(y);
    let grad = vector::sub(&vector::scale(y, lipschitz), &g);
    let p = set.project(&vector::axpy(y, -1.0 / lipschitz, &grad))?;
    Ok(vector::distance(y, &p))
}

/// Solves `min_{y∈Y} (L/2)‖y‖² − γ(y)`.
///
/// When `γ` exposes the proximal map of `−γ`, Douglas–Rachford splitting is
/// used; it converges for nonsmooth `γ`. Otherwise the fixed-step projected
/// iteration `y ← P_Y(y − (1/(2L))(L y − g(y)))` runs until successive
/// iterates differ by at most `tol`.
pub fn solve_perturbed(
    lipschitz: f64,
    gamma: &dyn ConcaveFunction,
    set: &ConvexSet,
    config: &PerturbedConfig,
) -> Result<PerturbedSolveResult> {
    if !(lipschitz > 0.0) || !lipschitz.is_finite() {
        return Err(Error::InvalidInput(format!("L must be positive, got {lipschitz}")));
    }
    let n = set.dim();
    if gamma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: gamma.dim() });
    }
    let start = match &config.start {
        Some(s) => {
            vector::check_dim(n, s)?;
            s.clone()
        }
        None => vec![0.0; n],
    };

    let probe_t = 1.0 / (2.0 * lipschitz);
    let (ybar, iterations, converged, method) = if gamma.prox_neg(&start, probe_t).is_some() {
        douglas_rachford(lipschitz, gamma, set, start, config)?
    } else {
        projected_supergradient(lipschitz, gamma, set, start, config)?
    };

    Ok(PerturbedSolveResult {
        objective: 0.5 * lipschitz * vector::norm_sq(&ybar) - gamma.value(&ybar),
        fixed_point_residual: perturbed_fixed_point_residual(lipschitz, gamma, set, &ybar)?,
        ybar,
        iterations,
        converged,
        method,
    })
}

type Iterate = (Vec<f64>, usize, bool, PerturbedMethod);

fn projected_supergradient(
    lipschitz: f64,
    gamma: &dyn ConcaveFunction,
    set: &ConvexSet,
    start: Vec<f64>,
    config: &PerturbedConfig,
) -> Result<Iterate> {
    let step = 1.0 / (2.0 * lipschitz);
    let mut y = set.project(&start)?;
    for k in 1..=config.max_iters {
        let g = gamma.supergradient(&y);
        let grad = vector::sub(&vector::scale(&y, lipschitz), &g);
        let next = set.project(&vector::axpy(&y, -step, &grad))?;
        if !vector::all_finite(&next) {
            return Err(Error::NonFinite { what: "iterate", point: y });
        }
        let moved = vector::distance(&next, &y);
        y = next;
        if moved <= config.tol {
            return Ok((y, k, true, PerturbedMethod::ProjectedSupergradient));
        }
    }
    Ok((y, config.max_iters, false, PerturbedMethod::ProjectedSupergradient))
}

fn douglas_rachford(
    lipschitz: f64,
    gamma: &dyn ConcaveFunction,
    set: &ConvexSet,
    start: Vec<f64>,
    config: &PerturbedConfig,
) -> Result<Iterate> {
    // With t = 1/L: prox_{tF}(z) = prox_{−γ/(2L)}(z / 2) for F = (L/2)‖·‖² − γ.
    let t = 1.0 / (2.0 * lipschitz);
    let prox_f = |z: &[f64]| {
        gamma
            .prox_neg(&vector::scale(z, 0.5), t)
            .ok_or_else(|| Error::InvalidInput("gamma stopped providing its proximal map".into()))
    };
    let mut z = start;
    let mut u = prox_f(&z)?;
    let mut w = set.project(&vector::sub(&vector::scale(&u, 2.0), &z))?;
    for k in 1..=config.max_iters {
        if vector::distance(&w, &u) <= config.tol {
            return Ok((w, k, true, PerturbedMethod::DouglasRachford));
        }
        z = vector::add(&z, &vector::sub(&w, &u));
        if !vector::all_finite(&z) {
            return Err(Error::NonFinite { what: "iterate", point: z });
        }
        u = prox_f(&z)?;
        w = set.project(&vector::sub(&vector::scale(&u, 2.0), &z))?;
    }
    Ok((w, config.max_iters, false, PerturbedMethod::DouglasRachford))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concave::CatalogConcave;
    use crate::function::{CatalogFunction, CustomFunction};
    use std::f64::consts::PI;

    #[test]
    fn example1_global_minimizer() {
        let r = minimize_coercive(&CatalogFunction::example1(), &MinimizerConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.xstar[0] + PI / 2.0).abs() < 1e-7, "{:?}", r.xstar);
        assert!((r.value + 1.0).abs() < 1e-12);
        assert!(r.grad_norm <= 1e-8);
    }

    #[test]
    fn squared_norm_minimizer_is_origin() {
        let r = minimize_coercive(&CatalogFunction::squared_norm(3), &MinimizerConfig::default())
            .unwrap();
        assert!(vector::norm(&r.xstar) < 1e-6 && r.value.abs() < 1e-12);
    }

    #[test]
    fn trig_coercive_matches_grid_scan() {
        let f = CatalogFunction::trig_coercive(0.05, 1).unwrap();
        let r = minimize_coercive(&f, &MinimizerConfig::default()).unwrap();
        let n = 1_000_000;
        let grid_min = (0..=n)
            .map(|i| f.value(&[-40.0 + 80.0 * i as f64 / n as f64]))
            .fold(f64::INFINITY, f64::min);
        assert!((r.value - grid_min).abs() <= 1e-6, "{} vs {grid_min}", r.value);
        assert!(r.value <= grid_min + 1e-12);
    }

    #[test]
    fn refuses_non_coercive() {
        let f = CustomFunction::new(1, |x| x[0], |_| vec![1.0]).with_lipschitz(1.0);
        assert!(matches!(
            minimize_coercive(&f, &MinimizerConfig::default()),
            Err(Error::NotCoercive)
        ));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let cfg = MinimizerConfig { max_iters: 2, starts: 2, ..Default::default() };
        let r = minimize_coercive(&CatalogFunction::trig_coercive(0.05, 2).unwrap(), &cfg).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn descent_is_monotone_along_trajectories() {
        let cfg = MinimizerConfig { record_trajectories: true, ..Default::default() };
        let r = minimize_coercive(&CatalogFunction::trig_coercive(0.05, 2).unwrap(), &cfg).unwrap();
        assert_eq!(r.trajectories.len(), 32);
        for t in &r.trajectories {
            assert!(t.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
        assert!(r.max_step_increase <= 1e-12);
    }

    #[test]
    fn box_expands_for_far_minimizer() {
        // Minimizer at 100, far outside the initial box.
        let f = CustomFunction::new(1, |x| (x[0] - 100.0).powi(2), |x| vec![2.0 * (x[0] - 100.0)])
            .with_lipschitz(4.0)
            .coercive(true);
        let cfg = MinimizerConfig { grad_tol: Some(1e-9), ..Default::default() };
        let r = minimize_coercive(&f, &cfg).unwrap();
        assert!((r.xstar[0] - 100.0).abs() < 1e-9);
        assert!(r.box_doublings > 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let f = CatalogFunction::trig_coercive(0.05, 2).unwrap();
        let a = minimize_coercive(&f, &MinimizerConfig::default()).unwrap();
        let b = minimize_coercive(&f, &MinimizerConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbed_zero_gamma_whole_space() {
        let y = ConvexSet::whole_space(2).unwrap();
        let g = CatalogConcave::Zero { dim: 2 };
        let r = solve_perturbed(2.0, &g, &y, &PerturbedConfig::default()).unwrap();
        assert!(r.converged && vector::norm(&r.ybar) < 1e-10);
    }

    #[test]
    fn perturbed_linear_gamma() {
        let y = ConvexSet::whole_space(2).unwrap();
        let g = CatalogConcave::Linear { c: vec![1.0, -3.0] };
        let cfg = PerturbedConfig { start: Some(vec![5.0, 5.0]), ..Default::default() };
        let r = solve_perturbed(2.0, &g, &y, &cfg).unwrap();
        assert!(vector::distance(&r.ybar, &[0.5, -1.5]) < 1e-9, "{:?}", r.ybar);
        assert!(r.fixed_point_residual <= 1e-8);
    }

    #[test]
    fn perturbed_neg_abs_on_interval() {
        let y = ConvexSet::new_box(vec![-1.0], vec![1.0]).unwrap();
        let g = CatalogConcave::NegAbs { dim: 1 };
        let cfg = PerturbedConfig { start: Some(vec![0.7]), ..Default::default() };
        let r = solve_perturbed(2.0, &g, &y, &cfg).unwrap();
        // Grid scan of (L/2)y² + |y| over [−1, 1] at step 1e-6.
        let steps = 2_000_000;
        let (mut best_y, mut best) = (0.0, f64::INFINITY);
        for i in 0..=steps {
            let t = -1.0 + 2.0 * i as f64 / steps as f64;
            let v = t * t + t.abs();
            if v < best {
                best = v;
                best_y = t;
            }
        }
        assert!(best_y.abs() < 1e-6);
        assert!(r.converged && (r.ybar[0] - best_y).abs() < 1e-6, "{r:?}");
    }

    /// Smooth concave γ(y) = −½‖y‖² + ⟨c, y⟩ without a proximal map.
    struct SmoothConcave {
        c: Vec<f64>,
    }

    impl ConcaveFunction for SmoothConcave {
        fn dim(&self) -> usize {
            self.c.len()
        }
        fn value(&self, y: &[f64]) -> f64 {
            -0.5 * vector::norm_sq(y) + vector::dot(&self.c, y)
        }
        fn supergradient(&self, y: &[f64]) -> Vec<f64> {
            vector::sub(&self.c, y)
        }
    }

    #[test]
    fn projected_supergradient_route() {
        // min (L/2)y² + ½y² − c y over [0, 1] with L = 2, c = 6: unconstrained 2, clipped to 1.
        let y = ConvexSet::new_box(vec![0.0], vec![1.0]).unwrap();
        let g = SmoothConcave { c: vec![6.0] };
        let r = solve_perturbed(2.0, &g, &y, &PerturbedConfig::default()).unwrap();
        assert_eq!(r.method, PerturbedMethod::ProjectedSupergradient);
        assert!(r.converged && (r.ybar[0] - 1.0).abs() < 1e-12);
        assert!(r.fixed_point_residual <= 1e-8);
    }

    #[test]
    fn perturbed_rejects_bad_l() {
        let y = ConvexSet::whole_space(1).unwrap();
        let g = CatalogConcave::Zero { dim: 1 };
        assert!(solve_perturbed(0.0, &g, &y, &PerturbedConfig::default()).is_err());
    }
}
