//! Saddle points of `f(x, y) = J(x + y) − (L/2)‖y‖² + γ(y)` on `ℝⁿ × Y`.
//!
//! The construction is explicit: take a global minimizer `x*` of `J`, let
//! `ȳ` minimize `(L/2)‖y‖² − γ(y)` over `Y` (the minimum-norm point of `Y`
//! when `γ` is absent) and set `x̄ = x* − ȳ`. Everything else in this module
//! checks the result independently: sampled saddle inequalities, a
//! brute-force grid estimate of `sup inf` and `inf sup`, the monotonicity of
//! `y ↦ L y − ∇J(x + y)`, and the normal-cone optimality condition at `ȳ`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concave::{ConcaveFunction, SharedConcave};
use crate::error::{Error, Result};
use crate::function::{self, DifferentiableFunction, SharedFunction};
use crate::sets::{self, ConvexSet};
use crate::solvers::{self, MinimizerConfig, MinimizerResult, PerturbedConfig, PerturbedSolveResult};
use crate::vector::{self, Bounds};

/// Largest Fermat residual `‖∇J(x*)‖` accepted for a supplied minimizer.
pub const FERMAT_TOL: f64 = 1e-6;
/// Evaluation budget `|X_g| · |Y_g|` of the grid oracle.
pub const GRID_BUDGET: u128 = 10_000_000;
/// Largest dimension the grid oracle accepts.
pub const GRID_MAX_DIM: usize = 3;
/// Lower bound on `inf sup − sup inf` accepted as weak duality.
pub const WEAK_DUALITY_TOL: f64 = 1e-12;

/// `J`, `L`, `Y` and optionally `γ`.
#[derive(Clone)]
pub struct MinimaxProblem {
    j: SharedFunction,
    lipschitz: f64,
    set: ConvexSet,
    gamma: Option<SharedConcave>,
}

impl std::fmt::Debug for MinimaxProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MinimaxProblem")
            .field("dim", &self.dim())
            .field("lipschitz", &self.lipschitz)
            .field("set", &self.set)
            .field("gamma", &self.gamma.is_some())
            .finish()
    }
}

impl MinimaxProblem {
    /// `L` defaults to the constant declared by `J`. `Y` is nonempty by
    /// construction of [`ConvexSet`].
    pub fn new(
        j: SharedFunction,
        lipschitz: Option<f64>,
        set: ConvexSet,
        gamma: Option<SharedConcave>,
    ) -> Result<Self> {
        function::validate(j.as_ref())?;
        let n = j.dim();
        if set.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: set.dim() });
        }
        if let Some(g) = &gamma {
            if g.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
            }
        }
        let lipschitz = lipschitz.or(j.lipschitz()).ok_or(Error::MissingLipschitz)?;
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(Error::InvalidInput(format!("L must be positive, got {lipschitz}")));
        }
        Ok(Self { j, lipschitz, set, gamma })
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn function(&self) -> &dyn DifferentiableFunction {
        self.j.as_ref()
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn gamma(&self) -> Option<&dyn ConcaveFunction> {
        self.gamma.as_deref()
    }

    /// The same problem with a different `L`.
    pub fn with_lipschitz(&self, lipschitz: f64) -> Result<Self> {
        Self::new(self.j.clone(), Some(lipschitz), self.set.clone(), self.gamma.clone())
    }

    /// The same problem with `γ` replaced.
    pub fn with_gamma(&self, gamma: Option<SharedConcave>) -> Result<Self> {
        Self::new(self.j.clone(), Some(self.lipschitz), self.set.clone(), gamma)
    }

    fn f(&self, x: &[f64], y: &[f64]) -> f64 {
        let s = vector::add(x, y);
        let mut v = self.j.value(&s) - 0.5 * self.lipschitz * vector::norm_sq(y);
        if let Some(g) = &self.gamma {
            v += g.value(y);
        }
        v
    }

    /// Supergradient of `γ` at `y`, or zero when `γ` is absent.
    fn gamma_supergradient(&self, y: &[f64]) -> Vec<f64> {
        match &self.gamma {
            Some(g) => g.supergradient(y),
            None => vec![0.0; y.len()],
        }
    }
}

/// `f(x, y) = J(x + y) − (L/2)‖y‖² + γ(y)`, the `γ` term omitted when absent.
pub fn eval_f(p: &MinimaxProblem, x: &[f64], y: &[f64]) -> Result<f64> {
    vector::check_dim(p.dim(), x)?;
    vector::check_dim(p.dim(), y)?;
    Ok(p.f(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    /// Minimizer from the multistart solver, `ȳ` the minimum-norm point of `Y`.
    Thm1,
    /// Caller-supplied minimizer, `ȳ` the minimum-norm point of `Y`.
    Thm2,
    /// Minimizer from the solver, `ȳ` from the strongly convex subproblem.
    Thm3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleCandidate {
    pub xbar: Vec<f64>,
    pub ybar: Vec<f64>,
    /// `J(x*) − (L/2)‖ȳ‖² + γ(ȳ)`
    pub value: f64,
    pub recipe: Recipe,
    /// Recorded as `xbar + ybar`, so the identity holds bit for bit.
    pub xstar: Vec<f64>,
    /// `‖∇J(x*)‖`
    pub fermat_residual: f64,
    /// Global optimality of `x*` was assumed rather than searched for.
    pub minimizer_trusted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minimizer: Option<MinimizerResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub perturbed: Option<PerturbedSolveResult>,
}

fn assemble(p: &MinimaxProblem, xstar: &[f64], ybar: Vec<f64>, recipe: Recipe) -> SaddleCandidate {
    let xbar = vector::sub(xstar, &ybar);
    let xstar = vector::add(&xbar, &ybar);
    let value = p.f(&xbar, &ybar);
    SaddleCandidate {
        fermat_residual: vector::norm(&p.j.gradient(&xstar)),
        xbar,
        ybar,
        value,
        recipe,
        xstar,
        minimizer_trusted: recipe == Recipe::Thm2,
        minimizer: None,
        perturbed: None,
    }
}

fn require_no_gamma(p: &MinimaxProblem, recipe: &str) -> Result<()> {
    if p.gamma.is_some() {
        return Err(Error::Precondition(format!("{recipe} applies to problems without gamma")));
    }
    Ok(())
}

/// Global minimization of `J`, then `ȳ = argmin_{y∈Y} ‖y‖`, `x̄ = x* − ȳ`.
pub fn construct_saddle_thm1(p: &MinimaxProblem, config: &MinimizerConfig) -> Result<SaddleCandidate> {
    require_no_gamma(p, "thm1")?;
    let min = solvers::minimize_coercive(p.function(), config)?;
    let ybar = p.set.min_norm_point()?;
    let mut c = assemble(p, &min.xstar, ybar, Recipe::Thm1);
    let converged = min.converged;
    let grad_norm = min.grad_norm;
    c.minimizer = Some(min);
    if !converged {
        return Err(Error::NotConverged {
            stage: "global minimization",
            residual: grad_norm,
            partial: Some(Box::new(c)),
        });
    }
    Ok(c)
}

/// Same recipe as thm1 with a caller-supplied global minimizer. Only the
/// Fermat residual `‖∇J(x*)‖ ≤ 1e-6` is checked; global optimality is trusted.
pub fn construct_saddle_thm2(p: &MinimaxProblem, xstar: &[f64]) -> Result<SaddleCandidate> {
    require_no_gamma(p, "thm2")?;
    vector::check_dim(p.dim(), xstar)?;
    if !vector::all_finite(xstar) {
        return Err(Error::InvalidInput("supplied minimizer is not finite".into()));
    }
    let residual = vector::norm(&p.j.gradient(xstar));
    if !(residual <= FERMAT_TOL) {
        return Err(Error::FermatResidual { residual, tolerance: FERMAT_TOL });
    }
    let ybar = p.set.min_norm_point()?;
    Ok(assemble(p, xstar, ybar, Recipe::Thm2))
}

/// Global minimization of `J`, then `ȳ = argmin_{y∈Y} (L/2)‖y‖² − γ(y)`,
/// `x̄ = x* − ȳ`.
pub fn construct_saddle_thm3(
    p: &MinimaxProblem,
    config: &MinimizerConfig,
    perturbed: &PerturbedConfig,
) -> Result<SaddleCandidate> {
    let gamma = p
        .gamma
        .as_deref()
        .ok_or_else(|| Error::Precondition("thm3 needs gamma".into()))?;
    let min = solvers::minimize_coercive(p.function(), config)?;
    let sub = solvers::solve_perturbed(p.lipschitz, gamma, &p.set, perturbed)?;
    let mut c = assemble(p, &min.xstar, sub.ybar.clone(), Recipe::Thm3);
    let failure = if !min.converged {
        Some(("global minimization", min.grad_norm))
    } else if !sub.converged {
        Some(("perturbed subproblem", sub.fixed_point_residual))
    } else {
        None
    };
    c.minimizer = Some(min);
    c.perturbed = Some(sub);
    if let Some((stage, residual)) = failure {
        return Err(Error::NotConverged { stage, residual, partial: Some(Box::new(c)) });
    }
    Ok(c)
}

/// Residuals of a candidate. Violations are signed maxima; optional fields
/// are absent when the corresponding check was not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub recipe: Recipe,
    pub value: f64,
    /// `max_y f(x̄, y) − f(x̄, ȳ)` over sampled `y ∈ Y`.
    pub saddle_left_violation: f64,
    /// `max_x f(x̄, ȳ) − f(x, ȳ)` over sampled `x`.
    pub saddle_right_violation: f64,
    pub saddle_tolerance: f64,
    pub equality_gap: Option<f64>,
    pub equality_tolerance: Option<f64>,
    /// Grid `inf sup − sup inf`.
    pub weak_duality_slack: Option<f64>,
    pub monotonicity_violation: Option<f64>,
    pub stationarity_residual: Option<f64>,
    pub stationarity_threshold: Option<f64>,
    pub minimizer_trusted: bool,
    pub pass: bool,
}

impl VerificationReport {
    fn recompute_pass(&mut self) {
        let mut ok = self.saddle_left_violation <= self.saddle_tolerance
            && self.saddle_right_violation <= self.saddle_tolerance;
        if let (Some(g), Some(t)) = (self.equality_gap, self.equality_tolerance) {
            ok &= g <= t;
        }
        if let Some(s) = self.weak_duality_slack {
            ok &= s >= -WEAK_DUALITY_TOL;
        }
        if let Some(m) = self.monotonicity_violation {
            ok &= m <= MONOTONE_TOL;
        }
        if let (Some(r), Some(t)) = (self.stationarity_residual, self.stationarity_threshold) {
            ok &= r <= t;
        }
        self.pass = ok;
    }
}

/// Samples the two saddle inequalities `f(x̄, y) ≤ f(x̄, ȳ) ≤ f(x, ȳ)`.
///
/// `y` ranges over projections onto `Y` of random points of `x_box`
/// translated to `ȳ`, plus `ȳ`, the minimum-norm point and the projected
/// corners. `x` ranges over random points and corners of `x_box` plus `x̄`
/// and `x*`. Passes iff both violations are at most `1e-6 (1 + |value|)`.
pub fn verify_saddle(
    p: &MinimaxProblem,
    c: &SaddleCandidate,
    x_box: &Bounds,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let n = p.dim();
    for v in [&c.xbar, &c.ybar, &c.xstar, &x_box.lo] {
        vector::check_dim(n, v)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let center: Vec<f64> = x_box.lo.iter().zip(&x_box.hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let shift = vector::sub(&c.ybar, &center);
    let y_box = Bounds { lo: vector::add(&x_box.lo, &shift), hi: vector::add(&x_box.hi, &shift) };
    let mut ys = vec![c.ybar.clone(), p.set.min_norm_point()?];
    for z in y_box.corners().into_iter().chain((0..samples).map(|_| y_box.sample(&mut rng))) {
        ys.push(p.set.project(&z)?);
    }
    let mut xs = vec![c.xbar.clone(), c.xstar.clone()];
    xs.extend(x_box.corners());
    xs.extend((0..samples).map(|_| x_box.sample(&mut rng)));

    let center_value = p.f(&c.xbar, &c.ybar);
    let left = ys
        .par_iter()
        .map(|y| p.f(&c.xbar, y) - center_value)
        .reduce(|| f64::NEG_INFINITY, nan_max);
    let right = xs
        .par_iter()
        .map(|x| center_value - p.f(x, &c.ybar))
        .reduce(|| f64::NEG_INFINITY, nan_max);

    let mut report = VerificationReport {
        recipe: c.recipe,
        value: c.value,
        saddle_left_violation: left,
        saddle_right_violation: right,
        saddle_tolerance: 1e-6 * (1.0 + c.value.abs()),
        equality_gap: None,
        equality_tolerance: None,
        weak_duality_slack: None,
        monotonicity_violation: None,
        stationarity_residual: None,
        stationarity_threshold: None,
        minimizer_trusted: c.minimizer_trusted,
        pass: false,
    };
    report.recompute_pass();
    Ok(report)
}

/// `max` that propagates NaN so a broken oracle cannot pass a check.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub center: Vec<f64>,
    pub radius: f64,
    pub resolution: f64,
    pub points_per_axis: usize,
    pub points: usize,
    /// Grid points were projected onto `Y`.
    pub projected: bool,
}

/// Brute-force estimate of both sides of the minimax equality over finite grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    /// `max_{y∈Y_g} min_{x∈X_g} f(x, y)`
    pub sup_inf: f64,
    /// `min_{x∈X_g} max_{y∈Y_g} f(x, y)`
    pub inf_sup: f64,
    /// `inf_sup − sup_inf`; nonnegative on any pair of finite grids.
    pub alpha: f64,
    /// `max(|sup_inf − value|, |inf_sup − value|)`
    pub equality_gap: f64,
    /// Discretization bound the gap is compared against.
    pub tolerance: f64,
    pub value: f64,
    pub x_grid: GridDescriptor,
    pub y_grid: GridDescriptor,
}

fn lattice(center: &[f64], per_axis: usize, resolution: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let half = (per_axis / 2) as i64;
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|d| {
                    let k = (idx % per_axis) as i64 - half;
                    idx /= per_axis;
                    center[d] + k as f64 * resolution
                })
                .collect()
        })
        .collect()
}

/// Grids `X_g` (step `resolution`, half-width `radius`, centered at `x̄`)
/// and `Y_g` (the same lattice centered at `ȳ`, projected onto `Y`), then
/// `sup_inf`, `inf_sup` and their distance to the candidate value.
///
/// The tolerance is `(h/2)·√n·(2 G_J + L (‖ȳ‖ + r√n) + G_γ)` where `G_J`
/// bounds `‖∇J‖` on the region swept by `x + y` and `G_γ` is the largest
/// supergradient norm on `Y_g`.
pub fn verify_minimax_equality(
    p: &MinimaxProblem,
    c: &SaddleCandidate,
    resolution: f64,
    radius: f64,
) -> Result<GapEstimate> {
    let n = p.dim();
    if n > GRID_MAX_DIM {
        return Err(Error::Precondition(format!(
            "grid oracle is limited to dimension {GRID_MAX_DIM}, problem has {n}"
        )));
    }
    if !(resolution > 0.0) || !(radius >= 0.0) || !resolution.is_finite() || !radius.is_finite() {
        return Err(Error::InvalidInput("resolution must be positive and radius nonnegative".into()));
    }
    let half = (radius / resolution + 1e-9).floor();
    let per_axis_f = 2.0 * half + 1.0;
    let count = (per_axis_f as u128).saturating_pow(n as u32);
    let evaluations = count.saturating_mul(count);
    if per_axis_f > 1e9 || evaluations > GRID_BUDGET {
        return Err(Error::GridBudget { points: evaluations, budget: GRID_BUDGET });
    }
    let per_axis = per_axis_f as usize;

    let xs = lattice(&c.xbar, per_axis, resolution);
    let ys = lattice(&c.ybar, per_axis, resolution)
        .iter()
        .map(|z| p.set.project(z))
        .collect::<Result<Vec<_>>>()?;

    let (row_max, col_min) = xs
        .par_iter()
        .fold(
            || (f64::INFINITY, vec![f64::INFINITY; ys.len()]),
            |(mut best_row, mut cols), x| {
                let mut row = f64::NEG_INFINITY;
                for (j, y) in ys.iter().enumerate() {
                    let v = p.f(x, y);
                    row = nan_max(row, v);
                    cols[j] = if v.is_nan() { f64::NAN } else { cols[j].min(v) };
                }
                best_row = if row.is_nan() { f64::NAN } else { best_row.min(row) };
                (best_row, cols)
            },
        )
        .reduce(
            || (f64::INFINITY, vec![f64::INFINITY; ys.len()]),
            |(a, mut ca), (b, cb)| {
                for (u, v) in ca.iter_mut().zip(cb) {
                    *u = if u.is_nan() || v.is_nan() { f64::NAN } else { u.min(v) };
                }
                (if a.is_nan() || b.is_nan() { f64::NAN } else { a.min(b) }, ca)
            },
        );
    let inf_sup = row_max;
    let sup_inf = col_min.into_iter().fold(f64::NEG_INFINITY, nan_max);
    if !inf_sup.is_finite() || !sup_inf.is_finite() {
        return Err(Error::NonFinite { what: "objective on grid", point: c.xbar.clone() });
    }

    let lj = p.j.lipschitz().unwrap_or(p.lipschitz);
    let root_n = (n as f64).sqrt();
    let grad_bound = vector::norm(&p.j.gradient(&c.xstar)) + lj * 2.0 * radius * root_n;
    let gamma_bound = match &p.gamma {
        Some(g) => ys.iter().map(|y| vector::norm(&g.supergradient(y))).fold(0.0, f64::max),
        None => 0.0,
    };
    let tolerance = 0.5
        * resolution
        * root_n
        * (2.0 * grad_bound + p.lipschitz * (vector::norm(&c.ybar) + radius * root_n) + gamma_bound);

    let grid = |center: &[f64], projected| GridDescriptor {
        center: center.to_vec(),
        radius,
        resolution,
        points_per_axis: per_axis,
        points: xs.len(),
        projected,
    };
    Ok(GapEstimate {
        sup_inf,
        inf_sup,
        alpha: inf_sup - sup_inf,
        equality_gap: (sup_inf - c.value).abs().max((inf_sup - c.value).abs()),
        tolerance,
        value: c.value,
        x_grid: grid(&c.xbar, false),
        y_grid: grid(&c.ybar, !p.set.is_whole_space()),
    })
}

/// Scaled violation threshold for the monotonicity check.
pub const MONOTONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    /// Smallest `⟨T(y) − T(y′), y − y′⟩` over the sampled pairs.
    pub min_inner_product: f64,
    /// Largest `−⟨T(y) − T(y′), y − y′⟩ / (1 + ‖y − y′‖²)`, floored at zero.
    pub worst_scaled_violation: f64,
    pub pairs: usize,
    pub monotone: bool,
}

/// Tests monotonicity of `T(y) = L y − ∇J(x + y) − g(y)` (the gradient of
/// `−f(x, ·)`, with `g` a supergradient of `γ` when present) on random
/// pairs from `bounds`. Monotone iff every pair has
/// `⟨T(y) − T(y′), y − y′⟩ ≥ −1e-8 (1 + ‖y − y′‖²)`.
pub fn check_claim1_monotonicity(
    p: &MinimaxProblem,
    x: &[f64],
    pairs: usize,
    bounds: &Bounds,
    seed: u64,
) -> Result<MonotonicityCheck> {
    vector::check_dim(p.dim(), x)?;
    vector::check_dim(p.dim(), &bounds.lo)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(Vec<f64>, Vec<f64>)> =
        (0..pairs).map(|_| (bounds.sample(&mut rng), bounds.sample(&mut rng))).collect();
    let operator = |y: &[f64]| {
        let gj = p.j.gradient(&vector::add(x, y));
        let gg = p.gamma_supergradient(y);
        (0..y.len()).map(|i| p.lipschitz * y[i] - gj[i] - gg[i]).collect::<Vec<f64>>()
    };
    let (min_inner, worst) = samples
        .par_iter()
        .map(|(y, y2)| {
            let d = vector::sub(y, y2);
            let inner = vector::dot(&vector::sub(&operator(y), &operator(y2)), &d);
            (inner, -inner / (1.0 + vector::norm_sq(&d)))
        })
        .reduce(
            || (f64::INFINITY, 0.0),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );
    Ok(MonotonicityCheck {
        min_inner_product: min_inner,
        worst_scaled_violation: worst,
        pairs,
        monotone: worst <= MONOTONE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityCheck {
    /// Normal-cone violation of `−v` at `ȳ`, `v = L ȳ − ∇J(x̄ + ȳ) − g(ȳ)`.
    pub residual: f64,
    pub threshold: f64,
    /// `‖∇J(x̄ + ȳ)‖`
    pub grad_norm: f64,
    pub pass: bool,
}

/// Checks `0 ∈ ∂_y(−f)(x̄, ȳ) + N_Y(ȳ)` through [`sets::certify_normal_cone`].
/// For candidates without `γ` the gradient `∇J(x̄ + ȳ)` must also vanish
/// (up to 1e-6), so that `v` reduces to `L ȳ`.
pub fn stationarity_residual(p: &MinimaxProblem, c: &SaddleCandidate) -> Result<StationarityCheck> {
    vector::check_dim(p.dim(), &c.ybar)?;
    vector::check_dim(p.dim(), &c.xbar)?;
    let gj = p.j.gradient(&vector::add(&c.xbar, &c.ybar));
    let grad_norm = vector::norm(&gj);
    if p.gamma.is_none() && !(grad_norm <= FERMAT_TOL) {
        return Err(Error::FermatResidual { residual: grad_norm, tolerance: FERMAT_TOL });
    }
    let gg = p.gamma_supergradient(&c.ybar);
    let minus_v: Vec<f64> = (0..p.dim())
        .map(|i| -(p.lipschitz * c.ybar[i] - gj[i] - gg[i]))
        .collect();
    let cert = sets::certify_normal_cone(&p.set, &c.ybar, &minus_v, 1000, 0)?;
    Ok(StationarityCheck {
        residual: cert.worst_violation,
        threshold: cert.threshold,
        grad_norm,
        pass: cert.pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Half-width of the sampling box around `x̄` for the saddle inequalities.
    pub x_radius: f64,
    pub samples: usize,
    pub seed: u64,
    /// Grid oracle step; the oracle is skipped above dimension 3.
    pub resolution: f64,
    pub radius: f64,
    pub monotonicity_pairs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            x_radius: 10.0,
            samples: 10_000,
            seed: 0,
            resolution: 0.01,
            radius: 8.0,
            monotonicity_pairs: 10_000,
        }
    }
}

/// Every check on one candidate: saddle inequalities, grid equality gap
/// (dimension ≤ 3), monotonicity at `x̄`, and stationarity.
pub fn verify(
    p: &MinimaxProblem,
    c: &SaddleCandidate,
    opts: &VerifyOptions,
) -> Result<(VerificationReport, Option<GapEstimate>)> {
    let x_box = Bounds::centered(&c.xbar, opts.x_radius);
    let mut report = verify_saddle(p, c, &x_box, opts.samples, opts.seed)?;

    let gap = if p.dim() <= GRID_MAX_DIM {
        let g = verify_minimax_equality(p, c, opts.resolution, opts.radius)?;
        report.equality_gap = Some(g.equality_gap);
        report.equality_tolerance = Some(g.tolerance);
        report.weak_duality_slack = Some(g.alpha);
        Some(g)
    } else {
        None
    };

    let y_box = Bounds::centered(&c.ybar, opts.x_radius);
    let mono = check_claim1_monotonicity(p, &c.xbar, opts.monotonicity_pairs, &y_box, opts.seed)?;
    report.monotonicity_violation = Some(mono.worst_scaled_violation);

    match stationarity_residual(p, c) {
        Ok(s) => {
            report.stationarity_residual = Some(s.residual);
            report.stationarity_threshold = Some(s.threshold);
        }
        Err(Error::FermatResidual { residual, .. }) => {
            report.stationarity_residual = Some(residual);
            report.stationarity_threshold = Some(FERMAT_TOL);
        }
        Err(e) => return Err(e),
    }
    report.recompute_pass();
    Ok((report, gap))
}

/// `x,y,f` rows over a square grid around the candidate, for plotting
/// one-dimensional problems.
pub fn surface_csv(p: &MinimaxProblem, c: &SaddleCandidate, radius: f64, points: usize) -> Result<String> {
    if p.dim() != 1 {
        return Err(Error::Precondition("surface data is only produced for n = 1".into()));
    }
    if points < 2 {
        return Err(Error::InvalidInput("need at least two points per axis".into()));
    }
    let step = 2.0 * radius / (points - 1) as f64;
    let mut out = String::from("x,y,f\n");
    for i in 0..points {
        let x = c.xbar[0] - radius + i as f64 * step;
        for j in 0..points {
            let y = p.set.project(&[c.ybar[0] - radius + j as f64 * step])?[0];
            out.push_str(&format!("{x:.17e},{y:.17e},{:.17e}\n", p.f(&[x], &[y])));
        }
    }
    Ok(out)
}

/// Convenience constructor for the one-dimensional built-in example on `Y = ℝ`.
pub fn example1_problem() -> MinimaxProblem {
    MinimaxProblem::new(
        Arc::new(function::CatalogFunction::example1()),
        Some(2.0),
        ConvexSet::whole_space(1).expect("dimension 1"),
        None,
    )
    .expect("example1 problem is valid")
}
