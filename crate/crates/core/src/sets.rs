//! Closed convex sets, metric projection and normal-cone certificates.
//!
//! Only closed sets are representable. The projection onto an intersection
//! is computed with Dykstra's algorithm, which converges to the metric
//! projection (plain alternating projections only reach some point of the
//! intersection).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{self, Bounds};

/// Membership tolerance shared by all set kinds.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Dykstra stops once a full sweep moves the iterate by at most this much.
pub const DYKSTRA_STOP: f64 = 1e-10;
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;
/// Sweeps without any decrease of the feasibility residual before the
/// intersection is declared empty.
pub const DYKSTRA_STALL_SWEEPS: usize = 1_000;

/// Wire format of a set. Halfspaces are `{y : ⟨a, y⟩ ≤ b}`, affine sets
/// are `{y : A y = c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    WholeSpace { dim: usize },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspace { a: Vec<f64>, b: f64 },
    Affine { a: Vec<Vec<f64>>, c: Vec<f64> },
    Intersection { sets: Vec<SetSpec> },
}

#[derive(Debug, Clone)]
enum Shape {
    WholeSpace,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspace { a: Vec<f64>, b: f64, a_norm_sq: f64 },
    Affine { a: DMatrix<f64>, c: DVector<f64>, pinv: DMatrix<f64> },
    Intersection(Vec<ConvexSet>),
}

/// A nonempty closed convex subset of ℝⁿ. Immutable once built.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SetSpec", into = "SetSpec")]
pub struct ConvexSet {
    dim: usize,
    shape: Shape,
}

impl TryFrom<SetSpec> for ConvexSet {
    type Error = Error;

    fn try_from(spec: SetSpec) -> Result<Self> {
        ConvexSet::from_spec(&spec)
    }
}

impl From<ConvexSet> for SetSpec {
    fn from(set: ConvexSet) -> Self {
        set.to_spec()
    }
}

fn finite(v: &[f64], what: &str) -> Result<()> {
    if vector::all_finite(v) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what}: non-finite entries")))
    }
}

impl ConvexSet {
    pub fn whole_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("set dimension must be positive".into()));
        }
        Ok(Self { dim, shape: Shape::WholeSpace })
    }

    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidInput("box: dimension must be positive".into()));
        }
        vector::check_dim(lo.len(), &hi)?;
        if lo.iter().chain(&hi).any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("box: NaN bound".into()));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::EmptySet(format!(
                "box has lo[{i}] = {} > hi[{i}] = {}",
                lo[i], hi[i]
            )));
        }
        Ok(Self { dim: lo.len(), shape: Shape::Box { lo, hi } })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidInput("ball: dimension must be positive".into()));
        }
        finite(&center, "ball center")?;
        if radius.is_nan() || radius < 0.0 {
            return Err(Error::EmptySet(format!("ball with radius {radius}")));
        }
        if !radius.is_finite() {
            return Err(Error::InvalidInput("ball: infinite radius".into()));
        }
        Ok(Self { dim: center.len(), shape: Shape::Ball { center, radius } })
    }

    pub fn halfspace(a: Vec<f64>, b: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("halfspace: dimension must be positive".into()));
        }
        finite(&a, "halfspace normal")?;
        if !b.is_finite() {
            return Err(Error::InvalidInput("halfspace: non-finite offset".into()));
        }
        let a_norm_sq = vector::norm_sq(&a);
        if a_norm_sq == 0.0 {
            return Err(Error::InvalidInput("halfspace: zero normal vector".into()));
        }
        Ok(Self { dim: a.len(), shape: Shape::Halfspace { a, b, a_norm_sq } })
    }

    pub fn affine(rows: Vec<Vec<f64>>, c: Vec<f64>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidInput("affine: no equations".into()));
        }
        let n = rows[0].len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("affine: ragged or empty matrix".into()));
        }
        vector::check_dim(m, &c)?;
        for r in &rows {
            finite(r, "affine matrix")?;
        }
        finite(&c, "affine right-hand side")?;
        let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        let cv = DVector::from_column_slice(&c);
        let pinv = a
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidInput(format!("affine: {e}")))?;
        let set = Self { dim: n, shape: Shape::Affine { a, c: cv, pinv } };
        // Inconsistent systems have no solution; the least-squares point misses.
        let p = set.project(&vec![0.0; n])?;
        if let Shape::Affine { a, c, .. } = &set.shape {
            let resid = (a * DVector::from_column_slice(&p) - c).norm();
            if resid > 1e-8 * (1.0 + c.norm()) {
                return Err(Error::EmptySet(format!(
                    "affine system is inconsistent (residual {resid:e})"
                )));
            }
        }
        Ok(set)
    }

    /// Builds an intersection and checks it is nonempty by projecting the origin.
    pub fn intersection(sets: Vec<ConvexSet>) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidInput("intersection of zero sets".into()))?;
        let dim = first.dim;
        for s in &sets {
            if s.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim });
            }
        }
        let set = Self { dim, shape: Shape::Intersection(sets) };
        match set.project(&vec![0.0; dim]) {
            Ok(_) => Ok(set),
            Err(Error::Infeasible { residual, sweeps }) => Err(Error::EmptySet(format!(
                "intersection appears empty (residual {residual:e} after {sweeps} sweeps)"
            ))),
            Err(e) => Err(e),
        }
    }

    pub fn from_spec(spec: &SetSpec) -> Result<Self> {
        match spec {
            SetSpec::WholeSpace { dim } => Self::whole_space(*dim),
            SetSpec::Box { lo, hi } => Self::new_box(lo.clone(), hi.clone()),
            SetSpec::Ball { center, radius } => Self::ball(center.clone(), *radius),
            SetSpec::Halfspace { a, b } => Self::halfspace(a.clone(), *b),
            SetSpec::Affine { a, c } => Self::affine(a.clone(), c.clone()),
            SetSpec::Intersection { sets } => {
                let parts = sets.iter().map(Self::from_spec).collect::<Result<Vec<_>>>()?;
                Self::intersection(parts)
            }
        }
    }

    pub fn to_spec(&self) -> SetSpec {
        match &self.shape {
            Shape::WholeSpace => SetSpec::WholeSpace { dim: self.dim },
            Shape::Box { lo, hi } => SetSpec::Box { lo: lo.clone(), hi: hi.clone() },
            Shape::Ball { center, radius } => {
                SetSpec::Ball { center: center.clone(), radius: *radius }
            }
            Shape::Halfspace { a, b, .. } => SetSpec::Halfspace { a: a.clone(), b: *b },
            Shape::Affine { a, c, .. } => SetSpec::Affine {
                a: a.row_iter().map(|r| r.iter().copied().collect()).collect(),
                c: c.iter().copied().collect(),
            },
            Shape::Intersection(parts) => {
                SetSpec::Intersection { sets: parts.iter().map(|p| p.to_spec()).collect() }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self.shape, Shape::WholeSpace)
    }

    /// Metric projection: the unique nearest point of the set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        vector::check_dim(self.dim, z)?;
        Ok(match &self.shape {
            Shape::WholeSpace => z.to_vec(),
            Shape::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect(),
            Shape::Ball { center, radius } => {
                let d = vector::sub(z, center);
                let r = vector::norm(&d);
                if r <= *radius {
                    z.to_vec()
                } else {
                    vector::axpy(center, radius / r, &d)
                }
            }
            Shape::Halfspace { a, b, a_norm_sq } => {
                let s = vector::dot(a, z) - b;
                if s <= 0.0 {
                    z.to_vec()
                } else {
                    vector::axpy(z, -s / a_norm_sq, a)
                }
            }
            Shape::Affine { a, c, pinv } => {
                let zv = DVector::from_column_slice(z);
                let p = &zv - pinv * (a * &zv - c);
                p.iter().copied().collect()
            }
            Shape::Intersection(parts) => return dykstra(parts, z),
        })
    }

    /// Euclidean distance from `y` to the set.
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        Ok(vector::distance(y, &self.project(y)?))
    }

    /// Membership up to [`MEMBERSHIP_TOL`].
    pub fn contains(&self, y: &[f64]) -> bool {
        self.contains_within(y, MEMBERSHIP_TOL)
    }

    pub fn contains_within(&self, y: &[f64], tol: f64) -> bool {
        if y.len() != self.dim {
            return false;
        }
        match &self.shape {
            Shape::Intersection(parts) => parts.iter().all(|p| p.contains_within(y, tol)),
            _ => self.distance(y).is_ok_and(|d| d <= tol),
        }
    }

    /// Minimum-norm element, the projection of the origin.
    pub fn min_norm_point(&self) -> Result<Vec<f64>> {
        self.project(&vec![0.0; self.dim])
    }
}

/// Dykstra's alternating projection onto `∩ parts`.
fn dykstra(parts: &[ConvexSet], z: &[f64]) -> Result<Vec<f64>> {
    let m = parts.len();
    let mut x = z.to_vec();
    let mut increments = vec![vec![0.0; z.len()]; m];
    let mut best_residual = f64::INFINITY;
    let mut stalled = 0;
    let mut residual = f64::INFINITY;

    for sweep in 1..=DYKSTRA_MAX_SWEEPS {
        let prev = x.clone();
        for (set, p) in parts.iter().zip(increments.iter_mut()) {
            let shifted = vector::add(&x, p);
            let y = set.project(&shifted)?;
            *p = vector::sub(&shifted, &y);
            x = y;
        }
        let movement = vector::distance(&x, &prev);
        residual = 0.0;
        for set in parts {
            residual = f64::max(residual, set.distance(&x)?);
        }
        if movement <= DYKSTRA_STOP && residual <= DYKSTRA_STOP {
            return Ok(x);
        }
        if residual < best_residual {
            best_residual = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= DYKSTRA_STALL_SWEEPS && residual > MEMBERSHIP_TOL {
                return Err(Error::Infeasible { residual, sweeps: sweep });
            }
        }
    }
    if residual <= MEMBERSHIP_TOL {
        Ok(x)
    } else {
        Err(Error::Infeasible { residual, sweeps: DYKSTRA_MAX_SWEEPS })
    }
}

/// Outcome of testing `v ∈ N_Y(ȳ)`, i.e. `⟨v, y − ȳ⟩ ≤ 0` for all `y ∈ Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalConeResidual {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    /// `max ⟨v, y − ȳ⟩` over the sampled `y ∈ Y`; never negative since `ȳ` is sampled.
    pub worst_violation: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Samples points of `Y` (projections of random points of a box around
/// `ybar`, plus the ray `ybar + s v` and the box corners) and reports the
/// worst value of `⟨v, y − ȳ⟩`. Passes iff it is at most `1e-6 (1 + ‖v‖)`.
pub fn certify_normal_cone(
    set: &ConvexSet,
    ybar: &[f64],
    v: &[f64],
    samples: usize,
    seed: u64,
) -> Result<NormalConeResidual> {
    let radius = 2.0 * (1.0 + vector::norm(ybar));
    certify_normal_cone_within(set, ybar, v, samples, seed, radius)
}

/// [`certify_normal_cone`] with an explicit sampling radius.
pub fn certify_normal_cone_within(
    set: &ConvexSet,
    ybar: &[f64],
    v: &[f64],
    samples: usize,
    seed: u64,
    radius: f64,
) -> Result<NormalConeResidual> {
    vector::check_dim(set.dim(), ybar)?;
    vector::check_dim(set.dim(), v)?;
    let gap = set.distance(ybar)?;
    if gap > 1e-8 {
        return Err(Error::Precondition(format!(
            "point lies at distance {gap:e} outside the set"
        )));
    }
    let bounds = Bounds::centered(ybar, radius);
    let mut candidates: Vec<Vec<f64>> = vec![ybar.to_vec()];
    let vn = vector::norm(v);
    if vn > 0.0 {
        for s in [1e-3, 1e-2, 0.1, 1.0, 0.5 * radius, radius] {
            candidates.push(vector::axpy(ybar, s / vn, v));
        }
    }
    candidates.extend(bounds.corners());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.extend((0..samples).map(|_| bounds.sample(&mut rng)));

    let mut worst = 0.0f64;
    for c in &candidates {
        let y = set.project(c)?;
        worst = worst.max(vector::dot(v, &vector::sub(&y, ybar)));
    }
    let threshold = 1e-6 * (1.0 + vn);
    Ok(NormalConeResidual {
        point: ybar.to_vec(),
        direction: v.to_vec(),
        worst_violation: worst,
        threshold,
        pass: worst <= threshold,
    })
}
