//! Shared geometric substrate: labelled point configurations, piecewise
//! closed-form trajectories, and the tolerance policy used by every planner.
//!
//! A [`Configuration`] is an ordered tuple of pairwise-distinct points in
//! `R^d` (`d >= 2`). A [`Trajectory`] is a continuous path of configurations
//! over `t in [0, 1]`, stored as closed-form pieces (linear moves, rotations,
//! arcs) rather than sampled polylines, so it can be evaluated exactly at any
//! parameter and checked as finely as a verifier likes.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from configuration construction and trajectory plumbing.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("a configuration needs at least one point")]
    Empty,
    #[error("ambient dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("trajectory endpoints must share point count and dimension")]
    IncompatibleEndpoints,
    #[error("trajectory parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("cannot concatenate an empty list of trajectory parts")]
    NothingToConcatenate,
    #[error("junction {index}: adjacent parts disagree by {gap:e} (tolerance {tol:e})")]
    JunctionMismatch { index: usize, gap: f64, tol: f64 },
}

/// Numeric thresholds shared by the planners and the verification harness.
///
/// Scale-dependent thresholds (`proj_eq_tol`, `sep_tol`) are meant to be
/// proportional to the diameter of the data they are applied to; use
/// [`Tolerances::for_diameter`] unless a caller has reason to pin absolute
/// values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Two projections onto a line count as equal below this gap.
    pub proj_eq_tol: f64,
    /// Unit directions `u`, `v` count as opposite when `|u + v|` falls below this.
    pub antipodal_tol: f64,
    /// Verification fails a trajectory whose pairwise separation dips below this.
    pub sep_tol: f64,
    /// Maximum mismatch allowed where consecutive trajectory parts meet.
    pub junction_tol: f64,
}

impl Tolerances {
    /// Projection equality is `1e-9 x` the working diameter.
    pub const PROJ_EQ_REL: f64 = 1e-9;
    /// The separation floor is `1e-6 x` the working diameter.
    pub const SEP_REL: f64 = 1e-6;
    /// Antipodality threshold on unit vectors (absolute).
    pub const ANTIPODAL_ABS: f64 = 1e-9;
    /// Junction mismatch threshold (absolute).
    pub const JUNCTION_ABS: f64 = 1e-9;

    /// Default thresholds for inputs of the given diameter. A zero diameter
    /// (single point) falls back to unit scale so thresholds stay positive.
    pub fn for_diameter(diameter: f64) -> Self {
        let scale = if diameter > 0.0 { diameter } else { 1.0 };
        Tolerances {
            proj_eq_tol: Self::PROJ_EQ_REL * scale,
            antipodal_tol: Self::ANTIPODAL_ABS,
            sep_tol: Self::SEP_REL * scale,
            junction_tol: Self::JUNCTION_ABS,
        }
    }
}

impl Default for Tolerances {
    /// Unit-scale defaults; equivalent to `for_diameter(1.0)`.
    fn default() -> Self {
        Self::for_diameter(1.0)
    }
}

/// Discrete label of the domain of continuity a planner assigned to an input
/// pair. Each planner documents its own range of attainable values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionIndex(pub usize);

impl fmt::Display for RegionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered tuple of pairwise-distinct labelled points in `R^d`, `d >= 2`.
///
/// Constructed values always satisfy the invariants (shared dimension, finite
/// coordinates, no exact coincidences). Values produced by evaluating a
/// trajectory mid-flight skip the distinctness re-check so that verifiers can
/// observe and fail colliding motions instead of panicking on them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationWire", into = "ConfigurationWire")]
pub struct Configuration {
    dim: usize,
    points: Vec<DVector<f64>>,
}

/// On-disk shape: `{"dim": d, "points": [[x, ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct ConfigurationWire {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl From<Configuration> for ConfigurationWire {
    fn from(c: Configuration) -> Self {
        ConfigurationWire {
            dim: c.dim,
            points: c.points.iter().map(|p| p.iter().copied().collect()).collect(),
        }
    }
}

impl TryFrom<ConfigurationWire> for Configuration {
    type Error = GeometryError;

    fn try_from(w: ConfigurationWire) -> Result<Self, GeometryError> {
        for (i, p) in w.points.iter().enumerate() {
            if p.len() != w.dim {
                return Err(GeometryError::DimensionMismatch {
                    index: i,
                    got: p.len(),
                    expected: w.dim,
                });
            }
        }
        Configuration::new(w.points.into_iter().map(DVector::from_vec).collect())
    }
}

impl Configuration {
    /// Validating constructor.
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self, GeometryError> {
        let dim = points.first().ok_or(GeometryError::Empty)?.len();
        if dim < 2 {
            return Err(GeometryError::DimensionTooSmall(dim));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    index: i,
                    got: p.len(),
                    expected: dim,
                });
            }
            if !p.iter().all(|x| x.is_finite()) {
                return Err(GeometryError::NonFinite(i));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(GeometryError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(Configuration { dim, points })
    }

    /// Convenience constructor from coordinate rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GeometryError> {
        Self::new(
            rows.iter()
                .map(|r| DVector::from_column_slice(r.as_ref()))
                .collect(),
        )
    }

    /// Internal constructor that skips the distinctness check; used when
    /// evaluating trajectories, where momentary coincidences must be
    /// observable rather than fatal.
    pub(crate) fn unchecked(dim: usize, points: Vec<DVector<f64>>) -> Self {
        Configuration { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        &self.points[i]
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    /// Smallest pairwise distance; positive infinity for fewer than 2 points.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.min((&self.points[i] - &self.points[j]).norm());
            }
        }
        best
    }

    /// Largest pairwise distance; zero for a single point.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.max((&self.points[i] - &self.points[j]).norm());
            }
        }
        best
    }

    /// Diameter of the union of this configuration's points and `other`'s.
    pub fn pair_diameter(&self, other: &Self) -> f64 {
        let mut best = self.diameter().max(other.diameter());
        for p in &self.points {
            for q in &other.points {
                best = best.max((p - q).norm());
            }
        }
        best
    }

    /// Sup metric between equally-shaped configurations: the largest
    /// per-point Euclidean distance. Infinite when shapes differ, so
    /// tolerance checks against it fail loudly instead of panicking.
    pub fn max_point_distance(&self, other: &Self) -> f64 {
        if self.dim != other.dim || self.points.len() != other.points.len() {
            return f64::INFINITY;
        }
        self.points
            .iter()
            .zip(&other.points)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max)
    }

    /// Per-point linear interpolation (`s = 0` gives `self` exactly).
    pub(crate) fn lerp(&self, other: &Self, s: f64) -> Configuration {
        let points = self
            .points
            .iter()
            .zip(&other.points)
            .map(|(p, q)| p * (1.0 - s) + q * s)
            .collect();
        Configuration::unchecked(self.dim, points)
    }
}

/// Unit vector along coordinate axis `k` in the given dimension.
pub(crate) fn basis_vector(dim: usize, k: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[k] = 1.0;
    v
}

type AnalyticMap = Arc<dyn Fn(f64) -> Configuration + Send + Sync>;

/// One closed-form segment of a trajectory, parameterized by local `s in [0, 1]`.
#[derive(Clone)]
pub enum Piece {
    /// Every point moves along a straight segment at constant speed.
    Linear {
        from: Configuration,
        to: Configuration,
    },
    /// Arbitrary closed-form motion. Endpoints are cached so boundary
    /// evaluation is exact; `rigid` marks distance-preserving motions
    /// (rotations, translations), which verification may treat specially.
    Analytic {
        from: Configuration,
        to: Configuration,
        map: AnalyticMap,
        rigid: bool,
    },
}

impl Piece {
    pub fn linear(from: Configuration, to: Configuration) -> Result<Self, GeometryError> {
        if from.dim() != to.dim() || from.n_points() != to.n_points() {
            return Err(GeometryError::IncompatibleEndpoints);
        }
        Ok(Piece::Linear { from, to })
    }

    /// Wrap a closed-form map; endpoints are taken from `map(0)` and `map(1)`.
    pub fn analytic<F>(map: F, rigid: bool) -> Self
    where
        F: Fn(f64) -> Configuration + Send + Sync + 'static,
    {
        let from = map(0.0);
        let to = map(1.0);
        Piece::Analytic {
            from,
            to,
            map: Arc::new(map),
            rigid,
        }
    }

    /// Wrap a closed-form map with explicitly pinned endpoints (used when the
    /// exact endpoints are known analytically and should not inherit the
    /// rounding of `map(0)` / `map(1)`).
    pub fn analytic_with_endpoints<F>(
        from: Configuration,
        to: Configuration,
        map: F,
        rigid: bool,
    ) -> Self
    where
        F: Fn(f64) -> Configuration + Send + Sync + 'static,
    {
        Piece::Analytic {
            from,
            to,
            map: Arc::new(map),
            rigid,
        }
    }

    pub fn start(&self) -> &Configuration {
        match self {
            Piece::Linear { from, .. } | Piece::Analytic { from, .. } => from,
        }
    }

    pub fn end(&self) -> &Configuration {
        match self {
            Piece::Linear { to, .. } | Piece::Analytic { to, .. } => to,
        }
    }

    /// Evaluate at local parameter `s`; `s <= 0` and `s >= 1` return the cached
    /// endpoints exactly.
    pub fn at(&self, s: f64) -> Configuration {
        if s <= 0.0 {
            return self.start().clone();
        }
        if s >= 1.0 {
            return self.end().clone();
        }
        match self {
            Piece::Linear { from, to } => from.lerp(to, s),
            Piece::Analytic { map, .. } => map(s),
        }
    }

    /// The same motion run backwards in time.
    pub fn reversed(&self) -> Piece {
        match self {
            Piece::Linear { from, to } => Piece::Linear {
                from: to.clone(),
                to: from.clone(),
            },
            Piece::Analytic {
                from,
                to,
                map,
                rigid,
            } => {
                let inner = map.clone();
                Piece::Analytic {
                    from: to.clone(),
                    to: from.clone(),
                    map: Arc::new(move |s| inner(1.0 - s)),
                    rigid: *rigid,
                }
            }
        }
    }

    /// Endpoints of a per-point linear piece, if this is one.
    pub fn as_linear(&self) -> Option<(&Configuration, &Configuration)> {
        match self {
            Piece::Linear { from, to } => Some((from, to)),
            Piece::Analytic { .. } => None,
        }
    }

    pub fn is_rigid(&self) -> bool {
        match self {
            Piece::Linear { .. } => false,
            Piece::Analytic { rigid, .. } => *rigid,
        }
    }
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Linear { from, to } => f
                .debug_struct("Linear")
                .field("from", from)
                .field("to", to)
                .finish(),
            Piece::Analytic {
                from, to, rigid, ..
            } => f
                .debug_struct("Analytic")
                .field("from", from)
                .field("to", to)
                .field("rigid", rigid)
                .finish(),
        }
    }
}

/// A continuous path of configurations over `t in [0, 1]`.
///
/// Invariants: at least one piece; breakpoints strictly increase from 0 to 1;
/// adjacent pieces agree at their shared breakpoint (enforced up to the
/// junction tolerance at concatenation time, exact for planner output);
/// `evaluate(0)` and `evaluate(1)` return the stored endpoints exactly.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pieces: Vec<Piece>,
    /// `pieces[i]` covers `[breaks[i], breaks[i + 1]]`.
    breaks: Vec<f64>,
}

impl Trajectory {
    /// The constant path sitting at `c`.
    pub fn constant(c: Configuration) -> Self {
        Self::from_piece(Piece::Linear {
            from: c.clone(),
            to: c,
        })
    }

    /// Straight-line interpolation between two equally-shaped configurations.
    pub fn linear(from: Configuration, to: Configuration) -> Result<Self, GeometryError> {
        Ok(Self::from_piece(Piece::linear(from, to)?))
    }

    pub fn from_piece(piece: Piece) -> Self {
        Trajectory {
            pieces: vec![piece],
            breaks: vec![0.0, 1.0],
        }
    }

    /// Join parts end-to-start into a single path over `[0, 1]`, giving each
    /// part an equal share of time (pieces within a part keep their relative
    /// spans). Consecutive parts must agree within `junction_tol` in the sup
    /// metric; the offending junction index is reported otherwise.
    pub fn concatenate(parts: &[Trajectory], junction_tol: f64) -> Result<Trajectory, GeometryError> {
        if parts.is_empty() {
            return Err(GeometryError::NothingToConcatenate);
        }
        for (i, pair) in parts.windows(2).enumerate() {
            let gap = pair[0].end().max_point_distance(pair[1].start());
            // negated so that a NaN gap also fails the junction check
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(gap <= junction_tol) {
                return Err(GeometryError::JunctionMismatch {
                    index: i,
                    gap,
                    tol: junction_tol,
                });
            }
        }
        let k = parts.len() as f64;
        let mut pieces = Vec::new();
        let mut breaks = vec![0.0];
        for (j, part) in parts.iter().enumerate() {
            pieces.extend(part.pieces.iter().cloned());
            breaks.extend(part.breaks[1..].iter().map(|b| (j as f64 + b) / k));
        }
        *breaks.last_mut().expect("nonempty") = 1.0;
        Ok(Trajectory { pieces, breaks })
    }

    /// Evaluate the path at global time `t in [0, 1]`.
    ///
    /// The result of a mid-flight evaluation is not re-validated for point
    /// distinctness: a colliding trajectory evaluates to a momentarily
    /// coincident configuration, which is exactly what verification needs to
    /// observe to fail it.
    pub fn evaluate(&self, t: f64) -> Result<Configuration, GeometryError> {
        if t.is_nan() || !(0.0..=1.0).contains(&t) {
            return Err(GeometryError::ParameterOutOfRange(t));
        }
        let i = self
            .breaks
            .partition_point(|&b| b <= t)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        let (t0, t1) = (self.breaks[i], self.breaks[i + 1]);
        Ok(self.pieces[i].at((t - t0) / (t1 - t0)))
    }

    pub fn start(&self) -> &Configuration {
        self.pieces.first().expect("nonempty").start()
    }

    pub fn end(&self) -> &Configuration {
        self.pieces.last().expect("nonempty").end()
    }

    /// The same path run backwards in time.
    pub fn reverse(&self) -> Trajectory {
        Trajectory {
            pieces: self.pieces.iter().rev().map(Piece::reversed).collect(),
            breaks: self.breaks.iter().rev().map(|b| 1.0 - b).collect(),
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Global time span `[t0, t1]` covered by piece `i`.
    pub fn piece_span(&self, i: usize) -> (f64, f64) {
        (self.breaks[i], self.breaks[i + 1])
    }
}

/// Render `samples` uniform evaluations as CSV with header
/// `t,p0_x0,p0_x1,...`: one row per sample, one column block per point.
pub fn trajectory_csv(traj: &Trajectory, samples: usize) -> Result<String, GeometryError> {
    let samples = samples.max(2);
    let (n, d) = (traj.start().n_points(), traj.start().dim());
    let mut out = String::from("t");
    for i in 0..n {
        for x in 0..d {
            out.push_str(&format!(",p{i}_x{x}"));
        }
    }
    out.push('\n');
    for row in 0..samples {
        let t = row as f64 / (samples - 1) as f64;
        let c = traj.evaluate(t)?;
        out.push_str(&format!("{t}"));
        for p in c.points() {
            for x in p.iter() {
                out.push_str(&format!(",{x}"));
            }
        }
        out.push('\n');
    }
    Ok(out)
}
