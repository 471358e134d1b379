//! Motion planner for labelled point tuples in `R^d`, `d >= 2`, organized
//! around a fixed coordinate axis.
//!
//! Both input configurations are continuously deformed onto the first
//! coordinate axis (after a shear that makes their axis projections pairwise
//! distinct), reordered there by a lift-move-drop shuffle in the plane of the
//! first two axes, and the goal-side deformation is run backwards. The
//! planner is a section of the path fibration: the trajectory starts and ends
//! exactly at the inputs.
//!
//! Inputs are classified by `cp`, the number of distinct axis projections.
//! The pair label `k = cp(A) + cp(B)` ranges over `{2, ..., 2n}`, and the
//! planning rule is continuous on each label class, so the planner partitions
//! its domain into `2n - 1` domains of continuity. That count is optimal for
//! odd `d`; for even `d` the planner is still valid but [`crate::euclid_even`]
//! achieves one domain fewer.

use nalgebra::DVector;
use thiserror::Error;

use crate::geometry::{basis_vector, Configuration, GeometryError, RegionIndex, Tolerances, Trajectory};

/// Errors shared by the Euclidean planners.
#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("planner expects {expected} points of dimension {expected_dim}, got {got} of dimension {got_dim}")]
    ShapeMismatch {
        expected: usize,
        expected_dim: usize,
        got: usize,
        got_dim: usize,
    },
    #[error("planner needs at least 2 points per configuration, got {0}")]
    TooFewPoints(usize),
    #[error("ambient dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("this planner requires even ambient dimension, got {0}")]
    OddDimension(usize),
    #[error("axis projections are not pairwise distinct")]
    ProjectionsNotDistinct,
    #[error("configuration lies off the reference line by {0:e}")]
    NotOnLine(f64),
    #[error("configurations do not lie on a common line (residual {0:e})")]
    NotOnCommonLine(f64),
    #[error("configuration is not collinear (off-line residual {0:e})")]
    NotCollinear(f64),
    #[error("configuration axis differs from the target direction by {0:e}")]
    DirectionMismatch(f64),
    #[error("cannot rotate between exactly opposite directions")]
    OppositeDirections,
    #[error("lift direction is not orthogonal to the line (residual {0:e})")]
    LiftNotOrthogonal(f64),
}

/// Planner for `n` labelled points in `R^d` built around the first
/// coordinate axis. Pure value: no interior mutability, cheap to clone.
#[derive(Clone, Debug)]
pub struct EuclidPlanner {
    dim: usize,
    n: usize,
    tolerances: Option<Tolerances>,
}

impl EuclidPlanner {
    /// A planner for `n >= 2` points in dimension `dim >= 2`. Thresholds
    /// default to scaling with each input's diameter; see
    /// [`with_tolerances`](Self::with_tolerances) to pin absolute values.
    pub fn new(dim: usize, n: usize) -> Result<Self, PlanError> {
        if dim < 2 {
            return Err(PlanError::DimensionTooSmall(dim));
        }
        if n < 2 {
            return Err(PlanError::TooFewPoints(n));
        }
        Ok(EuclidPlanner {
            dim,
            n,
            tolerances: None,
        })
    }

    /// Replace the scale-derived default thresholds with fixed ones.
    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = Some(tolerances);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Attainable pair labels: `cp` of each side ranges over `{1, ..., n}`.
    pub fn region_range(&self) -> std::ops::RangeInclusive<usize> {
        2..=2 * self.n
    }

    /// Thresholds used for an operation whose inputs have the given diameter.
    fn tols(&self, diameter: f64) -> Tolerances {
        self.tolerances
            .unwrap_or_else(|| Tolerances::for_diameter(diameter))
    }

    fn check_shape(&self, c: &Configuration) -> Result<(), PlanError> {
        if c.dim() != self.dim || c.n_points() != self.n {
            return Err(PlanError::ShapeMismatch {
                expected: self.n,
                expected_dim: self.dim,
                got: c.n_points(),
                got_dim: c.dim(),
            });
        }
        Ok(())
    }

    /// First-axis projections of the points, in label order.
    fn projections(c: &Configuration) -> Vec<f64> {
        c.points().iter().map(|p| p[0]).collect()
    }

    /// Number of distinct axis projections, counting values closer than the
    /// projection-equality threshold as equal.
    pub fn cp(&self, c: &Configuration) -> Result<usize, PlanError> {
        self.check_shape(c)?;
        let tol = self.tols(c.diameter()).proj_eq_tol;
        let mut xs = Self::projections(c);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(1 + xs.windows(2).filter(|w| w[1] - w[0] >= tol).count())
    }

    /// Shear scale for desingularization: `1/n` times the smallest nonzero
    /// projection gap, or exactly 1 when all projections coincide (`cp = 1`).
    pub fn epsilon(&self, c: &Configuration) -> Result<f64, PlanError> {
        self.check_shape(c)?;
        let tol = self.tols(c.diameter()).proj_eq_tol;
        let xs = Self::projections(c);
        let mut min_gap = f64::INFINITY;
        for i in 0..xs.len() {
            for j in (i + 1)..xs.len() {
                let gap = (xs[i] - xs[j]).abs();
                if gap >= tol {
                    min_gap = min_gap.min(gap);
                }
            }
        }
        if min_gap.is_finite() {
            Ok(min_gap / self.n as f64)
        } else {
            Ok(1.0)
        }
    }

    /// Shear the configuration along the axis so projections become pairwise
    /// distinct: point `i` (0-based) translates by `t * i * epsilon(C)` along
    /// the axis. The endpoint always has `cp = n`.
    pub fn desingularize(&self, c: &Configuration) -> Result<Trajectory, PlanError> {
        let eps = self.epsilon(c)?;
        let e = basis_vector(self.dim, 0);
        let target = Configuration::unchecked(
            self.dim,
            c.points()
                .iter()
                .enumerate()
                .map(|(i, p)| p + &e * (i as f64 * eps))
                .collect(),
        );
        debug_assert_eq!(self.cp(&target)?, self.n);
        Ok(Trajectory::linear(c.clone(), target)?)
    }

    /// Collapse the off-axis components: each point moves straight to its
    /// axis projection. Requires pairwise-distinct projections (`cp = n`);
    /// the axis gaps are constant along the way, so no collisions occur.
    pub fn drop_to_line(&self, c: &Configuration) -> Result<Trajectory, PlanError> {
        if self.cp(c)? != self.n {
            return Err(PlanError::ProjectionsNotDistinct);
        }
        let target = Configuration::unchecked(
            self.dim,
            c.points()
                .iter()
                .map(|p| {
                    let mut q = DVector::zeros(self.dim);
                    q[0] = p[0];
                    q
                })
                .collect(),
        );
        Ok(Trajectory::linear(c.clone(), target)?)
    }

    /// Reorder points along the axis in three straight phases: lift each
    /// point to its own height in the second-axis direction (height
    /// proportional to its axis rank in `c`), translate to the goal
    /// projections at constant height, then drop. The clearance unit is
    /// `max(1, diameter(C union C')) / n`, so distinct ranks never collide.
    pub fn line_shuffle(
        &self,
        c: &Configuration,
        c_goal: &Configuration,
    ) -> Result<Trajectory, PlanError> {
        self.check_shape(c)?;
        self.check_shape(c_goal)?;
        let tols = self.tols(c.pair_diameter(c_goal));
        for cfg in [c, c_goal] {
            let off = cfg
                .points()
                .iter()
                .map(|p| p.rows(1, self.dim - 1).norm())
                .fold(0.0, f64::max);
            if off > tols.proj_eq_tol {
                return Err(PlanError::NotOnLine(off));
            }
        }
        let g = c.pair_diameter(c_goal).max(1.0) / self.n as f64;
        let heights = axis_ranks(&Self::projections(c))
            .into_iter()
            .map(|r| r as f64 * g)
            .collect::<Vec<_>>();
        let f = basis_vector(self.dim, 1);
        let lifted = |base: &Configuration| {
            Configuration::unchecked(
                self.dim,
                base.points()
                    .iter()
                    .zip(&heights)
                    .map(|(p, h)| p + &f * *h)
                    .collect(),
            )
        };
        let (c_up, goal_up) = (lifted(c), lifted(c_goal));
        let parts = [
            Trajectory::linear(c.clone(), c_up.clone())?,
            Trajectory::linear(c_up, goal_up.clone())?,
            Trajectory::linear(goal_up, c_goal.clone())?,
        ];
        Ok(Trajectory::concatenate(&parts, tols.junction_tol)?)
    }

    /// Pair label `k = cp(A) + cp(B)`, in `{2, ..., 2n}`.
    pub fn region_index(
        &self,
        a: &Configuration,
        b: &Configuration,
    ) -> Result<RegionIndex, PlanError> {
        Ok(RegionIndex(self.cp(a)? + self.cp(b)?))
    }

    /// Full planning rule: desingularize and drop both sides onto the axis,
    /// shuffle along it, and run the goal-side funnel backwards. Returns the
    /// trajectory (exact endpoints `A`, `B`) and the pair label.
    pub fn plan(
        &self,
        a: &Configuration,
        b: &Configuration,
    ) -> Result<(Trajectory, RegionIndex), PlanError> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        let region = self.region_index(a, b)?;
        let junction_tol = self.tols(a.pair_diameter(b)).junction_tol;
        let a_shear = self.desingularize(a)?;
        let a_drop = self.drop_to_line(a_shear.end())?;
        let b_shear = self.desingularize(b)?;
        let b_drop = self.drop_to_line(b_shear.end())?;
        let shuffle = self.line_shuffle(a_drop.end(), b_drop.end())?;
        let parts = [
            a_shear,
            a_drop,
            shuffle,
            b_drop.reverse(),
            b_shear.reverse(),
        ];
        Ok((Trajectory::concatenate(&parts, junction_tol)?, region))
    }
}

/// 1-based ranks of the values in ascending order (values assumed distinct).
fn axis_ranks(xs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap());
    let mut ranks = vec![0; xs.len()];
    for (rank, &i) in order.iter().enumerate() {
        ranks[i] = rank + 1;
    }
    ranks
}

/// Test/verification witness: `n` points in dimension `dim` with exactly
/// `want_cp` distinct axis projections (unit gaps, far above any threshold).
pub fn config_with_cp(dim: usize, n: usize, want_cp: usize) -> Configuration {
    assert!((1..=n).contains(&want_cp), "cp must be in 1..=n");
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut row = vec![0.0; dim];
            row[0] = j.min(want_cp - 1) as f64;
            row[1] = j as f64;
            row
        })
        .collect();
    Configuration::from_rows(&rows).expect("witness is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rows: &[&[f64]]) -> Configuration {
        Configuration::from_rows(rows).unwrap()
    }

    #[test]
    fn constructor_validates() {
        assert!(matches!(
            EuclidPlanner::new(1, 2),
            Err(PlanError::DimensionTooSmall(1))
        ));
        assert!(matches!(
            EuclidPlanner::new(2, 1),
            Err(PlanError::TooFewPoints(1))
        ));
        assert!(EuclidPlanner::new(2, 2).is_ok());
    }

    #[test]
    fn cp_counts_distinct_projections() {
        let p2 = EuclidPlanner::new(2, 2).unwrap();
        assert_eq!(p2.cp(&cfg(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap(), 1);

        let p3 = EuclidPlanner::new(2, 3).unwrap();
        assert_eq!(
            p3.cp(&cfg(&[&[0.0, 0.0], &[1.0, 7.0], &[2.0, -5.0]])).unwrap(),
            3
        );
        assert_eq!(
            p3.cp(&cfg(&[&[0.0, 0.0], &[0.0, 1.0], &[5.0, 0.0]])).unwrap(),
            2
        );
    }

    #[test]
    fn epsilon_is_scaled_min_gap() {
        let p2 = EuclidPlanner::new(2, 2).unwrap();
        assert_eq!(p2.epsilon(&cfg(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap(), 1.0);
        assert_eq!(p2.epsilon(&cfg(&[&[0.0, 0.0], &[10.0, 0.5]])).unwrap(), 5.0);

        let p3 = EuclidPlanner::new(2, 3).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[1.0, 1.0], &[3.0, 0.0]]);
        assert!((p3.epsilon(&c).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn desingularize_separates_projections() {
        let p = EuclidPlanner::new(2, 2).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let traj = p.desingularize(&c).unwrap();
        assert_eq!(traj.evaluate(0.0).unwrap(), c);
        assert_eq!(traj.end(), &cfg(&[&[0.0, 0.0], &[1.0, 1.0]]));
        assert_eq!(p.cp(traj.end()).unwrap(), 2);
    }

    #[test]
    fn desingularize_keeps_distinct_projections_distinct() {
        let p = EuclidPlanner::new(3, 3).unwrap();
        let c = cfg(&[&[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[2.0, 0.0, 1.0]]);
        assert_eq!(p.cp(&c).unwrap(), 2);
        let traj = p.desingularize(&c).unwrap();
        assert_eq!(p.cp(traj.end()).unwrap(), 3);
        // interior samples stay collision-free
        for i in 1..50 {
            let sep = traj.evaluate(i as f64 / 50.0).unwrap().min_separation();
            assert!(sep > 0.0);
        }
    }

    #[test]
    fn drop_to_line_projects_and_requires_distinctness() {
        let p = EuclidPlanner::new(2, 2).unwrap();
        let traj = p.drop_to_line(&cfg(&[&[0.0, 1.0], &[3.0, -2.0]])).unwrap();
        assert_eq!(traj.end(), &cfg(&[&[0.0, 0.0], &[3.0, 0.0]]));
        // midpoint halves the off-axis component
        let mid = traj.evaluate(0.5).unwrap();
        assert_eq!(mid.point(0)[1], 0.5);
        assert_eq!(mid.point(1)[1], -1.0);

        assert!(matches!(
            p.drop_to_line(&cfg(&[&[0.0, 1.0], &[0.0, -2.0]])),
            Err(PlanError::ProjectionsNotDistinct)
        ));
    }

    #[test]
    fn drop_of_on_line_config_is_constant() {
        let p = EuclidPlanner::new(2, 2).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[3.0, 0.0]]);
        let traj = p.drop_to_line(&c).unwrap();
        for t in [0.0, 0.5, 1.0] {
            assert_eq!(traj.evaluate(t).unwrap(), c);
        }
    }

    #[test]
    fn line_shuffle_round_trip_and_swap() {
        let p = EuclidPlanner::new(2, 2).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let same = p.line_shuffle(&c, &c).unwrap();
        assert_eq!(same.start(), &c);
        assert_eq!(same.end(), &c);

        let swapped = cfg(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let traj = p.line_shuffle(&c, &swapped).unwrap();
        assert_eq!(traj.start(), &c);
        assert_eq!(traj.end(), &swapped);
        // clearance: diameter 1 -> g = 1/2; transit happens at distinct heights
        let mut min_sep = f64::INFINITY;
        for i in 0..=300 {
            min_sep = min_sep.min(traj.evaluate(i as f64 / 300.0).unwrap().min_separation());
        }
        assert!(min_sep >= 0.5 - 1e-12, "min separation {min_sep}");
    }

    #[test]
    fn line_shuffle_three_point_cycle() {
        let p = EuclidPlanner::new(3, 3).unwrap();
        let c = cfg(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0]]);
        let goal = cfg(&[&[2.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        let traj = p.line_shuffle(&c, &goal).unwrap();
        assert_eq!(traj.end(), &goal);
        for i in 0..=1000 {
            assert!(traj.evaluate(i as f64 / 1000.0).unwrap().min_separation() > 0.0);
        }
    }

    #[test]
    fn line_shuffle_rejects_off_line_input() {
        let p = EuclidPlanner::new(2, 2).unwrap();
        let off = cfg(&[&[0.0, 0.3], &[1.0, 0.0]]);
        let on = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(matches!(
            p.line_shuffle(&off, &on),
            Err(PlanError::NotOnLine(_))
        ));
    }

    #[test]
    fn region_index_is_cp_sum() {
        let p = EuclidPlanner::new(2, 2).unwrap();
        let stacked = cfg(&[&[0.0, 0.0], &[0.0, 1.0]]); // cp = 1
        let spread = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]); // cp = 2
        assert_eq!(p.region_index(&stacked, &stacked).unwrap(), RegionIndex(2));
        assert_eq!(p.region_index(&stacked, &spread).unwrap(), RegionIndex(3));
        assert_eq!(p.region_index(&spread, &spread).unwrap(), RegionIndex(4));
        assert_eq!(p.region_range(), 2..=4);
    }

    #[test]
    fn plan_has_exact_endpoints_and_no_collisions() {
        let p = EuclidPlanner::new(2, 2).unwrap();
        let a = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = cfg(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let (traj, k) = p.plan(&a, &b).unwrap();
        assert_eq!(k, RegionIndex(4));
        assert_eq!(traj.evaluate(0.0).unwrap(), a);
        assert_eq!(traj.evaluate(1.0).unwrap(), b);
        for i in 0..=1000 {
            assert!(traj.evaluate(i as f64 / 1000.0).unwrap().min_separation() > 0.0);
        }
    }

    #[test]
    fn plan_round_trip_on_stacked_configuration() {
        let p = EuclidPlanner::new(2, 3).unwrap();
        let a = cfg(&[&[0.0, 0.0], &[0.0, 1.0], &[0.0, 2.0]]); // cp = 1
        let (traj, k) = p.plan(&a, &a).unwrap();
        assert_eq!(k, RegionIndex(2));
        assert_eq!(traj.evaluate(0.0).unwrap(), a);
        assert_eq!(traj.evaluate(1.0).unwrap(), a);
        for i in 0..=500 {
            assert!(traj.evaluate(i as f64 / 500.0).unwrap().min_separation() > 0.0);
        }
    }

    #[test]
    fn witness_configurations_hit_every_cp() {
        for n in 2..=4 {
            let p = EuclidPlanner::new(3, n).unwrap();
            for i in 1..=n {
                assert_eq!(p.cp(&config_with_cp(3, n, i)).unwrap(), i);
            }
        }
    }
}
