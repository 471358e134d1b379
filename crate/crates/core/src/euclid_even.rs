//! Motion planner for labelled point tuples in even-dimensional `R^d` that
//! achieves one fewer domain of continuity than the fixed-axis planner.
//!
//! Instead of a fixed reference axis, each configuration carries its own
//! moving line: the line `L_C` through its first two points, with unit
//! direction `e_C` from the first point to the second. Even dimension admits
//! a continuous unit vector field `u -> perp_field(u)` orthogonal to `u`,
//! which supplies a lift direction for shuffling points along any such line
//! without ever making an arbitrary (discontinuous) choice.
//!
//! The plan: make each configuration collinear on its own line, rigidly
//! rotate the start line onto the goal line's direction (skipped when the
//! directions are opposite -- rotating would be discontinuous there), rigidly
//! translate onto the goal line, shuffle along it, and run the goal-side
//! flattening backwards. Pairs are classified [`PairClass::Aligned`] or
//! [`PairClass::Antipodal`], with labels `k = i + j` resp. `i + j - 1` built
//! from the per-side counts of distinct line projections; `k` ranges over
//! `{3, ..., 2n}`, giving `2n - 2` domains of continuity.

use nalgebra::DVector;

use crate::euclid::PlanError;
use crate::geometry::{Configuration, RegionIndex, Tolerances, Trajectory};

/// Discrete class of an input pair, carrying the per-side projection counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    /// The two line directions are not opposite; label `k = i + j`.
    Aligned { i: usize, j: usize },
    /// Directions opposite within tolerance; label `k = i + j - 1`.
    Antipodal { i: usize, j: usize },
}

impl PairClass {
    pub fn region(&self) -> RegionIndex {
        match *self {
            PairClass::Aligned { i, j } => RegionIndex(i + j),
            PairClass::Antipodal { i, j } => RegionIndex(i + j - 1),
        }
    }
}

/// Unit direction of a configuration's own line: from its first point toward
/// its second.
pub fn direction(c: &Configuration) -> Result<DVector<f64>, PlanError> {
    if c.n_points() < 2 {
        return Err(PlanError::TooFewPoints(c.n_points()));
    }
    let d = c.point(1) - c.point(0);
    let norm = d.norm();
    Ok(d / norm)
}

/// Continuous unit field orthogonal to its argument, defined for even
/// dimension by rotating coordinates a quarter turn in consecutive pairs:
/// `(u1, u2, ..., u_{d-1}, u_d) -> (-u2, u1, ..., -u_d, u_{d-1})`.
pub fn perp_field(u: &DVector<f64>) -> Result<DVector<f64>, PlanError> {
    let d = u.len();
    if !d.is_multiple_of(2) {
        return Err(PlanError::OddDimension(d));
    }
    let mut out = DVector::zeros(d);
    for k in 0..d / 2 {
        out[2 * k] = -u[2 * k + 1];
        out[2 * k + 1] = u[2 * k];
    }
    Ok(out)
}

/// Planner for `n` labelled points in even-dimensional `R^d`.
#[derive(Clone, Debug)]
pub struct EuclidEvenPlanner {
    dim: usize,
    n: usize,
    tolerances: Option<Tolerances>,
}

impl EuclidEvenPlanner {
    pub fn new(dim: usize, n: usize) -> Result<Self, PlanError> {
        if dim < 2 {
            return Err(PlanError::DimensionTooSmall(dim));
        }
        if !dim.is_multiple_of(2) {
            return Err(PlanError::OddDimension(dim));
        }
        if n < 2 {
            return Err(PlanError::TooFewPoints(n));
        }
        Ok(EuclidEvenPlanner {
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

    /// Attainable pair labels.
    pub fn region_range(&self) -> std::ops::RangeInclusive<usize> {
        3..=2 * self.n
    }

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

    /// Signed scalar coordinates of the points along the configuration's own
    /// line (first point at 0, second at its distance from the first).
    fn line_coords(c: &Configuration) -> Result<Vec<f64>, PlanError> {
        let e = direction(c)?;
        Ok(c.points().iter().map(|p| (p - c.point(0)).dot(&e)).collect())
    }

    /// Number of distinct projections onto the configuration's own line. At
    /// least 2 for any valid input (the first two points project apart).
    pub fn cp_dirline(&self, c: &Configuration) -> Result<usize, PlanError> {
        self.check_shape(c)?;
        let tol = self.tols(c.diameter()).proj_eq_tol;
        let mut xs = Self::line_coords(c)?;
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(1 + xs.windows(2).filter(|w| w[1] - w[0] >= tol).count())
    }

    fn epsilon_dirline(&self, c: &Configuration) -> Result<f64, PlanError> {
        let tol = self.tols(c.diameter()).proj_eq_tol;
        let xs = Self::line_coords(c)?;
        let mut min_gap = f64::INFINITY;
        for i in 0..xs.len() {
            for j in (i + 1)..xs.len() {
                let gap = (xs[i] - xs[j]).abs();
                if gap >= tol {
                    min_gap = min_gap.min(gap);
                }
            }
        }
        Ok(if min_gap.is_finite() {
            min_gap / self.n as f64
        } else {
            1.0
        })
    }

    /// Classify a pair by its projection counts and whether the two line
    /// directions are opposite within the antipodality threshold.
    pub fn classify(&self, a: &Configuration, b: &Configuration) -> Result<PairClass, PlanError> {
        let i = self.cp_dirline(a)?;
        let j = self.cp_dirline(b)?;
        let tol = self.tols(a.pair_diameter(b)).antipodal_tol;
        let e_a = direction(a)?;
        let e_b = direction(b)?;
        Ok(if (e_a + e_b).norm() < tol {
            PairClass::Antipodal { i, j }
        } else {
            PairClass::Aligned { i, j }
        })
    }

    /// Flatten the configuration onto its own line in two straight phases:
    /// shear along `e_C` until line projections are pairwise distinct, then
    /// send every point to its projection. The line and its direction are
    /// unchanged (the first point never moves; the second moves along `e_C`).
    pub fn colinearize(&self, c: &Configuration) -> Result<Trajectory, PlanError> {
        self.check_shape(c)?;
        let eps = self.epsilon_dirline(c)?;
        let e = direction(c)?;
        let sheared = Configuration::unchecked(
            self.dim,
            c.points()
                .iter()
                .enumerate()
                .map(|(i, p)| p + &e * (i as f64 * eps))
                .collect(),
        );
        debug_assert_eq!(self.cp_dirline(&sheared)?, self.n);
        let origin = sheared.point(0).clone();
        let flat = Configuration::unchecked(
            self.dim,
            sheared
                .points()
                .iter()
                .map(|p| &origin + &e * (p - &origin).dot(&e))
                .collect(),
        );
        let parts = [
            Trajectory::linear(c.clone(), sheared.clone())?,
            Trajectory::linear(sheared, flat)?,
        ];
        let junction_tol = self.tols(c.diameter()).junction_tol;
        Ok(Trajectory::concatenate(&parts, junction_tol)?)
    }

    /// Rigid rotation about the first point taking the configuration's line
    /// direction to `target` along the shorter great-circle arc in their
    /// common plane. Errors when the directions are opposite within the
    /// antipodality threshold (no shorter side exists there).
    pub fn rotate_align(
        &self,
        c: &Configuration,
        target: &DVector<f64>,
    ) -> Result<Trajectory, PlanError> {
        self.check_shape(c)?;
        let a = direction(c)?;
        let t_hat = target / target.norm();
        if (&a + &t_hat).norm() < self.tols(c.diameter()).antipodal_tol {
            return Err(PlanError::OppositeDirections);
        }
        let cos_theta = a.dot(&t_hat).clamp(-1.0, 1.0);
        let w = &t_hat - &a * cos_theta;
        if w.norm() < 1e-14 {
            // already aligned
            return Ok(Trajectory::constant(c.clone()));
        }
        let b = &w / w.norm();
        let theta = t_hat.dot(&b).atan2(cos_theta);

        // Decompose each point relative to the pivot into in-plane components
        // (alpha along a, beta along b) plus an orthogonal residual the
        // rotation leaves fixed.
        let pivot = c.point(0).clone();
        let decomp: Vec<(f64, f64, DVector<f64>)> = c
            .points()
            .iter()
            .map(|p| {
                let v = p - &pivot;
                let alpha = v.dot(&a);
                let beta = v.dot(&b);
                let rest = v - &a * alpha - &b * beta;
                (alpha, beta, rest)
            })
            .collect();
        let dim = self.dim;
        let at_angle = {
            let (a, b, pivot) = (a.clone(), b.clone(), pivot.clone());
            let decomp = decomp.clone();
            move |phi: f64| {
                let (cos_p, sin_p) = (phi.cos(), phi.sin());
                Configuration::unchecked(
                    dim,
                    decomp
                        .iter()
                        .map(|(alpha, beta, rest)| {
                            &pivot
                                + rest
                                + &a * (alpha * cos_p - beta * sin_p)
                                + &b * (alpha * sin_p + beta * cos_p)
                        })
                        .collect(),
                )
            }
        };
        let end = at_angle(theta);
        let piece = crate::geometry::Piece::analytic_with_endpoints(
            c.clone(),
            end,
            move |s| at_angle(s * theta),
            true,
        );
        Ok(Trajectory::from_piece(piece))
    }

    /// Rigid translation taking a collinear configuration onto the target
    /// line `(anchor, dir)`, moving only orthogonally to `dir`. The
    /// configuration's direction must match `dir` up to sign within `1e-9`.
    pub fn translate_align(
        &self,
        c: &Configuration,
        anchor: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> Result<Trajectory, PlanError> {
        self.check_shape(c)?;
        let e = direction(c)?;
        let d_hat = dir / dir.norm();
        let mismatch = (&e - &d_hat).norm().min((&e + &d_hat).norm());
        if mismatch > 1e-9 {
            return Err(PlanError::DirectionMismatch(mismatch));
        }
        let offset = anchor - c.point(0);
        let w = &offset - &d_hat * offset.dot(&d_hat);
        let target = Configuration::unchecked(
            self.dim,
            c.points().iter().map(|p| p + &w).collect(),
        );
        Ok(Trajectory::linear(c.clone(), target)?)
    }

    /// Reorder points along their common line in three straight phases (lift
    /// by rank along `lift`, translate, drop), exactly like the fixed-axis
    /// shuffle but along an arbitrary line with an arbitrary orthogonal lift
    /// direction. The clearance unit is `max(1, pair diameter) / n`.
    pub fn lift_move_drop(
        &self,
        c: &Configuration,
        c_goal: &Configuration,
        lift: &DVector<f64>,
    ) -> Result<Trajectory, PlanError> {
        self.check_shape(c)?;
        self.check_shape(c_goal)?;
        let e = direction(c)?;
        let anchor = c.point(0).clone();
        let tols = self.tols(c.pair_diameter(c_goal));
        let mut off = 0.0f64;
        for p in c.points().iter().chain(c_goal.points()) {
            let v = p - &anchor;
            off = off.max((&v - &e * v.dot(&e)).norm());
        }
        if off > tols.proj_eq_tol {
            return Err(PlanError::NotOnCommonLine(off));
        }
        let lift_hat = lift / lift.norm();
        let skew = lift_hat.dot(&e).abs();
        if skew > 1e-9 {
            return Err(PlanError::LiftNotOrthogonal(skew));
        }
        let g = c.pair_diameter(c_goal).max(1.0) / self.n as f64;
        let coords = Self::line_coords(c)?;
        let heights: Vec<f64> = rank_order(&coords).into_iter().map(|r| r as f64 * g).collect();
        let lifted = |base: &Configuration| {
            Configuration::unchecked(
                self.dim,
                base.points()
                    .iter()
                    .zip(&heights)
                    .map(|(p, h)| p + &lift_hat * *h)
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

    /// Pair label in `{3, ..., 2n}`.
    pub fn region_index(
        &self,
        a: &Configuration,
        b: &Configuration,
    ) -> Result<RegionIndex, PlanError> {
        Ok(self.classify(a, b)?.region())
    }

    /// Full planning rule. Aligned pairs: flatten both sides, rotate the
    /// start line onto the goal direction, translate onto the goal line,
    /// shuffle, unflatten. Antipodal pairs skip the rotation (the lines are
    /// already parallel) and shuffle against the start side's own lift field.
    pub fn plan(
        &self,
        a: &Configuration,
        b: &Configuration,
    ) -> Result<(Trajectory, RegionIndex), PlanError> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        let class = self.classify(a, b)?;
        let junction_tol = self.tols(a.pair_diameter(b)).junction_tol;
        let col_a = self.colinearize(a)?;
        let col_b = self.colinearize(b)?;
        let b_flat = col_b.end().clone();
        let e_b = direction(&b_flat)?;
        let b_anchor = b_flat.point(0).clone();

        let mut parts: Vec<Trajectory> = vec![col_a];
        match class {
            PairClass::Aligned { .. } => {
                let rot = self.rotate_align(parts.last().unwrap().end(), &e_b)?;
                let trans = self.translate_align(rot.end(), &b_anchor, &e_b)?;
                let lift = perp_field(&e_b)?;
                let shuffle = self.lift_move_drop(trans.end(), &b_flat, &lift)?;
                parts.extend([rot, trans, shuffle]);
            }
            PairClass::Antipodal { .. } => {
                let trans = self.translate_align(parts.last().unwrap().end(), &b_anchor, &e_b)?;
                let lift = perp_field(&direction(trans.end())?)?;
                let shuffle = self.lift_move_drop(trans.end(), &b_flat, &lift)?;
                parts.extend([trans, shuffle]);
            }
        }
        parts.push(col_b.reverse());
        Ok((Trajectory::concatenate(&parts, junction_tol)?, class.region()))
    }
}

/// 1-based ranks of the values in ascending order (values assumed distinct).
fn rank_order(xs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap());
    let mut ranks = vec![0; xs.len()];
    for (rank, &i) in order.iter().enumerate() {
        ranks[i] = rank + 1;
    }
    ranks
}

/// Test/verification witness: `n` points in dimension `dim` whose own-line
/// projection count is exactly `want_cp` (first two points on the first
/// axis, so the line direction is the first basis vector).
pub fn config_with_cp_dirline(dim: usize, n: usize, want_cp: usize) -> Configuration {
    assert!((2..=n).contains(&want_cp), "cp_dirline must be in 2..=n");
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut row = vec![0.0; dim];
            row[0] = j.min(want_cp - 1) as f64;
            if j >= 2 {
                row[1] = j as f64;
            }
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

    /// Swap the first two points: reverses the configuration's direction.
    fn swap01(c: &Configuration) -> Configuration {
        let mut pts: Vec<_> = c.points().to_vec();
        pts.swap(0, 1);
        Configuration::new(pts).unwrap()
    }

    #[test]
    fn constructor_requires_even_dimension() {
        assert!(matches!(
            EuclidEvenPlanner::new(3, 2),
            Err(PlanError::OddDimension(3))
        ));
        assert!(EuclidEvenPlanner::new(2, 2).is_ok());
        assert!(EuclidEvenPlanner::new(4, 3).is_ok());
    }

    #[test]
    fn direction_examples() {
        let e = direction(&cfg(&[&[0.0, 0.0], &[2.0, 0.0]])).unwrap();
        assert_eq!(e.as_slice(), &[1.0, 0.0]);
        let e = direction(&cfg(&[&[1.0, 1.0], &[1.0, 4.0]])).unwrap();
        assert_eq!(e.as_slice(), &[0.0, 1.0]);
        let c = cfg(&[&[0.3, -0.2], &[1.7, 2.2]]);
        let flipped = direction(&swap01(&c)).unwrap();
        assert!((direction(&c).unwrap() + flipped).norm() < 1e-15);
    }

    #[test]
    fn cp_dirline_counts_line_projections() {
        let p2 = EuclidEvenPlanner::new(2, 2).unwrap();
        assert_eq!(p2.cp_dirline(&cfg(&[&[0.0, 0.0], &[1.0, 5.0]])).unwrap(), 2);

        let p3 = EuclidEvenPlanner::new(2, 3).unwrap();
        assert_eq!(
            p3.cp_dirline(&cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[2.5, 0.0]]))
                .unwrap(),
            3
        );
        // third point projects exactly onto the first
        assert_eq!(
            p3.cp_dirline(&cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 5.0]]))
                .unwrap(),
            2
        );
    }

    #[test]
    fn classify_detects_antipodal_pairs() {
        let p = EuclidEvenPlanner::new(2, 2).unwrap();
        let a = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = swap01(&a);
        assert_eq!(p.classify(&a, &b).unwrap(), PairClass::Antipodal { i: 2, j: 2 });
        assert_eq!(p.classify(&a, &a).unwrap(), PairClass::Aligned { i: 2, j: 2 });
        let c = cfg(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(p.classify(&a, &c).unwrap(), PairClass::Aligned { i: 2, j: 2 });
        assert_eq!(PairClass::Antipodal { i: 2, j: 2 }.region(), RegionIndex(3));
        assert_eq!(PairClass::Aligned { i: 2, j: 3 }.region(), RegionIndex(5));
    }

    #[test]
    fn colinearize_flattens_without_collisions() {
        let p = EuclidEvenPlanner::new(2, 3).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 3.0]]);
        let traj = p.colinearize(&c).unwrap();
        assert_eq!(traj.evaluate(0.0).unwrap(), c);
        let flat = traj.end();
        assert_eq!(p.cp_dirline(flat).unwrap(), 3);
        // endpoint is exactly collinear with the original direction
        let e = direction(&c).unwrap();
        for q in flat.points() {
            let v = q - flat.point(0);
            assert!((&v - &e * v.dot(&e)).norm() <= 1e-12);
        }
        assert!((direction(flat).unwrap() - &e).norm() <= 1e-12);
        for i in 0..=500 {
            assert!(traj.evaluate(i as f64 / 500.0).unwrap().min_separation() > 0.0);
        }
    }

    #[test]
    fn rotate_align_quarter_turn() {
        let p = EuclidEvenPlanner::new(2, 2).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let target = DVector::from_vec(vec![0.0, 1.0]);
        let traj = p.rotate_align(&c, &target).unwrap();
        let end = traj.end();
        assert!(end.max_point_distance(&cfg(&[&[0.0, 0.0], &[0.0, 1.0]])) < 1e-15);
        // rigidity: pairwise distance preserved along the way
        for i in 0..=50 {
            let mid = traj.evaluate(i as f64 / 50.0).unwrap();
            assert!((mid.min_separation() - 1.0).abs() < 1e-12);
        }
        // aligned target -> constant
        let same = p
            .rotate_align(&c, &DVector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        assert_eq!(same.end(), &c);
        // opposite target -> error
        assert!(matches!(
            p.rotate_align(&c, &DVector::from_vec(vec![-1.0, 0.0])),
            Err(PlanError::OppositeDirections)
        ));
    }

    #[test]
    fn rotate_align_fixes_out_of_plane_components() {
        let p = EuclidEvenPlanner::new(4, 2).unwrap();
        let c = cfg(&[&[0.0, 0.0, 0.0, 3.0], &[1.0, 0.0, 0.0, 3.0]]);
        let target = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        let traj = p.rotate_align(&c, &target).unwrap();
        // pivot keeps its out-of-plane coordinate; separation is rigid
        assert_eq!(traj.end().point(0)[3], 3.0);
        assert!((traj.end().point(1)[1] - 1.0).abs() < 1e-12);
        for i in 0..=20 {
            let mid = traj.evaluate(i as f64 / 20.0).unwrap();
            assert!((mid.min_separation() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn translate_align_moves_orthogonally() {
        let p = EuclidEvenPlanner::new(2, 2).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let anchor = DVector::from_vec(vec![10.0, 1.0]);
        let dir = DVector::from_vec(vec![1.0, 0.0]);
        let traj = p.translate_align(&c, &anchor, &dir).unwrap();
        assert_eq!(traj.end(), &cfg(&[&[0.0, 1.0], &[1.0, 1.0]]));
        // opposite direction is fine (antipodal branch relies on it)
        let rev = DVector::from_vec(vec![-1.0, 0.0]);
        assert!(p.translate_align(&c, &anchor, &rev).is_ok());
        // mismatched direction is not
        let up = DVector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(
            p.translate_align(&c, &anchor, &up),
            Err(PlanError::DirectionMismatch(_))
        ));
    }

    #[test]
    fn perp_field_quarter_turn_pairs() {
        let u = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(perp_field(&u).unwrap().as_slice(), &[0.0, 1.0]);
        let u = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(perp_field(&u).unwrap().as_slice(), &[-1.0, 0.0]);
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(perp_field(&u).unwrap().as_slice(), &[-2.0, 1.0, -4.0, 3.0]);
        assert_eq!(perp_field(&u).unwrap().dot(&u), 0.0);
        assert_eq!(perp_field(&u).unwrap().norm(), u.norm());
        assert!(matches!(
            perp_field(&DVector::from_vec(vec![1.0, 0.0, 0.0])),
            Err(PlanError::OddDimension(3))
        ));
    }

    #[test]
    fn lift_move_drop_reorders_with_clearance() {
        let p = EuclidEvenPlanner::new(2, 2).unwrap();
        let c = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let goal = swap01(&c);
        let lift = DVector::from_vec(vec![0.0, 1.0]);
        let traj = p.lift_move_drop(&c, &goal, &lift).unwrap();
        assert_eq!(traj.start(), &c);
        assert_eq!(traj.end(), &goal);
        let mut min_sep = f64::INFINITY;
        for i in 0..=300 {
            min_sep = min_sep.min(traj.evaluate(i as f64 / 300.0).unwrap().min_separation());
        }
        assert!(min_sep >= 0.5 - 1e-12);

        // same configuration round trip
        let back = p.lift_move_drop(&c, &c, &lift).unwrap();
        assert_eq!(back.end(), &c);

        // error surfaces
        let off_line = cfg(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert!(matches!(
            p.lift_move_drop(&c, &off_line, &lift),
            Err(PlanError::NotOnCommonLine(_))
        ));
        let bad_lift = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            p.lift_move_drop(&c, &goal, &bad_lift),
            Err(PlanError::LiftNotOrthogonal(_))
        ));
    }

    #[test]
    fn plan_swap_pair_uses_antipodal_branch() {
        let p = EuclidEvenPlanner::new(2, 2).unwrap();
        let a = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = swap01(&a);
        let (traj, k) = p.plan(&a, &b).unwrap();
        assert_eq!(k, RegionIndex(3));
        assert_eq!(traj.evaluate(0.0).unwrap(), a);
        assert_eq!(traj.evaluate(1.0).unwrap(), b);
        for i in 0..=1000 {
            assert!(traj.evaluate(i as f64 / 1000.0).unwrap().min_separation() > 0.0);
        }
    }

    #[test]
    fn plan_perpendicular_directions() {
        let p = EuclidEvenPlanner::new(2, 2).unwrap();
        let a = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let b = cfg(&[&[5.0, 5.0], &[5.0, 7.0]]);
        let (traj, k) = p.plan(&a, &b).unwrap();
        assert_eq!(k, RegionIndex(4));
        assert_eq!(traj.evaluate(0.0).unwrap(), a);
        assert_eq!(traj.evaluate(1.0).unwrap(), b);
        for i in 0..=1000 {
            assert!(traj.evaluate(i as f64 / 1000.0).unwrap().min_separation() > 0.0);
        }
    }

    #[test]
    fn plan_round_trip_is_exact() {
        let p = EuclidEvenPlanner::new(4, 3).unwrap();
        let a = cfg(&[
            &[0.0, 0.0, 1.0, -1.0],
            &[2.0, 0.5, 0.0, 0.0],
            &[1.0, 3.0, 0.0, 2.0],
        ]);
        let (traj, _) = p.plan(&a, &a).unwrap();
        assert_eq!(traj.evaluate(0.0).unwrap(), a);
        assert_eq!(traj.evaluate(1.0).unwrap(), a);
        for i in 0..=500 {
            assert!(traj.evaluate(i as f64 / 500.0).unwrap().min_separation() > 0.0);
        }
    }

    #[test]
    fn witnesses_hit_their_projection_counts() {
        for n in 2..=4 {
            let p = EuclidEvenPlanner::new(4, n).unwrap();
            for i in 2..=n {
                assert_eq!(p.cp_dirline(&config_with_cp_dirline(4, n, i)).unwrap(), i);
            }
        }
    }

    /// Degenerating sequences land only in classes with no larger projection
    /// counts: rotating the goal toward antipodality keeps (i, j) and flips
    /// the class; shrinking a projection gap lowers cp in the limit.
    #[test]
    fn class_limits_shrink() {
        let p = EuclidEvenPlanner::new(2, 2).unwrap();
        let a = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        for step in 1..=6 {
            let ang = std::f64::consts::PI * (1.0 - 10f64.powi(-step));
            let b = cfg(&[&[0.0, 0.0], &[ang.cos(), ang.sin()]]);
            assert_eq!(p.classify(&a, &b).unwrap(), PairClass::Aligned { i: 2, j: 2 });
        }
        let b_limit = cfg(&[&[0.0, 0.0], &[-1.0, 0.0]]);
        assert_eq!(
            p.classify(&a, &b_limit).unwrap(),
            PairClass::Antipodal { i: 2, j: 2 }
        );

        let p3 = EuclidEvenPlanner::new(2, 3).unwrap();
        for step in 1..=6 {
            let gap = 10f64.powi(-step);
            let c = cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[gap, 4.0]]);
            assert_eq!(p3.cp_dirline(&c).unwrap(), 3);
        }
        let c_limit = cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 4.0]]);
        assert_eq!(p3.cp_dirline(&c_limit).unwrap(), 2);
    }
}
