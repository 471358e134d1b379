//! Motion planner for a single point on the unit sphere `S^n`.
//!
//! Non-antipodal pairs follow the unique shortest great-circle arc. Antipodal
//! pairs follow a semicircle whose initial direction comes from a tangent
//! vector field: for odd `n` a nowhere-zero field exists (coordinate pairing)
//! and two domains of continuity suffice; for even `n` every field vanishes
//! somewhere, so the planner uses a field with a single zero at a designated
//! base point and handles the one remaining pair (base point to its antipode)
//! as a third domain.
//!
//! Trajectories are ordinary [`Trajectory`] values over single-point
//! configurations in the ambient `R^{n+1}`; every evaluated point stays on
//! the sphere to within `1e-12`.

use std::fmt;

use nalgebra::DVector;
use thiserror::Error;

use crate::geometry::{basis_vector, Configuration, Piece, Tolerances, Trajectory};

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("ambient dimension must be at least 2, got {0}")]
    AmbientTooSmall(usize),
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("vector norm {0} is too far from 1 to be a sphere point")]
    NotUnit(f64),
    #[error("ambient dimension {got} does not match the planner's {expected}")]
    AmbientMismatch { got: usize, expected: usize },
    #[error("endpoints are antipodal; no unique shortest arc exists")]
    AntipodalInput,
    #[error("the coordinate-pairing field needs odd sphere dimension, got {0}")]
    NeedsOddDimension(usize),
    #[error("the stereographic field needs even sphere dimension, got {0}")]
    NeedsEvenDimension(usize),
    #[error("semicircle direction is not unit tangent (residual {0:e})")]
    NotTangent(f64),
}

/// A point on the unit sphere, stored as a unit vector in the ambient space
/// (renormalized on construction; inputs may be off by up to `1e-6`).
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self, SphereError> {
        if coords.len() < 2 {
            return Err(SphereError::AmbientTooSmall(coords.len()));
        }
        if !coords.iter().all(|x| x.is_finite()) {
            return Err(SphereError::NonFinite);
        }
        let norm = coords.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(SphereError::NotUnit(norm));
        }
        Ok(SpherePoint(coords / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self, SphereError> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    /// Dimension `n` of the sphere `S^n` this point lives on.
    pub fn sphere_dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint(-&self.0)
    }

    fn config(&self) -> Configuration {
        Configuration::unchecked(self.0.len(), vec![self.0.clone()])
    }
}

/// Domain label assigned to a sphere pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SphereRegion {
    /// Non-antipodal pairs: shortest arc.
    F1,
    /// Antipodal pairs steered by the tangent field.
    F2,
    /// The single pair (base point, its antipode), even dimension only.
    F3,
}

impl fmt::Display for SphereRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SphereRegion::F1 => write!(f, "F1"),
            SphereRegion::F2 => write!(f, "F2"),
            SphereRegion::F3 => write!(f, "F3"),
        }
    }
}

/// Shortest great-circle arc from `a` to `b` at constant speed; errors when
/// the endpoints are antipodal within `antipodal_tol` (no unique arc).
pub fn slerp(a: &SpherePoint, b: &SpherePoint, antipodal_tol: f64) -> Result<Trajectory, SphereError> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(SphereError::AmbientMismatch {
            got: b.ambient_dim(),
            expected: a.ambient_dim(),
        });
    }
    if (&a.0 + &b.0).norm() < antipodal_tol {
        return Err(SphereError::AntipodalInput);
    }
    let omega = a.0.dot(&b.0).clamp(-1.0, 1.0).acos();
    if omega < 1e-12 {
        return Ok(Trajectory::constant(a.config()));
    }
    let (pa, pb, dim) = (a.0.clone(), b.0.clone(), a.ambient_dim());
    let sin_omega = omega.sin();
    let map = move |s: f64| {
        let u = &pa * (((1.0 - s) * omega).sin() / sin_omega) + &pb * ((s * omega).sin() / sin_omega);
        let u = &u / u.norm();
        Configuration::unchecked(dim, vec![u])
    };
    Ok(Trajectory::from_piece(Piece::analytic_with_endpoints(
        a.config(),
        b.config(),
        map,
        false,
    )))
}

/// Nowhere-zero unit tangent field on odd-dimensional spheres: rotate
/// consecutive coordinate pairs a quarter turn,
/// `(u1, u2, ..., u_{d-1}, u_d) -> (-u2, u1, ..., -u_d, u_{d-1})`.
pub fn tangent_field_odd(a: &SpherePoint) -> Result<DVector<f64>, SphereError> {
    if a.sphere_dim().is_multiple_of(2) {
        return Err(SphereError::NeedsOddDimension(a.sphere_dim()));
    }
    let d = a.ambient_dim();
    let mut v = DVector::zeros(d);
    for k in 0..d / 2 {
        v[2 * k] = -a.0[2 * k + 1];
        v[2 * k + 1] = a.0[2 * k];
    }
    Ok(v)
}

/// Unit vector orthogonal to `base`, derived from the coordinate axis least
/// aligned with it. Deterministic; used as the planar direction behind the
/// stereographic field and as the fixed semicircle direction at the base
/// point.
fn reference_perp(base: &DVector<f64>) -> DVector<f64> {
    let k = (0..base.len())
        .min_by(|&i, &j| base[i].abs().partial_cmp(&base[j].abs()).unwrap())
        .expect("nonempty");
    let e = basis_vector(base.len(), k);
    let w = &e - base * base.dot(&e);
    &w / w.norm()
}

/// Tangent field on an even-dimensional sphere vanishing only at `base`:
/// the pushforward of a constant planar field under the inverse
/// stereographic projection from `base`. Smooth away from `base`, zero at
/// `base`, and of norm `2 / (|y|^2 + 1)` elsewhere (`y` the stereographic
/// image), hence nonzero wherever defined.
pub fn tangent_field_even(
    a: &SpherePoint,
    base: &SpherePoint,
) -> Result<DVector<f64>, SphereError> {
    if !a.sphere_dim().is_multiple_of(2) {
        return Err(SphereError::NeedsEvenDimension(a.sphere_dim()));
    }
    if a.ambient_dim() != base.ambient_dim() {
        return Err(SphereError::AmbientMismatch {
            got: a.ambient_dim(),
            expected: base.ambient_dim(),
        });
    }
    let denom = 1.0 - a.0.dot(&base.0);
    if denom <= 0.0 {
        // at (or numerically indistinguishable from) the base point: the zero
        return Ok(DVector::zeros(a.ambient_dim()));
    }
    let w = reference_perp(&base.0);
    let y = (&a.0 - &base.0 * a.0.dot(&base.0)) / denom;
    let n_y = y.norm_squared() + 1.0;
    let mut v = &w * (2.0 / n_y) + (&base.0 - &y) * (4.0 * y.dot(&w) / (n_y * n_y));
    // clean up the rounding residual along a itself
    let r = v.dot(&a.0);
    v -= &a.0 * r;
    Ok(v)
}

/// Half great circle from `a` to its antipode, leaving along the unit
/// tangent `v`: `t -> cos(pi t) a + sin(pi t) v`. The stored endpoint is the
/// exact antipode.
pub fn semicircle(a: &SpherePoint, v: &DVector<f64>) -> Result<Trajectory, SphereError> {
    if v.len() != a.ambient_dim() {
        return Err(SphereError::AmbientMismatch {
            got: v.len(),
            expected: a.ambient_dim(),
        });
    }
    let residual = (v.norm() - 1.0).abs().max(v.dot(&a.0).abs());
    if residual > 1e-9 {
        return Err(SphereError::NotTangent(residual));
    }
    let (pa, pv, dim) = (a.0.clone(), v.clone(), a.ambient_dim());
    let map = move |s: f64| {
        let phi = std::f64::consts::PI * s;
        let u = &pa * phi.cos() + &pv * phi.sin();
        let u = &u / u.norm();
        Configuration::unchecked(dim, vec![u])
    };
    Ok(Trajectory::from_piece(Piece::analytic_with_endpoints(
        a.config(),
        a.antipode().config(),
        map,
        false,
    )))
}

/// Planner for one point on `S^n`.
#[derive(Clone, Debug)]
pub struct SpherePlanner {
    sphere_dim: usize,
    base: SpherePoint,
    tolerances: Option<Tolerances>,
}

impl SpherePlanner {
    /// Planner on `S^n`, `n >= 1`. The designated base point (only relevant
    /// for even `n`) defaults to the north pole, the last coordinate axis.
    pub fn new(sphere_dim: usize) -> Result<Self, SphereError> {
        if sphere_dim < 1 {
            return Err(SphereError::AmbientTooSmall(sphere_dim + 1));
        }
        let base = SpherePoint(basis_vector(sphere_dim + 1, sphere_dim));
        Ok(SpherePlanner {
            sphere_dim,
            base,
            tolerances: None,
        })
    }

    /// Replace the designated base point.
    pub fn with_base_point(mut self, base: SpherePoint) -> Result<Self, SphereError> {
        if base.sphere_dim() != self.sphere_dim {
            return Err(SphereError::AmbientMismatch {
                got: base.ambient_dim(),
                expected: self.sphere_dim + 1,
            });
        }
        self.base = base;
        Ok(self)
    }

    /// Replace the scale-derived default thresholds with fixed ones.
    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = Some(tolerances);
        self
    }

    pub fn sphere_dim(&self) -> usize {
        self.sphere_dim
    }

    pub fn base_point(&self) -> &SpherePoint {
        &self.base
    }

    /// Domain labels this planner can emit.
    pub fn regions(&self) -> &'static [SphereRegion] {
        if self.sphere_dim % 2 == 1 {
            &[SphereRegion::F1, SphereRegion::F2]
        } else {
            &[SphereRegion::F1, SphereRegion::F2, SphereRegion::F3]
        }
    }

    fn antipodal_tol(&self) -> f64 {
        self.tolerances
            .map(|t| t.antipodal_tol)
            .unwrap_or(Tolerances::ANTIPODAL_ABS)
    }

    fn check_point(&self, p: &SpherePoint) -> Result<(), SphereError> {
        if p.sphere_dim() != self.sphere_dim {
            return Err(SphereError::AmbientMismatch {
                got: p.ambient_dim(),
                expected: self.sphere_dim + 1,
            });
        }
        Ok(())
    }

    /// Domain label for a pair without building the trajectory.
    pub fn region(&self, a: &SpherePoint, b: &SpherePoint) -> Result<SphereRegion, SphereError> {
        self.check_point(a)?;
        self.check_point(b)?;
        let tol = self.antipodal_tol();
        if (&a.0 + &b.0).norm() >= tol {
            return Ok(SphereRegion::F1);
        }
        if self.sphere_dim % 2 == 1 {
            Ok(SphereRegion::F2)
        } else if (&a.0 - &self.base.0).norm() < tol {
            Ok(SphereRegion::F3)
        } else {
            Ok(SphereRegion::F2)
        }
    }

    /// Plan a path from `a` to `b`. Antipodal pairs end at the exact antipode
    /// of `a`, which coincides with `b` up to the antipodality threshold.
    pub fn plan(
        &self,
        a: &SpherePoint,
        b: &SpherePoint,
    ) -> Result<(Trajectory, SphereRegion), SphereError> {
        let region = self.region(a, b)?;
        let traj = match region {
            SphereRegion::F1 => slerp(a, b, self.antipodal_tol())?,
            SphereRegion::F2 => {
                let v = if self.sphere_dim % 2 == 1 {
                    tangent_field_odd(a)?
                } else {
                    let raw = tangent_field_even(a, &self.base)?;
                    let norm = raw.norm();
                    raw / norm
                };
                semicircle(a, &v)?
            }
            SphereRegion::F3 => semicircle(a, &reference_perp(&self.base.0))?,
        };
        Ok((traj, region))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[f64]) -> SpherePoint {
        SpherePoint::from_slice(coords).unwrap()
    }

    #[test]
    fn sphere_point_normalizes_and_validates() {
        let p = pt(&[3e-7 + 1.0, 0.0]);
        assert!((p.coords().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            SpherePoint::from_slice(&[0.5, 0.5]),
            Err(SphereError::NotUnit(_))
        ));
        assert!(matches!(
            SpherePoint::from_slice(&[1.0]),
            Err(SphereError::AmbientTooSmall(1))
        ));
    }

    #[test]
    fn slerp_quarter_arc() {
        let a = pt(&[1.0, 0.0, 0.0]);
        let b = pt(&[0.0, 1.0, 0.0]);
        let traj = slerp(&a, &b, 1e-9).unwrap();
        assert_eq!(traj.evaluate(0.0).unwrap().point(0), a.coords());
        assert_eq!(traj.evaluate(1.0).unwrap().point(0), b.coords());
        let mid = traj.evaluate(0.5).unwrap();
        let r = 0.5_f64.sqrt();
        assert!((mid.point(0) - DVector::from_vec(vec![r, r, 0.0])).norm() < 1e-15);
        // constant speed: the angle from a grows linearly; points stay unit
        let omega = std::f64::consts::FRAC_PI_2;
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let p = traj.evaluate(t).unwrap();
            let u = p.point(0);
            assert!((u.norm() - 1.0).abs() <= 1e-12);
            assert!((u.dot(a.coords()).clamp(-1.0, 1.0).acos() - t * omega).abs() <= 1e-9);
        }
    }

    #[test]
    fn slerp_identical_points_is_constant() {
        let a = pt(&[0.6, 0.8]);
        let traj = slerp(&a, &a, 1e-9).unwrap();
        assert_eq!(traj.evaluate(0.5).unwrap().point(0), a.coords());
    }

    #[test]
    fn slerp_rejects_antipodal() {
        let a = pt(&[1.0, 0.0]);
        assert!(matches!(
            slerp(&a, &a.antipode(), 1e-9),
            Err(SphereError::AntipodalInput)
        ));
    }

    #[test]
    fn odd_field_examples() {
        let v = tangent_field_odd(&pt(&[1.0, 0.0])).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 1.0]);
        let v = tangent_field_odd(&pt(&[0.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        // even sphere dimension is rejected
        assert!(matches!(
            tangent_field_odd(&pt(&[0.0, 0.0, 1.0])),
            Err(SphereError::NeedsOddDimension(2))
        ));
        // unit, tangent, and of consistent orientation on the circle
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::FRAC_PI_4 + 0.1;
            let a = pt(&[th.cos(), th.sin()]);
            let v = tangent_field_odd(&a).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-15);
            assert!(v.dot(a.coords()).abs() < 1e-15);
            let cross = a.coords()[0] * v[1] - a.coords()[1] * v[0];
            assert!((cross - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn even_field_zero_only_at_base() {
        let base = pt(&[0.0, 0.0, 1.0]);
        assert_eq!(
            tangent_field_even(&base, &base).unwrap(),
            DVector::zeros(3)
        );
        // at the opposite pole the field is twice the reference direction
        let v = tangent_field_even(&base.antipode(), &base).unwrap();
        assert!((v - DVector::from_vec(vec![2.0, 0.0, 0.0])).norm() < 1e-14);
        // frozen equator value: the field points straight at the base pole
        let v = tangent_field_even(&pt(&[1.0, 0.0, 0.0]), &base).unwrap();
        assert!((v - DVector::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-14);
        // odd sphere dimension is rejected
        assert!(matches!(
            tangent_field_even(&pt(&[1.0, 0.0]), &pt(&[0.0, 1.0])),
            Err(SphereError::NeedsEvenDimension(1))
        ));
    }

    #[test]
    fn even_field_nonzero_and_tangent_away_from_base() {
        let base = pt(&[0.0, 0.0, 1.0]);
        for k in 0..200 {
            // deterministic scatter over the sphere, skipping the base point
            let th = 0.137 + k as f64 * 0.031;
            let ph = 0.241 + k as f64 * 0.017;
            let a = pt(&[
                th.sin() * ph.cos(),
                th.sin() * ph.sin(),
                th.cos(),
            ]);
            if (a.coords() - base.coords()).norm() < 1e-6 {
                continue;
            }
            let v = tangent_field_even(&a, &base).unwrap();
            assert!(v.norm() > 0.0, "field vanished away from the base point");
            assert!(v.dot(a.coords()).abs() <= 1e-12);
        }
    }

    #[test]
    fn semicircle_reaches_exact_antipode() {
        let a = pt(&[1.0, 0.0]);
        let v = DVector::from_vec(vec![0.0, 1.0]);
        let traj = semicircle(&a, &v).unwrap();
        assert_eq!(traj.evaluate(1.0).unwrap().point(0), a.antipode().coords());
        let mid = traj.evaluate(0.5).unwrap();
        assert!((mid.point(0) - DVector::from_vec(vec![0.0, 1.0])).norm() < 1e-15);
        for i in 0..=200 {
            let p = traj.evaluate(i as f64 / 200.0).unwrap();
            assert!((p.point(0).norm() - 1.0).abs() <= 1e-12);
        }
        // non-tangent directions are rejected
        assert!(matches!(
            semicircle(&a, &DVector::from_vec(vec![0.5, 0.5])),
            Err(SphereError::NotTangent(_))
        ));
    }

    #[test]
    fn planner_labels_odd_sphere() {
        let p = SpherePlanner::new(1).unwrap();
        let a = pt(&[1.0, 0.0]);
        let b = pt(&[0.0, 1.0]);
        let (_, r) = p.plan(&a, &b).unwrap();
        assert_eq!(r, SphereRegion::F1);
        let (traj, r) = p.plan(&a, &a.antipode()).unwrap();
        assert_eq!(r, SphereRegion::F2);
        assert_eq!(traj.evaluate(1.0).unwrap().point(0), a.antipode().coords());
        assert_eq!(p.regions(), &[SphereRegion::F1, SphereRegion::F2]);
    }

    #[test]
    fn planner_labels_even_sphere() {
        let p = SpherePlanner::new(2).unwrap();
        let base = p.base_point().clone();
        assert_eq!(base.coords().as_slice(), &[0.0, 0.0, 1.0]);
        let a = pt(&[1.0, 0.0, 0.0]);
        let (_, r) = p.plan(&a, &a.antipode()).unwrap();
        assert_eq!(r, SphereRegion::F2);
        let (traj, r) = p.plan(&base, &base.antipode()).unwrap();
        assert_eq!(r, SphereRegion::F3);
        assert_eq!(
            traj.evaluate(1.0).unwrap().point(0),
            base.antipode().coords()
        );
        let (_, r) = p.plan(&a, &base).unwrap();
        assert_eq!(r, SphereRegion::F1);
        assert_eq!(
            p.regions(),
            &[SphereRegion::F1, SphereRegion::F2, SphereRegion::F3]
        );
    }

    #[test]
    fn plan_trajectories_stay_on_sphere() {
        for dim in [1usize, 2, 3] {
            let p = SpherePlanner::new(dim).unwrap();
            let mut coords = vec![0.0; dim + 1];
            coords[0] = 1.0;
            let a = pt(&coords);
            for b in [pt(&{
                let mut c = vec![0.0; dim + 1];
                c[1] = 1.0;
                c
            }), a.antipode()]
            {
                let (traj, _) = p.plan(&a, &b).unwrap();
                for i in 0..=500 {
                    let q = traj.evaluate(i as f64 / 500.0).unwrap();
                    assert!((q.point(0).norm() - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}
