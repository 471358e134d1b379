//! Closed-form counts of the minimum number of control rules (domains of
//! continuity) that any motion planner on a given space must use, together
//! with the change of coordinates that relates planning on a product of
//! spheres to planning distinct points in Euclidean space.
//!
//! Each calculator returns a [`TcValue`]: either an exact count with a short
//! human-readable derivation note, or — where no exact count is available —
//! an upper bound that a concrete planner realizes.

use nalgebra::DVector;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{Configuration, GeometryError};
use crate::tree::Tree;

#[derive(Debug, Error)]
pub enum TcError {
    #[error("ambient dimension {0} is too small")]
    DimensionTooSmall(usize),
    #[error("{n} points confined to a line cannot exchange; their configuration space is disconnected")]
    Disconnected { n: usize },
    #[error("sequential planning needs at least 2 stages, got {0}")]
    StageCountTooSmall(usize),
    #[error("need at least one sphere factor")]
    NoFactors,
    #[error("there is no non-orientable surface of genus 0")]
    NoSuchSurface,
    #[error("strategy counts need at least one rule and one stage")]
    BadStrategyArgs,
    #[error("strategy count overflows the machine word")]
    Overflow,
    #[error("factor {index} is not a unit vector (norm residual {residual:.3e})")]
    NotUnit { index: usize, residual: f64 },
    #[error("factor {index} has ambient dimension {got}, expected {expected}")]
    AmbientMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A rule-count answer: exact, or only bounded from above.
///
/// Serializes as `{"value": 5, "source": "..."}` or
/// `{"value": "unknown", "upper_bound": 5, "source": "..."}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TcValue {
    Known { value: usize, source: String },
    Unknown { upper_bound: usize, source: String },
}

impl TcValue {
    fn known(value: usize, source: impl Into<String>) -> TcValue {
        TcValue::Known {
            value,
            source: source.into(),
        }
    }

    /// The exact count, when one is known.
    pub fn value(&self) -> Option<usize> {
        match self {
            TcValue::Known { value, .. } => Some(*value),
            TcValue::Unknown { .. } => None,
        }
    }

    /// The smallest rule count proven achievable (equals the value when exact).
    pub fn upper_bound(&self) -> usize {
        match self {
            TcValue::Known { value, .. } => *value,
            TcValue::Unknown { upper_bound, .. } => *upper_bound,
        }
    }

    pub fn source(&self) -> &str {
        match self {
            TcValue::Known { source, .. } | TcValue::Unknown { source, .. } => source,
        }
    }
}

impl Serialize for TcValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            TcValue::Known { value, source } => {
                m.serialize_entry("value", value)?;
                m.serialize_entry("source", source)?;
            }
            TcValue::Unknown {
                upper_bound,
                source,
            } => {
                m.serialize_entry("value", "unknown")?;
                m.serialize_entry("upper_bound", upper_bound)?;
                m.serialize_entry("source", source)?;
            }
        }
        m.end()
    }
}

/// Minimum rule count for planning `n` labelled points in `R^dim`:
/// `2n - 1` in odd dimensions (at least 3), `2n - 2` in even dimensions.
pub fn tc_euclid_config(dim: usize, n: usize) -> Result<TcValue, TcError> {
    if dim == 0 {
        return Err(TcError::DimensionTooSmall(dim));
    }
    if n <= 1 {
        return Ok(TcValue::known(
            1,
            "a single point moves by straight-line interpolation; one rule suffices",
        ));
    }
    if dim == 1 {
        return Err(TcError::Disconnected { n });
    }
    if dim.is_multiple_of(2) {
        Ok(TcValue::known(
            2 * n - 2,
            format!("{n} labelled points in even-dimensional R^{dim}: 2n - 2 rules"),
        ))
    } else {
        Ok(TcValue::known(
            2 * n - 1,
            format!("{n} labelled points in odd-dimensional R^{dim}: 2n - 1 rules"),
        ))
    }
}

/// Minimum rule count for planning `n` labelled points on a metric tree.
///
/// With `m` essential vertices (degree >= 3) and `n >= 2m` the count is
/// `2m + 1`, except that two points on a tree with a single three-way joint
/// need only 2 rules (their exchange space is a circle). For `2 <= n < 2m`
/// only the `2m + 1` upper bound is returned.
pub fn tc_tree_config(tree: &Tree, n: usize) -> Result<TcValue, TcError> {
    if n <= 1 {
        return Ok(TcValue::known(
            1,
            "a single point slides along the unique simple path; one rule suffices",
        ));
    }
    let m = tree.m();
    if m == 0 {
        return Err(TcError::Disconnected { n });
    }
    let single_three_way_joint = m == 1
        && tree
            .degree_of(tree.essential_vertex_ids()[0])
            .map(|d| d == 3)
            .unwrap_or(false);
    if n == 2 && single_three_way_joint {
        return Ok(TcValue::known(
            2,
            "two points exchanging around a single three-way joint move on a circle: 2 rules",
        ));
    }
    if n >= 2 * m {
        Ok(TcValue::known(
            2 * m + 1,
            format!("{n} points on a tree with {m} essential vertices, n >= 2m: 2m + 1 rules"),
        ))
    } else {
        Ok(TcValue::Unknown {
            upper_bound: 2 * m + 1,
            source: format!(
                "{n} points on a tree with {m} essential vertices: fewer points than \
                 twice the joint count, only the 2m + 1 upper bound is available"
            ),
        })
    }
}

/// Minimum rule count for planning on a product of `k` spheres `S^n`:
/// `2k + 1` when `n` is even, `k + 1` when `n` is odd.
pub fn tc_sphere_product(k: usize, n: usize) -> Result<TcValue, TcError> {
    if k == 0 {
        return Err(TcError::NoFactors);
    }
    if n == 0 {
        return Err(TcError::Disconnected { n: 2 });
    }
    if n.is_multiple_of(2) {
        Ok(TcValue::known(
            2 * k + 1,
            format!("product of {k} even-dimensional spheres S^{n}: 2k + 1 rules"),
        ))
    } else {
        Ok(TcValue::known(
            k + 1,
            format!("product of {k} odd-dimensional spheres S^{n}: k + 1 rules"),
        ))
    }
}

/// Minimum rule count for sequential planning through `s - 1` prescribed
/// intermediate configurations (`s` visits total) of `n` labelled points in
/// `R^dim`: `s(n - 1) + 1` in odd dimensions, `s(n - 1)` in even ones.
pub fn tc_s_euclid(s: usize, dim: usize, n: usize) -> Result<TcValue, TcError> {
    if s < 2 {
        return Err(TcError::StageCountTooSmall(s));
    }
    if dim == 0 {
        return Err(TcError::DimensionTooSmall(dim));
    }
    if n <= 1 {
        return Ok(TcValue::known(
            1,
            "a single point visits its waypoints by straight-line interpolation",
        ));
    }
    if dim == 1 {
        return Err(TcError::Disconnected { n });
    }
    if dim.is_multiple_of(2) {
        Ok(TcValue::known(
            s * n - s,
            format!("{s}-stage planning of {n} points in even-dimensional R^{dim}: s(n-1) rules"),
        ))
    } else {
        Ok(TcValue::known(
            s * n - s + 1,
            format!(
                "{s}-stage planning of {n} points in odd-dimensional R^{dim}: s(n-1) + 1 rules"
            ),
        ))
    }
}

/// Minimum rule count for planning a single point on a closed surface of the
/// given genus: 3 for the sphere and torus, 5 for higher-genus orientable
/// surfaces, 4 for the projective plane, 5 for other non-orientable surfaces.
pub fn tc_surface(genus: usize, orientable: bool) -> Result<TcValue, TcError> {
    let v = if orientable {
        match genus {
            0 | 1 => TcValue::known(
                3,
                format!("orientable surface of genus {genus} (sphere or torus): 3 rules"),
            ),
            _ => TcValue::known(
                5,
                format!("orientable surface of genus {genus} >= 2: 5 rules"),
            ),
        }
    } else {
        match genus {
            0 => return Err(TcError::NoSuchSurface),
            1 => TcValue::known(4, "projective plane: 4 rules".to_string()),
            _ => TcValue::known(
                5,
                format!("non-orientable surface of genus {genus} >= 2: 5 rules"),
            ),
        }
    };
    Ok(v)
}

/// Rule counts for a `k`-joint system whose single-joint planner uses `a`
/// rules: the naive per-joint product `a^k`, and the `k(a - 1) + 1` count
/// obtained by merging rules across joints by total defect.
pub fn control_strategy_counts(a: usize, k: usize) -> Result<(usize, usize), TcError> {
    if a == 0 || k == 0 {
        return Err(TcError::BadStrategyArgs);
    }
    let k32 = u32::try_from(k).map_err(|_| TcError::Overflow)?;
    let product = a.checked_pow(k32).ok_or(TcError::Overflow)?;
    let merged = k
        .checked_mul(a - 1)
        .and_then(|x| x.checked_add(1))
        .ok_or(TcError::Overflow)?;
    Ok((product, merged))
}

/// Turns `k` unit directions into a configuration of `k + 1` distinct points:
/// the first point is the origin and each next point steps `3^i` times the
/// `i`-th direction (0-based), so later steps dwarf the sum of earlier ones
/// and no two points can meet.
pub fn sphere_product_embed(units: &[DVector<f64>]) -> Result<Configuration, TcError> {
    if units.is_empty() {
        return Err(TcError::NoFactors);
    }
    let dim = units[0].len();
    if dim < 2 {
        return Err(TcError::DimensionTooSmall(dim));
    }
    for (index, u) in units.iter().enumerate() {
        if u.len() != dim {
            return Err(TcError::AmbientMismatch {
                index,
                got: u.len(),
                expected: dim,
            });
        }
        let residual = (u.norm() - 1.0).abs();
        // negated so that a NaN residual also counts as not a unit vector
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(residual <= 1e-9) {
            return Err(TcError::NotUnit { index, residual });
        }
    }
    let mut points = Vec::with_capacity(units.len() + 1);
    let mut z = DVector::zeros(dim);
    points.push(z.clone());
    let mut step = 1.0;
    for u in units {
        z += u * step;
        points.push(z.clone());
        step *= 3.0;
    }
    Ok(Configuration::new(points)?)
}

/// Inverse of [`sphere_product_embed`] up to normalization: the unit
/// directions between consecutive points of the configuration.
pub fn sphere_product_retract(c: &Configuration) -> Result<Vec<DVector<f64>>, TcError> {
    let mut units = Vec::with_capacity(c.n_points().saturating_sub(1));
    for i in 1..c.n_points() {
        let diff = c.point(i) - c.point(i - 1);
        let norm = diff.norm();
        if norm == 0.0 {
            return Err(TcError::Geometry(GeometryError::CoincidentPoints(i - 1, i)));
        }
        units.push(diff / norm);
    }
    if units.is_empty() {
        return Err(TcError::NoFactors);
    }
    Ok(units)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclid_counts() {
        assert_eq!(tc_euclid_config(3, 5).unwrap().value(), Some(9));
        assert_eq!(tc_euclid_config(2, 5).unwrap().value(), Some(8));
        assert_eq!(tc_euclid_config(4, 3).unwrap().value(), Some(4));
        assert_eq!(tc_euclid_config(2, 2).unwrap().value(), Some(2));
        assert_eq!(tc_euclid_config(7, 1).unwrap().value(), Some(1));
        assert!(matches!(
            tc_euclid_config(1, 2),
            Err(TcError::Disconnected { n: 2 })
        ));
        assert!(matches!(
            tc_euclid_config(0, 2),
            Err(TcError::DimensionTooSmall(0))
        ));
    }

    #[test]
    fn tree_counts() {
        let y = Tree::example_y();
        let h = Tree::example_h();
        let star4 =
            Tree::new(vec![0, 1, 2, 3, 4], vec![(0, 1), (1, 2), (1, 3), (1, 4)], 0, None).unwrap();
        let path = Tree::new(vec![0, 1, 2], vec![(0, 1), (1, 2)], 0, None).unwrap();

        assert_eq!(tc_tree_config(&y, 2).unwrap().value(), Some(2));
        assert_eq!(tc_tree_config(&y, 3).unwrap().value(), Some(3));
        // a four-way joint does not get the circle shortcut
        assert_eq!(tc_tree_config(&star4, 2).unwrap().value(), Some(3));
        assert_eq!(tc_tree_config(&h, 4).unwrap().value(), Some(5));
        assert_eq!(tc_tree_config(&h, 9).unwrap().value(), Some(5));
        let few = tc_tree_config(&h, 2).unwrap();
        assert_eq!(few.value(), None);
        assert_eq!(few.upper_bound(), 5);
        assert_eq!(tc_tree_config(&path, 1).unwrap().value(), Some(1));
        assert!(matches!(
            tc_tree_config(&path, 2),
            Err(TcError::Disconnected { n: 2 })
        ));
    }

    #[test]
    fn sphere_product_counts() {
        assert_eq!(tc_sphere_product(3, 2).unwrap().value(), Some(7));
        assert_eq!(tc_sphere_product(3, 1).unwrap().value(), Some(4));
        assert_eq!(tc_sphere_product(1, 2).unwrap().value(), Some(3));
        assert_eq!(tc_sphere_product(1, 1).unwrap().value(), Some(2));
        assert_eq!(tc_sphere_product(5, 7).unwrap().value(), Some(6));
        assert!(matches!(tc_sphere_product(0, 2), Err(TcError::NoFactors)));
    }

    #[test]
    fn sequential_counts() {
        // two stages reduce to the plain count
        assert_eq!(tc_s_euclid(2, 3, 5).unwrap().value(), Some(9));
        assert_eq!(tc_s_euclid(2, 2, 5).unwrap().value(), Some(8));
        assert_eq!(tc_s_euclid(3, 3, 4).unwrap().value(), Some(10));
        assert_eq!(tc_s_euclid(3, 2, 4).unwrap().value(), Some(9));
        assert_eq!(tc_s_euclid(5, 4, 1).unwrap().value(), Some(1));
        assert!(matches!(
            tc_s_euclid(1, 3, 4),
            Err(TcError::StageCountTooSmall(1))
        ));
    }

    #[test]
    fn surface_counts() {
        assert_eq!(tc_surface(0, true).unwrap().value(), Some(3));
        assert_eq!(tc_surface(1, true).unwrap().value(), Some(3));
        assert_eq!(tc_surface(2, true).unwrap().value(), Some(5));
        assert_eq!(tc_surface(9, true).unwrap().value(), Some(5));
        assert_eq!(tc_surface(1, false).unwrap().value(), Some(4));
        assert_eq!(tc_surface(2, false).unwrap().value(), Some(5));
        assert!(matches!(tc_surface(0, false), Err(TcError::NoSuchSurface)));
    }

    #[test]
    fn strategy_counts() {
        assert_eq!(control_strategy_counts(3, 4).unwrap(), (81, 9));
        assert_eq!(control_strategy_counts(2, 10).unwrap(), (1024, 11));
        assert_eq!(control_strategy_counts(1, 7).unwrap(), (1, 1));
        assert!(matches!(
            control_strategy_counts(10, 30),
            Err(TcError::Overflow)
        ));
        assert!(matches!(
            control_strategy_counts(0, 3),
            Err(TcError::BadStrategyArgs)
        ));
    }

    #[test]
    fn embed_then_retract_is_identity() {
        let units = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![-1.0, 0.0]),
        ];
        let c = sphere_product_embed(&units).unwrap();
        assert_eq!(c.n_points(), 4);
        assert_eq!(c.point(0).as_slice(), &[0.0, 0.0]);
        assert_eq!(c.point(1).as_slice(), &[1.0, 0.0]);
        assert_eq!(c.point(2).as_slice(), &[1.0, 3.0]);
        assert_eq!(c.point(3).as_slice(), &[-8.0, 3.0]);
        let back = sphere_product_retract(&c).unwrap();
        assert_eq!(back.len(), units.len());
        for (u, v) in units.iter().zip(&back) {
            assert!((u - v).norm() <= 1e-12);
        }
    }

    #[test]
    fn embed_rejects_non_units() {
        let units = vec![DVector::from_vec(vec![1.0, 1.0])];
        assert!(matches!(
            sphere_product_embed(&units),
            Err(TcError::NotUnit { index: 0, .. })
        ));
    }

    #[test]
    fn tc_value_serializes_both_shapes() {
        let known = TcValue::known(5, "x");
        assert_eq!(
            serde_json::to_string(&known).unwrap(),
            r#"{"value":5,"source":"x"}"#
        );
        let unknown = TcValue::Unknown {
            upper_bound: 5,
            source: "y".into(),
        };
        assert_eq!(
            serde_json::to_string(&unknown).unwrap(),
            r#"{"value":"unknown","upper_bound":5,"source":"y"}"#
        );
    }
}
