//! Verification harness for the planners: checks that a trajectory really
//! answers the query it was built for (exact endpoints), that points keep a
//! minimum separation throughout, that a planner's advertised label range is
//! fully inhabited, and that the planning rule is continuous within a label
//! class.
//!
//! Thresholds scale with the query: endpoint agreement within `1e-9` of the
//! pair diameter, separation at least `1e-6` of it. Separation on straight
//! -line phases is additionally minimized in closed form (the pairwise gap is
//! a quadratic in the phase parameter), so collisions cannot hide between
//! samples there.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::euclid::{EuclidPlanner, PlanError};
use crate::euclid_even::EuclidEvenPlanner;
use crate::geometry::{Configuration, GeometryError, RegionIndex, Trajectory};
use crate::tree::{Tree, TreeConfiguration, TreeError, TreePoint, TreeTrajectory};

/// Relative endpoint tolerance: a planner's output must start and end on the
/// query pair to within this fraction of the pair diameter.
pub const ENDPOINT_REL_TOL: f64 = 1e-9;
/// Relative separation tolerance: points must stay at least this fraction of
/// the pair diameter apart.
pub const SEPARATION_REL_TOL: f64 = 1e-6;

/// Deterministic generator for reproducible sampling.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random configuration with coordinates in `[-1, 1)`, resampled until the
/// points are comfortably separated.
pub fn random_config<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Configuration {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        if let Ok(c) = Configuration::from_rows(&rows) {
            if c.min_separation() >= 0.05 {
                return c;
            }
        }
    }
}

/// Random tree configuration with points in edge interiors (`s` in
/// `(0.1, 0.9)`), resampled until comfortably separated.
pub fn random_tree_config<R: Rng + ?Sized>(
    tree: &Tree,
    n: usize,
    rng: &mut R,
) -> TreeConfiguration {
    loop {
        let points: Vec<TreePoint> = (0..n)
            .map(|_| TreePoint::Edge {
                edge: rng.gen_range(0..tree.n_edges()),
                s: rng.gen_range(0.1..0.9),
            })
            .collect();
        let c = TreeConfiguration(points);
        if tree.validate_config(&c).is_ok()
            && tree.min_separation(&c).expect("validated") >= 0.02
        {
            return c;
        }
    }
}

/// Outcome of checking one trajectory against its query pair.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    /// Largest distance between a stored endpoint and the query configuration.
    pub endpoint_error: f64,
    pub endpoint_tol: f64,
    /// Smallest pairwise separation seen (sampled, plus exact quadratic
    /// minima on straight-line phases).
    pub min_separation: f64,
    pub sep_tol: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Exact minimum over the sweep `from -> to` of all pairwise distances: each
/// squared gap is quadratic in the phase parameter, minimized in closed form.
fn linear_min_separation(from: &Configuration, to: &Configuration) -> f64 {
    let n = from.n_points();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d0 = from.point(i) - from.point(j);
            let d1 = to.point(i) - to.point(j);
            let v = &d1 - &d0;
            let vv = v.norm_squared();
            let s = if vv > 0.0 {
                (-d0.dot(&v) / vv).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min((d0 + v * s).norm());
        }
    }
    best
}

/// Check endpoints and separation of a Euclidean trajectory against the pair
/// it was planned for.
pub fn check_trajectory(
    traj: &Trajectory,
    a: &Configuration,
    b: &Configuration,
    samples: usize,
) -> Result<CheckReport, GeometryError> {
    let samples = samples.max(2);
    let diam = a.pair_diameter(b);
    let scale = if diam > 0.0 { diam } else { 1.0 };
    let endpoint_tol = ENDPOINT_REL_TOL * scale;
    let sep_tol = SEPARATION_REL_TOL * scale;
    let endpoint_error = traj
        .evaluate(0.0)?
        .max_point_distance(a)
        .max(traj.evaluate(1.0)?.max_point_distance(b));
    let mut min_separation = f64::INFINITY;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        min_separation = min_separation.min(traj.evaluate(t)?.min_separation());
    }
    for piece in traj.pieces() {
        if let Some((from, to)) = piece.as_linear() {
            min_separation = min_separation.min(linear_min_separation(from, to));
        }
    }
    let pass = endpoint_error <= endpoint_tol && min_separation >= sep_tol;
    Ok(CheckReport {
        endpoint_error,
        endpoint_tol,
        min_separation,
        sep_tol,
        samples,
        pass,
    })
}

/// Largest per-point tree distance between two configurations of equal size.
pub fn tree_config_gap(
    tree: &Tree,
    x: &TreeConfiguration,
    y: &TreeConfiguration,
) -> Result<f64, TreeError> {
    if x.n_points() != y.n_points() {
        return Err(TreeError::PointCountMismatch(x.n_points(), y.n_points()));
    }
    let mut gap = 0.0f64;
    for (p, q) in x.points().iter().zip(y.points()) {
        gap = gap.max(tree.distance(p, q)?);
    }
    Ok(gap)
}

/// Check endpoints and separation of a tree trajectory against its query
/// pair. Pairwise gaps are piecewise linear in time here, so dense sampling
/// alone bounds the minimum.
pub fn check_tree_trajectory(
    tree: &Tree,
    traj: &TreeTrajectory,
    a: &TreeConfiguration,
    b: &TreeConfiguration,
    samples: usize,
) -> Result<CheckReport, TreeError> {
    let samples = samples.max(2);
    let diam = tree.pair_diameter(a, b)?;
    let scale = if diam > 0.0 { diam } else { 1.0 };
    let endpoint_tol = ENDPOINT_REL_TOL * scale;
    let sep_tol = SEPARATION_REL_TOL * scale;
    let endpoint_error = tree_config_gap(tree, &traj.evaluate(0.0)?, a)?
        .max(tree_config_gap(tree, &traj.evaluate(1.0)?, b)?);
    let mut min_separation = f64::INFINITY;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        min_separation = min_separation.min(tree.min_separation(&traj.evaluate(t)?)?);
    }
    let pass = endpoint_error <= endpoint_tol && min_separation >= sep_tol;
    Ok(CheckReport {
        endpoint_error,
        endpoint_tol,
        min_separation,
        sep_tol,
        samples,
        pass,
    })
}

/// A planner over point configurations in Euclidean space, seen abstractly:
/// enough interface for generic partition and continuity checks.
pub trait ConfigPlanner {
    fn dim(&self) -> usize;
    fn n(&self) -> usize;
    fn plan_pair(
        &self,
        a: &Configuration,
        b: &Configuration,
    ) -> Result<(Trajectory, RegionIndex), PlanError>;
    fn region_of(&self, a: &Configuration, b: &Configuration) -> Result<RegionIndex, PlanError>;
    fn region_range(&self) -> RangeInclusive<usize>;
}

impl ConfigPlanner for EuclidPlanner {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn n(&self) -> usize {
        self.n()
    }

    fn plan_pair(
        &self,
        a: &Configuration,
        b: &Configuration,
    ) -> Result<(Trajectory, RegionIndex), PlanError> {
        self.plan(a, b)
    }

    fn region_of(&self, a: &Configuration, b: &Configuration) -> Result<RegionIndex, PlanError> {
        self.region_index(a, b)
    }

    fn region_range(&self) -> RangeInclusive<usize> {
        self.region_range()
    }
}

impl ConfigPlanner for EuclidEvenPlanner {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn n(&self) -> usize {
        self.n()
    }

    fn plan_pair(
        &self,
        a: &Configuration,
        b: &Configuration,
    ) -> Result<(Trajectory, RegionIndex), PlanError> {
        self.plan(a, b)
    }

    fn region_of(&self, a: &Configuration, b: &Configuration) -> Result<RegionIndex, PlanError> {
        self.region_index(a, b)
    }

    fn region_range(&self) -> RangeInclusive<usize> {
        self.region_range()
    }
}

/// How the observed pair labels cover a planner's advertised range.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub histogram: BTreeMap<usize, usize>,
    pub missing: Vec<usize>,
    pub pass: bool,
}

/// Histogram a set of observed labels against an advertised range.
pub fn partition_report(
    range: RangeInclusive<usize>,
    observed: impl IntoIterator<Item = usize>,
) -> PartitionReport {
    let mut histogram = BTreeMap::new();
    for k in observed {
        *histogram.entry(k).or_insert(0usize) += 1;
    }
    let missing: Vec<usize> = range.filter(|k| !histogram.contains_key(k)).collect();
    let pass = missing.is_empty();
    PartitionReport {
        histogram,
        missing,
        pass,
    }
}

/// Label every pair and check that the planner's whole range is inhabited.
pub fn check_partition<P: ConfigPlanner>(
    planner: &P,
    pairs: &[(Configuration, Configuration)],
) -> Result<PartitionReport, PlanError> {
    let mut observed = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        observed.push(planner.region_of(a, b)?.0);
    }
    Ok(partition_report(planner.region_range(), observed))
}

/// Largest pointwise gap between two trajectories over a sample grid.
pub fn sup_deviation(
    t1: &Trajectory,
    t2: &Trajectory,
    samples: usize,
) -> Result<f64, GeometryError> {
    let samples = samples.max(2);
    let mut dev = 0.0f64;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        dev = dev.max(t1.evaluate(t)?.max_point_distance(&t2.evaluate(t)?));
    }
    Ok(dev)
}

/// Largest pointwise tree-metric gap between two tree trajectories.
pub fn tree_sup_deviation(
    tree: &Tree,
    t1: &TreeTrajectory,
    t2: &TreeTrajectory,
    samples: usize,
) -> Result<f64, TreeError> {
    let samples = samples.max(2);
    let mut dev = 0.0f64;
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        dev = dev.max(tree_config_gap(tree, &t1.evaluate(t)?, &t2.evaluate(t)?)?);
    }
    Ok(dev)
}

/// Every coordinate shifted by an independent uniform draw from
/// `[-delta, delta]`. Fails if the shift happens to collapse two points.
pub fn perturb_config<R: Rng + ?Sized>(
    c: &Configuration,
    delta: f64,
    rng: &mut R,
) -> Result<Configuration, GeometryError> {
    let points: Vec<DVector<f64>> = c
        .points()
        .iter()
        .map(|p| p.map(|x| x + rng.gen_range(-delta..=delta)))
        .collect();
    Configuration::new(points)
}

/// Outcome of small-perturbation probing around one query pair.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    /// Probes that stayed in the base pair's label class.
    pub kept: usize,
    /// Probes discarded because their label changed (the rule need not be
    /// continuous across label classes) or the perturbed pair degenerated.
    pub discarded: usize,
    /// Largest trajectory deviation among kept probes.
    pub max_deviation: f64,
}

/// Re-plan from randomly perturbed copies of the query pair and measure how
/// far the trajectories drift. Within one label class a continuous rule
/// keeps the deviation comparable to `delta`; probes that land in a
/// different class are discarded, not judged.
pub fn continuity_probe<P: ConfigPlanner, R: Rng + ?Sized>(
    planner: &P,
    a: &Configuration,
    b: &Configuration,
    delta: f64,
    probes: usize,
    eval_samples: usize,
    rng: &mut R,
) -> Result<ProbeReport, PlanError> {
    let (base_traj, base_region) = planner.plan_pair(a, b)?;
    let mut kept = 0usize;
    let mut discarded = 0usize;
    let mut max_deviation = 0.0f64;
    for _ in 0..probes {
        let (pa, pb) = match (
            perturb_config(a, delta, rng),
            perturb_config(b, delta, rng),
        ) {
            (Ok(pa), Ok(pb)) => (pa, pb),
            _ => {
                discarded += 1;
                continue;
            }
        };
        if planner.region_of(&pa, &pb).ok() != Some(base_region) {
            discarded += 1;
            continue;
        }
        match planner.plan_pair(&pa, &pb) {
            Ok((traj, _)) => {
                max_deviation = max_deviation.max(sup_deviation(&base_traj, &traj, eval_samples)?);
                kept += 1;
            }
            Err(_) => discarded += 1,
        }
    }
    Ok(ProbeReport {
        kept,
        discarded,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_a_valid_plan() {
        let planner = EuclidPlanner::new(3, 3).unwrap();
        let mut rng = seeded_rng(11);
        let a = random_config(3, 3, &mut rng);
        let b = random_config(3, 3, &mut rng);
        let (traj, _) = planner.plan(&a, &b).unwrap();
        let report = check_trajectory(&traj, &a, &b, 500).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.endpoint_error, 0.0);
    }

    #[test]
    fn quadratic_minimum_catches_crossing_missed_by_sampling() {
        // two points swapping along the same line meet exactly halfway
        let a = Configuration::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = Configuration::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let traj = Trajectory::linear(a.clone(), b.clone()).unwrap();
        // three samples (t = 0, 1/2, 1) would catch it; use two so only the
        // closed-form minimum can see the crossing
        let report = check_trajectory(&traj, &a, &b, 2).unwrap();
        assert_eq!(report.min_separation, 0.0);
        assert!(!report.pass);
    }

    #[test]
    fn flags_wrong_endpoints() {
        let a = Configuration::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = Configuration::from_rows(&[[0.0, 1.0], [1.0, 1.0]]).unwrap();
        let c = Configuration::from_rows(&[[0.0, 2.0], [1.0, 2.0]]).unwrap();
        let traj = Trajectory::linear(a.clone(), c).unwrap();
        let report = check_trajectory(&traj, &a, &b, 100).unwrap();
        assert!(report.endpoint_error >= 1.0 - 1e-12);
        assert!(!report.pass);
    }

    #[test]
    fn partition_coverage_is_detected() {
        let planner = EuclidPlanner::new(3, 3).unwrap();
        let mut pairs = Vec::new();
        for cpa in 1..=3 {
            for cpb in 1..=3 {
                pairs.push((
                    crate::euclid::config_with_cp(3, 3, cpa),
                    crate::euclid::config_with_cp(3, 3, cpb),
                ));
            }
        }
        let report = check_partition(&planner, &pairs).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.histogram.len(), 5); // labels 2..=6

        // generic pairs only ever hit the top label
        let mut rng = seeded_rng(3);
        let generic: Vec<_> = (0..10)
            .map(|_| (random_config(3, 3, &mut rng), random_config(3, 3, &mut rng)))
            .collect();
        let report = check_partition(&planner, &generic).unwrap();
        assert!(!report.pass);
        assert_eq!(report.histogram.keys().copied().collect::<Vec<_>>(), vec![6]);
        assert_eq!(report.missing, vec![2, 3, 4, 5]);
    }

    #[test]
    fn deviation_of_a_trajectory_with_itself_is_zero() {
        let a = Configuration::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = Configuration::from_rows(&[[0.0, 3.0], [1.0, 3.0]]).unwrap();
        let traj = Trajectory::linear(a, b).unwrap();
        assert_eq!(sup_deviation(&traj, &traj, 32).unwrap(), 0.0);
    }

    #[test]
    fn probes_within_a_label_class_stay_close() {
        let planner = EuclidPlanner::new(3, 2).unwrap();
        let mut rng = seeded_rng(5);
        let a = random_config(3, 2, &mut rng);
        let b = random_config(3, 2, &mut rng);
        let report = continuity_probe(&planner, &a, &b, 1e-6, 50, 64, &mut rng).unwrap();
        assert!(report.kept >= 45, "{report:?}");
        assert!(report.max_deviation <= 1e-3, "{report:?}");
    }

    #[test]
    fn tree_checks_accept_a_valid_plan() {
        let tree = Tree::example_h();
        let mut rng = seeded_rng(23);
        let a = random_tree_config(&tree, 3, &mut rng);
        let b = random_tree_config(&tree, 3, &mut rng);
        let (traj, _) = tree.plan(&a, &b).unwrap();
        let report = check_tree_trajectory(&tree, &traj, &a, &b, 1500).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.endpoint_error, 0.0);
    }

    #[test]
    fn random_configs_are_well_separated() {
        let mut rng = seeded_rng(1);
        for _ in 0..20 {
            let c = random_config(2, 4, &mut rng);
            assert_eq!(c.dim(), 2);
            assert_eq!(c.n_points(), 4);
            assert!(c.min_separation() >= 0.05);
        }
    }
}
