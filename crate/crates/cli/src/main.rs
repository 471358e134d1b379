//! Command-line front end for the planners and rule-count calculators.
//!
//! JSON-valued arguments (`--start`, `--goal`, `--tree`, `--base`) accept
//! either inline JSON (anything starting with `[` or `{`) or a path to a
//! JSON file. Exit codes: 0 on success, 1 when a verification fails, 2 for
//! usage and precondition errors.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use tcmotion::geometry::trajectory_csv;
use tcmotion::sphere::SpherePoint;
use tcmotion::tc::{
    control_strategy_counts, tc_euclid_config, tc_s_euclid, tc_sphere_product, tc_surface,
    tc_tree_config,
};
use tcmotion::tree::TreePointWire;
use tcmotion::verify::{
    check_tree_trajectory, check_trajectory, random_config, random_tree_config, seeded_rng,
    ConfigPlanner,
};
use tcmotion::{
    build_qgamma, Configuration, EuclidEvenPlanner, EuclidPlanner, SpherePlanner, Tree,
    TreeConfiguration, TreeTrajectory,
};

#[derive(Parser)]
#[command(
    name = "tcmotion",
    version,
    about = "Collision-free motion planners with minimal rule counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a collision-free trajectory between two configurations
    Plan(PlanArgs),
    /// Check planned trajectories: endpoints, separation, radial drift
    Verify(VerifyArgs),
    /// Minimal rule counts for the supported spaces
    #[command(subcommand)]
    Tc(TcCommand),
    /// Exchange complex of a tree: arcs, involution, loop count
    Qgamma(QgammaArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlannerKind {
    /// Straight-axis planner for points in d-space (any d >= 2)
    Euclid,
    /// Direction-line planner for even d with one fewer rule
    EuclidEven,
    /// Great-circle planner for a single point on a sphere
    Sphere,
    /// Root-edge planner for points on a metric tree
    Tree,
}

impl PlannerKind {
    fn name(self) -> &'static str {
        match self {
            PlannerKind::Euclid => "euclid",
            PlannerKind::EuclidEven => "euclid-even",
            PlannerKind::Sphere => "sphere",
            PlannerKind::Tree => "tree",
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    /// Planner family to run
    #[arg(long, value_enum)]
    planner: PlannerKind,
    /// Start configuration (inline JSON or path)
    #[arg(long)]
    start: String,
    /// Goal configuration (inline JSON or path)
    #[arg(long)]
    goal: String,
    /// Tree for the tree planner: "y", "h", inline JSON, or path
    #[arg(long)]
    tree: Option<String>,
    /// Base-point override for the sphere planner (inline JSON or path)
    #[arg(long)]
    base: Option<String>,
    /// Sample count when writing the trajectory out
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Write the sampled trajectory here (CSV; JSON for the tree planner)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Planner family to check
    #[arg(long, value_enum)]
    planner: PlannerKind,
    /// Start configuration (inline JSON or path); omit with --random
    #[arg(long)]
    start: Option<String>,
    /// Goal configuration (inline JSON or path); omit with --random
    #[arg(long)]
    goal: Option<String>,
    /// Tree for the tree planner: "y", "h", inline JSON, or path
    #[arg(long)]
    tree: Option<String>,
    /// Trajectory samples per check
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Check this many random pairs instead of one given pair
    #[arg(long)]
    random: Option<usize>,
    /// Dimension for random pairs (sphere planner: the sphere dimension)
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Points per configuration for random pairs
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// RNG seed for random pairs
    #[arg(long, env = "TCMOTION_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum TcCommand {
    /// n ordered points in d-dimensional space
    Euclid {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
    },
    /// n ordered points on a metric tree
    Tree {
        /// "y", "h", inline JSON, or path
        #[arg(long)]
        tree: String,
        #[arg(long)]
        n: usize,
    },
    /// Product of equal-dimensional spheres
    SphereProduct {
        /// Number of sphere factors
        #[arg(long)]
        factors: usize,
        /// Dimension of each sphere
        #[arg(long)]
        sphere_dim: usize,
    },
    /// Planning through s-2 prescribed intermediate stops
    SEuclid {
        /// Total stop count s >= 2 (start, intermediates, goal)
        #[arg(long)]
        stages: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
    },
    /// Closed surface of the given genus
    Surface {
        #[arg(long)]
        genus: usize,
        /// Treat the surface as non-orientable
        #[arg(long)]
        non_orientable: bool,
    },
    /// Naive versus chained rule-table sizes for a staged controller
    Strategy {
        /// Rules available per stage
        #[arg(long)]
        rules: usize,
        /// Number of stages
        #[arg(long)]
        stages: usize,
    },
}

#[derive(Args)]
struct QgammaArgs {
    /// "y", "h", inline JSON, or path
    #[arg(long)]
    tree: String,
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Plan(args) => run_plan(args),
        Command::Verify(args) => run_verify(args),
        Command::Tc(args) => run_tc(args),
        Command::Qgamma(args) => run_qgamma(args),
    }
}

/// Inline JSON (starts with `[` or `{`) or the contents of the named file.
fn json_text(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

fn load_config(arg: &str) -> Result<Configuration> {
    let text = json_text(arg)?;
    serde_json::from_str(&text).with_context(|| format!("parsing configuration from {arg}"))
}

fn load_sphere_point(arg: &str) -> Result<SpherePoint> {
    let text = json_text(arg)?;
    let coords: Vec<f64> =
        serde_json::from_str(&text).with_context(|| format!("parsing sphere point from {arg}"))?;
    Ok(SpherePoint::from_slice(&coords)?)
}

fn load_tree(arg: &str) -> Result<Tree> {
    match arg {
        "y" | "Y" => Ok(Tree::example_y()),
        "h" | "H" => Ok(Tree::example_h()),
        _ => {
            let text = json_text(arg)?;
            serde_json::from_str(&text).with_context(|| format!("parsing tree from {arg}"))
        }
    }
}

fn load_tree_config(tree: &Tree, arg: &str) -> Result<TreeConfiguration> {
    let text = json_text(arg)?;
    let wire: Vec<TreePointWire> = serde_json::from_str(&text)
        .with_context(|| format!("parsing tree configuration from {arg}"))?;
    Ok(tree.config_from_wire(&wire)?)
}

fn require_tree(arg: &Option<String>) -> Result<Tree> {
    let arg = arg
        .as_deref()
        .ok_or_else(|| anyhow!("--tree is required for the tree planner"))?;
    load_tree(arg)
}

#[derive(Serialize)]
struct PlanMeta {
    planner: &'static str,
    dim: usize,
    n: usize,
    region: serde_json::Value,
    pieces: usize,
    endpoint_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

fn write_output(path: &Option<PathBuf>, contents: &str) -> Result<Option<String>> {
    match path {
        None => Ok(None),
        Some(p) => {
            std::fs::write(p, contents).with_context(|| format!("writing {}", p.display()))?;
            Ok(Some(p.display().to_string()))
        }
    }
}

fn tree_trajectory_json(
    tree: &Tree,
    traj: &TreeTrajectory,
    samples: usize,
) -> Result<String> {
    let samples = samples.max(2);
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let c = traj.evaluate(t)?;
        rows.push(json!({ "t": t, "points": tree.config_to_wire(&c)? }));
    }
    Ok(serde_json::to_string_pretty(&rows)?)
}

fn run_plan(args: PlanArgs) -> Result<i32> {
    let meta = match args.planner {
        PlannerKind::Euclid | PlannerKind::EuclidEven => {
            let a = load_config(&args.start)?;
            let b = load_config(&args.goal)?;
            let (traj, region) = if args.planner == PlannerKind::Euclid {
                EuclidPlanner::new(a.dim(), a.n_points())?.plan(&a, &b)?
            } else {
                EuclidEvenPlanner::new(a.dim(), a.n_points())?.plan(&a, &b)?
            };
            let err = traj
                .evaluate(0.0)?
                .max_point_distance(&a)
                .max(traj.evaluate(1.0)?.max_point_distance(&b));
            let output = write_output(&args.output, &trajectory_csv(&traj, args.samples)?)?;
            PlanMeta {
                planner: args.planner.name(),
                dim: a.dim(),
                n: a.n_points(),
                region: json!(region.0),
                pieces: traj.pieces().len(),
                endpoint_error: err,
                output,
            }
        }
        PlannerKind::Sphere => {
            let a = load_sphere_point(&args.start)?;
            let b = load_sphere_point(&args.goal)?;
            let mut planner = SpherePlanner::new(a.sphere_dim())?;
            if let Some(base) = &args.base {
                planner = planner.with_base_point(load_sphere_point(base)?)?;
            }
            let (traj, region) = planner.plan(&a, &b)?;
            let err = (traj.evaluate(0.0)?.point(0) - a.coords())
                .norm()
                .max((traj.evaluate(1.0)?.point(0) - b.coords()).norm());
            let output = write_output(&args.output, &trajectory_csv(&traj, args.samples)?)?;
            PlanMeta {
                planner: args.planner.name(),
                dim: a.sphere_dim(),
                n: 1,
                region: json!(region.to_string()),
                pieces: traj.pieces().len(),
                endpoint_error: err,
                output,
            }
        }
        PlannerKind::Tree => {
            let tree = require_tree(&args.tree)?;
            let a = load_tree_config(&tree, &args.start)?;
            let b = load_tree_config(&tree, &args.goal)?;
            let (traj, region) = tree.plan(&a, &b)?;
            let err = tcmotion::verify::tree_config_gap(&tree, &traj.evaluate(0.0)?, &a)?
                .max(tcmotion::verify::tree_config_gap(
                    &tree,
                    &traj.evaluate(1.0)?,
                    &b,
                )?);
            let output = write_output(
                &args.output,
                &tree_trajectory_json(&tree, &traj, args.samples)?,
            )?;
            PlanMeta {
                planner: args.planner.name(),
                dim: 1,
                n: a.n_points(),
                region: json!(region.0),
                pieces: traj.pieces().len(),
                endpoint_error: err,
                output,
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&meta)?);
    Ok(0)
}

#[derive(Serialize)]
struct VerifySummary {
    planner: &'static str,
    pairs: usize,
    samples: usize,
    /// Largest endpoint error seen, as a multiple of its tolerance.
    worst_endpoint_ratio: f64,
    /// Smallest separation seen, as a multiple of its tolerance (the sphere
    /// planner reports one minus its worst radial drift instead).
    worst_margin: f64,
    all_pass: bool,
}

fn run_verify(args: VerifyArgs) -> Result<i32> {
    let mut rng = seeded_rng(args.seed);
    let mut worst_endpoint = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    let mut all_pass = true;
    let mut pairs = 0usize;

    enum Pair {
        Euclid(Configuration, Configuration),
        Sphere(SpherePoint, SpherePoint),
        Tree(Box<Tree>, TreeConfiguration, TreeConfiguration),
    }

    let mut jobs: Vec<Pair> = Vec::new();
    match (args.random, &args.start, &args.goal) {
        (Some(k), None, None) => {
            let tree = if args.planner == PlannerKind::Tree {
                Some(require_tree(&args.tree)?)
            } else {
                None
            };
            for _ in 0..k {
                jobs.push(match args.planner {
                    PlannerKind::Euclid | PlannerKind::EuclidEven => Pair::Euclid(
                        random_config(args.dim, args.n, &mut rng),
                        random_config(args.dim, args.n, &mut rng),
                    ),
                    PlannerKind::Sphere => {
                        let ambient = args.dim + 1;
                        let draw = |rng: &mut rand_chacha::ChaCha8Rng| loop {
                            let c = random_config(ambient, 1, rng);
                            let v = c.point(0);
                            if v.norm() > 0.1 {
                                return SpherePoint::new(v / v.norm()).expect("unit point");
                            }
                        };
                        Pair::Sphere(draw(&mut rng), draw(&mut rng))
                    }
                    PlannerKind::Tree => {
                        let tree = tree.as_ref().expect("loaded above");
                        let a = random_tree_config(tree, args.n, &mut rng);
                        let b = random_tree_config(tree, args.n, &mut rng);
                        Pair::Tree(Box::new(tree.clone()), a, b)
                    }
                });
            }
        }
        (None, Some(start), Some(goal)) => {
            jobs.push(match args.planner {
                PlannerKind::Euclid | PlannerKind::EuclidEven => {
                    Pair::Euclid(load_config(start)?, load_config(goal)?)
                }
                PlannerKind::Sphere => {
                    Pair::Sphere(load_sphere_point(start)?, load_sphere_point(goal)?)
                }
                PlannerKind::Tree => {
                    let tree = require_tree(&args.tree)?;
                    let a = load_tree_config(&tree, start)?;
                    let b = load_tree_config(&tree, goal)?;
                    Pair::Tree(Box::new(tree), a, b)
                }
            });
        }
        _ => bail!("pass either --start with --goal, or --random <count>"),
    }

    for job in jobs {
        pairs += 1;
        match job {
            Pair::Euclid(a, b) => {
                let report = match args.planner {
                    PlannerKind::Euclid => {
                        let planner = EuclidPlanner::new(a.dim(), a.n_points())?;
                        let (traj, _) = planner.plan_pair(&a, &b)?;
                        check_trajectory(&traj, &a, &b, args.samples)?
                    }
                    _ => {
                        let planner = EuclidEvenPlanner::new(a.dim(), a.n_points())?;
                        let (traj, _) = planner.plan_pair(&a, &b)?;
                        check_trajectory(&traj, &a, &b, args.samples)?
                    }
                };
                worst_endpoint = worst_endpoint.max(report.endpoint_error / report.endpoint_tol);
                worst_margin = worst_margin.min(report.min_separation / report.sep_tol);
                all_pass &= report.pass;
            }
            Pair::Sphere(a, b) => {
                let planner = SpherePlanner::new(a.sphere_dim())?;
                let (traj, _) = planner.plan(&a, &b)?;
                let err = (traj.evaluate(0.0)?.point(0) - a.coords())
                    .norm()
                    .max((traj.evaluate(1.0)?.point(0) - b.coords()).norm());
                let mut drift = 0.0f64;
                for i in 0..=args.samples.max(2) {
                    let t = i as f64 / args.samples.max(2) as f64;
                    drift = drift.max((traj.evaluate(t)?.point(0).norm() - 1.0).abs());
                }
                worst_endpoint = worst_endpoint.max(err / 1e-9);
                worst_margin = worst_margin.min(1.0 - drift);
                all_pass &= err <= 1e-9 && drift <= 1e-9;
            }
            Pair::Tree(tree, a, b) => {
                let (traj, _) = tree.plan(&a, &b)?;
                let report = check_tree_trajectory(&tree, &traj, &a, &b, args.samples)?;
                worst_endpoint = worst_endpoint.max(report.endpoint_error / report.endpoint_tol);
                worst_margin = worst_margin.min(report.min_separation / report.sep_tol);
                all_pass &= report.pass;
            }
        }
    }

    let summary = VerifySummary {
        planner: args.planner.name(),
        pairs,
        samples: args.samples,
        worst_endpoint_ratio: worst_endpoint,
        worst_margin,
        all_pass,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(if all_pass { 0 } else { 1 })
}

fn run_tc(command: TcCommand) -> Result<i32> {
    let value = match command {
        TcCommand::Euclid { dim, n } => tc_euclid_config(dim, n)?,
        TcCommand::Tree { tree, n } => tc_tree_config(&load_tree(&tree)?, n)?,
        TcCommand::SphereProduct {
            factors,
            sphere_dim,
        } => tc_sphere_product(factors, sphere_dim)?,
        TcCommand::SEuclid { stages, dim, n } => tc_s_euclid(stages, dim, n)?,
        TcCommand::Surface {
            genus,
            non_orientable,
        } => tc_surface(genus, !non_orientable)?,
        TcCommand::Strategy { rules, stages } => {
            let (naive, chained) = control_strategy_counts(rules, stages)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "naive": naive, "chained": chained }))?
            );
            return Ok(0);
        }
    };
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(0)
}

fn run_qgamma(args: QgammaArgs) -> Result<i32> {
    let tree = load_tree(&args.tree)?;
    let q = build_qgamma(&tree)?;
    let report = json!({
        "edge_count": q.edge_count(),
        "betti1": q.betti1().ok(),
        "involution": q.involution(),
        "edges": q.edges(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}
