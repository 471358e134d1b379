use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use tcmotion::sphere::SpherePoint;
use tcmotion::tree::random_tree;
use tcmotion::verify::{random_config, random_tree_config, seeded_rng};
use tcmotion::{build_qgamma, EuclidEvenPlanner, EuclidPlanner, SpherePlanner, Tree};

fn bench_plan_axis(c: &mut Criterion) {
    let mut rng = seeded_rng(0xbe11c);
    let planner = EuclidPlanner::new(3, 5).unwrap();
    let a = random_config(3, 5, &mut rng);
    let b = random_config(3, 5, &mut rng);
    c.bench_function("plan_axis_d3_n5", |bench| {
        bench.iter(|| planner.plan(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_plan_dirline(c: &mut Criterion) {
    let mut rng = seeded_rng(0xbe11d);
    let planner = EuclidEvenPlanner::new(2, 5).unwrap();
    let a = random_config(2, 5, &mut rng);
    let b = random_config(2, 5, &mut rng);
    c.bench_function("plan_dirline_d2_n5", |bench| {
        bench.iter(|| planner.plan(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_plan_sphere(c: &mut Criterion) {
    let planner = SpherePlanner::new(2).unwrap();
    let a = SpherePoint::from_slice(&[0.6, 0.8, 0.0]).unwrap();
    let b = a.antipode();
    c.bench_function("plan_sphere_s2_antipodal", |bench| {
        bench.iter(|| planner.plan(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_plan_tree(c: &mut Criterion) {
    let mut rng = seeded_rng(0xbe11e);
    let tree = Tree::example_h();
    let a = random_tree_config(&tree, 4, &mut rng);
    let b = random_tree_config(&tree, 4, &mut rng);
    c.bench_function("plan_tree_h_n4", |bench| {
        bench.iter(|| tree.plan(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_exchange_complex(c: &mut Criterion) {
    let mut rng = seeded_rng(0xbe11f);
    let tree = random_tree(40, &mut rng);
    c.bench_function("exchange_complex_tree_40", |bench| {
        bench.iter(|| build_qgamma(black_box(&tree)).unwrap())
    });
}

fn bench_evaluate(c: &mut Criterion) {
    let mut rng = seeded_rng(0xbe120);
    let planner = EuclidPlanner::new(3, 5).unwrap();
    let a = random_config(3, 5, &mut rng);
    let b = random_config(3, 5, &mut rng);
    let (traj, _) = planner.plan(&a, &b).unwrap();
    c.bench_function("evaluate_axis_trajectory_256", |bench| {
        bench.iter(|| {
            for i in 0..256 {
                let t = i as f64 / 255.0;
                black_box(traj.evaluate(black_box(t)).unwrap());
            }
        })
    });
}

criterion_group!(
    benches,
    bench_plan_axis,
    bench_plan_dirline,
    bench_plan_sphere,
    bench_plan_tree,
    bench_exchange_complex,
    bench_evaluate
);
criterion_main!(benches);
