use std::fs;

use edgeplace::format::save_instance;
use edgeplace::harness::{run_experiment, ExperimentPlan, PlanBase, SweepAxis, WeightSpec};
use edgeplace::optimizers::{Algorithm, OptimizerConfig};
use edgeplace::workloads::{generate, load_fixture, GeneratorSpec};

/// Two workflows in a single region, so local sharing is possible.
fn two_workflows() -> GeneratorSpec {
    GeneratorSpec {
        workflows: 2,
        regions: 1,
        cloud_dcs: 1,
        crossregion_ratio: 0.0,
        ..GeneratorSpec::default()
    }
}

fn plan(
    base: PlanBase,
    axis: SweepAxis,
    values: Vec<f64>,
    algorithms: Vec<Algorithm>,
    repeats: usize,
) -> ExperimentPlan {
    ExperimentPlan {
        base,
        axis,
        values,
        algorithms,
        repeats,
        base_seed: 100,
        weights: WeightSpec::default(),
        optimizer: OptimizerConfig::default()
            .with_population(20)
            .with_iterations(60),
        output: None,
    }
}

#[test]
fn single_random_trial_reports_dash() {
    let p = plan(
        PlanBase::Fixture("motivating_example".into()),
        SweepAxis::BandwidthMultiplier,
        vec![1.0],
        vec![Algorithm::Random],
        1,
    );
    let out = run_experiment(&p);
    out.result.unwrap();
    let row = out.csv.lines().nth(2).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(&cells[..4], &["bandwidth_multiplier", "1", "random", "1"]);
    assert_eq!(&cells[8..10], &["-", "-"]);
    assert_eq!(cells[5], "0.00");
}

#[test]
fn bandwidth_sweep_over_generated_workloads() {
    let spec = two_workflows();
    let values = vec![0.5, 0.8, 1.5, 3.0, 5.0];
    let p = plan(
        PlanBase::Generator(spec),
        SweepAxis::BandwidthMultiplier,
        values.clone(),
        vec![Algorithm::DeDpso],
        2,
    );
    let table = run_experiment(&p).result.unwrap();
    assert_eq!(table.cells.len(), 5);
    for (cell, v) in table.cells.iter().zip(&values) {
        assert_eq!(cell.value, *v);
        assert_eq!(cell.reports.len(), 2);
        assert!(cell.t_trans.sd >= 0.0);
    }
}

#[test]
fn doubling_every_link_halves_transfer_time() {
    let dir = tempfile::tempdir().unwrap();
    let inst = load_fixture("motivating_example").unwrap();
    let mut env = inst.env().clone();
    env.scale_bandwidth(2.0);
    let doubled = inst.with_environment(env).unwrap();
    let a = dir.path().join("a.inst");
    let b = dir.path().join("b.inst");
    save_instance(&inst, &a).unwrap();
    save_instance(&doubled, &b).unwrap();

    let weights = WeightSpec {
        w_time: 1.0,
        w_cost: 0.0,
        time_norm: Some(1.0),
        cost_norm: Some(1.0),
    };
    let algorithms = vec![Algorithm::Random, Algorithm::De, Algorithm::DeDpso];
    let run = |path| {
        let mut p = plan(
            PlanBase::Instance(path),
            SweepAxis::EdgeCapacity,
            vec![10.0],
            algorithms.clone(),
            3,
        );
        p.weights = weights;
        run_experiment(&p).result.unwrap()
    };
    let base = run(a);
    let fast = run(b);
    for (x, y) in base.cells.iter().zip(&fast.cells) {
        assert!(
            (x.t_trans.mean - 2.0 * y.t_trans.mean).abs() <= 1e-9 * x.t_trans.mean.max(1.0),
            "{}",
            x.algorithm
        );
        for (rx, ry) in x.reports.iter().zip(&y.reports) {
            assert_eq!(rx.placement.assignment, ry.placement.assignment);
        }
    }
}

#[test]
fn generator_axes_change_the_workload() {
    let spec = two_workflows();
    let p = plan(
        PlanBase::Generator(spec.clone()),
        SweepAxis::WorkflowCount,
        vec![2.0, 4.0],
        vec![Algorithm::Random],
        1,
    );
    let table = run_experiment(&p).result.unwrap();
    let sizes: Vec<usize> = table
        .cells
        .iter()
        .map(|c| c.reports[0].placement.assignment.len())
        .collect();
    assert_eq!(sizes[0], generate(&spec).unwrap().datasets().len());
    assert!(sizes[1] > sizes[0]);

    let p = plan(
        PlanBase::Generator(spec),
        SweepAxis::EdgeDcCount,
        vec![3.0, 5.0],
        vec![Algorithm::Random],
        1,
    );
    let table = run_experiment(&p).result.unwrap();
    let widest = table.cells[1].reports[0]
        .placement
        .assignment
        .iter()
        .max()
        .copied()
        .unwrap();
    assert!(widest < 1 + 5);
    assert_eq!(table.cells.len(), 2);
}

#[test]
fn plan_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.toml");
    fs::write(
        &path,
        r#"
axis = "shared_ratio"
values = [0.1, 0.5]
algorithms = ["de", "ga-dpso"]
repeats = 2

[base.generator]
workflows = 3
"#,
    )
    .unwrap();
    let p = ExperimentPlan::from_toml(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(p.axis, SweepAxis::SharedRatio);
    assert_eq!(p.optimizer, OptimizerConfig::default());
    assert!(ExperimentPlan::from_toml(
        "axis = \"speed\"\nvalues=[1]\nalgorithms=[]\nrepeats=1\n[base]\nfixture=\"x\""
    )
    .is_err());
}
