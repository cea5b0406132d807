use std::process::Command;

use geopriv::dataset::sample_points;
use geopriv::polygon::{convex_hull, jaccard};
use geopriv_bench::data::{collections, namespace, stream_id};
use geopriv_bench::{
    hull_samples, identity_samples, knn_samples, run, write_csv, CellSamples, ExperimentConfig, InputSpec, Mechanism,
    Task,
};

fn small(task: Task) -> ExperimentConfig {
    ExperimentConfig {
        task,
        trials: 5,
        collections: 4,
        seed: 3,
        ..Default::default()
    }
}

fn find<'a>(cells: &'a [CellSamples], mech: Mechanism, n: usize, budget: f64, metric: &str) -> &'a CellSamples {
    cells
        .iter()
        .find(|c| c.mechanism == mech && c.n == n && c.budget == budget && c.metric == metric)
        .unwrap()
}

#[test]
fn zero_noise_identity_has_no_error() {
    let cells = identity_samples(&ExperimentConfig {
        zero_noise: true,
        rho_grid: vec![1e-3],
        n_grid: vec![50, 200],
        ..small(Task::Identity)
    })
    .unwrap();
    assert!(!cells.is_empty());
    for c in &cells {
        assert!(c.values.iter().all(|&v| v == 0.0), "{c:?}");
    }
}

#[test]
fn zero_noise_knn_finds_the_true_neighbours() {
    let cells = knn_samples(&ExperimentConfig {
        zero_noise: true,
        rho_grid: vec![1e-3],
        n_grid: vec![100],
        k_grid: vec![1, 8],
        ..small(Task::Knn)
    })
    .unwrap();
    for c in cells.iter().filter(|c| c.metric == "normalized_distance") {
        assert!(c.values.iter().all(|&v| v == 1.0), "{c:?}");
    }
    for c in cells.iter().filter(|c| c.metric == "excess_distance") {
        assert!(c.values.iter().all(|&v| v == 0.0), "{c:?}");
    }
}

#[test]
fn zero_noise_pch_matches_the_noiseless_anchor_hull() {
    let config = ExperimentConfig {
        zero_noise: true,
        rho_grid: vec![1e-3],
        n_grid: vec![300],
        collections: 2,
        trials: 1,
        ..small(Task::Hull)
    };
    let cells = hull_samples(&config).unwrap();
    // The noiseless ceiling: anchors picked exactly, released exactly.
    let traces = collections(&config, 300).unwrap();
    let inputs: Vec<_> = (0..config.runs())
        .map(|run| {
            let mut rng = geopriv::RandomStream::new(config.seed, stream_id(&[namespace::SAMPLE, 0, run as u64]));
            sample_points(&traces[run % traces.len()], 300, &mut rng).unwrap()
        })
        .collect();
    let c = find(&cells, Mechanism::CgpPch, 300, 1e-3, "jaccard");
    for (run, x) in inputs.iter().enumerate() {
        let sel = geopriv::mechanisms::pch_anchors(
            x,
            &geopriv::mechanisms::PchParams::new(1e-3 / 2.0, config.beta / 2.0),
            &mut geopriv::RandomStream::zero_noise(),
        )
        .unwrap()
        .value;
        let pts: Vec<_> = sel.anchors.iter().map(|&a| x.point2(a)).collect();
        let ceiling = jaccard(
            &convex_hull(&pts).unwrap(),
            &convex_hull(&x.to_points2().unwrap()).unwrap(),
        );
        assert!(
            (c.values[run] - ceiling).abs() < 1e-12,
            "{} vs {ceiling}",
            c.values[run]
        );
    }
    // Zero-noise baselines reproduce the true hull.
    for mech in [Mechanism::GpBasic, Mechanism::CgpBasic] {
        assert!(find(&cells, mech, 300, 1e-3, "jaccard")
            .values
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-12));
    }
}

#[test]
fn hull_jaccard_improves_with_budget() {
    let full = vec![5e-8, 5e-7, 5e-6, 5e-5, 5e-4, 5e-3];
    let cells = hull_samples(&ExperimentConfig {
        rho_grid: full.clone(),
        n_grid: vec![2000],
        trials: 25,
        collections: 1,
        ..small(Task::Hull)
    })
    .unwrap();
    let medians = |mech, grid: &[f64]| -> Vec<f64> {
        grid.iter()
            .map(|&r| find(&cells, mech, 2000, r, "jaccard").median())
            .collect()
    };
    for mech in [Mechanism::GpBasic, Mechanism::CgpBasic] {
        let m = medians(mech, &full);
        assert!(m.windows(2).all(|w| w[1] >= w[0]), "{mech:?}: {m:?}");
    }
    // PCH is checked once the radius inflation is below the data radius;
    // around the crossover its Jaccard can dip slightly on a uniform square.
    for mech in [Mechanism::GpPch, Mechanism::CgpPch] {
        let m = medians(mech, &full[3..]);
        assert!(m.windows(2).all(|w| w[1] >= w[0]), "{mech:?}: {m:?}");
    }
}

#[test]
fn baselines_degrade_with_n_while_pch_holds() {
    let ns = vec![2000, 4096, 8192];
    let cells = hull_samples(&ExperimentConfig {
        rho_grid: vec![5e-4],
        n_grid: ns.clone(),
        trials: 25,
        collections: 1,
        ..small(Task::Hull)
    })
    .unwrap();
    let j = |mech, n| find(&cells, mech, n, 5e-4, "jaccard").mean();
    for mech in [Mechanism::GpBasic, Mechanism::CgpBasic] {
        assert!(j(mech, 8192) < j(mech, 2000), "{mech:?}");
    }
    for mech in [Mechanism::GpPch, Mechanism::CgpPch] {
        let base = j(mech, 2000);
        for &n in &ns[1..] {
            assert!(
                (j(mech, n) - base).abs() <= 0.1 * base,
                "{mech:?} n={n}: {} vs {base}",
                j(mech, n)
            );
        }
    }
}

#[test]
fn cgp_basic_knn_error_is_flat_in_k() {
    let cells = knn_samples(&ExperimentConfig {
        rho_grid: vec![0.01],
        n_grid: vec![1024],
        k_grid: vec![16, 64],
        trials: 25,
        collections: 1,
        ..small(Task::Knn)
    })
    .unwrap();
    let excess = |k| {
        cells
            .iter()
            .find(|c| c.mechanism == Mechanism::CgpBasic && c.k == Some(k) && c.metric == "excess_distance")
            .unwrap()
            .mean()
    };
    let ratio = excess(64) / excess(16);
    assert!((0.5..2.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn walk_input_runs_every_task() {
    for task in [Task::Identity, Task::Knn, Task::Hull] {
        let rows = run(&ExperimentConfig {
            input: InputSpec::parse("synthetic:walk"),
            rho_grid: vec![1e-3],
            n_grid: vec![200],
            k_grid: vec![4],
            trials: 2,
            collections: 2,
            ..small(task)
        })
        .unwrap();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.mean.is_finite()), "{task:?}");
    }
}

#[test]
fn trace_directory_input_is_loaded() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::new();
    for i in 0..400 {
        let t = i as f64 / 400.0;
        body.push_str(&format!(
            "{} {} 0 {}\n",
            37.7 + 0.05 * t,
            -122.45 + 0.05 * (6.0 * t).sin(),
            1_211_000_000 - i
        ));
    }
    std::fs::write(dir.path().join("new_abboip.txt"), body).unwrap();
    let rows = run(&ExperimentConfig {
        input: InputSpec::Path(dir.path().to_path_buf()),
        rho_grid: vec![1e-3],
        n_grid: vec![100],
        trials: 2,
        collections: 1,
        ..small(Task::Hull)
    })
    .unwrap();
    assert!(rows.iter().all(|r| r.n == Some(100) && r.mean.is_finite()));
}

#[test]
fn csv_output_is_deterministic_and_sorted() {
    let config = ExperimentConfig {
        rho_grid: vec![1e-3, 1e-2],
        n_grid: vec![64],
        k_grid: vec![2, 4],
        ..small(Task::Knn)
    };
    let render = || {
        let mut buf = Vec::new();
        write_csv(&mut buf, &run(&config).unwrap()).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let a = render();
    assert_eq!(a, render());
    let mut lines = a.lines();
    assert_eq!(
        lines.next(),
        Some("task,mechanism,n,budget,k,metric,mean,p25,p75,trials")
    );
    assert_eq!(lines.count(), 4 * 2 * 2 * 2);
}

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geopriv-bench"))
}

#[test]
fn verify_passes_and_tampering_fails() {
    let ok = bench()
        .args(["verify", "--verify-samples", "100000", "--verify-mean-samples", "20000"])
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert!(text
        .lines()
        .filter(|l| l.contains(",passed,"))
        .all(|l| l.contains(",passed,1.0,")));
    for tamper in ["gp-tail", "cgp-tail", "laplace-sum-pdf"] {
        let bad = bench()
            .args([
                "verify",
                "--verify-samples",
                "100000",
                "--verify-mean-samples",
                "20000",
                "--tamper",
                tamper,
            ])
            .output()
            .unwrap();
        assert_eq!(bad.status.code(), Some(1), "tamper {tamper}");
    }
}

#[test]
fn cli_rejects_bad_arguments() {
    let out = bench().args(["identity", "--rho-grid", "-1"]).output().unwrap();
    assert!(!out.status.success());
    let out = bench()
        .args(["identity", "--rho-grid", "0.1", "--eps-grid", "0.1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
