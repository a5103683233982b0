use std::fs;
use std::path::PathBuf;

use chronoscope::analytic_predictions::{bgue_curves, BgueSpec};
use chronoscope::experiment_harness::{
    load_bundle, run, run_to_path, summarize, ExperimentConfig, ExperimentId, Reduction, TimeGrid,
};
use chronoscope::model_library::ModelSpec;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chronoscope-harness-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir.join(format!("{name}.csv"))
}

fn small(e: ExperimentId) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(e);
    c.samples = Some(3);
    c.master_seed = 11;
    c
}

#[test]
fn qfi_scan_schema_and_row_count() {
    let mut c = small(ExperimentId::QfiScan);
    c.n = vec![6];
    c.n_a = vec![1, 2, 3, 4, 5];
    c.t_grid = Some(TimeGrid::range(0.0, 2.0, 0.5));
    let b = run(&c).unwrap();
    for col in ["f_a", "f_ent", "f_rot", "f_comp"] {
        assert!(b.column(col).is_some(), "{col}");
    }
    assert_eq!(b.rows.len(), 3 * 5 * 5);
    let (fa, fe, fr) = (b.column("f_a").unwrap(), b.column("f_ent").unwrap(), b.column("f_rot").unwrap());
    for r in &b.rows {
        assert!((r.values[fa] - r.values[fe] - r.values[fr]).abs() < 1e-8 * r.values[fa].max(1.0));
    }
    let s = summarize(&b, Reduction::Mean, [1.0, 2.0]).unwrap();
    assert_eq!(s.collapse.len(), 5);
}

#[test]
fn same_config_gives_identical_payload() {
    let p1 = scratch("det1");
    let p2 = scratch("det2");
    let mut c = small(ExperimentId::HaarSat);
    c.n = vec![6];
    c.n_a = vec![2, 4];
    c.out = Some(p1.clone());
    run_to_path(&c).unwrap();
    c.out = Some(p2.clone());
    run_to_path(&c).unwrap();
    let a = fs::read_to_string(&p1).unwrap();
    let b = fs::read_to_string(&p2).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a.replace(p1.to_str().unwrap(), ""), b.replace(p2.to_str().unwrap(), ""));
}

#[test]
fn interrupted_run_resumes_to_the_same_file() {
    let p = scratch("resume");
    let mut c = small(ExperimentId::QfiScan);
    c.n = vec![5];
    c.n_a = vec![2, 3];
    c.samples = Some(4);
    c.t_grid = Some(TimeGrid::range(0.0, 1.0, 0.5));
    c.out = Some(p.clone());
    run_to_path(&c).unwrap();
    let full = fs::read_to_string(&p).unwrap();

    // keep two complete tasks plus a torn line, mark the run unfinished
    let lines: Vec<&str> = full.lines().collect();
    let body_start = lines.iter().position(|l| l.starts_with("n,")).unwrap() + 1;
    let mut cut: String = lines[..body_start + 12].join("\n");
    cut.push_str("\n5,2,2,11,");
    fs::write(&p, cut).unwrap();
    let meta = chronoscope::experiment_harness::meta_path(&p);
    let side = fs::read_to_string(&meta).unwrap().replace("\"complete\": true", "\"complete\": false");
    fs::write(&meta, side).unwrap();

    let b = run_to_path(&c).unwrap();
    assert_eq!(b.meta.resumed_tasks, 2);
    assert_eq!(fs::read_to_string(&p).unwrap(), full);
    assert_eq!(load_bundle(&p).unwrap().rows, b.rows);

    let mut other = c.clone();
    other.master_seed = 12;
    let err = run_to_path(&other).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn bgue_rows_are_the_analytic_curves() {
    let mut c = small(ExperimentId::Bgue);
    c.n = vec![7];
    c.n_a = vec![2];
    c.t_grid = Some(TimeGrid::range(0.0, 1.0, 0.25));
    let b = run(&c).unwrap();
    let bundle = ModelSpec::default().build(7).unwrap();
    let spec = BgueSpec::new(&bundle, 2, 11).unwrap();
    let curves = bgue_curves(&spec, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
    let fs_col = b.column("f_s").unwrap();
    let rot = b.column("f_rot").unwrap();
    for (r, q) in b.rows.iter().zip(&curves) {
        assert_eq!(r.values[fs_col], q.f_s);
        assert_eq!(r.values[rot], q.f_rot);
    }
}

#[test]
fn every_experiment_runs_at_toy_size() {
    use ExperimentId::*;
    for e in ExperimentId::ALL {
        let mut c = small(e);
        match e {
            QfiScan | XxzScan | CfiScan | HaarSat => {
                c.n = vec![5];
                c.n_a = vec![2, 4];
                c.t_grid = Some(TimeGrid::Points(vec![0.0, 1.0]));
            }
            Lindblad => {
                c.n_a = vec![2];
                c.t_grid = Some(TimeGrid::range(0.0, 0.5, 0.25));
            }
            Mle | Discriminate => {
                c.n = vec![4];
                c.n_a = vec![4];
                c.params.t0 = 1.0;
                c.t_grid = Some(TimeGrid::range(0.0, 2.0, 0.05));
            }
            Bgue => {
                c.n = vec![5];
                c.n_a = vec![1];
                c.t_grid = Some(TimeGrid::Points(vec![0.0, 1.0]));
            }
            Tracedist => {
                c.n = vec![4];
                c.n_a = vec![2];
                c.samples = Some(200);
            }
            Fidelity => {
                c.n = vec![4];
                c.n_a = vec![1, 3];
            }
            Blackhole => {}
        }
        let b = run(&c).unwrap_or_else(|err| panic!("{e}: {err}"));
        assert!(!b.rows.is_empty(), "{e}");
        assert!(b.rows.iter().all(|r| r.values.len() == b.columns.len()), "{e}");
        if e == Mle {
            assert_eq!(b.nested.len(), b.rows.len());
        }
    }
}

#[test]
fn shipped_recipes_resolve() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let c = ExperimentConfig::from_path(&path).unwrap();
            c.resolve().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= ExperimentId::ALL.len());
}
