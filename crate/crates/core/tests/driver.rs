use std::path::Path;
use std::process::Command;

use unsatflow::driver::*;
use unsatflow::verification::{report_table, ErrorReport};

fn quick(cfg: &ScenarioConfig) -> RunArtifacts {
    run_scenario(cfg, &RunOptions::default()).unwrap()
}

fn without_cpu(csv: &str) -> Vec<String> {
    // cpu_s is the last column of every table the driver writes
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_owned()).collect()
}

fn without_cpu_json(log: &str) -> Vec<serde_json::Value> {
    log.lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if let Some(obj) = v.as_object_mut() {
                obj.remove("cpu_s");
            }
            v
        })
        .collect()
}

#[test]
fn repeated_runs_write_identical_outputs() {
    let mut cfg = presets::green_ampt_test1(8, 0.05, "bdf2");
    cfg.t_final = 0.5;
    cfg.output.mass_times = vec![0.25, 0.5];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let opts = RunOptions {
            out_dir: Some(d.path().to_path_buf()),
            snapshots: Some(2),
        };
        run_scenario(&cfg, &opts).unwrap();
    }
    let read = |d: &Path, f: &str| std::fs::read_to_string(d.join(format!("{}_{f}", cfg.name))).unwrap();
    let (a, b) = (dirs[0].path(), dirs[1].path());
    assert_eq!(without_cpu(&read(a, "metrics.csv")), without_cpu(&read(b, "metrics.csv")));
    assert_eq!(read(a, "mass.csv"), read(b, "mass.csv"));
    assert_eq!(without_cpu_json(&read(a, "log.jsonl")), without_cpu_json(&read(b, "log.jsonl")));
    assert_eq!(read(a, "000010.vtk"), read(b, "000010.vtk"));
}

#[test]
fn passive_solute_leaves_flow_untouched() {
    let mut cfg = presets::salt_transport(40, 1e-3);
    cfg.t_final = 0.02;
    let with = quick(&cfg);
    cfg.solute = None;
    let without = quick(&cfg);
    assert_eq!(with.flow, without.flow);
    assert_eq!(with.flow_stats, without.flow_stats);
    assert!(with.solute.is_some() && without.solute.is_none());
}

#[test]
fn strategy_windows() {
    let b = Strategy::B.window(8.0);
    assert_eq!((b.start, b.end), (2.0, 6.0));
    assert!(b.contains(2.0) && b.contains(6.0));
    assert!(!b.contains(1.999) && !b.contains(6.001));
    let a = Strategy::A.window(8.0);
    assert!(a.contains(1e-9) && !a.contains(4.001));
    let c = Strategy::C.window(8.0);
    assert_eq!((c.start, c.end), (1.0, 5.0));
    assert_eq!("b".parse::<Strategy>().unwrap(), Strategy::B);
    assert!("D".parse::<Strategy>().is_err());

    let base = presets::fertigation(10, 5e-4, 0.0, 1000.0);
    let cfg = strategy_config(Strategy::B, &base).unwrap();
    let spec = cfg.solute.as_ref().unwrap();
    let on_tag: Vec<_> = spec.bc.iter().filter(|bc| bc.tag() == presets::TAG_SOURCE).collect();
    assert_eq!(on_tag.len(), 1);
    assert!(matches!(
        on_tag[0],
        SoluteBcSpec::Concentration { value, window: Some(w), .. } if *value == 1000.0 && *w == b
    ));
    assert_eq!(cfg.output.snapshot_times, vec![6.0]);
}

#[test]
fn solute_stays_zero_before_the_window_opens() {
    let base = presets::fertigation(10, 5e-4, 0.0, 1000.0);
    let mut cfg = strategy_config(Strategy::B, &base).unwrap();
    cfg.t_final = 0.02;
    let r = quick(&cfg);
    assert!(r.solute.unwrap().c.iter().all(|&c| c == 0.0));

    let mut cfg = strategy_config(Strategy::A, &base).unwrap();
    cfg.t_final = 0.02;
    let r = quick(&cfg);
    assert!(r.solute.unwrap().c.iter().any(|&c| c > 0.0));
}

#[test]
fn zero_applied_concentration_gives_zero_fields() {
    let mut cfg = presets::fertigation(10, 5e-4, 0.0, 0.0);
    cfg.t_final = 0.02;
    cfg.output.snapshots = 3;
    let r = quick(&cfg);
    for s in &r.snapshots {
        assert!(s.c.as_ref().unwrap().iter().all(|&c| c == 0.0));
    }
}

#[test]
fn sweep_needs_two_levels() {
    let cfg = presets::green_ampt_test1(8, 0.05, "silf2");
    let levels = ["8@0.05".parse::<SweepLevel>().unwrap()];
    let err = run_convergence_sweep(&cfg, &levels, &RunOptions::default(), false).unwrap_err();
    assert!(matches!(err, ScenarioError::Invalid { ref field, .. } if field == "levels"));
    assert_eq!(
        "25x20@0.01".parse::<SweepLevel>().unwrap(),
        SweepLevel { nx: 25, nz: 20, dt: 0.01 }
    );
    assert!("25x@0.01".parse::<SweepLevel>().is_err());
}

#[test]
fn sweep_orders_on_a_short_run() {
    let mut cfg = presets::green_ampt_test1(6, 0.04, "silf2");
    cfg.t_final = 0.4;
    let levels: Vec<SweepLevel> = ["6@0.04", "12@0.02"].iter().map(|s| s.parse().unwrap()).collect();
    let serial = run_convergence_sweep(&cfg, &levels, &RunOptions::default(), false).unwrap();
    let parallel = run_convergence_sweep(&cfg, &levels, &RunOptions::default(), true).unwrap();
    assert_eq!(serial.reports.len(), 2);
    assert!(serial.reports[0].order.is_none() && serial.reports[1].order.is_some());
    for (a, b) in serial.reports.iter().zip(&parallel.reports) {
        assert_eq!(a.l2_psi, b.l2_psi);
    }
}

#[test]
fn report_table_recovers_second_order() {
    let report = |scheme: &str, l2_psi: f64| ErrorReport {
        scheme: scheme.to_owned(),
        h: 1.0,
        dt: 1.0,
        l2_psi,
        l2_s: l2_psi,
        order: None,
        cpu_s: 0.0,
    };
    let mut reports = vec![report("BDF2", 1.0), report("BDF2", 0.25), report("BDF2", 0.0625), report("CN2", 0.5)];
    let table = report_table(&mut reports, SWEEP_REFINEMENT);
    assert_eq!(table.len(), 4);
    for r in &reports[1..3] {
        assert!((r.order.unwrap() - 2.0).abs() < 1e-12);
    }
    assert!(reports[3].order.is_none());
}

#[test]
fn shipped_configs_match_presets() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("test1.toml", presets::green_ampt_test1(12, 0.02, "silf2")),
        ("test2.toml", presets::green_ampt_test2(12, 0.02, "silf2")),
        ("lshape.toml", presets::lshape(75, 160.0)),
        ("salt.toml", presets::salt_transport(40, 1e-3)),
        ("fertigation.toml", presets::fertigation(41, 5e-4, 247.5, 1000.0)),
    ];
    for (file, preset) in cases {
        let cfg = ScenarioConfig::load(dir.join(file)).unwrap();
        assert_eq!(cfg, preset, "{file}");
    }
}

#[test]
fn invalid_configs_name_the_field() {
    let mut cfg = presets::salt_transport(40, 1e-3);
    cfg.t_final = -1.0;
    assert!(matches!(cfg.validate(), Err(ScenarioError::Invalid { ref field, .. }) if field == "t_final"));
    let mut cfg = presets::green_ampt_test1(8, 0.05, "silf2");
    cfg.scheme = "rk4".to_owned();
    assert!(matches!(run_scenario(&cfg, &RunOptions::default()), Err(ScenarioError::Invalid { ref field, .. }) if field == "scheme"));
}

#[test]
fn cli_prints_presets_and_runs_them() {
    let exe = env!("CARGO_BIN_EXE_unsatflow");
    let out = Command::new(exe).args(["preset", "test1"]).output().unwrap();
    assert!(out.status.success());
    let mut cfg = ScenarioConfig::from_toml_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cfg, presets::green_ampt_test1(12, 0.02, "silf2"));

    let dir = tempfile::tempdir().unwrap();
    cfg.t_final = 0.1;
    let path = dir.path().join("short.toml");
    std::fs::write(&path, cfg.to_toml_string().unwrap()).unwrap();
    let out_dir = dir.path().join("out");
    let run = Command::new(exe)
        .arg("--out-dir")
        .arg(&out_dir)
        .args(["--snapshots", "1", "run"])
        .arg(&path)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(run.status.success());
    assert!(String::from_utf8_lossy(&run.stdout).contains("l2_psi"));
    assert!(out_dir.join("green_ampt_test1_metrics.csv").exists());
    assert!(out_dir.join("green_ampt_test1_000005.vtk").exists());

    let missing = Command::new(exe).args(["run", "does/not/exist.toml"]).output().unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
}
