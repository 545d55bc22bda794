use lowrank_opt::harness::{
    check_trace, compare, default_suite, read_trace, run, Method, ProblemKind, RunConfig,
};

fn by_name(name: &str) -> RunConfig {
    default_suite()
        .into_iter()
        .find(|c| c.name == name)
        .unwrap()
}

#[test]
fn default_suite_passes_offline_checks() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in default_suite() {
        let out_dir = dir.path().join(&cfg.name);
        let out = run(&cfg, &out_dir).unwrap();
        assert!(
            out.summary.checks.passed(),
            "{}: {:?}",
            cfg.name,
            out.summary.checks
        );
        let (_, rep) = check_trace(&out.trace_path, None).unwrap();
        assert!(rep.passed(), "{}: {:?}", cfg.name, rep.messages);
        assert_eq!(rep.rows, out.summary.iterations);
    }
}

#[test]
fn diag_run_reaches_eckart_young_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&by_name("diag-crfdr"), dir.path()).unwrap();
    assert!((out.summary.final_f - 0.5).abs() <= 1e-6);
    assert_eq!(out.summary.counters.large_svd, 0);
}

#[test]
fn identical_configs_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = by_name("completion-crfdr");
    let a = run(&cfg, &dir.path().join("a")).unwrap();
    let b = run(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(
        std::fs::read(&a.trace_path).unwrap(),
        std::fs::read(&b.trace_path).unwrap()
    );
    assert_eq!(read_trace(&a.trace_path).unwrap(), a.rows);
}

#[test]
fn compare_contrasts_large_svd_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cheap = by_name("completion-crfdr");
    let dense = by_name("completion-rfdr");
    let cmp = compare(&[cheap.clone(), dense], dir.path()).unwrap();
    assert!(cmp.failures.is_empty());
    assert_eq!(cmp.rows[0].large_svd, 0);
    assert!(cmp.rows[1].large_svd >= 1);
    assert!(dir.path().join("comparison.csv").exists());
    assert!(dir.path().join("comparison.txt").exists());

    let twins = compare(&[cheap.clone(), cheap.clone()], &dir.path().join("twins")).unwrap();
    assert_eq!(twins.rows[0], twins.rows[1]);

    assert_eq!(
        compare(std::slice::from_ref(&cheap), dir.path())
            .unwrap_err()
            .exit_code(),
        2
    );
    let other = by_name("approx-rfdr");
    assert_eq!(
        compare(&[cheap, other], dir.path())
            .unwrap_err()
            .exit_code(),
        2
    );
}

#[test]
fn staged_run_records_nondecreasing_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = by_name("diag-rank-increasing");
    assert_eq!(cfg.solver.method, Method::RankIncreasing);
    let out = run(&cfg, dir.path()).unwrap();
    let ranks: Vec<usize> = out.summary.stages.iter().map(|s| s.rank).collect();
    assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
    assert!(out.summary.stages.iter().all(|s| s.met_tolerance));
    assert!(out.summary.final_f <= 0.005 + 1e-6);
}

#[test]
fn tampered_trace_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&by_name("approx-crfdr-row"), dir.path()).unwrap();
    let text = std::fs::read_to_string(&out.trace_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    // Inflate f_next of the first row well above f_base.
    let mut cells: Vec<String> = lines[1].split(',').map(str::to_owned).collect();
    cells[17] = "1e6".into();
    lines[1] = cells.join(",");
    std::fs::write(&out.trace_path, lines.join("\n") + "\n").unwrap();
    let (_, rep) = check_trace(&out.trace_path, None).unwrap();
    assert!(rep.armijo >= 1 && rep.monotone >= 1);
}

#[test]
fn files_problem_resolves_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let spec = lowrank_opt::harness::GenSpec {
        kind: ProblemKind::Completion,
        m: 6,
        n: 5,
        data_rank: 2,
        noise: 0.0,
        mask_density: 0.7,
        seed: 3,
    };
    lowrank_opt::harness::write_problem(&spec, dir.path()).unwrap();
    let cfg_path = dir.path().join("run.json");
    std::fs::write(
        &cfg_path,
        r#"{"name": "files", "problem": {"source": "files", "kind": "completion",
            "target": "target.txt", "mask": "mask.txt"}, "solver": {"rank": 2}}"#,
    )
    .unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    let out = run(&cfg, &dir.path().join("out")).unwrap();
    assert!(out.summary.checks.passed());
    assert!(out.summary.final_f < out.summary.f0);
}
