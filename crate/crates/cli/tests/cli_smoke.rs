//! End-to-end exercises of the `fabtest` binary: exit codes, determinism,
//! config merging, and the full fit/test/report pipeline on the bundled
//! toy tensor. Every output table is re-read through its own loader.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fabtest::io;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fabtest")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy.csv")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary must launch")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_exit(out: &Output, code: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{what}: expected exit {code}, got {:?}; stderr: {}",
        out.status.code(),
        stderr_of(out)
    );
}

/// Deterministic effect summaries keyed to the toy tensor's entities.
fn toy_summaries() -> String {
    let mut s = String::from("id,row,col,ybar,s,n\n");
    let mut k = 0u32;
    for i in 1..=12 {
        for j in 1..=5 {
            k += 1;
            let ybar = (Real::from(k) * 0.7).sin() * 0.8;
            let sd = 0.8 + 0.4 * (Real::from(k) * 1.3).cos().abs();
            s.push_str(&format!("h{k},s{i:02},m{j},{ybar:.6},{sd:.6},6\n"));
        }
    }
    s
}

type Real = f64;

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["--help"],
        vec!["-V"],
        vec!["simulate", "--help"],
        vec!["fit-tensor", "--help"],
        vec!["fab-test", "--help"],
        vec!["report", "--help"],
    ] {
        let out = run_in(dir.path(), &args);
        assert_exit(&out, 0, &format!("{args:?}"));
        assert!(!stdout_of(&out).is_empty(), "{args:?} must print to stdout");
    }
    let help = run_in(dir.path(), &["--help"]);
    assert!(
        stdout_of(&help).contains("Usage"),
        "help text must include a usage line"
    );
}

#[test]
fn unknown_flags_print_usage_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["--bogus"],
        vec!["simulate", "--null", "--bogus", "--out-prefix", "x"],
        vec!["frobnicate"],
    ] {
        let out = run_in(dir.path(), &args);
        assert_exit(&out, 1, &format!("{args:?}"));
        let err = stderr_of(&out);
        assert!(
            err.contains("Usage") || err.contains("unexpected"),
            "{args:?} must print usage guidance, got: {err}"
        );
        assert!(stdout_of(&out).is_empty(), "{args:?} must not print to stdout");
    }
}

#[test]
fn validation_failures_exit_one_with_a_reason() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (
            vec!["simulate", "--out-prefix", "x"],
            "exactly one of --null or --power",
        ),
        (vec!["simulate", "--null"], "--out-prefix is required"),
        (
            vec![
                "simulate",
                "--power",
                "--tau2-grid",
                "1,zebra",
                "--out-prefix",
                "x",
            ],
            "not a number",
        ),
        (vec!["fab-test", "--out", "r.csv"], "--summaries is required"),
        (vec!["report", "--out-prefix", "x"], "--results and/or --sim-prefix"),
        (
            vec![
                "fit-tensor",
                "--input",
                "nowhere.csv",
                "--likelihood",
                "expr:normal",
                "--out-prefix",
                "x",
            ],
            "name=kind",
        ),
        (
            vec![
                "fit-tensor",
                "--input",
                "nowhere.csv",
                "--likelihood",
                "expr=cauchy",
                "--out-prefix",
                "x",
            ],
            "unknown likelihood",
        ),
    ];
    for (args, needle) in cases {
        let out = run_in(dir.path(), &args);
        assert_exit(&out, 1, &format!("{args:?}"));
        let err = stderr_of(&out);
        assert!(
            err.contains(needle),
            "{args:?} stderr must mention {needle:?}, got: {err}"
        );
    }
}

#[test]
fn alpha_outside_the_open_unit_interval_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.csv"), toy_summaries()).unwrap();
    for alpha in ["0", "1", "1.5", "-0.2"] {
        let out = run_in(
            dir.path(),
            &[
                "fab-test",
                "--summaries",
                "s.csv",
                "--factors-prefix",
                "missing",
                "--alpha",
                alpha,
                "--out",
                "r.csv",
            ],
        );
        assert_exit(&out, 1, &format!("alpha {alpha}"));
        assert!(
            stderr_of(&out).contains("--alpha"),
            "alpha {alpha} must be named in the error"
        );
    }
}

#[test]
fn config_files_supply_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    // Baseline: everything on the command line.
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--null", "--datasets", "4", "--seed", "21", "--out-prefix", "flags",
        ],
    );
    assert_exit(&out, 0, "flag-only run");

    // Same settings split between a config file and an overriding flag.
    std::fs::write(
        dir.path().join("sim.conf"),
        "# null-study settings\ndatasets = 9\nseed = 21\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--null",
            "--datasets",
            "4",
            "--out-prefix",
            "mixed",
            "--config",
            "sim.conf",
        ],
    );
    assert_exit(&out, 0, "config-plus-flag run");
    for suffix in ["fdr", "ks", "curves", "hist"] {
        let a = std::fs::read(dir.path().join(format!("flags_{suffix}.csv"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("mixed_{suffix}.csv"))).unwrap();
        assert_eq!(
            a, b,
            "{suffix} table must match when the flag overrides the config value"
        );
    }

    // Unknown keys are named; malformed lines carry their line number.
    std::fs::write(dir.path().join("bad.conf"), "datasets = 3\nwibble = 1\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--null", "--out-prefix", "x", "--config", "bad.conf",
        ],
    );
    assert_exit(&out, 1, "unknown config key");
    assert!(
        stderr_of(&out).contains("wibble"),
        "unknown config key must be named"
    );

    std::fs::write(dir.path().join("broken.conf"), "datasets = 3\nno equals here\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--null", "--out-prefix", "x", "--config", "broken.conf",
        ],
    );
    assert_exit(&out, 1, "malformed config line");
    assert!(
        stderr_of(&out).contains(":2"),
        "malformed config line must carry its 1-based line number, got: {}",
        stderr_of(&out)
    );
}

#[test]
fn null_simulation_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let args = |prefix: &'static str, seed: &'static str| {
        vec![
            "simulate", "--null", "--datasets", "6", "--seed", seed, "--out-prefix", prefix,
        ]
    };
    assert_exit(&run_in(dir.path(), &args("a", "7")), 0, "first run");
    assert_exit(&run_in(dir.path(), &args("b", "7")), 0, "second run");
    assert_exit(&run_in(dir.path(), &args("c", "8")), 0, "other-seed run");
    for suffix in ["fdr", "ks", "curves", "hist"] {
        let a = std::fs::read(dir.path().join(format!("a_{suffix}.csv"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b_{suffix}.csv"))).unwrap();
        assert_eq!(a, b, "{suffix} table must be byte-identical for equal seeds");
    }
    let a = std::fs::read(dir.path().join("a_ks.csv")).unwrap();
    let c = std::fs::read(dir.path().join("c_ks.csv")).unwrap();
    assert_ne!(a, c, "a different seed must change the KS table");
}

#[test]
fn null_report_tables_reparse_under_their_loaders() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate", "--null", "--datasets", "5", "--seed", "31", "--out-prefix", "n",
        ],
    );
    assert_exit(&out, 0, "null simulate");
    let fdr = io::read_fdr_table(&dir.path().join("n_fdr.csv")).unwrap();
    assert_eq!(fdr.len(), 2, "one FDR row per method");
    assert!(fdr.iter().any(|r| r.method == "classical"));
    assert!(fdr.iter().any(|r| r.method == "fab"));
    assert!(fdr.iter().all(|r| r.datasets == 5));
    let ks = io::read_ks_table(&dir.path().join("n_ks.csv")).unwrap();
    assert_eq!(ks.len(), 2, "one KS row per method");
    assert!(ks.iter().all(|r| r.pooled_count == 5 * 250));
    let curves = io::read_curve_table(&dir.path().join("n_curves.csv")).unwrap();
    assert_eq!(curves.len(), 25, "one curve row per threshold");
    let hist = io::read_hist_table(&dir.path().join("n_hist.csv")).unwrap();
    assert_eq!(hist.len(), 50, "fifty histogram bins");
    let mass: usize = hist.iter().map(|r| r.count_fab).sum();
    assert_eq!(mass, 5 * 250, "histogram mass must equal the pooled count");
}

#[test]
fn power_simulation_writes_reparsable_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--power",
            "--l",
            "4",
            "--g",
            "12",
            "--d",
            "2",
            "--datasets",
            "3",
            "--tau2-grid",
            "1,0",
            "--seed",
            "5",
            "--out-prefix",
            "p",
        ],
    );
    assert_exit(&out, 0, "power simulate");
    let curves = io::read_power_curve_table(&dir.path().join("p_power_curves.csv")).unwrap();
    assert_eq!(curves.len(), 2 * 25, "levels x thresholds curve rows");
    assert!(curves.iter().filter(|r| r.tau2 == 1.0).count() == 25);
    assert!(curves.iter().filter(|r| r.tau2 == 0.0).count() == 25);
    let counts = io::read_power_count_table(&dir.path().join("p_power_counts.csv")).unwrap();
    assert_eq!(counts.len(), 2 * 3, "levels x datasets count rows");
    let text = stdout_of(&out);
    assert!(
        text.contains("tau2"),
        "summary must list per-level medians, got: {text}"
    );
}

#[test]
fn full_pipeline_runs_on_the_bundled_toy_tensor() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture();
    let fit = run_in(
        dir.path(),
        &[
            "--verbose",
            "fit-tensor",
            "--input",
            fixture.to_str().unwrap(),
            "--likelihood",
            "expr=normal",
            "--likelihood",
            "hit=probit",
            "--likelihood",
            "conc=tobit",
            "--d-u",
            "2",
            "--d-v",
            "2",
            "--iters",
            "400",
            "--burn-in",
            "150",
            "--thin",
            "2",
            "--seed",
            "5",
            "--out-prefix",
            "toy",
        ],
    );
    assert_exit(&fit, 0, "fit-tensor");
    assert!(
        stderr_of(&fit).contains("loaded tensor"),
        "--verbose must emit progress on stderr"
    );
    let features = io::load_factors(dir.path().join("toy").to_str().unwrap(), true).unwrap();
    assert_eq!(features.q(), 2 * 2 + 1, "rank-2 factors plus intercept");

    std::fs::write(dir.path().join("summ.csv"), toy_summaries()).unwrap();
    let test = run_in(
        dir.path(),
        &[
            "fab-test",
            "--summaries",
            "summ.csv",
            "--factors-prefix",
            "toy",
            "--intercept",
            "--seed",
            "11",
            "--alpha",
            "0.1",
            "--out",
            "results.csv",
        ],
    );
    assert_exit(&test, 0, "fab-test");
    let records = io::read_results(&dir.path().join("results.csv")).unwrap();
    assert_eq!(records.len(), 60, "one record per hypothesis");
    for r in &records {
        assert!(r.p_fab > 0.0 && r.p_fab <= 1.0, "{}: p_fab in (0, 1]", r.id);
        assert!(
            r.p_fab + 1e-12 >= r.p_classical / 2.0,
            "{}: FAB p-value must respect the half bound",
            r.id
        );
        assert!(r.fold == 1 || r.fold == 2, "{}: fold must be 1 or 2", r.id);
    }

    let report = run_in(
        dir.path(),
        &[
            "report",
            "--results",
            "results.csv",
            "--out-prefix",
            "rep",
        ],
    );
    assert_exit(&report, 0, "report");
    let hist = io::read_hist_table(&dir.path().join("rep_results_hist.csv")).unwrap();
    assert_eq!(hist.len(), 50);
    let mass: usize = hist.iter().map(|r| r.count_classical).sum();
    assert_eq!(mass, 60, "histogram mass must equal the hypothesis count");
    let curves = io::read_curve_table(&dir.path().join("rep_results_curves.csv")).unwrap();
    assert_eq!(curves.len(), 25);
    for pair in curves.windows(2) {
        assert!(
            pair[1].rate_fab >= pair[0].rate_fab,
            "discovery rate must be monotone in the threshold"
        );
    }
    for name in ["rep_results_hist.svg", "rep_results_curves.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name} must be an SVG document");
        assert!(svg.trim_end().ends_with("</svg>"), "{name} must be closed");
    }
}

#[test]
fn report_renders_simulation_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &run_in(
            dir.path(),
            &[
                "simulate", "--null", "--datasets", "4", "--seed", "13", "--out-prefix", "n",
            ],
        ),
        0,
        "null simulate",
    );
    let out = run_in(
        dir.path(),
        &["report", "--sim-prefix", "n", "--out-prefix", "viz"],
    );
    assert_exit(&out, 0, "report on simulation prefix");
    for name in ["viz_null_hist.svg", "viz_null_curves.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name} must be an SVG document");
    }
    // A prefix with no tables behind it is a validation error.
    let out = run_in(
        dir.path(),
        &["report", "--sim-prefix", "ghost", "--out-prefix", "viz2"],
    );
    assert_exit(&out, 1, "report on empty prefix");
}

#[test]
fn zero_guides_reproduces_the_classical_columns() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture();
    assert_exit(
        &run_in(
            dir.path(),
            &[
                "fit-tensor",
                "--input",
                fixture.to_str().unwrap(),
                "--likelihood",
                "expr=normal",
                "--likelihood",
                "hit=probit",
                "--likelihood",
                "conc=tobit",
                "--d-u",
                "2",
                "--d-v",
                "2",
                "--iters",
                "300",
                "--burn-in",
                "100",
                "--seed",
                "5",
                "--out-prefix",
                "toy",
            ],
        ),
        0,
        "fit-tensor",
    );
    std::fs::write(dir.path().join("summ.csv"), toy_summaries()).unwrap();
    let base_args = [
        "fab-test",
        "--summaries",
        "summ.csv",
        "--factors-prefix",
        "toy",
        "--intercept",
        "--seed",
        "11",
        "--out",
    ];
    let mut plain = base_args.to_vec();
    plain.push("plain.csv");
    assert_exit(&run_in(dir.path(), &plain), 0, "plain fab-test");
    let mut zeroed = base_args.to_vec();
    zeroed.push("zeroed.csv");
    zeroed.push("--zero-guides");
    assert_exit(&run_in(dir.path(), &zeroed), 0, "zero-guides fab-test");

    let plain = io::read_results(&dir.path().join("plain.csv")).unwrap();
    let zeroed = io::read_results(&dir.path().join("zeroed.csv")).unwrap();
    assert_eq!(plain.len(), zeroed.len());
    let mut some_guide_nonzero = false;
    for (p, z) in plain.iter().zip(&zeroed) {
        assert_eq!(p.id, z.id, "row order must match");
        assert_eq!(p.t, z.t, "{}: t is guide-independent", p.id);
        assert_eq!(
            p.p_classical, z.p_classical,
            "{}: classical column is guide-independent",
            p.id
        );
        assert_eq!(z.b_fab, 0.0, "{}: guide must be zeroed", z.id);
        assert_eq!(
            z.p_fab, z.p_classical,
            "{}: zero guide makes the FAB p-value classical",
            z.id
        );
        assert_eq!(
            z.q_fab, z.q_classical,
            "{}: zero guide makes the FAB q-value classical",
            z.id
        );
        some_guide_nonzero |= p.b_fab != 0.0;
    }
    assert!(
        some_guide_nonzero,
        "the unzeroed run must carry at least one nonzero guide"
    );
}

#[test]
fn fab_test_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture();
    assert_exit(
        &run_in(
            dir.path(),
            &[
                "fit-tensor",
                "--input",
                fixture.to_str().unwrap(),
                "--likelihood",
                "expr=normal",
                "--likelihood",
                "hit=probit",
                "--likelihood",
                "conc=tobit",
                "--iters",
                "300",
                "--burn-in",
                "100",
                "--d-u",
                "2",
                "--d-v",
                "2",
                "--seed",
                "5",
                "--out-prefix",
                "toy",
            ],
        ),
        0,
        "fit-tensor",
    );
    std::fs::write(dir.path().join("summ.csv"), toy_summaries()).unwrap();
    for out_name in ["r1.csv", "r2.csv"] {
        assert_exit(
            &run_in(
                dir.path(),
                &[
                    "fab-test",
                    "--summaries",
                    "summ.csv",
                    "--factors-prefix",
                    "toy",
                    "--intercept",
                    "--seed",
                    "11",
                    "--out",
                    out_name,
                ],
            ),
            0,
            out_name,
        );
    }
    let a = std::fs::read(dir.path().join("r1.csv")).unwrap();
    let b = std::fs::read(dir.path().join("r2.csv")).unwrap();
    assert_eq!(a, b, "equal seeds must give byte-identical results tables");
}

#[test]
fn summaries_without_features_are_excluded_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture();
    assert_exit(
        &run_in(
            dir.path(),
            &[
                "fit-tensor",
                "--input",
                fixture.to_str().unwrap(),
                "--likelihood",
                "expr=normal",
                "--likelihood",
                "hit=probit",
                "--likelihood",
                "conc=tobit",
                "--iters",
                "300",
                "--burn-in",
                "100",
                "--d-u",
                "2",
                "--d-v",
                "2",
                "--seed",
                "5",
                "--out-prefix",
                "toy",
            ],
        ),
        0,
        "fit-tensor",
    );
    let mut summaries = toy_summaries();
    summaries.push_str("ghost,zz,m1,0.5,1.0,6\n");
    std::fs::write(dir.path().join("summ.csv"), summaries).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "fab-test",
            "--summaries",
            "summ.csv",
            "--factors-prefix",
            "toy",
            "--intercept",
            "--seed",
            "11",
            "--out",
            "r.csv",
        ],
    );
    assert_exit(&out, 0, "fab-test with a ghost row");
    assert!(
        stderr_of(&out).contains("excluded ghost"),
        "the exclusion must be warned about, got: {}",
        stderr_of(&out)
    );
    let records = io::read_results(&dir.path().join("r.csv")).unwrap();
    assert_eq!(records.len(), 60, "ghost row is dropped, the rest survive");
    assert!(
        stdout_of(&out).contains("(1 excluded)"),
        "the summary line reports the exclusion count"
    );
}

#[test]
fn fit_tensor_accepts_likelihoods_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = fixture();
    std::fs::write(
        dir.path().join("fit.conf"),
        format!(
            "input = {}\nlikelihood = expr=normal, hit=probit, conc=tobit\n\
             d-u = 2\nd-v = 2\niters = 300\nburn-in = 100\nseed = 5\nout-prefix = cfg\n",
            fixture.display()
        ),
    )
    .unwrap();
    let out = run_in(dir.path(), &["fit-tensor", "--config", "fit.conf"]);
    assert_exit(&out, 0, "config-driven fit-tensor");
    // Same run fully spelled out on the command line matches byte for byte.
    let flags = run_in(
        dir.path(),
        &[
            "fit-tensor",
            "--input",
            fixture.to_str().unwrap(),
            "--likelihood",
            "expr=normal",
            "--likelihood",
            "hit=probit",
            "--likelihood",
            "conc=tobit",
            "--d-u",
            "2",
            "--d-v",
            "2",
            "--iters",
            "300",
            "--burn-in",
            "100",
            "--seed",
            "5",
            "--out-prefix",
            "flag",
        ],
    );
    assert_exit(&flags, 0, "flag-driven fit-tensor");
    for suffix in ["u", "v"] {
        let a = std::fs::read(dir.path().join(format!("cfg_{suffix}.csv"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("flag_{suffix}.csv"))).unwrap();
        assert_eq!(a, b, "{suffix} factors must not depend on the flag source");
    }
}
