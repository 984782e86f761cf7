//! Command-line driver for the fabtest pipeline. Four subcommands cover the
//! two-stage workflow end to end: `fit-tensor` distills historical features
//! from a multimodal tensor, `fab-test` runs the cross-fitted FAB analysis
//! against those features, `simulate` reproduces the null and power
//! studies, and `report` turns result tables into plot data and SVG charts.
//!
//! Exit codes: 0 on success, 1 on argument/validation/parse errors, 2 on
//! numerical failures inside iterative blocks. All randomness flows from
//! the `--seed` flags; no environment variables are consulted.

mod kv;
mod plot;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fabtest::align::{align_chain, posterior_point_estimates};
use fabtest::error::{Error, Result};
use fabtest::io;
use fabtest::linking::run_fab_analysis;
use fabtest::sim::{
    fdr_threshold_grid, run_null_experiment, run_power_experiment, SimDesign, HIST_BINS,
};
use fabtest::tensor::{run_chain, ChainConfig, Likelihood};
use fabtest::ttest::{p_value_records, TestStatistic};
use fabtest::Real;
use kv::KvConfig;

/// Run the CLI on an argv slice (including the program name) and return
/// the process exit code.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs; real usage errors
            // go to stderr with the validation exit code.
            if e.use_stderr() {
                eprint!("{e}");
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    init_logging(cli.verbose);
    let outcome = match cli.command {
        Command::FitTensor(args) => run_fit_tensor(args),
        Command::FabTest(args) => run_fab_test(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Report(args) => run_report(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

/// Numerical failures inside iterative blocks exit 2; validation, parse,
/// and I/O problems exit 1.
fn exit_code_for(err: &Error) -> i32 {
    if matches!(err, Error::Numerical { .. }) {
        2
    } else {
        1
    }
}

fn init_logging(verbose: bool) {
    let level = if verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    // Explicit level only: RUST_LOG and friends are deliberately ignored.
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

#[derive(Parser)]
#[command(
    name = "fabtest",
    version,
    about = "Frequentist-assisted-by-Bayes testing with tensor-distilled historical features"
)]
struct Cli {
    /// Emit progress information to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the Bayesian tensor factorization and export aligned factors.
    FitTensor(FitTensorArgs),
    /// Run the cross-fitted FAB analysis on effect summaries.
    FabTest(FabTestArgs),
    /// Run the null-calibration or power-interpolation experiment.
    Simulate(SimulateArgs),
    /// Render result and simulation tables into plot data and SVG charts.
    Report(ReportArgs),
}

fn required<T>(flag: &str, value: Option<T>) -> Result<T> {
    value.ok_or_else(|| Error::Validation(format!("{flag} is required")))
}

fn fmt_real(x: Real) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// fit-tensor
// ---------------------------------------------------------------------------

#[derive(Args)]
struct FitTensorArgs {
    /// Long-form tensor file with columns row,col,modality,value.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Modality likelihood declaration name=kind (kind: normal, probit,
    /// tobit); repeat once per modality.
    #[arg(long = "likelihood")]
    likelihoods: Vec<String>,
    /// Row-factor rank d_U.
    #[arg(long)]
    d_u: Option<usize>,
    /// Column-factor rank d_V.
    #[arg(long)]
    d_v: Option<usize>,
    /// Total Gibbs sweeps.
    #[arg(long)]
    iters: Option<usize>,
    /// Sweeps discarded before retention.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Retain every thin-th sweep after burn-in.
    #[arg(long)]
    thin: Option<usize>,
    /// RNG seed; the single source of randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix for <prefix>_u.csv and <prefix>_v.csv.
    #[arg(long)]
    out_prefix: Option<String>,
    /// Drop unobserved cells from the conditionals instead of imputing.
    #[arg(long)]
    no_impute: bool,
    /// Key-value file supplying defaults for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_likelihood_pairs(specs: &[String]) -> Result<std::collections::BTreeMap<String, Likelihood>> {
    if specs.is_empty() {
        return Err(Error::Validation(
            "at least one --likelihood name=kind declaration is required".into(),
        ));
    }
    let mut map = std::collections::BTreeMap::new();
    for spec in specs {
        let Some((name, kind)) = spec.split_once('=') else {
            return Err(Error::Validation(format!(
                "--likelihood {spec:?} is not of the form name=kind"
            )));
        };
        let likelihood: Likelihood = kind.trim().parse()?;
        if map.insert(name.trim().to_string(), likelihood).is_some() {
            return Err(Error::Validation(format!(
                "modality {:?} declared twice",
                name.trim()
            )));
        }
    }
    Ok(map)
}

fn run_fit_tensor(args: FitTensorArgs) -> Result<()> {
    let mut cfg = KvConfig::load(args.config.as_deref())?;
    let input = required("--input", args.input.or(cfg.take("input")?))?;
    let cfg_likelihoods = cfg.take_list("likelihood");
    let specs = if args.likelihoods.is_empty() {
        cfg_likelihoods.unwrap_or_default()
    } else {
        args.likelihoods
    };
    let config = ChainConfig {
        d_u: args.d_u.or(cfg.take("d-u")?).unwrap_or(3),
        d_v: args.d_v.or(cfg.take("d-v")?).unwrap_or(3),
        iters: args.iters.or(cfg.take("iters")?).unwrap_or(600),
        burn_in: args.burn_in.or(cfg.take("burn-in")?).unwrap_or(200),
        thin: args.thin.or(cfg.take("thin")?).unwrap_or(2),
        seed: args.seed.or(cfg.take("seed")?).unwrap_or(17),
        impute: !(args.no_impute || cfg.take::<bool>("no-impute")?.unwrap_or(false)),
    };
    let out_prefix = required("--out-prefix", args.out_prefix.or(cfg.take("out-prefix")?))?;
    cfg.finish()?;

    // Everything is validated before the sampler starts.
    let likelihoods = parse_likelihood_pairs(&specs)?;
    config.validate()?;
    let data = io::load_tensor(&input, &likelihoods)?;
    log::info!(
        "loaded tensor: {} rows x {} cols x {} slices",
        data.n_rows(),
        data.n_cols(),
        data.slices.len()
    );

    let chain = run_chain(&data, &config)?;
    let aligned = align_chain(&chain)?;
    for &c in &aligned.zero_columns_u {
        log::warn!("row-factor column {c} is numerically zero across samples");
    }
    for &c in &aligned.zero_columns_v {
        log::warn!("column-factor column {c} is numerically zero across samples");
    }
    let estimates = posterior_point_estimates(&aligned)?;
    let (u_path, v_path) = io::export_factors(
        &out_prefix,
        &estimates.u,
        &estimates.v,
        &chain.row_names,
        &chain.col_names,
    )?;
    println!(
        "retained {} samples; wrote {} and {}",
        chain.samples.len(),
        u_path.display(),
        v_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// fab-test
// ---------------------------------------------------------------------------

#[derive(Args)]
struct FabTestArgs {
    /// Effect summaries file with columns id,row,col,ybar,s,n.
    #[arg(long)]
    summaries: Option<PathBuf>,
    /// Factor-file prefix as written by fit-tensor.
    #[arg(long)]
    factors_prefix: Option<String>,
    /// Append an intercept column to the historical features.
    #[arg(long)]
    intercept: bool,
    /// RNG seed for the fold partition.
    #[arg(long)]
    seed: Option<u64>,
    /// Target false discovery rate.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<Real>,
    /// Output path for the results table.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Debug: force every guide to zero; the FAB columns then reproduce
    /// the classical test exactly.
    #[arg(long)]
    zero_guides: bool,
    /// Key-value file supplying defaults for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run_fab_test(args: FabTestArgs) -> Result<()> {
    let mut cfg = KvConfig::load(args.config.as_deref())?;
    let summaries_path = required("--summaries", args.summaries.or(cfg.take("summaries")?))?;
    let factors_prefix = required(
        "--factors-prefix",
        args.factors_prefix.or(cfg.take("factors-prefix")?),
    )?;
    let out = required("--out", args.out.or(cfg.take("out")?))?;
    let intercept = args.intercept || cfg.take::<bool>("intercept")?.unwrap_or(false);
    let zero_guides = args.zero_guides || cfg.take::<bool>("zero-guides")?.unwrap_or(false);
    let seed = args.seed.or(cfg.take("seed")?).unwrap_or(17);
    let alpha = args.alpha.or(cfg.take("alpha")?).unwrap_or(0.1);
    cfg.finish()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!(
            "--alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }

    let summaries = io::load_summaries(&summaries_path)?;
    let features = io::load_factors(&factors_prefix, intercept)?;
    let mut fit = run_fab_analysis(&summaries, &features, seed, alpha)?;
    for e in &fit.excluded {
        log::warn!("excluded {}: {}", e.id, e.reason);
    }
    if zero_guides {
        // Re-run the p-value/BH stage with b = 0 everywhere; fab_p at a
        // zero guide is the classical p-value by construction.
        let stats: Vec<TestStatistic> = fit
            .records
            .iter()
            .map(|r| TestStatistic {
                t: r.t,
                dof: r.dof,
                guide: 0.0,
            })
            .collect();
        let zeroed = p_value_records(&stats)?;
        for (record, p) in fit.records.iter_mut().zip(&zeroed) {
            record.b_fab = 0.0;
            record.p_fab = p.p_fab;
            record.q_fab = p.q_fab;
        }
    }
    io::write_results(&out, &fit)?;
    let hits_classical = fit.records.iter().filter(|r| r.q_classical <= alpha).count();
    let hits_fab = fit.records.iter().filter(|r| r.q_fab <= alpha).count();
    println!(
        "analyzed {} hypotheses ({} excluded); discoveries at FDR {alpha}: \
         classical {hits_classical}, fab {hits_fab}; wrote {}",
        fit.records.len(),
        fit.excluded.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulateArgs {
    /// Run the all-null calibration study.
    #[arg(long, conflicts_with = "power")]
    null: bool,
    /// Run the signal-study power interpolation.
    #[arg(long)]
    power: bool,
    /// Row-entity count L.
    #[arg(long)]
    l: Option<usize>,
    /// Column-entity count G.
    #[arg(long)]
    g: Option<usize>,
    /// Feature dimension d.
    #[arg(long)]
    d: Option<usize>,
    /// Replicates per hypothesis.
    #[arg(long)]
    n_reps: Option<usize>,
    /// Datasets per condition.
    #[arg(long)]
    datasets: Option<usize>,
    /// Comma-separated relevance grid for the power study, e.g. 1,0.6,0.2,0.
    #[arg(long)]
    tau2_grid: Option<String>,
    /// Master seed; dataset seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Target false discovery rate.
    #[arg(long, allow_negative_numbers = true)]
    target_fdr: Option<Real>,
    /// Output prefix for the report tables.
    #[arg(long)]
    out_prefix: Option<String>,
    /// Use the full published scale instead of the desk-scale defaults.
    #[arg(long)]
    paper_scale: bool,
    /// Key-value file supplying defaults for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_tau2_grid(text: &str) -> Result<Vec<Real>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<Real>()
                .map_err(|_| Error::Validation(format!("--tau2-grid entry {s:?} is not a number")))
        })
        .collect()
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = KvConfig::load(args.config.as_deref())?;
    if args.null == args.power {
        return Err(Error::Validation(
            "pass exactly one of --null or --power".into(),
        ));
    }
    let paper_scale = args.paper_scale || cfg.take::<bool>("paper-scale")?.unwrap_or(false);
    let seed = args.seed.or(cfg.take("seed")?).unwrap_or(17);
    let mut design = match (args.null, paper_scale) {
        (true, false) => SimDesign::desk_null(seed),
        (true, true) => SimDesign::paper_null(seed),
        (false, false) => SimDesign::desk_power(seed),
        (false, true) => SimDesign::paper_power(seed),
    };
    if let Some(l) = args.l.or(cfg.take("l")?) {
        design.l = l;
    }
    if let Some(g) = args.g.or(cfg.take("g")?) {
        design.g = g;
    }
    if let Some(d) = args.d.or(cfg.take("d")?) {
        design.d = d;
    }
    if let Some(n) = args.n_reps.or(cfg.take("n-reps")?) {
        design.n_reps = n;
    }
    if let Some(n) = args.datasets.or(cfg.take("datasets")?) {
        design.n_datasets = n;
    }
    if let Some(text) = args.tau2_grid.or(cfg.take("tau2-grid")?) {
        design.tau2_grid = parse_tau2_grid(&text)?;
    }
    if let Some(a) = args.target_fdr.or(cfg.take("target-fdr")?) {
        design.target_fdr = a;
    }
    let out_prefix = required("--out-prefix", args.out_prefix.or(cfg.take("out-prefix")?))?;
    cfg.finish()?;
    design.validate()?;

    if args.null {
        log::info!(
            "null study: {} datasets x {} hypotheses",
            design.n_datasets,
            design.hypotheses()
        );
        let report = run_null_experiment(&design)?;
        let paths = io::write_null_report(&out_prefix, &report)?;
        println!(
            "null study over {} datasets x {} hypotheses (target FDR {}):",
            design.n_datasets,
            design.hypotheses(),
            design.target_fdr
        );
        println!(
            "  classical: MC FDR {:.4} (SE {:.4}), pooled KS p {:.4}",
            report.mc_fdr_classical, report.mc_se_classical, report.ks_p_classical
        );
        println!(
            "  fab:       MC FDR {:.4} (SE {:.4}), pooled KS p {:.4}",
            report.mc_fdr_fab, report.mc_se_fab, report.ks_p_fab
        );
        println!("wrote {}", join_paths(&paths));
    } else {
        log::info!(
            "power study: {} levels x {} datasets x {} hypotheses",
            design.tau2_grid.len(),
            design.n_datasets,
            design.hypotheses()
        );
        let report = run_power_experiment(&design)?;
        let paths = io::write_power_report(&out_prefix, &report)?;
        let target_k = nearest_alpha_index(&report.alphas, design.target_fdr);
        println!(
            "power study over {} datasets per level x {} hypotheses \
             (median discoveries at FDR {}):",
            design.n_datasets,
            design.hypotheses(),
            report.alphas[target_k]
        );
        for cell in &report.cells {
            println!(
                "  tau2 {:>4}: classical {:>6.1}, fab {:>6.1}, oracle {:>6.1}",
                cell.tau2,
                cell.median_classical[target_k],
                cell.median_fab[target_k],
                cell.median_oracle[target_k]
            );
        }
        println!("wrote {}", join_paths(&paths));
    }
    Ok(())
}

fn nearest_alpha_index(alphas: &[Real], target: Real) -> usize {
    alphas
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (*a - target)
                .abs()
                .partial_cmp(&(*b - target).abs())
                .expect("finite grid")
        })
        .map(|(k, _)| k)
        .unwrap_or(0)
}

fn join_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ReportArgs {
    /// A results table written by fab-test.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Table prefix written by simulate (either study).
    #[arg(long)]
    sim_prefix: Option<String>,
    /// Output prefix for the generated files.
    #[arg(long)]
    out_prefix: Option<String>,
    /// Key-value file supplying defaults for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run_report(args: ReportArgs) -> Result<()> {
    let mut cfg = KvConfig::load(args.config.as_deref())?;
    let results = args.results.or(cfg.take("results")?);
    let sim_prefix = args.sim_prefix.or(cfg.take("sim-prefix")?);
    let out_prefix = required("--out-prefix", args.out_prefix.or(cfg.take("out-prefix")?))?;
    cfg.finish()?;
    if results.is_none() && sim_prefix.is_none() {
        return Err(Error::Validation(
            "pass --results and/or --sim-prefix".into(),
        ));
    }

    let mut written: Vec<PathBuf> = Vec::new();
    if let Some(path) = results {
        written.extend(report_results(&path, &out_prefix)?);
    }
    if let Some(prefix) = sim_prefix {
        written.extend(report_sim(&prefix, &out_prefix)?);
    }
    println!("wrote {}", join_paths(&written));
    Ok(())
}

fn write_text(path: PathBuf, content: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, content)?;
    written.push(path);
    Ok(())
}

/// Histogram + discovery-curve data and charts from one results table.
fn report_results(path: &Path, out_prefix: &str) -> Result<Vec<PathBuf>> {
    let records = io::read_results(path)?;
    if records.is_empty() {
        return Err(Error::Validation(format!(
            "results table {} has no rows",
            path.display()
        )));
    }
    let mut written = Vec::new();

    // Pooled p-value histogram over the same 50 bins the null study uses.
    let bin_of = |p: Real| ((p * HIST_BINS as Real) as usize).min(HIST_BINS - 1);
    let mut hist_classical = vec![0usize; HIST_BINS];
    let mut hist_fab = vec![0usize; HIST_BINS];
    for r in &records {
        hist_classical[bin_of(r.p_classical)] += 1;
        hist_fab[bin_of(r.p_fab)] += 1;
    }
    let mut hist_csv = String::from("bin_lo,bin_hi,count_classical,count_fab\n");
    let mut hist_rows = Vec::with_capacity(HIST_BINS);
    for i in 0..HIST_BINS {
        let lo = i as Real / HIST_BINS as Real;
        let hi = (i + 1) as Real / HIST_BINS as Real;
        let _ = writeln!(
            hist_csv,
            "{},{},{},{}",
            fmt_real(lo),
            fmt_real(hi),
            hist_classical[i],
            hist_fab[i]
        );
        hist_rows.push(io::HistRow {
            bin_lo: lo,
            bin_hi: hi,
            count_classical: hist_classical[i],
            count_fab: hist_fab[i],
        });
    }
    write_text(
        PathBuf::from(format!("{out_prefix}_results_hist.csv")),
        &hist_csv,
        &mut written,
    )?;
    write_text(
        PathBuf::from(format!("{out_prefix}_results_hist.svg")),
        &plot::histogram_svg("p-value histogram", &hist_rows),
        &mut written,
    )?;

    // Discovery rates along the shared FDR-threshold grid.
    let alphas = fdr_threshold_grid();
    let m = records.len() as Real;
    let mut curve_csv = String::from("alpha,rate_classical,rate_fab\n");
    let mut classical_pts = Vec::with_capacity(alphas.len());
    let mut fab_pts = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let rate_classical =
            records.iter().filter(|r| r.q_classical <= alpha).count() as Real / m;
        let rate_fab = records.iter().filter(|r| r.q_fab <= alpha).count() as Real / m;
        let _ = writeln!(
            curve_csv,
            "{},{},{}",
            fmt_real(alpha),
            fmt_real(rate_classical),
            fmt_real(rate_fab)
        );
        classical_pts.push((alpha, rate_classical));
        fab_pts.push((alpha, rate_fab));
    }
    write_text(
        PathBuf::from(format!("{out_prefix}_results_curves.csv")),
        &curve_csv,
        &mut written,
    )?;
    let series = [
        plot::Series {
            label: "classical".into(),
            color: plot::CLASSICAL_COLOR,
            dash: "",
            points: classical_pts,
        },
        plot::Series {
            label: "fab".into(),
            color: plot::FAB_COLOR,
            dash: "",
            points: fab_pts,
        },
    ];
    write_text(
        PathBuf::from(format!("{out_prefix}_results_curves.svg")),
        &plot::curves_svg("discovery rate by FDR threshold", "FDR threshold", "rate", &series),
        &mut written,
    )?;
    Ok(written)
}

/// SVG charts from whichever simulate tables exist under the prefix.
fn report_sim(prefix: &str, out_prefix: &str) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    let hist_path = PathBuf::from(format!("{prefix}_hist.csv"));
    if hist_path.exists() {
        let rows = io::read_hist_table(&hist_path)?;
        write_text(
            PathBuf::from(format!("{out_prefix}_null_hist.svg")),
            &plot::histogram_svg("pooled null p-values", &rows),
            &mut written,
        )?;
    }

    let curves_path = PathBuf::from(format!("{prefix}_curves.csv"));
    if curves_path.exists() {
        let rows = io::read_curve_table(&curves_path)?;
        let series = [
            plot::Series {
                label: "classical".into(),
                color: plot::CLASSICAL_COLOR,
                dash: "",
                points: rows.iter().map(|r| (r.alpha, r.rate_classical)).collect(),
            },
            plot::Series {
                label: "fab".into(),
                color: plot::FAB_COLOR,
                dash: "",
                points: rows.iter().map(|r| (r.alpha, r.rate_fab)).collect(),
            },
        ];
        write_text(
            PathBuf::from(format!("{out_prefix}_null_curves.svg")),
            &plot::curves_svg(
                "pooled rejection rate by nominal level",
                "nominal level",
                "rate",
                &series,
            ),
            &mut written,
        )?;
    }

    let power_path = PathBuf::from(format!("{prefix}_power_curves.csv"));
    if power_path.exists() {
        let rows = io::read_power_curve_table(&power_path)?;
        // One dash pattern per relevance level, in first-seen order.
        let mut levels: Vec<Real> = Vec::new();
        for r in &rows {
            if !levels.contains(&r.tau2) {
                levels.push(r.tau2);
            }
        }
        const DASHES: [&str; 6] = ["", "7 3", "3 3", "10 3 3 3", "1 3", "12 4"];
        let mut series = Vec::new();
        for (i, &tau2) in levels.iter().enumerate() {
            let dash = DASHES[i % DASHES.len()];
            let of_level: Vec<&io::PowerCurveRow> =
                rows.iter().filter(|r| r.tau2 == tau2).collect();
            for (label, color, pick) in [
                (
                    "classical",
                    plot::CLASSICAL_COLOR,
                    Box::new(|r: &io::PowerCurveRow| r.median_classical)
                        as Box<dyn Fn(&io::PowerCurveRow) -> Real>,
                ),
                ("fab", plot::FAB_COLOR, Box::new(|r: &io::PowerCurveRow| r.median_fab)),
                (
                    "oracle",
                    plot::ORACLE_COLOR,
                    Box::new(|r: &io::PowerCurveRow| r.median_oracle),
                ),
            ] {
                series.push(plot::Series {
                    label: format!("{label} tau2={tau2}"),
                    color,
                    dash,
                    points: of_level.iter().map(|r| (r.alpha, pick(r))).collect(),
                });
            }
        }
        write_text(
            PathBuf::from(format!("{out_prefix}_power.svg")),
            &plot::curves_svg(
                "median discoveries by FDR threshold",
                "FDR threshold",
                "median discoveries",
                &series,
            ),
            &mut written,
        )?;
    }

    if written.is_empty() {
        return Err(Error::Validation(format!(
            "no simulation tables found under prefix {prefix:?}"
        )));
    }
    Ok(written)
}
