//! Synthetic studies for operating-characteristic checks: an all-null
//! design that measures false discovery control and p-value uniformity,
//! and a signal design with a relevance dial τ² that interpolates between
//! perfectly informative historical factors (τ² = 0) and pure noise
//! (τ² = 1). Includes the direction-oracle benchmark and a KS uniformity
//! test. All randomness derives from a single master seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linking::{run_fab_analysis, EffectSummaries, FeatureSource, SummaryEntry};
use crate::rng;
use crate::ttest::{bh_adjust, classical_p, t_cdf, t_sf};
use crate::Real;

/// Full settings of a simulation study: grid geometry, replicate count,
/// dataset count (total for the null study, per level for the signal
/// study), the relevance grid, and the FDR target.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    /// Rows of the hypothesis grid.
    pub l: usize,
    /// Columns of the hypothesis grid.
    pub g: usize,
    /// Rank of the historical factor pair.
    pub d: usize,
    /// Replicates per hypothesis.
    pub n_reps: usize,
    pub n_datasets: usize,
    /// Relevance levels for the signal study, each in [0, 1].
    pub tau2_grid: Vec<Real>,
    pub seed: u64,
    pub target_fdr: Real,
}

impl SimDesign {
    /// Desk-scale all-null study: a 10 × 25 grid (250 hypotheses), rank-5
    /// factors, 5 replicates, 2000 datasets.
    pub fn desk_null(seed: u64) -> Self {
        Self {
            l: 10,
            g: 25,
            d: 5,
            n_reps: 5,
            n_datasets: 2000,
            tau2_grid: Vec::new(),
            seed,
            target_fdr: 0.1,
        }
    }

    /// Full-scale all-null study: 10000 datasets.
    pub fn paper_null(seed: u64) -> Self {
        Self {
            n_datasets: 10000,
            ..Self::desk_null(seed)
        }
    }

    /// Desk-scale signal study: a 5 × 100 grid (500 hypotheses), rank-10
    /// factors (100 Kronecker features), 5 replicates, 50 datasets per
    /// level on the grid {1, 0.6, 0.2, 0}.
    pub fn desk_power(seed: u64) -> Self {
        Self {
            l: 5,
            g: 100,
            d: 10,
            n_reps: 5,
            n_datasets: 50,
            tau2_grid: vec![1.0, 0.6, 0.2, 0.0],
            seed,
            target_fdr: 0.1,
        }
    }

    /// Full-scale signal study: 200 datasets per level on the grid
    /// {1, 0.8, 0.6, 0.4, 0.2, 0}.
    pub fn paper_power(seed: u64) -> Self {
        Self {
            n_datasets: 200,
            tau2_grid: vec![1.0, 0.8, 0.6, 0.4, 0.2, 0.0],
            ..Self::desk_power(seed)
        }
    }

    pub fn hypotheses(&self) -> usize {
        self.l * self.g
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.g == 0 || self.d == 0 {
            return Err(Error::Validation("grid and rank must be positive".into()));
        }
        if self.n_reps < 2 {
            return Err(Error::Validation(format!(
                "need at least 2 replicates per hypothesis, got {}",
                self.n_reps
            )));
        }
        if self.hypotheses() < 4 {
            return Err(Error::InsufficientData(
                "simulation grid must contain at least 4 hypotheses".into(),
            ));
        }
        if self.n_datasets == 0 {
            return Err(Error::Validation("need at least one dataset".into()));
        }
        if self.tau2_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Validation(
                "tau2 grid values must lie in [0, 1]".into(),
            ));
        }
        if !(self.target_fdr > 0.0 && self.target_fdr < 1.0) {
            return Err(Error::Validation(format!(
                "target FDR must lie in (0, 1), got {}",
                self.target_fdr
            )));
        }
        Ok(())
    }
}

/// The fixed FDR-threshold grid for discovery curves: 0.01, 0.02, …, 0.25.
pub fn fdr_threshold_grid() -> Vec<Real> {
    (0..25).map(|k| (k + 1) as Real * 0.01).collect()
}

fn draw_factor<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Real> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<Real, _>(StandardNormal))
}

fn grid_names(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

/// Summaries for replicate draws Y_ij ~ N(θ_j, 1), i = 1..n, in row-major
/// grid order (row index moves slowest).
fn summarize_grid<R: Rng + ?Sized>(
    design: &SimDesign,
    theta: &[Real],
    row_names: &[String],
    col_names: &[String],
    rng: &mut R,
) -> EffectSummaries {
    let mut entries = Vec::with_capacity(theta.len());
    for l in 0..design.l {
        for g in 0..design.g {
            let j = l * design.g + g;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..design.n_reps {
                let z: Real = rng.sample(StandardNormal);
                let y = theta[j] + z;
                sum += y;
                sumsq += y * y;
            }
            let n = design.n_reps as Real;
            let ybar = sum / n;
            let var = (sumsq - n * ybar * ybar).max(0.0) / (n - 1.0);
            entries.push(SummaryEntry {
                id: format!("{}:{}", row_names[l], col_names[g]),
                row_key: row_names[l].clone(),
                col_key: col_names[g].clone(),
                ybar,
                s: var.sqrt(),
                n: design.n_reps as u32,
            });
        }
    }
    EffectSummaries { entries }
}

/// One all-null dataset: θ ≡ 0, unit error variance, and a random rank-d
/// Kronecker factor pair as (irrelevant) historical features.
pub fn simulate_null_study(
    design: &SimDesign,
    seed: u64,
) -> Result<(EffectSummaries, FeatureSource)> {
    design.validate()?;
    let mut rng = rng::master_rng(seed);
    let u = draw_factor(&mut rng, design.l, design.d);
    let v = draw_factor(&mut rng, design.g, design.d);
    let row_names = grid_names("r", design.l);
    let col_names = grid_names("c", design.g);
    let theta = vec![0.0; design.hypotheses()];
    let summaries = summarize_grid(design, &theta, &row_names, &col_names, &mut rng);
    let features = FeatureSource::kronecker(u, v, &row_names, &col_names, false)?;
    Ok((summaries, features))
}

/// Center a vector, then rescale it to unit population variance
/// (mean of squares after centering equal to 1).
fn normalize_population(x: &mut DVector<Real>) -> Result<()> {
    let m = x.len() as Real;
    let mean = x.sum() / m;
    x.add_scalar_mut(-mean);
    let var = x.dot(x) / m;
    if var <= 0.0 {
        return Err(Error::Numerical {
            block: "signal-normalization",
            iteration: 0,
            msg: "degenerate signal vector with zero variance".into(),
        });
    }
    x.unscale_mut(var.sqrt());
    Ok(())
}

/// One signal dataset at relevance τ²: the structured part a is the
/// centered, unit-variance historical fit Xβ; the idiosyncratic part e is
/// centered noise orthogonalized against a and normalized the same way;
/// θ = √(1 − τ²)·a + √τ²·e then has empirical variance exactly 1 (up to
/// rounding) and historical relevance 1 − τ². Returns the true effects in
/// entry order alongside the data.
pub fn simulate_nonnull_study(
    design: &SimDesign,
    tau2: Real,
    seed: u64,
) -> Result<(EffectSummaries, FeatureSource, Vec<Real>)> {
    design.validate()?;
    if !(0.0..=1.0).contains(&tau2) {
        return Err(Error::Validation(format!(
            "tau2 must lie in [0, 1], got {tau2}"
        )));
    }
    let mut rng = rng::master_rng(seed);
    let m = design.hypotheses();
    let u = draw_factor(&mut rng, design.l, design.d);
    let v = draw_factor(&mut rng, design.g, design.d);
    let row_names = grid_names("r", design.l);
    let col_names = grid_names("c", design.g);
    let features = FeatureSource::kronecker(u, v, &row_names, &col_names, false)?;

    // Structured signal a = Xβ in entry order, centered and normalized.
    let q = features.q();
    let beta = DVector::from_fn(q, |_, _| rng.sample::<Real, _>(StandardNormal));
    let mut a = DVector::<Real>::zeros(m);
    for l in 0..design.l {
        for g in 0..design.g {
            let r = features
                .resolve(&row_names[l], &col_names[g])
                .expect("grid keys resolve by construction");
            a[l * design.g + g] = features.feature_row(r).dot(&beta);
        }
    }
    normalize_population(&mut a)?;

    // Idiosyncratic part: centered, orthogonalized against a, normalized.
    let mut e = DVector::from_fn(m, |_, _| rng.sample::<Real, _>(StandardNormal));
    let mean = e.sum() / m as Real;
    e.add_scalar_mut(-mean);
    let proj = e.dot(&a) / a.dot(&a);
    e.axpy(-proj, &a, 1.0);
    normalize_population(&mut e)?;

    let wa = (1.0 - tau2).sqrt();
    let we = tau2.sqrt();
    let theta: Vec<Real> = (0..m).map(|j| wa * a[j] + we * e[j]).collect();
    let summaries = summarize_grid(design, &theta, &row_names, &col_names, &mut rng);
    Ok((summaries, features, theta))
}

/// One-sided p-value for a direction oracle that knows the sign of the true
/// effect: sign +1 → 1 − F_ν(t), sign −1 → F_ν(t), and sign 0 falls back
/// to the two-sided classical p-value. Both directed branches come straight
/// from the tail primitive, so p(+1) + p(−1) = 1 exactly and the smaller of
/// the two equals `classical_p`/2 bit for bit.
pub fn oracle_one_sided_p(t: Real, dof: Real, sign: i8) -> Result<Real> {
    match sign.cmp(&0) {
        std::cmp::Ordering::Greater => t_sf(t, dof),
        std::cmp::Ordering::Less => t_cdf(t, dof),
        std::cmp::Ordering::Equal => classical_p(t, dof),
    }
}

/// Kolmogorov-Smirnov uniformity test on [0, 1]: returns (D, p) with the
/// asymptotic tail p = 2Σ(−1)^{k−1}exp(−2k²λ²), λ = (√n + 0.12 + 0.11/√n)·D.
pub fn ks_uniform(values: &[Real]) -> Result<(Real, Real)> {
    if values.is_empty() {
        return Err(Error::InsufficientData("KS test needs data".into()));
    }
    if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Domain("KS input outside [0, 1]".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite by the range check"));
    let n = sorted.len() as Real;
    let mut d: Real = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let lo = i as Real / n;
        let hi = (i + 1) as Real / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    // Below λ = 0.2 the survival probability is 1 to within ~1e-13 (the
    // Kolmogorov CDF there is dominated by exp(-π²/(8λ²)) < 1e-13), while
    // the alternating series needs hundreds of terms; short-circuit it.
    if lambda < 0.2 {
        return Ok((d, 1.0));
    }
    let mut p = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as Real;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        p += 2.0 * sign * term;
        sign = -sign;
        if term < 1e-18 {
            break;
        }
    }
    Ok((d, p.clamp(0.0, 1.0)))
}

/// Rejection rate of pooled p-values at one nominal level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub alpha: Real,
    pub rate_classical: Real,
    pub rate_fab: Real,
}

/// Number of histogram bins used for pooled p-values.
pub const HIST_BINS: usize = 50;

/// Aggregate output of the all-null study. With every hypothesis null, the
/// false discovery proportion of a dataset is exactly the indicator that
/// anything was discovered, so the Monte Carlo FDR is the mean indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct NullReport {
    pub design: SimDesign,
    pub pooled_count: usize,
    pub mc_fdr_classical: Real,
    pub mc_fdr_fab: Real,
    /// Binomial standard errors √(p̂(1 − p̂)/n_datasets).
    pub mc_se_classical: Real,
    pub mc_se_fab: Real,
    pub ks_stat_fab: Real,
    pub ks_p_fab: Real,
    pub ks_stat_classical: Real,
    pub ks_p_classical: Real,
    /// Pooled rejection rates at the nominal levels 0.01, …, 0.25.
    pub thresholds: Vec<ThresholdPoint>,
    /// Pooled p-value histograms over 50 equal bins of [0, 1].
    pub hist_fab: Vec<usize>,
    pub hist_classical: Vec<usize>,
}

struct NullDatasetOutcome {
    any_classical: bool,
    any_fab: bool,
    p_classical: Vec<Real>,
    p_fab: Vec<Real>,
}

fn mc_se(p: Real, n: usize) -> Real {
    (p * (1.0 - p) / n as Real).sqrt()
}

/// Run the all-null study: `n_datasets` independent datasets analyzed by
/// the full cross-fitted pipeline, aggregated into discovery indicators at
/// the target FDR, pooled-p uniformity statistics, and rejection-rate
/// curves. Datasets run in parallel on seeds derived per index, so the
/// result is independent of scheduling.
pub fn run_null_experiment(design: &SimDesign) -> Result<NullReport> {
    design.validate()?;
    let outcomes: Vec<NullDatasetOutcome> = (0..design.n_datasets)
        .into_par_iter()
        .map(|i| -> Result<NullDatasetOutcome> {
            let ds_seed = rng::derive_seed(design.seed, i as u64);
            let (summaries, features) =
                simulate_null_study(design, rng::derive_seed(ds_seed, 0))?;
            let fit = run_fab_analysis(
                &summaries,
                &features,
                rng::derive_seed(ds_seed, 1),
                design.target_fdr,
            )?;
            Ok(NullDatasetOutcome {
                any_classical: fit
                    .records
                    .iter()
                    .any(|r| r.q_classical <= design.target_fdr),
                any_fab: fit.records.iter().any(|r| r.q_fab <= design.target_fdr),
                p_classical: fit.records.iter().map(|r| r.p_classical).collect(),
                p_fab: fit.records.iter().map(|r| r.p_fab).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nds = design.n_datasets as Real;
    let mc_fdr_classical =
        outcomes.iter().filter(|o| o.any_classical).count() as Real / nds;
    let mc_fdr_fab = outcomes.iter().filter(|o| o.any_fab).count() as Real / nds;

    let mut pooled_classical = Vec::new();
    let mut pooled_fab = Vec::new();
    for o in &outcomes {
        pooled_classical.extend_from_slice(&o.p_classical);
        pooled_fab.extend_from_slice(&o.p_fab);
    }
    let (ks_stat_classical, ks_p_classical) = ks_uniform(&pooled_classical)?;
    let (ks_stat_fab, ks_p_fab) = ks_uniform(&pooled_fab)?;

    let thresholds = fdr_threshold_grid()
        .into_iter()
        .map(|alpha| {
            let rate = |pool: &[Real]| {
                pool.iter().filter(|&&p| p <= alpha).count() as Real / pool.len() as Real
            };
            ThresholdPoint {
                alpha,
                rate_classical: rate(&pooled_classical),
                rate_fab: rate(&pooled_fab),
            }
        })
        .collect();

    let hist = |pool: &[Real]| {
        let mut bins = vec![0usize; HIST_BINS];
        for &p in pool {
            let idx = ((p * HIST_BINS as Real) as usize).min(HIST_BINS - 1);
            bins[idx] += 1;
        }
        bins
    };

    Ok(NullReport {
        design: design.clone(),
        pooled_count: pooled_fab.len(),
        mc_fdr_classical,
        mc_fdr_fab,
        mc_se_classical: mc_se(mc_fdr_classical, design.n_datasets),
        mc_se_fab: mc_se(mc_fdr_fab, design.n_datasets),
        ks_stat_fab,
        ks_p_fab,
        ks_stat_classical,
        ks_p_classical,
        thresholds,
        hist_fab: hist(&pooled_fab),
        hist_classical: hist(&pooled_classical),
    })
}

/// Discovery-count curves at one relevance level: per dataset and per
/// FDR threshold, the number of BH discoveries.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCell {
    pub tau2: Real,
    /// counts[dataset][threshold index on the shared grid].
    pub counts_classical: Vec<Vec<usize>>,
    pub counts_fab: Vec<Vec<usize>>,
    pub counts_oracle: Vec<Vec<usize>>,
    /// Mean and median curves over datasets, indexed by threshold.
    pub mean_classical: Vec<Real>,
    pub mean_fab: Vec<Real>,
    pub mean_oracle: Vec<Real>,
    pub median_classical: Vec<Real>,
    pub median_fab: Vec<Real>,
    pub median_oracle: Vec<Real>,
}

/// Aggregate output of the signal study.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerReport {
    pub design: SimDesign,
    /// Shared FDR-threshold grid for every curve.
    pub alphas: Vec<Real>,
    /// One cell per τ² level, in grid order.
    pub cells: Vec<PowerCell>,
}

fn median_of(values: &[usize]) -> Real {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as Real
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as Real / 2.0
    }
}

fn count_curve(q: &[Real], alphas: &[Real]) -> Vec<usize> {
    alphas
        .iter()
        .map(|&a| q.iter().filter(|&&v| v <= a).count())
        .collect()
}

fn summarize_curves(counts: &[Vec<usize>], alphas: &[Real]) -> (Vec<Real>, Vec<Real>) {
    let n = counts.len() as Real;
    let mut means = Vec::with_capacity(alphas.len());
    let mut medians = Vec::with_capacity(alphas.len());
    for k in 0..alphas.len() {
        let column: Vec<usize> = counts.iter().map(|c| c[k]).collect();
        means.push(column.iter().sum::<usize>() as Real / n);
        medians.push(median_of(&column));
    }
    (means, medians)
}

/// Run the signal study: at each τ² level, `n_datasets` datasets are
/// analyzed three ways (classical, FAB, direction oracle) and the BH
/// discovery counts along the FDR-threshold grid are collected. Every
/// hypothesis carries signal, so counts measure power directly.
pub fn run_power_experiment(design: &SimDesign) -> Result<PowerReport> {
    design.validate()?;
    if design.tau2_grid.is_empty() {
        return Err(Error::Validation(
            "signal study needs a nonempty tau2 grid".into(),
        ));
    }
    let alphas = fdr_threshold_grid();
    let mut cells = Vec::with_capacity(design.tau2_grid.len());
    for (level, &tau2) in design.tau2_grid.iter().enumerate() {
        let triples: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> = (0..design.n_datasets)
            .into_par_iter()
            .map(|i| -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
                let stream = (level * design.n_datasets + i) as u64;
                let ds_seed = rng::derive_seed(design.seed, stream);
                let (summaries, features, theta) =
                    simulate_nonnull_study(design, tau2, rng::derive_seed(ds_seed, 0))?;
                let fit = run_fab_analysis(
                    &summaries,
                    &features,
                    rng::derive_seed(ds_seed, 1),
                    design.target_fdr,
                )?;
                let q_classical: Vec<Real> =
                    fit.records.iter().map(|r| r.q_classical).collect();
                let q_fab: Vec<Real> = fit.records.iter().map(|r| r.q_fab).collect();
                // Direction oracle on the same statistics; records are in
                // entry order here because the full grid resolves.
                let mut oracle_p = Vec::with_capacity(fit.records.len());
                for (j, r) in fit.records.iter().enumerate() {
                    let sign = if theta[j] > 0.0 {
                        1
                    } else if theta[j] < 0.0 {
                        -1
                    } else {
                        0
                    };
                    oracle_p.push(oracle_one_sided_p(r.t, r.dof, sign)?);
                }
                let q_oracle = bh_adjust(&oracle_p)?;
                Ok((
                    count_curve(&q_classical, &alphas),
                    count_curve(&q_fab, &alphas),
                    count_curve(&q_oracle, &alphas),
                ))
            })
            .collect::<Result<Vec<_>>>()?;

        let counts_classical: Vec<Vec<usize>> =
            triples.iter().map(|t| t.0.clone()).collect();
        let counts_fab: Vec<Vec<usize>> = triples.iter().map(|t| t.1.clone()).collect();
        let counts_oracle: Vec<Vec<usize>> = triples.iter().map(|t| t.2.clone()).collect();
        let (mean_classical, median_classical) = summarize_curves(&counts_classical, &alphas);
        let (mean_fab, median_fab) = summarize_curves(&counts_fab, &alphas);
        let (mean_oracle, median_oracle) = summarize_curves(&counts_oracle, &alphas);
        cells.push(PowerCell {
            tau2,
            counts_classical,
            counts_fab,
            counts_oracle,
            mean_classical,
            mean_fab,
            mean_oracle,
            median_classical,
            median_fab,
            median_oracle,
        });
    }
    Ok(PowerReport {
        design: design.clone(),
        alphas,
        cells,
    })
}
