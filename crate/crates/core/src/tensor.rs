//! Gibbs sampler for the Bayesian tensor factorization
//! θ_{lgk} = μ_k + U_lᵀB_kV_g + ε, ε ~ N(0, τ_k²), with standard-normal
//! priors on the rows of U and V, flat priors on the slice loadings B_k,
//! Gamma(1/2, 1/2) priors on the precisions 1/τ_k², N(0, 1) priors on the
//! intercepts μ_k, and data augmentation for probit and tobit slices.
//! Missing cells are imputed from the current sampling model (MAR).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;
use crate::special::{norm_cdf, norm_ppf};
pub use crate::truncnorm::{sample_truncated_normal, Side};
use crate::Real;

/// Observation model of one tensor slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Likelihood {
    Normal,
    /// Binary observations thresholding a unit-variance latent normal at 0.
    Probit,
    /// Nonnegative observations equal to the latent normal where positive,
    /// censored at zero otherwise.
    Tobit,
}

impl std::str::FromStr for Likelihood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::Normal),
            "probit" => Ok(Self::Probit),
            "tobit" => Ok(Self::Tobit),
            other => Err(Error::Validation(format!(
                "unknown likelihood {other:?} (expected normal, probit, or tobit)"
            ))),
        }
    }
}

impl std::fmt::Display for Likelihood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Normal => "normal",
            Self::Probit => "probit",
            Self::Tobit => "tobit",
        })
    }
}

/// One modality: an L × G value matrix plus its observation mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceData {
    pub name: String,
    pub likelihood: Likelihood,
    /// Values at observed cells; ignored elsewhere.
    pub values: DMatrix<Real>,
    pub observed: DMatrix<bool>,
}

/// Multimodal data tensor: K slices over a shared L × G entity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDataset {
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub slices: Vec<SliceData>,
}

impl TensorDataset {
    pub fn n_rows(&self) -> usize {
        self.row_names.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_names.len()
    }

    /// Shape consistency plus per-likelihood support of observed values.
    pub fn validate(&self) -> Result<()> {
        let (l, g) = (self.n_rows(), self.n_cols());
        if l == 0 || g == 0 || self.slices.is_empty() {
            return Err(Error::Validation(
                "tensor needs at least one row, one column, and one slice".into(),
            ));
        }
        for slice in &self.slices {
            if slice.values.shape() != (l, g) || slice.observed.shape() != (l, g) {
                return Err(Error::Validation(format!(
                    "slice {} has shape {:?}, expected ({l}, {g})",
                    slice.name,
                    slice.values.shape()
                )));
            }
            for gg in 0..g {
                for ll in 0..l {
                    if !slice.observed[(ll, gg)] {
                        continue;
                    }
                    let y = slice.values[(ll, gg)];
                    if !y.is_finite() {
                        return Err(Error::Validation(format!(
                            "slice {} cell ({ll}, {gg}) is not finite",
                            slice.name
                        )));
                    }
                    match slice.likelihood {
                        Likelihood::Probit if y != 0.0 && y != 1.0 => {
                            return Err(Error::Validation(format!(
                                "probit slice {} cell ({ll}, {gg}) has value {y}, expected 0 or 1",
                                slice.name
                            )));
                        }
                        Likelihood::Tobit if y < 0.0 => {
                            return Err(Error::Validation(format!(
                                "tobit slice {} cell ({ll}, {gg}) has negative value {y}",
                                slice.name
                            )));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sampler settings. `iters` counts total sweeps; samples are retained after
/// `burn_in` at stride `thin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    pub d_u: usize,
    pub d_v: usize,
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Draw missing cells from the sampling model each sweep (MAR). When
    /// off, unobserved cells simply drop out of every conditional.
    pub impute: bool,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_u == 0 || self.d_v == 0 {
            return Err(Error::Validation("factor ranks must be positive".into()));
        }
        if self.iters == 0 || self.burn_in >= self.iters {
            return Err(Error::Validation(format!(
                "need burn_in < iters, got burn_in = {}, iters = {}",
                self.burn_in, self.iters
            )));
        }
        if self.thin == 0 {
            return Err(Error::Validation("thin must be at least 1".into()));
        }
        Ok(())
    }
}

/// Full parameter state of one chain.
#[derive(Debug, Clone)]
pub struct ModelState {
    /// L × d_U row factors.
    pub u: DMatrix<Real>,
    /// G × d_V column factors.
    pub v: DMatrix<Real>,
    /// K slice loadings, each d_U × d_V.
    pub b: Vec<DMatrix<Real>>,
    pub mu: Vec<Real>,
    /// Residual variances; exactly 1 for probit slices.
    pub tau2: Vec<Real>,
    /// Latent effects θ per slice (θ = Y on normal slices).
    pub theta: Vec<DMatrix<Real>>,
    /// Working data: observed values plus this sweep's imputations.
    pub y_work: Vec<DMatrix<Real>>,
    /// Cells contributing to conditionals: observed or imputed this sweep.
    pub live: Vec<DMatrix<bool>>,
}

/// One retained posterior draw.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub u: DMatrix<Real>,
    pub v: DMatrix<Real>,
    pub b: Vec<DMatrix<Real>>,
    pub mu: Vec<Real>,
    pub tau2: Vec<Real>,
}

/// Retained samples plus the metadata needed downstream.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub samples: Vec<SampleRecord>,
    pub likelihoods: Vec<Likelihood>,
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub config: ChainConfig,
}

fn std_normal_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<Real> {
    DVector::from_fn(d, |_, _| rng.sample::<Real, _>(StandardNormal))
}

/// Draw from N(η, Λ⁻¹) given the Cholesky factor Λ = LLᵀ: η + L⁻ᵀz.
fn draw_gaussian<R: Rng + ?Sized>(
    chol: &Cholesky<Real, Dyn>,
    eta: DVector<Real>,
    rng: &mut R,
) -> DVector<Real> {
    let z = std_normal_vector(rng, eta.len());
    let lt = chol.l().transpose();
    eta + lt
        .solve_upper_triangular(&z)
        .expect("triangular solve after successful Cholesky")
}

/// Full conditional of row factor U_l: N(η*, Λ*⁻¹) with
/// Λ* = I + Σ (1/τ_k²)(B_kV_g)(B_kV_g)ᵀ and
/// η* = Λ*⁻¹ Σ (1/τ_k²)(θ_{lgk} − μ_k)B_kV_g over live cells of row l.
/// A row with no live cells draws from the N(0, I) prior.
pub fn sample_row_factor<R: Rng + ?Sized>(
    l: usize,
    state: &ModelState,
    data: &TensorDataset,
    rng: &mut R,
) -> Result<DVector<Real>> {
    let d = state.u.ncols();
    let mut lam = DMatrix::<Real>::identity(d, d);
    let mut rhs = DVector::<Real>::zeros(d);
    for (k, _slice) in data.slices.iter().enumerate() {
        let w = 1.0 / state.tau2[k];
        let bk = &state.b[k];
        for g in 0..data.n_cols() {
            if !state.live[k][(l, g)] {
                continue;
            }
            let p = bk * state.v.row(g).transpose();
            lam.syger(w, &p, &p, 1.0);
            rhs.axpy(w * (state.theta[k][(l, g)] - state.mu[k]), &p, 1.0);
        }
    }
    lam.fill_upper_triangle_with_lower_triangle();
    let chol = Cholesky::new(lam).ok_or(Error::Numerical {
        block: "row-factor",
        iteration: l,
        msg: "row-factor precision matrix is not positive definite".into(),
    })?;
    let eta = chol.solve(&rhs);
    Ok(draw_gaussian(&chol, eta, rng))
}

/// Mirror of [`sample_row_factor`] for column factor V_g, with B_k
/// transposed: the per-cell direction is B_kᵀU_l.
pub fn sample_col_factor<R: Rng + ?Sized>(
    g: usize,
    state: &ModelState,
    data: &TensorDataset,
    rng: &mut R,
) -> Result<DVector<Real>> {
    let d = state.v.ncols();
    let mut lam = DMatrix::<Real>::identity(d, d);
    let mut rhs = DVector::<Real>::zeros(d);
    for (k, _slice) in data.slices.iter().enumerate() {
        let w = 1.0 / state.tau2[k];
        let bk = &state.b[k];
        for l in 0..data.n_rows() {
            if !state.live[k][(l, g)] {
                continue;
            }
            let p = bk.tr_mul(&state.u.row(l).transpose());
            lam.syger(w, &p, &p, 1.0);
            rhs.axpy(w * (state.theta[k][(l, g)] - state.mu[k]), &p, 1.0);
        }
    }
    lam.fill_upper_triangle_with_lower_triangle();
    let chol = Cholesky::new(lam).ok_or(Error::Numerical {
        block: "col-factor",
        iteration: g,
        msg: "column-factor precision matrix is not positive definite".into(),
    })?;
    let eta = chol.solve(&rhs);
    Ok(draw_gaussian(&chol, eta, rng))
}

/// Shared builder for the slice-loading conditional: returns the factored
/// precision Ψ* = (1/τ_k²)Σ(V_g⊗U_l)(V_g⊗U_l)ᵀ (ridge-regularized if
/// singular, since the prior is flat) and the mean ξ* = Ψ*⁻¹(1/τ_k²)Σ(θ−μ)x.
fn slice_loading_moments(
    k: usize,
    state: &ModelState,
    data: &TensorDataset,
) -> Result<(Cholesky<Real, Dyn>, DVector<Real>)> {
    let du = state.u.ncols();
    let dv = state.v.ncols();
    let p = du * dv;
    let w = 1.0 / state.tau2[k];
    let mut psi = DMatrix::<Real>::zeros(p, p);
    let mut xi = DVector::<Real>::zeros(p);
    let mut xcell = DVector::<Real>::zeros(p);
    for g in 0..data.n_cols() {
        for l in 0..data.n_rows() {
            if !state.live[k][(l, g)] {
                continue;
            }
            for b in 0..dv {
                let vb = state.v[(g, b)];
                for a in 0..du {
                    xcell[a + b * du] = state.u[(l, a)] * vb;
                }
            }
            psi.syger(w, &xcell, &xcell, 1.0);
            xi.axpy(w * (state.theta[k][(l, g)] - state.mu[k]), &xcell, 1.0);
        }
    }
    psi.fill_upper_triangle_with_lower_triangle();

    let mut ridge = 1e-8;
    let mut attempt = psi.clone();
    for retry in 0..4 {
        if let Some(chol) = Cholesky::new(attempt.clone()) {
            let mean = chol.solve(&xi);
            return Ok((chol, mean));
        }
        log::warn!(
            "slice {k}: singular loading precision, adding ridge {ridge:.1e} (attempt {})",
            retry + 1
        );
        attempt = psi.clone();
        for i in 0..p {
            attempt[(i, i)] += ridge;
        }
        ridge *= 100.0;
    }
    Err(Error::Numerical {
        block: "slice-loading",
        iteration: k,
        msg: "loading precision matrix stayed singular after ridge escalation".into(),
    })
}

/// Posterior mean ξ* of vec(B_k); with the flat prior this is exactly the
/// generalized-least-squares solution of θ − μ on the Kronecker design over
/// live cells (τ_k² cancels).
pub fn slice_loading_mean(
    k: usize,
    state: &ModelState,
    data: &TensorDataset,
) -> Result<DMatrix<Real>> {
    let (_, mean) = slice_loading_moments(k, state, data)?;
    Ok(DMatrix::from_column_slice(
        state.u.ncols(),
        state.v.ncols(),
        mean.as_slice(),
    ))
}

/// Draw B_k: vec(B_k) ~ N(ξ*, Ψ*⁻¹).
pub fn sample_slice_loading<R: Rng + ?Sized>(
    k: usize,
    state: &ModelState,
    data: &TensorDataset,
    rng: &mut R,
) -> Result<DMatrix<Real>> {
    let (chol, mean) = slice_loading_moments(k, state, data)?;
    let draw = draw_gaussian(&chol, mean, rng);
    Ok(DMatrix::from_column_slice(
        state.u.ncols(),
        state.v.ncols(),
        draw.as_slice(),
    ))
}

/// Draw τ_k²: 1/τ_k² ~ Gamma(a*, rate b*) with a* = (N_k + 1)/2 and
/// b* = (Σ residuals² + 1)/2 over live cells (shape-rate, so the prior for
/// an empty slice is Gamma(1/2, 1/2) with prior precision mean 1). Probit
/// slices keep τ² = 1.
pub fn sample_precision<R: Rng + ?Sized>(
    k: usize,
    state: &ModelState,
    data: &TensorDataset,
    rng: &mut R,
) -> Real {
    if data.slices[k].likelihood == Likelihood::Probit {
        return 1.0;
    }
    let pred = &state.u * &state.b[k] * state.v.transpose();
    let mut n_live = 0usize;
    let mut ss = 0.0;
    for g in 0..data.n_cols() {
        for l in 0..data.n_rows() {
            if !state.live[k][(l, g)] {
                continue;
            }
            let r = state.theta[k][(l, g)] - state.mu[k] - pred[(l, g)];
            ss += r * r;
            n_live += 1;
        }
    }
    let shape = (n_live as Real + 1.0) / 2.0;
    let rate = (ss + 1.0) / 2.0;
    let precision: Real = rng.sample(
        Gamma::new(shape, 1.0 / rate).expect("gamma parameters positive by construction"),
    );
    1.0 / precision.max(1e-300)
}

/// Draw μ_k ~ N(γ*, 1/φ*) with φ* = N_k/τ_k² + 1 and
/// γ* = φ*⁻¹(1/τ_k²)Σ(θ_{lgk} − U_lᵀB_kV_g).
pub fn sample_intercept<R: Rng + ?Sized>(
    k: usize,
    state: &ModelState,
    data: &TensorDataset,
    rng: &mut R,
) -> Real {
    let w = 1.0 / state.tau2[k];
    let pred = &state.u * &state.b[k] * state.v.transpose();
    let mut n_live = 0usize;
    let mut acc = 0.0;
    for g in 0..data.n_cols() {
        for l in 0..data.n_rows() {
            if !state.live[k][(l, g)] {
                continue;
            }
            acc += state.theta[k][(l, g)] - pred[(l, g)];
            n_live += 1;
        }
    }
    let phi = n_live as Real * w + 1.0;
    let gamma = w * acc / phi;
    let z: Real = rng.sample(StandardNormal);
    gamma + z / phi.sqrt()
}

/// Refresh the latent slice θ_k from its conditional given the working data:
/// probit draws N(pred, 1) truncated to the side indicated by Y; tobit keeps
/// θ = Y where Y > 0 and draws the censored side where Y = 0; normal slices
/// set θ = Y identically.
pub fn update_latents<R: Rng + ?Sized>(
    k: usize,
    state: &ModelState,
    data: &TensorDataset,
    rng: &mut R,
) -> DMatrix<Real> {
    let mut theta = state.theta[k].clone();
    let lik = data.slices[k].likelihood;
    let pred = &state.u * &state.b[k] * state.v.transpose();
    for g in 0..data.n_cols() {
        for l in 0..data.n_rows() {
            if !state.live[k][(l, g)] {
                continue;
            }
            let y = state.y_work[k][(l, g)];
            let m = state.mu[k] + pred[(l, g)];
            theta[(l, g)] = match lik {
                Likelihood::Normal => y,
                Likelihood::Probit => {
                    let side = if y == 1.0 { Side::Above } else { Side::Below };
                    sample_truncated_normal(rng, m, 1.0, side)
                }
                Likelihood::Tobit => {
                    if y > 0.0 {
                        y
                    } else {
                        sample_truncated_normal(rng, m, state.tau2[k].sqrt(), Side::Below)
                    }
                }
            };
        }
    }
    theta
}

/// Draw every unobserved cell from the current sampling model and mark it
/// live for this sweep (missing-at-random imputation).
pub fn impute_missing<R: Rng + ?Sized>(
    state: &mut ModelState,
    data: &TensorDataset,
    rng: &mut R,
) {
    for (k, slice) in data.slices.iter().enumerate() {
        let pred = &state.u * &state.b[k] * state.v.transpose();
        let sd = state.tau2[k].sqrt();
        for g in 0..data.n_cols() {
            for l in 0..data.n_rows() {
                if slice.observed[(l, g)] {
                    continue;
                }
                let m = state.mu[k] + pred[(l, g)];
                let y = match slice.likelihood {
                    Likelihood::Normal => {
                        let z: Real = rng.sample(StandardNormal);
                        m + sd * z
                    }
                    Likelihood::Probit => {
                        let u: Real = rng.random();
                        if u < norm_cdf(m) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Likelihood::Tobit => sample_truncated_normal(rng, m, sd, Side::Above),
                };
                state.y_work[k][(l, g)] = y;
                state.live[k][(l, g)] = true;
            }
        }
    }
}

/// Overdispersed-but-centered start: U, V ~ N(0, 1) entries, B = 0,
/// μ_k = observed slice mean (probit: probit of the smoothed frequency),
/// τ_k² = observed slice variance (probit: fixed 1).
pub fn init_state<R: Rng + ?Sized>(
    data: &TensorDataset,
    config: &ChainConfig,
    rng: &mut R,
) -> ModelState {
    let (l_n, g_n) = (data.n_rows(), data.n_cols());
    let u = DMatrix::from_fn(l_n, config.d_u, |_, _| rng.sample::<Real, _>(StandardNormal));
    let v = DMatrix::from_fn(g_n, config.d_v, |_, _| rng.sample::<Real, _>(StandardNormal));
    let mut b = Vec::with_capacity(data.slices.len());
    let mut mu = Vec::with_capacity(data.slices.len());
    let mut tau2 = Vec::with_capacity(data.slices.len());
    let mut theta = Vec::with_capacity(data.slices.len());
    let mut y_work = Vec::with_capacity(data.slices.len());
    let mut live = Vec::with_capacity(data.slices.len());
    for slice in &data.slices {
        b.push(DMatrix::zeros(config.d_u, config.d_v));
        let observed: Vec<Real> = slice
            .observed
            .iter()
            .zip(slice.values.iter())
            .filter(|(&o, _)| o)
            .map(|(_, &y)| y)
            .collect();
        let n_obs = observed.len();
        let mean = if n_obs > 0 {
            observed.iter().sum::<Real>() / n_obs as Real
        } else {
            0.0
        };
        match slice.likelihood {
            Likelihood::Probit => {
                let freq = if n_obs > 0 {
                    (observed.iter().sum::<Real>() + 0.5) / (n_obs as Real + 1.0)
                } else {
                    0.5
                };
                mu.push(norm_ppf(freq));
                tau2.push(1.0);
            }
            Likelihood::Normal | Likelihood::Tobit => {
                mu.push(mean);
                let var = if n_obs > 1 {
                    observed.iter().map(|y| (y - mean) * (y - mean)).sum::<Real>()
                        / (n_obs as Real - 1.0)
                } else {
                    0.0
                };
                tau2.push(if var > 0.0 { var } else { 1.0 });
            }
        }
        theta.push(DMatrix::zeros(l_n, g_n));
        y_work.push(slice.values.clone());
        live.push(slice.observed.clone());
    }
    ModelState {
        u,
        v,
        b,
        mu,
        tau2,
        theta,
        y_work,
        live,
    }
}

/// One full Gibbs sweep in the fixed order: imputation and latent refresh,
/// then all U rows, all V rows, all B slices, all intercepts, all precisions.
pub fn sweep<R: Rng + ?Sized>(
    state: &mut ModelState,
    data: &TensorDataset,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<()> {
    if config.impute {
        impute_missing(state, data, rng);
    }
    for k in 0..data.slices.len() {
        state.theta[k] = update_latents(k, state, data, rng);
    }
    for l in 0..data.n_rows() {
        let row = sample_row_factor(l, state, data, rng)?;
        state.u.set_row(l, &row.transpose());
    }
    for g in 0..data.n_cols() {
        let col = sample_col_factor(g, state, data, rng)?;
        state.v.set_row(g, &col.transpose());
    }
    for k in 0..data.slices.len() {
        state.b[k] = sample_slice_loading(k, state, data, rng)?;
    }
    for k in 0..data.slices.len() {
        state.mu[k] = sample_intercept(k, state, data, rng);
    }
    for k in 0..data.slices.len() {
        state.tau2[k] = sample_precision(k, state, data, rng);
    }
    Ok(())
}

/// Verify the state's support invariants: positive finite τ² (exactly 1 on
/// probit slices), finite factors, and latent/observation consistency on
/// live cells.
pub fn check_support(state: &ModelState, data: &TensorDataset, iteration: usize) -> Result<()> {
    let fail = |msg: String| Error::Numerical {
        block: "support-invariant",
        iteration,
        msg,
    };
    for (k, slice) in data.slices.iter().enumerate() {
        if !(state.tau2[k] > 0.0) || !state.tau2[k].is_finite() {
            return Err(fail(format!("slice {k} has invalid tau2 {}", state.tau2[k])));
        }
        if slice.likelihood == Likelihood::Probit && state.tau2[k] != 1.0 {
            return Err(fail(format!(
                "probit slice {k} has tau2 {} instead of 1",
                state.tau2[k]
            )));
        }
        if !state.mu[k].is_finite() {
            return Err(fail(format!("slice {k} has non-finite intercept")));
        }
        for g in 0..data.n_cols() {
            for l in 0..data.n_rows() {
                if !state.live[k][(l, g)] {
                    continue;
                }
                let y = state.y_work[k][(l, g)];
                let th = state.theta[k][(l, g)];
                if !th.is_finite() {
                    return Err(fail(format!("slice {k} cell ({l}, {g}) has non-finite theta")));
                }
                let ok = match slice.likelihood {
                    Likelihood::Normal => th == y,
                    Likelihood::Probit => {
                        if y == 1.0 {
                            th > 0.0
                        } else {
                            th <= 0.0
                        }
                    }
                    Likelihood::Tobit => {
                        if y > 0.0 {
                            th == y
                        } else {
                            th <= 0.0
                        }
                    }
                };
                if !ok {
                    return Err(fail(format!(
                        "slice {k} cell ({l}, {g}) violates support: y = {y}, theta = {th}"
                    )));
                }
            }
        }
    }
    if state.u.iter().any(|x| !x.is_finite())
        || state.v.iter().any(|x| !x.is_finite())
        || state.b.iter().any(|bk| bk.iter().any(|x| !x.is_finite()))
    {
        return Err(fail("non-finite factor entries".into()));
    }
    Ok(())
}

/// Run one chain: initialize, sweep `iters` times, retain every `thin`-th
/// state after `burn_in`. Support invariants are checked every sweep in
/// debug builds and every 100th sweep (plus the last) in release builds.
/// Deterministic in `config.seed`.
pub fn run_chain(data: &TensorDataset, config: &ChainConfig) -> Result<ChainOutput> {
    data.validate()?;
    config.validate()?;
    let mut rng = rng::master_rng(config.seed);
    let mut state = init_state(data, config, &mut rng);
    let mut samples = Vec::new();
    for it in 0..config.iters {
        sweep(&mut state, data, config, &mut rng)?;
        if cfg!(debug_assertions) || (it + 1) % 100 == 0 || it + 1 == config.iters {
            check_support(&state, data, it)?;
        }
        if it >= config.burn_in && (it - config.burn_in).is_multiple_of(config.thin) {
            samples.push(SampleRecord {
                u: state.u.clone(),
                v: state.v.clone(),
                b: state.b.clone(),
                mu: state.mu.clone(),
                tau2: state.tau2.clone(),
            });
        }
    }
    Ok(ChainOutput {
        samples,
        likelihoods: data.slices.iter().map(|s| s.likelihood).collect(),
        row_names: data.row_names.clone(),
        col_names: data.col_names.clone(),
        config: *config,
    })
}
