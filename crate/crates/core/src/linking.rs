//! Cross-fitted empirical-Bayes linking model.
//!
//! Two-level hierarchy: Ȳ_j | θ_j ~ N(θ_j, σ²/n_j) (sampling model) and
//! θ_j | β ~ N(x_jᵀβ, τ²), β ~ N(0, ψ²I) (linking model on historical
//! features). Variance components (σ̃², ν̃, τ̃², ψ̃²) are estimated on one
//! fold, leave-one-out prior moments (m̃_j, ṽ_j) and guide values b_j are
//! computed for the other, and the classical/FAB p-values are BH-adjusted
//! jointly, so every b_j is independent of its own T_j by construction.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;
use crate::ttest::{self, TestStatistic};
use crate::Real;

/// Largest admissible |b|; beyond this the FAB p-value is numerically the
/// one-sided limit, and unclamped values risk NaN from F(∞ − ∞) cancellation.
pub const GUIDE_CLAMP: Real = 1e8;

/// Floor for τ² in every division so ψ² = 0 fits cannot produce a zero
/// prior variance for the guide.
pub const TAU2_FLOOR: Real = 1e-12;

/// One hypothesis's sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub id: String,
    pub row_key: String,
    pub col_key: String,
    /// Sample mean Ȳ_j.
    pub ybar: Real,
    /// Sample standard deviation S_j (nonnegative).
    pub s: Real,
    /// Replicate count n_j ≥ 2.
    pub n: u32,
}

/// The full set of per-hypothesis summaries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EffectSummaries {
    pub entries: Vec<SummaryEntry>,
}

impl EffectSummaries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// M ≥ 2; n_j ≥ 2; S_j finite and nonnegative; ids and (row, col) pairs
    /// unique.
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "need at least 2 hypotheses, got {}",
                self.entries.len()
            )));
        }
        let mut ids = BTreeMap::new();
        let mut keys = BTreeMap::new();
        for (j, e) in self.entries.iter().enumerate() {
            if e.n < 2 {
                return Err(Error::Validation(format!(
                    "hypothesis {} has n = {} < 2",
                    e.id, e.n
                )));
            }
            if !e.ybar.is_finite() {
                return Err(Error::Validation(format!(
                    "hypothesis {} has non-finite ybar",
                    e.id
                )));
            }
            if !e.s.is_finite() || e.s < 0.0 {
                return Err(Error::Validation(format!(
                    "hypothesis {} has invalid sd {}",
                    e.id, e.s
                )));
            }
            if let Some(prev) = ids.insert(e.id.clone(), j) {
                return Err(Error::Validation(format!(
                    "duplicate id {} at rows {} and {}",
                    e.id, prev, j
                )));
            }
            if let Some(prev) = keys.insert((e.row_key.clone(), e.col_key.clone()), j) {
                return Err(Error::Validation(format!(
                    "duplicate (row, col) key ({}, {}) at rows {} and {}",
                    e.row_key, e.col_key, prev, j
                )));
            }
        }
        Ok(())
    }
}

/// Historical features: an explicit design matrix or a Kronecker factor pair
/// (the design row for hypothesis (l, g) is V_g ⊗ U_l), plus an optional
/// intercept column appended after the structured columns.
#[derive(Debug, Clone)]
pub struct FeatureSource {
    kind: FeatureKind,
    intercept: bool,
}

#[derive(Debug, Clone)]
enum FeatureKind {
    Explicit {
        x: DMatrix<Real>,
        index: BTreeMap<(String, String), usize>,
    },
    Kronecker {
        u: DMatrix<Real>,
        v: DMatrix<Real>,
        row_index: BTreeMap<String, usize>,
        col_index: BTreeMap<String, usize>,
    },
}

/// Resolved position of one hypothesis inside a `FeatureSource`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureRef {
    Row(usize),
    Cell { l: usize, g: usize },
}

impl FeatureSource {
    /// Explicit M × q design with one (row, col) key per matrix row.
    pub fn explicit(
        x: DMatrix<Real>,
        keys: Vec<(String, String)>,
        intercept: bool,
    ) -> Result<Self> {
        if keys.len() != x.nrows() {
            return Err(Error::Validation(format!(
                "feature matrix has {} rows but {} keys",
                x.nrows(),
                keys.len()
            )));
        }
        let mut index = BTreeMap::new();
        for (i, key) in keys.into_iter().enumerate() {
            if index.insert(key.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate feature key ({}, {})",
                    key.0, key.1
                )));
            }
        }
        Ok(Self {
            kind: FeatureKind::Explicit { x, index },
            intercept,
        })
    }

    /// Kronecker pair: U is L × d_U keyed by `row_names`, V is G × d_V keyed
    /// by `col_names`.
    pub fn kronecker(
        u: DMatrix<Real>,
        v: DMatrix<Real>,
        row_names: &[String],
        col_names: &[String],
        intercept: bool,
    ) -> Result<Self> {
        if row_names.len() != u.nrows() || col_names.len() != v.nrows() {
            return Err(Error::Validation(
                "factor key counts must match factor row counts".into(),
            ));
        }
        let mut row_index = BTreeMap::new();
        for (i, name) in row_names.iter().enumerate() {
            if row_index.insert(name.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate row key {name}")));
            }
        }
        let mut col_index = BTreeMap::new();
        for (i, name) in col_names.iter().enumerate() {
            if col_index.insert(name.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate column key {name}")));
            }
        }
        Ok(Self {
            kind: FeatureKind::Kronecker {
                u,
                v,
                row_index,
                col_index,
            },
            intercept,
        })
    }

    pub fn intercept(&self) -> bool {
        self.intercept
    }

    /// Number of feature columns including the intercept if present.
    pub fn q(&self) -> usize {
        let base = match &self.kind {
            FeatureKind::Explicit { x, .. } => x.ncols(),
            FeatureKind::Kronecker { u, v, .. } => u.ncols() * v.ncols(),
        };
        base + usize::from(self.intercept)
    }

    /// Locate the feature row for a hypothesis key pair.
    pub fn resolve(&self, row_key: &str, col_key: &str) -> Option<FeatureRef> {
        match &self.kind {
            FeatureKind::Explicit { index, .. } => index
                .get(&(row_key.to_string(), col_key.to_string()))
                .map(|&i| FeatureRef::Row(i)),
            FeatureKind::Kronecker {
                row_index,
                col_index,
                ..
            } => {
                let l = *row_index.get(row_key)?;
                let g = *col_index.get(col_key)?;
                Some(FeatureRef::Cell { l, g })
            }
        }
    }

    /// Materialize one design row (column-major Kronecker order:
    /// entry a + b·d_U is U[l, a]·V[g, b]); intercept appended last.
    pub fn feature_row(&self, r: FeatureRef) -> DVector<Real> {
        let q = self.q();
        let mut out = DVector::zeros(q);
        match (&self.kind, r) {
            (FeatureKind::Explicit { x, .. }, FeatureRef::Row(i)) => {
                for c in 0..x.ncols() {
                    out[c] = x[(i, c)];
                }
            }
            (FeatureKind::Kronecker { u, v, .. }, FeatureRef::Cell { l, g }) => {
                let du = u.ncols();
                for b in 0..v.ncols() {
                    for a in 0..du {
                        out[a + b * du] = u[(l, a)] * v[(g, b)];
                    }
                }
            }
            _ => unreachable!("FeatureRef kind matches FeatureSource kind"),
        }
        if self.intercept {
            out[q - 1] = 1.0;
        }
        out
    }

    fn kron_parts(&self) -> Option<(&DMatrix<Real>, &DMatrix<Real>)> {
        match &self.kind {
            FeatureKind::Kronecker { u, v, .. } => Some((u, v)),
            FeatureKind::Explicit { .. } => None,
        }
    }
}

/// Random half split of hypotheses into folds 1 and 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    /// Entry j is 1 or 2.
    pub fold_of: Vec<u8>,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn fold_indices(&self, fold: u8) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Assign a uniformly random ⌊M/2⌋ of the hypotheses to fold 1, the rest to
/// fold 2; deterministic in the seed.
pub fn partition(m: usize, seed: u64) -> Result<FoldAssignment> {
    if m < 4 {
        return Err(Error::InsufficientData(format!(
            "cross-fitting needs at least 4 hypotheses, got {m}"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng::derived_rng(seed, 0));
    let mut fold_of = vec![2u8; m];
    for &j in &order[..m / 2] {
        fold_of[j] = 1;
    }
    Ok(FoldAssignment { fold_of, seed })
}

/// Pooled variance over a fold: σ̃² = Σ S_j²(n_j − 1)/ν̃, ν̃ = Σ(n_j − 1).
pub fn pooled_sigma2(summaries: &EffectSummaries, fold: &[usize]) -> Result<(Real, Real)> {
    if fold.is_empty() {
        return Err(Error::InsufficientData(
            "pooled variance requires a nonempty fold".into(),
        ));
    }
    let mut num = 0.0;
    let mut dof = 0.0;
    for &j in fold {
        let e = &summaries.entries[j];
        let nu_j = (e.n - 1) as Real;
        num += e.s * e.s * nu_j;
        dof += nu_j;
    }
    if dof <= 0.0 {
        return Err(Error::InsufficientData(
            "pooled variance has zero degrees of freedom".into(),
        ));
    }
    Ok((num / dof, dof))
}

/// Eigenstructure of the fold's marginal covariance direction: eigenvalues
/// λ of X Xᵀ (as a length-q vector, zero-padded past the rank), squared
/// projections of Ȳ on the corresponding eigenvectors, and ‖Ȳ‖².
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub lambda: Vec<Real>,
    pub projections: Vec<Real>,
    pub total_ss: Real,
}

/// Decompose the fold-restricted design. In Kronecker mode with no intercept
/// and the fold covering the complete L × G grid, the singular values of
/// V ⊗ U are the pairwise products of the factor singular values and the
/// projections come from the factor bases; any other shape materializes the
/// fold's rows and takes a thin SVD.
pub fn spectral_decompose(
    features: &FeatureSource,
    summaries: &EffectSummaries,
    fold: &[usize],
) -> Result<Spectrum> {
    if fold.is_empty() {
        return Err(Error::InsufficientData(
            "spectral decomposition requires a nonempty fold".into(),
        ));
    }
    let q = features.q();
    let m_f = fold.len();
    let mut refs = Vec::with_capacity(m_f);
    let mut ybar = DVector::<Real>::zeros(m_f);
    for (pos, &j) in fold.iter().enumerate() {
        let e = &summaries.entries[j];
        let r = features.resolve(&e.row_key, &e.col_key).ok_or_else(|| {
            Error::Validation(format!("hypothesis {} has no feature row", e.id))
        })?;
        refs.push(r);
        ybar[pos] = e.ybar;
    }
    let total_ss = ybar.norm_squared();

    let mut lambda = vec![0.0; q];
    let mut projections = vec![0.0; q];

    let kron_grid = full_grid_cover(features, &refs);
    if let (Some((u, v)), false, Some(cells)) = (features.kron_parts(), features.intercept, kron_grid)
    {
        let (l_count, g_count) = (u.nrows(), v.nrows());
        let du = u.ncols();
        let mut ymat = DMatrix::<Real>::zeros(l_count, g_count);
        for (pos, &(l, g)) in cells.iter().enumerate() {
            ymat[(l, g)] = ybar[pos];
        }
        let svd_u = u.clone().svd(true, false);
        let svd_v = v.clone().svd(true, false);
        let qu = svd_u.u.as_ref().expect("svd(true, _) returns u");
        let qv = svd_v.u.as_ref().expect("svd(true, _) returns u");
        let proj = qu.transpose() * &ymat * qv;
        for b in 0..svd_v.singular_values.len() {
            for a in 0..svd_u.singular_values.len() {
                let sv = svd_u.singular_values[a] * svd_v.singular_values[b];
                let idx = a + b * du;
                lambda[idx] = sv * sv;
                projections[idx] = proj[(a, b)] * proj[(a, b)];
            }
        }
    } else {
        let mut x = DMatrix::<Real>::zeros(m_f, q);
        for (pos, &r) in refs.iter().enumerate() {
            x.set_row(pos, &features.feature_row(r).transpose());
        }
        let svd = x.svd(true, false);
        let qx = svd.u.as_ref().expect("svd(true, _) returns u");
        for k in 0..svd.singular_values.len().min(q) {
            let sv = svd.singular_values[k];
            lambda[k] = sv * sv;
            projections[k] = {
                let d = qx.column(k).dot(&ybar);
                d * d
            };
        }
    }

    // Numerically-zero directions carry their mass through the remainder
    // term instead; zero them exactly so the rank count is unambiguous.
    let lambda_max = lambda.iter().cloned().fold(0.0, Real::max);
    let tol = lambda_max * 1e-12;
    for k in 0..q {
        if lambda[k] <= tol {
            lambda[k] = 0.0;
            projections[k] = 0.0;
        }
    }

    Ok(Spectrum {
        lambda,
        projections,
        total_ss,
    })
}

/// If every resolved reference is a Kronecker cell and the fold covers each
/// (l, g) exactly once over the full grid, return the cells in fold order.
fn full_grid_cover(features: &FeatureSource, refs: &[FeatureRef]) -> Option<Vec<(usize, usize)>> {
    let (u, v) = features.kron_parts()?;
    let (l_count, g_count) = (u.nrows(), v.nrows());
    if refs.len() != l_count * g_count {
        return None;
    }
    let mut seen = vec![false; l_count * g_count];
    let mut cells = Vec::with_capacity(refs.len());
    for r in refs {
        match *r {
            FeatureRef::Cell { l, g } => {
                let flat = l + g * l_count;
                if seen[flat] {
                    return None;
                }
                seen[flat] = true;
                cells.push((l, g));
            }
            FeatureRef::Row(_) => return None,
        }
    }
    Some(cells)
}

/// Exact marginal log-likelihood of the fold's Ȳ under
/// A = ψ²XXᵀ + (τ² + σ̃²/n̄)I, evaluated through the spectrum:
/// −½[m_f·log 2π + Σ_{λ>0}(log d_j + proj_j/d_j) + (m_f − r)·log c + rem/c]
/// with d_j = ψ²λ_j + c, c = τ² + σ̃²/n̄, and rem the squared mass of Ȳ
/// outside the feature column space.
pub fn marginal_loglik(
    tau2: Real,
    psi2: Real,
    sigma2_over_nbar: Real,
    spectrum: &Spectrum,
    fold_size: usize,
) -> Result<Real> {
    if !(tau2 >= 0.0) || !(psi2 >= 0.0) {
        return Err(Error::Domain(format!(
            "variance components must be nonnegative, got tau2 = {tau2}, psi2 = {psi2}"
        )));
    }
    let c = tau2 + sigma2_over_nbar;
    if !(c > 0.0) {
        return Err(Error::Domain(format!(
            "tau2 + sigma2/nbar must be positive, got {c}"
        )));
    }
    let mut rank = 0usize;
    let mut acc = 0.0;
    let mut proj_sum = 0.0;
    for (&l, &p) in spectrum.lambda.iter().zip(&spectrum.projections) {
        if l > 0.0 {
            rank += 1;
            let d = psi2 * l + c;
            acc += d.ln() + p / d;
            proj_sum += p;
        }
    }
    if fold_size < rank {
        return Err(Error::Validation(format!(
            "fold size {fold_size} smaller than spectrum rank {rank}"
        )));
    }
    let rem = (spectrum.total_ss - proj_sum).max(0.0);
    const LN_2PI: Real = 1.837_877_066_409_345_3;
    let m_f = fold_size as Real;
    Ok(-0.5 * (m_f * LN_2PI + acc + ((fold_size - rank) as Real) * c.ln() + rem / c))
}

/// Variance components estimated on one fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimates {
    /// Pooled sampling variance σ̃².
    pub sigma2_tilde: Real,
    /// Pooled degrees of freedom ν̃.
    pub nu_tilde: Real,
    /// Linking-model residual variance τ̃².
    pub tau2: Real,
    /// Prior variance ψ̃² of the regression weights.
    pub psi2: Real,
    /// Mean replicate count of the fitting fold.
    pub nbar: Real,
}

/// Maximize the spectral marginal likelihood over (τ², ψ²) with a
/// multi-start Nelder-Mead in log coordinates over the box
/// [1e-6, max(10·‖Ȳ‖²/m_f, 1e-4)]².
pub fn fit_variance_components(
    spectrum: &Spectrum,
    sigma2_over_nbar: Real,
    fold_size: usize,
) -> Result<(Real, Real)> {
    if fold_size == 0 {
        return Err(Error::InsufficientData("empty fold in variance fit".into()));
    }
    // Surface any domain/shape problem once, so the optimizer's closure can
    // rely on evaluations never failing.
    marginal_loglik(1.0, 1.0, sigma2_over_nbar, spectrum, fold_size)?;
    let mean_square = spectrum.total_ss / fold_size as Real;
    let lo: Real = 1e-6;
    let hi: Real = (10.0 * mean_square).max(1e-4);
    let (la, lb) = (lo.ln(), hi.ln());
    let step = (lb - la) / 8.0;
    let mut objective = |a: f64, b: f64| {
        -marginal_loglik(a.exp(), b.exp(), sigma2_over_nbar, spectrum, fold_size)
            .expect("positive variances are in-domain")
    };
    let mut best: Option<((f64, f64), f64)> = None;
    for start in [(la, la), (la, lb), (lb, la), (lb, lb)] {
        let (point, value) = crate::optim::nelder_mead_2d(&mut objective, start, step, 500, 1e-9);
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((point, value));
        }
    }
    let ((a, b), _) = best.expect("at least one start");
    Ok((a.exp(), b.exp()))
}

/// Shared per-fold state for leave-one-out prior parameters: the Gram matrix
/// G = Σ_i h_i x_i x_iᵀ + ψ⁻²I over ALL hypotheses (h_i = 1/(τ² + σ̃²/n_i)),
/// factored once; each hypothesis is then removed by rank-one downdate.
#[derive(Debug)]
pub struct LooEngine {
    x: DMatrix<Real>,
    ybar: DVector<Real>,
    h: Vec<Real>,
    w: Vec<Real>,
    chol: Option<Cholesky<Real, Dyn>>,
    tau2: Real,
    psi2: Real,
}

impl LooEngine {
    /// `x` is M × q over all hypotheses, `ybar` and `n` are length M.
    pub fn new(
        x: DMatrix<Real>,
        ybar: DVector<Real>,
        n: &[Real],
        estimates: &VarianceEstimates,
    ) -> Result<Self> {
        let m = x.nrows();
        if ybar.len() != m || n.len() != m {
            return Err(Error::Validation(format!(
                "LOO engine dimension mismatch: x has {m} rows, ybar {}, n {}",
                ybar.len(),
                n.len()
            )));
        }
        if !(estimates.sigma2_tilde > 0.0) {
            return Err(Error::Domain(format!(
                "sigma2_tilde must be positive, got {}",
                estimates.sigma2_tilde
            )));
        }
        let tau2 = estimates.tau2.max(TAU2_FLOOR);
        let psi2 = estimates.psi2;
        let mut h = Vec::with_capacity(m);
        let mut w = Vec::with_capacity(m);
        for &n_j in n {
            if !(n_j >= 1.0) {
                return Err(Error::Domain(format!("replicate count {n_j} below 1")));
            }
            let w_j = estimates.sigma2_tilde / n_j;
            w.push(w_j);
            h.push(1.0 / (tau2 + w_j));
        }
        let chol = if psi2 < 1e-300 {
            // Prior on β collapses to a point mass at zero; the analytic
            // limit (m̃, ṽ) = (0, τ²) is handled in prior_params.
            None
        } else {
            let q = x.ncols();
            let mut g = DMatrix::<Real>::identity(q, q) / psi2;
            for i in 0..m {
                let xi = x.row(i);
                let hi = h[i];
                g.syger(hi, &xi.transpose(), &xi.transpose(), 1.0);
            }
            g.fill_upper_triangle_with_lower_triangle();
            Some(Cholesky::new(g).ok_or(Error::Numerical {
                block: "loo-gram",
                iteration: 0,
                msg: "Cholesky of the LOO Gram matrix failed".into(),
            })?)
        };
        Ok(Self {
            x,
            ybar,
            h,
            w,
            chol,
            tau2,
            psi2,
        })
    }

    pub fn tau2(&self) -> Real {
        self.tau2
    }

    /// Leave-one-out prior moments (m̃_j, ṽ_j) by Woodbury downdate:
    /// m̃_j = x_jᵀG_{−j}⁻¹c_{−j} and
    /// ṽ_j = (W_jj/(W_jj + τ²))²·x_jᵀG_{−j}⁻¹x_j + τ², with
    /// x_jᵀG_{−j}⁻¹ = x_jᵀG⁻¹/(1 − h_j s_j), s_j = x_jᵀG⁻¹x_j.
    ///
    /// c_{−j} is accumulated without row j (not by subtracting it), so the
    /// result carries no floating-point echo of Ȳ_j at all: the independence
    /// of guides from their own test statistics is bitwise, not approximate.
    pub fn prior_params(&self, j: usize) -> Result<(Real, Real)> {
        let Some(chol) = &self.chol else {
            return Ok((0.0, self.tau2));
        };
        let xj = self.x.row(j).transpose();
        let gx = chol.solve(&xj);
        let s = xj.dot(&gx);
        let hs = self.h[j] * s;
        let denom = 1.0 - hs;
        if denom < 1e-10 {
            return self.prior_params_direct(j);
        }
        let c_minus_j = self.c_without(j);
        let m_tilde = gx.dot(&c_minus_j) / denom;
        let shrink = self.w[j] * self.h[j];
        let v_tilde = shrink * shrink * s / denom + self.tau2;
        Ok((m_tilde, v_tilde))
    }

    /// The arrangement as printed in the derivation,
    /// m̃_j = θ̃_j − [h_j s_j/(1 − h_j s_j)](Ȳ_j − θ̃_j) with
    /// θ̃_j = x_jᵀG⁻¹XᵀH⁻¹Ȳ; algebraically identical to `prior_params` and
    /// kept for the equivalence tests.
    pub fn prior_params_reference(&self, j: usize) -> Result<(Real, Real)> {
        let Some(chol) = &self.chol else {
            return Ok((0.0, self.tau2));
        };
        let xj = self.x.row(j).transpose();
        let gx = chol.solve(&xj);
        let s = xj.dot(&gx);
        let hs = self.h[j] * s;
        let denom = 1.0 - hs;
        if denom < 1e-10 {
            return self.prior_params_direct(j);
        }
        let mut c_full = DVector::<Real>::zeros(self.x.ncols());
        for i in 0..self.x.nrows() {
            c_full.axpy(self.h[i] * self.ybar[i], &self.x.row(i).transpose(), 1.0);
        }
        let theta_tilde = gx.dot(&c_full);
        let lever = hs / denom;
        let m_tilde = theta_tilde - lever * (self.ybar[j] - theta_tilde);
        let shrink = self.w[j] * self.h[j];
        let v_tilde = shrink * shrink * (lever / self.h[j]) + self.tau2;
        Ok((m_tilde, v_tilde))
    }

    /// Direct leave-one-out refit: rebuild G_{−j} and c_{−j} from scratch and
    /// invert. Used as the guarded fallback when the Woodbury denominator is
    /// numerically unsafe, and as the oracle the fast path is tested against.
    pub fn prior_params_direct(&self, j: usize) -> Result<(Real, Real)> {
        if self.chol.is_none() {
            return Ok((0.0, self.tau2));
        };
        let q = self.x.ncols();
        let mut g = DMatrix::<Real>::identity(q, q) / self.psi2;
        for i in 0..self.x.nrows() {
            if i == j {
                continue;
            }
            let xi = self.x.row(i);
            g.syger(self.h[i], &xi.transpose(), &xi.transpose(), 1.0);
        }
        g.fill_upper_triangle_with_lower_triangle();
        let chol = Cholesky::new(g).ok_or(Error::Numerical {
            block: "loo-gram-downdated",
            iteration: j,
            msg: "Cholesky of the downdated Gram matrix failed".into(),
        })?;
        let xj = self.x.row(j).transpose();
        let gx = chol.solve(&xj);
        let m_tilde = gx.dot(&self.c_without(j));
        let s_minus = xj.dot(&gx);
        let shrink = self.w[j] * self.h[j];
        let v_tilde = shrink * shrink * s_minus + self.tau2;
        Ok((m_tilde, v_tilde))
    }

    /// The undamped alternative prior variance x_jᵀG_{−j}⁻¹x_j + τ²,
    /// i.e. without the (W_jj/(W_jj + τ²))² factor of the printed form. Not
    /// used by the pipeline; exists so the comparison test can document how
    /// the two candidates differ.
    pub fn prior_variance_unshrunk(&self, j: usize) -> Result<Real> {
        let Some(chol) = &self.chol else {
            return Ok(self.tau2);
        };
        let xj = self.x.row(j).transpose();
        let gx = chol.solve(&xj);
        let s = xj.dot(&gx);
        let denom = 1.0 - self.h[j] * s;
        Ok(s / denom + self.tau2)
    }

    /// XᵀH⁻¹Ȳ accumulated with row j skipped.
    fn c_without(&self, j: usize) -> DVector<Real> {
        let mut c = DVector::<Real>::zeros(self.x.ncols());
        for i in 0..self.x.nrows() {
            if i == j {
                continue;
            }
            c.axpy(self.h[i] * self.ybar[i], &self.x.row(i).transpose(), 1.0);
        }
        c
    }
}

/// Convenience wrapper over [`LooEngine`] for a single hypothesis.
pub fn loo_prior_params(
    j: usize,
    x: &DMatrix<Real>,
    ybar: &DVector<Real>,
    n: &[Real],
    estimates: &VarianceEstimates,
) -> Result<(Real, Real)> {
    LooEngine::new(x.clone(), ybar.clone(), n, estimates)?.prior_params(j)
}

/// Guide value b = 2m̃σ̃/(√n_j·ṽ), clamped to ±[`GUIDE_CLAMP`].
pub fn guide_value(m_tilde: Real, v_tilde: Real, sigma2_tilde: Real, n_j: Real) -> Result<Real> {
    if !(v_tilde > 0.0) {
        return Err(Error::Domain(format!(
            "guide requires v_tilde > 0, got {v_tilde}"
        )));
    }
    if !(sigma2_tilde > 0.0) || !(n_j >= 1.0) {
        return Err(Error::Domain(format!(
            "guide requires sigma2_tilde > 0 and n >= 1, got {sigma2_tilde}, {n_j}"
        )));
    }
    let b = 2.0 * m_tilde * sigma2_tilde.sqrt() / (n_j.sqrt() * v_tilde);
    Ok(b.clamp(-GUIDE_CLAMP, GUIDE_CLAMP))
}

/// Leave-one-out prior parameters and the guide for one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorParams {
    pub m_tilde: Real,
    pub v_tilde: Real,
    pub b_fab: Real,
}

/// Per-hypothesis output of the full analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisResult {
    pub id: String,
    pub t: Real,
    pub dof: Real,
    pub b_fab: Real,
    pub m_tilde: Real,
    pub v_tilde: Real,
    pub p_classical: Real,
    pub p_fab: Real,
    pub q_classical: Real,
    pub q_fab: Real,
    pub fold: u8,
}

/// Hypotheses left out of the analysis, with the reason; never silent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub id: String,
    pub reason: String,
}

/// Fit diagnostics for one testing fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldFitSummary {
    /// Components fitted on the opposite fold.
    pub estimates: VarianceEstimates,
    /// Pooled variance of the testing fold itself (standardizes T).
    pub sigma2_hat: Real,
    /// Degrees of freedom of `sigma2_hat`.
    pub nu_hat: Real,
    pub size: usize,
}

/// Complete cross-fitted FAB analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct FabFit {
    /// One record per analyzed hypothesis, in input order.
    pub records: Vec<HypothesisResult>,
    /// Summaries for testing folds 1 and 2.
    pub folds: [FoldFitSummary; 2],
    pub excluded: Vec<Exclusion>,
    pub seed: u64,
    pub alpha: Real,
}

/// Run the full cross-fitted pipeline:
/// 1. split hypotheses into two folds;
/// 2. per testing fold, estimate (σ̃², ν̃) then (τ̃², ψ̃²) from the OTHER
///    fold only;
/// 3. compute (m̃_j, ṽ_j) through the leave-one-out engine built over all
///    hypotheses with the other fold's components, and the guide b_j;
/// 4. standardize T_j with the testing fold's own pooled variance
///    (ν̂ = Σ(n_i − 1) within the fold);
/// 5. classical and FAB p-values, floored and BH-adjusted jointly over all
///    analyzed hypotheses.
pub fn run_fab_analysis(
    summaries: &EffectSummaries,
    features: &FeatureSource,
    seed: u64,
    alpha: Real,
) -> Result<FabFit> {
    summaries.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }

    // Resolve features; unresolvable hypotheses go to the exclusion report.
    let mut analyzed: Vec<usize> = Vec::with_capacity(summaries.len());
    let mut excluded = Vec::new();
    for (j, e) in summaries.entries.iter().enumerate() {
        if features.resolve(&e.row_key, &e.col_key).is_some() {
            analyzed.push(j);
        } else {
            excluded.push(Exclusion {
                id: e.id.clone(),
                reason: format!(
                    "no feature row for keys ({}, {})",
                    e.row_key, e.col_key
                ),
            });
        }
    }
    let m = analyzed.len();
    if m < 4 {
        return Err(Error::InsufficientData(format!(
            "only {m} hypotheses resolve to feature rows; need at least 4"
        )));
    }

    let assignment = partition(m, seed)?;

    // Design over all analyzed hypotheses, in analyzed order.
    let q = features.q();
    let mut x_all = DMatrix::<Real>::zeros(m, q);
    let mut ybar_all = DVector::<Real>::zeros(m);
    let mut n_all = vec![0.0; m];
    for (pos, &j) in analyzed.iter().enumerate() {
        let e = &summaries.entries[j];
        let r = features
            .resolve(&e.row_key, &e.col_key)
            .expect("resolved above");
        x_all.set_row(pos, &features.feature_row(r).transpose());
        ybar_all[pos] = e.ybar;
        n_all[pos] = e.n as Real;
    }

    let analyzed_summaries = EffectSummaries {
        entries: analyzed
            .iter()
            .map(|&j| summaries.entries[j].clone())
            .collect(),
    };

    let mut fold_summaries: Vec<FoldFitSummary> = Vec::with_capacity(2);
    let mut stats: Vec<Option<TestStatistic>> = vec![None; m];
    let mut priors: Vec<Option<PriorParams>> = vec![None; m];

    for fold in [1u8, 2u8] {
        let testing = assignment.fold_indices(fold);
        let fitting = assignment.fold_indices(3 - fold);

        let (sigma2_tilde, nu_tilde) = pooled_sigma2(&analyzed_summaries, &fitting)?;
        let nbar =
            fitting.iter().map(|&i| n_all[i]).sum::<Real>() / fitting.len() as Real;
        let spectrum = spectral_decompose(features, &analyzed_summaries, &fitting)?;
        let (tau2, psi2) =
            fit_variance_components(&spectrum, sigma2_tilde / nbar, fitting.len())?;
        let estimates = VarianceEstimates {
            sigma2_tilde,
            nu_tilde,
            tau2,
            psi2,
            nbar,
        };

        let engine = LooEngine::new(x_all.clone(), ybar_all.clone(), &n_all, &estimates)?;
        let (sigma2_hat, nu_hat) = pooled_sigma2(&analyzed_summaries, &testing)?;

        for &i in &testing {
            let (m_tilde, v_tilde) = engine.prior_params(i)?;
            let b_fab = guide_value(m_tilde, v_tilde, sigma2_tilde, n_all[i])?;
            let t = ybar_all[i] / (sigma2_hat / n_all[i]).sqrt();
            stats[i] = Some(TestStatistic {
                t,
                dof: nu_hat,
                guide: b_fab,
            });
            priors[i] = Some(PriorParams {
                m_tilde,
                v_tilde,
                b_fab,
            });
        }
        fold_summaries.push(FoldFitSummary {
            estimates,
            sigma2_hat,
            nu_hat,
            size: testing.len(),
        });
    }

    let stats: Vec<TestStatistic> = stats
        .into_iter()
        .map(|s| s.expect("every analyzed hypothesis is in exactly one fold"))
        .collect();
    let pvals = ttest::p_value_records(&stats)?;

    let records = (0..m)
        .map(|i| {
            let prior = priors[i].expect("filled with stats");
            HypothesisResult {
                id: analyzed_summaries.entries[i].id.clone(),
                t: stats[i].t,
                dof: stats[i].dof,
                b_fab: prior.b_fab,
                m_tilde: prior.m_tilde,
                v_tilde: prior.v_tilde,
                p_classical: pvals[i].p_classical,
                p_fab: pvals[i].p_fab,
                q_classical: pvals[i].q_classical,
                q_fab: pvals[i].q_fab,
                fold: assignment.fold_of[i],
            }
        })
        .collect();

    Ok(FabFit {
        records,
        folds: [fold_summaries[0], fold_summaries[1]],
        excluded,
        seed,
        alpha,
    })
}
