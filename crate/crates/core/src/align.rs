//! Post-hoc alignment of factorization draws. The model is invariant to
//! U → UR_u D_u, V → VR_v D_v, B_k → D_u⁻¹R_uᵀ B_k R_v D_v⁻¹ for orthogonal
//! R and diagonal D, so raw samples wander over that orbit. Alignment maps
//! every retained draw to a canonical representative: columns of U and V at
//! unit norm, rotated to a common reference, with each slice loading
//! compensated so the reconstruction U B_k Vᵀ is untouched.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::{ChainOutput, Likelihood};
use crate::Real;

/// Relative singular-value threshold below which a Procrustes direction is
/// treated as undetermined.
const DEGENERATE_TOL: Real = 1e-12;
/// Fixpoint stopping rule: max deviation of the incremental rotation and
/// rescaling from the identity.
const FIXPOINT_TOL: Real = 1e-13;
const FIXPOINT_CAP: usize = 100;

/// Orthogonal R minimizing ‖sample·R − reference‖_F. With M = referenceᵀ ·
/// sample = WΣZᵀ the minimizer is R = ZWᵀ. Directions with singular value
/// ≤ 1e-12·σ_max are undetermined; their singular-vector signs are
/// canonicalized (first nonzero entry positive, each side independently)
/// so the returned minimizer is deterministic, and the event is logged.
pub fn procrustes_rotation(
    sample: &DMatrix<Real>,
    reference: &DMatrix<Real>,
) -> Result<DMatrix<Real>> {
    if sample.shape() != reference.shape() {
        return Err(Error::Validation(format!(
            "procrustes shapes differ: sample {:?} vs reference {:?}",
            sample.shape(),
            reference.shape()
        )));
    }
    let m = reference.transpose() * sample;
    let svd = m.svd(true, true);
    let mut w = svd.u.expect("svd computed with u requested");
    let mut z_t = svd.v_t.expect("svd computed with v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, Real::max);
    let mut degenerate = false;
    for i in 0..sv.len() {
        if sv[i] <= DEGENERATE_TOL * smax {
            degenerate = true;
            canonicalize_sign(&mut w.column_mut(i).iter_mut());
            canonicalize_sign(&mut z_t.row_mut(i).iter_mut());
        }
    }
    if degenerate {
        log::warn!("procrustes cross-matrix has degenerate directions; signs canonicalized");
    }
    Ok(z_t.transpose() * w.transpose())
}

/// Flip a singular vector so its first nonzero entry is positive.
fn canonicalize_sign<'a, I: Iterator<Item = &'a mut Real>>(entries: &mut I) {
    let collected: Vec<&mut Real> = entries.collect();
    let flip = collected
        .iter()
        .find(|x| ***x != 0.0)
        .map(|x| **x < 0.0)
        .unwrap_or(false);
    if flip {
        for x in collected {
            *x = -*x;
        }
    }
}

/// Aligned posterior draws plus the accumulated per-sample transforms.
#[derive(Debug, Clone)]
pub struct AlignedSamples {
    pub u: Vec<DMatrix<Real>>,
    pub v: Vec<DMatrix<Real>>,
    pub b: Vec<Vec<DMatrix<Real>>>,
    pub mu: Vec<Vec<Real>>,
    pub tau2: Vec<Vec<Real>>,
    /// Right-multipliers T with U_aligned = U_raw · T, one per sample.
    pub u_transforms: Vec<DMatrix<Real>>,
    pub v_transforms: Vec<DMatrix<Real>>,
    /// Index of the retained sample used as the alignment reference.
    pub reference_index: usize,
    /// Columns that had exactly zero norm somewhere in the chain (their
    /// scale was left at 1 rather than normalized).
    pub zero_columns_u: Vec<usize>,
    pub zero_columns_v: Vec<usize>,
    pub likelihoods: Vec<Likelihood>,
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
}

/// Posterior point estimates: entrywise means over aligned samples.
#[derive(Debug, Clone)]
pub struct PointEstimates {
    pub u: DMatrix<Real>,
    pub v: DMatrix<Real>,
    pub b: Vec<DMatrix<Real>>,
    pub mu: Vec<Real>,
    pub tau2: Vec<Real>,
}

/// One alignment micro-step applied to a factor matrix: rotate toward the
/// reference, then rescale columns to unit norm. Returns the rotation, the
/// applied column scales, and the step's max deviation from the identity.
struct FactorStep {
    rot: DMatrix<Real>,
    scale: DVector<Real>,
    dev: Real,
}

fn factor_step(
    cur: &mut DMatrix<Real>,
    reference: &DMatrix<Real>,
    zero_flags: &mut BTreeSet<usize>,
) -> Result<FactorStep> {
    let rot = procrustes_rotation(cur, reference)?;
    *cur = &*cur * &rot;
    let mut scale = DVector::from_element(cur.ncols(), 1.0);
    for a in 0..cur.ncols() {
        let norm = cur.column(a).norm();
        if norm > 0.0 {
            scale[a] = 1.0 / norm;
            cur.column_mut(a).scale_mut(scale[a]);
        } else {
            zero_flags.insert(a);
        }
    }
    let d = cur.ncols();
    let mut dev: Real = 0.0;
    for i in 0..d {
        dev = dev.max((scale[i] - 1.0).abs());
        for j in 0..d {
            let id = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((rot[(i, j)] - id).abs());
        }
    }
    Ok(FactorStep { rot, scale, dev })
}

/// Compensate the slice loadings and the running transform for a U-side
/// step U → U·R·D: B_k → D⁻¹RᵀB_k, T → T·R·D.
fn apply_u_step(step: &FactorStep, b: &mut [DMatrix<Real>], transform: &mut DMatrix<Real>) {
    for bk in b.iter_mut() {
        let mut nb = step.rot.tr_mul(bk);
        for a in 0..nb.nrows() {
            nb.row_mut(a).scale_mut(1.0 / step.scale[a]);
        }
        *bk = nb;
    }
    *transform = &*transform * &step.rot;
    for a in 0..transform.ncols() {
        transform.column_mut(a).scale_mut(step.scale[a]);
    }
}

/// Mirror of [`apply_u_step`] for V → V·R·D: B_k → B_k·R·D⁻¹, T → T·R·D.
fn apply_v_step(step: &FactorStep, b: &mut [DMatrix<Real>], transform: &mut DMatrix<Real>) {
    for bk in b.iter_mut() {
        let mut nb = &*bk * &step.rot;
        for a in 0..nb.ncols() {
            nb.column_mut(a).scale_mut(1.0 / step.scale[a]);
        }
        *bk = nb;
    }
    *transform = &*transform * &step.rot;
    for a in 0..transform.ncols() {
        transform.column_mut(a).scale_mut(step.scale[a]);
    }
}

/// Unit-column copy of a matrix; zero columns are flagged and left alone.
fn unit_columns(m: &DMatrix<Real>, zero_flags: &mut BTreeSet<usize>) -> DMatrix<Real> {
    let mut out = m.clone();
    for a in 0..out.ncols() {
        let norm = out.column(a).norm();
        if norm > 0.0 {
            out.column_mut(a).scale_mut(1.0 / norm);
        } else {
            zero_flags.insert(a);
        }
    }
    out
}

/// Align every retained draw of a chain. The final retained sample anchors
/// the orientation: each draw is first rotated onto that raw reference and
/// column-normalized, then refined to a fixpoint of (rotate toward the
/// unit-column reference, rescale) so that re-running the alignment is a
/// no-op. Slice loadings are compensated at every micro-step, which keeps
/// each draw's reconstruction U B_k Vᵀ bitwise-accumulation close to the
/// raw one; intercepts and variances pass through untouched.
pub fn align_chain(chain: &ChainOutput) -> Result<AlignedSamples> {
    if chain.samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "alignment needs at least 2 retained samples, got {}",
            chain.samples.len()
        )));
    }
    let reference_index = chain.samples.len() - 1;
    let ref_u_raw = chain.samples[reference_index].u.clone();
    let ref_v_raw = chain.samples[reference_index].v.clone();
    let mut zero_u = BTreeSet::new();
    let mut zero_v = BTreeSet::new();
    let ref_u_n = unit_columns(&ref_u_raw, &mut zero_u);
    let ref_v_n = unit_columns(&ref_v_raw, &mut zero_v);

    let n = chain.samples.len();
    let mut out = AlignedSamples {
        u: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        mu: Vec::with_capacity(n),
        tau2: Vec::with_capacity(n),
        u_transforms: Vec::with_capacity(n),
        v_transforms: Vec::with_capacity(n),
        reference_index,
        zero_columns_u: Vec::new(),
        zero_columns_v: Vec::new(),
        likelihoods: chain.likelihoods.clone(),
        row_names: chain.row_names.clone(),
        col_names: chain.col_names.clone(),
    };

    for rec in &chain.samples {
        let mut u_cur = rec.u.clone();
        let mut v_cur = rec.v.clone();
        let mut b_cur = rec.b.clone();
        let d_u = u_cur.ncols();
        let d_v = v_cur.ncols();
        let mut t_u = DMatrix::<Real>::identity(d_u, d_u);
        let mut t_v = DMatrix::<Real>::identity(d_v, d_v);

        let step = factor_step(&mut u_cur, &ref_u_raw, &mut zero_u)?;
        apply_u_step(&step, &mut b_cur, &mut t_u);
        let step = factor_step(&mut v_cur, &ref_v_raw, &mut zero_v)?;
        apply_v_step(&step, &mut b_cur, &mut t_v);

        let mut prev = Real::INFINITY;
        for _ in 0..FIXPOINT_CAP {
            let su = factor_step(&mut u_cur, &ref_u_n, &mut zero_u)?;
            apply_u_step(&su, &mut b_cur, &mut t_u);
            let sv = factor_step(&mut v_cur, &ref_v_n, &mut zero_v)?;
            apply_v_step(&sv, &mut b_cur, &mut t_v);
            let dev = su.dev.max(sv.dev);
            if dev < FIXPOINT_TOL || dev >= prev {
                break;
            }
            prev = dev;
        }

        out.u.push(u_cur);
        out.v.push(v_cur);
        out.b.push(b_cur);
        out.mu.push(rec.mu.clone());
        out.tau2.push(rec.tau2.clone());
        out.u_transforms.push(t_u);
        out.v_transforms.push(t_v);
    }

    out.zero_columns_u = zero_u.into_iter().collect();
    out.zero_columns_v = zero_v.into_iter().collect();
    if !out.zero_columns_u.is_empty() || !out.zero_columns_v.is_empty() {
        log::warn!(
            "alignment found zero-norm factor columns (u: {:?}, v: {:?}); left unscaled",
            out.zero_columns_u,
            out.zero_columns_v
        );
    }
    Ok(out)
}

/// Entrywise posterior means of the aligned draws.
pub fn posterior_point_estimates(aligned: &AlignedSamples) -> Result<PointEstimates> {
    let n = aligned.u.len();
    if n == 0 {
        return Err(Error::InsufficientData("no aligned samples".into()));
    }
    let nf = n as Real;
    let mut u = aligned.u[0].clone();
    let mut v = aligned.v[0].clone();
    let mut b = aligned.b[0].clone();
    let mut mu = aligned.mu[0].clone();
    let mut tau2 = aligned.tau2[0].clone();
    for s in 1..n {
        u += &aligned.u[s];
        v += &aligned.v[s];
        for (k, bk) in aligned.b[s].iter().enumerate() {
            b[k] += bk;
        }
        for (k, m) in aligned.mu[s].iter().enumerate() {
            mu[k] += m;
        }
        for (k, t) in aligned.tau2[s].iter().enumerate() {
            tau2[k] += t;
        }
    }
    u.unscale_mut(nf);
    v.unscale_mut(nf);
    for bk in &mut b {
        bk.unscale_mut(nf);
    }
    for m in &mut mu {
        *m /= nf;
    }
    for t in &mut tau2 {
        *t /= nf;
    }
    Ok(PointEstimates { u, v, b, mu, tau2 })
}
