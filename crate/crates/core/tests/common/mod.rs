//! Shared assertion helpers for the integration-test suites.
//!
//! Each suite compiles as its own crate, so helpers live here and are pulled
//! in with `mod common;`.  Not every suite uses every helper.
#![allow(dead_code)]

/// Absolute-error assertion with a labelled failure message.
pub fn assert_abs(actual: f64, expected: f64, tol: f64, what: &str) {
    let err = (actual - expected).abs();
    assert!(
        err <= tol,
        "{what}: got {actual:.17e}, want {expected:.17e}, |err| = {err:.3e} > {tol:.1e}"
    );
}

/// Relative-error assertion; `expected` must be nonzero.
pub fn assert_rel(actual: f64, expected: f64, rel: f64, what: &str) {
    assert!(expected != 0.0, "{what}: relative check against zero");
    let err = ((actual - expected) / expected).abs();
    assert!(
        err <= rel,
        "{what}: got {actual:.17e}, want {expected:.17e}, rel err = {err:.3e} > {rel:.1e}"
    );
}

/// Mixed assertion: passes when either the absolute or the relative
/// criterion holds.  Used for sweeps whose expected values span many
/// orders of magnitude.
pub fn assert_abs_or_rel(actual: f64, expected: f64, abs: f64, rel: f64, what: &str) {
    let err = (actual - expected).abs();
    if err <= abs {
        return;
    }
    assert!(
        expected != 0.0 && (err / expected.abs()) <= rel,
        "{what}: got {actual:.17e}, want {expected:.17e}, |err| = {err:.3e} (abs tol {abs:.1e}, rel tol {rel:.1e})"
    );
}

/// Two-sided Kolmogorov-Smirnov distance of `sample` against Uniform(0,1).
pub fn ks_distance_uniform(sample: &mut [f64]) -> f64 {
    assert!(!sample.is_empty(), "KS distance of an empty sample");
    sample.sort_by(|a, b| a.partial_cmp(b).expect("KS sample contains NaN"));
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let hi = (i as f64 + 1.0) / n - x;
        let lo = x - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Sample mean and (unbiased) variance.
pub fn mean_var(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    assert!(n >= 2.0, "mean_var needs at least two points");
    let mean = sample.iter().sum::<f64>() / n;
    let ss = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}
