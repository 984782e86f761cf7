//! Alignment oracles: the Procrustes solver against direct minimization
//! probes, and whole-chain alignment checked for the properties that make it
//! usable — reconstructions untouched, unit columns, idempotence, transform
//! bookkeeping, and rescue of sign-flipped draws.

mod common;

use fabtest::align::{align_chain, posterior_point_estimates, procrustes_rotation};
use fabtest::tensor::{
    run_chain, ChainConfig, ChainOutput, Likelihood, SampleRecord, SliceData, TensorDataset,
};
use fabtest::{Error, Real};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Real> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Real> {
    random_matrix(rng, d, d).qr().q()
}

fn frob(m: &DMatrix<Real>) -> Real {
    m.iter().map(|x| x * x).sum::<Real>().sqrt()
}

/// A synthetic retained chain around explicit samples, for alignment tests
/// that need full control of the draws.
fn chain_from_samples(samples: Vec<SampleRecord>, l: usize, g: usize) -> ChainOutput {
    ChainOutput {
        samples,
        likelihoods: vec![Likelihood::Normal],
        row_names: (0..l).map(|i| format!("r{i}")).collect(),
        col_names: (0..g).map(|i| format!("c{i}")).collect(),
        config: ChainConfig {
            d_u: 2,
            d_v: 2,
            iters: 2,
            burn_in: 0,
            thin: 1,
            seed: 0,
            impute: true,
        },
    }
}

#[test]
fn procrustes_maps_a_matrix_onto_itself_with_the_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(61_000);
    let a = random_matrix(&mut rng, 9, 3);
    let r = procrustes_rotation(&a, &a).expect("self alignment");
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            assert!(
                (r[(i, j)] - id).abs() < 1e-10,
                "self-Procrustes must be the identity, got {} at ({i}, {j})",
                r[(i, j)]
            );
        }
    }
}

#[test]
fn procrustes_recovers_a_planted_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(61_001);
    for trial in 0..10 {
        let reference = random_matrix(&mut rng, 12, 3);
        let q = random_orthogonal(&mut rng, 3);
        let sample = &reference * &q;
        let r = procrustes_rotation(&sample, &reference).expect("planted rotation");
        // sample · R = reference exactly when R = Qᵀ.
        let qt = q.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (r[(i, j)] - qt[(i, j)]).abs() < 1e-8,
                    "trial {trial}: recovered rotation off at ({i}, {j}): {} vs {}",
                    r[(i, j)],
                    qt[(i, j)]
                );
            }
        }
    }
}

#[test]
fn procrustes_beats_random_orthogonal_probes() {
    let mut rng = ChaCha8Rng::seed_from_u64(61_002);
    let reference = random_matrix(&mut rng, 10, 3);
    let sample = random_matrix(&mut rng, 10, 3);
    let r = procrustes_rotation(&sample, &reference).expect("optimum");
    let best = frob(&(&sample * &r - &reference));
    for probe in 0..100 {
        let q = random_orthogonal(&mut rng, 3);
        let alt = frob(&(&sample * &q - &reference));
        assert!(
            best <= alt + 1e-9,
            "probe {probe}: Procrustes objective {best} beaten by random rotation {alt}"
        );
    }
    // The solver's output must itself be orthogonal.
    let gram = r.transpose() * &r;
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            assert!(
                (gram[(i, j)] - id).abs() < 1e-12,
                "RᵀR deviates from identity at ({i}, {j})"
            );
        }
    }
}

#[test]
fn procrustes_rejects_mismatched_shapes() {
    let a = DMatrix::<Real>::zeros(4, 2);
    let b = DMatrix::<Real>::zeros(4, 3);
    assert!(
        matches!(procrustes_rotation(&a, &b), Err(Error::Validation(_))),
        "shape mismatch must be a validation error"
    );
}

/// One small mixed chain shared by the alignment behavior tests.
fn sampled_chain() -> ChainOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(61_003);
    let (l_n, g_n, d) = (10usize, 9usize, 2usize);
    let u_true = random_matrix(&mut rng, l_n, d);
    let v_true = random_matrix(&mut rng, g_n, d);
    let b_true = random_matrix(&mut rng, d, d) * 0.8;
    let pred = &u_true * &b_true * v_true.transpose();
    let normal = SliceData {
        name: "expr".into(),
        likelihood: Likelihood::Normal,
        values: pred.map(|m| m + 0.4 * rng.sample::<Real, _>(StandardNormal)),
        observed: DMatrix::from_element(l_n, g_n, true),
    };
    let probit = SliceData {
        name: "hit".into(),
        likelihood: Likelihood::Probit,
        values: pred.map(|m| if 0.8 * m + rng.sample::<Real, _>(StandardNormal) > 0.0 { 1.0 } else { 0.0 }),
        observed: DMatrix::from_element(l_n, g_n, true),
    };
    let data = TensorDataset {
        row_names: (0..l_n).map(|i| format!("r{i}")).collect(),
        col_names: (0..g_n).map(|i| format!("c{i}")).collect(),
        slices: vec![normal, probit],
    };
    let config = ChainConfig {
        d_u: d,
        d_v: d,
        iters: 60,
        burn_in: 20,
        thin: 4,
        seed: 5,
        impute: true,
    };
    run_chain(&data, &config).expect("sampling chain")
}

#[test]
fn alignment_preserves_every_reconstruction() {
    let chain = sampled_chain();
    let aligned = align_chain(&chain).expect("alignment");
    assert_eq!(aligned.u.len(), chain.samples.len(), "one aligned draw per sample");
    assert_eq!(aligned.reference_index, chain.samples.len() - 1, "last sample anchors");
    assert!(aligned.zero_columns_u.is_empty(), "no zero U columns in a sampled chain");
    assert!(aligned.zero_columns_v.is_empty(), "no zero V columns in a sampled chain");

    for (s, raw) in chain.samples.iter().enumerate() {
        for k in 0..raw.b.len() {
            let before = &raw.u * &raw.b[k] * raw.v.transpose();
            let after = &aligned.u[s] * &aligned.b[s][k] * aligned.v[s].transpose();
            let worst = (&before - &after).amax();
            assert!(
                worst <= 1e-10,
                "sample {s} slice {k}: reconstruction moved by {worst}"
            );
        }
        assert_eq!(aligned.mu[s], raw.mu, "intercepts pass through untouched");
        assert_eq!(aligned.tau2[s], raw.tau2, "variances pass through untouched");
    }
}

#[test]
fn aligned_factors_have_unit_columns() {
    let chain = sampled_chain();
    let aligned = align_chain(&chain).expect("alignment");
    for (s, (u, v)) in aligned.u.iter().zip(&aligned.v).enumerate() {
        for a in 0..u.ncols() {
            assert!(
                (u.column(a).norm() - 1.0).abs() <= 1e-12,
                "sample {s}: U column {a} is not unit norm"
            );
        }
        for a in 0..v.ncols() {
            assert!(
                (v.column(a).norm() - 1.0).abs() <= 1e-12,
                "sample {s}: V column {a} is not unit norm"
            );
        }
    }
}

#[test]
fn transforms_map_raw_onto_aligned_factors() {
    let chain = sampled_chain();
    let aligned = align_chain(&chain).expect("alignment");
    for (s, raw) in chain.samples.iter().enumerate() {
        let u_mapped = &raw.u * &aligned.u_transforms[s];
        let v_mapped = &raw.v * &aligned.v_transforms[s];
        assert!(
            (&u_mapped - &aligned.u[s]).amax() <= 1e-10,
            "sample {s}: U transform bookkeeping is off"
        );
        assert!(
            (&v_mapped - &aligned.v[s]).amax() <= 1e-10,
            "sample {s}: V transform bookkeeping is off"
        );
    }
}

#[test]
fn alignment_is_idempotent() {
    let chain = sampled_chain();
    let aligned = align_chain(&chain).expect("first pass");
    let rerun_samples: Vec<SampleRecord> = (0..aligned.u.len())
        .map(|s| SampleRecord {
            u: aligned.u[s].clone(),
            v: aligned.v[s].clone(),
            b: aligned.b[s].clone(),
            mu: aligned.mu[s].clone(),
            tau2: aligned.tau2[s].clone(),
        })
        .collect();
    let rerun_chain = ChainOutput {
        samples: rerun_samples,
        likelihoods: chain.likelihoods.clone(),
        row_names: chain.row_names.clone(),
        col_names: chain.col_names.clone(),
        config: chain.config,
    };
    let again = align_chain(&rerun_chain).expect("second pass");
    for s in 0..aligned.u.len() {
        assert!(
            (&again.u[s] - &aligned.u[s]).amax() <= 1e-10,
            "sample {s}: U moved on re-alignment"
        );
        assert!(
            (&again.v[s] - &aligned.v[s]).amax() <= 1e-10,
            "sample {s}: V moved on re-alignment"
        );
        for k in 0..aligned.b[s].len() {
            assert!(
                (&again.b[s][k] - &aligned.b[s][k]).amax() <= 1e-10,
                "sample {s} slice {k}: B moved on re-alignment"
            );
        }
        let d = again.u_transforms[s].nrows();
        let id = DMatrix::<Real>::identity(d, d);
        assert!(
            (&again.u_transforms[s] - &id).amax() <= 1e-10,
            "sample {s}: second-pass U transform should be the identity"
        );
    }
}

#[test]
fn sign_flipped_draws_align_to_a_common_orientation() {
    let mut rng = ChaCha8Rng::seed_from_u64(61_004);
    let (l_n, g_n, d) = (8usize, 7usize, 2usize);
    let u0 = random_matrix(&mut rng, l_n, d);
    let v0 = random_matrix(&mut rng, g_n, d);
    let b0 = random_matrix(&mut rng, d, d);
    let base = SampleRecord {
        u: u0.clone(),
        v: v0.clone(),
        b: vec![b0.clone()],
        mu: vec![0.1],
        tau2: vec![0.5],
    };
    // (-U)B(-V)ᵀ has the same reconstruction; raw averaging would cancel
    // the factors entirely.
    let flipped = SampleRecord {
        u: -&u0,
        v: -&v0,
        b: vec![b0.clone()],
        mu: vec![0.1],
        tau2: vec![0.5],
    };
    let chain = chain_from_samples(vec![base, flipped], l_n, g_n);
    let aligned = align_chain(&chain).expect("flip alignment");
    assert!(
        (&aligned.u[0] - &aligned.u[1]).amax() <= 1e-8,
        "sign-flipped U draws must land on the same representative"
    );
    assert!(
        (&aligned.v[0] - &aligned.v[1]).amax() <= 1e-8,
        "sign-flipped V draws must land on the same representative"
    );
    let estimates = posterior_point_estimates(&aligned).expect("estimates");
    for a in 0..d {
        assert!(
            estimates.u.column(a).norm() > 0.9,
            "aligned posterior mean must not collapse (column {a} norm {})",
            estimates.u.column(a).norm()
        );
    }
}

#[test]
fn repeated_sample_point_estimates_match_the_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(61_005);
    let (l_n, g_n, d) = (6usize, 5usize, 2usize);
    let rec = SampleRecord {
        u: random_matrix(&mut rng, l_n, d),
        v: random_matrix(&mut rng, g_n, d),
        b: vec![random_matrix(&mut rng, d, d)],
        // Dyadic values keep the three-sample mean exactly representable.
        mu: vec![-0.25],
        tau2: vec![0.5],
    };
    let chain = chain_from_samples(vec![rec.clone(), rec.clone(), rec.clone()], l_n, g_n);
    let aligned = align_chain(&chain).expect("repeat alignment");
    for s in 1..3 {
        assert!(
            (&aligned.u[s] - &aligned.u[0]).amax() <= 1e-12,
            "identical draws must align identically"
        );
    }
    let estimates = posterior_point_estimates(&aligned).expect("estimates");
    assert!(
        (&estimates.u - &aligned.u[0]).amax() <= 1e-12,
        "mean of identical draws is the draw"
    );
    let recon_est = &estimates.u * &estimates.b[0] * estimates.v.transpose();
    let recon_raw = &rec.u * &rec.b[0] * rec.v.transpose();
    assert!(
        (&recon_est - &recon_raw).amax() <= 1e-10,
        "point-estimate reconstruction must match the raw sample"
    );
    assert_eq!(estimates.mu, vec![-0.25], "intercept mean of identical draws");
    assert_eq!(estimates.tau2, vec![0.5], "variance mean of identical draws");
}

#[test]
fn zero_factor_columns_are_flagged_and_survive() {
    let mut rng = ChaCha8Rng::seed_from_u64(61_006);
    let (l_n, g_n, d) = (6usize, 5usize, 2usize);
    let mut u = random_matrix(&mut rng, l_n, d);
    u.column_mut(1).fill(0.0);
    let mk = |rng: &mut ChaCha8Rng| SampleRecord {
        u: u.clone(),
        v: random_matrix(rng, g_n, d),
        b: vec![random_matrix(rng, d, d)],
        mu: vec![0.0],
        tau2: vec![1.0],
    };
    let samples = vec![mk(&mut rng), mk(&mut rng)];
    let chain = chain_from_samples(samples.clone(), l_n, g_n);
    let aligned = align_chain(&chain).expect("zero-column alignment");
    assert_eq!(aligned.zero_columns_u, vec![1], "dead U column is reported");
    for (s, raw) in samples.iter().enumerate() {
        assert!(
            aligned.u[s].iter().all(|x| x.is_finite()),
            "sample {s}: zero column must not poison the factors"
        );
        let before = &raw.u * &raw.b[0] * raw.v.transpose();
        let after = &aligned.u[s] * &aligned.b[s][0] * aligned.v[s].transpose();
        assert!(
            (&before - &after).amax() <= 1e-10,
            "sample {s}: reconstruction with a dead column moved"
        );
    }
}

#[test]
fn alignment_needs_at_least_two_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(61_007);
    let rec = SampleRecord {
        u: random_matrix(&mut rng, 4, 2),
        v: random_matrix(&mut rng, 3, 2),
        b: vec![random_matrix(&mut rng, 2, 2)],
        mu: vec![0.0],
        tau2: vec![1.0],
    };
    let empty = chain_from_samples(vec![], 4, 3);
    assert!(
        matches!(align_chain(&empty), Err(Error::InsufficientData(_))),
        "empty chain must be rejected"
    );
    let single = chain_from_samples(vec![rec], 4, 3);
    assert!(
        matches!(align_chain(&single), Err(Error::InsufficientData(_))),
        "single-sample chain must be rejected"
    );
}
