//! The pinned acceptance suite: fifteen criteria, each a deterministic
//! function of `(seed, quick)` producing check rows whose pass flags are
//! recomputable from the row numbers alone. `verify_all` runs them, optionally
//! on parallel workers; results are identical for any worker count.
//!
//! Quick mode divides sample counts by 16 and widens the fixed sup-distance
//! bounds by the matching √16 (3-sigma bands and KS critical values adapt to
//! N on their own); it is a smoke configuration, not the gate.

use serde::Serialize;

use crate::laplace::{
    empirical_laplace, empirical_laplace_signed, finite_dim_laplace_analytic,
    finite_dim_laplace_quadrature, multiplier_invariance_check, phi_theta, phi_theta_signed,
    refinement_merge_check, MeshPartition, StepFunction,
};
use crate::orbits::{
    default_proposal_sigma, laplace_orbit_dn, maxwell_poincare_experiment, mellin_barnes_fn_mc,
    mellin_barnes_fn_quad, mellin_barnes_ode_residual, mp_projection_gauss_distance,
    rho_geometric_mean, UniformlySpreadLocations,
};
use crate::parallel::parallel_chunks;
use crate::pd::{build_weighted_ensemble, gamma_subordinator_jumps, pd_sample, WeightedEnsemble};
use crate::report::CheckRow;
use crate::rng::RngStream;
use crate::special::bessel_k0;
use crate::stats::{
    ks_critical, ks_two_sample, ks_two_sample_critical, mc_mean_stderr, JACKKNIFE_BATCHES,
};
use crate::tolerances as tol;
use crate::universality::{
    ewens_cycles, largest_part_mean, prime_universality_experiment, thinning_partition_test,
};
use crate::{Error, Result};

pub const CRITERION_COUNT: usize = 15;

/// Seed used by the acceptance suite and the CLI when none is given.
pub const DEFAULT_SEED: u64 = 0x4C45_4245_5347_5545;

/// Names indexed by criterion id − 1.
pub const CRITERION_NAMES: [&str; CRITERION_COUNT] = [
    "weak-density Laplace identity",
    "refinement consistency",
    "weight cancellation at f=1",
    "Laplace estimator at f=2",
    "multiplier invariance",
    "thinning partition property",
    "PD cross-construction",
    "sphere projection Gaussian limit",
    "Mellin-Barnes profile values",
    "equal-rho orbit invariance",
    "permutation cycles",
    "prime divisor profiles",
    "Dickman oracle",
    "signed extension",
    "profile ODE residual",
];

/// Outcome of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: String,
    pub rows: Vec<CheckRow>,
    pub pass: bool,
}

impl CriterionReport {
    fn new(id: usize, rows: Vec<CheckRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass);
        CriterionReport {
            id,
            name: CRITERION_NAMES[id - 1].to_string(),
            rows,
            pass,
        }
    }
}

/// Sample-count scaling for quick mode.
fn scaled(n: usize, quick: bool) -> usize {
    if quick {
        (n / 16).max(4 * JACKKNIFE_BATCHES)
    } else {
        n
    }
}

/// Fixed sup-distance bounds widen by √16 in quick mode.
fn scaled_sup(bound: f64, quick: bool) -> f64 {
    if quick {
        4.0 * bound
    } else {
        bound
    }
}

fn stream(seed: u64, criterion: usize, lane: u64) -> RngStream {
    RngStream::new(seed, 9_000 + criterion as u64 * 64 + lane)
}

/// Run one criterion (1-based id).
pub fn run_criterion(id: usize, seed: u64, quick: bool) -> Result<CriterionReport> {
    match id {
        1 => criterion_weak_density(seed, quick),
        2 => criterion_refinement(seed, quick),
        3 => criterion_weight_cancellation(seed, quick),
        4 => criterion_estimator(seed, quick),
        5 => criterion_multiplier_invariance(seed, quick),
        6 => criterion_thinning(seed, quick),
        7 => criterion_pd_cross(seed, quick),
        8 => criterion_maxwell_poincare(seed, quick),
        9 => criterion_mellin_barnes(seed, quick),
        10 => criterion_equal_rho(seed, quick),
        11 => criterion_cycles(seed, quick),
        12 => criterion_primes(seed, quick),
        13 => criterion_dickman(seed, quick),
        14 => criterion_signed(seed, quick),
        15 => criterion_ode_residual(seed, quick),
        _ => Err(Error::Parameter(format!(
            "criterion id must be 1..=15, got {id}"
        ))),
    }
}

/// Run the full suite; `threads` workers, deterministic in `(seed, quick)`.
pub fn verify_all(seed: u64, quick: bool, threads: usize) -> Result<Vec<CriterionReport>> {
    parallel_chunks(CRITERION_COUNT, threads, |i| {
        run_criterion(i + 1, seed, quick)
    })
    .into_iter()
    .collect()
}

// --- criterion 1 -----------------------------------------------------------

fn criterion_weak_density(seed: u64, _quick: bool) -> Result<CriterionReport> {
    let partitions = [
        vec![1.0],
        vec![0.5, 0.5],
        vec![0.25, 0.25, 0.5],
        vec![0.1, 0.2, 0.3, 0.4],
    ];
    let mut rng = stream(seed, 1, 0);
    let mut rows = Vec::new();
    for &theta in &[0.5, 1.0, 2.0] {
        for masses in &partitions {
            let p = MeshPartition::new(masses.clone())?;
            let f = StepFunction::new(
                p,
                masses.iter().map(|_| 0.3 + 3.7 * rng.next_f64()).collect(),
            )?;
            let quad = finite_dim_laplace_quadrature(&f, theta, 1e-12, 1e-11)?;
            let analytic = finite_dim_laplace_analytic(&f, theta)?;
            rows.push(CheckRow::against_oracle(
                format!(
                    "quadrature vs product form, theta={theta}, cells={}",
                    masses.len()
                ),
                quad,
                None,
                analytic,
                tol::QUADRATURE_MATCH_ABS,
            ));
        }
    }
    Ok(CriterionReport::new(1, rows))
}

// --- criterion 2 -----------------------------------------------------------

fn criterion_refinement(seed: u64, _quick: bool) -> Result<CriterionReport> {
    let mut rng = stream(seed, 2, 0);
    let mut rows = Vec::new();
    for pair in 0..5 {
        let cells = 2 + (rng.next_u64() % 3) as usize;
        let mut masses: Vec<f64> = (0..cells).map(|_| 0.2 + rng.next_f64()).collect();
        let total: f64 = masses.iter().sum();
        for m in &mut masses {
            *m /= total;
        }
        let fixup = 1.0 - masses.iter().sum::<f64>();
        masses[0] += fixup;
        let p = MeshPartition::new(masses)?;
        let theta = 0.3 + 2.2 * rng.next_f64();
        let i = (rng.next_u64() % cells as u64) as usize;
        let j = (i + 1 + (rng.next_u64() % (cells as u64 - 1)) as usize) % cells;
        let points = refinement_merge_check(&p, theta, i, j, &[0.5, 1.0, 2.0])?;
        let worst =
            points.iter().cloned().fold(
                points[0],
                |a, b| {
                    if b.abs_diff > a.abs_diff {
                        b
                    } else {
                        a
                    }
                },
            );
        rows.push(CheckRow::against_oracle(
            format!("merged-cell density, pair {pair} (theta={theta:.3}), worst of s-grid"),
            worst.quadrature,
            None,
            worst.closed_form,
            tol::QUADRATURE_MATCH_ABS,
        ));
    }
    Ok(CriterionReport::new(2, rows))
}

// --- criteria 3-5 ----------------------------------------------------------

fn standard_ensemble(
    seed: u64,
    criterion: usize,
    n: usize,
    theta: f64,
) -> Result<WeightedEnsemble> {
    build_weighted_ensemble(
        &stream(seed, criterion, 0),
        theta,
        n,
        1.0,
        tol::DEFAULT_MAX_TERMS,
        tol::DEFAULT_TAIL_EPS,
        1,
    )
}

fn criterion_weight_cancellation(seed: u64, quick: bool) -> Result<CriterionReport> {
    let n = scaled(100_000, quick);
    let ens = standard_ensemble(seed, 3, n, 1.0)?;
    let f = StepFunction::constant(MeshPartition::new(vec![0.5, 0.5])?, 1.0);
    let est = empirical_laplace(&ens, &f)?;
    let rows = vec![
        CheckRow::against_oracle(
            "estimate at f=1 (bit-level)",
            est.estimate,
            est.stderr,
            1.0,
            0.0,
        ),
        CheckRow::against_oracle(
            "stderr at f=1 (bit-level)",
            est.stderr.unwrap_or(f64::NAN),
            None,
            0.0,
            0.0,
        ),
    ];
    Ok(CriterionReport::new(3, rows))
}

fn criterion_estimator(seed: u64, quick: bool) -> Result<CriterionReport> {
    let n = scaled(100_000, quick);
    let ens = standard_ensemble(seed, 4, n, 1.0)?;
    let f = StepFunction::constant(MeshPartition::new(vec![0.5, 0.5])?, 2.0);
    let est = empirical_laplace(&ens, &f)?;
    let se = est.stderr.expect("variance guard holds at f=2");
    let rows = vec![
        CheckRow::against_oracle(
            "estimate at f=2 vs 1/2",
            est.estimate,
            Some(se),
            0.5,
            3.0 * se,
        ),
        CheckRow::bound(
            "stderr at f=2",
            se,
            None,
            scaled_sup(tol::ESTIMATOR_F2_STDERR_MAX, quick),
        ),
    ];
    Ok(CriterionReport::new(4, rows))
}

fn criterion_multiplier_invariance(seed: u64, quick: bool) -> Result<CriterionReport> {
    // Exact identity on 1e3 random triples.
    let mut rng = stream(seed, 5, 1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let cells = 1 + (rng.next_u64() % 4) as usize;
        let mut masses: Vec<f64> = (0..cells).map(|_| 0.1 + rng.next_f64()).collect();
        let total: f64 = masses.iter().sum();
        for m in &mut masses {
            *m /= total;
        }
        let fixup = 1.0 - masses.iter().sum::<f64>();
        masses[0] += fixup;
        let p = MeshPartition::new(masses)?;
        let f = StepFunction::new(
            p.clone(),
            (0..cells).map(|_| 0.2 + 4.0 * rng.next_f64()).collect(),
        )?;
        let a = StepFunction::new(p, (0..cells).map(|_| 0.2 + 4.0 * rng.next_f64()).collect())?;
        let theta = 0.2 + 2.5 * rng.next_f64();
        worst = worst.max(multiplier_invariance_check(&f, &a, theta)?.rel_diff);
    }
    let mut rows = vec![CheckRow::bound(
        "exact identity, worst of 1e3 triples",
        worst,
        None,
        tol::EXACT_IDENTITY_REL,
    )];

    // Weighted-ensemble invariance under a zero-log-mean multiplier: the
    // pushed ensemble's Laplace estimate at f equals the original's at a·f,
    // so the paired difference of summands must vanish within 3 SE.
    let n = scaled(100_000, quick);
    let ens = standard_ensemble(seed, 5, n, 1.0)?;
    let p = MeshPartition::new(vec![0.5, 0.5])?;
    let f = StepFunction::constant(p.clone(), 2.0);
    let a = StepFunction::new(p, vec![2.0, 0.5])?;
    let af = f.pointwise_mul(&a)?;
    let diffs: Vec<f64> = ens
        .samples()
        .iter()
        .zip(ens.log_weights())
        .map(|(xi, &w)| (w - xi.pair(&f)).exp() - (w - xi.pair(&af)).exp())
        .collect();
    let me = mc_mean_stderr(&diffs, None)?;
    rows.push(CheckRow::against_oracle(
        "ensemble estimate shift under zero-log-mean multiplier",
        me.mean,
        Some(me.stderr),
        0.0,
        3.0 * me.stderr,
    ));
    let phi = phi_theta(&f, 1.0)?;
    let phi_after = phi_theta(&af, 1.0)?;
    rows.push(CheckRow::against_oracle(
        "characteristic functional unchanged",
        phi_after,
        None,
        phi,
        tol::EXACT_IDENTITY_REL,
    ));
    Ok(CriterionReport::new(5, rows))
}

// --- criterion 6 -----------------------------------------------------------

fn criterion_thinning(seed: u64, quick: bool) -> Result<CriterionReport> {
    let n = scaled(100_000, quick);
    let mut rng = stream(seed, 6, 0);
    let rep = thinning_partition_test(&mut rng, 1.0, 2, n, 2.0)?;
    let mut rows = Vec::new();
    for (k, d) in rep.class_ks.iter().enumerate() {
        rows.push(CheckRow::bound(
            format!("class {k} KS vs Gamma(1/2), 1% level"),
            *d,
            None,
            rep.class_ks_critical,
        ));
    }
    rows.push(CheckRow::bound(
        "class correlation",
        rep.max_abs_correlation,
        None,
        3.0 / (n as f64).sqrt(),
    ));
    rows.push(CheckRow::bound(
        "windowed weighted joint ECDF vs product law (M=2)",
        rep.weighted_joint_sup.unwrap_or(f64::NAN),
        None,
        scaled_sup(tol::THINNING_JOINT_SUP, quick),
    ));
    Ok(CriterionReport::new(6, rows))
}

// --- criterion 7 -----------------------------------------------------------

fn criterion_pd_cross(seed: u64, quick: bool) -> Result<CriterionReport> {
    let n = scaled(100_000, quick);
    let mut rows = Vec::new();
    for (lane, &theta) in [0.5, 1.0, 2.0].iter().enumerate() {
        let mut r1 = stream(seed, 7, 2 * lane as u64);
        let mut r2 = stream(seed, 7, 2 * lane as u64 + 1);
        let gem: Vec<f64> = (0..n)
            .map(|_| {
                Ok(pd_sample(
                    &mut r1,
                    theta,
                    tol::DEFAULT_MAX_TERMS,
                    tol::DEFAULT_TAIL_EPS,
                )?
                .largest())
            })
            .collect::<Result<_>>()?;
        let jumps: Vec<f64> = (0..n)
            .map(|_| {
                let s = gamma_subordinator_jumps(
                    &mut r2,
                    theta,
                    tol::DEFAULT_MAX_TERMS,
                    tol::DEFAULT_TAIL_EPS,
                )?;
                Ok(s.largest() / s.total())
            })
            .collect::<Result<_>>()?;
        let d = ks_two_sample(&gem, &jumps)?;
        rows.push(CheckRow::bound(
            format!("largest part, sorted GEM vs normalized jumps, theta={theta}"),
            d,
            None,
            ks_two_sample_critical(n, n, tol::GATE_ALPHA),
        ));
    }
    Ok(CriterionReport::new(7, rows))
}

// --- criterion 8 -----------------------------------------------------------

fn criterion_maxwell_poincare(seed: u64, quick: bool) -> Result<CriterionReport> {
    let n_samples = scaled(100_000, quick);
    let mut rng = stream(seed, 8, 0);
    let e = maxwell_poincare_experiment(&mut rng, 200, 1.0, n_samples)?;
    let mut rows = vec![
        CheckRow::bound(
            "sample KS vs standard normal, n=200",
            e.ks_vs_normal,
            None,
            scaled_sup(tol::MP_KS_BOUND, quick),
        ),
        CheckRow::bound(
            "sample KS vs exact projection law, 5% level",
            e.ks_vs_exact,
            None,
            ks_critical(n_samples, tol::DIAG_ALPHA),
        ),
    ];
    let dims = [5usize, 20, 80, 200];
    let mut prev = mp_projection_gauss_distance(dims[0], 1.0)?;
    for &n in &dims[1..] {
        let d = mp_projection_gauss_distance(n, 1.0)?;
        rows.push(CheckRow::bound(
            format!("projection-law distance decreases into n={n}"),
            d - prev,
            None,
            0.0,
        ));
        prev = d;
    }
    Ok(CriterionReport::new(8, rows))
}

// --- criterion 9 -----------------------------------------------------------

fn criterion_mellin_barnes(seed: u64, quick: bool) -> Result<CriterionReport> {
    let f1 = mellin_barnes_fn_quad(1.3, 1, 1e-9)?;
    let mut rows = vec![CheckRow::against_oracle(
        "F_1(lambda) = exp(-lambda), exact",
        f1.value,
        None,
        (-1.3f64).exp(),
        0.0,
    )];
    let f2 = mellin_barnes_fn_quad(1.0, 2, 1e-9)?;
    rows.push(CheckRow::against_oracle(
        "F_2(1) vs Bessel series 2 K0(2)",
        f2.value,
        None,
        2.0 * bessel_k0(2.0)?,
        tol::FN_CROSS_ABS,
    ));
    rows.push(CheckRow::against_oracle(
        "F_2(1) vs frozen reference",
        f2.value,
        None,
        0.227_787_745_5,
        tol::FN_CROSS_ABS,
    ));
    let n_mc = scaled(150_000, quick);
    for (lane, &n) in [3usize, 4].iter().enumerate() {
        let q = mellin_barnes_fn_quad(1.0, n, 1e-7)?;
        let mut rng = stream(seed, 9, lane as u64);
        let mc = mellin_barnes_fn_mc(&mut rng, 1.0, n, n_mc)?;
        rows.push(CheckRow::against_oracle(
            format!("Monte Carlo vs quadrature, n={n}"),
            mc.estimate,
            Some(mc.stderr),
            q.value,
            3.0 * mc.stderr,
        ));
    }
    Ok(CriterionReport::new(9, rows))
}

// --- criterion 10 ----------------------------------------------------------

fn criterion_equal_rho(seed: u64, quick: bool) -> Result<CriterionReport> {
    let n_samples = scaled(100_000, quick);
    let locs = UniformlySpreadLocations::van_der_corput(3);
    let part = MeshPartition::new(vec![0.5, 0.5])?;
    let mut rng = stream(seed, 10, 0);
    let mut outside = 0usize;
    for pair in 0..tol::EQUAL_RHO_PAIRS {
        let f = StepFunction::new(
            part.clone(),
            vec![0.5 + 1.5 * rng.next_f64(), 0.5 + 1.5 * rng.next_f64()],
        )?;
        // The vdC locations {1/2, 1/4, 3/4} hit cell 0 once and cell 1
        // twice; match g to the same product f(t1) f(t2) f(t3).
        let g2 = 0.5 + 1.5 * rng.next_f64();
        let g1 = (f.values()[0] * f.values()[1] * f.values()[1] / (g2 * g2)).max(f64::MIN_POSITIVE);
        let g = StepFunction::new(part.clone(), vec![g1, g2])?;
        debug_assert!(
            (rho_geometric_mean(&f, &locs)? - rho_geometric_mean(&g, &locs)?).abs()
                < 1e-9 * rho_geometric_mean(&f, &locs)?
        );
        let mut ra = stream(seed, 10, 100 + 2 * pair as u64);
        let mut rb = stream(seed, 10, 101 + 2 * pair as u64);
        let da = laplace_orbit_dn(
            &mut ra,
            &f,
            &locs,
            3,
            1.0,
            n_samples,
            default_proposal_sigma(3),
        )?;
        let db = laplace_orbit_dn(
            &mut rb,
            &g,
            &locs,
            3,
            1.0,
            n_samples,
            default_proposal_sigma(3),
        )?;
        let se = (da.stderr * da.stderr + db.stderr * db.stderr).sqrt();
        if (da.estimate - db.estimate).abs() > 3.0 * se {
            outside += 1;
        }
    }
    let rows = vec![CheckRow::bound(
        format!(
            "matched-rho pairs outside 3 sigma (of {})",
            tol::EQUAL_RHO_PAIRS
        ),
        outside as f64,
        None,
        (tol::EQUAL_RHO_PAIRS - tol::EQUAL_RHO_MIN_PASS) as f64,
    )];
    Ok(CriterionReport::new(10, rows))
}

// --- criterion 11 ----------------------------------------------------------

/// Mean cycle count over all 24 permutations of four elements, by Heap's
/// enumeration (equals 25/12).
fn s4_mean_cycles_enumerated() -> f64 {
    fn cycles(p: &[usize; 4]) -> usize {
        let mut seen = [false; 4];
        let mut c = 0;
        for start in 0..4 {
            if !seen[start] {
                c += 1;
                let mut i = start;
                while !seen[i] {
                    seen[i] = true;
                    i = p[i];
                }
            }
        }
        c
    }
    fn heap(k: usize, p: &mut [usize; 4], acc: &mut (usize, usize)) {
        if k == 1 {
            acc.0 += cycles(p);
            acc.1 += 1;
            return;
        }
        for i in 0..k {
            heap(k - 1, p, acc);
            if k % 2 == 0 {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
        }
    }
    let mut acc = (0usize, 0usize);
    heap(4, &mut [0, 1, 2, 3], &mut acc);
    acc.0 as f64 / acc.1 as f64
}

fn criterion_cycles(seed: u64, quick: bool) -> Result<CriterionReport> {
    let oracle = s4_mean_cycles_enumerated();
    let n_draws = scaled(100_000, quick);
    let mut rng = stream(seed, 11, 0);
    let counts: Vec<f64> = (0..n_draws)
        .map(|_| Ok(ewens_cycles(&mut rng, 4, 1.0)?.cycle_count() as f64))
        .collect::<Result<_>>()?;
    let me = mc_mean_stderr(&counts, None)?;
    let mut rows = vec![CheckRow::against_oracle(
        "mean cycle count of S4 vs exhaustive 25/12",
        me.mean,
        Some(me.stderr),
        oracle,
        3.0 * me.stderr,
    )];

    let draws = scaled(10_000, quick);
    let mut rng = stream(seed, 11, 1);
    let fracs: Vec<f64> = (0..draws)
        .map(|_| Ok(ewens_cycles(&mut rng, 10_000, 1.0)?.largest_normalized()))
        .collect::<Result<_>>()?;
    let cycles_mean = mc_mean_stderr(&fracs, None)?;
    let mut rng = stream(seed, 11, 2);
    let sticks = largest_part_mean(
        &mut rng,
        1.0,
        scaled(1_000_000, quick),
        tol::DEFAULT_MAX_TERMS,
        tol::DEFAULT_TAIL_EPS,
    )?;
    let se = (cycles_mean.stderr * cycles_mean.stderr + sticks.stderr * sticks.stderr).sqrt();
    rows.push(CheckRow::against_oracle(
        "largest cycle fraction (n=1e4) vs stick-breaking oracle",
        cycles_mean.mean,
        Some(cycles_mean.stderr),
        sticks.mean,
        3.0 * se,
    ));
    rows.push(CheckRow::against_oracle(
        "stick-breaking oracle vs frozen largest-part mean",
        sticks.mean,
        Some(sticks.stderr),
        0.6243,
        0.002,
    ));
    Ok(CriterionReport::new(11, rows))
}

// --- criterion 12 ----------------------------------------------------------

fn criterion_primes(seed: u64, quick: bool) -> Result<CriterionReport> {
    let samples = scaled(100_000, quick);
    let mut rng = stream(seed, 12, 0);
    let fine = prime_universality_experiment(&mut rng, 10_000_000, samples)?;
    let mut rng = stream(seed, 12, 1);
    let coarse = prime_universality_experiment(&mut rng, 10_000, samples.min(30_000))?;
    let rows = vec![
        CheckRow::bound(
            "largest-component ECDF vs Dickman law, N_max=1e7",
            fine.sup_distance,
            None,
            scaled_sup(tol::PRIME_SUP, quick),
        ),
        CheckRow::bound(
            "logarithmic trend: sup at 1e7 minus sup at 1e4",
            fine.sup_distance - coarse.sup_distance,
            None,
            0.0,
        ),
        // Carries the full O(1/ln N_max) finite-size excess (~ +0.034 at
        // 1e7), so the pinned band around ln 2 is not attainable at this
        // N_max; reported as measured.
        CheckRow::against_oracle(
            "P(largest component > 1/2) vs ln 2",
            fine.p_largest_over_half,
            None,
            std::f64::consts::LN_2,
            scaled_sup(tol::PRIME_HALF_ABS, quick),
        ),
    ];
    Ok(CriterionReport::new(12, rows))
}

// --- criterion 13 ----------------------------------------------------------

fn criterion_dickman(_seed: u64, _quick: bool) -> Result<CriterionReport> {
    let rho2 = crate::dickman::dickman_rho(2.0);
    let rows = vec![
        CheckRow::against_oracle(
            "rho(2) vs 1 - ln 2",
            rho2,
            None,
            1.0 - std::f64::consts::LN_2,
            tol::DICKMAN_ABS,
        ),
        CheckRow::against_oracle(
            "adaptive RK vs integral-form marching at u=3",
            crate::dickman::dickman_rho(3.0),
            None,
            crate::dickman::dickman_rho_marching(3.0, 8192),
            tol::DICKMAN_CROSS_ABS,
        ),
    ];
    Ok(CriterionReport::new(13, rows))
}

// --- criterion 14 ----------------------------------------------------------

fn criterion_signed(seed: u64, quick: bool) -> Result<CriterionReport> {
    // Exact invariance of the signed functional under sign patterns.
    let mut rng = stream(seed, 14, 0);
    let part = MeshPartition::new(vec![0.5, 0.5])?;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v1 = 0.2 + 3.0 * rng.next_f64();
        let v2 = 0.2 + 3.0 * rng.next_f64();
        let theta = 0.2 + 2.5 * rng.next_f64();
        let base = phi_theta_signed(&StepFunction::new(part.clone(), vec![v1, v2])?, theta)?;
        for signs in [[1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            let flipped = StepFunction::new(part.clone(), vec![signs[0] * v1, signs[1] * v2])?;
            worst = worst.max((phi_theta_signed(&flipped, theta)? - base).abs());
        }
    }
    let mut rows = vec![CheckRow::bound(
        "sign-pattern invariance of the functional (bit-level)",
        worst,
        None,
        0.0,
    )];

    // Sign-symmetrized weighted Laplace with |f| against Phi(|f|).
    let n = scaled(100_000, quick);
    let ens = standard_ensemble(seed, 14, n, 1.0)?;
    let signed = ens.sign_symmetrized(&stream(seed, 14, 1))?;
    let f = StepFunction::new(part.clone(), vec![-2.0, 2.0])?;
    let est = empirical_laplace_signed(&signed, &f)?;
    let se = est.stderr.expect("|f| = 2 satisfies the variance guard");
    let oracle = phi_theta(&f.abs(), 1.0)?;
    rows.push(CheckRow::against_oracle(
        "sign-symmetrized estimator vs Phi(|f|)",
        est.estimate,
        Some(se),
        oracle,
        3.0 * se,
    ));

    // The estimator is bitwise blind to the signs of both f and the charges.
    let est_abs_f = empirical_laplace_signed(&signed, &f.abs())?;
    let est_unsigned_ens = empirical_laplace_signed(&ens, &f)?;
    rows.push(CheckRow::against_oracle(
        "estimator blind to sign of f (bit-level)",
        est_abs_f.estimate,
        None,
        est.estimate,
        0.0,
    ));
    rows.push(CheckRow::against_oracle(
        "estimator blind to charge signs (bit-level)",
        est_unsigned_ens.estimate,
        None,
        est.estimate,
        0.0,
    ));
    Ok(CriterionReport::new(14, rows))
}

// --- criterion 15 ----------------------------------------------------------

fn criterion_ode_residual(_seed: u64, _quick: bool) -> Result<CriterionReport> {
    // n = 1: the continuous identity dG/dz = −G is exact for G = e^{−z}.
    let z = 1.3f64;
    let analytic_residual = (-(-(z)).exp() + (-z).exp()).abs();
    let mut rows = vec![CheckRow::bound(
        "n=1 sign-flipped identity with analytic derivative (exact)",
        analytic_residual,
        None,
        0.0,
    )];
    let r1 = mellin_barnes_ode_residual(1, z, 1e-3)?;
    rows.push(CheckRow::bound(
        "n=1 finite-difference minus-residual",
        r1.residual_minus,
        None,
        1e-5,
    ));

    let mut best = Vec::new();
    for &h in &[1e-2, 5e-3, 2.5e-3] {
        let r = mellin_barnes_ode_residual(2, 1.0, h)?;
        best.push(r.best());
    }
    for (k, w) in best.windows(2).enumerate() {
        let order = (w[0] / w[1]).log2();
        rows.push(CheckRow::against_oracle(
            format!("n=2 best-sign residual convergence order, halving {k}"),
            order,
            None,
            2.0,
            tol::ODE_ORDER_BAND,
        ));
    }
    Ok(CriterionReport::new(15, rows))
}
