//! One function per experiment; each returns verdict rows (and optional raw
//! dumps) from a resolved configuration. Sample generation is deterministic
//! in `(seed, experiment)`.

use lebesgue_core::laplace::{
    empirical_laplace, empirical_laplace_signed, finite_dim_laplace_analytic,
    finite_dim_laplace_quadrature, multiplier_invariance_check, phi_theta, refinement_merge_check,
    MeshPartition, StepFunction,
};
use lebesgue_core::orbits::{
    default_proposal_sigma, laplace_orbit_dn, lebesgue_window_volume, maxwell_poincare_experiment,
    mellin_barnes_fn_mc, mellin_barnes_fn_quad, mellin_barnes_ode_residual, rho_geometric_mean,
    zagier_limit_probe, UniformlySpreadLocations,
};
use lebesgue_core::pd::{build_weighted_ensemble, gamma_subordinator_jumps, pd_sample};
use lebesgue_core::report::CheckRow;
use lebesgue_core::rng::RngStream;
use lebesgue_core::special::bessel_k0;
use lebesgue_core::stats::{ks_critical, ks_two_sample, ks_two_sample_critical, mc_mean_stderr};
use lebesgue_core::universality::{
    ewens_cycles, largest_part_mean, prime_profile, prime_universality_experiment,
    thinning_partition_test,
};
use lebesgue_core::verify;
use lebesgue_core::Result;

use crate::config::{Experiment, ExperimentConfig};

/// Raw-sample dump attached to a report when `--dump` is set.
pub struct Dump {
    /// Suggested file suffix (placed next to the report output).
    pub suffix: &'static str,
    pub csv: String,
    /// Reproducibility manifest written alongside, when the dump has one.
    pub manifest: Option<String>,
}

pub struct RunOutcome {
    pub rows: Vec<CheckRow>,
    pub dump: Option<Dump>,
    /// Nested per-criterion detail (verify-all only).
    pub criteria: Option<Vec<verify::CriterionReport>>,
}

impl RunOutcome {
    fn rows(rows: Vec<CheckRow>) -> Self {
        RunOutcome {
            rows,
            dump: None,
            criteria: None,
        }
    }
}

fn stream(cfg: &ExperimentConfig, lane: u64) -> RngStream {
    RngStream::new(cfg.seed, 100 + lane)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    match cfg.experiment {
        Experiment::MaxwellPoincare => maxwell_poincare(cfg),
        Experiment::OrbitLaplace => orbit_laplace(cfg),
        Experiment::MellinBarnes => mellin_barnes(cfg),
        Experiment::WeakDensity => weak_density(cfg),
        Experiment::Thinning => thinning(cfg),
        Experiment::PdCross => pd_cross(cfg),
        Experiment::Cycles => cycles(cfg),
        Experiment::Primes => primes(cfg),
        Experiment::Invariance => invariance(cfg),
        Experiment::ZagierProbe => zagier_probe(cfg),
        Experiment::WindowProbe => window_probe(cfg),
        Experiment::VerifyAll => verify_all(cfg),
    }
}

fn maxwell_poincare(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n = cfg.n.unwrap_or(200) as usize;
    let mut rng = stream(cfg, 0);
    // theta doubles as the radius scale c (r = c √n).
    let e = maxwell_poincare_experiment(&mut rng, n, cfg.theta, cfg.samples)?;
    Ok(RunOutcome::rows(vec![
        CheckRow::bound(
            format!("first-coordinate KS vs N(0, c^2), n={n}"),
            e.ks_vs_normal,
            None,
            cfg.tolerance("mp_ks_bound"),
        ),
        CheckRow::bound(
            "first-coordinate KS vs exact projection law, 5% level",
            e.ks_vs_exact,
            None,
            ks_critical(cfg.samples, 0.05),
        ),
    ]))
}

fn orbit_laplace(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n = cfg.n.unwrap_or(3) as usize;
    let locs = UniformlySpreadLocations::van_der_corput(n);
    let part = MeshPartition::new(vec![0.5, 0.5])?;
    let f = StepFunction::constant(part.clone(), 1.0);
    let mut rng = stream(cfg, 0);
    let dn = laplace_orbit_dn(
        &mut rng,
        &f,
        &locs,
        n,
        cfg.theta,
        cfg.samples,
        default_proposal_sigma(n),
    )?;
    let mut rows = Vec::new();
    if n <= 6 {
        // Change-of-variables identity: D_n(f) = F_n(ρ(f) e^{−θn}).
        let lambda = rho_geometric_mean(&f, &locs)? * (-cfg.theta * n as f64).exp();
        let oracle = mellin_barnes_fn_quad(lambda, n, 1e-8)?.value;
        rows.push(CheckRow::against_oracle(
            format!("D_n(1) vs F_n(rho e^(-theta n)), n={n}"),
            dn.estimate,
            Some(dn.stderr),
            oracle,
            3.0 * dn.stderr,
        ));
    } else {
        rows.push(CheckRow::info(
            format!("D_n(1) estimate, n={n}"),
            dn.estimate,
            Some(dn.stderr),
        ));
    }
    // One matched-ρ pair at the configured n.
    let g = StepFunction::new(part.clone(), vec![2.0, 0.5])?;
    let gmatched = match_rho(&g, &f, &locs)?;
    let mut ra = stream(cfg, 1);
    let mut rb = stream(cfg, 2);
    let da = laplace_orbit_dn(
        &mut ra,
        &gmatched,
        &locs,
        n,
        cfg.theta,
        cfg.samples,
        default_proposal_sigma(n),
    )?;
    let db = laplace_orbit_dn(
        &mut rb,
        &f,
        &locs,
        n,
        cfg.theta,
        cfg.samples,
        default_proposal_sigma(n),
    )?;
    let se = (da.stderr * da.stderr + db.stderr * db.stderr).sqrt();
    rows.push(CheckRow::against_oracle(
        "matched-rho pair difference",
        da.estimate - db.estimate,
        Some(se),
        0.0,
        3.0 * se,
    ));
    Ok(RunOutcome::rows(rows))
}

/// Rescale `g` so its geometric mean over `locs` matches that of `f`.
fn match_rho(
    g: &StepFunction,
    f: &StepFunction,
    locs: &UniformlySpreadLocations,
) -> Result<StepFunction> {
    let target = rho_geometric_mean(f, locs)?;
    let current = rho_geometric_mean(g, locs)?;
    Ok(g.scale(target / current))
}

fn mellin_barnes(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let f1 = mellin_barnes_fn_quad(1.3, 1, 1e-9)?;
    let f2 = mellin_barnes_fn_quad(1.0, 2, 1e-9)?;
    let mut rows = vec![
        CheckRow::against_oracle("F_1(1.3) exact", f1.value, None, (-1.3f64).exp(), 0.0),
        CheckRow::against_oracle(
            "F_2(1) vs Bessel series",
            f2.value,
            None,
            2.0 * bessel_k0(2.0)?,
            cfg.tolerance("fn_cross_abs"),
        ),
    ];
    for (lane, &n) in [3usize, 4].iter().enumerate() {
        let q = mellin_barnes_fn_quad(1.0, n, 1e-7)?;
        let mut rng = stream(cfg, lane as u64);
        let mc = mellin_barnes_fn_mc(&mut rng, 1.0, n, cfg.samples)?;
        rows.push(CheckRow::against_oracle(
            format!("MC vs quadrature, n={n}"),
            mc.estimate,
            Some(mc.stderr),
            q.value,
            3.0 * mc.stderr,
        ));
    }
    let r1 = mellin_barnes_ode_residual(1, 1.3, 1e-3)?;
    rows.push(CheckRow::bound(
        "ODE n=1 minus-residual",
        r1.residual_minus,
        None,
        1e-5,
    ));
    let mut best = Vec::new();
    for &h in &[1e-2, 5e-3, 2.5e-3] {
        best.push(mellin_barnes_ode_residual(2, 1.0, h)?.best());
    }
    for (k, w) in best.windows(2).enumerate() {
        rows.push(CheckRow::against_oracle(
            format!("ODE n=2 convergence order, halving {k}"),
            (w[0] / w[1]).log2(),
            None,
            2.0,
            cfg.tolerance("ode_order_band"),
        ));
    }
    Ok(RunOutcome::rows(rows))
}

fn weak_density(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let mut rng = stream(cfg, 0);
    let partitions = [
        vec![1.0],
        vec![0.5, 0.5],
        vec![0.25, 0.25, 0.5],
        vec![0.1, 0.2, 0.3, 0.4],
    ];
    let mut rows = Vec::new();
    for masses in &partitions {
        let p = MeshPartition::new(masses.clone())?;
        let f = StepFunction::new(
            p,
            masses.iter().map(|_| 0.3 + 3.7 * rng.next_f64()).collect(),
        )?;
        let quad = finite_dim_laplace_quadrature(&f, cfg.theta, 1e-12, 1e-11)?;
        let analytic = finite_dim_laplace_analytic(&f, cfg.theta)?;
        rows.push(CheckRow::against_oracle(
            format!("quadrature vs product form, cells={}", masses.len()),
            quad,
            None,
            analytic,
            cfg.tolerance("quadrature_match_abs"),
        ));
    }
    let p = MeshPartition::new(vec![0.25, 0.75])?;
    for pt in refinement_merge_check(&p, cfg.theta, 0, 1, &[0.5, 1.0, 2.0])? {
        rows.push(CheckRow::against_oracle(
            format!("merged-cell density at s={}", pt.s),
            pt.quadrature,
            None,
            pt.closed_form,
            cfg.tolerance("quadrature_match_abs"),
        ));
    }
    Ok(RunOutcome::rows(rows))
}

fn thinning(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let r = cfg.n.unwrap_or(2) as usize;
    let mut rng = stream(cfg, 0);
    let rep = thinning_partition_test(&mut rng, cfg.theta, r, cfg.samples, cfg.window)?;
    let mut rows = Vec::new();
    for (k, d) in rep.class_ks.iter().enumerate() {
        rows.push(CheckRow::bound(
            format!("class {k} KS vs Gamma(theta/r), 1% level"),
            *d,
            None,
            rep.class_ks_critical,
        ));
    }
    if r > 1 {
        rows.push(CheckRow::bound(
            "max class correlation",
            rep.max_abs_correlation,
            None,
            3.0 / (cfg.samples as f64).sqrt(),
        ));
    }
    if let Some(sup) = rep.weighted_joint_sup {
        rows.push(CheckRow::bound(
            "windowed weighted joint ECDF vs product law",
            sup,
            None,
            cfg.tolerance("thinning_joint_sup"),
        ));
    }
    Ok(RunOutcome::rows(rows))
}

fn pd_cross(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let mut r1 = stream(cfg, 0);
    let mut r2 = stream(cfg, 1);
    let mut gem = Vec::with_capacity(cfg.samples);
    let mut jumps = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        gem.push(pd_sample(&mut r1, cfg.theta, 400, 1e-8)?.largest());
        let s = gamma_subordinator_jumps(&mut r2, cfg.theta, 400, 1e-8)?;
        jumps.push(s.largest() / s.total());
    }
    let d = ks_two_sample(&gem, &jumps)?;
    let rows = vec![CheckRow::bound(
        format!("largest part, GEM vs normalized jumps, theta={}", cfg.theta),
        d,
        None,
        ks_two_sample_critical(cfg.samples, cfg.samples, 0.01),
    )];
    let dump = cfg.dump.then(|| {
        let mut csv = String::from("construction,largest_part\n");
        for v in &gem {
            csv.push_str(&format!("gem,{v}\n"));
        }
        for v in &jumps {
            csv.push_str(&format!("jumps,{v}\n"));
        }
        Dump {
            suffix: "samples.csv",
            csv,
            manifest: None,
        }
    });
    Ok(RunOutcome {
        rows,
        dump,
        criteria: None,
    })
}

fn cycles(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n = cfg.n.unwrap_or(10_000);
    let mut rng = stream(cfg, 0);
    let draws = cfg.samples.min(20_000);
    let mut profiles = Vec::with_capacity(draws);
    for _ in 0..draws {
        profiles.push(ewens_cycles(&mut rng, n, cfg.theta)?);
    }
    let fracs: Vec<f64> = profiles.iter().map(|p| p.largest_normalized()).collect();
    let me = mc_mean_stderr(&fracs, None)?;
    let mut rng = stream(cfg, 1);
    let sticks = largest_part_mean(&mut rng, cfg.theta, cfg.samples, 400, 1e-8)?;
    let se = (me.stderr * me.stderr + sticks.stderr * sticks.stderr).sqrt();
    let rows = vec![
        CheckRow::against_oracle(
            format!("largest cycle fraction (n={n}) vs stick-breaking oracle"),
            me.mean,
            Some(me.stderr),
            sticks.mean,
            3.0 * se,
        ),
        CheckRow::info(
            "mean cycle count",
            profiles.iter().map(|p| p.cycle_count() as f64).sum::<f64>() / draws as f64,
            None,
        ),
    ];
    let dump = cfg.dump.then(|| {
        let mut csv = String::from("draw,cycle_lengths\n");
        for (i, p) in profiles.iter().enumerate() {
            let joined = p
                .cycle_lengths
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            csv.push_str(&format!("{i},\"{joined}\"\n"));
        }
        Dump {
            suffix: "profiles.csv",
            csv,
            manifest: None,
        }
    });
    Ok(RunOutcome {
        rows,
        dump,
        criteria: None,
    })
}

fn primes(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n_max = cfg.n.unwrap_or(10_000_000);
    let mut rng = stream(cfg, 0);
    let e = prime_universality_experiment(&mut rng, n_max, cfg.samples)?;
    let rows = vec![
        CheckRow::bound(
            format!("largest-component ECDF vs Dickman law, N_max={n_max}"),
            e.sup_distance,
            None,
            cfg.tolerance("prime_sup"),
        ),
        CheckRow::against_oracle(
            "P(largest component > 1/2) vs ln 2",
            e.p_largest_over_half,
            None,
            std::f64::consts::LN_2,
            cfg.tolerance("prime_half_abs"),
        ),
        CheckRow::against_oracle(
            "Dickman rho(2) vs 1 - ln 2",
            lebesgue_core::dickman::dickman_rho(2.0),
            None,
            1.0 - std::f64::consts::LN_2,
            cfg.tolerance("dickman_abs"),
        ),
        CheckRow::against_oracle(
            "Dickman integrators at u=3",
            lebesgue_core::dickman::dickman_rho(3.0),
            None,
            lebesgue_core::dickman::dickman_rho_marching(3.0, 8192),
            cfg.tolerance("dickman_cross_abs"),
        ),
    ];
    let dump = cfg.dump.then(|| {
        // Re-derive the same draws for the dump.
        let mut rng = stream(cfg, 0);
        let mut csv = String::from("n,components\n");
        for _ in 0..cfg.samples.min(20_000) {
            let n = 2 + rng.next_u64() % (n_max - 1);
            let p = prime_profile(n).expect("profile");
            let joined = p
                .components
                .iter()
                .map(|c| format!("{c:.6}"))
                .collect::<Vec<_>>()
                .join(" ");
            csv.push_str(&format!("{n},\"{joined}\"\n"));
        }
        Dump {
            suffix: "profiles.csv",
            csv,
            manifest: None,
        }
    });
    Ok(RunOutcome {
        rows,
        dump,
        criteria: None,
    })
}

fn invariance(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let part = MeshPartition::new(vec![0.5, 0.5])?;
    let ens = build_weighted_ensemble(
        &stream(cfg, 0),
        cfg.theta,
        cfg.samples,
        cfg.window,
        400,
        1e-8,
        cfg.threads,
    )?;

    // Weight cancellation (bit-level).
    let one = StepFunction::constant(part.clone(), 1.0);
    let at_one = empirical_laplace(&ens, &one)?;
    let mut rows = vec![
        CheckRow::against_oracle(
            "estimate at f=1 (bit-level)",
            at_one.estimate,
            at_one.stderr,
            1.0,
            0.0,
        ),
        CheckRow::against_oracle(
            "stderr at f=1 (bit-level)",
            at_one.stderr.unwrap_or(f64::NAN),
            None,
            0.0,
            0.0,
        ),
    ];

    // Estimator vs the functional at f = 2.
    let two = StepFunction::constant(part.clone(), 2.0);
    let at_two = empirical_laplace(&ens, &two)?;
    let se = at_two.stderr.expect("variance guard holds at f=2");
    rows.push(CheckRow::against_oracle(
        "estimate at f=2 vs Phi_theta(2)",
        at_two.estimate,
        Some(se),
        phi_theta(&two, cfg.theta)?,
        3.0 * se,
    ));

    // Exact multiplier identity, worst of 200 seeded triples.
    let mut rng = stream(cfg, 1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let f = StepFunction::new(
            part.clone(),
            vec![0.2 + 4.0 * rng.next_f64(), 0.2 + 4.0 * rng.next_f64()],
        )?;
        let a = StepFunction::new(
            part.clone(),
            vec![0.2 + 4.0 * rng.next_f64(), 0.2 + 4.0 * rng.next_f64()],
        )?;
        worst = worst.max(multiplier_invariance_check(&f, &a, cfg.theta)?.rel_diff);
    }
    rows.push(CheckRow::bound(
        "multiplier identity, worst of 200",
        worst,
        None,
        cfg.tolerance("exact_identity_rel"),
    ));

    // Ensemble shift under a zero-log-mean multiplier.
    let a = StepFunction::new(part.clone(), vec![2.0, 0.5])?;
    let af = two.pointwise_mul(&a)?;
    let diffs: Vec<f64> = ens
        .samples()
        .iter()
        .zip(ens.log_weights())
        .map(|(xi, &w)| (w - xi.pair(&two)).exp() - (w - xi.pair(&af)).exp())
        .collect();
    let me = mc_mean_stderr(&diffs, None)?;
    rows.push(CheckRow::against_oracle(
        "ensemble shift under zero-log-mean multiplier",
        me.mean,
        Some(me.stderr),
        0.0,
        3.0 * me.stderr,
    ));

    // Signed route.
    let signed = ens.sign_symmetrized(&stream(cfg, 2))?;
    let f_signed = StepFunction::new(part, vec![-2.0, 2.0])?;
    let est = empirical_laplace_signed(&signed, &f_signed)?;
    let se = est.stderr.expect("|f| = 2 satisfies the variance guard");
    rows.push(CheckRow::against_oracle(
        "sign-symmetrized estimator vs Phi(|f|)",
        est.estimate,
        Some(se),
        phi_theta(&f_signed.abs(), cfg.theta)?,
        3.0 * se,
    ));
    let dump = if cfg.dump {
        let mut csv = Vec::new();
        ens.write_atoms_csv(&mut csv).expect("in-memory write");
        Some(Dump {
            suffix: "atoms.csv",
            csv: String::from_utf8(csv).expect("ascii csv"),
            manifest: Some(format!("{:#}\n", ens.manifest_json())),
        })
    } else {
        None
    };
    Ok(RunOutcome {
        rows,
        dump,
        criteria: None,
    })
}

fn zagier_probe(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n_max = cfg.n.unwrap_or(8).min(20) as usize;
    let rows_data = zagier_limit_probe(
        &stream(cfg, 0),
        cfg.theta, // theta doubles as lambda for the probes
        n_max,
        4,
        cfg.samples.min(100_000),
    )?;
    let mut rows = Vec::new();
    for r in rows_data {
        rows.push(CheckRow::info(
            format!("F_n(lambda)^(1/n), n={}", r.n),
            r.root,
            r.root_stderr,
        ));
        if let Some(diff) = r.diff {
            rows.push(CheckRow::info(
                format!("successive difference at n={}", r.n),
                diff,
                None,
            ));
        }
    }
    Ok(RunOutcome::rows(rows))
}

fn window_probe(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let n = cfg.n.unwrap_or(2).max(2) as usize;
    let mut rng = stream(cfg, 0);
    let grid = [0.5, 1.0, 2.0, 4.0];
    let vols = lebesgue_window_volume(
        &mut rng,
        n,
        cfg.theta,
        &grid,
        cfg.samples,
        default_proposal_sigma(n),
    )?;
    let mut rows = Vec::new();
    for v in &vols {
        rows.push(CheckRow::info(
            format!("window volume at s={}", v.s),
            v.volume,
            Some(v.stderr),
        ));
        // The open linearity guess: report volume/s for inspection.
        rows.push(CheckRow::info(
            format!("volume/s at s={}", v.s),
            v.volume / v.s,
            Some(v.stderr / v.s),
        ));
    }
    Ok(RunOutcome::rows(rows))
}

fn verify_all(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let criteria = verify::verify_all(cfg.seed, cfg.quick, cfg.threads)?;
    let rows = criteria
        .iter()
        .map(|c| {
            let failing = c.rows.iter().filter(|r| !r.pass).count();
            CheckRow::bound(
                format!("criterion {:02} {}", c.id, c.name),
                failing as f64,
                None,
                0.0,
            )
        })
        .collect();
    Ok(RunOutcome {
        rows,
        dump: None,
        criteria: Some(criteria),
    })
}
