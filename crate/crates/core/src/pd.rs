//! Constructions of the measures themselves: GEM stick breaking, sorted
//! Poisson–Dirichlet samples, gamma-subordinator jumps, attachment of iid
//! uniform locations, sign symmetrization, the multiplier and additive-shift
//! actions, and the importance-weighted ensembles that stand in for the
//! sigma-finite multiplicative measure.
//!
//! The sigma-finite object is never sampled directly. Ensembles are drawn
//! from the gamma-process law and carry `log_weight = Σ_k c_k`, the
//! log-density of the multiplicative measure relative to that law; a window
//! bound `M` on total mass makes windowed weighted comparisons well posed.

use std::io::Write;

use crate::laplace::StepFunction;
use crate::parallel::parallel_chunks;
use crate::rng::RngStream;
use crate::samplers::{beta_variate, inverse_levy_tail, random_sign};
use crate::special::exp_integral_e1;
use crate::{Error, Result};

/// Relative slack allowed between `sum(terms) + truncation_tail` and `total`.
const SERIES_CONSISTENCY: f64 = 1e-9;

/// A point of the cone of descending positive series: stored terms, the
/// recorded total, and a bound on the mass beyond the stored terms.
#[derive(Debug, Clone)]
pub struct SeriesPoint {
    terms: Vec<f64>,
    total: f64,
    truncation_tail: f64,
    tail_warning: bool,
}

impl SeriesPoint {
    pub fn new(
        terms: Vec<f64>,
        total: f64,
        truncation_tail: f64,
        tail_warning: bool,
    ) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Parameter(
                "series must have at least one term".into(),
            ));
        }
        if terms.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Parameter("series terms must be positive".into()));
        }
        if terms.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Parameter("series terms must be descending".into()));
        }
        if truncation_tail < 0.0 {
            return Err(Error::Parameter(
                "truncation tail must be nonnegative".into(),
            ));
        }
        let sum: f64 = terms.iter().sum();
        if (sum + truncation_tail - total).abs() > SERIES_CONSISTENCY * total {
            return Err(Error::Parameter(format!(
                "series inconsistent: sum {sum} + tail {truncation_tail} vs total {total}"
            )));
        }
        Ok(SeriesPoint {
            terms,
            total,
            truncation_tail,
            tail_warning,
        })
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    /// True when term generation hit `max_terms` before the tail bound
    /// dropped below `tail_eps`.
    pub fn tail_warning(&self) -> bool {
        self.tail_warning
    }

    pub fn largest(&self) -> f64 {
        self.terms[0]
    }
}

/// Unsorted stick-breaking output.
#[derive(Debug, Clone)]
pub struct StickSample {
    /// Sticks in breaking order: `x_n = ξ_n · Π_{k<n} (1 − ξ_k)`.
    pub sticks: Vec<f64>,
    /// Interval mass not yet broken off.
    pub remaining: f64,
    /// Set when `max_terms` was exhausted with `remaining ≥ tail_eps`.
    pub tail_warning: bool,
}

/// Break the unit interval by iid Beta(1, θ) fractions until the unbroken
/// remainder falls below `tail_eps` or `max_terms` sticks were produced.
pub fn gem_stick_breaking(
    rng: &mut RngStream,
    theta: f64,
    max_terms: usize,
    tail_eps: f64,
) -> Result<StickSample> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::Parameter(format!(
            "tail_eps must lie in (0,1), got {tail_eps}"
        )));
    }
    if max_terms == 0 {
        return Err(Error::Parameter("max_terms must be at least 1".into()));
    }
    let mut sticks = Vec::new();
    let mut remaining = 1.0f64;
    while sticks.len() < max_terms && remaining >= tail_eps {
        let xi = beta_variate(rng, 1.0, theta)?;
        sticks.push(xi * remaining);
        remaining *= 1.0 - xi;
    }
    let tail_warning = remaining >= tail_eps;
    Ok(StickSample {
        sticks,
        remaining,
        tail_warning,
    })
}

/// A draw from the Poisson–Dirichlet law PD(θ), truncated: the stick-breaking
/// output passed to the variational (descending) order, with total 1 and the
/// unbroken remainder recorded as the truncation tail.
pub fn pd_sample(
    rng: &mut RngStream,
    theta: f64,
    max_terms: usize,
    tail_eps: f64,
) -> Result<SeriesPoint> {
    let gem = gem_stick_breaking(rng, theta, max_terms, tail_eps)?;
    let mut terms = gem.sticks;
    terms.sort_by(|a, b| b.partial_cmp(a).unwrap());
    SeriesPoint::new(terms, 1.0, gem.remaining, gem.tail_warning)
}

/// Jumps of the gamma subordinator at unit time, largest first: the k-th jump
/// inverts the Lévy tail `θ E1(·)` at the k-th Poisson arrival time. The tail
/// bound `θ · E1(J_last) · J_last` dominates the expected discarded mass
/// `θ (1 − e^{−J_last})` once jumps are small.
pub fn gamma_subordinator_jumps(
    rng: &mut RngStream,
    theta: f64,
    max_terms: usize,
    tail_eps: f64,
) -> Result<SeriesPoint> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::Parameter(format!(
            "tail_eps must lie in (0,1), got {tail_eps}"
        )));
    }
    if max_terms == 0 {
        return Err(Error::Parameter("max_terms must be at least 1".into()));
    }
    let mut jumps = Vec::new();
    let mut arrival = 0.0f64;
    let mut tail_bound;
    loop {
        arrival += rng.next_exp();
        let j = inverse_levy_tail(theta, arrival)?;
        jumps.push(j);
        tail_bound = theta * exp_integral_e1(j)? * j;
        if tail_bound < tail_eps || jumps.len() >= max_terms {
            break;
        }
    }
    let tail_warning = tail_bound >= tail_eps;
    let sum: f64 = jumps.iter().sum();
    SeriesPoint::new(jumps, sum + tail_bound, tail_bound, tail_warning)
}

/// One atom of a discrete measure.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Atom {
    pub coeff: f64,
    pub location: f64,
}

/// A finite realization of `ξ = Σ_k c_k δ_{x_k}` with locations in `[0, 1]`.
/// `signed` marks charge-valued coefficients; unsigned measures keep every
/// coefficient positive.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    signed: bool,
    tail_bound: f64,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>, signed: bool, tail_bound: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Parameter(
                "measure must carry at least one atom".into(),
            ));
        }
        if !signed && atoms.iter().any(|a| !(a.coeff > 0.0)) {
            return Err(Error::Parameter(
                "unsigned measure needs positive coefficients".into(),
            ));
        }
        if atoms.iter().any(|a| !(0.0..=1.0).contains(&a.location)) {
            return Err(Error::Parameter("locations must lie in [0,1]".into()));
        }
        if tail_bound < 0.0 {
            return Err(Error::Parameter("tail bound must be nonnegative".into()));
        }
        for i in 1..atoms.len() {
            if atoms[..i].iter().any(|a| a.location == atoms[i].location) {
                return Err(Error::Parameter("duplicate atom locations rejected".into()));
            }
        }
        Ok(DiscreteMeasure {
            atoms,
            signed,
            tail_bound,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `Σ_k c_k` over stored atoms, in atom order. For ensembles this is the
    /// log-importance-weight, so the summation order here must match the
    /// pairing loop in the Laplace estimators.
    pub fn total_mass(&self) -> f64 {
        let mut s = 0.0;
        for a in &self.atoms {
            s += a.coeff;
        }
        s
    }

    /// `Σ_k |c_k|` (total variation) — the weight of the signed extension.
    pub fn total_variation(&self) -> f64 {
        let mut s = 0.0;
        for a in &self.atoms {
            s += a.coeff.abs();
        }
        s
    }

    /// `⟨f, ξ⟩ = Σ_k f(x_k) c_k`, accumulated in atom order.
    pub fn pair(&self, f: &StepFunction) -> f64 {
        let mut s = 0.0;
        for a in &self.atoms {
            s += f.eval(a.location) * a.coeff;
        }
        s
    }

    /// `Σ_k |f(x_k)| |c_k|` — the modulus pairing used by the signed
    /// extension (only moduli enter its characteristic functional).
    pub fn pair_modulus(&self, f: &StepFunction) -> f64 {
        let mut s = 0.0;
        for a in &self.atoms {
            s += f.eval(a.location).abs() * a.coeff.abs();
        }
        s
    }
}

/// Attach an independent uniform location to every series term, preserving
/// order. Duplicate locations (probability zero) are redrawn.
pub fn attach_locations(rng: &mut RngStream, series: &SeriesPoint) -> DiscreteMeasure {
    let mut atoms: Vec<Atom> = Vec::with_capacity(series.terms().len());
    for &c in series.terms() {
        let mut loc = rng.next_f64();
        while atoms.iter().any(|a| a.location == loc) {
            loc = rng.next_f64();
        }
        atoms.push(Atom {
            coeff: c,
            location: loc,
        });
    }
    DiscreteMeasure {
        atoms,
        signed: false,
        tail_bound: series.truncation_tail(),
    }
}

/// Multiply each coefficient by an independent fair sign, producing a charge.
/// Moduli, and hence the descending-modulus order, are untouched.
pub fn sign_symmetrize(rng: &mut RngStream, m: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if m.signed {
        return Err(Error::Parameter("measure is already signed".into()));
    }
    let atoms = m
        .atoms
        .iter()
        .map(|a| Atom {
            coeff: a.coeff * random_sign(rng),
            location: a.location,
        })
        .collect();
    Ok(DiscreteMeasure {
        atoms,
        signed: true,
        tail_bound: m.tail_bound,
    })
}

/// The multiplier action `c_k ↦ c_k · a(x_k)`.
pub fn multiplier_action(m: &DiscreteMeasure, a: &StepFunction) -> Result<DiscreteMeasure> {
    if a.values().iter().any(|&v| v == 0.0) {
        return Err(Error::Domain("multiplier vanishes on a cell".into()));
    }
    let signed = m.signed || a.values().iter().any(|&v| v < 0.0);
    let atoms = m
        .atoms
        .iter()
        .map(|at| Atom {
            coeff: at.coeff * a.eval(at.location),
            location: at.location,
        })
        .collect();
    Ok(DiscreteMeasure {
        atoms,
        signed,
        tail_bound: m.tail_bound,
    })
}

/// Pass to additive coordinates `b_k = −ln c_k` (atoms keep their locations).
pub fn log_map(m: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if m.signed {
        return Err(Error::Domain("log map needs an unsigned measure".into()));
    }
    if m.atoms.iter().any(|a| !(a.coeff > 0.0)) {
        return Err(Error::Domain("log map needs positive coefficients".into()));
    }
    let atoms = m
        .atoms
        .iter()
        .map(|a| Atom {
            coeff: -a.coeff.ln(),
            location: a.location,
        })
        .collect();
    Ok(DiscreteMeasure {
        atoms,
        signed: true,
        tail_bound: m.tail_bound,
    })
}

/// Inverse of [`log_map`]: `c_k = e^{−b_k}`.
pub fn exp_map(m: &DiscreteMeasure) -> DiscreteMeasure {
    let atoms = m
        .atoms
        .iter()
        .map(|a| Atom {
            coeff: (-a.coeff).exp(),
            location: a.location,
        })
        .collect();
    DiscreteMeasure {
        atoms,
        signed: false,
        tail_bound: m.tail_bound,
    }
}

/// Shift additive coordinates by a zero-mean step function:
/// `b_k ↦ b_k + f(x_k)`. The zero-mean condition is what keeps the pushed
/// measure equal in law; constants are the caller's projective factor.
pub fn additive_shift(logged: &DiscreteMeasure, f: &StepFunction) -> Result<DiscreteMeasure> {
    let mean = f.mass_weighted_mean();
    if mean.abs() > 1e-12 {
        return Err(Error::Parameter(format!(
            "shift must have zero mass-mean, got {mean}"
        )));
    }
    let atoms = logged
        .atoms
        .iter()
        .map(|a| Atom {
            coeff: a.coeff + f.eval(a.location),
            location: a.location,
        })
        .collect();
    Ok(DiscreteMeasure {
        atoms,
        signed: true,
        tail_bound: logged.tail_bound,
    })
}

/// Monte Carlo stand-in for the sigma-finite measure: gamma-process samples
/// with their log-densities `Σ_k c_k` and a window bound on total mass.
#[derive(Debug, Clone)]
pub struct WeightedEnsemble {
    samples: Vec<DiscreteMeasure>,
    log_weights: Vec<f64>,
    rejected: Vec<bool>,
    window: f64,
    theta: f64,
    seed: u64,
    stream_id: u64,
}

impl WeightedEnsemble {
    pub fn samples(&self) -> &[DiscreteMeasure] {
        &self.samples
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Window-rejection flags (`total mass > window`).
    pub fn rejected(&self) -> &[bool] {
        &self.rejected
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Replace every sample by its sign-symmetrized charge. Log-weights switch
    /// to total variation, which equals the original total mass bit for bit.
    pub fn sign_symmetrized(&self, rng: &RngStream) -> Result<WeightedEnsemble> {
        let mut out = self.clone();
        for (i, s) in self.samples.iter().enumerate() {
            let mut r = rng.substream(i as u64);
            out.samples[i] = sign_symmetrize(&mut r, s)?;
        }
        Ok(out)
    }

    /// One atom per row: `sample_id,coeff,location`.
    pub fn write_atoms_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sample_id,coeff,location")?;
        for (i, s) in self.samples.iter().enumerate() {
            for a in s.atoms() {
                writeln!(w, "{},{},{}", i, a.coeff, a.location)?;
            }
        }
        Ok(())
    }

    /// Reproducibility manifest for a dumped ensemble.
    pub fn manifest_json(&self) -> serde_json::Value {
        serde_json::json!({
            "theta": self.theta,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "window": self.window,
            "n_samples": self.samples.len(),
            "n_rejected": self.rejected.iter().filter(|&&r| r).count(),
        })
    }
}

/// Samples per worker chunk; fixed so results do not depend on thread count.
const ENSEMBLE_CHUNK: usize = 1024;

/// Draw `n_samples` subordinator-with-locations samples, recording
/// `log_weight = Σ_k c_k` and flagging samples whose mass exceeds the window.
///
/// Work is split into fixed-size chunks, one substream per chunk, so the
/// ensemble is identical for every `threads` value.
pub fn build_weighted_ensemble(
    rng: &RngStream,
    theta: f64,
    n_samples: usize,
    window: f64,
    max_terms: usize,
    tail_eps: f64,
    threads: usize,
) -> Result<WeightedEnsemble> {
    if !(window > 0.0) {
        return Err(Error::Parameter(format!(
            "window must be positive, got {window}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::Parameter(
            "ensemble needs at least one sample".into(),
        ));
    }
    let n_chunks = n_samples.div_ceil(ENSEMBLE_CHUNK);
    let chunks: Vec<Result<Vec<(DiscreteMeasure, f64, bool)>>> =
        parallel_chunks(n_chunks, threads, |c| {
            let mut r = rng.substream(c as u64);
            let lo = c * ENSEMBLE_CHUNK;
            let hi = ((c + 1) * ENSEMBLE_CHUNK).min(n_samples);
            let mut out = Vec::with_capacity(hi - lo);
            for _ in lo..hi {
                let series = gamma_subordinator_jumps(&mut r, theta, max_terms, tail_eps)?;
                let m = attach_locations(&mut r, &series);
                let mass = m.total_mass();
                out.push((m, mass, mass > window));
            }
            Ok(out)
        });

    let mut samples = Vec::with_capacity(n_samples);
    let mut log_weights = Vec::with_capacity(n_samples);
    let mut rejected = Vec::with_capacity(n_samples);
    for chunk in chunks {
        for (m, w, rej) in chunk? {
            samples.push(m);
            log_weights.push(w);
            rejected.push(rej);
        }
    }
    Ok(WeightedEnsemble {
        samples,
        log_weights,
        rejected,
        window,
        theta,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}
