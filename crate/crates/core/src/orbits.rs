//! The two asymptotic experiments.
//!
//! (a) Sphere projections: uniform samples on `S^{n−1}` of radius `c√n`, the
//! exact projection density `∝ (r² − x²)^{(n−3)/2}`, and quadrature distances
//! to the Gaussian limit.
//!
//! (b) Unit-determinant orbits: the flat (log-coordinate Lebesgue) measure on
//! the hypersurface `Π y_k = e^{−θn²}`, importance sampling of its Laplace
//! transform `D_n(f)`, the geometric-mean reduction `ρ(f)`, the radial
//! profile `F_n(λ) = ∫_{H_n} exp(−λ Σ e^{x_k}) dx` with nested-quadrature and
//! Monte Carlo evaluators, a finite-difference probe of its ODE in the
//! inverse-Mellin variable, the `F_n^{1/n}` limit probe, and window-volume
//! estimates.
//!
//! Normalization: the flat measure on the hyperplane `H_n = {Σ x_k = 0}` is
//! the pushforward of Lebesgue measure under any `n−1` coordinates (the unit
//! cube in log coordinates has measure one). `F_1` is the point mass at the
//! origin, so `F_1(λ) = e^{−λ}`.

use std::cell::Cell as StdCell;

use crate::laplace::StepFunction;
use crate::quad::integrate;
use crate::rng::RngStream;
use crate::special::{bessel_k0, ln_gamma, normal_cdf};
use crate::stats::{kahan_sum, ks_statistic, mc_mean_stderr, MeanErr};
use crate::{Error, Result};

/// Uniform point on the sphere of radius `r` in `R^n` (Gaussian direction,
/// rescaled).
pub fn sphere_uniform(rng: &mut RngStream, n: usize, r: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Parameter(
            "sphere dimension must be at least 2".into(),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::Parameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(v.into_iter().map(|x| x * r / norm).collect());
        }
    }
}

/// Density at `x` of one coordinate of the uniform law on `S^{n−1}_r`:
/// `c_n (r² − x²)^{(n−3)/2}` on `[−r, r]`, zero outside.
///
/// The exponent is `(n−3)/2`: projecting the sphere to a coordinate leaves an
/// `(n−2)`-sphere of latitude whose radius is `√(r² − x²)`, with the surface
/// element stretched by `1/cos` of the latitude angle. The `n = 3` case is
/// the flat hat-box density `1/(2r)`.
pub fn mp_projection_density(x: f64, n: usize, r: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Parameter("projection density needs n >= 3".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Parameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    if x.abs() >= r {
        return Ok(0.0);
    }
    // c_n = Γ(n/2) / (√π Γ((n−1)/2) r^{n−2})
    let ln_c = ln_gamma(n as f64 / 2.0)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma((n as f64 - 1.0) / 2.0)
        - (n as f64 - 2.0) * r.ln();
    Ok((ln_c + 0.5 * (n as f64 - 3.0) * ((r - x) * (r + x)).ln()).exp())
}

/// Sup distance between the exact projection CDF at radius `c√n` and the
/// `N(0, c²)` CDF, by cumulative quadrature on a fine grid.
pub fn mp_projection_gauss_distance(n: usize, c: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Parameter("projection law needs n >= 3".into()));
    }
    let r = c * (n as f64).sqrt();
    let hi = r.min(8.0 * c);
    let lo = -hi;
    let steps = 3200;
    let dx = (hi - lo) / steps as f64;
    let mut cdf = if lo > -r {
        integrate(
            &|x| mp_projection_density(x, n, r).unwrap(),
            -r,
            lo,
            1e-13,
            1e-10,
        )
        .value
    } else {
        0.0
    };
    let mut d = 0.0f64;
    for i in 0..=steps {
        let x = lo + i as f64 * dx;
        if i > 0 {
            let a = (x - dx).max(-r);
            let b = x.min(r).max(a);
            if b > a {
                cdf += integrate(
                    &|t| mp_projection_density(t, n, r).unwrap(),
                    a,
                    b,
                    1e-14,
                    1e-10,
                )
                .value;
            }
        }
        d = d.max((cdf.clamp(0.0, 1.0) - normal_cdf(x / c)).abs());
    }
    Ok(d)
}

/// Result of the sphere-projection experiment.
#[derive(Debug, Clone, Copy)]
pub struct MpExperiment {
    /// Sample KS distance against `N(0, c²)`.
    pub ks_vs_normal: f64,
    /// Sample KS distance against the exact finite-n projection law.
    pub ks_vs_exact: f64,
    pub n_samples: usize,
}

/// Draw `n_samples` first coordinates of uniform points on `S^{n−1}` of
/// radius `c√n` and measure both KS distances.
pub fn maxwell_poincare_experiment(
    rng: &mut RngStream,
    n: usize,
    c: f64,
    n_samples: usize,
) -> Result<MpExperiment> {
    if n < 3 {
        return Err(Error::Parameter("experiment needs n >= 3".into()));
    }
    if n_samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let r = c * (n as f64).sqrt();
    let mut xs: Vec<f64> = (0..n_samples)
        .map(|_| Ok(sphere_uniform(rng, n, r)?[0]))
        .collect::<Result<_>>()?;
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks_vs_normal = ks_statistic(&xs, |x| normal_cdf(x / c))?;

    // Exact-law CDF accumulated across the sorted sample.
    let mut cdf = vec![0.0f64; xs.len()];
    let mut acc = integrate(
        &|t| mp_projection_density(t, n, r).unwrap(),
        -r,
        xs[0].clamp(-r, r),
        1e-13,
        1e-10,
    )
    .value;
    cdf[0] = acc;
    for i in 1..xs.len() {
        let a = xs[i - 1].clamp(-r, r);
        let b = xs[i].clamp(-r, r);
        if b > a {
            acc += integrate(
                &|t| mp_projection_density(t, n, r).unwrap(),
                a,
                b,
                1e-13,
                1e-10,
            )
            .value;
        }
        cdf[i] = acc;
    }
    let m = xs.len() as f64;
    let mut ks_vs_exact = 0.0f64;
    for (i, &f) in cdf.iter().enumerate() {
        let f = f.clamp(0.0, 1.0);
        ks_vs_exact = ks_vs_exact.max((f - i as f64 / m).abs());
        ks_vs_exact = ks_vs_exact.max(((i as f64 + 1.0) / m - f).abs());
    }
    Ok(MpExperiment {
        ks_vs_normal,
        ks_vs_exact,
        n_samples,
    })
}

/// One importance sample for flat-measure integrals on the hyperplane
/// `H_n = {Σ x_k = 0}`: log coordinates plus the proposal's log-density for
/// reweighting against the flat measure.
#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub log_coords: Vec<f64>,
    pub proposal_log_density: f64,
    pub n: usize,
    pub theta: f64,
}

impl OrbitSample {
    /// The orbit point `y_k = exp(x_k − θn)`, satisfying `Π y_k = e^{−θn²}`.
    pub fn orbit_point(&self) -> Vec<f64> {
        self.log_coords
            .iter()
            .map(|&x| (x - self.theta * self.n as f64).exp())
            .collect()
    }

    /// Importance weight relative to the flat measure on `H_n`.
    pub fn flat_weight(&self) -> f64 {
        (-self.proposal_log_density).exp()
    }
}

/// Default proposal scale for flat-measure integrals on `H_n`.
pub fn default_proposal_sigma(n: usize) -> f64 {
    ((n as f64).ln() + 1.0).sqrt()
}

/// Centered Gaussian on the hyperplane `Σ x = 0` with scale `sigma`: iid
/// normals projected by subtracting their mean. Relative to the flat
/// (coordinate-Lebesgue) measure on `H_n` the density is
/// `(2πσ²)^{−(n−1)/2} √n · exp(−|x|²/(2σ²))`.
pub fn cartan_orbit_sample(
    rng: &mut RngStream,
    n: usize,
    theta: f64,
    proposal_sigma: f64,
) -> Result<OrbitSample> {
    if n < 2 {
        return Err(Error::Parameter(
            "orbit dimension must be at least 2".into(),
        ));
    }
    if !(proposal_sigma > 0.0) {
        return Err(Error::Parameter(format!(
            "proposal sigma must be positive, got {proposal_sigma}"
        )));
    }
    let g: Vec<f64> = (0..n)
        .map(|_| proposal_sigma * rng.next_gaussian())
        .collect();
    let mean = g.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = g.iter().map(|v| v - mean).collect();
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let proposal_log_density = -0.5
        * (n as f64 - 1.0)
        * (2.0 * std::f64::consts::PI * proposal_sigma * proposal_sigma).ln()
        + 0.5 * (n as f64).ln()
        - norm2 / (2.0 * proposal_sigma * proposal_sigma);
    Ok(OrbitSample {
        log_coords: x,
        proposal_log_density,
        n,
        theta,
    })
}

/// Equidistributed locations `t_1 … t_n` in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct UniformlySpreadLocations {
    points: Vec<f64>,
}

impl UniformlySpreadLocations {
    /// Base-2 van der Corput sequence (radical inverse of `1..=n`).
    pub fn van_der_corput(n: usize) -> Self {
        let points = (1..=n as u64)
            .map(|k| (k.reverse_bits() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
            .collect();
        UniformlySpreadLocations { points }
    }

    /// Plain iid uniforms — the "any uniformly distributed sequence" knob for
    /// sensitivity experiments.
    pub fn random(rng: &mut RngStream, n: usize) -> Self {
        UniformlySpreadLocations {
            points: (0..n).map(|_| rng.next_f64()).collect(),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Geometric mean `ρ(f) = (Π_k f(t_k))^{1/n}`, computed in log space.
pub fn rho_geometric_mean(f: &StepFunction, locs: &UniformlySpreadLocations) -> Result<f64> {
    if !f.is_positive() {
        return Err(Error::Domain(
            "geometric mean needs positive cell values".into(),
        ));
    }
    if locs.is_empty() {
        return Err(Error::Parameter("need at least one location".into()));
    }
    let log_sum: f64 = locs.points().iter().map(|&t| f.eval(t).ln()).sum();
    Ok((log_sum / locs.len() as f64).exp())
}

/// Importance estimate with its effective sample size.
#[derive(Debug, Clone, Copy)]
pub struct OrbitEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Effective sample size of the weighted summands.
    pub ess: f64,
    /// Set when `ess < N / 100` (proposal mismatch).
    pub unreliable: bool,
}

fn summands_to_estimate(values: &[f64]) -> Result<OrbitEstimate> {
    let me: MeanErr = mc_mean_stderr(values, None)?;
    let s1 = kahan_sum(values.iter().copied());
    let s2 = kahan_sum(values.iter().map(|v| v * v));
    let ess = if s2 > 0.0 { s1 * s1 / s2 } else { 0.0 };
    let unreliable = ess < values.len() as f64 / crate::tolerances::ESS_WARN_DIVISOR;
    Ok(OrbitEstimate {
        estimate: me.mean,
        stderr: me.stderr,
        ess,
        unreliable,
    })
}

/// Monte Carlo estimate of the orbit Laplace transform
/// `D_n(f) = ∫ exp(−Σ_k f(t_k) y_k) dm_n` with `y_k = e^{x_k − θn}` on `H_n`.
/// For `n = 1` the orbit is the single point `y = e^{−θ}` and the value is
/// exact.
pub fn laplace_orbit_dn(
    rng: &mut RngStream,
    f: &StepFunction,
    locs: &UniformlySpreadLocations,
    n: usize,
    theta: f64,
    n_samples: usize,
    proposal_sigma: f64,
) -> Result<OrbitEstimate> {
    if !f.is_positive() {
        return Err(Error::Domain(
            "orbit transform needs positive cell values".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if locs.len() != n {
        return Err(Error::Dimension(format!(
            "{} locations for n = {n}",
            locs.len()
        )));
    }
    let fvals: Vec<f64> = locs.points().iter().map(|&t| f.eval(t)).collect();
    if n == 1 {
        let value = (-fvals[0] * (-theta).exp()).exp();
        return Ok(OrbitEstimate {
            estimate: value,
            stderr: 0.0,
            ess: n_samples as f64,
            unreliable: false,
        });
    }
    let shift = theta * n as f64;
    let values: Vec<f64> = (0..n_samples)
        .map(|_| {
            let s = cartan_orbit_sample(rng, n, theta, proposal_sigma)?;
            let mut pairing = 0.0;
            for (x, fv) in s.log_coords.iter().zip(&fvals) {
                pairing += fv * (x - shift).exp();
            }
            Ok((-pairing - s.proposal_log_density).exp())
        })
        .collect::<Result<_>>()?;
    summands_to_estimate(&values)
}

/// Nested-quadrature value of the radial profile
/// `F_n(λ) = ∫_{H_n} exp(−λ Σ_k e^{x_k}) dx`.
#[derive(Debug, Clone, Copy)]
pub struct FnQuad {
    pub value: f64,
    /// Relative tolerance requested per nesting level.
    pub rel_tol: f64,
    /// Set when some panel budget was exhausted before its tolerance
    /// (degraded accuracy).
    pub degraded: bool,
}

/// Evaluate `F_n(λ)` by nested adaptive quadrature over `x_2 … x_n`, with
/// `x_1 = −Σ x_k` eliminated. Supported for `n ≤ 6`; Monte Carlo covers
/// larger `n` (see [`mellin_barnes_fn_mc`]).
pub fn mellin_barnes_fn_quad(lambda: f64, n: usize, tol: f64) -> Result<FnQuad> {
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if n == 0 || n > 6 {
        return Err(Error::Parameter(format!(
            "quadrature mode supports 1 <= n <= 6, got {n}"
        )));
    }
    if n == 1 {
        // H_1 is the origin; the integral is the integrand there.
        return Ok(FnQuad {
            value: (-lambda).exp(),
            rel_tol: 0.0,
            degraded: false,
        });
    }
    // Outside the box each contribution is below e^{−λn} · e^{−45}.
    let hi = (n as f64 + 45.0 / lambda).ln();
    let lo = -((n - 1) as f64) * hi;
    let rel = tol / (n as f64 - 1.0);
    let degraded = StdCell::new(false);
    let value = nested_fn_integral(n - 1, lo, hi, lambda, 0.0, 0.0, rel, &degraded);
    Ok(FnQuad {
        value,
        rel_tol: rel,
        degraded: degraded.get(),
    })
}

#[allow(clippy::too_many_arguments)]
fn nested_fn_integral(
    levels_left: usize,
    lo: f64,
    hi: f64,
    lambda: f64,
    coord_sum: f64,
    exp_sum: f64,
    rel: f64,
    degraded: &StdCell<bool>,
) -> f64 {
    if levels_left == 0 {
        return (-lambda * (exp_sum + (-coord_sum).exp())).exp();
    }
    let g = |x: f64| {
        nested_fn_integral(
            levels_left - 1,
            lo,
            hi,
            lambda,
            coord_sum + x,
            exp_sum + x.exp(),
            rel,
            degraded,
        )
    };
    let r = integrate(&g, lo, hi, 0.0, rel);
    if !r.converged {
        degraded.set(true);
    }
    r.value
}

/// Monte Carlo estimate of `F_n(λ)` with the default hyperplane proposal.
pub fn mellin_barnes_fn_mc(
    rng: &mut RngStream,
    lambda: f64,
    n: usize,
    n_samples: usize,
) -> Result<OrbitEstimate> {
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if n < 2 {
        return Err(Error::Parameter("Monte Carlo mode needs n >= 2".into()));
    }
    let sigma = default_proposal_sigma(n);
    let values: Vec<f64> = (0..n_samples)
        .map(|_| {
            let s = cartan_orbit_sample(rng, n, 0.0, sigma)?;
            let sum_exp: f64 = s.log_coords.iter().map(|&x| x.exp()).sum();
            Ok((-lambda * sum_exp - s.proposal_log_density).exp())
        })
        .collect::<Result<_>>()?;
    summands_to_estimate(&values)
}

/// Finite-difference residuals of the profile ODE.
///
/// The probe evaluates the inverse-Mellin radial form `G(z) = F_n(z^{1/n})`
/// (the variable in which the profile is an inverse Mellin transform of
/// `Γ^n`); there the printed operator identity reads
/// `(1 + z d/dz)^{n−1} dG/dz = ±G`, equivalently `z^{−1}(z d/dz)^n G = ±G`.
/// Both signs are probed; the correct one alternates with the parity of `n`
/// (at `n = 1`, `G = e^{−z}` satisfies `dG/dz = −G`).
#[derive(Debug, Clone, Copy)]
pub struct OdeResidual {
    /// Residual of the equation with `+G` on the right.
    pub residual_plus: f64,
    /// Residual with `−G` on the right.
    pub residual_minus: f64,
}

impl OdeResidual {
    pub fn best(&self) -> f64 {
        self.residual_plus.min(self.residual_minus)
    }

    /// +1 when the `+G` sign fits better, −1 otherwise.
    pub fn best_sign(&self) -> i32 {
        if self.residual_plus <= self.residual_minus {
            1
        } else {
            -1
        }
    }
}

/// Probe the ODE at `z = lambda` with order-2 central differences of
/// `(z d/dz)^n` on a log grid of step `h`.
pub fn mellin_barnes_ode_residual(n: usize, lambda: f64, h: f64) -> Result<OdeResidual> {
    if n == 0 || n > 4 {
        return Err(Error::Parameter(format!(
            "ODE probe supports 1 <= n <= 4, got {n}"
        )));
    }
    if !(lambda > 0.0) || !(h > 0.0) {
        return Err(Error::Parameter("lambda and h must be positive".into()));
    }
    let g = |z: f64| -> Result<f64> {
        match n {
            1 => Ok((-z).exp()),
            2 => Ok(2.0 * bessel_k0(2.0 * z.sqrt())?),
            _ => Ok(mellin_barnes_fn_quad(z.powf(1.0 / n as f64), n, 1e-10)?.value),
        }
    };
    let t0 = lambda.ln();
    let mut gs = [0.0f64; 5];
    for (k, gk) in gs.iter_mut().enumerate() {
        *gk = g((t0 + (k as f64 - 2.0) * h).exp())?;
    }
    // Central stencils for d^n/dt^n at t0, order 2.
    let dn = match n {
        1 => (gs[3] - gs[1]) / (2.0 * h),
        2 => (gs[3] - 2.0 * gs[2] + gs[1]) / (h * h),
        3 => (gs[4] - 2.0 * gs[3] + 2.0 * gs[1] - gs[0]) / (2.0 * h * h * h),
        _ => (gs[4] - 4.0 * gs[3] + 6.0 * gs[2] - 4.0 * gs[1] + gs[0]) / (h * h * h * h),
    };
    let lhs = dn / lambda;
    Ok(OdeResidual {
        residual_plus: (lhs - gs[2]).abs(),
        residual_minus: (lhs + gs[2]).abs(),
    })
}

/// One row of the `F_n(λ)^{1/n}` limit probe.
#[derive(Debug, Clone, Copy)]
pub struct ZagierRow {
    pub n: usize,
    pub value: f64,
    /// `F_n(λ)^{1/n}`.
    pub root: f64,
    /// Monte Carlo standard error of the root (None for quadrature rows).
    pub root_stderr: Option<f64>,
    /// Successive difference `root_n − root_{n−1}` (Cauchy diagnostic).
    pub diff: Option<f64>,
}

/// Tabulate `F_n(λ)^{1/n}` for `n = 1 … n_max`: quadrature up to
/// `quad_max ≤ 6`, Monte Carlo beyond. Exploration output, no pass/fail.
pub fn zagier_limit_probe(
    rng: &RngStream,
    lambda: f64,
    n_max: usize,
    quad_max: usize,
    mc_samples: usize,
) -> Result<Vec<ZagierRow>> {
    if n_max == 0 || n_max > 20 {
        return Err(Error::Parameter(format!(
            "probe supports 1 <= n_max <= 20, got {n_max}"
        )));
    }
    let quad_max = quad_max.min(6);
    let mut rows: Vec<ZagierRow> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (value, stderr) = if n <= quad_max {
            (mellin_barnes_fn_quad(lambda, n, 1e-8)?.value, None)
        } else {
            let mut r = rng.substream(n as u64);
            let est = mellin_barnes_fn_mc(&mut r, lambda, n, mc_samples)?;
            (est.estimate, Some(est.stderr))
        };
        let root = value.powf(1.0 / n as f64);
        // Delta method: d(F^{1/n})/dF = F^{1/n − 1}/n.
        let root_stderr = stderr.map(|se| se * value.powf(1.0 / n as f64 - 1.0) / n as f64);
        let diff = rows.last().map(|prev: &ZagierRow| root - prev.root);
        rows.push(ZagierRow {
            n,
            value,
            root,
            root_stderr,
            diff,
        });
    }
    Ok(rows)
}

/// Importance estimate of the flat-measure volume
/// `Leb_{n−1}{x ∈ H_n : Σ e^{x_k} ≤ s e^{θn}}` at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct WindowVolume {
    pub s: f64,
    pub volume: f64,
    pub stderr: f64,
    pub unreliable: bool,
}

/// Window volumes over an `s`-grid, sharing one sample batch so the volumes
/// are monotone in `s` sample by sample. On `H_n` the sum `Σ e^{x_k}` is at
/// least `n`, so grids below `n e^{−θn}` measure the empty set.
pub fn lebesgue_window_volume(
    rng: &mut RngStream,
    n: usize,
    theta: f64,
    s_grid: &[f64],
    n_samples: usize,
    proposal_sigma: f64,
) -> Result<Vec<WindowVolume>> {
    if n < 2 {
        return Err(Error::Parameter("window volume needs n >= 2".into()));
    }
    if s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Parameter("grid points must be positive".into()));
    }
    let mut sums = Vec::with_capacity(n_samples);
    let mut weights = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let smp = cartan_orbit_sample(rng, n, theta, proposal_sigma)?;
        sums.push(smp.log_coords.iter().map(|&x| x.exp()).sum::<f64>());
        weights.push(smp.flat_weight());
    }
    let scale = (theta * n as f64).exp();
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let bound = s * scale;
        let values: Vec<f64> = sums
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| if t <= bound { w } else { 0.0 })
            .collect();
        let me = mc_mean_stderr(&values, None)?;
        let s1 = kahan_sum(values.iter().copied());
        let s2 = kahan_sum(values.iter().map(|v| v * v));
        let ess = if s2 > 0.0 { s1 * s1 / s2 } else { 0.0 };
        out.push(WindowVolume {
            s,
            volume: me.mean,
            stderr: me.stderr,
            unreliable: ess < n_samples as f64 / crate::tolerances::ESS_WARN_DIVISOR,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::MeshPartition;
    use crate::stats::{ks_critical, ks_two_sample, ks_two_sample_critical};

    #[test]
    fn sphere_norm_and_exchangeability() {
        let mut rng = RngStream::new(500, 0);
        for &n in &[2usize, 3, 10] {
            let p = sphere_uniform(&mut rng, n, 2.5).unwrap();
            let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 2.5).abs() < 1e-12);
        }
        // First and last coordinates are exchangeable.
        let m = 20_000;
        let mut first = Vec::with_capacity(m);
        let mut last = Vec::with_capacity(m);
        for _ in 0..m {
            let p = sphere_uniform(&mut rng, 7, 1.0).unwrap();
            first.push(p[0]);
            last.push(p[6]);
        }
        let d = ks_two_sample(&first, &last).unwrap();
        assert!(d < ks_two_sample_critical(m, m, 0.05), "KS {d}");
        assert!(sphere_uniform(&mut rng, 1, 1.0).is_err());
    }

    #[test]
    fn sphere_coordinate_hat_box_in_3d() {
        let mut rng = RngStream::new(512, 0);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| sphere_uniform(&mut rng, 3, 1.0).unwrap()[0])
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_statistic(&xs, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0)).unwrap();
        assert!(d < ks_critical(n, 0.05), "KS {d}");
    }

    #[test]
    fn projection_density_flat_at_n3_and_normalized() {
        let d = mp_projection_density(0.3, 3, 2.0).unwrap();
        assert!((d - 0.25).abs() < 1e-13);
        assert_eq!(mp_projection_density(2.5, 3, 2.0).unwrap(), 0.0);
        for &n in &[3usize, 5, 10, 50] {
            let r = (n as f64).sqrt();
            let q = integrate(
                &|x| mp_projection_density(x, n, r).unwrap(),
                -r,
                r,
                1e-12,
                1e-11,
            );
            assert!((q.value - 1.0).abs() < 1e-10, "n={n}: mass {}", q.value);
        }
        assert!(mp_projection_density(0.0, 2, 1.0).is_err());
    }

    #[test]
    fn projection_law_approaches_gaussian() {
        let d200 = mp_projection_gauss_distance(200, 1.0).unwrap();
        assert!(d200 < 0.01, "distance at n=200: {d200}");
        let d5 = mp_projection_gauss_distance(5, 1.0).unwrap();
        assert!(d5 > 0.03, "distance at n=5: {d5}");
        let mut prev = f64::INFINITY;
        for &n in &[5usize, 20, 80, 200] {
            let d = mp_projection_gauss_distance(n, 1.0).unwrap();
            assert!(d < prev, "distance not decreasing at n={n}: {d} vs {prev}");
            prev = d;
        }
    }

    #[test]
    fn mp_experiment_ks_distances() {
        let mut rng = RngStream::new(502, 0);
        let e = maxwell_poincare_experiment(&mut rng, 200, 1.0, 100_000).unwrap();
        assert!(e.ks_vs_normal < 0.01, "KS vs normal {}", e.ks_vs_normal);
        // Against its own law only sampling noise remains.
        assert!(
            e.ks_vs_exact < ks_critical(100_000, 0.05),
            "KS vs exact {}",
            e.ks_vs_exact
        );
    }

    #[test]
    fn orbit_sample_lies_on_hyperplane_and_orbit() {
        let mut rng = RngStream::new(503, 0);
        for _ in 0..100 {
            let s = cartan_orbit_sample(&mut rng, 5, 1.3, 1.7).unwrap();
            let sum: f64 = s.log_coords.iter().sum();
            assert!(sum.abs() < 1e-9, "sum {sum}");
            let y = s.orbit_point();
            let log_prod: f64 = y.iter().map(|v| v.ln()).sum();
            let expect = -1.3 * 25.0;
            assert!(
                (log_prod - expect).abs() < 1e-6 * expect.abs(),
                "log prod {log_prod}"
            );
        }
        assert!(cartan_orbit_sample(&mut rng, 1, 1.0, 1.0).is_err());
        assert!(cartan_orbit_sample(&mut rng, 3, 1.0, 0.0).is_err());
    }

    #[test]
    fn flat_measure_importance_matches_quadrature_h2() {
        // ∫_{H_2} e^{−(e^x + e^{−x})} dx by importance sampling vs 1-D
        // quadrature of the same integral.
        let mut rng = RngStream::new(504, 0);
        let est = mellin_barnes_fn_mc(&mut rng, 1.0, 2, 200_000).unwrap();
        let q = integrate(
            &|x: f64| (-(x.exp() + (-x).exp())).exp(),
            -8.0,
            8.0,
            1e-13,
            1e-11,
        );
        assert!(!est.unreliable);
        assert!(
            (est.estimate - q.value).abs() < 3.0 * est.stderr,
            "MC {} ± {} vs quadrature {}",
            est.estimate,
            est.stderr,
            q.value
        );
    }

    #[test]
    fn van_der_corput_equidistributes_dyadic_cells() {
        // Cell-count error at dyadic breakpoints is at most 1/n, so the
        // log-geometric mean converges at the Koksma rate 2/n for a step
        // function with dyadic cells and total log variation < 2.
        for &n in &[64usize, 1000, 10_000] {
            let locs = UniformlySpreadLocations::van_der_corput(n);
            let p = MeshPartition::new(vec![0.5, 0.5]).unwrap();
            let f = StepFunction::new(p, vec![1.0, 4.0]).unwrap();
            let rho = rho_geometric_mean(&f, &locs).unwrap();
            let target = f.mass_weighted_log_mean().unwrap();
            assert!(
                (rho.ln() - target).abs() < 2.0 / n as f64,
                "n={n}: {} vs {target}",
                rho.ln()
            );
        }
        // Two-cell pinned value: ρ → 2 for f = (1, 4) on halves.
        let locs = UniformlySpreadLocations::van_der_corput(10_000);
        let p = MeshPartition::new(vec![0.5, 0.5]).unwrap();
        let f = StepFunction::new(p, vec![1.0, 4.0]).unwrap();
        let rho = rho_geometric_mean(&f, &locs).unwrap();
        assert!((rho - 2.0).abs() < 1e-3, "rho {rho}");
        // Constant functions are fixed points.
        let c = StepFunction::constant(MeshPartition::new(vec![1.0]).unwrap(), 3.7);
        assert!((rho_geometric_mean(&c, &locs).unwrap() - 3.7).abs() < 1e-12);
    }

    #[test]
    fn orbit_transform_exact_at_n1_and_quadrature_at_n2() {
        let mut rng = RngStream::new(505, 0);
        let p = MeshPartition::new(vec![1.0]).unwrap();
        let f = StepFunction::constant(p, 1.7);
        let locs1 = UniformlySpreadLocations::van_der_corput(1);
        let d1 = laplace_orbit_dn(&mut rng, &f, &locs1, 1, 0.9, 10, 1.0).unwrap();
        let expect = (-1.7 * (-0.9f64).exp()).exp();
        assert_eq!(d1.estimate, expect);
        assert_eq!(d1.stderr, 0.0);

        // n = 2, θ = 1, f ≡ 1: D_2 = F_2(e^{−2}).
        let locs2 = UniformlySpreadLocations::van_der_corput(2);
        let p2 = MeshPartition::new(vec![1.0]).unwrap();
        let one = StepFunction::constant(p2, 1.0);
        let d2 = laplace_orbit_dn(
            &mut rng,
            &one,
            &locs2,
            2,
            1.0,
            200_000,
            default_proposal_sigma(2),
        )
        .unwrap();
        let oracle = 2.0 * bessel_k0(2.0 * (-2.0f64).exp()).unwrap();
        assert!(
            (d2.estimate - oracle).abs() < 3.0 * d2.stderr,
            "D2 {} ± {} vs F2(e^-2) {}",
            d2.estimate,
            d2.stderr,
            oracle
        );
    }

    #[test]
    fn equal_rho_gives_equal_dn_statistically() {
        // Exact change-of-variables identity, spot-checked on matched pairs.
        let locs = UniformlySpreadLocations::van_der_corput(3);
        let p = MeshPartition::new(vec![0.5, 0.5]).unwrap();
        let mut rng = RngStream::new(506, 0);
        for pair in 0..3u64 {
            let f = StepFunction::new(p.clone(), vec![0.5 + rng.next_f64(), 0.5 + rng.next_f64()])
                .unwrap();
            // The vdC prefix {1/2, 1/4, 3/4} hits cell 0 once and cell 1 twice.
            let g2 = 0.5 + rng.next_f64();
            let g1 = f.values()[0] * f.values()[1] * f.values()[1] / (g2 * g2);
            let g = StepFunction::new(p.clone(), vec![g1, g2]).unwrap();
            let rf = rho_geometric_mean(&f, &locs).unwrap();
            let rg = rho_geometric_mean(&g, &locs).unwrap();
            assert!((rf - rg).abs() < 1e-12 * rf, "pair {pair}: rho mismatch");

            let mut ra = RngStream::new(507, pair);
            let mut rb = RngStream::new(508, pair);
            let da = laplace_orbit_dn(
                &mut ra,
                &f,
                &locs,
                3,
                1.0,
                100_000,
                default_proposal_sigma(3),
            )
            .unwrap();
            let db = laplace_orbit_dn(
                &mut rb,
                &g,
                &locs,
                3,
                1.0,
                100_000,
                default_proposal_sigma(3),
            )
            .unwrap();
            let se = (da.stderr * da.stderr + db.stderr * db.stderr).sqrt();
            assert!(
                (da.estimate - db.estimate).abs() < 3.0 * se,
                "pair {pair}: {} vs {} (se {se})",
                da.estimate,
                db.estimate
            );
        }
    }

    #[test]
    fn fn_quadrature_reference_values() {
        // F_1 is exact; F_2(1) = 2 K_0(2).
        let f1 = mellin_barnes_fn_quad(0.8, 1, 1e-9).unwrap();
        assert_eq!(f1.value, (-0.8f64).exp());
        let f2 = mellin_barnes_fn_quad(1.0, 2, 1e-9).unwrap();
        let k0 = 2.0 * bessel_k0(2.0).unwrap();
        assert!((f2.value - k0).abs() < 1e-6, "{} vs {k0}", f2.value);
        assert!(!f2.degraded);
        // Strictly decreasing in λ.
        let f2b = mellin_barnes_fn_quad(2.0, 2, 1e-9).unwrap();
        assert!(f2b.value < f2.value);
        assert!(mellin_barnes_fn_quad(1.0, 7, 1e-6).is_err());
        assert!(mellin_barnes_fn_quad(0.0, 2, 1e-6).is_err());
    }

    #[test]
    fn fn_mc_agrees_with_quadrature_n3() {
        let mut rng = RngStream::new(509, 0);
        let q = mellin_barnes_fn_quad(1.0, 3, 1e-7).unwrap();
        let mc = mellin_barnes_fn_mc(&mut rng, 1.0, 3, 150_000).unwrap();
        assert!(
            (mc.estimate - q.value).abs() < 3.0 * mc.stderr,
            "MC {} ± {} vs quadrature {}",
            mc.estimate,
            mc.stderr,
            q.value
        );
    }

    #[test]
    fn ode_residual_signs_and_order() {
        // n = 1: dG/dz = −G exactly; the minus residual vanishes at rate h².
        let r1 = mellin_barnes_ode_residual(1, 0.7, 1e-3).unwrap();
        assert!(r1.residual_minus < 1e-6);
        assert!(r1.residual_plus > 0.1);
        assert_eq!(r1.best_sign(), -1);

        // n = 2: the plus sign fits; residual decays at order 2 ± 0.2.
        let mut residuals = Vec::new();
        for &h in &[1e-2, 5e-3, 2.5e-3] {
            let r = mellin_barnes_ode_residual(2, 1.0, h).unwrap();
            assert_eq!(r.best_sign(), 1);
            residuals.push(r.best());
        }
        for w in residuals.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() <= 0.2, "order {order}");
        }
        assert!(mellin_barnes_ode_residual(5, 1.0, 1e-2).is_err());
    }

    #[test]
    fn zagier_probe_shape() {
        let rng = RngStream::new(510, 0);
        let rows = zagier_limit_probe(&rng, 1.0, 8, 4, 20_000).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].value, (-1.0f64).exp());
        assert!(rows.iter().all(|r| r.value > 0.0 && r.root > 0.0));
        assert!(rows[0].diff.is_none() && rows[1].diff.is_some());
        assert!(rows[3].root_stderr.is_none(), "n=4 should be quadrature");
        assert!(rows[7].root_stderr.is_some(), "n=8 should be Monte Carlo");
    }

    #[test]
    fn window_volume_monotone_and_matches_h2_oracle() {
        let mut rng = RngStream::new(511, 0);
        let grid = [0.5, 1.0, 2.0];
        let vols =
            lebesgue_window_volume(&mut rng, 2, 1.0, &grid, 200_000, default_proposal_sigma(2))
                .unwrap();
        assert!(vols.windows(2).all(|w| w[1].volume >= w[0].volume));
        for v in &vols {
            // Oracle: {e^x + e^{−x} ≤ S} is |x| ≤ arccosh(S/2); its length by
            // bisection on the monotone boundary equation.
            let s_cap = v.s * (2.0f64).exp();
            let oracle = if s_cap < 2.0 {
                0.0
            } else {
                let mut lo = 0.0;
                let mut hi = 60.0f64;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid.exp() + (-mid).exp() <= s_cap {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                2.0 * lo
            };
            assert!(
                (v.volume - oracle).abs() <= 3.0 * v.stderr,
                "s={}: {} ± {} vs {}",
                v.s,
                v.volume,
                v.stderr,
                oracle
            );
        }
        // Below the AM-GM floor the window is empty.
        let tiny = lebesgue_window_volume(&mut rng, 2, 1.0, &[0.1], 1000, 1.0).unwrap();
        assert_eq!(tiny[0].volume, 0.0);
    }
}
