//! Variate samplers and the Lévy-tail machinery built on [`RngStream`]:
//! gamma and beta draws, Poisson arrival times, sign and direction draws,
//! and the inversion `J = (θ E1)^{-1}(Γ)` that turns arrival times into
//! subordinator jumps.

use crate::rng::{ArrivalSequence, RngStream};
use crate::special::{exp_integral_e1, EULER_GAMMA};
use crate::{Error, Result};

pub use crate::special::exp_integral_e1 as e1;

/// Gamma(shape, 1) variate.
///
/// Marsaglia–Tsang squeeze for `shape ≥ 1`; for `shape < 1` the boosting
/// identity `Gamma(a) = Gamma(a+1) · U^{1/a}` avoids the rejection
/// pathologies of sub-unit shapes.
pub fn gamma_variate(rng: &mut RngStream, shape: f64) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::Parameter(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    if shape < 1.0 {
        let boost = rng.next_open01().powf(1.0 / shape);
        return Ok(marsaglia_tsang(rng, shape + 1.0) * boost);
    }
    Ok(marsaglia_tsang(rng, shape))
}

fn marsaglia_tsang(rng: &mut RngStream, shape: f64) -> f64 {
    debug_assert!(shape >= 1.0);
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.next_gaussian();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.next_open01();
        // Cheap squeeze first, exact log test second.
        if u < 1.0 - 0.0331 * x.powi(4) {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Beta(a, b) variate via the two-gamma ratio.
pub fn beta_variate(rng: &mut RngStream, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Parameter(format!(
            "beta parameters must be positive, got ({a}, {b})"
        )));
    }
    let x = gamma_variate(rng, a)?;
    let y = gamma_variate(rng, b)?;
    let v = x / (x + y);
    // Keep the draw inside the open interval; stick breaking takes logs of 1−v.
    Ok(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

/// Partial sums of `count` iid unit-rate exponentials.
pub fn poisson_arrivals(rng: &mut RngStream, count: usize) -> Result<ArrivalSequence> {
    if count == 0 {
        return Err(Error::Parameter("arrival count must be at least 1".into()));
    }
    let mut gammas = Vec::with_capacity(count);
    let mut t = 0.0;
    for _ in 0..count {
        t += rng.next_exp();
        gammas.push(t);
    }
    ArrivalSequence::from_gammas(gammas)
}

/// ±1 with probability 1/2 each.
#[inline]
pub fn random_sign(rng: &mut RngStream) -> f64 {
    if rng.next_u64() >> 63 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Uniform point on the unit sphere S^{d−1} (Gaussian normalization);
/// `d = 1` reduces to a fair sign.
pub fn unit_direction(rng: &mut RngStream, d: usize) -> Result<Vec<f64>> {
    if d < 1 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    if d == 1 {
        return Ok(vec![random_sign(rng)]);
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Solve `θ · E1(J) = gamma_arrival` for the unique `J > 0`.
///
/// The tail `θ E1` is a strictly decreasing bijection `(0,∞) → (0,∞)`, so a
/// bracketed Newton iteration converges from any start; the bracket guards
/// the step. Terminates at residual `|θ E1(J) − Γ| < 1e−13`.
pub fn inverse_levy_tail(theta: f64, gamma_arrival: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if !(gamma_arrival > 0.0) {
        return Err(Error::Parameter(format!(
            "arrival must be positive, got {gamma_arrival}"
        )));
    }
    let target = gamma_arrival / theta;
    // Initial guess from the two ends of the E1 asymptotics.
    let mut j = if target > 1.0 {
        // E1(x) ≈ −γ − ln x for small x.
        (-EULER_GAMMA - target).exp()
    } else if target > 0.05 {
        1.0
    } else {
        // E1(x) ≈ e^{−x}/x for large x: solve x = −ln(target · x), a
        // contraction for x > 1.
        let mut x = -target.ln();
        for _ in 0..12 {
            x = -(target * x).ln();
        }
        x
    };
    j = j.clamp(1e-300, 700.0);

    // Expand a bracket [lo, hi] with E1(hi) <= target <= E1(lo).
    let (mut lo, mut hi) = (j, j);
    while theta * exp_integral_e1(lo)? < gamma_arrival {
        lo *= 0.5;
        if lo < 1e-300 {
            break;
        }
    }
    while theta * exp_integral_e1(hi)? > gamma_arrival {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }

    let mut j = 0.5 * (lo + hi);
    for _ in 0..200 {
        let resid = theta * exp_integral_e1(j)? - gamma_arrival;
        if resid.abs() < 1e-13 {
            return Ok(j);
        }
        if resid > 0.0 {
            lo = j; // E1 too big: J too small
        } else {
            hi = j;
        }
        // Newton step: d/dJ [θ E1(J)] = −θ e^{−J}/J.
        let deriv = -theta * (-j).exp() / j;
        let step = resid / deriv;
        let mut next = j - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == j {
            break; // converged to machine resolution
        }
        j = next;
    }
    Ok(j)
}
