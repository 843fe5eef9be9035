//! Statistical verdict machinery: one- and two-sample Kolmogorov–Smirnov
//! statistics, weighted ECDFs for windowed sigma-finite comparisons, and
//! batched jackknife mean / standard-error accumulators.

use crate::{Error, Result};

/// Number of jackknife batches used by [`mc_mean_stderr`]. Batched rather
/// than asymptotic variance: importance weights in this crate are heavy
/// tailed.
pub const JACKKNIFE_BATCHES: usize = 32;

/// Compensated (Kahan) sum; merges of worker partials go through this so the
/// result is insensitive to chunk boundaries at the 1-ulp level.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// One-sample KS statistic `sup |ECDF − cdf|` for a sorted sample.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Parameter(
            "KS statistic needs a nonempty sample".into(),
        ));
    }
    debug_assert!(
        sorted.windows(2).all(|w| w[0] <= w[1]),
        "sample must be sorted"
    );
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    Ok(d)
}

/// Two-sample KS statistic: sup distance between the two ECDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Parameter(
            "two-sample KS needs two nonempty samples".into(),
        ));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = xs[i].min(ys[j]);
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    Ok(d)
}

/// Asymptotic one-sample KS critical value at level `alpha`:
/// `c(α)/√n` with `c(α) = sqrt(−ln(α/2)/2)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Weighted empirical CDF: sorted values with normalized cumulative weights.
#[derive(Debug, Clone)]
pub struct WeightedEcdf {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WeightedEcdf {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Normalized cumulative weight at and below each sorted value.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Evaluate the ECDF at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.values.partition_point(|&v| v <= x) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    /// Sup distance against a reference CDF, probing both sides of every jump.
    pub fn sup_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let mut d = 0.0f64;
        let mut prev = 0.0;
        for (i, &x) in self.values.iter().enumerate() {
            let f = cdf(x);
            d = d.max((f - prev).abs());
            d = d.max((self.cumulative[i] - f).abs());
            prev = self.cumulative[i];
        }
        d
    }
}

/// Build a weighted ECDF from parallel value/weight slices.
pub fn weighted_ecdf(values: &[f64], weights: &[f64]) -> Result<WeightedEcdf> {
    if values.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{} values vs {} weights",
            values.len(),
            weights.len()
        )));
    }
    if values.is_empty() {
        return Err(Error::Parameter(
            "weighted ECDF needs a nonempty sample".into(),
        ));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::Parameter("weights must be nonnegative".into()));
    }
    let total = kahan_sum(weights.iter().copied());
    if !(total > 0.0) {
        return Err(Error::Parameter("weights must not all be zero".into()));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut vs = Vec::with_capacity(values.len());
    let mut cum = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for &i in &idx {
        acc += weights[i];
        vs.push(values[i]);
        cum.push(acc / total);
    }
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    Ok(WeightedEcdf {
        values: vs,
        cumulative: cum,
    })
}

/// Mean and jackknife standard error over [`JACKKNIFE_BATCHES`] contiguous
/// batches.
#[derive(Debug, Clone, Copy)]
pub struct MeanErr {
    pub mean: f64,
    pub stderr: f64,
    pub batches: usize,
    /// Set when there were fewer values than batches and the classic iid
    /// standard error was used instead.
    pub single_batch_fallback: bool,
}

impl MeanErr {
    /// 3-sigma agreement between two independent estimates.
    pub fn agrees_within_3se(&self, other: &MeanErr) -> bool {
        let se = (self.stderr * self.stderr + other.stderr * other.stderr).sqrt();
        (self.mean - other.mean).abs() <= 3.0 * se
    }
}

/// (Weighted) mean with jackknife-over-batches standard error.
///
/// With weights, each leave-one-batch-out pseudo-estimate is the ratio of the
/// remaining weighted sum to the remaining weight, which keeps the estimator
/// exact for constant inputs regardless of weight rounding.
pub fn mc_mean_stderr(values: &[f64], weights: Option<&[f64]>) -> Result<MeanErr> {
    if values.is_empty() {
        return Err(Error::Parameter(
            "mean/stderr needs a nonempty sample".into(),
        ));
    }
    if let Some(w) = weights {
        if w.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} values vs {} weights",
                values.len(),
                w.len()
            )));
        }
        if w.iter().any(|&x| x < 0.0) {
            return Err(Error::Parameter("weights must be nonnegative".into()));
        }
    }
    let n = values.len();
    if n < JACKKNIFE_BATCHES {
        // Single-batch fallback: plain (weighted) mean with iid standard error.
        let (mean, _) = weighted_mean(values, weights, 0, n);
        let mut var = 0.0;
        let mut wtot = 0.0;
        for i in 0..n {
            let w = weights.map_or(1.0, |w| w[i]);
            var += w * (values[i] - mean) * (values[i] - mean);
            wtot += w;
        }
        if !(wtot > 0.0) {
            return Err(Error::Parameter("weights must not all be zero".into()));
        }
        let stderr = if n > 1 {
            (var / wtot / (n as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        return Ok(MeanErr {
            mean,
            stderr,
            batches: 1,
            single_batch_fallback: true,
        });
    }

    let b = JACKKNIFE_BATCHES;
    let mut batch_sums = vec![0.0f64; b];
    let mut batch_wsums = vec![0.0f64; b];
    let base = n / b;
    let extra = n % b;
    let mut start = 0usize;
    for (k, (bs, bw)) in batch_sums
        .iter_mut()
        .zip(batch_wsums.iter_mut())
        .enumerate()
    {
        let len = base + usize::from(k < extra);
        for i in start..start + len {
            let w = weights.map_or(1.0, |w| w[i]);
            *bs += w * values[i];
            *bw += w;
        }
        start += len;
    }
    let total: f64 = kahan_sum(batch_sums.iter().copied());
    let wtotal: f64 = kahan_sum(batch_wsums.iter().copied());
    if !(wtotal > 0.0) {
        return Err(Error::Parameter("weights must not all be zero".into()));
    }
    let mean = total / wtotal;

    // Leave-one-batch-out pseudo-estimates.
    let mut pseudo = vec![0.0f64; b];
    for k in 0..b {
        pseudo[k] = (total - batch_sums[k]) / (wtotal - batch_wsums[k]);
    }
    let pmean = kahan_sum(pseudo.iter().copied()) / b as f64;
    let ss = pseudo
        .iter()
        .map(|p| (p - pmean) * (p - pmean))
        .sum::<f64>();
    let stderr = ((b as f64 - 1.0) / b as f64 * ss).sqrt();
    Ok(MeanErr {
        mean,
        stderr,
        batches: b,
        single_batch_fallback: false,
    })
}

fn weighted_mean(values: &[f64], weights: Option<&[f64]>, from: usize, to: usize) -> (f64, f64) {
    let mut s = 0.0;
    let mut w = 0.0;
    for i in from..to {
        let wi = weights.map_or(1.0, |ws| ws[i]);
        s += wi * values[i];
        w += wi;
    }
    (s / w, w)
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Dimension(
            "correlation needs two equal-length samples (n >= 2)".into(),
        ));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        let (x, y) = (a[i] - ma, b[i] - mb);
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    Ok(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    /// O(N²) brute-force sup over a dense probe grid around every jump.
    fn ks_brute<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
        let n = sorted.len() as f64;
        let mut d = 0.0f64;
        for &x in sorted {
            for &probe in &[x - 1e-12, x, x + 1e-12] {
                let ecdf = sorted.iter().filter(|&&v| v <= probe).count() as f64 / n;
                d = d.max((ecdf - cdf(probe)).abs());
            }
        }
        d
    }

    #[test]
    fn ks_single_point_cases() {
        // {0.5} vs uniform: D = 0.5; shifted sample: D = 1.
        let d = ks_statistic(&[0.5], |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        let shifted: Vec<f64> = vec![10.2, 10.7, 11.9];
        let d = ks_statistic(&shifted, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!(ks_statistic(&[], |x| x).is_err());
    }

    #[test]
    fn ks_null_sample_passes_at_1pct() {
        let mut rng = RngStream::new(200, 0);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < ks_critical(n, 0.01), "null KS {d}");
        // The quoted 1%-level bound 1.95/sqrt(N) is implied a fortiori.
        assert!(d < 1.95 / (n as f64).sqrt());
    }

    #[test]
    fn ks_matches_brute_force_oracle() {
        let mut rng = RngStream::new(201, 0);
        for trial in 0..30 {
            let n = 1 + (rng.next_u64() % 200) as usize;
            let mut xs: Vec<f64> = (0..n).map(|_| rng.next_f64() * 1.4 - 0.2).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let cdf = |x: f64| x.clamp(0.0, 1.0).powf(1.3);
            let fast = ks_statistic(&xs, cdf).unwrap();
            let brute = ks_brute(&xs, cdf);
            assert!(
                (fast - brute).abs() < 1e-9,
                "trial {trial}: {fast} vs {brute}"
            );
        }
    }

    #[test]
    fn two_sample_cases_and_null() {
        let a = vec![0.1, 0.4, 0.9];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.2], &[0.8]).unwrap(), 1.0);
        assert!(ks_two_sample(&[], &a).is_err());

        // Null calibration: both samples Gamma(1), 1e4 each, 1% level.
        // 100 seeded repetitions must pass in at least 98.
        let mut passes = 0;
        for rep in 0..100 {
            let mut rng = RngStream::new(202, rep);
            let xs: Vec<f64> = (0..10_000).map(|_| rng.next_exp()).collect();
            let ys: Vec<f64> = (0..10_000).map(|_| rng.next_exp()).collect();
            let d = ks_two_sample(&xs, &ys).unwrap();
            if d < ks_two_sample_critical(10_000, 10_000, 0.01) {
                passes += 1;
            }
        }
        assert!(passes >= 98, "only {passes}/100 null runs passed");
    }

    #[test]
    fn two_sample_matches_brute_force() {
        let mut rng = RngStream::new(203, 0);
        for _ in 0..20 {
            let n = 1 + (rng.next_u64() % 60) as usize;
            let m = 1 + (rng.next_u64() % 60) as usize;
            let xs: Vec<f64> = (0..n).map(|_| (rng.next_u64() % 20) as f64).collect();
            let ys: Vec<f64> = (0..m).map(|_| (rng.next_u64() % 20) as f64).collect();
            let fast = ks_two_sample(&xs, &ys).unwrap();
            // Brute force over all observed points.
            let mut d: f64 = 0.0;
            for &t in xs.iter().chain(ys.iter()) {
                let fa = xs.iter().filter(|&&v| v <= t).count() as f64 / n as f64;
                let fb = ys.iter().filter(|&&v| v <= t).count() as f64 / m as f64;
                d = d.max((fa - fb).abs());
            }
            assert!((fast - d).abs() < 1e-12, "{fast} vs {d}");
        }
    }

    #[test]
    fn weighted_ecdf_steps() {
        let e = weighted_ecdf(&[2.0, 1.0], &[3.0, 1.0]).unwrap();
        assert_eq!(e.values(), &[1.0, 2.0]);
        assert!((e.eval(1.0) - 0.25).abs() < 1e-15);
        assert!((e.eval(1.5) - 0.25).abs() < 1e-15);
        assert!((e.eval(2.0) - 1.0).abs() < 1e-15);
        assert_eq!(e.eval(0.5), 0.0);

        // Doubling weights changes nothing.
        let e2 = weighted_ecdf(&[2.0, 1.0], &[6.0, 2.0]).unwrap();
        assert_eq!(e.cumulative(), e2.cumulative());

        // Unit weights reproduce the ordinary ECDF.
        let e3 = weighted_ecdf(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(e3.cumulative(), &[1.0 / 3.0, 2.0 / 3.0, 1.0]);

        assert!(weighted_ecdf(&[1.0], &[0.0]).is_err());
        assert!(weighted_ecdf(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mean_stderr_constant_input_is_exact() {
        let xs = vec![1.0f64; 4096];
        let m = mc_mean_stderr(&xs, None).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.stderr, 0.0);
        assert!(!m.single_batch_fallback);

        // Constant values with arbitrary weights: pseudo-estimates are the
        // ratio of identical sums, still exactly 1.
        let mut rng = RngStream::new(204, 0);
        let ws: Vec<f64> = (0..4096).map(|_| rng.next_exp()).collect();
        let m = mc_mean_stderr(&xs, Some(&ws)).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.stderr, 0.0);
    }

    #[test]
    fn mean_stderr_clt_calibration() {
        // iid U(0,1): mean within 3 stderr of 1/2 in at least 99 of 100 runs.
        let mut hits = 0;
        for rep in 0..100 {
            let mut rng = RngStream::new(205, rep);
            let xs: Vec<f64> = (0..100_000).map(|_| rng.next_f64()).collect();
            let m = mc_mean_stderr(&xs, None).unwrap();
            if (m.mean - 0.5).abs() < 3.0 * m.stderr {
                hits += 1;
            }
        }
        assert!(hits >= 99, "only {hits}/100 inside 3 sigma");
    }

    #[test]
    fn mean_stderr_small_sample_fallback() {
        let m = mc_mean_stderr(&[1.0, 2.0, 3.0], None).unwrap();
        assert!(m.single_batch_fallback);
        assert_eq!(m.batches, 1);
        assert!((m.mean - 2.0).abs() < 1e-15);
        // Classic iid stderr: sd/sqrt(n) = 1/sqrt(3)
        assert!((m.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(mc_mean_stderr(&[], None).is_err());
    }

    #[test]
    fn pearson_basics() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let b = vec![2.0, 4.0, 6.0, 8.0];
        assert!((pearson(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let c = vec![4.0, 3.0, 2.0, 1.0];
        assert!((pearson(&a, &c).unwrap() + 1.0).abs() < 1e-12);
    }
}
