//! The three universality routes to the Poisson–Dirichlet law — random
//! permutation cycles, prime-divisor profiles, and the Dickman function — and
//! the thinning/partition characterization executed on the gamma
//! subordinator.

use crate::dickman::dickman_rho;
use crate::factorize::factorize;
use crate::pd::{gamma_subordinator_jumps, pd_sample};
use crate::rng::RngStream;
use crate::special::gamma_p;
use crate::stats::{kahan_sum, ks_statistic, mc_mean_stderr, pearson, MeanErr};
use crate::{Error, Result};

/// Cycle lengths of a permutation, descending, normalizable by `n`.
#[derive(Debug, Clone)]
pub struct CycleProfile {
    pub n: u64,
    pub cycle_lengths: Vec<u64>,
}

impl CycleProfile {
    /// Normalized simplex point `(ℓ_1/n, ℓ_2/n, …)`.
    pub fn normalized(&self) -> Vec<f64> {
        self.cycle_lengths
            .iter()
            .map(|&l| l as f64 / self.n as f64)
            .collect()
    }

    pub fn largest_normalized(&self) -> f64 {
        self.cycle_lengths[0] as f64 / self.n as f64
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_lengths.len()
    }
}

/// Cycle lengths of an Ewens(θ)-distributed permutation of `n` elements
/// (θ = 1 is the uniform permutation).
///
/// Sequential cycle closure: tracing a cycle with `m` elements still outside
/// it, the cycle closes with probability `θ/(θ + m)`, else absorbs one of
/// the `m`. One pass generates the full length profile in O(n).
pub fn ewens_cycles(rng: &mut RngStream, n: u64, theta: f64) -> Result<CycleProfile> {
    if n == 0 {
        return Err(Error::Parameter(
            "permutation size must be at least 1".into(),
        ));
    }
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    let mut cycle_lengths = Vec::new();
    let mut outside = n - 1;
    let mut len = 1u64;
    loop {
        let close = rng.next_f64() < theta / (theta + outside as f64);
        if close || outside == 0 {
            cycle_lengths.push(len);
            if outside == 0 {
                break;
            }
            len = 1;
            outside -= 1;
        } else {
            len += 1;
            outside -= 1;
        }
    }
    cycle_lengths.sort_unstable_by(|a, b| b.cmp(a));
    Ok(CycleProfile { n, cycle_lengths })
}

/// The prime-divisor profile of `n`: `(ln p_1/ln n, …, ln p_k/ln n)` with
/// multiplicity, descending. Components sum to 1.
#[derive(Debug, Clone)]
pub struct PrimeProfile {
    pub n: u64,
    pub components: Vec<f64>,
}

impl PrimeProfile {
    pub fn largest(&self) -> f64 {
        self.components[0]
    }
}

/// Full factorization of `n ≥ 2` mapped to the simplex of log-weights.
pub fn prime_profile(n: u64) -> Result<PrimeProfile> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "prime profile needs n >= 2, got {n}"
        )));
    }
    let ln_n = (n as f64).ln();
    let mut components: Vec<f64> = factorize(n)
        .into_iter()
        .map(|p| (p as f64).ln() / ln_n)
        .collect();
    components.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(PrimeProfile { n, components })
}

/// Outcome of the largest-prime-component experiment.
#[derive(Debug, Clone, Copy)]
pub struct PrimeExperiment {
    /// Sup over sample points of `|ECDF(u) − ρ(1/u)|` (right-continuous
    /// pointwise comparison; the law has an atom at 1 from the primes).
    pub sup_distance: f64,
    /// Empirical `P(largest component > 1/2)`; the limit value is `ln 2`.
    pub p_largest_over_half: f64,
    pub samples: usize,
    pub n_max: u64,
}

/// Factor `samples` uniform draws from `[2, n_max]` and compare the largest
/// normalized component against the Dickman law `P(largest ≤ u) = ρ(1/u)`.
pub fn prime_universality_experiment(
    rng: &mut RngStream,
    n_max: u64,
    samples: usize,
) -> Result<PrimeExperiment> {
    if n_max < 10_000 {
        return Err(Error::Parameter(format!(
            "experiment needs n_max >= 1e4, got {n_max}"
        )));
    }
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let span = n_max - 1; // draw uniformly from {2, …, n_max}
    let mut largest: Vec<f64> = Vec::with_capacity(samples);
    let mut over_half = 0usize;
    for _ in 0..samples {
        let n = 2 + rng.next_u64() % span;
        let u = prime_profile(n)?.largest();
        if u > 0.5 {
            over_half += 1;
        }
        largest.push(u);
    }
    largest.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Pointwise right-continuous comparison at the sorted sample values:
    // ECDF(u_i) is (last index of the tied run + 1)/N. The prime atom at 1
    // and the composite gap just below it are genuine O(1/ln N) features, so
    // left-limit probing is deliberately not part of this metric.
    let n_f = samples as f64;
    let mut sup = 0.0f64;
    let mut i = 0usize;
    while i < samples {
        let u = largest[i];
        let mut j = i;
        while j + 1 < samples && largest[j + 1] == u {
            j += 1;
        }
        let ecdf = (j + 1) as f64 / n_f;
        let law = dickman_rho(1.0 / u);
        sup = sup.max((ecdf - law).abs());
        i = j + 1;
    }
    Ok(PrimeExperiment {
        sup_distance: sup,
        p_largest_over_half: over_half as f64 / n_f,
        samples,
        n_max,
    })
}

/// Monte Carlo mean of the largest PD(θ) component via sorted stick breaking.
pub fn largest_part_mean(
    rng: &mut RngStream,
    theta: f64,
    samples: usize,
    max_terms: usize,
    tail_eps: f64,
) -> Result<MeanErr> {
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let values: Vec<f64> = (0..samples)
        .map(|_| Ok(pd_sample(rng, theta, max_terms, tail_eps)?.largest()))
        .collect::<Result<_>>()?;
    mc_mean_stderr(&values, None)
}

/// Verdicts of the thinning/partition test.
#[derive(Debug, Clone)]
pub struct ThinningReport {
    pub theta: f64,
    pub r: usize,
    pub n_samples: usize,
    /// Unweighted per-class KS distances against Gamma(θ/r).
    pub class_ks: Vec<f64>,
    /// The 1% KS critical value the class distances are gated against.
    pub class_ks_critical: f64,
    /// Largest |Pearson correlation| over class pairs (unweighted).
    pub max_abs_correlation: f64,
    /// Weighted joint ECDF sup distance against `Π (s_i/M)^{θ/r}` on the
    /// window `{all class sums ≤ M}`; None for r > 3.
    pub weighted_joint_sup: Option<f64>,
    /// Samples inside the window.
    pub window_count: usize,
    pub window: f64,
}

/// Split every subordinator draw's jumps uniformly into `r` classes and test
/// the two halves of the partition property: unweighted class sums are iid
/// Gamma(θ/r); weighted with `e^{Σc}` on the window `{class sums ≤ M}`, the
/// joint law is the normalized product of `t^{θ/r−1}` densities.
pub fn thinning_partition_test(
    rng: &mut RngStream,
    theta: f64,
    r: usize,
    n_samples: usize,
    window: f64,
) -> Result<ThinningReport> {
    if r == 0 {
        return Err(Error::Parameter("class count must be at least 1".into()));
    }
    if !(window > 0.0) {
        return Err(Error::Parameter(format!(
            "window must be positive, got {window}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let mut class_sums: Vec<Vec<f64>> = vec![Vec::with_capacity(n_samples); r];
    for _ in 0..n_samples {
        let series = gamma_subordinator_jumps(
            rng,
            theta,
            crate::tolerances::DEFAULT_MAX_TERMS,
            crate::tolerances::DEFAULT_TAIL_EPS,
        )?;
        let mut sums = vec![0.0f64; r];
        for &j in series.terms() {
            let class = ((rng.next_f64() * r as f64) as usize).min(r - 1);
            sums[class] += j;
        }
        for (k, s) in sums.into_iter().enumerate() {
            class_sums[k].push(s);
        }
    }

    let a = theta / r as f64;
    let mut class_ks = Vec::with_capacity(r);
    for sums in &class_sums {
        let mut sorted = sums.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        class_ks.push(ks_statistic(&sorted, |t| {
            if t <= 0.0 {
                0.0
            } else {
                gamma_p(a, t)
            }
        })?);
    }
    let class_ks_critical = crate::stats::ks_critical(n_samples, crate::tolerances::GATE_ALPHA);

    let mut max_abs_correlation = 0.0f64;
    for i in 0..r {
        for j in i + 1..r {
            max_abs_correlation =
                max_abs_correlation.max(pearson(&class_sums[i], &class_sums[j])?.abs());
        }
    }

    // Weighted joint comparison on the window, r ≤ 3 (grid sup in r
    // dimensions).
    let weighted_joint_sup = if r <= 3 {
        let mut idx_in: Vec<usize> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        'sample: for i in 0..n_samples {
            let mut total = 0.0;
            for sums in &class_sums {
                if sums[i] > window {
                    continue 'sample;
                }
                total += sums[i];
            }
            idx_in.push(i);
            weights.push(total.exp());
        }
        let wtotal = kahan_sum(weights.iter().copied());
        if idx_in.is_empty() || !(wtotal > 0.0) {
            None
        } else {
            let grid_steps = 16usize;
            let mut sup = 0.0f64;
            let mut grid_point = vec![0usize; r];
            loop {
                // Advance the mixed-radix counter over the grid.
                let s: Vec<f64> = grid_point
                    .iter()
                    .map(|&g| window * (g + 1) as f64 / grid_steps as f64)
                    .collect();
                let mut wsum = 0.0;
                for (pos, &i) in idx_in.iter().enumerate() {
                    if (0..r).all(|k| class_sums[k][i] <= s[k]) {
                        wsum += weights[pos];
                    }
                }
                let empirical = wsum / wtotal;
                let law: f64 = s.iter().map(|&si| (si / window).powf(a)).product();
                sup = sup.max((empirical - law).abs());

                let mut carry = 0;
                loop {
                    grid_point[carry] += 1;
                    if grid_point[carry] < grid_steps {
                        break;
                    }
                    grid_point[carry] = 0;
                    carry += 1;
                    if carry == r {
                        break;
                    }
                }
                if carry == r {
                    break;
                }
            }
            Some(sup)
        }
    } else {
        None
    };

    Ok(ThinningReport {
        theta,
        r,
        n_samples,
        class_ks,
        class_ks_critical,
        max_abs_correlation,
        weighted_joint_sup,
        window_count: class_sums.first().map_or(0, |_| {
            (0..n_samples)
                .filter(|&i| class_sums.iter().all(|sums| sums[i] <= window))
                .count()
        }),
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_critical, ks_two_sample, ks_two_sample_critical};

    #[test]
    fn cycles_partition_n() {
        let mut rng = RngStream::new(600, 0);
        for _ in 0..500 {
            let p = ewens_cycles(&mut rng, 40, 0.7).unwrap();
            assert_eq!(p.cycle_lengths.iter().sum::<u64>(), 40);
            assert!(p.cycle_lengths.windows(2).all(|w| w[1] <= w[0]));
        }
        let single = ewens_cycles(&mut rng, 1, 1.0).unwrap();
        assert_eq!(single.cycle_lengths, vec![1]);
        assert!(ewens_cycles(&mut rng, 0, 1.0).is_err());
        assert!(ewens_cycles(&mut rng, 5, 0.0).is_err());
    }

    /// Mean cycle count of a uniform permutation of S_4 by exhaustive
    /// enumeration: 25/12.
    fn s4_mean_cycles_enumerated() -> f64 {
        let mut perm = [0usize, 1, 2, 3];
        let mut total = 0usize;
        let mut count = 0usize;
        // Heap's algorithm over all 24 permutations.
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
        fn heap(k: usize, p: &mut [usize; 4], total: &mut usize, count: &mut usize) {
            if k == 1 {
                *total += cycles(p);
                *count += 1;
                return;
            }
            for i in 0..k {
                heap(k - 1, p, total, count);
                if k % 2 == 0 {
                    p.swap(i, k - 1);
                } else {
                    p.swap(0, k - 1);
                }
            }
        }
        heap(4, &mut perm, &mut total, &mut count);
        assert_eq!(count, 24);
        total as f64 / count as f64
    }

    #[test]
    fn uniform_s4_mean_cycle_count() {
        let oracle = s4_mean_cycles_enumerated();
        assert!((oracle - 25.0 / 12.0).abs() < 1e-15);
        let mut rng = RngStream::new(601, 0);
        let n = 100_000;
        let counts: Vec<f64> = (0..n)
            .map(|_| ewens_cycles(&mut rng, 4, 1.0).unwrap().cycle_count() as f64)
            .collect();
        let me = mc_mean_stderr(&counts, None).unwrap();
        assert!(
            (me.mean - oracle).abs() < 3.0 * me.stderr,
            "mean {} ± {} vs {oracle}",
            me.mean,
            me.stderr
        );
    }

    #[test]
    fn largest_cycle_matches_stick_breaking_oracle() {
        // θ = 1, n = 1e4: largest cycle/n within 3 combined SE of the PD(1)
        // largest-part mean from the independent stick-breaking route.
        let mut rng = RngStream::new(602, 0);
        let draws = 10_000;
        let fracs: Vec<f64> = (0..draws)
            .map(|_| {
                ewens_cycles(&mut rng, 10_000, 1.0)
                    .unwrap()
                    .largest_normalized()
            })
            .collect();
        let cycles = mc_mean_stderr(&fracs, None).unwrap();
        let mut rng2 = RngStream::new(603, 0);
        let sticks = largest_part_mean(&mut rng2, 1.0, 200_000, 400, 1e-8).unwrap();
        assert!(
            cycles.agrees_within_3se(&sticks),
            "cycles {} ± {} vs sticks {} ± {}",
            cycles.mean,
            cycles.stderr,
            sticks.mean,
            sticks.stderr
        );
        // Frozen sanity range around the known largest-part mean ≈ 0.6243.
        assert!(
            (sticks.mean - 0.6243).abs() < 0.002,
            "sticks {}",
            sticks.mean
        );
    }

    #[test]
    fn prime_profile_pinned_values() {
        // 12 = 3·2·2 → (ln3, ln2, ln2)/ln12.
        let p = prime_profile(12).unwrap();
        let ln12 = 12f64.ln();
        let expect = [3f64.ln() / ln12, 2f64.ln() / ln12, 2f64.ln() / ln12];
        for (a, e) in p.components.iter().zip(&expect) {
            assert!((a - e).abs() < 1e-12);
        }
        assert!((p.components[0] - 0.44211).abs() < 1e-5);
        // Primes give the single component 1.
        let q = prime_profile(97).unwrap();
        assert_eq!(q.components.len(), 1);
        assert!((q.components[0] - 1.0).abs() < 1e-15);
        assert!(prime_profile(1).is_err());
    }

    #[test]
    fn prime_profile_components_sum_to_one() {
        let mut rng = RngStream::new(604, 0);
        for _ in 0..10_000 {
            let n = 2 + rng.next_u64() % 999_999;
            let p = prime_profile(n).unwrap();
            let sum: f64 = p.components.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "n={n}: sum {sum}");
            assert!(p.components.windows(2).all(|w| w[1] <= w[0]));
            assert!(p.components.iter().all(|&c| c > 0.0 && c <= 1.0));
        }
    }

    #[test]
    fn prime_experiment_converges_to_dickman() {
        let mut rng = RngStream::new(605, 0);
        let coarse = prime_universality_experiment(&mut rng, 10_000, 30_000).unwrap();
        let fine = prime_universality_experiment(&mut rng, 10_000_000, 30_000).unwrap();
        assert!(
            fine.sup_distance < coarse.sup_distance,
            "{} vs {}",
            fine.sup_distance,
            coarse.sup_distance
        );
        assert!(fine.sup_distance < 0.05, "sup {}", fine.sup_distance);
        // The half-event frequency carries the full O(1/ln N) finite-size
        // excess (≈ +0.034 at 1e7: exhaustively, 73.2% of n ≤ 1e6 have a
        // prime factor above √n). It approaches ln 2 from above.
        let bias = fine.p_largest_over_half - std::f64::consts::LN_2;
        assert!(bias > 0.0 && bias < 0.05, "half-event bias {bias}");
        let coarse_bias = coarse.p_largest_over_half - std::f64::consts::LN_2;
        assert!(bias < coarse_bias, "bias should shrink with N_max");
        assert!(prime_universality_experiment(&mut rng, 100, 10).is_err());
    }

    #[test]
    fn largest_part_mean_orders_with_theta() {
        // Larger θ fragments mass: the largest part shrinks.
        let mut r1 = RngStream::new(606, 0);
        let mut r2 = RngStream::new(607, 0);
        let m1 = largest_part_mean(&mut r1, 1.0, 50_000, 400, 1e-8).unwrap();
        let m2 = largest_part_mean(&mut r2, 2.0, 50_000, 400, 1e-8).unwrap();
        let se = (m1.stderr * m1.stderr + m2.stderr * m2.stderr).sqrt();
        assert!(m1.mean - m2.mean > 3.0 * se, "{} vs {}", m1.mean, m2.mean);
    }

    #[test]
    fn thinning_unweighted_classes_are_independent_gammas() {
        let mut rng = RngStream::new(608, 0);
        let rep = thinning_partition_test(&mut rng, 1.0, 2, 100_000, 2.0).unwrap();
        for (k, d) in rep.class_ks.iter().enumerate() {
            assert!(*d < rep.class_ks_critical, "class {k}: KS {d}");
        }
        assert!(rep.max_abs_correlation < 3.0 / (rep.n_samples as f64).sqrt());
    }

    #[test]
    fn thinning_weighted_window_matches_product_law() {
        let mut rng = RngStream::new(609, 0);
        let rep = thinning_partition_test(&mut rng, 1.0, 2, 100_000, 2.0).unwrap();
        let sup = rep.weighted_joint_sup.unwrap();
        assert!(sup < 0.02, "weighted joint sup {sup}");
        assert!(rep.window_count > 80_000);
    }

    #[test]
    fn thinning_r1_reduces_to_total_mass_test() {
        let mut rng = RngStream::new(610, 0);
        let rep = thinning_partition_test(&mut rng, 1.3, 1, 50_000, 2.0).unwrap();
        assert_eq!(rep.class_ks.len(), 1);
        assert!(rep.class_ks[0] < rep.class_ks_critical);
        assert_eq!(rep.max_abs_correlation, 0.0);
    }

    #[test]
    fn thinning_merge_consistency() {
        // Splitting into 4 classes and merging pairs reproduces the r = 2
        // statistics.
        let mut rng = RngStream::new(611, 0);
        let n = 20_000;
        let mut merged: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let series = gamma_subordinator_jumps(&mut rng, 1.0, 400, 1e-8).unwrap();
            let mut sums = [0.0f64; 4];
            for &j in series.terms() {
                let c = ((rng.next_f64() * 4.0) as usize).min(3);
                sums[c] += j;
            }
            merged.push(sums[0] + sums[1]);
        }
        let mut direct: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let series = gamma_subordinator_jumps(&mut rng, 1.0, 400, 1e-8).unwrap();
            let mut s = 0.0;
            for &j in series.terms() {
                if rng.next_u64() & 1 == 0 {
                    s += j;
                }
            }
            direct.push(s);
        }
        let d = ks_two_sample(&merged, &direct).unwrap();
        assert!(d < ks_two_sample_critical(n, n, 0.01), "KS {d}");
        // And the merged sums are Gamma(1/2) outright.
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_statistic(&merged, |t| if t <= 0.0 { 0.0 } else { gamma_p(0.5, t) }).unwrap();
        assert!(d < ks_critical(n, 0.01), "KS vs Gamma(1/2) {d}");
    }
}
