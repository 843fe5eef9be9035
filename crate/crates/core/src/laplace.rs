//! Partitions, step functions, the characteristic functional `Φ_θ`, the
//! finite-dimensional weak-distribution densities, and analytic / empirical
//! Laplace transforms with their consistency checks.
//!
//! Everything here depends on a partition only through its cell masses; cell
//! geometry on `[0, 1]` is the cumulative-sum embedding.

use serde::Deserialize;

use crate::pd::WeightedEnsemble;
use crate::quad::{gamma_laplace_quadrature, integrate};
use crate::special::ln_gamma;
use crate::stats::mc_mean_stderr;
use crate::{Error, Result};

/// A finite partition of `[0, 1]` stored by cell masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshPartition {
    masses: Vec<f64>,
    /// Cumulative masses; the k-th cell is `[boundaries[k−1], boundaries[k])`,
    /// the last cell closed at 1.
    boundaries: Vec<f64>,
}

impl MeshPartition {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Parameter("partition needs at least one cell".into()));
        }
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Parameter("cell masses must be positive".into()));
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "cell masses must sum to 1, got {sum}"
            )));
        }
        let mut boundaries = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for &m in &masses {
            acc += m;
            boundaries.push(acc);
        }
        *boundaries.last_mut().unwrap() = 1.0;
        Ok(MeshPartition { masses, boundaries })
    }

    pub fn uniform(cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::Parameter("partition needs at least one cell".into()));
        }
        MeshPartition::new(vec![1.0 / cells as f64; cells])
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Index of the cell containing `x ∈ [0, 1]`.
    pub fn cell_index(&self, x: f64) -> usize {
        debug_assert!((0.0..=1.0).contains(&x), "point {x} outside [0,1]");
        self.boundaries
            .partition_point(|&b| b <= x)
            .min(self.masses.len() - 1)
    }

    /// Merge cells `i` and `j` into one (mass-additive), dropping `j`.
    pub fn merged(&self, i: usize, j: usize) -> Result<MeshPartition> {
        if i == j || i >= self.len() || j >= self.len() {
            return Err(Error::Parameter(format!("bad merge indices ({i}, {j})")));
        }
        let mut masses = self.masses.clone();
        masses[i] += masses[j];
        masses.remove(j);
        MeshPartition::new(masses)
    }
}

/// Shape of the step-function JSON config: `{"masses": […], "values": […]}`.
#[derive(Deserialize)]
struct StepFunctionConfig {
    masses: Vec<f64>,
    values: Vec<f64>,
}

/// A step function on `[0, 1]`: one value per partition cell. Houses both the
/// test functions `f` of the Laplace formulas and the multipliers `a(·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    partition: MeshPartition,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(partition: MeshPartition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} cells",
                values.len(),
                partition.len()
            )));
        }
        Ok(StepFunction { partition, values })
    }

    pub fn constant(partition: MeshPartition, value: f64) -> Self {
        let values = vec![value; partition.len()];
        StepFunction { partition, values }
    }

    /// Parse `{"masses": […], "values": […]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: StepFunctionConfig = serde_json::from_str(s)
            .map_err(|e| Error::Parameter(format!("bad step-function JSON: {e}")))?;
        StepFunction::new(MeshPartition::new(cfg.masses)?, cfg.values)
    }

    pub fn partition(&self) -> &MeshPartition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.partition.cell_index(x)]
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn is_nonzero(&self) -> bool {
        self.values.iter().all(|&v| v != 0.0)
    }

    /// `Σ_k m_k f_k`.
    pub fn mass_weighted_mean(&self) -> f64 {
        self.partition
            .masses()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m * v)
            .sum()
    }

    /// `Σ_k m_k ln f_k`; domain error on non-positive values.
    pub fn mass_weighted_log_mean(&self) -> Result<f64> {
        if !self.is_positive() {
            return Err(Error::Domain("log mean needs positive cell values".into()));
        }
        Ok(self
            .partition
            .masses()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m * v.ln())
            .sum())
    }

    /// `Σ_k m_k ln |f_k|`; domain error on zero values.
    pub fn mass_weighted_log_abs_mean(&self) -> Result<f64> {
        if !self.is_nonzero() {
            return Err(Error::Domain(
                "log-modulus mean needs nonzero cell values".into(),
            ));
        }
        Ok(self
            .partition
            .masses()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m * v.abs().ln())
            .sum())
    }

    pub fn scale(&self, c: f64) -> StepFunction {
        StepFunction {
            partition: self.partition.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn abs(&self) -> StepFunction {
        StepFunction {
            partition: self.partition.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Pointwise product; both functions must live on the same partition.
    pub fn pointwise_mul(&self, other: &StepFunction) -> Result<StepFunction> {
        if self.partition.masses() != other.partition.masses() {
            return Err(Error::Dimension(
                "step functions on different partitions".into(),
            ));
        }
        Ok(StepFunction {
            partition: self.partition.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }
}

/// The characteristic functional `Φ_θ(f) = exp(−θ Σ_k m_k ln f_k)` for
/// positive step functions.
pub fn phi_theta(f: &StepFunction, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    Ok((-theta * f.mass_weighted_log_mean()?).exp())
}

/// Signed variant: `exp(−θ Σ_k m_k ln |f_k|)`; only moduli enter.
pub fn phi_theta_signed(f: &StepFunction, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    Ok((-theta * f.mass_weighted_log_abs_mean()?).exp())
}

/// Density of the finite-dimensional weak distribution at `x`:
/// `Π_k x_k^{θ m_k − 1} / Γ(θ m_k)`.
pub fn finite_dim_density(x: &[f64], partition: &MeshPartition, theta: f64) -> Result<f64> {
    if x.len() != partition.len() {
        return Err(Error::Dimension(format!(
            "{} coordinates for {} cells",
            x.len(),
            partition.len()
        )));
    }
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if x.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("density needs positive coordinates".into()));
    }
    let mut log_density = 0.0;
    for (&xk, &mk) in x.iter().zip(partition.masses()) {
        let a = theta * mk;
        log_density += (a - 1.0) * xk.ln() - ln_gamma(a);
    }
    Ok(log_density.exp())
}

/// The restriction of `Φ_θ` to a finite partition, in product form
/// `Π_k f_k^{−θ m_k}`; cross-checked against [`phi_theta`] to 1e−12.
pub fn finite_dim_laplace_analytic(f: &StepFunction, theta: f64) -> Result<f64> {
    if !f.is_positive() {
        return Err(Error::Domain(
            "Laplace transform needs positive cell values".into(),
        ));
    }
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    let mut product = 1.0;
    for (&fk, &mk) in f.values().iter().zip(f.partition().masses()) {
        product *= fk.powf(-theta * mk);
    }
    let phi = phi_theta(f, theta)?;
    if (product - phi).abs() > 1e-12 * phi.abs() {
        return Err(Error::Internal(format!(
            "product form {product} disagrees with phi_theta {phi}"
        )));
    }
    Ok(product)
}

/// Quadrature of `∫ e^{−⟨f, x⟩} dL_{θ,ξ}(x)` over the positive orthant.
///
/// The integrand factorizes across cells, so the n-dimensional integral is an
/// exact product of one-dimensional quadratures; each factor keeps its
/// discarded gamma tail below `tail_bound`. Independent of the closed form it
/// is compared against in the acceptance suite.
pub fn finite_dim_laplace_quadrature(
    f: &StepFunction,
    theta: f64,
    tail_bound: f64,
    quad_tol: f64,
) -> Result<f64> {
    if !f.is_positive() {
        return Err(Error::Domain(
            "Laplace transform needs positive cell values".into(),
        ));
    }
    let mut product = 1.0;
    for (&fk, &mk) in f.values().iter().zip(f.partition().masses()) {
        product *= gamma_laplace_quadrature(theta * mk, fk, tail_bound, quad_tol).value;
    }
    Ok(product)
}

/// Result of [`empirical_laplace`]: the importance estimate with jackknife
/// error. `stderr` is withheld (and the warning set) when some cell value is
/// at or below 1/2, where the importance integrand stops being square
/// integrable; the estimate itself stays unbiased.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceEstimate {
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub variance_warning: bool,
}

impl LaplaceEstimate {
    /// 3-sigma agreement with an analytic value (requires a reported stderr).
    pub fn consistent_with(&self, value: f64) -> bool {
        match self.stderr {
            Some(se) => (self.estimate - value).abs() <= 3.0 * se,
            None => false,
        }
    }
}

/// Weighted empirical Laplace transform
/// `(1/N) Σ_i exp(log_weight_i − ⟨f, ξ_i⟩)` over all samples.
///
/// No window enters: for positive `f` the integrand is gamma-integrable, so
/// rejected samples participate as well.
pub fn empirical_laplace(ens: &WeightedEnsemble, f: &StepFunction) -> Result<LaplaceEstimate> {
    if !f.is_positive() {
        return Err(Error::Domain(
            "empirical Laplace needs positive cell values".into(),
        ));
    }
    let values: Vec<f64> = ens
        .samples()
        .iter()
        .zip(ens.log_weights())
        .map(|(xi, &w)| (w - xi.pair(f)).exp())
        .collect();
    let me = mc_mean_stderr(&values, None)?;
    let variance_warning = f.values().iter().any(|&v| v <= 0.5);
    Ok(LaplaceEstimate {
        estimate: me.mean,
        stderr: if variance_warning {
            None
        } else {
            Some(me.stderr)
        },
        variance_warning,
    })
}

/// Signed-extension estimator: the modulus pairing
/// `(1/N) Σ_i exp(Σ_k |c_k| − Σ_k |f(x_k)| |c_k|)`, which targets
/// `Φ_θ(|f|)` and is bitwise invariant under any sign pattern of `f` or of
/// the ensemble coefficients.
pub fn empirical_laplace_signed(
    ens: &WeightedEnsemble,
    f: &StepFunction,
) -> Result<LaplaceEstimate> {
    if !f.is_nonzero() {
        return Err(Error::Domain(
            "signed empirical Laplace needs nonzero cell values".into(),
        ));
    }
    let values: Vec<f64> = ens
        .samples()
        .iter()
        .map(|xi| (xi.total_variation() - xi.pair_modulus(f)).exp())
        .collect();
    let me = mc_mean_stderr(&values, None)?;
    let variance_warning = f.values().iter().any(|&v| v.abs() <= 0.5);
    Ok(LaplaceEstimate {
        estimate: me.mean,
        stderr: if variance_warning {
            None
        } else {
            Some(me.stderr)
        },
        variance_warning,
    })
}

/// Both sides of the multiplier identity
/// `Φ_θ(a·f) = Φ_θ(f) · exp(−θ Σ_k m_k ln a_k)`.
#[derive(Debug, Clone, Copy)]
pub struct MultiplierCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// The projective factor `exp(−θ Σ m_k ln a_k)`; 1 when `a` has zero
    /// mass-weighted log mean.
    pub factor: f64,
    pub rel_diff: f64,
}

/// Exact multiplier-invariance assertion; both sides are reported.
pub fn multiplier_invariance_check(
    f: &StepFunction,
    a: &StepFunction,
    theta: f64,
) -> Result<MultiplierCheck> {
    if !f.is_positive() || !a.is_positive() {
        return Err(Error::Domain(
            "multiplier check needs positive f and a".into(),
        ));
    }
    let lhs = phi_theta(&f.pointwise_mul(a)?, theta)?;
    let factor = (-theta * a.mass_weighted_log_mean()?).exp();
    let rhs = phi_theta(f, theta)? * factor;
    let rel_diff = (lhs - rhs).abs() / rhs.abs();
    Ok(MultiplierCheck {
        lhs,
        rhs,
        factor,
        rel_diff,
    })
}

/// One grid point of the refinement-consistency check.
#[derive(Debug, Clone, Copy)]
pub struct MergePoint {
    pub s: f64,
    /// Convolution quadrature `∫_0^s x^{a−1}(s−x)^{b−1} dx / (Γ(a)Γ(b))`.
    pub quadrature: f64,
    /// Merged-cell density `s^{a+b−1} / Γ(a+b)`.
    pub closed_form: f64,
    pub abs_diff: f64,
}

/// Verify on an `s`-grid that merging two cells convolves their marginal
/// densities into the density of the merged cell.
pub fn refinement_merge_check(
    partition: &MeshPartition,
    theta: f64,
    i: usize,
    j: usize,
    s_grid: &[f64],
) -> Result<Vec<MergePoint>> {
    if i == j || i >= partition.len() || j >= partition.len() {
        return Err(Error::Parameter(format!("bad merge indices ({i}, {j})")));
    }
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta must be positive, got {theta}"
        )));
    }
    let a = theta * partition.masses()[i];
    let b = theta * partition.masses()[j];
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(s > 0.0) {
            return Err(Error::Parameter(format!(
                "grid point must be positive, got {s}"
            )));
        }
        let quadrature = beta_convolution_quadrature(a, b, s);
        let closed_form = ((a + b - 1.0) * s.ln() - ln_gamma(a + b)).exp();
        out.push(MergePoint {
            s,
            quadrature,
            closed_form,
            abs_diff: (quadrature - closed_form).abs(),
        });
    }
    Ok(out)
}

/// `∫_0^s x^{a−1}(s−x)^{b−1} dx / (Γ(a)Γ(b))` by singularity-removing
/// quadrature: scale to `[0,1]`, split at 1/2, substitute `u = t^{1/a}`
/// (resp. mirrored `t^{1/b}`) so both halves are bounded smooth integrands.
fn beta_convolution_quadrature(a: f64, b: f64, s: f64) -> f64 {
    let tol = 1e-12;
    let left = if a < 1.0 {
        let g = |t: f64| (1.0 - t.powf(1.0 / a)).powf(b - 1.0);
        integrate(&g, 0.0, 0.5f64.powf(a), tol, tol).value / a
    } else {
        let g = |u: f64| u.powf(a - 1.0) * (1.0 - u).powf(b - 1.0);
        integrate(&g, 0.0, 0.5, tol, tol).value
    };
    let right = if b < 1.0 {
        let g = |t: f64| (1.0 - t.powf(1.0 / b)).powf(a - 1.0);
        integrate(&g, 0.0, 0.5f64.powf(b), tol, tol).value / b
    } else {
        let g = |u: f64| u.powf(b - 1.0) * (1.0 - u).powf(a - 1.0);
        integrate(&g, 0.0, 0.5, tol, tol).value
    };
    ((a + b - 1.0) * s.ln() - ln_gamma(a) - ln_gamma(b)).exp() * (left + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn half_half() -> MeshPartition {
        MeshPartition::new(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn partition_validation_and_cells() {
        assert!(MeshPartition::new(vec![]).is_err());
        assert!(MeshPartition::new(vec![0.5, 0.4]).is_err());
        assert!(MeshPartition::new(vec![1.2, -0.2]).is_err());
        let p = MeshPartition::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(p.cell_index(0.0), 0);
        assert_eq!(p.cell_index(0.25), 1);
        assert_eq!(p.cell_index(0.49), 1);
        assert_eq!(p.cell_index(0.5), 2);
        assert_eq!(p.cell_index(1.0), 2);
        let merged = p.merged(0, 2).unwrap();
        assert_eq!(merged.masses(), &[0.75, 0.25]);
        assert!(p.merged(1, 1).is_err());
    }

    #[test]
    fn step_function_json_round_trip() {
        let f = StepFunction::from_json_str(r#"{"masses":[0.5,0.5],"values":[1.0,4.0]}"#).unwrap();
        assert_eq!(f.values(), &[1.0, 4.0]);
        assert_eq!(f.eval(0.2), 1.0);
        assert_eq!(f.eval(0.7), 4.0);
        assert!(StepFunction::from_json_str(r#"{"masses":[1.0],"values":[1.0,2.0]}"#).is_err());
        assert!(StepFunction::from_json_str("not json").is_err());
    }

    #[test]
    fn phi_theta_pinned_values() {
        let one_cell = MeshPartition::new(vec![1.0]).unwrap();
        assert_eq!(
            phi_theta(&StepFunction::constant(one_cell.clone(), 1.0), 1.0).unwrap(),
            1.0
        );
        let two = StepFunction::constant(one_cell, 2.0);
        assert!((phi_theta(&two, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let f = StepFunction::new(half_half(), vec![1.0, 4.0]).unwrap();
        assert!((phi_theta(&f, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let neg = StepFunction::new(half_half(), vec![1.0, -1.0]).unwrap();
        assert!(phi_theta(&neg, 1.0).is_err());
    }

    #[test]
    fn phi_theta_signed_sees_only_moduli() {
        let f = StepFunction::new(half_half(), vec![-2.0, -2.0]).unwrap();
        assert!((phi_theta_signed(&f, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let mut rng = RngStream::new(400, 0);
        for _ in 0..200 {
            let v1 = 0.2 + 3.0 * rng.next_f64();
            let v2 = 0.2 + 3.0 * rng.next_f64();
            let f = StepFunction::new(half_half(), vec![v1, v2]).unwrap();
            let flipped = StepFunction::new(half_half(), vec![-v1, v2]).unwrap();
            let theta = 0.2 + 2.0 * rng.next_f64();
            assert_eq!(
                phi_theta_signed(&f, theta).unwrap().to_bits(),
                phi_theta_signed(&flipped, theta).unwrap().to_bits()
            );
            assert_eq!(
                phi_theta_signed(&f, theta).unwrap().to_bits(),
                phi_theta(&f.abs(), theta).unwrap().to_bits()
            );
        }
        let zero = StepFunction::new(half_half(), vec![0.0, 1.0]).unwrap();
        assert!(phi_theta_signed(&zero, 1.0).is_err());
    }

    #[test]
    fn finite_dim_density_pinned_values() {
        let one_cell = MeshPartition::new(vec![1.0]).unwrap();
        // θ = 1, single cell: x^0/Γ(1) = 1 for any x.
        for &x in &[0.3, 1.0, 7.5] {
            assert!((finite_dim_density(&[x], &one_cell, 1.0).unwrap() - 1.0).abs() < 1e-14);
        }
        // Masses (1/2, 1/2), θ = 1, x = (1,1): 1/Γ(1/2)² = 1/π.
        let d = finite_dim_density(&[1.0, 1.0], &half_half(), 1.0).unwrap();
        assert!((d - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        // θ = 2 single cell: density t/Γ(2) = t.
        for &t in &[0.2, 1.0, 3.7] {
            assert!(
                (finite_dim_density(&[t], &one_cell, 2.0).unwrap() - t).abs() < 1e-13 * t.max(1.0)
            );
        }
        assert!(finite_dim_density(&[1.0], &half_half(), 1.0).is_err());
        assert!(finite_dim_density(&[0.0, 1.0], &half_half(), 1.0).is_err());
    }

    #[test]
    fn analytic_laplace_equals_phi_on_random_triples() {
        let mut rng = RngStream::new(401, 0);
        for _ in 0..1000 {
            let cells = 1 + (rng.next_u64() % 4) as usize;
            let mut masses: Vec<f64> = (0..cells).map(|_| rng.next_open01()).collect();
            let total: f64 = masses.iter().sum();
            for m in &mut masses {
                *m /= total;
            }
            let sum: f64 = masses.iter().sum();
            if let Some(last) = masses.last_mut() {
                *last += 1.0 - sum;
            }
            let p = match MeshPartition::new(masses) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let f = StepFunction::new(p, (0..cells).map(|_| 0.1 + 5.0 * rng.next_f64()).collect())
                .unwrap();
            let theta = 0.2 + 3.0 * rng.next_f64();
            let lhs = finite_dim_laplace_analytic(&f, theta).unwrap();
            let rhs = phi_theta(&f, theta).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn analytic_laplace_single_cell_value() {
        let one_cell = MeshPartition::new(vec![1.0]).unwrap();
        let f = StepFunction::constant(one_cell, 3.0);
        assert!((finite_dim_laplace_analytic(&f, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_matches_analytic_laplace_2d() {
        // Masses (1/2, 1/2), θ = 1, f = (2, 3): quadrature vs product form.
        let f = StepFunction::new(half_half(), vec![2.0, 3.0]).unwrap();
        let q = finite_dim_laplace_quadrature(&f, 1.0, 1e-12, 1e-11).unwrap();
        let a = finite_dim_laplace_analytic(&f, 1.0).unwrap();
        assert!((q - a).abs() < 1e-8, "{q} vs {a}");

        // Genuinely nested 2-d quadrature of the same identity: both
        // exponents are 1/2, so x_i = t_i² turns the density integral into
        // (4/π) ∫∫ exp(−f1 t1² − f2 t2²) dt1 dt2 over a box whose discarded
        // tail is below 1e-12.
        let (f1, f2) = (2.0f64, 3.0f64);
        let u = 5.0;
        let inner = |t1: f64| {
            crate::quad::integrate(
                &|t2: f64| (-f1 * t1 * t1 - f2 * t2 * t2).exp(),
                0.0,
                u,
                1e-13,
                1e-11,
            )
            .value
        };
        let nested =
            crate::quad::integrate(&inner, 0.0, u, 1e-12, 1e-10).value * 4.0 / std::f64::consts::PI;
        assert!((nested - a).abs() < 1e-8, "nested {nested} vs {a}");
    }

    #[test]
    fn empirical_laplace_weight_cancellation_is_bit_exact() {
        let rng = RngStream::new(402, 0);
        let ens = crate::pd::build_weighted_ensemble(&rng, 1.0, 20_000, 1.0, 400, 1e-8, 1).unwrap();
        let f = StepFunction::constant(half_half(), 1.0);
        let est = empirical_laplace(&ens, &f).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.stderr, Some(0.0));
        assert!(!est.variance_warning);
    }

    #[test]
    fn empirical_laplace_theta_one_f_two() {
        let rng = RngStream::new(403, 0);
        let ens =
            crate::pd::build_weighted_ensemble(&rng, 1.0, 100_000, 1.0, 400, 1e-8, 1).unwrap();
        let f = StepFunction::constant(half_half(), 2.0);
        let est = empirical_laplace(&ens, &f).unwrap();
        assert!(
            est.consistent_with(0.5),
            "estimate {} ± {:?}",
            est.estimate,
            est.stderr
        );
        assert!(est.stderr.unwrap() < 0.01);
    }

    #[test]
    fn multiplier_related_test_functions_estimate_alike() {
        // f = (1, 4) is f = (2, 2) times the zero-log-mean multiplier
        // (1/2, 2); both estimates target 1/2 and agree pairwise.
        let rng = RngStream::new(408, 0);
        let ens = crate::pd::build_weighted_ensemble(&rng, 1.0, 30_000, 1.0, 400, 1e-8, 1).unwrap();
        let fa = StepFunction::new(half_half(), vec![1.0, 4.0]).unwrap();
        let fb = StepFunction::constant(half_half(), 2.0);
        let ea = empirical_laplace(&ens, &fa).unwrap();
        let eb = empirical_laplace(&ens, &fb).unwrap();
        let se = (ea.stderr.unwrap().powi(2) + eb.stderr.unwrap().powi(2)).sqrt();
        assert!((ea.estimate - eb.estimate).abs() < 3.0 * se);
        assert!(ea.consistent_with(0.5), "{} ± {:?}", ea.estimate, ea.stderr);
        assert!(eb.consistent_with(0.5), "{} ± {:?}", eb.estimate, eb.stderr);
    }

    #[test]
    fn empirical_laplace_variance_guard() {
        let rng = RngStream::new(404, 0);
        let ens = crate::pd::build_weighted_ensemble(&rng, 1.0, 5_000, 1.0, 400, 1e-8, 1).unwrap();
        let f = StepFunction::new(half_half(), vec![0.4, 2.0]).unwrap();
        let est = empirical_laplace(&ens, &f).unwrap();
        assert!(est.variance_warning);
        assert!(est.stderr.is_none());
        let neg = StepFunction::new(half_half(), vec![-1.0, 2.0]).unwrap();
        assert!(empirical_laplace(&ens, &neg).is_err());
    }

    #[test]
    fn multiplier_invariance_exact_identity() {
        let mut rng = RngStream::new(405, 0);
        for _ in 0..1000 {
            let p = half_half();
            let f = StepFunction::new(
                p.clone(),
                vec![0.1 + 4.0 * rng.next_f64(), 0.1 + 4.0 * rng.next_f64()],
            )
            .unwrap();
            let a = StepFunction::new(
                p,
                vec![0.1 + 4.0 * rng.next_f64(), 0.1 + 4.0 * rng.next_f64()],
            )
            .unwrap();
            let theta = 0.2 + 3.0 * rng.next_f64();
            let chk = multiplier_invariance_check(&f, &a, theta).unwrap();
            assert!(chk.rel_diff <= 1e-12, "rel diff {}", chk.rel_diff);
        }

        // Zero-log-mean multiplier: the factor is exactly 1 up to rounding.
        let a = StepFunction::new(half_half(), vec![2.0, 0.5]).unwrap();
        let f = StepFunction::constant(half_half(), 2.0);
        let chk = multiplier_invariance_check(&f, &a, 1.3).unwrap();
        assert!((chk.factor - 1.0).abs() < 1e-14);
        assert!((chk.lhs - chk.rhs).abs() < 1e-13);

        // Constant multiplier: projective factor c^{−θ}.
        let c = StepFunction::constant(half_half(), 3.0);
        let chk = multiplier_invariance_check(&f, &c, 2.0).unwrap();
        assert!((chk.factor - 3.0f64.powf(-2.0)).abs() < 1e-14);
    }

    #[test]
    fn refinement_merge_pinned_and_quadrature() {
        // θ = 1, masses (1/2, 1/2): at s = 1 both sides are 1 (Beta(1/2,1/2) = π).
        let pts = refinement_merge_check(&half_half(), 1.0, 0, 1, &[1.0, 2.0]).unwrap();
        assert!((pts[0].quadrature - 1.0).abs() < 1e-8);
        assert!((pts[0].closed_form - 1.0).abs() < 1e-14);
        // s = 2: closed form s^0/Γ(1) = 1; quadrature within 1e-8.
        assert!((pts[1].quadrature - 1.0).abs() < 1e-8);

        // θ = 2, masses (1/4, 3/4), grid {0.5, 1, 2}.
        let p = MeshPartition::new(vec![0.25, 0.75]).unwrap();
        for pt in refinement_merge_check(&p, 2.0, 0, 1, &[0.5, 1.0, 2.0]).unwrap() {
            assert!(pt.abs_diff < 1e-8, "s={} diff={}", pt.s, pt.abs_diff);
        }
        assert!(refinement_merge_check(&half_half(), 1.0, 0, 0, &[1.0]).is_err());
        assert!(refinement_merge_check(&half_half(), 1.0, 0, 1, &[-1.0]).is_err());
    }

    #[test]
    fn phi_homomorphism_and_scaling() {
        let mut rng = RngStream::new(406, 0);
        for _ in 0..300 {
            let p = MeshPartition::new(vec![0.2, 0.3, 0.5]).unwrap();
            let f = StepFunction::new(
                p.clone(),
                (0..3).map(|_| 0.1 + 4.0 * rng.next_f64()).collect(),
            )
            .unwrap();
            let g =
                StepFunction::new(p, (0..3).map(|_| 0.1 + 4.0 * rng.next_f64()).collect()).unwrap();
            let theta = 0.2 + 3.0 * rng.next_f64();
            let prod = phi_theta(&f.pointwise_mul(&g).unwrap(), theta).unwrap();
            let split = phi_theta(&f, theta).unwrap() * phi_theta(&g, theta).unwrap();
            assert!((prod - split).abs() <= 1e-12 * split);

            let c = 0.3 + 2.0 * rng.next_f64();
            let scaled = phi_theta(&f.scale(c), theta).unwrap();
            let expect = c.powf(-theta) * phi_theta(&f, theta).unwrap();
            assert!((scaled - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn equal_mass_cell_swap_leaves_phi_unchanged() {
        // Swapping the two equal-mass cells permutes commuting summands.
        let f = StepFunction::new(half_half(), vec![1.7, 0.4]).unwrap();
        let swapped = StepFunction::new(half_half(), vec![0.4, 1.7]).unwrap();
        for &theta in &[0.5, 1.0, 2.0] {
            assert_eq!(
                phi_theta(&f, theta).unwrap().to_bits(),
                phi_theta(&swapped, theta).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn estimator_stderr_shrinks_like_sqrt_n() {
        let f = StepFunction::constant(half_half(), 2.0);
        let mut errs = Vec::new();
        for (i, &n) in [1000usize, 10_000, 100_000].iter().enumerate() {
            let rng = RngStream::new(407, i as u64);
            let ens = crate::pd::build_weighted_ensemble(&rng, 1.0, n, 1.0, 400, 1e-8, 1).unwrap();
            errs.push(empirical_laplace(&ens, &f).unwrap().stderr.unwrap());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            let expect = 10.0f64.sqrt();
            assert!((ratio / expect - 1.0).abs() < 0.2, "ratio {ratio}");
        }
    }
}
