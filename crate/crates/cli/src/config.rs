//! Experiment configuration: JSON file plus flag overrides; flags win.
//! Unknown keys and out-of-range values are usage errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    MaxwellPoincare,
    OrbitLaplace,
    MellinBarnes,
    WeakDensity,
    Thinning,
    PdCross,
    Cycles,
    Primes,
    Invariance,
    ZagierProbe,
    WindowProbe,
    VerifyAll,
}

impl Experiment {
    pub fn parse(s: &str) -> Option<Experiment> {
        Some(match s {
            "maxwell-poincare" => Experiment::MaxwellPoincare,
            "orbit-laplace" => Experiment::OrbitLaplace,
            "mellin-barnes" => Experiment::MellinBarnes,
            "weak-density" => Experiment::WeakDensity,
            "thinning" => Experiment::Thinning,
            "pd-cross" => Experiment::PdCross,
            "cycles" => Experiment::Cycles,
            "primes" => Experiment::Primes,
            "invariance" => Experiment::Invariance,
            "zagier-probe" => Experiment::ZagierProbe,
            "window-probe" => Experiment::WindowProbe,
            "verify-all" => Experiment::VerifyAll,
            _ => None?,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::MaxwellPoincare => "maxwell-poincare",
            Experiment::OrbitLaplace => "orbit-laplace",
            Experiment::MellinBarnes => "mellin-barnes",
            Experiment::WeakDensity => "weak-density",
            Experiment::Thinning => "thinning",
            Experiment::PdCross => "pd-cross",
            Experiment::Cycles => "cycles",
            Experiment::Primes => "primes",
            Experiment::Invariance => "invariance",
            Experiment::ZagierProbe => "zagier-probe",
            Experiment::WindowProbe => "window-probe",
            Experiment::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// JSON config file shape. Every field is optional; flags override.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<String>,
    pub theta: Option<f64>,
    pub n: Option<u64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub window: Option<f64>,
    pub format: Option<String>,
    pub output: Option<String>,
    pub threads: Option<usize>,
    pub quick: Option<bool>,
    pub dump: Option<bool>,
    pub tolerances: Option<BTreeMap<String, f64>>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub theta: f64,
    /// Dimension-like knob; per-experiment meaning (sphere dimension, orbit
    /// dimension, permutation size, N_max, class count).
    pub n: Option<u64>,
    pub samples: usize,
    pub seed: u64,
    pub window: f64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub threads: usize,
    pub quick: bool,
    pub dump: bool,
    /// Effective tolerance table (defaults overlaid with overrides); echoed
    /// into every report.
    pub tolerances: BTreeMap<String, f64>,
}

/// Named default tolerances that experiments gate against. Overridable per
/// run; the pinned acceptance suite (verify-all) ignores overrides.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    use lebesgue_core::tolerances as t;
    BTreeMap::from([
        ("exact_identity_rel".to_string(), t::EXACT_IDENTITY_REL),
        ("quadrature_match_abs".to_string(), t::QUADRATURE_MATCH_ABS),
        ("mp_ks_bound".to_string(), t::MP_KS_BOUND),
        ("thinning_joint_sup".to_string(), t::THINNING_JOINT_SUP),
        ("prime_sup".to_string(), t::PRIME_SUP),
        ("prime_half_abs".to_string(), t::PRIME_HALF_ABS),
        (
            "estimator_f2_stderr_max".to_string(),
            t::ESTIMATOR_F2_STDERR_MAX,
        ),
        ("fn_cross_abs".to_string(), t::FN_CROSS_ABS),
        ("dickman_abs".to_string(), t::DICKMAN_ABS),
        ("dickman_cross_abs".to_string(), t::DICKMAN_CROSS_ABS),
        ("ode_order_band".to_string(), t::ODE_ORDER_BAND),
    ])
}

pub struct UsageError(pub String);

impl ExperimentConfig {
    /// Merge file config and flag values (flags win), apply defaults,
    /// validate ranges.
    pub fn resolve(file: FileConfig, flags: FileConfig) -> Result<ExperimentConfig, UsageError> {
        let pick = |a: Option<String>, b: Option<String>| b.or(a);
        let experiment_name = pick(file.experiment, flags.experiment)
            .ok_or_else(|| UsageError("--experiment is required".into()))?;
        let experiment = Experiment::parse(&experiment_name)
            .ok_or_else(|| UsageError(format!("unknown experiment '{experiment_name}'")))?;
        let theta = flags.theta.or(file.theta).unwrap_or(1.0);
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(UsageError(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        let n = flags.n.or(file.n);
        let samples = flags.samples.or(file.samples).unwrap_or(100_000);
        if samples == 0 || samples > 100_000_000 {
            return Err(UsageError(format!(
                "samples must lie in [1, 1e8], got {samples}"
            )));
        }
        let seed = flags
            .seed
            .or(file.seed)
            .unwrap_or(lebesgue_core::verify::DEFAULT_SEED);
        let window = flags.window.or(file.window).unwrap_or(2.0);
        if !(window > 0.0) || !window.is_finite() {
            return Err(UsageError(format!(
                "window must be positive and finite, got {window}"
            )));
        }
        let format = match flags.format.or(file.format).as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => {
                return Err(UsageError(format!(
                    "format must be csv or json, got '{other}'"
                )))
            }
        };
        let env_threads = std::env::var("LEBESGUE_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok());
        let threads = flags
            .threads
            .or(file.threads)
            .or(env_threads)
            .unwrap_or(1)
            .max(1);
        if threads > 1024 {
            return Err(UsageError(format!(
                "threads must be at most 1024, got {threads}"
            )));
        }
        let mut tolerances = default_tolerances();
        if let Some(over) = file.tolerances {
            for (k, v) in over {
                if !tolerances.contains_key(&k) {
                    return Err(UsageError(format!("unknown tolerance key '{k}'")));
                }
                if !(v > 0.0) || !v.is_finite() {
                    return Err(UsageError(format!(
                        "tolerance '{k}' must be positive, got {v}"
                    )));
                }
                tolerances.insert(k, v);
            }
        }
        Ok(ExperimentConfig {
            experiment,
            theta,
            n,
            samples: samples as usize,
            seed,
            window,
            format,
            output: pick(file.output, flags.output),
            threads,
            quick: flags.quick.or(file.quick).unwrap_or(false),
            dump: flags.dump.or(file.dump).unwrap_or(false),
            tolerances,
        })
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        *self
            .tolerances
            .get(key)
            .unwrap_or_else(|| panic!("tolerance key '{key}' missing"))
    }
}
