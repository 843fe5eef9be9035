//! Command-line harness for the measure laboratory.
//!
//! ```text
//! lebesgue-lab --experiment <name> [--theta X] [--n N] [--samples N]
//!              [--seed N] [--window X] [--format csv|json] [--output PATH]
//!              [--threads N] [--quick] [--dump] [--config FILE]
//! ```
//!
//! Experiments: maxwell-poincare, orbit-laplace, mellin-barnes, weak-density,
//! thinning, pd-cross, cycles, primes, invariance, zagier-probe,
//! window-probe, verify-all.
//!
//! Exit codes: 0 all gating checks pass, 1 some check failed (the report is
//! still written), 2 usage error. `LEBESGUE_THREADS` is the fallback for
//! `--threads`. Reports are byte-identical for identical configurations.

// Parameter checks use `!(x > 0.0)` so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod emit;
mod experiments;

use std::io::Write;
use std::time::Instant;

use config::{ExperimentConfig, FileConfig, Format, UsageError};

const USAGE: &str = "\
usage: lebesgue-lab --experiment <name> [options]

experiments:
  maxwell-poincare  sphere projections vs the Gaussian (theta = radius scale c)
  orbit-laplace     orbit Laplace transform vs the radial profile F_n
  mellin-barnes     F_n reference values, MC/quadrature cross-check, ODE probe
  weak-density      density <-> Laplace quadrature identity, refinement merge
  thinning          subordinator thinning: class laws, correlation, window law
  pd-cross          sorted stick breaking vs normalized jumps (largest part)
  cycles            Ewens cycle profiles vs the stick-breaking oracle
  primes            prime-divisor profiles vs the Dickman law
  invariance        weight cancellation, estimator, multiplier and sign routes
  zagier-probe      F_n(lambda)^(1/n) tabulation (exploratory)
  window-probe      flat-measure window volumes (exploratory)
  verify-all        the pinned acceptance suite (one row per criterion)

options:
  --theta X         parameter theta (default 1.0; radius scale for
                    maxwell-poincare, lambda for probes)
  --n N             experiment size knob (dimension, N_max, classes, ...)
  --samples N       Monte Carlo sample count (default 100000)
  --seed N          64-bit seed (default fixed suite seed)
  --window X        window bound M on total mass (default 2.0)
  --format F        csv or json (default csv)
  --output PATH     write the report there instead of stdout
  --threads N       worker cap (default LEBESGUE_THREADS or 1)
  --quick           reduced-N smoke variant with widened sup bounds
  --dump            also write raw samples next to the report
  --config FILE     JSON config; explicit flags win over file values
";

fn fail_usage(msg: &str) -> ! {
    eprintln!("error: {msg}\n\n{USAGE}");
    std::process::exit(2);
}

fn parse_flags() -> (FileConfig, Option<String>) {
    let mut flags = FileConfig::default();
    let mut config_path = None;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        let (key, inline) = match arg.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (arg.clone(), None),
        };
        let mut value = |name: &str| -> String {
            inline
                .clone()
                .or_else(|| args.next())
                .unwrap_or_else(|| fail_usage(&format!("{name} needs a value")))
        };
        match key.as_str() {
            "--experiment" => flags.experiment = Some(value("--experiment")),
            "--theta" => {
                flags.theta = Some(
                    value("--theta")
                        .parse()
                        .unwrap_or_else(|_| fail_usage("bad --theta")),
                )
            }
            "--n" => {
                flags.n = Some(
                    value("--n")
                        .parse()
                        .unwrap_or_else(|_| fail_usage("bad --n")),
                )
            }
            "--samples" => {
                flags.samples = Some(
                    value("--samples")
                        .parse()
                        .unwrap_or_else(|_| fail_usage("bad --samples")),
                )
            }
            "--seed" => {
                flags.seed = Some(
                    value("--seed")
                        .parse()
                        .unwrap_or_else(|_| fail_usage("bad --seed")),
                )
            }
            "--window" => {
                flags.window = Some(
                    value("--window")
                        .parse()
                        .unwrap_or_else(|_| fail_usage("bad --window")),
                )
            }
            "--format" => flags.format = Some(value("--format")),
            "--output" => flags.output = Some(value("--output")),
            "--threads" => {
                flags.threads = Some(
                    value("--threads")
                        .parse()
                        .unwrap_or_else(|_| fail_usage("bad --threads")),
                )
            }
            "--quick" => flags.quick = Some(true),
            "--dump" => flags.dump = Some(true),
            "--config" => config_path = Some(value("--config")),
            "--help" | "-h" => {
                print!("{USAGE}");
                std::process::exit(0);
            }
            other => fail_usage(&format!("unknown flag '{other}'")),
        }
    }
    (flags, config_path)
}

fn main() {
    let (flags, config_path) = parse_flags();
    let file_cfg = match &config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .unwrap_or_else(|e| fail_usage(&format!("cannot read config {path}: {e}")));
            serde_json::from_str::<FileConfig>(&text)
                .unwrap_or_else(|e| fail_usage(&format!("bad config {path}: {e}")))
        }
        None => FileConfig::default(),
    };
    let cfg = match ExperimentConfig::resolve(file_cfg, flags) {
        Ok(cfg) => cfg,
        Err(UsageError(msg)) => fail_usage(&msg),
    };

    let started = Instant::now();
    let outcome = match experiments::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    };
    let pass = outcome.rows.iter().all(|r| r.pass);
    let body = match cfg.format {
        Format::Json => emit::report_json(&cfg, &outcome, pass),
        Format::Csv => emit::report_csv(&cfg, &outcome, pass),
    };

    if let Err(e) = write_outputs(&cfg, &outcome, &body) {
        eprintln!("error writing report: {e}");
        std::process::exit(1);
    }

    // Timing goes to stderr only; report bytes stay config-deterministic.
    eprintln!(
        "{}: {} checks, {} in {:.2}s",
        cfg.experiment.name(),
        outcome.rows.len(),
        if pass { "all passed" } else { "FAILURES" },
        started.elapsed().as_secs_f64()
    );
    std::process::exit(if pass { 0 } else { 1 });
}

fn write_outputs(
    cfg: &ExperimentConfig,
    outcome: &experiments::RunOutcome,
    body: &str,
) -> std::io::Result<()> {
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, body)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{path}: {e}")))?;
            if let Some(dump) = &outcome.dump {
                let dump_path = format!("{path}.{}", dump.suffix);
                std::fs::write(&dump_path, &dump.csv)
                    .map_err(|e| std::io::Error::new(e.kind(), format!("{dump_path}: {e}")))?;
                if let Some(manifest) = &dump.manifest {
                    let mpath = format!("{path}.manifest.json");
                    std::fs::write(&mpath, manifest)
                        .map_err(|e| std::io::Error::new(e.kind(), format!("{mpath}: {e}")))?;
                }
            }
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            if outcome.dump.is_some() {
                eprintln!("note: --dump needs --output so the samples have somewhere to go");
            }
        }
    }
    Ok(())
}
