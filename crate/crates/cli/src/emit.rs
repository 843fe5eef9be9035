//! Report serialization: CSV (RFC 4180, constant column count) and JSON
//! (fixed key order, byte-stable for a fixed config).

use lebesgue_core::report::CheckRow;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiments::RunOutcome;

#[derive(Serialize)]
pub struct ExperimentReport<'a> {
    pub experiment: &'a str,
    pub config: &'a ExperimentConfig,
    pub rows: &'a [CheckRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<&'a [lebesgue_core::verify::CriterionReport]>,
    pub pass: bool,
    pub version: &'a str,
}

pub fn report_json(cfg: &ExperimentConfig, outcome: &RunOutcome, pass: bool) -> String {
    let report = ExperimentReport {
        experiment: cfg.experiment.name(),
        config: cfg,
        rows: &outcome.rows,
        criteria: outcome.criteria.as_deref(),
        pass,
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn report_csv(cfg: &ExperimentConfig, outcome: &RunOutcome, pass: bool) -> String {
    let mut out = String::from("experiment,name,estimate,stderr,oracle,tolerance,pass\n");
    for row in &outcome.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_quote(cfg.experiment.name()),
            csv_quote(&row.name),
            row.estimate,
            csv_opt(row.stderr),
            csv_opt(row.oracle),
            row.tolerance,
            row.pass,
        ));
    }
    out.push_str(&format!(
        "{},all checks,{},,,,{}\n",
        csv_quote(cfg.experiment.name()),
        outcome.rows.len(),
        pass
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_quote("plain"), "plain");
        assert_eq!(csv_quote("a,b"), "\"a,b\"");
        assert_eq!(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
