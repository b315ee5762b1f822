//! Report rendering. CSV output starts with the schema version line, then
//! a header row. Design and table floats are printed to 4 decimals; JSON
//! carries full precision. Item indices are one-based everywhere.
//!
//! CSV schemas (v1):
//! - design: `n,d,delta,property,model,m,zero_prob,one_prob,row_weight,ln_n_coefficient`
//!   (`zero_prob`/`one_prob` empty for rrsd, `row_weight` empty for rid)
//! - table: `d,disjunct,separable,semi_disjunct`
//! - verify: `property,holds,witness_kind,witness,non_disjunct_count,non_disjunct_items`
//!   (item lists space separated)
//! - simulate: see `SimulationReport::csv_header`

use pooltest_core::design::CoefficientRow;
use pooltest_core::simulate::CSV_VERSION_LINE;
use pooltest_core::verify::Witness;
use pooltest_core::{DesignSpec, Model, PropertyReport, SimulationReport};
use serde_json::json;

use crate::Format;

fn csv(header: &str, rows: &[String]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\n{header}\n");
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

fn json_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

pub fn design(spec: &DesignSpec, coefficient: f64, format: Format) -> String {
    let (model, zero, weight) = match spec.model {
        Model::Rid { zero_prob } => ("rid", Some(zero_prob), None),
        Model::RrSd { row_weight } => ("rrsd", None, Some(row_weight)),
    };
    match format {
        Format::Text => {
            let mut out = format!(
                "property={}\nmodel={model}\nn={}\nd={}\ndelta={}\nm={}\n",
                spec.property, spec.n, spec.d, spec.delta, spec.m
            );
            if let Some(p) = zero {
                out.push_str(&format!("p={p:.4} (probability of a zero cell)\n"));
                out.push_str(&format!(
                    "one_prob={:.4} (probability of a one cell)\n",
                    1.0 - p
                ));
            }
            if let Some(r) = weight {
                out.push_str(&format!("r={r} (items per test)\n"));
            }
            out.push_str(&format!("ln_n_coefficient={coefficient:.4}\n"));
            out
        }
        Format::Csv => {
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
            let row = format!(
                "{},{},{},{},{model},{},{},{},{},{coefficient:.4}",
                spec.n,
                spec.d,
                spec.delta,
                spec.property,
                spec.m,
                opt(zero),
                opt(zero.map(|p| 1.0 - p)),
                weight.map_or(String::new(), |r| r.to_string()),
            );
            csv(
                "n,d,delta,property,model,m,zero_prob,one_prob,row_weight,ln_n_coefficient",
                &[row],
            )
        }
        Format::Json => json_text(&json!({
            "n": spec.n,
            "d": spec.d,
            "delta": spec.delta,
            "property": spec.property,
            "model": model,
            "m": spec.m,
            "zero_prob": zero,
            "one_prob": zero.map(|p| 1.0 - p),
            "row_weight": weight,
            "ln_n_coefficient": coefficient,
        })),
    }
}

pub fn table(rows: &[CoefficientRow], format: Format) -> String {
    match format {
        Format::Json => json_text(&json!(rows)),
        Format::Csv | Format::Text => {
            let lines: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "{},{:.4},{:.4},{:.4}",
                        r.d, r.disjunct, r.separable, r.semi_disjunct
                    )
                })
                .collect();
            csv("d,disjunct,separable,semi_disjunct", &lines)
        }
    }
}

fn witness_parts(witness: &Option<Witness>) -> (&'static str, String) {
    match witness {
        None => ("none", String::new()),
        Some(Witness::NonDisjunctItem(i)) => ("non-disjunct-item", (i + 1).to_string()),
        Some(Witness::ConfusableSet(s)) => ("confusable-set", s.to_one_based_string()),
        Some(Witness::OversizedResidual(s)) => ("oversized-residual", s.to_one_based_string()),
    }
}

pub fn property_report(report: &PropertyReport, format: Format) -> String {
    let (kind, witness) = witness_parts(&report.witness);
    let residual = report.non_disjunct_items.to_one_based_string();
    let count = report.non_disjunct_items.len();
    match format {
        Format::Text => format!(
            "property={}\nholds={}\nwitness={kind}{}{witness}\nnon_disjunct_count={count}\nnon_disjunct_items={residual}\n",
            report.property,
            report.holds,
            if witness.is_empty() { "" } else { " " },
        ),
        Format::Csv => csv(
            "property,holds,witness_kind,witness,non_disjunct_count,non_disjunct_items",
            &[format!("{},{},{kind},{witness},{count},{residual}", report.property, report.holds)],
        ),
        Format::Json => {
            let one_based = |s: &str| -> Vec<usize> {
                s.split_whitespace().map(|t| t.parse().expect("index")).collect()
            };
            json_text(&json!({
                "property": report.property,
                "holds": report.holds,
                "witness": { "kind": kind, "items": one_based(&witness) },
                "non_disjunct_items": one_based(&residual),
            }))
        }
    }
}

pub fn simulation(reports: &[SimulationReport], timings: bool, format: Format) -> String {
    match format {
        Format::Json => json_text(&json!(reports)),
        Format::Csv | Format::Text => SimulationReport::to_csv(reports, timings),
    }
}
