//! Text, CSV and JSON renderings of fits, comparisons and discrepancy tables.

use std::fmt::Write;

use nporder::{ComparisonReport, Discrepancy, ModelFit, SystemOutcome};
use serde::Serialize;

use crate::Format;

/// `< .001` below one in a thousand, otherwise three decimals without the
/// leading zero.
pub fn p_value(p: f64) -> String {
    if p < 0.001 {
        "< .001".into()
    } else {
        let s = format!("{p:.3}");
        s.strip_prefix('0').map_or(s.clone(), str::to_string)
    }
}

/// Fixed-point with `precision` decimals; a value that rounds to zero
/// prints without a sign.
pub fn fixed(x: f64, precision: usize) -> String {
    let s = format!("{x:.precision$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn signed(x: f64, precision: usize) -> String {
    let s = fixed(x, precision);
    if s.starts_with('-') || s.bytes().all(|b| b == b'0' || b == b'.') {
        s
    } else {
        format!("+{s}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Left-aligned first column, right-aligned rest.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                write!(out, "{cell:<w$}").unwrap();
            } else {
                write!(out, "  {cell:>w$}").unwrap();
            }
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialisable") + "\n"
}

#[derive(Serialize)]
struct FeatureRow<'a> {
    feature: &'a str,
    weight: f64,
    std_error: f64,
    p_value: f64,
    p: String,
}

#[derive(Serialize)]
struct FitDoc<'a> {
    system: &'a str,
    dv: &'a str,
    log_likelihood: f64,
    dof: usize,
    iterations: usize,
    converged: bool,
    features: Vec<FeatureRow<'a>>,
}

pub fn fit(mf: &ModelFit, format: Format, precision: usize) -> String {
    let f = &mf.fit;
    let rows: Vec<FeatureRow> = (0..f.names.len())
        .map(|i| FeatureRow {
            feature: &f.names[i],
            weight: f.weights[i],
            std_error: f.std_errors[i],
            p_value: f.p_values[i],
            p: p_value(f.p_values[i]),
        })
        .collect();
    match format {
        Format::Json => json(&FitDoc {
            system: &mf.system,
            dv: mf.dv.short_name(),
            log_likelihood: f.log_likelihood,
            dof: mf.dof,
            iterations: f.iterations,
            converged: f.converged,
            features: rows,
        }),
        Format::Csv => {
            let mut out = String::from("feature,weight,std_error,p_value,p\n");
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    csv_field(r.feature),
                    fixed(r.weight, precision),
                    fixed(r.std_error, precision),
                    fixed(r.p_value, precision),
                    r.p
                )
                .unwrap();
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "system: {}", mf.system).unwrap();
            writeln!(out, "dependent variable: {}", mf.dv.short_name()).unwrap();
            writeln!(out, "log-likelihood: {}", fixed(f.log_likelihood, precision)).unwrap();
            writeln!(out, "d.f.: {}", mf.dof).unwrap();
            writeln!(out).unwrap();
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.feature.to_string(),
                        fixed(r.weight, precision),
                        fixed(r.std_error, precision),
                        r.p.clone(),
                    ]
                })
                .collect();
            out + &table(&["Feature", "Weight", "Std. Error", "p"], &cells)
        }
    }
}

pub fn compare(report: &ComparisonReport, format: Format, precision: usize, aic_bic: bool) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut out = String::from("system,log_likelihood,dof");
            if aic_bic {
                out += ",aic,bic";
            }
            out += ",status\n";
            for s in &report.systems {
                match s {
                    SystemOutcome::Fitted(f) => {
                        write!(out, "{},{},{}", csv_field(&f.system), fixed(f.log_likelihood, precision), f.dof).unwrap();
                        if aic_bic {
                            write!(out, ",{},{}", fixed(f.aic, precision), fixed(f.bic, precision)).unwrap();
                        }
                        out += ",fitted\n";
                    }
                    SystemOutcome::Failed { system, dof, error } => {
                        write!(out, "{},,{dof}", csv_field(system)).unwrap();
                        if aic_bic {
                            out += ",,";
                        }
                        writeln!(out, ",{}", csv_field(&format!("failed: {error}"))).unwrap();
                    }
                }
            }
            out
        }
        Format::Text => {
            let mut header = vec!["Model", "Log likelihood", "d.f."];
            if aic_bic {
                header.extend(["AIC", "BIC"]);
            }
            let mut notes = String::new();
            let rows: Vec<Vec<String>> = report
                .systems
                .iter()
                .map(|s| match s {
                    SystemOutcome::Fitted(f) => {
                        let mut row = vec![
                            f.system.clone(),
                            fixed(f.log_likelihood, precision),
                            f.dof.to_string(),
                        ];
                        if aic_bic {
                            row.push(fixed(f.aic, precision));
                            row.push(fixed(f.bic, precision));
                        }
                        row
                    }
                    SystemOutcome::Failed { system, dof, error } => {
                        writeln!(notes, "{system}: {error}").unwrap();
                        let mut row = vec![system.clone(), "failed".into(), dof.to_string()];
                        if aic_bic {
                            row.extend(["-".into(), "-".into()]);
                        }
                        row
                    }
                })
                .collect();
            let mut out = format!("dependent variable: {}\n\n", report.dv.short_name());
            out += &table(&header, &rows);
            if !notes.is_empty() {
                out += "\n";
                out += &notes;
            }
            out
        }
    }
}

#[derive(Serialize)]
struct DiscrepancyDoc<'a> {
    system: &'a str,
    dv: &'a str,
    rows: &'a [Discrepancy],
}

/// Rows sorted by observed count, largest first; ties keep table order.
pub fn discrepancy(mf: &ModelFit, mut rows: Vec<Discrepancy>, format: Format, precision: usize) -> String {
    rows.sort_by(|a, b| b.observed.cmp(&a.observed));
    match format {
        Format::Json => json(&DiscrepancyDoc {
            system: &mf.system,
            dv: mf.dv.short_name(),
            rows: &rows,
        }),
        Format::Csv => {
            let mut out = String::from("order,observed,predicted,signed_chi2\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    r.order,
                    r.observed,
                    fixed(r.predicted, precision),
                    fixed(r.signed_chi2, precision)
                )
                .unwrap();
            }
            out
        }
        Format::Text => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.order.to_string(),
                        r.observed.to_string(),
                        fixed(r.predicted, precision),
                        signed(r.signed_chi2, precision),
                    ]
                })
                .collect();
            format!(
                "system: {}\ndependent variable: {}\n\n{}",
                mf.system,
                mf.dv.short_name(),
                table(&["Order", "Observed", "Predicted", "Signed chi2"], &cells)
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_convention() {
        assert_eq!(p_value(0.0009), "< .001");
        assert_eq!(p_value(0.005), ".005");
        assert_eq!(p_value(0.8034), ".803");
        assert_eq!(p_value(1.0), "1.000");
    }

    #[test]
    fn no_negative_zero() {
        assert_eq!(fixed(-0.00001, 4), "0.0000");
        assert_eq!(fixed(-0.5, 2), "-0.50");
        assert_eq!(signed(0.25, 2), "+0.25");
        assert_eq!(signed(-0.0, 2), "0.00");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
