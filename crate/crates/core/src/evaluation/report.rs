use std::fmt::Write as _;
use std::str::FromStr;

use super::{EvalError, EvalReport, BASELINE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(EvalError::Report(format!("unknown format '{other}' (expected csv, markdown or json)"))),
        }
    }
}

fn pct(report: &EvalReport, dataset: &str, aug: &str, normalized: bool, clf: &str) -> String {
    report
        .find(dataset, aug, normalized, clf)
        .map_or_else(|| "-".to_string(), |r| format!("{:.2}", r.metric * 100.0))
}

/// Renders the report. Markdown and CSV list one row per augmentation with
/// its normalized companion row beneath, one column per classifier, cells
/// in percent with two decimals.
pub fn emit_report(report: &EvalReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::Markdown => markdown(report).into_bytes(),
        ReportFormat::Csv => csv(report),
    }
}

fn markdown(report: &EvalReport) -> String {
    let classifiers = report.classifiers();
    let mut out = String::new();
    for (i, dataset) in report.datasets().into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "### {dataset}\n");
        let _ = write!(out, "| Augmentation |");
        for c in &classifiers {
            let _ = write!(out, " {c} {} (%) |", report.metric);
        }
        out.push_str("\n|---|");
        for _ in &classifiers {
            out.push_str("---:|");
        }
        out.push('\n');
        for aug in report.augmentations(dataset) {
            for normalized in [false, true] {
                if !classifiers.iter().any(|c| report.find(dataset, aug, normalized, c).is_some()) {
                    continue;
                }
                let _ = write!(out, "| {} |", if normalized { "normalized" } else { aug });
                for c in &classifiers {
                    let _ = write!(out, " {} |", pct(report, dataset, aug, normalized, c));
                }
                out.push('\n');
            }
        }
    }
    out
}

fn csv(report: &EvalReport) -> Vec<u8> {
    let classifiers = report.classifiers();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset".to_string(), "augmentation".to_string(), "normalized".to_string()];
    header.extend(classifiers.iter().map(|c| c.to_string()));
    w.write_record(&header).expect("in-memory write");
    for dataset in report.datasets() {
        for aug in report.augmentations(dataset) {
            for normalized in [false, true] {
                if !classifiers.iter().any(|c| report.find(dataset, aug, normalized, c).is_some()) {
                    continue;
                }
                let mut row = vec![dataset.to_string(), aug.to_string(), normalized.to_string()];
                row.extend(classifiers.iter().map(|c| pct(report, dataset, aug, normalized, c)));
                w.write_record(&row).expect("in-memory write");
            }
        }
    }
    w.into_inner().expect("in-memory flush")
}

/// One line per (dataset, classifier, attack) with the baseline,
/// augmented and normalized scores side by side.
pub fn summary_lines(report: &EvalReport) -> Vec<String> {
    let mut lines = Vec::new();
    for dataset in report.datasets() {
        for clf in report.classifiers() {
            let base = pct(report, dataset, BASELINE, false, clf);
            if base == "-" {
                continue;
            }
            lines.push(format!(
                "{dataset} [{clf}] baseline {base} | normalized {}",
                pct(report, dataset, BASELINE, true, clf)
            ));
            for aug in report.augmentations(dataset).into_iter().filter(|a| *a != BASELINE) {
                lines.push(format!(
                    "{dataset} [{clf}] {aug}: baseline {base} | augmented {} | normalized {}",
                    pct(report, dataset, aug, false, clf),
                    pct(report, dataset, aug, true, clf)
                ));
            }
        }
    }
    lines
}
