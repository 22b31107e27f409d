use std::fmt::Write;

use super::experiment::{CellTiming, EvalReport, ReportRow};

/// "60/40" for a train fraction of 0.6.
pub fn split_label(train_fraction: f64) -> String {
    let train = (train_fraction * 100.0).round();
    format!("{train}/{}", 100.0 - train)
}

fn target_name(report: &EvalReport) -> &'static str {
    report.target.map_or("label", |t| t.name())
}

fn metric_table(out: &mut String, title: &str, rows: &[&ReportRow]) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "{:<16} {:>7} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "Learner", "Split", "Accuracy", "Precision", "Recall", "F1", "AUROC", "RMSE"
    );
    for r in rows {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{:<16} {:>7} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            r.learner.display_name(),
            split_label(r.train_fraction),
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            m.auroc,
            m.rmse
        );
    }
}

/// Aligned plain-text tables: accuracy by split, metrics at each learner's
/// best split, and metrics at the largest training split.
pub fn format_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let learners = report.learners();
    let _ = writeln!(out, "Accuracy (%) for {} prediction by train/test split", target_name(report));
    let _ = write!(out, "{:<16}", "Learner");
    for &f in &report.train_fractions {
        let _ = write!(out, " {:>8}", split_label(f));
    }
    out.push('\n');
    for &l in &learners {
        let _ = write!(out, "{:<16}", l.display_name());
        for &f in &report.train_fractions {
            match report.row(l, f) {
                Some(r) => {
                    let _ = write!(out, " {:>8.2}", r.metrics.accuracy * 100.0);
                }
                None => {
                    let _ = write!(out, " {:>8}", "-");
                }
            }
        }
        out.push('\n');
    }
    out.push('\n');

    let best: Vec<&ReportRow> = learners.iter().filter_map(|&l| report.best_row(l)).collect();
    metric_table(&mut out, &format!("Metrics at each learner's best split ({})", target_name(report)), &best);

    if let Some(&largest) = report.train_fractions.iter().max_by(|a, b| a.total_cmp(b)) {
        out.push('\n');
        let at: Vec<&ReportRow> = learners.iter().filter_map(|&l| report.row(l, largest)).collect();
        metric_table(
            &mut out,
            &format!("Metrics at the {} split ({})", split_label(largest), target_name(report)),
            &at,
        );
    }

    let warned: Vec<&ReportRow> = report.rows.iter().filter(|r| !r.warnings.is_empty()).collect();
    if !warned.is_empty() {
        out.push('\n');
        for r in warned {
            for w in &r.warnings {
                let _ = writeln!(out, "warning: {} {}: {w}", r.learner.display_name(), split_label(r.train_fraction));
            }
        }
    }
    out
}

/// One line per (learner, split, metric).
pub fn format_csv(report: &EvalReport) -> String {
    let mut out = String::from("learner,train_fraction,metric,value\n");
    for r in &report.rows {
        for (name, value) in crate::evaluate::MetricSet::NAMES.iter().zip(r.metrics.values()) {
            let _ = writeln!(out, "{},{},{name},{value}", r.learner, r.train_fraction);
        }
    }
    out
}

pub fn format_timings(timings: &[CellTiming]) -> String {
    let mut out = String::from("learner,train_fraction,wall_ms\n");
    for t in timings {
        let _ = writeln!(out, "{},{},{:.3}", t.learner, t.train_fraction, t.wall_ms);
    }
    out
}
