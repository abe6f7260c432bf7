//! Rendering of evaluation reports.

use std::fmt::Write;

use crate::metrics::EvalReport;

/// Pretty JSON with full curves and counts, newline-terminated.
pub fn report_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn cell(ap: Option<f64>) -> String {
    ap.map_or_else(|| "n/a".to_string(), |v| format!("{:.1}", 100.0 * v))
}

/// Markdown table with one row per method and one column per class and band,
/// followed by per-band mAP. Values are percentages; `n/a` marks cells without
/// ground truth. Column layout is taken from the first report.
pub fn markdown_table(rows: &[(&str, &EvalReport)]) -> String {
    let Some((_, first)) = rows.first() else {
        return String::new();
    };
    let cfg = &first.config;
    let mut header = vec!["Method".to_string()];
    for band in &cfg.bands {
        for class in &cfg.classes {
            header.push(format!("{} {}", class, band.label()));
        }
    }
    for band in &cfg.bands {
        header.push(format!("mAP {}", band.label()));
    }

    let mut out = String::new();
    writeln!(out, "| {} |", header.join(" | ")).unwrap();
    writeln!(out, "|{}", ["---|"].repeat(header.len()).concat()).unwrap();
    for (name, report) in rows {
        let mut cells = vec![name.to_string()];
        for band in &cfg.bands {
            for class in &cfg.classes {
                cells.push(cell(report.result(*class, *band).and_then(|r| r.ap)));
            }
        }
        for band in &cfg.bands {
            cells.push(cell(report.map(*band)));
        }
        writeln!(out, "| {} |", cells.join(" | ")).unwrap();
    }
    out
}

/// Single-method Markdown report with a short settings line.
pub fn report_markdown(name: &str, report: &EvalReport) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    writeln!(out, "# Evaluation\n").unwrap();
    writeln!(
        out,
        "Scheme `{}`, AP mode `{}`, ground truth `{}`, max range {} m.\n",
        cfg.scheme.label(),
        serde_json::to_value(cfg.ap_mode).unwrap().as_str().unwrap_or_default(),
        serde_json::to_value(cfg.gt_mode).unwrap().as_str().unwrap_or_default(),
        cfg.max_range
    )
    .unwrap();
    out.push_str(&markdown_table(&[(name, report)]));
    out
}
