//! Report files: rows, tables, histogram and summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::ExperimentReport;
use crate::eval::ComparisonRow;
use crate::error::Result;
use crate::transform::TransformationId;

pub const HIST_BIN_WIDTH: f64 = 0.5;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{:.4}", x))
}

fn seeds(values: &[f64]) -> String {
    if values.is_empty() {
        return "NA".to_string();
    }
    values
        .iter()
        .map(|v| format!("{:.4}", v))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn rows_tsv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "language\ttransformation\texcluded\tuas_ud\tuas_transformed\tdiff\tuas_ud_seeds\tuas_transformed_seeds\tarcs_rewritten\trepairs_applied\terror\n",
    );
    for cell in &report.cells {
        let r = &cell.row;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.language,
            r.transformation,
            r.excluded,
            opt(r.uas_ud),
            opt(r.uas_transformed),
            opt(r.diff),
            seeds(&cell.ud_seed_uas),
            seeds(&cell.transformed_seed_uas),
            cell.arcs_rewritten,
            cell.repairs_applied,
            cell.error.as_deref().unwrap_or("").replace(['\t', '\n'], " ")
        );
    }
    out
}

fn compared_rows(report: &ExperimentReport) -> Vec<(&ComparisonRow, f64)> {
    report
        .cells
        .iter()
        .filter(|c| c.error.is_none() && !c.row.excluded)
        .filter_map(|c| c.row.diff.map(|d| (&c.row, d)))
        .collect()
}

/// How often each transformation loses to the UD scheme.
pub fn ud_wins_tsv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "transformation\tconfigurations\tud_better\ttransformed_better\tties\texcluded\tud_better_percent\n",
    );
    let rows = compared_rows(report);
    for t in TransformationId::ALL {
        let present = report.cells.iter().any(|c| c.row.transformation == t);
        if !present {
            continue;
        }
        let diffs: Vec<f64> = rows
            .iter()
            .filter(|(r, _)| r.transformation == t)
            .map(|&(_, d)| d)
            .collect();
        let ud = diffs.iter().filter(|&&d| d > 0.0).count();
        let tr = diffs.iter().filter(|&&d| d < 0.0).count();
        let excluded = report
            .cells
            .iter()
            .filter(|c| c.row.transformation == t && c.row.excluded)
            .count();
        let pct = (ud + tr > 0).then(|| 100.0 * ud as f64 / (ud + tr) as f64);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t,
            diffs.len(),
            ud,
            tr,
            diffs.len() - ud - tr,
            excluded,
            opt(pct)
        );
    }
    out
}

/// The `k` largest positive and negative differences.
pub fn top_differences_tsv(report: &ExperimentReport, k: usize) -> String {
    let mut out =
        String::from("side\trank\tlanguage\ttransformation\tuas_ud\tuas_transformed\tdiff\n");
    let rows = compared_rows(report);
    let mut positive: Vec<_> = rows.iter().filter(|(_, d)| *d > 0.0).collect();
    let mut negative: Vec<_> = rows.iter().filter(|(_, d)| *d < 0.0).collect();
    positive.sort_by(|a, b| b.1.total_cmp(&a.1));
    negative.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (side, list) in [("positive", positive), ("negative", negative)] {
        for (rank, (r, d)) in list.into_iter().take(k).enumerate() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.4}",
                side,
                rank + 1,
                r.language,
                r.transformation,
                opt(r.uas_ud),
                opt(r.uas_transformed),
                d
            );
        }
    }
    out
}

pub fn coherence_tsv(report: &ExperimentReport) -> String {
    let mut out = String::from("metric\tcoherent\tevaluated\tuas_ties\tcoherent_percent\n");
    for row in &report.coherence {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            row.metric,
            row.coherent,
            row.evaluated,
            row.ties,
            opt(row.fraction.map(|f| 100.0 * f))
        );
    }
    out.push_str(
        "# all metrics are lower-is-better: a metric is counted coherent when the scheme it ranks as preferable (lower value) is the scheme with the higher UAS\n",
    );
    out.push_str("# derivation perplexity is self-perplexity: the language model is trained and evaluated on the same corpus\n");
    out
}

pub fn metrics_tsv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "language\ttransformation\tside\tdistance\tpredictability_bits\tderivation_perplexity\tderivation_complexity\tlm_unit\tcomplexity_mode\n",
    );
    for cell in report.cells.iter().filter(|c| c.error.is_none()) {
        let sides = [("ud", &cell.ud_metrics), ("transformed", &cell.transformed_metrics)];
        for (side, metrics) in sides {
            let Some(m) = metrics else { continue };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}\t{}",
                cell.row.language,
                cell.row.transformation,
                side,
                m.distance.map_or("NA".to_string(), |d| format!("{:.6}", d)),
                m.predictability_bits,
                m.derivation_perplexity,
                m.derivation_complexity,
                serde_json::to_value(m.lm_unit).expect("serialisable").as_str().unwrap_or(""),
                serde_json::to_value(m.complexity_mode)
                    .expect("serialisable")
                    .as_str()
                    .unwrap_or("")
            );
        }
    }
    out
}

/// `(bin start, count)` for consecutive bins of width 0.5 covering every
/// difference; bins are half-open `[start, start + 0.5)`.
pub fn histogram(diffs: &[f64]) -> Vec<(f64, usize)> {
    if diffs.is_empty() {
        return Vec::new();
    }
    let index = |d: f64| (d / HIST_BIN_WIDTH).floor() as i64;
    let lo = diffs.iter().map(|&d| index(d)).min().expect("non-empty");
    let hi = diffs.iter().map(|&d| index(d)).max().expect("non-empty");
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for &d in diffs {
        counts[(index(d) - lo) as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| ((lo + i as i64) as f64 * HIST_BIN_WIDTH, c))
        .collect()
}

pub fn histogram_tsv(bins: &[(f64, usize)]) -> String {
    let mut out = String::from("bin_start\tbin_end\tcount\n");
    for &(start, count) in bins {
        let _ = writeln!(out, "{:.1}\t{:.1}\t{}", start, start + HIST_BIN_WIDTH, count);
    }
    out
}

pub fn histogram_svg(bins: &[(f64, usize)]) -> String {
    let (width, height, margin) = (640.0, 320.0, 40.0);
    let plot_w = width - 2.0 * margin;
    let plot_h = height - 2.0 * margin;
    let max = bins.iter().map(|&(_, c)| c).max().unwrap_or(0).max(1) as f64;
    let bar_w = if bins.is_empty() { 0.0 } else { plot_w / bins.len() as f64 };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = width,
        h = height
    );
    let _ = writeln!(svg, r#"<rect width="{}" height="{}" fill="white"/>"#, width, height);
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{y}" x2="{x}" y2="{y}" stroke="black"/>"#,
        m = margin,
        x = width - margin,
        y = height - margin
    );
    for (i, &(start, count)) in bins.iter().enumerate() {
        let x = margin + i as f64 * bar_w;
        let h = plot_h * count as f64 / max;
        let fill = if start >= 0.0 { "#4c72b0" } else { "#dd8452" };
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white"><title>[{:.1}, {:.1}): {}</title></rect>"#,
            x,
            height - margin - h,
            bar_w,
            h,
            fill,
            start,
            start + HIST_BIN_WIDTH,
            count
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="9" text-anchor="middle">{:.1}</text>"#,
            x + bar_w / 2.0,
            height - margin + 12.0,
            start
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">UAS(UD) - UAS(transformed), bin width {}</text>"#,
        width / 2.0,
        height - 8.0,
        HIST_BIN_WIDTH
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{:.1}" font-size="12" transform="rotate(-90 12 {:.1})" text-anchor="middle">configurations</text>"#,
        height / 2.0,
        height / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Write every report file under `dir`; returns the paths written.
pub fn emit_reports(report: &ExperimentReport, dir: &Path, top_k: usize) -> Result<Vec<PathBuf>> {
    let tables = dir.join("tables");
    fs::create_dir_all(&tables)?;
    let diffs: Vec<f64> = compared_rows(report).into_iter().map(|(_, d)| d).collect();
    let bins = histogram(&diffs);

    let files = [
        (dir.join("rows.tsv"), rows_tsv(report)),
        (tables.join("ud_wins.tsv"), ud_wins_tsv(report)),
        (tables.join("top_differences.tsv"), top_differences_tsv(report, top_k)),
        (tables.join("coherence.tsv"), coherence_tsv(report)),
        (tables.join("metrics.tsv"), metrics_tsv(report)),
        (dir.join("hist.tsv"), histogram_tsv(&bins)),
        (dir.join("hist.svg"), histogram_svg(&bins)),
        (
            dir.join("summary.json"),
            serde_json::to_string_pretty(&serde_json::json!({
                "summary": report.summary,
                "coherence": report.coherence,
                "notes": [
                    "diff = UAS(UD) - UAS(transformed); positive means the UD scheme parsed better",
                    "coherence treats every metric as lower-is-better",
                    "derivation perplexity is self-perplexity"
                ]
            }))? + "\n",
        ),
    ];
    let mut written = Vec::new();
    for (path, content) in files {
        fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}
