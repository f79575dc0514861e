//! Minimal SVG rendering for HLM heatmaps and learning curves.

use std::fmt::Write;

use crate::experiment::TrainingLog;
use crate::hlm::HlmReport;

const CELL_W: f64 = 64.0;
const CELL_H: f64 = 26.0;
const LABEL_W: f64 = 150.0;
const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Diverging colour for a value in [-1, 1]: red negative, blue positive.
pub fn diverging_colour(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        lerp((247.0, 247.0, 247.0), (33.0, 102.0, 172.0), t)
    } else {
        lerp((247.0, 247.0, 247.0), (178.0, 24.0, 43.0), -t)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn lerp(a: (f64, f64, f64), b: (f64, f64, f64), t: f64) -> (f64, f64, f64) {
    (
        (a.0 + (b.0 - a.0) * t).round(),
        (a.1 + (b.1 - a.1) * t).round(),
        (a.2 + (b.2 - a.2) * t).round(),
    )
}

/// Cell-value heatmap (rows: model/criterion, columns: task) followed by
/// bar charts of the model, task and criterion indices.
pub fn heatmap_svg(report: &HlmReport) -> String {
    let tasks = report.task_names();
    let mut rows: Vec<(String, String)> = report
        .cells
        .iter()
        .map(|c| (c.model.clone(), c.criterion.clone()))
        .collect();
    rows.sort();
    rows.dedup();

    let grid_w = LABEL_W + CELL_W * tasks.len() as f64;
    let grid_h = 40.0 + CELL_H * rows.len() as f64;
    let panels: [(&str, Vec<(&String, &f64)>); 3] = [
        ("Model index", report.models.iter().collect()),
        ("Task index", report.tasks.iter().collect()),
        ("Criterion index", report.criteria.iter().collect()),
    ];
    let panel_h: f64 = panels.iter().map(|(_, v)| 30.0 + 20.0 * v.len() as f64).sum();
    let width = grid_w.max(LABEL_W + 320.0) + 20.0;
    let height = grid_h + panel_h + 20.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    for (i, t) in tasks.iter().enumerate() {
        let x = LABEL_W + CELL_W * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="30" text-anchor="middle">{}</text>"#,
            escape(t)
        );
    }
    for (r, (model, criterion)) in rows.iter().enumerate() {
        let y = 40.0 + CELL_H * r as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{} / {}</text>"#,
            LABEL_W - 6.0,
            y + CELL_H * 0.65,
            escape(model),
            escape(criterion)
        );
        for (i, t) in tasks.iter().enumerate() {
            let x = LABEL_W + CELL_W * i as f64;
            match report.cell(t, criterion, model) {
                Some(c) => {
                    let v = c.terms.value;
                    let ink = if v.abs() > 0.6 { "#ffffff" } else { "#000000" };
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{CELL_W:.1}" height="{CELL_H:.1}" fill="{}" stroke="#ffffff"/><text x="{:.1}" y="{:.1}" text-anchor="middle" fill="{ink}">{v:.2}</text>"##,
                        diverging_colour(v),
                        x + CELL_W / 2.0,
                        y + CELL_H * 0.65
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{CELL_W:.1}" height="{CELL_H:.1}" fill="#dddddd" stroke="#ffffff"/>"##
                    );
                }
            }
        }
    }

    let mut y = grid_h + 10.0;
    let bar_scale = 150.0;
    let zero_x = LABEL_W + 160.0;
    for (title, entries) in panels {
        let _ = writeln!(
            out,
            r#"<text x="10" y="{:.1}" font-weight="bold">{title}</text>"#,
            y + 14.0
        );
        y += 22.0;
        let _ = writeln!(
            out,
            r##"<line x1="{zero_x:.1}" y1="{y:.1}" x2="{zero_x:.1}" y2="{:.1}" stroke="#888888"/>"##,
            y + 20.0 * entries.len() as f64
        );
        for (name, &v) in entries {
            let w = (v * bar_scale).abs();
            let x = if v >= 0.0 { zero_x } else { zero_x - w };
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text><rect x="{x:.1}" y="{:.1}" width="{w:.1}" height="14" fill="{}"/><text x="{:.1}" y="{:.1}">{v:.3}</text>"#,
                LABEL_W - 6.0,
                y + 11.0,
                escape(name),
                y + 1.0,
                diverging_colour(v),
                zero_x + bar_scale + 8.0,
                y + 11.0
            );
            y += 20.0;
        }
        y += 8.0;
    }
    out.push_str("</svg>\n");
    out
}

/// One plotted learning curve.
pub struct Curve<'a> {
    pub name: &'a str,
    pub log: &'a TrainingLog,
    /// Marked with a dot and label when present.
    pub convergence_step: Option<u64>,
}

/// Line chart of training logs sharing one pair of axes.
pub fn curves_svg(title: &str, curves: &[Curve<'_>]) -> String {
    let (w, h) = (640.0, 380.0);
    let (left, right, top, bottom) = (60.0, 150.0, 30.0, 40.0);
    let max_step = curves.iter().map(|c| c.log.last_step()).max().unwrap_or(1).max(1) as f64;
    let min_step = curves
        .iter()
        .filter_map(|c| c.log.steps.first().map(|&(s, _)| s))
        .min()
        .unwrap_or(0) as f64;
    let values = curves.iter().flat_map(|c| c.log.steps.iter().map(|&(_, v)| v));
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let span_x = (max_step - min_step).max(1.0);
    let px = |s: f64| left + (s - min_step) / span_x * (w - left - right);
    let py = |v: f64| top + (hi - v) / (hi - lo) * (h - top - bottom);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{left:.1}" y="18" font-weight="bold">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<path d="M{left:.1},{top:.1} V{:.1} H{:.1}" fill="none" stroke="#444444"/>"##,
        h - bottom,
        w - right
    );
    for (label, v) in [(format!("{hi:.3}"), hi), (format!("{lo:.3}"), lo)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
            left - 4.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{left:.1}" y="{:.1}">{min_step:.0}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{max_step:.0}</text><text x="{:.1}" y="{:.1}" text-anchor="middle">step</text>"#,
        h - bottom + 16.0,
        w - right,
        h - bottom + 16.0,
        (left + w - right) / 2.0,
        h - 6.0
    );
    for (i, c) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &(s, v)) in c.log.steps.iter().enumerate() {
            let _ = write!(d, "{}{:.1},{:.1}", if j == 0 { "M" } else { " L" }, px(s as f64), py(v));
        }
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#
        );
        if let Some(step) = c.convergence_step {
            if let Some(&(s, v)) = c.log.steps.iter().find(|&&(s, _)| s == step) {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{colour}"/><text x="{:.1}" y="{:.1}" fill="{colour}">&#8595; {s}</text>"#,
                    px(s as f64),
                    py(v),
                    px(s as f64) - 6.0,
                    py(v) - 8.0
                );
            }
        }
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="12" height="3" fill="{colour}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            w - right + 10.0,
            ly + 4.0,
            w - right + 26.0,
            ly + 8.0,
            escape(c.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hlm::{hlm_report, EvalLevel, HlmConfig, PerformanceCube, PerformanceRow};
    use crate::splitkit::Level;

    #[test]
    fn colours() {
        assert_eq!(diverging_colour(0.0), "#f7f7f7");
        assert_eq!(diverging_colour(1.0), "#2166ac");
        assert_eq!(diverging_colour(-1.0), "#b2182b");
        assert_eq!(diverging_colour(-5.0), "#b2182b");
    }

    #[test]
    fn heatmap_has_one_rect_per_cell() {
        let mut rows = Vec::new();
        for task in ["A<1>", "B"] {
            for (lvl, v) in [(Level::Easy, 3.0), (Level::Medium, 2.0), (Level::Hard, 1.0)] {
                rows.push(PerformanceRow {
                    task: task.into(),
                    criterion: "c".into(),
                    model: "m".into(),
                    train_level: lvl,
                    eval_level: EvalLevel::Full,
                    metric: "acc".into(),
                    value: v,
                    higher_is_better: true,
                });
            }
        }
        let report = hlm_report(&PerformanceCube::from_rows(rows).unwrap(), &HlmConfig::default()).unwrap();
        let svg = heatmap_svg(&report);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("A&lt;1&gt;"));
        assert_eq!(svg.matches(r#"height="26.0""#).count(), 2);
        assert_eq!(svg, heatmap_svg(&report));
    }

    #[test]
    fn curves_render() {
        let log = TrainingLog::new(vec![(1, 0.5), (2, 0.7), (3, 0.7)], true).unwrap();
        let svg = curves_svg(
            "demo",
            &[Curve {
                name: "E->H",
                log: &log,
                convergence_step: Some(2),
            }],
        );
        assert!(svg.contains("<circle"));
        assert!(svg.contains("E-&gt;H"));
    }
}
