//! Flat-file renderers: metric CSVs, confusion-matrix heatmaps, and
//! explanation reports.
//!
//! Everything here is a pure `data -> String` function so run artifacts
//! are byte-reproducible; callers decide where the bytes land.  Floats are
//! fixed to six decimals in CSVs (diff-friendly, matches the precision the
//! source tables publish) and SVGs are assembled from static templates
//! with no timestamps or random ids.

use std::fmt::Write as _;

use serde_json::json;

use crate::eval::{ConfusionMatrix, MetricReport};
use crate::explain::Explanation;

/// One row per task: both classes' precision/recall/F1/support plus the
/// aggregates, in a fixed wide layout.
pub fn metrics_csv(rows: &[(&str, MetricReport)]) -> String {
    let mut out = String::from(
        "task,pos_precision,pos_recall,pos_f1,pos_support,\
         neg_precision,neg_recall,neg_f1,neg_support,macro_f1,accuracy\n",
    );
    for (task, r) in rows {
        let _ = writeln!(
            out,
            "{task},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6},{},{:.6},{:.6}",
            r.pos.precision,
            r.pos.recall,
            r.pos.f1,
            r.pos.support,
            r.neg.precision,
            r.neg.recall,
            r.neg.f1,
            r.neg.support,
            r.macro_f1,
            r.accuracy,
        );
    }
    out
}

/// Table-style export of ranked n-gram weights (`ngram,weight`).
pub fn importance_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("ngram,weight\n");
    for (ngram, weight) in rows {
        let _ = writeln!(out, "{ngram},{weight:.6}");
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// White-to-red fill for a cell holding `count` of `total` instances.
fn heat_fill(count: usize, total: usize) -> (String, &'static str) {
    let t = if total == 0 { 0.0 } else { count as f64 / total as f64 };
    let lerp = |a: f64, b: f64| (a + t * (b - a)).round() as u8;
    let fill = format!("rgb({},{},{})", lerp(255.0, 178.0), lerp(255.0, 24.0), lerp(255.0, 43.0));
    let ink = if t > 0.5 { "#ffffff" } else { "#000000" };
    (fill, ink)
}

/// 2x2 confusion-matrix heatmap (gold rows, predicted columns), cell
/// intensity proportional to the share of all instances.
pub fn confusion_svg(cm: &ConfusionMatrix, title: &str) -> String {
    let total = cm.total();
    // row-major: gold positive row [TP, FN], gold negative row [FP, TN]
    let cells = [
        (0, 0, cm.true_pos),
        (0, 1, cm.false_neg),
        (1, 0, cm.false_pos),
        (1, 1, cm.true_neg),
    ];
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"360\" height=\"300\" viewBox=\"0 0 360 300\">\n",
    );
    out.push_str("<style>text{font-family:monospace;font-size:13px}</style>\n");
    let _ = writeln!(
        out,
        "<text x=\"180\" y=\"26\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>",
        xml_escape(title)
    );
    let _ = writeln!(out, "<text x=\"160\" y=\"56\" text-anchor=\"middle\">pred +</text>");
    let _ = writeln!(out, "<text x=\"260\" y=\"56\" text-anchor=\"middle\">pred -</text>");
    let _ = writeln!(out, "<text x=\"100\" y=\"115\" text-anchor=\"end\">gold +</text>");
    let _ = writeln!(out, "<text x=\"100\" y=\"215\" text-anchor=\"end\">gold -</text>");
    for (row, col, count) in cells {
        let x = 110 + 100 * col;
        let y = 62 + 100 * row;
        let (fill, ink) = heat_fill(count, total);
        let _ = writeln!(
            out,
            "<rect x=\"{x}\" y=\"{y}\" width=\"100\" height=\"100\" fill=\"{fill}\" stroke=\"#444\"/>"
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"{ink}\">{count}</text>",
            x + 50,
            y + 55
        );
    }
    out.push_str("</svg>\n");
    out
}

/// JSON rendering of one explanation (keys sorted, two-space indent).
pub fn explanation_text(ex: &Explanation) -> String {
    let weights: Vec<serde_json::Value> = ex
        .weights
        .iter()
        .map(|(token, weight)| json!({ "token": token, "weight": weight }))
        .collect();
    let doc = json!({
        "source_id": ex.source_id,
        "predicted_class": ex.predicted_class,
        "probability": ex.probability,
        "fit_score": ex.fit_score,
        "weights": weights,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("in-memory json");
    out.push('\n');
    out
}

/// Horizontal signed bar chart of an explanation's token weights: bars
/// pushing toward the predicted class point right (red), bars against it
/// point left (blue).  Bar lengths are scaled to the largest |weight|.
pub fn explanation_svg(ex: &Explanation) -> String {
    const CENTER: f64 = 250.0;
    const HALF: f64 = 130.0;
    let rows = ex.weights.len();
    let height = 70 + 24 * rows.max(1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"{height}\" viewBox=\"0 0 480 {height}\">"
    );
    out.push_str("<style>text{font-family:monospace;font-size:12px}</style>\n");
    let _ = writeln!(
        out,
        "<text x=\"240\" y=\"22\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>",
        xml_escape(&ex.source_id)
    );
    let _ = writeln!(
        out,
        "<text x=\"240\" y=\"40\" text-anchor=\"middle\">class {} @ p={:.3}, fit {:.3}</text>",
        ex.predicted_class, ex.probability, ex.fit_score
    );
    if rows == 0 {
        let _ = writeln!(
            out,
            "<text x=\"240\" y=\"76\" text-anchor=\"middle\">no local weights (constant model output)</text>"
        );
        out.push_str("</svg>\n");
        return out;
    }
    let top = 56.0;
    let _ = writeln!(
        out,
        "<line x1=\"{CENTER}\" y1=\"{top}\" x2=\"{CENTER}\" y2=\"{}\" stroke=\"#444\"/>",
        top + 24.0 * rows as f64
    );
    let max_abs = ex
        .weights
        .iter()
        .map(|(_, w)| w.abs())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for (i, (token, weight)) in ex.weights.iter().enumerate() {
        let y = top + 24.0 * i as f64;
        let len = (weight.abs() / max_abs) * HALF;
        let (x, fill) = if *weight >= 0.0 {
            (CENTER, "#b2182b")
        } else {
            (CENTER - len, "#2166ac")
        };
        let _ = writeln!(
            out,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{len:.1}\" height=\"16\" fill=\"{fill}\"/>",
            y + 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"8\" y=\"{:.1}\">{}</text>",
            y + 16.0,
            xml_escape(token)
        );
        let _ = writeln!(
            out,
            "<text x=\"472\" y=\"{:.1}\" text-anchor=\"end\">{weight:.4}</text>",
            y + 16.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::binary_metrics;

    fn sample_report() -> MetricReport {
        let y_true = [true, true, true, false, false, false, true, false];
        let y_pred = [true, false, true, false, true, false, true, false];
        binary_metrics(&y_true, &y_pred).unwrap()
    }

    #[test]
    fn metrics_csv_is_wide_and_fixed_precision() {
        let csv = metrics_csv(&[("hs", sample_report()), ("tr", sample_report())]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "task,pos_precision,pos_recall,pos_f1,pos_support,\
             neg_precision,neg_recall,neg_f1,neg_support,macro_f1,accuracy"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("hs,0.750000,0.750000,0.750000,4,"));
        assert!(row.ends_with(",0.750000,0.750000"));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv, metrics_csv(&[("hs", sample_report()), ("tr", sample_report())]));
    }

    #[test]
    fn importance_csv_reproduces_the_published_table_shape() {
        let rows = vec![
            ("women are stupid".to_string(), 0.117489),
            ("bitch https co".to_string(), 0.075791),
            ("build the wall".to_string(), 0.075195),
        ];
        let csv = importance_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines,
            [
                "ngram,weight",
                "women are stupid,0.117489",
                "bitch https co,0.075791",
                "build the wall,0.075195",
            ]
        );
    }

    #[test]
    fn confusion_svg_renders_all_four_cells() {
        let cm = ConfusionMatrix { true_pos: 30, false_pos: 13, false_neg: 7, true_neg: 50 };
        let svg = confusion_svg(&cm, "HS <en>");
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect ").count(), 4);
        for count in ["30", "13", "7", "50"] {
            assert!(svg.contains(&format!(">{count}</text>")), "missing {count}");
        }
        assert!(svg.contains("HS &lt;en&gt;"));
        assert!(svg.contains("gold +") && svg.contains("pred -"));
        assert_eq!(svg, confusion_svg(&cm, "HS <en>"));
        // the dominant cell is darker than an empty one
        let (dark, ink) = heat_fill(50, 100);
        assert_eq!(heat_fill(0, 100).0, "rgb(255,255,255)");
        assert_ne!(dark, "rgb(255,255,255)");
        assert_eq!(ink, "#000000");
        assert_eq!(heat_fill(90, 100).1, "#ffffff");
    }

    fn sample_explanation() -> Explanation {
        Explanation {
            source_id: "tweet<42>".into(),
            predicted_class: 1,
            probability: 0.86,
            weights: vec![
                ("bitch".into(), 0.31),
                ("ugly".into(), 0.12),
                ("you".into(), -0.05),
            ],
            fit_score: 0.93,
        }
    }

    #[test]
    fn explanation_text_is_valid_json() {
        let text = explanation_text(&sample_explanation());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["source_id"], "tweet<42>");
        assert_eq!(v["predicted_class"], 1);
        assert_eq!(v["probability"], 0.86);
        assert_eq!(v["fit_score"], 0.93);
        assert_eq!(v["weights"][0]["token"], "bitch");
        assert_eq!(v["weights"][0]["weight"], 0.31);
        assert_eq!(v["weights"].as_array().unwrap().len(), 3);
        assert!(text.ends_with('\n'));
        assert_eq!(text, explanation_text(&sample_explanation()));
    }

    #[test]
    fn explanation_svg_draws_signed_bars() {
        let svg = explanation_svg(&sample_explanation());
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        // one bar per token, red for positive and blue for negative
        assert_eq!(svg.matches("<rect ").count(), 3);
        assert_eq!(svg.matches("#b2182b").count(), 2);
        assert_eq!(svg.matches("#2166ac").count(), 1);
        assert!(svg.contains(">bitch</text>"));
        assert!(svg.contains(">0.3100</text>"));
        assert!(svg.contains(">-0.0500</text>"));
        assert!(svg.contains("tweet&lt;42&gt;"));
        // the strongest token gets the full half-width
        assert!(svg.contains("width=\"130.0\""));
        assert_eq!(svg, explanation_svg(&sample_explanation()));
    }

    #[test]
    fn empty_explanations_render_a_placeholder() {
        let ex = Explanation {
            source_id: "t".into(),
            predicted_class: 0,
            probability: 0.8,
            weights: vec![],
            fit_score: 0.0,
        };
        let svg = explanation_svg(&ex);
        assert!(svg.contains("no local weights"));
        assert_eq!(svg.matches("<rect ").count(), 0);
        let text = explanation_text(&ex);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["weights"].as_array().unwrap().len(), 0);
    }
}
