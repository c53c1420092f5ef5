//! `hwk evaluate`: score a prediction TSV against gold labels.
//!
//! Task A compares one label dimension as raw bits.  Task B applies the
//! competition's multi-label scheme: labels pass through the HS→{TR,AG}
//! invariant, then the score is EMR plus the mean of the three per-
//! dimension macro-F1s.  Results print as `metric\tvalue` lines; with
//! `--out-dir` the same numbers land in `metrics.csv` plus one confusion
//! SVG per scored dimension.

use std::path::Path;

use hwk_core::corpus::{LabelDim, LabelSet};
use hwk_core::eval::{binary_metrics, confusion, emr, subtask_b_score, ConfusionMatrix, MetricReport};
use hwk_core::report::{confusion_svg, metrics_csv};

use crate::error::CliError;
use crate::runs::{align_by_id, create_run_dir, read_label_tsv, write_artifact};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    A,
    B,
}

impl Task {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "a" => Ok(Task::A),
            "b" => Ok(Task::B),
            other => Err(format!("unknown task {other:?} (expected a or b)")),
        }
    }
}

pub fn run(
    task: Task,
    dim: LabelDim,
    pred_path: &Path,
    gold_path: &Path,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let gold = read_label_tsv(gold_path)?;
    let pred = read_label_tsv(pred_path)?;
    let (g, p) = align_by_id(&gold, &pred)?;

    let per_dim = |dim: LabelDim| -> Result<(MetricReport, ConfusionMatrix), CliError> {
        let col = super::dim_col(dim);
        let gt: Vec<bool> = g.iter().map(|bits| bits[col]).collect();
        let pt: Vec<bool> = p.iter().map(|bits| bits[col]).collect();
        Ok((binary_metrics(&gt, &pt)?, confusion(&gt, &pt)?))
    };

    let mut lines: Vec<(String, f64)> = Vec::new();
    let mut csv_rows = Vec::new();
    let mut svgs = Vec::new();
    match task {
        Task::A => {
            let (report, cm) = per_dim(dim)?;
            lines.push(("macro_f1".into(), report.macro_f1));
            lines.push(("f1_pos".into(), report.pos.f1));
            lines.push(("f1_neg".into(), report.neg.f1));
            lines.push(("accuracy".into(), report.accuracy));
            csv_rows.push((dim.name(), report));
            svgs.push((dim, cm));
        }
        Task::B => {
            let coerce = |bits: &[bool; 3]| LabelSet::coerced(bits[0], bits[1], bits[2]);
            let g_sets: Vec<LabelSet> = g.iter().map(coerce).collect();
            let p_sets: Vec<LabelSet> = p.iter().map(coerce).collect();
            lines.push(("subtask_b".into(), subtask_b_score(&g_sets, &p_sets)?));
            lines.push(("emr".into(), emr(&g_sets, &p_sets)?));
            for d in LabelDim::ALL {
                let (report, cm) = per_dim(d)?;
                lines.push((format!("macro_f1_{}", d.name().to_lowercase()), report.macro_f1));
                csv_rows.push((d.name(), report));
                svgs.push((d, cm));
            }
        }
    }

    if let Some(dir) = out_dir {
        create_run_dir(dir)?;
        write_artifact(dir, "metrics.csv", &metrics_csv(&csv_rows))?;
        for (d, cm) in &svgs {
            let name = format!("confusion_{}.svg", d.name().to_lowercase());
            write_artifact(dir, &name, &confusion_svg(cm, d.name()))?;
        }
    }
    for (name, value) in &lines {
        println!("{name}\t{value:.6}");
    }
    Ok(())
}
