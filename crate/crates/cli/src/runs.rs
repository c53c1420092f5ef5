//! Run directories and the prediction TSV they exchange.
//!
//! Every training or evaluation run writes into a directory the caller
//! names.  To keep replays honest the directory must be empty (or absent):
//! refusing to overwrite means a run dir always describes exactly one run.
//!
//! Predictions travel as a headered TSV mirroring the dataset label
//! columns: `id\tHS\tTR\tAG`, one row per tweet, labels in {0,1}.  The
//! columns are raw bits, not a validated label set -- a run that predicts
//! only TR writes its TR column with HS left 0, which the label invariant
//! would forbid.  Evaluation reapplies the invariant (via
//! [`LabelSet::coerced`]) only where the task semantics demand it, i.e.
//! for subtask-B scoring.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const PRED_HEADER: &str = "id\tHS\tTR\tAG";

/// One labeled row: tweet id and the three raw label bits (HS, TR, AG).
pub type LabelRow = (String, [bool; 3]);

/// Create `dir`, refusing to reuse one that already has contents.
pub fn create_run_dir(dir: &Path) -> Result<(), CliError> {
    if dir.exists() {
        let occupied = std::fs::read_dir(dir)
            .map_err(CliError::Io)?
            .next()
            .is_some();
        if occupied {
            return Err(CliError::Data(format!(
                "run directory {} already has contents; pick a fresh directory",
                dir.display()
            )));
        }
        return Ok(());
    }
    std::fs::create_dir_all(dir).map_err(CliError::Io)
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(CliError::Io)?;
    Ok(path)
}

pub fn predictions_tsv(rows: &[LabelRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 16 + PRED_HEADER.len() + 1);
    out.push_str(PRED_HEADER);
    out.push('\n');
    for (id, bits) in rows {
        let [hs, tr, ag] = bits.map(u8::from);
        out.push_str(&format!("{id}\t{hs}\t{tr}\t{ag}\n"));
    }
    out
}

/// Parse a label TSV.  Accepts the 4-column prediction layout above or a
/// full 5-column dataset (`id\ttext\tHS\tTR\tAG`); the header decides.
pub fn read_label_tsv(path: &Path) -> Result<Vec<LabelRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
    let display = path.display();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{display}: empty file")))?;
    let cols: Vec<&str> = header.split('\t').collect();
    let label_at = match cols.as_slice() {
        ["id", "HS", "TR", "AG"] => 1,
        ["id", "text", "HS", "TR", "AG"] => 2,
        _ => {
            return Err(CliError::Data(format!(
                "{display}: unrecognized header {header:?} (expected id\\tHS\\tTR\\tAG or a dataset TSV)"
            )))
        }
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(CliError::Data(format!(
                "{display}:{}: expected {} tab-separated fields, found {}",
                i + 1,
                cols.len(),
                fields.len()
            )));
        }
        let mut bits = [false; 3];
        for (b, field) in bits.iter_mut().zip(&fields[label_at..label_at + 3]) {
            *b = match *field {
                "0" => false,
                "1" => true,
                other => {
                    return Err(CliError::Data(format!(
                        "{display}:{}: label must be 0 or 1, got {other:?}",
                        i + 1
                    )))
                }
            };
        }
        rows.push((fields[0].to_string(), bits));
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{display}: no rows")));
    }
    Ok(rows)
}

/// Pair gold and predicted label bits by id.  The two files must cover
/// exactly the same ids; output order follows the gold file.
pub fn align_by_id(
    gold: &[LabelRow],
    pred: &[LabelRow],
) -> Result<(Vec<[bool; 3]>, Vec<[bool; 3]>), CliError> {
    let mut by_id: HashMap<&str, [bool; 3]> = HashMap::with_capacity(pred.len());
    for (id, bits) in pred {
        if by_id.insert(id.as_str(), *bits).is_some() {
            return Err(CliError::Data(format!("duplicate id {id:?} in predictions")));
        }
    }
    if gold.len() != pred.len() {
        return Err(CliError::Data(format!(
            "gold has {} rows but predictions have {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut g = Vec::with_capacity(gold.len());
    let mut p = Vec::with_capacity(gold.len());
    for (id, bits) in gold {
        let predicted = by_id.get(id.as_str()).ok_or_else(|| {
            CliError::Data(format!("id {id:?} present in gold but missing from predictions"))
        })?;
        g.push(*bits);
        p.push(*predicted);
    }
    Ok((g, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_dirs_refuse_leftovers() {
        let tmp = tempfile::tempdir().unwrap();
        let fresh = tmp.path().join("runs/a");
        create_run_dir(&fresh).unwrap();
        assert!(fresh.is_dir());
        // empty-but-existing is fine; occupied is not
        create_run_dir(&fresh).unwrap();
        std::fs::write(fresh.join("metrics.csv"), "x").unwrap();
        let err = create_run_dir(&fresh).unwrap_err();
        assert!(err.to_string().contains("already has contents"), "{err}");
    }

    #[test]
    fn prediction_tsv_round_trips_raw_bits() {
        let rows = vec![
            ("201".to_string(), [true, false, true]),
            // TR without HS: invalid as a label set, legal as a prediction column
            ("202".to_string(), [false, true, false]),
        ];
        let text = predictions_tsv(&rows);
        assert_eq!(text, "id\tHS\tTR\tAG\n201\t1\t0\t1\n202\t0\t1\t0\n");

        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("pred.tsv");
        std::fs::write(&path, &text).unwrap();
        assert_eq!(read_label_tsv(&path).unwrap(), rows);
    }

    #[test]
    fn dataset_tsvs_are_accepted_as_gold() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("gold.tsv");
        std::fs::write(&path, "id\ttext\tHS\tTR\tAG\n7\tsome text\t1\t1\t0\n").unwrap();
        let rows = read_label_tsv(&path).unwrap();
        assert_eq!(rows, vec![("7".to_string(), [true, true, false])]);
    }

    #[test]
    fn malformed_label_files_are_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let cases = [
            ("", "empty file"),
            ("id\tHS\n1\t0\n", "unrecognized header"),
            ("id\tHS\tTR\tAG\n1\t0\t0\n", "expected 4 tab-separated fields"),
            ("id\tHS\tTR\tAG\n1\t2\t0\t0\n", "label must be 0 or 1"),
            ("id\tHS\tTR\tAG\n", "no rows"),
        ];
        for (text, needle) in cases {
            let path = tmp.path().join("bad.tsv");
            std::fs::write(&path, text).unwrap();
            let err = read_label_tsv(&path).unwrap_err();
            assert!(err.to_string().contains(needle), "{err} missing {needle:?}");
        }
    }

    #[test]
    fn alignment_follows_gold_order_and_demands_equal_id_sets() {
        let gold = vec![
            ("b".to_string(), [true, false, false]),
            ("a".to_string(), [false, false, false]),
        ];
        let pred = vec![
            ("a".to_string(), [true, true, false]),
            ("b".to_string(), [false, false, false]),
        ];
        let (g, p) = align_by_id(&gold, &pred).unwrap();
        assert_eq!(g[0], [true, false, false]);
        assert_eq!(p[0], [false, false, false]); // pred for "b"
        assert_eq!(p[1], [true, true, false]); // pred for "a"

        let missing = vec![("c".to_string(), [false, false, false])];
        let err = align_by_id(&gold, &[missing, pred[..1].to_vec()].concat()).unwrap_err();
        assert!(err.to_string().contains("missing from predictions"), "{err}");
        let err = align_by_id(&gold, &pred[..1]).unwrap_err();
        assert!(err.to_string().contains("2 rows but predictions have 1"), "{err}");
    }
}
