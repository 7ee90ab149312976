//! Accuracy, confusion and per-class recall.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub per_class_recall: Vec<f64>,
    pub config_hash: String,
    pub seed: u64,
}

pub fn evaluate(
    predictions: &[usize],
    truth: &[usize],
    classes: usize,
    config_hash: impl Into<String>,
    seed: u64,
) -> Result<EvalReport> {
    if predictions.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    let mut confusion = vec![vec![0u64; classes]; classes];
    for (&p, &t) in predictions.iter().zip(truth) {
        if p >= classes || t >= classes {
            return Err(Error::invalid(format!("label outside 0..{classes}")));
        }
        confusion[t][p] += 1;
    }
    let correct: u64 = (0..classes).map(|c| confusion[c][c]).sum();
    let per_class_recall = confusion
        .iter()
        .enumerate()
        .map(|(c, row)| {
            let n: u64 = row.iter().sum();
            if n == 0 { 0.0 } else { row[c] as f64 / n as f64 }
        })
        .collect();
    Ok(EvalReport {
        accuracy: correct as f64 / truth.len() as f64,
        confusion,
        per_class_recall,
        config_hash: config_hash.into(),
        seed,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Header row of class names, then one row per true class.
    pub fn confusion_csv(&self, class_names: &[String]) -> String {
        let mut s = String::from("truth\\predicted");
        for (c, _) in self.confusion.iter().enumerate() {
            s.push(',');
            s.push_str(class_names.get(c).map_or("", String::as_str));
        }
        s.push('\n');
        for (c, row) in self.confusion.iter().enumerate() {
            s.push_str(class_names.get(c).map_or("", String::as_str));
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }

    /// Write `report.json` and `confusion.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, class_names: &[String]) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::from(e).at(dir))?;
        let json = dir.join("report.json");
        std::fs::write(&json, self.to_json()?).map_err(|e| Error::from(e).at(&json))?;
        let csv = dir.join("confusion.csv");
        std::fs::write(&csv, self.confusion_csv(class_names)).map_err(|e| Error::from(e).at(&csv))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_correct() {
        let r = evaluate(&[0, 1, 2], &[0, 1, 2], 3, "h", 0).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn all_zero_is_prevalence() {
        let r = evaluate(&[0; 5], &[0, 0, 1, 2, 2], 3, "h", 0).unwrap();
        assert!((r.accuracy - 0.4).abs() < 1e-15);
        assert_eq!(r.per_class_recall, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn hand_counted() {
        let r = evaluate(&[1, 1, 0, 2, 2, 2], &[0, 1, 0, 2, 1, 2], 3, "h", 7).unwrap();
        assert_eq!(r.confusion, vec![vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 2]]);
        assert_eq!(r.per_class_recall, vec![0.5, 0.5, 1.0]);
        assert!(r.confusion_csv(&["a".into(), "b".into(), "c".into()]).starts_with("truth\\predicted,a,b,c\na,1,1,0\n"));
    }
}
