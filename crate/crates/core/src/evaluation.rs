//! Scoring classifications against gold labels: alignment, confusion matrix,
//! per-class precision/recall/F1, accuracy and tool-vs-gold kappa.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agreement::{self, majority_unify, AgreementError, AnnotationMatrix, Unified};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold and predicted labels share no items")]
    EmptyIntersection,
    #[error("label `{0}` is not one of the categories")]
    UnknownLabel(String),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("duplicate item `{0}`")]
    DuplicateItem(String),
    #[error("label CSV needs `item_id` or `interview_id,utterance_index,start` columns plus labels")]
    UnrecognizedLayout,
    #[error(transparent)]
    Agreement(#[from] AgreementError),
    #[error("label CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Item key used to align tool output with gold labels.
pub fn item_key(interview_id: &str, utterance_index: usize, start: usize) -> String {
    format!("{interview_id}#{utterance_index}#{start}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub items: Vec<String>,
    /// (gold, predicted) for each of `items`.
    pub pairs: Vec<(String, String)>,
    /// In gold only.
    pub uncovered: Vec<String>,
    /// In predictions only.
    pub spurious: Vec<String>,
}

pub fn align(gold: &BTreeMap<String, String>, predicted: &BTreeMap<String, String>) -> Result<Alignment, EvalError> {
    let mut alignment = Alignment {
        items: Vec::new(),
        pairs: Vec::new(),
        uncovered: Vec::new(),
        spurious: Vec::new(),
    };
    for (item, g) in gold {
        match predicted.get(item) {
            Some(p) => {
                alignment.items.push(item.clone());
                alignment.pairs.push((g.clone(), p.clone()));
            }
            None => alignment.uncovered.push(item.clone()),
        }
    }
    alignment.spurious = predicted.keys().filter(|k| !gold.contains_key(*k)).cloned().collect();
    if alignment.pairs.is_empty() {
        return Err(EvalError::EmptyIntersection);
    }
    Ok(alignment)
}

/// Rows are gold labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub categories: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.categories.len()).map(|k| self.counts[k][k]).sum()
    }

    pub fn row_sum(&self, k: usize) -> usize {
        self.counts[k].iter().sum()
    }

    pub fn col_sum(&self, k: usize) -> usize {
        self.counts.iter().map(|r| r[k]).sum()
    }

    pub fn get(&self, gold: &str, predicted: &str) -> Option<usize> {
        let g = self.categories.iter().position(|c| c == gold)?;
        let p = self.categories.iter().position(|c| c == predicted)?;
        Some(self.counts[g][p])
    }
}

pub fn confusion<S: AsRef<str>>(pairs: &[(S, S)], categories: &[S]) -> Result<ConfusionMatrix, EvalError> {
    let cats: Vec<String> = categories.iter().map(|c| c.as_ref().to_string()).collect();
    let index = |label: &str| {
        cats.iter()
            .position(|c| c == label)
            .ok_or_else(|| EvalError::UnknownLabel(label.to_string()))
    };
    let mut counts = vec![vec![0; cats.len()]; cats.len()];
    for (g, p) in pairs {
        counts[index(g.as_ref())?][index(p.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix {
        categories: cats,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics<F> {
    pub precision: Option<F>,
    pub recall: Option<F>,
    pub f1: Option<F>,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<F> {
    pub categories: Vec<String>,
    pub per_class: BTreeMap<String, ClassMetrics<F>>,
    pub accuracy: F,
    pub micro_precision: F,
    pub micro_recall: F,
    /// Mean F1 over classes whose F1 is defined.
    pub macro_f1: Option<F>,
    pub macro_excluded_classes: usize,
    pub kappa_vs_gold: Option<F>,
    pub total: usize,
}

fn f1<F: Real>(precision: Option<F>, recall: Option<F>) -> Option<F> {
    let (p, r) = (precision?, recall?);
    if p + r == F::zero() {
        return Some(F::zero());
    }
    Some((p + p) * r / (p + r))
}

pub fn metrics<F: Real>(cm: &ConfusionMatrix) -> Result<MetricsReport<F>, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let k = cm.categories.len();
    let mut per_class = BTreeMap::new();
    let mut f1_sum = F::zero();
    let mut f1_defined = 0usize;
    for c in 0..k {
        let tp = cm.counts[c][c];
        let (col, row) = (cm.col_sum(c), cm.row_sum(c));
        let precision = (col > 0).then(|| F::ratio(tp, col));
        let recall = (row > 0).then(|| F::ratio(tp, row));
        let f1 = f1(precision, recall);
        if let Some(f) = f1 {
            f1_sum = f1_sum + f;
            f1_defined += 1;
        }
        per_class.insert(
            cm.categories[c].clone(),
            ClassMetrics {
                precision,
                recall,
                f1,
                support: row,
            },
        );
    }
    let trace = cm.trace();
    let tp_sum: usize = (0..k).map(|c| cm.counts[c][c]).sum();
    let predicted_sum: usize = (0..k).map(|c| cm.col_sum(c)).sum();
    let gold_sum: usize = (0..k).map(|c| cm.row_sum(c)).sum();

    let mut gold = Vec::with_capacity(total);
    let mut predicted = Vec::with_capacity(total);
    for g in 0..k {
        for p in 0..k {
            for _ in 0..cm.counts[g][p] {
                gold.push(g);
                predicted.push(p);
            }
        }
    }
    let kappa_vs_gold = agreement::cohen_kappa(&gold, &predicted)?;

    Ok(MetricsReport {
        categories: cm.categories.clone(),
        per_class,
        accuracy: F::ratio(trace, total),
        micro_precision: F::ratio(tp_sum, predicted_sum),
        micro_recall: F::ratio(tp_sum, gold_sum),
        macro_f1: (f1_defined > 0).then(|| f1_sum / F::from_count(f1_defined)),
        macro_excluded_classes: k - f1_defined,
        kappa_vs_gold,
        total,
    })
}

/// Per-class table with accuracy and kappa rows, two decimals.
pub fn format_table<F: Real>(report: &MetricsReport<F>) -> String {
    let cell = |v: Option<F>| match v {
        Some(v) => format!("{:.2}", v.to_f64().unwrap()),
        None => "undefined".to_string(),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:>11}{:>11}{:>11}{:>9}",
        "", "precision", "recall", "f1-score", "support"
    );
    for c in &report.categories {
        let m = &report.per_class[c];
        let _ = writeln!(
            out,
            "{:<10}{:>11}{:>11}{:>11}{:>9}",
            c,
            cell(m.precision),
            cell(m.recall),
            cell(m.f1),
            m.support
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10}{:>33}{:>9}",
        "accuracy",
        cell(Some(report.accuracy)),
        report.total
    );
    let _ = writeln!(
        out,
        "{:<10}{:>33}{:>9}",
        "macro f1",
        cell(report.macro_f1),
        report.total
    );
    let _ = writeln!(out, "{:<10}{:>33}", "kappa", cell(report.kappa_vs_gold));
    out
}

/// Confusion matrix as CSV: header row of predicted labels, first column of gold labels.
pub fn write_confusion_csv<W: io::Write>(writer: W, cm: &ConfusionMatrix) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["gold\\predicted".to_string()];
    header.extend(cm.categories.iter().cloned());
    w.write_record(&header)?;
    for (c, row) in cm.categories.iter().zip(&cm.counts) {
        let mut record = vec![c.clone()];
        record.extend(row.iter().map(|n| n.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Item labels read from CSV, plus items whose annotators tied.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelTable {
    pub labels: BTreeMap<String, String>,
    pub unresolved: Vec<String>,
}

/// Reads item labels from one of three layouts:
///
/// * occurrence CSV (`interview_id`, `utterance_index`, `start`, `label`, ...),
/// * `item_id,label`,
/// * annotation CSV (`item_id` plus one column per annotator), unified by majority vote.
pub fn read_label_csv<R: io::Read>(reader: R) -> Result<LabelTable, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut table = LabelTable::default();
    let insert = |table: &mut LabelTable, key: String, label: String| {
        if table.labels.insert(key.clone(), label).is_some() {
            return Err(EvalError::DuplicateItem(key));
        }
        Ok(())
    };

    if let (Some(id), Some(utt), Some(start), Some(label)) =
        (col("interview_id"), col("utterance_index"), col("start"), col("label"))
    {
        for record in rdr.records() {
            let record = record?;
            let parse = |i: usize| record[i].parse::<usize>().map_err(|_| EvalError::UnrecognizedLayout);
            let key = item_key(&record[id], parse(utt)?, parse(start)?);
            insert(&mut table, key, record[label].to_string())?;
        }
        return Ok(table);
    }

    let item = col("item_id").ok_or(EvalError::UnrecognizedLayout)?;
    if let (Some(label), 2) = (col("label"), headers.len()) {
        for record in rdr.records() {
            let record = record?;
            insert(&mut table, record[item].to_string(), record[label].to_string())?;
        }
        return Ok(table);
    }
    if item != 0 || headers.len() < 3 {
        return Err(EvalError::UnrecognizedLayout);
    }
    let mut matrix = AnnotationMatrix {
        item_ids: Vec::new(),
        annotator_ids: headers.iter().skip(1).map(str::to_string).collect(),
        labels: Vec::new(),
    };
    for record in rdr.records() {
        let record = record?;
        matrix.item_ids.push(record[0].to_string());
        matrix.labels.push(
            record
                .iter()
                .skip(1)
                .map(|c| (!c.is_empty()).then(|| c.to_string()))
                .collect(),
        );
    }
    Ok(gold_from_annotations(&matrix))
}

/// Gold labels from an annotation matrix: majority vote, ties set aside.
pub fn gold_from_annotations(matrix: &AnnotationMatrix) -> LabelTable {
    let unification = majority_unify(matrix);
    let mut table = LabelTable::default();
    for (item, outcome) in unification.unified {
        match outcome {
            Unified::Label(l) => {
                table.labels.insert(item, l);
            }
            Unified::Unresolved => table.unresolved.push(item),
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(entries: &[(&str, &str)]) -> BTreeMap<String, String> {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn align_examples() {
        let a = align(&map(&[("a", "NEG1")]), &map(&[("a", "NEG1"), ("b", "NEG3")])).unwrap();
        assert_eq!(a.pairs, [("NEG1".to_string(), "NEG1".to_string())]);
        assert_eq!(a.spurious, ["b"]);
        assert!(a.uncovered.is_empty());
        assert!(matches!(
            align(&map(&[("a", "NEG1")]), &map(&[("b", "NEG1")])),
            Err(EvalError::EmptyIntersection)
        ));
        let same = map(&[("a", "NEG1"), ("b", "NEG2"), ("c", "NEG3")]);
        assert_eq!(align(&same, &same).unwrap().pairs.len(), 3);
    }

    fn labels() -> Vec<&'static str> {
        vec!["NEG1", "NEG2", "NEG3"]
    }

    #[test]
    fn confusion_tally() {
        let pairs = [("NEG1", "NEG1"), ("NEG1", "NEG3"), ("NEG3", "NEG3")];
        let cm = confusion(&pairs, &labels()).unwrap();
        assert_eq!(cm.counts, [[1, 0, 1], [0, 0, 0], [0, 0, 1]]);
        let empty = confusion::<&str>(&[], &labels()).unwrap();
        assert_eq!(empty.total(), 0);
        assert!(matches!(
            confusion(&[("NEG4", "NEG1")], &labels()),
            Err(EvalError::UnknownLabel(l)) if l == "NEG4"
        ));
    }

    #[test]
    fn perfect_classifier() {
        let cm = ConfusionMatrix {
            categories: vec!["NEG1".into(), "NEG2".into(), "NEG3".into()],
            counts: vec![vec![5, 0, 0], vec![0, 2, 0], vec![0, 0, 1]],
        };
        let r = metrics::<f64>(&cm).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.kappa_vs_gold, Some(1.0));
        for m in r.per_class.values() {
            assert_eq!(m.precision, Some(1.0));
            assert_eq!(m.recall, Some(1.0));
        }
    }

    #[test]
    fn two_class_hand_values() {
        let cm = ConfusionMatrix {
            categories: vec!["a".into(), "b".into()],
            counts: vec![vec![8, 2], vec![1, 9]],
        };
        let r = metrics::<f64>(&cm).unwrap();
        assert_eq!(r.accuracy, 0.85);
        let a = &r.per_class["a"];
        let b = &r.per_class["b"];
        assert_eq!(a.precision, Some(8.0 / 9.0));
        assert_eq!(a.recall, Some(0.8));
        assert_eq!(b.precision, Some(9.0 / 11.0));
        assert_eq!(b.recall, Some(0.9));
        // f1_a = 2 * (8/9) * 0.8 / (8/9 + 0.8) = 16/19; f1_b = 2 * (9/11) * 0.9 / (9/11 + 0.9) = 6/7
        assert!((a.f1.unwrap() - 16.0 / 19.0).abs() < 1e-15);
        assert!((b.f1.unwrap() - 6.0 / 7.0).abs() < 1e-15);
        // p_o = 0.85, p_e = 0.5*0.45 + 0.5*0.55 = 0.5 -> kappa 0.7
        assert!((r.kappa_vs_gold.unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(r.micro_precision, r.accuracy);
    }

    #[test]
    fn zero_column_precision_undefined() {
        let cm = ConfusionMatrix {
            categories: vec!["a".into(), "b".into()],
            counts: vec![vec![3, 0], vec![2, 0]],
        };
        let r = metrics::<f64>(&cm).unwrap();
        assert_eq!(r.per_class["b"].precision, None);
        assert_eq!(r.per_class["b"].recall, Some(0.0));
        assert_eq!(r.per_class["b"].f1, None);
        assert_eq!(r.macro_excluded_classes, 1);
        assert!(format_table(&r).contains("undefined"));
        assert!(matches!(
            metrics::<f64>(&confusion::<&str>(&[], &["a"]).unwrap()),
            Err(EvalError::EmptyMatrix)
        ));
    }

    #[test]
    fn confusion_csv_layout() {
        let cm = confusion(&[("NEG2", "NEG1")], &labels()).unwrap();
        let mut buf = Vec::new();
        write_confusion_csv(&mut buf, &cm).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "gold\\predicted,NEG1,NEG2,NEG3\nNEG1,0,0,0\nNEG2,1,0,0\nNEG3,0,0,0\n"
        );
    }

    #[test]
    fn label_csv_layouts() {
        let occ = "interview_id,utterance_index,label,start,end\nD1,0,NEG1,1,3\nD1,2,NEG3,0,2\n";
        let t = read_label_csv(occ.as_bytes()).unwrap();
        assert_eq!(t.labels["D1#0#1"], "NEG1");
        assert_eq!(t.labels.len(), 2);

        let simple = "item_id,label\nx,NEG2\n";
        assert_eq!(read_label_csv(simple.as_bytes()).unwrap().labels["x"], "NEG2");

        let dup = "item_id,label\nx,NEG2\nx,NEG1\n";
        assert!(matches!(
            read_label_csv(dup.as_bytes()),
            Err(EvalError::DuplicateItem(_))
        ));
        let ann = "item_id,a,b,c\ni1,NEG1,NEG1,NEG2\ni2,NEG1,NEG2,NEG3\n";
        let t = read_label_csv(ann.as_bytes()).unwrap();
        assert_eq!(t.labels.len(), 1);
        assert_eq!(t.unresolved, ["i2"]);
        assert!(matches!(
            read_label_csv("foo,bar\n1,2\n".as_bytes()),
            Err(EvalError::UnrecognizedLayout)
        ));
    }

    #[test]
    fn gold_from_majority() {
        let m = AnnotationMatrix::from_rows(
            vec!["i1".into(), "i2".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec!["NEG1", "NEG1", "NEG2"], vec!["NEG1", "NEG2", "NEG3"]],
        );
        let t = gold_from_annotations(&m);
        assert_eq!(t.labels["i1"], "NEG1");
        assert_eq!(t.unresolved, ["i2"]);
    }
}
