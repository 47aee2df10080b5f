//! Confusion matrices, classification reports, run aggregation and label
//! distributions.
//!
//! Predictions that could not be parsed are scored as [`Scored::Invalid`].
//! They count toward `N` and toward the false negatives of their gold class,
//! but are never a true or false positive of any class.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binning::{coarsen, Category, PragmaticClass, PuristClass};

pub const SYSTEM_INVALID: &str = "SYSTEM_INVALID";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scored<C> {
    Class(C),
    Invalid,
}

impl<C> From<C> for Scored<C> {
    fn from(c: C) -> Self {
        Scored::Class(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("gold has {gold} entries but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("nothing to score")]
    Empty,
    #[error("run {run} has classes {found:?}, expected {expected:?}")]
    ClassMismatch {
        run: usize,
        expected: Vec<String>,
        found: Vec<String>,
    },
}

/// Counts indexed `[gold][pred]`. The final prediction column holds
/// invalid predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix<C: Category> {
    counts: Vec<Vec<usize>>,
    _marker: std::marker::PhantomData<C>,
}

impl<C: Category> ConfusionMatrix<C> {
    pub fn empty() -> Self {
        let n = C::ALL.len();
        ConfusionMatrix {
            counts: vec![vec![0; n + 1]; n],
            _marker: std::marker::PhantomData,
        }
    }

    /// Build from a dense `[gold][pred]` table over `C::ALL` plus an
    /// optional invalid column.
    pub fn from_counts(rows: &[Vec<usize>]) -> Self {
        let n = C::ALL.len();
        assert_eq!(rows.len(), n, "one row per class");
        let counts = rows
            .iter()
            .map(|r| {
                assert!(r.len() == n || r.len() == n + 1, "row width");
                let mut r = r.clone();
                r.resize(n + 1, 0);
                r
            })
            .collect();
        ConfusionMatrix {
            counts,
            _marker: std::marker::PhantomData,
        }
    }

    pub fn add(&mut self, gold: C, pred: Scored<C>) {
        let col = match pred {
            Scored::Class(p) => p.index(),
            Scored::Invalid => C::ALL.len(),
        };
        self.counts[gold.index()][col] += 1;
    }

    pub fn classes(&self) -> &'static [C] {
        C::ALL
    }

    pub fn get(&self, gold: C, pred: Scored<C>) -> usize {
        match pred {
            Scored::Class(p) => self.counts[gold.index()][p.index()],
            Scored::Invalid => self.counts[gold.index()][C::ALL.len()],
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, c: C) -> usize {
        self.counts[c.index()].iter().sum()
    }

    pub fn predicted(&self, c: C) -> usize {
        self.counts.iter().map(|r| r[c.index()]).sum()
    }

    pub fn true_positives(&self, c: C) -> usize {
        self.counts[c.index()][c.index()]
    }

    pub fn invalid(&self) -> usize {
        self.counts.iter().map(|r| r[C::ALL.len()]).sum()
    }

    pub fn correct(&self) -> usize {
        C::ALL.iter().map(|c| self.true_positives(*c)).sum()
    }

    pub fn render(&self) -> String {
        let mut s = format!("{:<14}", "gold \\ pred");
        for c in C::ALL {
            let _ = write!(s, "{:>11}", c.abbrev());
        }
        let _ = writeln!(s, "{:>16}", SYSTEM_INVALID);
        for g in C::ALL {
            let _ = write!(s, "{:<14}", g.abbrev());
            for p in C::ALL {
                let _ = write!(s, "{:>11}", self.get(*g, Scored::Class(*p)));
            }
            let _ = writeln!(s, "{:>16}", self.get(*g, Scored::Invalid));
        }
        s
    }
}

pub fn confusion<C: Category>(gold: &[C], pred: &[Scored<C>]) -> Result<ConfusionMatrix<C>, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut m = ConfusionMatrix::empty();
    for (g, p) in gold.iter().zip(pred) {
        m.add(*g, *p);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub scheme: String,
    /// Classes present in gold or predictions, in fixed scheme order.
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub micro_f1: f64,
    pub n: usize,
    pub invalid: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn class_report<C: Category>(m: &ConfusionMatrix<C>) -> ClassReport {
    let n = m.total();
    let classes: Vec<ClassMetrics> = C::ALL
        .iter()
        .filter(|c| m.support(**c) > 0 || m.predicted(**c) > 0)
        .map(|&c| {
            let tp = m.true_positives(c);
            let precision = ratio(tp, m.predicted(c));
            let recall = ratio(tp, m.support(c));
            ClassMetrics {
                class: c.abbrev().to_string(),
                precision,
                recall,
                f1: harmonic(precision, recall),
                support: m.support(c),
            }
        })
        .collect();

    let k = classes.len().max(1) as f64;
    let macro_avg = Averages {
        precision: classes.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: classes.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: classes.iter().map(|c| c.f1).sum::<f64>() / k,
    };
    let total_support: usize = classes.iter().map(|c| c.support).sum();
    let w = |f: fn(&ClassMetrics) -> f64| {
        if total_support == 0 {
            0.0
        } else {
            classes.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total_support as f64
        }
    };
    let weighted_avg = Averages {
        precision: w(|c| c.precision),
        recall: w(|c| c.recall),
        f1: w(|c| c.f1),
    };
    let accuracy = ratio(m.correct(), n);
    // Global counts, with the invalid column treated as one more predicted
    // label so that its entries are false positives somewhere.
    let tp_all = m.correct();
    let fp_all = C::ALL
        .iter()
        .map(|c| m.predicted(*c) - m.true_positives(*c))
        .sum::<usize>()
        + m.invalid();
    let fn_all: usize = C::ALL.iter().map(|c| m.support(*c) - m.true_positives(*c)).sum();
    let micro_f1 = harmonic(ratio(tp_all, tp_all + fp_all), ratio(tp_all, tp_all + fn_all));

    ClassReport {
        scheme: C::SCHEME.to_string(),
        classes,
        accuracy,
        macro_avg,
        weighted_avg,
        micro_f1,
        n,
        invalid: m.invalid(),
    }
}

impl ClassReport {
    pub fn class(&self, name: &str) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class == name)
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.class.clone()).collect()
    }

    /// Text table with four decimal places.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14}{:>10}{:>10}{:>10}{:>10}",
            "Class", "Precision", "Recall", "F1-score", "Support"
        );
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<14}{:>10.4}{:>10.4}{:>10.4}{:>10}",
                c.class, c.precision, c.recall, c.f1, c.support
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14}{:>30.4}{:>10}", "accuracy", self.accuracy, self.n);
        for (name, a) in [("macro avg", self.macro_avg), ("weighted avg", self.weighted_avg)] {
            let _ = writeln!(
                s,
                "{:<14}{:>10.4}{:>10.4}{:>10.4}{:>10}",
                name, a.precision, a.recall, a.f1, self.n
            );
        }
        let _ = writeln!(s, "{:<14}{:>30.4}{:>10}", "micro F1", self.micro_f1, self.n);
        if self.invalid > 0 {
            let _ = writeln!(s, "{:<14}{:>40}", SYSTEM_INVALID, self.invalid);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SdKind {
    /// Divide by k.
    #[default]
    Population,
    /// Divide by k - 1.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

pub fn mean_sd(values: &[f64], kind: SdKind) -> MeanSd {
    let k = values.len();
    assert!(k > 0, "mean of nothing");
    let mean = values.iter().sum::<f64>() / k as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let den = match kind {
        SdKind::Population => k as f64,
        SdKind::Sample => (k - 1) as f64,
    };
    let sd = if k == 1 { 0.0 } else { (ss / den).sqrt() };
    MeanSd { mean, sd }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub k: usize,
    pub sd_kind: SdKind,
    pub accuracy: MeanSd,
    pub micro_f1: MeanSd,
    pub macro_f1: MeanSd,
    pub weighted_f1: MeanSd,
    pub per_class_f1: Vec<(String, MeanSd)>,
}

pub fn aggregate_runs(reports: &[ClassReport], sd_kind: SdKind) -> Result<RunAggregate, MetricsError> {
    let first = reports.first().ok_or(MetricsError::Empty)?;
    let expected: Vec<String> = std::iter::once(first.scheme.clone())
        .chain(first.class_names())
        .collect();
    for (run, r) in reports.iter().enumerate() {
        let found: Vec<String> = std::iter::once(r.scheme.clone())
            .chain(r.class_names())
            .collect();
        if found != expected {
            return Err(MetricsError::ClassMismatch {
                run,
                expected,
                found,
            });
        }
    }
    let agg = |f: &dyn Fn(&ClassReport) -> f64| {
        mean_sd(&reports.iter().map(f).collect::<Vec<_>>(), sd_kind)
    };
    let per_class_f1 = first
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.class.clone(), agg(&|r| r.classes[i].f1)))
        .collect();
    Ok(RunAggregate {
        k: reports.len(),
        sd_kind,
        accuracy: agg(&|r| r.accuracy),
        micro_f1: agg(&|r| r.micro_f1),
        macro_f1: agg(&|r| r.macro_avg.f1),
        weighted_f1: agg(&|r| r.weighted_avg.f1),
        per_class_f1,
    })
}

impl RunAggregate {
    pub fn render(&self) -> String {
        let mut s = format!("runs: {} ({:?} SD)\n", self.k, self.sd_kind);
        for (name, m) in [
            ("accuracy", self.accuracy),
            ("micro F1", self.micro_f1),
            ("macro F1", self.macro_f1),
            ("weighted F1", self.weighted_f1),
        ] {
            let _ = writeln!(s, "{:<14}{:>10.4} ± {:.4}", name, m.mean, m.sd);
        }
        for (name, m) in &self.per_class_f1 {
            let _ = writeln!(s, "  F1 {:<11}{:>10.4} ± {:.4}", name, m.mean, m.sd);
        }
        s
    }
}

/// Support per class under both schemes; every class appears, even with
/// zero support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distribution {
    pub purist: Vec<(PuristClass, usize)>,
    pub pragmatic: Vec<(PragmaticClass, usize)>,
}

pub fn distribution(labels: &[PuristClass]) -> Distribution {
    let mut purist: Vec<(PuristClass, usize)> = PuristClass::ALL.iter().map(|c| (*c, 0)).collect();
    let mut pragmatic: Vec<(PragmaticClass, usize)> =
        PragmaticClass::ALL.iter().map(|c| (*c, 0)).collect();
    for l in labels {
        purist[l.index()].1 += 1;
        pragmatic[coarsen(*l).index()].1 += 1;
    }
    Distribution { purist, pragmatic }
}

impl Distribution {
    pub fn total(&self) -> usize {
        self.purist.iter().map(|(_, n)| n).sum()
    }

    pub fn render(&self, column: &str) -> String {
        render_distributions(&[(column, self)])
    }
}

/// Side-by-side support table, one column per dataset.
pub fn render_distributions(columns: &[(&str, &Distribution)]) -> String {
    let mut s = format!("{:<14}", "Class");
    for (name, _) in columns {
        let _ = write!(s, "{:>16}", name);
    }
    s.push('\n');
    for (i, c) in PuristClass::ALL.iter().enumerate() {
        let _ = write!(s, "{:<14}", c.abbrev());
        for (_, d) in columns {
            let _ = write!(s, "{:>16}", d.purist[i].1);
        }
        s.push('\n');
    }
    s.push_str(&"-".repeat(14 + 16 * columns.len()));
    s.push('\n');
    for (i, c) in PragmaticClass::ALL.iter().enumerate() {
        let _ = write!(s, "{:<14}", c.abbrev());
        for (_, d) in columns {
            let _ = write!(s, "{:>16}", d.pragmatic[i].1);
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use PragmaticClass as P;

    #[test]
    fn confusion_counts() {
        let m = confusion(&[P::Unk, P::Ns], &[P::Unk.into(), P::Unk.into()]).unwrap();
        assert_eq!(m.get(P::Unk, Scored::Class(P::Unk)), 1);
        assert_eq!(m.get(P::Ns, Scored::Class(P::Unk)), 1);
        assert_eq!(m.total(), 2);
        assert_eq!(
            confusion(&[P::Unk], &[]),
            Err(MetricsError::LengthMismatch { gold: 1, pred: 0 })
        );
        assert_eq!(confusion::<P>(&[], &[]), Err(MetricsError::Empty));
    }

    #[test]
    fn diagonal_is_perfect() {
        let gold = [P::Unk, P::Ns, P::Frequent, P::Infrequent, P::Unk];
        let pred: Vec<_> = gold.iter().map(|g| Scored::Class(*g)).collect();
        let m = confusion(&gold, &pred).unwrap();
        for g in P::ALL {
            for p in P::ALL {
                if g != p {
                    assert_eq!(m.get(*g, Scored::Class(*p)), 0);
                }
            }
        }
        let r = class_report(&m);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.micro_f1, 1.0);
        assert_eq!(r.macro_avg, Averages { precision: 1.0, recall: 1.0, f1: 1.0 });
        assert_eq!(r.weighted_avg, Averages { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    #[test]
    fn f1_from_precision_recall() {
        assert!((harmonic(0.9156, 0.8650) - 0.8896).abs() < 5e-5);
    }

    #[test]
    fn macro_and_weighted_from_published_rows() {
        let f1 = [0.6667, 0.8725, 0.8896, 0.7647];
        let support = [32.0, 72.0, 163.0, 33.0];
        let macro_f1 = f1.iter().sum::<f64>() / 4.0;
        assert!((macro_f1 - 0.7984).abs() < 5e-5);
        let weighted: f64 = f1.iter().zip(support).map(|(f, s)| f * s).sum::<f64>() / 300.0;
        assert!((weighted - 0.8480).abs() < 5e-5);
    }

    #[test]
    fn invalid_predictions_are_misses() {
        let gold = [P::Unk, P::Unk, P::Ns, P::Ns];
        let pred = [Scored::Class(P::Unk), Scored::Invalid, Scored::Class(P::Ns), Scored::Invalid];
        let r = class_report(&confusion(&gold, &pred).unwrap());
        assert_eq!(r.n, 4);
        assert_eq!(r.invalid, 2);
        assert_eq!(r.accuracy, 0.5);
        let unk = r.class("UNK").unwrap();
        assert_eq!((unk.precision, unk.recall), (1.0, 0.5));
    }

    #[test]
    fn zero_denominators_are_zero() {
        let gold = [P::Unk, P::Ns];
        let pred = [Scored::Class(P::Ns), Scored::Class(P::Ns)];
        let r = class_report(&confusion(&gold, &pred).unwrap());
        let unk = r.class("UNK").unwrap();
        assert_eq!((unk.precision, unk.recall, unk.f1), (0.0, 0.0, 0.0));
        assert!(r.class("frequent").is_none());
    }

    #[test]
    fn single_class_macro_equals_class() {
        let r = class_report(&confusion(&[P::Ns, P::Ns], &[P::Ns.into(), Scored::Invalid]).unwrap());
        let ns = &r.classes[0];
        assert_eq!(r.classes.len(), 1);
        assert_eq!(r.macro_avg.f1, ns.f1);
        assert_eq!(r.macro_avg.recall, ns.recall);
    }

    #[test]
    fn aggregation() {
        let base = class_report(&confusion(&[P::Ns, P::Unk], &[P::Ns.into(), P::Unk.into()]).unwrap());
        let agg = aggregate_runs(std::slice::from_ref(&base), SdKind::Population).unwrap();
        assert_eq!(agg.micro_f1.sd, 0.0);
        assert_eq!(agg.k, 1);

        let m = mean_sd(&[0.75, 0.77, 0.76, 0.76], SdKind::Population);
        assert!((m.mean - 0.76).abs() < 1e-12);
        // sqrt((0.01^2 + 0.01^2) / 4)
        assert!((m.sd - 0.005f64.sqrt() / 10.0).abs() < 1e-12);
        assert!((m.sd - 0.0071).abs() < 5e-5);
        let s = mean_sd(&[0.75, 0.77, 0.76, 0.76], SdKind::Sample);
        assert!((s.sd - (0.0002f64 / 3.0).sqrt()).abs() < 1e-12);

        let other = class_report(&confusion(&[P::Frequent], &[P::Frequent.into()]).unwrap());
        assert!(matches!(
            aggregate_runs(&[base, other], SdKind::Population),
            Err(MetricsError::ClassMismatch { run: 1, .. })
        ));
        assert_eq!(aggregate_runs(&[], SdKind::Population), Err(MetricsError::Empty));
    }

    #[test]
    fn distribution_keeps_empty_classes() {
        let d = distribution(&[PuristClass::Unk, PuristClass::Eq1PerM]);
        assert_eq!(d.purist.len(), 10);
        assert_eq!(d.purist[0], (PuristClass::Lt1Per6M, 0));
        assert_eq!(d.pragmatic, vec![(P::Infrequent, 1), (P::Frequent, 0), (P::Unk, 1), (P::Ns, 0)]);
        assert!(d.render("x").contains("≥1/D"));
    }

    #[test]
    fn report_layout() {
        let r = class_report(&confusion(&[P::Ns, P::Unk], &[P::Ns.into(), P::Unk.into()]).unwrap());
        let text = r.render();
        assert!(text.contains(&format!("accuracy{}1.0000{}2", " ".repeat(30), " ".repeat(9))));
        assert!(text.contains("NS                1.0000    1.0000    1.0000         1"));
    }
}
