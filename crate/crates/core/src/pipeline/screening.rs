use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{bounded_map, with_retry, ClientError, CotExemplar, RetryPolicy, TeacherClient};
use crate::codec::check_evidence;
use crate::label::{parse_label, FrequencyLabel};

/// A finished letter with its ground-truth label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LetterRecord {
    pub id: String,
    pub letter: String,
    pub label: FrequencyLabel,
    pub template_id: String,
    pub base_letter_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    /// Parsed prediction, or `None` when the output was outside the grammar.
    pub predicted: Option<FrequencyLabel>,
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    pub matched: bool,
    pub used_exemplar: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalStatus {
    Retained,
    Discarded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub record_id: String,
    /// An exemplar applied to this record's template.
    pub with_analysis: bool,
    pub passes: Vec<PassRecord>,
    pub status: FinalStatus,
}

/// Outcome plus the record, carrying the matching pass's analysis and
/// grounded evidence when retained.
#[derive(Debug, Clone, PartialEq)]
pub struct Verified {
    pub outcome: VerificationOutcome,
    pub record: LetterRecord,
}

/// Infer up to `max_passes` times. Pass 1 never sees the exemplar; later
/// passes do when one is given. Stops at the first canonical match.
pub fn verify_letter(
    client: &dyn TeacherClient,
    record: &LetterRecord,
    exemplar: Option<&CotExemplar>,
    max_passes: u32,
    retry: &RetryPolicy,
) -> Result<Verified, ClientError> {
    let gold = record.label.canonical();
    let mut passes = Vec::new();
    let mut out = record.clone();
    for pass in 1..=max_passes.max(1) {
        let ex = if pass == 1 { None } else { exemplar };
        let inf = with_retry(retry, || client.infer(&record.letter, ex))?;
        let (predicted, parse_error) = match parse_label(&inf.label_text) {
            Ok(l) => (Some(l), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let matched = predicted.as_ref().is_some_and(|l| l.canonical() == gold);
        passes.push(PassRecord {
            predicted,
            raw: inf.label_text,
            parse_error,
            matched,
            used_exemplar: ex.is_some(),
        });
        if matched {
            let grounded: Vec<String> = inf
                .evidence
                .into_iter()
                .filter(|s| check_evidence(&record.letter, s).found)
                .collect();
            out.analysis = Some(inf.analysis).filter(|a| !a.trim().is_empty());
            out.evidence = Some(grounded).filter(|v| !v.is_empty());
            break;
        }
    }
    let status = if passes.last().is_some_and(|p| p.matched) {
        FinalStatus::Retained
    } else {
        FinalStatus::Discarded
    };
    Ok(Verified {
        outcome: VerificationOutcome {
            record_id: record.id.clone(),
            with_analysis: exemplar.is_some(),
            passes,
            status,
        },
        record: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreeningConfig {
    pub max_passes_with_exemplar: u32,
    pub max_passes_without: u32,
    pub concurrency: usize,
    #[serde(skip)]
    pub retry: RetryPolicy,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig {
            max_passes_with_exemplar: 3,
            max_passes_without: 2,
            concurrency: 8,
            retry: RetryPolicy::default(),
        }
    }
}

/// Discards for one row of the screening table.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupStats {
    pub candidates: usize,
    /// Entry `k` counts records that failed pass `k + 1`. One entry per
    /// configured pass.
    pub discarded_per_pass: Vec<usize>,
}

impl GroupStats {
    fn new(max_passes: u32) -> Self {
        GroupStats {
            candidates: 0,
            discarded_per_pass: vec![0; max_passes.max(1) as usize],
        }
    }

    fn add(&mut self, o: &VerificationOutcome) {
        self.candidates += 1;
        for (k, p) in o.passes.iter().enumerate() {
            if !p.matched {
                if k >= self.discarded_per_pass.len() {
                    self.discarded_per_pass.resize(k + 1, 0);
                }
                self.discarded_per_pass[k] += 1;
            }
        }
    }

    /// Records that failed every pass.
    pub fn final_discards(&self) -> usize {
        self.discarded_per_pass.last().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningStats {
    pub total_candidates: usize,
    pub with_analysis: GroupStats,
    pub without_analysis: GroupStats,
    pub retained: usize,
}

impl ScreeningStats {
    pub fn from_outcomes(outcomes: &[VerificationOutcome], max_with: u32, max_without: u32) -> Self {
        let mut with = GroupStats::new(max_with);
        let mut without = GroupStats::new(max_without);
        for o in outcomes {
            if o.with_analysis {
                with.add(o)
            } else {
                without.add(o)
            }
        }
        let retained = outcomes.iter().filter(|o| o.status == FinalStatus::Retained).count();
        ScreeningStats {
            total_candidates: outcomes.len(),
            with_analysis: with,
            without_analysis: without,
            retained,
        }
    }

    /// Rows with at least one candidate.
    fn rows(&self) -> Vec<(&'static str, &GroupStats)> {
        [("with analysis", &self.with_analysis), ("without analysis", &self.without_analysis)]
            .into_iter()
            .filter(|(_, g)| g.candidates > 0)
            .collect()
    }

    fn columns(&self) -> usize {
        self.rows()
            .iter()
            .map(|(_, g)| g.discarded_per_pass.len())
            .max()
            .unwrap_or(1)
    }

    fn cells(&self) -> Vec<(&'static str, Vec<String>)> {
        let n = self.columns();
        self.rows()
            .into_iter()
            .map(|(name, g)| {
                let cells = (0..n)
                    .map(|k| g.discarded_per_pass.get(k).map_or("--".to_string(), |v| v.to_string()))
                    .collect();
                (name, cells)
            })
            .collect()
    }

    /// Booktabs tabular of discards per pass.
    pub fn render_latex(&self) -> String {
        let n = self.columns();
        let mut s = format!("\\begin{{tabular}}{{l{}}}\n\\toprule\n", "c".repeat(n));
        s.push_str("Method");
        for k in 1..=n {
            let _ = write!(s, " & Pass {k}");
        }
        s.push_str(" \\\\\n\\midrule\n");
        for (name, cells) in self.cells() {
            let _ = writeln!(s, "{name:<16} & {} \\\\", cells.join(" & "));
        }
        s.push_str("\\bottomrule\n\\end{tabular}\n");
        s
    }

    pub fn render_text(&self) -> String {
        let n = self.columns();
        let mut s = format!("{:<16}", "Method");
        for k in 1..=n {
            let _ = write!(s, "  {:>6}", format!("Pass {k}"));
        }
        s.push('\n');
        for (name, cells) in self.cells() {
            let _ = write!(s, "{name:<16}");
            for c in cells {
                let _ = write!(s, "  {c:>6}");
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "candidates {}  retained {}  discarded {}",
            self.total_candidates,
            self.retained,
            self.total_candidates - self.retained
        );
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordFailure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningResult {
    pub retained: Vec<LetterRecord>,
    pub outcomes: Vec<VerificationOutcome>,
    pub stats: ScreeningStats,
    /// Records whose client calls failed; not counted as candidates.
    pub failures: Vec<RecordFailure>,
}

/// Verify every record. The first exemplar that applies to a record's
/// template is used on retries. Outputs are sorted by record id.
pub fn run_screening(
    client: &dyn TeacherClient,
    records: &[LetterRecord],
    exemplars: &[CotExemplar],
    config: &ScreeningConfig,
) -> ScreeningResult {
    let results = bounded_map(records, config.concurrency, |r| {
        let ex = exemplars.iter().find(|e| e.applies_to(&r.template_id));
        let max = if ex.is_some() {
            config.max_passes_with_exemplar
        } else {
            config.max_passes_without
        };
        (r, verify_letter(client, r, ex, max, &config.retry))
    });
    let mut retained = Vec::new();
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (r, v) in results {
        match v {
            Ok(v) => {
                if v.outcome.status == FinalStatus::Retained {
                    retained.push(v.record);
                }
                outcomes.push(v.outcome);
            }
            Err(e) => failures.push(RecordFailure {
                id: r.id.clone(),
                error: e.to_string(),
            }),
        }
    }
    retained.sort_by(|a, b| a.id.cmp(&b.id));
    outcomes.sort_by(|a, b| a.record_id.cmp(&b.record_id));
    failures.sort_by(|a, b| a.id.cmp(&b.id));
    let stats = ScreeningStats::from_outcomes(
        &outcomes,
        config.max_passes_with_exemplar,
        config.max_passes_without,
    );
    ScreeningResult {
        retained,
        outcomes,
        stats,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{InferScript, ScriptedClient};

    fn record(id: &str, label: &str) -> LetterRecord {
        LetterRecord {
            id: id.into(),
            letter: format!("Dear Dr X,\n\nSeizure history: letter {id}, {label}.\n"),
            label: parse_label(label).unwrap(),
            template_id: "t1".into(),
            base_letter_id: "b1".into(),
            analysis: None,
            evidence: None,
        }
    }

    fn exemplar() -> CotExemplar {
        CotExemplar {
            id: "ex".into(),
            applicable_template_ids: vec!["t1".into()],
            exemplar_text: "Count the events per week.".into(),
        }
    }

    fn client_for(records: &[LetterRecord], script: InferScript) -> ScriptedClient {
        let mut c = ScriptedClient::all_correct();
        for r in records {
            c.add_answer(r.letter.clone(), r.label.clone());
            c.add_infer_script(r.letter.clone(), script);
        }
        c
    }

    #[test]
    fn first_pass_match() {
        let r = record("a", "2 per week");
        let c = client_for(std::slice::from_ref(&r), InferScript::Correct);
        let v = verify_letter(&c, &r, Some(&exemplar()), 3, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(v.outcome.status, FinalStatus::Retained);
        assert_eq!(v.outcome.passes.len(), 1);
        assert!(!v.outcome.passes[0].used_exemplar);
        let ev = v.record.evidence.unwrap();
        assert!(ev.iter().all(|s| check_evidence(&r.letter, s).found));
        assert!(v.record.analysis.is_some());
    }

    #[test]
    fn exemplar_rescue() {
        let r = record("a", "3 per month");
        let c = client_for(std::slice::from_ref(&r), InferScript::CorrectWithExemplar);
        let v = verify_letter(&c, &r, Some(&exemplar()), 3, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(v.outcome.status, FinalStatus::Retained);
        assert_eq!(v.outcome.passes.len(), 2);
        assert!(!v.outcome.passes[0].matched);
        assert!(v.outcome.passes[1].used_exemplar);
        assert!(v.record.analysis.unwrap().contains("worked example"));
    }

    #[test]
    fn exhaustion_and_unparseable() {
        let r = record("a", "unknown");
        let c = client_for(std::slice::from_ref(&r), InferScript::NeverCorrect);
        let v = verify_letter(&c, &r, Some(&exemplar()), 3, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(v.outcome.status, FinalStatus::Discarded);
        assert_eq!(v.outcome.passes.len(), 3);
        assert!(v.record.analysis.is_none());

        let c = client_for(std::slice::from_ref(&r), InferScript::Unparseable);
        let v = verify_letter(&c, &r, None, 2, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(v.outcome.status, FinalStatus::Discarded);
        assert!(v.outcome.passes.iter().all(|p| p.predicted.is_none() && p.parse_error.is_some()));
    }

    #[test]
    fn surface_variation_matches() {
        struct Loose;
        impl TeacherClient for Loose {
            fn draft(&self, _: &str, _: &str) -> Result<super::super::Draft, ClientError> {
                unreachable!()
            }
            fn infer(&self, _: &str, _: Option<&CotExemplar>) -> Result<super::super::Inference, ClientError> {
                Ok(super::super::Inference {
                    label_text: "2 per Weeks".into(),
                    ..Default::default()
                })
            }
        }
        let r = record("a", "2 per 1 week");
        let v = verify_letter(&Loose, &r, None, 1, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(v.outcome.status, FinalStatus::Retained);
    }

    #[test]
    fn all_correct_batch() {
        let records: Vec<_> = (0..20).map(|i| record(&format!("r{i:02}"), "1 per month")).collect();
        let c = client_for(&records, InferScript::Correct);
        let out = run_screening(&c, &records, &[exemplar()], &ScreeningConfig::default());
        assert_eq!(out.stats.retained, 20);
        assert_eq!(out.stats.total_candidates, 20);
        assert_eq!(out.stats.with_analysis.discarded_per_pass, vec![0, 0, 0]);
        assert!(out.failures.is_empty());
    }

    #[test]
    fn client_failures_are_collected() {
        let records = vec![record("a", "1 per month"), record("b", "1 per month")];
        let mut c = client_for(&records, InferScript::Correct);
        c.add_infer_script(records[1].letter.clone(), InferScript::FlakyTransport(10));
        let cfg = ScreeningConfig {
            retry: RetryPolicy::immediate(2),
            ..Default::default()
        };
        let out = run_screening(&c, &records, &[], &cfg);
        assert_eq!(out.retained.len(), 1);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].id, "b");
        assert_eq!(out.stats.total_candidates, 1);
    }

    #[test]
    fn single_column_layout() {
        let records = vec![record("a", "1 per month")];
        let c = client_for(&records, InferScript::NeverCorrect);
        let cfg = ScreeningConfig {
            max_passes_without: 1,
            ..Default::default()
        };
        let out = run_screening(&c, &records, &[], &cfg);
        assert_eq!(
            out.stats.render_latex(),
            "\\begin{tabular}{lc}\n\\toprule\nMethod & Pass 1 \\\\\n\\midrule\n\
             without analysis & 1 \\\\\n\\bottomrule\n\\end{tabular}\n"
        );
    }
}
