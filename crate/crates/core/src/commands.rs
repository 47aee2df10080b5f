//! File-level workflows behind the `seizure-freq` subcommands.
//!
//! Each command reads JSONL inputs, runs one pipeline stage and writes
//! JSONL outputs. All outputs are sorted by id, so repeated runs with the
//! same inputs and config produce identical files.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binning::{PragmaticClass, PuristClass};
use crate::codec::{format_cot, to_categories, Categories, OutputFormat, Prediction};
use crate::io::{check_unique, read_jsonl, read_records, write_jsonl, write_text, HasId, IoError};
use crate::label::{normalize, FrequencyLabel, NormConfig, NormalizedFrequency};
use crate::metrics::{class_report, confusion, distribution, render_distributions, ClassReport, ConfusionMatrix, Scored};
use crate::pipeline::mock::MockProfile;
use crate::pipeline::{
    run_generation, run_screening, BaseLetter, ClientError, CotExemplar, DraftRecord, GenerationFailure,
    HttpClientConfig, HttpTeacherClient, IdentityRecord, LetterRecord, RecordFailure, RetryPolicy, ScreeningConfig,
    ScreeningStats, ScriptedClient, TeacherClient, VerificationOutcome,
};
use crate::template::{expand_corpus, fill_placeholders, DescriptionPair, DescriptionTemplate};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Client(#[from] ClientError),
}

impl CommandError {
    /// 1 usage, 2 data, 3 client.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Usage(_) => 1,
            CommandError::Io(_) | CommandError::Data(_) => 2,
            CommandError::Client(_) => 3,
        }
    }
}

/// Which teacher to talk to.
#[derive(Debug, Clone, PartialEq)]
pub enum ClientSpec {
    /// Offline scripted client. For verification its answer key is built
    /// from the letters' gold labels.
    Mock(MockProfile),
    Http(HttpClientConfig),
}

impl ClientSpec {
    fn build(&self, answers: &[LetterRecord]) -> Result<Box<dyn TeacherClient>, CommandError> {
        match self {
            ClientSpec::Mock(profile) => {
                let mut c = ScriptedClient::new(*profile);
                for r in answers {
                    c.add_answer(r.letter.clone(), r.label.clone());
                }
                Ok(Box::new(c))
            }
            ClientSpec::Http(cfg) => Ok(Box::new(HttpTeacherClient::from_config(cfg.clone())?)),
        }
    }

    fn is_mock(&self) -> bool {
        matches!(self, ClientSpec::Mock(_))
    }
}

// ---- expand ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpandReport {
    pub templates: usize,
    pub pairs: usize,
    pub duplicates: usize,
}

pub fn cmd_expand(templates: &Path, out: &Path) -> Result<ExpandReport, CommandError> {
    let ts: Vec<DescriptionTemplate> = read_records(templates)?;
    for (i, t) in ts.iter().enumerate() {
        t.validate()
            .map_err(|e| CommandError::Data(format!("{}: record {}: {e}", templates.display(), i + 1)))?;
    }
    let exp = expand_corpus(&ts).map_err(|e| CommandError::Data(e.to_string()))?;
    write_jsonl(out, &exp.pairs)?;
    Ok(ExpandReport {
        templates: ts.len(),
        pairs: exp.pairs.len(),
        duplicates: exp.duplicates,
    })
}

// ---- generate ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateReport {
    pub drafts: usize,
    pub failures: Vec<GenerationFailure>,
    pub requests: u64,
}

impl GenerateReport {
    /// Every record failed in the client.
    pub fn client_down(&self) -> bool {
        self.drafts == 0 && !self.failures.is_empty() && self.failures.iter().all(|f| f.client)
    }
}

pub struct GenerateArgs<'a> {
    pub bases: &'a Path,
    pub pairs: &'a Path,
    pub out_drafts: &'a Path,
    pub out_identities: &'a Path,
    pub seed: u64,
    pub concurrency: usize,
    pub retry: RetryPolicy,
}

pub fn cmd_generate(args: &GenerateArgs<'_>, client: &ClientSpec) -> Result<GenerateReport, CommandError> {
    let bases: Vec<BaseLetter> = read_records(args.bases)?;
    let pairs: Vec<DescriptionPair> = read_records(args.pairs)?;
    if bases.is_empty() {
        return Err(CommandError::Data(format!("{}: no base letters", args.bases.display())));
    }
    let c = client.build(&[])?;
    let retry = if client.is_mock() { RetryPolicy::immediate(args.retry.max_attempts) } else { args.retry };
    let out = run_generation(c.as_ref(), &bases, &pairs, args.seed, args.concurrency, &retry);
    write_jsonl(args.out_drafts, &out.drafts)?;
    write_jsonl(args.out_identities, &out.identities)?;
    Ok(GenerateReport {
        drafts: out.drafts.len(),
        failures: out.failures,
        requests: c.request_count(),
    })
}

// ---- fill ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FillReport {
    pub letters: usize,
    pub failures: Vec<RecordFailure>,
}

pub fn cmd_fill(drafts: &Path, identities: &Path, out: &Path) -> Result<FillReport, CommandError> {
    let drafts: Vec<DraftRecord> = read_records(drafts)?;
    let ids: Vec<IdentityRecord> = read_records(identities)?;
    let by_id: HashMap<&str, &IdentityRecord> = ids.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut letters = Vec::new();
    let mut failures = Vec::new();
    for d in &drafts {
        let Some(identity) = by_id.get(d.id.as_str()) else {
            failures.push(RecordFailure {
                id: d.id.clone(),
                error: "missing identity".into(),
            });
            continue;
        };
        match fill_placeholders(&d.draft, &identity.identity) {
            Ok(letter) => letters.push(LetterRecord {
                id: d.id.clone(),
                letter,
                label: d.label.clone(),
                template_id: d.template_id.clone(),
                base_letter_id: d.base_letter_id.clone(),
                analysis: None,
                evidence: None,
            }),
            Err(e) => failures.push(RecordFailure {
                id: d.id.clone(),
                error: e.to_string(),
            }),
        }
    }
    letters.sort_by(|a, b| a.id.cmp(&b.id));
    write_jsonl(out, &letters)?;
    Ok(FillReport {
        letters: letters.len(),
        failures,
    })
}

// ---- verify ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub stats: ScreeningStats,
    pub failures: Vec<RecordFailure>,
    pub requests: u64,
    pub table: String,
    pub latex: String,
}

impl VerifyReport {
    pub fn client_down(&self) -> bool {
        self.stats.total_candidates == 0 && !self.failures.is_empty()
    }
}

pub struct VerifyArgs<'a> {
    pub letters: &'a Path,
    pub exemplars: Option<&'a Path>,
    pub out_retained: &'a Path,
    pub out_outcomes: Option<&'a Path>,
    pub out_table: Option<&'a Path>,
    pub screening: ScreeningConfig,
}

pub fn cmd_verify(args: &VerifyArgs<'_>, client: &ClientSpec) -> Result<VerifyReport, CommandError> {
    let letters: Vec<LetterRecord> = read_records(args.letters)?;
    if letters.is_empty() {
        return Err(CommandError::Data(format!("{}: no letters", args.letters.display())));
    }
    let exemplars: Vec<CotExemplar> = match args.exemplars {
        Some(p) => read_records(p)?,
        None => Vec::new(),
    };
    if let Some(e) = exemplars.iter().find(|e| e.exemplar_text.trim().is_empty()) {
        return Err(CommandError::Data(format!("exemplar {:?} has empty text", e.id)));
    }
    let c = client.build(&letters)?;
    let mut cfg = args.screening;
    if client.is_mock() {
        cfg.retry = RetryPolicy::immediate(cfg.retry.max_attempts);
    }
    let out = run_screening(c.as_ref(), &letters, &exemplars, &cfg);
    write_jsonl(args.out_retained, &out.retained)?;
    if let Some(p) = args.out_outcomes {
        write_jsonl::<VerificationOutcome>(p, &out.outcomes)?;
    }
    let latex = out.stats.render_latex();
    if let Some(p) = args.out_table {
        write_text(p, &latex)?;
    }
    Ok(VerifyReport {
        table: out.stats.render_text(),
        latex,
        stats: out.stats,
        failures: out.failures,
        requests: c.request_count(),
    })
}

// ---- evaluate ----

/// Gold annotation: a structured label or a seizures-per-month value.
/// Letter records also deserialize as gold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<FrequencyLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<NormalizedFrequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Vec<String>>,
}

impl GoldRecord {
    fn frequency(&self, cfg: &NormConfig) -> Result<NormalizedFrequency, CommandError> {
        match (&self.label, self.x) {
            (Some(l), _) => Ok(normalize(l, cfg)),
            (None, Some(x)) => Ok(x),
            (None, None) => Err(CommandError::Data(format!("record {:?} has neither label nor x", self.id))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    pub raw: String,
}

impl HasId for GoldRecord {
    fn id(&self) -> &str {
        &self.id
    }
}

impl HasId for PredictionRecord {
    fn id(&self) -> &str {
        &self.id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Purist,
    Pragmatic,
    Both,
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "purist" => Ok(Scheme::Purist),
            "pragmatic" => Ok(Scheme::Pragmatic),
            "both" => Ok(Scheme::Both),
            _ => Err(format!("unknown scheme {s:?}; expected purist, pragmatic or both")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SchemeResult {
    Scored { report: ClassReport, confusion: String },
    /// Four-way categorical output has no ten-way reading.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub invalid: usize,
    pub formats: Vec<OutputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purist: Option<SchemeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pragmatic: Option<SchemeResult>,
}

impl EvaluationReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (name, r) in [("Purist", &self.purist), ("Pragmatic", &self.pragmatic)] {
            match r {
                None => {}
                Some(SchemeResult::NotApplicable) => {
                    let _ = writeln!(s, "{name}: not applicable (-)\n");
                }
                Some(SchemeResult::Scored { report, confusion }) => {
                    let _ = writeln!(s, "{name}\n{}\n{confusion}", report.render());
                }
            }
        }
        s
    }

    pub fn pragmatic_report(&self) -> Option<&ClassReport> {
        match &self.pragmatic {
            Some(SchemeResult::Scored { report, .. }) => Some(report),
            _ => None,
        }
    }

    pub fn purist_report(&self) -> Option<&ClassReport> {
        match &self.purist {
            Some(SchemeResult::Scored { report, .. }) => Some(report),
            _ => None,
        }
    }
}

fn scored<C: crate::binning::Category>(gold: &[C], pred: &[Scored<C>]) -> Result<SchemeResult, CommandError> {
    let m: ConfusionMatrix<C> = confusion(gold, pred).map_err(|e| CommandError::Data(e.to_string()))?;
    Ok(SchemeResult::Scored {
        report: class_report(&m),
        confusion: m.render(),
    })
}

/// Score id-aligned predictions against gold. Unparseable predictions are
/// scored as `SYSTEM_INVALID`.
pub fn evaluate_records(
    gold: &[GoldRecord],
    preds: &[PredictionRecord],
    scheme: Scheme,
    default_format: Option<OutputFormat>,
    cfg: &NormConfig,
) -> Result<EvaluationReport, CommandError> {
    let by_id: HashMap<&str, &PredictionRecord> = preds.iter().map(|p| (p.id.as_str(), p)).collect();
    if let Some(p) = preds.iter().find(|p| !gold.iter().any(|g| g.id == p.id)) {
        return Err(CommandError::Data(format!("prediction {:?} has no gold record", p.id)));
    }
    let mut formats = BTreeSet::new();
    let mut gold_cats = Vec::with_capacity(gold.len());
    let mut pred_cats: Vec<Option<Categories>> = Vec::with_capacity(gold.len());
    for g in gold {
        let p = by_id
            .get(g.id.as_str())
            .ok_or_else(|| CommandError::Data(format!("no prediction for gold record {:?}", g.id)))?;
        let format = p
            .format
            .or(default_format)
            .ok_or_else(|| CommandError::Usage(format!("prediction {:?} declares no format; pass --format", p.id)))?;
        formats.insert(format.as_str());
        gold_cats.push(Categories::of_frequency(g.frequency(cfg)?));
        pred_cats.push(Prediction::parse(format, &p.raw).ok().map(|pr| to_categories(&pr, cfg)));
    }
    let formats: Vec<OutputFormat> = formats.iter().map(|f| f.parse().expect("known format")).collect();
    let invalid = pred_cats.iter().filter(|p| p.is_none()).count();

    let pragmatic = if scheme != Scheme::Purist {
        let g: Vec<PragmaticClass> = gold_cats.iter().map(|c| c.pragmatic).collect();
        let p: Vec<Scored<PragmaticClass>> = pred_cats
            .iter()
            .map(|c| c.map_or(Scored::Invalid, |c| Scored::Class(c.pragmatic)))
            .collect();
        Some(scored(&g, &p)?)
    } else {
        None
    };

    let purist = if scheme != Scheme::Pragmatic {
        let has_f2 = formats.contains(&OutputFormat::Pragmatic);
        if has_f2 && formats.len() == 1 {
            Some(SchemeResult::NotApplicable)
        } else if has_f2 {
            return Err(CommandError::Data(
                "purist scoring cannot mix pragmatic-category predictions with other formats".into(),
            ));
        } else {
            let g: Vec<PuristClass> = gold_cats
                .iter()
                .map(|c| c.purist.expect("gold always has a purist class"))
                .collect();
            let p: Vec<Scored<PuristClass>> = pred_cats
                .iter()
                .map(|c| c.and_then(|c| c.purist).map_or(Scored::Invalid, Scored::Class))
                .collect();
            Some(scored(&g, &p)?)
        }
    } else {
        None
    };

    Ok(EvaluationReport {
        n: gold.len(),
        invalid,
        formats,
        purist,
        pragmatic,
    })
}

pub fn cmd_evaluate(
    gold: &Path,
    predictions: &Path,
    scheme: Scheme,
    default_format: Option<OutputFormat>,
    cfg: &NormConfig,
    out: Option<&Path>,
) -> Result<EvaluationReport, CommandError> {
    let g: Vec<GoldRecord> = read_records(gold)?;
    let p: Vec<PredictionRecord> = read_records(predictions)?;
    if g.is_empty() {
        return Err(CommandError::Data(format!("{}: no gold records", gold.display())));
    }
    let report = evaluate_records(&g, &p, scheme, default_format, cfg)?;
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CommandError::Data(e.to_string()))?;
        write_text(path, &(json + "\n"))?;
    }
    Ok(report)
}

// ---- stats ----

/// Class distribution of one or more label files, one column per file.
pub fn cmd_stats(files: &[PathBuf], cfg: &NormConfig) -> Result<String, CommandError> {
    if files.is_empty() {
        return Err(CommandError::Usage("stats needs at least one labels file".into()));
    }
    let mut columns = Vec::new();
    for f in files {
        let records: Vec<GoldRecord> = read_jsonl(f)?;
        check_unique(f, &records)?;
        let classes = records
            .iter()
            .map(|r| r.frequency(cfg).map(|x| x.purist()))
            .collect::<Result<Vec<_>, _>>()?;
        let name = f
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| f.display().to_string());
        columns.push((name, distribution(&classes)));
    }
    let refs: Vec<(&str, &_)> = columns.iter().map(|(n, d)| (n.as_str(), d)).collect();
    Ok(render_distributions(&refs))
}

// ---- convert ----

/// Render one gold record in `format`.
pub fn render_as(record: &GoldRecord, format: OutputFormat, cfg: &NormConfig) -> Result<String, CommandError> {
    let need_label = || {
        record
            .label
            .as_ref()
            .ok_or_else(|| CommandError::Data(format!("record {:?} has no label to render as {format}", record.id)))
    };
    Ok(match format {
        OutputFormat::XPerMonth => record.frequency(cfg)?.to_string(),
        OutputFormat::Pragmatic => record.frequency(cfg)?.pragmatic().phrase().to_string(),
        OutputFormat::Label => need_label()?.canonical(),
        OutputFormat::Cot => format_cot(
            record.analysis.as_deref().unwrap_or(""),
            need_label()?,
            record.evidence.as_deref().unwrap_or(&[]),
        ),
    })
}

/// Turn labelled records into prediction records in the given output format.
pub fn cmd_convert(input: &Path, format: OutputFormat, cfg: &NormConfig, out: &Path) -> Result<usize, CommandError> {
    let records: Vec<GoldRecord> = read_records(input)?;
    let preds = records
        .iter()
        .map(|r| {
            Ok(PredictionRecord {
                id: r.id.clone(),
                format: Some(format),
                raw: render_as(r, format, cfg)?,
            })
        })
        .collect::<Result<Vec<_>, CommandError>>()?;
    write_jsonl(out, &preds)?;
    Ok(preds.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::parse_label;

    fn gold(id: &str, label: &str) -> GoldRecord {
        GoldRecord {
            id: id.into(),
            label: Some(parse_label(label).unwrap()),
            x: None,
            analysis: None,
            evidence: None,
        }
    }

    fn pred(id: &str, format: OutputFormat, raw: &str) -> PredictionRecord {
        PredictionRecord {
            id: id.into(),
            format: Some(format),
            raw: raw.into(),
        }
    }

    #[test]
    fn identical_predictions_score_one() {
        let cfg = NormConfig::default();
        let g = vec![gold("a", "2 per week"), gold("b", "unknown"), gold("c", "1 per year")];
        for f in [OutputFormat::XPerMonth, OutputFormat::Label, OutputFormat::Cot] {
            let p: Vec<_> = g.iter().map(|r| pred(&r.id, f, &render_as(r, f, &cfg).unwrap())).collect();
            let rep = evaluate_records(&g, &p, Scheme::Both, None, &cfg).unwrap();
            for r in [rep.purist_report().unwrap(), rep.pragmatic_report().unwrap()] {
                assert_eq!(r.accuracy, 1.0);
                assert_eq!(r.macro_avg.f1, 1.0);
            }
        }
    }

    #[test]
    fn categorical_output_is_not_purist_scorable() {
        let cfg = NormConfig::default();
        let g = vec![gold("a", "2 per week")];
        let p = vec![pred("a", OutputFormat::Pragmatic, "frequent seizures")];
        let rep = evaluate_records(&g, &p, Scheme::Both, None, &cfg).unwrap();
        assert_eq!(rep.purist, Some(SchemeResult::NotApplicable));
        assert_eq!(rep.pragmatic_report().unwrap().accuracy, 1.0);
    }

    #[test]
    fn invalid_and_missing() {
        let cfg = NormConfig::default();
        let g = vec![gold("a", "2 per week"), gold("b", "2 per week")];
        let p = vec![pred("a", OutputFormat::Label, "2 per week"), pred("b", OutputFormat::Label, "lots")];
        let rep = evaluate_records(&g, &p, Scheme::Pragmatic, None, &cfg).unwrap();
        assert_eq!(rep.invalid, 1);
        assert_eq!(rep.pragmatic_report().unwrap().accuracy, 0.5);
        assert!(evaluate_records(&g, &p[..1], Scheme::Pragmatic, None, &cfg).is_err());
        let unformatted = vec![
            PredictionRecord { id: "a".into(), format: None, raw: "1".into() },
            PredictionRecord { id: "b".into(), format: None, raw: "1".into() },
        ];
        let e = evaluate_records(&g, &unformatted, Scheme::Pragmatic, None, &cfg).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(evaluate_records(&g, &unformatted, Scheme::Pragmatic, Some(OutputFormat::XPerMonth), &cfg).is_ok());
    }

    #[test]
    fn scheme_parse() {
        assert_eq!("Both".parse::<Scheme>(), Ok(Scheme::Both));
        assert!("fine".parse::<Scheme>().is_err());
    }
}
