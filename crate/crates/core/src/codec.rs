//! Parsers for the four model output formats and evidence grounding.
//!
//! | format | output |
//! |---|---|
//! | `x_per_month` | a bare number of seizures per month |
//! | `pragmatic` | one of four category phrases |
//! | `label` | a structured frequency label |
//! | `cot` | a JSON object with `analysis` and `seizure_frequency_number` |
//!
//! Every format converts to a common [`Categories`] pair for scoring.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::binning::{PragmaticClass, PuristClass};
use crate::label::{normalize, parse_label, DomainError, FrequencyLabel, LabelParseError, NormConfig, NormalizedFrequency};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[serde(alias = "f1", alias = "x")]
    XPerMonth,
    #[serde(alias = "f2", alias = "categ")]
    Pragmatic,
    #[serde(alias = "f3")]
    Label,
    #[serde(alias = "f4")]
    Cot,
}

impl OutputFormat {
    pub const ALL: [OutputFormat; 4] = [
        OutputFormat::XPerMonth,
        OutputFormat::Pragmatic,
        OutputFormat::Label,
        OutputFormat::Cot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::XPerMonth => "x_per_month",
            OutputFormat::Pragmatic => "pragmatic",
            OutputFormat::Label => "label",
            OutputFormat::Cot => "cot",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutputFormat {
    type Err = CodecError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(Value::String(s.trim().to_ascii_lowercase()))
            .map_err(|_| CodecError::Parse(format!("unknown output format {s:?}")))
    }
}

/// Chain-of-thought output: analysis, label and evidence spans.
#[derive(Debug, Clone, PartialEq)]
pub struct CotOutput {
    pub analysis: String,
    pub label: FrequencyLabel,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    XPerMonth(NormalizedFrequency),
    Pragmatic(PragmaticClass),
    Label(FrequencyLabel),
    Cot(CotOutput),
}

/// A parsed model output. The format is implied by the parsed variant.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub raw: String,
    pub parsed: Parsed,
}

impl Prediction {
    pub fn parse(format: OutputFormat, raw: &str) -> Result<Prediction, CodecError> {
        let parsed = match format {
            OutputFormat::XPerMonth => Parsed::XPerMonth(parse_format1(raw)?),
            OutputFormat::Pragmatic => Parsed::Pragmatic(parse_format2(raw)?),
            OutputFormat::Label => Parsed::Label(parse_format3(raw)?),
            OutputFormat::Cot => Parsed::Cot(parse_format4(raw)?),
        };
        Ok(Prediction {
            raw: raw.to_string(),
            parsed,
        })
    }

    pub fn format(&self) -> OutputFormat {
        match self.parsed {
            Parsed::XPerMonth(_) => OutputFormat::XPerMonth,
            Parsed::Pragmatic(_) => OutputFormat::Pragmatic,
            Parsed::Label(_) => OutputFormat::Label,
            Parsed::Cot(_) => OutputFormat::Cot,
        }
    }

    /// The structured label, for formats that carry one.
    pub fn label(&self) -> Option<&FrequencyLabel> {
        match &self.parsed {
            Parsed::Label(l) => Some(l),
            Parsed::Cot(c) => Some(&c.label),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Label(#[from] LabelParseError),
}

pub fn parse_format1(text: &str) -> Result<NormalizedFrequency, CodecError> {
    let t = text.trim();
    let body = t.strip_prefix(['-', '+']).unwrap_or(t);
    let well_formed = !body.is_empty()
        && body.chars().all(|c| c.is_ascii_digit() || c == '.')
        && body.chars().filter(|c| *c == '.').count() <= 1
        && body.chars().any(|c| c.is_ascii_digit());
    if !well_formed {
        return Err(CodecError::Parse(format!(
            "expected a single number of seizures per month, got {text:?}"
        )));
    }
    let x: f64 = t
        .parse()
        .map_err(|e| CodecError::Parse(format!("{text:?}: {e}")))?;
    Ok(NormalizedFrequency::new(x)?)
}

const FORMAT2_PHRASES: [(&str, PragmaticClass); 4] = [
    ("frequent", PragmaticClass::Frequent),
    ("infrequent", PragmaticClass::Infrequent),
    ("unknown", PragmaticClass::Unk),
    ("no", PragmaticClass::Ns),
];

pub fn parse_format2(text: &str) -> Result<PragmaticClass, CodecError> {
    let norm = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let norm = norm.trim_end_matches('.');
    let head = norm.strip_suffix(" seizures").unwrap_or(norm);
    FORMAT2_PHRASES
        .iter()
        .find(|(p, _)| *p == head)
        .map(|(_, c)| *c)
        .ok_or_else(|| {
            CodecError::Parse(format!(
                "{text:?} is not one of: frequent seizures, infrequent seizures, unknown, no seizures"
            ))
        })
}

pub fn parse_format3(text: &str) -> Result<FrequencyLabel, CodecError> {
    Ok(parse_label(text.trim())?)
}

/// Drop a surrounding Markdown code fence, if present.
fn strip_code_fence(s: &str) -> &str {
    let t = s.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let rest = rest.split_once('\n').map(|(_, body)| body).unwrap_or("");
    rest.trim_end().strip_suffix("```").unwrap_or(rest).trim()
}

/// Every balanced `{...}` span in `s`, in order of their opening brace,
/// ignoring braces inside JSON strings.
fn balanced_objects(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut start = 0;
    while let Some(off) = s[start..].find('{') {
        let open = start + off;
        let mut depth = 0usize;
        let mut in_str = false;
        let mut esc = false;
        let mut end = None;
        for (i, &b) in bytes.iter().enumerate().skip(open) {
            if in_str {
                match b {
                    _ if esc => esc = false,
                    b'\\' => esc = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        match end {
            Some(e) => {
                out.push(&s[open..=e]);
                start = e + 1;
            }
            None => start = open + 1,
        }
    }
    out
}

/// First JSON object in `text`, tolerating code fences and surrounding prose.
pub fn extract_json_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    let body = strip_code_fence(text);
    if let Ok(Value::Object(m)) = serde_json::from_str(body) {
        return Some(m);
    }
    balanced_objects(body)
        .into_iter()
        .find_map(|cand| match serde_json::from_str(cand) {
            Ok(Value::Object(m)) => Some(m),
            _ => None,
        })
}

/// Analysis, label text and evidence from a chain-of-thought object,
/// without parsing the label.
pub fn parse_cot_fields(text: &str) -> Result<(String, String, Vec<String>), CodecError> {
    let obj = extract_json_object(text)
        .ok_or_else(|| CodecError::Parse("no JSON object found".into()))?;
    let analysis = match obj.get("analysis") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(CodecError::Parse("\"analysis\" must be a string".into())),
        None => return Err(CodecError::Parse("missing field \"analysis\"".into())),
    };
    let arr = match obj.get("seizure_frequency_number") {
        Some(Value::Array(a)) => a,
        Some(_) => {
            return Err(CodecError::Parse(
                "\"seizure_frequency_number\" must be an array".into(),
            ))
        }
        None => {
            return Err(CodecError::Parse(
                "missing field \"seizure_frequency_number\"".into(),
            ))
        }
    };
    let mut strings = Vec::with_capacity(arr.len());
    for v in arr {
        match v {
            Value::String(s) => strings.push(s.clone()),
            _ => {
                return Err(CodecError::Parse(
                    "\"seizure_frequency_number\" entries must be strings".into(),
                ))
            }
        }
    }
    if strings.is_empty() {
        return Err(CodecError::Parse(
            "\"seizure_frequency_number\" must start with a label".into(),
        ));
    }
    let label = strings.remove(0);
    Ok((analysis, label, strings))
}

pub fn parse_format4(text: &str) -> Result<CotOutput, CodecError> {
    let (analysis, label_text, evidence) = parse_cot_fields(text)?;
    let label = parse_label(label_text.trim())?;
    Ok(CotOutput {
        analysis,
        label,
        evidence,
    })
}

/// Render a chain-of-thought object in the canonical key layout.
pub fn format_cot(analysis: &str, label: &FrequencyLabel, evidence: &[String]) -> String {
    let mut arr = vec![Value::String(label.to_string())];
    arr.extend(evidence.iter().cloned().map(Value::String));
    let mut obj = serde_json::Map::new();
    obj.insert("analysis".into(), Value::String(analysis.to_string()));
    obj.insert("seizure_frequency_number".into(), Value::Array(arr));
    Value::Object(obj).to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchKind {
    Exact,
    WhitespaceNormalized,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceCheck {
    pub span: String,
    pub found: bool,
    pub match_kind: MatchKind,
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Is `span` copied from `letter`, verbatim or up to whitespace runs?
/// Blank spans never match.
pub fn check_evidence(letter: &str, span: &str) -> EvidenceCheck {
    let match_kind = if span.trim().is_empty() {
        MatchKind::None
    } else if letter.contains(span) {
        MatchKind::Exact
    } else if collapse_ws(letter).contains(&collapse_ws(span)) {
        MatchKind::WhitespaceNormalized
    } else {
        MatchKind::None
    };
    EvidenceCheck {
        span: span.to_string(),
        found: match_kind != MatchKind::None,
        match_kind,
    }
}

/// Scoring categories. `purist` is `None` for four-way categorical output,
/// which cannot be scored under the ten-way scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Categories {
    pub purist: Option<PuristClass>,
    pub pragmatic: PragmaticClass,
}

impl Categories {
    pub fn of_frequency(x: NormalizedFrequency) -> Categories {
        Categories {
            purist: Some(x.purist()),
            pragmatic: x.pragmatic(),
        }
    }
}

pub fn to_categories(p: &Prediction, cfg: &NormConfig) -> Categories {
    match &p.parsed {
        Parsed::XPerMonth(x) => Categories::of_frequency(*x),
        Parsed::Pragmatic(c) => Categories {
            purist: None,
            pragmatic: *c,
        },
        Parsed::Label(l) => Categories::of_frequency(normalize(l, cfg)),
        Parsed::Cot(c) => Categories::of_frequency(normalize(&c.label, cfg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{Quantity, TimeUnit};

    pub(crate) const WORKED_EXAMPLE: &str = r#"{"analysis": "The letter explicitly states: 'He continues to experience four to five seizures a month on average ...'. This provides a clear numeric range for current seizure frequency with no conflicting statement. Therefore the normalised label is '4 to 5 per month'.", "seizure_frequency_number": ["4 to 5 per month", "He continues to experience four to five seizures a month on average ..."]}"#;

    fn four_to_five() -> FrequencyLabel {
        FrequencyLabel::Rate {
            count: Quantity::Range { lo: 4.0, hi: 5.0 },
            per: Quantity::Exact(1.0),
            unit: TimeUnit::Month,
        }
    }

    #[test]
    fn format1() {
        assert_eq!(parse_format1("4").unwrap().value(), 4.0);
        assert_eq!(parse_format1(" 0.083\n").unwrap().value(), 0.083);
        assert!(parse_format1("1000").unwrap().is_unknown());
        assert!(matches!(parse_format1("12 per month"), Err(CodecError::Parse(_))));
        assert!(matches!(parse_format1("999.5"), Err(CodecError::Domain(_))));
        assert!(matches!(parse_format1("-2"), Err(CodecError::Domain(_))));
        assert!(matches!(parse_format1("1e3"), Err(CodecError::Parse(_))));
        assert!(matches!(parse_format1(""), Err(CodecError::Parse(_))));
    }

    #[test]
    fn format2() {
        assert_eq!(parse_format2("frequent seizures").unwrap(), PragmaticClass::Frequent);
        assert_eq!(parse_format2("No Seizures").unwrap(), PragmaticClass::Ns);
        assert_eq!(parse_format2("infrequent").unwrap(), PragmaticClass::Infrequent);
        assert_eq!(parse_format2(" unknown\n").unwrap(), PragmaticClass::Unk);
        let err = parse_format2("rare seizures").unwrap_err().to_string();
        assert!(err.contains("infrequent seizures"));
    }

    #[test]
    fn format3() {
        assert_eq!(parse_format3("4 to 5 per month").unwrap(), four_to_five());
        assert_eq!(parse_format3("unknown").unwrap(), FrequencyLabel::Unknown);
        assert!(matches!(parse_format3("five-ish monthly"), Err(CodecError::Label(_))));
    }

    #[test]
    fn format4_worked_example() {
        let out = parse_format4(WORKED_EXAMPLE).unwrap();
        assert_eq!(out.label, four_to_five());
        assert!(out.analysis.starts_with("The letter explicitly states"));
        assert_eq!(
            out.evidence,
            vec!["He continues to experience four to five seizures a month on average ..."]
        );
        let fenced = format!("Here you go:\n```json\n{WORKED_EXAMPLE}\n```\n");
        assert_eq!(parse_format4(&fenced).unwrap(), out);
        let prose = format!("Sure. {WORKED_EXAMPLE} Hope that helps {{not json}}");
        assert_eq!(parse_format4(&prose).unwrap(), out);
    }

    #[test]
    fn format4_errors() {
        let missing = r#"{"seizure_frequency_number": ["unknown"]}"#;
        assert!(matches!(parse_format4(missing), Err(CodecError::Parse(_))));
        assert!(matches!(parse_format4("no object"), Err(CodecError::Parse(_))));
        let bad_label = r#"{"analysis": "x", "seizure_frequency_number": ["often"]}"#;
        assert!(matches!(parse_format4(bad_label), Err(CodecError::Label(_))));
        let no_evidence = r#"{"analysis": "x", "seizure_frequency_number": ["unknown"]}"#;
        assert!(parse_format4(no_evidence).unwrap().evidence.is_empty());
        let braces_in_strings = r#"junk {"analysis": "a } b {", "seizure_frequency_number": ["unknown", "c"]}"#;
        assert_eq!(parse_format4(braces_in_strings).unwrap().evidence, vec!["c"]);
    }

    #[test]
    fn cot_round_trip() {
        let ev = vec!["span one".to_string(), "span two".to_string()];
        let text = format_cot("because", &four_to_five(), &ev);
        let out = parse_format4(&text).unwrap();
        assert_eq!(out.label, four_to_five());
        assert_eq!(out.evidence, ev);
    }

    #[test]
    fn evidence_checks() {
        let letter = "Dear Dr X,\nHe continues to experience four to five\nseizures a month on average.";
        let c = check_evidence(letter, "Dear Dr X,");
        assert_eq!((c.found, c.match_kind), (true, MatchKind::Exact));
        let c = check_evidence(letter, "four to five seizures a month");
        assert_eq!((c.found, c.match_kind), (true, MatchKind::WhitespaceNormalized));
        let c = check_evidence(letter, "He is seizure free");
        assert_eq!((c.found, c.match_kind), (false, MatchKind::None));
        assert!(!check_evidence(letter, "  ").found);
    }

    #[test]
    fn categories() {
        let cfg = NormConfig::default();
        let p = Prediction::parse(OutputFormat::Label, "4 to 5 per month").unwrap();
        assert_eq!(
            to_categories(&p, &cfg),
            Categories {
                purist: Some(PuristClass::Eq1PerW),
                pragmatic: PragmaticClass::Frequent
            }
        );
        let p = Prediction::parse(OutputFormat::Pragmatic, "unknown").unwrap();
        assert_eq!(
            to_categories(&p, &cfg),
            Categories {
                purist: None,
                pragmatic: PragmaticClass::Unk
            }
        );
        let p = Prediction::parse(OutputFormat::XPerMonth, "0").unwrap();
        assert_eq!(
            to_categories(&p, &cfg),
            Categories {
                purist: Some(PuristClass::Ns),
                pragmatic: PragmaticClass::Ns
            }
        );
        assert_eq!(p.format(), OutputFormat::XPerMonth);
    }

    #[test]
    fn format_names() {
        assert_eq!("f4".parse::<OutputFormat>().unwrap(), OutputFormat::Cot);
        assert_eq!("X_PER_MONTH".parse::<OutputFormat>().unwrap(), OutputFormat::XPerMonth);
        assert!("f5".parse::<OutputFormat>().is_err());
    }
}
