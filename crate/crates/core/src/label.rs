//! Structured seizure-frequency labels.
//!
//! A label is one of six surface forms:
//!
//! ```text
//! unknown
//! no seizure frequency reference
//! seizure free for <q> <month|year>
//! <q> per [<q>] <day|week|month|year>
//! <q> cluster per [<q>] <unit>, <q> per cluster
//! unknown, <q> per cluster
//! ```
//!
//! where `<q>` is a positive number, a range `a to b`, or the keyword
//! `multiple`. Parsing is case-insensitive, collapses whitespace and accepts
//! plural units. [`FrequencyLabel`]'s `Display` emits the canonical form
//! (singular units, explicit denominator), and `parse(format(l)) == l`.
//!
//! [`normalize`] maps any label to seizures per month.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Day,
    Week,
    Month,
    Year,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 4] = [TimeUnit::Day, TimeUnit::Week, TimeUnit::Month, TimeUnit::Year];

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Day => "day",
            TimeUnit::Week => "week",
            TimeUnit::Month => "month",
            TimeUnit::Year => "year",
        }
    }

    fn from_word(word: &str) -> Option<TimeUnit> {
        match word {
            "day" | "days" => Some(TimeUnit::Day),
            "week" | "weeks" => Some(TimeUnit::Week),
            "month" | "months" => Some(TimeUnit::Month),
            "year" | "years" => Some(TimeUnit::Year),
            _ => None,
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A count or duration: an explicit value, a range, or the vague `multiple`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    Exact(f64),
    Range { lo: f64, hi: f64 },
    Multiple,
}

impl Quantity {
    /// Checked constructor for an exact value.
    pub fn exact(v: f64) -> Result<Quantity, QuantityError> {
        if !v.is_finite() || v <= 0.0 {
            return Err(QuantityError::NotPositive(v));
        }
        Ok(Quantity::Exact(v))
    }

    /// Checked constructor for a range; requires `0 < lo < hi`.
    pub fn range(lo: f64, hi: f64) -> Result<Quantity, QuantityError> {
        for v in [lo, hi] {
            if !v.is_finite() || v <= 0.0 {
                return Err(QuantityError::NotPositive(v));
            }
        }
        if lo >= hi {
            return Err(QuantityError::EmptyRange { lo, hi });
        }
        Ok(Quantity::Range { lo, hi })
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Quantity::Exact(v) => v.is_finite() && v > 0.0,
            Quantity::Range { lo, hi } => {
                lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi
            }
            Quantity::Multiple => true,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(v) => write!(f, "{v}"),
            Quantity::Range { lo, hi } => write!(f, "{lo} to {hi}"),
            Quantity::Multiple => f.write_str("multiple"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantityError {
    #[error("quantity must be a positive finite number, got {0}")]
    NotPositive(f64),
    #[error("range lower bound {lo} must be below upper bound {hi}")]
    EmptyRange { lo: f64, hi: f64 },
}

/// Unit admitted by the seizure-free form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DurationUnit {
    Month,
    Year,
}

impl From<DurationUnit> for TimeUnit {
    fn from(u: DurationUnit) -> TimeUnit {
        match u {
            DurationUnit::Month => TimeUnit::Month,
            DurationUnit::Year => TimeUnit::Year,
        }
    }
}

impl fmt::Display for DurationUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        TimeUnit::from(*self).fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyLabel {
    /// Seizures mentioned but no interpretable frequency.
    Unknown,
    /// Seizures not mentioned at all.
    NoSeizureReference,
    SeizureFree {
        duration: Quantity,
        unit: DurationUnit,
    },
    /// `count` seizures per `per` units.
    Rate {
        count: Quantity,
        per: Quantity,
        unit: TimeUnit,
    },
    /// `clusters` clusters per `per` units, `per_cluster` seizures each.
    Cluster {
        clusters: Quantity,
        per: Quantity,
        unit: TimeUnit,
        per_cluster: Quantity,
    },
    /// Within-cluster count known, spacing between clusters not.
    UnknownCluster {
        per_cluster: Quantity,
    },
}

impl FrequencyLabel {
    pub fn kind(&self) -> LabelKind {
        match self {
            FrequencyLabel::Unknown => LabelKind::Unknown,
            FrequencyLabel::NoSeizureReference => LabelKind::NoSeizureReference,
            FrequencyLabel::SeizureFree { .. } => LabelKind::SeizureFree,
            FrequencyLabel::Rate { .. } => LabelKind::Rate,
            FrequencyLabel::Cluster { .. } => LabelKind::Cluster,
            FrequencyLabel::UnknownCluster { .. } => LabelKind::UnknownCluster,
        }
    }

    /// All embedded quantities satisfy their invariants.
    pub fn is_valid(&self) -> bool {
        match self {
            FrequencyLabel::Unknown | FrequencyLabel::NoSeizureReference => true,
            FrequencyLabel::SeizureFree { duration, .. } => duration.is_valid(),
            FrequencyLabel::Rate { count, per, .. } => count.is_valid() && per.is_valid(),
            FrequencyLabel::Cluster {
                clusters,
                per,
                per_cluster,
                ..
            } => clusters.is_valid() && per.is_valid() && per_cluster.is_valid(),
            FrequencyLabel::UnknownCluster { per_cluster } => per_cluster.is_valid(),
        }
    }

    /// Canonical surface string. Same as `to_string()`.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FrequencyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencyLabel::Unknown => f.write_str("unknown"),
            FrequencyLabel::NoSeizureReference => f.write_str("no seizure frequency reference"),
            FrequencyLabel::SeizureFree { duration, unit } => {
                write!(f, "seizure free for {duration} {unit}")
            }
            FrequencyLabel::Rate { count, per, unit } => write!(f, "{count} per {per} {unit}"),
            FrequencyLabel::Cluster {
                clusters,
                per,
                unit,
                per_cluster,
            } => write!(
                f,
                "{clusters} cluster per {per} {unit}, {per_cluster} per cluster"
            ),
            FrequencyLabel::UnknownCluster { per_cluster } => {
                write!(f, "unknown, {per_cluster} per cluster")
            }
        }
    }
}

impl FromStr for FrequencyLabel {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

impl Serialize for FrequencyLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FrequencyLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_label(&s).map_err(serde::de::Error::custom)
    }
}

/// The six surface forms, used to report which grammars a failed parse tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelKind {
    Unknown,
    NoSeizureReference,
    SeizureFree,
    Rate,
    Cluster,
    UnknownCluster,
}

impl LabelKind {
    pub const ALL: [LabelKind; 6] = [
        LabelKind::Unknown,
        LabelKind::NoSeizureReference,
        LabelKind::SeizureFree,
        LabelKind::Rate,
        LabelKind::Cluster,
        LabelKind::UnknownCluster,
    ];

    pub fn pattern(self) -> &'static str {
        match self {
            LabelKind::Unknown => "unknown",
            LabelKind::NoSeizureReference => "no seizure frequency reference",
            LabelKind::SeizureFree => "seizure free for <q> <month|year>",
            LabelKind::Rate => "<q> per <q> <day|week|month|year>",
            LabelKind::Cluster => "<q> cluster per <q> <unit>, <q> per cluster",
            LabelKind::UnknownCluster => "unknown, <q> per cluster",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot parse label {input:?} at byte {position}: {message} (tried: {})", tried(.candidates))]
pub struct LabelParseError {
    pub input: String,
    /// Byte offset into `input` of the offending token (or its length at end of input).
    pub position: usize,
    pub message: String,
    pub candidates: Vec<LabelKind>,
}

fn tried(kinds: &[LabelKind]) -> String {
    kinds
        .iter()
        .map(|k| k.pattern())
        .collect::<Vec<_>>()
        .join(" | ")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Word(String),
    Comma,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    at: usize,
}

fn tokenize(input: &str) -> Result<Vec<Token<'_>>, (usize, String)> {
    let mut out = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = input[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
        } else if c == ',' {
            out.push(Token { tok: Tok::Comma, at: i });
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'.') {
                return Err((start, format!("malformed number {:?}", &input[start..=i])));
            }
            out.push(Token {
                tok: Tok::Num(&input[start..i]),
                at: start,
            });
        } else if c.is_alphabetic() {
            let start = i;
            while i < bytes.len() {
                let c = input[i..].chars().next().expect("in bounds");
                if !c.is_alphabetic() {
                    break;
                }
                i += c.len_utf8();
            }
            out.push(Token {
                tok: Tok::Word(input[start..i].to_lowercase()),
                at: start,
            });
        } else {
            return Err((i, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    input: &'a str,
    toks: Vec<Token<'a>>,
    pos: usize,
    candidates: Vec<LabelKind>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.at)
            .unwrap_or(self.input.len())
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, LabelParseError> {
        Err(LabelParseError {
            input: self.input.to_string(),
            position: self.offset(),
            message: message.into(),
            candidates: self.candidates.clone(),
        })
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(Tok::Comma) => "','".to_string(),
            Some(Tok::Num(n)) => format!("number {n}"),
            Some(Tok::Word(w)) => format!("{w:?}"),
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), LabelParseError> {
        if self.peek_word() == Some(word) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {word:?}, found {}", self.describe_next()))
        }
    }

    fn skip_comma(&mut self) {
        if self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
        }
    }

    fn at_quantity(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_))) || self.peek_word() == Some("multiple")
    }

    fn number(&mut self) -> Result<f64, LabelParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let v: f64 = n.parse().expect("tokenizer yields valid decimals");
                if v <= 0.0 || !v.is_finite() {
                    return self.fail(format!("quantity must be positive, found {n}"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail(format!("expected a number, found {}", self.describe_next())),
        }
    }

    fn quantity(&mut self) -> Result<Quantity, LabelParseError> {
        if self.peek_word() == Some("multiple") {
            self.pos += 1;
            return Ok(Quantity::Multiple);
        }
        let start = self.pos;
        let lo = self.number()?;
        if self.peek_word() == Some("to") {
            self.pos += 1;
            let hi = self.number()?;
            if lo >= hi {
                self.pos = start;
                return self.fail(format!("range {lo} to {hi} is empty"));
            }
            return Ok(Quantity::Range { lo, hi });
        }
        Ok(Quantity::Exact(lo))
    }

    fn unit(&mut self) -> Result<TimeUnit, LabelParseError> {
        match self.peek_word().and_then(TimeUnit::from_word) {
            Some(u) => {
                self.pos += 1;
                Ok(u)
            }
            None => self.fail(format!(
                "expected day|week|month|year, found {}",
                self.describe_next()
            )),
        }
    }

    /// Optional denominator: `per month` means `per 1 month`.
    fn denominator(&mut self) -> Result<Quantity, LabelParseError> {
        if self.at_quantity() {
            self.quantity()
        } else {
            Ok(Quantity::Exact(1.0))
        }
    }

    fn end(&self) -> Result<(), LabelParseError> {
        if self.pos < self.toks.len() {
            self.fail(format!("unexpected trailing {}", self.describe_next()))
        } else {
            Ok(())
        }
    }

    fn label(&mut self) -> Result<FrequencyLabel, LabelParseError> {
        match self.peek() {
            None => {
                self.candidates = LabelKind::ALL.to_vec();
                self.fail("empty label")
            }
            Some(Tok::Word(w)) if w == "unknown" => {
                self.candidates = vec![LabelKind::Unknown, LabelKind::UnknownCluster];
                self.pos += 1;
                if self.peek().is_none() {
                    return Ok(FrequencyLabel::Unknown);
                }
                self.skip_comma();
                let per_cluster = self.quantity()?;
                self.expect_word("per")?;
                self.expect_word("cluster")?;
                self.end()?;
                Ok(FrequencyLabel::UnknownCluster { per_cluster })
            }
            Some(Tok::Word(w)) if w == "no" => {
                self.candidates = vec![LabelKind::NoSeizureReference];
                self.pos += 1;
                for w in ["seizure", "frequency", "reference"] {
                    self.expect_word(w)?;
                }
                self.end()?;
                Ok(FrequencyLabel::NoSeizureReference)
            }
            Some(Tok::Word(w)) if w == "seizure" => {
                self.candidates = vec![LabelKind::SeizureFree];
                self.pos += 1;
                self.expect_word("free")?;
                self.expect_word("for")?;
                let duration = self.quantity()?;
                let unit = match self.peek_word().and_then(TimeUnit::from_word) {
                    Some(TimeUnit::Month) => DurationUnit::Month,
                    Some(TimeUnit::Year) => DurationUnit::Year,
                    _ => {
                        return self.fail(format!(
                            "expected month|year, found {}",
                            self.describe_next()
                        ))
                    }
                };
                self.pos += 1;
                self.end()?;
                Ok(FrequencyLabel::SeizureFree { duration, unit })
            }
            _ if self.at_quantity() => {
                self.candidates = vec![LabelKind::Rate, LabelKind::Cluster];
                let first = self.quantity()?;
                if self.peek_word() == Some("cluster") {
                    self.candidates = vec![LabelKind::Cluster];
                    self.pos += 1;
                    self.expect_word("per")?;
                    let per = self.denominator()?;
                    let unit = self.unit()?;
                    self.skip_comma();
                    let per_cluster = self.quantity()?;
                    self.expect_word("per")?;
                    self.expect_word("cluster")?;
                    self.end()?;
                    return Ok(FrequencyLabel::Cluster {
                        clusters: first,
                        per,
                        unit,
                        per_cluster,
                    });
                }
                self.expect_word("per")?;
                self.candidates = vec![LabelKind::Rate];
                let per = self.denominator()?;
                let unit = self.unit()?;
                self.end()?;
                Ok(FrequencyLabel::Rate {
                    count: first,
                    per,
                    unit,
                })
            }
            _ => {
                self.candidates = LabelKind::ALL.to_vec();
                self.fail(format!(
                    "no label form starts with {}",
                    self.describe_next()
                ))
            }
        }
    }
}

/// Parse a label in any accepted surface form.
pub fn parse_label(text: &str) -> Result<FrequencyLabel, LabelParseError> {
    let toks = tokenize(text).map_err(|(position, message)| LabelParseError {
        input: text.to_string(),
        position,
        message,
        candidates: LabelKind::ALL.to_vec(),
    })?;
    let mut p = Parser {
        input: text,
        toks,
        pos: 0,
        candidates: Vec::new(),
    };
    p.label()
}

/// Canonical surface string of a label.
pub fn format_label(label: &FrequencyLabel) -> String {
    label.to_string()
}

/// How ranges collapse to a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangePolicy {
    #[default]
    LowerBound,
}

/// Per-month multipliers for each time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitFactors {
    pub day: f64,
    pub week: f64,
    pub month: f64,
    pub year: f64,
}

impl UnitFactors {
    pub fn get(&self, unit: TimeUnit) -> f64 {
        match unit {
            TimeUnit::Day => self.day,
            TimeUnit::Week => self.week,
            TimeUnit::Month => self.month,
            TimeUnit::Year => self.year,
        }
    }
}

impl Default for UnitFactors {
    fn default() -> Self {
        UnitFactors {
            day: 30.0,
            week: 4.0,
            month: 1.0,
            year: 1.0 / 12.0,
        }
    }
}

/// Normalization rules. Serializes as a flat key/value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FlatNormConfig", into = "FlatNormConfig")]
pub struct NormConfig {
    pub multiple_value: f64,
    pub unit_factors: UnitFactors,
    pub range_policy: RangePolicy,
    pub rounding_dp: u32,
    pub max_frequency: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FlatNormConfig {
    multiple_value: f64,
    day: f64,
    week: f64,
    month: f64,
    year: f64,
    range_policy: RangePolicy,
    rounding_dp: u32,
    max_frequency: f64,
}

impl Default for FlatNormConfig {
    fn default() -> Self {
        NormConfig::default().into()
    }
}

impl From<NormConfig> for FlatNormConfig {
    fn from(c: NormConfig) -> Self {
        FlatNormConfig {
            multiple_value: c.multiple_value,
            day: c.unit_factors.day,
            week: c.unit_factors.week,
            month: c.unit_factors.month,
            year: c.unit_factors.year,
            range_policy: c.range_policy,
            rounding_dp: c.rounding_dp,
            max_frequency: c.max_frequency,
        }
    }
}

impl From<FlatNormConfig> for NormConfig {
    fn from(c: FlatNormConfig) -> Self {
        NormConfig {
            multiple_value: c.multiple_value,
            unit_factors: UnitFactors {
                day: c.day,
                week: c.week,
                month: c.month,
                year: c.year,
            },
            range_policy: c.range_policy,
            rounding_dp: c.rounding_dp,
            max_frequency: c.max_frequency,
        }
    }
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            multiple_value: 3.0,
            unit_factors: UnitFactors::default(),
            range_policy: RangePolicy::LowerBound,
            rounding_dp: 3,
            max_frequency: 999.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("max_frequency must be below the unknown sentinel 1000, got {0}")]
    MaxFrequencyTooLarge(f64),
    #[error("rounding_dp {0} is too large")]
    RoundingTooFine(u32),
}

impl NormConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = &self.unit_factors;
        for (name, value) in [
            ("multiple_value", self.multiple_value),
            ("day", f.day),
            ("week", f.week),
            ("month", f.month),
            ("year", f.year),
            ("max_frequency", self.max_frequency),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NonPositive { name, value });
            }
        }
        if self.max_frequency >= NormalizedFrequency::UNKNOWN.value() {
            return Err(ConfigError::MaxFrequencyTooLarge(self.max_frequency));
        }
        if self.rounding_dp > 9 {
            return Err(ConfigError::RoundingTooFine(self.rounding_dp));
        }
        Ok(())
    }
}

/// Seizures per month. Either `0` (no seizures), `1000` (unknown), or a
/// value in `(0, 999]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct NormalizedFrequency(f64);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{0} is outside the seizures-per-month codomain {{0}} ∪ (0, 999] ∪ {{1000}}")]
pub struct DomainError(pub f64);

impl NormalizedFrequency {
    pub const NO_SEIZURES: NormalizedFrequency = NormalizedFrequency(0.0);
    pub const UNKNOWN: NormalizedFrequency = NormalizedFrequency(1000.0);
    pub const MAX_RATE: f64 = 999.0;

    pub fn new(x: f64) -> Result<NormalizedFrequency, DomainError> {
        if x == 0.0 || x == 1000.0 || (x > 0.0 && x <= Self::MAX_RATE) {
            Ok(NormalizedFrequency(x))
        } else {
            Err(DomainError(x))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_unknown(self) -> bool {
        self.0 == 1000.0
    }

    pub fn is_no_seizures(self) -> bool {
        self.0 == 0.0
    }
}

impl<'de> Deserialize<'de> for NormalizedFrequency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(deserializer)?;
        NormalizedFrequency::new(x).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for NormalizedFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn resolve_quantity(q: Quantity, cfg: &NormConfig) -> f64 {
    match q {
        Quantity::Exact(v) => v,
        Quantity::Multiple => cfg.multiple_value,
        Quantity::Range { lo, .. } => match cfg.range_policy {
            RangePolicy::LowerBound => lo,
        },
    }
}

/// Unrounded, unclamped seizures per month for rate-bearing labels; `None`
/// for labels that map to a sentinel.
pub fn raw_rate(label: &FrequencyLabel, cfg: &NormConfig) -> Option<f64> {
    let r = |q: &Quantity| resolve_quantity(*q, cfg);
    match label {
        FrequencyLabel::Rate { count, per, unit } => {
            Some(r(count) / r(per) * cfg.unit_factors.get(*unit))
        }
        FrequencyLabel::Cluster {
            clusters,
            per,
            unit,
            per_cluster,
        } => Some(r(clusters) / r(per) * cfg.unit_factors.get(*unit) * r(per_cluster)),
        _ => None,
    }
}

/// Map a label to seizures per month.
///
/// Rates are rounded to `rounding_dp` places and then clamped into
/// `(0, max_frequency]`; a rate that rounds to zero becomes the smallest
/// representable positive value so it never collides with the no-seizure
/// sentinel.
pub fn normalize(label: &FrequencyLabel, cfg: &NormConfig) -> NormalizedFrequency {
    match label {
        FrequencyLabel::Unknown
        | FrequencyLabel::NoSeizureReference
        | FrequencyLabel::UnknownCluster { .. } => NormalizedFrequency::UNKNOWN,
        FrequencyLabel::SeizureFree { .. } => NormalizedFrequency::NO_SEIZURES,
        FrequencyLabel::Rate { .. } | FrequencyLabel::Cluster { .. } => {
            let raw = raw_rate(label, cfg).expect("rate-bearing label");
            let scale = 10f64.powi(cfg.rounding_dp as i32);
            let floor = 1.0 / scale;
            let rounded = (raw * scale).round() / scale;
            let max = cfg.max_frequency.min(NormalizedFrequency::MAX_RATE);
            let x = if rounded.is_nan() { max } else { rounded.clamp(floor, max) };
            NormalizedFrequency(x)
        }
    }
}
