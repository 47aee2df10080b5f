//! Slotted description templates and letter placeholder filling.
//!
//! A template pairs a description such as `"[1] seizures per day"` with a
//! label template `"[1] per day"`. Expansion walks the cross product of slot
//! domains and parses every instantiated label.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::label::{parse_label, FrequencyLabel, LabelParseError};

static SLOT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[(\d+)\]").unwrap());
static FILLER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:multiple|\d+(?:\.\d+)?(?: to \d+(?:\.\d+)?)?)$").unwrap()
});
static PLACEHOLDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@([A-Z_]+)@").unwrap());
static IDENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Z_]+$").unwrap());

pub type Assignment = BTreeMap<u8, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionTemplate {
    pub id: String,
    pub text: String,
    #[serde(rename = "label")]
    pub label_template: String,
    #[serde(rename = "slots")]
    pub slot_domains: BTreeMap<u8, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionPair {
    pub id: String,
    pub description: String,
    pub label: FrequencyLabel,
    pub template_id: String,
    pub assignment: Assignment,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("template {template}: slot [{slot}] has no value in the assignment")]
    MissingSlot { template: String, slot: u8 },
    #[error("template {template}: filler {filler:?} is not in the domain of slot [{slot}]")]
    FillerOutOfDomain {
        template: String,
        slot: u8,
        filler: String,
    },
    #[error("template {template}: slot [{slot}] is used but has no domain")]
    UndeclaredSlot { template: String, slot: u8 },
    #[error("template {template}: slot [{slot}] has a domain but is never used")]
    UnusedSlot { template: String, slot: u8 },
    #[error("template {template}: slot [{slot}] must be 1, 2 or 3")]
    SlotOutOfRange { template: String, slot: u32 },
    #[error("template {template}: slot [{slot}] has an empty domain")]
    EmptyDomain { template: String, slot: u8 },
    #[error("template {template}: slot [{slot}] filler {filler:?} is not a number, range or \"multiple\"")]
    MalformedFiller {
        template: String,
        slot: u8,
        filler: String,
    },
    #[error("template {template}: assignment {assignment:?} yields an invalid label: {source}")]
    LabelParse {
        template: String,
        assignment: Assignment,
        #[source]
        source: LabelParseError,
    },
}

fn slots_in(text: &str) -> impl Iterator<Item = u32> + '_ {
    SLOT.captures_iter(text)
        .map(|c| c[1].parse::<u32>().unwrap_or(u32::MAX))
}

fn substitute(text: &str, assignment: &Assignment) -> String {
    SLOT.replace_all(text, |c: &regex::Captures<'_>| {
        c[1].parse::<u8>()
            .ok()
            .and_then(|n| assignment.get(&n))
            .cloned()
            .unwrap_or_else(|| c[0].to_string())
    })
    .into_owned()
}

/// Stable short id for a template instantiation.
pub fn pair_id(template_id: &str, assignment: &Assignment) -> String {
    let mut h = Sha256::new();
    h.update(template_id.as_bytes());
    for (slot, filler) in assignment {
        h.update([0u8, *slot]);
        h.update(filler.as_bytes());
    }
    let digest = h.finalize();
    let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
    format!("{template_id}-{hex}")
}

impl DescriptionTemplate {
    /// Slots referenced by the description or label text.
    pub fn used_slots(&self) -> Result<BTreeSet<u8>, TemplateError> {
        let mut used = BTreeSet::new();
        for n in slots_in(&self.text).chain(slots_in(&self.label_template)) {
            if !(1..=3).contains(&n) {
                return Err(TemplateError::SlotOutOfRange {
                    template: self.id.clone(),
                    slot: n,
                });
            }
            used.insert(n as u8);
        }
        Ok(used)
    }

    /// Structural checks; label validity is checked per assignment.
    pub fn validate(&self) -> Result<(), TemplateError> {
        let used = self.used_slots()?;
        let err_id = || self.id.clone();
        for slot in &used {
            if !self.slot_domains.contains_key(slot) {
                return Err(TemplateError::UndeclaredSlot {
                    template: err_id(),
                    slot: *slot,
                });
            }
        }
        for (slot, domain) in &self.slot_domains {
            if !used.contains(slot) {
                return Err(TemplateError::UnusedSlot {
                    template: err_id(),
                    slot: *slot,
                });
            }
            if domain.is_empty() {
                return Err(TemplateError::EmptyDomain {
                    template: err_id(),
                    slot: *slot,
                });
            }
            if let Some(bad) = domain.iter().find(|f| !FILLER.is_match(f)) {
                return Err(TemplateError::MalformedFiller {
                    template: err_id(),
                    slot: *slot,
                    filler: bad.clone(),
                });
            }
        }
        Ok(())
    }

    /// Number of pairs [`expand`] yields.
    pub fn combinations(&self) -> usize {
        self.slot_domains.values().map(Vec::len).product()
    }
}

pub fn instantiate(
    template: &DescriptionTemplate,
    assignment: &Assignment,
) -> Result<DescriptionPair, TemplateError> {
    for slot in template.used_slots()? {
        let filler = assignment.get(&slot).ok_or(TemplateError::MissingSlot {
            template: template.id.clone(),
            slot,
        })?;
        let in_domain = template
            .slot_domains
            .get(&slot)
            .is_some_and(|d| d.contains(filler));
        if !in_domain {
            return Err(TemplateError::FillerOutOfDomain {
                template: template.id.clone(),
                slot,
                filler: filler.clone(),
            });
        }
    }
    let description = substitute(&template.text, assignment);
    let label_text = substitute(&template.label_template, assignment);
    let label = parse_label(&label_text).map_err(|source| TemplateError::LabelParse {
        template: template.id.clone(),
        assignment: assignment.clone(),
        source,
    })?;
    Ok(DescriptionPair {
        id: pair_id(&template.id, assignment),
        description,
        label,
        template_id: template.id.clone(),
        assignment: assignment.clone(),
    })
}

/// Full cross product of the slot domains. Slots vary in ascending order
/// with the highest-numbered slot changing fastest.
pub fn expand(template: &DescriptionTemplate) -> Result<Vec<DescriptionPair>, TemplateError> {
    template.validate()?;
    let domains: Vec<(u8, &Vec<String>)> =
        template.slot_domains.iter().map(|(k, v)| (*k, v)).collect();
    let mut out = Vec::with_capacity(template.combinations());
    let mut cursor = vec![0usize; domains.len()];
    loop {
        let assignment: Assignment = domains
            .iter()
            .zip(&cursor)
            .map(|((slot, dom), &i)| (*slot, dom[i].clone()))
            .collect();
        out.push(instantiate(template, &assignment)?);

        let mut k = domains.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            cursor[k] += 1;
            if cursor[k] < domains[k].1.len() {
                break;
            }
            cursor[k] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusExpansion {
    pub pairs: Vec<DescriptionPair>,
    /// Pairs dropped because an earlier pair had the same description.
    pub duplicates: usize,
}

/// Expand every template, keeping the first pair for each distinct
/// description string.
pub fn expand_corpus(templates: &[DescriptionTemplate]) -> Result<CorpusExpansion, TemplateError> {
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    let mut duplicates = 0;
    for t in templates {
        for pair in expand(t)? {
            if seen.insert(pair.description.clone()) {
                pairs.push(pair);
            } else {
                duplicates += 1;
            }
        }
    }
    Ok(CorpusExpansion { pairs, duplicates })
}

/// Synthetic demographic values keyed by placeholder name (`NAME`, `DOB`, ...).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SyntheticIdentity(BTreeMap<String, String>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentityError {
    #[error("identity key {0:?} is not an uppercase identifier")]
    BadKey(String),
    #[error("identity value for {0} is empty")]
    EmptyValue(String),
    #[error("identity value for {0} contains '@'")]
    ValueContainsAt(String),
}

impl SyntheticIdentity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) -> Result<(), IdentityError> {
        let key = key.into();
        let value = value.into();
        if !IDENT.is_match(&key) {
            return Err(IdentityError::BadKey(key));
        }
        if value.trim().is_empty() {
            return Err(IdentityError::EmptyValue(key));
        }
        if value.contains('@') {
            return Err(IdentityError::ValueContainsAt(key));
        }
        self.0.insert(key, value);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), IdentityError> {
        let mut copy = SyntheticIdentity::new();
        for (k, v) in &self.0 {
            copy.insert(k.clone(), v.clone())?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for SyntheticIdentity {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        SyntheticIdentity(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FillError {
    #[error("unresolved placeholders: {}", .missing.join(", "))]
    UnresolvedPlaceholder { missing: Vec<String> },
    #[error(transparent)]
    InvalidIdentity(#[from] IdentityError),
    #[error("placeholder-like token {0} remains after substitution")]
    ResidualToken(String),
}

/// Distinct placeholder names in order of first appearance.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut seen = Vec::new();
    for c in PLACEHOLDER.captures_iter(text) {
        if !seen.iter().any(|s: &String| s == &c[1]) {
            seen.push(c[1].to_string());
        }
    }
    seen
}

pub fn has_placeholder(text: &str) -> bool {
    PLACEHOLDER.is_match(text)
}

/// Replace every `@KEY@` with the identity's value. Fails without emitting
/// anything if any key is missing or if the result would still contain a
/// placeholder-shaped token.
pub fn fill_placeholders(letter: &str, identity: &SyntheticIdentity) -> Result<String, FillError> {
    identity.validate()?;
    let missing: Vec<String> = placeholders(letter)
        .into_iter()
        .filter(|k| identity.get(k).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(FillError::UnresolvedPlaceholder { missing });
    }
    let out = PLACEHOLDER
        .replace_all(letter, |c: &regex::Captures<'_>| {
            identity.get(&c[1]).expect("checked above").to_string()
        })
        .into_owned();
    if let Some(m) = PLACEHOLDER.find(&out) {
        return Err(FillError::ResidualToken(m.as_str().to_string()));
    }
    Ok(out)
}
