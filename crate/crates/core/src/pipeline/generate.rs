use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{bounded_map, stable_hash, with_retry, ClientError, Draft, RetryPolicy, TeacherClient};
use crate::label::FrequencyLabel;
use crate::template::{has_placeholder, DescriptionPair, IdentityError, SyntheticIdentity};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseLetter {
    pub id: String,
    pub text: String,
}

/// A drafted letter that still carries placeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftRecord {
    pub id: String,
    pub pair_id: String,
    pub template_id: String,
    pub base_letter_id: String,
    pub description: String,
    pub label: FrequencyLabel,
    pub draft: String,
}

/// Synthetic identity for one draft, stored apart from the letter body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub id: String,
    pub identity: SyntheticIdentity,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DraftError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("malformed draft: {0}")]
    Malformed(String),
}

/// Shortest identity value checked for leakage into the letter body.
const LEAK_CHECK_MIN_LEN: usize = 4;

pub fn draft_letter(
    client: &dyn TeacherClient,
    base: &str,
    pair: &DescriptionPair,
    retry: &RetryPolicy,
) -> Result<Draft, DraftError> {
    if base.trim().is_empty() {
        return Err(DraftError::Malformed("base letter is empty".into()));
    }
    let draft = with_retry(retry, || client.draft(base, &pair.description))?;
    if draft.text.trim().is_empty() {
        return Err(DraftError::Malformed("draft text is empty".into()));
    }
    if !has_placeholder(&draft.text) {
        return Err(DraftError::Malformed("draft has no @PLACEHOLDER@ tokens".into()));
    }
    draft
        .identity
        .validate()
        .map_err(|e: IdentityError| DraftError::Malformed(e.to_string()))?;
    for key in draft.identity.keys() {
        let value = draft.identity.get(key).expect("listed key");
        if value.len() >= LEAK_CHECK_MIN_LEN && draft.text.contains(value) {
            return Err(DraftError::Malformed(format!(
                "identity value for {key} appears in the letter body"
            )));
        }
    }
    Ok(draft)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationFailure {
    pub id: String,
    pub error: String,
    /// Transport/HTTP failure rather than a bad draft.
    pub client: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GenerationResult {
    pub drafts: Vec<DraftRecord>,
    pub identities: Vec<IdentityRecord>,
    pub failures: Vec<GenerationFailure>,
}

/// Base letter for `pair`, chosen by a seeded hash of the pair id.
pub fn choose_base<'a>(bases: &'a [BaseLetter], pair: &DescriptionPair, seed: u64) -> &'a BaseLetter {
    let s = seed.to_string();
    &bases[(stable_hash(&[&s, &pair.id]) % bases.len() as u64) as usize]
}

/// Draft one letter per pair. Failures are collected, not fatal. Output is
/// sorted by id.
pub fn run_generation(
    client: &dyn TeacherClient,
    bases: &[BaseLetter],
    pairs: &[DescriptionPair],
    seed: u64,
    concurrency: usize,
    retry: &RetryPolicy,
) -> GenerationResult {
    let mut out = GenerationResult::default();
    if bases.is_empty() {
        out.failures = pairs
            .iter()
            .map(|p| GenerationFailure {
                id: p.id.clone(),
                error: "no base letters".into(),
                client: false,
            })
            .collect();
        return out;
    }
    let results = bounded_map(pairs, concurrency, |pair| {
        let base = choose_base(bases, pair, seed);
        (pair, base, draft_letter(client, &base.text, pair, retry))
    });
    for (pair, base, r) in results {
        match r {
            Ok(d) => {
                out.drafts.push(DraftRecord {
                    id: pair.id.clone(),
                    pair_id: pair.id.clone(),
                    template_id: pair.template_id.clone(),
                    base_letter_id: base.id.clone(),
                    description: pair.description.clone(),
                    label: pair.label.clone(),
                    draft: d.text,
                });
                out.identities.push(IdentityRecord {
                    id: pair.id.clone(),
                    identity: d.identity,
                });
            }
            Err(e) => out.failures.push(GenerationFailure {
                id: pair.id.clone(),
                client: matches!(e, DraftError::Client(_)),
                error: e.to_string(),
            }),
        }
    }
    out.drafts.sort_by(|a, b| a.id.cmp(&b.id));
    out.identities.sort_by(|a, b| a.id.cmp(&b.id));
    out.failures.sort_by(|a, b| a.id.cmp(&b.id));
    out
}
