//! Letter drafting and teacher verification.
//!
//! A [`TeacherClient`] drafts letters around a seizure description and
//! infers labels back from finished letters. [`generate`] turns description
//! pairs into placeholder drafts plus separate identities; [`screening`]
//! keeps only letters whose inferred label matches the ground truth.

mod client;
pub mod generate;
pub mod http;
pub mod mock;
mod retry;
pub mod screening;

pub use client::{ClientError, CotExemplar, Draft, Inference, TeacherClient};
pub use generate::{
    choose_base, draft_letter, run_generation, BaseLetter, DraftError, DraftRecord, GenerationFailure, GenerationResult,
    IdentityRecord,
};
pub use http::{HttpClientConfig, HttpTeacherClient};
pub use mock::{DraftScript, InferScript, MockProfile, ScriptedClient};
pub use retry::{with_retry, RetryPolicy};
pub use screening::{
    run_screening, verify_letter, FinalStatus, GroupStats, LetterRecord, PassRecord, RecordFailure, ScreeningConfig,
    ScreeningResult, ScreeningStats, VerificationOutcome, Verified,
};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Map `f` over `items` with at most `limit` calls in flight. Output order
/// matches input order.
pub(crate) fn bounded_map<'a, T, R, F>(items: &'a [T], limit: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&'a T) -> R + Sync,
{
    let workers = limit.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Deterministic 64-bit digest of string parts.
pub(crate) fn stable_hash(parts: &[&str]) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_map_keeps_order() {
        let items: Vec<u32> = (0..100).collect();
        let out = bounded_map(&items, 7, |x| x * 2);
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert!(bounded_map(&Vec::<u32>::new(), 4, |x| *x).is_empty());
    }

    #[test]
    fn stable_hash_separates_parts() {
        assert_ne!(stable_hash(&["ab", "c"]), stable_hash(&["a", "bc"]));
        assert_eq!(stable_hash(&["x"]), stable_hash(&["x"]));
    }
}
