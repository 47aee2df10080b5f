//! Deterministic scripted teacher for offline runs and tests.
//!
//! Drafting splices the description into the base letter (at
//! `{{SEIZURE_PARAGRAPH}}` if present, otherwise after it) under a
//! placeholder header. Inference answers from an answer key of gold labels,
//! following a per-letter [`InferScript`]. Letters without an explicit
//! script get one drawn from a seeded hash of the letter text.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{stable_hash, ClientError, CotExemplar, Draft, Inference, TeacherClient};
use crate::label::FrequencyLabel;
use crate::template::SyntheticIdentity;

pub const PARAGRAPH_MARKER: &str = "{{SEIZURE_PARAGRAPH}}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferScript {
    /// Gold label on every call.
    Correct,
    /// Wrong until an exemplar is supplied.
    CorrectWithExemplar,
    /// Wrong before the n-th call for this letter (1-based), correct from then on.
    CorrectOnPass(u32),
    NeverCorrect,
    /// Output outside the label grammar.
    Unparseable,
    /// Transport failure on the first n calls, then correct.
    FlakyTransport(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DraftScript {
    Echo,
    Empty,
    NoPlaceholders,
    /// Transport failure on the first n calls, then echo.
    FlakyTransport(u32),
    Down,
}

/// Fractions (per mille) of unscripted letters that need the exemplar or
/// are never answered correctly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockProfile {
    pub seed: u64,
    pub exemplar_rescue_permille: u32,
    pub never_correct_permille: u32,
}

impl Default for MockProfile {
    fn default() -> Self {
        MockProfile {
            seed: 0,
            exemplar_rescue_permille: 100,
            never_correct_permille: 50,
        }
    }
}

impl MockProfile {
    pub fn all_correct() -> Self {
        MockProfile {
            seed: 0,
            exemplar_rescue_permille: 0,
            never_correct_permille: 0,
        }
    }
}

#[derive(Debug, Default)]
pub struct ScriptedClient {
    answers: HashMap<String, FrequencyLabel>,
    infer_scripts: HashMap<String, InferScript>,
    draft_scripts: HashMap<String, DraftScript>,
    profile: MockProfile,
    infer_calls: Mutex<HashMap<String, u32>>,
    draft_calls: Mutex<HashMap<String, u32>>,
    requests: AtomicU64,
}

const NAMES: [&str; 8] = [
    "Alex Morgan", "Sam Patel", "Jordan Lee", "Casey Okafor",
    "Riley Novak", "Taylor Reid", "Jamie Castro", "Robin Hale",
];
const STREETS: [&str; 6] = [
    "Elm Road", "Mill Lane", "Station Street", "Park Avenue", "Church Walk", "Orchard Close",
];
const TOWNS: [&str; 5] = ["Ashford", "Bexley", "Croydon", "Dartford", "Epsom"];
const GPS: [&str; 5] = ["Dr Quinn", "Dr Marsh", "Dr Iqbal", "Dr Fenwick", "Dr Adeyemi"];

impl ScriptedClient {
    pub fn new(profile: MockProfile) -> Self {
        ScriptedClient {
            profile,
            ..Default::default()
        }
    }

    /// A client that answers every keyed letter correctly on the first pass.
    pub fn all_correct() -> Self {
        Self::new(MockProfile::all_correct())
    }

    pub fn with_answer(mut self, letter: impl Into<String>, gold: FrequencyLabel) -> Self {
        self.answers.insert(letter.into(), gold);
        self
    }

    pub fn add_answer(&mut self, letter: impl Into<String>, gold: FrequencyLabel) {
        self.answers.insert(letter.into(), gold);
    }

    pub fn with_infer_script(mut self, letter: impl Into<String>, script: InferScript) -> Self {
        self.infer_scripts.insert(letter.into(), script);
        self
    }

    pub fn add_infer_script(&mut self, letter: impl Into<String>, script: InferScript) {
        self.infer_scripts.insert(letter.into(), script);
    }

    pub fn with_draft_script(mut self, description: impl Into<String>, script: DraftScript) -> Self {
        self.draft_scripts.insert(description.into(), script);
        self
    }

    /// Script applied to `letter`: explicit, else drawn from the profile.
    pub fn script_for(&self, letter: &str) -> InferScript {
        if let Some(s) = self.infer_scripts.get(letter) {
            return *s;
        }
        let seed = self.profile.seed.to_string();
        let roll = (stable_hash(&[&seed, letter]) % 1000) as u32;
        if roll < self.profile.never_correct_permille {
            InferScript::NeverCorrect
        } else if roll < self.profile.never_correct_permille + self.profile.exemplar_rescue_permille {
            InferScript::CorrectWithExemplar
        } else {
            InferScript::Correct
        }
    }

    fn bump(map: &Mutex<HashMap<String, u32>>, key: &str) -> u32 {
        let mut m = map.lock().expect("mock state poisoned");
        let n = m.entry(key.to_string()).or_insert(0);
        *n += 1;
        *n
    }

    fn identity_for(&self, base: &str, description: &str) -> SyntheticIdentity {
        let seed = self.profile.seed.to_string();
        let h = stable_hash(&[&seed, base, description]);
        let pick = |shift: u32, len: usize| ((h >> shift) as usize) % len;
        let nhs = 100_000_0000 + (h % 900_000_0000);
        let nhs = nhs.to_string();
        [
            ("NAME", NAMES[pick(0, NAMES.len())].to_string()),
            (
                "ADDRESS",
                format!(
                    "{} {}, {}",
                    1 + pick(8, 98),
                    STREETS[pick(16, STREETS.len())],
                    TOWNS[pick(24, TOWNS.len())]
                ),
            ),
            (
                "DOB",
                format!("{:02}/{:02}/{}", 1 + pick(32, 28), 1 + pick(40, 12), 1950 + pick(44, 55)),
            ),
            ("NHS_NUMBER", format!("{} {} {}", &nhs[..3], &nhs[3..6], &nhs[6..])),
            ("GP_NAME", GPS[pick(52, GPS.len())].to_string()),
        ]
        .into_iter()
        .collect()
    }

    fn compose(base: &str, description: &str) -> String {
        let paragraph = format!("Seizure history: {description}");
        let body = if base.contains(PARAGRAPH_MARKER) {
            base.replace(PARAGRAPH_MARKER, &paragraph)
        } else {
            format!("{}\n\n{paragraph}", base.trim_end())
        };
        format!(
            "Dear @GP_NAME@,\n\nRe: @NAME@, DOB @DOB@, NHS number @NHS_NUMBER@\n@ADDRESS@\n\n{}\n",
            body.trim()
        )
    }

    /// A verbatim line of the letter that grounds the label.
    fn evidence_line(letter: &str) -> Option<String> {
        let lines = letter.lines().map(str::trim).filter(|l| !l.is_empty());
        lines
            .clone()
            .find(|l| l.to_lowercase().contains("seizure"))
            .or_else(|| lines.clone().next())
            .map(str::to_string)
    }

    fn wrong_label(gold: Option<&FrequencyLabel>) -> String {
        match gold {
            Some(FrequencyLabel::Unknown) => "1 per 1 month".to_string(),
            _ => "unknown".to_string(),
        }
    }
}

impl TeacherClient for ScriptedClient {
    fn draft(&self, base_letter: &str, description: &str) -> Result<Draft, ClientError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let script = self
            .draft_scripts
            .get(description)
            .copied()
            .unwrap_or(DraftScript::Echo);
        let call = Self::bump(&self.draft_calls, description);
        let identity = self.identity_for(base_letter, description);
        let text = match script {
            DraftScript::Echo => Self::compose(base_letter, description),
            DraftScript::Empty => String::new(),
            DraftScript::NoPlaceholders => format!("{base_letter}\n\n{description}"),
            DraftScript::FlakyTransport(n) if call <= n => {
                return Err(ClientError::Transport(format!("scripted failure {call}/{n}")))
            }
            DraftScript::FlakyTransport(_) => Self::compose(base_letter, description),
            DraftScript::Down => return Err(ClientError::Transport("scripted outage".into())),
        };
        Ok(Draft { text, identity })
    }

    fn infer(&self, letter: &str, exemplar: Option<&CotExemplar>) -> Result<Inference, ClientError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let call = Self::bump(&self.infer_calls, letter);
        let gold = self.answers.get(letter);
        let correct = match self.script_for(letter) {
            InferScript::Correct => true,
            InferScript::CorrectWithExemplar => exemplar.is_some(),
            InferScript::CorrectOnPass(n) => call >= n,
            InferScript::NeverCorrect => false,
            InferScript::Unparseable => {
                return Ok(Inference {
                    label_text: "a few fits every so often".into(),
                    analysis: "Unclear.".into(),
                    evidence: vec![],
                })
            }
            InferScript::FlakyTransport(n) if call <= n => {
                return Err(ClientError::Transport(format!("scripted failure {call}/{n}")))
            }
            InferScript::FlakyTransport(_) => true,
        };
        let label_text = match (correct, gold) {
            (true, Some(g)) => g.to_string(),
            _ => Self::wrong_label(gold),
        };
        let evidence: Vec<String> = Self::evidence_line(letter).into_iter().collect();
        let quoted = evidence.first().map(String::as_str).unwrap_or("");
        let guided = if exemplar.is_some() { " Following the worked example," } else { "" };
        Ok(Inference {
            analysis: format!(
                "The letter states: '{quoted}'.{guided} Therefore the normalised label is '{label_text}'."
            ),
            label_text,
            evidence,
        })
    }

    fn request_count(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::parse_label;
    use crate::template::{fill_placeholders, placeholders};

    #[test]
    fn draft_is_placeholdered_and_fillable() {
        let c = ScriptedClient::all_correct();
        let d = c.draft("Clinic letter.\n\n{{SEIZURE_PARAGRAPH}}\n\nPlan: continue.", "2 per week").unwrap();
        assert!(d.text.contains("Seizure history: 2 per week"));
        assert!(d.text.contains("Plan: continue."));
        let keys: Vec<String> = placeholders(&d.text);
        assert_eq!(keys, vec!["GP_NAME", "NAME", "DOB", "NHS_NUMBER", "ADDRESS"]);
        for v in d.identity.keys().map(|k| d.identity.get(k).unwrap()) {
            assert!(!d.text.contains(v));
        }
        assert!(fill_placeholders(&d.text, &d.identity).is_ok());
        let again = c.draft("Clinic letter.\n\n{{SEIZURE_PARAGRAPH}}\n\nPlan: continue.", "2 per week").unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn infer_follows_scripts() {
        let gold = parse_label("2 per week").unwrap();
        let ex = CotExemplar {
            id: "e".into(),
            applicable_template_ids: vec![],
            exemplar_text: "think".into(),
        };
        let c = ScriptedClient::all_correct()
            .with_answer("a seizure letter", gold.clone())
            .with_answer("b seizure letter", gold.clone())
            .with_infer_script("b seizure letter", InferScript::CorrectWithExemplar);
        assert_eq!(c.infer("a seizure letter", None).unwrap().label_text, "2 per 1 week");
        assert_eq!(c.infer("b seizure letter", None).unwrap().label_text, "unknown");
        let i = c.infer("b seizure letter", Some(&ex)).unwrap();
        assert_eq!(i.label_text, "2 per 1 week");
        assert_eq!(i.evidence, vec!["b seizure letter"]);
        assert_eq!(c.request_count(), 3);
    }

    #[test]
    fn profile_rolls_are_deterministic() {
        let p = MockProfile {
            seed: 7,
            exemplar_rescue_permille: 300,
            never_correct_permille: 200,
        };
        let a = ScriptedClient::new(p);
        let b = ScriptedClient::new(p);
        let letters: Vec<String> = (0..500).map(|i| format!("letter {i}")).collect();
        let sa: Vec<_> = letters.iter().map(|l| a.script_for(l)).collect();
        let sb: Vec<_> = letters.iter().map(|l| b.script_for(l)).collect();
        assert_eq!(sa, sb);
        let never = sa.iter().filter(|s| **s == InferScript::NeverCorrect).count();
        assert!((50..150).contains(&never), "{never}");
    }
}
