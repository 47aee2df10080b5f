//! Purist (10-way) and Pragmatic (4-way) seizure-frequency categories.
//!
//! Numeric bins are half-open `(lo, hi]` intervals over seizures per month;
//! `0` and `1000` are the no-seizure and unknown sentinels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::label::{DomainError, NormalizedFrequency};

/// A closed set of categories with a fixed presentation order.
pub trait Category: Copy + Eq + std::hash::Hash + fmt::Debug + fmt::Display + 'static {
    const ALL: &'static [Self];
    const SCHEME: &'static str;

    fn abbrev(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|c| *c == self)
            .expect("category listed in ALL")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PuristClass {
    Lt1Per6M,
    Eq1Per6M,
    Betw6M1M,
    Eq1PerM,
    Betw1M1W,
    Eq1PerW,
    Betw1W1D,
    Ge1PerD,
    Unk,
    Ns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PragmaticClass {
    Infrequent,
    Frequent,
    Unk,
    Ns,
}

impl Category for PuristClass {
    const ALL: &'static [PuristClass] = &[
        PuristClass::Lt1Per6M,
        PuristClass::Eq1Per6M,
        PuristClass::Betw6M1M,
        PuristClass::Eq1PerM,
        PuristClass::Betw1M1W,
        PuristClass::Eq1PerW,
        PuristClass::Betw1W1D,
        PuristClass::Ge1PerD,
        PuristClass::Unk,
        PuristClass::Ns,
    ];
    const SCHEME: &'static str = "purist";

    fn abbrev(self) -> &'static str {
        match self {
            PuristClass::Lt1Per6M => "<1/6M",
            PuristClass::Eq1Per6M => "1/6M",
            PuristClass::Betw6M1M => "(1/6M,1/M)",
            PuristClass::Eq1PerM => "1/M",
            PuristClass::Betw1M1W => "(1/M,1/W)",
            PuristClass::Eq1PerW => "1/W",
            PuristClass::Betw1W1D => "(1/W,1/D)",
            PuristClass::Ge1PerD => "≥1/D",
            PuristClass::Unk => "UNK",
            PuristClass::Ns => "NS",
        }
    }
}

impl Category for PragmaticClass {
    const ALL: &'static [PragmaticClass] = &[
        PragmaticClass::Infrequent,
        PragmaticClass::Frequent,
        PragmaticClass::Unk,
        PragmaticClass::Ns,
    ];
    const SCHEME: &'static str = "pragmatic";

    fn abbrev(self) -> &'static str {
        match self {
            PragmaticClass::Infrequent => "infrequent",
            PragmaticClass::Frequent => "frequent",
            PragmaticClass::Unk => "UNK",
            PragmaticClass::Ns => "NS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {scheme} class {text:?}")]
pub struct ClassParseError {
    pub scheme: &'static str,
    pub text: String,
}

fn parse_class<C: Category>(s: &str) -> Result<C, ClassParseError> {
    let t = s.trim();
    let t = if t == ">=1/D" { "≥1/D" } else { t };
    C::ALL
        .iter()
        .copied()
        .find(|c| c.abbrev() == t || c.abbrev().eq_ignore_ascii_case(t))
        .ok_or_else(|| ClassParseError {
            scheme: C::SCHEME,
            text: s.to_string(),
        })
}

macro_rules! class_traits {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.abbrev())
            }
        }

        impl FromStr for $ty {
            type Err = ClassParseError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                parse_class(s)
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.abbrev())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                parse_class(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

class_traits!(PuristClass);
class_traits!(PragmaticClass);

/// Upper bounds of the eight numeric Purist bins, in order.
pub const PURIST_BINS: [(f64, PuristClass); 8] = [
    (0.16, PuristClass::Lt1Per6M),
    (0.18, PuristClass::Eq1Per6M),
    (0.99, PuristClass::Betw6M1M),
    (1.1, PuristClass::Eq1PerM),
    (3.9, PuristClass::Betw1M1W),
    (4.1, PuristClass::Eq1PerW),
    (29.0, PuristClass::Betw1W1D),
    (999.0, PuristClass::Ge1PerD),
];

/// Upper bound of the infrequent bin.
pub const PRAGMATIC_SPLIT: f64 = 1.1;

fn check_domain(x: f64) -> Result<(), DomainError> {
    NormalizedFrequency::new(x).map(|_| ())
}

pub fn bin_purist(x: f64) -> Result<PuristClass, DomainError> {
    check_domain(x)?;
    if x == 0.0 {
        return Ok(PuristClass::Ns);
    }
    if x == 1000.0 {
        return Ok(PuristClass::Unk);
    }
    Ok(PURIST_BINS
        .iter()
        .find(|(hi, _)| x <= *hi)
        .map(|(_, c)| *c)
        .expect("x <= 999 lands in a bin"))
}

pub fn bin_pragmatic(x: f64) -> Result<PragmaticClass, DomainError> {
    check_domain(x)?;
    Ok(if x == 0.0 {
        PragmaticClass::Ns
    } else if x == 1000.0 {
        PragmaticClass::Unk
    } else if x <= PRAGMATIC_SPLIT {
        PragmaticClass::Infrequent
    } else {
        PragmaticClass::Frequent
    })
}

pub fn coarsen(c: PuristClass) -> PragmaticClass {
    use PuristClass::*;
    match c {
        Lt1Per6M | Eq1Per6M | Betw6M1M | Eq1PerM => PragmaticClass::Infrequent,
        Betw1M1W | Eq1PerW | Betw1W1D | Ge1PerD => PragmaticClass::Frequent,
        Unk => PragmaticClass::Unk,
        Ns => PragmaticClass::Ns,
    }
}

impl NormalizedFrequency {
    pub fn purist(self) -> PuristClass {
        bin_purist(self.value()).expect("validated on construction")
    }

    pub fn pragmatic(self) -> PragmaticClass {
        bin_pragmatic(self.value()).expect("validated on construction")
    }
}

impl PragmaticClass {
    /// The phrase a four-way categorical model is asked to emit.
    pub fn phrase(self) -> &'static str {
        match self {
            PragmaticClass::Infrequent => "infrequent seizures",
            PragmaticClass::Frequent => "frequent seizures",
            PragmaticClass::Unk => "unknown",
            PragmaticClass::Ns => "no seizures",
        }
    }
}
