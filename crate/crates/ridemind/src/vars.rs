//! Discrete variables and the categorical states of an interaction event.
//!
//! Latent states use bins over [0, 1]; everything else is a two-valued
//! categorical. Index 0 is always the "positive" value (yield, aligned is
//! the exception: `AL0` = not aligned gets index 0 so the token and the
//! index agree).

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A named discrete variable with a fixed number of states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub cardinality: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Result<Self> {
        let name = name.into();
        if cardinality < 2 {
            return Err(Error::model(format!(
                "variable {name:?} must have cardinality >= 2, got {cardinality}"
            )));
        }
        Ok(Variable { name, cardinality })
    }

    /// Panicking constructor for statically known-good variables.
    #[cfg(test)]
    pub(crate) fn fixed(name: &str, cardinality: usize) -> Self {
        Variable::new(name, cardinality).expect("valid variable")
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.cardinality)
    }
}

/// Which agent takes the accommodative action in an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Contributor {
    /// The AV (ego scooter) acts; the other road user receives.
    R,
    /// The other road user acts; the AV user receives.
    O,
}

/// The AV's accommodative action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AvAction {
    /// R+: yield to the other road user.
    Yield,
    /// R-: do not yield.
    Unyield,
}

/// The other road user's accommodative action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OtherAction {
    /// O+: yield to the AV.
    Yield,
    /// O-: do not yield.
    Unyield,
}

/// The user's stated intention for the AV's action toward the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intention {
    /// I+: wants the AV to yield.
    Yield,
    /// I-: wants the AV not to yield.
    Unyield,
}

/// Whether the AV's action agreed with the user's stated intention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alignment {
    /// Al0: action contradicted the intention.
    NotAligned,
    /// Al1: action matched the intention.
    Aligned,
}

macro_rules! two_valued {
    ($ty:ident, $v0:ident => $t0:literal, $v1:ident => $t1:literal) => {
        impl $ty {
            pub const VALUES: [$ty; 2] = [$ty::$v0, $ty::$v1];

            /// State index used in factor tables.
            pub fn index(self) -> usize {
                match self {
                    $ty::$v0 => 0,
                    $ty::$v1 => 1,
                }
            }

            pub fn from_index(i: usize) -> Result<Self> {
                match i {
                    0 => Ok($ty::$v0),
                    1 => Ok($ty::$v1),
                    _ => Err(Error::usage(format!(
                        concat!(stringify!($ty), " index out of range: {}"),
                        i
                    ))),
                }
            }

            /// Canonical token used in CSV logs and CLI arguments.
            pub fn token(self) -> &'static str {
                match self {
                    $ty::$v0 => $t0,
                    $ty::$v1 => $t1,
                }
            }

            pub fn parse_token(s: &str) -> Result<Self> {
                match s {
                    $t0 => Ok($ty::$v0),
                    $t1 => Ok($ty::$v1),
                    _ => Err(Error::usage(format!(
                        concat!("unknown ", stringify!($ty), " token {:?} (expected {} or {})"),
                        s, $t0, $t1
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }
    };
}

two_valued!(AvAction, Yield => "R_PLUS", Unyield => "R_MINUS");
two_valued!(OtherAction, Yield => "O_PLUS", Unyield => "O_MINUS");
two_valued!(Intention, Yield => "I_PLUS", Unyield => "I_MINUS");
two_valued!(Alignment, NotAligned => "AL0", Aligned => "AL1");

impl Contributor {
    pub fn token(self) -> &'static str {
        match self {
            Contributor::R => "R",
            Contributor::O => "O",
        }
    }

    pub fn parse_token(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(Contributor::R),
            "O" => Ok(Contributor::O),
            _ => Err(Error::usage(format!(
                "unknown contributor token {s:?} (expected R or O)"
            ))),
        }
    }
}

impl fmt::Display for Contributor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Alignment between a stated intention and the AV action actually taken.
pub fn alignment_of(intention: Intention, action: AvAction) -> Alignment {
    match (intention, action) {
        (Intention::Yield, AvAction::Yield) | (Intention::Unyield, AvAction::Unyield) => {
            Alignment::Aligned
        }
        _ => Alignment::NotAligned,
    }
}
