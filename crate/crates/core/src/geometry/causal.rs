use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalKind {
    Timelike,
    Null,
    Spacelike,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeOrientation {
    Future,
    Past,
    NotApplicable,
}

impl TimeOrientation {
    pub fn flipped(self) -> Self {
        match self {
            TimeOrientation::Future => TimeOrientation::Past,
            TimeOrientation::Past => TimeOrientation::Future,
            TimeOrientation::NotApplicable => TimeOrientation::NotApplicable,
        }
    }
}

/// Causal character of a vector: timelike/null/spacelike/zero and, for
/// non-spacelike nonzero vectors, its time orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CausalCharacter {
    pub kind: CausalKind,
    pub time: TimeOrientation,
}

impl CausalCharacter {
    pub fn is_causal(&self) -> bool {
        matches!(self.kind, CausalKind::Timelike | CausalKind::Null)
    }
}

impl fmt::Display for CausalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.time) {
            (CausalKind::Zero, _) => write!(f, "zero"),
            (CausalKind::Spacelike, _) => write!(f, "spacelike"),
            (CausalKind::Timelike, TimeOrientation::Future) => write!(f, "timelike-future"),
            (CausalKind::Timelike, _) => write!(f, "timelike-past"),
            (CausalKind::Null, TimeOrientation::Future) => write!(f, "null-future"),
            (CausalKind::Null, _) => write!(f, "null-past"),
        }
    }
}
