use std::fmt;

use serde::{Deserialize, Serialize};

/// A nonnegative radius or the explicit "no finite bound" value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Radius {
    Finite(f64),
    Unbounded,
}

impl Radius {
    pub fn finite(self) -> Option<f64> {
        match self {
            Radius::Finite(r) => Some(r),
            Radius::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Radius::Unbounded)
    }

    /// Value with `Unbounded` mapped to +inf; convenient for min-reductions.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn min(self, other: Radius) -> Radius {
        match (self, other) {
            (Radius::Unbounded, x) | (x, Radius::Unbounded) => x,
            (Radius::Finite(a), Radius::Finite(b)) => Radius::Finite(a.min(b)),
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Unbounded => f.write_str("unbounded"),
        }
    }
}
