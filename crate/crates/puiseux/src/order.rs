use std::cmp::Ordering;

use crate::error::PuiseuxError;
use crate::number::PuiseuxNumber;

/// Result of comparing two truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PxOrdering {
    Less,
    Equal,
    Greater,
    /// The difference vanishes up to the order where the operands are
    /// reliable, so the true sign is unknown.
    Indeterminate,
}

impl PxOrdering {
    pub fn to_ordering(self) -> Result<Ordering, PuiseuxError> {
        match self {
            PxOrdering::Less => Ok(Ordering::Less),
            PxOrdering::Equal => Ok(Ordering::Equal),
            PxOrdering::Greater => Ok(Ordering::Greater),
            PxOrdering::Indeterminate => Err(PuiseuxError::Indeterminate),
        }
    }
}

/// Orders `x` against `y` by the sign of the lowest-order term of `x - y`.
pub fn px_compare(x: &PuiseuxNumber, y: &PuiseuxNumber) -> PxOrdering {
    let d = x - y;
    match (d.valuation(), d.reliable_to()) {
        (None, None) => PxOrdering::Equal,
        (None, Some(_)) => PxOrdering::Indeterminate,
        (Some(v), Some(r)) if v >= r => PxOrdering::Indeterminate,
        _ => {
            if d.signum() > 0 {
                PxOrdering::Greater
            } else {
                PxOrdering::Less
            }
        }
    }
}

pub fn px_lt(x: &PuiseuxNumber, y: &PuiseuxNumber) -> Result<bool, PuiseuxError> {
    Ok(px_compare(x, y).to_ordering()? == Ordering::Less)
}

/// Larger of two values; errors when the order is undecidable.
pub fn px_max(x: &PuiseuxNumber, y: &PuiseuxNumber) -> Result<PuiseuxNumber, PuiseuxError> {
    match px_compare(x, y).to_ordering()? {
        Ordering::Less => Ok(y.clone()),
        _ => Ok(x.clone()),
    }
}

pub fn px_min(x: &PuiseuxNumber, y: &PuiseuxNumber) -> Result<PuiseuxNumber, PuiseuxError> {
    match px_compare(x, y).to_ordering()? {
        Ordering::Greater => Ok(y.clone()),
        _ => Ok(x.clone()),
    }
}

/// Max norm `max_i |x_i|`.
pub fn px_norm(v: &[PuiseuxNumber]) -> Result<PuiseuxNumber, PuiseuxError> {
    let mut best = PuiseuxNumber::zero();
    for x in v {
        best = px_max(&best, &x.abs())?;
    }
    Ok(best)
}
