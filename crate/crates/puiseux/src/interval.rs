use crate::error::PuiseuxError;
use crate::number::PuiseuxNumber;
use crate::order::{px_compare, px_min, px_norm, PxOrdering};

/// A convex subset `{t : 0 <= t <= right_end}` (or `< right_end`) of the
/// nonnegative part of the field. Distances between sets and volumes are
/// values of this kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSubset {
    pub right_end: PuiseuxNumber,
    pub closed: bool,
}

impl IntervalSubset {
    pub fn closed(right_end: PuiseuxNumber) -> Result<Self, PuiseuxError> {
        match px_compare(&right_end, &PuiseuxNumber::zero()) {
            PxOrdering::Less => Err(PuiseuxError::InvalidCell(format!(
                "negative right end {right_end}"
            ))),
            PxOrdering::Indeterminate => Err(PuiseuxError::Indeterminate),
            _ => Ok(IntervalSubset { right_end, closed: true }),
        }
    }

    pub fn contains(&self, t: &PuiseuxNumber) -> Result<bool, PuiseuxError> {
        if px_compare(t, &PuiseuxNumber::zero()) == PxOrdering::Less {
            return Ok(false);
        }
        match px_compare(t, &self.right_end) {
            PxOrdering::Less => Ok(true),
            PxOrdering::Equal => Ok(self.closed),
            PxOrdering::Greater => Ok(false),
            PxOrdering::Indeterminate => Err(PuiseuxError::Indeterminate),
        }
    }
}

impl std::fmt::Display for IntervalSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[0, {}{}", self.right_end, if self.closed { "]" } else { ")" })
    }
}

/// `dist(A, B)` for finite sets of points under the max norm: the closed
/// interval from 0 to the smallest pairwise distance.
pub fn px_dist_set(
    a: &[Vec<PuiseuxNumber>],
    b: &[Vec<PuiseuxNumber>],
) -> Result<IntervalSubset, PuiseuxError> {
    if a.is_empty() || b.is_empty() {
        return Err(PuiseuxError::EmptySet);
    }
    let mut best: Option<PuiseuxNumber> = None;
    for p in a {
        for q in b {
            if p.len() != q.len() {
                return Err(PuiseuxError::InvalidCell("dimension mismatch".into()));
            }
            let diff: Vec<_> = p.iter().zip(q).map(|(x, y)| x - y).collect();
            let d = px_norm(&diff)?;
            best = Some(match best {
                None => d,
                Some(cur) => px_min(&cur, &d)?,
            });
        }
    }
    IntervalSubset::closed(best.expect("nonempty"))
}
