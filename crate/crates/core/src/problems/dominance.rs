use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pareto dominance of one objective vector over another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// Strictly better in every component.
    Strict,
    /// No worse anywhere and different somewhere, but not strict.
    Weak,
    None,
}

impl Dominance {
    /// Strict dominance implies weak dominance.
    pub fn is_weak(self) -> bool {
        matches!(self, Dominance::Strict | Dominance::Weak)
    }
}

/// Classifies how `f1` dominates `f2` (minimization).
pub fn dominates<T: Real>(f1: &[T], f2: &[T]) -> Result<Dominance> {
    if f1.len() != f2.len() {
        return Err(Error::DimensionMismatch {
            expected: f1.len(),
            got: f2.len(),
        });
    }
    let all_lt = f1.iter().zip(f2).all(|(a, b)| a < b);
    if all_lt && !f1.is_empty() {
        return Ok(Dominance::Strict);
    }
    let all_le = f1.iter().zip(f2).all(|(a, b)| a <= b);
    let differs = f1.iter().zip(f2).any(|(a, b)| a != b);
    Ok(if all_le && differs {
        Dominance::Weak
    } else {
        Dominance::None
    })
}
