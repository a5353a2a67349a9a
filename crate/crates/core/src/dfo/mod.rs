//! Derivative-free minimizers: Nelder-Mead and DIRECT.
//!
//! Both are deterministic and treat non-finite objective values as `+inf`.

mod direct;
mod nelder_mead;

pub use direct::{direct_optimize, DirectOptions};
pub use nelder_mead::{nelder_mead, NelderMeadOptions};

use nalgebra::DVector;

use crate::scalar::Real;

/// Optimizer history.
#[derive(Debug, Clone)]
pub struct DfoTrace<T: Real> {
    /// Incumbent `(point, value)` after each iteration; values never increase.
    pub iterates: Vec<(DVector<T>, T)>,
    pub best_point: DVector<T>,
    pub best_value: T,
    pub evaluations: usize,
    pub converged: bool,
}

/// Running best point, checkpointed once per iteration.
pub(crate) struct Incumbent<T: Real> {
    best: Option<(DVector<T>, T)>,
    iterates: Vec<(DVector<T>, T)>,
}

impl<T: Real> Incumbent<T> {
    pub(crate) fn new() -> Self {
        Self {
            best: None,
            iterates: Vec::new(),
        }
    }

    pub(crate) fn offer(&mut self, x: &DVector<T>, v: T) {
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.clone(), v));
        }
    }

    pub(crate) fn checkpoint(&mut self) {
        if let Some(b) = &self.best {
            self.iterates.push(b.clone());
        }
    }

    pub(crate) fn finish(mut self, evaluations: usize, converged: bool) -> DfoTrace<T> {
        let (best_point, best_value) = self.best.take().expect("at least one evaluation");
        if self.iterates.last().is_none_or(|(_, v)| *v != best_value) {
            self.iterates.push((best_point.clone(), best_value));
        }
        DfoTrace {
            iterates: self.iterates,
            best_point,
            best_value,
            evaluations,
            converged,
        }
    }
}
