use super::StepPath;
use crate::state_space::{ClosedInterval, OpenInterval};

/// Stopping times evaluable on any step path, with values in `[0, ∞]`.
#[derive(Clone, Debug, PartialEq)]
pub enum StoppingSpec {
    /// Deterministic time.
    Time(f64),
    /// `τ^U` for an open interval `U`.
    Exit(OpenInterval),
    /// Exit of the open set `S ∖ K`, i.e. the first entrance into `K`.
    Enter(ClosedInterval),
    Min(Box<StoppingSpec>, Box<StoppingSpec>),
}

impl StoppingSpec {
    pub fn min(self, other: StoppingSpec) -> StoppingSpec {
        StoppingSpec::Min(Box::new(self), Box::new(other))
    }

    pub fn eval(&self, path: &StepPath) -> f64 {
        match self {
            StoppingSpec::Time(t) => t.max(0.0),
            StoppingSpec::Exit(u) => path.exit_time(u),
            StoppingSpec::Enter(k) => path
                .first_knot_where(|v| k.contains_value(v))
                .map_or(path.explosion_time(), |i| path.time(i)),
            StoppingSpec::Min(a, b) => a.eval(path).min(b.eval(path)),
        }
    }
}
