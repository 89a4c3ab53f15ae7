//! Resolution of the model's nondeterministic choices.
//!
//! Every bounded delay, release jitter and sporadic separation goes through a
//! [`Choose`] implementation: [`StochasticChooser`] samples from the
//! counter-based generator, [`ScriptedChooser`] replays a decision vector and
//! records the option count at each choice point so an explorer can
//! enumerate all alternatives.

use crate::time::{Dur, TimePoint};
use serde::{Deserialize, Serialize};

/// One choice point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChoiceKind {
    /// A value in the inclusive range `[lo, hi]` (durations, jittered release
    /// instants, route latencies).
    Duration { lo: Dur, hi: Dur },
    /// A release instant at least `min_abs`, unbounded above (sporadic
    /// separations). Values beyond the horizon mean "no release within the
    /// analysis window".
    Release { min_abs: TimePoint, rate_per_us: f64 },
}

pub trait Choose {
    /// Resolves one choice. `raw` yields fresh draws from the caller's
    /// per-subject counter stream (ignored by scripted choosers).
    fn choose(&mut self, raw: &mut dyn FnMut() -> u64, kind: ChoiceKind) -> u64;
}

/// Samples choices uniformly (bounded) or exponentially (unbounded).
#[derive(Debug, Clone, Copy)]
pub struct StochasticChooser;

impl Choose for StochasticChooser {
    fn choose(&mut self, raw: &mut dyn FnMut() -> u64, kind: ChoiceKind) -> u64 {
        match kind {
            ChoiceKind::Duration { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    crate::rng::uniform_in(raw(), lo, hi)
                }
            }
            ChoiceKind::Release { min_abs, rate_per_us } => {
                min_abs.saturating_add(crate::rng::exponential(raw(), rate_per_us))
            }
        }
    }
}

/// Interval discretization for exhaustive exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branching {
    /// Intervals branch over their two endpoints.
    Endpoints,
    /// Intervals branch over every tick multiple they contain.
    FullTick,
}

/// Number of options and the value of option `i` for a choice under the
/// given discretization. Sporadic releases are clipped to the horizon, with
/// one extra option representing "beyond the horizon".
pub fn choice_options(kind: ChoiceKind, branching: Branching, tick: Dur, horizon: TimePoint) -> (u32, OptionFn) {
    match kind {
        ChoiceKind::Duration { lo, hi } => {
            if lo == hi {
                (1, OptionFn::Fixed(lo))
            } else {
                match branching {
                    Branching::Endpoints => (2, OptionFn::Pair(lo, hi)),
                    Branching::FullTick => {
                        let steps = (hi - lo) / tick.max(1);
                        (steps as u32 + 1, OptionFn::Stepped { lo, tick: tick.max(1) })
                    }
                }
            }
        }
        ChoiceKind::Release { min_abs, .. } => {
            let beyond = horizon + 1;
            if min_abs > horizon {
                (1, OptionFn::Fixed(beyond))
            } else {
                match branching {
                    Branching::Endpoints => (2, OptionFn::PairBeyond { first: min_abs, beyond }),
                    Branching::FullTick => {
                        let steps = (horizon - min_abs) / tick.max(1);
                        (steps as u32 + 2, OptionFn::SteppedBeyond { lo: min_abs, tick: tick.max(1), beyond })
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum OptionFn {
    Fixed(u64),
    Pair(u64, u64),
    PairBeyond { first: u64, beyond: u64 },
    Stepped { lo: u64, tick: u64 },
    SteppedBeyond { lo: u64, tick: u64, beyond: u64 },
}

impl OptionFn {
    pub fn value(&self, i: u32, count: u32) -> u64 {
        match *self {
            OptionFn::Fixed(v) => v,
            OptionFn::Pair(lo, hi) => {
                if i == 0 {
                    lo
                } else {
                    hi
                }
            }
            OptionFn::PairBeyond { first, beyond } => {
                if i == 0 {
                    first
                } else {
                    beyond
                }
            }
            OptionFn::Stepped { lo, tick } => lo + i as u64 * tick,
            OptionFn::SteppedBeyond { lo, tick, beyond } => {
                if i + 1 == count {
                    beyond
                } else {
                    lo + i as u64 * tick
                }
            }
        }
    }
}

/// Replays a decision vector, defaulting to option 0 past its end, and
/// records `(chosen, option count)` per choice point.
#[derive(Debug)]
pub struct ScriptedChooser<'a> {
    pub script: &'a [u32],
    pub pos: usize,
    pub branching: Branching,
    pub tick: Dur,
    pub horizon: TimePoint,
    pub trail: Vec<(u32, u32)>,
}

impl<'a> ScriptedChooser<'a> {
    pub fn new(script: &'a [u32], branching: Branching, tick: Dur, horizon: TimePoint) -> Self {
        Self { script, pos: 0, branching, tick, horizon, trail: Vec::new() }
    }
}

impl Choose for ScriptedChooser<'_> {
    fn choose(&mut self, _raw: &mut dyn FnMut() -> u64, kind: ChoiceKind) -> u64 {
        let (count, options) = choice_options(kind, self.branching, self.tick, self.horizon);
        let idx = if self.pos < self.script.len() { self.script[self.pos].min(count - 1) } else { 0 };
        self.pos += 1;
        self.trail.push((idx, count));
        options.value(idx, count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(kind: ChoiceKind, b: Branching, tick: Dur, horizon: TimePoint) -> Vec<u64> {
        let (count, f) = choice_options(kind, b, tick, horizon);
        (0..count).map(|i| f.value(i, count)).collect()
    }

    #[test]
    fn endpoint_options() {
        assert_eq!(opts(ChoiceKind::Duration { lo: 700, hi: 1100 }, Branching::Endpoints, 100, 10_000), vec![700, 1100]);
        assert_eq!(opts(ChoiceKind::Duration { lo: 5, hi: 5 }, Branching::Endpoints, 100, 10_000), vec![5]);
    }

    #[test]
    fn full_tick_options() {
        assert_eq!(
            opts(ChoiceKind::Duration { lo: 700, hi: 1100 }, Branching::FullTick, 100, 10_000),
            vec![700, 800, 900, 1000, 1100]
        );
    }

    #[test]
    fn release_options_clip_to_horizon() {
        let k = ChoiceKind::Release { min_abs: 900, rate_per_us: 0.001 };
        assert_eq!(opts(k, Branching::Endpoints, 100, 1_000), vec![900, 1_001]);
        assert_eq!(opts(k, Branching::FullTick, 100, 1_100), vec![900, 1_000, 1_100, 1_101]);
        let beyond = ChoiceKind::Release { min_abs: 2_000, rate_per_us: 0.001 };
        assert_eq!(opts(beyond, Branching::Endpoints, 100, 1_000), vec![1_001]);
    }

    #[test]
    fn scripted_records_trail_and_defaults_to_first() {
        let mut c = ScriptedChooser::new(&[1], Branching::Endpoints, 100, 10_000);
        let mut raw = || unreachable!("scripted choosers draw nothing");
        let a = c.choose(&mut raw, ChoiceKind::Duration { lo: 10, hi: 20 });
        let b = c.choose(&mut raw, ChoiceKind::Duration { lo: 30, hi: 40 });
        assert_eq!((a, b), (20, 30));
        assert_eq!(c.trail, vec![(1, 2), (0, 2)]);
    }

    #[test]
    fn stochastic_respects_bounds() {
        let mut c = StochasticChooser;
        let mut i = 0u64;
        let mut raw = || {
            i += 1;
            crate::rng::draw(9, 1, i)
        };
        for _ in 0..500 {
            let v = c.choose(&mut raw, ChoiceKind::Duration { lo: 100, hi: 300 });
            assert!((100..=300).contains(&v));
            let r = c.choose(&mut raw, ChoiceKind::Release { min_abs: 5_000, rate_per_us: 0.01 });
            assert!(r >= 5_000);
        }
    }
}
