//! Switching between round-robin on unknown jobs and solo runs of known ones.
//!
//! Known jobs carry breakpoints `z`. Taking them in breakpoint order, the
//! policy round-robins the unknown jobs until their common processed amount
//! reaches the next breakpoint (or they all finish), then runs that known job
//! alone to completion. Unknown jobs left at the end share the machine.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::engine::{MachineView, Policy, PolicyDecision};
use crate::error::{Error, Result};
use crate::instances::PredictionView;
use crate::tol;

/// Breakpoints of the known jobs and the order in which they are served.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointSet {
    /// `(job, z)` sorted by `z`; equal values in uniformly random order.
    order: Vec<(usize, f64)>,
}

impl BreakpointSet {
    pub fn new<R: Rng + ?Sized>(mut pairs: Vec<(usize, f64)>, rng: &mut R) -> Result<Self> {
        if let Some((j, z)) = pairs.iter().find(|(_, z)| !(z.is_finite() && *z >= 0.0)) {
            return Err(Error::param(format!("breakpoint {z} of job {j}")));
        }
        pairs.shuffle(rng);
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(Self { order: pairs })
    }

    /// `z = y`.
    pub fn from_predictions<R: Rng + ?Sized>(view: &PredictionView, rng: &mut R) -> Result<Self> {
        Self::new(view.iter().collect(), rng)
    }

    /// `z = factor * y`.
    pub fn scaled<R: Rng + ?Sized>(view: &PredictionView, factor: f64, rng: &mut R) -> Result<Self> {
        Self::new(view.iter().map(|(j, y)| (j, factor * y)).collect(), rng)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.order.iter().copied()
    }

    pub fn breakpoint_of(&self, job: usize) -> Option<f64> {
        self.iter().find(|&(j, _)| j == job).map(|(_, z)| z)
    }

    /// True when every pair of jobs is ordered the same way by `z` and by
    /// the predictions.
    pub fn agrees_with(&self, view: &PredictionView) -> bool {
        let y: Vec<Option<f64>> = self.iter().map(|(j, _)| view.prediction_of(j)).collect();
        if y.iter().any(Option::is_none) || self.len() != view.len() {
            return false;
        }
        let y: Vec<f64> = y.into_iter().flatten().collect();
        for a in 0..self.len() {
            for b in 0..self.len() {
                let (za, zb) = (self.order[a].1, self.order[b].1);
                if (za < zb) != (y[a] < y[b]) {
                    return false;
                }
            }
        }
        true
    }

    /// Breakpoints are pairwise distinct, so the order is not random.
    pub fn is_strict(&self) -> bool {
        self.order.windows(2).all(|w| w[0].1 < w[1].1)
    }
}

#[derive(Debug, Clone)]
pub struct Switch {
    breakpoints: BreakpointSet,
    known: Vec<bool>,
    phase: usize,
    started: bool,
}

impl Switch {
    pub fn new(n: usize, breakpoints: BreakpointSet) -> Result<Self> {
        let mut known = vec![false; n];
        for (j, _) in breakpoints.iter() {
            if j >= n || std::mem::replace(&mut known[j], true) {
                return Err(Error::param(format!("breakpoint job {j} invalid for n = {n}")));
            }
        }
        Ok(Self { breakpoints, known, phase: 0, started: false })
    }

    /// Breakpoints equal to the predictions.
    pub fn from_predictions<R: Rng + ?Sized>(n: usize, view: &PredictionView, rng: &mut R) -> Result<Self> {
        Self::new(n, BreakpointSet::from_predictions(view, rng)?)
    }

    pub fn breakpoints(&self) -> &BreakpointSet {
        &self.breakpoints
    }
}

impl Policy for Switch {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision {
        let n = view.n();
        let order = &self.breakpoints.order;
        while self.phase < order.len() && view.finished[order[self.phase].0] {
            self.phase += 1;
            self.started = false;
        }
        let waiting: Vec<usize> = view.unfinished().filter(|&i| !self.known[i]).collect();
        let Some(&(job, z)) = order.get(self.phase) else {
            return PolicyDecision::share(n, waiting);
        };
        let common = waiting.iter().map(|&i| view.processed[i]).fold(0.0, f64::max);
        if self.started || waiting.is_empty() || tol::reached(common, z) {
            self.started = true;
            return PolicyDecision::solo(n, job);
        }
        let mut d = PolicyDecision::share(n, waiting.iter().copied());
        for &i in &waiting {
            d = d.with_trigger(i, z);
        }
        d
    }
}

/// Draws the breakpoint scale `xi = 1 + E`, with `E` exponential of mean
/// `rho`. For `rho = 0` it returns 1 without touching `rng`.
pub fn draw_scale<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param(format!("rho = {rho} outside [0, 1]")));
    }
    if rho == 0.0 {
        return Ok(1.0);
    }
    let e = Exp::new(1.0 / rho).map_err(|e| Error::param(e.to_string()))?;
    Ok(1.0 + e.sample(rng))
}

/// Switch with breakpoints `xi * y` for one random `xi >= 1`.
pub fn noisy_switch<R: Rng + ?Sized>(
    n: usize,
    view: &PredictionView,
    rho: f64,
    rng: &mut R,
) -> Result<Switch> {
    let xi = draw_scale(rho, rng)?;
    Switch::new(n, BreakpointSet::scaled(view, xi, rng)?)
}
