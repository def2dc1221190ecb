//! Catch-up round-robin for exactly known sizes.
//!
//! Known jobs are handled one by one in nondecreasing size. Each phase first
//! lets the current known job catch up, alone, to the size of the previous
//! known job; it then shares the machine equally with all unfinished unknown
//! jobs until it completes. Unknown jobs left over at the end share the
//! machine equally.

use crate::engine::{MachineView, Policy, PolicyDecision};
use crate::instances::PredictionView;
use crate::tol;

#[derive(Debug, Clone)]
pub struct Crrr {
    /// Known jobs with their (trusted) sizes, sorted by size then index.
    order: Vec<(usize, f64)>,
    known: Vec<bool>,
    phase: usize,
}

impl Crrr {
    /// The view's predictions are taken as exact sizes.
    pub fn new(n: usize, view: &PredictionView) -> Self {
        let mut order: Vec<(usize, f64)> = view.iter().collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        Self { order, known: view.known_mask(n), phase: 0 }
    }

    /// Known jobs in processing order.
    pub fn order(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().map(|&(j, _)| j)
    }

    fn unknown_unfinished<'a>(&'a self, view: &'a MachineView<'_>) -> impl Iterator<Item = usize> + 'a {
        view.unfinished().filter(move |&i| !self.known[i])
    }
}

impl Policy for Crrr {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision {
        let n = view.n();
        while self.phase < self.order.len() && view.finished[self.order[self.phase].0] {
            self.phase += 1;
        }
        let Some(&(job, _)) = self.order.get(self.phase) else {
            return PolicyDecision::share(n, self.unknown_unfinished(view));
        };
        let catch_up = match self.phase {
            0 => 0.0,
            k => self.order[k - 1].1,
        };
        if !tol::reached(view.processed[job], catch_up) {
            return PolicyDecision::solo(n, job).with_trigger(job, catch_up);
        }
        let group: Vec<usize> = self.unknown_unfinished(view).chain([job]).collect();
        PolicyDecision::share(n, group)
    }
}
