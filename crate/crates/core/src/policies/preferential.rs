//! Blending a prediction-driven policy with round-robin.
//!
//! The inner policy gets a `lambda` share of the machine and round-robin
//! gets the rest. By default the inner policy only sees what its own share
//! has processed, as if it ran alone on a machine of speed `lambda`.

use serde::{Deserialize, Serialize};

use crate::engine::{Cause, MachineView, Policy, PolicyDecision, Trigger};
use crate::error::{Error, Result};

/// Which processed amounts the inner policy observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerView {
    /// Only the work done by the inner share.
    #[default]
    Own,
    /// Total work done on each job.
    Total,
}

pub struct Preferential<P> {
    lambda: f64,
    inner: P,
    mode: InnerView,
    virtual_done: Vec<f64>,
    inner_rates: Vec<f64>,
    /// Inner thresholds and the engine thresholds they were mapped to.
    pending: Vec<(Trigger, f64)>,
    causes: Vec<Cause>,
}

impl<P: Policy> Preferential<P> {
    pub fn new(lambda: f64, inner: P, mode: InnerView) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::param(format!("lambda = {lambda} outside [0, 1]")));
        }
        Ok(Self {
            lambda,
            inner,
            mode,
            virtual_done: Vec::new(),
            inner_rates: Vec::new(),
            pending: Vec::new(),
            causes: Vec::new(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Work credited to the inner share so far.
    pub fn inner_processed(&self) -> &[f64] {
        &self.virtual_done
    }

    fn accrue(&mut self, view: &MachineView<'_>) {
        let n = view.n();
        if self.virtual_done.len() != n {
            self.virtual_done = vec![0.0; n];
            self.inner_rates = vec![0.0; n];
        }
        for (v, &a) in self.virtual_done.iter_mut().zip(&self.inner_rates) {
            if a > 0.0 {
                *v += self.lambda * a * view.elapsed;
            }
        }
        self.causes.clear();
        for c in view.causes {
            match *c {
                Cause::Completion(_) => self.causes.push(*c),
                Cause::Trigger { job, threshold } => {
                    let hit = self
                        .pending
                        .iter()
                        .find(|(t, total)| t.job == job && *total == threshold);
                    if let Some(&(t, _)) = hit {
                        self.virtual_done[job] = t.threshold;
                        self.causes.push(Cause::Trigger { job, threshold: t.threshold });
                    }
                }
            }
        }
    }
}

impl<P: Policy> Policy for Preferential<P> {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision {
        let n = view.n();
        let lambda = self.lambda;
        let inner_decision = match self.mode {
            InnerView::Own => {
                self.accrue(view);
                let inner_view = MachineView {
                    now: view.now,
                    elapsed: view.elapsed,
                    processed: &self.virtual_done,
                    finished: view.finished,
                    causes: &self.causes,
                };
                self.inner.decide(&inner_view)
            }
            InnerView::Total => self.inner.decide(view),
        };
        let rr = PolicyDecision::share(n, view.unfinished());
        let rates: Vec<f64> = inner_decision
            .rates
            .iter()
            .zip(&rr.rates)
            .map(|(&a, &r)| lambda * a + (1.0 - lambda) * r)
            .collect();

        self.pending.clear();
        let mut triggers = Vec::new();
        for t in inner_decision.triggers {
            let share = lambda * inner_decision.rates.get(t.job).copied().unwrap_or(0.0);
            if share <= 0.0 {
                continue;
            }
            let total = match self.mode {
                InnerView::Total => t.threshold,
                InnerView::Own => {
                    let s = view.processed[t.job];
                    let v = self.virtual_done[t.job];
                    let r = rates[t.job];
                    if r == share && v == s {
                        t.threshold
                    } else {
                        (s + (t.threshold - v) * r / share).max(s.next_up())
                    }
                }
            };
            self.pending.push((t, total));
            triggers.push(Trigger { job: t.job, threshold: total });
        }
        self.inner_rates = inner_decision.rates;
        PolicyDecision { rates, triggers }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::instances::{JobInstance, PredictionView};
    use crate::policies::{RoundRobin, Switch};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (JobInstance, PredictionView) {
        let x = JobInstance::new(vec![1.0, 3.0, 0.5, 2.0, 2.5, 0.7]).unwrap();
        let view = PredictionView::new(6, vec![1, 3, 5], vec![2.5, 0.2, 4.0]).unwrap();
        (x, view)
    }

    fn inner(view: &PredictionView) -> Switch {
        Switch::from_predictions(6, view, &mut ChaCha8Rng::seed_from_u64(5)).unwrap()
    }

    #[test]
    fn full_lambda_is_inner() {
        let (x, view) = setup();
        let a = run(&mut Preferential::new(1.0, inner(&view), InnerView::Own).unwrap(), &x).unwrap();
        let b = run(&mut inner(&view), &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_lambda_is_round_robin() {
        let (x, view) = setup();
        let a = run(&mut Preferential::new(0.0, inner(&view), InnerView::Own).unwrap(), &x).unwrap();
        let b = run(&mut RoundRobin, &x).unwrap();
        assert_eq!(a.completion, b.completion);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.events, b.events);
    }

    #[test]
    fn half_lambda_completes() {
        let (x, view) = setup();
        for mode in [InnerView::Own, InnerView::Total] {
            let mut p = Preferential::new(0.5, inner(&view), mode).unwrap();
            let t = run(&mut p, &x).unwrap();
            assert!(t.completion.iter().all(|c| c.is_finite()));
        }
    }

    #[test]
    fn own_view_tracks_inner_share() {
        let x = JobInstance::new(vec![1.0, 2.0]).unwrap();
        let view = PredictionView::perfect(&x, vec![1]).unwrap();
        let sw = Switch::from_predictions(2, &view, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut p = Preferential::new(0.5, sw, InnerView::Own).unwrap();
        let t = run(&mut p, &x).unwrap();
        // Rates 3/4, 1/4 until job 0 ends at t=4/3, then job 1 alone.
        assert!((t.completion[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((t.completion[1] - 3.0).abs() < 1e-12);
        assert!((p.inner_processed()[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_range() {
        let (_, view) = setup();
        assert!(Preferential::new(1.5, inner(&view), InnerView::Own).is_err());
    }
}
