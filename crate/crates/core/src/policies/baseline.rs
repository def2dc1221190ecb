//! Round-robin and run-to-completion orders.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::{MachineView, Policy, PolicyDecision};
use crate::error::{Error, Result};
use crate::instances::{JobInstance, PredictionView};

/// Equal rates over all unfinished jobs.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundRobin;

impl Policy for RoundRobin {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision {
        PolicyDecision::share(view.n(), view.unfinished())
    }
}

/// Runs jobs one at a time, to completion, in a fixed order.
#[derive(Debug, Clone)]
pub struct Sequential {
    order: Vec<usize>,
    next: usize,
}

impl Sequential {
    /// `order` must be a permutation of `0..n`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &j in &order {
            if j >= order.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::param(format!("{order:?} is not a permutation")));
            }
        }
        Ok(Self { order, next: 0 })
    }

    /// Nondecreasing true size, ties by index.
    pub fn opt(x: &JobInstance) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x.sizes()[a].total_cmp(&x.sizes()[b]).then(a.cmp(&b)));
        Self { order, next: 0 }
    }

    /// Uniformly random order.
    pub fn rtc<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self { order, next: 0 }
    }

    /// Shortest predicted job first; needs a prediction for every job.
    /// Equal predictions are ordered uniformly at random.
    pub fn spjf<R: Rng + ?Sized>(n: usize, view: &PredictionView, rng: &mut R) -> Result<Self> {
        if view.len() != n {
            return Err(Error::Configuration(format!(
                "spjf needs predictions for all {n} jobs, got {}",
                view.len()
            )));
        }
        let mut pairs: Vec<(usize, f64)> = view.iter().collect();
        pairs.shuffle(rng);
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(Self { order: pairs.into_iter().map(|(j, _)| j).collect(), next: 0 })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

impl Policy for Sequential {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision {
        while self.next < self.order.len() && view.finished[self.order[self.next]] {
            self.next += 1;
        }
        match self.order.get(self.next) {
            Some(&j) => PolicyDecision::solo(view.n(), j),
            None => PolicyDecision::idle(view.n()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inst(v: &[f64]) -> JobInstance {
        JobInstance::new(v.to_vec()).unwrap()
    }

    #[test]
    fn opt_sums() {
        let x = inst(&[3.0, 1.0, 2.0]);
        let t = run(&mut Sequential::opt(&x), &x).unwrap();
        assert_eq!(t.completion, vec![6.0, 1.0, 3.0]);
        assert_eq!(t.objective, 10.0);
    }

    #[test]
    fn rr_example() {
        let x = inst(&[1.0, 2.0]);
        assert_eq!(run(&mut RoundRobin, &x).unwrap().objective, 5.0);
    }

    #[test]
    fn rtc_reversed_order() {
        let x = inst(&[1.0, 2.0]);
        let seed = (0..64)
            .find(|&s| Sequential::rtc(2, &mut ChaCha8Rng::seed_from_u64(s)).order() == [1, 0])
            .unwrap();
        let mut p = Sequential::rtc(2, &mut ChaCha8Rng::seed_from_u64(seed));
        let t = run(&mut p, &x).unwrap();
        assert_eq!(t.completion, vec![3.0, 2.0]);
        assert_eq!(t.objective, 5.0);
    }

    #[test]
    fn rtc_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut first = [0usize; 3];
        for _ in 0..30_000 {
            first[Sequential::rtc(3, &mut rng).order()[0]] += 1;
        }
        for c in first {
            assert!((c as f64 - 10_000.0).abs() < 400.0, "{first:?}");
        }
    }

    #[test]
    fn spjf_needs_full_view() {
        let view = PredictionView::new(2, vec![0], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(Sequential::spjf(2, &view, &mut rng), Err(Error::Configuration(_))));
    }

    #[test]
    fn spjf_follows_predictions() {
        let view = PredictionView::new(3, vec![0, 1, 2], vec![5.0, 1.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(Sequential::spjf(3, &view, &mut rng).unwrap().order(), &[1, 2, 0]);
    }

    #[test]
    fn rejects_non_permutation() {
        assert!(Sequential::new(vec![0, 0]).is_err());
        assert!(Sequential::new(vec![1, 2]).is_err());
    }
}
