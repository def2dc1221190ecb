//! Monte Carlo estimation of `E[ALG] / OPT` at one grid point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeds::{stream, stream_key, Purpose, SHARED_TRIAL};
use crate::analysis::{closed_form_objective, ObjectiveKind};
use crate::engine::{run_with, RunOptions};
use crate::error::{Error, Result};
use crate::instances::{
    apply_noise, prediction_error, sample_instance, sample_known_subset, JobInstance, NoiseModel,
    SizeDistribution,
};
use crate::policies::PolicyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Estimator {
    /// `mean(ALG) / mean(OPT)`.
    #[default]
    #[serde(rename = "rom", alias = "ratio-of-means")]
    RatioOfMeans,
    /// `mean(ALG / OPT)`.
    #[serde(rename = "mor", alias = "mean-of-ratios")]
    MeanOfRatios,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::RatioOfMeans => "rom",
            Estimator::MeanOfRatios => "mor",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rom" | "ratio-of-means" => Ok(Estimator::RatioOfMeans),
            "mor" | "mean-of-ratios" => Ok(Estimator::MeanOfRatios),
            _ => Err(Error::param(format!("unknown estimator {s:?} (rom|mor)"))),
        }
    }
}

/// Where job sizes come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSource {
    pub dist: SizeDistribution,
    pub n: usize,
    /// Draw a fresh instance per trial; otherwise draw one and reuse it.
    #[serde(default = "yes")]
    pub resample: bool,
}

fn yes() -> bool {
    true
}

impl InstanceSource {
    pub fn explicit(sizes: Vec<f64>) -> Self {
        let n = sizes.len();
        Self { dist: SizeDistribution::Explicit { sizes }, n, resample: false }
    }

    pub fn is_fixed(&self) -> bool {
        !self.resample || matches!(self.dist, SizeDistribution::Explicit { .. })
    }

    /// The instance of `trial` under master seed `seed`.
    pub fn instance(&self, seed: u64, trial: u64) -> Result<JobInstance> {
        let key = if self.is_fixed() { SHARED_TRIAL } else { trial };
        sample_instance(&self.dist, self.n, &mut stream(seed, key, Purpose::Instance))
    }
}

/// One coordinate of an experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatePoint {
    pub source: InstanceSource,
    pub b: usize,
    pub algorithm: PolicyConfig,
    pub noise: NoiseModel,
    pub trials: u64,
    pub seed: u64,
    pub estimator: Estimator,
}

/// Outcome of one simulated trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub alg: f64,
    pub opt: f64,
    /// Total prediction error on the known jobs.
    pub eta: f64,
}

/// Summary statistics of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean_alg: f64,
    pub mean_opt: f64,
    pub ratio: f64,
    pub std_err: f64,
    pub mean_eta: f64,
    pub trials: u64,
    pub exact: bool,
}

impl EstimatePoint {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.b > self.source.n {
            return Err(Error::param(format!("B = {} exceeds n = {}", self.b, self.source.n)));
        }
        self.source.dist.validate()?;
        self.noise.validate()?;
        self.algorithm.validate()
    }

    fn trial_inner(&self, trial: u64) -> Result<TrialOutcome> {
        let x = self.source.instance(self.seed, trial)?;
        let known = sample_known_subset(x.len(), self.b, &mut stream(self.seed, trial, Purpose::Subset))?;
        let view = apply_noise(&x, &known, self.noise, &mut stream(self.seed, trial, Purpose::Noise))?;
        let mut policy = self.algorithm.build(&x, &view, &mut stream(self.seed, trial, Purpose::Policy))?;
        let trace = run_with(&mut policy, &x, RunOptions::lean())?;
        Ok(TrialOutcome {
            alg: trace.objective,
            opt: closed_form_objective(ObjectiveKind::Opt, &x),
            eta: prediction_error(&x, &view),
        })
    }

    /// Runs trial `trial`; failures carry the trial's stream key.
    pub fn trial(&self, trial: u64) -> Result<TrialOutcome> {
        self.trial_inner(trial).map_err(|e| Error::Trial {
            trial,
            key: stream_key(self.seed, trial, Purpose::Policy),
            source: Box::new(e),
        })
    }

    /// All trial outcomes, in trial order, computed in parallel.
    pub fn outcomes(&self) -> Result<Vec<TrialOutcome>> {
        self.validate()?;
        let all: Vec<Result<TrialOutcome>> =
            (0..self.trials).into_par_iter().map(|t| self.trial(t)).collect();
        // First failure in trial order, whatever the thread schedule.
        all.into_iter().collect()
    }
}

/// Runs the point's trials and summarizes them.
pub fn estimate_ratio(point: &EstimatePoint) -> Result<Estimate> {
    let outcomes = point.outcomes()?;
    Ok(summarize(&outcomes, point.estimator))
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = v.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    s / k as f64
}

fn constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// Point estimate and standard error of the requested estimator.
///
/// The ratio of means uses the delta method,
/// `Var(A/O) ~ (s_A^2 - 2R s_AO + R^2 s_O^2) / (N mean_O^2)`.
pub fn summarize(outcomes: &[TrialOutcome], estimator: Estimator) -> Estimate {
    let n = outcomes.len();
    let a: Vec<f64> = outcomes.iter().map(|o| o.alg).collect();
    let o: Vec<f64> = outcomes.iter().map(|o| o.opt).collect();
    let mean_alg = mean(a.iter().copied());
    let mean_opt = mean(o.iter().copied());
    let mean_eta = mean(outcomes.iter().map(|o| o.eta));
    let nf = n as f64;
    let (ratio, std_err) = match estimator {
        Estimator::RatioOfMeans => {
            let r = mean_alg / mean_opt;
            let se = if n < 2 || (constant(&a) && constant(&o)) {
                0.0
            } else {
                let (mut saa, mut soo, mut sao) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(&o) {
                    let (da, d_o) = (x - mean_alg, y - mean_opt);
                    saa += da * da;
                    soo += d_o * d_o;
                    sao += da * d_o;
                }
                let k = nf - 1.0;
                let var = (saa / k - 2.0 * r * sao / k + r * r * soo / k) / (nf * mean_opt * mean_opt);
                var.max(0.0).sqrt()
            };
            (r, se)
        }
        Estimator::MeanOfRatios => {
            let q: Vec<f64> = a.iter().zip(&o).map(|(x, y)| x / y).collect();
            let m = mean(q.iter().copied());
            let se = if n < 2 || constant(&q) {
                0.0
            } else {
                let var = q.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nf - 1.0);
                (var / nf).sqrt()
            };
            (m, se)
        }
    };
    Estimate { mean_alg, mean_opt, ratio, std_err, mean_eta, trials: n as u64, exact: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(alg: PolicyConfig, source: InstanceSource, b: usize, trials: u64) -> EstimatePoint {
        EstimatePoint {
            source,
            b,
            algorithm: alg,
            noise: NoiseModel::None,
            trials,
            seed: 42,
            estimator: Estimator::RatioOfMeans,
        }
    }

    #[test]
    fn round_robin_deterministic() {
        let p = point(PolicyConfig::RoundRobin, InstanceSource::explicit(vec![1.0, 2.0]), 1, 50);
        let e = estimate_ratio(&p).unwrap();
        assert_eq!(e.ratio, 1.25);
        assert_eq!(e.std_err, 0.0);
    }

    #[test]
    fn opt_is_one() {
        let src = InstanceSource { dist: SizeDistribution::Exponential { rate: 1.0 }, n: 8, resample: true };
        for est in [Estimator::RatioOfMeans, Estimator::MeanOfRatios] {
            let mut p = point(PolicyConfig::Opt, src.clone(), 3, 100);
            p.estimator = est;
            let e = estimate_ratio(&p).unwrap();
            assert_eq!(e.ratio, 1.0);
            assert_eq!(e.std_err, 0.0);
        }
    }

    #[test]
    fn std_err_shrinks_with_trials() {
        let src = InstanceSource { dist: SizeDistribution::Exponential { rate: 1.0 }, n: 6, resample: true };
        let small = estimate_ratio(&point(PolicyConfig::Rtc, src.clone(), 0, 1000)).unwrap();
        let large = estimate_ratio(&point(PolicyConfig::Rtc, src, 0, 4000)).unwrap();
        let q = small.std_err / large.std_err;
        assert!((1.0..4.0).contains(&q), "ratio of standard errors {q}");
    }

    #[test]
    fn fixed_instance_is_shared() {
        let src = InstanceSource { dist: SizeDistribution::Exponential { rate: 1.0 }, n: 5, resample: false };
        assert_eq!(src.instance(3, 0).unwrap(), src.instance(3, 99).unwrap());
        let src = InstanceSource { resample: true, ..src };
        assert_ne!(src.instance(3, 0).unwrap(), src.instance(3, 1).unwrap());
    }

    #[test]
    fn parallel_matches_sequential() {
        let src = InstanceSource { dist: SizeDistribution::Exponential { rate: 1.0 }, n: 7, resample: true };
        let p = point(PolicyConfig::NoisySwitch { rho: 0.3 }, src, 3, 64);
        let par = p.outcomes().unwrap();
        let seq: Vec<TrialOutcome> = (0..64).map(|t| p.trial(t).unwrap()).collect();
        assert_eq!(par, seq);
    }

    #[test]
    fn failures_carry_trial() {
        let p = point(PolicyConfig::Spjf, InstanceSource::explicit(vec![1.0, 2.0]), 1, 3);
        match estimate_ratio(&p) {
            Err(Error::Trial { trial, source, .. }) => {
                assert_eq!(trial, 0);
                assert!(matches!(*source, Error::Configuration(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn estimator_parsing() {
        assert_eq!("rom".parse::<Estimator>().unwrap(), Estimator::RatioOfMeans);
        assert_eq!("mor".parse::<Estimator>().unwrap(), Estimator::MeanOfRatios);
        assert!("x".parse::<Estimator>().is_err());
    }
}
