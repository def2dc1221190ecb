//! Exact expectations by enumerating every equally likely outcome.
//!
//! The randomness covered is the known set (all `C(n, B)` subsets are
//! equally likely), the order of random run-to-completion, and the coin of
//! a mixture. Policies with continuous randomness are refused.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{closed_form_objective, ObjectiveKind};
use crate::engine::{run_with, RunOptions};
use crate::error::{Error, Result};
use crate::instances::{JobInstance, NoiseModel, PredictionView};
use crate::policies::{PolicyConfig, Sequential};

pub const DEFAULT_CAP: u128 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValue {
    pub expected: f64,
    /// Number of engine runs behind the value.
    pub outcomes: u128,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |a, b| a.saturating_mul(b))
}

/// Runs needed to evaluate `config` exactly on `n` jobs with `b` known.
pub fn required_outcomes(config: &PolicyConfig, n: usize, b: usize, cap: u128) -> Result<u128> {
    Ok(match config {
        PolicyConfig::Opt | PolicyConfig::RoundRobin => 1,
        PolicyConfig::Rtc => {
            let f = factorial(n);
            if f <= cap {
                f
            } else {
                1
            }
        }
        PolicyConfig::NoisySwitch { rho } if *rho > 0.0 => {
            return Err(Error::Unsupported(format!(
                "{} draws a continuous breakpoint scale",
                config.label()
            )))
        }
        PolicyConfig::Preferential { inner, .. } => {
            required_outcomes(inner, n, b, cap)?;
            binomial(n, b)
        }
        PolicyConfig::Crrr | PolicyConfig::Switch | PolicyConfig::NoisySwitch { .. } | PolicyConfig::Spjf => {
            binomial(n, b)
        }
        PolicyConfig::Mixture { a, b: second, .. } => {
            required_outcomes(a, n, b, cap)?.saturating_add(required_outcomes(second, n, b, cap)?)
        }
    })
}

fn deterministic_predictions(x: &JobInstance, known: &[usize], noise: NoiseModel) -> Result<PredictionView> {
    let preds = match noise {
        NoiseModel::None => known.iter().map(|&j| x.sizes()[j]).collect(),
        NoiseModel::Gaussian { tau } | NoiseModel::Uniform { tau } if tau == 0.0 => {
            known.iter().map(|&j| x.sizes()[j]).collect()
        }
        NoiseModel::AdversarialConstant { c } => vec![c; known.len()],
        other => {
            return Err(Error::Unsupported(format!("random prediction noise {other:?}")));
        }
    };
    PredictionView::new(x.len(), known.to_vec(), preds)
}

/// Whether the policy orders known jobs by prediction with random ties.
fn breaks_ties_randomly(config: &PolicyConfig) -> bool {
    match config {
        PolicyConfig::Switch | PolicyConfig::NoisySwitch { .. } | PolicyConfig::Spjf => true,
        PolicyConfig::Preferential { inner, .. } => breaks_ties_randomly(inner),
        _ => false,
    }
}

fn has_ties(view: &PredictionView) -> bool {
    let mut y = view.predictions().to_vec();
    y.sort_by(f64::total_cmp);
    y.windows(2).any(|w| w[0] == w[1])
}

/// Calls `f` on every `k`-subset of `0..n`, in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p)?;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(())
}

/// Exact `E[ALG(x)]` over the known set and the policy's discrete randomness.
///
/// Random run-to-completion is enumerated over all `n!` orders while that
/// fits under `cap`; beyond it the expectation is taken pair by pair (each
/// of two jobs precedes the other with probability 1/2), which is exact.
pub fn exact_expected_objective(
    config: &PolicyConfig,
    x: &JobInstance,
    b: usize,
    noise: NoiseModel,
    cap: u128,
) -> Result<ExactValue> {
    config.validate()?;
    let n = x.len();
    if b > n {
        return Err(Error::param(format!("B = {b} exceeds n = {n}")));
    }
    let required = required_outcomes(config, n, b, cap)?;
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    evaluate(config, x, b, noise, cap)
}

fn evaluate(config: &PolicyConfig, x: &JobInstance, b: usize, noise: NoiseModel, cap: u128) -> Result<ExactValue> {
    let n = x.len();
    let lean = RunOptions::lean();
    match config {
        PolicyConfig::Opt => Ok(ExactValue { expected: closed_form_objective(ObjectiveKind::Opt, x), outcomes: 1 }),
        PolicyConfig::RoundRobin => Ok(ExactValue {
            expected: closed_form_objective(ObjectiveKind::RoundRobin, x),
            outcomes: 1,
        }),
        PolicyConfig::Rtc => {
            let count = factorial(n);
            if count > cap {
                let total = x.total();
                // Pairs contribute (x_i + x_j)/2 each; summed, (n-1)/2 * sum x.
                let expected = total + (n as f64 - 1.0) / 2.0 * total;
                return Ok(ExactValue { expected, outcomes: 1 });
            }
            let mut sum = 0.0;
            for_each_permutation(n, |order| {
                let mut p = Sequential::new(order.to_vec())?;
                sum += run_with(&mut p, x, lean)?.objective;
                Ok(())
            })?;
            Ok(ExactValue { expected: sum / count as f64, outcomes: count })
        }
        PolicyConfig::Mixture { a, b: second, .. } => {
            let p = config.mixture_p(n, b)?.expect("mixture has a probability");
            let ea = evaluate(a, x, b, noise, cap)?;
            let eb = evaluate(second, x, b, noise, cap)?;
            Ok(ExactValue {
                expected: p * ea.expected + (1.0 - p) * eb.expected,
                outcomes: ea.outcomes + eb.outcomes,
            })
        }
        _ => {
            let count = binomial(n, b);
            let mut sum = 0.0;
            for_each_subset(n, b, |known| {
                let view = deterministic_predictions(x, known, noise)?;
                if breaks_ties_randomly(config) && has_ties(&view) {
                    return Err(Error::Unsupported(format!(
                        "{} orders tied predictions at random",
                        config.label()
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                let mut policy = config.build(x, &view, &mut rng)?;
                sum += run_with(&mut policy, x, lean)?.objective;
                Ok(())
            })?;
            Ok(ExactValue { expected: sum / count as f64, outcomes: count })
        }
    }
}
