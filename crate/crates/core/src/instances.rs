//! Job-size instances, known subsets and noisy predictions.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Open01, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True job sizes `x_1..x_n`. Hidden from non-clairvoyant policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct JobInstance {
    sizes: Vec<f64>,
}

impl JobInstance {
    pub fn new(sizes: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::param("an instance needs at least one job"));
        }
        if let Some((i, &v)) = sizes
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::param(format!("job {i} has non-positive size {v}")));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.sizes.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for JobInstance {
    type Error = Error;

    fn try_from(sizes: Vec<f64>) -> Result<Self> {
        JobInstance::new(sizes)
    }
}

impl From<JobInstance> for Vec<f64> {
    fn from(x: JobInstance) -> Self {
        x.sizes
    }
}

/// The jobs whose sizes are predicted (a prefix `σ(1..B)` of a random
/// permutation) together with their predicted sizes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionView {
    known: Vec<usize>,
    predictions: Vec<f64>,
}

impl PredictionView {
    /// Builds a view and checks it against an instance of `n` jobs.
    pub fn new(n: usize, known: Vec<usize>, predictions: Vec<f64>) -> Result<Self> {
        if known.len() != predictions.len() {
            return Err(Error::param(format!(
                "{} known jobs but {} predictions",
                known.len(),
                predictions.len()
            )));
        }
        if known.len() > n {
            return Err(Error::param(format!("B = {} exceeds n = {n}", known.len())));
        }
        let mut seen = vec![false; n];
        for &j in &known {
            if j >= n {
                return Err(Error::param(format!("known index {j} out of range for n = {n}")));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::param(format!("known index {j} listed twice")));
            }
        }
        if let Some(y) = predictions.iter().find(|y| !(y.is_finite() && **y >= 0.0)) {
            return Err(Error::param(format!("prediction {y} is not a finite non-negative size")));
        }
        Ok(Self { known, predictions })
    }

    /// The view with no known jobs.
    pub fn empty() -> Self {
        Self::default()
    }

    /// A view whose predictions are the true sizes of `known`.
    pub fn perfect(x: &JobInstance, known: Vec<usize>) -> Result<Self> {
        let predictions = known
            .iter()
            .map(|&j| x.sizes().get(j).copied().unwrap_or(f64::NAN))
            .collect();
        Self::new(x.len(), known, predictions)
    }

    pub fn known(&self) -> &[usize] {
        &self.known
    }

    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    /// Number of known jobs `B`.
    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.known.iter().copied().zip(self.predictions.iter().copied())
    }

    /// Boolean mask of length `n`, true on known jobs.
    pub fn known_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &j in &self.known {
            mask[j] = true;
        }
        mask
    }

    /// Predicted size of `job`, when it is known.
    pub fn prediction_of(&self, job: usize) -> Option<f64> {
        self.iter().find(|&(j, _)| j == job).map(|(_, y)| y)
    }
}

/// Job-size distributions used by the experiments and lower-bound constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SizeDistribution {
    Exponential { rate: f64 },
    /// `Pr(X >= t) = ((1+t)^-r - (1+a)^-r) / (1 - (1+a)^-r)` on `[0, a)`.
    TruncatedPolyTail { r: f64, a: f64 },
    Pareto { scale: f64, shape: f64 },
    /// `v1` with probability `p`, `v2` otherwise.
    TwoPoint { v1: f64, v2: f64, p: f64 },
    Constant { v: f64 },
    Explicit { sizes: Vec<f64> },
}

impl SizeDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SizeDistribution::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            SizeDistribution::TruncatedPolyTail { r, a } => {
                r > 0.5 && r <= 1.0 && a > 0.0 && a.is_finite()
            }
            SizeDistribution::Pareto { scale, shape } => {
                scale > 0.0 && shape > 0.0 && scale.is_finite() && shape.is_finite()
            }
            SizeDistribution::TwoPoint { v1, v2, p } => {
                v1 > 0.0 && v2 > 0.0 && v1.is_finite() && v2.is_finite() && (0.0..=1.0).contains(&p)
            }
            SizeDistribution::Constant { v } => v > 0.0 && v.is_finite(),
            SizeDistribution::Explicit { ref sizes } => {
                return JobInstance::new(sizes.clone()).map(|_| ())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid distribution parameters: {self}")))
        }
    }

    /// Inverse of the truncated polynomial tail for `u` in `(0, 1)`.
    pub fn poly_tail_quantile(r: f64, a: f64, u: f64) -> f64 {
        let floor = (1.0 + a).powf(-r);
        let s = u * (1.0 - floor) + floor;
        s.powf(-1.0 / r) - 1.0
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Every branch may in principle round to 0 or to the truncation
        // point; redraw until the sample is a valid size.
        loop {
            let v = match *self {
                SizeDistribution::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
                SizeDistribution::TruncatedPolyTail { r, a } => {
                    let u: f64 = Open01.sample(rng);
                    let t = Self::poly_tail_quantile(r, a, u);
                    if t >= a {
                        continue;
                    }
                    t
                }
                SizeDistribution::Pareto { scale, shape } => {
                    Pareto::new(scale, shape).expect("validated").sample(rng)
                }
                SizeDistribution::TwoPoint { v1, v2, p } => {
                    if rng.random::<f64>() < p {
                        v1
                    } else {
                        v2
                    }
                }
                SizeDistribution::Constant { v } => v,
                SizeDistribution::Explicit { .. } => unreachable!("explicit sizes are not drawn"),
            };
            if v > 0.0 && v.is_finite() {
                return v;
            }
        }
    }
}

impl fmt::Display for SizeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeDistribution::Exponential { rate } => write!(f, "exp:{rate}"),
            SizeDistribution::TruncatedPolyTail { r, a } => write!(f, "poly:{r}:{a}"),
            SizeDistribution::Pareto { scale, shape } => write!(f, "pareto:{scale}:{shape}"),
            SizeDistribution::TwoPoint { v1, v2, p } => write!(f, "two:{v1}:{v2}:{p}"),
            SizeDistribution::Constant { v } => write!(f, "const:{v}"),
            SizeDistribution::Explicit { sizes } => {
                let s: Vec<String> = sizes.iter().map(|v| v.to_string()).collect();
                write!(f, "explicit:{}", s.join(","))
            }
        }
    }
}

impl FromStr for SizeDistribution {
    type Err = Error;

    /// Parses `exp:RATE`, `poly:R:A`, `pareto:SCALE:SHAPE`, `two:V1:V2:P`,
    /// `const:V` or `explicit:X1,X2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = |sep: char| -> Result<Vec<f64>> {
            rest.split(sep)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::param(format!("bad number {t:?} in {s:?}: {e}")))
                })
                .collect()
        };
        let dist = match head {
            "exp" | "exponential" => match nums(':')?[..] {
                [] => SizeDistribution::Exponential { rate: 1.0 },
                [rate] => SizeDistribution::Exponential { rate },
                _ => return Err(Error::param(format!("expected exp:RATE, got {s:?}"))),
            },
            "poly" => match nums(':')?[..] {
                [r, a] => SizeDistribution::TruncatedPolyTail { r, a },
                _ => return Err(Error::param(format!("expected poly:R:A, got {s:?}"))),
            },
            "pareto" => match nums(':')?[..] {
                [scale, shape] => SizeDistribution::Pareto { scale, shape },
                _ => return Err(Error::param(format!("expected pareto:SCALE:SHAPE, got {s:?}"))),
            },
            "two" => match nums(':')?[..] {
                [v1, v2, p] => SizeDistribution::TwoPoint { v1, v2, p },
                _ => return Err(Error::param(format!("expected two:V1:V2:P, got {s:?}"))),
            },
            "const" => match nums(':')?[..] {
                [v] => SizeDistribution::Constant { v },
                _ => return Err(Error::param(format!("expected const:V, got {s:?}"))),
            },
            "explicit" => SizeDistribution::Explicit { sizes: nums(',')? },
            _ => return Err(Error::param(format!("unknown distribution {s:?}"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Noise applied to the true sizes of known jobs to produce predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    /// Additive `N(0, tau^2)` noise.
    Gaussian { tau: f64 },
    /// Additive uniform noise on `[-tau, tau]`.
    Uniform { tau: f64 },
    /// Every prediction equals `c`, whatever the true size.
    AdversarialConstant { c: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { tau } | NoiseModel::Uniform { tau } => tau,
            NoiseModel::AdversarialConstant { c } => c,
        };
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!("noise parameter must be finite and >= 0, got {v}")))
        }
    }

    /// Same family with its scale parameter replaced.
    pub fn with_tau(self, tau: f64) -> Self {
        match self {
            NoiseModel::None => NoiseModel::None,
            NoiseModel::Gaussian { .. } => NoiseModel::Gaussian { tau },
            NoiseModel::Uniform { .. } => NoiseModel::Uniform { tau },
            NoiseModel::AdversarialConstant { .. } => NoiseModel::AdversarialConstant { c: tau },
        }
    }

    /// Scale parameter (`tau`, or `c` for the constant model).
    pub fn tau(&self) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { tau } | NoiseModel::Uniform { tau } => tau,
            NoiseModel::AdversarialConstant { c } => c,
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// Parses `none`, `gauss:TAU`, `uniform:TAU` or `const:C`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, "0"));
        let v: f64 = rest
            .parse()
            .map_err(|e| Error::param(format!("bad noise parameter in {s:?}: {e}")))?;
        let model = match head {
            "none" => NoiseModel::None,
            "gauss" | "gaussian" => NoiseModel::Gaussian { tau: v },
            "uniform" => NoiseModel::Uniform { tau: v },
            "const" | "adversarial" => NoiseModel::AdversarialConstant { c: v },
            _ => return Err(Error::param(format!("unknown noise model {s:?}"))),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Draws `n` i.i.d. sizes. `Explicit` returns its list, which must have length `n`.
pub fn sample_instance<R: Rng + ?Sized>(
    dist: &SizeDistribution,
    n: usize,
    rng: &mut R,
) -> Result<JobInstance> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    dist.validate()?;
    if let SizeDistribution::Explicit { sizes } = dist {
        if sizes.len() != n {
            return Err(Error::param(format!(
                "explicit instance has {} sizes but n = {n}",
                sizes.len()
            )));
        }
        return JobInstance::new(sizes.clone());
    }
    JobInstance::new((0..n).map(|_| dist.draw(rng)).collect())
}

/// First `b` entries of a uniformly random permutation of `0..n`.
pub fn sample_known_subset<R: Rng + ?Sized>(n: usize, b: usize, rng: &mut R) -> Result<Vec<usize>> {
    if b > n {
        return Err(Error::param(format!("B = {b} exceeds n = {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let (head, _) = idx.partial_shuffle(rng, b);
    Ok(head.to_vec())
}

/// Predictions `y_i = max(x_i + eps_i, 0)` for every known job, in `known` order.
pub fn apply_noise<R: Rng + ?Sized>(
    x: &JobInstance,
    known: &[usize],
    model: NoiseModel,
    rng: &mut R,
) -> Result<PredictionView> {
    model.validate()?;
    if let Some(&j) = known.iter().find(|&&j| j >= x.len()) {
        return Err(Error::param(format!("known index {j} out of range for n = {}", x.len())));
    }
    let predictions = known
        .iter()
        .map(|&j| {
            let xi = x.sizes()[j];
            let y = match model {
                NoiseModel::None => xi,
                NoiseModel::Gaussian { tau } => {
                    if tau == 0.0 {
                        xi
                    } else {
                        xi + Normal::new(0.0, tau).expect("validated").sample(rng)
                    }
                }
                NoiseModel::Uniform { tau } => {
                    if tau == 0.0 {
                        xi
                    } else {
                        xi + rng.random_range(-tau..=tau)
                    }
                }
                NoiseModel::AdversarialConstant { c } => c,
            };
            y.max(0.0)
        })
        .collect();
    PredictionView::new(x.len(), known.to_vec(), predictions)
}

/// Total error `sum |x_i - y_i|` over the known jobs.
pub fn prediction_error(x: &JobInstance, view: &PredictionView) -> f64 {
    view.iter().map(|(j, y)| (x.sizes()[j] - y).abs()).sum()
}
