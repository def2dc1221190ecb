//! The scheduling policies.
//!
//! Policies only see processed amounts and completion flags through
//! [`MachineView`]; sizes reach them solely through a [`PredictionView`].
//! The clairvoyant reference [`Sequential::opt`] is the one exception.

mod baseline;
mod crrr;
mod preferential;
mod switch;

pub use baseline::{RoundRobin, Sequential};
pub use crrr::Crrr;
pub use preferential::{InnerView, Preferential};
pub use switch::{draw_scale, noisy_switch, BreakpointSet, Switch};

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{MachineView, Policy, PolicyDecision};
use crate::error::{Error, Result};
use crate::instances::{JobInstance, PredictionView};

/// A type-erased policy that can move across threads.
pub type BoxedPolicy = Box<dyn Policy + Send>;

/// Runs one of two policies, picked by a single biased coin at build time.
pub struct Mixture {
    chose_first: bool,
    inner: BoxedPolicy,
}

impl Mixture {
    pub fn new<R: Rng + ?Sized>(
        p: f64,
        first: impl FnOnce(&mut R) -> Result<BoxedPolicy>,
        second: impl FnOnce(&mut R) -> Result<BoxedPolicy>,
        rng: &mut R,
    ) -> Result<Self> {
        check_probability(p)?;
        let chose_first = rng.random::<f64>() < p;
        let inner = if chose_first { first(rng)? } else { second(rng)? };
        Ok(Self { chose_first, inner })
    }

    pub fn chose_first(&self) -> bool {
        self.chose_first
    }
}

impl Policy for Mixture {
    fn decide(&mut self, view: &MachineView<'_>) -> PolicyDecision {
        self.inner.decide(view)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("p = {p} outside [0, 1]")))
    }
}

/// Probability of running jobs to completion in random order that balances
/// it against Switch with exact sizes, for `n` jobs of which `b` are known.
pub fn balanced_mixture_p(n: usize, b: usize) -> Result<f64> {
    if b > n || n == 0 {
        return Err(Error::param(format!("need 0 <= B <= n, n > 0 (n = {n}, B = {b})")));
    }
    let (n, b) = (n as f64, b as f64);
    Ok(2.0 * (n - b) / (n * (n + 3.0) - 2.0 * b))
}

/// Serializable description of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicyConfig {
    Opt,
    #[serde(alias = "rr")]
    RoundRobin,
    Rtc,
    Spjf,
    Crrr,
    Switch,
    NoisySwitch {
        rho: f64,
    },
    Preferential {
        lambda: f64,
        inner: Box<PolicyConfig>,
        #[serde(default)]
        inner_view: InnerView,
    },
    Mixture {
        /// Missing means the balanced probability for the run's `n` and `B`.
        #[serde(default)]
        p: Option<f64>,
        a: Box<PolicyConfig>,
        b: Box<PolicyConfig>,
    },
}

impl PolicyConfig {
    pub fn preferential(lambda: f64, inner: PolicyConfig) -> Self {
        Self::Preferential { lambda, inner: Box::new(inner), inner_view: InnerView::Own }
    }

    /// The balanced mixture of random-order and Switch.
    pub fn balanced_mixture() -> Self {
        Self::Mixture { p: None, a: Box::new(Self::Rtc), b: Box::new(Self::Switch) }
    }

    /// Checks parameter ranges and composition rules.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::NoisySwitch { rho } if !(0.0..=1.0).contains(rho) => {
                Err(Error::param(format!("rho = {rho} outside [0, 1]")))
            }
            Self::Preferential { lambda, inner, .. } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::param(format!("lambda = {lambda} outside [0, 1]")));
                }
                if !matches!(**inner, Self::Switch | Self::NoisySwitch { .. }) {
                    return Err(Error::Configuration(format!(
                        "preferential inner policy must be switch or noisy-switch, got {}",
                        inner.label()
                    )));
                }
                inner.validate()
            }
            Self::Mixture { p, a, b } => {
                if let Some(p) = p {
                    check_probability(*p)?;
                }
                a.validate()?;
                b.validate()
            }
            _ => Ok(()),
        }
    }

    /// Builds a fresh policy for one run. `x` is only read by `Opt`.
    pub fn build<R: Rng + ?Sized>(
        &self,
        x: &JobInstance,
        view: &PredictionView,
        rng: &mut R,
    ) -> Result<BoxedPolicy> {
        self.validate()?;
        let n = x.len();
        Ok(match self {
            Self::Opt => Box::new(Sequential::opt(x)),
            Self::RoundRobin => Box::new(RoundRobin),
            Self::Rtc => Box::new(Sequential::rtc(n, rng)),
            Self::Spjf => Box::new(Sequential::spjf(n, view, rng)?),
            Self::Crrr => Box::new(Crrr::new(n, view)),
            Self::Switch => Box::new(Switch::from_predictions(n, view, rng)?),
            Self::NoisySwitch { rho } => Box::new(noisy_switch(n, view, *rho, rng)?),
            Self::Preferential { lambda, inner, inner_view } => {
                let inner = match **inner {
                    Self::Switch => Switch::from_predictions(n, view, rng)?,
                    Self::NoisySwitch { rho } => noisy_switch(n, view, rho, rng)?,
                    _ => unreachable!("checked by validate"),
                };
                Box::new(Preferential::new(*lambda, inner, *inner_view)?)
            }
            Self::Mixture { p, a, b } => {
                let p = match p {
                    Some(p) => *p,
                    None => balanced_mixture_p(n, view.len())?,
                };
                Box::new(Mixture::new(
                    p,
                    |r: &mut R| a.build(x, view, r),
                    |r: &mut R| b.build(x, view, r),
                    rng,
                )?)
            }
        })
    }

    /// Mixing probability actually used for `n` jobs, `b` of them known.
    pub fn mixture_p(&self, n: usize, b: usize) -> Result<Option<f64>> {
        match self {
            Self::Mixture { p: Some(p), .. } => Ok(Some(*p)),
            Self::Mixture { p: None, .. } => balanced_mixture_p(n, b).map(Some),
            _ => Ok(None),
        }
    }

    /// Short name used in CLI flags and output files.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Opt => "opt",
            Self::RoundRobin => "rr",
            Self::Rtc => "rtc",
            Self::Spjf => "spjf",
            Self::Crrr => "crrr",
            Self::Switch => "switch",
            Self::NoisySwitch { .. } => "noisy-switch",
            Self::Preferential { .. } => "preferential",
            Self::Mixture { .. } => "mixture",
        }
    }

    /// Name plus parameters, e.g. `preferential(lambda=0.5,noisy-switch(rho=0.1))`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Self::Preferential { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match self {
            Self::NoisySwitch { rho } => Some(*rho),
            Self::Preferential { inner, .. } => inner.rho(),
            _ => None,
        }
    }

    /// Whether the policy reads predictions at all.
    pub fn uses_predictions(&self) -> bool {
        match self {
            Self::Opt | Self::RoundRobin | Self::Rtc => false,
            Self::Mixture { a, b, .. } => a.uses_predictions() || b.uses_predictions(),
            _ => true,
        }
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoisySwitch { rho } => write!(f, "noisy-switch(rho={rho})"),
            Self::Preferential { lambda, inner, inner_view } => {
                write!(f, "preferential(lambda={lambda},{inner}")?;
                if *inner_view == InnerView::Total {
                    write!(f, ",total")?;
                }
                write!(f, ")")
            }
            Self::Mixture { p, a, b } => match p {
                Some(p) => write!(f, "mixture(p={p},{a},{b})"),
                None => write!(f, "mixture({a},{b})"),
            },
            other => f.write_str(other.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(s: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(s)
    }

    #[test]
    fn mixture_endpoints() {
        let x = JobInstance::new(vec![1.0, 2.0, 3.0]).unwrap();
        let view = PredictionView::perfect(&x, vec![0]).unwrap();
        for s in 0..20 {
            let sure_a = PolicyConfig::Mixture {
                p: Some(1.0),
                a: Box::new(PolicyConfig::Opt),
                b: Box::new(PolicyConfig::RoundRobin),
            };
            let mut pa = sure_a.build(&x, &view, &mut rng(s)).unwrap();
            assert_eq!(run(&mut pa, &x).unwrap().objective, 10.0);
            let sure_b = PolicyConfig::Mixture {
                p: Some(0.0),
                a: Box::new(PolicyConfig::Opt),
                b: Box::new(PolicyConfig::RoundRobin),
            };
            let mut pb = sure_b.build(&x, &view, &mut rng(s)).unwrap();
            assert_eq!(run(&mut pb, &x).unwrap().objective, 14.0);
        }
    }

    #[test]
    fn mixture_frequency() {
        let mut r = rng(8);
        let hits = (0..20_000)
            .filter(|_| {
                Mixture::new(0.25, |_| Ok(Box::new(RoundRobin) as BoxedPolicy), |_| Ok(Box::new(RoundRobin) as BoxedPolicy), &mut r)
                    .unwrap()
                    .chose_first()
            })
            .count();
        assert!((hits as f64 / 20_000.0 - 0.25).abs() < 0.01);
    }

    #[test]
    fn balanced_p_small_case() {
        assert!((balanced_mixture_p(2, 1).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(balanced_mixture_p(5, 5).unwrap(), 0.0);
        assert!(balanced_mixture_p(2, 3).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PolicyConfig::NoisySwitch { rho: 2.0 }.validate().is_err());
        assert!(PolicyConfig::preferential(0.5, PolicyConfig::Rtc).validate().is_err());
        assert!(PolicyConfig::preferential(1.5, PolicyConfig::Switch).validate().is_err());
        assert!(PolicyConfig::preferential(0.5, PolicyConfig::NoisySwitch { rho: 0.1 }).validate().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let c = PolicyConfig::preferential(0.5, PolicyConfig::NoisySwitch { rho: 0.5 });
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<PolicyConfig>(&s).unwrap(), c);
        let m: PolicyConfig =
            serde_json::from_str(r#"{"kind":"mixture","a":{"kind":"rtc"},"b":{"kind":"switch"}}"#).unwrap();
        assert_eq!(m, PolicyConfig::balanced_mixture());
        assert_eq!(m.mixture_p(2, 1).unwrap(), Some(0.25));
    }

    #[test]
    fn labels() {
        assert_eq!(
            PolicyConfig::preferential(0.5, PolicyConfig::NoisySwitch { rho: 0.1 }).label(),
            "preferential(lambda=0.5,noisy-switch(rho=0.1))"
        );
        assert_eq!(PolicyConfig::RoundRobin.label(), "rr");
    }
}
