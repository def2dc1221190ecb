//! Ready-made experiment grids for the published figures.

use super::estimate::{Estimator, InstanceSource};
use super::exact::DEFAULT_CAP;
use super::experiment::{BGrid, ExperimentSpec, NoiseGrid};
use super::table::BoundsTableSpec;
use crate::error::{Error, Result};
use crate::instances::{NoiseModel, SizeDistribution};
use crate::policies::PolicyConfig;

pub const PRESETS: [&str; 5] = ["fig1", "fig2", "fig3-left", "fig3-right", "fig4"];

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Simulation(ExperimentSpec),
    Bounds(BoundsTableSpec),
}

const TRIALS: u64 = 10_000;
const SEED: u64 = 2024;

fn base(name: &str, sources: Vec<InstanceSource>, b_grid: BGrid, algorithms: Vec<PolicyConfig>) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        sources,
        b_grid,
        algorithms,
        noise: NoiseGrid::default(),
        trials: TRIALS,
        seed: SEED,
        estimator: Estimator::RatioOfMeans,
        enumeration_cap: DEFAULT_CAP as u64,
        exact: false,
    }
}

fn preferential_grid(lambdas: &[f64], rhos: &[f64]) -> Vec<PolicyConfig> {
    let mut v = Vec::new();
    for &l in lambdas {
        for &r in rhos {
            v.push(PolicyConfig::preferential(l, PolicyConfig::NoisySwitch { rho: r }));
        }
    }
    v
}

fn pareto_instance() -> InstanceSource {
    InstanceSource { dist: SizeDistribution::Pareto { scale: 1.0, shape: 1.1 }, n: 50, resample: false }
}

fn gaussian_taus() -> NoiseGrid {
    NoiseGrid { model: NoiseModel::Gaussian { tau: 0.0 }, taus: (0..=10).map(f64::from).collect() }
}

pub fn preset(name: &str) -> Result<Preset> {
    Ok(match name {
        "fig1" => Preset::Bounds(BoundsTableSpec { name: "fig1".into(), n: 100 }),
        "fig2" => {
            let mut sources = Vec::new();
            for dist in [
                SizeDistribution::Exponential { rate: 1.0 },
                SizeDistribution::TruncatedPolyTail { r: 0.51, a: 1e4 },
            ] {
                for n in [20, 1000] {
                    sources.push(InstanceSource { dist: dist.clone(), n, resample: true });
                }
            }
            let fractions = (0..=10).map(|k| k as f64 / 10.0).collect();
            Preset::Simulation(base(
                "fig2",
                sources,
                BGrid::Fractions(fractions),
                vec![PolicyConfig::Switch, PolicyConfig::Crrr],
            ))
        }
        "fig3-left" => {
            let mut s = base(
                "fig3-left",
                vec![pareto_instance()],
                BGrid::Values(vec![25]),
                preferential_grid(&[0.0, 0.5, 1.0], &[0.0, 0.5]),
            );
            s.noise = gaussian_taus();
            Preset::Simulation(s)
        }
        "fig3-right" => {
            let mut s = base(
                "fig3-right",
                vec![pareto_instance()],
                BGrid::Values(vec![10, 25, 40, 50]),
                preferential_grid(&[1.0], &[0.5]),
            );
            s.noise = gaussian_taus();
            Preset::Simulation(s)
        }
        "fig4" => {
            let mut s = base(
                "fig4",
                vec![InstanceSource {
                    dist: SizeDistribution::TwoPoint { v1: 1.0, v2: 2.0, p: 0.5 },
                    n: 100,
                    resample: true,
                }],
                BGrid::Values(vec![50, 95]),
                [0.0, 0.1, 0.5].iter().map(|&rho| PolicyConfig::NoisySwitch { rho }).collect(),
            );
            s.noise = NoiseGrid {
                model: NoiseModel::Uniform { tau: 0.0 },
                taus: (0..=15).map(|k| k as f64 / 100.0).collect(),
            };
            Preset::Simulation(s)
        }
        other => {
            return Err(Error::param(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    })
}
