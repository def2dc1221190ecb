//! Experiment grids, their result rows and CSV output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::estimate::{estimate_ratio, Estimate, EstimatePoint, Estimator, InstanceSource};
use super::exact::{exact_expected_objective, DEFAULT_CAP};
use crate::analysis::{closed_form_objective, ObjectiveKind};
use crate::error::{Error, Result};
use crate::instances::{prediction_error, NoiseModel, PredictionView};
use crate::policies::PolicyConfig;

/// Known-job counts, absolute or as fractions of `n` (rounded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BGrid {
    Values(Vec<usize>),
    Fractions(Vec<f64>),
}

impl BGrid {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            BGrid::Values(v) => {
                if let Some(b) = v.iter().find(|&&b| b > n) {
                    return Err(Error::Configuration(format!("B = {b} exceeds n = {n}")));
                }
                Ok(v.clone())
            }
            BGrid::Fractions(f) => f
                .iter()
                .map(|&w| {
                    if (0.0..=1.0).contains(&w) {
                        Ok((w * n as f64).round() as usize)
                    } else {
                        Err(Error::Configuration(format!("B fraction {w} outside [0, 1]")))
                    }
                })
                .collect(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            BGrid::Values(v) => v.is_empty(),
            BGrid::Fractions(f) => f.is_empty(),
        }
    }
}

/// A noise family and the scales to sweep. An empty sweep uses `model` as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseGrid {
    pub model: NoiseModel,
    #[serde(default)]
    pub taus: Vec<f64>,
}

impl Default for NoiseGrid {
    fn default() -> Self {
        Self { model: NoiseModel::None, taus: Vec::new() }
    }
}

impl NoiseGrid {
    pub fn models(&self) -> Vec<NoiseModel> {
        if self.taus.is_empty() {
            vec![self.model]
        } else {
            self.taus.iter().map(|&t| self.model.with_tau(t)).collect()
        }
    }
}

fn default_cap() -> u64 {
    DEFAULT_CAP as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub sources: Vec<InstanceSource>,
    pub b_grid: BGrid,
    pub algorithms: Vec<PolicyConfig>,
    #[serde(default)]
    pub noise: NoiseGrid,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
    /// Enumerate outcomes exactly instead of sampling.
    #[serde(default)]
    pub exact: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Configuration("trials must be at least 1".into()));
        }
        if self.sources.is_empty() || self.b_grid.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Configuration("sources, B grid and algorithms must be non-empty".into()));
        }
        for s in &self.sources {
            s.dist.validate()?;
            self.b_grid.resolve(s.n)?;
        }
        for a in &self.algorithms {
            a.validate()?;
        }
        for m in self.noise.models() {
            m.validate()?;
        }
        Ok(())
    }

    /// Grid points in row order: source, then B, then algorithm, then noise.
    pub fn points(&self) -> Result<Vec<EstimatePoint>> {
        self.validate()?;
        let mut out = Vec::new();
        for source in &self.sources {
            for b in self.b_grid.resolve(source.n)? {
                for alg in &self.algorithms {
                    for noise in self.noise.models() {
                        out.push(EstimatePoint {
                            source: source.clone(),
                            b,
                            algorithm: alg.clone(),
                            noise,
                            trials: self.trials,
                            seed: self.seed,
                            estimator: self.estimator,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// One output row. `mean_eta` and `error` stay out of the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub experiment: String,
    pub algorithm: String,
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub tau: f64,
    pub trials: u64,
    pub estimator: String,
    pub mean_alg: f64,
    pub mean_opt: f64,
    pub ratio: f64,
    pub std_err: f64,
    pub exact: bool,
    pub seed: u64,
    #[serde(skip)]
    pub mean_eta: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

pub const CSV_HEADER: &str =
    "experiment,algorithm,n,B,lambda,rho,p,tau,trials,estimator,mean_alg,mean_opt,ratio,std_err,exact,seed";

impl EstimateRow {
    fn new(experiment: &str, point: &EstimatePoint, est: Result<Estimate>) -> Self {
        let p = point.algorithm.mixture_p(point.source.n, point.b).ok().flatten();
        let mut row = EstimateRow {
            experiment: experiment.to_string(),
            algorithm: point.algorithm.label(),
            n: point.source.n,
            b: point.b,
            lambda: point.algorithm.lambda(),
            rho: point.algorithm.rho(),
            p,
            tau: point.noise.tau(),
            trials: point.trials,
            estimator: point.estimator.to_string(),
            mean_alg: f64::NAN,
            mean_opt: f64::NAN,
            ratio: f64::NAN,
            std_err: f64::NAN,
            exact: false,
            seed: point.seed,
            mean_eta: f64::NAN,
            error: None,
        };
        match est {
            Ok(e) => {
                row.mean_alg = e.mean_alg;
                row.mean_opt = e.mean_opt;
                row.ratio = e.ratio;
                row.std_err = e.std_err;
                row.mean_eta = e.mean_eta;
                row.exact = e.exact;
                row.trials = e.trials;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

/// Exact `E[ALG] / OPT` at a point with a fixed instance.
pub fn exact_estimate(point: &EstimatePoint, cap: u128) -> Result<Estimate> {
    if !point.source.is_fixed() {
        return Err(Error::Unsupported("exact evaluation needs a fixed instance".into()));
    }
    let x = point.source.instance(point.seed, 0)?;
    let v = exact_expected_objective(&point.algorithm, &x, point.b, point.noise, cap)?;
    let opt = closed_form_objective(ObjectiveKind::Opt, &x);
    // Each job is known with probability B/n.
    let all: Vec<usize> = (0..x.len()).collect();
    let full = match point.noise {
        NoiseModel::AdversarialConstant { c } => PredictionView::new(x.len(), all, vec![c; x.len()])?,
        _ => PredictionView::perfect(&x, all)?,
    };
    let mean_eta = prediction_error(&x, &full) * point.b as f64 / x.len() as f64;
    Ok(Estimate {
        mean_alg: v.expected,
        mean_opt: opt,
        ratio: v.expected / opt,
        std_err: 0.0,
        mean_eta,
        trials: v.outcomes.min(u64::MAX as u128) as u64,
        exact: true,
    })
}

/// Evaluates every grid point. Failed points become rows with NaN values
/// and an error message; the run continues.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<EstimateRow>> {
    let points = spec.points()?;
    let mut rows = Vec::with_capacity(points.len());
    for point in &points {
        let est = if spec.exact {
            exact_estimate(point, spec.enumeration_cap as u128)
        } else {
            estimate_ratio(point)
        };
        let row = EstimateRow::new(&spec.name, point, est);
        if let Some(e) = &row.error {
            eprintln!("warning: {} {} B={} tau={}: {e}", spec.name, row.algorithm, row.b, row.tau);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_rows_csv<W: Write>(rows: &[EstimateRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
