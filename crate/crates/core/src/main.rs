use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use npsched::analysis::{closed_form_objective, BoundQuery, ObjectiveKind};
use npsched::engine::{run, write_trace_csv};
use npsched::harness::{
    bounds_report, estimate_ratio, exact_estimate, preset, render_svg, rows_to_series, run_experiment,
    write_report_csv, write_rows_csv, EstimatePoint, Estimator, ExperimentSpec, InstanceSource, Preset, XAxis,
    DEFAULT_CAP,
};
use npsched::instances::{apply_noise, JobInstance, NoiseModel, SizeDistribution};
use npsched::policies::PolicyConfig;

#[derive(Parser)]
#[command(name = "npsched", version, about = "Scheduling with partial size predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one policy on one instance and print completion times.
    Simulate(SimulateArgs),
    /// Estimate E[ALG]/OPT at one grid point.
    Ratio(RatioArgs),
    /// Print every applicable bound for (n, B).
    Bounds(BoundsArgs),
    /// Run a preset or a JSON experiment spec.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct PolicyArgs {
    /// opt|rr|rtc|spjf|crrr|switch|noisy-switch|preferential|mixture
    #[arg(long)]
    alg: String,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Mixture probability of the random-order branch (balanced if omitted).
    #[arg(long)]
    p: Option<f64>,
}

impl PolicyArgs {
    fn config(&self) -> Result<PolicyConfig> {
        let c = match self.alg.as_str() {
            "opt" => PolicyConfig::Opt,
            "rr" | "round-robin" => PolicyConfig::RoundRobin,
            "rtc" => PolicyConfig::Rtc,
            "spjf" => PolicyConfig::Spjf,
            "crrr" => PolicyConfig::Crrr,
            "switch" => PolicyConfig::Switch,
            "noisy-switch" => PolicyConfig::NoisySwitch {
                rho: self.rho.ok_or_else(|| anyhow!("noisy-switch needs --rho"))?,
            },
            "preferential" => {
                let lambda = self.lambda.ok_or_else(|| anyhow!("preferential needs --lambda"))?;
                let inner = match self.rho {
                    Some(rho) => PolicyConfig::NoisySwitch { rho },
                    None => PolicyConfig::Switch,
                };
                PolicyConfig::preferential(lambda, inner)
            }
            "mixture" => PolicyConfig::Mixture {
                p: self.p,
                a: Box::new(PolicyConfig::Rtc),
                b: Box::new(PolicyConfig::Switch),
            },
            other => bail!("unknown algorithm {other:?}"),
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated job sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<f64>,
    /// Comma-separated indices of jobs whose size is predicted.
    #[arg(long, value_delimiter = ',')]
    known: Vec<usize>,
    #[command(flatten)]
    policy: PolicyArgs,
    /// none | gauss:TAU | uniform:TAU | const:C
    #[arg(long, default_value = "none")]
    noise: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the event log as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    /// exp:RATE | poly:R:A | pareto:SCALE:SHAPE | two:V1:V2:P | const:V | explicit:X1,X2,...
    #[arg(long)]
    dist: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "B")]
    b: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// rom (ratio of means) or mor (mean of ratios).
    #[arg(long, default_value = "rom")]
    estimator: String,
    /// Enumerate outcomes exactly (fixed instances only).
    #[arg(long)]
    exact: bool,
    /// Draw one instance and reuse it in every trial.
    #[arg(long)]
    fixed: bool,
    #[arg(long, default_value = "none")]
    noise: String,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "B")]
    b: usize,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Normalized prediction error n E[eta] / OPT.
    #[arg(long)]
    error: Option<f64>,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Override the number of trials per point.
    #[arg(long)]
    trials: Option<u64>,
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let x = JobInstance::new(a.sizes)?;
    let config = a.policy.config()?;
    let noise: NoiseModel = a.noise.parse()?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let view = apply_noise(&x, &a.known, noise, &mut rng)?;
    let mut policy = config.build(&x, &view, &mut rng)?;
    let trace = run(&mut policy, &x)?;
    let opt = closed_form_objective(ObjectiveKind::Opt, &x);
    let mut out = io::stdout().lock();
    writeln!(out, "algorithm: {}", config.label())?;
    for (i, t) in trace.completion.iter().enumerate() {
        writeln!(out, "job {i}: size {} completes at {t}", x.sizes()[i])?;
    }
    writeln!(out, "objective: {}", trace.objective)?;
    writeln!(out, "opt: {opt}")?;
    writeln!(out, "ratio: {}", trace.objective / opt)?;
    if let Some(path) = a.trace {
        write_trace_csv(&trace, create(&path)?)?;
    }
    Ok(())
}

fn ratio(a: RatioArgs) -> Result<()> {
    let dist: SizeDistribution = a.dist.parse()?;
    let n = match (&dist, a.n) {
        (SizeDistribution::Explicit { sizes }, _) => sizes.len(),
        (_, Some(n)) => n,
        _ => bail!("--n is required unless the distribution is explicit"),
    };
    let point = EstimatePoint {
        source: InstanceSource { dist, n, resample: !a.fixed },
        b: a.b,
        algorithm: a.policy.config()?,
        noise: a.noise.parse()?,
        trials: a.trials,
        seed: a.seed,
        estimator: a.estimator.parse::<Estimator>()?,
    };
    let e = if a.exact { exact_estimate(&point, DEFAULT_CAP)? } else { estimate_ratio(&point)? };
    println!("algorithm: {}", point.algorithm.label());
    println!("mean_alg: {}", e.mean_alg);
    println!("mean_opt: {}", e.mean_opt);
    println!("ratio: {}", e.ratio);
    println!("std_err: {}", e.std_err);
    println!("mean_eta: {}", e.mean_eta);
    println!("trials: {}", e.trials);
    println!("exact: {}", e.exact);
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let q = BoundQuery { n: a.n, b: a.b, w: a.w, rho: a.rho, lambda: a.lambda, error: a.error };
    let report = bounds_report(&q)?;
    if a.csv {
        write_report_csv(&report, io::stdout().lock())?;
    } else {
        let width = report.iter().map(|e| e.name.len()).max().unwrap_or(0);
        let mut out = io::stdout().lock();
        for e in &report {
            writeln!(out, "{:<5}  {:<width$}  {:.6}", e.side, e.name, e.value)?;
        }
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let spec = match (&a.preset, &a.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            Preset::Simulation(ExperimentSpec::from_json(&text)?)
        }
        (None, None) => bail!("either --preset or --config is required"),
    };
    match spec {
        Preset::Bounds(b) => {
            let table = b.build()?;
            table.write_csv(create(&a.out)?)?;
            if let Some(svg) = a.svg {
                let doc = render_svg(&table.series(), "w = B/n", "competitive ratio", false)?;
                create(&svg)?.write_all(doc.as_bytes())?;
            }
        }
        Preset::Simulation(mut s) => {
            if let Some(t) = a.trials {
                s.trials = t;
            }
            let rows = run_experiment(&s)?;
            write_rows_csv(&rows, create(&a.out)?)?;
            if let Some(svg) = a.svg {
                let axis = if s.noise.taus.len() > 1 { XAxis::Tau } else { XAxis::B };
                let label = match axis {
                    XAxis::Tau => "tau",
                    XAxis::B => "B",
                };
                let doc = render_svg(&rows_to_series(&rows, axis), label, "ratio", true)?;
                create(&svg)?.write_all(doc.as_bytes())?;
            }
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} of {} points failed", rows.len());
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Ratio(a) => ratio(a),
        Command::Bounds(a) => bounds(a),
        Command::Experiment(a) => experiment(a),
    }
}
