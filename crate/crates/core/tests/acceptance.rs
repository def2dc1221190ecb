//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use npsched::analysis::{
    alpha_phi, closed_form_objective, g_phi, lower_bound, upper_bound, BoundQuery, LowerBoundKind, ObjectiveKind,
    PhiFamily, UpperBoundKind,
};
use npsched::engine::{delays_from_trace, run, run_with, RunOptions};
use npsched::harness::{
    estimate_ratio, exact_expected_objective, Estimate, EstimatePoint, Estimator, InstanceSource, DEFAULT_CAP,
};
use npsched::instances::{
    apply_noise, sample_instance, sample_known_subset, JobInstance, NoiseModel, PredictionView, SizeDistribution,
};
use npsched::policies::{PolicyConfig, Sequential};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn mixed_distribution(rng: &mut ChaCha8Rng) -> SizeDistribution {
    match rng.random_range(0..5) {
        0 => SizeDistribution::Exponential { rate: 1.0 },
        1 => SizeDistribution::Pareto { scale: 1.0, shape: 1.1 },
        2 => SizeDistribution::TwoPoint { v1: 1.0, v2: 2.0, p: 0.5 },
        3 => SizeDistribution::TruncatedPolyTail { r: 0.51, a: 1e4 },
        _ => SizeDistribution::Constant { v: 1.5 },
    }
}

fn catalog() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::Opt,
        PolicyConfig::RoundRobin,
        PolicyConfig::Rtc,
        PolicyConfig::Spjf,
        PolicyConfig::Crrr,
        PolicyConfig::Switch,
        PolicyConfig::NoisySwitch { rho: 0.5 },
        PolicyConfig::preferential(0.5, PolicyConfig::NoisySwitch { rho: 0.5 }),
        PolicyConfig::preferential(0.3, PolicyConfig::Switch),
        PolicyConfig::balanced_mixture(),
    ]
}

fn hard_instance(n: usize) -> JobInstance {
    let eps = 1e-6;
    JobInstance::new((1..=n).map(|i| 1.0 + i as f64 * eps).collect()).unwrap()
}

fn exact_ratio(config: &PolicyConfig, x: &JobInstance, b: usize) -> f64 {
    let v = exact_expected_objective(config, x, b, NoiseModel::None, DEFAULT_CAP).unwrap();
    v.expected / closed_form_objective(ObjectiveKind::Opt, x)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_closed = 0.0f64;
    let mut worst_identity = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let x = sample_instance(&mixed_distribution(&mut rng), n, &mut rng).unwrap();
        let opt = closed_form_objective(ObjectiveKind::Opt, &x);
        let rr = closed_form_objective(ObjectiveKind::RoundRobin, &x);
        for config in catalog() {
            let b = if config == PolicyConfig::Spjf { n } else { rng.random_range(0..=n) };
            let known = sample_known_subset(n, b, &mut rng).unwrap();
            let view = apply_noise(&x, &known, NoiseModel::Gaussian { tau: 0.3 }, &mut rng).unwrap();
            let mut policy = config.build(&x, &view, &mut rng).unwrap();
            let trace = run(&mut policy, &x).unwrap();
            let delays = delays_from_trace(&trace, &x).unwrap();
            let identity = x.total() + delays.total_mutual();
            worst_identity = worst_identity.max((identity - trace.objective).abs() / trace.objective);
            let reference = match config {
                PolicyConfig::Opt => Some(opt),
                PolicyConfig::RoundRobin => Some(rr),
                _ => None,
            };
            if let Some(r) = reference {
                worst_closed = worst_closed.max((trace.objective - r).abs() / r);
            }
        }
    }
    check(
        worst_closed <= 1e-9 && worst_identity <= 1e-9,
        format!("max rel. error: closed forms {worst_closed:.2e}, delay identity {worst_identity:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        for _ in 0..5 {
            let x = sample_instance(&SizeDistribution::Exponential { rate: 1.0 }, n, &mut rng).unwrap();
            let v = exact_expected_objective(&PolicyConfig::Rtc, &x, 0, NoiseModel::None, DEFAULT_CAP).unwrap();
            assert_eq!(v.outcomes, (1..=n as u128).product::<u128>());
            let expected = (n as f64 + 1.0) / 2.0 * x.total();
            worst = worst.max((v.expected - expected).abs() / expected);
        }
    }
    check(worst <= 1e-9, format!("max rel. error over n <= 6: {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let x = hard_instance(10);
    let mut worst = 0.0f64;
    for b in 0..=10 {
        let got = exact_ratio(&PolicyConfig::Switch, &x, b);
        let want = upper_bound(UpperBoundKind::SwitchPerfect, &BoundQuery::new(10, b)).unwrap().upper();
        worst = worst.max((got - want).abs());
    }
    check(worst <= 1e-3, format!("max |E[ALG]/OPT - bound| = {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let x = hard_instance(10);
    let mut ok = true;
    let mut detail = Vec::new();
    for b in 0..=10 {
        let got = exact_ratio(&PolicyConfig::Crrr, &x, b);
        let range = upper_bound(UpperBoundKind::CrrrRange, &BoundQuery::new(10, b)).unwrap();
        let inside = got >= range.lower() - 1e-3 && got <= range.upper() + 1e-3;
        ok &= inside;
        if !inside {
            detail.push(format!("B={b}: {got:.6} not in [{:.6}, {:.6}]", range.lower(), range.upper()));
        }
    }
    check(ok, if ok { "all B in range".to_string() } else { detail.join("; ") })
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for (n, bs) in [(10usize, (0..=10).collect::<Vec<_>>()), (2, vec![1])] {
        let x = hard_instance(n);
        for b in bs {
            let got = exact_ratio(&PolicyConfig::balanced_mixture(), &x, b);
            let want = upper_bound(UpperBoundKind::MixturePerfect, &BoundQuery::new(n, b)).unwrap().upper();
            worst = worst.max((got - want).abs());
        }
    }
    let small = exact_ratio(&PolicyConfig::balanced_mixture(), &hard_instance(2), 1);
    check(
        worst <= 1e-3 && (small - 1.125).abs() <= 1e-3,
        format!("max deviation {worst:.2e}; n=2,B=1 gives {small:.6}"),
    )
}

fn criterion_6() -> Outcome {
    let alpha = alpha_phi(&PhiFamily::Exp).unwrap();
    let alpha_err = (alpha - 2.0 * (1.0 - 1.0 / E)).abs();
    let const_err = (3.0 - 2.0 * alpha - (4.0 / E - 1.0)).abs();
    let mut g_err = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let x = 0.05 + 0.4 * i as f64;
            let t = x + 0.5 * j as f64;
            let closed = 1.0 + (x - 1.0) * (-(t - x)).exp();
            g_err = g_err.max((g_phi(&PhiFamily::Exp, x, t).unwrap() - closed).abs());
        }
    }
    check(
        alpha_err <= 1e-6 && const_err <= 1e-6 && g_err <= 1e-8,
        format!("alpha err {alpha_err:.2e}, 3-2alpha err {const_err:.2e}, G grid err {g_err:.2e}"),
    )
}

fn point(source: InstanceSource, b: usize, algorithm: PolicyConfig, noise: NoiseModel, trials: u64) -> EstimatePoint {
    EstimatePoint { source, b, algorithm, noise, trials, seed: 2024, estimator: Estimator::RatioOfMeans }
}

fn criterion_7() -> Outcome {
    let source = InstanceSource { dist: SizeDistribution::Exponential { rate: 1.0 }, n: 20, resample: true };
    let mut ok = true;
    let mut notes = Vec::new();
    for b in [0, 4, 8, 12, 16, 20] {
        let lb = lower_bound(LowerBoundKind::ExponentialFinite, &BoundQuery::new(20, b), None).unwrap();
        let sw = estimate_ratio(&point(source.clone(), b, PolicyConfig::Switch, NoiseModel::None, 10_000)).unwrap();
        let cr = estimate_ratio(&point(source.clone(), b, PolicyConfig::Crrr, NoiseModel::None, 10_000)).unwrap();
        let above = sw.ratio >= lb - 2.0 * sw.std_err && cr.ratio >= lb - 2.0 * cr.std_err;
        let order = sw.ratio <= cr.ratio + 2.0 * sw.std_err.max(cr.std_err);
        ok &= above && order;
        notes.push(format!("B={b}: lb {lb:.4} switch {:.4} crrr {:.4}", sw.ratio, cr.ratio));
    }
    check(ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let config = PolicyConfig::preferential(0.5, PolicyConfig::NoisySwitch { rho: 0.5 });
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=30);
        let x = sample_instance(&mixed_distribution(&mut rng), n, &mut rng).unwrap();
        let b = rng.random_range(0..=n);
        let known = sample_known_subset(n, b, &mut rng).unwrap();
        let c = match rng.random_range(0..4) {
            0 => 0.0,
            1 => 1e6,
            2 => x.total(),
            _ => rng.random_range(0.0..10.0),
        };
        let view = apply_noise(&x, &known, NoiseModel::AdversarialConstant { c }, &mut rng).unwrap();
        let mut policy = config.build(&x, &view, &mut rng).unwrap();
        let alg = run_with(&mut policy, &x, RunOptions::lean()).unwrap().objective;
        worst = worst.max(alg / closed_form_objective(ObjectiveKind::Opt, &x));
    }
    check(worst <= 4.0, format!("worst per-trial ALG/OPT = {worst:.4} (limit 4)"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for k in 0..200u64 {
        let b = rng.random_range(0..=50);
        let rho: f64 = rng.random_range(0.05..=1.0);
        let tau: f64 = rng.random_range(0.0..5.0);
        let source = InstanceSource {
            dist: SizeDistribution::Pareto { scale: 1.0, shape: 1.1 },
            n: 50,
            resample: false,
        };
        let mut p = point(source, b, PolicyConfig::NoisySwitch { rho }, NoiseModel::Gaussian { tau }, 400);
        p.seed = 9_000 + k;
        let e: Estimate = estimate_ratio(&p).unwrap();
        let err = 50.0 * e.mean_eta / e.mean_opt;
        let q = BoundQuery::new(50, b).with_rho(rho).with_error(err);
        let bound = upper_bound(UpperBoundKind::NoisySwitch, &q).unwrap().upper();
        let slack = bound + 2.0 * e.std_err - e.ratio;
        tightest = tightest.min(slack);
        if slack < 0.0 {
            violations += 1;
        }
    }
    check(violations == 0, format!("{violations} violations; smallest slack {tightest:.4}"))
}

fn criterion_10() -> Outcome {
    let source = InstanceSource {
        dist: SizeDistribution::TwoPoint { v1: 1.0, v2: 2.0, p: 0.5 },
        n: 100,
        resample: true,
    };
    let est = |rho: f64, tau: f64| {
        estimate_ratio(&point(source.clone(), 50, PolicyConfig::NoisySwitch { rho }, NoiseModel::Uniform { tau }, 10_000))
            .unwrap()
    };
    let (a0, b0) = (est(0.0, 0.0), est(0.5, 0.0));
    let (a1, b1) = (est(0.0, 0.01), est(0.5, 0.01));
    let (a15, b15) = (est(0.0, 0.15), est(0.5, 0.15));
    let consistent = a0.ratio <= b0.ratio + 2.0 * a0.std_err.max(b0.std_err);
    let gap15 = b15.ratio - a15.ratio;
    let shrinks = gap15 < 0.0 || gap15 < 2.0 * a15.std_err.max(b15.std_err);
    let jump0 = a1.ratio - a0.ratio;
    let jump5 = b1.ratio - b0.ratio;
    check(
        consistent && shrinks && jump0 > jump5,
        format!(
            "tau=0: rho0 {:.4} rho.5 {:.4}; tau=.15: rho0 {:.4} rho.5 {:.4}; jumps {jump0:.4} vs {jump5:.4}",
            a0.ratio, b0.ratio, a15.ratio, b15.ratio
        ),
    )
}

fn main() {
    // Sanity: the hard-instance helper and perfect views line up.
    let x = hard_instance(2);
    let view = PredictionView::perfect(&x, vec![0]).unwrap();
    assert_eq!(view.len(), 1);
    assert_eq!(Sequential::opt(&x).order(), &[0, 1]);

    let criteria: [(u32, &str, fn() -> Outcome, Duration); 10] = [
        (1, "closed-form oracles and delay identity", criterion_1, Duration::from_secs(10)),
        (2, "random-order expectation by enumeration", criterion_2, Duration::from_secs(5)),
        (3, "Switch tightness on the hard instance", criterion_3, Duration::from_secs(30)),
        (4, "CRRR range on the hard instance", criterion_4, Duration::from_secs(30)),
        (5, "balanced mixture on the hard instance", criterion_5, Duration::from_secs(30)),
        (6, "quadrature for the exponential family", criterion_6, Duration::from_secs(5)),
        (7, "perfect predictions vs exponential lower bound", criterion_7, Duration::from_secs(300)),
        (8, "preferential robustness", criterion_8, Duration::from_secs(60)),
        (9, "noisy Switch smoothness bound", criterion_9, Duration::from_secs(180)),
        (10, "consistency-smoothness tradeoff", criterion_10, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (id, name, f, limit) in criteria {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let pass = out.pass && took <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} ({name}): {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
