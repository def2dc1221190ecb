//! Closed-form objectives and competitive-ratio bound formulas.

use serde::{Deserialize, Serialize};

use super::phi::{alpha_phi, Phi, PhiFamily};
use super::quadrature::{integrate, Tolerance};
use crate::error::{Error, Result};
use crate::instances::JobInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Opt,
    RoundRobin,
    /// Expectation over uniformly random run-to-completion orders.
    RtcExpected,
}

/// `sum_{i<j} min(x_i, x_j)`, in O(n log n).
pub fn sum_pairwise_min(x: &JobInstance) -> f64 {
    let mut s = x.sizes().to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    s.iter().enumerate().map(|(k, v)| v * (n - 1 - k) as f64).sum()
}

/// Completion times of shortest-job-first (ties by index), summed in job
/// order. Equals `sum x + sum_{i<j} min(x_i, x_j)`.
fn sjf_objective(x: &JobInstance) -> f64 {
    let s = x.sizes();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
    let mut completion = vec![0.0; s.len()];
    let mut now = 0.0;
    for j in order {
        now += s[j];
        completion[j] = now;
    }
    completion.iter().sum()
}

pub fn closed_form_objective(kind: ObjectiveKind, x: &JobInstance) -> f64 {
    let total = x.total();
    match kind {
        ObjectiveKind::Opt => sjf_objective(x),
        ObjectiveKind::RoundRobin => total + 2.0 * sum_pairwise_min(x),
        ObjectiveKind::RtcExpected => (x.len() as f64 + 1.0) / 2.0 * total,
    }
}

/// Parameters shared by all bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundQuery {
    pub n: usize,
    pub b: usize,
    /// Known fraction for asymptotic formulas; defaults to `B/n`.
    pub w: Option<f64>,
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    /// Normalized error `n E[eta] / OPT`; defaults to 0.
    pub error: Option<f64>,
}

impl BoundQuery {
    pub fn new(n: usize, b: usize) -> Self {
        Self { n, b, ..Self::default() }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_error(mut self, e: f64) -> Self {
        self.error = Some(e);
        self
    }

    pub fn with_w(mut self, w: f64) -> Self {
        self.w = Some(w);
        self
    }

    fn finite(&self) -> Result<(f64, f64, f64)> {
        if self.n < 2 || self.b > self.n {
            return Err(Error::param(format!(
                "need n >= 2 and B <= n (n = {}, B = {})",
                self.n, self.b
            )));
        }
        let (n, b) = (self.n as f64, self.b as f64);
        Ok((n, b, b / n))
    }

    /// `(B/n)(1 - (B-1)/(n-1))`, the weight of known-unknown pairs.
    fn mixed_pairs(&self) -> Result<f64> {
        let (n, b, w) = self.finite()?;
        Ok(w * (1.0 - (b - 1.0) / (n - 1.0)))
    }

    fn fraction(&self) -> Result<f64> {
        let w = match self.w {
            Some(w) => w,
            None if self.n > 0 && self.b <= self.n => self.b as f64 / self.n as f64,
            None => return Err(Error::param("w needs n > 0 and B <= n")),
        };
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::param(format!("w = {w} outside [0, 1]")));
        }
        Ok(w)
    }

    fn rho(&self) -> Result<f64> {
        match self.rho {
            Some(r) if r > 0.0 && r <= 1.0 => Ok(r),
            Some(r) => Err(Error::param(format!("rho = {r} outside (0, 1]"))),
            None => Err(Error::param("rho is required")),
        }
    }

    fn lambda(&self) -> Result<f64> {
        match self.lambda {
            Some(l) if l > 0.0 && l < 1.0 => Ok(l),
            Some(l) => Err(Error::param(format!("lambda = {l} outside (0, 1)"))),
            None => Err(Error::param("lambda is required")),
        }
    }

    fn error(&self) -> Result<f64> {
        match self.error.unwrap_or(0.0) {
            e if e >= 0.0 && e.is_finite() => Ok(e),
            e => Err(Error::param(format!("normalized error {e} must be finite and >= 0"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBoundKind {
    /// Catch-up round-robin with exact sizes (a lower and an upper value).
    CrrrRange,
    /// Switch with breakpoints at the exact sizes.
    SwitchPerfect,
    /// Balanced random-order / Switch mixture with exact sizes.
    MixturePerfect,
    /// Switch with shifted-exponential breakpoint scaling, noisy predictions.
    NoisySwitch,
    /// As [`Self::NoisySwitch`], keeping the `2(C-1)/(n+1)` correction.
    NoisySwitchPrecise,
    /// Preferential mixing of the noisy Switch with round-robin.
    Preferential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundKind {
    /// Finite-n bound from exponential sizes.
    ExponentialFinite,
    /// Limit bound `2 - 2(2-alpha)w + (3-2alpha)w^2` for a given `phi`.
    AsymptoticGeneric,
    /// Limit of the heavy-tail family as `r -> 1/2`.
    HeavyTailAsymptotic,
    /// Finite-n bound for a `phi` with finite mean.
    GenericFinite,
}

/// A single value or a `[low, high]` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundValue {
    Point(f64),
    Range(f64, f64),
}

impl BoundValue {
    pub fn upper(&self) -> f64 {
        match *self {
            Self::Point(v) | Self::Range(_, v) => v,
        }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            Self::Point(v) | Self::Range(v, _) => v,
        }
    }
}

/// Consistency and error sensitivity of the noisy Switch, `(C, S)`.
pub fn smoothness_constants(q: &BoundQuery) -> Result<(f64, f64)> {
    let (_, _, w) = q.finite()?;
    let rho = q.rho()?;
    let c = 2.0 - w + rho * q.mixed_pairs()?;
    let s = 4.0 / rho * (1.0 - w) + w;
    Ok((c, s))
}

pub fn upper_bound(kind: UpperBoundKind, q: &BoundQuery) -> Result<BoundValue> {
    let (n, b, w) = q.finite()?;
    Ok(match kind {
        UpperBoundKind::CrrrRange => {
            let hi = 2.0 - w;
            BoundValue::Range(hi - 2.0 * (1.0 - w) / ((n + 1.0) * (b + 1.0)), hi)
        }
        UpperBoundKind::SwitchPerfect => BoundValue::Point(2.0 - w - 2.0 * (1.0 - w) / (n + 1.0)),
        UpperBoundKind::MixturePerfect => {
            BoundValue::Point(2.0 - w - 2.0 * (1.0 - w) * (2.0 - w) / (n + 3.0 - 2.0 * w))
        }
        UpperBoundKind::NoisySwitch => {
            let (c, s) = smoothness_constants(q)?;
            BoundValue::Point(c + s * q.error()?)
        }
        UpperBoundKind::NoisySwitchPrecise => {
            let (c, s) = smoothness_constants(q)?;
            BoundValue::Point(c - 2.0 * (c - 1.0) / (n + 1.0) + s * q.error()?)
        }
        UpperBoundKind::Preferential => {
            let lambda = q.lambda()?;
            let (c, s) = smoothness_constants(q)?;
            let robust = 2.0 / (1.0 - lambda);
            BoundValue::Point(robust.min((c + s * q.error()?) / lambda))
        }
    })
}

pub fn lower_bound(kind: LowerBoundKind, q: &BoundQuery, phi: Option<&PhiFamily>) -> Result<f64> {
    match kind {
        LowerBoundKind::ExponentialFinite => {
            let (n, _, w) = q.finite()?;
            let c = 2.0 - w - (4.0 / std::f64::consts::E - 1.0) * q.mixed_pairs()?;
            Ok(c - 4.0 * (c - 1.0) / (n + 3.0))
        }
        LowerBoundKind::AsymptoticGeneric => {
            let phi = phi.ok_or_else(|| Error::param("phi family is required"))?;
            phi.validate()?;
            let alpha = alpha_phi(phi)?;
            let w = q.fraction()?;
            Ok(2.0 - 2.0 * (2.0 - alpha) * w + (3.0 - 2.0 * alpha) * w * w)
        }
        LowerBoundKind::HeavyTailAsymptotic => {
            let w = q.fraction()?;
            Ok((2.0 - w) - (3.0 - 2.0 * 2f64.sqrt()) * w * (1.0 - w))
        }
        LowerBoundKind::GenericFinite => {
            let phi = phi.ok_or_else(|| Error::param("phi family is required"))?;
            phi.validate()?;
            let (n, _, w) = q.finite()?;
            let Some(i1) = phi.inv_integral() else {
                return Err(Error::Unsupported(format!(
                    "{phi:?} has infinite mean; only the asymptotic bound applies"
                )));
            };
            let alpha = alpha_phi(phi)?;
            let c = 2.0 - w - (3.0 - 2.0 * alpha) * q.mixed_pairs()?;
            let ratio = phi.inv_sq_integral() / i1;
            Ok(c - (c - 1.0) / (1.0 + (n - 1.0) / 2.0 * ratio))
        }
    }
}

/// Constants describing the shifted-exponential breakpoint scale
/// `xi = 1 + Exp(mean rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleConstants {
    pub rho: f64,
    /// `sup_{0 < s <= 1} g(s)/s`.
    pub beta: f64,
    /// `sup_{s >= 1} g(s) + s`.
    pub gamma: f64,
    /// Lipschitz constant of the breakpoint crossing probability.
    pub lipschitz: f64,
    pub mean_xi: f64,
}

impl ScaleConstants {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::param(format!("rho = {rho} outside (0, 1]")));
        }
        Ok(Self { rho, beta: 0.0, gamma: 2.0 + rho, lipschitz: 1.0 / rho, mean_xi: 1.0 + rho })
    }

    /// `g(s) = (1-s) P(xi < s) + E[xi 1{xi < s}]`, closed form.
    pub fn g(&self, s: f64) -> f64 {
        if s <= 1.0 {
            return 0.0;
        }
        let rho = self.rho;
        (2.0 + rho) - s - (1.0 + rho) * (-(s - 1.0) / rho).exp()
    }

    /// `g(s)` straight from its definition, by quadrature over the density.
    pub fn g_numeric(&self, s: f64) -> Result<f64> {
        if s <= 1.0 {
            return Ok(0.0);
        }
        let rho = self.rho;
        let density = |u: f64| (-(u - 1.0) / rho).exp() / rho;
        let tol = Tolerance { abs: 1e-14, rel: 1e-13, max_intervals: 2000 };
        let mass = integrate(density, 1.0, s, tol)?.value;
        let partial = integrate(|u| u * density(u), 1.0, s, tol)?.value;
        Ok((1.0 - s) * mass + partial)
    }

    /// Checks `beta` and `gamma` against a grid of `g_numeric` values:
    /// returns the grid suprema `(sup g(s)/s on (0,1], sup g(s)+s on [1, s_max])`.
    pub fn grid_suprema(&self, s_max: f64, points: usize) -> Result<(f64, f64)> {
        let points = points.max(2);
        let mut beta = f64::NEG_INFINITY;
        for k in 1..=points {
            let s = k as f64 / points as f64;
            beta = beta.max(self.g_numeric(s)? / s);
        }
        let mut gamma = f64::NEG_INFINITY;
        for k in 0..points {
            let s = 1.0 + (s_max - 1.0) * k as f64 / (points - 1) as f64;
            gamma = gamma.max(self.g_numeric(s)? + s);
        }
        Ok((beta, gamma))
    }

    /// Multiplier of the pairwise-min sum.
    pub fn c1(&self, n: usize, b: usize) -> Result<f64> {
        let q = BoundQuery::new(n, b);
        let (_, _, w) = q.finite()?;
        Ok(2.0 - w - (2.0 - self.beta - self.gamma) * q.mixed_pairs()?)
    }

    /// Multiplier of the expected prediction error.
    pub fn c2(&self, n: usize, b: usize) -> Result<f64> {
        if b > n {
            return Err(Error::param(format!("B = {b} exceeds n = {n}")));
        }
        Ok((1.0 + self.lipschitz + self.mean_xi) * (n - b) as f64 + b as f64 - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn objectives() {
        let x = JobInstance::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(closed_form_objective(ObjectiveKind::Opt, &x), 10.0);
        let y = JobInstance::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(closed_form_objective(ObjectiveKind::RoundRobin, &y), 5.0);
        assert_eq!(closed_form_objective(ObjectiveKind::RtcExpected, &y), 4.5);
    }

    #[test]
    fn switch_and_mixture_small() {
        let q = BoundQuery::new(2, 1);
        assert!(close(upper_bound(UpperBoundKind::SwitchPerfect, &q).unwrap().upper(), 7.0 / 6.0, 1e-15));
        assert!(close(upper_bound(UpperBoundKind::MixturePerfect, &q).unwrap().upper(), 1.125, 1e-15));
    }

    #[test]
    fn noisy_switch_all_known() {
        for n in [2, 5, 30] {
            let q = BoundQuery::new(n, n).with_rho(0.37);
            assert!(close(upper_bound(UpperBoundKind::NoisySwitch, &q).unwrap().upper(), 1.0, 1e-14));
        }
    }

    #[test]
    fn preferential_robust_side() {
        let q = BoundQuery::new(10, 5).with_rho(0.5).with_lambda(0.5).with_error(1e9);
        assert_eq!(upper_bound(UpperBoundKind::Preferential, &q).unwrap().upper(), 4.0);
        let q = q.with_lambda(1.0);
        assert!(upper_bound(UpperBoundKind::Preferential, &q).is_err());
    }

    #[test]
    fn missing_parameters() {
        assert!(upper_bound(UpperBoundKind::NoisySwitch, &BoundQuery::new(4, 2)).is_err());
        assert!(upper_bound(UpperBoundKind::SwitchPerfect, &BoundQuery::new(1, 0)).is_err());
        assert!(upper_bound(UpperBoundKind::SwitchPerfect, &BoundQuery::new(4, 5)).is_err());
        assert!(lower_bound(LowerBoundKind::GenericFinite, &BoundQuery::new(4, 2), None).is_err());
    }

    #[test]
    fn exponential_endpoints() {
        for n in 2..=100 {
            let b0 = lower_bound(LowerBoundKind::ExponentialFinite, &BoundQuery::new(n, 0), None).unwrap();
            assert!(close(b0, 2.0 - 4.0 / (n as f64 + 3.0), 1e-14));
            let bn = lower_bound(LowerBoundKind::ExponentialFinite, &BoundQuery::new(n, n), None).unwrap();
            assert!(close(bn, 1.0, 1e-14));
        }
    }

    #[test]
    fn heavy_tail_half() {
        let v = lower_bound(LowerBoundKind::HeavyTailAsymptotic, &BoundQuery::new(2, 1), None).unwrap();
        assert!(close(v, 1.5 - (3.0 - 2.0 * 2f64.sqrt()) * 0.25, 1e-15));
        assert!(close(v, 1.457107, 1e-6));
    }

    #[test]
    fn generic_finite_matches_exponential() {
        for (n, b) in [(2, 1), (10, 3), (50, 25), (7, 7)] {
            let q = BoundQuery::new(n, b);
            let g = lower_bound(LowerBoundKind::GenericFinite, &q, Some(&PhiFamily::Exp)).unwrap();
            let e = lower_bound(LowerBoundKind::ExponentialFinite, &q, None).unwrap();
            assert!(close(g, e, 1e-9), "{n},{b}: {g} vs {e}");
        }
    }

    #[test]
    fn generic_finite_rejects_heavy_tail() {
        let r = lower_bound(
            LowerBoundKind::GenericFinite,
            &BoundQuery::new(10, 5),
            Some(&PhiFamily::PolyTail { r: 0.6 }),
        );
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn asymptotic_generic_exp() {
        let q = BoundQuery::new(10, 5).with_w(0.3);
        let v = lower_bound(LowerBoundKind::AsymptoticGeneric, &q, Some(&PhiFamily::Exp)).unwrap();
        let c = 4.0 / std::f64::consts::E;
        assert!(close(v, 2.0 - c * 0.3 + (c - 1.0) * 0.09, 1e-9));
    }

    #[test]
    fn ordering_grid() {
        for n in 2..=100 {
            for b in 0..=n {
                let q = BoundQuery::new(n, b);
                let lo = lower_bound(LowerBoundKind::ExponentialFinite, &q, None).unwrap();
                let mix = upper_bound(UpperBoundKind::MixturePerfect, &q).unwrap().upper();
                let sw = upper_bound(UpperBoundKind::SwitchPerfect, &q).unwrap().upper();
                let crrr = upper_bound(UpperBoundKind::CrrrRange, &q).unwrap();
                let eps = 1e-12;
                assert!(lo <= mix + eps && mix <= sw + eps && sw <= crrr.upper() + eps, "n={n} B={b}");
                assert!(crrr.lower() <= crrr.upper());
            }
        }
    }

    #[test]
    fn noisy_switch_tradeoff() {
        for n in [3, 10, 50] {
            for b in 1..n {
                let mut prev: Option<(f64, f64)> = None;
                for k in 1..=20 {
                    let q = BoundQuery::new(n, b).with_rho(k as f64 / 20.0);
                    let (c, s) = smoothness_constants(&q).unwrap();
                    if let Some((pc, ps)) = prev {
                        assert!(c >= pc && s <= ps);
                    }
                    prev = Some((c, s));
                }
            }
            for b in [0, n] {
                let a = smoothness_constants(&BoundQuery::new(n, b).with_rho(0.1)).unwrap();
                let z = smoothness_constants(&BoundQuery::new(n, b).with_rho(1.0)).unwrap();
                assert!(close(a.0, z.0, 1e-14));
                if b == n {
                    assert!(close(a.1, z.1, 1e-14));
                }
            }
        }
    }

    #[test]
    fn precise_variant_recovers_switch_bound() {
        // The rho-term of C vanishes as rho -> 0 with no error.
        for (n, b) in [(2, 1), (10, 4), (40, 39)] {
            let q = BoundQuery::new(n, b).with_rho(1e-12);
            let precise = upper_bound(UpperBoundKind::NoisySwitchPrecise, &q).unwrap().upper();
            let sw = upper_bound(UpperBoundKind::SwitchPerfect, &q).unwrap().upper();
            assert!(close(precise, sw, 1e-9));
        }
    }

    #[test]
    fn scale_constants() {
        let k = ScaleConstants::new(1.0).unwrap();
        assert_eq!((k.beta, k.gamma, k.lipschitz, k.mean_xi), (0.0, 3.0, 1.0, 2.0));
        assert!(ScaleConstants::new(0.0).is_err());
        for rho in [0.1, 0.5, 1.0] {
            let k = ScaleConstants::new(rho).unwrap();
            assert_eq!(k.c1(10, 0).unwrap(), 2.0);
            for s in [1.2, 2.0, 7.5] {
                assert!(close(k.g(s), k.g_numeric(s).unwrap(), 1e-10));
            }
            let (beta, gamma) = k.grid_suprema(100.0, 400).unwrap();
            assert!(close(beta, 0.0, 1e-12));
            assert!(close(gamma, 2.0 + rho, 1e-6), "rho {rho}: {gamma}");
        }
        let k = ScaleConstants::new(0.5).unwrap();
        assert_eq!(k.c2(10, 4).unwrap(), (1.0 + 2.0 + 1.5) * 6.0 + 3.0);
    }

    #[test]
    fn noisy_switch_uses_scale_constants() {
        let k = ScaleConstants::new(0.4).unwrap();
        let q = BoundQuery::new(12, 5).with_rho(0.4);
        let (c, _) = smoothness_constants(&q).unwrap();
        assert!(close(c, k.c1(12, 5).unwrap(), 1e-14));
    }

    #[test]
    fn sjf_matches_pairwise_form() {
        let x = JobInstance::new(vec![0.3, 2.5, 1.1, 0.7, 1.1]).unwrap();
        let a = closed_form_objective(ObjectiveKind::Opt, &x);
        let b = x.total() + sum_pairwise_min(&x);
        assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn pairwise_min_sum() {
        let x = JobInstance::new(vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        let brute: f64 = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .map(|(i, j)| x.sizes()[i].min(x.sizes()[j]))
            .sum();
        assert_eq!(sum_pairwise_min(&x), brute);
    }
}
