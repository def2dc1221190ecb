//! Size laws of the form `Pr(X > t) = phi(0) / phi(t)` and the functional
//! `G_phi(x, T)` whose infimum drives the generic lower bound.

use serde::{Deserialize, Serialize};

use super::quadrature::{golden_min, integrate, integrate_tail, Tolerance};
use crate::error::{Error, Result};

/// What the lower-bound machinery needs from a `phi`.
///
/// `phi` must be increasing and continuously differentiable with
/// `phi(0) > 0`, `phi'/phi` non-increasing and `1/phi^2` integrable.
pub trait Phi {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    /// `int_0^inf dt / phi`, or `None` when it diverges.
    fn inv_integral(&self) -> Option<f64>;
    /// `int_0^inf dt / phi^2`.
    fn inv_sq_integral(&self) -> f64;
    /// `inf_{T >= x} G(x, T)` in closed form, when one is known.
    fn inf_g_closed(&self, _x: f64) -> Option<f64> {
        None
    }
    /// Point where `inf G` changes regime; quadrature splits there.
    fn kink(&self) -> f64 {
        1.0
    }
    /// Power-law decay exponent of `inf G * phi' / phi^2` (any value above
    /// 1 is fine for faster-than-polynomial decay).
    fn tail_exponent(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiFamily {
    /// `phi(t) = e^t`: exponential sizes.
    Exp,
    /// `phi(t) = (1+t)^r` with `r` in `(1/2, 1]`: heavy tails.
    PolyTail { r: f64 },
}

impl PhiFamily {
    pub fn poly_tail(r: f64) -> Result<Self> {
        let f = Self::PolyTail { r };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PolyTail { r } if !(r > 0.5 && r <= 1.0) => {
                Err(Error::param(format!("poly-tail exponent r = {r} outside (1/2, 1]")))
            }
            _ => Ok(()),
        }
    }
}

impl Phi for PhiFamily {
    fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Exp => t.exp(),
            Self::PolyTail { r } => (1.0 + t).powf(r),
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Exp => t.exp(),
            Self::PolyTail { r } => r * (1.0 + t).powf(r - 1.0),
        }
    }

    fn inv_integral(&self) -> Option<f64> {
        match self {
            Self::Exp => Some(1.0),
            Self::PolyTail { .. } => None,
        }
    }

    fn inv_sq_integral(&self) -> f64 {
        match *self {
            Self::Exp => 0.5,
            Self::PolyTail { r } => 1.0 / (2.0 * r - 1.0),
        }
    }

    fn inf_g_closed(&self, x: f64) -> Option<f64> {
        Some(match *self {
            Self::Exp => x.min(1.0),
            Self::PolyTail { r } => {
                if x <= 1.0 / r {
                    x
                } else if r == 1.0 {
                    1.0 + x.ln()
                } else {
                    -1.0 / (1.0 - r) + (r * x).powf(1.0 - r) / (r * (1.0 - r))
                }
            }
        })
    }

    fn kink(&self) -> f64 {
        match *self {
            Self::Exp => 1.0,
            Self::PolyTail { r } => 1.0 / r,
        }
    }

    fn tail_exponent(&self) -> f64 {
        match *self {
            Self::Exp => 2.0,
            Self::PolyTail { r } => 2.0 * r,
        }
    }
}

fn g_tolerance() -> Tolerance {
    Tolerance { abs: 1e-12, rel: 1e-13, max_intervals: 4000 }
}

/// `G(x, T) = int_0^{T-x} dt/phi(t) + x/phi(T-x)`, by quadrature.
pub fn g_phi<P: Phi + ?Sized>(phi: &P, x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::param(format!("x = {x} must be positive")));
    }
    if !(t >= x) {
        return Err(Error::param(format!("T = {t} must be at least x = {x}")));
    }
    let d = t - x;
    // t = e^v - 1 spreads long horizons over a short interval.
    let integral = integrate(
        |v: f64| {
            let s = v.exp_m1();
            (s + 1.0) / phi.value(s)
        },
        0.0,
        d.ln_1p(),
        g_tolerance(),
    )?;
    Ok(integral.value + x / phi.value(d))
}

/// Largest horizon `T - x` scanned by [`inf_g_numeric`].
pub const HORIZON: f64 = 1e8;

/// `inf_{T >= x} G(x, T)` by golden-section search over `ln(1 + T - x)`.
///
/// `G(x, .)` is unimodal in `T` for the built-in families; the search also
/// compares both ends of the scanned range.
pub fn inf_g_numeric<P: Phi + ?Sized>(phi: &P, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::param(format!("x = {x} must be positive")));
    }
    let mut failure = None;
    let g = |v: f64| g_phi(phi, x, x + v.exp_m1()).unwrap_or(f64::INFINITY);
    let top = HORIZON.ln_1p();
    let (_, mid) = golden_min(g, 0.0, top, 1e-10);
    let ends = [g_phi(phi, x, x), g_phi(phi, x, x + HORIZON)];
    let mut best = mid;
    for e in ends {
        match e {
            Ok(y) => best = best.min(y),
            Err(e) => failure = Some(e),
        }
    }
    match failure {
        Some(e) if !best.is_finite() => Err(e),
        _ => Ok(best),
    }
}

/// `inf_{T >= x} G(x, T)`: closed form when available, numeric otherwise.
pub fn inf_g_phi<P: Phi + ?Sized>(phi: &P, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::param(format!("x = {x} must be positive")));
    }
    match phi.inf_g_closed(x) {
        Some(v) => Ok(v),
        None => inf_g_numeric(phi, x),
    }
}

/// `alpha = int inf G * phi'/phi^2 dx / int dt/phi^2`.
pub fn alpha_phi<P: Phi + ?Sized>(phi: &P) -> Result<f64> {
    let tol = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 4000 };
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let p = phi.value(x);
        let inf = inf_g_phi(phi, x).unwrap_or(f64::NAN);
        inf * phi.derivative(x) / (p * p)
    };
    let k = phi.kink();
    let head = integrate(integrand, 0.0, k, tol)?;
    let tail = integrate_tail(integrand, k, phi.tail_exponent(), tol)?;
    let den = phi.inv_sq_integral();
    if !(den > 0.0 && den.is_finite()) {
        return Err(Error::Numeric {
            what: "alpha".into(),
            detail: format!("int 1/phi^2 = {den}"),
        });
    }
    let alpha = (head.value + tail.value) / den;
    if !alpha.is_finite() {
        return Err(Error::Numeric {
            what: "alpha".into(),
            detail: format!(
                "head {} (err {}), tail {} (err {})",
                head.value, head.error, tail.value, tail.error
            ),
        });
    }
    Ok(alpha)
}
