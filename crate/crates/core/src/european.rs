//! Scaled European switching option `C_E*(τ, x) = E^{(1)}[e^{-r̃τ}(x e^{Y_τ} - 1)^+]`.
//!
//! Two independent routes are provided: a Poisson-conditioned lognormal
//! mixture and a damped Fourier inversion of the modified call price.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::levy::EffectiveModel;
use crate::quadrature::{integrate_doubling, GaussLegendre, Tolerance};

/// Maximum number of Poisson terms in the series.
pub const SERIES_MAX_TERMS: usize = 200;
const SERIES_TAIL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingMethod {
    Series,
    Fourier,
}

/// Price and spatial delta of the scaled European option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuroQuote {
    pub price: f64,
    pub delta: f64,
    pub method: PricingMethod,
}

pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub(crate) fn payoff(x: f64) -> f64 {
    (x - 1.0).max(0.0)
}

fn payoff_slope(x: f64) -> f64 {
    if x > 1.0 {
        1.0
    } else if x == 1.0 {
        0.5
    } else {
        0.0
    }
}

/// Series price: conditional on `n` jumps, `log E_τ / x` is Gaussian with mean
/// `μτ + nφ` and variance `σ²τ`.
pub fn euro_price(tau: f64, x: f64, em: &EffectiveModel) -> EuroQuote {
    debug_assert!(tau >= 0.0 && x >= 0.0, "euro_price needs tau >= 0 and x >= 0");
    let quote = |price, delta| EuroQuote {
        price,
        delta,
        method: PricingMethod::Series,
    };
    if tau <= 0.0 {
        return quote(payoff(x), payoff_slope(x));
    }
    if x <= 0.0 {
        return quote(0.0, 0.0);
    }

    let sd = em.sigma * tau.sqrt();
    let var = sd * sd;
    let mu = em.log_drift();
    let log_x = x.ln();
    let lt = em.lambda * tau;

    let mut weight = (-lt).exp();
    let mut cumulative = 0.0;
    let mut price = 0.0;
    let mut delta = 0.0;
    for n in 0..=SERIES_MAX_TERMS {
        if n > 0 {
            weight *= lt / n as f64;
        }
        let mean = mu * tau + n as f64 * em.phi;
        let forward = (mean + 0.5 * var).exp();
        let d2 = (log_x + mean) / sd;
        let d1 = d2 + sd;
        let n1 = norm_cdf(d1);
        price += weight * (x * forward * n1 - norm_cdf(d2));
        delta += weight * forward * n1;
        cumulative += weight;

        if em.lambda == 0.0 {
            break;
        }
        // φ ≤ 0 makes the conditional forward non-increasing in n, so the
        // remaining mass times the next forward bounds the tail.
        let next_forward = (mean + em.phi + 0.5 * var).exp();
        let tail = (1.0 - cumulative).max(0.0) * x.max(1.0) * next_forward.max(1.0);
        if n as f64 > lt && (tail < SERIES_TAIL_TOL || tail < 1e-12 * price.abs()) {
            break;
        }
    }
    let disc = (-em.r_tilde * tau).exp();
    quote((disc * price).max(0.0), disc * delta)
}

/// `S · C_E*(τ, x)`: the unscaled European switching option.
pub fn full_euro_price(tau: f64, s: f64, x: f64, em: &EffectiveModel) -> f64 {
    s * euro_price(tau, x, em).price
}

fn fourier_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Complex Laplace exponent `Φ_Y^{(1)}(z)`.
fn laplace_complex(z: Complex64, em: &EffectiveModel) -> Complex64 {
    em.log_drift() * z + 0.5 * em.sigma * em.sigma * z * z + em.lambda * ((em.phi * z).exp() - 1.0)
}

/// Fourier price with damping exponent 1: the transform of the damped
/// modified call is `e^{-r̃τ} χ_τ(v - 2i) / ((iv + 1)(iv + 2))`.
pub fn euro_price_fourier(tau: f64, x: f64, em: &EffectiveModel) -> Result<EuroQuote> {
    if !(tau > 0.0) {
        return Err(invalid("tau", format!("Fourier route needs tau > 0, got {tau}")));
    }
    if !(x > 0.0) {
        return Err(invalid("x", format!("Fourier route needs x > 0, got {x}")));
    }
    const ALPHA: f64 = 1.0;
    let k = -x.ln();
    let disc = (-em.r_tilde * tau).exp();
    let transform = |v: f64| -> Complex64 {
        let z = Complex64::new(ALPHA + 1.0, v);
        let chi = (tau * laplace_complex(z, em)).exp();
        let denom = Complex64::new(ALPHA * ALPHA + ALPHA - v * v, (2.0 * ALPHA + 1.0) * v);
        disc * chi / denom
    };
    // The Gaussian factor exp(-τσ²v²/2) dominates the integrand envelope.
    let v_max = (2.0 * 45.0 / (tau * em.sigma * em.sigma)).sqrt();
    let integrand = |v: f64| -> [f64; 2] {
        let psi = transform(v) * Complex64::new(0.0, -v * k).exp();
        [psi.re, (Complex64::new(0.0, -v) * psi).re]
    };
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-12,
        initial_panels: ((v_max / 4.0).ceil() as usize).clamp(4, 1 << 12),
        max_panels: 1 << 18,
    };
    let [i0, i1] = integrate_doubling(fourier_rule(), integrand, 0.0, v_max, tol)?;
    let damp = (-ALPHA * k).exp() / PI;
    let call = damp * i0;
    let call_dk = -ALPHA * call + damp * i1;
    Ok(EuroQuote {
        price: x * call,
        delta: call - call_dk,
        method: PricingMethod::Fourier,
    })
}
