//! Exponential illiquidity horizon `T_R ~ Exp(ϑ)`, independent of the market.
//!
//! The European leg is the exponential mixture of the finite-horizon prices.
//! On the continuation region `(0, b_R)` the premium solves
//! `A_E L - (r̃ + ϑ) L = 0`; with downward jumps only, `c₁ x^{γ₊}` is an exact
//! solution there, and value matching plus smooth pasting at `b_R` fix both
//! `c₁` and `b_R`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::european::{euro_price, payoff};
use crate::levy::EffectiveModel;
use crate::quadrature::{integrate_doubling, GaussLegendre, Tolerance};
use crate::roots::brent;

/// Relative truncation target of the mixture integral.
pub const MIXTURE_TOL: f64 = 1e-10;
/// Admissible residual of the value-matching condition at `b_R`.
pub const BOUNDARY_RESIDUAL_TOL: f64 = 1e-8;
const MIXTURE_PIECES: usize = 6;
const BRACKET_LO: f64 = 1.0 + 1e-6;
const BRACKET_HI: f64 = 10.0;
const BRACKET_MAX: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedEuro {
    pub price: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ZeroPremium,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedSolution {
    pub vartheta: f64,
    pub gamma_plus: f64,
    pub c1_plus: f64,
    /// Exercise level; `+∞` in the zero-premium regime.
    pub b_r: f64,
    pub regime: Regime,
    /// `|c₁ b^{γ₊} - (b - 1 - C_E^R(b))|`.
    pub value_matching_residual: f64,
    /// `|γ₊ c₁ b^{γ₊-1} - (1 - ∂ₓC_E^R(b))|`.
    pub smooth_pasting_residual: f64,
}

fn mixture_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Fails unless `ϑ + r̃ - Φ_Y^{(1)}(1) > 0`, without which the mixture may diverge.
pub fn check_integrability(vartheta: f64, em: &EffectiveModel) -> Result<()> {
    if !(vartheta > 0.0) || !vartheta.is_finite() {
        return Err(invalid("vartheta", format!("must be positive and finite, got {vartheta}")));
    }
    let rate = vartheta + em.r_tilde - em.b_tilde;
    if !(rate > 0.0) {
        return Err(Error::Admissibility(format!(
            "vartheta + r_tilde - b_tilde = {rate} must be positive; the randomized value may be infinite"
        )));
    }
    Ok(())
}

/// `C_E^{R,*}(x) = ∫ ϑ e^{-ϑt} C_E*(t, x) dt` and its `x`-derivative.
///
/// Integrated in `u = √t` so the `√t` onset of the at-the-money price is
/// smooth in the integration variable.
pub fn euro_randomized(x: f64, vartheta: f64, em: &EffectiveModel) -> Result<RandomizedEuro> {
    check_integrability(vartheta, em)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid("x", format!("must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(RandomizedEuro { price: 0.0, delta: 0.0 });
    }
    let decay = vartheta.min(vartheta + em.r_tilde - em.b_tilde);
    let t_max = (10.0 + MIXTURE_TOL.ln().abs()) / decay;
    let mut integrand = |u: f64| -> [f64; 2] {
        let t = u * u;
        let q = euro_price(t, x, em);
        let w = 2.0 * u * vartheta * (-vartheta * t).exp();
        [w * q.price, w * q.delta]
    };
    let u_max = t_max.sqrt();
    let rough = mixture_rule().composite(&mut integrand, 0.0, u_max, 16);
    let tol = Tolerance {
        abs: 1e-15 + 1e-12 * rough[0].abs().max(rough[1].abs()),
        rel: 1e-12,
        initial_panels: 2,
        max_panels: 1 << 12,
    };
    // Dyadic pieces towards the origin, where the integrand varies fastest.
    let mut price = 0.0;
    let mut delta = 0.0;
    let mut hi = u_max;
    for k in 1..=MIXTURE_PIECES {
        let lo = if k == MIXTURE_PIECES { 0.0 } else { 0.5 * hi };
        let [p, d] = integrate_doubling(mixture_rule(), &mut integrand, lo, hi, tol)?;
        price += p;
        delta += d;
        hi = lo;
    }
    Ok(RandomizedEuro {
        price: price.max(0.0),
        delta,
    })
}

/// Solves the free-boundary system for the exponential horizon.
pub fn solve_randomized(vartheta: f64, em: &EffectiveModel) -> Result<RandomizedSolution> {
    em.check()?;
    check_integrability(vartheta, em)?;
    let (_, gamma) = em.inverse_laplace_roots(em.r_tilde + vartheta)?;
    if em.is_zero_premium() {
        return Ok(RandomizedSolution {
            vartheta,
            gamma_plus: gamma,
            c1_plus: 0.0,
            b_r: f64::INFINITY,
            regime: Regime::ZeroPremium,
            value_matching_residual: 0.0,
            smooth_pasting_residual: 0.0,
        });
    }

    let equation = |b: f64| -> Result<f64> {
        let q = euro_randomized(b, vartheta, em)?;
        Ok(1.0 + q.price + b / gamma * (1.0 - q.delta) - b)
    };
    let mut trace = vec![(BRACKET_LO, equation(BRACKET_LO)?)];
    let mut hi = BRACKET_HI;
    let b_r = loop {
        let g_hi = equation(hi)?;
        trace.push((hi, g_hi));
        if g_hi.signum() != trace[0].1.signum() {
            let lo = trace[trace.len() - 2].0;
            match brent(equation, lo, hi, 1e-14, 200)? {
                Some(b) => break b,
                None => return Err(Error::BoundaryBracket { trace }),
            }
        }
        hi *= 2.0;
        if hi > BRACKET_MAX {
            return Err(Error::BoundaryBracket { trace });
        }
    };

    let q = euro_randomized(b_r, vartheta, em)?;
    let c1 = b_r.powf(1.0 - gamma) / gamma * (1.0 - q.delta);
    let value_matching = (c1 * b_r.powf(gamma) - (b_r - 1.0 - q.price)).abs();
    let smooth_pasting = (gamma * c1 * b_r.powf(gamma - 1.0) - (1.0 - q.delta)).abs();
    let residual = value_matching.max(smooth_pasting);
    if residual > BOUNDARY_RESIDUAL_TOL {
        return Err(Error::BoundaryResidual {
            residual,
            tolerance: BOUNDARY_RESIDUAL_TOL,
        });
    }
    Ok(RandomizedSolution {
        vartheta,
        gamma_plus: gamma,
        c1_plus: c1,
        b_r,
        regime: Regime::Standard,
        value_matching_residual: value_matching,
        smooth_pasting_residual: smooth_pasting,
    })
}

/// Premium `L^{R,*}(x)`: `c₁ x^{γ₊}` below `b_R`, `x - 1 - C_E^{R,*}(x)` above.
pub fn premium_stoch(x: f64, sol: &RandomizedSolution, em: &EffectiveModel) -> Result<f64> {
    match sol.regime {
        Regime::ZeroPremium => Ok(0.0),
        Regime::Standard if x < sol.b_r => Ok(sol.c1_plus * x.max(0.0).powf(sol.gamma_plus)),
        Regime::Standard => Ok(x - 1.0 - euro_randomized(x, sol.vartheta, em)?.price),
    }
}

/// `C_A^{R,*}(x) = C_E^{R,*}(x) + L^{R,*}(x)`; exactly `x - 1` on the stopping set.
pub fn amer_randomized(x: f64, sol: &RandomizedSolution, em: &EffectiveModel) -> Result<f64> {
    if sol.regime == Regime::Standard && x >= sol.b_r {
        return Ok(x - 1.0);
    }
    Ok(euro_randomized(x, sol.vartheta, em)?.price + premium_stoch(x, sol, em)?)
}

fn generator(em: &EffectiveModel, x: f64, f: f64, df: f64, d2f: f64, f_jump: f64) -> f64 {
    0.5 * em.sigma * em.sigma * x * x * d2f + em.compensated_growth() * x * df + em.lambda * (f_jump - f)
}

/// Residual of `ϑ((x-1)^+ - C) + A_E C - r̃ C = 0` for `C = C_E^{R,*}`; the
/// second derivative is a central difference of the integrated delta.
pub fn euro_oide_residual(x: f64, vartheta: f64, em: &EffectiveModel) -> Result<f64> {
    let h = 1e-4 * x.max(1e-2);
    let q = euro_randomized(x, vartheta, em)?;
    let up = euro_randomized(x + h, vartheta, em)?.delta;
    let down = euro_randomized(x - h, vartheta, em)?.delta;
    let d2 = (up - down) / (2.0 * h);
    let jump = euro_randomized(x * em.phi.exp(), vartheta, em)?.price;
    Ok(vartheta * (payoff(x) - q.price) + generator(em, x, q.price, q.delta, d2, jump) - em.r_tilde * q.price)
}

/// Residual of `A_E L - (r̃ + ϑ) L = 0` at a continuation point `x < b_R`,
/// from central differences of the piecewise premium.
pub fn premium_ode_residual(x: f64, sol: &RandomizedSolution, em: &EffectiveModel) -> Result<f64> {
    if sol.regime == Regime::Standard && !(x > 0.0 && x < sol.b_r) {
        return Err(invalid("x", format!("must lie in (0, b_R = {}), got {x}", sol.b_r)));
    }
    let h = 1e-4 * x;
    let l = |y: f64| premium_stoch(y, sol, em);
    let (f, fu, fd) = (l(x)?, l(x + h)?, l(x - h)?);
    let d1 = (fu - fd) / (2.0 * h);
    let d2 = (fu - 2.0 * f + fd) / (h * h);
    let jump = l(x * em.phi.exp())?;
    Ok(generator(em, x, f, d1, d2, jump) - (em.r_tilde + sol.vartheta) * f)
}
