//! Model parameters, Laplace exponents and the Esscher change of measure.
//!
//! The project's log cash-flow follows the jump-diffusion
//!
//! ```text
//! Y_t = (b - λ(e^φ - 1) - σ²/2) t + σ W_t + φ N_t
//! ```
//!
//! so that `Φ_Y(1) = b`. The asset enters premiums only through the
//! aggregates `Φ_X(1)`, `σ_X`, the correlation `ρ` and the rate `r`. After the
//! 1-Esscher shift the project's log-value keeps its jump part and gains the
//! drift `ρ σ_X σ`, while the discount rate becomes `r̃ = r - Φ_X(1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Laplace exponent `log E[e^{θ Y_1}]` of the jump-diffusion with growth rate
/// `growth = Φ(1)`.
pub fn laplace_exponent(theta: f64, growth: f64, sigma: f64, phi: f64, lambda: f64) -> f64 {
    let drift = growth - lambda * phi.exp_m1() - 0.5 * sigma * sigma;
    drift * theta + 0.5 * sigma * sigma * theta * theta + lambda * (phi * theta).exp_m1()
}

fn laplace_derivative(theta: f64, growth: f64, sigma: f64, phi: f64, lambda: f64) -> f64 {
    let drift = growth - lambda * phi.exp_m1() - 0.5 * sigma * sigma;
    drift + sigma * sigma * theta + lambda * phi * (phi * theta).exp()
}

/// Cash-flow dynamics of the alternative project.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectModel {
    /// Growth rate `Φ_Y(1)` per annum.
    pub b: f64,
    /// Diffusion volatility.
    pub sigma: f64,
    /// Log jump size, non-positive.
    pub phi: f64,
    /// Jump intensity per annum.
    pub lambda: f64,
    /// Initial project value `E_0`.
    pub e0: f64,
}

impl ProjectModel {
    pub fn new(b: f64, sigma: f64, phi: f64, lambda: f64, e0: f64) -> Result<Self> {
        let m = Self {
            b,
            sigma,
            phi,
            lambda,
            e0,
        };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !(self.phi <= 0.0) {
            return Err(invalid("phi", format!("jumps must be non-positive, got {}", self.phi)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if !(self.e0 > 0.0) || !self.e0.is_finite() {
            return Err(invalid("e0", format!("must be positive, got {}", self.e0)));
        }
        if !self.b.is_finite() {
            return Err(invalid("b", "must be finite"));
        }
        Ok(())
    }

    pub fn laplace(&self, theta: f64) -> f64 {
        laplace_exponent(theta, self.b, self.sigma, self.phi, self.lambda)
    }

    /// Initial cash-flow level `C_0 = E_0 (r - b)`.
    pub fn initial_cashflow(&self, r: f64) -> f64 {
        self.e0 * (r - self.b)
    }
}

/// `Φ_Y(θ)` for the project model.
pub fn laplace_y(theta: f64, m: &ProjectModel) -> f64 {
    m.laplace(theta)
}

/// The asset's contribution to the premium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetAggregates {
    /// `Φ_X(1)`, the asset's expected log-growth exponent.
    pub phi_x1: f64,
    /// Asset diffusion volatility.
    pub sigma_x: f64,
    /// Correlation between the two Brownian drivers.
    pub rho: f64,
    /// Risk-free rate.
    pub r: f64,
}

impl AssetAggregates {
    pub fn new(phi_x1: f64, sigma_x: f64, rho: f64, r: f64) -> Result<Self> {
        let a = Self {
            phi_x1,
            sigma_x,
            rho,
            r,
        };
        a.check()?;
        Ok(a)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.rho.abs() <= 1.0) {
            return Err(invalid("rho", format!("must lie in [-1, 1], got {}", self.rho)));
        }
        if !(self.sigma_x >= 0.0) || !self.sigma_x.is_finite() {
            return Err(invalid("sigma_x", format!("must be non-negative, got {}", self.sigma_x)));
        }
        if !self.r.is_finite() || !self.phi_x1.is_finite() {
            return Err(invalid("r", "rates must be finite"));
        }
        if self.phi_x1 > self.r {
            return Err(Error::Admissibility(format!(
                "Φ_X(1) = {} exceeds r = {}",
                self.phi_x1, self.r
            )));
        }
        Ok(())
    }

    /// Dividend-adjusted discount rate `r̃ = r - Φ_X(1)`.
    pub fn r_tilde(&self) -> f64 {
        self.r - self.phi_x1
    }
}

/// Dynamics of `E` under the Esscher-shifted measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveModel {
    /// Shifted growth `b̃ = b + ρ σ_X σ`, equal to `Φ_Y^{(1)}(1)`.
    pub b_tilde: f64,
    pub sigma: f64,
    pub phi: f64,
    pub lambda: f64,
    /// Effective discount `r̃ = r - Φ_X(1)`.
    pub r_tilde: f64,
}

impl EffectiveModel {
    pub fn new(b_tilde: f64, sigma: f64, phi: f64, lambda: f64, r_tilde: f64) -> Result<Self> {
        let em = Self {
            b_tilde,
            sigma,
            phi,
            lambda,
            r_tilde,
        };
        em.check()?;
        Ok(em)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !(self.phi <= 0.0) {
            return Err(invalid("phi", format!("jumps must be non-positive, got {}", self.phi)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if !(self.r_tilde >= 0.0) || !self.r_tilde.is_finite() {
            return Err(Error::Admissibility(format!(
                "effective discount r̃ = {} must be non-negative",
                self.r_tilde
            )));
        }
        if !self.b_tilde.is_finite() {
            return Err(invalid("b_tilde", "must be finite"));
        }
        Ok(())
    }

    /// `Φ_Y^{(1)}(θ)`.
    pub fn laplace(&self, theta: f64) -> f64 {
        laplace_exponent(theta, self.b_tilde, self.sigma, self.phi, self.lambda)
    }

    pub fn laplace_derivative(&self, theta: f64) -> f64 {
        laplace_derivative(theta, self.b_tilde, self.sigma, self.phi, self.lambda)
    }

    /// Drift of `log E` per annum.
    pub fn log_drift(&self) -> f64 {
        self.b_tilde - self.lambda * self.phi.exp_m1() - 0.5 * self.sigma * self.sigma
    }

    /// Drift coefficient of `E` itself net of jump compensation, `b̃ - λ(e^φ - 1)`.
    pub fn compensated_growth(&self) -> f64 {
        self.b_tilde - self.lambda * self.phi.exp_m1()
    }

    /// `r̃ ≤ Φ_Y^{(1)}(1)`: discounted `E` is a submartingale and early
    /// exercise is never optimal.
    pub fn is_zero_premium(&self) -> bool {
        self.r_tilde <= self.b_tilde
    }

    /// Negative and positive solutions of `Φ_Y^{(1)}(θ) = y` for `y > 0`.
    pub fn inverse_laplace_roots(&self, y: f64) -> Result<(f64, f64)> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(invalid("y", format!("target must be positive, got {y}")));
        }
        let minus = self.one_sided_root(y, -1.0)?;
        let plus = self.one_sided_root(y, 1.0)?;
        Ok((minus, plus))
    }

    fn one_sided_root(&self, y: f64, side: f64) -> Result<f64> {
        let g = |t: f64| self.laplace(t) - y;
        // g(0) = -y < 0; expand outward by doubling until g changes sign.
        let mut inner = 0.0;
        let mut outer = side;
        while g(outer) <= 0.0 {
            inner = outer;
            outer *= 2.0;
            if outer.abs() > 1e12 {
                return Err(Error::RootBracket {
                    target: y,
                    lo: inner.min(outer),
                    hi: inner.max(outer),
                });
            }
        }
        let (mut neg, mut pos) = (inner, outer);
        while (pos - neg).abs() > 1e-12 * pos.abs().max(1.0) {
            let mid = 0.5 * (neg + pos);
            if g(mid) <= 0.0 {
                neg = mid;
            } else {
                pos = mid;
            }
        }
        let mut root = 0.5 * (neg + pos);
        for _ in 0..3 {
            let d = self.laplace_derivative(root);
            if d == 0.0 {
                break;
            }
            let next = root - g(root) / d;
            if next.is_finite() && (next - root).abs() <= (pos - neg).abs().max(1e-300) * 4.0 {
                root = next;
            } else {
                break;
            }
        }
        Ok(root)
    }
}

/// `Φ_Y^{(1)}(θ)`.
pub fn laplace_y1(theta: f64, em: &EffectiveModel) -> f64 {
    em.laplace(theta)
}

/// Applies the 1-Esscher transform of the asset to the project dynamics.
pub fn esscher_shift(m: &ProjectModel, a: &AssetAggregates) -> EffectiveModel {
    EffectiveModel {
        b_tilde: m.b + a.rho * a.sigma_x * m.sigma,
        sigma: m.sigma,
        phi: m.phi,
        lambda: m.lambda,
        r_tilde: a.r_tilde(),
    }
}

/// Solutions `(γ₋, γ₊)` of `Φ_Y^{(1)}(θ) = y`.
pub fn inverse_laplace_roots(y: f64, em: &EffectiveModel) -> Result<(f64, f64)> {
    em.inverse_laplace_roots(y)
}

/// Expected present value of the perpetual cash-flow, `C_0 / (r - b)`.
pub fn project_value_from_cashflow(c0: f64, r: f64, b: f64) -> Result<f64> {
    if !(r > b) {
        return Err(Error::Admissibility(format!(
            "growth rate b = {b} must be below r = {r} for a finite project value"
        )));
    }
    Ok(c0 / (r - b))
}

/// Length of the illiquidity period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonSpec {
    /// Fixed horizon `T` in years.
    Deterministic { maturity: f64 },
    /// Exponential horizon with rate `ϑ` per annum (mean `1/ϑ`).
    Exponential { vartheta: f64 },
}

impl HorizonSpec {
    pub fn deterministic(maturity: f64) -> Result<Self> {
        let h = Self::Deterministic { maturity };
        h.check()?;
        Ok(h)
    }

    pub fn exponential(vartheta: f64) -> Result<Self> {
        let h = Self::Exponential { vartheta };
        h.check()?;
        Ok(h)
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            Self::Deterministic { maturity } if !(maturity > 0.0) || !maturity.is_finite() => {
                Err(invalid("maturity", format!("must be positive, got {maturity}")))
            }
            Self::Exponential { vartheta } if !(vartheta > 0.0) || !vartheta.is_finite() => {
                Err(invalid("vartheta", format!("must be positive, got {vartheta}")))
            }
            _ => Ok(()),
        }
    }

    /// Mean horizon length in years.
    pub fn expected_length(&self) -> f64 {
        match *self {
            Self::Deterministic { maturity } => maturity,
            Self::Exponential { vartheta } => 1.0 / vartheta,
        }
    }
}

/// A single failed admissibility condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    NonPositiveSigma { sigma: f64 },
    PositiveJump { phi: f64 },
    NegativeIntensity { lambda: f64 },
    NonPositiveE0 { e0: f64 },
    CorrelationOutOfRange { rho: f64 },
    NegativeAssetVolatility { sigma_x: f64 },
    /// `Φ_X(1) ≤ r` fails.
    DividendAdmissibility { phi_x1: f64, r: f64 },
    /// `Φ_Y(1) < r` fails, so the project value diverges.
    ProjectGrowth { b: f64, r: f64 },
    NonPositiveHorizon { value: f64 },
    /// `ϑ + r̃ - Φ_Y^{(1)}(1) > 0` fails.
    RandomizedIntegrability { vartheta: f64, r_tilde: f64, b_tilde: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveSigma { sigma } => write!(f, "project volatility σ = {sigma} must be positive"),
            Self::PositiveJump { phi } => write!(f, "jump size φ = {phi} must be non-positive"),
            Self::NegativeIntensity { lambda } => write!(f, "jump intensity λ = {lambda} must be non-negative"),
            Self::NonPositiveE0 { e0 } => write!(f, "initial project value E0 = {e0} must be positive"),
            Self::CorrelationOutOfRange { rho } => write!(f, "correlation ρ = {rho} outside [-1, 1]"),
            Self::NegativeAssetVolatility { sigma_x } => write!(f, "asset volatility σ_X = {sigma_x} is negative"),
            Self::DividendAdmissibility { phi_x1, r } => write!(f, "Φ_X(1) = {phi_x1} exceeds r = {r}"),
            Self::ProjectGrowth { b, r } => write!(f, "growth b = {b} is not below r = {r}"),
            Self::NonPositiveHorizon { value } => write!(f, "horizon parameter {value} must be positive"),
            Self::RandomizedIntegrability {
                vartheta,
                r_tilde,
                b_tilde,
            } => write!(f, "ϑ + r̃ - b̃ = {vartheta} + {r_tilde} - {b_tilde} is not positive"),
        }
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Informational: `r̃ ≤ Φ_Y^{(1)}(1)`, the premium vanishes identically.
    pub zero_premium: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.violations.first() {
            None => Ok(self),
            Some(v) => Err(Error::Admissibility(v.to_string())),
        }
    }
}

/// Collects every violated admissibility condition for a scenario.
pub fn validate(m: &ProjectModel, a: &AssetAggregates, h: &HorizonSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if !(m.sigma > 0.0) {
        violations.push(Violation::NonPositiveSigma { sigma: m.sigma });
    }
    if !(m.phi <= 0.0) {
        violations.push(Violation::PositiveJump { phi: m.phi });
    }
    if !(m.lambda >= 0.0) {
        violations.push(Violation::NegativeIntensity { lambda: m.lambda });
    }
    if !(m.e0 > 0.0) {
        violations.push(Violation::NonPositiveE0 { e0: m.e0 });
    }
    if !(a.rho.abs() <= 1.0) {
        violations.push(Violation::CorrelationOutOfRange { rho: a.rho });
    }
    if !(a.sigma_x >= 0.0) {
        violations.push(Violation::NegativeAssetVolatility { sigma_x: a.sigma_x });
    }
    if !(a.phi_x1 <= a.r) {
        violations.push(Violation::DividendAdmissibility { phi_x1: a.phi_x1, r: a.r });
    }
    if !(m.b < a.r) {
        violations.push(Violation::ProjectGrowth { b: m.b, r: a.r });
    }
    let em = esscher_shift(m, a);
    match *h {
        HorizonSpec::Deterministic { maturity } => {
            if !(maturity > 0.0) {
                violations.push(Violation::NonPositiveHorizon { value: maturity });
            }
        }
        HorizonSpec::Exponential { vartheta } => {
            if !(vartheta > 0.0) {
                violations.push(Violation::NonPositiveHorizon { value: vartheta });
            }
            if !(vartheta + em.r_tilde - em.b_tilde > 0.0) {
                violations.push(Violation::RandomizedIntegrability {
                    vartheta,
                    r_tilde: em.r_tilde,
                    b_tilde: em.b_tilde,
                });
            }
        }
    }
    ValidationReport {
        violations,
        zero_premium: em.is_zero_premium(),
    }
}
