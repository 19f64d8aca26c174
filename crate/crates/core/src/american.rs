//! Finite-horizon American switching option on a log-price grid.
//!
//! Solves the obstacle problem
//!
//! ```text
//! max{ -∂_τ V + A_E V - r̃ V, (x - 1)^+ - V } = 0,   V(0, x) = (x - 1)^+
//! ```
//!
//! where `A_E` is the generator of `E` under the shifted measure. In
//! `y = log x` the generator is `σ²/2 V_yy + μ V_y + λ (V(y + φ) - V(y))`,
//! with `μ` the log drift. The jump target `y + φ` falls between grid nodes and
//! is linearly interpolated; anything below the left edge counts as zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::european::{euro_price, payoff};
use crate::levy::EffectiveModel;

/// Time-stepping scheme for the obstacle problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Crank–Nicolson in the local operator with two Rannacher start-up steps.
    /// The jump term starts lagged and is iterated to a fixed point inside each
    /// step; each iterate is a tridiagonal obstacle problem solved exactly by
    /// Brennan–Schwartz elimination.
    ImexCrankNicolson,
    /// Fully implicit Euler solved by projected SOR, jump term included in the
    /// Gauss–Seidel sweep.
    FullyImplicitPsor,
}

/// Spatial truncation (in `log x`) and resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_space: usize,
    pub n_time: usize,
    pub scheme: Scheme,
}

pub const DEFAULT_N_SPACE: usize = 800;
pub const DEFAULT_LOG_X_MIN: f64 = -8.0;
const MAX_LOG_X: f64 = 6.0;

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_space: usize, n_time: usize, scheme: Scheme) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            n_space,
            n_time,
            scheme,
        };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.x_min < 0.0 && 0.0 < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "log-price range [{}, {}] must strictly contain 0",
                self.x_min, self.x_max
            )));
        }
        if self.n_space < 3 {
            return Err(Error::InvalidGrid(format!("n_space = {} < 3", self.n_space)));
        }
        if self.n_time < 1 {
            return Err(Error::InvalidGrid("n_time must be at least 1".into()));
        }
        Ok(())
    }

    /// Default grid: `x_min = e^{-8}`, `x_max = max(6, 3·b_est)` where `b_est`
    /// is the perpetual exercise level, 800 space steps and `50·T` time steps.
    pub fn default_for(maturity: f64, em: &EffectiveModel) -> Self {
        let b = perpetual_boundary(em);
        let upper = if b.is_finite() { (3.0 * b).max(6.0).ln().min(MAX_LOG_X) } else { 6f64.ln() };
        Self {
            x_min: DEFAULT_LOG_X_MIN,
            x_max: upper,
            n_space: DEFAULT_N_SPACE,
            n_time: ((50.0 * maturity).ceil() as usize).max(1),
            scheme: Scheme::ImexCrankNicolson,
        }
    }

    /// Same domain with both step sizes halved.
    pub fn refined(&self) -> Self {
        Self {
            n_space: 2 * self.n_space,
            n_time: 2 * self.n_time,
            ..*self
        }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }
}

/// Exercise level `γ/(γ-1)` of the perpetual option, with `γ > 1` the positive
/// root of `Φ_Y^{(1)}(γ) = r̃`. Exact for spectrally negative dynamics; infinite
/// in the zero-premium regime.
pub fn perpetual_boundary(em: &EffectiveModel) -> f64 {
    if em.is_zero_premium() || em.r_tilde <= 0.0 {
        return f64::INFINITY;
    }
    match em.inverse_laplace_roots(em.r_tilde) {
        Ok((_, gamma)) if gamma > 1.0 => gamma / (gamma - 1.0),
        _ => f64::INFINITY,
    }
}

/// Exercise boundary `b_s(τ)` on the time levels of a solve. Levels with an
/// empty stopping set hold `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    /// Whether every interior node above the boundary is also in the stopping set.
    pub up_connected: Vec<bool>,
}

impl BoundaryCurve {
    pub fn at_maturity(&self) -> f64 {
        *self.levels.last().unwrap_or(&f64::INFINITY)
    }
}

/// Uniform grid in `y = log x` with `y = 0` on a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub y0: f64,
    pub h: f64,
    pub n: usize,
}

impl LogGrid {
    fn aligned(g: &GridSpec) -> Self {
        let span = g.x_max - g.x_min;
        let below = ((g.n_space as f64 * -g.x_min / span).round() as usize).clamp(1, g.n_space - 1);
        let h = -g.x_min / below as f64;
        Self {
            y0: -(below as f64) * h,
            h,
            n: g.n_space,
        }
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y0 + i as f64 * self.h
    }

    pub fn x(&self, i: usize) -> f64 {
        self.y(i).exp()
    }

    /// Cubic Lagrange interpolation in `log x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let s = (x.ln() - self.y0) / self.h;
        if s <= 0.0 {
            return values[0];
        }
        if s >= self.n as f64 {
            return values[self.n];
        }
        let base = (s.floor() as usize).clamp(1, self.n - 2) - 1;
        let t = s - base as f64;
        let mut acc = 0.0;
        for j in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != j {
                    w *= (t - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += w * values[base + j];
        }
        acc
    }
}

/// Solved value surface of the American (or grid European) option.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmericanSolution {
    pub maturity: f64,
    pub grid_spec: GridSpec,
    pub grid: LogGrid,
    pub model: EffectiveModel,
    /// Remaining maturity of each stored level.
    pub times: Vec<f64>,
    /// `value_surface[k][i]`: value at time level `k`, node `i`.
    pub value_surface: Vec<Vec<f64>>,
    pub boundary: BoundaryCurve,
    /// Levels produced by Rannacher half steps; the stored surface has no
    /// intermediate level to check their discrete equations against.
    pub startup_levels: usize,
    pub american: bool,
}

impl AmericanSolution {
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.grid.n).map(|i| self.grid.x(i)).collect()
    }

    /// Value at remaining maturity `T` (last level).
    pub fn value(&self, x: f64) -> f64 {
        self.value_at_level(self.times.len() - 1, x)
    }

    pub fn value_at_level(&self, level: usize, x: f64) -> f64 {
        self.grid.interpolate(&self.value_surface[level], x)
    }

    /// `C_A*(τ_k, x_i) - C_E*(τ_k, x_i)` on every stored node, with the
    /// European leg from the analytic series.
    pub fn premium_surface(&self) -> Vec<Vec<f64>> {
        self.times
            .iter()
            .zip(&self.value_surface)
            .map(|(&tau, row)| {
                row.iter()
                    .enumerate()
                    .map(|(i, v)| v - euro_price(tau, self.grid.x(i), &self.model).price)
                    .collect()
            })
            .collect()
    }

    /// One-sided slope `(V_b - V_{b-1}) / (x_b - x_{b-1})` at the boundary node of
    /// `level`; smooth pasting makes it tend to 1. `None` if the stopping set is empty.
    pub fn boundary_slope(&self, level: usize) -> Option<f64> {
        let b = self.boundary.levels[level];
        if !b.is_finite() {
            return None;
        }
        let j = ((b.ln() - self.grid.y0) / self.grid.h).round() as usize;
        let row = &self.value_surface[level];
        Some((row[j] - row[j - 1]) / (self.grid.x(j) - self.grid.x(j - 1)))
    }

    /// Worst violation of the discrete complementarity conditions over all
    /// checkable levels: the scheme residual must vanish where the value sits
    /// above the payoff and be non-negative where it touches it.
    pub fn complementarity_residual(&self) -> f64 {
        let ops = Operator::new(&self.model, &self.grid);
        let dt = self.maturity / (self.times.len() - 1) as f64;
        let theta = match self.grid_spec.scheme {
            Scheme::ImexCrankNicolson => 0.5,
            Scheme::FullyImplicitPsor => 1.0,
        };
        let n = self.grid.n;
        let mut worst: f64 = 0.0;
        for k in (self.startup_levels + 1)..self.times.len() {
            let old = &self.value_surface[k - 1];
            let new = &self.value_surface[k];
            for i in 1..n {
                let x = self.grid.x(i);
                let res = new[i] - old[i] - dt * (theta * ops.apply(new, i) + (1.0 - theta) * ops.apply(old, i));
                let scale = 1.0 + x;
                let gap = new[i] - payoff(x);
                if !self.american || gap > 1e-7 * scale {
                    worst = worst.max(res.abs() / scale);
                } else {
                    worst = worst.max((-res).max(0.0) / scale);
                }
            }
        }
        worst
    }
}

/// Discretized generator (without the time derivative).
struct Operator {
    lower: f64,
    diag: f64,
    upper: f64,
    lambda: f64,
    jump_shift: usize,
    jump_frac: f64,
}

impl Operator {
    fn new(em: &EffectiveModel, grid: &LogGrid) -> Self {
        let h = grid.h;
        let diff = 0.5 * em.sigma * em.sigma / (h * h);
        let mu = em.log_drift();
        let (lower, upper) = if diff - 0.5 * mu.abs() / h >= 0.0 {
            (diff - 0.5 * mu / h, diff + 0.5 * mu / h)
        } else {
            (diff + (-mu).max(0.0) / h, diff + mu.max(0.0) / h)
        };
        let s = -em.phi / h;
        let shift = s.floor();
        Self {
            lower,
            diag: -(lower + upper) - em.r_tilde - em.lambda,
            upper,
            lambda: em.lambda,
            jump_shift: shift as usize,
            jump_frac: s - shift,
        }
    }

    /// `V(y_i + φ)` by linear interpolation, zero below the grid.
    fn jump_value(&self, v: &[f64], i: usize) -> f64 {
        if self.lambda == 0.0 || i < self.jump_shift {
            return 0.0;
        }
        let hi = i - self.jump_shift;
        let lo_val = if hi >= 1 { v[hi - 1] } else { 0.0 };
        (1.0 - self.jump_frac) * v[hi] + self.jump_frac * lo_val
    }

    fn apply(&self, v: &[f64], i: usize) -> f64 {
        self.lower * v[i - 1] + self.diag * v[i] + self.upper * v[i + 1] + self.lambda * self.jump_value(v, i)
    }
}

fn top_value(em: &EffectiveModel, x: f64, tau: f64, american: bool) -> f64 {
    if american && !em.is_zero_premium() {
        x - 1.0
    } else {
        // in the zero-premium regime the American coincides with the European
        euro_price(tau, x, em).price
    }
}

const FIXED_POINT_TOL: f64 = 1e-14;
const FIXED_POINT_MAX_ITER: usize = 500;
const PSOR_OMEGA: f64 = 1.2;
const PSOR_TOL: f64 = 1e-13;
const PSOR_MAX_ITER: usize = 20_000;

/// Solves the American obstacle problem up to remaining maturity `maturity`.
pub fn solve_american(maturity: f64, em: &EffectiveModel, g: &GridSpec) -> Result<AmericanSolution> {
    march(maturity, em, g, true)
}

/// Same discretization without the obstacle: the grid European price. Used
/// as a control variate for the American solve.
pub fn solve_european_grid(maturity: f64, em: &EffectiveModel, g: &GridSpec) -> Result<AmericanSolution> {
    march(maturity, em, g, false)
}

fn march(maturity: f64, em: &EffectiveModel, g: &GridSpec, american: bool) -> Result<AmericanSolution> {
    em.check()?;
    g.check()?;
    if !(maturity >= 0.0) || !maturity.is_finite() {
        return Err(crate::error::invalid("maturity", format!("must be non-negative, got {maturity}")));
    }
    let grid = LogGrid::aligned(g);
    let ops = Operator::new(em, &grid);
    let n = grid.n;
    let xs: Vec<f64> = (0..=n).map(|i| grid.x(i)).collect();
    let obstacle: Vec<f64> = xs.iter().map(|&x| if american { payoff(x) } else { f64::NEG_INFINITY }).collect();

    let dt = maturity / g.n_time as f64;
    let mut v: Vec<f64> = xs.iter().map(|&x| payoff(x)).collect();
    v[0] = 0.0;
    let mut surface = Vec::with_capacity(g.n_time + 1);
    let mut times = Vec::with_capacity(g.n_time + 1);
    surface.push(v.clone());
    times.push(0.0);

    let startup = match g.scheme {
        Scheme::ImexCrankNicolson => 2.min(g.n_time),
        Scheme::FullyImplicitPsor => 0,
    };
    let mut tau = 0.0;
    for k in 0..g.n_time {
        let t_next = (k + 1) as f64 * dt;
        match g.scheme {
            Scheme::ImexCrankNicolson if k < startup => {
                for half in 1..=2 {
                    let t = tau + 0.5 * dt * half as f64;
                    let top = top_value(em, xs[n], t, american);
                    v = theta_step(&ops, &v, 0.5 * dt, 1.0, top, &obstacle)?;
                }
            }
            Scheme::ImexCrankNicolson => {
                let top = top_value(em, xs[n], t_next, american);
                v = theta_step(&ops, &v, dt, 0.5, top, &obstacle)?;
            }
            Scheme::FullyImplicitPsor => {
                let top = top_value(em, xs[n], t_next, american);
                v = psor_step(&ops, &v, dt, top, &obstacle)?;
            }
        }
        tau = t_next;
        surface.push(v.clone());
        times.push(tau);
    }

    let mut sol = AmericanSolution {
        maturity,
        grid_spec: *g,
        grid,
        model: *em,
        times,
        value_surface: surface,
        boundary: BoundaryCurve {
            times: Vec::new(),
            levels: Vec::new(),
            up_connected: Vec::new(),
        },
        startup_levels: startup,
        american,
    };
    sol.boundary = exercise_boundary(&sol);
    Ok(sol)
}

/// One θ-step; the jump term is iterated to its fixed point.
fn theta_step(ops: &Operator, old: &[f64], dt: f64, theta: f64, top: f64, obstacle: &[f64]) -> Result<Vec<f64>> {
    let n = old.len() - 1;
    let explicit: Vec<f64> = (1..n)
        .map(|i| old[i] + (1.0 - theta) * dt * ops.apply(old, i))
        .collect();
    let lo = -theta * dt * ops.lower;
    let di = 1.0 - theta * dt * (ops.diag);
    let up = -theta * dt * ops.upper;

    let mut current = old.to_vec();
    current[n] = top;
    let mut rhs = vec![0.0; n - 1];
    let mut cp = vec![0.0; n - 1];
    let mut dp = vec![0.0; n - 1];
    for _ in 0..FIXED_POINT_MAX_ITER {
        for i in 1..n {
            rhs[i - 1] = explicit[i - 1] + theta * dt * ops.lambda * ops.jump_value(&current, i);
        }
        rhs[n - 2] -= up * top;

        // forward elimination (lower-to-upper), then projected back substitution
        // starting inside the exercise region at the top.
        cp[0] = up / di;
        dp[0] = rhs[0] / di;
        for j in 1..n - 1 {
            let m = di - lo * cp[j - 1];
            cp[j] = up / m;
            dp[j] = (rhs[j] - lo * dp[j - 1]) / m;
        }
        let mut next = vec![0.0; n + 1];
        next[n] = top;
        next[n - 1] = dp[n - 2].max(obstacle[n - 1]);
        for j in (0..n - 2).rev() {
            next[j + 1] = (dp[j] - cp[j] * next[j + 2]).max(obstacle[j + 1]);
        }
        let change = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        current = next;
        if ops.lambda == 0.0 || change <= FIXED_POINT_TOL * (1.0 + top.abs()) {
            return Ok(current);
        }
    }
    Ok(current)
}

fn psor_step(ops: &Operator, old: &[f64], dt: f64, top: f64, obstacle: &[f64]) -> Result<Vec<f64>> {
    let n = old.len() - 1;
    let mut v = old.to_vec();
    v[0] = 0.0;
    v[n] = top;
    let di = 1.0 - dt * ops.diag;
    let mut residual = f64::INFINITY;
    for _ in 0..PSOR_MAX_ITER {
        residual = 0.0;
        for i in 1..n {
            let neighbours = ops.lower * v[i - 1] + ops.upper * v[i + 1] + ops.lambda * ops.jump_value(&v, i);
            let gs = (old[i] + dt * neighbours) / di;
            let relaxed = ((1.0 - PSOR_OMEGA) * v[i] + PSOR_OMEGA * gs).max(obstacle[i]);
            residual = f64::max(residual, (relaxed - v[i]).abs());
            v[i] = relaxed;
        }
        if residual <= PSOR_TOL * (1.0 + top.abs()) {
            return Ok(v);
        }
    }
    Err(Error::PsorDivergence {
        iterations: PSOR_MAX_ITER,
        residual,
    })
}

/// Smallest grid node above 1 where the value touches the payoff, per level.
pub fn exercise_boundary(sol: &AmericanSolution) -> BoundaryCurve {
    let n = sol.grid.n;
    let mut levels = Vec::with_capacity(sol.times.len());
    let mut up_connected = Vec::with_capacity(sol.times.len());
    for row in &sol.value_surface {
        let touches = |i: usize| {
            let x = sol.grid.x(i);
            (row[i] - payoff(x)).abs() <= 1e-7 * (1.0 + x)
        };
        // the top node carries the Dirichlet condition, not a solved value
        let first = (1..n).find(|&i| sol.grid.x(i) > 1.0 && touches(i));
        match first {
            Some(j) if sol.american => {
                levels.push(sol.grid.x(j));
                up_connected.push((j..n).all(touches));
            }
            _ => {
                levels.push(f64::INFINITY);
                up_connected.push(true);
            }
        }
    }
    BoundaryCurve {
        times: sol.times.clone(),
        levels,
        up_connected,
    }
}

/// Absolute premium `C_A*(T, x) - C_E*(T, x)`.
///
/// The American leg is corrected by the same-grid European price, so the
/// reported premium is `V_A^grid(x) - V_E^grid(x)`; both discretization errors
/// largely cancel. Zero exactly in the zero-premium regime and at `T = 0`.
pub fn premium_det(maturity: f64, x: f64, em: &EffectiveModel, g: &GridSpec) -> Result<f64> {
    if em.is_zero_premium() || maturity == 0.0 {
        return Ok(0.0);
    }
    let amer = solve_american(maturity, em, g)?;
    let euro = solve_european_grid(maturity, em, g)?;
    Ok(amer.value(x) - euro.value(x))
}

/// `H(x) = (A_E f - r̃ f)(x)` for `f(x) = (x - 1)^+`: the drift of the
/// discounted payoff, i.e. the instantaneous benefit of waiting.
pub fn instantaneous_benefit(x: f64, em: &EffectiveModel) -> f64 {
    let local = if x >= 1.0 {
        em.b_tilde * x - em.r_tilde * (x - 1.0) - em.lambda * em.phi.exp_m1() * x
    } else {
        0.0
    };
    local + em.lambda * (payoff(x * em.phi.exp()) - payoff(x))
}
