//! Monte-Carlo cross-checks of the analytic and grid prices.
//!
//! Every path draws from its own ChaCha8 stream (`seed`, stream = path index),
//! so estimates do not depend on the number of worker threads. Batches are
//! reduced in index order.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::european::payoff;
use crate::levy::{AssetAggregates, EffectiveModel, ProjectModel};
use crate::randomized::check_integrability;

const BATCH: usize = 2048;
/// Stream offset separating Longstaff–Schwartz training paths from evaluation paths.
const TRAINING_STREAMS: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps_per_year: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, n_steps_per_year: usize, seed: u64, antithetic: bool) -> Result<Self> {
        let c = Self {
            n_paths,
            n_steps_per_year,
            seed,
            antithetic,
        };
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(invalid("n_paths", "need at least one path"));
        }
        if self.n_steps_per_year == 0 {
            return Err(invalid("n_steps_per_year", "need at least one step per year"));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps_per_year: 50,
            seed: 20_180_601,
            antithetic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Independent samples behind the standard error (antithetic pairs count once).
    pub n_samples: usize,
}

impl McEstimate {
    fn exact(v: f64) -> Self {
        Self {
            estimate: v,
            std_error: 0.0,
            n_samples: 0,
        }
    }

    /// `|estimate - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Mean and standard error of `sample(rng, sign)` over independent draws.
/// With antithetics each draw averages the `+1` and `-1` Gaussian signs on the
/// same stream state.
fn estimate<F>(cfg: &SimConfig, sample: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng, f64) -> f64 + Sync,
{
    let n = if cfg.antithetic { cfg.n_paths.div_ceil(2) } else { cfg.n_paths };
    let draw = |i: usize| {
        let mut rng = cfg.rng(i as u64);
        if cfg.antithetic {
            let mut twin = rng.clone();
            0.5 * (sample(&mut rng, 1.0) + sample(&mut twin, -1.0))
        } else {
            sample(&mut rng, 1.0)
        }
    };
    let batches: Vec<(f64, f64)> = (0..n.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| {
            (b * BATCH..((b + 1) * BATCH).min(n)).fold((0.0, 0.0), |(s, s2), i| {
                let v = draw(i);
                (s + v, s2 + v * v)
            })
        })
        .collect();
    let (sum, sum2) = batches.iter().fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    McEstimate {
        estimate: mean,
        std_error: (var / nf).sqrt(),
        n_samples: n,
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|p| p.sample(rng)).unwrap_or(0.0)
}

fn check_horizon(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("maturity", format!("must be non-negative, got {t}")));
    }
    Ok(())
}

/// `E^Q[e^{-rT} S_T (E_T - 1)^+]` from the two-asset dynamics under `Q`. `S` is
/// a geometric Brownian motion with growth `Φ_X(1)`; `E` carries the jumps.
pub fn mc_two_asset_euro(
    maturity: f64,
    s0: f64,
    e0: f64,
    m: &ProjectModel,
    a: &AssetAggregates,
    cfg: &SimConfig,
) -> Result<McEstimate> {
    cfg.check()?;
    a.check()?;
    check_horizon(maturity)?;
    let m = ProjectModel { e0: e0.max(f64::MIN_POSITIVE), ..*m };
    m.check()?;
    if e0 == 0.0 || s0 == 0.0 {
        return Ok(McEstimate::exact(0.0));
    }
    let t = maturity;
    let sqrt_t = t.sqrt();
    let x_drift = (a.phi_x1 - 0.5 * a.sigma_x * a.sigma_x) * t;
    let y_drift = (m.b - m.lambda * m.phi.exp_m1() - 0.5 * m.sigma * m.sigma) * t;
    let rho_c = (1.0 - a.rho * a.rho).max(0.0).sqrt();
    let disc = (-a.r * t).exp();
    Ok(estimate(cfg, |rng, sign| {
        let z1 = sign * normal(rng);
        let z2 = sign * normal(rng);
        let jumps = poisson(rng, m.lambda * t);
        let s_t = s0 * (x_drift + a.sigma_x * sqrt_t * z1).exp();
        let wy = a.rho * z1 + rho_c * z2;
        let e_t = e0 * (y_drift + m.sigma * sqrt_t * wy + m.phi * jumps).exp();
        disc * s_t * payoff(e_t)
    }))
}

/// One exact draw of `log(E_t / E_0)` under the shifted measure.
fn log_increment(rng: &mut ChaCha8Rng, sign: f64, t: f64, em: &EffectiveModel) -> f64 {
    let z = sign * normal(rng);
    let jumps = poisson(rng, em.lambda * t);
    em.log_drift() * t + em.sigma * t.sqrt() * z + em.phi * jumps
}

/// `E^{Q^{(1)}}[e^{-r̃T}(E_T - 1)^+]` by exact terminal sampling.
pub fn mc_single_asset_euro(maturity: f64, e0: f64, em: &EffectiveModel, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.check()?;
    em.check()?;
    check_horizon(maturity)?;
    if maturity == 0.0 {
        return Ok(McEstimate::exact(payoff(e0)));
    }
    let disc = (-em.r_tilde * maturity).exp();
    Ok(estimate(cfg, |rng, sign| disc * payoff(e0 * log_increment(rng, sign, maturity, em).exp())))
}

/// `E[e^{-Φ_Y^{(1)}(1) T} E_T / E_0]`, which equals 1 under the shifted measure.
pub fn mc_martingale_check(maturity: f64, em: &EffectiveModel, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.check()?;
    em.check()?;
    check_horizon(maturity)?;
    let scale = (-em.b_tilde * maturity).exp();
    Ok(estimate(cfg, |rng, sign| scale * log_increment(rng, sign, maturity, em).exp()))
}

/// `E[e^{-r̃ T_R}(E_{T_R} - 1)^+]` with `T_R ~ Exp(ϑ)` drawn per path.
///
/// When `ϑ + r̃ - Φ_Y^{(1)}(1) ≤ 0` the estimator has no finite mean; the
/// estimate is still returned and a warning logged.
pub fn mc_randomized_euro(vartheta: f64, e0: f64, em: &EffectiveModel, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.check()?;
    em.check()?;
    if !(vartheta > 0.0) {
        return Err(invalid("vartheta", format!("must be positive, got {vartheta}")));
    }
    if let Err(e) = check_integrability(vartheta, em) {
        log::warn!("randomized Monte-Carlo estimate is unreliable: {e}");
    }
    let horizon = Exp::new(vartheta).map_err(|e| invalid("vartheta", e.to_string()))?;
    Ok(estimate(cfg, |rng, sign| {
        let t: f64 = horizon.sample(rng);
        (-em.r_tilde * t).exp() * payoff(e0 * log_increment(rng, sign, t, em).exp())
    }))
}

/// Simulates `n` paths of `E` on `steps` equal steps from `stream_base`.
fn simulate_paths(
    e0: f64,
    em: &EffectiveModel,
    cfg: &SimConfig,
    dt: f64,
    steps: usize,
    n: usize,
    stream_base: u64,
) -> Vec<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(stream_base + i as u64);
            let mut path = Vec::with_capacity(steps + 1);
            let mut e = e0;
            path.push(e);
            for _ in 0..steps {
                e *= log_increment(&mut rng, 1.0, dt, em).exp();
                path.push(e);
            }
            path
        })
        .collect()
}

fn basis(x: f64, degree: usize) -> impl Iterator<Item = f64> {
    (0..=degree).scan(1.0, move |p, _| {
        let v = *p;
        *p *= x;
        Some(v)
    })
}

/// Least-squares continuation coefficients; lowers the degree on rank deficiency.
fn regress(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    let mut d = degree;
    loop {
        if xs.len() < 2 * (d + 1) {
            return None;
        }
        let a = DMatrix::from_fn(xs.len(), d + 1, |r, c| basis(xs[r], d).nth(c).unwrap_or(0.0));
        let svd = a.svd(true, true);
        let tol = 1e-10 * svd.singular_values.max();
        if svd.rank(tol) == d + 1 {
            let beta = svd.solve(&DVector::from_column_slice(ys), tol).ok()?;
            return Some(beta.iter().copied().collect());
        }
        if d == 0 {
            return None;
        }
        log::warn!("regression basis of degree {d} is rank deficient; retrying with degree {}", d - 1);
        d -= 1;
    }
}

fn continuation(beta: &Option<Vec<f64>>, x: f64) -> f64 {
    match beta {
        Some(b) => basis(x, b.len() - 1).zip(b).map(|(p, c)| p * c).sum(),
        None => f64::INFINITY,
    }
}

/// Longstaff–Schwartz lower bound for `C_A*(T, e0)` with exercise on the
/// `n_steps_per_year · T` time grid. Regression coefficients come from
/// `n_paths` training paths; the estimate and its standard error from an
/// independent set of `n_paths` evaluation paths.
pub fn mc_american_ls(
    maturity: f64,
    e0: f64,
    em: &EffectiveModel,
    cfg: &SimConfig,
    basis_degree: usize,
) -> Result<McEstimate> {
    cfg.check()?;
    em.check()?;
    check_horizon(maturity)?;
    if basis_degree < 2 {
        return Err(invalid("basis_degree", format!("must be at least 2, got {basis_degree}")));
    }
    if maturity == 0.0 {
        return Ok(McEstimate::exact(payoff(e0)));
    }
    let steps = ((cfg.n_steps_per_year as f64 * maturity).ceil() as usize).max(1);
    let dt = maturity / steps as f64;
    let step_disc = (-em.r_tilde * dt).exp();

    let train = simulate_paths(e0, em, cfg, dt, steps, cfg.n_paths, TRAINING_STREAMS);
    let mut cash: Vec<f64> = train.iter().map(|p| payoff(p[steps])).collect();
    let mut coefficients = vec![None; steps];
    for k in (1..steps).rev() {
        for c in cash.iter_mut() {
            *c *= step_disc;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = train
            .iter()
            .zip(&cash)
            .filter(|(p, _)| p[k] > 1.0)
            .map(|(p, &c)| (p[k] / e0, c))
            .unzip();
        let beta = regress(&xs, &ys, basis_degree);
        for (p, c) in train.iter().zip(cash.iter_mut()) {
            let x = p[k];
            if x > 1.0 && payoff(x) >= continuation(&beta, x / e0) {
                *c = payoff(x);
            }
        }
        coefficients[k] = beta;
    }
    drop(train);

    let eval_cfg = SimConfig {
        antithetic: false,
        ..*cfg
    };
    let est = estimate(&eval_cfg, |rng, _| {
        let mut e = e0;
        for (k, beta) in coefficients.iter().enumerate().skip(1) {
            e *= log_increment(rng, 1.0, dt, em).exp();
            if e > 1.0 && payoff(e) >= continuation(beta, e / e0) {
                return (-em.r_tilde * dt * k as f64).exp() * payoff(e);
            }
        }
        e *= log_increment(rng, 1.0, dt, em).exp();
        (-em.r_tilde * maturity).exp() * payoff(e)
    });
    if payoff(e0) > est.estimate {
        return Ok(McEstimate::exact(payoff(e0)));
    }
    Ok(est)
}
