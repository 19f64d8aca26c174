//! Composite Gauss–Legendre quadrature with panel doubling.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule; nodes are found by Newton iteration on the
    /// three-term Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates a vector-valued `f` over `[a, b]` split into `panels` equal panels.
    pub fn composite<const N: usize, F>(&self, f: &mut F, a: f64, b: f64, panels: usize) -> [f64; N]
    where
        F: FnMut(f64) -> [f64; N],
    {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut acc = [0.0; N];
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (&z, &w) in self.nodes.iter().zip(&self.weights) {
                let v = f(mid + half * z);
                for k in 0..N {
                    acc[k] += w * half * v[k];
                }
            }
        }
        acc
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Stopping rule for [`integrate_doubling`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-14,
            rel: 1e-12,
            initial_panels: 4,
            max_panels: 1 << 14,
        }
    }
}

/// Doubles the panel count until every component changes by less than
/// `abs + rel * |value|` between successive refinements.
pub fn integrate_doubling<const N: usize, F>(
    rule: &GaussLegendre,
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut panels = tol.initial_panels.max(1);
    let mut prev = rule.composite(&mut f, a, b, panels);
    let mut change = f64::INFINITY;
    while panels < tol.max_panels {
        panels *= 2;
        let next = rule.composite(&mut f, a, b, panels);
        change = (0..N).map(|k| (next[k] - prev[k]).abs()).fold(0.0, f64::max);
        let converged = (0..N).all(|k| (next[k] - prev[k]).abs() <= tol.abs + tol.rel * next[k].abs());
        prev = next;
        if converged {
            return Ok(prev);
        }
    }
    Err(Error::Quadrature {
        lo: a,
        hi: b,
        panels,
        change,
    })
}
