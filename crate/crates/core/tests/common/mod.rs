#![allow(dead_code)]

use tradeability_core::premium::{PAPER_HORIZONS, PAPER_SIGMA_X};
use tradeability_core::{AmericanSolution, AssetAggregates, JumpCase, ProjectModel};
use tradeability_core::premium::{PAPER_PHI_X1, PAPER_R, PAPER_SIGMA};

/// One table cell with its published value.
#[derive(Debug, Clone, Copy)]
pub struct SpotCell {
    pub b: f64,
    /// Block `(i.j.)`: `σ_X` index and horizon index, both 1-based.
    pub block: (usize, usize),
    pub e0: f64,
    /// Jump ratio `e^φ`; `None` for the no-jump column.
    pub ratio: Option<f64>,
    pub rho: f64,
    pub published: f64,
}

const fn cell(b: f64, block: (usize, usize), e0: f64, ratio: Option<f64>, rho: f64, published: f64) -> SpotCell {
    SpotCell {
        b,
        block,
        e0,
        ratio,
        rho,
        published,
    }
}

pub const DET_CELLS: [SpotCell; 16] = [
    cell(0.0, (1, 1), 0.9, None, -0.5, 0.986),
    cell(0.0, (1, 2), 1.0, Some(0.85), -0.5, 0.968),
    cell(0.0, (1, 3), 1.1, Some(0.7), -0.5, 0.966),
    cell(0.0, (1, 4), 1.2, None, 0.0, 0.969),
    cell(0.0, (2, 1), 1.0, Some(0.85), -0.5, 0.975),
    cell(0.0, (2, 2), 1.1, Some(0.7), -0.5, 0.957),
    cell(0.0, (2, 3), 0.9, None, -0.5, 0.883),
    cell(0.0, (2, 4), 1.2, None, -0.5, 0.683),
    cell(-0.04, (1, 1), 1.1, None, 0.5, 0.975),
    cell(-0.04, (1, 2), 0.9, Some(0.85), 0.0, 0.944),
    cell(-0.04, (1, 3), 1.0, Some(0.7), -0.5, 0.888),
    cell(-0.04, (1, 4), 1.2, None, -0.5, 0.515),
    cell(-0.04, (2, 1), 1.2, Some(0.85), -0.5, 0.854),
    cell(-0.04, (2, 2), 1.0, Some(0.7), 0.0, 0.968),
    cell(-0.04, (2, 3), 1.1, None, 0.0, 0.830),
    cell(-0.04, (2, 4), 1.2, Some(0.7), -0.5, 0.584),
];

pub const STOCH_CELLS: [SpotCell; 8] = [
    cell(0.0, (1, 1), 0.9, None, -0.5, 0.986),
    cell(0.0, (1, 3), 1.2, Some(0.85), -0.5, 0.933),
    cell(0.0, (2, 2), 1.0, Some(0.7), 0.0, 0.974),
    cell(0.0, (2, 4), 1.1, None, -0.5, 0.729),
    cell(-0.04, (1, 1), 1.2, Some(0.7), -0.5, 0.965),
    cell(-0.04, (1, 2), 0.9, Some(0.85), 0.5, 0.957),
    cell(-0.04, (2, 3), 1.0, None, 0.0, 0.844),
    cell(-0.04, (2, 4), 1.2, None, -0.5, 0.473),
];

impl SpotCell {
    pub fn sigma_x(&self) -> f64 {
        PAPER_SIGMA_X[self.block.0 - 1]
    }

    /// `T`, or the mean `1/ϑ` of the exponential horizon.
    pub fn horizon(&self) -> f64 {
        PAPER_HORIZONS[self.block.1 - 1]
    }

    pub fn jump(&self) -> JumpCase {
        match self.ratio {
            None => JumpCase::NONE,
            Some(r) => JumpCase::ratio(r, 0.5),
        }
    }

    pub fn models(&self) -> (ProjectModel, AssetAggregates) {
        let j = self.jump();
        (
            ProjectModel::new(self.b, PAPER_SIGMA, j.phi, j.lambda, self.e0).unwrap(),
            AssetAggregates::new(PAPER_PHI_X1, self.sigma_x(), self.rho, PAPER_R).unwrap(),
        )
    }

    pub fn label(&self) -> String {
        let jump = match self.ratio {
            None => "no jump".to_string(),
            Some(r) => format!("log({r})"),
        };
        format!(
            "b={} ({}.{}.) E0={} {} rho={}",
            self.b, self.block.0, self.block.1, self.e0, jump, self.rho
        )
    }
}

/// Divided-difference slopes of `(x_i, v_i)`.
pub fn slopes(xs: &[f64], vs: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(vs.windows(2))
        .map(|(x, v)| (v[1] - v[0]) / (x[1] - x[0]))
        .collect()
}

/// Worst violations of monotonicity, convexity and the unit Lipschitz bound of
/// `x ↦ v(x)` sampled at increasing `xs`.
#[derive(Debug, Default, Clone, Copy)]
pub struct ShapeReport {
    /// `max(-slope)`, positive when `v` decreases somewhere.
    pub decrease: f64,
    /// `max(-second difference)`.
    pub concavity: f64,
    /// `max(slope) - 1`.
    pub lipschitz_excess: f64,
}

impl ShapeReport {
    pub fn of(xs: &[f64], vs: &[f64]) -> Self {
        let s = slopes(xs, vs);
        let decrease = s.iter().map(|d| -d).fold(f64::NEG_INFINITY, f64::max);
        let lipschitz_excess = s.iter().map(|d| d - 1.0).fold(f64::NEG_INFINITY, f64::max);
        let concavity = s
            .windows(2)
            .zip(xs.windows(3))
            .map(|(d, x)| -(d[1] - d[0]) / (0.5 * (x[2] - x[0])))
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            decrease,
            concavity,
            lipschitz_excess,
        }
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            decrease: self.decrease.max(o.decrease),
            concavity: self.concavity.max(o.concavity),
            lipschitz_excess: self.lipschitz_excess.max(o.lipschitz_excess),
        }
    }
}

/// Shape report over every level of a solved surface, on nodes in `[lo, hi]`.
pub fn surface_shape(sol: &AmericanSolution, lo: f64, hi: f64) -> ShapeReport {
    let nodes = sol.nodes();
    let idx: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i] >= lo && nodes[i] <= hi).collect();
    let xs: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
    sol.value_surface
        .iter()
        .map(|row| {
            let vs: Vec<f64> = idx.iter().map(|&i| row[i]).collect();
            ShapeReport::of(&xs, &vs)
        })
        .fold(
            ShapeReport {
                decrease: f64::NEG_INFINITY,
                concavity: f64::NEG_INFINITY,
                lipschitz_excess: f64::NEG_INFINITY,
            },
            ShapeReport::merge,
        )
}

/// `max_k max_i (V_{k-1,i} - V_{k,i})`: positive when the value falls as the
/// remaining maturity grows.
pub fn time_decrease(sol: &AmericanSolution) -> f64 {
    sol.value_surface
        .windows(2)
        .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a - b))
        .fold(f64::NEG_INFINITY, f64::max)
}
