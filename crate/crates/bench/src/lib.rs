//! Shared fixtures for the pricing benchmarks.

use tradeability_core::{esscher_shift, AssetAggregates, EffectiveModel, JumpCase, ProjectModel};

/// A jump scenario in the standard (positive premium) regime.
pub fn jump_model() -> EffectiveModel {
    model(-0.04, 0.4, -0.5, JumpCase::ratio(0.85, 0.5))
}

/// A continuous scenario.
pub fn diffusion_model() -> EffectiveModel {
    model(-0.04, 0.2, -0.5, JumpCase::NONE)
}

pub fn model(b: f64, sigma_x: f64, rho: f64, jump: JumpCase) -> EffectiveModel {
    let m = ProjectModel {
        b,
        sigma: 0.2,
        phi: jump.phi,
        lambda: jump.lambda,
        e0: 1.0,
    };
    let a = AssetAggregates {
        phi_x1: 0.005,
        sigma_x,
        rho,
        r: 0.0225,
    };
    esscher_shift(&m, &a)
}
