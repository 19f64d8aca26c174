//! Run configuration: JSON file, then command-line flags, then defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tradeability_core::{
    esscher_shift, validate, AssetAggregates, EffectiveModel, FigureBase, GridSpec, HorizonSpec, ProjectModel, Scheme,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum HorizonKindArg {
    /// Fixed horizon `T`.
    Det,
    /// Exponential horizon with rate `ϑ`.
    Exp,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOverrides {
    pub b: Option<f64>,
    pub sigma: Option<f64>,
    pub phi: Option<f64>,
    pub lambda: Option<f64>,
    pub e0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssetOverrides {
    pub phi_x1: Option<f64>,
    pub sigma_x: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverrides {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n_space: Option<usize>,
    pub n_time: Option<usize>,
    pub scheme: Option<Scheme>,
}

impl GridOverrides {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Contents of a `--config` file. Every field is optional; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelOverrides,
    pub asset: AssetOverrides,
    pub horizon: Option<HorizonSpec>,
    pub grid: GridOverrides,
    /// Initial asset value for the unscaled prices.
    pub s0: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flags shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel commands.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Scenario flags; unset values fall back to the config file, then to the
/// default scenario (`b = -0.04`, `ρ = -0.5`, `φ = log 0.85`, `λ = 0.5`).
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Horizon kind; inferred from `--vartheta` when omitted.
    #[arg(long, value_enum)]
    pub horizon: Option<HorizonKindArg>,
    /// Deterministic horizon in years (exponential mean when `--horizon exp`).
    #[arg(long = "T", value_name = "YEARS", allow_hyphen_values = true)]
    pub maturity: Option<f64>,
    /// Rate of the exponential horizon.
    #[arg(long, allow_hyphen_values = true)]
    pub vartheta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long = "sigma-x", allow_hyphen_values = true)]
    pub sigma_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long = "phi-x1", allow_hyphen_values = true)]
    pub phi_x1: Option<f64>,
    /// Initial asset value for unscaled prices.
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    #[arg(long = "n-space")]
    pub n_space: Option<usize>,
    #[arg(long = "n-time")]
    pub n_time: Option<usize>,
}

/// Output and parallelism settings after merging.
#[derive(Debug, Clone)]
pub struct Settings {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub jobs: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 20_180_601;

pub fn load(common: &CommonArgs) -> Result<(RunConfig, Settings), CliError> {
    let cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let settings = Settings {
        format: common.format.or(cfg.format).unwrap_or_default(),
        out: common.out.clone().or_else(|| cfg.out.clone()),
        seed: common.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        jobs: common.jobs.or(cfg.jobs),
    };
    Ok((cfg, settings))
}

/// A fully specified, validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: ProjectModel,
    pub asset: AssetAggregates,
    pub horizon: HorizonSpec,
    pub s0: f64,
    grid: GridOverrides,
}

impl Scenario {
    pub fn resolve(args: &ScenarioArgs, cfg: &RunConfig) -> Result<Self, CliError> {
        let base = FigureBase::default();
        let model = ProjectModel {
            b: args.b.or(cfg.model.b).unwrap_or(base.b),
            sigma: args.sigma.or(cfg.model.sigma).unwrap_or(base.sigma),
            phi: args.phi.or(cfg.model.phi).unwrap_or(base.phi),
            lambda: args.lambda.or(cfg.model.lambda).unwrap_or(base.lambda),
            e0: args.e0.or(cfg.model.e0).unwrap_or(base.e0),
        };
        let asset = AssetAggregates {
            phi_x1: args.phi_x1.or(cfg.asset.phi_x1).unwrap_or(base.phi_x1),
            sigma_x: args.sigma_x.or(cfg.asset.sigma_x).unwrap_or(base.sigma_x),
            rho: args.rho.or(cfg.asset.rho).unwrap_or(base.rho),
            r: args.r.or(cfg.asset.r).unwrap_or(base.r),
        };
        let horizon = resolve_horizon(args, cfg, base.horizon)?;
        let mut grid = cfg.grid.clone();
        grid.n_space = args.n_space.or(grid.n_space);
        grid.n_time = args.n_time.or(grid.n_time);
        let s = Self {
            model,
            asset,
            horizon,
            s0: args.s0.or(cfg.s0).unwrap_or(1.0),
            grid,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<(), CliError> {
        self.model.check()?;
        self.asset.check()?;
        self.horizon.check()?;
        validate(&self.model, &self.asset, &self.horizon).into_result()?;
        if !(self.s0 > 0.0) || !self.s0.is_finite() {
            return Err(CliError::Usage(format!("s0 must be positive, got {}", self.s0)));
        }
        Ok(())
    }

    pub fn effective(&self) -> EffectiveModel {
        esscher_shift(&self.model, &self.asset)
    }

    /// Grid for a deterministic solve; `None` keeps the library default.
    pub fn grid_for(&self, maturity: f64) -> Result<Option<GridSpec>, CliError> {
        if self.grid.is_empty() {
            return Ok(None);
        }
        let d = GridSpec::default_for(maturity, &self.effective());
        let g = GridSpec {
            x_min: self.grid.x_min.unwrap_or(d.x_min),
            x_max: self.grid.x_max.unwrap_or(d.x_max),
            n_space: self.grid.n_space.unwrap_or(d.n_space),
            n_time: self.grid.n_time.unwrap_or(d.n_time),
            scheme: self.grid.scheme.unwrap_or(d.scheme),
        };
        g.check()?;
        Ok(Some(g))
    }

    pub fn grid_or_default(&self, maturity: f64) -> Result<GridSpec, CliError> {
        Ok(self
            .grid_for(maturity)?
            .unwrap_or_else(|| GridSpec::default_for(maturity, &self.effective())))
    }
}

fn resolve_horizon(args: &ScenarioArgs, cfg: &RunConfig, default_t: f64) -> Result<HorizonSpec, CliError> {
    let kind = args.horizon.or(match (args.vartheta, cfg.horizon) {
        (Some(_), _) => Some(HorizonKindArg::Exp),
        (None, Some(HorizonSpec::Exponential { .. })) if args.maturity.is_none() => Some(HorizonKindArg::Exp),
        _ => None,
    });
    let cfg_t = cfg.horizon.map(|h| h.expected_length());
    let h = match kind.unwrap_or(HorizonKindArg::Det) {
        HorizonKindArg::Det => {
            if args.vartheta.is_some() {
                return Err(CliError::Usage("--vartheta needs an exponential horizon".into()));
            }
            HorizonSpec::Deterministic {
                maturity: args.maturity.or(cfg_t).unwrap_or(default_t),
            }
        }
        HorizonKindArg::Exp => {
            let vartheta = match (args.vartheta, args.maturity) {
                (Some(v), None) => v,
                (None, Some(t)) => 1.0 / t,
                (Some(_), Some(_)) => return Err(CliError::Usage("give either --T or --vartheta, not both".into())),
                (None, None) => match cfg.horizon {
                    Some(HorizonSpec::Exponential { vartheta }) => vartheta,
                    _ => 1.0 / cfg_t.unwrap_or(default_t),
                },
            };
            HorizonSpec::Exponential { vartheta }
        }
    };
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_horizon_from_mean_length() {
        let args = ScenarioArgs {
            horizon: Some(HorizonKindArg::Exp),
            maturity: Some(2.0),
            ..Default::default()
        };
        let s = Scenario::resolve(&args, &RunConfig::default()).unwrap();
        assert_eq!(s.horizon, HorizonSpec::Exponential { vartheta: 0.5 });
    }

    #[test]
    fn both_horizon_forms_are_rejected() {
        let args = ScenarioArgs {
            horizon: Some(HorizonKindArg::Exp),
            maturity: Some(2.0),
            vartheta: Some(0.5),
            ..Default::default()
        };
        let e = Scenario::resolve(&args, &RunConfig::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"n_space": 400}}"#).is_ok());
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"nodes": 400}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"threads": 2}"#).is_err());
    }

    #[test]
    fn grid_overrides_keep_defaults_elsewhere() {
        let args = ScenarioArgs {
            n_space: Some(400),
            ..Default::default()
        };
        let s = Scenario::resolve(&args, &RunConfig::default()).unwrap();
        let g = s.grid_for(1.0).unwrap().unwrap();
        let d = GridSpec::default_for(1.0, &s.effective());
        assert_eq!(g.n_space, 400);
        assert_eq!((g.n_time, g.x_max), (d.n_time, d.x_max));
    }
}
