use std::fs::File;
use std::io::Write;

use clap::{Args, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use tradeability_core::{
    euro_price, euro_randomized, exercise_boundary, figure_series, generate_table, mc_american_ls, mc_martingale_check,
    mc_randomized_euro, mc_single_asset_euro, mc_two_asset_euro, solve_american, solve_randomized, valuate, FactorTable,
    FigureBase, HorizonSpec, McEstimate, ScenarioGrid, SimConfig, SweepParam, TableSettings,
};

use crate::config::{Format, RunConfig, Scenario, ScenarioArgs, Settings};
use crate::error::CliError;
use crate::output::{self, emit, Record, TABLE_DECIMALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Euro,
    Amer,
}

pub fn price(style: Style, args: &ScenarioArgs, cfg: &RunConfig, settings: &Settings) -> Result<(), CliError> {
    let s = Scenario::resolve(args, cfg)?;
    let em = s.effective();
    let e0 = s.model.e0;
    let mut rec = horizon_record(&s.horizon).with("e0", e0).with("s0", s.s0);
    match style {
        Style::Euro => {
            let scaled = match s.horizon {
                HorizonSpec::Deterministic { maturity } => euro_price(maturity, e0, &em).price,
                HorizonSpec::Exponential { vartheta } => euro_randomized(e0, vartheta, &em)?.price,
            };
            rec = rec.with("scaled_price", scaled).with("price", s.s0 * scaled);
        }
        Style::Amer => {
            let grid = grid_of(&s)?;
            let v = valuate(&s.horizon, e0, &em, grid.as_ref())?;
            rec = rec
                .with("scaled_price", v.amer)
                .with("price", s.s0 * v.amer)
                .with("european", v.euro)
                .with("boundary", v.boundary)
                .with("zero_premium", v.zero_premium);
            if let HorizonSpec::Exponential { .. } = s.horizon {
                rec = rec.with("b_r", v.boundary).with("gamma_plus", v.gamma_plus).with("c1_plus", v.c1_plus);
            }
        }
    }
    emit(settings, &[rec])
}

pub fn premium(args: &ScenarioArgs, cfg: &RunConfig, settings: &Settings) -> Result<(), CliError> {
    let s = Scenario::resolve(args, cfg)?;
    let em = s.effective();
    let grid = grid_of(&s)?;
    let v = valuate(&s.horizon, s.model.e0, &em, grid.as_ref())?;
    let rec = horizon_record(&s.horizon)
        .with("e0", v.e0)
        .with("european", v.euro)
        .with("american", v.amer)
        .with("premium", v.premium)
        .with("relative_premium", v.relative_premium)
        .with("factor", v.factor)
        .with("zero_premium", v.zero_premium);
    emit(settings, &[rec])
}

pub fn boundary(args: &ScenarioArgs, cfg: &RunConfig, settings: &Settings) -> Result<(), CliError> {
    let s = Scenario::resolve(args, cfg)?;
    let em = s.effective();
    let rows = match s.horizon {
        HorizonSpec::Deterministic { maturity } => {
            let sol = solve_american(maturity, &em, &s.grid_or_default(maturity)?)?;
            let curve = exercise_boundary(&sol);
            curve
                .times
                .iter()
                .zip(&curve.levels)
                .zip(&curve.up_connected)
                .map(|((&tau, &level), &up)| Record::new().with("tau", tau).with("boundary", level).with("up_connected", up))
                .collect()
        }
        HorizonSpec::Exponential { vartheta } => {
            let sol = solve_randomized(vartheta, &em)?;
            vec![Record::new()
                .with("vartheta", vartheta)
                .with("b_r", sol.b_r)
                .with("gamma_plus", sol.gamma_plus)
                .with("c1_plus", sol.c1_plus)
                .with("value_matching_residual", sol.value_matching_residual)
                .with("smooth_pasting_residual", sol.smooth_pasting_residual)]
        }
    };
    emit(settings, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableName {
    #[value(name = "det-b0")]
    DetB0,
    #[value(name = "det-bneg")]
    DetBneg,
    #[value(name = "exp-b0")]
    ExpB0,
    #[value(name = "exp-bneg")]
    ExpBneg,
}

impl TableName {
    /// Parameter grid from the bundled, versioned parameter set.
    pub fn grid(self) -> Result<ScenarioGrid, CliError> {
        let text = match self {
            Self::DetB0 => include_str!("../data/params/v1/det-b0.json"),
            Self::DetBneg => include_str!("../data/params/v1/det-bneg.json"),
            Self::ExpB0 => include_str!("../data/params/v1/exp-b0.json"),
            Self::ExpBneg => include_str!("../data/params/v1/exp-bneg.json"),
        };
        let set: ParamSet = serde_json::from_str(text).map_err(|e| CliError::Config(format!("bundled parameters: {e}")))?;
        if set.version != 1 {
            return Err(CliError::Config(format!("unsupported parameter set version {}", set.version)));
        }
        Ok(set.grid)
    }

    /// Published values shipped with the binary.
    fn reference(self) -> &'static str {
        match self {
            Self::DetB0 => include_str!("../data/reference/det-b0.csv"),
            Self::DetBneg => include_str!("../data/reference/det-bneg.csv"),
            Self::ExpB0 => include_str!("../data/reference/exp-b0.csv"),
            Self::ExpBneg => include_str!("../data/reference/exp-bneg.csv"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamSet {
    version: u32,
    #[allow(dead_code)]
    name: String,
    #[allow(dead_code)]
    description: String,
    grid: ScenarioGrid,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(value_enum)]
    pub name: TableName,
    /// Reference CSV to diff against; `published` uses the bundled values.
    #[arg(long, value_name = "PATH|published")]
    pub compare: Option<String>,
    /// Halve both grid steps this many times.
    #[arg(long, default_value_t = 0)]
    pub refinements: u32,
}

pub fn table(args: &TableArgs, settings: &Settings) -> Result<(), CliError> {
    let reference = match args.compare.as_deref() {
        None => None,
        Some("published") => Some(FactorTable::read_csv(args.name.reference().as_bytes())?),
        Some(path) => {
            let f = File::open(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
            Some(FactorTable::read_csv(f)?)
        }
    };
    let t = generate_table(
        &args.name.grid()?,
        &TableSettings {
            refinements: args.refinements,
        },
    )?;
    for e in &t.errors {
        log::warn!("cell ({}, {}) failed: {}", e.row, e.column, e.message);
    }
    let mut out = output::writer(settings)?;
    match reference {
        None => match settings.format {
            Format::Csv => t.write_csv(&mut out, TABLE_DECIMALS)?,
            Format::Json => {
                let mut doc = serde_json::to_value(&t).map_err(std::io::Error::from)?;
                if let Some(rows) = doc.get_mut("values").and_then(|v| v.as_array_mut()) {
                    for v in rows.iter_mut().flat_map(|r| r.as_array_mut().into_iter().flatten()) {
                        if let Some(x) = v.as_f64() {
                            *v = json!(output::round(x, TABLE_DECIMALS));
                        }
                    }
                }
                output::write_json(&mut out, &doc)?;
            }
        },
        Some(reference) => {
            let cmp = t.compare(&reference);
            match settings.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["block", "e0", "column", "ours", "reference", "delta"])?;
                    for c in &cmp.cells {
                        w.write_record([
                            c.block.clone(),
                            c.e0.to_string(),
                            c.column.clone(),
                            format!("{:.3}", c.ours),
                            format!("{:.3}", c.reference),
                            format!("{:.3}", c.delta),
                        ])?;
                    }
                    w.flush()?;
                }
                Format::Json => {
                    let doc = serde_json::to_value(&cmp).map_err(std::io::Error::from)?;
                    output::write_json(&mut out, &doc)?;
                }
            }
            eprintln!(
                "max |delta| = {:.4} over {} cells ({} unmatched)",
                cmp.max_abs,
                cmp.cells.len(),
                cmp.unmatched
            );
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Horizon,
    #[value(name = "jump-size")]
    JumpSize,
    Correlation,
}

impl SweepArg {
    fn param(self) -> SweepParam {
        match self {
            Self::Horizon => SweepParam::Horizon,
            Self::JumpSize => SweepParam::JumpSize,
            Self::Correlation => SweepParam::Correlation,
        }
    }

    fn default_range(self) -> (f64, f64) {
        match self {
            Self::Horizon => (0.1, 5.0),
            Self::JumpSize => (0.5f64.ln(), 0.0),
            Self::Correlation => (-0.9, 0.9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    /// `λ = 0.5`, `T = 0.5`.
    One,
    /// `λ = 1`, `T = 1.5`.
    Two,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub param: SweepArg,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "one")]
    pub base: BaseArg,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

pub fn figure(args: &FigureArgs, cfg: &RunConfig, settings: &Settings) -> Result<(), CliError> {
    if args.points == 0 {
        return Err(CliError::Usage("sweep range is empty: --points must be positive".into()));
    }
    let (lo, hi) = args.param.default_range();
    let (from, to) = (args.from.unwrap_or(lo), args.to.unwrap_or(hi));
    if !from.is_finite() || !to.is_finite() {
        return Err(CliError::Usage("sweep bounds must be finite".into()));
    }
    let range: Vec<f64> = if args.points == 1 {
        vec![from]
    } else {
        let step = (to - from) / (args.points - 1) as f64;
        (0..args.points).map(|i| from + step * i as f64).collect()
    };
    let base = figure_base(args, cfg);
    let series = figure_series(args.param.param(), &range, &base)?;
    let mut out = output::writer(settings)?;
    match settings.format {
        Format::Csv => series.write_csv(&mut out, output::DECIMALS)?,
        Format::Json => {
            let doc = serde_json::to_value(&series).map_err(std::io::Error::from)?;
            output::write_json(&mut out, &doc)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn figure_base(args: &FigureArgs, cfg: &RunConfig) -> FigureBase {
    let b0 = match args.base {
        BaseArg::One => FigureBase::figure_one(),
        BaseArg::Two => FigureBase::figure_two(),
    };
    let s = &args.scenario;
    let horizon = s
        .maturity
        .or(s.vartheta.map(|v| 1.0 / v))
        .or(cfg.horizon.map(|h| h.expected_length()))
        .unwrap_or(b0.horizon);
    FigureBase {
        r: s.r.or(cfg.asset.r).unwrap_or(b0.r),
        phi_x1: s.phi_x1.or(cfg.asset.phi_x1).unwrap_or(b0.phi_x1),
        sigma_x: s.sigma_x.or(cfg.asset.sigma_x).unwrap_or(b0.sigma_x),
        rho: s.rho.or(cfg.asset.rho).unwrap_or(b0.rho),
        b: s.b.or(cfg.model.b).unwrap_or(b0.b),
        sigma: s.sigma.or(cfg.model.sigma).unwrap_or(b0.sigma),
        phi: s.phi.or(cfg.model.phi).unwrap_or(b0.phi),
        lambda: s.lambda.or(cfg.model.lambda).unwrap_or(b0.lambda),
        e0: s.e0.or(cfg.model.e0).unwrap_or(b0.e0),
        horizon,
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long = "steps-per-year", default_value_t = 50)]
    pub steps_per_year: usize,
    #[arg(long)]
    pub antithetic: bool,
    /// Polynomial degree of the Longstaff–Schwartz regression basis.
    #[arg(long = "basis-degree", default_value_t = 3)]
    pub basis_degree: usize,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

struct Check {
    name: &'static str,
    est: McEstimate,
    target: f64,
    tolerance: f64,
}

impl Check {
    /// Passes within three standard errors.
    fn z(name: &'static str, est: McEstimate, target: f64) -> Self {
        Self {
            name,
            est,
            target,
            tolerance: 3.0 * est.std_error,
        }
    }

    /// Passes within three standard errors or 1 % of the target.
    fn loose(name: &'static str, est: McEstimate, target: f64) -> Self {
        Self {
            name,
            est,
            target,
            tolerance: (3.0 * est.std_error).max(0.01 * target.abs()),
        }
    }

    fn pass(&self) -> bool {
        (self.est.estimate - self.target).abs() <= self.tolerance
    }

    fn record(&self) -> Record {
        Record::new()
            .with("check", self.name)
            .with("estimate", self.est.estimate)
            .with("std_error", self.est.std_error)
            .with("target", self.target)
            .with("z_score", self.est.z_score(self.target))
            .with("tolerance", self.tolerance)
            .with("pass", self.pass())
    }
}

pub fn verify(args: &VerifyArgs, cfg: &RunConfig, settings: &Settings) -> Result<(), CliError> {
    let s = Scenario::resolve(&args.scenario, cfg)?;
    let em = s.effective();
    let sim = SimConfig::new(args.paths, args.steps_per_year, settings.seed, args.antithetic)?;
    let (t, vartheta) = match s.horizon {
        HorizonSpec::Deterministic { maturity } => (maturity, 1.0 / maturity),
        HorizonSpec::Exponential { vartheta } => (1.0 / vartheta, vartheta),
    };
    let e0 = s.model.e0;
    let scaled = euro_price(t, e0, &em).price;
    let mut checks = vec![
        Check::z(
            "two_asset_euro",
            mc_two_asset_euro(t, s.s0, e0, &s.model, &s.asset, &sim)?,
            s.s0 * scaled,
        ),
        Check::z("single_asset_euro", mc_single_asset_euro(t, e0, &em, &sim)?, scaled),
        Check::z("martingale", mc_martingale_check(t, &em, &sim)?, 1.0),
        Check::z(
            "randomized_euro",
            mc_randomized_euro(vartheta, e0, &em, &sim)?,
            euro_randomized(e0, vartheta, &em)?.price,
        ),
    ];
    let grid = s.grid_for(t)?;
    let det = HorizonSpec::Deterministic { maturity: t };
    let pide = valuate(&det, e0, &em, grid.as_ref())?;
    let ls = mc_american_ls(t, e0, &em, &sim, args.basis_degree)?;
    checks.push(Check::loose("american_ls", ls, pide.amer));
    if em.is_zero_premium() {
        checks.push(Check::loose("american_equals_european", ls, scaled));
    }
    let rows: Vec<Record> = checks.iter().map(Check::record).collect();
    emit(settings, &rows)?;
    let failed = checks.iter().filter(|c| !c.pass()).count();
    for c in checks.iter().filter(|c| !c.pass()) {
        log::error!(
            "{} failed: {:.6} vs {:.6} (tolerance {:.2e})",
            c.name,
            c.est.estimate,
            c.target,
            c.tolerance
        );
    }
    if failed > 0 {
        return Err(CliError::Verify {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}

fn grid_of(s: &Scenario) -> Result<Option<tradeability_core::GridSpec>, CliError> {
    match s.horizon {
        HorizonSpec::Deterministic { maturity } => s.grid_for(maturity),
        HorizonSpec::Exponential { .. } => Ok(None),
    }
}

fn horizon_record(h: &HorizonSpec) -> Record {
    match *h {
        HorizonSpec::Deterministic { maturity } => Record::new().with("horizon", "det").with("T", maturity),
        HorizonSpec::Exponential { vartheta } => Record::new().with("horizon", "exp").with("vartheta", vartheta),
    }
}
