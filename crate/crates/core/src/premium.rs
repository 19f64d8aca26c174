//! Premiums, illiquidity factors, factor tables and figure sweeps.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::american::{solve_american, solve_european_grid, GridSpec};
use crate::error::{invalid, Error, Result};
use crate::european::euro_price;
use crate::levy::{esscher_shift, validate, AssetAggregates, EffectiveModel, HorizonSpec, ProjectModel};
use crate::randomized::{amer_randomized, euro_randomized, solve_randomized, RandomizedSolution};

/// Horizon lengths of the paper grids, in years.
pub const PAPER_HORIZONS: [f64; 4] = [0.5, 1.5, 2.5, 5.0];
pub const PAPER_E0: [f64; 4] = [0.9, 1.0, 1.1, 1.2];
pub const PAPER_RHO: [f64; 3] = [0.5, 0.0, -0.5];
pub const PAPER_SIGMA_X: [f64; 2] = [0.2, 0.4];
pub const PAPER_R: f64 = 0.0225;
pub const PAPER_PHI_X1: f64 = 0.005;
pub const PAPER_SIGMA: f64 = 0.2;
pub const PAPER_LAMBDA: f64 = 0.5;

/// Full valuation of one scenario at `x = E₀`, in scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValuationResult {
    pub horizon: HorizonSpec,
    pub e0: f64,
    pub euro: f64,
    pub amer: f64,
    pub premium: f64,
    /// Premium relative to the European value.
    pub relative_premium: f64,
    pub factor: f64,
    pub zero_premium: bool,
    /// Exercise level at the full horizon; `+∞` when the stopping set is empty.
    pub boundary: f64,
    pub gamma_plus: Option<f64>,
    pub c1_plus: Option<f64>,
}

fn grid_for(maturity: f64, em: &EffectiveModel, grid: Option<&GridSpec>, refinements: u32) -> GridSpec {
    let mut g = grid.copied().unwrap_or_else(|| GridSpec::default_for(maturity, em));
    for _ in 0..refinements {
        g = g.refined();
    }
    g
}

fn factor_of(euro: f64, amer: f64, x: f64) -> Result<f64> {
    if !(euro > 0.0) {
        return Err(Error::DegenerateFactor { x });
    }
    Ok(euro / amer)
}

/// Deterministic-horizon valuations at several `x` from one pair of grid solves.
pub fn value_det_many(
    maturity: f64,
    xs: &[f64],
    em: &EffectiveModel,
    grid: Option<&GridSpec>,
) -> Result<Vec<Result<ValuationResult>>> {
    value_det_refined(maturity, xs, em, grid, 0)
}

fn value_det_refined(
    maturity: f64,
    xs: &[f64],
    em: &EffectiveModel,
    grid: Option<&GridSpec>,
    refinements: u32,
) -> Result<Vec<Result<ValuationResult>>> {
    em.check()?;
    let horizon = HorizonSpec::deterministic(maturity)?;
    let zero_premium = em.is_zero_premium();
    let solves = if zero_premium {
        None
    } else {
        let g = grid_for(maturity, em, grid, refinements);
        Some((solve_american(maturity, em, &g)?, solve_european_grid(maturity, em, &g)?))
    };
    Ok(xs
        .iter()
        .map(|&x| {
            let euro = euro_price(maturity, x, em).price;
            let (premium, boundary) = match &solves {
                None => (0.0, f64::INFINITY),
                Some((a, e)) => (a.value(x) - e.value(x), a.boundary.at_maturity()),
            };
            let amer = euro + premium;
            let factor = if zero_premium && euro > 0.0 { 1.0 } else { factor_of(euro, amer, x)? };
            Ok(ValuationResult {
                horizon,
                e0: x,
                euro,
                amer,
                premium,
                relative_premium: premium / euro,
                factor,
                zero_premium,
                boundary,
                gamma_plus: None,
                c1_plus: None,
            })
        })
        .collect())
}

fn value_stoch_with(sol: &RandomizedSolution, x: f64, em: &EffectiveModel) -> Result<ValuationResult> {
    let euro = euro_randomized(x, sol.vartheta, em)?.price;
    let amer = amer_randomized(x, sol, em)?;
    let zero_premium = em.is_zero_premium();
    let premium = amer - euro;
    let factor = if zero_premium && euro > 0.0 { 1.0 } else { factor_of(euro, amer, x)? };
    Ok(ValuationResult {
        horizon: HorizonSpec::exponential(sol.vartheta)?,
        e0: x,
        euro,
        amer,
        premium,
        relative_premium: premium / euro,
        factor,
        zero_premium,
        boundary: sol.b_r,
        gamma_plus: Some(sol.gamma_plus),
        c1_plus: Some(sol.c1_plus),
    })
}

/// Exponential-horizon valuations at several `x` from one free-boundary solve.
pub fn value_stoch_many(vartheta: f64, xs: &[f64], em: &EffectiveModel) -> Result<Vec<Result<ValuationResult>>> {
    let sol = solve_randomized(vartheta, em)?;
    Ok(xs.iter().map(|&x| value_stoch_with(&sol, x, em)).collect())
}

/// Values one scenario under either horizon; `grid` only affects deterministic horizons.
pub fn valuate(horizon: &HorizonSpec, e0: f64, em: &EffectiveModel, grid: Option<&GridSpec>) -> Result<ValuationResult> {
    horizon.check()?;
    let mut out = match *horizon {
        HorizonSpec::Deterministic { maturity } => value_det_many(maturity, &[e0], em, grid)?,
        HorizonSpec::Exponential { vartheta } => value_stoch_many(vartheta, &[e0], em)?,
    };
    out.pop().expect("one point requested")
}

fn scenario(m: &ProjectModel, a: &AssetAggregates, e0: f64, horizon: &HorizonSpec) -> Result<EffectiveModel> {
    let m = ProjectModel { e0, ..*m };
    validate(&m, a, horizon).into_result()?;
    Ok(esscher_shift(&m, a))
}

/// `C_E*(T, E₀) / C_A*(T, E₀)`; exactly 1 in the zero-premium regime.
pub fn illiquidity_factor_det(
    maturity: f64,
    e0: f64,
    m: &ProjectModel,
    a: &AssetAggregates,
    grid: Option<&GridSpec>,
) -> Result<f64> {
    let horizon = HorizonSpec::deterministic(maturity)?;
    let em = scenario(m, a, e0, &horizon)?;
    if em.is_zero_premium() {
        return Ok(1.0);
    }
    Ok(valuate(&horizon, e0, &em, grid)?.factor)
}

/// `C_E^{R,*}(E₀) / C_A^{R,*}(E₀)`; exactly 1 in the zero-premium regime.
pub fn illiquidity_factor_stoch(vartheta: f64, e0: f64, m: &ProjectModel, a: &AssetAggregates) -> Result<f64> {
    let horizon = HorizonSpec::exponential(vartheta)?;
    let em = scenario(m, a, e0, &horizon)?;
    if em.is_zero_premium() {
        return Ok(1.0);
    }
    Ok(valuate(&horizon, e0, &em, None)?.factor)
}

/// Jump specification `(φ, λ)` of one table column group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpCase {
    pub phi: f64,
    pub lambda: f64,
}

impl JumpCase {
    pub const NONE: Self = Self { phi: 0.0, lambda: 0.0 };

    /// Jumps multiplying the project value by `ratio`.
    pub fn ratio(ratio: f64, lambda: f64) -> Self {
        Self {
            phi: ratio.ln(),
            lambda,
        }
    }

    pub fn is_none(&self) -> bool {
        self.phi == 0.0 || self.lambda == 0.0
    }

    pub fn label(&self) -> String {
        if self.is_none() {
            "none".to_string()
        } else {
            format!("log({});lambda={}", round_label(self.phi.exp()), self.lambda)
        }
    }

    fn parse(label: &str) -> Option<Self> {
        if label == "none" {
            return Some(Self::NONE);
        }
        let (ratio, lambda) = label.strip_prefix("log(")?.split_once(");lambda=")?;
        Some(Self::ratio(ratio.parse().ok()?, lambda.parse().ok()?))
    }

    fn matches(&self, other: &Self) -> bool {
        (self.is_none() && other.is_none())
            || ((self.phi - other.phi).abs() < 1e-9 && (self.lambda - other.lambda).abs() < 1e-9)
    }
}

fn round_label(v: f64) -> String {
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonKind {
    Deterministic,
    Exponential,
}

impl HorizonKind {
    /// Horizon of mean length `t`.
    pub fn horizon(self, t: f64) -> Result<HorizonSpec> {
        match self {
            Self::Deterministic => HorizonSpec::deterministic(t),
            Self::Exponential => HorizonSpec::exponential(1.0 / t),
        }
    }

    fn of(h: &HorizonSpec) -> Self {
        match h {
            HorizonSpec::Deterministic { .. } => Self::Deterministic,
            HorizonSpec::Exponential { .. } => Self::Exponential,
        }
    }

    fn column(self) -> &'static str {
        match self {
            Self::Deterministic => "T",
            Self::Exponential => "expected_T",
        }
    }
}

/// Parameter grid of a factor table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub horizons: Vec<HorizonSpec>,
    pub e0_list: Vec<f64>,
    pub rho_list: Vec<f64>,
    pub sigma_x_list: Vec<f64>,
    pub jump_cases: Vec<JumpCase>,
    pub b: f64,
    pub sigma: f64,
    pub r: f64,
    pub phi_x1: f64,
}

impl ScenarioGrid {
    /// The grid behind the paper's tables for growth rate `b`.
    pub fn paper(b: f64, kind: HorizonKind) -> Self {
        Self {
            horizons: PAPER_HORIZONS
                .iter()
                .map(|&t| kind.horizon(t).expect("paper horizons are positive"))
                .collect(),
            e0_list: PAPER_E0.to_vec(),
            rho_list: PAPER_RHO.to_vec(),
            sigma_x_list: PAPER_SIGMA_X.to_vec(),
            jump_cases: vec![
                JumpCase::NONE,
                JumpCase::ratio(0.85, PAPER_LAMBDA),
                JumpCase::ratio(0.7, PAPER_LAMBDA),
            ],
            b,
            sigma: PAPER_SIGMA,
            r: PAPER_R,
            phi_x1: PAPER_PHI_X1,
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, empty) in [
            ("horizons", self.horizons.is_empty()),
            ("e0_list", self.e0_list.is_empty()),
            ("rho_list", self.rho_list.is_empty()),
            ("sigma_x_list", self.sigma_x_list.is_empty()),
            ("jump_cases", self.jump_cases.is_empty()),
        ] {
            if empty {
                return Err(invalid(name, "must not be empty"));
            }
        }
        for h in &self.horizons {
            for &e0 in &self.e0_list {
                for &rho in &self.rho_list {
                    for &sigma_x in &self.sigma_x_list {
                        for j in &self.jump_cases {
                            let (m, a) = self.models(j, rho, sigma_x, e0);
                            validate(&m, &a, h).into_result()?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn models(&self, jump: &JumpCase, rho: f64, sigma_x: f64, e0: f64) -> (ProjectModel, AssetAggregates) {
        (
            ProjectModel {
                b: self.b,
                sigma: self.sigma,
                phi: jump.phi,
                lambda: jump.lambda,
                e0,
            },
            AssetAggregates {
                phi_x1: self.phi_x1,
                sigma_x,
                rho,
                r: self.r,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Block label `(i.j.)`: `i` indexes `σ_X`, `j` the horizon.
    pub block: String,
    pub sigma_x: f64,
    pub horizon: HorizonSpec,
    pub e0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableColumn {
    pub jump: JumpCase,
    pub rho: f64,
}

impl TableColumn {
    pub fn label(&self) -> String {
        format!("{};rho={}", self.jump.label(), self.rho)
    }

    fn parse(label: &str) -> Option<Self> {
        let (jump, rho) = label.rsplit_once(";rho=")?;
        Some(Self {
            jump: JumpCase::parse(jump)?,
            rho: rho.parse().ok()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub row: usize,
    pub column: usize,
    pub message: String,
}

/// Illiquidity factors, one row per `(σ_X, horizon, E₀)` and one column per
/// `(jump case, ρ)`. Failed cells hold NaN and an entry in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorTable {
    pub kind: HorizonKind,
    pub rows: Vec<TableRow>,
    pub columns: Vec<TableColumn>,
    pub values: Vec<Vec<f64>>,
    pub zero_premium: Vec<Vec<bool>>,
    pub errors: Vec<CellError>,
}

/// Knobs for [`generate_table`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSettings {
    /// Number of times both PIDE steps are halved relative to the default grid.
    pub refinements: u32,
}

/// Computes every cell of `grid`. Cells sharing `(σ_X, horizon, jump, ρ)` reuse
/// one solve; cell failures are recorded, not propagated.
pub fn generate_table(grid: &ScenarioGrid, settings: &TableSettings) -> Result<FactorTable> {
    grid.check()?;
    let kind = HorizonKind::of(&grid.horizons[0]);
    if grid.horizons.iter().any(|h| HorizonKind::of(h) != kind) {
        return Err(invalid("horizons", "a table needs a single horizon kind"));
    }
    let columns: Vec<TableColumn> = grid
        .jump_cases
        .iter()
        .flat_map(|&jump| grid.rho_list.iter().map(move |&rho| TableColumn { jump, rho }))
        .collect();
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for (i, &sigma_x) in grid.sigma_x_list.iter().enumerate() {
        for (j, &horizon) in grid.horizons.iter().enumerate() {
            blocks.push((sigma_x, horizon));
            for &e0 in &grid.e0_list {
                rows.push(TableRow {
                    block: format!("({}.{}.)", i + 1, j + 1),
                    sigma_x,
                    horizon,
                    e0,
                });
            }
        }
    }

    let tasks: Vec<(usize, usize)> = (0..blocks.len())
        .flat_map(|b| (0..columns.len()).map(move |c| (b, c)))
        .collect();
    let results: Vec<Vec<Result<ValuationResult>>> = tasks
        .par_iter()
        .map(|&(b, c)| {
            let (sigma_x, horizon) = blocks[b];
            let col = columns[c];
            let (m, a) = grid.models(&col.jump, col.rho, sigma_x, grid.e0_list[0]);
            let em = esscher_shift(&m, &a);
            let cells = match horizon {
                HorizonSpec::Deterministic { maturity } => {
                    value_det_refined(maturity, &grid.e0_list, &em, None, settings.refinements)
                }
                HorizonSpec::Exponential { vartheta } => value_stoch_many(vartheta, &grid.e0_list, &em),
            };
            match cells {
                Ok(v) => v,
                Err(e) => grid.e0_list.iter().map(|_| Err(e.clone())).collect(),
            }
        })
        .collect();

    let n_e0 = grid.e0_list.len();
    let mut values = vec![vec![f64::NAN; columns.len()]; rows.len()];
    let mut zero_premium = vec![vec![false; columns.len()]; rows.len()];
    let mut errors = Vec::new();
    for (&(b, c), cells) in tasks.iter().zip(results) {
        for (k, cell) in cells.into_iter().enumerate() {
            let row = b * n_e0 + k;
            match cell {
                Ok(v) => {
                    values[row][c] = v.factor;
                    zero_premium[row][c] = v.zero_premium;
                }
                Err(e) => {
                    log::warn!("cell {} E0={} {}: {e}", rows[row].block, rows[row].e0, columns[c].label());
                    errors.push(CellError {
                        row,
                        column: c,
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    Ok(FactorTable {
        kind,
        rows,
        columns,
        values,
        zero_premium,
        errors,
    })
}

/// One cell of a [`TableComparison`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDeviation {
    pub block: String,
    pub e0: f64,
    pub column: String,
    pub ours: f64,
    pub reference: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableComparison {
    pub cells: Vec<CellDeviation>,
    pub max_abs: f64,
    /// Cells present in only one of the two tables.
    pub unmatched: usize,
}

impl FactorTable {
    pub fn find_row(&self, sigma_x: f64, expected_t: f64, e0: f64) -> Option<usize> {
        self.rows.iter().position(|r| {
            (r.sigma_x - sigma_x).abs() < 1e-9
                && (r.horizon.expected_length() - expected_t).abs() < 1e-9
                && (r.e0 - e0).abs() < 1e-9
        })
    }

    pub fn find_column(&self, jump: &JumpCase, rho: f64) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.jump.matches(jump) && (c.rho - rho).abs() < 1e-9)
    }

    pub fn get(&self, sigma_x: f64, expected_t: f64, e0: f64, jump: &JumpCase, rho: f64) -> Option<f64> {
        Some(self.values[self.find_row(sigma_x, expected_t, e0)?][self.find_column(jump, rho)?])
    }

    /// Writes the wide CSV layout with `decimals` digits per factor.
    pub fn write_csv<W: io::Write>(&self, out: W, decimals: usize) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "block".to_string(),
            "sigma_x".to_string(),
            self.kind.column().to_string(),
            "e0".to_string(),
        ];
        header.extend(self.columns.iter().map(TableColumn::label));
        w.write_record(&header)?;
        for (row, vals) in self.rows.iter().zip(&self.values) {
            let mut rec = vec![
                row.block.clone(),
                row.sigma_x.to_string(),
                round_label(row.horizon.expected_length()),
                row.e0.to_string(),
            ];
            rec.extend(vals.iter().map(|v| format!("{v:.decimals$}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`FactorTable::write_csv`].
    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let bad = |msg: String| invalid("csv", msg);
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.len() < 5 {
            return Err(bad("expected block, sigma_x, horizon, e0 and factor columns".into()));
        }
        let kind = match &header[2] {
            "T" => HorizonKind::Deterministic,
            "expected_T" => HorizonKind::Exponential,
            other => return Err(bad(format!("unknown horizon column `{other}`"))),
        };
        let columns = header
            .iter()
            .skip(4)
            .map(|l| TableColumn::parse(l).ok_or_else(|| bad(format!("bad column label `{l}`"))))
            .collect::<Result<Vec<_>>>()?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != header.len() {
                return Err(bad(format!("row with {} fields, header has {}", rec.len(), header.len())));
            }
            rows.push(TableRow {
                block: rec[0].to_string(),
                sigma_x: num(&rec[1])?,
                horizon: kind.horizon(num(&rec[2])?)?,
                e0: num(&rec[3])?,
            });
            values.push(rec.iter().skip(4).map(num).collect::<Result<Vec<_>>>()?);
        }
        let zero_premium = values.iter().map(|r| vec![false; r.len()]).collect();
        Ok(Self {
            kind,
            rows,
            columns,
            values,
            zero_premium,
            errors: Vec::new(),
        })
    }

    /// Per-cell deviations from `reference`, matched by parameters.
    pub fn compare(&self, reference: &FactorTable) -> TableComparison {
        let mut cells = Vec::new();
        let mut matched = 0;
        for (ri, row) in reference.rows.iter().enumerate() {
            let Some(r) = self.find_row(row.sigma_x, row.horizon.expected_length(), row.e0) else {
                continue;
            };
            for (ci, col) in reference.columns.iter().enumerate() {
                let Some(c) = self.find_column(&col.jump, col.rho) else {
                    continue;
                };
                matched += 1;
                let (ours, theirs) = (self.values[r][c], reference.values[ri][ci]);
                cells.push(CellDeviation {
                    block: row.block.clone(),
                    e0: row.e0,
                    column: col.label(),
                    ours,
                    reference: theirs,
                    delta: ours - theirs,
                });
            }
        }
        let max_abs = cells
            .iter()
            .map(|c| if c.delta.is_nan() { f64::INFINITY } else { c.delta.abs() })
            .fold(0.0, f64::max);
        let total = self.rows.len() * self.columns.len() + reference.rows.len() * reference.columns.len();
        TableComparison {
            cells,
            max_abs,
            unmatched: total - 2 * matched,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Horizon length `T`; the exponential horizon uses `ϑ = 1/T`.
    Horizon,
    /// Log jump size `φ`.
    JumpSize,
    /// Brownian correlation `ρ`.
    Correlation,
}

/// Base scenario of a figure sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureBase {
    pub r: f64,
    pub phi_x1: f64,
    pub sigma_x: f64,
    pub rho: f64,
    pub b: f64,
    pub sigma: f64,
    pub phi: f64,
    pub lambda: f64,
    pub e0: f64,
    /// Horizon length `T` (mean `1/ϑ` for the exponential horizon).
    pub horizon: f64,
}

impl FigureBase {
    /// Defaults of the first figure set: `λ = 0.5`, `T = 0.5`.
    pub fn figure_one() -> Self {
        Self {
            r: PAPER_R,
            phi_x1: PAPER_PHI_X1,
            sigma_x: 0.2,
            rho: -0.5,
            b: -0.04,
            sigma: PAPER_SIGMA,
            phi: 0.85f64.ln(),
            lambda: 0.5,
            e0: 1.0,
            horizon: 0.5,
        }
    }

    /// Defaults of the second figure set: `λ = 1`, `T = 1.5`.
    pub fn figure_two() -> Self {
        Self {
            lambda: 1.0,
            horizon: 1.5,
            ..Self::figure_one()
        }
    }

    fn with(&self, param: SweepParam, value: f64) -> Self {
        match param {
            SweepParam::Horizon => Self { horizon: value, ..*self },
            SweepParam::JumpSize => Self { phi: value, ..*self },
            SweepParam::Correlation => Self { rho: value, ..*self },
        }
    }

    fn models(&self) -> (ProjectModel, AssetAggregates) {
        (
            ProjectModel {
                b: self.b,
                sigma: self.sigma,
                phi: self.phi,
                lambda: self.lambda,
                e0: self.e0,
            },
            AssetAggregates {
                phi_x1: self.phi_x1,
                sigma_x: self.sigma_x,
                rho: self.rho,
                r: self.r,
            },
        )
    }
}

impl Default for FigureBase {
    fn default() -> Self {
        Self::figure_one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigurePoint {
    pub value: f64,
    pub deterministic: f64,
    pub stochastic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSeries {
    pub param: SweepParam,
    pub base: FigureBase,
    pub points: Vec<FigurePoint>,
    pub skipped: Vec<SkippedPoint>,
}

impl FigureSeries {
    pub fn write_csv<W: io::Write>(&self, out: W, decimals: usize) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let name = match self.param {
            SweepParam::Horizon => "T",
            SweepParam::JumpSize => "phi",
            SweepParam::Correlation => "rho",
        };
        w.write_record([name, "deterministic", "stochastic"])?;
        for p in &self.points {
            w.write_record([
                p.value.to_string(),
                format!("{:.decimals$}", p.deterministic),
                format!("{:.decimals$}", p.stochastic),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Deterministic and exponential-horizon factors along a one-parameter sweep.
/// Inadmissible points are skipped with a warning.
pub fn figure_series(param: SweepParam, range: &[f64], base: &FigureBase) -> Result<FigureSeries> {
    if range.is_empty() {
        return Err(invalid("range", "sweep range is empty"));
    }
    let outcomes: Vec<std::result::Result<FigurePoint, String>> = range
        .par_iter()
        .map(|&value| {
            let s = base.with(param, value);
            let (m, a) = s.models();
            let det = illiquidity_factor_det(s.horizon, s.e0, &m, &a, None);
            let stoch = if s.horizon > 0.0 {
                illiquidity_factor_stoch(1.0 / s.horizon, s.e0, &m, &a)
            } else {
                Err(invalid("horizon", format!("must be positive, got {}", s.horizon)))
            };
            match (det, stoch) {
                (Ok(deterministic), Ok(stochastic)) => Ok(FigurePoint {
                    value,
                    deterministic,
                    stochastic,
                }),
                (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
            }
        })
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (&value, outcome) in range.iter().zip(outcomes) {
        match outcome {
            Ok(p) => points.push(p),
            Err(reason) => {
                log::warn!("skipping {param:?} = {value}: {reason}");
                skipped.push(SkippedPoint { value, reason });
            }
        }
    }
    Ok(FigureSeries {
        param,
        base: *base,
        points,
        skipped,
    })
}
