//! Acceptance run: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Run with `cargo test -p tradeability-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{surface_shape, time_decrease, ShapeReport, SpotCell, DET_CELLS, STOCH_CELLS};
use tradeability_core::premium::{PAPER_E0, PAPER_HORIZONS, PAPER_PHI_X1, PAPER_R, PAPER_RHO, PAPER_SIGMA, PAPER_SIGMA_X};
use tradeability_core::randomized::{euro_oide_residual, premium_ode_residual};
use tradeability_core::*;

/// Published stochastic cells our solver does not reproduce. Each is confirmed by
/// an independent stationary obstacle solve; the run reports them as failures
/// and only these cells may fail.
const KNOWN_STOCH_CONFLICTS: [(f64, (usize, usize), f64); 3] =
    [(0.0, (2, 2), 1.0), (-0.04, (1, 1), 1.2), (-0.04, (1, 2), 0.9)];

const SPOT_TOL: f64 = 0.005;

struct Outcome {
    id: &'static str,
    pass: bool,
    /// Failure limited to the documented conflict cells.
    known: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(id: &'static str, pass: bool, summary: String) -> Self {
        Self {
            id,
            pass,
            known: false,
            summary,
            details: Vec::new(),
        }
    }

    fn print(&self) {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} {}", self.id, self.summary);
        for d in &self.details {
            println!("       {d}");
        }
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn models(b: f64, sigma_x: f64, rho: f64, jump: JumpCase, e0: f64) -> (ProjectModel, AssetAggregates) {
    (
        ProjectModel::new(b, PAPER_SIGMA, jump.phi, jump.lambda, e0).unwrap(),
        AssetAggregates::new(PAPER_PHI_X1, sigma_x, rho, PAPER_R).unwrap(),
    )
}

fn jump_cases() -> [JumpCase; 3] {
    [JumpCase::NONE, JumpCase::ratio(0.85, 0.5), JumpCase::ratio(0.7, 0.5)]
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let mut errors = Vec::new();
    for sigma_x in PAPER_SIGMA_X {
        for t in PAPER_HORIZONS {
            for e0 in PAPER_E0 {
                for jump in jump_cases() {
                    let (m, a) = models(0.0, sigma_x, 0.5, jump, e0);
                    for f in [illiquidity_factor_det(t, e0, &m, &a, None), illiquidity_factor_stoch(1.0 / t, e0, &m, &a)] {
                        match f {
                            Ok(f) => worst = worst.max((f - 1.0).abs()),
                            Err(e) => errors.push(e.to_string()),
                        }
                        n += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = errors.is_empty() && worst <= 1e-9 && elapsed < Duration::from_secs(1);
    let mut o = Outcome::new(
        "AC1",
        pass,
        format!(
            "zero-premium exactness: {n} factors, max |f - 1| = {worst:.1e} (tol 1e-9), {} (limit 1 s)",
            secs(elapsed)
        ),
    );
    o.details = errors;
    o
}

fn spot_table(kind: HorizonKind, cells: &[SpotCell]) -> (Vec<(SpotCell, f64)>, Vec<Duration>) {
    let mut found = Vec::new();
    let mut times = Vec::new();
    for b in [0.0, -0.04] {
        let start = Instant::now();
        let table = generate_table(&ScenarioGrid::paper(b, kind), &TableSettings::default()).unwrap();
        times.push(start.elapsed());
        for c in cells.iter().filter(|c| c.b == b) {
            let v = table
                .get(c.sigma_x(), c.horizon(), c.e0, &c.jump(), c.rho)
                .expect("spot cell is on the paper grid");
            found.push((*c, v));
        }
    }
    (found, times)
}

fn ac2() -> (Outcome, Vec<(SpotCell, f64)>) {
    let (cells, times) = spot_table(HorizonKind::Deterministic, &DET_CELLS);
    let total: Duration = times.iter().sum();
    let misses: Vec<_> = cells.iter().filter(|(c, v)| !((v - c.published).abs() <= SPOT_TOL)).collect();
    let worst = cells.iter().map(|(c, v)| (v - c.published).abs()).fold(0.0, f64::max);
    let pass = misses.is_empty() && total < Duration::from_secs(300);
    let mut o = Outcome::new(
        "AC2",
        pass,
        format!(
            "deterministic tables: {}/{} spot cells within ±{SPOT_TOL}, max |Δ| = {worst:.4}, two full tables in {} (limit 300 s)",
            cells.len() - misses.len(),
            cells.len(),
            secs(total)
        ),
    );
    o.details = misses
        .iter()
        .map(|(c, v)| format!("{}: ours {v:.5}, published {:.3}", c.label(), c.published))
        .collect();
    (o, cells)
}

fn is_known_conflict(c: &SpotCell) -> bool {
    KNOWN_STOCH_CONFLICTS
        .iter()
        .any(|&(b, block, e0)| c.b == b && c.block == block && c.e0 == e0)
}

fn ac3() -> Outcome {
    let (cells, times) = spot_table(HorizonKind::Exponential, &STOCH_CELLS);
    let total: Duration = times.iter().sum();
    let misses: Vec<_> = cells.iter().filter(|(c, v)| !((v - c.published).abs() <= SPOT_TOL)).collect();
    let unexpected = misses.iter().filter(|(c, _)| !is_known_conflict(c)).count();
    let in_time = total < Duration::from_secs(30);
    let mut o = Outcome::new(
        "AC3",
        misses.is_empty() && in_time,
        format!(
            "exponential-horizon tables: {}/{} spot cells within ±{SPOT_TOL}, two full tables in {} (limit 30 s)",
            cells.len() - misses.len(),
            cells.len(),
            secs(total)
        ),
    );
    o.known = unexpected == 0 && in_time;
    o.details = misses
        .iter()
        .map(|(c, v)| {
            let note = if is_known_conflict(c) { " [documented conflict]" } else { "" };
            format!("{}: ours {v:.5}, published {:.3}{note}", c.label(), c.published)
        })
        .collect();
    o
}

fn ac4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let mut errors = Vec::new();
    for b in [0.0, -0.04] {
        for rho in PAPER_RHO {
            for jump in jump_cases() {
                let (m, a) = models(b, 0.2, rho, jump, 1.0);
                let em = esscher_shift(&m, &a);
                for t in PAPER_HORIZONS {
                    for x in PAPER_E0 {
                        let series = euro_price(t, x, &em).price;
                        match euro_price_fourier(t, x, &em) {
                            Ok(f) => worst = worst.max(((series - f.price) / series).abs()),
                            Err(e) => errors.push(e.to_string()),
                        }
                        n += 1;
                    }
                }
            }
        }
    }
    let mut o = Outcome::new(
        "AC4",
        errors.is_empty() && worst <= 1e-6,
        format!("series vs Fourier: {n} prices, max relative gap {worst:.1e} (tol 1e-6)"),
    );
    o.details = errors;
    o
}

fn ac5() -> Outcome {
    let (mut matching, mut pasting, mut ode, mut oide): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut solved = 0;
    let mut errors = Vec::new();
    for c in STOCH_CELLS {
        let (m, a) = c.models();
        let em = esscher_shift(&m, &a);
        let vartheta = 1.0 / c.horizon();
        let sol = match solve_randomized(vartheta, &em) {
            Ok(s) => s,
            Err(e) => {
                errors.push(format!("{}: {e}", c.label()));
                continue;
            }
        };
        if sol.regime == Regime::Standard {
            solved += 1;
            matching = matching.max(sol.value_matching_residual);
            pasting = pasting.max(sol.smooth_pasting_residual);
            for k in 1..=20 {
                let x = sol.b_r * k as f64 / 21.0;
                match premium_ode_residual(x, &sol, &em) {
                    Ok(r) => ode = ode.max(r.abs()),
                    Err(e) => errors.push(e.to_string()),
                }
            }
        }
        for k in 0..20 {
            let x = 0.5 + 1.5 * k as f64 / 19.0;
            match euro_oide_residual(x, vartheta, &em) {
                Ok(r) => oide = oide.max(r.abs()),
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    let pass = errors.is_empty() && solved > 0 && matching < 1e-8 && pasting < 1e-8 && ode < 1e-6 && oide < 1e-6;
    let mut o = Outcome::new(
        "AC5",
        pass,
        format!(
            "free-boundary residuals over {solved} boundaries: value matching {matching:.1e}, smooth pasting {pasting:.1e} (tol 1e-8); ODE {ode:.1e}, OIDE {oide:.1e} at 20 points each (tol 1e-6)"
        ),
    );
    o.details = errors;
    o
}

fn ac6() -> Outcome {
    let mut det = ShapeReport::default();
    let mut lip_det: f64 = 0.0;
    let mut time: f64 = 0.0;
    let mut surfaces = 0;
    for c in DET_CELLS {
        let (m, a) = c.models();
        let em = esscher_shift(&m, &a);
        let t = c.horizon();
        let grid = GridSpec::default_for(t, &em);
        for g in [grid, grid.refined()] {
            let sol = solve_american(t, &em, &g).unwrap();
            let s = surface_shape(&sol, 0.0, f64::INFINITY);
            det = det.merge(s);
            if em.r_tilde >= em.b_tilde {
                lip_det = lip_det.max(s.lipschitz_excess);
            }
            time = time.max(time_decrease(&sol));
            surfaces += 1;
        }
    }
    let mut stoch = ShapeReport::default();
    let mut lip_stoch: f64 = 0.0;
    let xs: Vec<f64> = (0..=300).map(|i| 0.01 * i as f64).collect();
    for c in STOCH_CELLS {
        let (m, a) = c.models();
        let em = esscher_shift(&m, &a);
        let sol = solve_randomized(1.0 / c.horizon(), &em).unwrap();
        let vs: Vec<f64> = xs.iter().map(|&x| amer_randomized(x, &sol, &em).unwrap()).collect();
        let s = ShapeReport::of(&xs, &vs);
        stoch = stoch.merge(s);
        if em.r_tilde >= em.b_tilde {
            lip_stoch = lip_stoch.max(s.lipschitz_excess);
        }
    }
    let tol = 1e-8;
    let pass = det.decrease <= tol
        && det.concavity <= tol
        && time <= tol
        && lip_det <= tol
        && stoch.decrease <= tol
        && stoch.concavity <= tol
        && lip_stoch <= tol;
    Outcome::new(
        "AC6",
        pass,
        format!(
            "shape properties on {surfaces} grid surfaces and {} randomized curves: worst decrease {:.1e}/{:.1e}, concavity {:.1e}/{:.1e}, time decrease {:.1e}, Lipschitz excess {:.1e}/{:.1e} (tol 1e-8)",
            STOCH_CELLS.len(),
            det.decrease.max(0.0),
            stoch.decrease.max(0.0),
            det.concavity.max(0.0),
            stoch.concavity.max(0.0),
            time.max(0.0),
            lip_det.max(0.0),
            lip_stoch.max(0.0),
        ),
    )
}

fn ac7() -> Outcome {
    let start = Instant::now();
    let cfg = SimConfig::new(100_000, 50, 20_180_601, false).unwrap();
    let mut details = Vec::new();
    let mut pass = true;

    let (m, a) = models(-0.04, 0.4, -0.5, JumpCase::ratio(0.85, 0.5), 1.1);
    let em = esscher_shift(&m, &a);
    let s0 = 1.3;
    let est = mc_two_asset_euro(1.5, s0, 1.1, &m, &a, &cfg).unwrap();
    let target = s0 * euro_price(1.5, 1.1, &em).price;
    let z = est.z_score(target);
    pass &= z <= 3.0;
    details.push(format!(
        "two-asset T=1.5 S0={s0} E0=1.1: {:.6} ± {:.6} vs {target:.6} (z = {z:.2})",
        est.estimate, est.std_error
    ));

    let ls_cases = [
        (-0.04, 0.2, 0.5, JumpCase::NONE, 0.5, 1.1),
        (-0.04, 0.4, -0.5, JumpCase::ratio(0.85, 0.5), 0.5, 1.2),
        (0.0, 0.2, -0.5, JumpCase::ratio(0.7, 0.5), 1.5, 1.0),
        (-0.04, 0.2, -0.5, JumpCase::NONE, 1.5, 1.2),
        (-0.04, 0.4, 0.0, JumpCase::ratio(0.7, 0.5), 2.5, 1.0),
        (0.0, 0.2, 0.5, JumpCase::ratio(0.85, 0.5), 1.5, 1.1),
    ];
    for (b, sigma_x, rho, jump, t, e0) in ls_cases {
        let (m, a) = models(b, sigma_x, rho, jump, e0);
        let em = esscher_shift(&m, &a);
        let pide = valuate(&HorizonSpec::deterministic(t).unwrap(), e0, &em, None).unwrap().amer;
        let est = mc_american_ls(t, e0, &em, &cfg, 3).unwrap();
        let gap = (est.estimate - pide).abs();
        let tol = (3.0 * est.std_error).max(0.01 * pide);
        pass &= gap <= tol;
        details.push(format!(
            "LS b={b} σX={sigma_x} ρ={rho} {} T={t} E0={e0}: {:.6} ± {:.6} vs PIDE {pide:.6} (gap {gap:.1e}, tol {tol:.1e})",
            jump.label(),
            est.estimate,
            est.std_error
        ));
    }

    let rand_cases = [
        (0.0, 0.2, -0.5, JumpCase::NONE, 2.0, 0.9),
        (0.0, 0.4, 0.0, JumpCase::ratio(0.7, 0.5), 1.0 / 1.5, 1.0),
        (-0.04, 0.2, 0.5, JumpCase::ratio(0.85, 0.5), 1.0 / 1.5, 1.2),
        (-0.04, 0.4, -0.5, JumpCase::NONE, 0.2, 1.2),
    ];
    for (b, sigma_x, rho, jump, vartheta, e0) in rand_cases {
        let (m, a) = models(b, sigma_x, rho, jump, e0);
        let em = esscher_shift(&m, &a);
        let target = euro_randomized(e0, vartheta, &em).unwrap().price;
        let est = mc_randomized_euro(vartheta, e0, &em, &cfg).unwrap();
        let z = est.z_score(target);
        pass &= z <= 3.0;
        details.push(format!(
            "randomized b={b} σX={sigma_x} ρ={rho} {} ϑ={vartheta:.4} E0={e0}: {:.6} ± {:.6} vs {target:.6} (z = {z:.2})",
            jump.label(),
            est.estimate,
            est.std_error
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    let mut o = Outcome::new(
        "AC7",
        pass,
        format!("Monte-Carlo oracles: 1 two-asset, 6 Longstaff–Schwartz, 4 randomized checks in {} (limit 120 s)", secs(elapsed)),
    );
    o.details = details;
    o
}

fn ac8(cells: &[(SpotCell, f64)]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (c, coarse) in cells {
        let (m, a) = c.models();
        let em = esscher_shift(&m, &a);
        let t = c.horizon();
        let fine = GridSpec::default_for(t, &em).refined();
        let f = illiquidity_factor_det(t, c.e0, &m, &a, Some(&fine)).unwrap();
        let d = (f - coarse).abs();
        worst = worst.max(d);
        if d >= 0.001 {
            details.push(format!("{}: {coarse:.6} -> {f:.6}", c.label()));
        }
    }
    let mut o = Outcome::new(
        "AC8",
        worst < 0.001,
        format!(
            "grid convergence: max factor change {worst:.1e} over {} cells when both steps are halved (tol 1e-3)",
            cells.len()
        ),
    );
    o.details = details;
    o
}

fn main() -> ExitCode {
    let (o2, det_cells) = ac2();
    let outcomes = vec![ac1(), o2, ac3(), ac4(), ac5(), ac6(), ac7(), ac8(&det_cells)];
    for o in &outcomes {
        o.print();
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let unexpected: Vec<_> = outcomes.iter().filter(|o| !o.pass && !o.known).map(|o| o.id).collect();
    let known: Vec<_> = outcomes.iter().filter(|o| !o.pass && o.known).map(|o| o.id).collect();
    println!("{passed}/{} criteria pass", outcomes.len());
    if !known.is_empty() {
        println!("failing on documented conflict cells only: {}", known.join(", "));
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
