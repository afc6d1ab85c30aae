//! Bound states of a well pair: grid bracketing plus bisection, and
//! calibration of the geometry against target levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::WellPair;
use crate::quantities::PhysicalConstants;
use crate::transcendental::{self, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Scan spacing in eV.
    pub grid_step: f64,
    /// Bracket width (eV) below which refinement may stop.
    pub refine_tol: f64,
    /// Largest accepted |secular| at a refined root.
    pub residual_tol: f64,
    pub max_levels: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_step: 2e-5,
            refine_tol: 1e-9,
            residual_tol: 1e-8,
            max_levels: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.refine_tol > 0.0) {
            return Err(Error::Config(format!(
                "solver.refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        if !(self.grid_step > self.refine_tol) {
            return Err(Error::Config(format!(
                "solver.grid_step ({}) must exceed solver.refine_tol ({})",
                self.grid_step, self.refine_tol
            )));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::Config(format!(
                "solver.residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        Ok(())
    }
}

/// One bound state of a pair, energy in the pair-local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Position in ascending order; equals the node count for full solves.
    pub index: usize,
    #[serde(rename = "energy_eV")]
    pub energy: f64,
    pub regime: Regime,
    pub residual: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectedBracket {
    pub lo: f64,
    pub hi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub grid_points: usize,
    pub window: (f64, f64),
    pub rejected_brackets: Vec<RejectedBracket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSolution {
    pub levels: Vec<Level>,
    pub diagnostics: Diagnostics,
}

impl PairSolution {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

/// All bound states in (0, V_deep).
pub fn solve_pair(
    pair: &WellPair,
    cfg: &SolverConfig,
    consts: &PhysicalConstants,
) -> Result<PairSolution> {
    solve_window(pair, cfg, consts, 0.0, pair.deep_depth())
}

/// Bound states inside [emin, emax] ∩ (0, V_deep). Indices count from the
/// bottom of the window, not from the ground state.
pub fn solve_window(
    pair: &WellPair,
    cfg: &SolverConfig,
    consts: &PhysicalConstants,
    emin: f64,
    emax: f64,
) -> Result<PairSolution> {
    cfg.validate()?;
    let top = pair.deep_depth();
    let lo = emin.max(top * 1e-12);
    let hi = emax.min(top * (1.0 - 1e-12));
    let mut diagnostics = Diagnostics {
        window: (lo, hi),
        ..Default::default()
    };
    if !(lo < hi) {
        return Ok(PairSolution {
            levels: Vec::new(),
            diagnostics,
        });
    }
    let f = |e: f64| transcendental::secular(pair, e, consts);

    let n = ((hi - lo) / cfg.grid_step).ceil().max(1.0) as usize;
    diagnostics.grid_points = n + 1;
    let mut roots: Vec<(f64, f64, f64)> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let e = lo + (hi - lo) * i as f64 / n as f64;
        let s = f(e)?;
        if s == 0.0 {
            roots.push((e, e, 0.0));
            prev = None;
            continue;
        }
        if let Some((pe, ps)) = prev {
            if ps.signum() != s.signum() {
                let (a, b, best, res) = refine(&f, pe, ps, e, cfg)?;
                if res <= cfg.residual_tol {
                    roots.push((a, b, best));
                } else {
                    diagnostics.rejected_brackets.push(RejectedBracket {
                        lo: pe,
                        hi: e,
                        residual: res,
                    });
                }
            }
        }
        prev = Some((e, s));
    }

    let mut levels = Vec::with_capacity(roots.len());
    for (index, (a, b, energy)) in roots.into_iter().enumerate() {
        if cfg.max_levels.is_some_and(|m| index >= m) {
            break;
        }
        levels.push(Level {
            index,
            energy,
            regime: transcendental::classify_regime(pair, energy)?,
            residual: f(energy)?.abs(),
            bracket: (a, b),
        });
    }
    Ok(PairSolution {
        levels,
        diagnostics,
    })
}

/// Bisection inside a sign-change bracket. Stops once the bracket is below
/// `refine_tol` and the residual is acceptable, or when it can no longer be
/// split. Returns (lo, hi, best energy, residual at best).
fn refine<F>(
    f: &F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64, f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut fb = f(b)?;
    loop {
        let (best, res) = if fa.abs() <= fb.abs() {
            (a, fa.abs())
        } else {
            (b, fb.abs())
        };
        let mid = 0.5 * (a + b);
        let done = b - a <= cfg.refine_tol && res <= cfg.residual_tol;
        if done || mid <= a || mid >= b {
            return Ok((a, b, best, res));
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, mid, mid, 0.0));
        }
        if fm.signum() == fa.signum() {
            (a, fa) = (mid, fm);
        } else {
            (b, fb) = (mid, fm);
        }
    }
}

pub fn find_levels(
    pair: &WellPair,
    cfg: &SolverConfig,
    consts: &PhysicalConstants,
) -> Result<Vec<Level>> {
    Ok(solve_pair(pair, cfg, consts)?.levels)
}

pub fn count_levels(
    pair: &WellPair,
    cfg: &SolverConfig,
    consts: &PhysicalConstants,
) -> Result<usize> {
    Ok(find_levels(pair, cfg, consts)?.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Grid spacing of the coarse search (Å or eV).
    pub step: f64,
    /// Largest acceptable root-sum-square distance to the targets, eV.
    pub max_misfit: f64,
}

impl CalibrationOptions {
    pub fn distance() -> Self {
        Self {
            step: 0.01,
            max_misfit: 5e-3,
        }
    }

    pub fn depth() -> Self {
        Self {
            step: 5e-4,
            max_misfit: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub value: f64,
    /// Root-sum-square distance between targets and their matched levels, eV.
    pub misfit: f64,
    /// Levels matched to the sorted targets, pair-local eV.
    pub matched: Vec<f64>,
    pub pair: WellPair,
}

/// Best order-preserving match of the sorted targets onto a run of
/// consecutive levels. Returns (sum of squares, matched levels).
pub fn match_targets(levels: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
    let mut t = targets.to_vec();
    t.sort_by(f64::total_cmp);
    if t.is_empty() || levels.len() < t.len() {
        return (f64::INFINITY, Vec::new());
    }
    let mut best = (f64::INFINITY, Vec::new());
    for w in levels.windows(t.len()) {
        let ss: f64 = w.iter().zip(&t).map(|(l, t)| (l - t).powi(2)).sum();
        if ss < best.0 {
            best = (ss, w.to_vec());
        }
    }
    best
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Grid search then golden-section polish of a 1-D objective on [lo, hi].
fn search<F>(lo: f64, hi: f64, step: f64, objective: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = ((hi - lo) / step).round().max(0.0) as usize;
    let point = |i: usize| {
        if n == 0 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        }
    };
    let mut best = (point(0), objective(point(0))?);
    let mut best_i = 0;
    for i in 1..=n {
        let x = point(i);
        let v = objective(x)?;
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    if n == 0 || best.1 == 0.0 {
        return Ok(best);
    }

    let (mut a, mut b) = (point(best_i.saturating_sub(1)), point((best_i + 1).min(n)));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while b - a > 1e-6 * step {
        if fc < fd {
            (b, d, fd) = (d, c, fc);
            c = b - GOLDEN * (b - a);
            fc = objective(c)?;
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + GOLDEN * (b - a);
            fd = objective(d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

fn check_targets(targets: &[f64]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::Config(
            "calibration needs at least one target level".into(),
        ));
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("calibration targets must be finite".into()));
    }
    Ok(())
}

fn check_range(range: (f64, f64), what: &str) -> Result<()> {
    if !(range.0.is_finite() && range.1.is_finite() && range.0 <= range.1) {
        return Err(Error::Config(format!(
            "empty {what} range [{}, {}]",
            range.0, range.1
        )));
    }
    Ok(())
}

fn window_for(targets: &[f64], opts: &CalibrationOptions) -> (f64, f64) {
    let margin = 0.05f64.max(10.0 * opts.max_misfit);
    let lo = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo - margin, hi + margin)
}

fn finish(
    value: f64,
    ss: f64,
    pair: WellPair,
    matched: Vec<f64>,
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    let misfit = ss.sqrt();
    if !(misfit <= opts.max_misfit) {
        return Err(Error::CalibrationFailed {
            best: value,
            misfit,
            threshold: opts.max_misfit,
        });
    }
    Ok(Calibration {
        value,
        misfit,
        matched,
        pair,
    })
}

/// Finds the center distance in `range` whose levels best reproduce
/// `targets` (pair-local eV).
pub fn calibrate_distance(
    template: &WellPair,
    targets: &[f64],
    range: (f64, f64),
    cfg: &SolverConfig,
    opts: &CalibrationOptions,
    consts: &PhysicalConstants,
) -> Result<Calibration> {
    check_targets(targets)?;
    check_range(range, "distance")?;
    if !(range.0 > template.width()) {
        return Err(Error::Config(format!(
            "distance range must lie above the well width {} Å",
            template.width()
        )));
    }
    let (emin, emax) = window_for(targets, opts);
    let objective = |l: f64| -> Result<f64> {
        let pair = template.with_distance(l)?;
        let levels = solve_window(&pair, cfg, consts, emin, emax)?.energies();
        Ok(match_targets(&levels, targets).0)
    };
    let (l, ss) = search(range.0, range.1, opts.step, objective)?;
    let pair = template.with_distance(l)?;
    let matched = match_targets(
        &solve_window(&pair, cfg, consts, emin, emax)?.energies(),
        targets,
    )
    .1;
    finish(l, ss, pair, matched, opts)
}

/// Which depth stays put while the other is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthRole {
    Shallow,
    Deep,
}

/// Searches one depth with the other held fixed.
///
/// Targets are pair-local energies of the template. When the deep depth
/// moves, the targets move with the barrier top, i.e. they keep their
/// distance below it, which is what a fixed global frame requires.
pub fn calibrate_depth(
    template: &WellPair,
    fixed: DepthRole,
    targets: &[f64],
    range: (f64, f64),
    cfg: &SolverConfig,
    opts: &CalibrationOptions,
    consts: &PhysicalConstants,
) -> Result<Calibration> {
    check_targets(targets)?;
    check_range(range, "depth")?;
    let make = |v: f64| match fixed {
        DepthRole::Shallow => template.with_depths(template.shallow_depth(), v),
        DepthRole::Deep => template.with_depths(v, template.deep_depth()),
    };
    // both ends must keep shallow < deep
    make(range.0)?;
    make(range.1)?;

    let shifted = |v: f64| -> Vec<f64> {
        let shift = match fixed {
            DepthRole::Shallow => v - template.deep_depth(),
            DepthRole::Deep => 0.0,
        };
        targets.iter().map(|t| t + shift).collect()
    };
    let levels_for = |v: f64| -> Result<(WellPair, Vec<f64>, Vec<f64>)> {
        let pair = make(v)?;
        let t = shifted(v);
        let (emin, emax) = window_for(&t, opts);
        Ok((
            pair,
            solve_window(&pair, cfg, consts, emin, emax)?.energies(),
            t,
        ))
    };
    let objective = |v: f64| -> Result<f64> {
        let (_, levels, t) = levels_for(v)?;
        Ok(match_targets(&levels, &t).0)
    };
    let (v, ss) = search(range.0, range.1, opts.step, objective)?;
    let (pair, levels, t) = levels_for(v)?;
    finish(v, ss, pair, match_targets(&levels, &t).1, opts)
}
