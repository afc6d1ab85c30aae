//! Finite-difference reference spectrum.
//!
//! The Hamiltonian −(ħ²/2m)ψ'' + Vψ is discretised with central second
//! differences on a uniform grid between the outer walls (ψ = 0 there). The
//! result is a symmetric tridiagonal matrix whose lowest eigenvalues are
//! located by Sturm-sequence bisection. Node potentials are cell averages so
//! that a well edge falling between nodes still moves the spectrum smoothly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialProfile;
use crate::quantities::PhysicalConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdConfig {
    /// Grid points including the two wall nodes.
    pub grid_points: usize,
    /// Extra Å on each side held at the profile maximum before the hard wall.
    pub padding: f64,
    /// Richardson extrapolation from a second run at half the step.
    pub extrapolate: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            grid_points: 20001,
            padding: 0.0,
            extrapolate: false,
        }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 1001 || self.grid_points.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "oracle.grid_points must be odd and at least 1001, got {}",
                self.grid_points
            )));
        }
        if !(self.padding >= 0.0 && self.padding.is_finite()) {
            return Err(Error::Config(format!(
                "oracle.padding must be non-negative, got {}",
                self.padding
            )));
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix with a constant off-diagonal.
#[derive(Debug, Clone)]
struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
    /// Interior node positions, Å.
    x: Vec<f64>,
    step: f64,
    x_range: (f64, f64),
}

fn padded(profile: &PotentialProfile, padding: f64) -> Result<PotentialProfile> {
    if padding == 0.0 {
        return Ok(profile.clone());
    }
    let (x0, x1) = profile.domain();
    let top = profile.max_value();
    let mut breakpoints = vec![x0];
    breakpoints.extend_from_slice(profile.breakpoints());
    breakpoints.push(x1);
    let mut values = vec![top];
    values.extend_from_slice(profile.segment_values());
    values.push(top);
    PotentialProfile::new(x0 - padding, x1 + padding, breakpoints, values)
}

fn discretize(
    profile: &PotentialProfile,
    grid_points: usize,
    padding: f64,
    consts: &PhysicalConstants,
) -> Result<Tridiagonal> {
    let profile = padded(profile, padding)?;
    let (x0, x1) = profile.domain();
    let h = (x1 - x0) / (grid_points - 1) as f64;
    let c = consts.kinetic_coefficient() / (h * h);
    let x: Vec<f64> = (1..grid_points - 1).map(|i| x0 + h * i as f64).collect();
    let diag = x
        .iter()
        .map(|&xi| 2.0 * c + profile.cell_average(xi - 0.5 * h, xi + 0.5 * h))
        .collect();
    Ok(Tridiagonal {
        diag,
        off: -c,
        x,
        step: h,
        x_range: (x0, x1),
    })
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `lambda`.
    fn sturm_count(&self, lambda: f64) -> usize {
        let e2 = self.off * self.off;
        let guard = f64::EPSILON * self.off.abs();
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 {
                d - lambda
            } else {
                d - lambda - e2 / q
            };
            if q.abs() < guard {
                q = -guard;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lower_bound(&self) -> f64 {
        self.diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * self.off.abs()
    }

    /// k-th eigenvalue (zero based) by bisection; `upper` must lie above it.
    fn eigenvalue(&self, k: usize, upper: f64) -> f64 {
        let (mut lo, mut hi) = (self.lower_bound(), upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse iteration at a converged eigenvalue.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i % 7) as f64)).collect();
        let guard = f64::EPSILON * self.off.abs();
        for _ in 0..3 {
            // Thomas algorithm on (H − λ) y = v
            let mut cp = vec![0.0; n];
            let mut dp = vec![0.0; n];
            let mut denom = self.diag[0] - lambda;
            if denom.abs() < guard {
                denom = guard;
            }
            cp[0] = self.off / denom;
            dp[0] = v[0] / denom;
            for i in 1..n {
                let mut m = self.diag[i] - lambda - self.off * cp[i - 1];
                if m.abs() < guard {
                    m = guard;
                }
                cp[i] = self.off / m;
                dp[i] = (v[i] - self.off * dp[i - 1]) / m;
            }
            let mut y = vec![0.0; n];
            y[n - 1] = dp[n - 1];
            for i in (0..n - 1).rev() {
                y[i] = dp[i] - cp[i] * y[i + 1];
            }
            let norm = y.iter().map(|t| t * t).sum::<f64>().sqrt();
            v = y.into_iter().map(|t| t / norm).collect();
        }
        v
    }
}

/// Lowest eigenvalues of one discretisation, plus a Richardson error
/// estimate when extrapolating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdSpectrum {
    pub levels: Vec<f64>,
    /// Fewer bound states exist below the profile maximum than were asked for.
    pub truncated: bool,
    pub error_estimates: Option<Vec<f64>>,
    pub step: f64,
}

fn raw_levels(
    profile: &PotentialProfile,
    n_levels: Option<usize>,
    grid_points: usize,
    padding: f64,
    consts: &PhysicalConstants,
) -> Result<(Vec<f64>, bool, f64)> {
    let t = discretize(profile, grid_points, padding, consts)?;
    let top = profile.max_value();
    let bound = t.sturm_count(top);
    let want = n_levels.unwrap_or(bound);
    let n = want.min(bound);
    let levels = (0..n).map(|k| t.eigenvalue(k, top)).collect();
    Ok((levels, bound < want, t.step))
}

fn spectrum(
    profile: &PotentialProfile,
    n_levels: Option<usize>,
    cfg: &FdConfig,
    consts: &PhysicalConstants,
) -> Result<FdSpectrum> {
    cfg.validate()?;
    let (coarse, truncated, step) =
        raw_levels(profile, n_levels, cfg.grid_points, cfg.padding, consts)?;
    if !cfg.extrapolate {
        return Ok(FdSpectrum {
            levels: coarse,
            truncated,
            error_estimates: None,
            step,
        });
    }
    let (fine, fine_truncated, _) = raw_levels(
        profile,
        Some(coarse.len()),
        2 * cfg.grid_points - 1,
        cfg.padding,
        consts,
    )?;
    let n = coarse.len().min(fine.len());
    let levels = (0..n).map(|k| (4.0 * fine[k] - coarse[k]) / 3.0).collect();
    let errors = (0..n).map(|k| (fine[k] - coarse[k]).abs() / 3.0).collect();
    Ok(FdSpectrum {
        levels,
        truncated: truncated || fine_truncated,
        error_estimates: Some(errors),
        step: 0.5 * step,
    })
}

/// Lowest `n_levels` bound eigenvalues (below the profile maximum).
pub fn fd_levels(
    profile: &PotentialProfile,
    n_levels: usize,
    cfg: &FdConfig,
    consts: &PhysicalConstants,
) -> Result<FdSpectrum> {
    if n_levels == 0 {
        return Err(Error::Oracle("n_levels must be at least 1".into()));
    }
    spectrum(profile, Some(n_levels), cfg, consts)
}

/// Every eigenvalue below the profile maximum.
pub fn fd_bound_levels(
    profile: &PotentialProfile,
    cfg: &FdConfig,
    consts: &PhysicalConstants,
) -> Result<FdSpectrum> {
    spectrum(profile, None, cfg, consts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    pub value: f64,
    pub error_estimate: Option<f64>,
}

/// E_j − E_i for two level indices.
pub fn fd_splitting(
    profile: &PotentialProfile,
    indices: (usize, usize),
    cfg: &FdConfig,
    consts: &PhysicalConstants,
) -> Result<Splitting> {
    let top = indices.0.max(indices.1);
    let s = fd_levels(profile, top + 1, cfg, consts)?;
    if s.levels.len() <= top {
        return Err(Error::Oracle(format!(
            "level {top} not resolved: only {} bound states",
            s.levels.len()
        )));
    }
    let (i, j) = indices;
    Ok(Splitting {
        value: s.levels[j] - s.levels[i],
        error_estimate: s.error_estimates.map(|e| e[i] + e[j]),
    })
}

/// Discrete eigenvector on the grid, walls included, L²-normalised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdState {
    pub energy: f64,
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
}

impl FdState {
    /// Sign changes between the walls.
    pub fn node_count(&self) -> usize {
        let max = self.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let mut last = 0.0f64;
        let mut nodes = 0;
        for &p in &self.psi {
            if p.abs() <= 1e-14 * max {
                continue;
            }
            if last != 0.0 && p.signum() != last.signum() {
                nodes += 1;
            }
            last = p;
        }
        nodes
    }

    /// Linear interpolation, zero outside the walls.
    pub fn value_at(&self, x: f64) -> f64 {
        let (x0, x1) = (self.x[0], self.x[self.x.len() - 1]);
        if x <= x0 || x >= x1 {
            return 0.0;
        }
        let h = self.x[1] - self.x[0];
        let t = (x - x0) / h;
        let i = (t.floor() as usize).min(self.x.len() - 2);
        let f = t - i as f64;
        self.psi[i] * (1.0 - f) + self.psi[i + 1] * f
    }
}

pub fn fd_eigenstate(
    profile: &PotentialProfile,
    index: usize,
    cfg: &FdConfig,
    consts: &PhysicalConstants,
) -> Result<FdState> {
    cfg.validate()?;
    let t = discretize(profile, cfg.grid_points, cfg.padding, consts)?;
    let top = profile.max_value();
    if t.sturm_count(top) <= index {
        return Err(Error::Oracle(format!("no bound state with index {index}")));
    }
    let energy = t.eigenvalue(index, top);
    let v = t.eigenvector(energy);
    let mut x = Vec::with_capacity(v.len() + 2);
    x.push(t.x_range.0);
    x.extend_from_slice(&t.x);
    x.push(t.x_range.1);
    let mut psi = Vec::with_capacity(v.len() + 2);
    psi.push(0.0);
    psi.extend_from_slice(&v);
    psi.push(0.0);
    let norm = (psi.iter().map(|p| p * p).sum::<f64>() * t.step).sqrt();
    let max = psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    // positive on the first lobe from the left
    let first = psi
        .iter()
        .find(|p| p.abs() > 1e-14 * max)
        .copied()
        .unwrap_or(1.0);
    let scale = first.signum() / norm;
    psi.iter_mut().for_each(|p| *p *= scale);
    Ok(FdState { energy, x, psi })
}
