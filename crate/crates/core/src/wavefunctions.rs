//! Piecewise eigenfunctions of a well pair.
//!
//! Regions follow the pair-local frame: II is the shallow well, III the
//! barrier, IV the deep well, with hard walls outside. Internally each region
//! carries `(ψ, ψ′)` at its left edge and is propagated with cos/sin or
//! cosh/sinh; the exported coefficients use absolute x:
//!
//! ```text
//! II  (E below the shallow floor): A1 e^{k1 x} + A2 e^{−k1 x}
//! II  (otherwise):                 A1 sin(k1 x) + A2 cos(k1 x)
//! III:                             B e^{βx} + C e^{−βx}
//! IV:                              D1 sin(k2 x) + D2 cos(k2 x)
//! ```

use serde::Serialize;

use crate::eigensolver::Level;
use crate::error::{Error, Result};
use crate::potential::WellPair;
use crate::quantities::PhysicalConstants;
use crate::transcendental::{self, Regime};

/// Largest accepted |ψ| at the far wall, relative to the amplitude there.
pub const WALL_TOLERANCE: f64 = 1e-6;

const SIMPSON_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Oscillating(f64),
    Decaying(f64),
}

impl Kind {
    fn k(self) -> f64 {
        match self {
            Kind::Oscillating(k) | Kind::Decaying(k) => k,
        }
    }

    /// (ψ, ψ′) after a step ξ from the anchor state.
    fn propagate(self, psi: f64, dpsi: f64, xi: f64) -> (f64, f64) {
        match self {
            Kind::Oscillating(k) => {
                let (s, c) = (k * xi).sin_cos();
                (psi * c + dpsi * s / k, -psi * k * s + dpsi * c)
            }
            Kind::Decaying(k) => {
                let (s, c) = ((k * xi).sinh(), (k * xi).cosh());
                (psi * c + dpsi * s / k, psi * k * s + dpsi * c)
            }
        }
    }

    /// Size of the solution through (ψ, ψ′), ψ-units.
    fn amplitude(self, psi: f64, dpsi: f64) -> f64 {
        psi.hypot(dpsi / self.k())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    kind: Kind,
    start: f64,
    end: f64,
    psi: f64,
    dpsi: f64,
}

impl Piece {
    fn eval(&self, x: f64) -> (f64, f64) {
        self.kind.propagate(self.psi, self.dpsi, x - self.start)
    }

    fn scaled(self, s: f64) -> Self {
        Self {
            psi: self.psi * s,
            dpsi: self.dpsi * s,
            ..self
        }
    }

    /// Coefficients of the absolute-x form (sin/cos or e^{+kx}/e^{−kx}).
    fn coefficients(&self) -> (f64, f64) {
        let x0 = self.start;
        match self.kind {
            Kind::Oscillating(k) => {
                let (s, c) = (k * x0).sin_cos();
                let q = self.dpsi / k;
                (self.psi * s + q * c, self.psi * c - q * s)
            }
            Kind::Decaying(k) => {
                let q = self.dpsi / k;
                (
                    0.5 * (self.psi + q) * (-k * x0).exp(),
                    0.5 * (self.psi - q) * (k * x0).exp(),
                )
            }
        }
    }

    fn zeros(&self, skip_start: bool, skip_end: bool) -> usize {
        let w = self.end - self.start;
        let margin = 1e-9 * w;
        let lo = if skip_start { margin } else { 0.0 };
        let hi = if skip_end { w - margin } else { w };
        match self.kind {
            Kind::Oscillating(k) => {
                // ψ = R sin(kξ + φ)
                let phi = self.psi.atan2(self.dpsi / k);
                let first = ((k * lo + phi) / std::f64::consts::PI).ceil();
                let last = ((k * hi + phi) / std::f64::consts::PI).ceil() - 1.0;
                (last - first + 1.0).max(0.0) as usize
            }
            Kind::Decaying(_) => {
                // at most one zero
                let a = self.eval(self.start + lo).0;
                let b = self.eval(self.start + hi).0;
                usize::from(a != 0.0 && b != 0.0 && a.signum() != b.signum())
            }
        }
    }

    fn simpson(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = SIMPSON_INTERVALS;
        let h = (self.end - self.start) / n as f64;
        let mut sum = f(self.start) + f(self.end);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(self.start + h * i as f64);
        }
        sum * h / 3.0
    }
}

/// Relative mismatch of ψ and ψ′ across one interior boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchingResidual {
    pub x: f64,
    pub value: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseWavefunction {
    pub level_index: usize,
    #[serde(rename = "energy_eV")]
    pub energy: f64,
    pub regime: Regime,
    pub k1: f64,
    pub beta: f64,
    pub k2: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub c: f64,
    pub d1: f64,
    pub d2: f64,
    /// Left wall, the two interior boundaries, right wall (Å).
    pub region_bounds: [f64; 4],
    pub normalized: bool,
    /// |ψ| at the wall that was not imposed, relative to the local amplitude.
    pub wall_residual: f64,
    #[serde(skip)]
    pieces: [Piece; 3],
}

impl PiecewiseWavefunction {
    fn piece_at(&self, x: f64) -> Option<&Piece> {
        let [x0, x1, x2, x3] = self.region_bounds;
        if !(x0..=x3).contains(&x) {
            None
        } else if x < x1 {
            Some(&self.pieces[0])
        } else if x < x2 {
            Some(&self.pieces[1])
        } else {
            Some(&self.pieces[2])
        }
    }

    /// ψ(x); zero outside the walls.
    pub fn value(&self, x: f64) -> f64 {
        self.piece_at(x).map_or(0.0, |p| p.eval(x).0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.piece_at(x).map_or(0.0, |p| p.eval(x).1)
    }

    /// ψ and ψ′ from the exported coefficients of region 0, 1 or 2.
    pub fn coefficient_form(&self, region: usize, x: f64) -> (f64, f64) {
        let exp_pair = |k: f64, p: f64, q: f64| {
            let (u, v) = (p * (k * x).exp(), q * (-k * x).exp());
            (u + v, k * (u - v))
        };
        let trig_pair = |k: f64, p: f64, q: f64| {
            let (s, c) = (k * x).sin_cos();
            (p * s + q * c, k * (p * c - q * s))
        };
        match region {
            0 => match self.regime {
                Regime::Evanescent => exp_pair(self.k1, self.a1, self.a2),
                Regime::Oscillatory => trig_pair(self.k1, self.a1, self.a2),
            },
            1 => exp_pair(self.beta, self.b, self.c),
            _ => trig_pair(self.k2, self.d1, self.d2),
        }
    }

    /// Continuity of ψ and ψ′ at both interior boundaries, evaluated from
    /// the exported coefficients.
    pub fn matching_residuals(&self) -> [MatchingResidual; 2] {
        [1, 2].map(|i| {
            let x = self.region_bounds[i];
            let (pl, dl) = self.coefficient_form(i - 1, x);
            let (pr, dr) = self.coefficient_form(i, x);
            let scale = pl.abs().max(pr.abs()) + dl.abs().max(dr.abs()) / self.beta;
            MatchingResidual {
                x,
                value: (pl - pr).abs() / scale,
                slope: (dl - dr).abs() / self.beta / scale,
            }
        })
    }

    /// ∫|ψ|² over each region.
    pub fn region_probabilities(&self) -> [f64; 3] {
        self.pieces.map(|p| p.simpson(|x| p.eval(x).0.powi(2)))
    }

    pub fn norm(&self) -> f64 {
        self.region_probabilities().iter().sum()
    }

    /// Zeros strictly between the walls.
    pub fn node_count(&self) -> usize {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| p.zeros(i == 0, true) + usize::from(i < 2 && p.eval(p.end).0 == 0.0))
            .sum()
    }

    pub fn sample(&self, n_points: usize) -> Vec<(f64, f64)> {
        sample_wavefunction(self, n_points)
    }
}

/// Bisects the secular function inside the level's bracket down to float
/// resolution.
fn polish(pair: &WellPair, level: &Level, consts: &PhysicalConstants) -> Result<f64> {
    let (mut a, mut b) = level.bracket;
    if !(a < b) || !(a..=b).contains(&level.energy) {
        return Ok(level.energy);
    }
    let f = |e| transcendental::secular(pair, e, consts);
    let mut fa = f(a)?;
    if fa.signum() == f(b)?.signum() {
        return Ok(level.energy);
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            (a, fa) = (mid, fm);
        } else {
            b = mid;
        }
    }
    let fb = f(b)?;
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

/// Integrates from one wall to the other. Returns the pieces and the
/// relative |ψ| at the far wall.
fn shoot(kinds: [Kind; 3], bounds: [f64; 4], from_left: bool) -> ([Piece; 3], f64) {
    let mut pieces = [Piece {
        kind: kinds[0],
        start: 0.0,
        end: 0.0,
        psi: 0.0,
        dpsi: 0.0,
    }; 3];
    if from_left {
        let (mut psi, mut dpsi) = (0.0, 1.0);
        for i in 0..3 {
            pieces[i] = Piece {
                kind: kinds[i],
                start: bounds[i],
                end: bounds[i + 1],
                psi,
                dpsi,
            };
            (psi, dpsi) = pieces[i].eval(bounds[i + 1]);
        }
        let last = pieces[2];
        let (end_psi, end_dpsi) = last.eval(last.end);
        (
            pieces,
            end_psi.abs() / last.kind.amplitude(end_psi, end_dpsi),
        )
    } else {
        let (mut psi, mut dpsi) = (0.0, -1.0);
        for i in (0..3).rev() {
            let kind = kinds[i];
            let width = bounds[i + 1] - bounds[i];
            (psi, dpsi) = kind.propagate(psi, dpsi, -width);
            pieces[i] = Piece {
                kind,
                start: bounds[i],
                end: bounds[i + 1],
                psi,
                dpsi,
            };
        }
        let first = pieces[0];
        (
            pieces,
            first.psi.abs() / first.kind.amplitude(first.psi, first.dpsi),
        )
    }
}

/// Reconstructs and normalises the eigenfunction of a solved level.
pub fn build_wavefunction(
    pair: &WellPair,
    level: &Level,
    consts: &PhysicalConstants,
) -> Result<PiecewiseWavefunction> {
    let energy = polish(pair, level, consts)?;
    let w = transcendental::wavenumbers(pair, energy, consts)?;
    let first = match w.regime {
        Regime::Evanescent => Kind::Decaying(w.k1),
        Regime::Oscillatory => Kind::Oscillating(w.k1),
    };
    let kinds = [first, Kind::Decaying(w.beta), Kind::Oscillating(w.k2)];
    let bounds = pair.boundaries();

    let (left, res_left) = shoot(kinds, bounds, true);
    let (right, res_right) = shoot(kinds, bounds, false);
    let (pieces, wall_residual) = if res_left <= res_right {
        (left, res_left)
    } else {
        (right, res_right)
    };
    if !(wall_residual <= WALL_TOLERANCE) {
        return Err(Error::NotAnEigenvalue(energy, wall_residual));
    }

    let mut wf = PiecewiseWavefunction {
        level_index: level.index,
        energy,
        regime: w.regime,
        k1: w.k1,
        beta: w.beta,
        k2: w.k2,
        a1: 0.0,
        a2: 0.0,
        b: 0.0,
        c: 0.0,
        d1: 0.0,
        d2: 0.0,
        region_bounds: bounds,
        normalized: false,
        wall_residual,
        pieces,
    };
    // positive first lobe: ψ′ > 0 at the left wall
    let sign = if wf.pieces[0].dpsi < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / wf.norm().sqrt();
    wf.pieces = wf.pieces.map(|p| p.scaled(scale));
    wf.normalized = true;
    (wf.a1, wf.a2) = wf.pieces[0].coefficients();
    (wf.b, wf.c) = wf.pieces[1].coefficients();
    (wf.d1, wf.d2) = wf.pieces[2].coefficients();
    Ok(wf)
}

/// `n_points` uniformly spaced samples from wall to wall.
pub fn sample_wavefunction(wf: &PiecewiseWavefunction, n_points: usize) -> Vec<(f64, f64)> {
    let (x0, x3) = (wf.region_bounds[0], wf.region_bounds[3]);
    match n_points {
        0 => Vec::new(),
        1 => vec![(x0, wf.value(x0))],
        n => (0..n)
            .map(|i| {
                let x = if i == n - 1 {
                    x3
                } else {
                    x0 + (x3 - x0) * i as f64 / (n - 1) as f64
                };
                (x, wf.value(x))
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{find_levels, SolverConfig};

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata2018()
    }

    fn levels(pair: &WellPair) -> Vec<Level> {
        find_levels(pair, &SolverConfig::default(), &consts()).unwrap()
    }

    #[test]
    fn ground_state_shape() {
        let pair = WellPair::new(43.85, 60.0, 0.272, 1.585).unwrap();
        let lv = levels(&pair);
        let wf = build_wavefunction(&pair, &lv[0], &consts()).unwrap();
        assert_eq!(wf.regime, Regime::Evanescent);
        assert_eq!(wf.node_count(), 0);
        assert!((wf.norm() - 1.0).abs() < 1e-9);
        let [shallow, _, deep] = wf.region_probabilities();
        assert!(shallow < deep);
        assert!(wf.value(wf.region_bounds[2] + 10.0) > 0.0);
        for r in wf.matching_residuals() {
            assert!(r.value < 1e-8 && r.slope < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn every_level_reconstructs() {
        let c = consts();
        for (vs, vd) in [(0.272, 1.585), (0.272, 0.524), (0.524, 0.95)] {
            let pair = WellPair::new(43.85, 62.0, vs, vd).unwrap();
            for level in levels(&pair) {
                let wf = build_wavefunction(&pair, &level, &c).unwrap();
                assert_eq!(
                    wf.node_count(),
                    level.index,
                    "{vs}/{vd} level {}",
                    level.index
                );
                assert!(
                    wf.wall_residual < 1e-8,
                    "{vs}/{vd} {}: {}",
                    level.index,
                    wf.wall_residual
                );
                for r in wf.matching_residuals() {
                    assert!(
                        r.value < 1e-8 && r.slope < 1e-8,
                        "{vs}/{vd} {}: {r:?}",
                        level.index
                    );
                }
            }
        }
    }

    #[test]
    fn samples_are_continuous_and_normalised() {
        let pair = WellPair::new(43.85, 60.0, 0.272, 1.585).unwrap();
        let lv = levels(&pair);
        let wf = build_wavefunction(&pair, &lv[3], &consts()).unwrap();
        for &x in &wf.region_bounds[1..3] {
            let h = 1e-9;
            assert!((wf.value(x - h) - wf.value(x + h)).abs() < 1e-8);
        }
        let s = sample_wavefunction(&wf, 10001);
        assert_eq!(s.len(), 10001);
        assert_eq!(s[0].1, 0.0);
        assert!(s[10000].1.abs() < 1e-8);
        let integral: f64 = s
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.powi(2) + w[1].1.powi(2)))
            .sum();
        assert!((integral - 1.0).abs() < 1e-3, "{integral}");
        assert!(sample_wavefunction(&wf, 0).is_empty());
    }

    #[test]
    fn wrong_energy_is_rejected() {
        let pair = WellPair::new(43.85, 60.0, 0.272, 1.585).unwrap();
        let mut level = levels(&pair)[2];
        level.energy += 1e-3;
        level.bracket = (level.energy, level.energy);
        assert!(matches!(
            build_wavefunction(&pair, &level, &consts()),
            Err(Error::NotAnEigenvalue(..))
        ));
    }
}
