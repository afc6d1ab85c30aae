//! Square-well geometry: single asymmetric pairs and the four-well chain.
//!
//! Pair-local energies are measured from the bottom of the deeper well, whose
//! barrier top sits at `deep_depth`. The chain uses one global reference, the
//! bottom of its deepest well, with every barrier top at the largest depth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One asymmetric double square well between two infinite walls.
///
/// Layout from left to right: wall, shallow well, barrier, deep well, wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWellPair", into = "RawWellPair")]
pub struct WellPair {
    width: f64,
    distance: f64,
    shallow_depth: f64,
    deep_depth: f64,
}

#[derive(Serialize, Deserialize)]
struct RawWellPair {
    width_a: f64,
    distance_a: f64,
    shallow_depth_ev: f64,
    deep_depth_ev: f64,
}

impl TryFrom<RawWellPair> for WellPair {
    type Error = Error;
    fn try_from(r: RawWellPair) -> Result<Self> {
        WellPair::new(r.width_a, r.distance_a, r.shallow_depth_ev, r.deep_depth_ev)
    }
}

impl From<WellPair> for RawWellPair {
    fn from(p: WellPair) -> Self {
        RawWellPair {
            width_a: p.width,
            distance_a: p.distance,
            shallow_depth_ev: p.shallow_depth,
            deep_depth_ev: p.deep_depth,
        }
    }
}

impl WellPair {
    /// `width` and `distance` (center to center) in Å, depths in eV.
    pub fn new(width: f64, distance: f64, shallow_depth: f64, deep_depth: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Geometry(format!(
                "well width must be positive, got {width} Å"
            )));
        }
        if !(distance.is_finite() && distance > width) {
            return Err(Error::Geometry(format!(
                "center distance {distance} Å must exceed the well width {width} Å"
            )));
        }
        if !(shallow_depth.is_finite() && shallow_depth > 0.0) {
            return Err(Error::Geometry(format!(
                "shallow depth must be positive, got {shallow_depth} eV"
            )));
        }
        if !(deep_depth.is_finite() && deep_depth > shallow_depth) {
            return Err(Error::Geometry(format!(
                "deep depth {deep_depth} eV must exceed shallow depth {shallow_depth} eV"
            )));
        }
        Ok(Self {
            width,
            distance,
            shallow_depth,
            deep_depth,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn shallow_depth(&self) -> f64 {
        self.shallow_depth
    }

    pub fn deep_depth(&self) -> f64 {
        self.deep_depth
    }

    /// L − a.
    pub fn barrier_width(&self) -> f64 {
        self.distance - self.width
    }

    /// Bottom of the shallow well in the pair-local frame.
    pub fn shallow_floor(&self) -> f64 {
        self.deep_depth - self.shallow_depth
    }

    /// Positions of the left wall, the two barrier edges and the right wall,
    /// with the barrier centred on x = 0.
    pub fn boundaries(&self) -> [f64; 4] {
        let outer = 0.5 * (self.distance + self.width);
        let inner = 0.5 * (self.distance - self.width);
        [-outer, -inner, inner, outer]
    }

    pub fn with_distance(&self, distance: f64) -> Result<Self> {
        Self::new(self.width, distance, self.shallow_depth, self.deep_depth)
    }

    pub fn with_depths(&self, shallow_depth: f64, deep_depth: f64) -> Result<Self> {
        Self::new(self.width, self.distance, shallow_depth, deep_depth)
    }

    pub fn profile(&self) -> PotentialProfile {
        pair_profile(self)
    }
}

/// Piecewise-constant potential between two infinite walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    x_min: f64,
    x_max: f64,
}

impl PotentialProfile {
    pub fn new(x_min: f64, x_max: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::Geometry(format!(
                "{} segment values for {} breakpoints",
                values.len(),
                breakpoints.len()
            )));
        }
        if !(x_min < x_max) {
            return Err(Error::Geometry(format!("empty domain [{x_min}, {x_max}]")));
        }
        let mut prev = x_min;
        for &b in &breakpoints {
            if !(b > prev) {
                return Err(Error::Geometry(
                    "breakpoints must be strictly increasing inside the domain".into(),
                ));
            }
            prev = b;
        }
        if !(x_max > prev) {
            return Err(Error::Geometry(
                "last breakpoint lies outside the domain".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("segment values must be finite".into()));
        }
        Ok(Self {
            breakpoints,
            values,
            x_min,
            x_max,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segment_values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    /// Segment `i` as (start, end, value).
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.values.len()).map(move |i| {
            let start = if i == 0 {
                self.x_min
            } else {
                self.breakpoints[i - 1]
            };
            let end = self.breakpoints.get(i).copied().unwrap_or(self.x_max);
            (start, end, self.values[i])
        })
    }

    /// Potential at `x`; at a breakpoint the right-hand segment wins.
    /// Outside the domain the walls are infinite.
    pub fn value_at(&self, x: f64) -> f64 {
        if x < self.x_min || x > self.x_max {
            return f64::INFINITY;
        }
        let i = self.breakpoints.partition_point(|&b| b <= x);
        self.values[i]
    }

    /// Average of the potential over [x0, x1].
    pub fn cell_average(&self, x0: f64, x1: f64) -> f64 {
        let (lo, hi) = (x0.max(self.x_min), x1.min(self.x_max));
        if hi <= lo {
            return self.value_at(0.5 * (x0 + x1));
        }
        let mut acc = 0.0;
        for (s, e, v) in self.segments() {
            let overlap = e.min(hi) - s.max(lo);
            if overlap > 0.0 {
                acc += overlap * v;
            }
        }
        acc / (hi - lo)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// ∫ (V − min V) dx over the domain.
    pub fn excess_integral(&self) -> f64 {
        let min = self.min_value();
        self.segments().map(|(s, e, v)| (e - s) * (v - min)).sum()
    }

    /// Same profile shifted by a constant energy.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + offset).collect(),
            ..self.clone()
        }
    }

    /// Mirror image about the domain centre.
    pub fn mirrored(&self) -> Self {
        let (a, b) = (self.x_min, self.x_max);
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().map(|&x| a + b - x).collect();
        breakpoints.reverse();
        let mut values = self.values.clone();
        values.reverse();
        Self {
            breakpoints,
            values,
            x_min: a,
            x_max: b,
        }
    }

    /// Sub-profile on [x0, x1], with new infinite walls at the cut points.
    pub fn restricted(&self, x0: f64, x1: f64) -> Result<Self> {
        let (x0, x1) = (x0.max(self.x_min), x1.min(self.x_max));
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for (s, e, v) in self.segments() {
            if e <= x0 || s >= x1 {
                continue;
            }
            if !values.is_empty() {
                breakpoints.push(s);
            }
            values.push(v);
        }
        Self::new(x0, x1, breakpoints, values)
    }

    /// Step-shaped vertex list (x in Å, V in eV) for plotting.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        self.segments()
            .flat_map(|(s, e, v)| [(s, v), (e, v)])
            .collect()
    }
}

/// Profile of a single pair, energies in the pair-local frame.
pub fn pair_profile(pair: &WellPair) -> PotentialProfile {
    let [x0, b0, b1, x1] = pair.boundaries();
    PotentialProfile::new(
        x0,
        x1,
        vec![b0, b1],
        vec![pair.shallow_floor(), pair.deep_depth(), 0.0],
    )
    .expect("validated pair yields a valid profile")
}

pub const CASCADE_WELLS: usize = 4;

/// The four-well chain, ordered along the transfer path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeGeometry {
    pub widths: [f64; CASCADE_WELLS],
    /// Center distances between consecutive wells.
    pub distances: [f64; CASCADE_WELLS - 1],
    /// Distance used for the informational closing pair (last well with the first).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closing_distance: Option<f64>,
    pub depths: [f64; CASCADE_WELLS],
    pub labels: [String; CASCADE_WELLS],
}

impl CascadeGeometry {
    /// Checks every invariant and returns the first violation.
    pub fn validate(&self) -> Result<()> {
        let max = self.max_depth();
        if !(self.depths[0] >= max) || self.depths.iter().skip(1).any(|&d| d >= self.depths[0]) {
            return Err(Error::Geometry(format!(
                "wells.depths: the first well must be strictly the deepest, got {:?}",
                self.depths
            )));
        }
        for i in 0..CASCADE_WELLS - 1 {
            self.pair(i)?;
        }
        if self.closing_distance.is_some() {
            self.closing_pair()?;
        }
        Ok(())
    }

    pub fn max_depth(&self) -> f64 {
        self.depths
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Floor of each well in the global frame.
    pub fn floors(&self) -> [f64; CASCADE_WELLS] {
        let max = self.max_depth();
        self.depths.map(|d| max - d)
    }

    fn make_pair(&self, i: usize, j: usize, distance: f64) -> Result<WellPair> {
        let (wi, wj) = (self.widths[i], self.widths[j]);
        if (wi - wj).abs() > 1e-12 * wi.abs().max(1.0) {
            return Err(Error::Geometry(format!(
                "wells.widths: wells {} and {} must share one width to form a pair ({wi} vs {wj} Å)",
                i + 1,
                j + 1
            )));
        }
        let (vi, vj) = (self.depths[i], self.depths[j]);
        WellPair::new(wi, distance, vi.min(vj), vi.max(vj)).map_err(|e| match e {
            Error::Geometry(m) => Error::Geometry(format!("pair {}-{}: {m}", i + 1, j + 1)),
            other => other,
        })
    }

    /// Active transfer pair `i` (wells i and i+1, zero based).
    pub fn pair(&self, i: usize) -> Result<WellPair> {
        if i >= CASCADE_WELLS - 1 {
            return Err(Error::Config(format!("no active pair {i}")));
        }
        self.make_pair(i, i + 1, self.distances[i])
    }

    pub fn closing_pair(&self) -> Result<Option<WellPair>> {
        self.closing_distance
            .map(|d| self.make_pair(CASCADE_WELLS - 1, 0, d))
            .transpose()
    }

    /// Shift from the pair-local frame of pair (i, j) to the global frame.
    pub fn pair_offset(&self, i: usize, j: usize) -> f64 {
        self.max_depth() - self.depths[i].max(self.depths[j])
    }

    /// Centers of the wells along x, the first at zero.
    pub fn centers(&self) -> [f64; CASCADE_WELLS] {
        let mut c = [0.0; CASCADE_WELLS];
        for i in 1..CASCADE_WELLS {
            c[i] = c[i - 1] + self.distances[i - 1];
        }
        c
    }
}

/// Global profile of the whole chain, walls at the outer edges of the first
/// and last wells.
pub fn cascade_profile(geom: &CascadeGeometry) -> Result<PotentialProfile> {
    geom.validate()?;
    let top = geom.max_depth();
    let floors = geom.floors();
    let centers = geom.centers();
    let x_min = centers[0] - 0.5 * geom.widths[0];
    let x_max = centers[CASCADE_WELLS - 1] + 0.5 * geom.widths[CASCADE_WELLS - 1];
    let mut breakpoints = Vec::new();
    let mut values = vec![floors[0]];
    for i in 1..CASCADE_WELLS {
        breakpoints.push(centers[i - 1] + 0.5 * geom.widths[i - 1]);
        values.push(top);
        breakpoints.push(centers[i] - 0.5 * geom.widths[i]);
        values.push(floors[i]);
    }
    PotentialProfile::new(x_min, x_max, breakpoints, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_geometry() -> CascadeGeometry {
        CascadeGeometry {
            widths: [43.85; 4],
            distances: [60.0, 62.0, 63.0],
            closing_distance: Some(61.0),
            depths: [1.585, 0.272, 0.524, 0.95],
            labels: ["P", "B", "H", "Q"].map(String::from),
        }
    }

    #[test]
    fn pair_profile_levels() {
        let pair = WellPair::new(43.85, 62.0, 0.272, 1.585).unwrap();
        let p = pair_profile(&pair);
        assert_eq!(p.segment_values().len(), p.breakpoints().len() + 1);
        assert_eq!(p.segment_values()[1], 1.585);
        assert!((p.segment_values()[0] - 1.313).abs() < 1e-12);
        assert_eq!(p.segment_values()[2], 0.0);
        let (x0, x1) = p.domain();
        assert!((x1 - x0 - (62.0 + 43.85)).abs() < 1e-12);
        assert!((p.breakpoints()[1] - p.breakpoints()[0] - 18.15).abs() < 1e-12);
    }

    #[test]
    fn degenerate_pairs_rejected() {
        assert!(WellPair::new(43.85, 43.85, 0.272, 1.585).is_err());
        assert!(WellPair::new(43.85, 62.0, 0.5, 0.5).is_err());
        assert!(WellPair::new(43.85, 62.0, 0.6, 0.5).is_err());
        assert!(WellPair::new(0.0, 62.0, 0.2, 0.5).is_err());
        assert!(WellPair::new(43.85, 62.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn cascade_floors_from_depths() {
        let geom = reference_geometry();
        let floors = geom.floors();
        for (f, want) in floors.iter().zip([0.0, 1.313, 1.061, 0.635]) {
            assert!((f - want).abs() < 1e-12, "{floors:?}");
        }
        assert!(floors[1] > floors[2] && floors[2] > floors[3] && floors[3] > floors[0]);

        let p = cascade_profile(&geom).unwrap();
        assert_eq!(p.segment_values().len(), 7);
        assert_eq!(p.max_value(), 1.585);
        assert_eq!(p.min_value(), 0.0);
        assert!(p.excess_integral() > 0.0);
        assert!(p.excess_integral().is_finite());
    }

    #[test]
    fn cascade_needs_deepest_first_well() {
        let mut geom = reference_geometry();
        geom.depths = [0.5, 0.272, 0.524, 0.95];
        assert!(matches!(cascade_profile(&geom), Err(Error::Geometry(_))));

        let mut geom = reference_geometry();
        geom.distances[1] = 40.0;
        let err = cascade_profile(&geom).unwrap_err().to_string();
        assert!(err.contains("pair 2-3"), "{err}");

        let mut geom = reference_geometry();
        geom.widths[2] = 40.0;
        assert!(cascade_profile(&geom).is_err());
    }

    #[test]
    fn cascade_restriction_matches_pairs() {
        let geom = reference_geometry();
        let full = cascade_profile(&geom).unwrap();
        let centers = geom.centers();
        for i in 0..3 {
            let pair = geom.pair(i).unwrap();
            let local = pair_profile(&pair);
            let a = geom.widths[i];
            let cut = full
                .restricted(centers[i] - 0.5 * a, centers[i + 1] + 0.5 * a)
                .unwrap();
            // pair profiles put the shallow well on the left
            let cut = if geom.depths[i] > geom.depths[i + 1] {
                cut.mirrored()
            } else {
                cut
            };
            let shift = geom.pair_offset(i, i + 1);
            let back = local.shifted(shift);
            assert_eq!(cut.segment_values().len(), 3);
            for (u, v) in cut.segment_values().iter().zip(back.segment_values()) {
                assert!((u - v).abs() < 1e-12, "pair {i}: {cut:?} vs {back:?}");
            }
            let (c0, c1) = cut.domain();
            let (l0, l1) = back.domain();
            assert!(((c1 - c0) - (l1 - l0)).abs() < 1e-9);
            for (u, v) in cut.breakpoints().iter().zip(back.breakpoints()) {
                assert!(((u - c0) - (v - l0)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn value_lookup_and_averages() {
        let pair = WellPair::new(10.0, 15.0, 0.2, 0.5).unwrap();
        let p = pair_profile(&pair);
        assert_eq!(p.value_at(-10.0), 0.3);
        assert_eq!(p.value_at(0.0), 0.5);
        assert_eq!(p.value_at(10.0), 0.0);
        assert_eq!(p.value_at(-13.0), f64::INFINITY);
        // straddles the barrier edge at x = 2.5 symmetrically
        assert!((p.cell_average(2.0, 3.0) - 0.25).abs() < 1e-12);
        let m = p.mirrored();
        assert_eq!(m.value_at(-10.0), 0.0);
        assert_eq!(m.mirrored(), p);
        assert_eq!(p.vertices().len(), 6);
    }
}
