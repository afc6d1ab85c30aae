//! Two-level resonance dynamics: Rabi probability, tunneling time and the
//! uncertainty-limited decay time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::PhysicalConstants;

/// Doublet produced by two coupled wells.
///
/// `e1`, `e2` and `w12` describe the uncoupled levels and their coupling.
/// When any of them is missing the doublet is treated as exactly resonant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonantPair {
    #[serde(rename = "e_plus_eV")]
    pub e_plus: f64,
    #[serde(rename = "e_minus_eV")]
    pub e_minus: f64,
    #[serde(rename = "e1_eV", default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(rename = "e2_eV", default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<f64>,
    #[serde(rename = "w12_eV", default, skip_serializing_if = "Option::is_none")]
    pub w12: Option<f64>,
}

impl ResonantPair {
    pub fn new(e_plus: f64, e_minus: f64) -> Result<Self> {
        if !(e_plus.is_finite() && e_minus.is_finite() && e_plus > e_minus) {
            return Err(Error::Domain(format!(
                "doublet needs E+ > E−, got {e_plus} and {e_minus} eV"
            )));
        }
        Ok(Self {
            e_plus,
            e_minus,
            e1: None,
            e2: None,
            w12: None,
        })
    }

    /// Doublet of known splitting centred on `center`.
    pub fn from_splitting(center: f64, splitting: f64) -> Result<Self> {
        Self::new(center + 0.5 * splitting, center - 0.5 * splitting)
    }

    pub fn with_coupling(mut self, e1: f64, e2: f64, w12: f64) -> Self {
        self.e1 = Some(e1);
        self.e2 = Some(e2);
        self.w12 = Some(w12);
        self
    }

    pub fn splitting(&self) -> f64 {
        self.e_plus - self.e_minus
    }

    /// 4|W|²/((E1−E2)² + 4|W|²), or 1 without coupling data.
    pub fn amplitude(&self) -> f64 {
        match (self.e1, self.e2, self.w12) {
            (Some(e1), Some(e2), Some(w)) => {
                let w2 = 4.0 * w * w;
                if w2 == 0.0 {
                    0.0
                } else {
                    w2 / ((e1 - e2).powi(2) + w2)
                }
            }
            _ => 1.0,
        }
    }
}

/// Probability of finding the electron in the other well after `t` seconds.
pub fn rabi_probability(t: f64, pair: &ResonantPair, consts: &PhysicalConstants) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!(
            "time must be non-negative, got {t} s"
        )));
    }
    let phase = pair.splitting() * t / (2.0 * consts.hbar_ev_s);
    Ok(pair.amplitude() * phase.sin().powi(2))
}

/// (2k+1)πħ/(E+ − E−): the k-th time the transfer probability peaks.
pub fn tunneling_time(pair: &ResonantPair, k: u32, consts: &PhysicalConstants) -> Result<f64> {
    let s = pair.splitting();
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "splitting must be positive, got {s} eV"
        )));
    }
    Ok((2 * k + 1) as f64 * PI * consts.hbar_ev_s / s)
}

/// ħ/(2ΔE), the shortest lifetime compatible with an energy gap ΔE.
pub fn decay_time(delta_e: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(Error::Domain(format!(
            "decay gap must be positive, got {delta_e} eV"
        )));
    }
    Ok(consts.hbar_ev_s / (2.0 * delta_e))
}

/// First maximum of [`rabi_probability`], located numerically: a forward
/// march until the probability turns down, then golden-section refinement.
pub fn first_maximum_time(pair: &ResonantPair, consts: &PhysicalConstants) -> Result<f64> {
    if !(pair.splitting() > 0.0) {
        return Err(Error::Domain("splitting must be positive".into()));
    }
    let p = |t: f64| rabi_probability(t, pair, consts);
    // natural time unit; the march does not assume where the peak is
    let unit = consts.hbar_ev_s / pair.splitting();
    let dt = 1e-3 * unit;
    let mut t = 0.0;
    let mut prev = p(t)?;
    loop {
        let next = p(t + dt)?;
        if next < prev {
            break;
        }
        prev = next;
        t += dt;
        if t > 1e4 * unit {
            return Err(Error::Domain("no maximum found".into()));
        }
    }
    // the peak lies in [t − dt, t + dt]
    let (mut a, mut b) = ((t - dt).max(0.0), t + dt);
    const G: f64 = 0.618_033_988_749_894_9;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let (mut fc, mut fd) = (p(c)?, p(d)?);
    while b - a > 1e-12 * unit {
        if fc > fd {
            (b, d, fd) = (d, c, fc);
            c = b - G * (b - a);
            fc = p(c)?;
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + G * (b - a);
            fd = p(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// One tunnel-then-decay step of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferStep {
    pub from_site: String,
    pub to_site: String,
    pub resonance: ResonantPair,
    #[serde(rename = "splitting_eV")]
    pub splitting: f64,
    #[serde(rename = "tunneling_time_s")]
    pub tunneling_time: f64,
    #[serde(rename = "tunneling_time_ps")]
    pub tunneling_time_ps: f64,
    /// Energy the electron relaxes to in the destination well.
    #[serde(rename = "landing_energy_eV")]
    pub landing_energy: f64,
    #[serde(rename = "decay_gap_eV")]
    pub decay_gap: f64,
    #[serde(rename = "decay_time_s")]
    pub decay_time: f64,
    pub tunneling_to_decay_ratio: f64,
}

impl TransferStep {
    pub fn new(
        from_site: impl Into<String>,
        to_site: impl Into<String>,
        resonance: ResonantPair,
        landing_energy: f64,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        let tunneling = tunneling_time(&resonance, 0, consts)?;
        let gap = resonance.e_plus - landing_energy;
        let decay = decay_time(gap, consts)?;
        Ok(Self {
            from_site: from_site.into(),
            to_site: to_site.into(),
            resonance,
            splitting: resonance.splitting(),
            tunneling_time: tunneling,
            tunneling_time_ps: tunneling * 1e12,
            landing_energy,
            decay_gap: gap,
            decay_time: decay,
            tunneling_to_decay_ratio: tunneling / decay,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata2018()
    }

    #[test]
    fn probability_examples() {
        let c = consts();
        let pair = ResonantPair::new(1.460, 1.445).unwrap();
        assert_eq!(rabi_probability(0.0, &pair, &c).unwrap(), 0.0);
        let t = PI * c.hbar_ev_s / pair.splitting();
        assert!((rabi_probability(t, &pair, &c).unwrap() - 1.0).abs() < 1e-12);
        assert!(rabi_probability(-1e-15, &pair, &c).is_err());

        let coupled = pair.with_coupling(1.45, 1.45, 0.003);
        assert_eq!(coupled.amplitude(), 1.0);
        let detuned = pair.with_coupling(1.45, 1.46, 0.005);
        assert!((detuned.amplitude() - 1e-4 / (1e-4 + 1e-4)).abs() < 1e-12);
    }

    #[test]
    fn tunneling_times_from_reported_splittings() {
        let c = consts();
        // πħ/ΔE with ħ = 6.582119569e-16 eV·s
        for (split, ps, tol) in [
            (0.015, 0.138, 0.01),
            (0.006, 0.345, 0.01),
            (0.0002, 10.3, 0.01),
        ] {
            let pair = ResonantPair::from_splitting(1.0, split).unwrap();
            let t = tunneling_time(&pair, 0, &c).unwrap() * 1e12;
            assert!((t / ps - 1.0).abs() < tol, "{split}: {t} ps vs {ps}");
        }
        let pair = ResonantPair::new(1.460, 1.445).unwrap();
        let t0 = tunneling_time(&pair, 0, &c).unwrap();
        let t1 = tunneling_time(&pair, 1, &c).unwrap();
        assert!((t1 - 3.0 * t0).abs() < 1e-15 * t1);
        assert!(ResonantPair::new(1.0, 1.0).is_err());
    }

    #[test]
    fn decay_time_examples() {
        let c = consts();
        let t = decay_time(0.131, &c).unwrap();
        assert!((t - 2.51e-15).abs() < 0.01e-15, "{t}");
        let t = decay_time(0.4258, &c).unwrap();
        assert!((t - 7.7e-16).abs() < 0.05e-16, "{t}");
        assert!(decay_time(0.0, &c).is_err());
        assert!(decay_time(-0.1, &c).is_err());
        let mut last = f64::INFINITY;
        for k in -3..4 {
            let t = decay_time(10f64.powi(k), &c).unwrap();
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn first_maximum_matches_closed_form() {
        let c = consts();
        let pair = ResonantPair::new(1.460, 1.445).unwrap();
        let scan = first_maximum_time(&pair, &c).unwrap();
        let closed = tunneling_time(&pair, 0, &c).unwrap();
        assert!((scan / closed - 1.0).abs() < 1e-6, "{scan} vs {closed}");
        let p_max = rabi_probability(scan, &pair, &c).unwrap();
        for i in 0..200 {
            let t = scan * i as f64 / 200.0;
            assert!(rabi_probability(t, &pair, &c).unwrap() <= p_max);
        }
        let faster = ResonantPair::from_splitting(1.4525, 10.0 * pair.splitting()).unwrap();
        let t10 = first_maximum_time(&faster, &c).unwrap();
        assert!((t10 * 10.0 / scan - 1.0).abs() < 1e-6);
    }

    #[test]
    fn transfer_step_bookkeeping() {
        let c = consts();
        let step = TransferStep::new(
            "P",
            "B",
            ResonantPair::new(1.460, 1.445).unwrap(),
            1.329,
            &c,
        )
        .unwrap();
        assert!((step.decay_gap - 0.131).abs() < 1e-12);
        assert!(step.tunneling_time > 0.0 && step.decay_time > 0.0);
        assert!(
            (step.tunneling_to_decay_ratio - step.tunneling_time / step.decay_time).abs() < 1e-9
        );
        assert!(
            TransferStep::new("P", "B", ResonantPair::new(1.460, 1.445).unwrap(), 1.5, &c).is_err()
        );
    }

    proptest! {
        #[test]
        fn probability_bounded(
            center in 0.01f64..2.0,
            split in 1e-5f64..0.1,
            detune in -0.05f64..0.05,
            w in 0.0f64..0.05,
            t in 0.0f64..1e-10,
        ) {
            let c = consts();
            let pair = ResonantPair::from_splitting(center, split).unwrap()
                .with_coupling(center, center + detune, w);
            let p = rabi_probability(t, &pair, &c).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn probability_periodic(split in 1e-4f64..0.1, frac in 0.0f64..1.0) {
            let c = consts();
            let pair = ResonantPair::from_splitting(1.0, split).unwrap();
            let period = 2.0 * PI * c.hbar_ev_s / pair.splitting();
            let t = frac * period;
            let a = rabi_probability(t, &pair, &c).unwrap();
            let b = rabi_probability(t + period, &pair, &c).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn time_monotone(split in 1e-5f64..0.1, k in 0u32..10) {
            let c = consts();
            let pair = ResonantPair::from_splitting(1.0, split).unwrap();
            let wider = ResonantPair::from_splitting(1.0, split * 1.5).unwrap();
            prop_assert!(tunneling_time(&pair, k + 1, &c).unwrap() > tunneling_time(&pair, k, &c).unwrap());
            prop_assert!(tunneling_time(&wider, k, &c).unwrap() < tunneling_time(&pair, k, &c).unwrap());
        }
    }
}
