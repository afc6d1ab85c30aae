//! Run configuration: a TOML file with `[wells]`, `[solver]`, `[oracle]`,
//! `[output]` and an optional `[constants]` section.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cascade::CascadeOptions;
use crate::eigensolver::SolverConfig;
use crate::error::{Error, Result};
use crate::oracle::FdConfig;
use crate::potential::{CascadeGeometry, CASCADE_WELLS};
use crate::quantities::{
    PhysicalConstants, CODATA_ELECTRON_MASS_KG, CODATA_EV_IN_J, CODATA_HBAR_J_S, SPEED_OF_LIGHT_M_S,
};

/// Overrides the output directory of every run.
pub const OUT_DIR_ENV: &str = "TUNNELCASCADE_OUT_DIR";

const REQUIRED: [&str; 4] = [
    "wells.labels",
    "wells.widths",
    "wells.distances",
    "wells.depths",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv, Format::Table],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub hbar_j_s: f64,
    pub electron_mass_kg: f64,
    pub ev_in_j: f64,
    pub speed_of_light: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            hbar_j_s: CODATA_HBAR_J_S,
            electron_mass_kg: CODATA_ELECTRON_MASS_KG,
            ev_in_j: CODATA_EV_IN_J,
            speed_of_light: SPEED_OF_LIGHT_M_S,
        }
    }
}

/// `[solver]`: eigensolver settings plus the cascade's resonance options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    grid_step: Option<f64>,
    refine_tol: Option<f64>,
    residual_tol: Option<f64>,
    max_levels: Option<usize>,
    resonance_window: Option<f64>,
    photon_wavelength_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WellsSection {
    labels: Option<Vec<String>>,
    widths: Option<Vec<f64>>,
    distances: Option<Vec<f64>>,
    closing_distance: Option<f64>,
    depths: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    wells: Option<WellsSection>,
    solver: Option<SolverSection>,
    oracle: Option<FdConfig>,
    output: Option<OutputConfig>,
    constants: Option<ConstantsConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wells: CascadeGeometry,
    pub solver: SolverConfig,
    pub cascade: CascadeOptions,
    pub oracle: FdConfig,
    pub output: OutputConfig,
    pub constants: Option<ConstantsConfig>,
}

fn fixed<T: Clone, const N: usize>(key: &str, v: Vec<T>) -> Result<[T; N]> {
    let n = v.len();
    v.try_into()
        .map_err(|_| Error::Config(format!("{key}: expected {N} values, got {n}")))
}

/// Parses and validates a configuration. Defaults fill every optional key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
    let wells = raw.wells.unwrap_or(WellsSection {
        labels: None,
        widths: None,
        distances: None,
        closing_distance: None,
        depths: None,
    });
    let present = [
        wells.labels.is_some(),
        wells.widths.is_some(),
        wells.distances.is_some(),
        wells.depths.is_some(),
    ];
    let missing: Vec<&str> = REQUIRED
        .iter()
        .zip(present)
        .filter(|(_, p)| !p)
        .map(|(k, _)| *k)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "missing required keys: {}",
            missing.join(", ")
        )));
    }
    let geometry = CascadeGeometry {
        labels: fixed::<_, CASCADE_WELLS>("wells.labels", wells.labels.unwrap_or_default())?,
        widths: fixed::<_, CASCADE_WELLS>("wells.widths", wells.widths.unwrap_or_default())?,
        distances: fixed::<_, { CASCADE_WELLS - 1 }>(
            "wells.distances",
            wells.distances.unwrap_or_default(),
        )?,
        closing_distance: wells.closing_distance,
        depths: fixed::<_, CASCADE_WELLS>("wells.depths", wells.depths.unwrap_or_default())?,
    };
    for (i, label) in geometry.labels.iter().enumerate() {
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Config(format!(
                "wells.labels[{i}]: labels must be non-empty ASCII letters, digits or '_', got {label:?}"
            )));
        }
    }

    let s = raw.solver;
    let solver_defaults = SolverConfig::default();
    let cascade_defaults = CascadeOptions::default();
    let solver = SolverConfig {
        grid_step: s
            .and_then(|s| s.grid_step)
            .unwrap_or(solver_defaults.grid_step),
        refine_tol: s
            .and_then(|s| s.refine_tol)
            .unwrap_or(solver_defaults.refine_tol),
        residual_tol: s
            .and_then(|s| s.residual_tol)
            .unwrap_or(solver_defaults.residual_tol),
        max_levels: s.and_then(|s| s.max_levels).or(solver_defaults.max_levels),
    };
    let cascade = CascadeOptions {
        resonance_window: s
            .and_then(|s| s.resonance_window)
            .unwrap_or(cascade_defaults.resonance_window),
        photon_wavelength_nm: s
            .and_then(|s| s.photon_wavelength_nm)
            .unwrap_or(cascade_defaults.photon_wavelength_nm),
    };
    let config = RunConfig {
        wells: geometry,
        solver,
        cascade,
        oracle: raw.oracle.unwrap_or_default(),
        output: raw.output.unwrap_or_default(),
        constants: raw.constants,
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.wells.validate()?;
        self.solver.validate()?;
        self.cascade.validate()?;
        self.oracle.validate()?;
        if self.output.formats.is_empty() {
            return Err(Error::Config(
                "output.formats must name at least one format".into(),
            ));
        }
        self.physical_constants()?;
        Ok(())
    }

    pub fn physical_constants(&self) -> Result<PhysicalConstants> {
        match self.constants {
            None => Ok(PhysicalConstants::codata2018()),
            Some(c) => PhysicalConstants::from_si(
                c.hbar_j_s,
                c.electron_mass_kg,
                c.ev_in_j,
                c.speed_of_light,
            ),
        }
    }

    /// Output directory, with the environment override applied.
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }

    /// Serialises back to the file format; `parse_config` of the result
    /// returns an equal config.
    pub fn to_toml(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            wells: WellsSection,
            solver: SolverSection,
            oracle: &'a FdConfig,
            output: &'a OutputConfig,
            #[serde(skip_serializing_if = "Option::is_none")]
            constants: Option<ConstantsConfig>,
        }
        let w = &self.wells;
        let out = Out {
            wells: WellsSection {
                labels: Some(w.labels.to_vec()),
                widths: Some(w.widths.to_vec()),
                distances: Some(w.distances.to_vec()),
                closing_distance: w.closing_distance,
                depths: Some(w.depths.to_vec()),
            },
            solver: SolverSection {
                grid_step: Some(self.solver.grid_step),
                refine_tol: Some(self.solver.refine_tol),
                residual_tol: Some(self.solver.residual_tol),
                max_levels: self.solver.max_levels,
                resonance_window: Some(self.cascade.resonance_window),
                photon_wavelength_nm: Some(self.cascade.photon_wavelength_nm),
            },
            oracle: &self.oracle,
            output: &self.output,
            constants: self.constants,
        };
        toml::to_string(&out).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[wells]
labels = ["P", "B", "H", "Q"]
widths = [43.85, 43.85, 43.85, 43.85]
distances = [60.19, 60.0, 60.0]
depths = [1.585, 0.272, 0.524, 0.95]
"#;

    #[test]
    fn defaults_fill_optional_sections() {
        let c = parse_config(BASIC).unwrap();
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.cascade, CascadeOptions::default());
        assert_eq!(c.oracle, FdConfig::default());
        assert_eq!(c.output, OutputConfig::default());
        assert_eq!(c.wells.closing_distance, None);
        assert_eq!(
            c.physical_constants().unwrap(),
            PhysicalConstants::codata2018()
        );
    }

    #[test]
    fn empty_file_lists_every_required_key() {
        let msg = parse_config("").unwrap_err().to_string();
        for key in REQUIRED {
            assert!(msg.contains(key), "{msg}");
        }
        let msg = parse_config("[wells]\nlabels = [\"a\",\"b\",\"c\",\"d\"]\n")
            .unwrap_err()
            .to_string();
        assert!(
            !msg.contains("wells.labels") && msg.contains("wells.depths"),
            "{msg}"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for extra in [
            "[solver]\ngrid_stp = 1e-5\n",
            "[extra]\nx = 1\n",
            "[oracle]\npoints = 3\n",
        ] {
            let err = parse_config(&format!("{BASIC}{extra}")).unwrap_err();
            assert!(err.is_config(), "{err}");
        }
        let text = BASIC.replace("depths =", "colour = 1\ndepths =");
        assert!(parse_config(&text)
            .unwrap_err()
            .to_string()
            .contains("colour"));
    }

    #[test]
    fn geometry_errors_are_config_errors() {
        let text = BASIC.replace("[60.19, 60.0, 60.0]", "[40.0, 60.0, 60.0]");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)), "{err}");
        let text = BASIC.replace("[60.19, 60.0, 60.0]", "[60.0, 60.0]");
        assert!(parse_config(&text)
            .unwrap_err()
            .to_string()
            .contains("wells.distances"));
        let text = format!("{BASIC}[solver]\nrefine_tol = -1.0\n");
        assert!(parse_config(&text).unwrap_err().is_config());
        let text = format!("{BASIC}[constants]\nhbar_j_s = 0.0\n");
        assert!(parse_config(&text).unwrap_err().is_config());
    }

    #[test]
    fn round_trip() {
        let text = format!(
            "{}closing_distance = 61.0\n[solver]\nmax_levels = 12\n[output]\ndir = \"x\"\nformats = [\"json\"]\n[constants]\nhbar_j_s = 1.05e-34\n",
            BASIC
        );
        let c = parse_config(&text).unwrap();
        assert_eq!(c.wells.closing_distance, Some(61.0));
        let again = parse_config(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
