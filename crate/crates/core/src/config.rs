//! Run configuration: the TOML file schema, validation with field paths, and
//! resolution into the runtime model.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::hocbf::SafetySpec;
use crate::integrator::{ControlUpdate, NominalControl, PressureProfile, SimulationConfig};
use crate::io;
use crate::material::{
    calibrate_mu_from_safe_energy, fit_mu_from_tensile_data, MaterialParams, TensileFit, DEFAULT_ETA,
};
use crate::safety_filter::InputBounds;
use crate::tube::{StretchState, TubeGeometry, TubeModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub geometry: TubeGeometry,
    #[serde(default)]
    pub safety: SafetySpec,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub safeset: SafeSetSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            material: MaterialSection::default(),
            geometry: TubeGeometry::default(),
            safety: SafetySpec::default(),
            simulation: SimulationSection::default(),
            safeset: SafeSetSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// At most one of `mu`, `lambda_crit` and `tensile_csv` selects the modulus;
/// with none set the default modulus applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    /// Shear modulus given directly, Pa.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Uniaxial stretch at which the strain energy equals `safety.w_safe`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_crit: Option<f64>,
    /// Uniaxial tensile data (`stretch,stress_pa`), relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensile_csv: Option<PathBuf>,
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_eta() -> f64 {
    DEFAULT_ETA
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialSection {
            mu: Some(MaterialParams::default().mu),
            lambda_crit: None,
            tensile_csv: None,
            eta: DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NominalSection {
    HalfSinusoid {
        amplitude: f64,
        frequency: f64,
        cutoff: f64,
    },
    Constant {
        pressure: f64,
    },
    /// Inline `[t, pressure]` pairs or a `t,pressure_pa` CSV file.
    Replay {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        samples: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
    },
}

impl Default for NominalSection {
    fn default() -> Self {
        NominalSection::HalfSinusoid {
            amplitude: 10_000.0,
            frequency: 1.0,
            cutoff: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub t_end: f64,
    pub dt: f64,
    /// `[λθ, λz, λ̇θ, λ̇z]`.
    pub initial_state: [f64; 4],
    pub filter_enabled: bool,
    pub control_update: ControlUpdate,
    /// `[lower, upper]` pressure bounds, Pa.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_bounds: Option<[f64; 2]>,
    pub nominal: NominalSection,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            t_end: 1.0,
            dt: 1e-4,
            initial_state: [1.0, 1.0, 0.0, 0.0],
            filter_enabled: true,
            control_update: ControlUpdate::default(),
            input_bounds: None,
            nominal: NominalSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafeSetSection {
    pub theta_range: [f64; 2],
    pub z_range: [f64; 2],
    pub resolution: [usize; 2],
}

impl Default for SafeSetSection {
    fn default() -> Self {
        SafeSetSection {
            theta_range: [0.5, 2.5],
            z_range: [0.5, 2.5],
            resolution: [201, 201],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Log every n-th step.
    pub decimate: usize,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            decimate: 1,
            plots: false,
        }
    }
}

/// Everything a run needs, with files loaded and the modulus resolved.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub model: TubeModel,
    pub spec: SafetySpec,
    pub simulation: SimulationConfig,
    pub safeset: SafeSetSection,
    pub output: OutputSection,
    /// Present when the modulus came from tensile data.
    pub tensile_fit: Option<TensileFit>,
}

fn check_positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            path,
            format!("must be a finite number > 0, got {v}"),
        ))
    }
}

fn check_finite(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(path, format!("must be finite, got {v}")))
    }
}

fn check_range(path: &str, r: [f64; 2]) -> Result<(), ConfigError> {
    if r[0].is_finite() && r[1].is_finite() && r[0] > 0.0 && r[1] > r[0] {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            path,
            format!("need 0 < lo < hi, got [{}, {}]", r[0], r[1]),
        ))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            file: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            file: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::from_toml_str(&text, path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configuration is always representable in TOML")
    }

    /// Checks every field without touching the file system.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }

        let m = &self.material;
        if !(m.eta.is_finite() && m.eta >= 0.0) {
            return Err(ConfigError::invalid(
                "material.eta",
                format!("must be >= 0, got {}", m.eta),
            ));
        }
        let sources = [m.mu.is_some(), m.lambda_crit.is_some(), m.tensile_csv.is_some()];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return Err(ConfigError::invalid(
                "material",
                "set at most one of mu, lambda_crit, tensile_csv",
            ));
        }
        if let Some(mu) = m.mu {
            check_positive("material.mu", mu)?;
        }
        if let Some(lc) = m.lambda_crit {
            if !(lc.is_finite() && lc > 1.0) {
                return Err(ConfigError::invalid(
                    "material.lambda_crit",
                    format!("must be > 1, got {lc}"),
                ));
            }
        }

        let g = &self.geometry;
        for (path, v) in [
            ("geometry.r_inner", g.r_inner),
            ("geometry.r_outer", g.r_outer),
            ("geometry.z_eff", g.z_eff),
            ("geometry.density", g.density),
        ] {
            check_positive(path, v)?;
        }
        if g.r_outer <= g.r_inner {
            return Err(ConfigError::invalid(
                "geometry.r_outer",
                format!("must exceed r_inner = {}, got {}", g.r_inner, g.r_outer),
            ));
        }
        if !(g.cap_height.is_finite() && g.cap_height >= 0.0) {
            return Err(ConfigError::invalid(
                "geometry.cap_height",
                format!("must be >= 0, got {}", g.cap_height),
            ));
        }

        for (path, v) in [
            ("safety.w_safe", self.safety.w_safe),
            ("safety.alpha1", self.safety.alpha1),
            ("safety.alpha2", self.safety.alpha2),
        ] {
            check_positive(path, v)?;
        }

        let s = &self.simulation;
        check_positive("simulation.t_end", s.t_end)?;
        check_positive("simulation.dt", s.dt)?;
        if s.dt >= s.t_end {
            return Err(ConfigError::invalid(
                "simulation.dt",
                format!("must be smaller than t_end = {}, got {}", s.t_end, s.dt),
            ));
        }
        let steps = (s.t_end / s.dt).round();
        if ((steps * s.dt - s.t_end) / s.t_end).abs() > 1e-9 {
            return Err(ConfigError::invalid(
                "simulation.dt",
                format!("t_end = {} is not a whole number of steps of {}", s.t_end, s.dt),
            ));
        }
        let [lt, lz, rt, rz] = s.initial_state;
        StretchState::new(lt, lz, rt, rz)
            .map_err(|e| ConfigError::invalid("simulation.initial_state", e.to_string()))?;
        if let Some([lo, hi]) = s.input_bounds {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(ConfigError::invalid(
                    "simulation.input_bounds",
                    format!("need lower <= upper, got [{lo}, {hi}]"),
                ));
            }
        }
        match &s.nominal {
            NominalSection::HalfSinusoid {
                amplitude,
                frequency,
                cutoff,
            } => {
                check_finite("simulation.nominal.amplitude", *amplitude)?;
                check_finite("simulation.nominal.frequency", *frequency)?;
                check_finite("simulation.nominal.cutoff", *cutoff)?;
            }
            NominalSection::Constant { pressure } => check_finite("simulation.nominal.pressure", *pressure)?,
            NominalSection::Replay { samples, file } => match (samples.is_empty(), file) {
                (false, None) => {
                    let pairs: Vec<(f64, f64)> = samples.iter().map(|p| (p[0], p[1])).collect();
                    let profile = PressureProfile::new(&pairs)
                        .map_err(|e| ConfigError::invalid("simulation.nominal.samples", e.to_string()))?;
                    if !profile.covers(0.0, s.t_end) {
                        return Err(ConfigError::invalid(
                            "simulation.nominal.samples",
                            format!(
                                "samples span [{}, {}] but t_end = {}",
                                profile.start(),
                                profile.end(),
                                s.t_end
                            ),
                        ));
                    }
                }
                (true, Some(_)) => {}
                _ => {
                    return Err(ConfigError::invalid(
                        "simulation.nominal",
                        "replay needs exactly one of samples, file",
                    ))
                }
            },
        }

        check_range("safeset.theta_range", self.safeset.theta_range)?;
        check_range("safeset.z_range", self.safeset.z_range)?;
        if self.safeset.resolution.iter().any(|&n| n < 2) {
            return Err(ConfigError::invalid(
                "safeset.resolution",
                format!("need at least 2 points per axis, got {:?}", self.safeset.resolution),
            ));
        }
        if self.output.decimate == 0 {
            return Err(ConfigError::invalid("output.decimate", "must be >= 1"));
        }
        Ok(())
    }

    /// Validates, loads referenced files (relative to `base_dir`) and builds
    /// the runtime objects.
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedRun, ConfigError> {
        self.validate()?;
        let m = &self.material;
        let mut tensile_fit = None;
        let mu = if let Some(mu) = m.mu {
            mu
        } else if let Some(lc) = m.lambda_crit {
            calibrate_mu_from_safe_energy(self.safety.w_safe, lc)
                .map_err(|e| ConfigError::invalid("material.lambda_crit", e.to_string()))?
        } else if let Some(csv) = &m.tensile_csv {
            let file = base_dir.join(csv);
            let samples = io::read_tensile_csv(&file)?;
            let fit = fit_mu_from_tensile_data(&samples).map_err(|e| ConfigError::Csv {
                file: file.clone(),
                message: e.to_string(),
            })?;
            tensile_fit = Some(fit);
            fit.mu
        } else {
            MaterialParams::default().mu
        };
        let material = MaterialParams::new(mu, m.eta).map_err(|e| ConfigError::invalid("material", e.to_string()))?;
        let model =
            TubeModel::new(material, self.geometry).map_err(|e| ConfigError::invalid("geometry", e.to_string()))?;

        let s = &self.simulation;
        let nominal = match &s.nominal {
            NominalSection::HalfSinusoid {
                amplitude,
                frequency,
                cutoff,
            } => NominalControl::HalfSinusoid {
                amplitude: *amplitude,
                frequency: *frequency,
                cutoff: *cutoff,
            },
            NominalSection::Constant { pressure } => NominalControl::Constant { pressure: *pressure },
            NominalSection::Replay { samples, file } => {
                let pairs = match file {
                    Some(f) => io::read_pressure_csv(&base_dir.join(f))?,
                    None => samples.iter().map(|p| (p[0], p[1])).collect(),
                };
                let profile = PressureProfile::new(&pairs)
                    .map_err(|e| ConfigError::invalid("simulation.nominal", e.to_string()))?;
                if !profile.covers(0.0, s.t_end) {
                    return Err(ConfigError::invalid(
                        "simulation.nominal",
                        format!(
                            "pressure history spans [{}, {}] but t_end = {}",
                            profile.start(),
                            profile.end(),
                            s.t_end
                        ),
                    ));
                }
                NominalControl::Replay(profile)
            }
        };
        let [lt, lz, rt, rz] = s.initial_state;
        let simulation = SimulationConfig {
            t_end: s.t_end,
            dt: s.dt,
            initial_state: StretchState::new(lt, lz, rt, rz)
                .map_err(|e| ConfigError::invalid("simulation.initial_state", e.to_string()))?,
            nominal,
            filter_enabled: s.filter_enabled,
            log_stride: self.output.decimate,
            control_update: s.control_update,
            input_bounds: s.input_bounds.map(|[lower, upper]| InputBounds { lower, upper }),
        };
        Ok(ResolvedRun {
            model,
            spec: self.safety,
            simulation,
            safeset: self.safeset.clone(),
            output: self.output.clone(),
            tensile_fit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg = RunConfig::from_toml_str(text, Path::new("test.toml"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn invalid_path(text: &str) -> String {
        match parse(text) {
            Err(ConfigError::Invalid { path, .. }) => path,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse("schema_version = 1\n").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml_string();
        assert_eq!(parse(&text).unwrap(), cfg);
    }

    #[test]
    fn field_paths_in_errors() {
        assert_eq!(
            invalid_path("schema_version = 1\n[simulation]\ndt = 2.0\n"),
            "simulation.dt"
        );
        assert_eq!(
            invalid_path("schema_version = 1\n[simulation]\ndt = 0.3\n"),
            "simulation.dt"
        );
        assert_eq!(
            invalid_path("schema_version = 1\n[material]\neta = -1.0\n"),
            "material.eta"
        );
        assert_eq!(invalid_path("schema_version = 2\n"), "schema_version");
        assert_eq!(
            invalid_path("schema_version = 1\n[material]\nmu = 1.0\nlambda_crit = 2.0\n"),
            "material"
        );
        assert_eq!(
            invalid_path("schema_version = 1\n[geometry]\nr_outer = 0.001\n"),
            "geometry.r_outer"
        );
        assert_eq!(
            invalid_path("schema_version = 1\n[output]\ndecimate = 0\n"),
            "output.decimate"
        );
        assert_eq!(
            invalid_path(
                "schema_version = 1\n[simulation.nominal]\nkind = \"replay\"\nsamples = [[0.0, 1.0], [0.5, 1.0]]\n"
            ),
            "simulation.nominal.samples"
        );
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(
            parse("schema_version = 1\n[geometry]\nradius = 1.0\n"),
            Err(ConfigError::Parse { .. })
        ));
        assert!(matches!(
            parse("[material]\nmu = 1.0\n"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn material_without_source_uses_default_modulus() {
        let cfg = parse("schema_version = 1\n[material]\neta = 10.0\n").unwrap();
        let run = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(run.model.material.mu, 7900.0);
        assert_eq!(run.model.material.eta, 10.0);
    }

    #[test]
    fn lambda_crit_calibrates_modulus() {
        let cfg = parse("schema_version = 1\n[material]\nlambda_crit = 2.0\neta = 10.0\n").unwrap();
        let run = cfg.resolve(Path::new(".")).unwrap();
        assert!((run.model.material.mu - 7900.0).abs() < 1e-9);
    }

    #[test]
    fn inline_replay_resolves() {
        let cfg = parse(
            "schema_version = 1\n[simulation]\nt_end = 0.01\n[simulation.nominal]\nkind = \"replay\"\nsamples = [[0.0, 0.0], [0.01, 100.0]]\n",
        )
        .unwrap();
        let run = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(run.simulation.nominal.at(0.005), 50.0);
    }
}
