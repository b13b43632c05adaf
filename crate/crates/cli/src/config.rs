//! Run configuration: structured TOML with explicit keys, unknown keys are
//! errors, and validation reports every violated field at once.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use muskat_core::models::{EvalOptions, ModelKind, ModelSpec, DEFAULT_DENSITY_JUMP};
use muskat_core::realline::{LineInterface, QuadratureSettings};
use muskat_core::runner::{RunSetup, Scheme, SimState};
use muskat_core::spectral::PeriodicField;
use muskat_core::timestep::{StepController, Stepping};
use serde::{Deserialize, Serialize};

use crate::snapshot;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config violations:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub backend: BackendKind,
    /// Collocation nodes: n for the spectral backend (power of two), N for
    /// the line backend.
    pub resolution: usize,
    /// Domain half-width, line backend only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    pub t_end: f64,
    /// Record cadence in accepted steps.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// 2/3-rule filter on the spectral nonlinear products.
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Relax the admissibility guard and arm the touching-point tracker.
    #[serde(default)]
    pub boundary_touching: bool,
    /// Bound checks evaluated after the run.
    #[serde(default)]
    pub checks: Vec<String>,
    pub model: ModelConfig,
    pub initial_data: InitialData,
    pub controller: ControllerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
}

fn default_sample_every() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Spectral,
    Realline,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKindConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_jump: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viscosity_eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKindConfig {
    ConfinedModel,
    DeepModel,
    DeepModelDerivative,
    DeepMuskat,
    ConfinedMuskat,
}

impl ModelKindConfig {
    pub fn to_kind(self) -> ModelKind {
        match self {
            ModelKindConfig::ConfinedModel => ModelKind::ConfinedModel,
            ModelKindConfig::DeepModel => ModelKind::DeepModel,
            ModelKindConfig::DeepModelDerivative => ModelKind::DeepModelDerivative,
            ModelKindConfig::DeepMuskat => ModelKind::DeepMuskat,
            ModelKindConfig::ConfinedMuskat => ModelKind::ConfinedMuskat,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "family", rename_all = "snake_case")]
pub enum InitialData {
    /// a cos(x) on the torus.
    CosAmplitude { a: f64 },
    /// a cos(x) + l - a on the torus: touches the wall at x = 0.
    BoundaryFamily { a: f64 },
    /// amplitude * exp(-x^exponent) on the line.
    Caso1 { amplitude: f64, exponent: u32 },
    /// Samples loaded from a snapshot file.
    CustomSamples { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub scheme: SchemeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_init: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeConfig {
    Rk4,
    Rk45,
    Duhamel,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_halfwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_tol: Option<f64>,
}

pub const KNOWN_CHECKS: &[&str] = &[
    "decay_linf_torus",
    "decay_hhalf",
    "energy_sigma",
    "decay_linf_line",
    "entropy_deep",
    "referee_energy",
];

impl SimConfig {
    pub fn from_path(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_with_overrides(&text, overrides)
    }

    pub fn from_str_with_overrides(
        text: &str,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut value: toml::Value = text
            .parse()
            .map_err(|e| ConfigError::Parse(format!("{e}")))?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let cfg: SimConfig = value
            .try_into()
            .map_err(|e| ConfigError::Parse(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every violated field, collected in one pass.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut bad = Vec::new();
        let kind = self.model.kind.to_kind();

        match self.backend {
            BackendKind::Spectral => {
                if !self.resolution.is_power_of_two() || self.resolution < 8 {
                    bad.push(format!(
                        "resolution: {} must be a power of two >= 8 on the spectral backend",
                        self.resolution
                    ));
                }
                if self.half_width.is_some() {
                    bad.push("half_width: only meaningful for the realline backend".into());
                }
                if !matches!(
                    kind,
                    ModelKind::ConfinedModel | ModelKind::DeepModel | ModelKind::DeepModelDerivative
                ) {
                    bad.push(format!(
                        "model.kind: {} cannot run on the spectral backend",
                        kind.as_str()
                    ));
                }
            }
            BackendKind::Realline => {
                if self.resolution < 8 {
                    bad.push(format!(
                        "resolution: {} must be at least 8 on the realline backend",
                        self.resolution
                    ));
                }
                match self.half_width {
                    Some(l) if l > 0.0 => {}
                    Some(l) => bad.push(format!("half_width: {l} must be positive")),
                    None => bad.push("half_width: required for the realline backend".into()),
                }
                if !matches!(
                    kind,
                    ModelKind::DeepMuskat | ModelKind::ConfinedMuskat | ModelKind::ConfinedModel
                ) {
                    bad.push(format!(
                        "model.kind: {} cannot run on the realline backend",
                        kind.as_str()
                    ));
                }
            }
        }

        if !(self.t_end >= 0.0) {
            bad.push(format!("t_end: {} must be >= 0", self.t_end));
        }
        if self.sample_every == 0 {
            bad.push("sample_every: must be at least 1".into());
        }
        if let Err(e) = self.model_spec().validate() {
            bad.push(format!("model: {e}"));
        }
        if self.boundary_touching && kind != ModelKind::ConfinedModel {
            bad.push("boundary_touching: only the confined model supports wall contact".into());
        }

        match &self.initial_data {
            InitialData::CosAmplitude { a } => {
                if self.backend != BackendKind::Spectral {
                    bad.push("initial_data: cos_amplitude lives on the spectral backend".into());
                }
                if !a.is_finite() {
                    bad.push("initial_data.a: must be finite".into());
                }
            }
            InitialData::BoundaryFamily { a } => {
                if self.backend != BackendKind::Spectral {
                    bad.push("initial_data: boundary_family lives on the spectral backend".into());
                }
                let l = self.model.depth_l.unwrap_or(FRAC_PI_2);
                if !(*a > 0.0 && *a < l) {
                    bad.push(format!("initial_data.a: {a} must lie in (0, depth_l)"));
                }
                if !self.boundary_touching {
                    bad.push(
                        "initial_data: boundary_family requires boundary_touching = true".into(),
                    );
                }
            }
            InitialData::Caso1 { amplitude, exponent } => {
                if self.backend != BackendKind::Realline {
                    bad.push("initial_data: caso1 lives on the realline backend".into());
                }
                if !amplitude.is_finite() {
                    bad.push("initial_data.amplitude: must be finite".into());
                }
                if *exponent == 0 || exponent % 2 != 0 {
                    bad.push(format!(
                        "initial_data.exponent: {exponent} must be a positive even integer"
                    ));
                }
            }
            InitialData::CustomSamples { path } => {
                if !path.exists() {
                    bad.push(format!("initial_data.path: {} not found", path.display()));
                }
            }
        }

        match self.controller.scheme {
            SchemeConfig::Rk4 | SchemeConfig::Duhamel => {
                if self.controller.dt.is_none() {
                    bad.push("controller.dt: required for fixed-step schemes".into());
                }
                for (name, v) in [
                    ("tol_rel", self.controller.tol_rel),
                    ("tol_abs", self.controller.tol_abs),
                ] {
                    if v.is_some() {
                        bad.push(format!(
                            "controller.{name}: only meaningful for the rk45 scheme"
                        ));
                    }
                }
            }
            SchemeConfig::Rk45 => {
                if self.controller.dt.is_some() {
                    bad.push("controller.dt: fixed step not used by rk45".into());
                }
            }
        }
        if self.controller.scheme == SchemeConfig::Duhamel && kind != ModelKind::ConfinedModel {
            bad.push("controller.scheme: duhamel only integrates the confined model".into());
        }

        for name in &self.checks {
            if !KNOWN_CHECKS.contains(&name.as_str()) {
                bad.push(format!(
                    "checks: unknown check '{name}' (known: {})",
                    KNOWN_CHECKS.join(", ")
                ));
            }
        }
        let has = |n: &str| self.checks.iter().any(|c| c == n);
        if (has("decay_hhalf") || has("energy_sigma") || has("decay_linf_torus"))
            && self.model.depth_l.is_none()
            && kind != ModelKind::ConfinedMuskat
        {
            bad.push("checks: the decay/energy checks need a finite depth model".into());
        }
        if has("decay_linf_line") && self.backend != BackendKind::Realline {
            bad.push("checks: decay_linf_line needs the realline backend".into());
        }
        if has("entropy_deep") && kind != ModelKind::DeepModelDerivative {
            bad.push("checks: entropy_deep needs the deep_model_derivative run".into());
        }

        if self.quadrature.is_some() && self.backend != BackendKind::Realline {
            bad.push("quadrature: only meaningful for the realline backend".into());
        }

        if bad.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(bad))
        }
    }

    pub fn model_spec(&self) -> ModelSpec {
        let kind = self.model.kind.to_kind();
        let depth_l = match kind {
            ModelKind::ConfinedMuskat => Some(self.model.depth_l.unwrap_or(FRAC_PI_2)),
            _ => self.model.depth_l,
        };
        ModelSpec {
            kind,
            depth_l,
            density_jump: self.model.density_jump.unwrap_or(DEFAULT_DENSITY_JUMP),
            viscosity_eps: self.model.viscosity_eps.unwrap_or(0.0),
        }
    }

    pub fn controller(&self) -> StepController {
        let c = &self.controller;
        let stepping = match c.scheme {
            SchemeConfig::Rk4 | SchemeConfig::Duhamel => Stepping::Fixed {
                dt: c.dt.unwrap_or(1e-3),
            },
            SchemeConfig::Rk45 => {
                let dt_min = c.dt_min.unwrap_or(1e-12);
                let dt_max = c.dt_max.unwrap_or(0.1);
                Stepping::Adaptive {
                    tol_rel: c.tol_rel.unwrap_or(1e-8),
                    tol_abs: c.tol_abs.unwrap_or(1e-10),
                    dt_min,
                    dt_max,
                    dt_init: c.dt_init.unwrap_or(1e-3).clamp(dt_min, dt_max),
                }
            }
        };
        StepController {
            stepping,
            t_end: self.t_end,
            safety: self.controller.safety.unwrap_or(0.9),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self.controller.scheme {
            SchemeConfig::Rk4 => Scheme::Rk4,
            SchemeConfig::Rk45 => Scheme::Rk45,
            SchemeConfig::Duhamel => Scheme::Duhamel,
        }
    }

    /// Assemble the core run setup plus the initial state.
    pub fn build(&self) -> Result<(RunSetup, SimState), ConfigError> {
        self.validate()?;
        let initial = self.initial_state()?;
        let quad = match (&initial, self.backend) {
            (SimState::Line(itf), BackendKind::Realline) => {
                let defaults = QuadratureSettings::for_interface(itf);
                let q = self.quadrature.as_ref();
                Some(QuadratureSettings {
                    abs_tol: q.and_then(|q| q.abs_tol).unwrap_or(defaults.abs_tol),
                    singular_halfwidth: q
                        .and_then(|q| q.singular_halfwidth)
                        .unwrap_or(defaults.singular_halfwidth),
                    far_cutoff: q.and_then(|q| q.far_cutoff).unwrap_or(defaults.far_cutoff),
                    truncation_tol: q
                        .and_then(|q| q.truncation_tol)
                        .unwrap_or(defaults.truncation_tol),
                })
            }
            _ => None,
        };
        let setup = RunSetup {
            model: self.model_spec(),
            opts: EvalOptions {
                dealias: self.dealias,
                allow_boundary_touch: self.boundary_touching,
            },
            quad,
            scheme: self.scheme(),
            controller: self.controller(),
            sample_every: self.sample_every,
            track_touch: self.boundary_touching,
        };
        Ok((setup, initial))
    }

    pub fn initial_state(&self) -> Result<SimState, ConfigError> {
        let bad = |msg: String| ConfigError::Invalid(vec![msg]);
        match (&self.initial_data, self.backend) {
            (InitialData::CosAmplitude { a }, BackendKind::Spectral) => {
                let f = PeriodicField::from_fn(self.resolution, "f", |x| a * x.cos())
                    .map_err(|e| bad(format!("initial_data: {e}")))?;
                Ok(SimState::Spectral(f))
            }
            (InitialData::BoundaryFamily { a }, BackendKind::Spectral) => {
                let l = self.model.depth_l.unwrap_or(FRAC_PI_2);
                let f = PeriodicField::from_fn(self.resolution, "f", |x| a * x.cos() + (l - a))
                    .map_err(|e| bad(format!("initial_data: {e}")))?;
                Ok(SimState::Spectral(f))
            }
            (InitialData::Caso1 { amplitude, exponent }, BackendKind::Realline) => {
                let l = self.half_width.unwrap();
                let p = *exponent as i32;
                let itf = LineInterface::uniform(l, self.resolution, |x| {
                    amplitude * (-x.powi(p)).exp()
                })
                .map_err(|e| bad(format!("initial_data: {e}")))?;
                Ok(SimState::Line(itf))
            }
            (InitialData::CustomSamples { path }, backend) => {
                let snap = snapshot::load_snapshot(path)
                    .map_err(|e| bad(format!("initial_data: {e}")))?;
                match (&snap.state, backend) {
                    (SimState::Spectral(f), BackendKind::Spectral) => {
                        if f.n() != self.resolution {
                            return Err(bad(format!(
                                "initial_data: snapshot resolution {} != config resolution {}",
                                f.n(),
                                self.resolution
                            )));
                        }
                    }
                    (SimState::Line(itf), BackendKind::Realline) => {
                        if itf.len() != self.resolution {
                            return Err(bad(format!(
                                "initial_data: snapshot resolution {} != config resolution {}",
                                itf.len(),
                                self.resolution
                            )));
                        }
                        let lw = self.half_width.unwrap();
                        if (itf.half_width() - lw).abs() > 1e-12 * lw {
                            return Err(bad(format!(
                                "initial_data: snapshot half_width {} != config half_width {lw}",
                                itf.half_width()
                            )));
                        }
                    }
                    _ => {
                        return Err(bad(
                            "initial_data: snapshot backend does not match the config backend"
                                .into(),
                        ))
                    }
                }
                Ok(snap.state)
            }
            _ => Err(bad("initial_data: family does not match the backend".into())),
        }
    }
}

/// Apply one `--override key=value` onto the raw TOML tree. Dotted keys
/// navigate tables; the value is parsed as a TOML literal, falling back to
/// a plain string.
fn apply_override(root: &mut toml::Value, key: &str, raw: &str) -> Result<(), ConfigError> {
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(t) => t["v"].clone(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut cursor = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        cursor = cursor
            .as_table_mut()
            .ok_or_else(|| ConfigError::Parse(format!("override {key}: {part} is not a table")))?
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    cursor
        .as_table_mut()
        .ok_or_else(|| ConfigError::Parse(format!("override {key}: not a table")))?
        .insert(parts.last().unwrap().to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
backend = "spectral"
resolution = 256
t_end = 0.5
sample_every = 2
checks = ["decay_hhalf"]

[model]
kind = "confined_model"
depth_l = 1.5707963267948966

[initial_data]
family = "cos_amplitude"
a = 0.3

[controller]
scheme = "rk45"
tol_rel = 1e-8
tol_abs = 1e-10
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = SimConfig::from_str_with_overrides(BASE, &[]).unwrap();
        let (setup, state) = cfg.build().unwrap();
        assert_eq!(state.len(), 256);
        assert_eq!(setup.sample_every, 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BASE}\nbogus_key = 1\n");
        assert!(SimConfig::from_str_with_overrides(&text, &[]).is_err());
    }

    #[test]
    fn all_violations_reported_together() {
        let text = r#"
backend = "spectral"
resolution = 100
t_end = -1.0
sample_every = 0

[model]
kind = "deep_muskat"

[initial_data]
family = "caso1"
amplitude = 1.0
exponent = 6

[controller]
scheme = "rk4"
"#;
        match SimConfig::from_str_with_overrides(text, &[]) {
            Err(ConfigError::Invalid(violations)) => {
                assert!(violations.len() >= 5, "got {violations:?}");
            }
            other => panic!("expected a violation list, got {other:?}"),
        }
    }

    #[test]
    fn overrides_change_nested_fields() {
        let cfg = SimConfig::from_str_with_overrides(
            BASE,
            &[
                ("t_end".into(), "1.5".into()),
                ("initial_data.a".into(), "0.4".into()),
                ("controller.tol_rel".into(), "1e-6".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.t_end, 1.5);
        assert!(matches!(cfg.initial_data, InitialData::CosAmplitude { a } if a == 0.4));
        assert_eq!(cfg.controller.tol_rel, Some(1e-6));
    }

    #[test]
    fn boundary_family_needs_the_flag() {
        let text = BASE
            .replace("family = \"cos_amplitude\"\na = 0.3", "family = \"boundary_family\"\na = 0.1");
        assert!(SimConfig::from_str_with_overrides(&text, &[]).is_err());
        let cfg = SimConfig::from_str_with_overrides(
            &text,
            &[("boundary_touching".into(), "true".into())],
        )
        .unwrap();
        assert!(cfg.boundary_touching);
    }
}
