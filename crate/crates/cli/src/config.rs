//! JSON scenario configuration.
//!
//! A document names a `scenario` and optionally `units`, `system`,
//! `zeeman`, `medium`, `grid`, `tolerances`, `doppler`, `output_dir`, one
//! section per scenario and a flat `overrides` map of dotted paths
//! (`"system.delta": 0.05`). Unknown keys are rejected everywhere.
//!
//! In `gamma_units` (the default) every rate is in units of the optical
//! dephasing rate `Γ = 3γ/2 = 1` and times in `1/Γ`. In `si` rates are in
//! rad/s and times in seconds; `system.gamma` is then required and a
//! `zeeman` section may supply the field-induced shifts. Lengths are in cm
//! and densities in cm⁻³ in both systems.

use std::collections::BTreeMap;

use faraday_core::doppler::DopplerConfig;
use faraday_core::evolution::{TimeGrid, Tolerances};
use faraday_core::observables::TimeOrigin;
use faraday_core::params::{zeeman_shifts, MediumParams, SystemParams, ZeemanParams, GAMMA_UNITS_GAMMA};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fig2,
    Rotation,
    SweepB,
    CrossMod,
    RegimeCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Rotation => "rotation",
            Scenario::SweepB => "sweep_b",
            Scenario::CrossMod => "cross_mod",
            Scenario::RegimeCheck => "regime_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    GammaUnits,
    Si,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    gamma: Option<f64>,
    gamma0: Option<f64>,
    omega_c: Option<f64>,
    omega_p: Option<f64>,
    phi1: Option<f64>,
    phi2: Option<f64>,
    delta: Option<f64>,
    delta0: Option<f64>,
    delta_c: Option<f64>,
    delta_1: Option<f64>,
    delta_2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZeeman {
    g_lande: f64,
    #[serde(default)]
    g0: f64,
    #[serde(default)]
    m0: i32,
    b_field: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMedium {
    number_density: f64,
    cell_length: f64,
    cross_section: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_start: Option<f64>,
    t_end: Option<f64>,
    sample_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoppler {
    doppler_width: Option<f64>,
    quadrature_points: Option<usize>,
    enabled: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFig2 {
    deltas: Option<Vec<f64>>,
    asymmetric: Option<bool>,
    asymmetric_delta: Option<f64>,
    asymmetric_delta0: Option<f64>,
    fit_start: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRotation {
    n_slices: Option<usize>,
    time_origin: Option<TimeOrigin>,
    fit_start: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    deltas: Option<Vec<f64>>,
    b_fields: Option<Vec<f64>>,
    fit_start: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrossMod {
    omega_2_sq: Option<Vec<f64>>,
    time: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Scenario,
    #[serde(default)]
    units: Units,
    #[serde(default)]
    system: RawSystem,
    zeeman: Option<RawZeeman>,
    medium: Option<RawMedium>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    doppler: RawDoppler,
    output_dir: Option<String>,
    #[serde(default)]
    fig2: RawFig2,
    #[serde(default)]
    rotation: RawRotation,
    #[serde(default)]
    sweep_b: RawSweep,
    #[serde(default)]
    cross_mod: RawCrossMod,
}

/// The Fig. 2 dotted-line run: coupling detuned by `delta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymmetricCase {
    pub delta: f64,
    pub delta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Settings {
    pub deltas: Vec<f64>,
    pub asymmetric: Option<AsymmetricCase>,
    /// Fits use samples with `t ≥ fit_start`.
    pub fit_start: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSettings {
    pub n_slices: usize,
    pub time_origin: TimeOrigin,
    pub fit_start: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub b_field: Option<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub points: Vec<SweepPoint>,
    pub fit_start: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossModSettings {
    pub omega_2_sq: Vec<f64>,
    /// Time at which the intensity dependence is sampled.
    pub time: f64,
}

/// Fully resolved configuration: every default filled in and every derived
/// quantity computed. Self-contained, so a run can be repeated from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub units: Units,
    pub system: SystemParams,
    pub zeeman: Option<ZeemanParams>,
    pub medium: Option<MediumParams>,
    pub grid: TimeGrid,
    pub tolerances: Tolerances,
    pub doppler: DopplerConfig,
    pub output_dir: String,
    pub fig2: Fig2Settings,
    pub rotation: RotationSettings,
    pub sweep_b: SweepSettings,
    pub cross_mod: CrossModSettings,
}

/// Splits `key=value`; the value is read as JSON when possible and as a
/// string otherwise.
pub fn parse_override(arg: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = arg.split_once('=').ok_or_else(|| CliError::Override(arg.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Override(arg.to_string()));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn set_path(doc: &mut Map<String, Value>, key: &str, value: Value) -> Result<(), CliError> {
    let mut parts = key.split('.').peekable();
    let mut node = doc;
    let mut walked = String::new();
    while let Some(part) = parts.next() {
        if !walked.is_empty() {
            walked.push('.');
        }
        walked.push_str(part);
        if parts.peek().is_none() {
            node.insert(part.to_string(), value);
            return Ok(());
        }
        let child = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        node = child
            .as_object_mut()
            .ok_or_else(|| CliError::schema(walked.clone(), "cannot override inside a non-object value"))?;
    }
    Ok(())
}

fn path_string(path: &serde_path_to_error::Path) -> String {
    let s = path.to_string();
    if s == "." {
        String::new()
    } else {
        s
    }
}

fn join(parent: &str, child: &str) -> String {
    if parent.is_empty() {
        child.to_string()
    } else {
        format!("{parent}.{child}")
    }
}

fn backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn classify(err: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let parent = path_string(err.path());
    let message = err.inner().to_string();
    if message.starts_with("unknown field") {
        // the path already ends at the offending key
        let field = backticked(&message).unwrap_or("?");
        let path = if parent == field || parent.ends_with(&format!(".{field}")) {
            parent
        } else {
            join(&parent, field)
        };
        return CliError::UnknownKey { path };
    }
    if message.starts_with("missing field") {
        let field = backticked(&message).unwrap_or("?");
        return CliError::schema(join(&parent, field), "missing required field");
    }
    let path = if parent.is_empty() {
        "<document>".to_string()
    } else {
        parent
    };
    CliError::schema(path, message)
}

/// Parses a document, applies its `overrides` map and then `extra`
/// overrides (later wins), and resolves defaults. A `scenario` argument
/// fills in the document's `scenario` and must agree with it when both are
/// given.
pub fn parse_config(
    text: &str,
    scenario: Option<Scenario>,
    extra: &[(String, Value)],
) -> Result<ScenarioConfig, CliError> {
    let mut doc = if text.trim().is_empty() {
        Map::new()
    } else {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(m)) => m,
            Ok(_) => return Err(CliError::schema("<document>", "expected a JSON object")),
            Err(e) => return Err(CliError::schema("<document>", e.to_string())),
        }
    };
    let mut overrides: Vec<(String, Value)> = Vec::new();
    if let Some(o) = doc.remove("overrides") {
        let map: BTreeMap<String, Value> =
            serde_json::from_value(o).map_err(|e| CliError::schema("overrides", e.to_string()))?;
        overrides.extend(map);
    }
    overrides.extend(extra.iter().cloned());
    for (key, value) in overrides {
        set_path(&mut doc, &key, value)?;
    }
    if let Some(sc) = scenario {
        let name = Value::String(sc.name().to_string());
        match doc.get("scenario") {
            None => {
                doc.insert("scenario".into(), name);
            }
            Some(v) if *v == name => {}
            Some(v) => {
                return Err(CliError::schema(
                    "scenario",
                    format!("document names {v} but the command runs {}", sc.name()),
                ))
            }
        }
    }
    let raw: RawConfig = serde_path_to_error::deserialize(Value::Object(doc)).map_err(classify)?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ScenarioConfig, CliError> {
    let s = &raw.system;
    let gamma = match (raw.units, s.gamma) {
        (Units::GammaUnits, None) => GAMMA_UNITS_GAMMA,
        (Units::GammaUnits, Some(g)) => {
            if (1.5 * g - 1.0).abs() > 1e-12 {
                return Err(CliError::Unit(format!(
                    "gamma_units fixes Γ = 3γ/2 = 1, so system.gamma must be 2/3 (got {g})"
                )));
            }
            g
        }
        (Units::Si, None) => return Err(CliError::schema("system.gamma", "required when units = si")),
        (Units::Si, Some(g)) => g,
    };
    let big_gamma = 1.5 * gamma;

    let zeeman = match &raw.zeeman {
        None => None,
        Some(_) if raw.units == Units::GammaUnits => {
            return Err(CliError::Unit(
                "a zeeman section gives shifts in rad/s and needs units = si".into(),
            ))
        }
        Some(z) => Some(ZeemanParams::new(z.g_lande, z.g0, z.m0, z.b_field).context(|| "zeeman".into())?),
    };
    let (delta, delta0) = match (zeeman.as_ref().map(zeeman_shifts), s.delta) {
        (Some(_), Some(_)) => {
            return Err(CliError::schema(
                "system.delta",
                "given both directly and through the zeeman section",
            ))
        }
        (Some((d, d0)), None) => (d, s.delta0.unwrap_or(d0)),
        (None, d) => (d.unwrap_or(0.0), s.delta0.unwrap_or(0.0)),
    };
    let explicit_delta = s.delta.is_some() || zeeman.is_some();

    let doppler = DopplerConfig {
        doppler_width: raw.doppler.doppler_width.unwrap_or(0.0),
        quadrature_points: raw
            .doppler
            .quadrature_points
            .unwrap_or(faraday_core::doppler::DEFAULT_POINTS),
        enabled: raw
            .doppler
            .enabled
            .unwrap_or(raw.doppler.doppler_width.is_some_and(|w| w > 0.0)),
    };
    doppler.validate().context(|| "doppler".into())?;

    let mut system = SystemParams::symmetric(
        gamma,
        s.gamma0.unwrap_or(1e-4 * big_gamma),
        s.omega_c.unwrap_or(big_gamma),
        s.omega_p.unwrap_or(0.3 * big_gamma),
        delta,
    )
    .context(|| "system".into())?
    .with_delta0(delta0)
    .with_coupling_detuning(s.delta_c.unwrap_or(0.0))
    .with_phases(s.phi1.unwrap_or(0.0), s.phi2.unwrap_or(0.0))
    .with_doppler_width(if doppler.enabled { doppler.doppler_width } else { 0.0 });
    if s.delta_1.is_some() || s.delta_2.is_some() {
        system = system.with_probe_detunings(s.delta_1.unwrap_or(system.delta_1), s.delta_2.unwrap_or(system.delta_2));
    }
    system.validate().context(|| "system".into())?;

    let medium = match &raw.medium {
        None => None,
        Some(m) => {
            Some(MediumParams::new(m.number_density, m.cell_length, m.cross_section).context(|| "medium".into())?)
        }
    };
    let needs_medium = matches!(raw.scenario, Scenario::Rotation | Scenario::CrossMod);
    if needs_medium && medium.is_none() {
        return Err(CliError::schema(
            "medium",
            format!("required for scenario {}", raw.scenario.name()),
        ));
    }

    let grid = TimeGrid::new(
        raw.grid.t_start.unwrap_or(0.0),
        raw.grid.t_end.unwrap_or(400.0 / big_gamma),
        raw.grid.sample_count.unwrap_or(4000),
    )
    .context(|| "grid".into())?;
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        rel_tol: raw.tolerances.rel_tol.unwrap_or(defaults.rel_tol),
        abs_tol: raw.tolerances.abs_tol.unwrap_or(defaults.abs_tol),
    };
    tolerances.validate().context(|| "tolerances".into())?;

    let fig2 = Fig2Settings {
        deltas: match &raw.fig2.deltas {
            Some(d) => d.clone(),
            None if explicit_delta => vec![delta],
            None => vec![0.0, 0.03 * big_gamma, 0.1 * big_gamma],
        },
        asymmetric: if raw.fig2.asymmetric.unwrap_or(true) {
            Some(AsymmetricCase {
                delta: raw.fig2.asymmetric_delta.unwrap_or(0.03 * big_gamma),
                delta0: raw.fig2.asymmetric_delta0.unwrap_or(0.03 * big_gamma),
            })
        } else {
            None
        },
        fit_start: raw.fig2.fit_start.unwrap_or(30.0 / big_gamma),
    };

    let sweep_points = match (&raw.sweep_b.b_fields, &raw.sweep_b.deltas) {
        (Some(_), Some(_)) => return Err(CliError::schema("sweep_b", "give either deltas or b_fields, not both")),
        (Some(b), None) => {
            let z =
                zeeman.ok_or_else(|| CliError::Unit("sweep_b.b_fields needs a zeeman section (units = si)".into()))?;
            let mut points = Vec::with_capacity(b.len());
            for &field in b {
                let zf = ZeemanParams { b_field: field, ..z };
                zf.validate().context(|| "sweep_b.b_fields".into())?;
                points.push(SweepPoint {
                    b_field: Some(field),
                    delta: zeeman_shifts(&zf).0,
                });
            }
            points
        }
        (None, Some(d)) => d.iter().map(|&delta| SweepPoint { b_field: None, delta }).collect(),
        (None, None) => [0.02, 0.04, 0.06, 0.08, 0.1]
            .iter()
            .map(|k| SweepPoint {
                b_field: None,
                delta: k * big_gamma,
            })
            .collect(),
    };

    let omega_p_sq = system.omega_p * system.omega_p;
    let cross_mod = CrossModSettings {
        omega_2_sq: raw
            .cross_mod
            .omega_2_sq
            .clone()
            .unwrap_or_else(|| (0..=10).map(|k| 0.2 * k as f64 * omega_p_sq).collect()),
        time: raw.cross_mod.time.unwrap_or(0.0),
    };

    let cfg = ScenarioConfig {
        scenario: raw.scenario,
        units: raw.units,
        system,
        zeeman,
        medium,
        grid,
        tolerances,
        doppler,
        output_dir: raw.output_dir.unwrap_or_else(|| "out".to_string()),
        fig2,
        rotation: RotationSettings {
            n_slices: raw.rotation.n_slices.unwrap_or(256),
            time_origin: raw.rotation.time_origin.unwrap_or_default(),
            fit_start: raw.rotation.fit_start.unwrap_or(30.0 / big_gamma),
        },
        sweep_b: SweepSettings {
            points: sweep_points,
            fit_start: raw.sweep_b.fit_start.unwrap_or(30.0 / big_gamma),
        },
        cross_mod,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Re-checks the invariants of a resolved configuration, e.g. one read
    /// back from a manifest.
    pub fn validate(&self) -> Result<(), CliError> {
        self.system.validate().context(|| "system".into())?;
        if let Some(z) = &self.zeeman {
            z.validate().context(|| "zeeman".into())?;
        }
        if let Some(m) = &self.medium {
            let derived =
                MediumParams::new(m.number_density, m.cell_length, m.cross_section).context(|| "medium".into())?;
            if derived != *m {
                return Err(CliError::schema(
                    "medium.absorption_length",
                    "inconsistent with density and cross section",
                ));
            }
        }
        self.grid.validate().context(|| "grid".into())?;
        self.tolerances.validate().context(|| "tolerances".into())?;
        self.doppler.validate().context(|| "doppler".into())?;
        if self.rotation.n_slices == 0 {
            return Err(CliError::schema("rotation.n_slices", "must be at least 1"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.fig2.deltas) || !self.fig2.fit_start.is_finite() {
            return Err(CliError::schema("fig2", "values must be finite"));
        }
        if self.scenario == Scenario::Fig2 && self.fig2.deltas.is_empty() && self.fig2.asymmetric.is_none() {
            return Err(CliError::schema("fig2.deltas", "no cases to run"));
        }
        if self.scenario == Scenario::SweepB && self.sweep_b.points.len() < 2 {
            return Err(CliError::schema("sweep_b", "needs at least two points"));
        }
        if !finite(&self.cross_mod.omega_2_sq) || self.cross_mod.omega_2_sq.iter().any(|x| *x < 0.0) {
            return Err(CliError::schema(
                "cross_mod.omega_2_sq",
                "values must be finite and >= 0",
            ));
        }
        if self.scenario == Scenario::CrossMod && self.cross_mod.omega_2_sq.is_empty() {
            return Err(CliError::schema("cross_mod.omega_2_sq", "needs at least one value"));
        }
        if matches!(self.scenario, Scenario::Rotation | Scenario::CrossMod) && self.medium.is_none() {
            return Err(CliError::schema(
                "medium",
                format!("required for scenario {}", self.scenario.name()),
            ));
        }
        Ok(())
    }

    /// Optical dephasing rate `Γ` in the configured units.
    pub fn big_gamma(&self) -> f64 {
        self.system.dephasing()
    }
}
