//! `manifest.json`: what was run, with which resolved configuration, and
//! what came out.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use faraday_core::analytic::RegimeReport;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::scenario::{regime_report, run_scenario};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Infinite regime margins serialize as `null`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    /// SHA-256 of the compact JSON of `resolved` with `output_dir` blank.
    pub config_hash: String,
    pub strict: bool,
    pub resolved: ScenarioConfig,
    pub regime: Value,
    pub regime_pass: bool,
    pub outputs: Vec<OutputRecord>,
    pub summary: Value,
    pub wall_seconds: f64,
}

/// Identifies the computation: where the output goes is not part of it.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let blank = ScenarioConfig {
        output_dir: String::new(),
        ..cfg.clone()
    };
    let text = serde_json::to_string(&blank).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn regime_failures(r: &RegimeReport) -> String {
    let mut failed = Vec::new();
    if !r.eit_pass_1 {
        failed.push(format!("Ω_c² vs |δ|Δ_D margin {}", r.eit_margin_1));
    }
    if !r.eit_pass_2 {
        failed.push(format!("Ω_c² vs γ0(γ + Δ_D) margin {}", r.eit_margin_2));
    }
    if r.thin_medium_pass == Some(false) {
        failed.push(format!(
            "thin-medium optical depth {}",
            r.thin_medium_value.unwrap_or(f64::NAN)
        ));
    }
    failed.join("; ")
}

/// Runs the scenario into `cfg.output_dir` and writes the manifest there.
///
/// With `strict`, a failed regime check aborts with [`CliError::Regime`]:
/// before any computation, or for `regime_check` after `regime.json` is
/// written.
pub fn execute(cfg: &ScenarioConfig, strict: bool) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    cfg.validate()?;
    let out = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let regime = regime_report(cfg);
    if strict && !regime.all_pass() && cfg.scenario != Scenario::RegimeCheck {
        return Err(CliError::Regime(regime_failures(&regime)));
    }
    let result = run_scenario(cfg, &out)?;
    if strict && !regime.all_pass() {
        return Err(CliError::Regime(regime_failures(&regime)));
    }
    let mut outputs = Vec::with_capacity(result.files.len());
    for file in &result.files {
        let path = out.join(file);
        let data = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        outputs.push(OutputRecord {
            file: file.clone(),
            sha256: hex::encode(Sha256::digest(&data)),
            bytes: data.len() as u64,
        });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: cfg.scenario,
        config_hash: config_hash(cfg),
        strict,
        resolved: cfg.clone(),
        regime: serde_json::to_value(regime).expect("report serializes"),
        regime_pass: regime.all_pass(),
        outputs,
        summary: result.summary,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    let path = out.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

/// Reads the resolved configuration back from a manifest, checking it
/// against the recorded hash. `out_dir` replaces the recorded output
/// directory.
pub fn load_for_replay(path: &Path, out_dir: Option<&Path>) -> Result<(ScenarioConfig, bool), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let bad = |message: String| CliError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    let resolved = doc.get("resolved").ok_or_else(|| bad("missing `resolved`".into()))?;
    let mut cfg: ScenarioConfig =
        serde_json::from_value(resolved.clone()).map_err(|e| bad(format!("resolved: {e}")))?;
    let recorded = doc.get("config_hash").and_then(Value::as_str).unwrap_or("");
    if recorded != config_hash(&cfg) {
        return Err(bad("config_hash does not match the resolved configuration".into()));
    }
    let strict = doc.get("strict").and_then(Value::as_bool).unwrap_or(false);
    if let Some(dir) = out_dir {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok((cfg, strict))
}
