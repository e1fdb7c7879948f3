use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use skspec_core::analysis::{write_checks_csv, CheckRecord};

use crate::config::{validate_config, ConfigError, Experiment, ExperimentConfig};
use crate::experiments::execute;

pub const DEFAULT_OUT: &str = "skspec-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] skspec_core::Error),
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    pub seed_offset: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    Fail,
    BlowUp,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Fail => 2,
            RunStatus::BlowUp => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub experiment: String,
    /// SHA-256 of the resolved config's canonical JSON.
    pub config_hash: String,
    /// Resolved config (defaults filled, seed offset applied); rerunnable as is.
    pub config: serde_json::Value,
    pub status: RunStatus,
    pub checks: Vec<CheckRecord>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

/// Accepts a config document or a previously written `manifest.json`.
pub fn load_config(raw: &str) -> Result<ExperimentConfig, ConfigError> {
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(raw) {
        if let (Some(cfg), Some(_)) = (v.get("config"), v.get("config_hash")) {
            return validate_config(&cfg.to_string());
        }
    }
    validate_config(raw)
}

pub fn apply_seed_offset(config: &mut ExperimentConfig, k: u64) {
    let shift = |s: &mut Vec<u64>| s.iter_mut().for_each(|x| *x = x.wrapping_add(k));
    match &mut config.experiment {
        Experiment::Wick(w) => {
            shift(&mut w.seeds);
            if let Some(o) = &mut w.orthogonality {
                o.seed = o.seed.wrapping_add(k);
            }
        }
        Experiment::SkPoly(p) => shift(&mut p.run.seeds),
        Experiment::SkSine(s) => shift(&mut s.run.seeds),
        Experiment::Oracle(o) => o.snapshot_seed = o.snapshot_seed.wrapping_add(k),
        Experiment::Symbols(_) | Experiment::Cov(_) => {}
    }
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("configs serialize");
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn warnings(config: &ExperimentConfig) -> Vec<String> {
    use skspec_core::dynamics::Model;
    let model = match &config.experiment {
        Experiment::SkPoly(p) => Some((Model::Polynomial { k: p.k }, &p.run)),
        Experiment::SkSine(s) => Some((Model::SineGordon { beta: s.beta }, &s.run)),
        _ => None,
    };
    model
        .and_then(|(m, run)| run.model_config(m, 0).validate().ok())
        .unwrap_or_default()
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileEntry, CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
    Ok(FileEntry {
        path: name.into(),
        bytes: bytes.len() as u64,
        sha256: hex(&Sha256::digest(bytes)),
    })
}

/// Validates, executes and writes outputs plus `manifest.json` into `opts.out`.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest, CliError> {
    let diagnostics = config.diagnostics();
    if !diagnostics.is_empty() {
        return Err(ConfigError { diagnostics }.into());
    }
    let mut resolved = config.clone();
    resolved.out = None;
    apply_seed_offset(&mut resolved, opts.seed_offset);

    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let result = pool.install(|| execute(&resolved.experiment));

    fs::create_dir_all(&opts.out).map_err(|source| CliError::Io {
        path: opts.out.clone(),
        source,
    })?;
    let mut manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        experiment: resolved.experiment.name().into(),
        config_hash: config_hash(&resolved),
        config: serde_json::to_value(&resolved).expect("configs serialize"),
        status: RunStatus::Pass,
        checks: Vec::new(),
        warnings: warnings(&resolved),
        error: None,
        wall_clock_seconds: 0.0,
        files: Vec::new(),
    };
    match result {
        Ok(outcome) => {
            for (name, bytes) in &outcome.files {
                manifest.files.push(write(&opts.out, name, bytes)?);
            }
            let json =
                serde_json::to_vec_pretty(&outcome.checks).map_err(skspec_core::Error::from)?;
            manifest.files.push(write(&opts.out, "checks.json", &json)?);
            let mut csv = Vec::new();
            write_checks_csv(&mut csv, &outcome.checks)?;
            manifest.files.push(write(&opts.out, "checks.csv", &csv)?);
            if outcome.checks.iter().any(|c| !c.pass) {
                manifest.status = RunStatus::Fail;
            }
            manifest.checks = outcome.checks;
        }
        Err(e @ skspec_core::Error::BlowUp { .. }) => {
            manifest.status = RunStatus::BlowUp;
            manifest.error = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    let json = serde_json::to_vec_pretty(&manifest).map_err(skspec_core::Error::from)?;
    write(&opts.out, "manifest.json", &json)?;
    Ok(manifest)
}
