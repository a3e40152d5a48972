//! Config-driven sweeps over seeds.
//!
//! Each seed writes into its own zero-padded subdirectory of `output_dir`;
//! the coordinator writes `manifest.json` once every seed has finished. All
//! CSVs are pure functions of the config. The manifest additionally records
//! wall-clock times.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use mcrt_core::estimators::{fit_loglog, markov_type_ratio, pooled_fit, FitWindow};
use mcrt_core::format::{GRAPH_FORMAT_VERSION, WALK_FORMAT_VERSION};
use mcrt_core::graphalgo::{bfs_ball, effective_resistance, return_probability, srw_displacement};
use mcrt_core::mapbuild::build_fast;
use mcrt_core::seed::derive_seed;
use mcrt_core::walkgen::sample_walk;
use mcrt_core::{ExponentFit, MatedCrtGraph, WeightVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{validate_config, ExperimentConfig};
use crate::{outputs, CliError};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Stream tags for the seeds of the randomized measurements.
const SRW_TAG: u64 = 1;
const MARKOV_TAG: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub experiment: String,
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    /// Data rows, excluding the header.
    pub rows: usize,
    pub fit: Option<ExponentFit>,
    pub fit_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub stage: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub dir: String,
    pub m_cells: u64,
    pub num_edges: u64,
    pub root: u32,
    pub outputs: Vec<OutputRecord>,
    pub failures: Vec<SeedFailure>,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledFit {
    pub experiment: String,
    pub seeds: usize,
    pub fit: Option<ExponentFit>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub walk_format_version: u32,
    pub graph_format_version: u32,
    /// The exact config text; `mcrt run` accepts a manifest in its place.
    pub config: String,
    pub config_sha256: String,
    pub step_law: String,
    pub class_gamma: Option<f64>,
    pub output_dir: String,
    pub wall_clock_seconds: f64,
    pub seeds: Vec<SeedRecord>,
    pub pooled: Vec<PooledFit>,
}

type Curve = (Vec<f64>, Vec<f64>);

struct SeedRun {
    record: SeedRecord,
    curves: BTreeMap<&'static str, Curve>,
}

fn fit_curve(curve: &Curve, window: FitWindow) -> (Option<ExponentFit>, Option<String>) {
    match fit_loglog(&curve.0, &curve.1, window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

struct Measured {
    rows: usize,
    curve: Option<(Curve, FitWindow)>,
}

fn measure(config: &ExperimentConfig, name: &str, graph: &MatedCrtGraph, seed: u64, path: &Path) -> Result<Measured, CliError> {
    let root = graph.root();
    match name {
        "ball_growth" => {
            let p = config.ball_growth.as_ref().expect("validated");
            let (curve, _) = bfs_ball(graph, root, p.r_max)?;
            let rows = outputs::write_ball_growth(path, &curve)?;
            let xs = curve.radii.iter().map(|&r| r as f64).collect();
            let ys = curve.volumes.iter().map(|&v| v as f64).collect();
            let window = p.fit_window.unwrap_or(FitWindow::default_for(p.r_max as f64));
            Ok(Measured {
                rows,
                curve: Some(((xs, ys), window)),
            })
        }
        "srw" => {
            let p = config.srw.as_ref().expect("validated");
            let trace = srw_displacement(graph, root, p.n_steps, derive_seed(seed, SRW_TAG), p.horizon)?;
            let rows = outputs::write_srw(path, &trace)?;
            let xs = trace.checkpoints.iter().map(|&n| n as f64).collect();
            let ys = trace.max_displacement.iter().map(|&d| d as f64).collect();
            let window = p.fit_window.unwrap_or(FitWindow::default_for(p.n_steps as f64));
            Ok(Measured {
                rows,
                curve: Some(((xs, ys), window)),
            })
        }
        "return_prob" => {
            let p = config.return_prob.as_ref().expect("validated");
            let probs = return_probability(graph, root, p.n_max)?;
            let rows = outputs::write_return_prob(path, &probs)?;
            let (xs, ys) = probs
                .iter()
                .enumerate()
                .filter(|(_, &q)| q > 0.0)
                .map(|(i, &q)| ((i + 1) as f64, q))
                .unzip();
            let window = p.fit_window.unwrap_or(FitWindow::default_for(p.n_max as f64));
            Ok(Measured {
                rows,
                curve: Some(((xs, ys), window)),
            })
        }
        "resist" => {
            let p = config.resist.as_ref().expect("validated");
            let results = p
                .radii
                .iter()
                .map(|&r| effective_resistance(graph, root, r, p.tol))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Measured {
                rows: outputs::write_resistance(path, &results)?,
                curve: None,
            })
        }
        "markov_type" => {
            let p = config.markov_type.as_ref().expect("validated");
            let unit = WeightVector::unit(graph.m_cells());
            let base = derive_seed(seed, MARKOV_TAG);
            let estimates = p
                .n
                .iter()
                .map(|&n| markov_type_ratio(graph, &unit, n, p.samples, derive_seed(base, n as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Measured {
                rows: outputs::write_markov(path, &estimates)?,
                curve: None,
            })
        }
        other => unreachable!("unknown experiment {other}"),
    }
}

fn selected(config: &ExperimentConfig) -> Vec<&'static str> {
    let mut out = Vec::new();
    if config.ball_growth.is_some() {
        out.push("ball_growth");
    }
    if config.srw.is_some() {
        out.push("srw");
    }
    if config.resist.is_some() {
        out.push("resist");
    }
    if config.return_prob.is_some() {
        out.push("return_prob");
    }
    if config.markov_type.is_some() {
        out.push("markov_type");
    }
    out
}

fn run_seed(config: &ExperimentConfig, seed: u64) -> SeedRun {
    let start = Instant::now();
    let dir = format!("{seed:020}");
    let mut run = SeedRun {
        record: SeedRecord {
            seed,
            dir: dir.clone(),
            m_cells: 0,
            num_edges: 0,
            root: 0,
            outputs: Vec::new(),
            failures: Vec::new(),
            wall_clock_seconds: 0.0,
        },
        curves: BTreeMap::new(),
    };
    let fail = |run: &mut SeedRun, stage: &str, e: &dyn std::fmt::Display| {
        log::warn!("seed {seed}: {stage} failed: {e}");
        run.record.failures.push(SeedFailure {
            stage: stage.to_string(),
            error: e.to_string(),
        });
    };
    let seed_dir = config.output_dir.join(&dir);
    if let Err(e) = fs::create_dir_all(&seed_dir) {
        fail(&mut run, "setup", &e);
        return run;
    }
    let graph = match sample_walk(&config.step_law(), config.m_steps, seed).and_then(|w| build_fast(&w, config.cell_size)) {
        Ok(g) => g,
        Err(e) => {
            fail(&mut run, "build", &e);
            return run;
        }
    };
    run.record.m_cells = graph.m_cells() as u64;
    run.record.num_edges = graph.num_edges();
    run.record.root = graph.root();
    log::info!("seed {seed}: {} cells, {} edges", graph.m_cells(), graph.num_edges());
    for name in selected(config) {
        let file = format!("{name}.csv");
        match measure(config, name, &graph, seed, &seed_dir.join(&file)) {
            Ok(m) => {
                let (fit, fit_error) = match &m.curve {
                    Some((c, w)) => fit_curve(c, *w),
                    None => (None, None),
                };
                if let Some((c, _)) = m.curve {
                    run.curves.insert(name, c);
                }
                log::info!("seed {seed}: {name} wrote {} rows", m.rows);
                run.record.outputs.push(OutputRecord {
                    experiment: name.to_string(),
                    path: format!("{dir}/{file}"),
                    rows: m.rows,
                    fit,
                    fit_error,
                });
            }
            Err(e) => fail(&mut run, name, &e),
        }
    }
    run.record.wall_clock_seconds = start.elapsed().as_secs_f64();
    run
}

fn window_of(config: &ExperimentConfig, name: &str) -> Option<FitWindow> {
    match name {
        "ball_growth" => config.ball_growth.as_ref().map(|p| p.fit_window.unwrap_or(FitWindow::default_for(p.r_max as f64))),
        "srw" => config.srw.as_ref().map(|p| p.fit_window.unwrap_or(FitWindow::default_for(p.n_steps as f64))),
        "return_prob" => config.return_prob.as_ref().map(|p| p.fit_window.unwrap_or(FitWindow::default_for(p.n_max as f64))),
        _ => None,
    }
}

/// Runs every seed, writes per-seed CSVs and the manifest, and returns the
/// manifest. Failures inside a seed are recorded, not propagated.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let start = Instant::now();
    fs::create_dir_all(&config.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<SeedRun> = pool.install(|| config.seeds.par_iter().map(|&s| run_seed(config, s)).collect());

    let mut pooled = Vec::new();
    for name in selected(config) {
        let Some(window) = window_of(config, name) else {
            continue;
        };
        let curves: Vec<Curve> = runs.iter().filter_map(|r| r.curves.get(name).cloned()).collect();
        if curves.is_empty() {
            continue;
        }
        let (fit, error) = match pooled_fit(&curves, window) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        pooled.push(PooledFit {
            experiment: name.to_string(),
            seeds: curves.len(),
            fit,
            error,
        });
    }

    let law = config.step_law();
    let manifest = Manifest {
        tool: "mcrt".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        walk_format_version: WALK_FORMAT_VERSION,
        graph_format_version: GRAPH_FORMAT_VERSION,
        config: config.source.clone(),
        config_sha256: hex::encode(Sha256::digest(config.source.as_bytes())),
        step_law: law.id(),
        class_gamma: law.class_gamma(),
        output_dir: config.output_dir.display().to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        seeds: runs.into_iter().map(|r| r.record).collect(),
        pooled,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(config.output_dir.join(MANIFEST_NAME), text)?;
    Ok(manifest)
}

/// Accepts either a config file or a manifest written by `run_experiment`,
/// and returns the validated config.
pub fn load_run_input(text: &str) -> Result<ExperimentConfig, CliError> {
    if let Ok(serde_json::Value::Object(obj)) = serde_json::from_str::<serde_json::Value>(text) {
        return match obj.get("config").and_then(|c| c.as_str()) {
            Some(config) => validate_config(config),
            None => Err(CliError::Validation(vec!["JSON input has no \"config\" string".into()])),
        };
    }
    validate_config(text)
}

/// Checks that every output named by the manifest in `dir` exists and has
/// the declared number of data rows.
pub fn verify_manifest(dir: &Path) -> Result<Manifest, CliError> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_NAME))?)?;
    let mut problems = Vec::new();
    for out in manifest.seeds.iter().flat_map(|s| &s.outputs) {
        match fs::read_to_string(dir.join(&out.path)) {
            Ok(text) => {
                let rows = text.lines().count().saturating_sub(1);
                if rows != out.rows {
                    problems.push(format!("{}: {rows} rows, manifest says {}", out.path, out.rows));
                }
            }
            Err(e) => problems.push(format!("{}: {e}", out.path)),
        }
    }
    if problems.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::Runtime(problems.join("\n")))
    }
}
