//! Experiment configuration files.
//!
//! A config is a TOML document. Top-level keys:
//!
//! ```toml
//! preset = "uipt"              # or gamma = 1.632993, never both
//! m_steps = 10000000
//! cell_size = 1
//! seeds = [1, 2, 3, 4]
//! experiments = ["ball_growth", "srw"]
//! output_dir = "runs/uipt"
//! workers = 2                  # optional, defaults to the rayon pool size
//!
//! [ball_growth]
//! r_max = 128
//! fit_window = "16:128"        # optional
//!
//! [srw]
//! n_steps = 1000000
//! horizon = 1000000            # optional, defaults to n_steps
//! fit_window = "1000:1000000"  # optional
//!
//! [resist]
//! radii = [8, 16, 32, 64]
//! tol = 1e-8                   # optional
//!
//! [return_prob]
//! n_max = 1024
//! fit_window = "64:1024"       # optional
//!
//! [markov_type]
//! n = [1, 2, 4, 8]
//! samples = 20000
//! ```
//!
//! Every selected experiment needs its section and every section needs to be
//! selected. Unknown keys are errors. Omitted fit windows use
//! `[8, 0.75 * horizon]`.

use std::path::PathBuf;

use mcrt_core::estimators::FitWindow;
use mcrt_core::StepLaw;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

pub const EXPERIMENTS: [&str; 5] = ["ball_growth", "srw", "resist", "return_prob", "markov_type"];

const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallGrowthParams {
    pub r_max: u32,
    pub fit_window: Option<FitWindow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrwParams {
    pub n_steps: u64,
    pub horizon: u32,
    pub fit_window: Option<FitWindow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResistParams {
    pub radii: Vec<u32>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnProbParams {
    pub n_max: u32,
    pub fit_window: Option<FitWindow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovParams {
    pub n: Vec<u32>,
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Step-law selector in the form accepted by `StepLaw::parse`.
    pub law: String,
    pub m_steps: u64,
    pub cell_size: u64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    pub ball_growth: Option<BallGrowthParams>,
    pub srw: Option<SrwParams>,
    pub resist: Option<ResistParams>,
    pub return_prob: Option<ReturnProbParams>,
    pub markov_type: Option<MarkovParams>,
    /// The text the config was parsed from.
    #[serde(skip)]
    pub source: String,
}

impl ExperimentConfig {
    pub fn step_law(&self) -> StepLaw {
        StepLaw::parse(&self.law).expect("validated step law")
    }

    pub fn m_cells(&self) -> u64 {
        self.m_steps / self.cell_size
    }
}

struct Section<'a, 'e> {
    prefix: &'a str,
    table: &'a Table,
    errors: &'e mut Vec<String>,
    known: Vec<&'static str>,
}

impl<'a, 'e> Section<'a, 'e> {
    fn new(prefix: &'a str, table: &'a Table, errors: &'e mut Vec<String>) -> Self {
        Self {
            prefix,
            table,
            errors,
            known: Vec::new(),
        }
    }

    fn field(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn get(&mut self, key: &'static str, required: bool) -> Option<&'a Value> {
        self.known.push(key);
        let v = self.table.get(key);
        if v.is_none() && required {
            let f = self.field(key);
            self.errors.push(format!("{f}: missing required key"));
        }
        v
    }

    fn bad(&mut self, key: &str, msg: impl std::fmt::Display) {
        let f = self.field(key);
        self.errors.push(format!("{f}: {msg}"));
    }

    fn integer(&mut self, key: &'static str, required: bool, min: u64, max: u64) -> Option<u64> {
        let v = self.get(key, required)?;
        match as_u64(v) {
            Some(x) if x >= min && x <= max => Some(x),
            Some(x) => {
                self.bad(key, format!("{x} is outside [{min}, {max}]"));
                None
            }
            None => {
                self.bad(key, format!("expected a non-negative integer, found {}", describe(v)));
                None
            }
        }
    }

    fn integer_list(&mut self, key: &'static str, min: u64, max: u64) -> Option<Vec<u64>> {
        let v = self.get(key, true)?;
        let Some(items) = v.as_array() else {
            self.bad(key, format!("expected a list of integers, found {}", describe(v)));
            return None;
        };
        if items.is_empty() {
            self.bad(key, "must not be empty");
            return None;
        }
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match as_u64(item) {
                Some(x) if x >= min && x <= max => out.push(x),
                Some(x) => {
                    self.bad(key, format!("entry {i} = {x} is outside [{min}, {max}]"));
                    ok = false;
                }
                None => {
                    self.bad(key, format!("entry {i} is not a non-negative integer ({})", describe(item)));
                    ok = false;
                }
            }
        }
        let mut sorted = out.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            self.bad(key, "contains duplicates");
            ok = false;
        }
        ok.then_some(out)
    }

    fn float(&mut self, key: &'static str, required: bool) -> Option<f64> {
        let v = self.get(key, required)?;
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(x) => Some(*x as f64),
            other => {
                self.bad(key, format!("expected a number, found {}", describe(other)));
                None
            }
        }
    }

    fn string(&mut self, key: &'static str, required: bool) -> Option<&'a str> {
        let v = self.get(key, required)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.bad(key, format!("expected a string, found {}", describe(v)));
                None
            }
        }
    }

    fn window(&mut self, key: &'static str) -> Option<FitWindow> {
        let s = self.string(key, false)?;
        match FitWindow::parse(s) {
            Ok(w) => Some(w),
            Err(e) => {
                self.bad(key, e);
                None
            }
        }
    }

    fn finish(self) {
        for key in self.table.keys() {
            if !self.known.contains(&key.as_str()) {
                let f = if self.prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{}.{key}", self.prefix)
                };
                self.errors.push(format!("{f}: unknown key"));
            }
        }
    }
}

fn as_u64(v: &Value) -> Option<u64> {
    match v {
        Value::Integer(x) => u64::try_from(*x).ok(),
        // Seeds above i64::MAX can be written as decimal strings.
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::String(s) => format!("string {s:?}"),
        other => format!("{} {other}", other.type_str()),
    }
}

fn law_selector(s: &mut Section<'_, '_>) -> Option<String> {
    let gamma = s.get("gamma", false).is_some();
    let preset = s.get("preset", false).is_some();
    match (gamma, preset) {
        (true, true) => {
            s.errors.push("gamma, preset: conflicting step-law selectors, give exactly one".into());
            None
        }
        (false, false) => {
            s.errors.push("gamma, preset: missing step-law selector, give exactly one".into());
            None
        }
        (true, false) => {
            let g = s.float("gamma", true)?;
            if g > 0.0 && g < 2.0 {
                Some(format!("gamma:{g}"))
            } else {
                s.bad("gamma", format!("{g} is outside (0, 2)"));
                None
            }
        }
        (false, true) => {
            let p = s.string("preset", true)?;
            match p {
                "uipt" | "four-direction" | "spanning-tree" => Some(p.to_string()),
                other => {
                    s.bad(
                        "preset",
                        format!("unknown preset {other:?} (expected uipt, four-direction or spanning-tree)"),
                    );
                    None
                }
            }
        }
    }
}

fn section<'a>(root: &'a Table, name: &str, errors: &mut Vec<String>) -> Option<&'a Table> {
    match root.get(name)? {
        Value::Table(t) => Some(t),
        other => {
            errors.push(format!("{name}: expected a table, found {}", describe(other)));
            None
        }
    }
}

/// Parses and validates a config, reporting every problem found.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig, CliError> {
    let root: Table = toml::from_str(raw).map_err(|e| CliError::Validation(vec![format!("syntax error: {e}")]))?;
    let mut errors = Vec::new();
    let mut top = Section::new("", &root, &mut errors);
    let law = law_selector(&mut top);
    let m_steps = top.integer("m_steps", true, 1, u64::MAX);
    let cell_size = top.integer("cell_size", true, 1, u64::MAX);
    let seeds = top.integer_list("seeds", 0, u64::MAX);
    let workers = top.integer("workers", false, 1, 1024).map(|w| w as usize);
    let output_dir = match top.string("output_dir", true) {
        Some("") => {
            top.bad("output_dir", "must not be empty");
            None
        }
        other => other.map(PathBuf::from),
    };
    let mut selected = Vec::new();
    if let Some(v) = top.get("experiments", true) {
        match v.as_array() {
            Some(items) if !items.is_empty() => {
                for item in items {
                    match item.as_str() {
                        Some(name) if EXPERIMENTS.contains(&name) => {
                            if selected.contains(&name) {
                                top.bad("experiments", format!("{name} listed twice"));
                            }
                            selected.push(name);
                        }
                        _ => top.bad(
                            "experiments",
                            format!("unknown experiment {item} (expected one of {})", EXPERIMENTS.join(", ")),
                        ),
                    }
                }
            }
            Some(_) => top.bad("experiments", "must not be empty"),
            None => top.bad("experiments", format!("expected a list of names, found {}", describe(v))),
        }
    }
    for name in EXPERIMENTS {
        top.known.push(name);
    }
    top.finish();

    if let (Some(m), Some(k)) = (m_steps, cell_size) {
        if m / k < 2 {
            errors.push(format!("cell_size: {k} leaves fewer than 2 cells in {m} steps"));
        }
    }
    for name in EXPERIMENTS {
        if root.contains_key(name) && !selected.contains(&name) {
            errors.push(format!("{name}: section given but {name} is not in experiments"));
        }
    }
    let mut tables = std::collections::HashMap::new();
    for &name in &selected {
        match section(&root, name, &mut errors) {
            Some(t) => {
                tables.insert(name, t);
            }
            None if !root.contains_key(name) => errors.push(format!("{name}: experiment selected but section [{name}] is missing")),
            None => {}
        }
    }

    let ball_growth = tables.get("ball_growth").and_then(|t| {
        let mut s = Section::new("ball_growth", t, &mut errors);
        let r_max = s.integer("r_max", true, 1, u32::MAX as u64 - 1);
        let fit_window = s.window("fit_window");
        s.finish();
        Some(BallGrowthParams {
            r_max: r_max? as u32,
            fit_window,
        })
    });
    let srw = tables.get("srw").and_then(|t| {
        let mut s = Section::new("srw", t, &mut errors);
        let n_steps = s.integer("n_steps", true, 1, u64::MAX);
        let horizon = s.integer("horizon", false, 1, u32::MAX as u64 - 1);
        let fit_window = s.window("fit_window");
        s.finish();
        let n_steps = n_steps?;
        Some(SrwParams {
            n_steps,
            horizon: horizon.unwrap_or(n_steps.min(u32::MAX as u64 - 1)) as u32,
            fit_window,
        })
    });
    let resist = tables.get("resist").and_then(|t| {
        let mut s = Section::new("resist", t, &mut errors);
        let radii = s.integer_list("radii", 1, u32::MAX as u64 - 1);
        let tol = match s.float("tol", false) {
            Some(t) if t > 0.0 && t < 1.0 => Some(t),
            Some(t) => {
                s.bad("tol", format!("{t} is outside (0, 1)"));
                None
            }
            None if s.table.contains_key("tol") => None,
            None => Some(DEFAULT_TOL),
        };
        s.finish();
        Some(ResistParams {
            radii: radii?.into_iter().map(|r| r as u32).collect(),
            tol: tol?,
        })
    });
    let return_prob = tables.get("return_prob").and_then(|t| {
        let mut s = Section::new("return_prob", t, &mut errors);
        let n_max = s.integer("n_max", true, 1, u32::MAX as u64);
        let fit_window = s.window("fit_window");
        s.finish();
        Some(ReturnProbParams {
            n_max: n_max? as u32,
            fit_window,
        })
    });
    let markov_type = tables.get("markov_type").and_then(|t| {
        let mut s = Section::new("markov_type", t, &mut errors);
        let n = s.integer_list("n", 1, u32::MAX as u64);
        let samples = s.integer("samples", true, 2, u64::MAX);
        s.finish();
        Some(MarkovParams {
            n: n?.into_iter().map(|x| x as u32).collect(),
            samples: samples?,
        })
    });

    if !errors.is_empty() {
        return Err(CliError::Validation(errors));
    }
    Ok(ExperimentConfig {
        law: law.expect("no errors"),
        m_steps: m_steps.expect("no errors"),
        cell_size: cell_size.expect("no errors"),
        seeds: seeds.expect("no errors"),
        output_dir: output_dir.expect("no errors"),
        workers,
        ball_growth,
        srw,
        resist,
        return_prob,
        markov_type,
        source: raw.to_string(),
    })
}
