use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use clap::{Parser, Subcommand, ValueEnum};
use mcrt_core::estimators::{fit_loglog, markov_type_exact, markov_type_ratio, theory_constants, FitWindow};
use mcrt_core::format::{load_graph, load_walk, save_graph, save_walk, GRAPH_FORMAT_VERSION, WALK_FORMAT_VERSION};
use mcrt_core::graphalgo::{bfs_ball, effective_resistance_with, return_probability, srw_displacement, CgOptions, Preconditioner};
use mcrt_core::mapbuild::{build_bruteforce, build_fast};
use mcrt_core::walkgen::sample_walk;
use mcrt_core::{MatedCrtGraph, StepLaw, WeightVector};
use serde::Serialize;

use crate::run::{load_run_input, run_experiment};
use crate::{outputs, CliError};

pub static VERSION: LazyLock<String> = LazyLock::new(|| {
    format!(
        "{} (MCRTWALK v{WALK_FORMAT_VERSION}, MCRTGRPH v{GRAPH_FORMAT_VERSION})",
        env!("CARGO_PKG_VERSION")
    )
});

#[derive(Debug, Parser)]
#[command(name = "mcrt", version = VERSION.as_str(), about = "Simulate and measure mated-CRT maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Engine {
    Fast,
    Bruteforce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PreconditionerArg {
    Multigrid,
    Jacobi,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an encoding walk.
    GenWalk {
        /// `uipt`, `four-direction` or `gamma:<float>`.
        #[arg(long)]
        law: String,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the cell graph of a walk.
    Build {
        #[arg(long)]
        walk: PathBuf,
        #[arg(long)]
        cell_size: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "fast")]
        engine: Engine,
    },
    /// Ball volumes around the root, as `r,volume`.
    BallGrowth {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        rmax: u32,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the root stored in the graph file.
        #[arg(long)]
        root: Option<u32>,
    },
    /// Running maximum displacement of a simple random walk, as `n,max_disp`.
    Srw {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Distance-label radius; defaults to `steps`.
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        root: Option<u32>,
    },
    /// Effective resistance from the root to the complement of a ball, as JSON.
    Resist {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "multigrid")]
        preconditioner: PreconditionerArg,
        #[arg(long)]
        root: Option<u32>,
    },
    /// Exact return probabilities `p_n` for `n = 1..=nmax`, as `n,p`.
    ReturnProb {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        nmax: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        root: Option<u32>,
    },
    /// Log-log power-law fit of two CSV columns, as JSON.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// `LO:HI`, inclusive.
        #[arg(long)]
        window: String,
    },
    /// Theoretical exponents for an LQG parameter, as JSON.
    Theory {
        #[arg(long)]
        gamma: f64,
    },
    /// Markov-type ratio of the stationary random walk, as JSON.
    MarkovType {
        #[arg(long)]
        graph: PathBuf,
        /// `unit`, or a file of whitespace-separated weights, one per cell.
        #[arg(long)]
        weights: String,
        #[arg(long)]
        n: u32,
        #[arg(long, required_unless_present = "exact")]
        samples: Option<u64>,
        #[arg(long, required_unless_present = "exact")]
        seed: Option<u64>,
        /// Enumerate every trajectory instead of sampling; `--samples` and
        /// `--seed` are then ignored.
        #[arg(long)]
        exact: bool,
    },
    /// Run a config file, or rerun the config embedded in a manifest.
    Run {
        config: PathBuf,
        /// Write outputs here instead of the configured directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn print_json(value: &impl Serialize) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn rooted(graph: MatedCrtGraph, root: Option<u32>) -> Result<MatedCrtGraph, CliError> {
    Ok(match root {
        Some(r) => graph.with_root(r)?,
        None => graph,
    })
}

fn load_weights(arg: &str, graph: &MatedCrtGraph) -> Result<WeightVector, CliError> {
    if arg == "unit" {
        return Ok(WeightVector::unit(graph.m_cells()));
    }
    let text = fs::read_to_string(arg)?;
    let values = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Validation(vec![format!("{arg}: weight {t:?} is not a number")]))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != graph.m_cells() {
        return Err(CliError::Validation(vec![format!(
            "{arg}: {} weights for {} cells",
            values.len(),
            graph.m_cells()
        )]));
    }
    Ok(WeightVector::new(values)?)
}

#[derive(Serialize)]
struct ResistReport {
    root: u32,
    radius: u32,
    r_eff: f64,
    iterations: usize,
    residual: f64,
}

fn log_written(path: &Path, rows: usize) {
    log::info!("wrote {rows} rows to {}", path.display());
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenWalk { law, steps, seed, out } => {
            let law = StepLaw::parse(&law)?;
            let walk = sample_walk(&law, steps, seed)?;
            save_walk(&out, &walk)?;
            log::info!("wrote {steps}-step {law} walk to {}", out.display());
        }
        Command::Build {
            walk,
            cell_size,
            out,
            engine,
        } => {
            let walk = load_walk(&walk)?;
            let graph = match engine {
                Engine::Fast => build_fast(&walk, cell_size)?,
                Engine::Bruteforce => build_bruteforce(&walk, cell_size)?,
            };
            save_graph(&out, &graph)?;
            log::info!(
                "wrote graph with {} cells and {} edges (root {}) to {}",
                graph.m_cells(),
                graph.num_edges(),
                graph.root(),
                out.display()
            );
        }
        Command::BallGrowth { graph, rmax, out, root } => {
            let g = rooted(load_graph(&graph)?, root)?;
            let (curve, _) = bfs_ball(&g, g.root(), rmax)?;
            log_written(&out, outputs::write_ball_growth(&out, &curve)?);
        }
        Command::Srw {
            graph,
            steps,
            seed,
            out,
            horizon,
            root,
        } => {
            let g = rooted(load_graph(&graph)?, root)?;
            let horizon = horizon.unwrap_or(steps.min(u32::MAX as u64 - 1) as u32);
            let trace = srw_displacement(&g, g.root(), steps, seed, horizon)?;
            log_written(&out, outputs::write_srw(&out, &trace)?);
        }
        Command::Resist {
            graph,
            radius,
            tol,
            preconditioner,
            root,
        } => {
            let g = rooted(load_graph(&graph)?, root)?;
            let options = CgOptions {
                tol,
                preconditioner: match preconditioner {
                    PreconditionerArg::Multigrid => Preconditioner::Multigrid,
                    PreconditionerArg::Jacobi => Preconditioner::Jacobi,
                },
                ..CgOptions::default()
            };
            let r = effective_resistance_with(&g, g.root(), radius, options)?;
            print_json(&ResistReport {
                root: g.root(),
                radius: r.radius,
                r_eff: r.r_eff,
                iterations: r.iterations,
                residual: r.residual,
            })?;
        }
        Command::ReturnProb { graph, nmax, out, root } => {
            let g = rooted(load_graph(&graph)?, root)?;
            let p = return_probability(&g, g.root(), nmax)?;
            log_written(&out, outputs::write_return_prob(&out, &p)?);
        }
        Command::Estimate { input, x, y, window } => {
            let window = FitWindow::parse(&window)?;
            let (xs, ys) = outputs::read_columns(&input, &x, &y)?;
            print_json(&fit_loglog(&xs, &ys, window)?)?;
        }
        Command::Theory { gamma } => print_json(&theory_constants(gamma)?)?,
        Command::MarkovType {
            graph,
            weights,
            n,
            samples,
            seed,
            exact,
        } => {
            let g = load_graph(&graph)?;
            let omega = load_weights(&weights, &g)?;
            let estimate = if exact {
                markov_type_exact(&g, &omega, n)?
            } else {
                let (samples, seed) = (samples.expect("clap requires samples"), seed.expect("clap requires seed"));
                markov_type_ratio(&g, &omega, n, samples, seed)?
            };
            print_json(&estimate)?;
        }
        Command::Run { config, output_dir } => {
            let text = fs::read_to_string(&config)?;
            let mut cfg = load_run_input(&text)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let manifest = run_experiment(&cfg)?;
            let failures: usize = manifest.seeds.iter().map(|s| s.failures.len()).sum();
            log::info!(
                "{} seeds finished in {:.1}s with {failures} failures; manifest in {}",
                manifest.seeds.len(),
                manifest.wall_clock_seconds,
                cfg.output_dir.display()
            );
            for p in &manifest.pooled {
                if let Some(f) = &p.fit {
                    log::info!("{}: pooled slope {:.4} (se {:.4}) over {} seeds", p.experiment, f.slope, f.slope_stderr, p.seeds);
                }
            }
            if failures > 0 {
                return Err(CliError::Runtime(format!("{failures} seed stages failed; see the manifest")));
            }
        }
    }
    Ok(())
}
