//! CSV writers shared by the subcommands and config-driven runs. Every file
//! has a header row and LF line endings.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use mcrt_core::graphalgo::BallGrowthCurve;
use mcrt_core::{MarkovTypeEstimate, ResistanceResult, WalkTrace};

use crate::CliError;

fn writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn write_rows<W: Write>(w: &mut csv::Writer<W>, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<usize, CliError> {
    w.write_record(header)?;
    let mut n = 0;
    for row in rows {
        w.write_record(&row)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

/// Writes `r,volume` and returns the number of data rows.
pub fn write_ball_growth(path: &Path, curve: &BallGrowthCurve) -> Result<usize, CliError> {
    let rows = curve
        .radii
        .iter()
        .zip(&curve.volumes)
        .map(|(r, v)| vec![r.to_string(), v.to_string()]);
    write_rows(&mut writer(path)?, &["r", "volume"], rows)
}

pub fn write_srw(path: &Path, trace: &WalkTrace) -> Result<usize, CliError> {
    let rows = trace
        .checkpoints
        .iter()
        .zip(&trace.max_displacement)
        .map(|(n, d)| vec![n.to_string(), d.to_string()]);
    write_rows(&mut writer(path)?, &["n", "max_disp"], rows)
}

/// `p[i]` is the return probability after `i + 1` steps.
pub fn write_return_prob(path: &Path, p: &[f64]) -> Result<usize, CliError> {
    let rows = p.iter().enumerate().map(|(i, x)| vec![(i + 1).to_string(), x.to_string()]);
    write_rows(&mut writer(path)?, &["n", "p"], rows)
}

pub fn write_resistance(path: &Path, results: &[ResistanceResult]) -> Result<usize, CliError> {
    let rows = results.iter().map(|r| {
        vec![
            r.radius.to_string(),
            r.r_eff.to_string(),
            r.iterations.to_string(),
            r.residual.to_string(),
        ]
    });
    write_rows(&mut writer(path)?, &["radius", "r_eff", "iterations", "residual"], rows)
}

pub fn write_markov(path: &Path, estimates: &[MarkovTypeEstimate]) -> Result<usize, CliError> {
    let rows = estimates.iter().map(|e| {
        vec![
            e.n.to_string(),
            e.ratio.to_string(),
            e.samples.to_string(),
            e.std_error.to_string(),
        ]
    });
    write_rows(&mut writer(path)?, &["n", "ratio", "samples", "std_error"], rows)
}

/// Reads two named numeric columns from a CSV file with a header row.
pub fn read_columns(path: &Path, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Validation(vec![format!(
                "{}: no column {name:?} (columns: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            )])
        })
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize, name: &str| -> Result<f64, CliError> {
            let cell = record.get(i).unwrap_or("");
            cell.trim().parse().map_err(|_| {
                CliError::Validation(vec![format!(
                    "{}: row {}: column {name} value {cell:?} is not a number",
                    path.display(),
                    line + 1
                )])
            })
        };
        xs.push(parse(ix, x)?);
        ys.push(parse(iy, y)?);
    }
    Ok((xs, ys))
}
