//! `eval`: resample a saved model on a fresh grid or at explicit
//! coordinates.

use crate::config::RunConfig;
use crate::errors::{io_at, CliError, CliResult};
use crate::model_file::load_model;
use crate::out::{fmt_float, write_atomic, Csv};
use inrf_core::signal::pnm::encode_pnm;
use inrf_core::signal::sample::{grid_2d, image_from_outputs};
use inrf_core::matrix::Matrix;
use std::path::Path;

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let model_path = cfg
        .model
        .as_deref()
        .ok_or_else(|| CliError::Config("eval needs --model".into()))?;
    let bytes = std::fs::read(model_path).map_err(|e| io_at(Path::new(model_path), e))?;
    let field = load_model(&bytes)?;

    if let Some(coords_path) = cfg.coords.as_deref() {
        let xs = read_coords(coords_path, field.in_dim())?;
        let ys = field.forward_batch(&xs);
        let mut header = Vec::new();
        for a in 0..xs.cols() {
            header.push(format!("x{a}"));
        }
        for c in 0..ys.cols() {
            header.push(format!("y{c}"));
        }
        let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let mut csv = Csv::new(&header_refs);
        for i in 0..xs.rows() {
            let mut row: Vec<String> = xs.row(i).iter().map(|&v| fmt_float(v)).collect();
            row.extend(ys.row(i).iter().map(|&v| fmt_float(v)));
            csv.row(&row);
        }
        let path = write_atomic(&cfg.out_dir(), "eval.csv", &csv.into_bytes())?;
        println!("eval: {} points -> {}", xs.rows(), path.display());
        return Ok(());
    }

    let (width, height) = match (cfg.width, cfg.height) {
        (Some(w), Some(h)) if w > 0 && h > 0 => (w, h),
        _ => {
            return Err(CliError::Config(
                "eval needs --width and --height, or --coords".into(),
            ))
        }
    };
    if field.in_dim() != 2 {
        return Err(CliError::Config(format!(
            "grid eval needs a 2-input model, this one takes {} input(s); use --coords",
            field.in_dim()
        )));
    }
    if field.out_dim() != 1 && field.out_dim() != 3 {
        return Err(CliError::Config(format!(
            "grid eval writes 1- or 3-channel images, the model emits {} channels",
            field.out_dim()
        )));
    }
    let xs = grid_2d::<f64>(width, height);
    let out = field.forward_batch(&xs);
    let img = image_from_outputs(width, height, &out);
    let name = if img.channels == 1 { "eval.pgm" } else { "eval.ppm" };
    let path = write_atomic(&cfg.out_dir(), name, &encode_pnm(&img))?;
    println!("eval: {width}x{height} grid -> {}", path.display());
    Ok(())
}

/// Coordinate rows from a headerless CSV: `dim` comma-separated floats
/// per line.
fn read_coords(path: &str, dim: usize) -> CliResult<Matrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_at(Path::new(path), e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let cells = cells.map_err(|_| {
            CliError::Io(format!("{path}:{}: expected comma-separated numbers", no + 1))
        })?;
        if cells.len() != dim {
            return Err(CliError::Io(format!(
                "{path}:{}: expected {dim} coordinates per row, found {}",
                no + 1,
                cells.len()
            )));
        }
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(CliError::Io(format!("{path}: no coordinate rows")));
    }
    Ok(Matrix::from_fn(rows.len(), dim, |i, j| rows[i][j]))
}
