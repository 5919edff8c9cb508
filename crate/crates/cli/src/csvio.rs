//! CSV files exchanged by the commands.
//!
//! Grid functions use the header `x,value`, space-time tables `x,t,<name>`
//! with rows grouped by instant. Reals are written with 17 significant digits
//! so every file reads back bit-for-bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use tavg_core::{FieldSamples, Grid, GridFunction, SourceTerm};

use crate::error::{CliError, CliResult};

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn write_grid_function<W: Write>(out: &mut W, f: &GridFunction) -> std::io::Result<()> {
    writeln!(out, "x,value")?;
    for (x, v) in f.grid().nodes().iter().zip(f.values()) {
        writeln!(out, "{},{}", fmt_real(*x), fmt_real(*v))?;
    }
    Ok(())
}

pub fn write_space_time<W: Write>(out: &mut W, field: &FieldSamples, name: &str) -> std::io::Result<()> {
    writeln!(out, "x,t,{name}")?;
    for (t, slice) in field.times().iter().zip(field.values()) {
        let t = fmt_real(*t);
        for (x, v) in field.grid().nodes().iter().zip(slice) {
            writeln!(out, "{},{},{}", fmt_real(*x), t, fmt_real(*v))?;
        }
    }
    Ok(())
}

pub fn save_grid_function(path: &Path, f: &GridFunction) -> CliResult<()> {
    let mut out = create(path)?;
    write_grid_function(&mut out, f)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn save_space_time(path: &Path, field: &FieldSamples, name: &str) -> CliResult<()> {
    let mut out = create(path)?;
    write_space_time(&mut out, field, name)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Rows of `columns` reals after a header that must equal `header`.
fn read_rows(path: &Path, header: &[&str]) -> CliResult<Vec<(usize, Vec<f64>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| CliError::parse(path, 1, "empty file"))?;
    let got: Vec<&str> = first.split(',').map(str::trim).collect();
    if got != header {
        return Err(CliError::parse(
            path,
            1,
            format!("expected header '{}', found '{}'", header.join(","), first.trim()),
        ));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(CliError::parse(
                path,
                i + 1,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        let vals = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::parse(path, i + 1, format!("not a finite number: '{f}'")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push((i + 1, vals));
    }
    Ok(rows)
}

fn check_node(path: &Path, line: usize, grid: &Grid, i: usize, x: f64) -> CliResult<()> {
    let expect = grid.nodes()[i];
    if (x - expect).abs() > 1e-9 * grid.length() {
        return Err(CliError::parse(
            path,
            line,
            format!("x = {x} does not match grid node {i} at {expect}"),
        ));
    }
    Ok(())
}

pub fn read_grid_function(path: &Path, grid: &Arc<Grid>) -> CliResult<GridFunction> {
    let rows = read_rows(path, &["x", "value"])?;
    if rows.len() != grid.n_nodes() {
        return Err(CliError::Core(tavg_core::Error::GridMismatch(format!(
            "{}: {} rows for a grid of {} nodes",
            path.display(),
            rows.len(),
            grid.n_nodes()
        ))));
    }
    let mut values = Vec::with_capacity(rows.len());
    for (i, (line, r)) in rows.iter().enumerate() {
        check_node(path, *line, grid, i, r[0])?;
        values.push(r[1]);
    }
    Ok(GridFunction::new(Arc::clone(grid), values)?)
}

/// Space-time table with value column `name`; returns instants and slices.
pub fn read_space_time(path: &Path, grid: &Arc<Grid>, name: &str) -> CliResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let rows = read_rows(path, &["x", "t", name])?;
    let n = grid.n_nodes();
    if rows.is_empty() || rows.len() % n != 0 {
        return Err(CliError::Core(tavg_core::Error::GridMismatch(format!(
            "{}: {} rows is not a multiple of the {} grid nodes",
            path.display(),
            rows.len(),
            n
        ))));
    }
    let mut times = Vec::new();
    let mut slices = Vec::new();
    for block in rows.chunks(n) {
        let t = block[0].1[1];
        let mut slice = Vec::with_capacity(n);
        for (i, (line, r)) in block.iter().enumerate() {
            check_node(path, *line, grid, i, r[0])?;
            if r[1] != t {
                return Err(CliError::parse(path, *line, format!("instant {} inside the block of t = {t}", r[1])));
            }
            slice.push(r[2]);
        }
        times.push(t);
        slices.push(slice);
    }
    Ok((times, slices))
}

pub fn read_source(path: &Path, grid: &Arc<Grid>, theta: f64) -> CliResult<SourceTerm> {
    let (times, slices) = read_space_time(path, grid, "phi")?;
    Ok(SourceTerm::new(Arc::clone(grid), times, slices, theta)?)
}

pub fn read_solution(path: &Path, grid: &Arc<Grid>) -> CliResult<FieldSamples> {
    let (times, slices) = read_space_time(path, grid, "u")?;
    Ok(FieldSamples::new(Arc::clone(grid), times, slices)?)
}

/// Coefficient table `x,a,a0` on a uniform grid over `[0, length]`.
pub fn read_coefficients(path: &Path, length: f64) -> CliResult<(Arc<Grid>, Vec<f64>, Vec<f64>)> {
    let rows = read_rows(path, &["x", "a", "a0"])?;
    let grid = Grid::uniform(length, rows.len())?;
    let mut a = Vec::with_capacity(rows.len());
    let mut a0 = Vec::with_capacity(rows.len());
    for (i, (line, r)) in rows.iter().enumerate() {
        check_node(path, *line, &grid, i, r[0])?;
        a.push(r[1]);
        a0.push(r[2]);
    }
    Ok((grid, a, a0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, std::f64::consts::PI] {
            assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn grid_function_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let g = Grid::uniform(2.0, 9).unwrap();
        let f = g.sample(|x| x * (2.0 - x) / 3.0);
        save_grid_function(&path, &f).unwrap();
        let back = read_grid_function(&path, &g).unwrap();
        assert_eq!(back.values(), f.values());
        let other = Grid::uniform(2.0, 11).unwrap();
        assert!(matches!(read_grid_function(&path, &other), Err(CliError::Core(_))));
    }

    #[test]
    fn space_time_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let g = Grid::uniform(1.0, 5).unwrap();
        let vals = vec![vec![0.0, 1.0, 2.0, 1.0, 0.0], vec![0.0, 0.5, 0.7, 0.5, 0.0]];
        let field = FieldSamples::new(g.clone(), vec![0.0, 0.3], vals).unwrap();
        save_space_time(&path, &field, "u").unwrap();
        assert_eq!(read_solution(&path, &g).unwrap(), field);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,value\n0,0\n0.5,abc\n1,0\n").unwrap();
        let g = Grid::uniform(1.0, 3).unwrap();
        assert!(matches!(read_grid_function(&path, &g), Err(CliError::Parse { line: 3, .. })));
        std::fs::write(&path, "x,val\n").unwrap();
        assert!(matches!(read_grid_function(&path, &g), Err(CliError::Parse { line: 1, .. })));
    }
}
