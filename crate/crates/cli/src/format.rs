//! Text formats: convergence tables (comma separated), legacy VTK structured
//! grids and NURBS patches.
//!
//! Every real number is written with 17 significant digits in scientific
//! notation, which reads back to the same `f64`.

use std::fmt::Write as _;

use casiga::benchmarks::{ConvergenceReport, SampleGrid};
use casiga::mechanics::plane_strain_to_3d;
use casiga::{KnotVector, NurbsPatch};

use crate::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub const TABLE_HEADER: &str =
    "level,elements_per_direction,unknowns,qoi,error_displacement,error_stress,rate_displacement,rate_stress,relative_residual";

/// Convergence table with one row per level. Missing values are empty fields.
pub fn convergence_table(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.level,
            r.elements_per_direction,
            r.unknowns,
            opt(r.qoi),
            opt(r.error_displacement),
            opt(r.error_stress),
            opt(r.rate_displacement),
            opt(r.rate_stress),
            num(r.relative_residual)
        );
    }
    out
}

/// Legacy VTK (ASCII, `STRUCTURED_GRID`) with point data: `displacement`
/// (vector), `stress` (3x3 tensor; plane strain includes sigma_zz) and
/// `hydrostatic` (scalar). Points are ordered with the first parametric
/// direction varying fastest.
pub fn vtk_structured_grid(title: &str, grid: &SampleGrid, poisson: f64) -> String {
    let n = grid.samples.len();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{}", title.replace(['\n', '\r'], " "));
    out.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", grid.counts[0], grid.counts[1], grid.counts[2]);
    let _ = writeln!(out, "POINTS {n} double");
    for s in &grid.samples {
        let _ = writeln!(out, "{} {} {}", num(s.point[0]), num(s.point[1]), num(s.point[2]));
    }
    let _ = writeln!(out, "POINT_DATA {n}");
    out.push_str("VECTORS displacement double\n");
    for s in &grid.samples {
        let u = s.displacement;
        let _ = writeln!(out, "{} {} {}", num(u[0]), num(u[1]), num(u[2]));
    }
    out.push_str("TENSORS stress double\n");
    for s in &grid.samples {
        let sigma = if s.stress.dim() == 2 { plane_strain_to_3d(&s.stress, poisson) } else { s.stress };
        for i in 0..3 {
            let _ = writeln!(out, "{} {} {}", num(sigma.get(i, 0)), num(sigma.get(i, 1)), num(sigma.get(i, 2)));
        }
    }
    out.push_str("SCALARS hydrostatic double 1\nLOOKUP_TABLE default\n");
    for s in &grid.samples {
        let _ = writeln!(out, "{}", num(s.hydrostatic));
    }
    out
}

/// Patch text form:
///
/// ```text
/// casiga-patch 1
/// dim <d>
/// knots <direction> <degree> <k_0> ... <k_m>     (one line per direction)
/// points <count>
/// <x> <y> <z> <w>                                (one line per control point)
/// ```
///
/// Control points are listed with the first direction varying fastest. Blank
/// lines and lines starting with `#` are ignored.
pub fn write_patch(patch: &NurbsPatch) -> String {
    let mut out = String::from("casiga-patch 1\n");
    let _ = writeln!(out, "dim {}", patch.dim());
    for (k, kv) in patch.knot_vectors().iter().enumerate() {
        let _ = write!(out, "knots {k} {}", kv.degree());
        for &v in kv.knots() {
            let _ = write!(out, " {}", num(v));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "points {}", patch.num_control_points());
    for (p, w) in patch.control_points().iter().zip(patch.weights()) {
        let _ = writeln!(out, "{} {} {} {}", num(p[0]), num(p[1]), num(p[2]), num(*w));
    }
    out
}

pub fn read_patch(text: &str) -> Result<NurbsPatch, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut last_line = 0;
    let mut next = |expect: &str| {
        let item = lines.next();
        if let Some((i, _)) = item {
            last_line = i;
        }
        item.ok_or_else(|| CliError::Parse {
            line: last_line,
            message: format!("unexpected end of input, expected {expect}"),
        })
    };
    let err = |line: usize, message: String| CliError::Parse { line, message };
    let real = |line: usize, s: &str| s.parse::<f64>().map_err(|_| err(line, format!("invalid number '{s}'")));
    let int = |line: usize, s: &str| s.parse::<usize>().map_err(|_| err(line, format!("invalid integer '{s}'")));

    let (line, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["casiga-patch", "1"] {
        return Err(err(line, format!("expected 'casiga-patch 1', got '{header}'")));
    }
    let (line, dim_line) = next("dim")?;
    let dim = match dim_line.split_whitespace().collect::<Vec<_>>()[..] {
        ["dim", d] => int(line, d)?,
        _ => return Err(err(line, format!("expected 'dim <d>', got '{dim_line}'"))),
    };
    if !(2..=3).contains(&dim) {
        return Err(err(line, format!("dimension must be 2 or 3, got {dim}")));
    }
    let mut knot_vectors = Vec::with_capacity(dim);
    for k in 0..dim {
        let (line, l) = next("knots")?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() < 3 || fields[0] != "knots" || int(line, fields[1])? != k {
            return Err(err(line, format!("expected 'knots {k} <degree> <knots...>', got '{l}'")));
        }
        let degree = int(line, fields[2])?;
        let knots = fields[3..].iter().map(|s| real(line, s)).collect::<Result<Vec<_>, _>>()?;
        knot_vectors.push(KnotVector::new(degree, knots).map_err(|e| err(line, e.to_string()))?);
    }
    let (line, l) = next("points")?;
    let count = match l.split_whitespace().collect::<Vec<_>>()[..] {
        ["points", c] => int(line, c)?,
        _ => return Err(err(line, format!("expected 'points <count>', got '{l}'"))),
    };
    let mut control_points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, l) = next("control point")?;
        let v = l.split_whitespace().map(|s| real(line, s)).collect::<Result<Vec<_>, _>>()?;
        if v.len() != 4 {
            return Err(err(line, format!("expected 'x y z w', got '{l}'")));
        }
        control_points.push([v[0], v[1], v[2]]);
        weights.push(v[3]);
    }
    if let Some((line, l)) = lines.next() {
        return Err(err(line, format!("unexpected trailing content '{l}'")));
    }
    NurbsPatch::new(knot_vectors, control_points, weights).map_err(|e| err(last_line, e.to_string()))
}
