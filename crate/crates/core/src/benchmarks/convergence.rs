use super::{BenchmarkKind, SolvedCase};
use crate::error::Result;
use crate::mechanics::Technology;

/// One mesh level of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub elements_per_direction: usize,
    pub unknowns: usize,
    pub qoi: Option<f64>,
    pub error_displacement: Option<f64>,
    pub error_stress: Option<f64>,
    /// `log2(e_coarse / e_fine)` against the previous row.
    pub rate_displacement: Option<f64>,
    pub rate_stress: Option<f64>,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub kind: BenchmarkKind,
    pub technology: Technology,
    pub quadrature_points: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn qois(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.qoi).collect()
    }

    pub fn displacement_errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.error_displacement).collect()
    }

    pub fn stress_errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.error_stress).collect()
    }
}

fn rate(coarse: Option<f64>, fine: Option<f64>) -> Option<f64> {
    Some((coarse? / fine?).log2())
}

/// Solves levels `1..=levels` and tabulates QoI, errors and observed rates.
pub fn run_convergence(
    kind: BenchmarkKind,
    technology: Technology,
    quadrature_points: usize,
    levels: usize,
) -> Result<ConvergenceReport> {
    run_convergence_with(kind, technology, quadrature_points, levels, |_| Ok(()))
}

/// [`run_convergence`] calling `on_level` with every solved level in order.
pub fn run_convergence_with(
    kind: BenchmarkKind,
    technology: Technology,
    quadrature_points: usize,
    levels: usize,
    mut on_level: impl FnMut(&SolvedCase) -> Result<()>,
) -> Result<ConvergenceReport> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for level in 1..=levels {
        let n = kind.elements_at_level(level);
        let solved = kind.case(n)?.solve(technology, quadrature_points)?;
        let errors = match solved.plate_solution() {
            Some(_) => Some(solved.l2_errors()?),
            None => None,
        };
        let error_displacement = errors.map(|e| e.displacement);
        let error_stress = errors.map(|e| e.stress);
        let prev = rows.last();
        rows.push(ConvergenceRow {
            level,
            elements_per_direction: n,
            unknowns: solved.u.len(),
            qoi: solved.qoi()?,
            error_displacement,
            error_stress,
            rate_displacement: prev.and_then(|p| rate(p.error_displacement, error_displacement)),
            rate_stress: prev.and_then(|p| rate(p.error_stress, error_stress)),
            relative_residual: solved.relative_residual,
        });
        on_level(&solved)?;
    }
    Ok(ConvergenceReport {
        kind,
        technology,
        quadrature_points,
        rows,
    })
}
