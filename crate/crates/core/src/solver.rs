//! Symmetric positive-definite sparse solves.
//!
//! The default path is a sparse Cholesky factorization (fill-reducing ordering
//! and supernodal factorization from `faer`) followed by a few steps of iterative
//! refinement. Jacobi-preconditioned conjugate gradients serve as the fallback
//! when the factorization cannot be computed.

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Side};
use thiserror::Error;

/// Relative residual every accepted solution must reach, unless the direct
/// solve stagnates below the rounding floor `eps ||K| |u|| / ||f||` of the
/// computed solution (see [`rounding_floor`]).
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is {rows}x{cols} but right-hand side has length {rhs}")]
    DimensionMismatch { rows: usize, cols: usize, rhs: usize },

    #[error("Cholesky factorization failed: {0}")]
    Factorization(String),

    #[error("conjugate gradients broke down at iteration {iteration} (p^T K p = {curvature:e}); residual history {residual_history:?}")]
    Breakdown {
        iteration: usize,
        curvature: f64,
        residual_history: Vec<f64>,
    },

    #[error("no convergence to relative residual {tolerance:e}; residual history {residual_history:?}")]
    NoConvergence {
        tolerance: f64,
        residual_history: Vec<f64>,
    },
}

/// Square sparse matrix in compressed sparse row form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix on the given pattern. Each row's column list is sorted and
    /// deduplicated here.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut cols in rows {
            cols.sort_unstable();
            cols.dedup();
            assert!(cols.last().map_or(true, |&c| c < n), "column out of range");
            col_idx.extend(cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            rows[i].push(j);
        }
        let mut m = Self::from_pattern(rows);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        let cols = &self.col_idx[start..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    /// Entry `(i, j)`, zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`, which must belong to the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is outside the sparsity pattern"));
        self.values[k] += v;
    }

    /// Adds a dense block with row/column indices `dofs` (row-major `block`).
    pub fn add_block(&mut self, dofs: &[usize], block: &[f64]) {
        let m = dofs.len();
        debug_assert_eq!(block.len(), m * m);
        for (r, &i) in dofs.iter().enumerate() {
            let start = self.row_ptr[i];
            let cols = &self.col_idx[start..self.row_ptr[i + 1]];
            for (c, &j) in dofs.iter().enumerate() {
                let k = start + cols.binary_search(&j).expect("entry outside sparsity pattern");
                self.values[k] += block[r * m + c];
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |K_ij - K_ji| / max |K_ij|`; zero for an exactly symmetric matrix.
    pub fn symmetry_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// Submatrix on the index set `keep` (sorted, unique), renumbered densely.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &i in keep {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if map[j] != usize::MAX {
                    col_idx.push(map[j]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }
}

/// How a solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cholesky { refinement_steps: usize },
    ConjugateGradient { iterations: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: Vec<f64>,
    pub relative_residual: f64,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Direct,
    ConjugateGradient,
}

/// Sparse Cholesky factor of a symmetric positive-definite matrix.
pub struct Cholesky {
    llt: Llt<usize, f64>,
    n: usize,
}

impl Cholesky {
    /// Factorizes `matrix`. Only its upper triangle is read.
    pub fn new(matrix: &CsrMatrix) -> Result<Self, SolverError> {
        let n = matrix.dim();
        // A symmetric CSR matrix read as CSC is the same matrix; its lower
        // triangle in CSC form is the upper triangle of the CSR rows.
        let symbolic = SymbolicSparseColMatRef::new_checked(n, n, matrix.row_ptr(), None, matrix.col_idx());
        let view = SparseColMatRef::new(symbolic, matrix.values());
        let llt = view
            .sp_cholesky(Side::Lower)
            .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
        Ok(Self { llt, n })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        self.llt.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(matrix: &CsrMatrix, u: &[f64], rhs: &[f64]) -> Vec<f64> {
    let ku = matrix.mul_vec(u);
    rhs.iter().zip(ku).map(|(b, k)| b - k).collect()
}

/// `eps ||K| |u|| / ||f||`: the relative residual that rounding `u` to f64
/// alone can cause.
pub fn rounding_floor(matrix: &CsrMatrix, u: &[f64], rhs_norm: f64) -> f64 {
    let abs: Vec<f64> = (0..matrix.dim())
        .map(|i| {
            let (cols, vals) = matrix.row(i);
            cols.iter().zip(vals).map(|(&j, &k)| (k * u[j]).abs()).sum()
        })
        .collect();
    f64::EPSILON * norm(&abs) / rhs_norm
}

// f - K u with every product and sum carried in double-double (error-free
// transformations), so the residual of nearly-incompressible systems is not
// swamped by cancellation between the large volumetric entries.
fn accurate_residual(matrix: &CsrMatrix, u: &[f64], rhs: &[f64]) -> Vec<f64> {
    (0..matrix.dim())
        .map(|i| {
            let (cols, vals) = matrix.row(i);
            let mut sum = rhs[i];
            let mut err = 0.0;
            for (&j, &k) in cols.iter().zip(vals) {
                let p = -k * u[j];
                let p_err = (-k).mul_add(u[j], -p);
                let t = sum + p;
                let z = t - sum;
                err += (sum - (t - z)) + (p - z) + p_err;
                sum = t;
            }
            sum + err
        })
        .collect()
}

/// Solves `K u = f` for symmetric positive-definite `K` with the default strategy.
pub fn solve_spd(matrix: &CsrMatrix, rhs: &[f64]) -> Result<Solution, SolverError> {
    solve_spd_with(matrix, rhs, SolverKind::Direct)
}

pub fn solve_spd_with(matrix: &CsrMatrix, rhs: &[f64], kind: SolverKind) -> Result<Solution, SolverError> {
    let n = matrix.dim();
    if rhs.len() != n {
        return Err(SolverError::DimensionMismatch {
            rows: n,
            cols: n,
            rhs: rhs.len(),
        });
    }
    let rhs_norm = norm(rhs);
    if rhs_norm == 0.0 {
        return Ok(Solution {
            u: vec![0.0; n],
            relative_residual: 0.0,
            method: SolveMethod::Cholesky { refinement_steps: 0 },
        });
    }
    match kind {
        SolverKind::Direct => match Cholesky::new(matrix) {
            Ok(chol) => direct(matrix, rhs, rhs_norm, &chol),
            Err(_) => conjugate_gradient(matrix, rhs, RESIDUAL_TOLERANCE, 50 * n.max(1)),
        },
        SolverKind::ConjugateGradient => {
            conjugate_gradient(matrix, rhs, RESIDUAL_TOLERANCE, 50 * n.max(1))
        }
    }
}

const MAX_REFINEMENT_STEPS: usize = 5;

fn direct(matrix: &CsrMatrix, rhs: &[f64], rhs_norm: f64, chol: &Cholesky) -> Result<Solution, SolverError> {
    let mut u = chol.solve(rhs);
    let mut r = accurate_residual(matrix, &u, rhs);
    let mut rel = norm(&r) / rhs_norm;
    let mut history = vec![rel];
    let mut steps = 0;
    while rel > RESIDUAL_TOLERANCE * 1e-3 && steps < MAX_REFINEMENT_STEPS {
        let du = chol.solve(&r);
        let candidate: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + b).collect();
        let r_new = accurate_residual(matrix, &candidate, rhs);
        let rel_new = norm(&r_new) / rhs_norm;
        history.push(rel_new);
        steps += 1;
        if rel_new >= rel {
            break;
        }
        u = candidate;
        r = r_new;
        rel = rel_new;
    }
    // Below eps |K| |u| no f64 vector does better, so a stagnated refinement
    // that reached that level is accepted as converged.
    if rel > RESIDUAL_TOLERANCE && rel > rounding_floor(matrix, &u, rhs_norm) {
        return Err(SolverError::NoConvergence {
            tolerance: RESIDUAL_TOLERANCE,
            residual_history: history,
        });
    }
    Ok(Solution {
        u,
        relative_residual: rel,
        method: SolveMethod::Cholesky {
            refinement_steps: steps,
        },
    })
}

/// Jacobi-preconditioned conjugate gradients.
pub fn conjugate_gradient(
    matrix: &CsrMatrix,
    rhs: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<Solution, SolverError> {
    let n = matrix.dim();
    let rhs_norm = norm(rhs);
    let inv_diag: Vec<f64> = matrix
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut u = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut history = vec![1.0];
    for iteration in 1..=max_iterations {
        let kp = matrix.mul_vec(&p);
        let curvature: f64 = p.iter().zip(&kp).map(|(a, b)| a * b).sum();
        if !(curvature > 0.0) {
            return Err(SolverError::Breakdown {
                iteration,
                curvature,
                residual_history: history,
            });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            u[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
        }
        let rel = norm(&r) / rhs_norm;
        history.push(rel);
        if rel <= tolerance {
            // confirm with a true residual to avoid drift in the recurrence
            let true_rel = norm(&residual(matrix, &u, rhs)) / rhs_norm;
            if true_rel <= tolerance {
                return Ok(Solution {
                    u,
                    relative_residual: true_rel,
                    method: SolveMethod::ConjugateGradient { iterations: iteration },
                });
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverError::NoConvergence {
        tolerance,
        residual_history: history,
    })
}
