//! Global Galerkin assembly: connectivity, element loops, load vectors and
//! homogeneous Dirichlet constraints.
//!
//! Global unknowns are numbered `A * d + i` for control point `A` and
//! displacement component `i`.

mod corners;
mod element;
mod recovery;

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

pub use corners::{corner_interpolate, corner_weights, CornerTable};
pub use element::{
    element_shear_stiffness, element_stiffness, element_stiffness_cas1, element_stiffness_cas2,
    element_stiffness_cs, element_volumetric_stiffness, ElementMatrix,
};
pub use recovery::{FieldEvaluator, FieldSample};

use crate::error::{Error, Result};
use crate::mechanics::{Material, Technology};
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::solver::{solve_spd, CsrMatrix, Solution};
use crate::splines::{Face, NurbsPatch, Side, SPAN_FUNCTIONS};

/// A patch together with its element connectivity.
#[derive(Debug, Clone)]
pub struct Mesh {
    patch: NurbsPatch,
    local_count: usize,
    // element e supports connectivity[e * local_count..(e + 1) * local_count]
    connectivity: Vec<usize>,
}

impl Mesh {
    pub fn new(patch: NurbsPatch) -> Self {
        let dim = patch.dim();
        let local_count = SPAN_FUNCTIONS.pow(dim as u32);
        let mut connectivity = Vec::with_capacity(patch.num_elements() * local_count);
        for e in 0..patch.num_elements() {
            let elem = patch.element_multi_index(e);
            for a in 0..local_count {
                let local = [a % 3, (a / 3) % 3, a / 9];
                let mut multi = [0; 3];
                for k in 0..dim {
                    multi[k] = elem[k] + local[k];
                }
                connectivity.push(patch.global_index(multi));
            }
        }
        Self {
            patch,
            local_count,
            connectivity,
        }
    }

    pub fn patch(&self) -> &NurbsPatch {
        &self.patch
    }

    pub fn dim(&self) -> usize {
        self.patch.dim()
    }

    pub fn num_elements(&self) -> usize {
        self.patch.num_elements()
    }

    pub fn num_dofs(&self) -> usize {
        self.patch.num_control_points() * self.dim()
    }

    /// Global basis indices supported on element `e`, in local order.
    pub fn connectivity(&self, e: usize) -> &[usize] {
        &self.connectivity[e * self.local_count..(e + 1) * self.local_count]
    }

    /// Global unknowns of element `e` in element-matrix order.
    pub fn element_dofs(&self, e: usize) -> Vec<usize> {
        let d = self.dim();
        self.connectivity(e)
            .iter()
            .flat_map(|&a| (0..d).map(move |i| a * d + i))
            .collect()
    }

    /// Mesh refined uniformly `times` times.
    pub fn refined(&self, times: usize) -> Result<Self> {
        Ok(Self::new(self.patch.refined(times)?))
    }
}

/// Vector-valued function of the physical position.
pub type VectorField = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// External loads: an optional body force per unit volume and tractions on faces.
#[derive(Clone, Default)]
pub struct Loads {
    pub body_force: Option<VectorField>,
    pub tractions: Vec<(Face, VectorField)>,
}

impl Loads {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_body_force(mut self, f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.body_force = Some(Arc::new(f));
        self
    }

    pub fn with_traction(
        mut self,
        face: Face,
        h: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        self.tractions.push((face, Arc::new(h)));
        self
    }
}

impl std::fmt::Debug for Loads {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Loads")
            .field("body_force", &self.body_force.is_some())
            .field("tractions", &self.tractions.iter().map(|(face, _)| *face).collect::<Vec<_>>())
            .finish()
    }
}

/// Zero displacement of component `component` on every control point of `face`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraint {
    pub face: Face,
    pub component: usize,
}

impl Constraint {
    pub const fn new(face: Face, component: usize) -> Self {
        Self { face, component }
    }
}

/// Constrained unknowns for a list of face constraints.
pub fn constrained_dofs(mesh: &Mesh, constraints: &[Constraint]) -> Result<BTreeSet<usize>> {
    let d = mesh.dim();
    let mut set = BTreeSet::new();
    for c in constraints {
        if c.component >= d {
            return Err(Error::InvalidFace { face: c.face, dim: d });
        }
        for a in mesh.patch().face_control_points(c.face)? {
            set.insert(a * d + c.component);
        }
    }
    Ok(set)
}

/// Stiffness sparsity pattern: unknowns couple when their basis functions share
/// an element. Independent of the element technology.
pub fn sparsity_pattern(mesh: &Mesh) -> CsrMatrix {
    let d = mesh.dim();
    let patch = mesh.patch();
    let counts = patch.basis_counts();
    let rows: Vec<Vec<usize>> = (0..mesh.num_dofs())
        .into_par_iter()
        .map(|dof| {
            let a = dof / d;
            let m = patch.multi_index(a);
            let mut lo = [0; 3];
            let mut hi = [0; 3];
            for k in 0..3 {
                lo[k] = m[k].saturating_sub(SPAN_FUNCTIONS - 1);
                hi[k] = (m[k] + SPAN_FUNCTIONS - 1).min(counts[k] - 1);
            }
            let mut cols = Vec::new();
            for k2 in lo[2]..=hi[2] {
                for k1 in lo[1]..=hi[1] {
                    for k0 in lo[0]..=hi[0] {
                        let b = patch.global_index([k0, k1, k2]);
                        cols.extend((0..d).map(|j| b * d + j));
                    }
                }
            }
            cols
        })
        .collect();
    CsrMatrix::from_pattern(rows)
}

const ELEMENT_CHUNK: usize = 1024;

/// Global stiffness matrix before constraints.
///
/// Element matrices are computed in parallel in fixed-size chunks and added to
/// the global matrix serially in element order, so the result does not depend on
/// the thread count.
pub fn assemble_stiffness(
    mesh: &Mesh,
    material: &Material,
    technology: Technology,
    rule: &QuadratureRule,
    corners: &CornerTable,
) -> Result<CsrMatrix> {
    let mut k = sparsity_pattern(mesh);
    let n_el = mesh.num_elements();
    for start in (0..n_el).step_by(ELEMENT_CHUNK) {
        let end = (start + ELEMENT_CHUNK).min(n_el);
        let blocks: Vec<ElementMatrix> = (start..end)
            .into_par_iter()
            .map(|e| {
                let elem = mesh.patch().element_multi_index(e);
                element_stiffness(technology, mesh, elem, material, rule, corners)
            })
            .collect::<Result<_>>()?;
        for (e, block) in (start..end).zip(&blocks) {
            k.add_block(&mesh.element_dofs(e), block.as_slice());
        }
    }
    Ok(k)
}

/// Body-force contribution `int N_a f_i dOmega`.
pub fn body_force_load(mesh: &Mesh, f: &VectorField, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let d = mesh.dim();
    let per_element: Vec<Vec<f64>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let elem = mesh.patch().element_multi_index(e);
            let points = crate::quadrature::map_to_element(rule, mesh.patch(), elem)?;
            let mut fe = vec![0.0; mesh.local_count * d];
            for p in &points {
                let force = f(p.basis.point);
                for (a, &n) in p.basis.values.iter().enumerate() {
                    for i in 0..d {
                        fe[a * d + i] += p.weight * n * force[i];
                    }
                }
            }
            Ok(fe)
        })
        .collect::<Result<_>>()?;
    let mut load = vec![0.0; mesh.num_dofs()];
    for (e, fe) in per_element.iter().enumerate() {
        for (dof, v) in mesh.element_dofs(e).into_iter().zip(fe) {
            load[dof] += v;
        }
    }
    Ok(load)
}

/// Traction contribution `int_face N_a h_i dGamma`, integrated with
/// `points_per_direction` Gauss points along each face direction.
pub fn boundary_traction_load(
    mesh: &Mesh,
    face: Face,
    traction: &VectorField,
    points_per_direction: usize,
) -> Result<Vec<f64>> {
    let patch = mesh.patch();
    let d = patch.dim();
    if face.direction >= d {
        return Err(Error::InvalidFace { face, dim: d });
    }
    let (gp, gw) = gauss_legendre(points_per_direction)?;
    let tangent_dirs: Vec<usize> = (0..d).filter(|&k| k != face.direction).collect();
    let counts = patch.element_counts();
    let kv_fixed = &patch.knot_vectors()[face.direction];
    let (fixed_elem, fixed_xi) = match face.side {
        Side::Low => (0, kv_fixed.first()),
        Side::High => (counts[face.direction] - 1, kv_fixed.last()),
    };

    let face_elements: usize = tangent_dirs.iter().map(|&k| counts[k]).product();
    let n_face_points = points_per_direction.pow(tangent_dirs.len() as u32);
    let mut load = vec![0.0; mesh.num_dofs()];
    for fe in 0..face_elements {
        let mut elem = [0; 3];
        elem[face.direction] = fixed_elem;
        let mut rest = fe;
        for &k in &tangent_dirs {
            elem[k] = rest % counts[k];
            rest /= counts[k];
        }
        for q in 0..n_face_points {
            let mut xi = [0.0; 3];
            xi[face.direction] = fixed_xi;
            let mut weight = 1.0;
            let mut rest = q;
            for &k in &tangent_dirs {
                let i = rest % points_per_direction;
                rest /= points_per_direction;
                let (a, b) = patch.knot_vectors()[k].element_bounds(elem[k]);
                xi[k] = a + 0.5 * (b - a) * (gp[i] + 1.0);
                weight *= gw[i] * 0.5 * (b - a);
            }
            let basis = patch.eval_on_element(elem, xi)?;
            let tangent = |k: usize| [basis.jacobian[0][k], basis.jacobian[1][k], basis.jacobian[2][k]];
            let measure = if d == 2 {
                let t = tangent(tangent_dirs[0]);
                (t[0] * t[0] + t[1] * t[1]).sqrt()
            } else {
                let (s, t) = (tangent(tangent_dirs[0]), tangent(tangent_dirs[1]));
                let c = [
                    s[1] * t[2] - s[2] * t[1],
                    s[2] * t[0] - s[0] * t[2],
                    s[0] * t[1] - s[1] * t[0],
                ];
                (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
            };
            let h = traction(basis.point);
            for (&a, &n) in basis.indices.iter().zip(&basis.values) {
                for i in 0..d {
                    load[a * d + i] += weight * measure * n * h[i];
                }
            }
        }
    }
    Ok(load)
}

/// Assembled linear system with its homogeneous Dirichlet set.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    /// Stiffness over all unknowns, before constraints.
    pub stiffness: CsrMatrix,
    pub load: Vec<f64>,
    pub constrained: BTreeSet<usize>,
}

impl SparseSystem {
    pub fn num_dofs(&self) -> usize {
        self.load.len()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.num_dofs()).filter(|i| !self.constrained.contains(i)).collect()
    }

    /// Stiffness and load restricted to the free unknowns (symmetric elimination
    /// of constrained rows and columns with zero prescribed values).
    pub fn reduced(&self) -> (CsrMatrix, Vec<f64>, Vec<usize>) {
        let free = self.free_dofs();
        let k = self.stiffness.principal_submatrix(&free);
        let f = free.iter().map(|&i| self.load[i]).collect();
        (k, f, free)
    }

    /// Like [`Self::reduced`], with nonzero values `prescribed[i]` on the
    /// constrained unknowns moved to the right-hand side.
    pub fn reduced_with_values(&self, prescribed: &[f64]) -> (CsrMatrix, Vec<f64>, Vec<usize>) {
        let (k, mut f, free) = self.reduced();
        for (r, &i) in free.iter().enumerate() {
            let (cols, vals) = self.stiffness.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if self.constrained.contains(&j) {
                    f[r] -= v * prescribed[j];
                }
            }
        }
        (k, f, free)
    }

    /// Solves for all unknowns; constrained entries are zero.
    pub fn solve(&self) -> Result<(Vec<f64>, Solution)> {
        let (k, f, free) = self.reduced();
        let sol = solve_spd(&k, &f)?;
        let mut u = vec![0.0; self.num_dofs()];
        for (&i, &v) in free.iter().zip(&sol.u) {
            u[i] = v;
        }
        Ok((u, sol))
    }

    /// Solves with the constrained unknowns set to `prescribed`.
    pub fn solve_with_values(&self, prescribed: &[f64]) -> Result<(Vec<f64>, Solution)> {
        let (k, f, free) = self.reduced_with_values(prescribed);
        let sol = solve_spd(&k, &f)?;
        let mut u: Vec<f64> = prescribed.to_vec();
        for &i in &free {
            u[i] = 0.0;
        }
        for (&i, &v) in free.iter().zip(&sol.u) {
            u[i] = v;
        }
        Ok((u, sol))
    }
}

/// Stiffness, loads and constraints for one technology and quadrature rule.
pub fn assemble(
    mesh: &Mesh,
    material: &Material,
    technology: Technology,
    rule: &QuadratureRule,
    loads: &Loads,
    constraints: &[Constraint],
) -> Result<SparseSystem> {
    let corners = CornerTable::new(mesh)?;
    assemble_with_corners(mesh, material, technology, rule, loads, constraints, &corners)
}

/// [`assemble`] with a precomputed corner table.
pub fn assemble_with_corners(
    mesh: &Mesh,
    material: &Material,
    technology: Technology,
    rule: &QuadratureRule,
    loads: &Loads,
    constraints: &[Constraint],
    corners: &CornerTable,
) -> Result<SparseSystem> {
    if constraints.is_empty() {
        return Err(Error::Unconstrained);
    }
    for (face, _) in &loads.tractions {
        if face.direction >= mesh.dim() {
            return Err(Error::InvalidFace {
                face: *face,
                dim: mesh.dim(),
            });
        }
    }
    let constrained = constrained_dofs(mesh, constraints)?;
    let stiffness = assemble_stiffness(mesh, material, technology, rule, corners)?;
    let mut load = vec![0.0; mesh.num_dofs()];
    if let Some(f) = &loads.body_force {
        for (l, v) in load.iter_mut().zip(body_force_load(mesh, f, rule)?) {
            *l += v;
        }
    }
    for (face, h) in &loads.tractions {
        let contribution = boundary_traction_load(mesh, *face, h, rule.points_per_direction())?;
        for (l, v) in load.iter_mut().zip(contribution) {
            *l += v;
        }
    }
    Ok(SparseSystem {
        stiffness,
        load,
        constrained,
    })
}
