use std::fmt;

use super::knots::{KnotVector, SpanBasis, DEGREE, SPAN_FUNCTIONS};
use crate::error::{Error, Result};

/// Which end of a parametric direction a boundary face sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Low,
    High,
}

/// A boundary face of a patch: the set where parametric coordinate `direction`
/// equals its first (`Low`) or last (`High`) knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub direction: usize,
    pub side: Side,
}

impl Face {
    pub const fn new(direction: usize, side: Side) -> Self {
        Self { direction, side }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = match self.side {
            Side::Low => "min",
            Side::High => "max",
        };
        write!(f, "xi{}={}", self.direction, end)
    }
}

/// Rational basis data at one parametric point.
///
/// `indices`, `values` and `gradients` run over the `3^d` functions supported on
/// the containing element, in local lexicographic order (first direction fastest).
#[derive(Debug, Clone)]
pub struct BasisGrad {
    pub element: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Physical gradients dR_A/dx; unused trailing components are zero.
    pub gradients: Vec<[f64; 3]>,
    pub point: [f64; 3],
    /// `jacobian[i][k] = dx_i / dxi_k`.
    pub jacobian: [[f64; 3]; 3],
    pub det_jacobian: f64,
}

/// Tensor-product quadratic NURBS patch in two or three dimensions.
///
/// Control point `A` has multi-index `(i0, i1, i2)` with
/// `A = i0 + n0 * (i1 + n1 * i2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsPatch {
    knot_vectors: Vec<KnotVector>,
    control_points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl NurbsPatch {
    pub fn new(
        knot_vectors: Vec<KnotVector>,
        control_points: Vec<[f64; 3]>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let dim = knot_vectors.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidPatch(format!(
                "patches must be 2- or 3-dimensional, got {dim} knot vectors"
            )));
        }
        let expected: usize = knot_vectors.iter().map(KnotVector::num_basis).product();
        if control_points.len() != expected || weights.len() != expected {
            return Err(Error::InvalidPatch(format!(
                "expected {expected} control points and weights, got {} and {}",
                control_points.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidPatch(format!("weight {w} is not positive")));
        }
        if control_points
            .iter()
            .any(|p| p.iter().any(|c| !c.is_finite()) || (dim == 2 && p[2] != 0.0))
        {
            return Err(Error::InvalidPatch(
                "control points must be finite (with z = 0 in 2D)".into(),
            ));
        }
        Ok(Self {
            knot_vectors,
            control_points,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.knot_vectors.len()
    }

    pub fn knot_vectors(&self) -> &[KnotVector] {
        &self.knot_vectors
    }

    pub fn control_points(&self) -> &[[f64; 3]] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_control_points(&self) -> usize {
        self.control_points.len()
    }

    /// Basis count per direction, padded with 1 for unused directions.
    pub fn basis_counts(&self) -> [usize; 3] {
        let mut n = [1; 3];
        for (k, kv) in self.knot_vectors.iter().enumerate() {
            n[k] = kv.num_basis();
        }
        n
    }

    /// Element count per direction, padded with 1 for unused directions.
    pub fn element_counts(&self) -> [usize; 3] {
        let mut n = [1; 3];
        for (k, kv) in self.knot_vectors.iter().enumerate() {
            n[k] = kv.num_elements();
        }
        n
    }

    pub fn num_elements(&self) -> usize {
        self.element_counts().iter().product()
    }

    pub fn global_index(&self, multi: [usize; 3]) -> usize {
        let n = self.basis_counts();
        multi[0] + n[0] * (multi[1] + n[1] * multi[2])
    }

    pub fn multi_index(&self, a: usize) -> [usize; 3] {
        let n = self.basis_counts();
        [a % n[0], (a / n[0]) % n[1], a / (n[0] * n[1])]
    }

    /// Element id from per-direction element indices (first direction fastest).
    pub fn element_id(&self, elem: [usize; 3]) -> usize {
        let n = self.element_counts();
        elem[0] + n[0] * (elem[1] + n[1] * elem[2])
    }

    /// Per-direction element indices of element `e`.
    pub fn element_multi_index(&self, e: usize) -> [usize; 3] {
        let n = self.element_counts();
        [e % n[0], (e / n[0]) % n[1], e / (n[0] * n[1])]
    }

    /// Per-direction element indices of the element containing `xi`
    /// (left-closed spans, last span closed on the right).
    pub fn locate(&self, xi: [f64; 3]) -> Result<[usize; 3]> {
        let mut elem = [0; 3];
        for (k, kv) in self.knot_vectors.iter().enumerate() {
            elem[k] = kv.find_span(xi[k])? - DEGREE;
        }
        Ok(elem)
    }

    /// Global control-point indices on a boundary face.
    pub fn face_control_points(&self, face: Face) -> Result<Vec<usize>> {
        let dim = self.dim();
        if face.direction >= dim {
            return Err(Error::InvalidFace { face, dim });
        }
        let n = self.basis_counts();
        let fixed = match face.side {
            Side::Low => 0,
            Side::High => n[face.direction] - 1,
        };
        Ok((0..self.num_control_points())
            .filter(|&a| self.multi_index(a)[face.direction] == fixed)
            .collect())
    }

    fn span_bases(&self, elem: [usize; 3], xi: [f64; 3]) -> [SpanBasis; 3] {
        let unit = SpanBasis {
            span: DEGREE,
            values: [1.0, 0.0, 0.0],
            derivatives: [0.0; SPAN_FUNCTIONS],
        };
        let mut bases = [unit; 3];
        for (k, kv) in self.knot_vectors.iter().enumerate() {
            bases[k] = kv.eval_on_span(kv.element_span(elem[k]), xi[k]);
        }
        bases
    }

    /// Rational basis, physical gradients and geometry at `xi`, evaluated with the
    /// polynomial pieces of element `elem`. Passing an element whose closure holds
    /// `xi` yields one-sided values at element boundaries.
    pub fn eval_on_element(&self, elem: [usize; 3], xi: [f64; 3]) -> Result<BasisGrad> {
        let dim = self.dim();
        let element = self.element_id(elem);
        let bases = self.span_bases(elem, xi);
        let n_local = SPAN_FUNCTIONS.pow(dim as u32);
        let counts = self.basis_counts();

        let mut indices = Vec::with_capacity(n_local);
        let mut weighted = Vec::with_capacity(n_local);
        let mut weighted_d = Vec::with_capacity(n_local);
        let mut total = 0.0;
        let mut total_d = [0.0; 3];
        let k2_range = if dim == 3 { SPAN_FUNCTIONS } else { 1 };
        for k2 in 0..k2_range {
            for k1 in 0..SPAN_FUNCTIONS {
                for k0 in 0..SPAN_FUNCTIONS {
                    let local = [k0, k1, k2];
                    let mut multi = [0; 3];
                    let mut value = 1.0;
                    let mut d = [1.0; 3];
                    for k in 0..3 {
                        let b = &bases[k];
                        multi[k] = b.span - DEGREE + local[k];
                        value *= b.values[local[k]];
                        for (m, dm) in d.iter_mut().enumerate() {
                            *dm *= if m == k {
                                b.derivatives[local[k]]
                            } else {
                                b.values[local[k]]
                            };
                        }
                    }
                    let a = multi[0] + counts[0] * (multi[1] + counts[1] * multi[2]);
                    let w = self.weights[a];
                    indices.push(a);
                    let wn = w * value;
                    let wd = [w * d[0], w * d[1], w * d[2]];
                    total += wn;
                    for m in 0..3 {
                        total_d[m] += wd[m];
                    }
                    weighted.push(wn);
                    weighted_d.push(wd);
                }
            }
        }

        let mut values = Vec::with_capacity(n_local);
        let mut param_grads = Vec::with_capacity(n_local);
        let mut point = [0.0; 3];
        let mut jacobian = [[0.0; 3]; 3];
        for (l, &a) in indices.iter().enumerate() {
            let r = weighted[l] / total;
            let mut dr = [0.0; 3];
            for m in 0..dim {
                dr[m] = (weighted_d[l][m] * total - weighted[l] * total_d[m]) / (total * total);
            }
            let q = &self.control_points[a];
            for i in 0..dim {
                point[i] += r * q[i];
                for m in 0..dim {
                    jacobian[i][m] += dr[m] * q[i];
                }
            }
            values.push(r);
            param_grads.push(dr);
        }

        let (det, inv) = invert(&jacobian, dim);
        if !(det > 0.0) {
            return Err(Error::SingularJacobian {
                element,
                xi,
                det_jacobian: det,
            });
        }
        let gradients = param_grads
            .iter()
            .map(|dr| {
                let mut g = [0.0; 3];
                for (i, gi) in g.iter_mut().enumerate().take(dim) {
                    *gi = (0..dim).map(|m| dr[m] * inv[m][i]).sum();
                }
                g
            })
            .collect();

        Ok(BasisGrad {
            element,
            indices,
            values,
            gradients,
            point,
            jacobian,
            det_jacobian: det,
        })
    }

    /// Rational basis data at `xi`, on the element that contains it.
    pub fn nurbs_basis_grad(&self, xi: [f64; 3]) -> Result<BasisGrad> {
        let elem = self.locate(xi)?;
        self.eval_on_element(elem, xi)
    }

    /// Geometry map x(xi). Does not require an invertible Jacobian.
    pub fn point(&self, xi: [f64; 3]) -> Result<[f64; 3]> {
        let elem = self.locate(xi)?;
        let bases = self.span_bases(elem, xi);
        let counts = self.basis_counts();
        let mut hom = [0.0; 4];
        let k2_range = if self.dim() == 3 { SPAN_FUNCTIONS } else { 1 };
        for k2 in 0..k2_range {
            for k1 in 0..SPAN_FUNCTIONS {
                for k0 in 0..SPAN_FUNCTIONS {
                    let local = [k0, k1, k2];
                    let mut multi = [0; 3];
                    let mut value = 1.0;
                    for k in 0..3 {
                        multi[k] = bases[k].span - DEGREE + local[k];
                        value *= bases[k].values[local[k]];
                    }
                    let a = multi[0] + counts[0] * (multi[1] + counts[1] * multi[2]);
                    let wn = self.weights[a] * value;
                    for i in 0..3 {
                        hom[i] += wn * self.control_points[a][i];
                    }
                    hom[3] += wn;
                }
            }
        }
        Ok([hom[0] / hom[3], hom[1] / hom[3], hom[2] / hom[3]])
    }

    /// Evaluates a field given by control values `u` (`d` components per control point)
    /// at `xi`.
    pub fn field_value(&self, u: &[f64], xi: [f64; 3]) -> Result<[f64; 3]> {
        let dim = self.dim();
        let b = self.nurbs_basis_grad(xi)?;
        let mut out = [0.0; 3];
        for (l, &a) in b.indices.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate().take(dim) {
                *o += b.values[l] * u[a * dim + i];
            }
        }
        Ok(out)
    }

    /// Inserts `value` once into the knot vector of `direction`. The geometry map is
    /// unchanged; control points and weights are recomputed in homogeneous form.
    pub fn insert_knot(&self, direction: usize, value: f64) -> Result<Self> {
        if direction >= self.dim() {
            return Err(Error::InvalidPatch(format!(
                "direction {direction} out of range for a {}-dimensional patch",
                self.dim()
            )));
        }
        let old_kv = &self.knot_vectors[direction];
        let (new_kv, span) = old_kv.with_knot(value)?;
        let old_counts = self.basis_counts();
        let mut new_counts = old_counts;
        new_counts[direction] += 1;
        let n_new: usize = new_counts.iter().product();

        let old_knots = old_kv.knots();
        let p = DEGREE;
        // blending factor for new point i in span k-p+1..=k
        let alpha = |i: usize| (value - old_knots[i]) / (old_knots[i + p] - old_knots[i]);

        let mut control_points = vec![[0.0; 3]; n_new];
        let mut weights = vec![0.0; n_new];
        let old_index = |m: [usize; 3]| m[0] + old_counts[0] * (m[1] + old_counts[1] * m[2]);
        for b in 0..n_new {
            let multi = [
                b % new_counts[0],
                (b / new_counts[0]) % new_counts[1],
                b / (new_counts[0] * new_counts[1]),
            ];
            let i = multi[direction];
            let hom = |j: usize| {
                let mut m = multi;
                m[direction] = j;
                let a = old_index(m);
                let w = self.weights[a];
                let q = self.control_points[a];
                [w * q[0], w * q[1], w * q[2], w]
            };
            let h = if i + p <= span {
                hom(i)
            } else if i > span {
                hom(i - 1)
            } else {
                let t = alpha(i);
                let (hi, hl) = (hom(i), hom(i - 1));
                [
                    t * hi[0] + (1.0 - t) * hl[0],
                    t * hi[1] + (1.0 - t) * hl[1],
                    t * hi[2] + (1.0 - t) * hl[2],
                    t * hi[3] + (1.0 - t) * hl[3],
                ]
            };
            weights[b] = h[3];
            control_points[b] = [h[0] / h[3], h[1] / h[3], h[2] / h[3]];
        }

        let mut knot_vectors = self.knot_vectors.clone();
        knot_vectors[direction] = new_kv;
        Self::new(knot_vectors, control_points, weights)
    }

    /// Splits every element in half in every direction.
    pub fn refine_uniform(&self) -> Result<Self> {
        let mut patch = self.clone();
        for direction in 0..self.dim() {
            let breaks = self.knot_vectors[direction].breakpoints();
            for w in breaks.windows(2) {
                patch = patch.insert_knot(direction, 0.5 * (w[0] + w[1]))?;
            }
        }
        Ok(patch)
    }

    /// Applies `refine_uniform` `times` times.
    pub fn refined(&self, times: usize) -> Result<Self> {
        let mut patch = self.clone();
        for _ in 0..times {
            patch = patch.refine_uniform()?;
        }
        Ok(patch)
    }
}

/// Determinant and inverse of the leading `dim x dim` block.
pub(crate) fn invert(m: &[[f64; 3]; 3], dim: usize) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    if dim == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        inv[0][0] = m[1][1] / det;
        inv[0][1] = -m[0][1] / det;
        inv[1][0] = -m[1][0] / det;
        inv[1][1] = m[0][0] / det;
        (det, inv)
    } else {
        let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
        let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
        let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
        let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
        inv[0][0] = c00 / det;
        inv[1][0] = c01 / det;
        inv[2][0] = c02 / det;
        inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
        inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
        inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
        inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
        inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
        inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
        (det, inv)
    }
}
