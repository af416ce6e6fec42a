use rayon::prelude::*;

use super::Mesh;
use crate::error::{Error, Result};
use crate::splines::SPAN_FUNCTIONS;

/// Multilinear Lagrange weights of the `2^dim` element corners at parent
/// coordinates `parent`. Corner `l` sits at the upper end of direction `k` when
/// bit `k` of `l` is set.
pub fn corner_weights(parent: [f64; 3], dim: usize) -> [f64; 8] {
    let mut w = [0.0; 8];
    for (l, wl) in w.iter_mut().enumerate().take(1 << dim) {
        *wl = (0..dim)
            .map(|k| {
                if (l >> k) & 1 == 1 {
                    0.5 * (1.0 + parent[k])
                } else {
                    0.5 * (1.0 - parent[k])
                }
            })
            .product();
    }
    w
}

/// Multilinear interpolation of corner values at `parent` in `[-1, 1]^dim`.
pub fn corner_interpolate(values: &[f64], parent: [f64; 3], dim: usize) -> Result<f64> {
    let expected = 1 << dim;
    if values.len() != expected {
        return Err(Error::CornerCount {
            expected,
            got: values.len(),
        });
    }
    let w = corner_weights(parent, dim);
    Ok(values.iter().zip(&w).map(|(v, w)| v * w).sum())
}

/// Physical basis gradients at every knot-line intersection of a mesh.
///
/// With simple interior knots the basis is C1, so the gradient of each function
/// at a vertex is single-valued; the table stores it once and every element
/// touching the vertex reads from it.
#[derive(Debug, Clone)]
pub struct CornerTable {
    dim: usize,
    vertex_counts: [usize; 3],
    element_counts: [usize; 3],
    points: Vec<[f64; 3]>,
    // per vertex, gradients of the 3^d functions of its canonical element
    gradients: Vec<[f64; 3]>,
}

impl CornerTable {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let patch = mesh.patch();
        let dim = patch.dim();
        let element_counts = patch.element_counts();
        let mut vertex_counts = [1; 3];
        for k in 0..dim {
            vertex_counts[k] = element_counts[k] + 1;
        }
        let breakpoints: Vec<Vec<f64>> = patch.knot_vectors().iter().map(|kv| kv.breakpoints()).collect();
        let n_vertices: usize = vertex_counts.iter().product();
        let n_local = SPAN_FUNCTIONS.pow(dim as u32);

        let per_vertex: Vec<([f64; 3], Vec<[f64; 3]>)> = (0..n_vertices)
            .into_par_iter()
            .map(|v| {
                let vm = [
                    v % vertex_counts[0],
                    (v / vertex_counts[0]) % vertex_counts[1],
                    v / (vertex_counts[0] * vertex_counts[1]),
                ];
                let mut xi = [0.0; 3];
                let mut elem = [0; 3];
                for k in 0..dim {
                    xi[k] = breakpoints[k][vm[k]];
                    elem[k] = canonical(vm[k], element_counts[k]);
                }
                let b = patch.eval_on_element(elem, xi)?;
                Ok((b.point, b.gradients))
            })
            .collect::<Result<_>>()?;

        let mut points = Vec::with_capacity(n_vertices);
        let mut gradients = Vec::with_capacity(n_vertices * n_local);
        for (p, g) in per_vertex {
            points.push(p);
            gradients.extend(g);
        }
        Ok(Self {
            dim,
            vertex_counts,
            element_counts,
            points,
            gradients,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn vertex_counts(&self) -> [usize; 3] {
        self.vertex_counts
    }

    pub fn vertex_id(&self, vm: [usize; 3]) -> usize {
        vm[0] + self.vertex_counts[0] * (vm[1] + self.vertex_counts[1] * vm[2])
    }

    /// Physical position of a vertex.
    pub fn point(&self, vertex: usize) -> [f64; 3] {
        self.points[vertex]
    }

    /// Vertex multi-index of corner `l` of element `elem`.
    pub fn corner_vertex(&self, elem: [usize; 3], l: usize) -> [usize; 3] {
        let mut vm = [0; 3];
        for k in 0..self.dim {
            vm[k] = elem[k] + ((l >> k) & 1);
        }
        vm
    }

    /// Gradients of the element's `3^d` local functions (local lexicographic order)
    /// at each of its `2^d` corners: `result[l][a]`.
    pub fn element_corner_gradients(&self, elem: [usize; 3]) -> Vec<Vec<[f64; 3]>> {
        let dim = self.dim;
        let n_local = SPAN_FUNCTIONS.pow(dim as u32);
        (0..1usize << dim)
            .map(|l| {
                let vm = self.corner_vertex(elem, l);
                let base = self.vertex_id(vm) * n_local;
                let mut canon = [0; 3];
                for k in 0..dim {
                    canon[k] = canonical(vm[k], self.element_counts[k]);
                }
                (0..n_local)
                    .map(|a| {
                        let local = [a % 3, (a / 3) % 3, a / 9];
                        let mut offset = [0; 3];
                        for k in 0..dim {
                            // global per-direction index elem + local, relative to the
                            // canonical element's first function
                            let rel = (elem[k] + local[k]) as isize - canon[k] as isize;
                            if !(0..SPAN_FUNCTIONS as isize).contains(&rel) {
                                // the function's support ends at this vertex
                                return [0.0; 3];
                            }
                            offset[k] = rel as usize;
                        }
                        self.gradients[base + offset[0] + 3 * offset[1] + 9 * offset[2]]
                    })
                    .collect()
            })
            .collect()
    }
}

// element whose polynomial pieces evaluate a vertex: the one to its upper side,
// except on the last breakpoint
fn canonical(vertex: usize, elements: usize) -> usize {
    vertex.min(elements - 1)
}
