//! Tensor-product quadratic NURBS: knot vectors, basis evaluation, knot
//! insertion and the geometry map with its Jacobian.
//!
//! Control points are numbered lexicographically with the first parametric
//! direction running fastest. 2D patches store control points with `z = 0`.

mod knots;
mod patch;

pub use knots::{KnotVector, SpanBasis, DEGREE, SPAN_FUNCTIONS};
pub use patch::{BasisGrad, Face, NurbsPatch, Side};

use crate::error::Result;

/// Single-element quadratic patch reproducing the bilinear map through `corners`,
/// given in parametric-corner order `(0,0), (1,0), (0,1), (1,1)`.
pub fn quadrilateral(corners: [[f64; 2]; 4]) -> Result<NurbsPatch> {
    let kv = KnotVector::uniform(1)?;
    let mut control_points = Vec::with_capacity(9);
    // Greville abscissae of the single-element quadratic space are 0, 1/2, 1.
    for j in 0..3 {
        for i in 0..3 {
            let (s, t) = (i as f64 / 2.0, j as f64 / 2.0);
            let mut p = [0.0; 3];
            for k in 0..2 {
                p[k] = (1.0 - s) * (1.0 - t) * corners[0][k]
                    + s * (1.0 - t) * corners[1][k]
                    + (1.0 - s) * t * corners[2][k]
                    + s * t * corners[3][k];
            }
            control_points.push(p);
        }
    }
    NurbsPatch::new(vec![kv.clone(), kv], control_points, vec![1.0; 9])
}

/// Single-element quadratic patch reproducing the trilinear map through `corners`,
/// given lexicographically over the parametric cube (first direction fastest).
pub fn hexahedron(corners: [[f64; 3]; 8]) -> Result<NurbsPatch> {
    let kv = KnotVector::uniform(1)?;
    let mut control_points = Vec::with_capacity(27);
    for k in 0..3 {
        for j in 0..3 {
            for i in 0..3 {
                let s = [i as f64 / 2.0, j as f64 / 2.0, k as f64 / 2.0];
                let mut p = [0.0; 3];
                for (c, corner) in corners.iter().enumerate() {
                    let mut w = 1.0;
                    for d in 0..3 {
                        w *= if (c >> d) & 1 == 1 { s[d] } else { 1.0 - s[d] };
                    }
                    for d in 0..3 {
                        p[d] += w * corner[d];
                    }
                }
                control_points.push(p);
            }
        }
    }
    NurbsPatch::new(vec![kv.clone(), kv.clone(), kv], control_points, vec![1.0; 27])
}

/// Exact quarter annulus between radii `inner` and `outer` in the first quadrant.
///
/// Direction 0 runs radially from `inner` (`xi0 = 0`) to `outer` (`xi0 = 1`);
/// direction 1 runs along the arcs from the positive x axis (`xi1 = 0`) to the
/// positive y axis (`xi1 = 1`).
pub fn quarter_annulus(inner: f64, outer: f64) -> Result<NurbsPatch> {
    let kv = KnotVector::uniform(1)?;
    let w_mid = std::f64::consts::FRAC_1_SQRT_2;
    let mut control_points = Vec::with_capacity(9);
    let mut weights = Vec::with_capacity(9);
    let radii = [inner, 0.5 * (inner + outer), outer];
    for (arc, w) in [([1.0, 0.0], 1.0), ([1.0, 1.0], w_mid), ([0.0, 1.0], 1.0)] {
        for r in radii {
            control_points.push([r * arc[0], r * arc[1], 0.0]);
            weights.push(w);
        }
    }
    NurbsPatch::new(vec![kv.clone(), kv], control_points, weights)
}
