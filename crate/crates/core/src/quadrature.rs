//! Gauss–Legendre rules on the parent element `[-1, 1]^d` and their mapping to
//! parametric and physical space.

use crate::error::{Error, Result};
use crate::splines::{BasisGrad, NurbsPatch};

/// One-dimensional Gauss–Legendre points and weights for `n` in {2, 3}.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match n {
        2 => {
            let a = 1.0 / 3f64.sqrt();
            Ok((vec![-a, a], vec![1.0, 1.0]))
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            Ok((vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]))
        }
        _ => Err(Error::UnsupportedQuadrature(n)),
    }
}

/// Tensor-product Gauss–Legendre rule on `[-1, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points_per_direction: usize,
    dim: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(points_per_direction: usize, dim: usize) -> Result<Self> {
        let (p1, w1) = gauss_legendre(points_per_direction)?;
        let n = points_per_direction;
        let count = n.pow(dim as u32);
        let mut points = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for q in 0..count {
            let mut pt = [0.0; 3];
            let mut w = 1.0;
            let mut rest = q;
            for x in pt.iter_mut().take(dim) {
                let i = rest % n;
                rest /= n;
                *x = p1[i];
                w *= w1[i];
            }
            points.push(pt);
            weights.push(w);
        }
        Ok(Self {
            points_per_direction,
            dim,
            points,
            weights,
        })
    }

    pub fn points_per_direction(&self) -> usize {
        self.points_per_direction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Parametric bounds of an element, one interval per direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementBounds {
    pub dim: usize,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl ElementBounds {
    pub fn of(patch: &NurbsPatch, elem: [usize; 3]) -> Self {
        let mut lower = [0.0; 3];
        let mut upper = [0.0; 3];
        for (k, kv) in patch.knot_vectors().iter().enumerate() {
            let (a, b) = kv.element_bounds(elem[k]);
            lower[k] = a;
            upper[k] = b;
        }
        Self {
            dim: patch.dim(),
            lower,
            upper,
        }
    }

    /// Parametric point of parent coordinates `parent` in `[-1, 1]^d`.
    pub fn parametric(&self, parent: [f64; 3]) -> [f64; 3] {
        let mut xi = [0.0; 3];
        for k in 0..self.dim {
            xi[k] = self.lower[k] + 0.5 * (self.upper[k] - self.lower[k]) * (parent[k] + 1.0);
        }
        xi
    }

    /// Jacobian determinant of the parent-to-parametric map.
    pub fn parent_scaling(&self) -> f64 {
        (0..self.dim)
            .map(|k| 0.5 * (self.upper[k] - self.lower[k]))
            .product()
    }
}

/// A quadrature point carried to physical space together with the basis data there.
#[derive(Debug, Clone)]
pub struct MappedPoint {
    pub parent: [f64; 3],
    pub xi: [f64; 3],
    /// Gauss weight times parametric scaling times det J.
    pub weight: f64,
    pub basis: BasisGrad,
}

/// Maps every point of `rule` into element `elem` of `patch`.
pub fn map_to_element(
    rule: &QuadratureRule,
    patch: &NurbsPatch,
    elem: [usize; 3],
) -> Result<Vec<MappedPoint>> {
    let bounds = ElementBounds::of(patch, elem);
    let scale = bounds.parent_scaling();
    if !(scale > 0.0) {
        return Err(Error::InvalidPatch(format!("element {elem:?} has zero length")));
    }
    rule.points()
        .iter()
        .zip(rule.weights())
        .map(|(&parent, &w)| {
            let xi = bounds.parametric(parent);
            let basis = patch.eval_on_element(elem, xi)?;
            Ok(MappedPoint {
                parent,
                xi,
                weight: w * scale * basis.det_jacobian,
                basis,
            })
        })
        .collect()
}
