use super::{CornerTable, Mesh};
use crate::error::{Error, Result};
use crate::mechanics::{
    hydrostatic_stress, strain_from_displacement_gradient, stress, Material, StrainState, SymTensor,
    Technology,
};
use crate::quadrature::ElementBounds;
use crate::splines::BasisGrad;

use super::corner_interpolate;

/// Displacement, strains and stresses at one point of a solved mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: [f64; 3],
    pub displacement: [f64; 3],
    /// Compatible strain of the discrete displacement.
    pub strain: SymTensor,
    /// Corner interpolant of the compatible strain trace.
    pub assumed_trace: f64,
    /// Stress by the technology's recovery formula (in-plane components in 2D).
    pub stress: SymTensor,
    /// One third of the 3D stress trace; plane strain includes the out-of-plane stress.
    pub hydrostatic: f64,
}

/// Evaluates solution fields with the stress recovery of one element technology.
#[derive(Debug, Clone)]
pub struct FieldEvaluator<'a> {
    mesh: &'a Mesh,
    corners: &'a CornerTable,
    material: Material,
    technology: Technology,
    u: &'a [f64],
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(
        mesh: &'a Mesh,
        corners: &'a CornerTable,
        material: Material,
        technology: Technology,
        u: &'a [f64],
    ) -> Result<Self> {
        if u.len() != mesh.num_dofs() {
            return Err(Error::InvalidPatch(format!(
                "displacement vector has length {}, mesh has {} unknowns",
                u.len(),
                mesh.num_dofs()
            )));
        }
        Ok(Self {
            mesh,
            corners,
            material,
            technology,
            u,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn technology(&self) -> Technology {
        self.technology
    }

    /// Trace of the compatible strain at each of the element's corners.
    pub fn corner_traces(&self, elem: [usize; 3]) -> Vec<f64> {
        let d = self.mesh.dim();
        let conn = self.mesh.connectivity(self.mesh.patch().element_id(elem));
        self.corners
            .element_corner_gradients(elem)
            .iter()
            .map(|grads| {
                conn.iter()
                    .zip(grads)
                    .map(|(&a, g)| (0..d).map(|i| self.u[a * d + i] * g[i]).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    /// Fields at parent coordinates `parent` in `[-1, 1]^d` of element `elem`.
    pub fn sample(&self, elem: [usize; 3], parent: [f64; 3]) -> Result<FieldSample> {
        let bounds = ElementBounds::of(self.mesh.patch(), elem);
        let basis = self.mesh.patch().eval_on_element(elem, bounds.parametric(parent))?;
        let traces = self.corner_traces(elem);
        self.sample_with(&basis, &traces, parent)
    }

    /// Fields from precomputed basis data and corner traces of the containing element.
    pub fn sample_with(&self, basis: &BasisGrad, corner_traces: &[f64], parent: [f64; 3]) -> Result<FieldSample> {
        let d = self.mesh.dim();
        let mut displacement = [0.0; 3];
        let mut grad_u = [[0.0; 3]; 3];
        for ((&a, &n), g) in basis.indices.iter().zip(&basis.values).zip(&basis.gradients) {
            for i in 0..d {
                let ua = self.u[a * d + i];
                displacement[i] += n * ua;
                for m in 0..d {
                    grad_u[i][m] += ua * g[m];
                }
            }
        }
        let strain = strain_from_displacement_gradient(&grad_u, d);
        let assumed_trace = corner_interpolate(corner_traces, parent, d)?;
        let state = StrainState::for_technology(self.technology, strain, assumed_trace);
        let sigma = stress(self.technology, &self.material, &state)?;
        Ok(FieldSample {
            point: basis.point,
            displacement,
            strain,
            assumed_trace,
            stress: sigma,
            hydrostatic: hydrostatic_stress(&sigma, self.material.poisson()),
        })
    }
}
