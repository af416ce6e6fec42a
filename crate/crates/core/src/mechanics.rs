//! Isotropic linear elasticity: Lamé parameters, small-strain kinematics,
//! dilatational/deviatoric split and stress recovery for each element technology.
//!
//! Symmetric tensors use Voigt order `(xx, yy, xy)` in 2D and
//! `(xx, yy, zz, xy, yz, xz)` in 3D. Shear entries hold tensor components, not
//! engineering strains.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Stiffness and stress formulation of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technology {
    /// Compatible strains everywhere.
    Cs,
    /// Corner-interpolated strains in the first-Lamé-parameter term only.
    Cas1,
    /// Corner-interpolated dilatational strains, compatible deviatoric strains.
    Cas2,
}

impl Technology {
    pub const ALL: [Technology; 3] = [Technology::Cs, Technology::Cas1, Technology::Cas2];

    pub fn as_str(self) -> &'static str {
        match self {
            Technology::Cs => "cs",
            Technology::Cas1 => "cas1",
            Technology::Cas2 => "cas2",
        }
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technology {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cs" => Ok(Technology::Cs),
            "cas1" => Ok(Technology::Cas1),
            "cas2" => Ok(Technology::Cas2),
            _ => Err(format!("unknown technology '{s}' (expected cs, cas1 or cas2)")),
        }
    }
}

/// First and second Lamé parameters from Young's modulus and Poisson's ratio.
pub fn lame_from_young_poisson(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !(young > 0.0) || !young.is_finite() {
        return Err(Error::InvalidMaterial(format!(
            "Young's modulus must be positive, got {young}"
        )));
    }
    if !(0.0..0.5).contains(&poisson) {
        return Err(Error::InvalidMaterial(format!(
            "Poisson's ratio must lie in [0, 0.5), got {poisson}"
        )));
    }
    let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = young / (2.0 * (1.0 + poisson));
    Ok((lambda, mu))
}

/// Linear isotropic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    young: f64,
    poisson: f64,
    lambda: f64,
    mu: f64,
}

impl Material {
    pub fn new(young: f64, poisson: f64) -> Result<Self> {
        let (lambda, mu) = lame_from_young_poisson(young, poisson)?;
        Ok(Self {
            young,
            poisson,
            lambda,
            mu,
        })
    }

    /// Material given directly by Lamé parameters; Young's modulus and Poisson's
    /// ratio are back-computed. `lambda` may be zero.
    pub fn from_lame(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(lambda >= 0.0) || !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidMaterial(format!(
                "need lambda >= 0 and mu > 0, got lambda={lambda} mu={mu}"
            )));
        }
        let young = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
        let poisson = lambda / (2.0 * (lambda + mu));
        Ok(Self {
            young,
            poisson,
            lambda,
            mu,
        })
    }

    pub fn young(&self) -> f64 {
        self.young
    }

    pub fn poisson(&self) -> f64 {
        self.poisson
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Symmetric second-order tensor in 2 or 3 dimensions.
///
/// Only the upper triangle is stored, so symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor {
    dim: usize,
    // always 3D Voigt slots (xx, yy, zz, xy, yz, xz); unused slots stay zero in 2D
    slots: [f64; 6],
}

const fn slot(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (1, 2) | (2, 1) => 4,
        _ => 5,
    }
}

impl SymTensor {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "tensor dimension must be 2 or 3");
        Self { dim, slots: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            t.slots[i] = 1.0;
        }
        t
    }

    /// Tensor from components in this module's Voigt order.
    pub fn from_voigt(dim: usize, voigt: &[f64]) -> Self {
        let mut t = Self::zero(dim);
        match dim {
            2 => {
                assert_eq!(voigt.len(), 3);
                t.slots[0] = voigt[0];
                t.slots[1] = voigt[1];
                t.slots[3] = voigt[2];
            }
            _ => {
                assert_eq!(voigt.len(), 6);
                t.slots.copy_from_slice(voigt);
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.slots[slot(i, j)]
    }

    pub fn voigt(&self) -> Vec<f64> {
        match self.dim {
            2 => vec![self.slots[0], self.slots[1], self.slots[3]],
            _ => self.slots.to_vec(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.slots[..self.dim].iter().sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = *self;
        t.slots.iter_mut().for_each(|v| *v *= s);
        t
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut t = *self;
        for (a, b) in t.slots.iter_mut().zip(&other.slots) {
            *a += b;
        }
        t
    }

    /// Frobenius inner product.
    pub fn contract(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j) * other.get(i, j);
            }
        }
        s
    }
}

/// Infinitesimal strain `(grad u + grad u^T) / 2`, with `grad_u[i][j] = du_i/dx_j`.
pub fn strain_from_displacement_gradient(grad_u: &[[f64; 3]; 3], dim: usize) -> SymTensor {
    let mut t = SymTensor::zero(dim);
    for i in 0..dim {
        for j in i..dim {
            t.slots[slot(i, j)] = 0.5 * (grad_u[i][j] + grad_u[j][i]);
        }
    }
    t
}

/// Dilatational `(tr e / d) I` and deviatoric `e - (tr e / d) I` parts.
pub fn split_dil_dev(strain: &SymTensor) -> (SymTensor, SymTensor) {
    let d = strain.dim();
    let dil = SymTensor::identity(d).scaled(strain.trace() / d as f64);
    let dev = strain.plus(&dil.scaled(-1.0));
    (dil, dev)
}

/// Strain tensor used by CAS2 elements: the assumed dilatational part with trace
/// `assumed_trace` plus the compatible deviatoric part.
pub fn cas2_strain(compatible: &SymTensor, assumed_trace: f64) -> SymTensor {
    let d = compatible.dim();
    let (_, dev) = split_dil_dev(compatible);
    dev.plus(&SymTensor::identity(d).scaled(assumed_trace / d as f64))
}

/// Strain information available at a point, matching the element technology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrainState {
    /// Compatible strain only (CS).
    Compatible(SymTensor),
    /// Compatible strain plus the trace of the interpolated assumed strain (CAS1).
    Cas1 {
        compatible: SymTensor,
        assumed_trace: f64,
    },
    /// Assumed-dilatational plus compatible-deviatoric strain (CAS2).
    Cas2 { assumed: SymTensor },
}

impl StrainState {
    /// Builds the state for `technology` from a compatible strain and the
    /// interpolated corner trace.
    pub fn for_technology(technology: Technology, compatible: SymTensor, assumed_trace: f64) -> Self {
        match technology {
            Technology::Cs => StrainState::Compatible(compatible),
            Technology::Cas1 => StrainState::Cas1 {
                compatible,
                assumed_trace,
            },
            Technology::Cas2 => StrainState::Cas2 {
                assumed: cas2_strain(&compatible, assumed_trace),
            },
        }
    }
}

/// Cauchy stress for the given technology.
pub fn stress(technology: Technology, material: &Material, strain: &StrainState) -> Result<SymTensor> {
    let (lambda, mu) = (material.lambda(), material.mu());
    let (volumetric, shear) = match (technology, strain) {
        (Technology::Cs, StrainState::Compatible(e)) => (e.trace(), e),
        (
            Technology::Cas1,
            StrainState::Cas1 {
                compatible,
                assumed_trace,
            },
        ) => (*assumed_trace, compatible),
        (Technology::Cas2, StrainState::Cas2 { assumed }) => (assumed.trace(), assumed),
        _ => return Err(Error::TechnologyMismatch(technology)),
    };
    let d = shear.dim();
    Ok(SymTensor::identity(d)
        .scaled(lambda * volumetric)
        .plus(&shear.scaled(2.0 * mu)))
}

/// One third of the three-dimensional stress trace.
pub fn hydrostatic(sigma: &SymTensor) -> f64 {
    sigma.trace() / 3.0
}

/// Out-of-plane normal stress in plane strain.
pub fn sigma_zz_plane_strain(poisson: f64, sigma_xx: f64, sigma_yy: f64) -> f64 {
    poisson * (sigma_xx + sigma_yy)
}

/// Lifts a plane-strain stress to 3D by adding the out-of-plane normal stress.
pub fn plane_strain_to_3d(sigma: &SymTensor, poisson: f64) -> SymTensor {
    assert_eq!(sigma.dim(), 2);
    let mut t = SymTensor::zero(3);
    t.slots = sigma.slots;
    t.slots[2] = sigma_zz_plane_strain(poisson, sigma.get(0, 0), sigma.get(1, 1));
    t
}

/// Hydrostatic stress of a 2D (plane-strain) or 3D stress tensor.
pub fn hydrostatic_stress(sigma: &SymTensor, poisson: f64) -> f64 {
    if sigma.dim() == 2 {
        hydrostatic(&plane_strain_to_3d(sigma, poisson))
    } else {
        hydrostatic(sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lame_values() {
        let (l, m) = lame_from_young_poisson(240.565, 0.4999).unwrap();
        // E nu / ((1+nu)(1-2nu)) and E / (2(1+nu)) evaluated by hand
        let l_ref = 240.565 * 0.4999 / (1.4999 * 0.0002);
        let m_ref = 240.565 / 2.9998;
        assert!((l - l_ref).abs() / l_ref < 1e-12);
        assert!((m - m_ref).abs() / m_ref < 1e-14);
        assert!((l - 4.0089e5).abs() / 4.0089e5 < 1e-4);
        assert!((m - 80.194).abs() < 1e-3);

        assert_eq!(lame_from_young_poisson(1.0, 0.0).unwrap(), (0.0, 0.5));
        let (_, m) = lame_from_young_poisson(250.0, 0.49999).unwrap();
        assert!((m - 83.334).abs() < 1e-3);
    }

    #[test]
    fn lame_rejects_bad_inputs() {
        assert!(lame_from_young_poisson(1.0, 0.5).is_err());
        assert!(lame_from_young_poisson(1.0, -0.1).is_err());
        assert!(lame_from_young_poisson(0.0, 0.3).is_err());
        assert!(Material::new(1.0, 0.6).is_err());
    }

    #[test]
    fn lambda_grows_toward_incompressibility() {
        let mut prev = 0.0;
        for nu in [0.3, 0.45, 0.49, 0.499, 0.4999, 0.49999] {
            let (l, _) = lame_from_young_poisson(1.0, nu).unwrap();
            assert!(l > prev);
            prev = l;
        }
        assert!(prev > 1e4);
    }

    #[test]
    fn from_lame_round_trip() {
        let m = Material::new(1e5, 0.3).unwrap();
        let n = Material::from_lame(m.lambda(), m.mu()).unwrap();
        assert!((n.young() - 1e5).abs() < 1e-9);
        assert!((n.poisson() - 0.3).abs() < 1e-15);
        assert_eq!(Material::from_lame(0.0, 1.0).unwrap().poisson(), 0.0);
    }

    #[test]
    fn strain_examples() {
        let mut g = [[0.0; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        assert_eq!(strain_from_displacement_gradient(&g, 3), SymTensor::identity(3));
        let rot = [[0.0, -0.3, 0.2], [0.3, 0.0, -0.7], [-0.2, 0.7, 0.0]];
        assert_eq!(strain_from_displacement_gradient(&rot, 3), SymTensor::zero(3));
    }

    #[test]
    fn split_examples() {
        let (dil, dev) = split_dil_dev(&SymTensor::identity(3));
        assert_eq!(dil, SymTensor::identity(3));
        assert_eq!(dev, SymTensor::zero(3));
        let traceless = SymTensor::from_voigt(2, &[1.0, -1.0, 0.5]);
        let (dil, dev) = split_dil_dev(&traceless);
        assert_eq!(dil, SymTensor::zero(2));
        assert_eq!(dev, traceless);
    }

    #[test]
    fn stress_examples() {
        let m = Material::from_lame(1.0, 1.0).unwrap();
        let s = stress(Technology::Cs, &m, &StrainState::Compatible(SymTensor::identity(2))).unwrap();
        assert_eq!(s, SymTensor::identity(2).scaled(4.0));
        let zero = StrainState::Compatible(SymTensor::zero(3));
        assert_eq!(stress(Technology::Cs, &m, &zero).unwrap(), SymTensor::zero(3));
        assert!(matches!(
            stress(Technology::Cas1, &m, &zero),
            Err(Error::TechnologyMismatch(Technology::Cas1))
        ));
    }

    #[test]
    fn lambda_zero_technologies_agree() {
        let m = Material::from_lame(0.0, 2.5).unwrap();
        let e = SymTensor::from_voigt(2, &[0.1, -0.3, 0.7]);
        let cs = stress(Technology::Cs, &m, &StrainState::Compatible(e)).unwrap();
        let c1 = stress(
            Technology::Cas1,
            &m,
            &StrainState::Cas1 { compatible: e, assumed_trace: 42.0 },
        )
        .unwrap();
        let c2 = stress(Technology::Cas2, &m, &StrainState::Cas2 { assumed: e }).unwrap();
        assert_eq!(cs, c1);
        assert_eq!(cs, c2);
    }

    #[test]
    fn hydrostatic_examples() {
        assert_eq!(hydrostatic(&SymTensor::identity(3).scaled(7.0)), 7.0);
        let shear = SymTensor::from_voigt(3, &[0.0, 0.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(hydrostatic(&shear), 0.0);
        assert_eq!(sigma_zz_plane_strain(0.5, 1.0, 1.0), 1.0);
        let s2 = SymTensor::from_voigt(2, &[1.0, 2.0, 5.0]);
        assert!((hydrostatic_stress(&s2, 0.25) - (3.0 + 0.75) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn technology_strings() {
        for t in Technology::ALL {
            assert_eq!(t.to_string().parse::<Technology>().unwrap(), t);
        }
        assert!("cas3".parse::<Technology>().is_err());
    }

    fn voigt_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, if d == 2 { 3 } else { 6 })
    }

    proptest! {
        #[test]
        fn strain_matches_index_formula(g in prop::collection::vec(-5.0f64..5.0, 9)) {
            let mut grad = [[0.0; 3]; 3];
            for i in 0..3 { for j in 0..3 { grad[i][j] = g[3 * i + j]; } }
            let e = strain_from_displacement_gradient(&grad, 3);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(e.get(i, j), e.get(j, i));
                    prop_assert!((e.get(i, j) - 0.5 * (g[3 * i + j] + g[3 * j + i])).abs() < 1e-15);
                }
            }
        }

        #[test]
        fn split_reconstructs(v in voigt_strategy(3)) {
            let e = SymTensor::from_voigt(3, &v);
            let (dil, dev) = split_dil_dev(&e);
            let back = dil.plus(&dev);
            for (a, b) in back.voigt().iter().zip(&v) {
                prop_assert!((a - b).abs() < 1e-14);
            }
            prop_assert!(dev.trace().abs() <= 1e-14);
        }

        #[test]
        fn cs_stress_matches_index_formula(v in voigt_strategy(2), l in 0.0f64..10.0, m in 0.1f64..10.0) {
            let e = SymTensor::from_voigt(2, &v);
            let mat = Material::from_lame(l, m).unwrap();
            let s = stress(Technology::Cs, &mat, &StrainState::Compatible(e)).unwrap();
            let tr = v[0] + v[1];
            for i in 0..2 {
                for j in 0..2 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let expect = l * tr * delta + 2.0 * m * e.get(i, j);
                    prop_assert!((s.get(i, j) - expect).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn cas2_strain_has_assumed_trace(v in voigt_strategy(3), tr in -5.0f64..5.0) {
            let e = SymTensor::from_voigt(3, &v);
            let c = cas2_strain(&e, tr);
            prop_assert!((c.trace() - tr).abs() < 1e-13);
            let (_, dev_c) = split_dil_dev(&c);
            let (_, dev_e) = split_dil_dev(&e);
            for (a, b) in dev_c.voigt().iter().zip(dev_e.voigt()) {
                prop_assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
