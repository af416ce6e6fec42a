//! Element stiffness matrices.
//!
//! Rows and columns are ordered `(a, i) -> a * d + i`, where `a` is the local
//! basis function (lexicographic, first direction fastest) and `i` the
//! displacement component.

use super::corners::{corner_weights, CornerTable};
use super::Mesh;
use crate::error::Result;
use crate::mechanics::{Material, Technology};
use crate::quadrature::{map_to_element, MappedPoint, QuadratureRule};

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrix {
    size: usize,
    data: Vec<f64>,
}

impl ElementMatrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.size + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks(self.size).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Adds `scale * u_(a,i) v_(b,j)` for all rows `(a, i)` and columns `(b, j)`.
    fn add_outer(&mut self, scale: f64, u: &[[f64; 3]], v: &[[f64; 3]], dim: usize) {
        let n = self.size;
        for (a, ua) in u.iter().enumerate() {
            for i in 0..dim {
                let s = scale * ua[i];
                if s == 0.0 {
                    continue;
                }
                let row = &mut self.data[(a * dim + i) * n..(a * dim + i + 1) * n];
                for (b, vb) in v.iter().enumerate() {
                    for j in 0..dim {
                        row[b * dim + j] += s * vb[j];
                    }
                }
            }
        }
    }
}

/// The two shear-modulus terms shared by all technologies:
/// `mu (delta_ij grad N_a . grad N_b + dN_a/dx_j dN_b/dx_i)`.
fn add_shear_terms(k: &mut ElementMatrix, weight_mu: f64, g: &[[f64; 3]], dim: usize) {
    let n = k.size;
    for (a, ga) in g.iter().enumerate() {
        for (b, gb) in g.iter().enumerate() {
            let dot: f64 = (0..dim).map(|m| ga[m] * gb[m]).sum();
            for i in 0..dim {
                let row = (a * dim + i) * n + b * dim;
                for j in 0..dim {
                    let delta = if i == j { dot } else { 0.0 };
                    k.data[row + j] += weight_mu * (delta + ga[j] * gb[i]);
                }
            }
        }
    }
}

/// Corner gradients interpolated to parent coordinates `parent`.
fn interpolate_gradients(corner_grads: &[Vec<[f64; 3]>], parent: [f64; 3], dim: usize) -> Vec<[f64; 3]> {
    let w = corner_weights(parent, dim);
    let n_local = corner_grads[0].len();
    let mut out = vec![[0.0; 3]; n_local];
    for (l, grads) in corner_grads.iter().enumerate() {
        for (o, g) in out.iter_mut().zip(grads) {
            for m in 0..dim {
                o[m] += w[l] * g[m];
            }
        }
    }
    out
}

fn mapped_points(mesh: &Mesh, elem: [usize; 3], rule: &QuadratureRule) -> Result<Vec<MappedPoint>> {
    map_to_element(rule, mesh.patch(), elem)
}

/// Shear-modulus part of the stiffness, identical for every technology.
pub fn element_shear_stiffness(points: &[MappedPoint], material: &Material, dim: usize) -> ElementMatrix {
    let n = points[0].basis.gradients.len() * dim;
    let mut k = ElementMatrix::zeros(n);
    for p in points {
        add_shear_terms(&mut k, p.weight * material.mu(), &p.basis.gradients, dim);
    }
    k
}

/// Volumetric part of the stiffness for the given technology. `corner_grads` is
/// required for CAS1 and CAS2.
pub fn element_volumetric_stiffness(
    technology: Technology,
    points: &[MappedPoint],
    material: &Material,
    corner_grads: Option<&[Vec<[f64; 3]>]>,
    dim: usize,
) -> ElementMatrix {
    let n = points[0].basis.gradients.len() * dim;
    let mut k = ElementMatrix::zeros(n);
    let (lambda, mu) = (material.lambda(), material.mu());
    let two_mu_over_d = 2.0 * mu / dim as f64;
    for p in points {
        let g = &p.basis.gradients;
        match technology {
            Technology::Cs => k.add_outer(p.weight * lambda, g, g, dim),
            Technology::Cas1 => {
                let corners = corner_grads.expect("CAS1 needs corner gradients");
                let h = interpolate_gradients(corners, p.parent, dim);
                k.add_outer(p.weight * lambda, &h, &h, dim);
            }
            Technology::Cas2 => {
                let corners = corner_grads.expect("CAS2 needs corner gradients");
                let h = interpolate_gradients(corners, p.parent, dim);
                k.add_outer(p.weight * (lambda + two_mu_over_d), &h, &h, dim);
                k.add_outer(-p.weight * two_mu_over_d, g, g, dim);
            }
        }
    }
    k
}

fn assemble_element(
    technology: Technology,
    mesh: &Mesh,
    elem: [usize; 3],
    material: &Material,
    rule: &QuadratureRule,
    corners: Option<&CornerTable>,
) -> Result<ElementMatrix> {
    let dim = mesh.dim();
    let points = mapped_points(mesh, elem, rule)?;
    let corner_grads = corners.map(|c| c.element_corner_gradients(elem));
    let mut k = element_shear_stiffness(&points, material, dim);
    let vol = element_volumetric_stiffness(technology, &points, material, corner_grads.as_deref(), dim);
    k.add_assign(&vol);
    Ok(k)
}

/// Compatible-strain element stiffness.
pub fn element_stiffness_cs(
    mesh: &Mesh,
    elem: [usize; 3],
    material: &Material,
    rule: &QuadratureRule,
) -> Result<ElementMatrix> {
    assemble_element(Technology::Cs, mesh, elem, material, rule, None)
}

/// CAS1 element stiffness: the first-Lamé-parameter term uses gradients
/// interpolated multilinearly from the element corners.
pub fn element_stiffness_cas1(
    mesh: &Mesh,
    elem: [usize; 3],
    material: &Material,
    rule: &QuadratureRule,
    corners: &CornerTable,
) -> Result<ElementMatrix> {
    assemble_element(Technology::Cas1, mesh, elem, material, rule, Some(corners))
}

/// CAS2 element stiffness: the dilatational strain is interpolated from the
/// element corners, the deviatoric strain stays compatible.
pub fn element_stiffness_cas2(
    mesh: &Mesh,
    elem: [usize; 3],
    material: &Material,
    rule: &QuadratureRule,
    corners: &CornerTable,
) -> Result<ElementMatrix> {
    assemble_element(Technology::Cas2, mesh, elem, material, rule, Some(corners))
}

/// Element stiffness for any technology. `corners` is ignored for CS.
pub fn element_stiffness(
    technology: Technology,
    mesh: &Mesh,
    elem: [usize; 3],
    material: &Material,
    rule: &QuadratureRule,
    corners: &CornerTable,
) -> Result<ElementMatrix> {
    match technology {
        Technology::Cs => element_stiffness_cs(mesh, elem, material, rule),
        Technology::Cas1 => element_stiffness_cas1(mesh, elem, material, rule, corners),
        Technology::Cas2 => element_stiffness_cas2(mesh, elem, material, rule, corners),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::{stress, strain_from_displacement_gradient, StrainState};
    use crate::quadrature::gauss_legendre;
    use crate::splines::{quadrilateral, quarter_annulus, hexahedron, NurbsPatch};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cook_like() -> NurbsPatch {
        quadrilateral([[0., 0.], [48., 44.], [0., 44.], [48., 60.]]).unwrap().refined(1).unwrap()
    }

    fn is_symmetric(k: &ElementMatrix, tol: f64) -> bool {
        let scale = k.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..k.size()).all(|r| (0..k.size()).all(|c| (k.get(r, c) - k.get(c, r)).abs() <= tol * scale))
    }

    /// Virtual-work oracle: integrates sigma(eps(N_b e_j)) : eps(N_a e_i) with the
    /// given 1D nodes in each direction, evaluating stresses through `mechanics`.
    fn virtual_work_oracle(
        patch: &NurbsPatch,
        elem: [usize; 3],
        material: &Material,
        nodes: &[(f64, f64)],
    ) -> Vec<Vec<f64>> {
        let dim = patch.dim();
        let bounds = crate::quadrature::ElementBounds::of(patch, elem);
        let n = 9 * dim;
        let mut k = vec![vec![0.0; n]; n];
        for &(p0, w0) in nodes {
            for &(p1, w1) in nodes {
                let xi = bounds.parametric([p0, p1, 0.0]);
                let b = patch.eval_on_element(elem, xi).unwrap();
                let wt = w0 * w1 * bounds.parent_scaling() * b.det_jacobian;
                let strain_of = |a: usize, i: usize| {
                    let mut grad = [[0.0; 3]; 3];
                    grad[i] = b.gradients[a];
                    strain_from_displacement_gradient(&grad, dim)
                };
                for a in 0..9 {
                    for i in 0..dim {
                        let ea = strain_of(a, i);
                        for bb in 0..9 {
                            for j in 0..dim {
                                let eb = strain_of(bb, j);
                                let s = stress(Technology::Cs, material, &StrainState::Compatible(eb)).unwrap();
                                k[a * dim + i][bb * dim + j] += wt * s.contract(&ea);
                            }
                        }
                    }
                }
            }
        }
        k
    }

    fn gauss6() -> Vec<(f64, f64)> {
        let x = [0.2386191860831969, 0.6612093864662645, 0.9324695142031521];
        let w = [0.4679139345726910, 0.3607615730481386, 0.1713244923791704];
        (0..3).flat_map(|i| [(-x[i], w[i]), (x[i], w[i])]).collect()
    }

    fn max_relative_deviation(k: &ElementMatrix, oracle: &[Vec<f64>]) -> f64 {
        let scale = k.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = k.size();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                worst = worst.max((k.get(r, c) - oracle[r][c]).abs());
            }
        }
        worst / scale
    }

    #[test]
    fn cs_matches_virtual_work_oracle_with_matching_rule() {
        for n in [2usize, 3] {
            let (p, w) = gauss_legendre(n).unwrap();
            let nodes: Vec<(f64, f64)> = p.into_iter().zip(w).collect();
            for patch in [cook_like(), quarter_annulus(1.0, 4.0).unwrap().refined(1).unwrap()] {
                let mesh = Mesh::new(patch.clone());
                let material = Material::new(10.0, 0.3).unwrap();
                let rule = QuadratureRule::new(n, 2).unwrap();
                let k = element_stiffness_cs(&mesh, [1, 0, 0], &material, &rule).unwrap();
                let oracle = virtual_work_oracle(&patch, [1, 0, 0], &material, &nodes);
                assert!(max_relative_deviation(&k, &oracle) < 1e-14);
            }
        }
    }

    #[test]
    fn cs_exact_on_affine_element() {
        // constant Jacobian: the integrand is a polynomial of degree 4 per direction,
        // which the 3-point rule integrates exactly
        let patch = quadrilateral([[0., 0.], [2., 0.5], [0.3, 1.], [2.3, 1.5]]).unwrap();
        let mesh = Mesh::new(patch.clone());
        let material = Material::new(3.0, 0.25).unwrap();
        let rule = QuadratureRule::new(3, 2).unwrap();
        let k = element_stiffness_cs(&mesh, [0, 0, 0], &material, &rule).unwrap();
        let oracle = virtual_work_oracle(&patch, [0, 0, 0], &material, &gauss6());
        assert!(max_relative_deviation(&k, &oracle) < 1e-14);
    }

    #[test]
    fn cs_converges_to_oracle_on_curved_element() {
        // the basis part of the integrand already has degree 4 per direction, so the
        // geometry factor leaves an O(h^2) error for the 3-point rule
        let material = Material::new(10.0, 0.3).unwrap();
        let rule = QuadratureRule::new(3, 2).unwrap();
        let deviations: Vec<f64> = (1..5)
            .map(|level| {
                let patch = quarter_annulus(1.0, 4.0).unwrap().refined(level).unwrap();
                let mesh = Mesh::new(patch.clone());
                let k = element_stiffness_cs(&mesh, [0, 1, 0], &material, &rule).unwrap();
                let oracle = virtual_work_oracle(&patch, [0, 1, 0], &material, &gauss6());
                max_relative_deviation(&k, &oracle)
            })
            .collect();
        for pair in deviations.windows(2) {
            assert!(pair[1] < pair[0] / 3.0, "{deviations:?}");
        }
    }

    #[test]
    fn translations_are_zero_energy() {
        let material = Material::from_lame(0.0, 1.0).unwrap();
        let mesh = Mesh::new(quadrilateral([[0., 0.], [1., 0.], [0., 1.], [1., 1.]]).unwrap());
        let corners = CornerTable::new(&mesh).unwrap();
        let rule = QuadratureRule::new(3, 2).unwrap();
        for t in Technology::ALL {
            let k = element_stiffness(t, &mesh, [0, 0, 0], &material, &rule, &corners).unwrap();
            assert!(is_symmetric(&k, 1e-15));
            for comp in 0..2 {
                let u: Vec<f64> = (0..18).map(|r| if r % 2 == comp { 1.0 } else { 0.0 }).collect();
                assert!(k.mul_vec(&u).iter().all(|v| v.abs() < 1e-12));
            }
            // positive semidefinite on random vectors
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..20 {
                let u: Vec<f64> = (0..18).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let e: f64 = u.iter().zip(k.mul_vec(&u)).map(|(a, b)| a * b).sum();
                assert!(e >= -1e-12);
            }
        }
    }

    #[test]
    fn cas1_equals_cs_without_lambda() {
        let material = Material::from_lame(0.0, 3.0).unwrap();
        let mesh = Mesh::new(cook_like());
        let corners = CornerTable::new(&mesh).unwrap();
        for n in [2, 3] {
            let rule = QuadratureRule::new(n, 2).unwrap();
            for e in 0..4 {
                let elem = mesh.patch().element_multi_index(e);
                let cs = element_stiffness_cs(&mesh, elem, &material, &rule).unwrap();
                let c1 = element_stiffness_cas1(&mesh, elem, &material, &rule, &corners).unwrap();
                assert_eq!(cs, c1);
            }
        }
    }

    /// Term-by-term evaluation of the five CAS2 integrals with explicit double
    /// sums over corners, independent of the factorized implementation.
    #[test]
    fn cas2_five_term_decomposition() {
        let material = Material::from_lame(0.0, 1.7).unwrap();
        let mesh = Mesh::new(quarter_annulus(1.0, 4.0).unwrap().refined(1).unwrap());
        let corners = CornerTable::new(&mesh).unwrap();
        let rule = QuadratureRule::new(3, 2).unwrap();
        let elem = [1, 1, 0];
        let k = element_stiffness_cas2(&mesh, elem, &material, &rule, &corners).unwrap();
        let cs = element_stiffness_cs(&mesh, elem, &material, &rule).unwrap();
        let cg = corners.element_corner_gradients(elem);
        let points = map_to_element(&rule, mesh.patch(), elem).unwrap();
        let (lambda, mu, d) = (material.lambda(), material.mu(), 2.0);
        let mut oracle = vec![vec![0.0; 18]; 18];
        for p in &points {
            let lw = corner_weights(p.parent, 2);
            let g = &p.basis.gradients;
            for a in 0..9 {
                for i in 0..2 {
                    for b in 0..9 {
                        for j in 0..2 {
                            let mut t = 0.0;
                            for l in 0..4 {
                                for m in 0..4 {
                                    let prod = lw[l] * cg[l][a][i] * lw[m] * cg[m][b][j];
                                    t += prod * lambda + prod * 2.0 * mu / d;
                                }
                            }
                            t -= g[a][i] * 2.0 * mu / d * g[b][j];
                            let dot = g[a][0] * g[b][0] + g[a][1] * g[b][1];
                            if i == j {
                                t += dot * mu;
                            }
                            t += g[a][j] * mu * g[b][i];
                            oracle[a * 2 + i][b * 2 + j] += p.weight * t;
                        }
                    }
                }
            }
        }
        let scale = k.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for r in 0..18 {
            for c in 0..18 {
                assert!((k.get(r, c) - oracle[r][c]).abs() < 1e-13 * scale);
            }
        }
        assert!(is_symmetric(&k, 1e-14));
        // with lambda = 0 CAS2 differs from CS only through the 2 mu / d terms
        assert_ne!(k, cs);
    }

    #[test]
    fn cas_reproduce_multilinear_gradients() {
        // On an identity-map element the interpolated gradient of a function whose
        // gradient is multilinear in the parent coordinates equals the compatible
        // gradient, so the volumetric term for that field matches CS.
        let mesh = Mesh::new(quadrilateral([[0., 0.], [1., 0.], [0., 1.], [1., 1.]]).unwrap());
        let corners = CornerTable::new(&mesh).unwrap();
        let rule = QuadratureRule::new(3, 2).unwrap();
        let material = Material::from_lame(5.0, 1.0).unwrap();
        let points = map_to_element(&rule, mesh.patch(), [0, 0, 0]).unwrap();
        let cg = corners.element_corner_gradients([0, 0, 0]);
        // u = (x y, 0) has gradient (y, x): bilinear. Its control values are the
        // Greville products s * t on the single-element patch.
        let mut u = vec![0.0; 18];
        for a in 0..9 {
            let (s, t) = ((a % 3) as f64 / 2.0, (a / 3) as f64 / 2.0);
            u[2 * a] = s * t;
        }
        let cs_vol = element_volumetric_stiffness(Technology::Cs, &points, &material, None, 2);
        let c1_vol = element_volumetric_stiffness(Technology::Cas1, &points, &material, Some(&cg), 2);
        let f_cs = cs_vol.mul_vec(&u);
        let f_c1 = c1_vol.mul_vec(&u);
        let energy_cs: f64 = u.iter().zip(&f_cs).map(|(a, b)| a * b).sum();
        let energy_c1: f64 = u.iter().zip(&f_c1).map(|(a, b)| a * b).sum();
        assert!((energy_cs - energy_c1).abs() < 1e-12);
        for p in &points {
            let h = interpolate_gradients(&cg, p.parent, 2);
            let div_h: f64 = (0..9).map(|a| h[a][0] * u[2 * a]).sum();
            let div_g: f64 = (0..9).map(|a| p.basis.gradients[a][0] * u[2 * a]).sum();
            assert!((div_h - div_g).abs() < 1e-12);
        }
    }

    #[test]
    fn assumed_gradients_reproduce_affine_fields() {
        // affine field: interpolated corner strains equal the constant strain, so
        // every assumed-strain evaluation reproduces it
        let mesh = Mesh::new(
            quadrilateral([[0., 0.], [2., 0.5], [0.3, 1.], [2.3, 1.5]]).unwrap().refined(1).unwrap(),
        );
        let corners = CornerTable::new(&mesh).unwrap();
        let rule = QuadratureRule::new(3, 2).unwrap();
        let grad_u = [[0.3, -0.2, 0.0], [0.5, 0.7, 0.0], [0.0; 3]];
        for e in 0..4 {
            let elem = mesh.patch().element_multi_index(e);
            let points = map_to_element(&rule, mesh.patch(), elem).unwrap();
            let cg = corners.element_corner_gradients(elem);
            let conn = mesh.connectivity(mesh.patch().element_id(elem));
            let mut u = vec![0.0; 18];
            for (a, &ga) in conn.iter().enumerate() {
                let q = mesh.patch().control_points()[ga];
                for i in 0..2 {
                    u[2 * a + i] = grad_u[i][0] * q[0] + grad_u[i][1] * q[1];
                }
            }
            for p in &points {
                let h = interpolate_gradients(&cg, p.parent, 2);
                let mut gu = [[0.0; 3]; 3];
                for a in 0..9 {
                    for i in 0..2 {
                        for m in 0..2 {
                            gu[i][m] += u[2 * a + i] * h[a][m];
                        }
                    }
                }
                let e_assumed = strain_from_displacement_gradient(&gu, 2);
                let e_exact = strain_from_displacement_gradient(&grad_u, 2);
                for (x, y) in e_assumed.voigt().iter().zip(e_exact.voigt()) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn three_dimensional_element() {
        let mut c = [[0.0; 3]; 8];
        for (l, p) in c.iter_mut().enumerate() {
            *p = [(l & 1) as f64, ((l >> 1) & 1) as f64 * 1.5, ((l >> 2) & 1) as f64 * 0.5];
        }
        let mesh = Mesh::new(hexahedron(c).unwrap());
        let corners = CornerTable::new(&mesh).unwrap();
        let rule = QuadratureRule::new(2, 3).unwrap();
        let material = Material::new(250.0, 0.3).unwrap();
        for t in Technology::ALL {
            let k = element_stiffness(t, &mesh, [0, 0, 0], &material, &rule, &corners).unwrap();
            assert_eq!(k.size(), 81);
            assert!(is_symmetric(&k, 1e-14));
            for comp in 0..3 {
                let u: Vec<f64> = (0..81).map(|r| if r % 3 == comp { 1.0 } else { 0.0 }).collect();
                assert!(k.mul_vec(&u).iter().all(|v| v.abs() < 1e-10));
            }
        }
    }
}
