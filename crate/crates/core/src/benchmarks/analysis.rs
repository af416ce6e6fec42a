use rayon::prelude::*;

use super::{PlateFields, SolvedCase};
use crate::assembly::{FieldEvaluator, FieldSample};
use crate::error::{Error, Result};
use crate::quadrature::{map_to_element, ElementBounds, QuadratureRule};

/// Relative L2 errors of displacement and in-plane stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Errors {
    pub displacement: f64,
    pub stress: f64,
}

/// Relative L2 errors of a 2D solution against exact fields, integrated with `rule`.
///
/// The stress norm sums all four in-plane components, so the shear component
/// counts twice.
pub fn error_l2(
    eval: &FieldEvaluator<'_>,
    rule: &QuadratureRule,
    exact: impl Fn([f64; 3]) -> Result<PlateFields> + Sync,
) -> Result<L2Errors> {
    let mesh = eval.mesh();
    if mesh.dim() != 2 {
        return Err(Error::NoExactSolution(format!("{}D meshes", mesh.dim())));
    }
    let per_element: Vec<[f64; 4]> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let elem = mesh.patch().element_multi_index(e);
            let traces = eval.corner_traces(elem);
            let mut acc = [0.0; 4];
            for p in map_to_element(rule, mesh.patch(), elem)? {
                let s = eval.sample_with(&p.basis, &traces, p.parent)?;
                let ex = exact(s.point)?;
                for i in 0..2 {
                    acc[0] += p.weight * (s.displacement[i] - ex.displacement[i]).powi(2);
                    acc[1] += p.weight * ex.displacement[i].powi(2);
                }
                let h = [s.stress.get(0, 0), s.stress.get(1, 1), s.stress.get(0, 1)];
                for (c, mult) in [1.0, 1.0, 2.0].iter().enumerate() {
                    acc[2] += p.weight * mult * (h[c] - ex.stress[c]).powi(2);
                    acc[3] += p.weight * mult * ex.stress[c].powi(2);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; 4];
    for acc in &per_element {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
    }
    Ok(L2Errors {
        displacement: (total[0] / total[1]).sqrt(),
        stress: (total[2] / total[3]).sqrt(),
    })
}

impl SolvedCase {
    /// Relative L2 errors against the exact plate solution, with the solve's rule.
    pub fn l2_errors(&self) -> Result<L2Errors> {
        let exact = self
            .plate_solution()
            .ok_or_else(|| Error::NoExactSolution(self.kind.to_string()))?;
        error_l2(&self.evaluator(), &self.rule, |x| exact.fields(x[0], x[1]))
    }
}

/// Fields on a structured grid with `per_element` intervals per element and
/// direction; grid points on element boundaries are shared.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    /// Points per direction (1 for unused directions).
    pub counts: [usize; 3],
    /// Samples with the first direction varying fastest.
    pub samples: Vec<FieldSample>,
}

pub fn sample_grid(eval: &FieldEvaluator<'_>, per_element: usize) -> Result<SampleGrid> {
    if per_element == 0 {
        return Err(Error::InvalidPatch("need at least one sample interval per element".into()));
    }
    let mesh = eval.mesh();
    let dim = mesh.dim();
    let elements = mesh.patch().element_counts();
    let mut counts = [1; 3];
    for k in 0..dim {
        counts[k] = elements[k] * per_element + 1;
    }
    let total: usize = counts.iter().product();
    let samples = (0..total)
        .into_par_iter()
        .map(|g| {
            let gm = [g % counts[0], (g / counts[0]) % counts[1], g / (counts[0] * counts[1])];
            let mut elem = [0; 3];
            let mut parent = [0.0; 3];
            for k in 0..dim {
                elem[k] = (gm[k] / per_element).min(elements[k] - 1);
                parent[k] = -1.0 + 2.0 * (gm[k] - elem[k] * per_element) as f64 / per_element as f64;
            }
            eval.sample(elem, parent)
        })
        .collect::<Result<_>>()?;
    Ok(SampleGrid { counts, samples })
}

/// One sample on a parametric line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSample {
    pub xi: [f64; 3],
    pub fields: FieldSample,
}

/// Fields along the parametric line through `through` parallel to direction
/// `direction`, at `per_element` interval midpoints of every element it crosses.
pub fn line_samples(
    eval: &FieldEvaluator<'_>,
    direction: usize,
    through: [f64; 3],
    per_element: usize,
) -> Result<Vec<LineSample>> {
    let patch = eval.mesh().patch();
    let dim = patch.dim();
    if direction >= dim {
        return Err(Error::OutOfRange {
            value: direction as f64,
            lo: 0.0,
            hi: (dim - 1) as f64,
        });
    }
    let base = patch.locate(through)?;
    let mut out = Vec::new();
    for e in 0..patch.element_counts()[direction] {
        let mut elem = base;
        elem[direction] = e;
        let bounds = ElementBounds::of(patch, elem);
        let mut parent = [0.0; 3];
        for k in 0..dim {
            parent[k] = 2.0 * (through[k] - bounds.lower[k]) / (bounds.upper[k] - bounds.lower[k]) - 1.0;
        }
        for s in 0..per_element {
            parent[direction] = -1.0 + (2.0 * s as f64 + 1.0) / per_element as f64;
            let xi = bounds.parametric(parent);
            out.push(LineSample {
                xi,
                fields: eval.sample(elem, parent)?,
            });
        }
    }
    Ok(out)
}

/// Total variation of `samples` divided by the largest magnitude in `reference`.
pub fn oscillation_indicator(samples: &[f64], reference: &[f64]) -> f64 {
    let variation: f64 = samples.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if variation == 0.0 {
        0.0
    } else {
        variation / scale
    }
}

#[cfg(test)]
mod tests {
    use super::super::plate_hole;
    use super::*;
    use crate::assembly::{CornerTable, Mesh};
    use crate::mechanics::{Material, Technology};
    use crate::splines::quadrilateral;

    #[test]
    fn indicator_examples() {
        assert_eq!(oscillation_indicator(&[2.0; 5], &[2.0; 5]), 0.0);
        let mono = [1.0, 1.5, 2.0, 4.0];
        assert_eq!(oscillation_indicator(&mono, &mono), 3.0 / 4.0);
        assert_eq!(oscillation_indicator(&[0.0, 1.0, 0.0], &[2.0]), 1.0);
    }

    #[test]
    fn exact_and_doubled_solutions() {
        // identity geometry: parametric and physical coordinates coincide
        let mesh = Mesh::new(quadrilateral([[0., 0.], [1., 0.], [0., 1.], [1., 1.]]).unwrap().refined(2).unwrap());
        let corners = CornerTable::new(&mesh).unwrap();
        let u: Vec<f64> = (0..mesh.num_dofs()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let material = Material::new(3.0, 0.3).unwrap();
        let rule = QuadratureRule::new(3, 2).unwrap();
        for t in Technology::ALL {
            let eval = FieldEvaluator::new(&mesh, &corners, material, t, &u).unwrap();
            let scaled = |x: [f64; 3], scale: f64| -> Result<PlateFields> {
                let elem = mesh.patch().locate(x)?;
                let b = ElementBounds::of(mesh.patch(), elem);
                let parent = [
                    2.0 * (x[0] - b.lower[0]) / (b.upper[0] - b.lower[0]) - 1.0,
                    2.0 * (x[1] - b.lower[1]) / (b.upper[1] - b.lower[1]) - 1.0,
                    0.0,
                ];
                let s = eval.sample(elem, parent)?;
                Ok(PlateFields {
                    displacement: [s.displacement[0] * scale, s.displacement[1] * scale],
                    stress: [s.stress.get(0, 0) * scale, s.stress.get(1, 1) * scale, s.stress.get(0, 1) * scale],
                })
            };
            let same = error_l2(&eval, &rule, |x| scaled(x, 1.0)).unwrap();
            assert!(same.displacement < 1e-12 && same.stress < 1e-12, "{same:?}");
            let half = error_l2(&eval, &rule, |x| scaled(x, 0.5)).unwrap();
            assert!((half.displacement - 1.0).abs() < 1e-12 && (half.stress - 1.0).abs() < 1e-12);
        }
    }

    // Gauss-Legendre nodes by Newton iteration on P_n
    fn gauss_nodes(n: usize) -> Vec<(f64, f64)> {
        (1..=n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    fn over_integrated_errors(solved: &SolvedCase) -> L2Errors {
        let eval = solved.evaluator();
        let exact = solved.plate_solution().unwrap();
        let nodes = gauss_nodes(10);
        let patch = solved.mesh.patch();
        let mut acc = [0.0; 4];
        for e in 0..patch.num_elements() {
            let elem = patch.element_multi_index(e);
            let bounds = ElementBounds::of(patch, elem);
            for &(p0, w0) in &nodes {
                for &(p1, w1) in &nodes {
                    let s = eval.sample(elem, [p0, p1, 0.0]).unwrap();
                    let b = patch.eval_on_element(elem, bounds.parametric([p0, p1, 0.0])).unwrap();
                    let w = w0 * w1 * bounds.parent_scaling() * b.det_jacobian;
                    let u = exact.displacement(s.point[0], s.point[1]).unwrap();
                    let sig = exact.stress(s.point[0], s.point[1]).unwrap();
                    for i in 0..2 {
                        acc[0] += w * (s.displacement[i] - u[i]).powi(2);
                        acc[1] += w * u[i].powi(2);
                    }
                    let h = [s.stress.get(0, 0), s.stress.get(1, 1), s.stress.get(0, 1)];
                    for c in 0..3 {
                        let m = if c == 2 { 2.0 } else { 1.0 };
                        acc[2] += w * m * (h[c] - sig[c]).powi(2);
                        acc[3] += w * m * sig[c].powi(2);
                    }
                }
            }
        }
        L2Errors {
            displacement: (acc[0] / acc[1]).sqrt(),
            stress: (acc[2] / acc[3]).sqrt(),
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b
    }

    #[test]
    fn errors_agree_with_over_integration() {
        // the norms use the solve's 3-point rule; the 10-point oracle differs by the
        // quadrature error of the rule, which shrinks under refinement
        let coarse = plate_hole(2).unwrap().solve(Technology::Cs, 3).unwrap();
        let (ours, oracle) = (coarse.l2_errors().unwrap(), over_integrated_errors(&coarse));
        assert!(rel(ours.displacement, oracle.displacement) < 1e-3, "{ours:?} {oracle:?}");

        let fine = plate_hole(8).unwrap().solve(Technology::Cs, 3).unwrap();
        let (ours, oracle) = (fine.l2_errors().unwrap(), over_integrated_errors(&fine));
        assert!(rel(ours.displacement, oracle.displacement) < 1e-5, "{ours:?} {oracle:?}");

        let fine = plate_hole(8).unwrap().solve(Technology::Cas1, 3).unwrap();
        let (ours, oracle) = (fine.l2_errors().unwrap(), over_integrated_errors(&fine));
        assert!(rel(ours.displacement, oracle.displacement) < 1e-3, "{ours:?} {oracle:?}");
        assert!(rel(ours.stress, oracle.stress) < 2e-3, "{ours:?} {oracle:?}");
    }

    #[test]
    fn grid_and_line_sampling() {
        let solved = plate_hole(2).unwrap().solve(Technology::Cas1, 2).unwrap();
        let eval = solved.evaluator();
        let grid = sample_grid(&eval, 3).unwrap();
        assert_eq!(grid.counts, [7, 7, 1]);
        let corner = grid.samples[6 * 7];
        assert!(corner.point[0].abs() < 1e-14 && (corner.point[1] - 1.0).abs() < 1e-14);
        let line = line_samples(&eval, 1, [0.0, 0.0, 0.0], 10).unwrap();
        assert_eq!(line.len(), 20);
        assert!(line.windows(2).all(|w| w[1].xi[1] > w[0].xi[1]));
        for s in &line {
            assert!((s.fields.point[0].hypot(s.fields.point[1]) - 1.0).abs() < 1e-13);
        }
        assert!(line_samples(&eval, 2, [0.0; 3], 10).is_err());
    }
}
