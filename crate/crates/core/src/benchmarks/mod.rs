//! The three benchmark problems, their exact data, error norms and convergence
//! drivers.
//!
//! Mesh levels are numbered from 1: level `l` has `base * 2^(l - 1)` elements per
//! direction, with base 2 for Cook's membrane and the plate with a hole and base
//! 16 for the 3D block.

mod analysis;
mod convergence;
mod plate;

use std::fmt;
use std::str::FromStr;

pub use analysis::{error_l2, line_samples, oscillation_indicator, sample_grid, L2Errors, LineSample, SampleGrid};
pub use convergence::{run_convergence, run_convergence_with, ConvergenceReport, ConvergenceRow};
pub use patch_test::{affine_control_values, linear_patch_test, PatchTestResult};
pub use plate::{PlateFields, PlateSolution};

use crate::assembly::{
    assemble_with_corners, Constraint, CornerTable, FieldEvaluator, Loads, Mesh, SparseSystem,
};
use crate::error::{Error, Result};
use crate::mechanics::{Material, Technology};
use crate::quadrature::QuadratureRule;
use crate::solver::SolveMethod;
use crate::splines::{hexahedron, quadrilateral, quarter_annulus, Face, NurbsPatch, Side};

pub const COOK_YOUNG: f64 = 240.565;
pub const COOK_POISSON: f64 = 0.4999;
pub const COOK_TRACTION: f64 = 6.25;
/// Reference vertical displacement of the top-right corner of Cook's membrane.
pub const COOK_REFERENCE: f64 = 8.075;

pub const PLATE_YOUNG: f64 = 1e5;
pub const PLATE_POISSON: f64 = 0.49999;
pub const PLATE_TENSION: f64 = 10.0;
pub const PLATE_HOLE_RADIUS: f64 = 1.0;
pub const PLATE_OUTER_RADIUS: f64 = 4.0;

pub const BLOCK_YOUNG: f64 = 250.0;
pub const BLOCK_POISSON: f64 = 0.49999;
pub const BLOCK_ELEMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    Cook,
    PlateHole,
    Block3d,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 3] = [BenchmarkKind::Cook, BenchmarkKind::PlateHole, BenchmarkKind::Block3d];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkKind::Cook => "cook",
            BenchmarkKind::PlateHole => "plate_hole",
            BenchmarkKind::Block3d => "block3d",
        }
    }

    /// Elements per direction on level 1.
    pub fn base_elements(self) -> usize {
        match self {
            BenchmarkKind::Cook | BenchmarkKind::PlateHole => 2,
            BenchmarkKind::Block3d => BLOCK_ELEMENTS,
        }
    }

    pub fn elements_at_level(self, level: usize) -> usize {
        self.base_elements() << level.saturating_sub(1)
    }

    pub fn dim(self) -> usize {
        match self {
            BenchmarkKind::Block3d => 3,
            _ => 2,
        }
    }

    /// Builds the case with `n` elements per direction.
    pub fn case(self, n: usize) -> Result<BenchmarkCase> {
        match self {
            BenchmarkKind::Cook => cook(n),
            BenchmarkKind::PlateHole => plate_hole(n),
            BenchmarkKind::Block3d => block(n),
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cook" => Ok(BenchmarkKind::Cook),
            "plate" | "plate_hole" | "plate-hole" => Ok(BenchmarkKind::PlateHole),
            "block" | "block3d" => Ok(BenchmarkKind::Block3d),
            _ => Err(format!("unknown benchmark '{s}' (expected cook, plate_hole or block3d)")),
        }
    }
}

/// A benchmark problem on one mesh.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub kind: BenchmarkKind,
    pub mesh: Mesh,
    pub material: Material,
    pub loads: Loads,
    pub constraints: Vec<Constraint>,
}

/// A solved benchmark case with everything needed for post-processing.
#[derive(Debug, Clone)]
pub struct SolvedCase {
    pub kind: BenchmarkKind,
    pub mesh: Mesh,
    pub corners: CornerTable,
    pub material: Material,
    pub technology: Technology,
    pub rule: QuadratureRule,
    /// Control-point displacements, `u[A * d + i]`.
    pub u: Vec<f64>,
    pub relative_residual: f64,
    pub method: SolveMethod,
}

impl BenchmarkCase {
    pub fn elements_per_direction(&self) -> usize {
        self.mesh.patch().element_counts()[0]
    }

    /// Assembled system for one technology and rule.
    pub fn system(&self, technology: Technology, points: usize, corners: &CornerTable) -> Result<SparseSystem> {
        let rule = QuadratureRule::new(points, self.mesh.dim())?;
        assemble_with_corners(
            &self.mesh,
            &self.material,
            technology,
            &rule,
            &self.loads,
            &self.constraints,
            corners,
        )
    }

    pub fn solve(&self, technology: Technology, points: usize) -> Result<SolvedCase> {
        let corners = CornerTable::new(&self.mesh)?;
        let rule = QuadratureRule::new(points, self.mesh.dim())?;
        let system = self.system(technology, points, &corners)?;
        let (u, solution) = system.solve()?;
        Ok(SolvedCase {
            kind: self.kind,
            mesh: self.mesh.clone(),
            corners,
            material: self.material,
            technology,
            rule,
            u,
            relative_residual: solution.relative_residual,
            method: solution.method,
        })
    }
}

impl SolvedCase {
    pub fn evaluator(&self) -> FieldEvaluator<'_> {
        FieldEvaluator::new(&self.mesh, &self.corners, self.material, self.technology, &self.u)
            .expect("solution length matches its mesh")
    }

    pub fn elements_per_direction(&self) -> usize {
        self.mesh.patch().element_counts()[0]
    }

    /// Scalar displacement of interest: vertical displacement of the top-right
    /// corner for Cook's membrane, vertical displacement of the top of the
    /// symmetry axis for the block; none for the plate.
    pub fn qoi(&self) -> Result<Option<f64>> {
        match self.kind {
            BenchmarkKind::Cook => Ok(Some(self.mesh.patch().field_value(&self.u, [1.0, 1.0, 0.0])?[1])),
            BenchmarkKind::Block3d => Ok(Some(self.mesh.patch().field_value(&self.u, [0.0, 0.0, 1.0])?[2])),
            BenchmarkKind::PlateHole => Ok(None),
        }
    }

    pub fn plate_solution(&self) -> Option<PlateSolution> {
        (self.kind == BenchmarkKind::PlateHole)
            .then(|| PlateSolution::new(PLATE_TENSION, PLATE_HOLE_RADIUS, &self.material))
    }
}

/// Uniformly subdivides a single-element patch into `n` elements per direction.
pub fn subdivide(patch: &NurbsPatch, n: usize) -> Result<NurbsPatch> {
    if n == 0 {
        return Err(Error::InvalidPatch("need at least one element per direction".into()));
    }
    if patch.num_elements() != 1 {
        return Err(Error::InvalidPatch("subdivision starts from a single-element patch".into()));
    }
    let mut p = patch.clone();
    for dir in 0..patch.dim() {
        let kv = &patch.knot_vectors()[dir];
        let (a, b) = (kv.first(), kv.last());
        for k in 1..n {
            p = p.insert_knot(dir, a + (b - a) * k as f64 / n as f64)?;
        }
    }
    Ok(p)
}

fn check_count(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidPatch(format!("need at least {min} elements per direction, got {n}")));
    }
    Ok(())
}

/// Tapered panel clamped on its left edge with a vertical shear load on its right edge.
///
/// Corners (0,0), (48,44), (48,60), (0,44); direction 0 runs from the clamped
/// edge to the loaded edge.
pub fn cook(n: usize) -> Result<BenchmarkCase> {
    check_count(n, 2)?;
    let patch = quadrilateral([[0.0, 0.0], [48.0, 44.0], [0.0, 44.0], [48.0, 60.0]])?;
    let clamped = Face::new(0, Side::Low);
    Ok(BenchmarkCase {
        kind: BenchmarkKind::Cook,
        mesh: Mesh::new(subdivide(&patch, n)?),
        material: Material::new(COOK_YOUNG, COOK_POISSON)?,
        loads: Loads::none().with_traction(Face::new(0, Side::High), |_| [0.0, COOK_TRACTION, 0.0]),
        constraints: vec![Constraint::new(clamped, 0), Constraint::new(clamped, 1)],
    })
}

/// Quarter of a circular plate with a hole under exact far-field tractions.
///
/// Direction 0 is radial (hole at `xi0 = 0`, loaded outer arc at `xi0 = 1`);
/// direction 1 is angular (`xi1 = 0` on the x axis, `xi1 = 1` on the y axis).
pub fn plate_hole(n: usize) -> Result<BenchmarkCase> {
    check_count(n, 2)?;
    let patch = quarter_annulus(PLATE_HOLE_RADIUS, PLATE_OUTER_RADIUS)?;
    let material = Material::new(PLATE_YOUNG, PLATE_POISSON)?;
    let exact = PlateSolution::new(PLATE_TENSION, PLATE_HOLE_RADIUS, &material);
    let loads = Loads::none().with_traction(Face::new(0, Side::High), move |x| {
        let h = exact.radial_traction(x[0], x[1]).expect("outer arc lies outside the hole");
        [h[0], h[1], 0.0]
    });
    Ok(BenchmarkCase {
        kind: BenchmarkKind::PlateHole,
        mesh: Mesh::new(subdivide(&patch, n)?),
        material,
        loads,
        constraints: vec![
            // x = 0 edge: u_x = 0; y = 0 edge: u_y = 0
            Constraint::new(Face::new(1, Side::High), 0),
            Constraint::new(Face::new(1, Side::Low), 1),
        ],
    })
}

/// Body force of the block problem.
pub fn block_body_force(x: [f64; 3]) -> [f64; 3] {
    [0.0, 0.0, -10.0 * (1.0 - x[0].abs()) * (1.0 - x[1].abs())]
}

/// Quarter of a block on `[0,1]^3` with a vertical body force, resting on `z = 0`
/// with symmetry conditions on `x = 0` and `y = 0`.
pub fn block(n: usize) -> Result<BenchmarkCase> {
    check_count(n, 1)?;
    let mut corners = [[0.0; 3]; 8];
    for (l, c) in corners.iter_mut().enumerate() {
        *c = [(l & 1) as f64, ((l >> 1) & 1) as f64, ((l >> 2) & 1) as f64];
    }
    let patch = hexahedron(corners)?;
    Ok(BenchmarkCase {
        kind: BenchmarkKind::Block3d,
        mesh: Mesh::new(subdivide(&patch, n)?),
        material: Material::new(BLOCK_YOUNG, BLOCK_POISSON)?,
        loads: Loads::none().with_body_force(block_body_force),
        constraints: vec![
            Constraint::new(Face::new(2, Side::Low), 2),
            Constraint::new(Face::new(0, Side::Low), 0),
            Constraint::new(Face::new(1, Side::Low), 1),
        ],
    })
}
