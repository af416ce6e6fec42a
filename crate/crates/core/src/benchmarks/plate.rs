//! Closed-form plane-strain solution of an infinite plate with a circular hole
//! under uniaxial tension along x.

use crate::error::{Error, Result};
use crate::mechanics::Material;

/// Exact displacement and in-plane stress fields around the hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateSolution {
    /// Far-field tension along x.
    pub traction: f64,
    /// Hole radius.
    pub radius: f64,
    pub poisson: f64,
    pub mu: f64,
}

/// Exact fields at one point: displacement (x, y) and stress (xx, yy, xy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateFields {
    pub displacement: [f64; 2],
    pub stress: [f64; 3],
}

impl PlateSolution {
    pub fn new(traction: f64, radius: f64, material: &Material) -> Self {
        Self {
            traction,
            radius,
            poisson: material.poisson(),
            mu: material.mu(),
        }
    }

    fn polar(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let r = x.hypot(y);
        // quadrature and sample points on the hole boundary may land a rounding error inside
        if r < self.radius * (1.0 - 1e-12) {
            return Err(Error::InsideHole {
                radius: r,
                hole_radius: self.radius,
            });
        }
        Ok((r, y.atan2(x)))
    }

    pub fn displacement(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let (r, t) = self.polar(x, y)?;
        let (big_r, nu) = (self.radius, self.poisson);
        let c = self.traction * big_r / (8.0 * self.mu);
        let ux = c
            * ((4.0 - 4.0 * nu) * r / big_r * t.cos()
                + 2.0 * big_r / r * ((4.0 - 4.0 * nu) * t.cos() + (3.0 * t).cos())
                - 2.0 * (big_r / r).powi(3) * (3.0 * t).cos());
        let uy = c
            * (-4.0 * nu * r / big_r * t.sin()
                + 2.0 * big_r / r * ((4.0 * nu - 2.0) * t.sin() + (3.0 * t).sin())
                - 2.0 * (big_r / r).powi(3) * (3.0 * t).sin());
        Ok([ux, uy])
    }

    /// In-plane stress (xx, yy, xy).
    pub fn stress(&self, x: f64, y: f64) -> Result<[f64; 3]> {
        let (r, t) = self.polar(x, y)?;
        let a2 = (self.radius / r).powi(2);
        let a4 = a2 * a2;
        let tx = self.traction;
        let sxx = tx * (1.0 - a2 * (1.5 * (2.0 * t).cos() + (4.0 * t).cos()) + 1.5 * a4 * (4.0 * t).cos());
        let syy = tx * (-a2 * (0.5 * (2.0 * t).cos() - (4.0 * t).cos()) - 1.5 * a4 * (4.0 * t).cos());
        let sxy = tx * (-a2 * (0.5 * (2.0 * t).sin() + (4.0 * t).sin()) + 1.5 * a4 * (4.0 * t).sin());
        Ok([sxx, syy, sxy])
    }

    pub fn fields(&self, x: f64, y: f64) -> Result<PlateFields> {
        Ok(PlateFields {
            displacement: self.displacement(x, y)?,
            stress: self.stress(x, y)?,
        })
    }

    /// Traction `sigma . n` on a circle centred at the origin, with `n` the outward radial normal.
    pub fn radial_traction(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let [sxx, syy, sxy] = self.stress(x, y)?;
        let r = x.hypot(y);
        let (nx, ny) = (x / r, y / r);
        Ok([sxx * nx + sxy * ny, sxy * nx + syy * ny])
    }
}
