//! Off-center constant-curvature spheres as a benchmark oracle.
//!
//! A sphere of radius `a` centered at `(0,0,c₀)` on the polar axis is a
//! radial graph `ρ(μ) = c₀μ + √(c₀²μ² − c₀² + a²)` over the cap, where
//! `μ` is the cosine of the polar angle. Its principal curvatures with
//! respect to the inward normal are `1/a` everywhere, so its normalized
//! curvature in the degree-1 scale is exactly `f = 1/a`. Choosing `c₀` so
//! the sphere passes through the unit circle at the cap boundary gives a
//! closed-form solution of the Dirichlet problem with `φ ≡ 1`.

use crate::chart::ChartGrid;
use crate::error::{Error, Result};
use crate::math;
use alloc::format;
use alloc::vec::Vec;

/// Sphere `|X − (0,0,c₀)| = a`, the graph branch with `ρ ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffCenterSphere {
    pub radius: f64,
    pub center_z: f64,
}

impl OffCenterSphere {
    /// Sphere with curvature scale `f = ψ̃` (radius `a = 1/ψ̃`) through the
    /// boundary circle of the unit cap of geodesic radius `theta0`:
    /// `c₀ = cos θ₀ − √(cos²θ₀ − 1 + a²)`, the root giving `ρ ≤ 1` inside.
    pub fn for_cap(theta0: f64, psi_tilde: f64) -> Result<Self> {
        if !(psi_tilde > 0.0) {
            return Err(Error::Argument(format!("psi_tilde = {psi_tilde} must be positive")));
        }
        let a = 1.0 / psi_tilde;
        let mu0 = math::cos(theta0);
        let disc = mu0 * mu0 - 1.0 + a * a;
        if !(disc > 0.0) {
            return Err(Error::Argument(format!(
                "no real sphere: psi_tilde = {psi_tilde} too large for cap {theta0}"
            )));
        }
        Ok(OffCenterSphere { radius: a, center_z: mu0 - math::sqrt(disc) })
    }

    /// Radial function at polar-angle cosine `μ`.
    pub fn rho(&self, mu: f64) -> f64 {
        let c0 = self.center_z;
        let a = self.radius;
        c0 * mu + math::sqrt(c0 * c0 * mu * mu - c0 * c0 + a * a)
    }

    /// Curvature in the degree-1 scale, `f(κ) = 1/a`.
    pub fn f_scale(&self) -> f64 {
        1.0 / self.radius
    }

    pub fn rho_field(&self, grid: &ChartGrid) -> Vec<f64> {
        (0..grid.node_count()).map(|i| self.rho(grid.sphere_point(i)[2])).collect()
    }

    pub fn u_field(&self, grid: &ChartGrid) -> Vec<f64> {
        (0..grid.node_count()).map(|i| 1.0 / self.rho(grid.sphere_point(i)[2])).collect()
    }

    pub fn v_field(&self, grid: &ChartGrid) -> Vec<f64> {
        (0..grid.node_count())
            .map(|i| -math::ln(self.rho(grid.sphere_point(i)[2])))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DomainSpec;
    use crate::graph;
    use crate::symfun::CurvatureSpec;

    #[test]
    fn benchmark_instance_closed_form() {
        // R = 1, n = 2: psi_tilde = 1/√2, a = √2, c0 = (1−√5)/2
        let theta0 = core::f64::consts::FRAC_PI_3;
        let s = OffCenterSphere::for_cap(theta0, 1.0 / math::sqrt(2.0)).unwrap();
        assert!((s.radius - math::sqrt(2.0)).abs() < 1e-15);
        assert!((s.center_z - 0.5 * (1.0 - math::sqrt(5.0))).abs() < 1e-14);
        // boundary interpolation: rho(cos θ₀) = 1
        assert!((s.rho(math::cos(theta0)) - 1.0).abs() < 1e-14);
        // apex value c0 + √2 ≈ 0.796
        assert!((s.rho(1.0) - (s.center_z + math::sqrt(2.0))).abs() < 1e-15);
        assert!((s.rho(1.0) - 0.7960).abs() < 5e-4);
        // rho stays below the unit-sphere subsolution inside
        for k in 0..=20 {
            let mu = math::cos(theta0) + (1.0 - math::cos(theta0)) * k as f64 / 20.0;
            assert!(s.rho(mu) <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn sphere_has_constant_curvature_through_geometry_module() {
        let theta0 = core::f64::consts::FRAC_PI_3;
        let psi = 1.0 / math::sqrt(2.0);
        let s = OffCenterSphere::for_cap(theta0, psi).unwrap();
        let spec = CurvatureSpec::new(2, 2).unwrap();
        let mut errs = Vec::new();
        for &(ns, nt) in &[(17usize, 32usize), (33, 64)] {
            let grid = ChartGrid::build(DomainSpec::cap(theta0).unwrap(), ns, nt).unwrap();
            let u = s.u_field(&grid);
            let geom = graph::graph_geometry(&grid, &u, &spec).unwrap();
            let mut worst = 0.0f64;
            for ng in &geom {
                // kappa = (1/√2, 1/√2); H₂ = κ₁κ₂ = 1/2
                worst = worst.max((ng.kappa[0] - psi).abs()).max((ng.kappa[1] - psi).abs());
            }
            errs.push(worst);
        }
        assert!(errs[1] < 8e-3, "kappa errors {errs:?}");
        let ratio = errs[0] / errs[1];
        assert!(ratio > 2.5, "kappa error refinement ratio {ratio}, errors {errs:?}");
    }

    #[test]
    fn mesh_vertices_sit_on_the_sphere() {
        let theta0 = core::f64::consts::FRAC_PI_3;
        let s = OffCenterSphere::for_cap(theta0, 1.0 / math::sqrt(2.0)).unwrap();
        let grid =
            ChartGrid::build(DomainSpec::cap(theta0).unwrap(), 17, 32).unwrap();
        let u = s.u_field(&grid);
        let mesh = graph::embed_mesh(&grid, &u).unwrap();
        for v in &mesh.vertices {
            let d = math::sqrt(
                v[0] * v[0] + v[1] * v[1] + (v[2] - s.center_z) * (v[2] - s.center_z),
            );
            assert!((d - s.radius).abs() < 1e-12, "vertex off the sphere by {}", d - s.radius);
        }
    }

    #[test]
    fn too_large_curvature_is_rejected() {
        // a < sin θ₀ leaves no real interpolating sphere
        // the threshold is psi_tilde = 1/sin θ₀ ≈ 1.1547 for θ₀ = π/3
        let theta0 = core::f64::consts::FRAC_PI_3;
        assert!(OffCenterSphere::for_cap(theta0, 2.0).is_err());
        assert!(OffCenterSphere::for_cap(theta0, 1.2).is_err());
        assert!(OffCenterSphere::for_cap(theta0, 1.1).is_ok());
    }

    #[test]
    fn unit_cap_degenerate_case() {
        // psi_tilde = 1 gives the unit sphere itself
        let s = OffCenterSphere::for_cap(0.9, 1.0).unwrap();
        assert!(s.center_z.abs() < 1e-15);
        for &mu in &[0.62, 0.8, 1.0] {
            assert!((s.rho(mu) - 1.0).abs() < 1e-15);
        }
    }
}
