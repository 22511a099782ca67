//! Pointwise geometry of the radial graph `X = (1/u)·x` over a chart grid.
//!
//! With `w = √(u² + |∇u|²)` and all tensors carried in the orthonormal
//! frame (so the flat-index formulas apply verbatim):
//!
//! ```text
//! g_ij  = (δ_ij + ∇_i u ∇_j u / u²) / u²
//! γ^ij  = u·(δ_ij − ∇_i u ∇_j u / (w(u+w)))      (inverse square root of g)
//! γ_ij  = δ_ij/u + ∇_i u ∇_j u / (u²(u+w))       (square root of g)
//! h_ij  = (u δ_ij + ∇_ij u) / (u w)               (inward-normal convention)
//! A     = γ^ h γ^        (symmetric, similar to the Weingarten matrix)
//! ```
//!
//! The inward-normal sign convention is fixed here once; every curvature
//! sign downstream inherits it. Principal curvatures are reported ascending.

use crate::chart::ChartGrid;
use crate::error::{Error, Result};
use crate::linalg::{sym_sandwich, Sym2};
use crate::math;
use crate::symfun::{self, CurvatureSpec};
use alloc::format;
use alloc::vec::Vec;

/// Per-node geometry package of the radial graph.
#[derive(Clone, Debug)]
pub struct NodeGeometry {
    /// `√(u² + |∇u|²)`.
    pub w: f64,
    /// Induced metric, frame components.
    pub g: Sym2,
    /// `γ^ij`, the inverse square root of the metric.
    pub gamma_up: Sym2,
    /// `γ_ij`, the positive square root of the metric.
    pub gamma_down: Sym2,
    /// Second fundamental form with respect to the inward normal.
    pub h: Sym2,
    /// `A = γ^ h γ^`.
    pub a: Sym2,
    /// Eigenvalues of `A`, ascending.
    pub kappa: [f64; 2],
    /// Inward unit normal in ambient coordinates.
    pub normal: [f64; 3],
}

pub type GeometryField = Vec<NodeGeometry>;

/// Computes the full geometry package from a positive radial field `u = 1/ρ`.
pub fn graph_geometry(
    grid: &ChartGrid,
    u: &[f64],
    spec: &CurvatureSpec,
) -> Result<GeometryField> {
    if spec.n() != 2 {
        return Err(Error::Argument(format!(
            "grid geometry is two-dimensional; spec has n = {}",
            spec.n()
        )));
    }
    for (node, &ui) in u.iter().enumerate() {
        if !(ui > 0.0) {
            return Err(Error::NonPositive { node, value: ui });
        }
    }
    let (grad, hess) = grid.covariant_derivatives(u)?;
    let mut out = Vec::with_capacity(grid.node_count());
    for node in 0..grid.node_count() {
        let ui = u[node];
        let du = grad[node];
        let q = du[0] * du[0] + du[1] * du[1];
        let w = math::sqrt(ui * ui + q);
        let outer = Sym2::outer(du);
        let g = Sym2::IDENTITY.add(&outer.scale(1.0 / (ui * ui))).scale(1.0 / (ui * ui));
        let gamma_up = Sym2::IDENTITY.sub(&outer.scale(1.0 / (w * (ui + w)))).scale(ui);
        let gamma_down = Sym2::IDENTITY
            .scale(1.0 / ui)
            .add(&outer.scale(1.0 / (ui * ui * (ui + w))));
        let h = Sym2::IDENTITY.scale(ui).add(&hess[node]).scale(1.0 / (ui * w));
        let a = sym_sandwich(&gamma_up, &h);
        let kappa = a.eigenvalues();
        let frame = grid.frame_vectors(node);
        let x = grid.sphere_point(node);
        let mut normal = [0.0f64; 3];
        for k in 0..3 {
            normal[k] = -(du[0] * frame[0][k] + du[1] * frame[1][k] + ui * x[k]) / w;
        }
        out.push(NodeGeometry { w, g, gamma_up, gamma_down, h, a, kappa, normal });
    }
    Ok(out)
}

/// Admissibility survey of a geometry field.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub all_admissible: bool,
    /// `min` over nodes and orders `j ≤ r` of `S_j(κ)`.
    pub worst_margin: f64,
    /// Nodes whose curvature tuple left Γ_r.
    pub failing: Vec<usize>,
}

/// Per-node cone membership of the principal curvatures.
pub fn admissibility(geom: &[NodeGeometry], spec: &CurvatureSpec) -> AdmissibilityReport {
    let mut worst = f64::INFINITY;
    let mut failing = Vec::new();
    for (node, ng) in geom.iter().enumerate() {
        let margin = symfun::cone_margin(spec, &ng.kappa)
            .expect("kappa length matches spec dimension");
        worst = worst.min(margin);
        if !(margin > 0.0) {
            failing.push(node);
        }
    }
    AdmissibilityReport { all_admissible: failing.is_empty(), worst_margin: worst, failing }
}

/// Surface mesh of the embedded graph: ring quads plus a pole triangle fan,
/// wound so face normals point away from the origin.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub quads: Vec<[usize; 4]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Embeds the graph `X = x/u` in ambient space with faces from the grid
/// connectivity. Vertex order follows the grid node numbering, so boundary
/// vertices land exactly on the prescribed boundary when the boundary rows
/// of `u` are pinned.
pub fn embed_mesh(grid: &ChartGrid, u: &[f64]) -> Result<SurfaceMesh> {
    for (node, &ui) in u.iter().enumerate() {
        if !(ui > 0.0) {
            return Err(Error::NonPositive { node, value: ui });
        }
    }
    if u.len() != grid.node_count() {
        return Err(Error::Argument(format!(
            "field length {} does not match grid",
            u.len()
        )));
    }
    let mut vertices = Vec::with_capacity(grid.node_count());
    for node in 0..grid.node_count() {
        let x = grid.sphere_point(node);
        vertices.push([x[0] / u[node], x[1] / u[node], x[2] / u[node]]);
    }
    let nt = grid.n_theta();
    let mut triangles = Vec::with_capacity(nt);
    for t in 0..nt {
        triangles.push([0, grid.node_index(1, t), grid.node_index(1, t + 1)]);
    }
    let mut quads = Vec::with_capacity((grid.boundary_ring() - 1) * nt);
    for j in 1..grid.boundary_ring() {
        for t in 0..nt {
            quads.push([
                grid.node_index(j, t),
                grid.node_index(j + 1, t),
                grid.node_index(j + 1, t + 1),
                grid.node_index(j, t + 1),
            ]);
        }
    }
    Ok(SurfaceMesh { vertices, quads, triangles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DomainSpec;
    use crate::sampling::{random_smooth_chart_field, SplitMix64};

    fn cap_grid(ns: usize, nt: usize) -> ChartGrid {
        ChartGrid::build(DomainSpec::cap(core::f64::consts::FRAC_PI_3).unwrap(), ns, nt).unwrap()
    }

    fn spec22() -> CurvatureSpec {
        CurvatureSpec::new(2, 2).unwrap()
    }

    #[test]
    fn unit_sphere_geometry() {
        let grid = cap_grid(17, 32);
        let u = alloc::vec![1.0; grid.node_count()];
        let geom = graph_geometry(&grid, &u, &spec22()).unwrap();
        for (node, ng) in geom.iter().enumerate() {
            assert!((ng.w - 1.0).abs() < 1e-12);
            for (m, name) in [(ng.g, "g"), (ng.h, "h"), (ng.a, "a")] {
                assert!((m.xx - 1.0).abs() < 1e-9, "{name} at {node}: {m:?}");
                assert!(m.xy.abs() < 1e-9, "{name} at {node}");
                assert!((m.yy - 1.0).abs() < 1e-9, "{name} at {node}");
            }
            assert!((ng.kappa[0] - 1.0).abs() < 1e-9);
            assert!((ng.kappa[1] - 1.0).abs() < 1e-9);
            // interior normal of the unit sphere is −x
            let x = grid.sphere_point(node);
            for k in 0..3 {
                assert!((ng.normal[k] + x[k]).abs() < 1e-12, "normal at {node}");
            }
        }
        let report = admissibility(&geom, &spec22());
        assert!(report.all_admissible);
        assert!((report.worst_margin - 1.0).abs() < 1e-8, "margin {}", report.worst_margin);
    }

    #[test]
    fn constant_field_gamma_matrices() {
        let grid = cap_grid(17, 32);
        let c = 2.5;
        let u = alloc::vec![c; grid.node_count()];
        let geom = graph_geometry(&grid, &u, &spec22()).unwrap();
        for ng in &geom {
            assert!((ng.gamma_up.xx - c).abs() < 1e-10);
            assert!((ng.gamma_up.yy - c).abs() < 1e-10);
            assert!(ng.gamma_up.xy.abs() < 1e-10);
            assert!((ng.gamma_down.xx - 1.0 / c).abs() < 1e-10);
            assert!((ng.gamma_down.yy - 1.0 / c).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_nonpositive_u() {
        let grid = cap_grid(17, 32);
        let mut u = alloc::vec![1.0; grid.node_count()];
        u[7] = -0.25;
        match graph_geometry(&grid, &u, &spec22()) {
            Err(Error::NonPositive { node: 7, .. }) => {}
            other => panic!("expected domain error naming node 7, got {other:?}"),
        }
    }

    #[test]
    fn square_root_and_similarity_invariants() {
        let grid = cap_grid(17, 32);
        let mut rng = SplitMix64::new(0xfeed_beef);
        let spec = spec22();
        let mut tested = 0;
        while tested < 20 {
            let rho = random_smooth_chart_field(&mut rng, &chart_points(&grid), 0.12);
            let u: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();
            let geom = graph_geometry(&grid, &u, &spec).unwrap();
            if !admissibility(&geom, &spec).all_admissible {
                continue;
            }
            tested += 1;
            for ng in &geom {
                // γ_down·γ_down = g
                let gg = sym_sandwich(&ng.gamma_down, &Sym2::IDENTITY);
                assert!((gg.xx - ng.g.xx).abs() < 1e-10);
                assert!((gg.xy - ng.g.xy).abs() < 1e-10);
                assert!((gg.yy - ng.g.yy).abs() < 1e-10);
                // γ_up · γ_down = I
                let prod = mat_mul(&ng.gamma_up, &ng.gamma_down);
                assert!((prod[0] - 1.0).abs() < 1e-10);
                assert!(prod[1].abs() < 1e-10);
                assert!(prod[2].abs() < 1e-10);
                assert!((prod[3] - 1.0).abs() < 1e-10);
                // eigenvalues of A equal eigenvalues of g⁻¹h
                let ginv = ng.g.inverse().unwrap();
                let m = [
                    ginv.xx * ng.h.xx + ginv.xy * ng.h.xy,
                    ginv.xx * ng.h.xy + ginv.xy * ng.h.yy,
                    ginv.xy * ng.h.xx + ginv.yy * ng.h.xy,
                    ginv.xy * ng.h.xy + ginv.yy * ng.h.yy,
                ];
                let tr = m[0] + m[3];
                let det = m[0] * m[3] - m[1] * m[2];
                let disc = math::sqrt((tr * tr - 4.0 * det).max(0.0));
                let lam = [(tr - disc) / 2.0, (tr + disc) / 2.0];
                assert!((lam[0] - ng.kappa[0]).abs() < 1e-9, "{lam:?} vs {:?}", ng.kappa);
                assert!((lam[1] - ng.kappa[1]).abs() < 1e-9);
                // mean curvature positivity on admissible fields
                assert!(ng.kappa[0] + ng.kappa[1] > 0.0);
                // unit normal
                let nn = ng.normal.iter().map(|x| x * x).sum::<f64>();
                assert!((nn - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curvature_scaling_law() {
        // replacing u by c·u scales kappa by c, pointwise and exactly
        let grid = cap_grid(17, 32);
        let mut rng = SplitMix64::new(1234);
        let rho = random_smooth_chart_field(&mut rng, &chart_points(&grid), 0.1);
        let u: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();
        let spec = spec22();
        let geom = graph_geometry(&grid, &u, &spec).unwrap();
        let c = 1.75;
        let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
        let geom_c = graph_geometry(&grid, &cu, &spec).unwrap();
        for (a, b) in geom.iter().zip(&geom_c) {
            for i in 0..2 {
                assert!(
                    (b.kappa[i] - c * a.kappa[i]).abs() < 1e-10 * (1.0 + a.kappa[i].abs()),
                    "{:?} vs {:?}",
                    a.kappa,
                    b.kappa
                );
            }
        }
    }

    #[test]
    fn saddle_field_fails_admissibility() {
        // a strong localized bump produces mixed-sign curvatures somewhere
        let grid = cap_grid(33, 64);
        let rho: Vec<f64> = (0..grid.node_count())
            .map(|i| {
                let [x, y] = grid.chart_point(i);
                let d2 = (x - 0.4) * (x - 0.4) + y * y;
                1.0 + 0.5 * math::exp(-d2 / 0.02)
            })
            .collect();
        let u: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();
        let spec = spec22();
        let geom = graph_geometry(&grid, &u, &spec).unwrap();
        let report = admissibility(&geom, &spec);
        assert!(!report.all_admissible, "bump failed to exit the cone");
        assert!(report.worst_margin < 0.0);
        // the failing nodes really have S₂ < 0
        for &node in report.failing.iter().take(5) {
            let k = geom[node].kappa;
            assert!(k[0] * k[1] <= 0.0 || k[0] + k[1] <= 0.0, "node {node}: {k:?}");
        }
        // order 1 admissibility is the half-space S₁ > 0: satisfied by fields
        // of positive mean curvature even where S₂ < 0
        let spec1 = CurvatureSpec::with_order(2, 1).unwrap();
        let report1 = admissibility(&geom, &spec1);
        let mean_positive = geom.iter().all(|g| g.kappa[0] + g.kappa[1] > 0.0);
        assert_eq!(report1.all_admissible, mean_positive);
    }

    #[test]
    fn mesh_embedding_scales() {
        let grid = cap_grid(17, 32);
        for &c in &[1.0, 2.0] {
            let u = alloc::vec![c; grid.node_count()];
            let mesh = embed_mesh(&grid, &u).unwrap();
            for v in &mesh.vertices {
                let r = math::sqrt(v.iter().map(|x| x * x).sum());
                assert!((r - 1.0 / c).abs() < 1e-13);
            }
            assert_eq!(mesh.triangles.len(), 32);
            assert_eq!(mesh.quads.len(), 15 * 32);
            // outward winding: face normal points away from the origin
            for q in mesh.quads.iter().take(8) {
                let a = mesh.vertices[q[0]];
                let b = mesh.vertices[q[1]];
                let d = mesh.vertices[q[3]];
                let e1: [f64; 3] = core::array::from_fn(|i| b[i] - a[i]);
                let e2: [f64; 3] = core::array::from_fn(|i| d[i] - a[i]);
                let n = [
                    e1[1] * e2[2] - e1[2] * e2[1],
                    e1[2] * e2[0] - e1[0] * e2[2],
                    e1[0] * e2[1] - e1[1] * e2[0],
                ];
                let dot = n[0] * a[0] + n[1] * a[1] + n[2] * a[2];
                assert!(dot > 0.0, "inward-wound face");
            }
        }
    }

    fn chart_points(grid: &ChartGrid) -> Vec<[f64; 2]> {
        (0..grid.node_count()).map(|i| grid.chart_point(i)).collect()
    }

    fn mat_mul(a: &Sym2, b: &Sym2) -> [f64; 4] {
        [
            a.xx * b.xx + a.xy * b.xy,
            a.xx * b.xy + a.xy * b.yy,
            a.xy * b.xx + a.yy * b.xy,
            a.xy * b.xy + a.yy * b.yy,
        ]
    }
}
