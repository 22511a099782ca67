//! Gnomonic-chart grids over star-shaped domains in an open hemisphere of S².
//!
//! The hemisphere hypothesis buys a single global chart: central projection
//! onto the tangent plane at the pole. Its pullback metric is closed form,
//!
//! ```text
//! g_ab = δ_ab/σ − x_a x_b/σ²,   σ = 1 + x² + y²,
//! Γ^c_ab = −(x_a δ_cb + x_b δ_ca)/σ,
//! ```
//!
//! so the connection never needs numerical differentiation. Domains are
//! star-shaped about the chart origin with boundary radius `s_b(θ)` given by
//! a truncated Fourier series; grids are boundary-fitted polar
//! (`chart = s·s_b(θ)·(cos θ, sin θ)`), with a single shared unknown at the
//! pole. Scalar fields are differentiated by fourth-order stencils in the
//! interior, compact closures on the rings adjacent to the pole and the
//! boundary, one-sided stencils on the boundary ring itself and a
//! least-squares quadratic fit over rings 1–2 at the pole, then converted to
//! an orthonormal frame where the covariant formulas of the curvature
//! operator apply verbatim.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd_small, Mat2, Matrix, Sym2};
use crate::math;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// One scalar unknown per grid node, pole stored once at index 0.
pub type ScalarField = Vec<f64>;

const HEMISPHERE_MARGIN: f64 = 1e-3;

/// A domain in the open upper hemisphere, star-shaped about the pole.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Geodesic cap of radius `theta0` about the pole.
    Cap { theta0: f64 },
    /// Chart boundary radius `s_b(θ) = c₀ + Σ_k c_k cos kθ + s_k sin kθ`.
    Star { cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64> },
}

impl DomainSpec {
    pub fn cap(theta0: f64) -> Result<Self> {
        let d = DomainSpec::Cap { theta0 };
        d.validate()?;
        Ok(d)
    }

    /// `cos_coeffs[0]` is the constant term; `sin_coeffs[k]` pairs with
    /// wavenumber `k + 1`.
    pub fn star(cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Result<Self> {
        let d = DomainSpec::Star { cos_coeffs, sin_coeffs };
        d.validate()?;
        Ok(d)
    }

    /// Chart radius of the boundary curve at polar angle θ.
    pub fn chart_radius(&self, theta: f64) -> f64 {
        match self {
            DomainSpec::Cap { theta0 } => math::tan(*theta0),
            DomainSpec::Star { cos_coeffs, sin_coeffs } => {
                let mut r = 0.0;
                for (k, &c) in cos_coeffs.iter().enumerate() {
                    r += c * math::cos(k as f64 * theta);
                }
                for (k, &s) in sin_coeffs.iter().enumerate() {
                    r += s * math::sin((k + 1) as f64 * theta);
                }
                r
            }
        }
    }

    pub fn chart_radius_d1(&self, theta: f64) -> f64 {
        match self {
            DomainSpec::Cap { .. } => 0.0,
            DomainSpec::Star { cos_coeffs, sin_coeffs } => {
                let mut r = 0.0;
                for (k, &c) in cos_coeffs.iter().enumerate() {
                    r -= c * k as f64 * math::sin(k as f64 * theta);
                }
                for (k, &s) in sin_coeffs.iter().enumerate() {
                    let m = (k + 1) as f64;
                    r += s * m * math::cos(m * theta);
                }
                r
            }
        }
    }

    pub fn chart_radius_d2(&self, theta: f64) -> f64 {
        match self {
            DomainSpec::Cap { .. } => 0.0,
            DomainSpec::Star { cos_coeffs, sin_coeffs } => {
                let mut r = 0.0;
                for (k, &c) in cos_coeffs.iter().enumerate() {
                    let m = k as f64;
                    r -= c * m * m * math::cos(m * theta);
                }
                for (k, &s) in sin_coeffs.iter().enumerate() {
                    let m = (k + 1) as f64;
                    r -= s * m * m * math::sin(m * theta);
                }
                r
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Cap { theta0 } => {
                if !(*theta0 > 0.0 && *theta0 < core::f64::consts::FRAC_PI_2 - HEMISPHERE_MARGIN) {
                    return Err(Error::Argument(format!(
                        "cap radius {theta0} outside (0, pi/2 - {HEMISPHERE_MARGIN})"
                    )));
                }
            }
            DomainSpec::Star { .. } => {
                let limit = math::tan(core::f64::consts::FRAC_PI_2 - HEMISPHERE_MARGIN);
                for k in 0..4096 {
                    let theta = 2.0 * core::f64::consts::PI * k as f64 / 4096.0;
                    let r = self.chart_radius(theta);
                    if !(r > 1e-6) {
                        return Err(Error::Argument(format!(
                            "boundary radius {r:e} at theta = {theta} is not positive"
                        )));
                    }
                    if r > limit {
                        return Err(Error::Argument(format!(
                            "boundary radius {r} at theta = {theta} leaves the hemisphere chart"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Central projection of the upper hemisphere onto its tangent plane at the
/// pole (0,0,1): a point at geodesic distance θ maps to chart radius tan θ.
pub fn gnomonic_forward(p: [f64; 3]) -> Result<[f64; 2]> {
    if !(p[2] > 0.0) {
        return Err(Error::Argument(format!(
            "point with z = {} is not in the open upper hemisphere",
            p[2]
        )));
    }
    Ok([p[0] / p[2], p[1] / p[2]])
}

/// Inverse of [`gnomonic_forward`]; always lands on the upper unit sphere.
pub fn gnomonic_inverse(xy: [f64; 2]) -> [f64; 3] {
    let norm = math::sqrt(1.0 + xy[0] * xy[0] + xy[1] * xy[1]);
    [xy[0] / norm, xy[1] / norm, 1.0 / norm]
}

/// Round-sphere metric in chart coordinates.
pub fn round_metric(xy: [f64; 2]) -> Sym2 {
    let sigma = 1.0 + xy[0] * xy[0] + xy[1] * xy[1];
    let s2 = sigma * sigma;
    Sym2 {
        xx: 1.0 / sigma - xy[0] * xy[0] / s2,
        xy: -xy[0] * xy[1] / s2,
        yy: 1.0 / sigma - xy[1] * xy[1] / s2,
    }
}

/// Christoffel symbols `Γ^c_ab = −(x_a δ_cb + x_b δ_ca)/σ`, returned as one
/// symmetric (a,b)-matrix per upper index c.
pub fn christoffel(xy: [f64; 2]) -> [Sym2; 2] {
    let sigma = 1.0 + xy[0] * xy[0] + xy[1] * xy[1];
    let x = xy[0];
    let y = xy[1];
    [
        Sym2 { xx: -2.0 * x / sigma, xy: -y / sigma, yy: 0.0 },
        Sym2 { xx: 0.0, xy: -x / sigma, yy: -2.0 * y / sigma },
    ]
}

#[derive(Clone, Debug)]
struct RingStencil {
    offsets: Vec<i64>,
    weights: Vec<f64>,
}

/// Boundary-fitted polar grid with per-node round-metric data and the
/// precomputed linear maps that turn computational derivatives
/// `(u_s, u_θ, u_ss, u_sθ, u_θθ)` into orthonormal-frame components.
#[derive(Clone, Debug)]
pub struct ChartGrid {
    n_s: usize,
    n_theta: usize,
    domain: DomainSpec,
    h_s: f64,
    h_theta: f64,
    chart_xy: Vec<[f64; 2]>,
    sphere_xyz: Vec<[f64; 3]>,
    metric: Vec<Sym2>,
    frame: Vec<Sym2>,
    christoffel: Vec<[Sym2; 2]>,
    frame_ambient: Vec<[[f64; 3]; 2]>,
    map_jacobian: Vec<Mat2>,
    a_grad: Vec<Mat2>,
    b_hess: Vec<[Sym2; 3]>,
    c_hess: Vec<[Sym2; 2]>,
    rad_d1: Vec<RingStencil>,
    rad_d2: Vec<RingStencil>,
    th_d1: [f64; 4],
    th_d2: [f64; 5],
    pole_w: Vec<[f64; 5]>,
    pole_w0: [f64; 5],
}

/// Builds the grid; `n_s ≥ 9` radial nodes (pole counted once), `n_theta ≥ 16`
/// even. Boundary nodes sit exactly on the chart image of ∂Ω.
pub fn build_grid(domain: &DomainSpec, n_s: usize, n_theta: usize) -> Result<ChartGrid> {
    ChartGrid::build(domain.clone(), n_s, n_theta)
}

impl ChartGrid {
    pub fn build(domain: DomainSpec, n_s: usize, n_theta: usize) -> Result<Self> {
        if n_s < 9 {
            return Err(Error::Argument(format!("n_s = {n_s} must be at least 9")));
        }
        if n_theta < 16 || !n_theta.is_multiple_of(2) {
            return Err(Error::Argument(format!("n_theta = {n_theta} must be even and >= 16")));
        }
        domain.validate()?;
        let b = n_s - 1;
        let h_s = 1.0 / b as f64;
        let h_theta = 2.0 * core::f64::consts::PI / n_theta as f64;
        let nodes = 1 + b * n_theta;

        let mut grid = ChartGrid {
            n_s,
            n_theta,
            domain,
            h_s,
            h_theta,
            chart_xy: vec![[0.0; 2]; nodes],
            sphere_xyz: vec![[0.0; 3]; nodes],
            metric: vec![Sym2::IDENTITY; nodes],
            frame: vec![Sym2::IDENTITY; nodes],
            christoffel: vec![[Sym2::ZERO; 2]; nodes],
            frame_ambient: vec![[[0.0; 3]; 2]; nodes],
            map_jacobian: vec![Mat2::default(); nodes],
            a_grad: vec![Mat2::IDENTITY; nodes],
            b_hess: vec![[Sym2::ZERO; 3]; nodes],
            c_hess: vec![[Sym2::ZERO; 2]; nodes],
            rad_d1: Vec::new(),
            rad_d2: Vec::new(),
            th_d1: [0.0; 4],
            th_d2: [0.0; 5],
            pole_w: Vec::new(),
            pole_w0: [0.0; 5],
        };

        // pole node
        grid.sphere_xyz[0] = [0.0, 0.0, 1.0];
        grid.frame_ambient[0] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

        for j in 1..=b {
            let s = j as f64 * h_s;
            for t in 0..n_theta {
                let theta = t as f64 * h_theta;
                let (ct, st) = (math::cos(theta), math::sin(theta));
                let r = grid.domain.chart_radius(theta);
                let r1 = grid.domain.chart_radius_d1(theta);
                let r2 = grid.domain.chart_radius_d2(theta);
                let idx = grid.node_index(j, t);
                let xy = [s * r * ct, s * r * st];
                grid.chart_xy[idx] = xy;
                grid.sphere_xyz[idx] = gnomonic_inverse(xy);
                let g = round_metric(xy);
                grid.metric[idx] = g;
                let e = g.inverse()?.sqrt_spd()?;
                grid.frame[idx] = e;
                grid.christoffel[idx] = christoffel(xy);

                // ambient tangent vectors ∂Φ/∂x_a, then the frame vectors
                let sigma = 1.0 + xy[0] * xy[0] + xy[1] * xy[1];
                let sq = math::sqrt(sigma);
                let v = [xy[0], xy[1], 1.0];
                let mut tangent = [[0.0; 3]; 2];
                for a in 0..2 {
                    for k in 0..3 {
                        let delta = if a == k { 1.0 } else { 0.0 };
                        tangent[a][k] = delta / sq - v[k] * xy[a] / (sigma * sq);
                    }
                }
                let e_mat = [[e.xx, e.xy], [e.xy, e.yy]];
                for i in 0..2 {
                    for k in 0..3 {
                        grid.frame_ambient[idx][i][k] =
                            e_mat[i][0] * tangent[0][k] + e_mat[i][1] * tangent[1][k];
                    }
                }

                // transfinite map x(s,θ) = s·R(θ)·e(θ) and its derivatives
                let e_dir = [ct, st];
                let e_perp = [-st, ct];
                let x_s = [r * e_dir[0], r * e_dir[1]];
                let x_t = [s * (r1 * e_dir[0] + r * e_perp[0]), s * (r1 * e_dir[1] + r * e_perp[1])];
                let jac = Mat2::new(x_s[0], x_t[0], x_s[1], x_t[1]);
                grid.map_jacobian[idx] = jac;
                let jinv = jac.inverse()?;
                let jinv_t = jinv.transpose();

                // second derivatives of the map: x_ss = 0
                let x_st = [r1 * e_dir[0] + r * e_perp[0], r1 * e_dir[1] + r * e_perp[1]];
                let x_tt = [
                    s * (r2 * e_dir[0] + 2.0 * r1 * e_perp[0] - r * e_dir[0]),
                    s * (r2 * e_dir[1] + 2.0 * r1 * e_perp[1] - r * e_dir[1]),
                ];
                // K^a as symmetric (s,θ) matrices
                let k_map = [
                    Sym2 { xx: 0.0, xy: x_st[0], yy: x_tt[0] },
                    Sym2 { xx: 0.0, xy: x_st[1], yy: x_tt[1] },
                ];

                let e2 = Mat2::new(e.xx, e.xy, e.xy, e.yy);
                grid.a_grad[idx] = Mat2::new(
                    e2.a * jinv_t.a + e2.b * jinv_t.c,
                    e2.a * jinv_t.b + e2.b * jinv_t.d,
                    e2.c * jinv_t.a + e2.d * jinv_t.c,
                    e2.c * jinv_t.b + e2.d * jinv_t.d,
                );
                let bases = [
                    Sym2 { xx: 1.0, xy: 0.0, yy: 0.0 },
                    Sym2 { xx: 0.0, xy: 1.0, yy: 0.0 },
                    Sym2 { xx: 0.0, xy: 0.0, yy: 1.0 },
                ];
                for (m, basis) in bases.iter().enumerate() {
                    grid.b_hess[idx][m] = e2.sandwich(&jinv_t.sandwich(basis));
                }
                let gamma = grid.christoffel[idx];
                for dir in 0..2 {
                    let unit = if dir == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
                    let dc = jinv_t.mul_vec(unit);
                    // −J^{-T} (K·δc) J^{-1} − Γ·δc, then the frame sandwich
                    let k_dc = k_map[0].scale(dc[0]).add(&k_map[1].scale(dc[1]));
                    let gamma_dc = gamma[0].scale(dc[0]).add(&gamma[1].scale(dc[1]));
                    let inner = jinv_t.sandwich(&k_dc.scale(-1.0)).sub(&gamma_dc);
                    grid.c_hess[idx][dir] = e2.sandwich(&inner);
                }
            }
        }

        grid.build_stencils();
        grid.build_pole_fit()?;
        Ok(grid)
    }

    /// Stencil tables. First derivatives use fourth-order interior stencils
    /// (biased third-order on the rings adjacent to pole and boundary,
    /// one-sided fourth-order on the boundary ring). The radial second
    /// derivative is compact second-order, which makes the covariant Hessian
    /// — and with it the solved fields — carry a clean O(h²) error. The
    /// angular second derivative and the mixed derivative (the θ-derivative
    /// of the radial-gradient field) stay fourth-order: their truncation
    /// meets 1/s factors from the polar map, so a compact closure would
    /// degrade to O(h) on the first ring. Interior equation rows couple at
    /// most ±2 rings and ±2 angular steps either way, which caps the
    /// Jacobian bandwidth.
    fn build_stencils(&mut self) {
        let b = self.n_s - 1;
        let h = self.h_s;
        let h2 = h * h;
        let empty = RingStencil { offsets: Vec::new(), weights: Vec::new() };
        let mut d1 = vec![empty.clone(); b + 1];
        let mut d2 = vec![empty; b + 1];
        for j in 1..=b {
            let (o1, w1): (Vec<i64>, Vec<f64>) = if j == 1 {
                (vec![-1, 0, 1, 2], vec![-1.0 / 3.0, -0.5, 1.0, -1.0 / 6.0])
            } else if j <= b - 2 {
                (vec![-2, -1, 1, 2], vec![1.0 / 12.0, -2.0 / 3.0, 2.0 / 3.0, -1.0 / 12.0])
            } else if j == b - 1 {
                (vec![-2, -1, 0, 1], vec![1.0 / 6.0, -1.0, 0.5, 1.0 / 3.0])
            } else {
                (vec![-4, -3, -2, -1, 0], vec![0.25, -4.0 / 3.0, 3.0, -4.0, 25.0 / 12.0])
            };
            d1[j] = RingStencil {
                offsets: o1,
                weights: w1.into_iter().map(|w| w / h).collect(),
            };
            let (o2, w2): (Vec<i64>, Vec<f64>) = if j < b {
                (vec![-1, 0, 1], vec![1.0, -2.0, 1.0])
            } else {
                (
                    vec![-4, -3, -2, -1, 0],
                    vec![11.0 / 12.0, -14.0 / 3.0, 9.5, -26.0 / 3.0, 35.0 / 12.0],
                )
            };
            d2[j] = RingStencil {
                offsets: o2,
                weights: w2.into_iter().map(|w| w / h2).collect(),
            };
        }
        self.rad_d1 = d1;
        self.rad_d2 = d2;
        let ht = self.h_theta;
        self.th_d1 = [1.0 / 12.0 / ht, -2.0 / 3.0 / ht, 2.0 / 3.0 / ht, -1.0 / 12.0 / ht];
        self.th_d2 = [
            -1.0 / 12.0 / (ht * ht),
            4.0 / 3.0 / (ht * ht),
            -2.5 / (ht * ht),
            4.0 / 3.0 / (ht * ht),
            -1.0 / 12.0 / (ht * ht),
        ];
    }

    /// Pole closure: constrained least-squares quadratic over rings 1–2 with
    /// the constant pinned to the pole value. The fitted gradient/Hessian are
    /// linear in the node values; the weights are kept for Jacobian assembly.
    fn build_pole_fit(&mut self) -> Result<()> {
        let nt = self.n_theta;
        let m = 2 * nt;
        let mut design = Matrix::zeros(m, 5);
        for (row, idx) in self.pole_ring_nodes().enumerate() {
            let [x, y] = self.chart_xy[idx];
            design.set(row, 0, x);
            design.set(row, 1, y);
            design.set(row, 2, 0.5 * x * x);
            design.set(row, 3, x * y);
            design.set(row, 4, 0.5 * y * y);
        }
        // normal equations M = AᵀA, then W = M⁻¹Aᵀ column by column
        let mut normal = Matrix::zeros(5, 5);
        for i in 0..5 {
            for j in 0..5 {
                let mut s = 0.0;
                for k in 0..m {
                    s += design.get(k, i) * design.get(k, j);
                }
                normal.set(i, j, s);
            }
        }
        let mut weights = vec![[0.0f64; 5]; m];
        for k in 0..m {
            let mut rhs = [0.0f64; 5];
            for i in 0..5 {
                rhs[i] = design.get(k, i);
            }
            let mut fac = normal.clone();
            solve_spd_small(&mut fac, &mut rhs)?;
            weights[k] = rhs;
        }
        let mut w0 = [0.0f64; 5];
        for w in &weights {
            for i in 0..5 {
                w0[i] -= w[i];
            }
        }
        self.pole_w = weights;
        self.pole_w0 = w0;
        Ok(())
    }

    /// Nodes of rings 1 and 2 in fit order.
    fn pole_ring_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=2usize).flat_map(move |j| (0..self.n_theta).map(move |t| self.node_index(j, t)))
    }

    #[inline]
    pub fn n_s(&self) -> usize {
        self.n_s
    }

    #[inline]
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    #[inline]
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        1 + (self.n_s - 1) * self.n_theta
    }

    /// Ring-major node numbering; ring 0 is the single pole node.
    #[inline]
    pub fn node_index(&self, ring: usize, theta: usize) -> usize {
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * self.n_theta + (theta % self.n_theta)
        }
    }

    #[inline]
    pub fn ring_of(&self, node: usize) -> usize {
        if node == 0 {
            0
        } else {
            (node - 1) / self.n_theta + 1
        }
    }

    #[inline]
    pub fn theta_of(&self, node: usize) -> usize {
        if node == 0 {
            0
        } else {
            (node - 1) % self.n_theta
        }
    }

    /// Boundary ring index (`n_s − 1`).
    #[inline]
    pub fn boundary_ring(&self) -> usize {
        self.n_s - 1
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        let b = self.boundary_ring();
        (0..self.n_theta).map(move |t| self.node_index(b, t))
    }

    /// True for nodes where the curvature equation is imposed (everything
    /// except the boundary ring).
    #[inline]
    pub fn is_interior(&self, node: usize) -> bool {
        self.ring_of(node) < self.boundary_ring()
    }

    #[inline]
    pub fn chart_point(&self, node: usize) -> [f64; 2] {
        self.chart_xy[node]
    }

    #[inline]
    pub fn sphere_point(&self, node: usize) -> [f64; 3] {
        self.sphere_xyz[node]
    }

    #[inline]
    pub fn metric_at(&self, node: usize) -> Sym2 {
        self.metric[node]
    }

    #[inline]
    pub fn frame_at(&self, node: usize) -> Sym2 {
        self.frame[node]
    }

    #[inline]
    pub fn christoffel_at(&self, node: usize) -> [Sym2; 2] {
        self.christoffel[node]
    }

    /// Orthonormal frame vectors as ambient 3-vectors.
    #[inline]
    pub fn frame_vectors(&self, node: usize) -> [[f64; 3]; 2] {
        self.frame_ambient[node]
    }

    #[inline]
    pub fn radial_step(&self) -> f64 {
        self.h_s
    }

    #[inline]
    pub fn angular_step(&self) -> f64 {
        self.h_theta
    }

    fn check_field(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.node_count() {
            return Err(Error::Argument(format!(
                "field length {} does not match grid ({} nodes)",
                f.len(),
                self.node_count()
            )));
        }
        Ok(())
    }

    /// Covariant gradient in the orthonormal frame, `∇_i u`.
    pub fn covariant_gradient(&self, f: &[f64]) -> Result<Vec<[f64; 2]>> {
        Ok(self.covariant_derivatives(f)?.0)
    }

    /// Covariant Hessian in the orthonormal frame, `∇_ij u` (coordinate
    /// Hessian minus the Christoffel contraction, then frame conversion;
    /// symmetric by storage).
    pub fn covariant_hessian(&self, f: &[f64]) -> Result<Vec<Sym2>> {
        Ok(self.covariant_derivatives(f)?.1)
    }

    /// Gradient and Hessian in one pass.
    pub fn covariant_derivatives(&self, f: &[f64]) -> Result<(Vec<[f64; 2]>, Vec<Sym2>)> {
        self.check_field(f)?;
        let nt = self.n_theta;
        let b = self.boundary_ring();
        let nodes = self.node_count();
        let mut grad = vec![[0.0f64; 2]; nodes];
        let mut hess = vec![Sym2::ZERO; nodes];

        // θ derivatives ring by ring (periodic); index 0 stays zero: the
        // angular derivative of any smooth field vanishes at the pole
        let mut ut = vec![0.0f64; nodes];
        let mut utt = vec![0.0f64; nodes];
        for j in 1..=b {
            for t in 0..nt {
                let idx = self.node_index(j, t);
                let v = |dt: i64| {
                    f[self.node_index(j, (t as i64 + dt).rem_euclid(nt as i64) as usize)]
                };
                ut[idx] = self.th_d1[0] * v(-2)
                    + self.th_d1[1] * v(-1)
                    + self.th_d1[2] * v(1)
                    + self.th_d1[3] * v(2);
                utt[idx] = self.th_d2[0] * v(-2)
                    + self.th_d2[1] * v(-1)
                    + self.th_d2[2] * v(0)
                    + self.th_d2[3] * v(1)
                    + self.th_d2[4] * v(2);
            }
        }

        // radial first derivative everywhere (the mixed derivative is the
        // angular derivative of this field; the pole slot stays unused)
        let mut us = vec![0.0f64; nodes];
        let mut uss = vec![0.0f64; nodes];
        for j in 1..=b {
            let d1 = &self.rad_d1[j];
            let d2 = &self.rad_d2[j];
            for t in 0..nt {
                let idx = self.node_index(j, t);
                let mut acc1 = 0.0;
                for (o, w) in d1.offsets.iter().zip(&d1.weights) {
                    acc1 += w * f[self.node_index((j as i64 + o) as usize, t)];
                }
                us[idx] = acc1;
                let mut acc2 = 0.0;
                for (o, w) in d2.offsets.iter().zip(&d2.weights) {
                    acc2 += w * f[self.node_index((j as i64 + o) as usize, t)];
                }
                uss[idx] = acc2;
            }
        }

        for j in 1..=b {
            for t in 0..nt {
                let idx = self.node_index(j, t);
                let w = |dt: i64| {
                    us[self.node_index(j, (t as i64 + dt).rem_euclid(nt as i64) as usize)]
                };
                let ust = self.th_d1[0] * w(-2)
                    + self.th_d1[1] * w(-1)
                    + self.th_d1[2] * w(1)
                    + self.th_d1[3] * w(2);
                let d1v = [us[idx], ut[idx]];
                grad[idx] = self.a_grad[idx].mul_vec(d1v);
                let bh = &self.b_hess[idx];
                let ch = &self.c_hess[idx];
                hess[idx] = bh[0]
                    .scale(uss[idx])
                    .add(&bh[1].scale(ust))
                    .add(&bh[2].scale(utt[idx]))
                    .add(&ch[0].scale(d1v[0]))
                    .add(&ch[1].scale(d1v[1]));
            }
        }

        let (pg, ph) = self.pole_fit(f);
        grad[0] = pg;
        hess[0] = ph;
        Ok((grad, hess))
    }

    fn pole_fit(&self, f: &[f64]) -> ([f64; 2], Sym2) {
        let mut beta = [0.0f64; 5];
        for (w, idx) in self.pole_w.iter().zip(self.pole_ring_nodes()) {
            let v = f[idx];
            for i in 0..5 {
                beta[i] += w[i] * v;
            }
        }
        for i in 0..5 {
            beta[i] += self.pole_w0[i] * f[0];
        }
        ([beta[0], beta[1]], Sym2 { xx: beta[2], xy: beta[3], yy: beta[4] })
    }

    /// Derivative of the frame gradient and Hessian at an equation node with
    /// respect to each coupled field value; drives Jacobian assembly. Not
    /// defined on the boundary ring (those rows are affine).
    pub fn linearize_derivatives(
        &self,
        node: usize,
        emit: &mut dyn FnMut(usize, [f64; 2], Sym2),
    ) {
        let ring = self.ring_of(node);
        debug_assert!(ring < self.boundary_ring(), "boundary rows are affine");
        if ring == 0 {
            for (w, idx) in self.pole_w.iter().zip(self.pole_ring_nodes()) {
                emit(idx, [w[0], w[1]], Sym2 { xx: w[2], xy: w[3], yy: w[4] });
            }
            let w = &self.pole_w0;
            emit(0, [w[0], w[1]], Sym2 { xx: w[2], xy: w[3], yy: w[4] });
            return;
        }
        let t = self.theta_of(node);
        let nt = self.n_theta as i64;
        // weights per (Δring, Δθ) cell: [u_s, u_θ, u_ss, u_sθ, u_θθ]
        let mut patch = [[[0.0f64; 5]; 5]; 5];
        let d1 = &self.rad_d1[ring];
        let d2 = &self.rad_d2[ring];
        let th1_off: [i64; 4] = [-2, -1, 1, 2];
        let th2_off: [i64; 5] = [-2, -1, 0, 1, 2];
        for (o, w) in d1.offsets.iter().zip(&d1.weights) {
            patch[(o + 2) as usize][2][0] += w;
            // mixed derivative = θ-stencil applied to the radial gradient;
            // the pole value enters with total weight Σwθ = 0, kept for
            // exact agreement with the field operator
            for (k, wk) in th1_off.iter().zip(&self.th_d1) {
                patch[(o + 2) as usize][(k + 2) as usize][3] += w * wk;
            }
        }
        for (o, w) in d2.offsets.iter().zip(&d2.weights) {
            patch[(o + 2) as usize][2][2] += w;
        }
        for (k, wk) in th1_off.iter().zip(&self.th_d1) {
            patch[2][(k + 2) as usize][1] += wk;
        }
        for (k, wk) in th2_off.iter().zip(&self.th_d2) {
            patch[2][(k + 2) as usize][4] += wk;
        }
        let a = &self.a_grad[node];
        let bh = &self.b_hess[node];
        let ch = &self.c_hess[node];
        for dj in -2i64..=2 {
            let rj = ring as i64 + dj;
            if rj < 0 || rj > self.boundary_ring() as i64 {
                continue;
            }
            for dt in -2i64..=2 {
                let w = &patch[(dj + 2) as usize][(dt + 2) as usize];
                if w.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let q = if rj == 0 {
                    0
                } else {
                    self.node_index(rj as usize, (t as i64 + dt).rem_euclid(nt) as usize)
                };
                let dgrad = a.mul_vec([w[0], w[1]]);
                let dhess = bh[0]
                    .scale(w[2])
                    .add(&bh[1].scale(w[3]))
                    .add(&bh[2].scale(w[4]))
                    .add(&ch[0].scale(w[0]))
                    .add(&ch[1].scale(w[1]));
                emit(q, dgrad, dhess);
            }
        }
    }

    /// Midpoint-style area weights `|det J_map|·√det g·h_s·h_θ`; the pole
    /// cell is approximated by a disc. Exact enough for the O(h²) quadrature
    /// checks these feed.
    pub fn cell_weights(&self) -> Vec<f64> {
        let nodes = self.node_count();
        let mut w = vec![0.0f64; nodes];
        let b = self.boundary_ring();
        for j in 1..=b {
            for t in 0..self.n_theta {
                let idx = self.node_index(j, t);
                let det_j = math::abs(self.map_jacobian[idx].det());
                let det_g = self.metric[idx].det();
                let factor = if j == b { 0.5 } else { 1.0 };
                w[idx] = factor * det_j * math::sqrt(det_g) * self.h_s * self.h_theta;
            }
        }
        let mean_r: f64 = (0..self.n_theta)
            .map(|t| self.domain.chart_radius(t as f64 * self.h_theta))
            .sum::<f64>()
            / self.n_theta as f64;
        let disc_r = 0.5 * self.h_s * mean_r;
        w[0] = core::f64::consts::PI * disc_r * disc_r;
        w
    }
}

/// Minimum geodesic curvature of ∂Ω in S² with respect to the inward normal,
/// sampled at `resolution` boundary points. Negative values flag a
/// mean-concave boundary; callers warn rather than reject, since only the
/// existence theorem (not the boundary estimate) uses convexity.
pub fn boundary_mean_convexity(domain: &DomainSpec, resolution: usize) -> f64 {
    boundary_geodesic_curvature(domain, resolution)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Geodesic curvature samples along ∂Ω, counterclockwise in the chart.
pub fn boundary_geodesic_curvature(domain: &DomainSpec, resolution: usize) -> Vec<f64> {
    let n = resolution.max(8);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let theta = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
        let (ct, st) = (math::cos(theta), math::sin(theta));
        let e = [ct, st];
        let ep = [-st, ct];
        let r = domain.chart_radius(theta);
        let r1 = domain.chart_radius_d1(theta);
        let r2 = domain.chart_radius_d2(theta);
        let c = [r * e[0], r * e[1]];
        let c1 = [r1 * e[0] + r * ep[0], r1 * e[1] + r * ep[1]];
        let c2 = [
            r2 * e[0] + 2.0 * r1 * ep[0] - r * e[0],
            r2 * e[1] + 2.0 * r1 * ep[1] - r * e[1],
        ];
        let v = [c[0], c[1], 1.0];
        let v1 = [c1[0], c1[1], 0.0];
        let v2 = [c2[0], c2[1], 0.0];
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let nn = math::sqrt(dot(&v, &v));
        let n1 = dot(&v, &v1) / nn;
        let n2 = (dot(&v1, &v1) + dot(&v, &v2) - n1 * n1) / nn;
        let x: [f64; 3] = core::array::from_fn(|i| v[i] / nn);
        let x1: [f64; 3] = core::array::from_fn(|i| v1[i] / nn - v[i] * n1 / (nn * nn));
        let x2: [f64; 3] = core::array::from_fn(|i| {
            v2[i] / nn - 2.0 * v1[i] * n1 / (nn * nn)
                + v[i] * (2.0 * n1 * n1 / (nn * nn * nn) - n2 / (nn * nn))
        });
        let cross = [
            x[1] * x1[2] - x[2] * x1[1],
            x[2] * x1[0] - x[0] * x1[2],
            x[0] * x1[1] - x[1] * x1[0],
        ];
        let speed = math::sqrt(dot(&x1, &x1));
        out.push(dot(&cross, &x2) / (speed * speed * speed));
    }
    out
}
