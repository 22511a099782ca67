//! The curvature operator in logarithmic form and its linearization.
//!
//! With `v = ln u` the similar-symmetric curvature matrix becomes
//!
//! ```text
//! A[v] = (e^v / w)(δ_ij + γ^{ik} ∇_kl v γ^{jl}),
//! w = √(1 + |∇v|²),   γ^{ij} = δ_ij − ∇_i v ∇_j v / (w(1+w)),
//! ```
//!
//! and the equation reads `F(A[v]) = rhs` at interior nodes with affine
//! Dirichlet rows `v − v_bc` on the boundary ring. This form is used for the
//! Newton path because the zeroth-order coefficient of the linearization,
//! `H_v − ∂rhs/∂v = F^{ij}a_ij − ∂rhs/∂v`, is nonpositive at near-solutions
//! for both homotopy families, which keeps the linearized problem
//! sign-definite where it matters.
//!
//! The two right-hand-side families share one arithmetic path so that the
//! splice `Ψ^{t=1} ≡ Ξ^{s=0}` holds bitwise.

use crate::chart::ChartGrid;
use crate::error::{Error, Result};
use crate::linalg::{sym_sandwich, Sym2};
use crate::math;
use crate::symfun::CurvatureSpec;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Which homotopy family a right-hand side belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// `Ψ^t = e^{3(v−v̲)}·(t ψ̃ + (1−t) ψ̄)`; exact at `t = 0` with `v = v̲`.
    Psi,
    /// `Ξ^s = s ψ̃ + (1−s) e^{3(v−v̲)} ψ̃`; the target equation at `s = 1`.
    Xi,
    /// A fixed field, independent of the iterate.
    Fixed,
}

/// Node-sampled right-hand side in the degree-1 curvature scale.
#[derive(Clone, Debug)]
pub struct RhsField {
    pub stage: Stage,
    pub param: f64,
    pub values: Vec<f64>,
}

/// Data defining both homotopy families over a fixed subsolution.
#[derive(Clone, Copy, Debug)]
pub struct RhsFamily<'a> {
    pub stage: Stage,
    pub param: f64,
    pub psi_tilde: &'a [f64],
    pub psi_bar: &'a [f64],
    pub v_under: &'a [f64],
}

impl<'a> RhsFamily<'a> {
    pub fn psi(t: f64, psi_tilde: &'a [f64], psi_bar: &'a [f64], v_under: &'a [f64]) -> Self {
        RhsFamily { stage: Stage::Psi, param: t, psi_tilde, psi_bar, v_under }
    }

    pub fn xi(s: f64, psi_tilde: &'a [f64], psi_bar: &'a [f64], v_under: &'a [f64]) -> Self {
        RhsFamily { stage: Stage::Xi, param: s, psi_tilde, psi_bar, v_under }
    }

    pub fn fixed(psi_tilde: &'a [f64], psi_bar: &'a [f64], v_under: &'a [f64]) -> Self {
        RhsFamily { stage: Stage::Fixed, param: 1.0, psi_tilde, psi_bar, v_under }
    }

    /// Right-hand side values along the current iterate.
    pub fn values(&self, v: &[f64]) -> RhsField {
        RhsField {
            stage: self.stage,
            param: self.param,
            values: (0..v.len()).map(|i| self.value_at(i, v[i])).collect(),
        }
    }

    #[inline]
    fn value_at(&self, node: usize, v: f64) -> f64 {
        match self.stage {
            Stage::Psi => {
                let e3 = math::exp(3.0 * (v - self.v_under[node]));
                let t = self.param;
                e3 * (t * self.psi_tilde[node] + (1.0 - t) * self.psi_bar[node])
            }
            Stage::Xi => {
                let e3 = math::exp(3.0 * (v - self.v_under[node]));
                let s = self.param;
                s * self.psi_tilde[node] + (1.0 - s) * (e3 * self.psi_tilde[node])
            }
            Stage::Fixed => self.psi_tilde[node],
        }
    }

    /// `∂(rhs)/∂v` at a node: `3Ψ^t` for the Ψ family,
    /// `3(1−s)e^{3(v−v̲)}ψ̃` for the Ξ family (computed directly rather than
    /// as `3(rhs − sψ̃)`, which would cancel catastrophically near s = 1).
    #[inline]
    fn derivative_at(&self, node: usize, v: f64) -> f64 {
        match self.stage {
            Stage::Psi => 3.0 * self.value_at(node, v),
            Stage::Xi => {
                let e3 = math::exp(3.0 * (v - self.v_under[node]));
                3.0 * (1.0 - self.param) * e3 * self.psi_tilde[node]
            }
            Stage::Fixed => 0.0,
        }
    }
}

/// Spec-named wrapper: `Ψ^t` evaluated along the iterate `v`.
pub fn rhs_psi_family(
    v: &[f64],
    v_under: &[f64],
    t: f64,
    psi_tilde: &[f64],
    psi_bar: &[f64],
) -> RhsField {
    RhsFamily::psi(t, psi_tilde, psi_bar, v_under).values(v)
}

/// Spec-named wrapper: `Ξ^s` evaluated along the iterate `v`.
pub fn rhs_xi_family(v: &[f64], v_under: &[f64], s: f64, psi_tilde: &[f64]) -> RhsField {
    RhsFamily::xi(s, psi_tilde, psi_tilde, v_under).values(v)
}

/// Pointwise data of the logarithmic form at one node.
#[derive(Clone, Copy, Debug)]
pub struct VPoint {
    pub exp_v: f64,
    pub w: f64,
    pub gamma: Sym2,
    pub a: Sym2,
    pub kappa: [f64; 2],
}

#[inline]
pub(crate) fn v_point(v: f64, dv: [f64; 2], hess: &Sym2) -> VPoint {
    let q = dv[0] * dv[0] + dv[1] * dv[1];
    let w = math::sqrt(1.0 + q);
    let gamma = Sym2::IDENTITY.sub(&Sym2::outer(dv).scale(1.0 / (w * (1.0 + w))));
    let exp_v = math::exp(v);
    let a = Sym2::IDENTITY.add(&sym_sandwich(&gamma, hess)).scale(exp_v / w);
    let kappa = a.eigenvalues();
    VPoint { exp_v, w, gamma, a, kappa }
}

/// `f` and its gradient for n = 2, r = 2 on an ascending pair:
/// `f = √(κ₁κ₂)`, `f_i = κ_other / (2f)`. Cross-validated against the
/// dimension-generic routines in the tests.
#[inline]
fn f2(kappa: [f64; 2]) -> (f64, [f64; 2]) {
    let f = math::sqrt(kappa[0] * kappa[1]);
    (f, [kappa[1] / (2.0 * f), kappa[0] / (2.0 * f)])
}

#[inline]
fn cone_check2(node: usize, kappa: [f64; 2]) -> Result<()> {
    let s1 = kappa[0] + kappa[1];
    if !(s1 > 0.0) {
        return Err(Error::Inadmissible { node: Some(node), order: 1, value: s1 });
    }
    let s2 = kappa[0] * kappa[1];
    if !(s2 > 0.0) {
        return Err(Error::Inadmissible { node: Some(node), order: 2, value: s2 });
    }
    Ok(())
}

fn check_dims(grid: &ChartGrid, v: &[f64], spec: &CurvatureSpec) -> Result<()> {
    if spec.n() != 2 || spec.r() != 2 {
        return Err(Error::Argument(format!(
            "the grid operator is built for (n, r) = (2, 2); got ({}, {})",
            spec.n(),
            spec.r()
        )));
    }
    if v.len() != grid.node_count() {
        return Err(Error::Argument(format!(
            "field length {} does not match grid ({} nodes)",
            v.len(),
            grid.node_count()
        )));
    }
    Ok(())
}

/// Residual of the logarithmic form: `F(A[v]) − rhs` at interior nodes,
/// `v − v_bc` on the boundary ring (`v_bc = −ln φ`, one value per angular
/// index).
pub fn residual_v(
    grid: &ChartGrid,
    v: &[f64],
    rhs: &RhsField,
    spec: &CurvatureSpec,
    v_bc: &[f64],
) -> Result<Vec<f64>> {
    check_dims(grid, v, spec)?;
    let (grad, hess) = grid.covariant_derivatives(v)?;
    let mut res = vec![0.0f64; grid.node_count()];
    for node in 0..grid.node_count() {
        if grid.is_interior(node) {
            let p = v_point(v[node], grad[node], &hess[node]);
            cone_check2(node, p.kappa)?;
            let (f, _) = f2(p.kappa);
            res[node] = f - rhs.values[node];
        } else {
            res[node] = v[node] - v_bc[grid.theta_of(node)];
        }
    }
    Ok(res)
}

/// Quick cone scan of an iterate; `Ok(margin)` when every node is
/// admissible, `Err` naming the first exit otherwise. The line search uses
/// the boolean; monitors use the margin.
pub fn admissibility_margin_v(grid: &ChartGrid, v: &[f64]) -> Result<f64> {
    let (grad, hess) = grid.covariant_derivatives(v)?;
    let mut margin = f64::INFINITY;
    for node in 0..grid.node_count() {
        let p = v_point(v[node], grad[node], &hess[node]);
        cone_check2(node, p.kappa)?;
        let s1 = p.kappa[0] + p.kappa[1];
        let s2 = p.kappa[0] * p.kappa[1];
        margin = margin.min(s1).min(s2);
    }
    Ok(margin)
}

/// Coefficients of the Fréchet derivative of the interior residual with
/// respect to `(∇²v, ∇v, v)` in the orthonormal frame.
#[derive(Clone, Copy, Debug, Default)]
pub struct Linearization {
    /// Coefficient of the frame Hessian: `(e^v/w)·γFγ`; SPD at admissible
    /// points (ellipticity).
    pub gij: Sym2,
    /// Coefficient of the frame gradient.
    pub gs: [f64; 2],
    /// Operator part of the `δv` coefficient: `H_v = F^{ij} a_ij`.
    pub h_v: f64,
    /// `∂(rhs)/∂v` at the node; the assembled zeroth-order coefficient is
    /// `h_v − rhs_v_derivative`.
    pub rhs_v_derivative: f64,
}

/// Residual and per-node linearization in one pass.
pub struct PointwiseSystem {
    pub residual: Vec<f64>,
    pub rhs: RhsField,
    pub lin: Vec<Linearization>,
}

pub fn assemble_pointwise(
    grid: &ChartGrid,
    v: &[f64],
    family: &RhsFamily<'_>,
    spec: &CurvatureSpec,
    v_bc: &[f64],
) -> Result<PointwiseSystem> {
    check_dims(grid, v, spec)?;
    let (grad, hess) = grid.covariant_derivatives(v)?;
    let rhs = family.values(v);
    let mut residual = vec![0.0f64; grid.node_count()];
    let mut lin = vec![Linearization::default(); grid.node_count()];
    for node in 0..grid.node_count() {
        if !grid.is_interior(node) {
            residual[node] = v[node] - v_bc[grid.theta_of(node)];
            continue;
        }
        let p = v_point(v[node], grad[node], &hess[node]);
        cone_check2(node, p.kappa)?;
        let (f, fgrad) = f2(p.kappa);
        residual[node] = f - rhs.values[node];

        // F^{kl} = Σ f_k q_·k q_·k from the eigen pair of A
        let (_, q) = p.a.eigen();
        let f_mat = q.sandwich(&Sym2::diag(fgrad[0], fgrad[1]));
        let scale = p.exp_v / p.w;
        let gij = sym_sandwich(&p.gamma, &f_mat).scale(scale);

        // gradient coefficient: differentiate A through w and γ
        let pvec = grad[node];
        let w = p.w;
        let beta = 1.0 / (w * (1.0 + w));
        let cbase = beta * beta * (1.0 + 2.0 * w) / w;
        let fa = f_mat.dot(&p.a);
        let b = hess[node];
        let t1 = b.mul_vec(pvec);
        let t2 = p.gamma.mul_vec(t1);
        let fgbp = f_mat.mul_vec(t2); // F γ B p
        let t3 = f_mat.mul_vec(pvec);
        let t4 = p.gamma.mul_vec(t3);
        let bgfp = b.mul_vec(t4); // B γ F p
        let pbgfp = pvec[0] * bgfp[0] + pvec[1] * bgfp[1];
        let mut gs = [0.0f64; 2];
        for s in 0..2 {
            gs[s] = -(pvec[s] / (w * w)) * fa
                + 2.0 * scale * (-beta * (fgbp[s] + bgfp[s]) + cbase * pvec[s] * pbgfp);
        }

        lin[node] = Linearization {
            gij,
            gs,
            h_v: fa,
            rhs_v_derivative: family.derivative_at(node, v[node]),
        };
    }
    Ok(PointwiseSystem { residual, rhs, lin })
}

/// Spec-named wrapper returning only the linearization field.
pub fn linearize_v(
    grid: &ChartGrid,
    v: &[f64],
    family: &RhsFamily<'_>,
    spec: &CurvatureSpec,
    v_bc: &[f64],
) -> Result<Vec<Linearization>> {
    Ok(assemble_pointwise(grid, v, family, spec, v_bc)?.lin)
}

/// Subsolution survey: `ψ̄ = f(κ[v̲])` pointwise and the margin
/// `min(ψ̄ − ψ̃)` over interior nodes.
#[derive(Clone, Debug)]
pub struct SubsolutionCheck {
    pub margin: f64,
    pub psi_bar: Vec<f64>,
}

/// Raw margin data without the positivity gate.
pub fn subsolution_data(
    grid: &ChartGrid,
    v_under: &[f64],
    psi_tilde: &[f64],
    spec: &CurvatureSpec,
) -> Result<SubsolutionCheck> {
    check_dims(grid, v_under, spec)?;
    let (grad, hess) = grid.covariant_derivatives(v_under)?;
    let mut psi_bar = vec![0.0f64; grid.node_count()];
    let mut margin = f64::INFINITY;
    for node in 0..grid.node_count() {
        let p = v_point(v_under[node], grad[node], &hess[node]);
        cone_check2(node, p.kappa)?;
        let (f, _) = f2(p.kappa);
        psi_bar[node] = f;
        if grid.is_interior(node) {
            margin = margin.min(f - psi_tilde[node]);
        }
    }
    Ok(SubsolutionCheck { margin, psi_bar })
}

/// Subsolution check with the strict gate: errors unless `margin > 0`.
pub fn subsolution_margin(
    grid: &ChartGrid,
    v_under: &[f64],
    psi_tilde: &[f64],
    spec: &CurvatureSpec,
) -> Result<SubsolutionCheck> {
    let check = subsolution_data(grid, v_under, psi_tilde, spec)?;
    if !(check.margin > 0.0) {
        return Err(Error::Subsolution { margin: check.margin });
    }
    Ok(check)
}

/// Verifies the radial monotonicity `∂/∂ρ (ρ·Υ(ρx)) ≤ 0` for the chosen
/// family by central differences at `ρ = c·ρ̄(x)` for the given fractions
/// `c ∈ (0, 1]`; true iff the derivative is `≤ 1e−10` at every sample.
pub fn monotonicity_check(
    stage: Stage,
    param: f64,
    psi_tilde: &[f64],
    psi_bar: &[f64],
    rho_bar: &[f64],
    fractions: &[f64],
) -> Result<bool> {
    for &c in fractions {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Argument(format!(
                "sample fraction {c} outside (0, 1]; the condition concerns rho <= rho_bar"
            )));
        }
    }
    let upsilon = |node: usize, rho: f64| -> f64 {
        let ratio = rho_bar[node] / rho;
        let cubed = ratio * ratio * ratio;
        match stage {
            Stage::Psi => cubed * (param * psi_tilde[node] + (1.0 - param) * psi_bar[node]),
            Stage::Xi => param * psi_tilde[node] + (1.0 - param) * cubed * psi_tilde[node],
            Stage::Fixed => psi_tilde[node],
        }
    };
    for node in 0..psi_tilde.len() {
        for &c in fractions {
            let rho = c * rho_bar[node];
            let h = 1e-6 * rho_bar[node];
            let hi = (rho + h) * upsilon(node, rho + h);
            let lo = (rho - h) * upsilon(node, rho - h);
            if (hi - lo) / (2.0 * h) > 1e-10 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
