//! Damped Newton solver and the two-stage parameter continuation.
//!
//! The continuation starts at the subsolution, which solves the Ψ family
//! exactly at `t = 0`, drives `t → 1`, splices into the Ξ family at `s = 0`
//! (identical right-hand side, so the seed is already converged) and drives
//! `s → 1`, where the target equation `f(κ) = ψ̃` is reached.
//!
//! Each Newton step solves the banded linear system assembled from the
//! pointwise linearization (identity rows on the boundary ring) and
//! backtracks until the trial iterate both reduces the residual 2-norm and
//! stays admissible at every node: the curvature function is undefined
//! outside Γ_r, so a cone exit is a step rejection, never a mid-iteration
//! exception. The comparison bound `v ≥ v̲` is monitored, not enforced;
//! enforcing it could mask discretization bugs.
//!
//! Unknowns are ordered ring-major with a zigzag angular permutation, which
//! folds the periodic wrap-around into a half-bandwidth of `2·n_θ + 4`.

use crate::band::BandMatrix;
use crate::chart::ChartGrid;
use crate::error::{Error, Result};
use crate::math;
use crate::operator::{self, RhsFamily, Stage};
use crate::symfun::CurvatureSpec;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Tolerances and stepping policy; the defaults are the shipped config.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Relative residual tolerance: converged when
    /// `sup|res| ≤ residual_tol·(1 + sup|rhs|)`.
    pub residual_tol: f64,
    /// Newton iteration cap per continuation step.
    pub newton_max: usize,
    /// Armijo constant on the residual 2-norm.
    pub armijo: f64,
    /// Backtracking floor; below it the step is declared failed.
    pub line_search_floor: f64,
    /// Initial continuation step.
    pub step_initial: f64,
    /// Step cap after growth.
    pub step_max: f64,
    /// Abort threshold after repeated halving.
    pub step_floor: f64,
    /// Grow the step by 1.5× when a solve converges within this many
    /// iterations.
    pub grow_iters: usize,
    /// Strict subsolution margin gate (`margin > 0`). The sphere benchmark
    /// relaxes this to admit the degenerate case where the subsolution is
    /// already the exact solution.
    pub require_positive_margin: bool,
    /// Test hook: force a synthetic step failure at a chosen point of the
    /// schedule to exercise the abort/resume path.
    pub fault: Option<FaultInjection>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            residual_tol: 1e-10,
            newton_max: 30,
            armijo: 1e-4,
            line_search_floor: 1e-6,
            step_initial: 0.1,
            step_max: 0.2,
            step_floor: 1e-4,
            grow_iters: 4,
            require_positive_margin: true,
            fault: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaultInjection {
    /// Report a line-search floor whenever a solve targets `stage` with
    /// parameter `≥ param_at_least`.
    LineSearchFloorAt { stage: Stage, param_at_least: f64 },
}

/// Why a single continuation step failed (the caller halves the step).
#[derive(Clone, Debug)]
pub enum StepFailure {
    LineSearchFloor { alpha: f64 },
    Singular { detail: String },
    /// Newton direction vanished while the residual is above tolerance.
    ZeroDirection,
    MaxIterations { residual: f64 },
    Eval(Error),
}

impl core::fmt::Display for StepFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StepFailure::LineSearchFloor { alpha } => {
                write!(f, "line search floor reached (alpha = {alpha:e})")
            }
            StepFailure::Singular { detail } => write!(f, "singular linear system: {detail}"),
            StepFailure::ZeroDirection => {
                write!(f, "zero Newton direction with residual above tolerance")
            }
            StepFailure::MaxIterations { residual } => {
                write!(f, "iteration cap reached (residual {residual:e})")
            }
            StepFailure::Eval(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

/// Per-accepted-step monitor of the a priori bounds.
#[derive(Clone, Copy, Debug)]
pub struct MonitorRecord {
    pub stage: Stage,
    pub param: f64,
    pub newton_iters: usize,
    pub residual_sup: f64,
    pub sup_abs_v: f64,
    pub sup_grad_v: f64,
    pub inf_u: f64,
    pub sup_u: f64,
    pub sup_grad_u: f64,
    pub min_cone_margin: f64,
    pub min_v_minus_vunder: f64,
    /// Set when `u ≥ u̲` (equivalently `ρ ≤ ρ̄`) is violated beyond 1e−10;
    /// flagged, never aborted on.
    pub ordering_violated: bool,
}

/// Solver state between continuation steps; what checkpoints serialize.
#[derive(Clone, Debug)]
pub struct ContinuationState {
    pub stage: Stage,
    pub param: f64,
    pub step: f64,
    pub v: Vec<f64>,
    pub monitors: Vec<MonitorRecord>,
}

#[derive(Clone, Debug)]
pub struct FailureDiagnosis {
    pub stage: Stage,
    pub param: f64,
    pub step: f64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    pub converged: bool,
    pub stages_completed: usize,
    pub psi_iterations: Vec<usize>,
    pub xi_iterations: Vec<usize>,
    pub final_residual_sup: f64,
    pub sup_u: f64,
    pub inf_u: f64,
    pub sup_grad_u: f64,
    pub min_cone_margin: f64,
    pub min_v_minus_vunder: f64,
    /// Filled by the caller that owns a clock; the core stays freestanding.
    pub wall_seconds: f64,
    pub failure: Option<FailureDiagnosis>,
}

/// Problem data for the two-stage drive to `f(κ[v]) = ψ̃`.
#[derive(Clone, Debug)]
pub struct TwoStageProblem<'g> {
    pub grid: &'g ChartGrid,
    pub spec: CurvatureSpec,
    /// Prescribed curvature in the degree-1 scale, per node.
    pub psi_tilde: Vec<f64>,
    /// Dirichlet values of `v` (`−ln φ`), one per angular index.
    pub v_bc: Vec<f64>,
    /// Subsolution in logarithmic form, fixed for the whole run.
    pub v_under: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub state: ContinuationState,
    pub report: SolverReport,
    /// `ψ̄ = f(κ[v̲])`, the Ψ-family anchor.
    pub psi_bar: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonSummary {
    pub iterations: usize,
    pub residual_sup: f64,
}

/// Ring-major unknown numbering with a zigzag angular permutation.
struct Ordering {
    nt: usize,
    zig: Vec<usize>,
}

impl Ordering {
    fn new(nt: usize) -> Self {
        let mut zig = vec![0usize; nt];
        for (t, z) in zig.iter_mut().enumerate() {
            *z = if t == 0 {
                0
            } else if t <= nt / 2 {
                2 * t - 1
            } else {
                2 * (nt - t)
            };
        }
        Ordering { nt, zig }
    }

    #[inline]
    fn unknown(&self, grid: &ChartGrid, node: usize) -> usize {
        let ring = grid.ring_of(node);
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * self.nt + self.zig[grid.theta_of(node)]
        }
    }

    fn band_halfwidth(&self) -> usize {
        2 * self.nt + 4
    }
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, &v| m.max(math::abs(v)))
}

fn l2_norm(x: &[f64]) -> f64 {
    math::sqrt(x.iter().map(|&v| v * v).sum())
}

/// One Newton solve at fixed continuation parameter. Success mutates `v` to
/// the converged iterate; failure leaves `v` in its last line-search-accepted
/// state (callers keep their own copy of the entry iterate).
pub fn newton_solve(
    grid: &ChartGrid,
    spec: &CurvatureSpec,
    family: &RhsFamily<'_>,
    v_bc: &[f64],
    v: &mut Vec<f64>,
    opts: &SolverOptions,
) -> core::result::Result<NewtonSummary, StepFailure> {
    let ordering = Ordering::new(grid.n_theta());
    let hw = ordering.band_halfwidth();
    let mut band = BandMatrix::new(grid.node_count(), hw, hw);
    newton_inner(grid, spec, family, v_bc, v, opts, &ordering, &mut band)
}

#[allow(clippy::too_many_arguments)]
fn newton_inner(
    grid: &ChartGrid,
    spec: &CurvatureSpec,
    family: &RhsFamily<'_>,
    v_bc: &[f64],
    v: &mut Vec<f64>,
    opts: &SolverOptions,
    ordering: &Ordering,
    band: &mut BandMatrix,
) -> core::result::Result<NewtonSummary, StepFailure> {
    let n = grid.node_count();
    let mut sys = operator::assemble_pointwise(grid, v, family, spec, v_bc)
        .map_err(StepFailure::Eval)?;
    for it in 0..=opts.newton_max {
        let res_sup = sup_norm(&sys.residual);
        let tol = opts.residual_tol * (1.0 + sup_norm(&sys.rhs.values));
        if res_sup <= tol {
            return Ok(NewtonSummary { iterations: it, residual_sup: res_sup });
        }
        if it == opts.newton_max {
            return Err(StepFailure::MaxIterations { residual: res_sup });
        }

        band.reset();
        let mut rhs_vec = vec![0.0f64; n];
        for node in 0..n {
            let row = ordering.unknown(grid, node);
            rhs_vec[row] = -sys.residual[node];
            if grid.is_interior(node) {
                let lin = sys.lin[node];
                grid.linearize_derivatives(node, &mut |q, dgrad, dhess| {
                    let val = lin.gij.dot(&dhess)
                        + lin.gs[0] * dgrad[0]
                        + lin.gs[1] * dgrad[1];
                    band.add(row, ordering.unknown(grid, q), val);
                });
                band.add(row, row, lin.h_v - lin.rhs_v_derivative);
            } else {
                band.add(row, row, 1.0);
            }
        }
        band.factor().map_err(|e| StepFailure::Singular { detail: format!("{e}") })?;
        band.solve(&mut rhs_vec);
        let mut delta = vec![0.0f64; n];
        for node in 0..n {
            delta[node] = rhs_vec[ordering.unknown(grid, node)];
        }
        if sup_norm(&delta) <= 1e-14 {
            return Err(StepFailure::ZeroDirection);
        }

        // backtracking with the admissibility requirement on the full field
        let res_l2 = l2_norm(&sys.residual);
        let mut alpha = 1.0f64;
        loop {
            let trial: Vec<f64> =
                v.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            match operator::residual_v(grid, &trial, &family.values(&trial), spec, v_bc) {
                Ok(r) => {
                    if l2_norm(&r) <= (1.0 - opts.armijo * alpha) * res_l2 {
                        *v = trial;
                        break;
                    }
                }
                Err(Error::Inadmissible { .. }) => {}
                Err(e) => return Err(StepFailure::Eval(e)),
            }
            alpha *= 0.5;
            if alpha < opts.line_search_floor {
                return Err(StepFailure::LineSearchFloor { alpha });
            }
        }
        sys = operator::assemble_pointwise(grid, v, family, spec, v_bc)
            .map_err(StepFailure::Eval)?;
    }
    unreachable!("loop returns before exhausting the iteration range");
}

/// A priori bound monitor; records, never aborts.
pub fn monitor_bounds(
    grid: &ChartGrid,
    v: &[f64],
    v_under: &[f64],
    stage: Stage,
    param: f64,
    newton_iters: usize,
    residual_sup: f64,
) -> Result<MonitorRecord> {
    let (grad, hess) = grid.covariant_derivatives(v)?;
    let mut sup_abs_v = 0.0f64;
    let mut sup_grad_v = 0.0f64;
    let mut inf_u = f64::INFINITY;
    let mut sup_u = 0.0f64;
    let mut sup_grad_u = 0.0f64;
    let mut min_margin = f64::INFINITY;
    let mut min_diff = f64::INFINITY;
    for node in 0..grid.node_count() {
        let u = math::exp(v[node]);
        let gnorm = math::hypot(grad[node][0], grad[node][1]);
        sup_abs_v = sup_abs_v.max(math::abs(v[node]));
        sup_grad_v = sup_grad_v.max(gnorm);
        inf_u = inf_u.min(u);
        sup_u = sup_u.max(u);
        sup_grad_u = sup_grad_u.max(u * gnorm);
        let p = operator::v_point(v[node], grad[node], &hess[node]);
        let s1 = p.kappa[0] + p.kappa[1];
        let s2 = p.kappa[0] * p.kappa[1];
        min_margin = min_margin.min(s1).min(s2);
        min_diff = min_diff.min(v[node] - v_under[node]);
    }
    Ok(MonitorRecord {
        stage,
        param,
        newton_iters,
        residual_sup,
        sup_abs_v,
        sup_grad_v,
        inf_u,
        sup_u,
        sup_grad_u,
        min_cone_margin: min_margin,
        min_v_minus_vunder: min_diff,
        ordering_violated: min_diff < -1e-10,
    })
}

fn validate_problem(problem: &TwoStageProblem<'_>) -> Result<()> {
    let grid = problem.grid;
    if problem.spec.n() != 2 || problem.spec.r() != 2 {
        return Err(Error::Argument(format!(
            "two-stage solver drives the (n, r) = (2, 2) operator; got ({}, {})",
            problem.spec.n(),
            problem.spec.r()
        )));
    }
    if problem.psi_tilde.len() != grid.node_count() || problem.v_under.len() != grid.node_count()
    {
        return Err(Error::Argument(String::from(
            "psi_tilde and v_under must be node fields",
        )));
    }
    if problem.v_bc.len() != grid.n_theta() {
        return Err(Error::Argument(format!(
            "boundary data has {} entries; expected n_theta = {}",
            problem.v_bc.len(),
            grid.n_theta()
        )));
    }
    for (node, &p) in problem.psi_tilde.iter().enumerate() {
        if !(p > 0.0) {
            return Err(Error::NonPositive { node, value: p });
        }
    }
    for b in grid.boundary_nodes() {
        let want = problem.v_bc[grid.theta_of(b)];
        if math::abs(problem.v_under[b] - want) > 1e-10 {
            return Err(Error::Argument(format!(
                "subsolution disagrees with boundary data at node {b}: {} vs {}",
                problem.v_under[b], want
            )));
        }
    }
    Ok(())
}

/// Runs both continuation stages from the subsolution. Pre-solve validation
/// failures (inadmissible or non-dominating subsolution, inconsistent
/// boundary data) are `Err`; a mid-run abort is a normal return with
/// `converged = false`, the failure diagnosis and the last good state.
pub fn run_two_stage(problem: &TwoStageProblem<'_>, opts: &SolverOptions) -> Result<SolveOutcome> {
    validate_problem(problem)?;
    let sub =
        operator::subsolution_data(problem.grid, &problem.v_under, &problem.psi_tilde, &problem.spec)?;
    let ok = if opts.require_positive_margin {
        sub.margin > 0.0
    } else {
        sub.margin >= -1e-12
    };
    if !ok {
        return Err(Error::Subsolution { margin: sub.margin });
    }
    let state = ContinuationState {
        stage: Stage::Psi,
        param: 0.0,
        step: opts.step_initial,
        v: problem.v_under.clone(),
        monitors: Vec::new(),
    };
    drive_stages(problem, sub.psi_bar, state, opts)
}

/// Resumes from a checkpointed state; the remaining schedule is identical to
/// what an uninterrupted run would have executed from that state.
pub fn run_two_stage_from(
    problem: &TwoStageProblem<'_>,
    state: ContinuationState,
    opts: &SolverOptions,
) -> Result<SolveOutcome> {
    validate_problem(problem)?;
    if state.v.len() != problem.grid.node_count() {
        return Err(Error::Argument(format!(
            "checkpoint field length {} does not match grid",
            state.v.len()
        )));
    }
    if state.stage == Stage::Fixed {
        return Err(Error::Argument(String::from("checkpoint stage must be psi or xi")));
    }
    let sub =
        operator::subsolution_data(problem.grid, &problem.v_under, &problem.psi_tilde, &problem.spec)?;
    let ok = if opts.require_positive_margin {
        sub.margin > 0.0
    } else {
        sub.margin >= -1e-12
    };
    if !ok {
        return Err(Error::Subsolution { margin: sub.margin });
    }
    drive_stages(problem, sub.psi_bar, state, opts)
}

fn drive_stages(
    problem: &TwoStageProblem<'_>,
    psi_bar: Vec<f64>,
    mut state: ContinuationState,
    opts: &SolverOptions,
) -> Result<SolveOutcome> {
    let grid = problem.grid;
    let ordering = Ordering::new(grid.n_theta());
    let hw = ordering.band_halfwidth();
    let mut band = BandMatrix::new(grid.node_count(), hw, hw);
    let mut report = SolverReport {
        converged: false,
        stages_completed: 0,
        psi_iterations: Vec::new(),
        xi_iterations: Vec::new(),
        final_residual_sup: f64::INFINITY,
        sup_u: 0.0,
        inf_u: f64::INFINITY,
        sup_grad_u: 0.0,
        min_cone_margin: f64::INFINITY,
        min_v_minus_vunder: f64::INFINITY,
        wall_seconds: 0.0,
        failure: None,
    };

    let stages = if state.stage == Stage::Psi {
        alloc::vec![Stage::Psi, Stage::Xi]
    } else {
        alloc::vec![Stage::Xi]
    };
    for (slot, stage) in stages.iter().copied().enumerate() {
        if slot > 0 {
            state.stage = stage;
            state.param = 0.0;
            state.step = opts.step_initial;
        }
        let make_family = |param: f64| -> RhsFamily<'_> {
            match stage {
                Stage::Psi => {
                    RhsFamily::psi(param, &problem.psi_tilde, &psi_bar, &problem.v_under)
                }
                _ => RhsFamily::xi(param, &problem.psi_tilde, &psi_bar, &problem.v_under),
            }
        };
        let injected = |target: f64| -> bool {
            matches!(
                opts.fault,
                Some(FaultInjection::LineSearchFloorAt { stage: fs, param_at_least })
                    if fs == stage && target >= param_at_least
            )
        };

        // re-establish convergence at the entry parameter: free at t = 0
        // (the subsolution is exact) and at the stage splice (identical rhs)
        let entry_param = state.param;
        let entry_family = make_family(entry_param);
        let mut entry_v = state.v.clone();
        let entry = if injected(entry_param) {
            Err(StepFailure::LineSearchFloor { alpha: 0.0 })
        } else {
            newton_inner(
                grid,
                &problem.spec,
                &entry_family,
                &problem.v_bc,
                &mut entry_v,
                opts,
                &ordering,
                &mut band,
            )
        };
        match entry {
            Ok(summary) => {
                state.v = entry_v;
                accept(problem, &mut state, &mut report, stage, entry_param, summary)?;
            }
            Err(failure) => {
                return abort(problem, state, report, stage, entry_param, failure);
            }
        }

        while state.param < 1.0 {
            let target = (state.param + state.step).min(1.0);
            let family = make_family(target);
            let outcome = if injected(target) {
                Err(StepFailure::LineSearchFloor { alpha: 0.0 })
            } else {
                let mut trial_v = state.v.clone();
                newton_inner(
                    grid,
                    &problem.spec,
                    &family,
                    &problem.v_bc,
                    &mut trial_v,
                    opts,
                    &ordering,
                    &mut band,
                )
                .map(|summary| (trial_v, summary))
            };
            match outcome {
                Ok((new_v, summary)) => {
                    state.v = new_v;
                    state.param = target;
                    accept(problem, &mut state, &mut report, stage, target, summary)?;
                    if summary.iterations <= opts.grow_iters {
                        state.step = (state.step * 1.5).min(opts.step_max);
                    }
                }
                Err(failure) => {
                    state.step *= 0.5;
                    if state.step < opts.step_floor {
                        return abort(problem, state, report, stage, target, failure);
                    }
                }
            }
        }
        report.stages_completed += 1;
    }
    report.converged = true;
    Ok(SolveOutcome { state, report, psi_bar })
}

fn accept(
    problem: &TwoStageProblem<'_>,
    state: &mut ContinuationState,
    report: &mut SolverReport,
    stage: Stage,
    param: f64,
    summary: NewtonSummary,
) -> Result<()> {
    let record = monitor_bounds(
        problem.grid,
        &state.v,
        &problem.v_under,
        stage,
        param,
        summary.iterations,
        summary.residual_sup,
    )?;
    state.monitors.push(record);
    match stage {
        Stage::Psi => report.psi_iterations.push(summary.iterations),
        _ => report.xi_iterations.push(summary.iterations),
    }
    report.final_residual_sup = summary.residual_sup;
    report.sup_u = report.sup_u.max(record.sup_u);
    report.inf_u = report.inf_u.min(record.inf_u);
    report.sup_grad_u = report.sup_grad_u.max(record.sup_grad_u);
    report.min_cone_margin = report.min_cone_margin.min(record.min_cone_margin);
    report.min_v_minus_vunder = report.min_v_minus_vunder.min(record.min_v_minus_vunder);
    Ok(())
}

fn abort(
    problem: &TwoStageProblem<'_>,
    mut state: ContinuationState,
    mut report: SolverReport,
    stage: Stage,
    param: f64,
    failure: StepFailure,
) -> Result<SolveOutcome> {
    report.converged = false;
    report.failure = Some(FailureDiagnosis {
        stage,
        param,
        step: state.step,
        reason: format!("{failure}"),
    });
    state.stage = stage;
    let psi_bar = operator::subsolution_data(
        problem.grid,
        &problem.v_under,
        &problem.psi_tilde,
        &problem.spec,
    )?
    .psi_bar;
    Ok(SolveOutcome { state, report, psi_bar })
}
