//! Exact-sphere benchmark and grid-refinement study.
//!
//! The oracle is the off-center constant-curvature sphere through the cap
//! boundary circle. Before any solver output is trusted, the oracle itself
//! is validated: the radial function must interpolate the boundary
//! (`ρ(cos θ₀) = 1`) and its curvature, computed through the geometry module
//! on the grid, must sit at the prescribed value to discretization accuracy.

use crate::config::{DomainConfig, PhiConfig, RunConfig};
use crate::runner;
use crate::{CliError, CliResult};
use radgraph::continuation::{run_two_stage, SolverOptions};
use radgraph::exact_sphere::OffCenterSphere;
use radgraph::graph;
use radgraph::math;
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub n_s: usize,
    pub n_theta: usize,
    pub max_error: f64,
    pub wall_seconds: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct BenchmarkTable {
    pub psi_tilde: f64,
    pub theta0: f64,
    pub rows: Vec<BenchmarkRow>,
    /// Pairwise empirical orders `log2(e_i / e_{i+1})`.
    pub pair_orders: Vec<f64>,
    /// Aggregate order `log2(e_first / e_last) / (levels − 1)`.
    pub aggregate_order: Option<f64>,
    pub oracle_boundary_defect: f64,
    pub oracle_curvature_defect: f64,
}

impl BenchmarkTable {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "exact-sphere benchmark (psi_tilde = {})", self.psi_tilde);
        let _ = writeln!(s, "oracle_boundary_defect: {}", self.oracle_boundary_defect);
        let _ = writeln!(s, "oracle_curvature_defect: {}", self.oracle_curvature_defect);
        let _ = writeln!(s, "grid,max_error,wall_seconds,converged");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}x{},{},{},{}",
                r.n_s, r.n_theta, r.max_error, r.wall_seconds, r.converged
            );
        }
        let _ = writeln!(
            s,
            "pair_orders: {}",
            self.pair_orders.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",")
        );
        if let Some(o) = self.aggregate_order {
            let _ = writeln!(s, "aggregate_order: {o:.3}");
        }
        s
    }
}

/// The refinement ladder ending at the configured grid: each coarser level
/// halves both directions.
pub fn refinement_ladder(n_s: usize, n_theta: usize, levels: usize) -> CliResult<Vec<(usize, usize)>> {
    let mut ladder = vec![(n_s, n_theta)];
    let (mut ns, mut nt) = (n_s, n_theta);
    for _ in 1..levels {
        if (ns - 1) % 2 != 0 || nt % 2 != 0 {
            return Err(CliError::Msg(format!(
                "grid {ns}x{nt} cannot be coarsened; need (n_s - 1) and n_theta even"
            )));
        }
        ns = (ns - 1) / 2 + 1;
        nt /= 2;
        if ns < 9 || nt < 16 {
            return Err(CliError::Msg(format!(
                "coarsened grid {ns}x{nt} below the minimum 9x16"
            )));
        }
        ladder.push((ns, nt));
    }
    ladder.reverse();
    Ok(ladder)
}

/// Runs the two-stage solve on each grid of the ladder and errors it against
/// the closed-form sphere. Requires a cap domain, constant prescribed
/// curvature and `φ ≡ 1`.
pub fn benchmark_sphere(config: &RunConfig, levels: usize) -> CliResult<BenchmarkTable> {
    let theta0 = match &config.domain {
        DomainConfig::Cap { theta0 } => *theta0,
        _ => return Err(CliError::Msg("benchmark-sphere needs a cap domain".into())),
    };
    match &config.phi {
        PhiConfig::Constant(c) if *c == 1.0 => {}
        PhiConfig::Samples(v) if v.iter().all(|&x| x == 1.0) => {}
        _ => return Err(CliError::Msg("benchmark-sphere needs phi identically 1".into())),
    }
    let psi = config.psi_tilde();
    let sphere = OffCenterSphere::for_cap(theta0, psi)?;

    // oracle validation on the finest grid before trusting anything
    let boundary_defect = math::abs(sphere.rho(math::cos(theta0)) - 1.0);
    let prep_cfg = RunConfig { n_s: config.n_s, n_theta: config.n_theta, ..config.clone() };
    let prep = runner::prepare(&prep_cfg)?;
    let u_oracle = sphere.u_field(&prep.grid);
    let geom = graph::graph_geometry(&prep.grid, &u_oracle, &prep.spec)?;
    let curvature_defect = geom
        .iter()
        .map(|g| math::abs(g.kappa[0] * g.kappa[1] - psi * psi))
        .fold(0.0f64, f64::max);

    let ladder = refinement_ladder(config.n_s, config.n_theta, levels)?;
    let mut rows = Vec::new();
    for (ns, nt) in ladder {
        let level_cfg = RunConfig { n_s: ns, n_theta: nt, ..config.clone() };
        let prep = runner::prepare(&level_cfg)?;
        let problem = radgraph::continuation::TwoStageProblem {
            grid: &prep.grid,
            spec: prep.spec,
            psi_tilde: prep.psi_tilde.clone(),
            v_bc: prep.v_bc.clone(),
            v_under: prep.v_under.clone(),
        };
        // the degenerate psi_tilde = 1 case has margin exactly 0 and the
        // subsolution already solves the equation; admit it here
        let opts = SolverOptions {
            require_positive_margin: false,
            ..level_cfg.solver_options()
        };
        let started = Instant::now();
        let outcome = run_two_stage(&problem, &opts)?;
        let wall = started.elapsed().as_secs_f64();
        let max_error = (0..prep.grid.node_count())
            .map(|node| {
                let rho_num = math::exp(-outcome.state.v[node]);
                let rho_exact = sphere.rho(prep.grid.sphere_point(node)[2]);
                math::abs(rho_num - rho_exact)
            })
            .fold(0.0f64, f64::max);
        rows.push(BenchmarkRow {
            n_s: ns,
            n_theta: nt,
            max_error,
            wall_seconds: wall,
            converged: outcome.report.converged,
        });
    }
    let pair_orders: Vec<f64> = rows
        .windows(2)
        .map(|w| math::ln(w[0].max_error / w[1].max_error) / math::ln(2.0))
        .collect();
    let aggregate_order = if rows.len() >= 2 {
        let first = rows.first().unwrap().max_error;
        let last = rows.last().unwrap().max_error;
        Some(math::ln(first / last) / math::ln(2.0) / (rows.len() - 1) as f64)
    } else {
        None
    };
    Ok(BenchmarkTable {
        psi_tilde: psi,
        theta0,
        rows,
        pair_orders,
        aggregate_order,
        oracle_boundary_defect: boundary_defect,
        oracle_curvature_defect: curvature_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(ns: usize, nt: usize, curvature: &str) -> RunConfig {
        RunConfig::parse(&format!(
            "[domain]\nkind = cap\ntheta0 = 1.0471975511965976\n\n\
             [curvature]\nn = 2\nr = 2\n{curvature}\n\n\
             [boundary]\nphi = 1.0\n\n[subsolution]\nkind = unit-sphere\n\n\
             [grid]\nn_s = {ns}\nn_theta = {nt}\n\n[output]\ndir = out\n"
        ))
        .unwrap()
    }

    #[test]
    fn ladder_construction() {
        let l = refinement_ladder(65, 128, 3).unwrap();
        assert_eq!(l, vec![(17, 32), (33, 64), (65, 128)]);
        assert!(refinement_ladder(18, 32, 2).is_err());
        assert!(refinement_ladder(17, 32, 3).is_err());
    }

    #[test]
    fn two_level_benchmark_converges_at_second_order() {
        let table = benchmark_sphere(&config(33, 64, "scalar_r = 1.0"), 2).unwrap();
        assert!(table.oracle_boundary_defect < 1e-14);
        // the H₂ defect of the discretized oracle is O(h²) with constant ≈ 7
        let h = 1.0 / 32.0;
        assert!(table.oracle_curvature_defect < 20.0 * h * h);
        assert!(table.rows.iter().all(|r| r.converged));
        // O(h²): the error drops by a factor in [3, 5] between the grids
        let ratio = table.rows[0].max_error / table.rows[1].max_error;
        assert!((3.0..=5.0).contains(&ratio), "refinement ratio {ratio}");
    }

    #[test]
    fn unit_curvature_benchmark_is_grid_exact() {
        // psi_tilde = 1 with phi = 1: the exact solution is the unit cap,
        // the subsolution margin degenerates to zero, and the solver must
        // reproduce v = 0 to round-off
        let table = benchmark_sphere(&config(17, 32, "psi_tilde = 1.0"), 1).unwrap();
        assert!(table.rows[0].converged);
        assert!(table.rows[0].max_error <= 1e-10, "error {}", table.rows[0].max_error);
    }

    #[test]
    fn star_domain_is_rejected() {
        let mut cfg = config(17, 32, "scalar_r = 1.0");
        cfg.domain = DomainConfig::Star { fourier_cos: vec![1.0], fourier_sin: vec![] };
        assert!(benchmark_sphere(&cfg, 1).is_err());
    }
}
