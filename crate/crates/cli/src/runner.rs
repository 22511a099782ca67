//! Solve orchestration: config → grid → two-stage solve → artifact files.

use crate::artifacts;
use crate::config::{RunConfig, SubsolutionConfig};
use crate::{CliError, CliResult};
use radgraph::chart::{boundary_mean_convexity, ChartGrid};
use radgraph::continuation::{
    run_two_stage, run_two_stage_from, ContinuationState, FaultInjection, SolveOutcome,
};
use radgraph::graph;
use radgraph::math;
use radgraph::operator::{self, RhsFamily};
use radgraph::symfun::CurvatureSpec;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct SolveRun {
    pub outcome: SolveOutcome,
    pub boundary_deviation: f64,
    pub convexity_warning: Option<f64>,
    pub out_dir: PathBuf,
}

/// Assembled problem data, before solving.
pub struct PreparedProblem {
    pub grid: ChartGrid,
    pub spec: CurvatureSpec,
    pub psi_tilde: Vec<f64>,
    pub v_bc: Vec<f64>,
    pub v_under: Vec<f64>,
    pub phi: Vec<f64>,
}

pub fn prepare(config: &RunConfig) -> CliResult<PreparedProblem> {
    let domain = config.domain_spec()?;
    let grid = ChartGrid::build(domain, config.n_s, config.n_theta)?;
    let spec = CurvatureSpec::new(config.n, config.r)?;
    let psi = config.psi_tilde();
    let psi_tilde = vec![psi; grid.node_count()];
    let phi = config.phi_values();
    let v_bc: Vec<f64> = phi.iter().map(|p| -math::ln(*p)).collect();
    let v_under = match &config.subsolution {
        SubsolutionConfig::UnitSphere => vec![0.0; grid.node_count()],
        SubsolutionConfig::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let v = artifacts::parse_field_csv(&text)?;
            if v.len() != grid.node_count() {
                return Err(CliError::Msg(format!(
                    "subsolution file has {} nodes; the grid has {}",
                    v.len(),
                    grid.node_count()
                )));
            }
            v
        }
    };
    Ok(PreparedProblem { grid, spec, psi_tilde, v_bc, v_under, phi })
}

fn solve_prepared(
    prep: &PreparedProblem,
    config: &RunConfig,
    fault: Option<FaultInjection>,
    resume_from: Option<ContinuationState>,
) -> CliResult<SolveOutcome> {
    let problem = radgraph::continuation::TwoStageProblem {
        grid: &prep.grid,
        spec: prep.spec,
        psi_tilde: prep.psi_tilde.clone(),
        v_bc: prep.v_bc.clone(),
        v_under: prep.v_under.clone(),
    };
    let mut opts = config.solver_options();
    opts.fault = fault;
    let started = Instant::now();
    let mut outcome = match resume_from {
        None => run_two_stage(&problem, &opts)?,
        Some(state) => run_two_stage_from(&problem, state, &opts)?,
    };
    outcome.report.wall_seconds = started.elapsed().as_secs_f64();
    Ok(outcome)
}

/// Runs the solve and writes the artifact set into the output directory:
/// `report.txt`, `fields.csv`, `grid.csv`, `mesh.obj`, `boundary_trace.csv`,
/// `monitors.csv` and `checkpoint.csv` (the last good state on aborts).
pub fn run_solve(
    config: &RunConfig,
    out_override: Option<&Path>,
    fault: Option<FaultInjection>,
    resume: Option<&Path>,
) -> CliResult<SolveRun> {
    let prep = prepare(config)?;
    let resume_state = match resume {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Some(artifacts::parse_checkpoint(&text)?)
        }
        None => None,
    };
    let outcome = solve_prepared(&prep, config, fault, resume_state)?;
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&config.out_dir));
    let run = finish(prep, outcome, out_dir)?;
    Ok(run)
}

fn finish(prep: PreparedProblem, outcome: SolveOutcome, out_dir: PathBuf) -> CliResult<SolveRun> {
    let grid = &prep.grid;
    let v = &outcome.state.v;
    let u: Vec<f64> = v.iter().map(|x| math::exp(*x)).collect();

    // final-state geometry for the dump (kappa per node) and residual
    // against the fixed target equation
    let geom = graph::graph_geometry(grid, &u, &prep.spec)?;
    let kappa: Vec<[f64; 2]> = geom.iter().map(|g| g.kappa).collect();
    let family = RhsFamily::fixed(&prep.psi_tilde, &prep.psi_tilde, &prep.v_under);
    let residual =
        operator::residual_v(grid, v, &family.values(v), &prep.spec, &prep.v_bc)?;

    let boundary_deviation = grid
        .boundary_nodes()
        .enumerate()
        .map(|(t, node)| math::abs(math::exp(-v[node]) - prep.phi[t]))
        .fold(0.0f64, f64::max);

    let min_kg = boundary_mean_convexity(grid.domain(), 4 * grid.n_theta());
    let convexity_warning = if min_kg < 0.0 { Some(min_kg) } else { None };

    artifacts::write_file(
        &out_dir.join("report.txt"),
        &artifacts::render_report(&outcome.report, boundary_deviation, convexity_warning),
    )?;
    artifacts::write_file(
        &out_dir.join("fields.csv"),
        &artifacts::render_fields_csv(&artifacts::FieldsDump {
            grid,
            u: &u,
            v,
            kappa: &kappa,
            residual: &residual,
        }),
    )?;
    artifacts::write_file(&out_dir.join("grid.csv"), &artifacts::render_grid_csv(grid))?;
    artifacts::write_file(
        &out_dir.join("mesh.obj"),
        &artifacts::render_mesh_obj(&graph::embed_mesh(grid, &u)?),
    )?;
    artifacts::write_file(
        &out_dir.join("boundary_trace.csv"),
        &artifacts::render_boundary_trace(grid, v, &prep.phi),
    )?;
    artifacts::write_file(
        &out_dir.join("monitors.csv"),
        &artifacts::render_monitors_csv(&outcome.state.monitors),
    )?;
    artifacts::write_file(
        &out_dir.join("checkpoint.csv"),
        &artifacts::render_checkpoint(&outcome.state),
    )?;

    Ok(SolveRun { outcome, boundary_deviation, convexity_warning, out_dir })
}
