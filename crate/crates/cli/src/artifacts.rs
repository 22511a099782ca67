//! Artifact file formats. All ASCII; floats printed with Rust's shortest
//! round-trip formatting, so every file re-reads to the exact bits written.
//!
//! * `report.txt` — structured `key: value` text, stable key order.
//! * `fields.csv` — `node,chart_x,chart_y,sphere_x,sphere_y,sphere_z,u,v,kappa1,kappa2,residual`.
//! * `grid.csv` — `node,chart_x,chart_y,sphere_x,sphere_y,sphere_z`.
//! * `boundary_trace.csv` — `theta_index,theta,rho,phi,deviation`.
//! * `monitors.csv` — one row per accepted continuation step.
//! * `checkpoint.csv` — a small header (stage, param, step) plus the `v` dump.
//! * `mesh.obj` — `v x y z` per vertex, `f i j k l` per ring quad and
//!   `f i j k` per pole-fan triangle, 1-based indices, outward winding.

use crate::{CliError, CliResult};
use radgraph::chart::ChartGrid;
use radgraph::continuation::{ContinuationState, MonitorRecord, SolverReport};
use radgraph::graph::SurfaceMesh;
use radgraph::operator::Stage;
use std::fmt::Write as _;
use std::path::Path;

pub fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Psi => "psi",
        Stage::Xi => "xi",
        Stage::Fixed => "fixed",
    }
}

pub fn stage_from_name(name: &str) -> CliResult<Stage> {
    match name {
        "psi" => Ok(Stage::Psi),
        "xi" => Ok(Stage::Xi),
        "fixed" => Ok(Stage::Fixed),
        other => Err(CliError::Msg(format!("unknown stage {other:?}"))),
    }
}

fn fmt_iters(iters: &[usize]) -> String {
    if iters.is_empty() {
        "-".to_string()
    } else {
        iters.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn parse_iters(text: &str) -> Vec<usize> {
    if text == "-" {
        Vec::new()
    } else {
        text.split(',').filter_map(|t| t.trim().parse().ok()).collect()
    }
}

/// Renders the solver report; `boundary_deviation` and the convexity
/// warning come from the runner.
pub fn render_report(
    report: &SolverReport,
    boundary_deviation: f64,
    convexity_warning: Option<f64>,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "radgraph solve report");
    let _ = writeln!(s, "schema: radgraph-report-v1");
    let _ = writeln!(s, "converged: {}", report.converged);
    let _ = writeln!(s, "stages_completed: {}", report.stages_completed);
    let _ = writeln!(s, "psi_iterations: {}", fmt_iters(&report.psi_iterations));
    let _ = writeln!(s, "xi_iterations: {}", fmt_iters(&report.xi_iterations));
    let _ = writeln!(s, "final_residual_sup: {}", report.final_residual_sup);
    let _ = writeln!(s, "boundary_max_deviation: {boundary_deviation}");
    let _ = writeln!(s, "monitor_inf_u: {}", report.inf_u);
    let _ = writeln!(s, "monitor_sup_u: {}", report.sup_u);
    let _ = writeln!(s, "monitor_sup_grad_u: {}", report.sup_grad_u);
    let _ = writeln!(s, "monitor_min_cone_margin: {}", report.min_cone_margin);
    let _ = writeln!(s, "monitor_min_v_minus_vunder: {}", report.min_v_minus_vunder);
    match convexity_warning {
        Some(kg) => {
            let _ = writeln!(s, "warning_boundary_convexity: min_geodesic_curvature {kg}");
        }
        None => {
            let _ = writeln!(s, "warning_boundary_convexity: none");
        }
    }
    let _ = writeln!(s, "wall_seconds: {}", report.wall_seconds);
    match &report.failure {
        Some(d) => {
            let _ = writeln!(
                s,
                "failure: stage={} param={} step={} reason={}",
                stage_name(d.stage),
                d.param,
                d.step,
                d.reason
            );
        }
        None => {
            let _ = writeln!(s, "failure: none");
        }
    }
    s
}

/// Minimal parsed view of a report file.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportData {
    pub converged: bool,
    pub stages_completed: usize,
    pub psi_iterations: Vec<usize>,
    pub xi_iterations: Vec<usize>,
    pub final_residual_sup: f64,
    pub boundary_max_deviation: f64,
    pub wall_seconds: f64,
    pub failure: Option<String>,
}

pub fn parse_report(text: &str) -> CliResult<ReportData> {
    let mut map = std::collections::BTreeMap::new();
    for line in text.lines().skip(1) {
        if let Some((k, v)) = line.split_once(':') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |k: &str| -> CliResult<String> {
        map.get(k).cloned().ok_or_else(|| CliError::Msg(format!("report missing key {k:?}")))
    };
    let f64_of = |k: &str| -> CliResult<f64> {
        get(k)?.parse().map_err(|_| CliError::Msg(format!("bad number for {k:?}")))
    };
    Ok(ReportData {
        converged: get("converged")? == "true",
        stages_completed: get("stages_completed")?
            .parse()
            .map_err(|_| CliError::Msg("bad stages_completed".into()))?,
        psi_iterations: parse_iters(&get("psi_iterations")?),
        xi_iterations: parse_iters(&get("xi_iterations")?),
        final_residual_sup: f64_of("final_residual_sup")?,
        boundary_max_deviation: f64_of("boundary_max_deviation")?,
        wall_seconds: f64_of("wall_seconds")?,
        failure: match get("failure")?.as_str() {
            "none" => None,
            other => Some(other.to_string()),
        },
    })
}

pub fn render_grid_csv(grid: &ChartGrid) -> String {
    let mut s = String::from("node,chart_x,chart_y,sphere_x,sphere_y,sphere_z\n");
    for node in 0..grid.node_count() {
        let [x, y] = grid.chart_point(node);
        let p = grid.sphere_point(node);
        let _ = writeln!(s, "{node},{x},{y},{},{},{}", p[0], p[1], p[2]);
    }
    s
}

#[allow(clippy::type_complexity)]
pub fn parse_grid_csv(text: &str) -> CliResult<Vec<(usize, [f64; 2], [f64; 3])>> {
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(CliError::Msg(format!("grid csv row has {} columns", cols.len())));
        }
        let node = cols[0].parse().map_err(|_| CliError::Msg("bad node id".into()))?;
        let mut vals = [0.0f64; 5];
        for (slot, tok) in vals.iter_mut().zip(&cols[1..]) {
            *slot = tok.parse().map_err(|_| CliError::Msg("bad float".into()))?;
        }
        out.push((node, [vals[0], vals[1]], [vals[2], vals[3], vals[4]]));
    }
    Ok(out)
}

/// Field dump: geometry plus solved values and the final interior residual.
pub struct FieldsDump<'a> {
    pub grid: &'a ChartGrid,
    pub u: &'a [f64],
    pub v: &'a [f64],
    pub kappa: &'a [[f64; 2]],
    pub residual: &'a [f64],
}

pub fn render_fields_csv(dump: &FieldsDump<'_>) -> String {
    let mut s = String::from(
        "node,chart_x,chart_y,sphere_x,sphere_y,sphere_z,u,v,kappa1,kappa2,residual\n",
    );
    for node in 0..dump.grid.node_count() {
        let [x, y] = dump.grid.chart_point(node);
        let p = dump.grid.sphere_point(node);
        let _ = writeln!(
            s,
            "{node},{x},{y},{},{},{},{},{},{},{},{}",
            p[0],
            p[1],
            p[2],
            dump.u[node],
            dump.v[node],
            dump.kappa[node][0],
            dump.kappa[node][1],
            dump.residual[node]
        );
    }
    s
}

/// Parsed field dump keyed by column name.
pub struct FieldsData {
    pub nodes: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub residual: Vec<f64>,
}

pub fn parse_fields_csv(text: &str) -> CliResult<FieldsData> {
    let mut data = FieldsData {
        nodes: 0,
        u: Vec::new(),
        v: Vec::new(),
        kappa1: Vec::new(),
        kappa2: Vec::new(),
        residual: Vec::new(),
    };
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(CliError::Msg(format!("fields csv row has {} columns", cols.len())));
        }
        let f = |i: usize| -> CliResult<f64> {
            cols[i].parse().map_err(|_| CliError::Msg(format!("bad float {:?}", cols[i])))
        };
        data.u.push(f(6)?);
        data.v.push(f(7)?);
        data.kappa1.push(f(8)?);
        data.kappa2.push(f(9)?);
        data.residual.push(f(10)?);
        data.nodes += 1;
    }
    Ok(data)
}

pub fn render_boundary_trace(grid: &ChartGrid, v: &[f64], phi: &[f64]) -> String {
    let mut s = String::from("theta_index,theta,rho,phi,deviation\n");
    for (t, node) in grid.boundary_nodes().enumerate() {
        let theta = t as f64 * grid.angular_step();
        let rho = radgraph::math::exp(-v[node]);
        let dev = radgraph::math::abs(rho - phi[t]);
        let _ = writeln!(s, "{t},{theta},{rho},{},{dev}", phi[t]);
    }
    s
}

pub fn parse_boundary_trace(text: &str) -> CliResult<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(CliError::Msg("boundary trace row malformed".into()));
        }
        let f = |i: usize| cols[i].parse::<f64>().map_err(|_| CliError::Msg("bad float".into()));
        out.push((f(2)?, f(3)?, f(4)?));
    }
    Ok(out)
}

pub fn render_monitors_csv(monitors: &[MonitorRecord]) -> String {
    let mut s = String::from(
        "stage,param,newton_iters,residual_sup,sup_abs_v,sup_grad_v,inf_u,sup_u,sup_grad_u,min_cone_margin,min_v_minus_vunder,ordering_violated\n",
    );
    for m in monitors {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            stage_name(m.stage),
            m.param,
            m.newton_iters,
            m.residual_sup,
            m.sup_abs_v,
            m.sup_grad_v,
            m.inf_u,
            m.sup_u,
            m.sup_grad_u,
            m.min_cone_margin,
            m.min_v_minus_vunder,
            m.ordering_violated
        );
    }
    s
}

pub fn render_checkpoint(state: &ContinuationState) -> String {
    let mut s = String::from("# radgraph-checkpoint-v1\n");
    let _ = writeln!(s, "stage,param,step");
    let _ = writeln!(s, "{},{},{}", stage_name(state.stage), state.param, state.step);
    let _ = writeln!(s, "node,v");
    for (node, value) in state.v.iter().enumerate() {
        let _ = writeln!(s, "{node},{value}");
    }
    s
}

pub fn parse_checkpoint(text: &str) -> CliResult<ContinuationState> {
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or_default();
    if magic.trim() != "# radgraph-checkpoint-v1" {
        return Err(CliError::Msg(format!("not a checkpoint file (header {magic:?})")));
    }
    let header = lines.next().unwrap_or_default();
    if header.trim() != "stage,param,step" {
        return Err(CliError::Msg("checkpoint missing stage,param,step header".into()));
    }
    let meta = lines.next().unwrap_or_default();
    let cols: Vec<&str> = meta.split(',').collect();
    if cols.len() != 3 {
        return Err(CliError::Msg("checkpoint meta row malformed".into()));
    }
    let stage = stage_from_name(cols[0].trim())?;
    let param: f64 = cols[1].trim().parse().map_err(|_| CliError::Msg("bad param".into()))?;
    let step: f64 = cols[2].trim().parse().map_err(|_| CliError::Msg("bad step".into()))?;
    let field_header = lines.next().unwrap_or_default();
    if field_header.trim() != "node,v" {
        return Err(CliError::Msg("checkpoint missing node,v header".into()));
    }
    let mut v = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (node, value) = line
            .split_once(',')
            .ok_or_else(|| CliError::Msg("checkpoint field row malformed".into()))?;
        let node: usize = node.trim().parse().map_err(|_| CliError::Msg("bad node id".into()))?;
        if node != v.len() {
            return Err(CliError::Msg(format!("checkpoint rows out of order at node {node}")));
        }
        v.push(value.trim().parse().map_err(|_| CliError::Msg("bad field value".into()))?);
    }
    Ok(ContinuationState { stage, param, step, v, monitors: Vec::new() })
}

/// A `node,v` dump, used for file-provided subsolutions; checkpoint files
/// are accepted too (their header is skipped).
pub fn parse_field_csv(text: &str) -> CliResult<Vec<f64>> {
    if text.starts_with("# radgraph-checkpoint-v1") {
        return Ok(parse_checkpoint(text)?.v);
    }
    let mut v = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line.trim() == "node,v") {
            continue;
        }
        let (node, value) = line
            .split_once(',')
            .ok_or_else(|| CliError::Msg(format!("field row {} malformed", i + 1)))?;
        let node: usize = node.trim().parse().map_err(|_| CliError::Msg("bad node id".into()))?;
        if node != v.len() {
            return Err(CliError::Msg(format!("field rows out of order at node {node}")));
        }
        v.push(value.trim().parse().map_err(|_| CliError::Msg("bad field value".into()))?);
    }
    Ok(v)
}

pub fn render_mesh_obj(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    for q in &mesh.quads {
        let _ = writeln!(s, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    }
    s
}

pub fn parse_mesh_obj(text: &str) -> CliResult<SurfaceMesh> {
    let mut mesh = SurfaceMesh { vertices: Vec::new(), quads: Vec::new(), triangles: Vec::new() };
    for (i, line) in text.lines().enumerate() {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let mut v = [0.0f64; 3];
                for slot in v.iter_mut() {
                    *slot = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| CliError::Msg(format!("bad vertex at line {}", i + 1)))?;
                }
                mesh.vertices.push(v);
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| t.parse::<usize>().map(|x| x - 1))
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::Msg(format!("bad face at line {}", i + 1)))?;
                match idx.len() {
                    3 => mesh.triangles.push([idx[0], idx[1], idx[2]]),
                    4 => mesh.quads.push([idx[0], idx[1], idx[2], idx[3]]),
                    n => return Err(CliError::Msg(format!("face with {n} vertices"))),
                }
            }
            _ => {}
        }
    }
    Ok(mesh)
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use radgraph::chart::DomainSpec;
    use radgraph::continuation::FailureDiagnosis;

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let state = ContinuationState {
            stage: Stage::Xi,
            param: 0.45,
            step: 0.0375,
            v: vec![0.0, -0.125, 0.3333333333333333, 1e-17, -2.5e-3],
            monitors: Vec::new(),
        };
        let text = render_checkpoint(&state);
        let back = parse_checkpoint(&text).unwrap();
        assert_eq!(back.stage, Stage::Xi);
        assert_eq!(back.param.to_bits(), state.param.to_bits());
        assert_eq!(back.step.to_bits(), state.step.to_bits());
        assert_eq!(back.v.len(), state.v.len());
        for (a, b) in back.v.iter().zip(&state.v) {
            assert_eq!(a.to_bits(), b.to_bits(), "field value drifted through text");
        }
    }

    #[test]
    fn report_round_trip() {
        let report = SolverReport {
            converged: false,
            stages_completed: 1,
            psi_iterations: vec![0, 3, 4],
            xi_iterations: vec![],
            final_residual_sup: 3.25e-11,
            sup_u: 1.0,
            inf_u: 0.75,
            sup_grad_u: 0.5,
            min_cone_margin: 0.3,
            min_v_minus_vunder: -1e-12,
            wall_seconds: 1.5,
            failure: Some(FailureDiagnosis {
                stage: Stage::Xi,
                param: 0.5,
                step: 5e-5,
                reason: "line search floor reached (alpha = 5e-7)".into(),
            }),
        };
        let text = render_report(&report, 0.0, Some(-0.2));
        let data = parse_report(&text).unwrap();
        assert!(!data.converged);
        assert_eq!(data.stages_completed, 1);
        assert_eq!(data.psi_iterations, vec![0, 3, 4]);
        assert!(data.xi_iterations.is_empty());
        assert_eq!(data.final_residual_sup, 3.25e-11);
        assert!(data.failure.unwrap().contains("line search floor"));
    }

    #[test]
    fn mesh_and_grid_round_trips() {
        let grid = radgraph::chart::build_grid(&DomainSpec::cap(0.9).unwrap(), 9, 16).unwrap();
        let u = vec![1.25; grid.node_count()];
        let mesh = radgraph::graph::embed_mesh(&grid, &u).unwrap();
        let back = parse_mesh_obj(&render_mesh_obj(&mesh)).unwrap();
        assert_eq!(back.vertices.len(), mesh.vertices.len());
        assert_eq!(back.quads.len(), mesh.quads.len());
        assert_eq!(back.triangles.len(), mesh.triangles.len());
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            for k in 0..3 {
                assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
        let parsed = parse_grid_csv(&render_grid_csv(&grid)).unwrap();
        assert_eq!(parsed.len(), grid.node_count());
        assert_eq!(parsed[5].1, grid.chart_point(5));
    }
}
