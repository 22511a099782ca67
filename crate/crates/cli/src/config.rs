//! Run configuration: a sectioned key = value text format.
//!
//! ```text
//! [domain]
//! kind = cap                 # cap | star
//! theta0 = 1.0471975511965976
//! # star domains instead give the chart boundary radius as Fourier data:
//! # fourier_cos = 1.2, 0.0, 0.05     (constant, cos θ, cos 2θ, ...)
//! # fourier_sin = 0.0, 0.02          (sin θ, sin 2θ, ...)
//!
//! [curvature]
//! n = 2
//! r = 2
//! scalar_r = 1.0             # prescribed scalar curvature R (the front door)
//! # psi_tilde = 0.707...     # or the degree-1 curvature scale directly
//!
//! [boundary]
//! phi = 1.0                  # constant boundary radius
//! # phi_samples = 1.0, 1.0, ...      (one value per angular node)
//!
//! [subsolution]
//! kind = unit-sphere         # unit-sphere | file
//! # path = subsolution.csv   (file kind: a checkpoint-style node,v dump)
//!
//! [grid]
//! n_s = 33
//! n_theta = 64
//!
//! [solver]                   # optional; defaults shown
//! residual_tol = 1e-10
//! newton_max = 30
//! armijo = 1e-4
//! line_search_floor = 1e-6
//! step_initial = 0.1
//! step_max = 0.2
//! step_floor = 1e-4
//! grow_iters = 4
//!
//! [output]
//! dir = out
//! ```
//!
//! Scalar-curvature mode converts `R` to the degree-1 scale by
//! `ψ̃ = (R / (n(n−1)))^{1/r}` and requires `0 < R < n(n−1)`; a unit-sphere
//! subsolution requires `φ ≡ 1`. Violations are parse errors carrying the
//! offending line number. `parse(to_text(c)) == c` for every valid config.

use radgraph::chart::DomainSpec;
use radgraph::continuation::SolverOptions;
use radgraph::math;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainConfig {
    Cap { theta0: f64 },
    Star { fourier_cos: Vec<f64>, fourier_sin: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureInput {
    /// Prescribed scalar curvature `R`; the Gauss-equation scaling converts
    /// it to `ψ̃ = (R/(n(n−1)))^{1/r}`.
    ScalarR(f64),
    /// Prescribed curvature directly in the degree-1 scale.
    PsiTilde(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhiConfig {
    Constant(f64),
    /// One boundary radius per angular node.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubsolutionConfig {
    UnitSphere,
    File { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub residual_tol: f64,
    pub newton_max: usize,
    pub armijo: f64,
    pub line_search_floor: f64,
    pub step_initial: f64,
    pub step_max: f64,
    pub step_floor: f64,
    pub grow_iters: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverParams {
            residual_tol: o.residual_tol,
            newton_max: o.newton_max,
            armijo: o.armijo,
            line_search_floor: o.line_search_floor,
            step_initial: o.step_initial,
            step_max: o.step_max,
            step_floor: o.step_floor,
            grow_iters: o.grow_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub n: usize,
    pub r: usize,
    pub curvature: CurvatureInput,
    pub phi: PhiConfig,
    pub subsolution: SubsolutionConfig,
    pub n_s: usize,
    pub n_theta: usize,
    pub solver: SolverParams,
    pub out_dir: String,
}

impl RunConfig {
    /// Prescribed curvature in the degree-1 scale.
    pub fn psi_tilde(&self) -> f64 {
        match self.curvature {
            CurvatureInput::PsiTilde(p) => p,
            CurvatureInput::ScalarR(r) => {
                let denom = (self.n * (self.n - 1)) as f64;
                math::powf(r / denom, 1.0 / self.r as f64)
            }
        }
    }

    pub fn domain_spec(&self) -> Result<DomainSpec, radgraph::Error> {
        match &self.domain {
            DomainConfig::Cap { theta0 } => DomainSpec::cap(*theta0),
            DomainConfig::Star { fourier_cos, fourier_sin } => {
                DomainSpec::star(fourier_cos.clone(), fourier_sin.clone())
            }
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            residual_tol: self.solver.residual_tol,
            newton_max: self.solver.newton_max,
            armijo: self.solver.armijo,
            line_search_floor: self.solver.line_search_floor,
            step_initial: self.solver.step_initial,
            step_max: self.solver.step_max,
            step_floor: self.solver.step_floor,
            grow_iters: self.solver.grow_iters,
            ..SolverOptions::default()
        }
    }

    /// Boundary radius per angular node.
    pub fn phi_values(&self) -> Vec<f64> {
        match &self.phi {
            PhiConfig::Constant(c) => vec![*c; self.n_theta],
            PhiConfig::Samples(s) => s.clone(),
        }
    }

    /// Canonical text form; `parse` inverts it.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("[domain]\n");
        match &self.domain {
            DomainConfig::Cap { theta0 } => {
                s.push_str("kind = cap\n");
                s.push_str(&format!("theta0 = {theta0}\n"));
            }
            DomainConfig::Star { fourier_cos, fourier_sin } => {
                s.push_str("kind = star\n");
                s.push_str(&format!("fourier_cos = {}\n", join(fourier_cos)));
                if !fourier_sin.is_empty() {
                    s.push_str(&format!("fourier_sin = {}\n", join(fourier_sin)));
                }
            }
        }
        s.push_str("\n[curvature]\n");
        s.push_str(&format!("n = {}\nr = {}\n", self.n, self.r));
        match self.curvature {
            CurvatureInput::ScalarR(r) => s.push_str(&format!("scalar_r = {r}\n")),
            CurvatureInput::PsiTilde(p) => s.push_str(&format!("psi_tilde = {p}\n")),
        }
        s.push_str("\n[boundary]\n");
        match &self.phi {
            PhiConfig::Constant(c) => s.push_str(&format!("phi = {c}\n")),
            PhiConfig::Samples(v) => s.push_str(&format!("phi_samples = {}\n", join(v))),
        }
        s.push_str("\n[subsolution]\n");
        match &self.subsolution {
            SubsolutionConfig::UnitSphere => s.push_str("kind = unit-sphere\n"),
            SubsolutionConfig::File { path } => {
                s.push_str("kind = file\n");
                s.push_str(&format!("path = {path}\n"));
            }
        }
        s.push_str("\n[grid]\n");
        s.push_str(&format!("n_s = {}\nn_theta = {}\n", self.n_s, self.n_theta));
        s.push_str("\n[solver]\n");
        let p = &self.solver;
        s.push_str(&format!("residual_tol = {}\n", p.residual_tol));
        s.push_str(&format!("newton_max = {}\n", p.newton_max));
        s.push_str(&format!("armijo = {}\n", p.armijo));
        s.push_str(&format!("line_search_floor = {}\n", p.line_search_floor));
        s.push_str(&format!("step_initial = {}\n", p.step_initial));
        s.push_str(&format!("step_max = {}\n", p.step_max));
        s.push_str(&format!("step_floor = {}\n", p.step_floor));
        s.push_str(&format!("grow_iters = {}\n", p.grow_iters));
        s.push_str("\n[output]\n");
        s.push_str(&format!("dir = {}\n", self.out_dir));
        s
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut section = String::new();
        // raw keyed values with their line numbers
        let mut kv: Vec<(String, String, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                match name.strip_suffix(']') {
                    Some(n) => {
                        section = n.trim().to_string();
                        continue;
                    }
                    None => return err(line_no, "unterminated section header"),
                }
            }
            let Some(eq) = line.find('=') else {
                return err(line_no, format!("expected key = value, got {line:?}"));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if section.is_empty() {
                return err(line_no, format!("key {key:?} before any [section]"));
            }
            kv.push((section.clone(), key, value, line_no));
        }

        let mut b = Builder::default();
        for (sec, key, value, line) in kv {
            b.apply(&sec, &key, &value, line)?;
        }
        b.finish()
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_f64(value: &str, line: usize) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| ConfigError { line, message: format!("not a number: {value:?}") })
}

fn parse_usize(value: &str, line: usize) -> Result<usize, ConfigError> {
    value
        .parse::<usize>()
        .map_err(|_| ConfigError { line, message: format!("not an integer: {value:?}") })
}

fn parse_list(value: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|tok| parse_f64(tok.trim(), line)).collect()
}

#[derive(Default)]
struct Builder {
    domain_kind: Option<(String, usize)>,
    theta0: Option<(f64, usize)>,
    fourier_cos: Option<(Vec<f64>, usize)>,
    fourier_sin: Option<(Vec<f64>, usize)>,
    n: Option<(usize, usize)>,
    r: Option<(usize, usize)>,
    scalar_r: Option<(f64, usize)>,
    psi_tilde: Option<(f64, usize)>,
    phi: Option<(f64, usize)>,
    phi_samples: Option<(Vec<f64>, usize)>,
    sub_kind: Option<(String, usize)>,
    sub_path: Option<(String, usize)>,
    n_s: Option<(usize, usize)>,
    n_theta: Option<(usize, usize)>,
    solver: SolverParams,
    out_dir: Option<(String, usize)>,
}

impl Builder {
    fn apply(&mut self, sec: &str, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        match (sec, key) {
            ("domain", "kind") => self.domain_kind = Some((value.to_string(), line)),
            ("domain", "theta0") => self.theta0 = Some((parse_f64(value, line)?, line)),
            ("domain", "fourier_cos") => {
                self.fourier_cos = Some((parse_list(value, line)?, line))
            }
            ("domain", "fourier_sin") => {
                self.fourier_sin = Some((parse_list(value, line)?, line))
            }
            ("curvature", "n") => self.n = Some((parse_usize(value, line)?, line)),
            ("curvature", "r") => self.r = Some((parse_usize(value, line)?, line)),
            ("curvature", "scalar_r") => self.scalar_r = Some((parse_f64(value, line)?, line)),
            ("curvature", "psi_tilde") => self.psi_tilde = Some((parse_f64(value, line)?, line)),
            ("boundary", "phi") => self.phi = Some((parse_f64(value, line)?, line)),
            ("boundary", "phi_samples") => {
                self.phi_samples = Some((parse_list(value, line)?, line))
            }
            ("subsolution", "kind") => self.sub_kind = Some((value.to_string(), line)),
            ("subsolution", "path") => self.sub_path = Some((value.to_string(), line)),
            ("grid", "n_s") => self.n_s = Some((parse_usize(value, line)?, line)),
            ("grid", "n_theta") => self.n_theta = Some((parse_usize(value, line)?, line)),
            ("solver", "residual_tol") => self.solver.residual_tol = parse_f64(value, line)?,
            ("solver", "newton_max") => self.solver.newton_max = parse_usize(value, line)?,
            ("solver", "armijo") => self.solver.armijo = parse_f64(value, line)?,
            ("solver", "line_search_floor") => {
                self.solver.line_search_floor = parse_f64(value, line)?
            }
            ("solver", "step_initial") => self.solver.step_initial = parse_f64(value, line)?,
            ("solver", "step_max") => self.solver.step_max = parse_f64(value, line)?,
            ("solver", "step_floor") => self.solver.step_floor = parse_f64(value, line)?,
            ("solver", "grow_iters") => self.solver.grow_iters = parse_usize(value, line)?,
            ("output", "dir") => self.out_dir = Some((value.to_string(), line)),
            _ => return err(line, format!("unknown key {key:?} in section [{sec}]")),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, ConfigError> {
        let (dk, dk_line) = self
            .domain_kind
            .ok_or(ConfigError { line: 0, message: "missing [domain] kind".into() })?;
        let domain = match dk.as_str() {
            "cap" => {
                let (theta0, t_line) = self
                    .theta0
                    .ok_or(ConfigError { line: dk_line, message: "cap needs theta0".into() })?;
                if !(theta0 > 0.0 && theta0 < std::f64::consts::FRAC_PI_2 - 1e-3) {
                    return err(
                        t_line,
                        format!("theta0 = {theta0} outside (0, pi/2 - 1e-3)"),
                    );
                }
                DomainConfig::Cap { theta0 }
            }
            "star" => {
                let (cos, _) = self.fourier_cos.ok_or(ConfigError {
                    line: dk_line,
                    message: "star needs fourier_cos".into(),
                })?;
                let sin = self.fourier_sin.map(|x| x.0).unwrap_or_default();
                DomainConfig::Star { fourier_cos: cos, fourier_sin: sin }
            }
            other => return err(dk_line, format!("unknown domain kind {other:?}")),
        };

        let (n, n_line) = self.n.unwrap_or((2, 0));
        let (r, r_line) = self.r.unwrap_or((2, 0));
        if n != 2 {
            return err(n_line, format!("grid machinery is n = 2 only; got n = {n}"));
        }
        if !(1 < r && r <= n) {
            return err(r_line, format!("curvature order must satisfy 1 < r <= n; got r = {r}"));
        }

        let curvature = match (self.scalar_r, self.psi_tilde) {
            (Some((rr, line)), None) => {
                let bound = (n * (n - 1)) as f64;
                if !(rr > 0.0 && rr < bound) {
                    return err(
                        line,
                        format!(
                            "scalar_r = {rr} rejected: the admissible range is 0 < R < n(n-1) = {bound}"
                        ),
                    );
                }
                CurvatureInput::ScalarR(rr)
            }
            (None, Some((p, line))) => {
                if !(p > 0.0) {
                    return err(line, format!("psi_tilde = {p} must be positive"));
                }
                CurvatureInput::PsiTilde(p)
            }
            (Some((_, line)), Some(_)) => {
                return err(line, "give either scalar_r or psi_tilde, not both")
            }
            (None, None) => {
                return err(0, "missing curvature: set scalar_r or psi_tilde")
            }
        };

        let (n_s, ns_line) = self
            .n_s
            .ok_or(ConfigError { line: 0, message: "missing [grid] n_s".into() })?;
        let (n_theta, nt_line) = self
            .n_theta
            .ok_or(ConfigError { line: 0, message: "missing [grid] n_theta".into() })?;
        if n_s < 9 {
            return err(ns_line, format!("n_s = {n_s} must be at least 9"));
        }
        if n_theta < 16 || n_theta % 2 != 0 {
            return err(nt_line, format!("n_theta = {n_theta} must be even and at least 16"));
        }

        let phi = match (self.phi, self.phi_samples) {
            (Some((c, line)), None) => {
                if !(c > 0.0) {
                    return err(line, format!("phi = {c} must be positive"));
                }
                PhiConfig::Constant(c)
            }
            (None, Some((v, line))) => {
                if v.len() != n_theta {
                    return err(
                        line,
                        format!("phi_samples has {} entries; expected n_theta = {n_theta}", v.len()),
                    );
                }
                if let Some(bad) = v.iter().find(|&&x| !(x > 0.0)) {
                    return err(line, format!("phi sample {bad} must be positive"));
                }
                PhiConfig::Samples(v)
            }
            (Some((_, line)), Some(_)) => {
                return err(line, "give either phi or phi_samples, not both")
            }
            (None, None) => PhiConfig::Constant(1.0),
        };

        let (sk, sk_line) = self.sub_kind.unwrap_or(("unit-sphere".to_string(), 0));
        let subsolution = match sk.as_str() {
            "unit-sphere" => {
                let phi_is_one = match &phi {
                    PhiConfig::Constant(c) => *c == 1.0,
                    PhiConfig::Samples(v) => v.iter().all(|&x| x == 1.0),
                };
                if !phi_is_one {
                    return err(
                        sk_line,
                        "the unit-sphere subsolution requires phi identically 1",
                    );
                }
                SubsolutionConfig::UnitSphere
            }
            "file" => {
                let (path, _) = self.sub_path.ok_or(ConfigError {
                    line: sk_line,
                    message: "file subsolution needs path".into(),
                })?;
                SubsolutionConfig::File { path }
            }
            other => return err(sk_line, format!("unknown subsolution kind {other:?}")),
        };

        Ok(RunConfig {
            domain,
            n,
            r,
            curvature,
            phi,
            subsolution,
            n_s,
            n_theta,
            solver: self.solver,
            out_dir: self.out_dir.map(|x| x.0).unwrap_or_else(|| "out".to_string()),
        })
    }
}
