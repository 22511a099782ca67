//! Command-line driver.
//!
//! ```text
//! radgraph solve            --config PATH [--out DIR] [--grid NSxNT] [--resume FILE]
//! radgraph benchmark-sphere --config PATH [--out DIR] [--grid NSxNT] [--levels N]
//! radgraph convergence-study --config PATH [--out DIR]
//! radgraph check-properties [--seed N] [--samples SCALE] [--out DIR] [--inject-h-sign-bug]
//! ```
//!
//! Exit status is 0 exactly when the run converged (or every property row
//! passed); configuration and usage errors exit 2, solver aborts exit 1.

use radgraph_cli::config::RunConfig;
use radgraph_cli::{artifacts, props, runner, study, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

struct Args {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    grid: Option<(usize, usize)>,
    seed: u64,
    samples: f64,
    resume: Option<PathBuf>,
    levels: usize,
    inject_h_sign_bug: bool,
}

fn usage() -> &'static str {
    "usage:\n  radgraph solve            --config PATH [--out DIR] [--grid NSxNT] [--resume FILE]\n  radgraph benchmark-sphere --config PATH [--out DIR] [--grid NSxNT] [--levels N]\n  radgraph convergence-study --config PATH [--out DIR]\n  radgraph check-properties  [--seed N] [--samples SCALE] [--out DIR] [--inject-h-sign-bug]"
}

fn parse_args(mut argv: std::env::Args) -> Result<(String, Args), String> {
    let _ = argv.next();
    let Some(cmd) = argv.next() else {
        return Err(usage().to_string());
    };
    let mut args = Args {
        config: None,
        out: None,
        grid: None,
        seed: 0x5EED,
        samples: 1.0,
        resume: None,
        levels: 2,
        inject_h_sign_bug: false,
    };
    let rest: Vec<String> = argv.collect();
    let mut i = 0;
    let value = |rest: &[String], i: &mut usize, flag: &str| -> Result<String, String> {
        *i += 1;
        rest.get(*i - 1).cloned().ok_or(format!("{flag} needs a value"))
    };
    while i < rest.len() {
        let flag = rest[i].clone();
        i += 1;
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value(&rest, &mut i, "--config")?)),
            "--out" => args.out = Some(PathBuf::from(value(&rest, &mut i, "--out")?)),
            "--grid" => {
                let spec = value(&rest, &mut i, "--grid")?;
                let (ns, nt) = spec
                    .split_once('x')
                    .ok_or(format!("--grid expects NSxNT, got {spec:?}"))?;
                args.grid = Some((
                    ns.parse().map_err(|_| format!("bad NS in {spec:?}"))?,
                    nt.parse().map_err(|_| format!("bad NT in {spec:?}"))?,
                ));
            }
            "--seed" => {
                args.seed = value(&rest, &mut i, "--seed")?
                    .parse()
                    .map_err(|_| "--seed expects an integer".to_string())?
            }
            "--samples" => {
                args.samples = value(&rest, &mut i, "--samples")?
                    .parse()
                    .map_err(|_| "--samples expects a number".to_string())?
            }
            "--resume" => args.resume = Some(PathBuf::from(value(&rest, &mut i, "--resume")?)),
            "--levels" => {
                args.levels = value(&rest, &mut i, "--levels")?
                    .parse()
                    .map_err(|_| "--levels expects an integer".to_string())?
            }
            "--inject-h-sign-bug" => args.inject_h_sign_bug = true,
            other => return Err(format!("unknown flag {other:?}\n{}", usage())),
        }
    }
    Ok((cmd, args))
}

fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("--config is required\n{}", usage())))?;
    let text = std::fs::read_to_string(path)?;
    let mut config = RunConfig::parse(&text)?;
    if let Some((ns, nt)) = args.grid {
        config.n_s = ns;
        config.n_theta = nt;
    }
    Ok(config)
}

fn run(cmd: &str, args: Args) -> Result<bool, CliError> {
    match cmd {
        "solve" => {
            let config = load_config(&args)?;
            let run = runner::run_solve(
                &config,
                args.out.as_deref(),
                None,
                args.resume.as_deref(),
            )?;
            let report = &run.outcome.report;
            println!(
                "solve: converged={} stages={} residual_sup={:e} wall={:.2}s out={}",
                report.converged,
                report.stages_completed,
                report.final_residual_sup,
                report.wall_seconds,
                run.out_dir.display()
            );
            if let Some(kg) = run.convexity_warning {
                println!("warning: boundary is mean-concave (min geodesic curvature {kg:.4})");
            }
            if let Some(f) = &report.failure {
                println!(
                    "failure: stage={} param={} reason={}",
                    artifacts::stage_name(f.stage),
                    f.param,
                    f.reason
                );
            }
            Ok(report.converged)
        }
        "benchmark-sphere" => {
            let config = load_config(&args)?;
            let table = study::benchmark_sphere(&config, args.levels)?;
            print!("{}", table.render());
            if let Some(dir) = &args.out {
                artifacts::write_file(&dir.join("benchmark.csv"), &table.render())?;
            }
            Ok(table.rows.iter().all(|r| r.converged))
        }
        "convergence-study" => {
            let config = load_config(&args)?;
            let table = study::benchmark_sphere(&config, 3)?;
            print!("{}", table.render());
            if let Some(dir) = &args.out {
                artifacts::write_file(&dir.join("convergence.csv"), &table.render())?;
            }
            let ok = table.rows.iter().all(|r| r.converged);
            Ok(ok)
        }
        "check-properties" => {
            let mutation = if args.inject_h_sign_bug {
                props::Mutation::FlipHessianSign
            } else {
                props::Mutation::None
            };
            let rows = props::run_all(args.seed, args.samples, mutation);
            print!("{}", props::render_table(&rows));
            if let Some(dir) = &args.out {
                artifacts::write_file(&dir.join("properties.csv"), &props::render_table(&rows))?;
            }
            Ok(props::all_pass(&rows))
        }
        other => Err(CliError::Usage(format!("unknown command {other:?}\n{}", usage()))),
    }
}

fn main() -> ExitCode {
    let (cmd, args) = match parse_args(std::env::args()) {
        Ok(x) => x,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    match run(&cmd, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
