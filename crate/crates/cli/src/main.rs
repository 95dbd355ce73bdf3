//! `cvp2p`: simulator and sweep driver for two-party nearest-lattice-point
//! protocols on 2D lattices.
//!
//! Exit codes: 0 success, 1 invalid parameters, 2 acceptance-check failure
//! (nonzero decode errors in infinite-round mode).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cvp2p::{
    evaluate_point, row_to_json, rows_to_csv, rows_to_json, stage1_entropy_experiment, sweep,
    Lattice2D, Order, RunConfig, StageOneSource, SweepParameter, SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "cvp2p",
    version,
    about = "Two-party nearest-lattice-point protocols: analytics, simulation and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check lattice parameters against the reduced-basis constraints.
    Validate(LatticeArgs),
    /// Closed-form quantities for one configuration (no sampling).
    Eval(RunArgs),
    /// Monte Carlo run of one configuration.
    Simulate(SimulateArgs),
    /// Grid run over one parameter, with analytic and empirical columns.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct LatticeArgs {
    /// Basis length ratio (>= 1).
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Basis angle: radians or pi fractions like "pi/3", "2pi/5", "0.45pi".
    #[arg(long, value_parser = parse_angle, default_value = "pi/3")]
    theta: f64,
    /// Lattice scale (> 0).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Communication order of Stage-II: 12, 21 or inf.
    #[arg(long, default_value = "inf")]
    order: String,
    /// Target Stage-II sum rate in bits (bins allocated to match).
    #[arg(long, conflicts_with = "bins")]
    rate: Option<f64>,
    /// Explicit symmetric bin counts: N1[,N2].
    #[arg(long, value_delimiter = ',')]
    bins: Option<Vec<u64>>,
    /// Vertical offset corner cut d1 (absolute units).
    #[arg(long, conflicts_with = "offset_zero")]
    d1: Option<f64>,
    /// Use the zero offset (the default when --d1 is absent).
    #[arg(long)]
    offset_zero: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the Stage-I entropy experiment for this source instead of a
    /// Stage-II protocol: "uniform-square" or "gaussian".
    #[arg(long)]
    stage1_source: Option<String>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Swept parameter: theta, d1, rate or alpha.
    #[arg(long)]
    param: String,
    /// Grid start (theta grids accept pi fractions).
    #[arg(long, value_parser = parse_angle)]
    min: f64,
    /// Grid end.
    #[arg(long, value_parser = parse_angle)]
    max: f64,
    #[arg(long, default_value_t = 25)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Parses an angle given in radians or as a pi fraction: "pi/3", "2pi/5",
/// "0.45pi", "2*pi/5".
fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace('*', "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let Some(pos) = t.find("pi") else {
        return Err(format!("cannot parse angle {s:?}"));
    };
    let (coef_s, rest) = (&t[..pos], &t[pos + 2..]);
    let coef = if coef_s.is_empty() {
        1.0
    } else {
        coef_s.parse::<f64>().map_err(|e| e.to_string())?
    };
    let denom = match rest.strip_prefix('/') {
        Some(d) => d.parse::<f64>().map_err(|e| e.to_string())?,
        None if rest.is_empty() => 1.0,
        None => return Err(format!("cannot parse angle {s:?}")),
    };
    Ok(coef * std::f64::consts::PI / denom)
}

fn emit(out: Option<&PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn run_config(args: &RunArgs, samples: u64, seed: u64) -> Result<RunConfig, String> {
    let order = Order::from_str(&args.order)?;
    Ok(RunConfig {
        rho: args.lattice.rho,
        theta: args.lattice.theta,
        alpha: args.lattice.alpha,
        order,
        rate: args.rate,
        bins: args.bins.clone(),
        d1: args.d1,
        samples,
        seed,
    })
}

fn point_output(args: &RunArgs, cfg: &RunConfig) -> Result<(String, u64), String> {
    let mut row = evaluate_point(cfg).map_err(|e| e.to_string())?;
    row.parameter = cfg.theta;
    let errors = row.errors;
    let content = match args.format {
        Format::Csv => rows_to_csv(std::slice::from_ref(&row)),
        Format::Json => row_to_json(cfg, &row),
    };
    Ok((content, errors))
}

fn cmd_validate(args: &LatticeArgs) -> Result<ExitCode, String> {
    let lat = Lattice2D::new(args.rho, args.theta, args.alpha).map_err(|e| e.to_string())?;
    println!(
        "ok: rho = {}, theta = {}, alpha = {}, rho*cos(theta) = {}, cell = {} x {}",
        lat.rho(),
        lat.theta(),
        lat.alpha(),
        lat.skew(),
        lat.cell_width(),
        lat.cell_height()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: &RunArgs) -> Result<ExitCode, String> {
    let cfg = run_config(args, 0, 0)?;
    let (content, _) = point_output(args, &cfg)?;
    emit(args.out.as_ref(), &content).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, String> {
    if let Some(source) = &args.stage1_source {
        return cmd_stage1(args, source);
    }
    let cfg = run_config(&args.run, args.samples, args.seed)?;
    let (content, errors) = point_output(&args.run, &cfg)?;
    emit(args.run.out.as_ref(), &content).map_err(|e| e.to_string())?;
    if errors > 0 {
        eprintln!("error: {errors} zero-error decode violations");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stage1(args: &SimulateArgs, source: &str) -> Result<ExitCode, String> {
    let source = StageOneSource::from_str(source)?;
    let lat = Lattice2D::new(
        args.run.lattice.rho,
        args.run.lattice.theta,
        args.run.lattice.alpha,
    )
    .map_err(|e| e.to_string())?;
    let est = stage1_entropy_experiment(&lat, source, args.samples, args.seed);
    if est.undersampled {
        eprintln!(
            "warning: only {} distinct cells hit; increase samples or shrink alpha",
            est.distinct_cells
        );
    }
    let content = match args.run.format {
        Format::Csv => format!(
            "source,alpha,samples,seed,estimate,std_error,raw_entropy,distinct_cells,undersampled\n{:?},{},{},{},{},{},{},{},{}\n",
            source,
            lat.alpha(),
            args.samples,
            args.seed,
            est.estimate.mean,
            est.estimate.std_error,
            est.raw_entropy,
            est.distinct_cells,
            est.undersampled
        ),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&est).map_err(|e| e.to_string())?;
            s.push('\n');
            s
        }
    };
    emit(args.run.out.as_ref(), &content).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, String> {
    let parameter = SweepParameter::from_str(&args.param)?;
    let base = run_config(&args.run, args.samples, args.seed)?;
    let spec = SweepSpec {
        parameter,
        min: args.min,
        max: args.max,
        steps: args.steps,
        workers: args.workers,
        base,
    };
    let rows = sweep(&spec).map_err(|e| e.to_string())?;
    for row in &rows {
        if let Some(w) = &row.warning {
            eprintln!(
                "warning: skipped {} = {}: {w}",
                spec.parameter, row.parameter
            );
        }
    }
    let content = match args.run.format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => rows_to_json(&spec, &rows),
    };
    emit(args.run.out.as_ref(), &content).map_err(|e| e.to_string())?;
    if rows.iter().any(|r| r.errors > 0) {
        eprintln!("error: zero-error decode violations in sweep");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::parse_angle;

    #[test]
    fn angle_forms() {
        let pi = std::f64::consts::PI;
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!((parse_angle("pi/3").unwrap() - pi / 3.0).abs() < 1e-15);
        assert!((parse_angle("2pi/5").unwrap() - 2.0 * pi / 5.0).abs() < 1e-15);
        assert!((parse_angle("2*pi/5").unwrap() - 2.0 * pi / 5.0).abs() < 1e-15);
        assert!((parse_angle("0.45pi").unwrap() - 0.45 * pi).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - pi).abs() < 1e-15);
        assert!(parse_angle("threeish").is_err());
    }
}
