use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spacecurve::cli::{run, Command, Format, ReportFeature, RunConfig};
use spacecurve::strata::Stratum;

#[derive(Parser)]
#[command(name = "spacecurve", version, about = "Frenet invariants, feature points, evolutes and cusp bifurcation sets of space curves")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Feature table: flattenings, vertices, twistings, cusps.
    Analyze(Opts),
    /// Evolute polyline, with a local-model report for --feature.
    Evolute(Opts),
    /// Loci of the strata F, V, T, C of a cusp family, tangent cones and diagram.
    Bifurcation(Opts),
    /// Stratum values of the jet at --at.
    Strata(Opts),
    /// Taylor coefficients of the components at --at.
    Jet(Opts),
}

#[derive(Args)]
struct Opts {
    /// JSON curve or family document.
    input: PathBuf,
    /// Parameter interval LO:HI.
    #[arg(long, value_parser = parse_range)]
    range: Option<(f64, f64)>,
    /// Scan samples over the range (at least 16).
    #[arg(long)]
    samples: Option<usize>,
    /// Residual bound for reported features or locus points.
    #[arg(long)]
    tol: Option<f64>,
    /// Jet degree for the jet and strata commands.
    #[arg(long)]
    degree: Option<usize>,
    /// Output file; bifurcation writes .csv, .json and .svg siblings.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = Format::Csv)]
    format: Format,
    /// flattening, vertex or twisting.
    #[arg(long)]
    feature: Option<ReportFeature>,
    /// C, F, V or T.
    #[arg(long, value_parser = parse_stratum)]
    stratum: Option<Stratum>,
    /// Grid nodes per side of the parameter box.
    #[arg(long)]
    grid: Option<usize>,
    /// Curve parameter for strata, jet and local evolute reports.
    #[arg(long, allow_hyphen_values = true)]
    at: Option<f64>,
    /// Family parameter S1,S2.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    s: Option<[f64; 2]>,
}

fn parse_two(s: &str, sep: char) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(sep)
        .ok_or_else(|| format!("expected two numbers separated by `{sep}`"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    parse_two(s, ':')
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    parse_two(s, ',').map(|(a, b)| [a, b])
}

fn parse_stratum(s: &str) -> Result<Stratum, String> {
    Stratum::parse(s).ok_or_else(|| format!("unknown stratum `{s}`, expected C, F, V or T"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, o) = match cli.command {
        Cmd::Analyze(o) => (Command::Analyze, o),
        Cmd::Evolute(o) => (Command::Evolute, o),
        Cmd::Bifurcation(o) => (Command::Bifurcation, o),
        Cmd::Strata(o) => (Command::Strata, o),
        Cmd::Jet(o) => (Command::Jet, o),
    };
    let config = RunConfig {
        command,
        input: o.input,
        range: o.range,
        samples: o.samples,
        tol: o.tol,
        degree: o.degree,
        out: o.out,
        format: o.format,
        feature: o.feature,
        stratum: o.stratum,
        grid: o.grid,
        at: o.at,
        s: o.s,
    };
    match run(&config) {
        Ok(outcome) => {
            for m in &outcome.messages {
                eprintln!("spacecurve: {m}");
            }
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.stdout().as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spacecurve: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
