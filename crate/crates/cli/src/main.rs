use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use spheremix::discrepancy::{
    bound_report, curve, exact_discrepancy_with, lower_bound_plancherel, BoundReport, CurveRow, ExactOptions,
    Method, SearchGrid, DEFAULT_PLANCHEREL_RADII, DEFAULT_PLANCHEREL_TERMS,
};
use spheremix::output::{curve_csv, fmt_f64};
use spheremix::spectral::DEFAULT_EPSILON;
use spheremix::verify::{self, Profile};
use spheremix::walk::{run_walk, Formulation, WalkConfig};
use spheremix::with_threads;

mod manifest;

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "spheremix", version, about = "Discrepancy of the drunkard's walk on the sphere")]
struct Cli {
    /// Worker threads; outputs do not depend on this value.
    #[arg(long, global = true, env = "SPHEREMIX_THREADS")]
    threads: Option<usize>,

    /// Read angle arguments in degrees instead of radians.
    #[arg(long, global = true)]
    degrees: bool,

    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,

    /// Write the output here (plus a `.manifest.json` sidecar) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upper and lower bounds on D(k).
    Bounds(BoundsArgs),
    /// D(k) from the spectral series.
    Exact(ExactArgs),
    /// Simulate walk end points.
    Simulate(SimulateArgs),
    /// D(k) and its bounds for a range of k.
    Curve(CurveArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long)]
    k: u32,
    /// Degrees kept in the Plancherel lower bound.
    #[arg(long, default_value_t = DEFAULT_PLANCHEREL_TERMS)]
    terms: usize,
    /// Radii searched by the Plancherel lower bound.
    #[arg(long, default_value_t = DEFAULT_PLANCHEREL_RADII)]
    radii: usize,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 256)]
    n_gamma: usize,
    #[arg(long, default_value_t = 256)]
    n_r: usize,
    /// Report the best grid point without local refinement.
    #[arg(long)]
    no_refine: bool,
    /// Target for the certified truncation tail.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

impl GridArgs {
    fn options(&self) -> ExactOptions {
        ExactOptions {
            grid: SearchGrid {
                n_gamma: self.n_gamma,
                n_r: self.n_r,
            },
            refine: !self.no_refine,
            epsilon: self.epsilon,
            ..ExactOptions::default()
        }
    }

    fn params(&self) -> serde_json::Value {
        json!({"n_gamma": self.n_gamma, "n_r": self.n_r, "refine": !self.no_refine, "epsilon": self.epsilon})
    }

    fn argv(&self) -> Vec<String> {
        let mut v = vec![
            "--n-gamma".into(),
            self.n_gamma.to_string(),
            "--n-r".into(),
            self.n_r.to_string(),
            "--epsilon".into(),
            format!("{:?}", self.epsilon),
        ];
        if self.no_refine {
            v.push("--no-refine".into());
        }
        v
    }
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long)]
    k: u32,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long)]
    k: u32,
    /// drunkard, potted_plant, rotate_spin or bi_invariant.
    #[arg(long, default_value = "drunkard")]
    formulation: String,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the x, y, z coordinates of each end point.
    #[arg(long)]
    points: bool,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 2)]
    k_min: u32,
    #[arg(long)]
    k_max: u32,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "quick")]
    profile: String,
}

enum Failure {
    Verification,
    Usage(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<spheremix::Error> for Failure {
    fn from(e: spheremix::Error) -> Self {
        match e {
            spheremix::Error::Truncation { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Json,
    Csv,
    Text,
}

/// Everything a command produced, before it is written anywhere.
struct Output {
    body: String,
    params: serde_json::Value,
    argv: Vec<String>,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct ExactOutput {
    theta: f64,
    k: u32,
    value: f64,
    argmax_gamma: f64,
    argmax_r: f64,
    uncertainty: f64,
    method: Method,
    signed_value: f64,
    degree: usize,
    tail_bound: f64,
    grid_gap: f64,
    lipschitz: f64,
    certified_tail: bool,
}

#[derive(Serialize)]
struct CurveOutput<'a> {
    theta: f64,
    rows: &'a [CurveRow],
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let threads = cli.threads;
    if threads == Some(0) {
        return report(Failure::Usage("--threads must be at least 1".into()));
    }
    let result = match threads {
        Some(n) => with_threads(n, || run(&cli)),
        None => run(&cli),
    };
    match result.and_then(|out| emit(&cli, out, started)) {
        Ok(code) => code,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    match &f {
        Failure::Verification => {}
        Failure::Usage(m) | Failure::Numeric(m) | Failure::Io(m) => eprintln!("spheremix: {m}"),
    }
    ExitCode::from(f.code())
}

fn format_for(cli: &Cli, default: Format) -> Format {
    if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        default
    }
}

fn angle(cli: &Cli, value: f64) -> f64 {
    if cli.degrees {
        value * PI / 180.0
    } else {
        value
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn bounds_csv(b: &BoundReport) -> String {
    format!(
        "theta,k,C,upper_series,upper_closed,lower_dominant,lower_plancherel\n{},{},{},{},{},{},{}\n",
        fmt_f64(b.theta),
        b.k,
        fmt_f64(b.c),
        fmt_f64(b.upper_series),
        fmt_f64(b.upper_closed),
        fmt_f64(b.lower_dominant),
        fmt_f64(b.lower_plancherel)
    )
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Bounds(a) => {
            let theta = angle(cli, a.theta);
            let mut b = bound_report(theta, a.k)?;
            if a.terms != DEFAULT_PLANCHEREL_TERMS || a.radii != DEFAULT_PLANCHEREL_RADII {
                b.lower_plancherel = lower_bound_plancherel(theta, a.k, a.terms, a.radii)?;
            }
            let body = match format_for(cli, Format::Json) {
                Format::Csv => bounds_csv(&b),
                _ => to_json(&b),
            };
            Ok(Output {
                body,
                params: json!({"theta": theta, "k": a.k, "terms": a.terms, "radii": a.radii}),
                argv: vec![
                    "bounds".into(),
                    "--theta".into(),
                    format!("{theta:?}"),
                    "--k".into(),
                    a.k.to_string(),
                    "--terms".into(),
                    a.terms.to_string(),
                    "--radii".into(),
                    a.radii.to_string(),
                ],
                seed: None,
            })
        }
        Command::Exact(a) => {
            let theta = angle(cli, a.theta);
            let s = exact_discrepancy_with(theta, a.k, &a.grid.options())?;
            let body = match format_for(cli, Format::Json) {
                Format::Csv => format!(
                    "theta,k,value,argmax_gamma,argmax_r,uncertainty\n{},{},{},{},{},{}\n",
                    fmt_f64(theta),
                    a.k,
                    fmt_f64(s.result.value),
                    fmt_f64(s.result.argmax_gamma),
                    fmt_f64(s.result.argmax_r),
                    fmt_f64(s.result.uncertainty)
                ),
                _ => to_json(&ExactOutput {
                    theta,
                    k: a.k,
                    value: s.result.value,
                    argmax_gamma: s.result.argmax_gamma,
                    argmax_r: s.result.argmax_r,
                    uncertainty: s.result.uncertainty,
                    method: s.result.method,
                    signed_value: s.signed_value,
                    degree: s.degree,
                    tail_bound: s.tail_bound,
                    grid_gap: s.grid_gap,
                    lipschitz: s.lipschitz,
                    certified_tail: s.certified_tail,
                }),
            };
            let mut params = a.grid.params();
            params["theta"] = json!(theta);
            params["k"] = json!(a.k);
            let mut argv = vec!["exact".into(), "--theta".into(), format!("{theta:?}"), "--k".into(), a.k.to_string()];
            argv.extend(a.grid.argv());
            Ok(Output {
                body,
                params,
                argv,
                seed: None,
            })
        }
        Command::Simulate(a) => {
            let theta = angle(cli, a.theta);
            let formulation: Formulation = a.formulation.parse()?;
            if format_for(cli, Format::Csv) != Format::Csv {
                return Err(Failure::Usage("simulate writes CSV only".into()));
            }
            let cfg = WalkConfig::new(theta, a.k, formulation, a.seed, a.samples)?;
            let samples = run_walk(&cfg)?;
            let mut argv = vec![
                "simulate".into(),
                "--theta".into(),
                format!("{theta:?}"),
                "--k".into(),
                a.k.to_string(),
                "--formulation".into(),
                formulation.name().into(),
                "--samples".into(),
                a.samples.to_string(),
                "--seed".into(),
                a.seed.to_string(),
            ];
            if a.points {
                argv.push("--points".into());
            }
            Ok(Output {
                body: samples.to_csv(a.points),
                params: json!({
                    "theta": theta, "k": a.k, "formulation": formulation.name(),
                    "samples": a.samples, "seed": a.seed, "points": a.points,
                }),
                argv,
                seed: Some(a.seed),
            })
        }
        Command::Curve(a) => {
            let theta = angle(cli, a.theta);
            let rows = curve(theta, a.k_min, a.k_max, &a.grid.options())?;
            let body = match format_for(cli, Format::Csv) {
                Format::Json => to_json(&CurveOutput { theta, rows: &rows }),
                _ => curve_csv(&rows),
            };
            let mut params = a.grid.params();
            params["theta"] = json!(theta);
            params["k_min"] = json!(a.k_min);
            params["k_max"] = json!(a.k_max);
            let mut argv = vec![
                "curve".into(),
                "--theta".into(),
                format!("{theta:?}"),
                "--k-min".into(),
                a.k_min.to_string(),
                "--k-max".into(),
                a.k_max.to_string(),
            ];
            argv.extend(a.grid.argv());
            Ok(Output {
                body,
                params,
                argv,
                seed: None,
            })
        }
        Command::Verify(a) => {
            let profile: Profile = a.profile.parse()?;
            let format = format_for(cli, Format::Text);
            if format == Format::Csv {
                return Err(Failure::Usage("verify writes a text or JSON report".into()));
            }
            let streaming = format == Format::Text && cli.out.is_none();
            let report = verify::run_with_progress(profile, |c| {
                if streaming {
                    println!("{c}");
                }
            });
            let body = match format {
                Format::Json => to_json(&report),
                _ if streaming => {
                    let rest = report.render();
                    // check lines were already streamed; keep the summary
                    rest.lines().last().map(|l| format!("{l}\n")).unwrap_or_default()
                }
                _ => report.render(),
            };
            Ok(Output {
                body,
                params: json!({"profile": profile, "passed": report.passed()}),
                argv: vec!["verify".into(), "--profile".into(), profile.to_string()],
                seed: None,
            })
        }
    }
}

fn emit(cli: &Cli, out: Output, started: Instant) -> Result<ExitCode, Failure> {
    let verify_failed = matches!(cli.command, Command::Verify(_)) && out.params["passed"] == json!(false);
    match &cli.out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))?;
        }
        Some(path) => {
            write_file(path, out.body.as_bytes())?;
            let mut argv = out.argv.clone();
            if cli.json {
                argv.push("--json".into());
            }
            if cli.csv {
                argv.push("--csv".into());
            }
            let manifest = RunManifest::new(
                cli.command_name(),
                out.params,
                argv,
                out.seed,
                cli.threads,
                started.elapsed().as_secs_f64(),
                out.body.as_bytes(),
            );
            write_file(&manifest::sidecar_path(path), to_json(&manifest).as_bytes())?;
        }
    }
    if verify_failed {
        return Err(Failure::Verification);
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

impl Cli {
    fn command_name(&self) -> &'static str {
        match self.command {
            Command::Bounds(_) => "bounds",
            Command::Exact(_) => "exact",
            Command::Simulate(_) => "simulate",
            Command::Curve(_) => "curve",
            Command::Verify(_) => "verify",
        }
    }
}
