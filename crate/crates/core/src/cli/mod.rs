//! Command-line front end: `generate`, `area` and `fit`.

mod output;
mod presets;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{branches, read_xy_csv, render_svg, write_curve_csv, Trace};
pub use presets::{Job, Preset};

use crate::area::{area_closed_shifted, area_numeric, area_of_curve, area_play_gain, area_rotated_classical, area_skew_classical, AreaMethod};
use crate::compound::DoubleLoop;
use crate::curve::{Curve, Point};
use crate::error::Error;
use crate::fit::{fit_nested, ingest_branches, FitOptions, ShiftFreedom};
use crate::piecewise::{
    HybridLoop, HybridPower, HybridSpec, InverseLeaf, PlayLoop, PlayRotatedTrp, PlaySpec, PlayThreshold, PolylineLoop,
    TrapezoidLoop, TriRotated,
};
use crate::smooth::{tilt_shift_for_angle, BatAstroLoop, LoopSpec, RotatedLoop, ShiftedLoop, SkewedLoop, Waveform};
use crate::waveforms::Period;

/// Smallest accepted `--samples`.
pub const MIN_SAMPLES: usize = 16;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameters or input data: exit code 2.
    Invalid(String),
    /// Reading or writing files failed: exit code 3.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> CliError {
        if e.is_io_error() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hysteresis", version, about = "Sample, measure and fit parametric hysteresis loops")]
struct Cli {
    /// Output file (CSV); standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot to this file.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Samples per period.
    #[arg(long, global = true, default_value_t = 1024)]
    samples: usize,
    /// Seed of the fit search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Plain-text `key = value` file supplying any flag not given on the
    /// command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a loop into a CSV file with columns alpha,x,y.
    Generate(LoopArgs),
    /// Print closed-form and numeric areas of a loop or a CSV curve.
    Area(AreaArgs),
    /// Fit the smooth model to a measured loop.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Kind {
    /// Shifted smooth model with explicit --m and --n.
    Smooth,
    Classical,
    Leaf,
    Crescent,
    /// Smooth model on triangle pulses.
    Triangle,
    /// Classical loop turned by --theta.
    Rotated,
    /// Classical loop skewed by --theta along x and --kappa along y.
    Skewed,
    /// Output raised to the power --k: even gives Bat, odd gives Astro.
    BatAstro,
    /// Sampled at --k equal steps and joined by straight segments.
    Polyline,
    /// Smooth model on trapezoid pulses.
    Trapezoid,
    InverseLeaf,
    /// Hybrid whiskerless loop with tilt --theta, gain --gamma, curvature --kappa.
    Hybrid,
    /// Play with Gain (--beta, --gamma); --beta 90 gives a relay.
    Play,
    /// Play with Gain written through the threshold form.
    PlayThreshold,
    /// Trapezoid-pulse play turned to gain --gamma.
    PlayRotated,
    /// Triangle-pulse loop turned to gain --gamma.
    TriRotated,
    /// Two smooth loops linked at --link.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Link {
    Saturation,
    XMax,
}

#[derive(Debug, Clone, Args)]
struct LoopArgs {
    /// Loop family.
    #[arg(long = "type", value_enum, default_value_t = Kind::Classical)]
    kind: Kind,
    /// Named parameter set; overrides every loop flag.
    #[arg(long, value_enum)]
    figure: Option<Preset>,
    /// Split-point x coordinate.
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    a: f64,
    /// Saturation x coordinate.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    bx: f64,
    /// Saturation y coordinate.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    by: f64,
    /// Power of the split term (odd).
    #[arg(long)]
    m: Option<u32>,
    /// Power of the saturation term.
    #[arg(long)]
    n: Option<u32>,
    /// Split-term phase shift, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    d1: f64,
    /// Saturation-term phase shift, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    d2: f64,
    /// Output phase shift, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    d3: f64,
    /// Tilt at the split point, degrees.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Curvature skew, degrees.
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Whisker ramp angle, degrees.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Gain angle, degrees.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Integer parameter: output power, interval count or hybrid power.
    #[arg(long)]
    k: Option<u32>,
    /// Linking point of double loops.
    #[arg(long, value_enum, default_value_t = Link::Saturation)]
    link: Link,
    /// Link double loops in the self-crossing way.
    #[arg(long)]
    self_crossing: bool,
}

#[derive(Debug, Clone, Args)]
struct AreaArgs {
    #[command(flatten)]
    shape: LoopArgs,
    /// Measure a closed curve from a CSV file instead of a model loop.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "x")]
    x_column: String,
    #[arg(long, default_value = "y")]
    y_column: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Model {
    /// All phase shifts fixed at zero.
    Original,
    /// Split shift plus one more shift free.
    Improved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum FreeShift {
    Saturation,
    Output,
}

#[derive(Debug, Clone, Args)]
struct FitArgs {
    /// CSV file tracing at least one cycle.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "x")]
    x_column: String,
    #[arg(long, default_value = "y")]
    y_column: String,
    #[arg(long, value_enum, default_value_t = Model::Improved)]
    model: Model,
    /// Second free shift of the improved model.
    #[arg(long, value_enum, default_value_t = FreeShift::Saturation)]
    free_shift: FreeShift,
    /// Candidate split powers.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 3, 5])]
    m_values: Vec<u32>,
    /// Candidate saturation powers.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
    n_values: Vec<u32>,
    /// Latin-hypercube starts per grid cell.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
}

/// Flags that take no value.
const SWITCHES: &[&str] = &["self-crossing"];

/// Parses a `key = value` config file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Invalid(format!("config line {}: bad key '{}'", i + 1, k.trim())));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn given(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_value = format!("--{key}=");
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.starts_with(&with_value)
    })
}

/// Appends config entries as flags unless the command line already has them.
fn merge_config(args: &[OsString], entries: &[(String, String)]) -> Vec<OsString> {
    let mut merged = args.to_vec();
    for (k, v) in entries {
        if given(args, k) {
            continue;
        }
        if SWITCHES.contains(&k.as_str()) {
            if v.eq_ignore_ascii_case("true") || v == "1" {
                merged.push(format!("--{k}").into());
            }
            continue;
        }
        merged.push(format!("--{k}={v}").into());
    }
    merged
}

fn angle(deg: f64) -> f64 {
    if deg == 90.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        deg.to_radians()
    }
}

fn default_powers(kind: Kind) -> (u32, u32) {
    match kind {
        Kind::Leaf | Kind::Triangle | Kind::Trapezoid | Kind::InverseLeaf => (1, 1),
        Kind::Crescent => (1, 2),
        _ => (3, 3),
    }
}

fn closed_if_exact(report: crate::area::AreaReport) -> Option<f64> {
    (report.method == AreaMethod::ClosedForm).then_some(report.value)
}

fn play_spec(l: &LoopArgs) -> Result<PlaySpec, CliError> {
    let beta = angle(l.beta.unwrap_or(90.0));
    let gamma = angle(l.gamma.unwrap_or(0.0));
    Ok(PlaySpec::new(l.a, l.bx, l.by, beta, gamma)?)
}

fn build_job(l: &LoopArgs) -> Result<Job, CliError> {
    if let Some(p) = l.figure {
        return Ok(p.build()?);
    }
    let (dm, dn) = default_powers(l.kind);
    let (m, n) = (l.m.unwrap_or(dm), l.n.unwrap_or(dn));
    let mut spec = LoopSpec::new(l.a, l.bx, l.by, m, n)?.with_shifts(l.d1, l.d2, l.d3)?;
    let theta = l.theta.map(angle).unwrap_or(0.0);
    let kappa = l.kappa.map(angle).unwrap_or(0.0);
    let job = match l.kind {
        Kind::Smooth | Kind::Classical | Kind::Leaf | Kind::Crescent => {
            if l.theta.is_some() {
                if l.d1 != 0.0 {
                    return Err(CliError::Invalid("give either --theta or --d1, not both".into()));
                }
                let d1 = tilt_shift_for_angle(&spec, theta)?;
                spec = spec.with_shifts(d1, l.d2, l.d3)?;
            }
            Job::new(ShiftedLoop::new(spec)?, Some(area_closed_shifted(&spec)?))
        }
        Kind::Triangle => Job::new(ShiftedLoop::new(spec.with_waveform(Waveform::Triangle(Period::TAU)))?, None),
        Kind::Rotated => Job::new(RotatedLoop::new(spec, theta)?, closed_if_exact(area_rotated_classical(&spec, theta)?)),
        Kind::Skewed => Job::new(
            SkewedLoop::new(spec, theta, kappa)?,
            closed_if_exact(area_skew_classical(&spec, theta, kappa)?),
        ),
        Kind::BatAstro => Job::new(BatAstroLoop::new(spec, l.k.unwrap_or(2))?, None),
        Kind::Polyline => Job::new(PolylineLoop::new(&ShiftedLoop::new(spec)?, l.k.unwrap_or(12) as usize)?, None),
        Kind::Trapezoid => Job::new(TrapezoidLoop::new(spec)?, None),
        Kind::InverseLeaf => Job::new(InverseLeaf::new(spec)?, None),
        Kind::Hybrid => {
            let gamma = l.gamma.map(angle).unwrap_or(0.0);
            let hs = HybridSpec::new(l.a, l.bx, l.by, n)?
                .with_power(HybridPower::Even(l.k.unwrap_or(2)))?
                .with_angles(theta, gamma, kappa)?;
            Job::new(HybridLoop::new(hs)?, None)
        }
        Kind::Play => {
            let ps = play_spec(l)?;
            Job::new(PlayLoop::new(ps)?, Some(area_play_gain(&ps)?))
        }
        Kind::PlayThreshold => {
            let ps = play_spec(l)?;
            Job::new(PlayThreshold::new(ps)?, Some(area_play_gain(&ps)?))
        }
        Kind::PlayRotated => {
            let gain = angle(l.gamma.unwrap_or(0.0));
            Job::new(PlayRotatedTrp::new(l.a, l.bx, l.by, gain)?, None)
        }
        Kind::TriRotated => {
            let gain = angle(l.gamma.unwrap_or(0.0));
            Job::new(TriRotated::new(l.a, l.bx, l.by, gain)?, None)
        }
        Kind::Double => {
            let member = Arc::new(ShiftedLoop::new(spec)?);
            let d = match l.link {
                Link::Saturation => DoubleLoop::at_saturation(member, l.self_crossing)?,
                Link::XMax => DoubleLoop::at_x_max(member, l.self_crossing)?,
            };
            Job::new(d, None)
        }
    };
    Ok(job)
}

fn check_samples(samples: usize) -> Result<(), CliError> {
    if samples < MIN_SAMPLES {
        return Err(CliError::Invalid(format!("--samples must be at least {MIN_SAMPLES}, got {samples}")));
    }
    Ok(())
}

/// Samples a loop; a loop that closes repeats its first point exactly.
fn sample(job: &Job, samples: usize) -> Result<Curve, CliError> {
    let mut c = Curve::sample(job.lp.as_ref(), samples)?;
    if c.closed {
        let first = c.points[0];
        if let Some(last) = c.points.last_mut() {
            *last = first;
        }
    }
    Ok(c)
}

fn write_csv_to(out: Option<&Path>, curve: &Curve, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, curve)?;
    match out {
        Some(p) => output::write_file(p, &buf),
        None => stdout.write_all(&buf).map_err(CliError::from),
    }
}

fn loop_svg(points: &[Point]) -> String {
    let (up, down) = branches(points);
    render_svg(&[
        Trace {
            points: &up,
            stroke: "#1f4e9c",
        },
        Trace {
            points: &down,
            stroke: "#c0392b",
        },
    ])
}

fn cmd_generate(cli: &Cli, l: &LoopArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    check_samples(cli.samples)?;
    let job = build_job(l)?;
    let curve = sample(&job, cli.samples)?;
    write_csv_to(cli.out.as_deref(), &curve, stdout)?;
    if let Some(p) = &cli.svg {
        output::write_file(p, loop_svg(&curve.points).as_bytes())?;
    }
    Ok(())
}

fn cmd_area(cli: &Cli, a: &AreaArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (closed_form, numeric, method) = match &a.input {
        Some(path) => {
            let mut pts = read_xy_csv(path, &a.x_column, &a.y_column)?;
            if pts.len() < 3 {
                return Err(CliError::Invalid(format!("{}: need at least 3 points", path.display())));
            }
            // a gap of a few ordinary steps is taken as an implicit closing edge
            let mut steps: Vec<f64> = pts.windows(2).map(|w| w[0].distance(w[1])).collect();
            steps.sort_by(|x, y| x.total_cmp(y));
            let step = steps[steps.len() / 2];
            let gap = pts[0].distance(pts[pts.len() - 1]);
            if gap > 5.0 * step {
                return Err(CliError::Invalid(format!(
                    "{}: curve is open (end-to-start gap {gap:.3e})",
                    path.display()
                )));
            }
            if gap > 0.0 {
                pts.push(pts[0]);
            }
            let r = area_of_curve(&Curve::from_points(pts))?;
            (None, r.value, r.method)
        }
        None => {
            let job = build_job(&a.shape)?;
            let r = area_numeric(job.lp.as_ref())?;
            (job.closed_form, r.value, r.method)
        }
    };
    let method = match method {
        AreaMethod::ClosedForm => "closed form",
        AreaMethod::Quadrature => "quadrature",
        AreaMethod::Shoelace => "shoelace",
    };
    let mut text = String::new();
    match closed_form {
        Some(c) => {
            text.push_str(&format!("closed_form = {c:.6}\n"));
            text.push_str(&format!("numeric = {numeric:.6}\n"));
            text.push_str(&format!("method = {method}\n"));
            text.push_str(&format!("delta = {:.3e}\n", (c - numeric).abs()));
        }
        None => {
            text.push_str("closed_form = none\n");
            text.push_str(&format!("numeric = {numeric:.6}\n"));
            text.push_str(&format!("method = {method}\n"));
        }
    }
    stdout.write_all(text.as_bytes())?;
    let _ = cli;
    Ok(())
}

/// Shortest round-trip text, in exponent form for tiny magnitudes.
fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn cmd_fit(cli: &Cli, f: &FitArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    check_samples(cli.samples)?;
    let raw = read_xy_csv(&f.input, &f.x_column, &f.y_column)?;
    let data = ingest_branches(&raw)?;
    let mut grid = Vec::new();
    for &m in &f.m_values {
        for &n in &f.n_values {
            grid.push((m, n));
        }
    }
    let shifts = match (f.model, f.free_shift) {
        (Model::Original, _) => ShiftFreedom::None,
        (Model::Improved, FreeShift::Saturation) => ShiftFreedom::SplitSaturation,
        (Model::Improved, FreeShift::Output) => ShiftFreedom::SplitOutput,
    };
    let opts = FitOptions {
        grid,
        shifts,
        restarts: f.restarts,
        seed: cli.seed,
        ..FitOptions::default()
    };
    let (_, r) = fit_nested(&data, &opts)?;
    let s = r.spec;
    let report = format!(
        "type = smooth\nm = {}\nn = {}\na = {}\nbx = {}\nby = {}\nd1 = {}\nd2 = {}\nd3 = {}\n# model = {}\n# delta_percent = {:.6e}\n# restarts = {}\n# converged = {}\n",
        s.m,
        s.n,
        num(s.a),
        num(s.bx),
        num(s.by),
        num(s.shifts.split),
        num(s.shifts.saturation),
        num(s.shifts.output),
        match f.model {
            Model::Original => "original",
            Model::Improved => "improved",
        },
        r.delta,
        r.restarts_used,
        r.converged
    );
    stdout.write_all(report.as_bytes())?;
    let job = Job::new(ShiftedLoop::new(s)?, None);
    let curve = sample(&job, cli.samples)?;
    if let Some(p) = &cli.out {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve)?;
        output::write_file(p, &buf)?;
    }
    if let Some(p) = &cli.svg {
        let (mu, md) = branches(&curve.points);
        let svg = render_svg(&[
            Trace {
                points: &data.ascending,
                stroke: "#999999",
            },
            Trace {
                points: &data.descending,
                stroke: "#999999",
            },
            Trace {
                points: &mu,
                stroke: "#1f4e9c",
            },
            Trace {
                points: &md,
                stroke: "#1f4e9c",
            },
        ]);
        output::write_file(p, svg.as_bytes())?;
    }
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(l) => cmd_generate(cli, l, stdout),
        Command::Area(a) => cmd_area(cli, a, stdout),
        Command::Fit(f) => cmd_fit(cli, f, stdout),
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let parse = |argv: &[OsString]| Cli::try_parse_from(argv);
    let mut cli = match parse(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    if let Some(path) = cli.config.clone() {
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return 3;
            }
        };
        let merged = match parse_config(&text) {
            Ok(entries) => merge_config(&args, &entries),
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return e.exit_code();
            }
        };
        cli = match parse(&merged) {
            Ok(c) => c,
            Err(e) => {
                let _ = write!(stderr, "{}", e.render());
                return e.exit_code();
            }
        };
    }
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs the tool on the process arguments with the standard streams.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut argv = vec!["hysteresis"];
        argv.extend_from_slice(args);
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_parsing() {
        let e = parse_config("# comment\na = 0.3\nself_crossing = true  # trailing\n\n").unwrap();
        assert_eq!(e, vec![("a".into(), "0.3".into()), ("self-crossing".into(), "true".into())]);
        assert!(parse_config("oops").is_err());
        assert!(parse_config("config = x").is_err());
    }

    #[test]
    fn command_line_beats_config() {
        let args: Vec<OsString> = vec!["x".into(), "generate".into(), "--a=0.5".into()];
        let merged = merge_config(&args, &[("a".into(), "0.3".into()), ("bx".into(), "2".into())]);
        assert_eq!(merged.len(), 4);
        assert_eq!(merged[3], OsString::from("--bx=2"));
    }

    #[test]
    fn area_of_classical() {
        let (code, out, _) = run_capture(&["area", "--type", "classical", "--a", "0.2", "--by", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out.matches("0.471239").count(), 2, "{out}");
    }

    #[test]
    fn area_of_gainless_play() {
        let (code, out, _) = run_capture(&["area", "--type", "play", "--a", "0.5", "--gamma", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("closed_form = 2.000000"), "{out}");
    }

    #[test]
    fn validation_errors_exit_2() {
        let (code, _, err) = run_capture(&["generate", "--type", "classical", "--m", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("m"));
        let (code, _, _) = run_capture(&["generate", "--samples", "8"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&["generate", "--type", "nonsense"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn missing_config_is_io_error() {
        let (code, _, _) = run_capture(&["generate", "--config", "/nonexistent/cfg.txt"]);
        assert_eq!(code, 3);
    }

    #[test]
    fn every_kind_generates() {
        for k in Kind::value_variants() {
            let name = k.to_possible_value().unwrap().get_name().to_string();
            let mut args = vec!["generate", "--type", name.as_str(), "--samples", "64"];
            if matches!(k, Kind::Play | Kind::PlayThreshold) {
                args.extend(["--beta", "77", "--gamma", "17", "--a", "0.4"]);
            }
            if matches!(k, Kind::Trapezoid | Kind::InverseLeaf | Kind::Triangle) {
                args.extend(["--d1", "0.1"]);
            }
            if matches!(k, Kind::PlayRotated | Kind::TriRotated) {
                args.extend(["--gamma", "10"]);
            }
            let (code, out, err) = run_capture(&args);
            assert_eq!(code, 0, "{name}: {err}");
            assert_eq!(out.lines().count(), 65, "{name}");
        }
    }
}
