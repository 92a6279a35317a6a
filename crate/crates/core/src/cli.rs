//! Command-line front end.
//!
//! Every subcommand shares one flag set. A JSON file passed with `--config`
//! supplies defaults for any flag; flags given on the command line win.
//! Output goes to stdout and, when `--output` or `RIESZ_OUTPUT_DIR` names a
//! directory, to `<command>.<ext>` there.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 when a computed report
//! violates one of its invariants.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::distance_measure::{self, DEFAULT_LEVEL};
use crate::energy::{fekete_convergence_diagnostics, EnergyOptions};
use crate::error::{Error, Result};
use crate::measure::{equilibrium_measure, frostman_check};
use crate::polarization::{
    circle_polarization_oracle, delta_from_polarization, max_polarization, DeltaConstant, PolarizationOptions,
};
use crate::report::{Envelope, Method, FORMAT_VERSION};
use crate::reverse_triangle::{
    random_atomic_decompositions, rt_closed_form, rt_constant, rt_limit_constant, sharpness_demo, sharpness_regular,
    verify_inequality, RtOptions, SharpnessOptions,
};
use crate::search::SearchOptions;
use crate::sets::{Configuration, Point, SetDescriptor};
use crate::specfun::{gamma, sphere_area, wiener_constant, RieszParams};

pub const OUTPUT_DIR_ENV: &str = "RIESZ_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Printed with every usage error.
pub const SUPPORTED_MATRIX: &str = "\
supported sets and alpha ranges (s = N - alpha):
  set      flags                     wiener           equilibrium        rt-constant        polarization
  circle   --radius                  1 < a < 2        1 < a < 2          1 < a < 2          s > 0 (oracle or optimized)
  sphere   --dim N>=3 --radius       1 < a <= 2       1 < a <= 2         1 < a <= 2         s > 0 (optimized)
  ball     --dim N>=3 --radius       0 < a <= 2       0 < a <= 2         0 < a <= 2         s > 0 (optimized, interval)
  segment  --a x,y --b x,y           none             minimum-energy     0 < a < N, s > 0   max_polarization only
  finite   --points x,y;x,y          none             counting           none               none
  sigma: --set ball|segment --dim N>=3 (alpha = 2)
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// A bare value for scalar commands, CSV otherwise.
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "riesz",
    version,
    about = "Riesz potentials, polarization and reverse triangle constants"
)]
pub struct Cli {
    /// JSON file with default flag values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the output file (defaults to $RIESZ_OUTPUT_DIR).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wiener constant W_alpha(E).
    Wiener(Args),
    /// Equilibrium measure nodes and a Frostman check.
    Equilibrium(Args),
    /// Minimum-energy configurations along --n.
    Fekete(Args),
    /// Polarization and C^delta along --m.
    Polarization(Args),
    /// Reverse triangle constants along --m.
    RtConstant(Args),
    /// Slack of the potential inequality on random atomic decompositions.
    Verify(Args),
    /// Sharpness gaps along --n for the optimal centers.
    Sharpness(Args),
    /// Representing measure of the ball or segment and its identity check.
    Sigma(Args),
    /// One quantity along --m (or --n).
    Sweep(Args),
}

impl Command {
    fn split(self) -> (&'static str, Args) {
        match self {
            Command::Wiener(a) => ("wiener", a),
            Command::Equilibrium(a) => ("equilibrium", a),
            Command::Fekete(a) => ("fekete", a),
            Command::Polarization(a) => ("polarization", a),
            Command::RtConstant(a) => ("rt-constant", a),
            Command::Verify(a) => ("verify", a),
            Command::Sharpness(a) => ("sharpness", a),
            Command::Sigma(a) => ("sigma", a),
            Command::Sweep(a) => ("sweep", a),
        }
    }
}

/// Flags shared by all subcommands; every field may also come from the
/// config file.
#[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct Args {
    /// circle | sphere | ball | segment | finite
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    /// Ambient dimension N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Segment endpoint, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    /// Finite set: points separated by `;`, coordinates by `,`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Required by every stochastic command.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `a..b` (inclusive), `a,b,c` or a single value.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<String>,
    /// Radii for averaging, comma separated.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    /// oracle | optimized | closed-form
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// sweep: rt-constant | polarization | chebyshev | energy
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    /// Number of decompositions (verify) or test points (sigma).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Atoms per part in random decompositions.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    /// Sample budget for Frostman checks.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Invariant tolerance, overriding the command default.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl Args {
    /// Fill unset fields from `file`.
    pub fn merged_over(self, file: Args) -> Args {
        macro_rules! pick {
            ($($f:ident),*) => { Args { $($f: self.$f.or(file.$f)),* } };
        }
        pick!(
            set, dim, radius, a, b, points, alpha, seed, m, n, r, method, quantity, resolution, starts, count, atoms,
            samples, tol
        )
    }
}

/// Config file layout: the flags plus `format` and `output`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct FileConfig {
    #[serde(flatten)]
    args: Args,
    format: Option<Format>,
    output: Option<PathBuf>,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub args: Args,
    pub format: Format,
    pub output_dir: Option<PathBuf>,
}

/// One output cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:?}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(t) if t.contains(',') || t.contains('"') => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Method> for Cell {
    fn from(v: Method) -> Self {
        Cell::Text(v.as_str().to_string())
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Printed alone in text format.
    pub scalar: Option<f64>,
    pub extra: Value,
    pub tolerances: BTreeMap<String, f64>,
    /// Human-readable invariant violations.
    pub violations: Vec<String>,
}

impl Outcome {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            scalar: None,
            extra: Value::Null,
            tolerances: BTreeMap::new(),
            violations: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        obj.insert(c.clone(), serde_json::to_value(v).unwrap_or(Value::Null));
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Serialized output for `format`.
pub fn render(config: &RunConfig, outcome: &Outcome) -> Result<String> {
    Ok(match config.format {
        Format::Text => match outcome.scalar {
            Some(v) => format!("{v:?}\n"),
            None => outcome.to_csv(),
        },
        Format::Csv => outcome.to_csv(),
        Format::Json => {
            let env = Envelope {
                version: FORMAT_VERSION,
                command: config.command.to_string(),
                seed: config.args.seed,
                tolerances: outcome.tolerances.clone(),
                parameters: serde_json::to_value(&config.args)?,
                data: json!({
                    "columns": outcome.columns,
                    "rows": outcome.rows_json(),
                    "extra": outcome.extra,
                    "violations": outcome.violations,
                }),
            };
            let mut s = serde_json::to_string_pretty(&env)?;
            s.push('\n');
            s
        }
    })
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

/// Parse `a..b` (inclusive), `a,b,c` or `a`.
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let t = text.trim();
    let num = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("not a count: {v:?}")))
    };
    if let Some((a, b)) = t.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(usage(format!("empty range {t}")));
        }
        return Ok((a..=b).collect());
    }
    t.split(',').map(num).collect()
}

fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("not a number: {v:?}")))
        })
        .collect()
}

/// Build the set from `--set` and its shape flags.
pub fn parse_set(args: &Args) -> Result<SetDescriptor> {
    let kind = args.set.as_deref().ok_or_else(|| usage("--set is required"))?;
    let radius = args.radius.unwrap_or(1.0);
    let set = match kind {
        "circle" => SetDescriptor::circle(radius),
        "sphere" => SetDescriptor::sphere(args.dim.ok_or_else(|| usage("--dim is required for a sphere"))?, radius),
        "ball" => SetDescriptor::ball(args.dim.ok_or_else(|| usage("--dim is required for a ball"))?, radius),
        "segment" => {
            let dim = args.dim.unwrap_or(2);
            let (a, b) = match (&args.a, &args.b) {
                (Some(a), Some(b)) => (parse_floats(a)?, parse_floats(b)?),
                (None, None) => {
                    let mut b = vec![0.0; dim];
                    b[dim.max(1) - 1] = 1.0;
                    (b.iter().map(|v| -v).collect(), b)
                }
                _ => return Err(usage("give both --a and --b")),
            };
            SetDescriptor::segment(a, b)
        }
        "finite" => {
            let text = args
                .points
                .as_deref()
                .ok_or_else(|| usage("--points is required for a finite set"))?;
            SetDescriptor::finite_points(text.split(';').map(parse_floats).collect::<Result<Vec<Point>>>()?)
        }
        other => return Err(usage(format!("unknown set {other:?}"))),
    };
    set.map_err(|e| usage(e.to_string()))
}

fn parse_params(set: &SetDescriptor, args: &Args) -> Result<RieszParams> {
    let alpha = args.alpha.ok_or_else(|| usage("--alpha is required"))?;
    RieszParams::new(set.ambient_dim(), alpha).map_err(|e| usage(e.to_string()))
}

fn require_seed(args: &Args, command: &str) -> Result<u64> {
    args.seed.ok_or_else(|| {
        usage(format!(
            "{command} is stochastic: --seed is required for reproducibility"
        ))
    })
}

/// Resolve flags, config file and environment into a [`RunConfig`].
pub fn resolve(cli: Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<FileConfig>(&text).map_err(|e| usage(format!("bad config file: {e}")))?
        }
        None => FileConfig::default(),
    };
    let (command, args) = cli.command.split();
    let output_dir = cli
        .output
        .or(file.output)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
    Ok(RunConfig {
        command,
        args: args.merged_over(file.args),
        format: cli.format.or(file.format).unwrap_or_default(),
        output_dir,
    })
}

/// Execute a resolved command.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    let args = &config.args;
    match config.command {
        "wiener" => cmd_wiener(args),
        "equilibrium" => cmd_equilibrium(args),
        "fekete" => cmd_fekete(args),
        "polarization" => cmd_polarization(args),
        "rt-constant" => cmd_rt_constant(args),
        "verify" => cmd_verify(args),
        "sharpness" => cmd_sharpness(args),
        "sigma" => cmd_sigma(args),
        "sweep" => cmd_sweep(args),
        other => Err(usage(format!("unknown command {other}"))),
    }
}

/// Parse `argv`, run, print, write files; returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            if code == EXIT_USAGE {
                eprint!("{SUPPORTED_MATRIX}");
            }
            return code;
        }
    };
    match run_cli(cli) {
        Ok((text, outcome)) => {
            print!("{text}");
            if outcome.violations.is_empty() {
                EXIT_OK
            } else {
                for v in &outcome.violations {
                    eprintln!("invariant violation: {v}");
                }
                EXIT_VIOLATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprint!("{SUPPORTED_MATRIX}");
            EXIT_USAGE
        }
    }
}

fn run_cli(cli: Cli) -> Result<(String, Outcome)> {
    let config = resolve(cli)?;
    let outcome = execute(&config).map_err(|e| match e {
        Error::Io(_) | Error::Json(_) | Error::Usage(_) => e,
        other => usage(other.to_string()),
    })?;
    let text = render(&config, &outcome)?;
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        let ext = match config.format {
            Format::Json => "json",
            Format::Csv | Format::Text => "csv",
        };
        let body = if config.format == Format::Text {
            outcome.to_csv()
        } else {
            text.clone()
        };
        std::fs::write(dir.join(format!("{}.{ext}", config.command)), body)?;
    }
    Ok((text, outcome))
}

fn cmd_wiener(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let w = wiener_constant(&set, &params)?;
    let mut out = Outcome::new(&["set", "dim", "alpha", "wiener", "method"]);
    out.push(vec![
        set.kind_name().into(),
        set.ambient_dim().into(),
        params.alpha().into(),
        w.into(),
        Method::ClosedForm.into(),
    ]);
    out.scalar = Some(w);
    Ok(out)
}

fn cmd_equilibrium(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let seed = require_seed(args, "equilibrium")?;
    let mu = equilibrium_measure(&set, &params, args.resolution.unwrap_or(1000))?;
    let report = frostman_check(&set, &params, &mu, args.samples.unwrap_or(200), seed)?;
    let dim = set.ambient_dim();
    let mut cols: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    cols.push("weight".into());
    let mut out = Outcome {
        columns: cols,
        ..Outcome::new(&[])
    };
    for (p, w) in mu.nodes().iter().zip(mu.weights()) {
        let mut row: Vec<Cell> = p.iter().map(|v| Cell::Num(*v)).collect();
        row.push(Cell::Num(*w));
        out.push(row);
    }
    let tol = args.tol.unwrap_or(1e-6);
    out.tolerances.insert("frostman".into(), tol);
    if report.certifiable && !report.passes(tol) {
        out.violations.push(format!(
            "Frostman check fails: excess {:?}, deviation {:?}",
            report.max_excess, report.max_on_set_deviation
        ));
    }
    out.extra = json!({ "label": mu.label().as_str(), "mass": mu.total_mass(), "frostman": report });
    Ok(out)
}

fn cmd_fekete(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let seed = require_seed(args, "fekete")?;
    let n_list = parse_range(args.n.as_deref().unwrap_or("4,8,16,32"))?;
    let opts = EnergyOptions::default()
        .with_seed(seed)
        .with_starts(args.starts.unwrap_or(8));
    let table = fekete_convergence_diagnostics(&set, &params, &n_list, &opts)?;
    let mut out = Outcome::new(&["n", "energy", "inf_potential", "converged", "method"]);
    for r in &table.rows {
        out.push(vec![
            r.n.into(),
            r.energy.into(),
            r.inf_potential.into(),
            r.converged.into(),
            Method::Optimized.into(),
        ]);
    }
    fekete_violations(&table, &mut out);
    out.extra = json!({ "wiener": table.wiener, "monotone": table.monotone, "sandwich": table.sandwich });
    Ok(out)
}

fn fekete_violations(table: &crate::energy::FeketeTable, out: &mut Outcome) {
    out.tolerances.insert("sandwich".into(), crate::energy::SANDWICH_TOL);
    if !table.monotone {
        out.violations.push("energies are not nondecreasing in n".into());
    }
    if table.sandwich == Some(false) {
        out.violations.extend(table.violations.iter().cloned());
    }
}

/// `M_m` for each `m` with the method used.
fn polarization_values(
    set: &SetDescriptor,
    params: &RieszParams,
    m_list: &[usize],
    args: &Args,
) -> Result<Vec<(usize, f64, Method)>> {
    let s = params.s();
    let method = args
        .method
        .as_deref()
        .unwrap_or(if matches!(set, SetDescriptor::Circle { .. }) {
            "oracle"
        } else {
            "optimized"
        });
    match (method, set) {
        ("oracle", SetDescriptor::Circle { radius }) => Ok(m_list
            .iter()
            .map(|&m| (m, radius.powf(-s) * circle_polarization_oracle(m, s), Method::Oracle))
            .collect()),
        ("oracle", _) => Err(usage("the oracle exists on the circle only")),
        ("optimized", _) => {
            let seed = require_seed(args, "optimized polarization")?;
            let opts = PolarizationOptions::default()
                .with_seed(seed)
                .with_starts(args.starts.unwrap_or(6));
            m_list
                .iter()
                .map(|&m| Ok((m, max_polarization(set, m, s, &opts)?.value, Method::Optimized)))
                .collect()
        }
        (other, _) => Err(usage(format!("unknown polarization method {other:?}"))),
    }
}

fn cmd_polarization(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let m_list = parse_range(args.m.as_deref().unwrap_or("1..10"))?;
    if m_list.contains(&0) {
        return Err(usage("m must be at least 1"));
    }
    let values = polarization_values(&set, &params, &m_list, args)?;
    let interval = matches!(set, SetDescriptor::Ball { .. });
    let mut out = if interval {
        Outcome::new(&["m", "polarization", "delta_lower", "delta_upper", "method"])
    } else {
        Outcome::new(&["m", "polarization", "delta_constant", "method"])
    };
    let wiener = wiener_constant(&set, &params).ok();
    for (m, mm, method) in values {
        let mut row: Vec<Cell> = vec![m.into(), mm.into()];
        match delta_from_polarization(&set, &params, m, mm, method) {
            Ok(DeltaConstant::Exact { value, .. }) => row.push(value.into()),
            Ok(DeltaConstant::Interval { lower, upper, .. }) => {
                row.push(lower.into());
                row.push(upper.into());
            }
            Err(_) => row.push(Cell::Text(String::new())),
        }
        row.push(method.into());
        if let Some(w) = wiener {
            if mm / m as f64 > w * (1.0 + 1e-12) {
                out.violations
                    .push(format!("M_{m}/m = {} exceeds W = {w}", mm / m as f64));
            }
        }
        out.push(row);
    }
    out.extra = json!({ "wiener": wiener });
    Ok(out)
}

fn rt_options(args: &Args, seed: u64) -> RtOptions {
    let mut o = RtOptions::default()
        .with_seed(seed)
        .with_starts(args.starts.unwrap_or(8));
    if let Some(r) = args.resolution {
        o.resolution = r;
        o.surrogate_points = r;
    }
    o
}

fn cmd_rt_constant(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let seed = require_seed(args, "rt-constant")?;
    let m_list = parse_range(args.m.as_deref().unwrap_or("2"))?;
    let opts = rt_options(args, seed);
    let limit = rt_limit_constant(&set, &params, &opts)?;
    let mut out = Outcome::new(&["m", "rt_constant", "integral", "wiener", "limit", "converged", "method"]);
    let tol = args.tol.unwrap_or(1e-9);
    out.tolerances.insert("monotone".into(), tol);
    let mut centers = Vec::new();
    let mut prev: Option<f64> = None;
    for &m in &m_list {
        let r = rt_constant(&set, &params, m, &opts)?;
        if r.value < limit.value - tol {
            out.violations.push(format!(
                "C(alpha, {m}) = {} is below the limit {}",
                r.value, limit.value
            ));
        }
        if let Some(p) = prev {
            if r.value > p + tol {
                out.violations
                    .push(format!("C(alpha, {m}) = {} increased from {p}", r.value));
            }
        }
        prev = Some(r.value);
        out.push(vec![
            m.into(),
            r.value.into(),
            r.integral.into(),
            r.wiener.into(),
            limit.value.into(),
            r.converged.into(),
            r.method.into(),
        ]);
        centers.push(json!({ "m": m, "centers": r.centers.points() }));
    }
    out.extra = json!({ "limit": limit, "centers": centers });
    Ok(out)
}

/// `C_E(alpha, m)` and its optimal centers: closed form on the circle,
/// optimized elsewhere.
fn constant_and_centers(
    set: &SetDescriptor,
    params: &RieszParams,
    m: usize,
    args: &Args,
    seed: u64,
) -> Result<(f64, Configuration)> {
    let r = rt_constant(set, params, m, &rt_options(args, seed))?;
    let c = rt_closed_form(set, params, m).unwrap_or(r.value);
    Ok((c, r.centers))
}

fn cmd_verify(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let seed = require_seed(args, "verify")?;
    let m_list = parse_range(args.m.as_deref().unwrap_or("2"))?;
    let count = args.count.unwrap_or(50);
    let atoms = args.atoms.unwrap_or(3);
    let search = SearchOptions::default();
    let mut out = Outcome::new(&[
        "m",
        "index",
        "slack",
        "sum_part_infima",
        "total_infimum",
        "constant",
        "ok",
        "method",
    ]);
    out.tolerances
        .insert("slack".into(), crate::reverse_triangle::SLACK_TOL);
    for &m in &m_list {
        if m < 2 {
            return Err(usage("verify needs m >= 2"));
        }
        let (constant, _) = constant_and_centers(&set, &params, m, args, seed)?;
        let ds = random_atomic_decompositions(&set, m, atoms, count, seed ^ (m as u64) << 32)?;
        for (i, d) in ds.iter().enumerate() {
            let r = verify_inequality(&set, &params, d, constant, &search)?;
            if !r.ok {
                out.violations
                    .push(format!("m={m} decomposition {i}: slack {}", r.slack));
            }
            let sum: f64 = r.part_infima.iter().sum();
            out.push(vec![
                m.into(),
                i.into(),
                r.slack.into(),
                sum.into(),
                r.total_infimum.into(),
                constant.into(),
                r.ok.into(),
                Method::Optimized.into(),
            ]);
        }
    }
    Ok(out)
}

fn cmd_sharpness(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let seed = require_seed(args, "sharpness")?;
    let m = parse_range(args.m.as_deref().unwrap_or("2"))?[0];
    let n_list = parse_range(args.n.as_deref().unwrap_or("8,16,32"))?;
    let (constant, centers) = constant_and_centers(&set, &params, m, args, seed)?;
    let opts = SharpnessOptions {
        energy: EnergyOptions::default()
            .with_seed(seed)
            .with_starts(args.starts.unwrap_or(8)),
        ..SharpnessOptions::default()
    };
    let table = sharpness_demo(&set, &params, &centers, constant, &n_list, &opts)?;
    let mut out = Outcome::new(&["n", "gap", "part_sizes", "total_infimum", "method"]);
    for r in &table.rows {
        let sizes: Vec<String> = r.part_sizes.iter().map(|v| v.to_string()).collect();
        out.push(vec![
            r.n.into(),
            r.gap.into(),
            Cell::Text(sizes.join(";")),
            r.total_infimum.into(),
            Method::Optimized.into(),
        ]);
    }
    out.tolerances.insert("gap".into(), crate::reverse_triangle::SLACK_TOL);
    if !table.nonnegative {
        out.violations.push("a sharpness gap is negative".into());
    }
    let regular = if matches!(set, SetDescriptor::Circle { .. }) {
        Some(sharpness_regular(
            &set,
            &params,
            &centers,
            constant,
            &SearchOptions::default().with_grid(512),
        )?)
    } else {
        None
    };
    out.extra = json!({
        "constant": constant,
        "centers": centers.points(),
        "decreasing": table.decreasing,
        "assignment": table.assignment,
        "regular": regular,
    });
    Ok(out)
}

fn cmd_sigma(args: &Args) -> Result<Outcome> {
    let dim = args.dim.unwrap_or(3);
    let kind = args.set.as_deref().unwrap_or("ball");
    let resolution = args.resolution.unwrap_or(2000);
    let seed = require_seed(args, "sigma")?;
    let sigma = match kind {
        "ball" => distance_measure::sigma_for_ball(dim, resolution)?,
        "segment" => distance_measure::sigma_for_segment(dim, resolution)?,
        other => return Err(usage(format!("sigma is available for ball and segment, got {other:?}"))),
    };
    let params = RieszParams::new(dim, 2.0)?;
    let pts = distance_measure::test_points(dim, args.count.unwrap_or(20), 5.0, seed);
    let report = distance_measure::verify_potential_identity(&sigma, &params, &pts, DEFAULT_LEVEL)?;
    let mut cols: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    cols.extend(["potential", "target", "rel_error", "method"].map(String::from));
    let mut out = Outcome {
        columns: cols,
        ..Outcome::new(&[])
    };
    for p in &report.points {
        let mut row: Vec<Cell> = p.x.iter().map(|v| Cell::Num(*v)).collect();
        row.extend([
            p.potential.into(),
            p.target.into(),
            p.rel_error.into(),
            Method::Quadrature.into(),
        ]);
        out.push(row);
    }
    let tol = args.tol.unwrap_or(1e-3);
    out.tolerances.insert("identity".into(), tol);
    out.tolerances.insert("mass".into(), distance_measure::SIGMA_MASS_TOL);
    if !report.passes(tol) {
        out.violations.push(format!(
            "identity error {} or mass {} out of tolerance",
            report.max_rel_error, report.mass
        ));
    }
    let n = dim as f64;
    let density: Vec<Value> = (0..=40)
        .map(|k| {
            let r = 0.25 * k as f64;
            // mass per unit radius (ball) or per unit distance from the axis (segment)
            let d = if kind == "ball" {
                (n - 1.0) * r.powf(n - 2.0) * (1.0 + r).powf(-n)
            } else {
                gamma(0.5 * n).unwrap_or(f64::NAN) / std::f64::consts::PI.powf(0.5 * n)
                    * sphere_area(dim - 1)
                    * r.powf(n - 2.0)
                    * (1.0 + r * r).powf(-0.5 * n)
            };
            json!({ "radius": r, "density": d })
        })
        .collect();
    out.extra = json!({
        "set": kind,
        "mass": report.mass,
        "normalization": sigma.normalization,
        "max_rel_error": report.max_rel_error,
        "density": density,
    });
    Ok(out)
}

fn cmd_sweep(args: &Args) -> Result<Outcome> {
    let set = parse_set(args)?;
    let params = parse_params(&set, args)?;
    let quantity = args
        .quantity
        .as_deref()
        .ok_or_else(|| usage("--quantity is required"))?;
    match quantity {
        "rt-constant" => {
            let m_list = parse_range(args.m.as_deref().unwrap_or("2..16"))?;
            let closed = matches!(set, SetDescriptor::Circle { .. }) && args.method.as_deref() != Some("optimized");
            let mut out = Outcome::new(&["m", "rt_constant", "method"]);
            let mut values = Vec::with_capacity(m_list.len());
            if closed {
                for &m in &m_list {
                    if m < 2 {
                        return Err(usage("rt-constant needs m >= 2"));
                    }
                    values.push((m, rt_closed_form(&set, &params, m)?, Method::ClosedForm));
                }
            } else {
                let seed = require_seed(args, "optimized rt-constant")?;
                let opts = rt_options(args, seed);
                for &m in &m_list {
                    values.push((m, rt_constant(&set, &params, m, &opts)?.value, Method::Optimized));
                }
            }
            let tol = args.tol.unwrap_or(1e-9);
            out.tolerances.insert("monotone".into(), tol);
            for w in values.windows(2) {
                if w[1].1 > w[0].1 + tol {
                    out.violations
                        .push(format!("value increases from m={} to m={}", w[0].0, w[1].0));
                }
            }
            for (m, v, method) in values {
                out.push(vec![m.into(), v.into(), method.into()]);
            }
            let limit = rt_limit_constant(&set, &params, &rt_options(args, args.seed.unwrap_or(0)))?;
            out.extra = json!({ "limit": limit });
            Ok(out)
        }
        "polarization" | "chebyshev" => {
            let m_list = parse_range(args.m.as_deref().unwrap_or("1..16"))?;
            let values = polarization_values(&set, &params, &m_list, args)?;
            let wiener = wiener_constant(&set, &params).ok();
            let mut out = if quantity == "chebyshev" {
                Outcome::new(&["m", "ratio", "method"])
            } else {
                Outcome::new(&["m", "polarization", "method"])
            };
            for w in values.windows(2) {
                if quantity == "chebyshev" && w[1].1 / w[1].0 as f64 <= w[0].1 / w[0].0 as f64 {
                    out.violations
                        .push(format!("M_m/m does not increase from m={} to m={}", w[0].0, w[1].0));
                }
            }
            for (m, v, method) in values {
                let shown = if quantity == "chebyshev" { v / m as f64 } else { v };
                if let Some(w) = wiener {
                    if v / m as f64 > w * (1.0 + 1e-12) {
                        out.violations.push(format!("M_{m}/m exceeds W"));
                    }
                }
                out.push(vec![m.into(), shown.into(), method.into()]);
            }
            out.extra = json!({ "wiener": wiener });
            Ok(out)
        }
        "energy" => cmd_fekete(args),
        other => Err(usage(format!("unknown sweep quantity {other:?}"))),
    }
}

/// Same output as `run`, captured: `(exit status, stdout text)`.
pub fn run_captured<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Err(_) => (EXIT_USAGE, String::new()),
        Ok(cli) => match run_cli(cli) {
            Ok((text, outcome)) => (
                if outcome.violations.is_empty() {
                    EXIT_OK
                } else {
                    EXIT_VIOLATION
                },
                text,
            ),
            Err(_) => (EXIT_USAGE, String::new()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("riesz".to_string())
            .chain(s.split_whitespace().map(String::from))
            .collect()
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_range("4,8,16").unwrap(), vec![4, 8, 16]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn wiener_prints_the_value() {
        let (code, out) = run_captured(argv("wiener --set ball --dim 3 --alpha 2"));
        assert_eq!(code, 0);
        assert_eq!(out, "1.0\n");
    }

    #[test]
    fn polarization_oracle_column() {
        let (code, out) = run_captured(argv(
            "polarization --set circle --alpha 0 --m 1..10 --method oracle --format csv",
        ));
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "m,polarization,delta_constant,method");
        for (k, line) in lines[1..].iter().enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            let m = (k + 1) as f64;
            let v: f64 = cols[2].parse().unwrap();
            assert!((v - (0.25 - m / 4.0)).abs() < 1e-10);
            assert_eq!(cols[3], "oracle");
        }
    }

    #[test]
    fn seed_is_required_for_stochastic_commands() {
        let (code, _) = run_captured(argv("fekete --set circle --alpha 1.5 --n 4"));
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn unsupported_combination_is_a_usage_error() {
        let (code, _) = run_captured(argv("wiener --set segment --alpha 1.5"));
        assert_eq!(code, EXIT_USAGE);
        let (code, _) = run_captured(argv("wiener --set torus --alpha 1.5"));
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn flags_override_the_config_file() {
        let file = Args {
            set: Some("ball".into()),
            dim: Some(4),
            alpha: Some(1.0),
            ..Args::default()
        };
        let flags = Args {
            alpha: Some(2.0),
            ..Args::default()
        };
        let merged = flags.merged_over(file);
        assert_eq!(merged.set.as_deref(), Some("ball"));
        assert_eq!(merged.dim, Some(4));
        assert_eq!(merged.alpha, Some(2.0));
    }
}
