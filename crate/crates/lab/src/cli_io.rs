//! Configuration, CSV and SVG output, and the subcommand runner behind
//! `pinlab`.
//!
//! A run is described by a flat `key=value` map. Keys come from an optional
//! config file and are overridden by command-line flags; the merged map is
//! echoed as `#` comment lines at the top of every CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pinning_core::disorder::{sample, DisorderLaw};
use pinning_core::engine::{backward_table, expected_contacts, forward_table, marginals, ModelParams};
use pinning_core::homogeneous::{annealed_free_energy, fit_specific_heat_exponent, solve_free_energy, solve_source_free_energy};
use pinning_core::kernels::{build_kernel, renewal_mass, KernelFamily, RenewalKernel, SlowlyVarying};
use plotters::prelude::*;
use thiserror::Error;

use crate::estimators::{
    correlation_lengths, critical_contact_fraction, free_energy_from_log_z, gap_statistics,
    locate_critical_point, mu_from_log_z, replica_log_partitions, CrossingOptions,
};
use crate::experiments::{
    harris_assertions, harris_scan, irrelevance_window_check, marginal_case_diagnostic,
    smoothing_check, Assertion, ScanGrid, Status,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Display(String),
    #[error(transparent)]
    Model(#[from] pinning_core::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unrecognized schema `{0}`")]
    Schema(String),
    #[error("plot: {0}")]
    Plot(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Display(_) => 0,
            _ => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Keys accepted in config files and, under the same names, as flags.
pub const KNOWN_KEYS: &[&str] = &[
    "kernel",
    "kernel.alpha",
    "kernel.rate",
    "kernel.sigma",
    "kernel.L",
    "kernel.n_max",
    "law",
    "beta",
    "h",
    "alpha_grid",
    "beta_grid",
    "h_grid",
    "delta_grid",
    "k_grid",
    "N",
    "N_grid",
    "replicas",
    "seed",
    "epsilon",
    "out",
    "plot",
];

#[derive(Parser, Debug)]
#[command(name = "pinlab", version, about = "Disordered pinning models: exact recursions and replica Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel masses and renewal function.
    Kernel(Flags),
    /// Homogeneous free energy on `h_grid`.
    Homog(Flags),
    /// Log-log fit of the homogeneous free energy on `delta_grid`.
    #[command(name = "homog-exponent")]
    HomogExponent(Flags),
    /// Contact marginals for one disorder sample.
    Engine(Flags),
    /// Quenched free energy on `h_grid`.
    Fe(Flags),
    /// Decay rate of `E[1/Z]` on `h_grid`.
    Mu(Flags),
    /// Critical point from threshold crossing on `N_grid`.
    Hc(Flags),
    /// Two-point function decay and correlation lengths.
    Corr(Flags),
    /// Largest-gap statistics.
    Gaps(Flags),
    /// Contact growth with `N` at a fixed `h`.
    Critfss(Flags),
    /// A multi-run study: harris, smoothing, window or marginal.
    Experiment {
        name: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Flat `key=value` file; flags take precedence over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long = "kernel.alpha", allow_hyphen_values = true)]
    kernel_alpha: Option<String>,
    #[arg(long = "kernel.rate", allow_hyphen_values = true)]
    kernel_rate: Option<String>,
    #[arg(long = "kernel.sigma", allow_hyphen_values = true)]
    kernel_sigma: Option<String>,
    #[arg(long = "kernel.L", allow_hyphen_values = true)]
    kernel_l: Option<String>,
    #[arg(long = "kernel.n_max")]
    kernel_n_max: Option<String>,
    #[arg(long)]
    law: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long = "alpha_grid", allow_hyphen_values = true)]
    alpha_grid: Option<String>,
    #[arg(long = "beta_grid", allow_hyphen_values = true)]
    beta_grid: Option<String>,
    #[arg(long = "h_grid", allow_hyphen_values = true)]
    h_grid: Option<String>,
    #[arg(long = "delta_grid", allow_hyphen_values = true)]
    delta_grid: Option<String>,
    #[arg(long = "k_grid")]
    k_grid: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "N_grid")]
    n_grid: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    plot: bool,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("kernel", self.kernel.clone()),
            ("kernel.alpha", self.kernel_alpha.clone()),
            ("kernel.rate", self.kernel_rate.clone()),
            ("kernel.sigma", self.kernel_sigma.clone()),
            ("kernel.L", self.kernel_l.clone()),
            ("kernel.n_max", self.kernel_n_max.clone()),
            ("law", self.law.clone()),
            ("beta", self.beta.clone()),
            ("h", self.h.clone()),
            ("alpha_grid", self.alpha_grid.clone()),
            ("beta_grid", self.beta_grid.clone()),
            ("h_grid", self.h_grid.clone()),
            ("delta_grid", self.delta_grid.clone()),
            ("k_grid", self.k_grid.clone()),
            ("N", self.n.clone()),
            ("N_grid", self.n_grid.clone()),
            ("replicas", self.replicas.clone()),
            ("seed", self.seed.clone()),
            ("epsilon", self.epsilon.clone()),
            ("out", self.out.clone()),
            ("plot", self.plot.then(|| "true".to_string())),
        ]
    }
}

/// Kernel family as written in a config.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Truncation; defaults to `N`.
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    /// Experiment name for `experiment`.
    pub experiment: Option<String>,
    /// The merged `key=value` map, echoed into every output.
    pub entries: BTreeMap<String, String>,
    pub kernel: Option<KernelSpec>,
    pub law: DisorderLaw,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub alpha_grid: Option<Vec<f64>>,
    pub beta_grid: Option<Vec<f64>>,
    pub h_grid: Option<Vec<f64>>,
    pub delta_grid: Option<Vec<f64>>,
    pub k_grid: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub replicas: Option<usize>,
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
    pub plot: bool,
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line without `=`: `{line}`")))?;
        let k = k.trim();
        if !KNOWN_KEYS.contains(&k) {
            return Err(usage(format!("unknown key `{k}`")));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_real(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| usage(format!("malformed number for `{key}`: `{v}`")))
}

fn parse_count(key: &str, v: &str) -> Result<usize, CliError> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| usage(format!("malformed integer for `{key}`: `{v}`")))
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
fn parse_real_grid(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = v.split(':').collect();
    let grid = if parts.len() == 3 {
        let (a, b, s) = (parse_real(key, parts[0])?, parse_real(key, parts[1])?, parse_real(key, parts[2])?);
        if !(s > 0.0) || b < a {
            return Err(usage(format!("malformed range for `{key}`: `{v}`")));
        }
        let count = ((b - a) / s + 1e-9).floor() as usize + 1;
        (0..count).map(|i| a + s * i as f64).collect()
    } else {
        v.split(',').map(|t| parse_real(key, t)).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(usage(format!("empty grid for `{key}`")));
    }
    Ok(grid)
}

fn parse_count_grid(key: &str, v: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let (a, b, s) = (parse_count(key, parts[0])?, parse_count(key, parts[1])?, parse_count(key, parts[2])?);
        if s == 0 || b < a {
            return Err(usage(format!("malformed range for `{key}`: `{v}`")));
        }
        Ok((a..=b).step_by(s).collect())
    } else {
        v.split(',').map(|t| parse_count(key, t)).collect()
    }
}

fn parse_kernel(map: &BTreeMap<String, String>) -> Result<Option<KernelSpec>, CliError> {
    let Some(name) = map.get("kernel") else {
        return Ok(None);
    };
    let real = |k: &str| map.get(k).map(|v| parse_real(k, v)).transpose();
    let need = |k: &str| real(k)?.ok_or_else(|| usage(format!("kernel `{name}` needs `{k}`")));
    let family = match name.as_str() {
        "geometric" => KernelFamily::Geometric {
            rate: real("kernel.rate")?.unwrap_or(core::f64::consts::LN_2),
        },
        "srw" => KernelFamily::SrwReturn,
        "power" => KernelFamily::PowerLaw {
            alpha: need("kernel.alpha")?,
            slowly_varying: SlowlyVarying::Constant(real("kernel.L")?.unwrap_or(1.0)),
        },
        "poland-scheraga" | "ps" => KernelFamily::PolandScheraga {
            alpha: need("kernel.alpha")?,
            sigma: need("kernel.sigma")?,
        },
        other => return Err(usage(format!("unknown kernel `{other}`"))),
    };
    let n_max = map.get("kernel.n_max").map(|v| parse_count("kernel.n_max", v)).transpose()?;
    Ok(Some(KernelSpec { family, n_max }))
}

fn typed(command: String, experiment: Option<String>, map: BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let seed_text = get("seed").ok_or_else(|| usage("missing `seed`: every run needs an explicit seed"))?;
    let seed = seed_text
        .trim()
        .parse::<u64>()
        .map_err(|_| usage(format!("malformed integer for `seed`: `{seed_text}`")))?;
    let law = match get("law") {
        None => DisorderLaw::Gaussian,
        Some(v) => DisorderLaw::from_name(v).ok_or_else(|| usage(format!("unknown law `{v}`")))?,
    };
    let real = |k: &str| get(k).map(|v| parse_real(k, v)).transpose();
    let count = |k: &str| get(k).map(|v| parse_count(k, v)).transpose();
    let grid = |k: &str| get(k).map(|v| parse_real_grid(k, v)).transpose();
    let plot = match get("plot") {
        None | Some("false") => false,
        Some("true") => true,
        Some(v) => return Err(usage(format!("malformed boolean for `plot`: `{v}`"))),
    };
    Ok(RunConfig {
        kernel: parse_kernel(&map)?,
        law,
        beta: real("beta")?,
        h: real("h")?,
        alpha_grid: grid("alpha_grid")?,
        beta_grid: grid("beta_grid")?,
        h_grid: grid("h_grid")?,
        delta_grid: grid("delta_grid")?,
        k_grid: get("k_grid").map(|v| parse_count_grid("k_grid", v)).transpose()?,
        n: count("N")?,
        n_grid: get("N_grid").map(|v| parse_count_grid("N_grid", v)).transpose()?,
        replicas: count("replicas")?,
        seed,
        epsilon: real("epsilon")?,
        out: get("out").map(PathBuf::from),
        plot,
        command,
        experiment,
        entries: map,
    })
}

/// Parses `argv` (program name first). Flags override config-file keys.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Display(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let (command, experiment, flags) = match cli.command {
        Command::Kernel(f) => ("kernel", None, f),
        Command::Homog(f) => ("homog", None, f),
        Command::HomogExponent(f) => ("homog-exponent", None, f),
        Command::Engine(f) => ("engine", None, f),
        Command::Fe(f) => ("fe", None, f),
        Command::Mu(f) => ("mu", None, f),
        Command::Hc(f) => ("hc", None, f),
        Command::Corr(f) => ("corr", None, f),
        Command::Gaps(f) => ("gaps", None, f),
        Command::Critfss(f) => ("critfss", None, f),
        Command::Experiment { name, flags } => ("experiment", Some(name), flags),
    };
    let mut map = match &flags.config {
        Some(path) => parse_config_file(
            &fs::read_to_string(path).map_err(|e| usage(format!("cannot read config `{}`: {e}", path.display())))?,
        )?,
        None => BTreeMap::new(),
    };
    for (k, v) in flags.entries() {
        if let Some(v) = v {
            map.insert(k.to_string(), v);
        }
    }
    typed(command.to_string(), experiment, map)
}

impl RunConfig {
    fn need<T: Clone>(&self, key: &str, v: &Option<T>) -> Result<T, CliError> {
        v.clone()
            .ok_or_else(|| usage(format!("`{}` needs `{key}`", self.title())))
    }

    fn title(&self) -> String {
        match &self.experiment {
            Some(e) => format!("experiment {e}"),
            None => self.command.clone(),
        }
    }

    /// Builds the configured kernel truncated at `kernel.n_max`, else at
    /// `default_n_max`.
    fn build_kernel(&self, default_n_max: usize) -> Result<RenewalKernel, CliError> {
        let spec = self.need("kernel", &self.kernel)?;
        Ok(build_kernel(spec.family, spec.n_max.unwrap_or(default_n_max))?)
    }

    /// `# ` lines reproducing the merged configuration.
    pub fn echo(&self) -> Vec<String> {
        let mut out = vec![format!("pinlab {}", self.title())];
        out.extend(self.entries.iter().map(|(k, v)| format!("{k}={v}")));
        out
    }
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(s: &str) -> Cell {
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        match s.parse::<f64>() {
            Ok(x) if s.contains(['e', 'E', '.']) || !x.is_finite() => Cell::Real(x),
            _ => Cell::Text(s.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Cell {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

/// 17 significant digits, enough to reparse to the same binary value.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows plus a schema name and free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Table {
        Table {
            schema: schema.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta_real(&mut self, key: &str, x: f64) {
        self.meta.push((key.to_string(), format_real(x)));
    }

    pub fn meta_text(&mut self, key: &str, v: impl Into<String>) {
        self.meta.push((key.to_string(), v.into()));
    }

    pub fn meta_get(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }
}

/// A parsed CSV: the config echo and the table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub echo: Vec<String>,
    pub table: Table,
}

/// The CSV text for `table` with `echo` as leading comment lines.
pub fn render_csv(table: &Table, echo: &[String]) -> Result<String, CliError> {
    let mut head = String::new();
    for line in echo {
        write!(head, "# {line}\r\n").unwrap();
    }
    write!(head, "# schema={}\r\n", table.schema).unwrap();
    for (k, v) in &table.meta {
        write!(head, "# meta.{k}={v}\r\n").unwrap();
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(head + &String::from_utf8(body).expect("csv output is utf-8"))
}

pub fn emit_csv(table: &Table, echo: &[String], path: &Path) -> Result<(), CliError> {
    fs::write(path, render_csv(table, echo)?)?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv, CliError> {
    let mut echo = Vec::new();
    let mut schema = None;
    let mut meta = Vec::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim_start().trim_end_matches('\r');
        if let Some(s) = body.strip_prefix("schema=") {
            schema = Some(s.to_string());
        } else if let Some(m) = body.strip_prefix("meta.") {
            let (k, v) = m.split_once('=').ok_or_else(|| CliError::Schema(line.to_string()))?;
            meta.push((k.to_string(), v.to_string()));
        } else {
            echo.push(body.to_string());
        }
    }
    let schema = schema.ok_or_else(|| CliError::Schema("missing schema line".into()))?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let columns = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(Cell::parse).collect()))
        .collect::<Result<Vec<Vec<Cell>>, _>>()?;
    Ok(ParsedCsv {
        echo,
        table: Table {
            schema,
            columns,
            rows,
            meta,
        },
    })
}

/// The figure types produced from CSV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    FreeEnergy,
    ExponentFit,
    CorrelationDecay,
    HeatMap,
}

impl PlotKind {
    pub fn for_schema(schema: &str) -> Option<PlotKind> {
        match schema {
            "fe" | "homog" => Some(PlotKind::FreeEnergy),
            "exponent" => Some(PlotKind::ExponentFit),
            "corr" => Some(PlotKind::CorrelationDecay),
            "marginal" => Some(PlotKind::HeatMap),
            _ => None,
        }
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Plot(e.to_string())
}

fn extent(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn required(table: &Table, name: &str) -> Result<Vec<f64>, CliError> {
    table
        .column(name)
        .ok_or_else(|| CliError::Schema(format!("{} without numeric column `{name}`", table.schema)))
}

fn xy_chart(
    path: &Path,
    caption: &str,
    (x_label, y_label): (&str, &str),
    points: &[(f64, f64)],
    line: Option<&[(f64, f64)]>,
    note: Option<String>,
) -> Result<(), CliError> {
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().chain(line.unwrap_or(&[])).map(|p| p.1).collect();
    let (x0, x1) = extent(&xs);
    let (y0, y1) = extent(&ys);
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(points.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
        .map_err(plot_err)?;
    if let Some(line) = line {
        chart
            .draw_series(LineSeries::new(line.iter().copied(), &RED))
            .map_err(plot_err)?;
    }
    if let Some(note) = note {
        root.draw(&Text::new(note, (110, 60), ("sans-serif", 16).into_font()))
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

fn heat_map(path: &Path, table: &Table) -> Result<(), CliError> {
    let betas = required(table, "beta")?;
    let deltas = required(table, "delta")?;
    let ratio = required(table, "ratio")?;
    let mut bs = betas.clone();
    bs.sort_by(f64::total_cmp);
    bs.dedup();
    let mut ds = deltas.clone();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("F(beta, h_a + delta) / F_N(0, delta)", ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(70)
        .build_cartesian_2d(0..bs.len(), 0..ds.len())
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc("beta index")
        .y_desc("delta index")
        .draw()
        .map_err(plot_err)?;
    let cells = betas.iter().zip(&deltas).zip(&ratio).map(|((b, d), r)| {
        let i = bs.iter().position(|x| x == b).unwrap_or(0);
        let j = ds.iter().position(|x| x == d).unwrap_or(0);
        let t = if r.is_finite() { r.clamp(0.0, 1.0) } else { 0.0 };
        let shade = RGBColor((255.0 * t) as u8, 40, (255.0 * (1.0 - t)) as u8);
        Rectangle::new([(i, j), (i + 1, j + 1)], shade.filled())
    });
    chart.draw_series(cells).map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Draws the figure for a CSV written by [`emit_csv`] next to it, with an
/// `.svg` extension, and returns its path.
pub fn emit_plot(csv_path: &Path, kind: Option<PlotKind>) -> Result<PathBuf, CliError> {
    let parsed = parse_csv(&fs::read_to_string(csv_path)?)?;
    let table = &parsed.table;
    let kind = match kind.or_else(|| PlotKind::for_schema(&table.schema)) {
        Some(k) => k,
        None => return Err(CliError::Schema(table.schema.clone())),
    };
    let out = csv_path.with_extension("svg");
    match kind {
        PlotKind::FreeEnergy => {
            let hs = required(table, "h")?;
            let fs = required(table, "free_energy")?;
            let pts: Vec<(f64, f64)> = hs.into_iter().zip(fs).collect();
            xy_chart(&out, "free energy", ("h", "F"), &pts, None, None)?;
        }
        PlotKind::ExponentFit => {
            let ds = required(table, "delta")?;
            let fs = required(table, "free_energy")?;
            let pts: Vec<(f64, f64)> = ds.iter().zip(&fs).map(|(d, f)| (d.log10(), f.log10())).collect();
            let slope: f64 = table.meta_get("slope").and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            let intercept: f64 = table.meta_get("intercept").and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            // the fit is in natural logs; convert the intercept to base 10
            let line: Vec<(f64, f64)> = pts
                .iter()
                .map(|&(x, _)| (x, slope * x + intercept / core::f64::consts::LN_10))
                .collect();
            xy_chart(
                &out,
                "homogeneous free energy, log-log",
                ("log10 delta", "log10 F"),
                &pts,
                Some(&line),
                Some(format!("slope {slope:.4}")),
            )?;
        }
        PlotKind::CorrelationDecay => {
            let ks = required(table, "k")?;
            let ls = required(table, "log_mean_abs_c")?;
            let pts: Vec<(f64, f64)> = ks.into_iter().zip(ls).filter(|p| p.1.is_finite()).collect();
            let rate: f64 = table.meta_get("inverse_xi_average").and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
            xy_chart(
                &out,
                "two-point function decay",
                ("k", "log E|C|"),
                &pts,
                None,
                Some(format!("fitted 1/xi_av = {rate:.4e}")),
            )?;
        }
        PlotKind::HeatMap => heat_map(&out, table)?,
    }
    Ok(out)
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub echo: Vec<String>,
    pub assertions: Vec<Assertion>,
}

impl RunOutput {
    pub fn csv(&self) -> Result<String, CliError> {
        render_csv(&self.table, &self.echo)
    }

    /// 1 if any assertion failed, else 0.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.assertions.iter().any(|a| a.status == Status::Fail))
    }
}

fn assertion(name: &str, margin: f64, info: bool) -> Assertion {
    let status = if info {
        Status::Info
    } else if margin >= 0.0 {
        Status::Pass
    } else {
        Status::Fail
    };
    Assertion {
        name: name.to_string(),
        status,
        margin,
    }
}

/// Runs the configured subcommand.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let mut assertions = Vec::new();
    let table = match cfg.command.as_str() {
        "kernel" => run_kernel(cfg)?,
        "homog" => run_homog(cfg)?,
        "homog-exponent" => run_homog_exponent(cfg, &mut assertions)?,
        "engine" => run_engine(cfg)?,
        "fe" => run_fe(cfg)?,
        "mu" => run_mu(cfg)?,
        "hc" => run_hc(cfg)?,
        "corr" => run_corr(cfg, &mut assertions)?,
        "gaps" => run_gaps(cfg, &mut assertions)?,
        "critfss" => run_critfss(cfg, &mut assertions)?,
        "experiment" => run_experiment(cfg, &mut assertions)?,
        other => return Err(usage(format!("unknown subcommand `{other}`"))),
    };
    Ok(RunOutput {
        table,
        echo: cfg.echo(),
        assertions,
    })
}

fn run_kernel(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.need("N", &cfg.n)?;
    let kernel = cfg.build_kernel(n)?;
    let u = renewal_mass(&kernel, n)?;
    let doney = u.doney_ratio();
    let mut t = Table::new("kernel", &["n", "mass", "renewal_mass", "doney_ratio"]);
    for i in 1..=n {
        let mass = if i <= kernel.n_max() { kernel.mass(i) } else { 0.0 };
        let d = doney.map_or(f64::NAN, |d| d[i]);
        t.push(vec![i.into(), mass.into(), u.u()[i].into(), d.into()]);
    }
    t.meta_real("log_sigma", kernel.log_sigma());
    t.meta_real("mean_gap", kernel.mean_gap());
    if let Some(a) = kernel.alpha() {
        t.meta_real("alpha", a);
    }
    Ok(t)
}

fn run_homog(cfg: &RunConfig) -> Result<Table, CliError> {
    let hs = cfg.need("h_grid", &cfg.h_grid)?;
    let kernel = cfg.build_kernel(cfg.n.unwrap_or(1 << 16))?;
    let mut t = Table::new("homog", &["h", "free_energy", "derivative"]);
    for h in hs {
        let s = solve_free_energy(&kernel, h)?;
        t.push(vec![h.into(), s.free_energy.into(), s.derivative.into()]);
    }
    Ok(t)
}

fn run_homog_exponent(cfg: &RunConfig, out: &mut Vec<Assertion>) -> Result<Table, CliError> {
    let ds = cfg.need("delta_grid", &cfg.delta_grid)?;
    let kernel = cfg.build_kernel(cfg.n.unwrap_or(1 << 20))?;
    let fit = fit_specific_heat_exponent(&kernel, &ds)?;
    let mut t = Table::new("exponent", &["delta", "free_energy"]);
    for d in ds {
        t.push(vec![d.into(), solve_source_free_energy(&kernel, d)?.free_energy.into()]);
    }
    t.meta_real("slope", fit.slope);
    t.meta_real("intercept", fit.intercept);
    t.meta_real("exponent", fit.exponent);
    t.meta_real("r_squared", fit.r_squared);
    if let Some(a) = kernel.alpha() {
        let expected = (1.0 / a).max(1.0);
        out.push(assertion("exponent slope vs max(1/alpha, 1)", expected - fit.slope, true));
    }
    Ok(t)
}

fn params(cfg: &RunConfig) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(cfg.need("beta", &cfg.beta)?, cfg.need("h", &cfg.h)?)?)
}

fn run_engine(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.need("N", &cfg.n)?;
    let kernel = cfg.build_kernel(n)?;
    let p = params(cfg)?;
    let s = sample(cfg.law, n, cfg.seed, 0);
    let f = forward_table(&kernel, &s, p);
    let b = backward_table(&kernel, &s, p);
    let mut t = Table::new("marginals", &["k", "contact_probability"]);
    for (k, m) in marginals(&f, &b)?.into_iter().enumerate() {
        t.push(vec![k.into(), m.into()]);
    }
    t.meta_real("log_partition", f.log_partition());
    t.meta_real("free_energy", f.free_energy());
    t.meta_real("expected_contacts", expected_contacts(&f, &b)?);
    Ok(t)
}

fn run_fe(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.need("N", &cfg.n)?;
    let replicas = cfg.need("replicas", &cfg.replicas)?;
    let beta = cfg.need("beta", &cfg.beta)?;
    let hs = cfg.need("h_grid", &cfg.h_grid)?;
    let kernel = cfg.build_kernel(n)?;
    let mut t = Table::new("fe", &["h", "free_energy", "stderr", "annealed", "pure"]);
    for h in hs {
        let lz = replica_log_partitions(&kernel, cfg.law, ModelParams::new(beta, h)?, n, replicas.max(2), cfg.seed);
        let f = free_energy_from_log_z(&lz, n);
        let fa = annealed_free_energy(&kernel, beta, h, cfg.law)?;
        let f0 = solve_free_energy(&kernel, h)?.free_energy;
        t.push(vec![h.into(), f.mean.into(), f.stderr.into(), fa.into(), f0.into()]);
    }
    Ok(t)
}

fn run_mu(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.need("N", &cfg.n)?;
    let replicas = cfg.need("replicas", &cfg.replicas)?;
    let beta = cfg.need("beta", &cfg.beta)?;
    let hs = cfg.need("h_grid", &cfg.h_grid)?;
    let kernel = cfg.build_kernel(n)?;
    let mut t = Table::new("mu", &["h", "mu", "mu_stderr", "max_weight_share", "unreliable", "free_energy", "stderr"]);
    for h in hs {
        let lz = replica_log_partitions(&kernel, cfg.law, ModelParams::new(beta, h)?, n, replicas.max(2), cfg.seed);
        let m = mu_from_log_z(&lz, n);
        let f = free_energy_from_log_z(&lz, n);
        t.push(vec![
            h.into(),
            m.estimate.mean.into(),
            m.estimate.stderr.into(),
            m.max_weight_share.into(),
            usize::from(m.unreliable).into(),
            f.mean.into(),
            f.stderr.into(),
        ]);
    }
    Ok(t)
}

fn run_hc(cfg: &RunConfig) -> Result<Table, CliError> {
    let ns = cfg.need("N_grid", &cfg.n_grid)?;
    let replicas = cfg.need("replicas", &cfg.replicas)?;
    let beta = cfg.need("beta", &cfg.beta)?;
    let kernel = cfg.build_kernel(*ns.iter().max().unwrap_or(&1))?;
    let est = locate_critical_point(&kernel, cfg.law, beta, &ns, CrossingOptions::default(), replicas, cfg.seed)?;
    let mut t = Table::new("hc", &["n", "threshold", "raw", "pure", "h_c", "slope"]);
    for s in &est.per_size {
        t.push(vec![s.n.into(), s.threshold.into(), s.raw.into(), s.pure.into(), s.h_c.into(), s.slope.into()]);
    }
    t.meta_real("h_c", est.h_c);
    t.meta_real("err", est.err);
    t.meta_real("extrapolated", est.extrapolated);
    t.meta_real("bracket_lo", est.bracket.0);
    t.meta_real("bracket_hi", est.bracket.1);
    t.meta_real("drift", est.drift);
    t.meta_real("annealed", -cfg.law.log_mgf(beta));
    Ok(t)
}

fn run_corr(cfg: &RunConfig, out: &mut Vec<Assertion>) -> Result<Table, CliError> {
    let n = cfg.need("N", &cfg.n)?;
    let replicas = cfg.need("replicas", &cfg.replicas)?;
    let ks = cfg.need("k_grid", &cfg.k_grid)?;
    let kernel = cfg.build_kernel(n)?;
    let r = correlation_lengths(&kernel, cfg.law, params(cfg)?, n, &ks, replicas, cfg.seed)?;
    let mut t = Table::new("corr", &["k", "mean_abs_c", "log_mean_abs_c"]);
    for &(k, c) in &r.average_profile {
        t.push(vec![k.into(), c.into(), c.ln().into()]);
    }
    t.meta_real("ell", r.ell as f64);
    t.meta_real("xi_typical", r.xi_typical);
    t.meta_real("xi_average", r.xi_average);
    t.meta_real("inverse_xi_typical", r.inverse_xi_typical);
    t.meta_real("inverse_xi_typical_stderr", r.inverse_xi_typical_stderr);
    t.meta_real("inverse_xi_average", r.inverse_xi_average);
    t.meta_real("average_fit_power", r.average_fit.power);
    t.meta_real("mu", r.mu.estimate.mean);
    t.meta_real("free_energy", r.free_energy.mean);
    out.push(assertion("corr xi_av >= xi", r.xi_average - r.xi_typical, false));
    out.push(assertion("corr 1/xi vs F", r.free_energy.mean - r.inverse_xi_typical, true));
    out.push(assertion("corr 1/xi_av vs mu", r.mu.estimate.mean - r.inverse_xi_average, true));
    Ok(t)
}

fn run_gaps(cfg: &RunConfig, out: &mut Vec<Assertion>) -> Result<Table, CliError> {
    let n = cfg.need("N", &cfg.n)?;
    let replicas = cfg.need("replicas", &cfg.replicas)?;
    let kernel = cfg.build_kernel(n)?;
    let r = gap_statistics(&kernel, cfg.law, params(cfg)?, n, replicas, cfg.seed)?;
    let mut t = Table::new("gaps", &["replica", "largest_gap", "ratio"]);
    for (i, (&g, &q)) in r.largest_gaps.iter().zip(&r.ratios).enumerate() {
        t.push(vec![i.into(), g.into(), q.into()]);
    }
    t.meta_real("median", r.median);
    t.meta_real("mu", r.mu.estimate.mean);
    t.meta_real("median_times_mu", r.median_times_mu);
    t.meta_text("mu_unreliable", r.mu.unreliable.to_string());
    out.push(assertion("gaps median times mu", 1.0 - r.median_times_mu, true));
    Ok(t)
}

fn run_critfss(cfg: &RunConfig, out: &mut Vec<Assertion>) -> Result<Table, CliError> {
    let ns = cfg.need("N_grid", &cfg.n_grid)?;
    let replicas = cfg.need("replicas", &cfg.replicas)?;
    let kernel = cfg.build_kernel(*ns.iter().max().unwrap_or(&1))?;
    let r = critical_contact_fraction(
        &kernel,
        cfg.law,
        cfg.need("beta", &cfg.beta)?,
        cfg.need("h", &cfg.h)?,
        &ns,
        replicas,
        cfg.seed,
    )?;
    let mut t = Table::new("critfss", &["n", "contacts", "stderr"]);
    for row in &r.rows {
        t.push(vec![row.n.into(), row.contacts.mean.into(), row.contacts.stderr.into()]);
    }
    t.meta_real("exponent", r.exponent);
    t.meta_real("exponent_stderr", r.fit.slope_stderr);
    t.meta_real("general_ceiling", r.general_ceiling);
    if let Some(c) = r.irrelevant_ceiling {
        t.meta_real("irrelevant_ceiling", c);
    }
    out.push(assertion(
        "critfss exponent <= 2/3",
        r.general_ceiling + 4.0 * r.fit.slope_stderr - r.exponent,
        false,
    ));
    Ok(t)
}

fn run_experiment(cfg: &RunConfig, out: &mut Vec<Assertion>) -> Result<Table, CliError> {
    let name = cfg.experiment.as_deref().unwrap_or_default();
    let n = cfg.need("N", &cfg.n)?;
    let replicas = cfg.need("replicas", &cfg.replicas)?;
    match name {
        "harris" => {
            let grid = ScanGrid {
                alphas: cfg.need("alpha_grid", &cfg.alpha_grid)?,
                betas: cfg.need("beta_grid", &cfg.beta_grid)?,
                deltas: cfg.delta_grid.clone().unwrap_or_else(|| vec![0.1]),
                n,
                replicas,
                seed: cfg.seed,
                law: cfg.law,
            };
            let rows = harris_scan(&grid)?;
            out.extend(harris_assertions(&rows));
            Ok(harris_table(&rows))
        }
        "smoothing" => {
            let kernel = cfg.build_kernel(n)?;
            let r = smoothing_check(
                &kernel,
                cfg.need("beta", &cfg.beta)?,
                &cfg.need("delta_grid", &cfg.delta_grid)?,
                n,
                replicas,
                cfg.seed,
            )?;
            out.extend(r.assertions());
            Ok(smoothing_table(&r))
        }
        "window" => {
            let kernel = cfg.build_kernel(n)?;
            let r = irrelevance_window_check(
                &kernel,
                cfg.law,
                &cfg.need("beta_grid", &cfg.beta_grid)?,
                &cfg.need("delta_grid", &cfg.delta_grid)?,
                cfg.need("epsilon", &cfg.epsilon)?,
                n,
                replicas,
                cfg.seed,
            )?;
            out.extend(r.assertions());
            Ok(window_table(&r))
        }
        "marginal" => {
            let kernel = cfg.build_kernel(n)?;
            let r = marginal_case_diagnostic(
                &kernel,
                cfg.law,
                &cfg.need("beta_grid", &cfg.beta_grid)?,
                &cfg.need("delta_grid", &cfg.delta_grid)?,
                n,
                replicas,
                cfg.seed,
            )?;
            out.extend(r.assertions());
            Ok(marginal_table(&r))
        }
        other => Err(usage(format!(
            "unknown experiment `{other}` (expected harris, smoothing, window or marginal)"
        ))),
    }
}

pub fn harris_table(rows: &[crate::experiments::RelevanceRow]) -> Table {
    let mut t = Table::new(
        "harris",
        &["alpha", "beta", "hc_quenched", "hc_err", "hc_annealed", "gap", "guide", "extrapolated", "verdict"],
    );
    for r in rows {
        t.push(vec![
            r.alpha.into(),
            r.beta.into(),
            r.hc_quenched.into(),
            r.hc_err.into(),
            r.hc_annealed.into(),
            r.gap.into(),
            r.guide.unwrap_or(f64::NAN).into(),
            r.critical.extrapolated.into(),
            r.verdict.label().into(),
        ]);
    }
    t
}

pub fn smoothing_table(r: &crate::experiments::SmoothingReport) -> Table {
    let mut t = Table::new(
        "smoothing",
        &["kind", "delta", "h", "free_energy", "stderr", "ceiling", "slope", "slack", "margin"],
    );
    for row in &r.rows {
        t.push(vec![
            "quenched".into(),
            row.delta.into(),
            row.h.into(),
            row.f_hat.mean.into(),
            row.f_hat.stderr.into(),
            row.ceiling.into(),
            row.slope.into(),
            row.slack.into(),
            row.margin.into(),
        ]);
    }
    for c in &r.contrast {
        t.push(vec![
            "pure".into(),
            c.delta.into(),
            c.delta.into(),
            c.free_energy.into(),
            0.0.into(),
            c.ceiling.into(),
            f64::NAN.into(),
            0.0.into(),
            (c.ceiling - c.free_energy).into(),
        ]);
    }
    t.meta_real("alpha", r.alpha);
    t.meta_real("beta", r.beta);
    t.meta_real("h_c", r.critical.h_c);
    t.meta_real("h_c_err", r.critical.err);
    t.meta_real("h_c_extrapolated", r.critical.extrapolated);
    t.meta_real("bracket_lo", r.critical.bracket.0);
    t.meta_real("bracket_hi", r.critical.bracket.1);
    t.meta_real("contrast_slope", r.contrast_fit.slope);
    t
}

pub fn window_table(r: &crate::experiments::WindowReport) -> Table {
    let mut t = Table::new(
        "window",
        &["beta", "delta", "free_energy", "stderr", "pure_finite", "pure", "excess", "upper_margin", "lower_margin"],
    );
    for row in &r.rows {
        t.push(vec![
            row.beta.into(),
            row.delta.into(),
            row.f_hat.mean.into(),
            row.f_hat.stderr.into(),
            row.pure_finite.into(),
            row.pure.into(),
            row.excess.into(),
            row.upper_margin.into(),
            row.lower_margin.into(),
        ]);
    }
    t.meta_real("epsilon", r.epsilon);
    for (d, b) in &r.largest_passing_beta {
        t.meta_real(&format!("largest_beta.delta={}", format_real(*d)), b.unwrap_or(f64::NAN));
    }
    t
}

pub fn marginal_table(r: &crate::experiments::MarginalReport) -> Table {
    let mut t = Table::new(
        "marginal",
        &["beta", "delta", "free_energy", "stderr", "pure_finite", "ratio", "ratio_stderr", "guide", "lower_bound"],
    );
    for c in &r.cells {
        t.push(vec![
            c.beta.into(),
            c.delta.into(),
            c.f_hat.mean.into(),
            c.f_hat.stderr.into(),
            c.pure_finite.into(),
            c.ratio.into(),
            c.ratio_stderr.into(),
            c.guide.into(),
            c.lower_bound.into(),
        ]);
    }
    t.meta_text("guide_curve", "delta = exp(-1/beta^2)");
    t
}

/// Writes the CSV (to `out`, or returns it for stdout) and the plot if
/// requested. Returns the CSV text when no output path is configured.
pub fn write_outputs(cfg: &RunConfig, output: &RunOutput) -> Result<Option<String>, CliError> {
    let csv = output.csv()?;
    match &cfg.out {
        Some(path) => {
            fs::write(path, &csv)?;
            if cfg.plot {
                emit_plot(path, None)?;
            }
            Ok(None)
        }
        None => {
            if cfg.plot {
                return Err(usage("`plot` needs `out`"));
            }
            Ok(Some(csv))
        }
    }
}

/// One summary line per assertion.
pub fn summary_lines(assertions: &[Assertion]) -> Vec<String> {
    assertions
        .iter()
        .map(|a| format!("{} {} margin={}", a.status.label(), a.name, format_real(a.margin)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("pinlab".to_string())
            .chain(s.split_whitespace().map(String::from))
            .collect()
    }

    #[test]
    fn flags_populate_config() {
        let c = parse_config(argv("fe --beta 0.5 --h -0.1 --seed 42 --kernel srw --N 4096 --replicas 200")).unwrap();
        assert_eq!(c.beta, Some(0.5));
        assert_eq!(c.h, Some(-0.1));
        assert_eq!(c.seed, 42);
        assert_eq!(c.n, Some(4096));
        assert_eq!(c.replicas, Some(200));
        assert_eq!(c.kernel.unwrap().family, KernelFamily::SrwReturn);
    }

    #[test]
    fn missing_seed_is_usage_error() {
        let e = parse_config(argv("fe --beta 0.5")).unwrap_err();
        assert!(matches!(e, CliError::Usage(_)));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn malformed_number_names_token() {
        let e = parse_config(argv("fe --beta 0.5x --seed 1")).unwrap_err();
        assert!(e.to_string().contains("0.5x"));
    }

    #[test]
    fn config_file_rejects_unknown_key() {
        let e = parse_config_file("beta=0.5\ncolour=red\n").unwrap_err();
        assert!(e.to_string().contains("colour"));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_real_grid("g", "0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_real_grid("g", "0:1:0.25").unwrap().len(), 5);
        assert_eq!(parse_count_grid("k", "50:80:10").unwrap(), vec![50, 60, 70, 80]);
        assert!(parse_real_grid("g", "1:0:0.1").is_err());
    }

    #[test]
    fn cells_reparse() {
        for c in [Cell::Int(-3), Cell::Real(0.1), Cell::Real(1.0), Cell::Real(-2.5e-300), Cell::Text("strictly-above".into())] {
            assert_eq!(Cell::parse(&c.render()), c);
        }
        assert!(matches!(Cell::parse(&format_real(f64::NAN)), Cell::Real(x) if x.is_nan()));
    }
}
