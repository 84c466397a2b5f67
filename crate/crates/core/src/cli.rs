//! Command-line front end: `run`, `verify`, `export-tree`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use toml::{Table, Value as TomlValue};

use crate::branching::WorldTree;
use crate::observers::CaseConfig;
use crate::report::ScenarioReport;
use crate::scenarios::pointer::Profile;
use crate::scenarios::{
    approx_report, geiger_report, mzi_report, observers_report, pointer_report, spins_report, stern_gerlach_report, GeigerParams,
    MirrorMode, MziParams, PointerParams, SternGerlachParams, SCENARIOS,
};
use crate::tensor::C64;
use crate::verify::verify;
use crate::Error;

/// Environment variable that redirects every output file into a directory.
pub const OUT_DIR_VAR: &str = "WORLDSIM_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_UNKNOWN_SUITE: i32 = 4;
pub const EXIT_NO_TREE: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "worldsim", version, about = "Branching-universe scenarios and property suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario config, optionally as a sweep.
    Run {
        config: PathBuf,
        /// Override a parameter (`key=value`; dotted keys reach other tables).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded property suite.
    Verify {
        suite: String,
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the world tree stored in a JSON report.
    ExportTree {
        report: PathBuf,
        #[arg(long, value_enum, default_value = "graphviz")]
        style: Style,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Tree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Graphviz,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn invalid(path: &str, message: impl std::fmt::Display) -> Self {
        Self::new(EXIT_VALIDATION, format!("{path}: {message}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Param(m) | Error::Config(m) => Self::invalid("params", m),
            other => Self::new(EXIT_FAIL, other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the CLI on `args` and returns the exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_PARSE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Run { config, set, format, out } => cmd_run(&config, &set, format, out.as_deref(), stdout),
        Command::Verify { suite, seed, out } => cmd_verify(&suite, seed, out.as_deref(), stdout),
        Command::ExportTree { report, style, out } => cmd_export(&report, style, out.as_deref(), stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

/// Parsed config file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: Option<u64>,
    pub params: Table,
    pub sweep: Option<(String, Vec<TomlValue>)>,
    pub format: Format,
    pub path: Option<PathBuf>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parses config text; `name` prefixes parse-error positions.
pub fn parse_config(name: &str, text: &str) -> CliResult<Table> {
    text.parse::<Table>().map_err(|e| {
        let (line, col) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        CliError::new(EXIT_PARSE, format!("{name}:{line}:{col}: {}", e.message().trim()))
    })
}

fn set_value(raw: &str) -> TomlValue {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key v"),
        Err(_) => TomlValue::String(raw.to_string()),
    }
}

/// Applies `key=value` overrides; bare keys go into `[params]`.
pub fn apply_overrides(table: &mut Table, sets: &[String]) -> CliResult<()> {
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::new(EXIT_PARSE, format!("--set {s}: expected key=value")))?;
        let k = k.trim();
        let path: Vec<&str> = if k.contains('.') {
            k.split('.').collect()
        } else if ["scenario", "seed"].contains(&k) {
            vec![k]
        } else {
            vec!["params", k]
        };
        let mut cur = &mut *table;
        for seg in &path[..path.len() - 1] {
            let entry = cur.entry(seg.to_string()).or_insert_with(|| TomlValue::Table(Table::new()));
            cur = entry.as_table_mut().ok_or_else(|| CliError::invalid(seg, "is not a table"))?;
        }
        cur.insert(path[path.len() - 1].to_string(), set_value(v.trim()));
    }
    Ok(())
}

fn known_tables(table: &Table) -> CliResult<()> {
    for k in table.keys() {
        if !["scenario", "seed", "params", "sweep", "output"].contains(&k.as_str()) {
            return Err(CliError::invalid(k, "unknown key"));
        }
    }
    Ok(())
}

pub fn load_config(table: Table) -> CliResult<RunConfig> {
    known_tables(&table)?;
    let scenario = match table.get("scenario") {
        Some(TomlValue::String(s)) => s.clone(),
        Some(_) => return Err(CliError::invalid("scenario", "expected a string")),
        None => return Err(CliError::invalid("scenario", "missing")),
    };
    if !SCENARIOS.contains(&scenario.as_str()) {
        return Err(CliError::invalid("scenario", format!("unknown scenario `{scenario}` (known: {})", SCENARIOS.join(", "))));
    }
    let seed = match table.get("seed") {
        None => None,
        Some(TomlValue::Integer(i)) if *i >= 0 => Some(*i as u64),
        Some(_) => return Err(CliError::invalid("seed", "expected a non-negative integer")),
    };
    let params = match table.get("params") {
        None => Table::new(),
        Some(TomlValue::Table(t)) => t.clone(),
        Some(_) => return Err(CliError::invalid("params", "expected a table")),
    };
    let sweep = match table.get("sweep") {
        None => None,
        Some(TomlValue::Table(t)) => {
            for k in t.keys() {
                if k != "param" && k != "values" {
                    return Err(CliError::invalid(&format!("sweep.{k}"), "unknown key"));
                }
            }
            let param = t.get("param").and_then(TomlValue::as_str).ok_or_else(|| CliError::invalid("sweep.param", "expected a string"))?;
            if !schema(&scenario).contains(&param) {
                return Err(CliError::invalid("sweep.param", format!("`{param}` is not a parameter of `{scenario}`")));
            }
            let values = t.get("values").and_then(TomlValue::as_array).ok_or_else(|| CliError::invalid("sweep.values", "expected an array"))?;
            if values.is_empty() {
                return Err(CliError::invalid("sweep.values", "is empty"));
            }
            Some((param.to_string(), values.clone()))
        }
        Some(_) => return Err(CliError::invalid("sweep", "expected a table")),
    };
    let (mut format, mut path) = (Format::Json, None);
    match table.get("output") {
        None => {}
        Some(TomlValue::Table(t)) => {
            for (k, v) in t {
                match (k.as_str(), v) {
                    ("format", TomlValue::String(s)) => {
                        format = Format::from_str(s, true).map_err(|_| CliError::invalid("output.format", "expected json, csv or tree"))?;
                    }
                    ("path", TomlValue::String(s)) => path = Some(PathBuf::from(s)),
                    ("format" | "path", _) => return Err(CliError::invalid(&format!("output.{k}"), "expected a string")),
                    _ => return Err(CliError::invalid(&format!("output.{k}"), "unknown key")),
                }
            }
        }
        Some(_) => return Err(CliError::invalid("output", "expected a table")),
    }
    Ok(RunConfig { scenario, seed, params, sweep, format, path })
}

/// Parameter names accepted by each scenario.
pub fn schema(scenario: &str) -> &'static [&'static str] {
    match scenario {
        "mzi" => &["theta", "mode", "alpha", "a", "k", "dp_detector"],
        "approx" => &["alpha"],
        "spins" => &["n", "a", "b"],
        "observers" => &["case", "amplitudes", "second_basis"],
        "pointer" => &["nq", "q0", "dq", "nr", "dr", "phi", "phi_center", "phi_sigma", "eta", "eta_cell", "eta_center", "eta_sigma", "times"],
        "stern_gerlach" => &["c_up", "c_down", "cells", "spacing", "sigma", "center", "phase0", "phase1", "flight_times", "recombine"],
        "geiger" => &["n_atoms", "cascade", "inside", "threshold", "epsilon"],
        _ => &[],
    }
}

/// Typed view of `[params]` that remembers which keys were read.
struct Params<'a> {
    table: &'a Table,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    fn new(table: &'a Table) -> Self {
        Self { table, used: RefCell::new(BTreeSet::new()) }
    }

    fn get(&self, key: &str) -> Option<&'a TomlValue> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.get(key)
    }

    fn path(key: &str) -> String {
        format!("params.{key}")
    }

    fn as_f64(v: &TomlValue, key: &str) -> CliResult<f64> {
        match v {
            TomlValue::Float(f) => Ok(*f),
            TomlValue::Integer(i) => Ok(*i as f64),
            _ => Err(CliError::invalid(&Self::path(key), "expected a number")),
        }
    }

    fn opt_f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.get(key).map(|v| Self::as_f64(v, key)).transpose()
    }

    fn f64(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_usize(&self, key: &str) -> CliResult<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(TomlValue::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(CliError::invalid(&Self::path(key), "expected a non-negative integer")),
        }
    }

    fn usize(&self, key: &str, default: usize) -> CliResult<usize> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    fn bool(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(TomlValue::Boolean(b)) => Ok(*b),
            Some(_) => Err(CliError::invalid(&Self::path(key), "expected true or false")),
        }
    }

    fn string(&self, key: &str, default: &str) -> CliResult<String> {
        match self.get(key) {
            None => Ok(default.to_string()),
            Some(TomlValue::String(s)) => Ok(s.clone()),
            Some(_) => Err(CliError::invalid(&Self::path(key), "expected a string")),
        }
    }

    fn f64_list(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(TomlValue::Array(a)) => a.iter().map(|v| Self::as_f64(v, key)).collect(),
            Some(_) => Err(CliError::invalid(&Self::path(key), "expected an array of numbers")),
        }
    }

    /// A number or `[re, im]`.
    fn as_complex(v: &TomlValue, key: &str) -> CliResult<C64> {
        match v {
            TomlValue::Array(a) if a.len() == 2 => Ok(C64::new(Self::as_f64(&a[0], key)?, Self::as_f64(&a[1], key)?)),
            TomlValue::Array(_) => Err(CliError::invalid(&Self::path(key), "complex numbers are written [re, im]")),
            other => Ok(C64::new(Self::as_f64(other, key)?, 0.0)),
        }
    }

    fn opt_complex(&self, key: &str) -> CliResult<Option<C64>> {
        self.get(key).map(|v| Self::as_complex(v, key)).transpose()
    }

    fn complex_list(&self, key: &str) -> CliResult<Option<Vec<C64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(TomlValue::Array(a)) => a.iter().map(|v| Self::as_complex(v, key)).collect::<CliResult<Vec<_>>>().map(Some),
            Some(_) => Err(CliError::invalid(&Self::path(key), "expected an array")),
        }
    }

    fn complex_matrix(&self, key: &str) -> CliResult<Option<Vec<Vec<C64>>>> {
        match self.get(key) {
            None => Ok(None),
            Some(TomlValue::Array(rows)) => rows
                .iter()
                .map(|row| match row {
                    TomlValue::Array(a) => a.iter().map(|v| Self::as_complex(v, key)).collect(),
                    _ => Err(CliError::invalid(&Self::path(key), "expected an array of vectors")),
                })
                .collect::<CliResult<Vec<_>>>()
                .map(Some),
            Some(_) => Err(CliError::invalid(&Self::path(key), "expected an array of vectors")),
        }
    }

    fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        match self.table.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(CliError::invalid(&Self::path(k), "unknown parameter")),
            None => Ok(()),
        }
    }
}

fn range_check(key: &str, x: f64, lo: f64, hi: f64) -> CliResult<f64> {
    if (lo..=hi).contains(&x) {
        Ok(x)
    } else {
        Err(CliError::invalid(&Params::path(key), format!("{x} is outside [{lo}, {hi}]")))
    }
}

fn build_mzi(p: &Params) -> CliResult<ScenarioReport> {
    let theta = p.f64("theta", 0.0)?;
    let mode = p.string("mode", "PI")?;
    let alpha = p.opt_f64("alpha")?;
    let (a, k) = (p.opt_f64("a")?, p.opt_f64("k")?);
    let dp = p.bool("dp_detector", false)?;
    let mode = match mode.to_ascii_lowercase().as_str() {
        "pi" => MirrorMode::PI,
        "ps" => MirrorMode::PS,
        "general" => match (alpha, a, k) {
            (Some(al), None, None) => MirrorMode::General { alpha: range_check("alpha", al, 0.0, 1.0)? },
            (None, Some(a), Some(k)) => MirrorMode::from_packet(a, k).map_err(|e| CliError::invalid("params.a", e))?,
            (None, _, _) => return Err(CliError::invalid("params.alpha", "general mode needs alpha, or a and k")),
            _ => return Err(CliError::invalid("params.alpha", "give either alpha or a and k, not both")),
        },
        other => return Err(CliError::invalid("params.mode", format!("`{other}` is not PI, PS or general"))),
    };
    p.finish()?;
    Ok(mzi_report(&MziParams { theta, mode, dp_detector: dp })?)
}

fn build_spins(p: &Params) -> CliResult<ScenarioReport> {
    let n = p.usize("n", 10)?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let a = p.opt_complex("a")?.unwrap_or(h);
    let b = match p.opt_complex("b")? {
        Some(b) => b,
        None => C64::new((1.0 - a.norm_sqr()).max(0.0).sqrt(), 0.0),
    };
    p.finish()?;
    if n > crate::observers::MAX_SPINS {
        return Err(CliError::invalid("params.n", format!("at most {} spins", crate::observers::MAX_SPINS)));
    }
    Ok(spins_report(n, a, b)?)
}

fn build_observers(p: &Params) -> CliResult<ScenarioReport> {
    let case = p.usize("case", 1)?;
    if !(1..=3).contains(&case) {
        return Err(CliError::invalid("params.case", "must be 1, 2 or 3"));
    }
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let amplitudes = p.complex_list("amplitudes")?.unwrap_or_else(|| vec![h, h]);
    let second_basis = p.complex_matrix("second_basis")?;
    p.finish()?;
    Ok(observers_report(case as u8, &CaseConfig { amplitudes, second_basis })?)
}

fn profile(p: &Params, prefix: &str, default: &str) -> CliResult<Profile> {
    let kind = p.string(prefix, default)?;
    let key = |s: &str| format!("{prefix}_{s}");
    Ok(match kind.as_str() {
        "uniform" => Profile::Uniform,
        "delta" => Profile::Delta { cell: p.usize(&key("cell"), 0)? },
        "gaussian" => Profile::Gaussian { center: p.f64(&key("center"), 0.0)?, sigma: p.f64(&key("sigma"), 1.0)? },
        other => return Err(CliError::invalid(&Params::path(prefix), format!("`{other}` is not uniform, delta or gaussian"))),
    })
}

fn build_pointer(p: &Params) -> CliResult<ScenarioReport> {
    let (nq, q0, dq) = (p.usize("nq", 8)?, p.f64("q0", 0.0)?, p.f64("dq", 1.0)?);
    let (nr, dr) = (p.usize("nr", 64)?, p.f64("dr", 1.0)?);
    let phi = profile(p, "phi", "uniform")?;
    let eta = profile(p, "eta", "delta")?;
    // unused profile keys are accepted so sweeps can switch profiles
    for k in ["phi_cell", "phi_center", "phi_sigma", "eta_cell", "eta_center", "eta_sigma"] {
        p.get(k);
    }
    let times = p.f64_list("times", &[1.0])?;
    p.finish()?;
    let (q, r) = PointerParams::grids(nq, q0, dq, nr, dr).map_err(|e| CliError::invalid("params", e))?;
    Ok(pointer_report(&PointerParams { q, r, phi, eta, times })?)
}

fn build_stern_gerlach(p: &Params) -> CliResult<ScenarioReport> {
    let d = SternGerlachParams::default();
    let sg = SternGerlachParams {
        c_up: p.opt_complex("c_up")?.unwrap_or(d.c_up),
        c_down: p.opt_complex("c_down")?.unwrap_or(d.c_down),
        cells: p.usize("cells", d.cells)?,
        spacing: p.f64("spacing", d.spacing)?,
        sigma: p.f64("sigma", d.sigma)?,
        center: p.f64("center", d.center)?,
        phase0: p.f64("phase0", d.phase0)?,
        phase1: p.f64("phase1", d.phase1)?,
        flight_times: p.f64_list("flight_times", &d.flight_times)?,
        recombine: p.bool("recombine", d.recombine)?,
    };
    p.finish()?;
    Ok(stern_gerlach_report(&sg)?)
}

fn build_geiger(p: &Params) -> CliResult<ScenarioReport> {
    let g = GeigerParams {
        n_atoms: p.usize("n_atoms", 10)?,
        cascade: p.f64("cascade", 1.0)?,
        inside: p.f64("inside", std::f64::consts::FRAC_1_SQRT_2)?,
        threshold: p.opt_usize("threshold")?,
        epsilon: p.f64("epsilon", 1e-6)?,
    };
    p.finish()?;
    if g.n_atoms > crate::scenarios::geiger::MAX_ATOMS {
        return Err(CliError::invalid("params.n_atoms", format!("at most {} atoms", crate::scenarios::geiger::MAX_ATOMS)));
    }
    Ok(geiger_report(&g)?)
}

/// Builds the report of one scenario run.
pub fn scenario_report(scenario: &str, params: &Table) -> CliResult<ScenarioReport> {
    let p = Params::new(params);
    match scenario {
        "mzi" => build_mzi(&p),
        "approx" => {
            let alpha = range_check("alpha", p.f64("alpha", 0.1)?, 0.0, 1.0)?;
            p.finish()?;
            Ok(approx_report(alpha)?)
        }
        "spins" => build_spins(&p),
        "observers" => build_observers(&p),
        "pointer" => build_pointer(&p),
        "stern_gerlach" => build_stern_gerlach(&p),
        "geiger" => build_geiger(&p),
        other => Err(CliError::invalid("scenario", format!("unknown scenario `{other}`"))),
    }
}

/// Rendered output of a run and whether every assertion held.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub passed: bool,
}

pub fn execute(cfg: &RunConfig) -> CliResult<RunOutput> {
    match &cfg.sweep {
        None => {
            let r = scenario_report(&cfg.scenario, &cfg.params)?;
            let text = match cfg.format {
                Format::Json => r.to_json(),
                Format::Csv => r.to_csv(),
                Format::Tree => match &r.tree {
                    Some(t) => {
                        let mut s = t.to_json();
                        s.push('\n');
                        s
                    }
                    None => return Err(CliError::new(EXIT_NO_TREE, format!("scenario `{}` produces no world tree", cfg.scenario))),
                },
            };
            Ok(RunOutput { text, passed: r.passed() })
        }
        Some((param, values)) => {
            if cfg.format == Format::Tree {
                return Err(CliError::invalid("output.format", "tree output needs a single run, not a sweep"));
            }
            let reports: Vec<CliResult<ScenarioReport>> = values
                .par_iter()
                .map(|v| {
                    let mut params = cfg.params.clone();
                    params.insert(param.clone(), v.clone());
                    scenario_report(&cfg.scenario, &params)
                })
                .collect();
            let reports = reports.into_iter().collect::<CliResult<Vec<_>>>()?;
            let passed = reports.iter().all(ScenarioReport::passed);
            let text = match cfg.format {
                Format::Csv => {
                    let mut out = format!("{},{}\r\n", crate::report::csv_field(param), reports[0].to_csv().lines().next().unwrap_or(""));
                    for (v, r) in values.iter().zip(&reports) {
                        for line in r.to_csv().lines().skip(1) {
                            out.push_str(&format!("{},{line}\r\n", crate::report::csv_field(&toml_scalar(v))));
                        }
                    }
                    out
                }
                _ => {
                    let sweep = json!({
                        "scenario": cfg.scenario,
                        "sweep": { "param": param, "values": values.iter().map(toml_to_json).collect::<Vec<_>>() },
                        "runs": reports.iter().map(ScenarioReport::to_value).collect::<Vec<_>>(),
                    });
                    let mut s = serde_json::to_string_pretty(&sweep).expect("sweep serializes");
                    s.push('\n');
                    s
                }
            };
            Ok(RunOutput { text, passed })
        }
    }
}

fn toml_scalar(v: &TomlValue) -> String {
    match v {
        TomlValue::String(s) => s.clone(),
        TomlValue::Float(f) => crate::numfmt::format_g(*f, 12),
        other => other.to_string(),
    }
}

fn toml_to_json(v: &TomlValue) -> Value {
    match v {
        TomlValue::Float(f) => crate::report::num(*f),
        other => serde_json::to_value(other).unwrap_or(Value::Null),
    }
}

fn output_path(path: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_VAR).map(PathBuf::from);
    match (dir, path) {
        (Some(d), Some(p)) => Some(d.join(p.file_name().unwrap_or(p.as_os_str()))),
        (Some(d), None) => Some(d.join(default_name)),
        (None, Some(p)) => Some(p.to_path_buf()),
        (None, None) => None,
    }
}

fn emit(text: &str, path: Option<&Path>, default_name: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match output_path(path, default_name) {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::new(EXIT_FAIL, format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&p, text).map_err(|e| CliError::new(EXIT_FAIL, format!("{}: {e}", p.display())))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::new(EXIT_FAIL, e.to_string())),
    }
}

fn cmd_run(config: &Path, set: &[String], format: Option<Format>, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<i32> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::new(EXIT_FAIL, format!("{}: {e}", config.display())))?;
    let mut table = parse_config(&config.display().to_string(), &text)?;
    apply_overrides(&mut table, set)?;
    let mut cfg = load_config(table)?;
    if let Some(f) = format {
        cfg.format = f;
    }
    let out = out.map(Path::to_path_buf).or_else(|| cfg.path.clone());
    let ext = match cfg.format {
        Format::Csv => "csv",
        _ => "json",
    };
    let res = execute(&cfg)?;
    emit(&res.text, out.as_deref(), &format!("{}.{ext}", cfg.scenario), stdout)?;
    Ok(if res.passed { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_verify(suite: &str, seed: u64, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<i32> {
    if crate::verify::trials_of(suite).is_none() {
        return Err(CliError::new(EXIT_UNKNOWN_SUITE, format!("unknown suite `{suite}` (known: {})", crate::verify::SUITES.join(", "))));
    }
    let r = verify(suite, seed)?;
    emit(&r.to_json(), out, &format!("verify-{suite}-{seed}.json"), stdout)?;
    Ok(if r.passed() { EXIT_OK } else { EXIT_FAIL })
}

/// Tree rendering of a JSON report.
pub fn export_tree(report: &str, style: Style) -> CliResult<String> {
    let v: Value = serde_json::from_str(report).map_err(|e| CliError::new(EXIT_PARSE, format!("{}:{}: {e}", e.line(), e.column())))?;
    let tree = match v.get("tree") {
        Some(t) if !t.is_null() => t.clone(),
        _ => return Err(CliError::new(EXIT_NO_TREE, "report has no world tree")),
    };
    let tree: WorldTree = serde_json::from_value(tree).map_err(|e| CliError::invalid("tree", e))?;
    Ok(match style {
        Style::Graphviz => tree.to_graphviz(),
        Style::Json => {
            let mut s = tree.to_json();
            s.push('\n');
            s
        }
    })
}

fn cmd_export(report: &Path, style: Style, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<i32> {
    let text = std::fs::read_to_string(report).map_err(|e| CliError::new(EXIT_FAIL, format!("{}: {e}", report.display())))?;
    let rendered = export_tree(&text, style)?;
    let ext = if style == Style::Graphviz { "dot" } else { "json" };
    emit(&rendered, out, &format!("tree.{ext}"), stdout)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_has_position() {
        let e = parse_config("x.cfg", "scenario = \"mzi\"\n[params\n").unwrap_err();
        assert_eq!(e.code, EXIT_PARSE);
        assert!(e.message.starts_with("x.cfg:2:"), "{}", e.message);
    }

    #[test]
    fn validation_paths() {
        let mut t = parse_config("c", "scenario = \"mzi\"\n[params]\ntheta = \"x\"\n").unwrap();
        let cfg = load_config(t.clone()).unwrap();
        let e = execute(&cfg).unwrap_err();
        assert_eq!((e.code, e.message.as_str()), (EXIT_VALIDATION, "params.theta: expected a number"));
        apply_overrides(&mut t, &["theta=1.0".into(), "bogus=1".into()]).unwrap();
        let e = execute(&load_config(t).unwrap()).unwrap_err();
        assert_eq!(e.message, "params.bogus: unknown parameter");
        let t = parse_config("c", "scenario = \"mzi\"\n[sweep]\nparam = \"n\"\nvalues = [1]\n").unwrap();
        assert_eq!(load_config(t).unwrap_err().message, "sweep.param: `n` is not a parameter of `mzi`");
    }

    #[test]
    fn overrides_parse_values() {
        let mut t = Table::new();
        apply_overrides(&mut t, &["mode=PS".into(), "theta=1.5".into(), "output.format=csv".into()]).unwrap();
        assert_eq!(t["params"]["mode"].as_str(), Some("PS"));
        assert_eq!(t["params"]["theta"].as_float(), Some(1.5));
        assert_eq!(t["output"]["format"].as_str(), Some("csv"));
    }
}
