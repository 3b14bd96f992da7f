//! Command-line front end of the `netbell` binary.
//!
//! Every subcommand builds a [`Report`] that is rendered as text (7
//! significant digits), JSON or CSV (17 significant digits). A TOML
//! key-value file given with `--config` supplies defaults for any flag not
//! passed explicitly; `--save-config` writes the fully resolved
//! [`RunConfig`], which replays the same run on its own.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::bellfunc::{
    bounds, evaluate_state, noise_threshold, original_noise_threshold, s_functional, seesaw_quantum_max, xi_critical,
    SeesawOptions, SeesawStatus,
};
use crate::certifier::verify_proof_chain;
use crate::certifier::simplex::SimplexOptions;
use crate::certifier::{certify_losr_bound_with, max_over_nosignaling, Ablation, LpStatus, SolveOptions};
use crate::error::Error;
use crate::expsim::{
    fidelity_ghz3, fidelity_ghz4, linear_grid, read_expectations_csv, simulate_ghz, xi_curve, Allocation, ShotPlan,
};
use crate::netcore::{
    are_isomorphic, build_theorem_inflation, gamma_vector, isomorphism_classes, oracle_isomorphic, validate_inflation,
    InflationSpec, PartyPair,
};
use crate::quantum::{generalized_ghz, ghz, standard_settings, MeasurementScenario, Observable};

/// Environment variable holding the default thread cap.
pub const THREADS_ENV: &str = "NETBELL_THREADS";

const TEXT_DIGITS: usize = 7;
const EXACT_DIGITS: usize = 17;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed files.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed.
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::DegenerateConditioning(_) | Error::SingularDenominator(_) | Error::ZeroCount(_) => {
                CliError::Compute(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "netbell", version, about = "Network Bell tests: evaluation, LP certification and experiment simulation")]
pub struct Cli {
    /// Master seed for every random stream [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format [default: text]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML key-value file with defaults for any flag not given explicitly
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker thread cap [default: $NETBELL_THREADS, else all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the resolved run configuration to FILE before running
    #[arg(long, global = true, value_name = "FILE")]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
pub enum Command {
    /// Evaluate S_N on a (generalized) GHZ state under white noise
    Evaluate(EvaluateArgs),
    /// Scan S_N over xi or visibility, or compare noise thresholds
    Scan(ScanArgs),
    /// Certify the LOSR bound by linear programming and check the derivation
    Certify(CertifyArgs),
    /// Simulate finite-statistics experiments
    Simulate(SimulateArgs),
    /// Fidelity and visibility from measured expectation values
    Fidelity(FidelityArgs),
    /// Gamma vectors and isomorphism classes of an inflation
    Isomorphism(IsomorphismArgs),
    /// See-saw search for the quantum maximum of S_N
    Optimize(OptimizeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Evaluate(_) => "evaluate",
            Command::Scan(_) => "scan",
            Command::Certify(_) => "certify",
            Command::Simulate(_) => "simulate",
            Command::Fidelity(_) => "fidelity",
            Command::Isomorphism(_) => "isomorphism",
            Command::Optimize(_) => "optimize",
        }
    }

    fn params(&self) -> Result<toml::Table, toml::ser::Error> {
        match self {
            Command::Evaluate(a) => toml::Table::try_from(a),
            Command::Scan(a) => toml::Table::try_from(a),
            Command::Certify(a) => toml::Table::try_from(a),
            Command::Simulate(a) => toml::Table::try_from(a),
            Command::Fidelity(a) => toml::Table::try_from(a),
            Command::Isomorphism(a) => toml::Table::try_from(a),
            Command::Optimize(a) => toml::Table::try_from(a),
        }
    }
}

const COMMANDS: [&str; 7] = ["evaluate", "scan", "certify", "simulate", "fidelity", "isomorphism", "optimize"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Ghz,
    Gghz,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = StateKind::Ghz)]
    pub state: StateKind,
    /// Generalized-GHZ parameter in [-1, 1] (only with --state gghz)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub xi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Standard error of a measured S; adds the violation in standard deviations
    #[arg(long)]
    pub std_error: Option<f64>,
    /// JSON file of measurement settings (default: the standard settings)
    #[arg(long, value_name = "FILE")]
    pub settings: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanParameter {
    Xi,
    Visibility,
    /// Noise thresholds of S_N and of the original inequality for N = 3..=max-n
    Thresholds,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = ScanParameter::Xi)]
    pub parameter: ScanParameter,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Visibility of the noisy curve in a xi scan
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Largest N of the threshold comparison
    #[arg(long, default_value_t = 12)]
    pub max_n: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Maximize over the no-signaling polytope of the N original parties only
    #[arg(long)]
    pub no_signaling_only: bool,
    /// Remove the isomorphism equalities from the inflation LP
    #[arg(long)]
    pub drop_isomorphism: bool,
    /// Do not run the step-by-step derivation checks
    #[arg(long)]
    pub skip_proof: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_pivots: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Total events, split equally over the setting tuples
    #[arg(long, default_value_t = crate::expsim::EXPERIMENT_EVENTS)]
    pub events: u64,
    /// Expected number of setting tuples (checked against 2^N)
    #[arg(long)]
    pub settings_count: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FidelityArgs {
    /// CSV with columns basis_label, value, std_error
    #[arg(long, value_name = "FILE")]
    pub file: PathBuf,
    /// Party count (default: inferred from the basis labels)
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct IsomorphismArgs {
    /// Inflation used when no matrix file is given
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Incidence matrix file (`N k` header, then kN rows of 0/1)
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Party pair such as `B,C'`; prints its gamma vector
    #[arg(long = "pair", value_name = "P,Q")]
    pub pair: Vec<String>,
    /// Two pairs such as `A,B:A',B'`; decides whether they are isomorphic
    #[arg(long = "compare", value_name = "P,Q:R,S")]
    pub compare: Vec<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Also optimize the generalized-GHZ parameter
    #[arg(long)]
    pub optimize_xi: bool,
}

/// Everything needed to replay a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub format: Format,
    pub threads: usize,
    #[serde(flatten)]
    pub params: toml::Table,
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| usage(format!("cannot serialize run configuration: {e}")))
    }
}

/// A scalar or list cell of a report.
#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Int(i64),
    Num(f64),
    Str(String),
    Bool(bool),
    List(Vec<Val>),
    Null,
}

impl From<f64> for Val {
    fn from(v: f64) -> Self {
        Val::Num(v)
    }
}

impl From<usize> for Val {
    fn from(v: usize) -> Self {
        Val::Int(v as i64)
    }
}

impl From<u64> for Val {
    fn from(v: u64) -> Self {
        Val::Int(v as i64)
    }
}

impl From<bool> for Val {
    fn from(v: bool) -> Self {
        Val::Bool(v)
    }
}

impl From<&str> for Val {
    fn from(v: &str) -> Self {
        Val::Str(v.to_string())
    }
}

impl From<String> for Val {
    fn from(v: String) -> Self {
        Val::Str(v)
    }
}

impl<T: Into<Val>> From<Option<T>> for Val {
    fn from(v: Option<T>) -> Self {
        v.map_or(Val::Null, Into::into)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Val>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// Command name; JSON output carries `netbell/<kind>/v1` as its schema tag.
    pub kind: String,
    pub fields: Vec<(String, Val)>,
    pub tables: Vec<Table>,
    /// Nonzero when the report describes a failed computation.
    pub exit_code: i32,
}

impl Report {
    fn new(kind: &str) -> Self {
        Self { kind: kind.into(), fields: Vec::new(), tables: Vec::new(), exit_code: 0 }
    }

    fn push(&mut self, key: &str, v: impl Into<Val>) {
        self.fields.push((key.into(), v.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Val> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            out.push_str(&format!("{k} = {}\n", cell(v, TEXT_DIGITS)));
        }
        for t in &self.tables {
            out.push_str(&format!("\n[{}]\n", t.name));
            let cells: Vec<Vec<String>> = std::iter::once(t.columns.clone())
                .chain(t.rows.iter().map(|r| r.iter().map(|v| cell(v, TEXT_DIGITS)).collect()))
                .collect();
            let widths: Vec<usize> =
                (0..t.columns.len()).map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
            for row in cells {
                let padded: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
                out.push_str(padded.join("  ").trim_end());
                out.push('\n');
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("schema".into(), format!("netbell/{}/v1", self.kind).into());
        for (k, v) in &self.fields {
            obj.insert(k.clone(), json_val(v));
        }
        for t in &self.tables {
            let rows = t
                .rows
                .iter()
                .map(|r| {
                    let m: serde_json::Map<String, serde_json::Value> =
                        t.columns.iter().cloned().zip(r.iter().map(json_val)).collect();
                    serde_json::Value::Object(m)
                })
                .collect();
            obj.insert(t.name.clone(), serde_json::Value::Array(rows));
        }
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact17(PrettyFormatter::new()));
        serde::Serialize::serialize(&serde_json::Value::Object(obj), &mut ser).expect("in-memory JSON");
        buf.push(b'\n');
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    fn render_csv(&self) -> String {
        let mut out = Vec::new();
        if self.tables.is_empty() {
            let mut w = csv::Writer::from_writer(&mut out);
            let _ = w.write_record(["key", "value"]);
            for (k, v) in &self.fields {
                let _ = w.write_record([k.clone(), cell(v, EXACT_DIGITS)]);
            }
            let _ = w.flush();
            drop(w);
            return String::from_utf8(out).expect("CSV is UTF-8");
        }
        for (k, v) in &self.fields {
            let _ = writeln!(out, "# {k} = {}", cell(v, EXACT_DIGITS));
        }
        let many = self.tables.len() > 1;
        for (i, t) in self.tables.iter().enumerate() {
            if many {
                if i > 0 {
                    out.push(b'\n');
                }
                let _ = writeln!(out, "# table: {}", t.name);
            }
            let mut w = csv::Writer::from_writer(&mut out);
            let _ = w.write_record(&t.columns);
            for r in &t.rows {
                let _ = w.write_record(r.iter().map(|v| cell(v, EXACT_DIGITS)));
            }
            let _ = w.flush();
        }
        String::from_utf8(out).expect("CSV is UTF-8")
    }
}

/// `x` rounded to `digits` significant digits, positional unless the
/// exponent is below -5 or at least `digits`. Trailing zeros are kept.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, x);
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if exp < -5 || exp >= digits as i32 {
        return sci;
    }
    format!("{:.*}", (digits as i32 - 1 - exp) as usize, x)
}

fn cell(v: &Val, digits: usize) -> String {
    match v {
        Val::Int(i) => i.to_string(),
        Val::Num(x) => format_sig(*x, digits),
        Val::Str(s) => s.clone(),
        Val::Bool(b) => b.to_string(),
        Val::List(items) => items.iter().map(|i| cell(i, digits)).collect::<Vec<_>>().join("; "),
        Val::Null => String::new(),
    }
}

fn json_val(v: &Val) -> serde_json::Value {
    match v {
        Val::Int(i) => (*i).into(),
        Val::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
        Val::Str(s) => s.clone().into(),
        Val::Bool(b) => (*b).into(),
        Val::List(items) => serde_json::Value::Array(items.iter().map(json_val).collect()),
        Val::Null => serde_json::Value::Null,
    }
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Exact17(PrettyFormatter<'static>);

impl Formatter for Exact17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_sig(value, EXACT_DIGITS).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

const GLOBAL_VALUE_FLAGS: [&str; 5] = ["--seed", "--format", "--config", "--threads", "--save-config"];
const GLOBAL_KEYS: [&str; 3] = ["seed", "format", "threads"];

fn flag_given(argv: &[String], flag: &str) -> bool {
    argv.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}

/// Value of a `--flag v` / `--flag=v` pair in the raw arguments.
fn raw_value(argv: &[String], flag: &str) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == flag {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix(&format!("{flag}=")) {
            return Some(v.to_string());
        }
    }
    None
}

/// Position of the subcommand token, skipping values of global flags.
fn subcommand_position(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_VALUE_FLAGS.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            return COMMANDS.contains(&a.as_str()).then_some(i);
        }
        i += 1;
    }
    None
}

fn toml_to_args(key: &str, value: &toml::Value, out: &mut Vec<String>) -> Result<(), CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    match value {
        toml::Value::Boolean(true) => out.push(flag),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) => {
            for item in items {
                toml_to_args(key, item, out)?;
            }
        }
        toml::Value::String(s) => out.extend([flag, s.clone()]),
        toml::Value::Integer(i) => out.extend([flag, i.to_string()]),
        toml::Value::Float(x) => out.extend([flag, x.to_string()]),
        other => return Err(usage(format!("config key {key:?} has unsupported value {other}"))),
    }
    Ok(())
}

/// Inserts config entries that the explicit arguments do not override.
fn merge_config(argv: Vec<String>, path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("malformed config {}: {e}", path.display())))?;
    let explicit_cmd = subcommand_position(&argv);
    let config_cmd = match table.get("command") {
        None => None,
        Some(toml::Value::String(s)) if COMMANDS.contains(&s.as_str()) => Some(s.clone()),
        Some(other) => return Err(usage(format!("config command {other} is not a subcommand"))),
    };
    let (mut globals, mut params) = (Vec::new(), Vec::new());
    for (key, value) in &table {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        if flag_given(&argv, &flag) {
            continue;
        }
        if GLOBAL_KEYS.contains(&key.as_str()) {
            toml_to_args(key, value, &mut globals)?;
        } else {
            toml_to_args(key, value, &mut params)?;
        }
    }
    let mut merged = vec![argv[0].clone()];
    merged.extend(globals);
    match explicit_cmd {
        Some(p) => {
            let same = config_cmd.as_deref().is_none_or(|c| c == argv[p]);
            merged.extend(argv[1..=p].iter().cloned());
            if same {
                merged.extend(params);
            }
            merged.extend(argv[p + 1..].iter().cloned());
        }
        None => {
            merged.extend(argv[1..].iter().cloned());
            if let Some(c) = config_cmd {
                merged.push(c);
                merged.extend(params);
            }
        }
    }
    Ok(merged)
}

fn default_threads() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs the command line `argv` (program name first), writing the report to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Option<Vec<String>> = argv.into_iter().map(|a| a.into().into_string().ok()).collect();
    let Some(mut argv) = argv else {
        let _ = writeln!(err, "error: arguments must be valid UTF-8");
        return 2;
    };
    if argv.is_empty() {
        argv.push("netbell".into());
    }
    if let Some(path) = raw_value(&argv, "--config") {
        argv = match merge_config(argv, Path::new(&path)) {
            Ok(a) => a,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return e.exit_code();
            }
        };
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
            };
        }
    };
    match execute(cli) {
        Ok((report, format)) => {
            if out.write_all(report.render(format).as_bytes()).is_err() {
                return 2;
            }
            report.exit_code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(Report, Format), CliError> {
    let Some(command) = cli.command else {
        return Err(usage("no subcommand given; see `netbell --help`"));
    };
    let threads = match cli.threads {
        Some(t) => t,
        None => default_threads()?,
    };
    if threads == 0 {
        return Err(usage("--threads must be positive"));
    }
    let config = RunConfig {
        command: command.name().into(),
        seed: cli.seed.unwrap_or(0),
        format: cli.format.unwrap_or(Format::Text),
        threads,
        params: command.params().map_err(|e| usage(format!("cannot serialize arguments: {e}")))?,
    };
    if let Some(path) = &cli.save_config {
        std::fs::write(path, config.to_toml()?)
            .map_err(|e| usage(format!("cannot write config {}: {e}", path.display())))?;
    }
    Ok((run_command(&command, &config)?, config.format))
}

/// Executes one subcommand under a resolved configuration.
pub fn run_command(command: &Command, config: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Simulate(a) => cmd_simulate(a, config),
        Command::Fidelity(a) => cmd_fidelity(a),
        Command::Isomorphism(a) => cmd_isomorphism(a),
        Command::Optimize(a) => cmd_optimize(a, config),
    }
}

#[derive(Deserialize)]
struct SettingsFile {
    /// Bloch vectors per party and setting.
    settings: Vec<Vec<[f64; 3]>>,
}

/// Reads `{"settings": [[[x, y, z], ...], ...]}`.
pub fn read_settings_file(path: &Path) -> Result<MeasurementScenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let file: SettingsFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("malformed settings {}: {e}", path.display())))?;
    let settings = file
        .settings
        .into_iter()
        .map(|party| party.into_iter().map(Observable::from_direction).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MeasurementScenario::new(settings)?)
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<Report, CliError> {
    let functional = s_functional(a.n)?;
    let b = bounds(a.n)?;
    let pure = match a.state {
        StateKind::Ghz if a.xi != 0.0 => return Err(usage("--xi needs --state gghz")),
        StateKind::Ghz => ghz(a.n)?,
        StateKind::Gghz => generalized_ghz(a.n, a.xi)?,
    };
    let state = pure.with_visibility(a.visibility)?;
    let scenario = match &a.settings {
        Some(p) => read_settings_file(p)?,
        None => standard_settings(a.n)?,
    };
    let s = evaluate_state(&functional, &state, &scenario)?;
    let mut r = Report::new("evaluate");
    r.push("n", a.n);
    r.push("state", if a.state == StateKind::Ghz { "ghz" } else { "gghz" });
    r.push("xi", a.xi);
    r.push("visibility", a.visibility);
    r.push("S", s);
    r.push("losr", b.losr);
    r.push("quantum", b.quantum);
    r.push("algebraic", b.algebraic);
    r.push("violation", s - b.losr);
    r.push("violates", s - b.losr > 1e-12);
    if let Some(se) = a.std_error {
        if !(se > 0.0 && se.is_finite()) {
            return Err(usage(format!("--std-error must be positive, got {se}")));
        }
        r.push("std_error", se);
        r.push("sigma_violation", (s - b.losr) / se);
    }
    Ok(r)
}

/// First grid point where `ys` crosses `level`, by linear interpolation.
fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    (1..xs.len()).find_map(|i| {
        let (d0, d1) = (ys[i - 1] - level, ys[i] - level);
        if d0 == 0.0 {
            Some(xs[i - 1])
        } else if d0 * d1 < 0.0 || d1 == 0.0 {
            Some(xs[i - 1] + (xs[i] - xs[i - 1]) * d0 / (d0 - d1))
        } else {
            None
        }
    })
}

fn cmd_scan(a: &ScanArgs) -> Result<Report, CliError> {
    let mut r = Report::new("scan");
    r.push("parameter", format!("{:?}", a.parameter).to_lowercase());
    match a.parameter {
        ScanParameter::Thresholds => {
            if a.max_n < 3 {
                return Err(usage("--max-n must be at least 3"));
            }
            let mut t = Table::new("thresholds", &["n", "eta", "eta_original", "eta_below_original"]);
            let mut ordered = true;
            for n in 3..=a.max_n {
                let (e, o) = (noise_threshold(n)?, original_noise_threshold(n)?);
                ordered &= e < o;
                t.rows.push(vec![n.into(), e.into(), o.into(), (e < o).into()]);
            }
            r.push("max_n", a.max_n);
            r.push("ordering_holds", ordered);
            r.tables.push(t);
        }
        ScanParameter::Xi => {
            let grid = linear_grid(a.from, a.to, a.points)?;
            let curve = xi_curve(a.n, &grid, a.visibility)?;
            let losr = bounds(a.n)?.losr;
            let s: Vec<f64> = curve.iter().map(|p| p.s).collect();
            let s_noisy: Vec<f64> = curve.iter().map(|p| p.s_noisy).collect();
            r.push("n", a.n);
            r.push("visibility", a.visibility);
            r.push("losr", losr);
            r.push("xi_critical", xi_critical());
            r.push("xi_crossing", crossing(&grid, &s, losr));
            r.push("xi_crossing_noisy", crossing(&grid, &s_noisy, losr));
            let mut t = Table::new("curve", &["xi", "S", "S_noisy"]);
            t.rows = curve.iter().map(|p| vec![p.xi.into(), p.s.into(), p.s_noisy.into()]).collect();
            r.tables.push(t);
        }
        ScanParameter::Visibility => {
            let grid = linear_grid(a.from, a.to, a.points)?;
            let functional = s_functional(a.n)?;
            let scenario = standard_settings(a.n)?;
            let pure = ghz(a.n)?;
            let s = grid
                .iter()
                .map(|&v| evaluate_state(&functional, &pure.clone().with_visibility(v)?, &scenario))
                .collect::<Result<Vec<f64>, _>>()?;
            let losr = bounds(a.n)?.losr;
            r.push("n", a.n);
            r.push("losr", losr);
            r.push("noise_threshold", noise_threshold(a.n)?);
            r.push("visibility_crossing", crossing(&grid, &s, losr));
            let mut t = Table::new("curve", &["visibility", "S"]);
            t.rows = grid.iter().zip(&s).map(|(&v, &s)| vec![v.into(), s.into()]).collect();
            r.tables.push(t);
        }
    }
    Ok(r)
}

fn cmd_certify(a: &CertifyArgs) -> Result<Report, CliError> {
    if !(3..=4).contains(&a.n) {
        return Err(usage(format!("certify supports n = 3 or 4, got {}", a.n)));
    }
    if a.no_signaling_only && a.drop_isomorphism {
        return Err(usage("--no-signaling-only and --drop-isomorphism are exclusive"));
    }
    let opts = SolveOptions {
        simplex: SimplexOptions { max_pivots: a.max_pivots, ..SimplexOptions::default() },
        ..SolveOptions::default()
    };
    let cert = if a.no_signaling_only {
        max_over_nosignaling(&s_functional(a.n)?)?
    } else {
        certify_losr_bound_with(a.n, Ablation { drop_isomorphism: a.drop_isomorphism }, &opts)?
    };
    let losr = bounds(a.n)?.losr;
    let mut r = Report::new("certify");
    r.push("n", a.n);
    r.push("problem", cert.problem.clone());
    r.push("status", cert.status.as_str());
    r.push("optimum", cert.optimum);
    r.push("losr", losr);
    r.push("gap", cert.optimum - losr);
    r.push("n_vars", cert.n_vars);
    r.push("n_rows", cert.n_rows);
    r.push("reduced_vars", cert.reduced_vars);
    r.push("reduced_rows", cert.reduced_rows);
    r.push("method", format!("{:?}", cert.method).to_lowercase());
    r.push("iterations", cert.iterations);
    r.push("max_violation", cert.max_violation);
    r.push("recomputed_optimum", cert.recomputed_optimum);
    r.push("active_rows", cert.active_rows);
    r.push("notes", Val::List(cert.notes.iter().map(|n| Val::Str(n.clone())).collect()));
    if cert.status != LpStatus::Optimal {
        r.exit_code = 1;
    }
    if !a.skip_proof {
        let proof = verify_proof_chain(a.n)?;
        r.push("proof_passed", proof.passed());
        let mut t = Table::new("proof", &["step", "passed", "detail"]);
        t.rows = proof.steps.iter().map(|s| vec![s.name.clone().into(), s.passed.into(), s.detail.clone().into()]).collect();
        r.tables.push(t);
        if !proof.passed() {
            r.exit_code = 1;
        }
    }
    Ok(r)
}

fn cmd_simulate(a: &SimulateArgs, config: &RunConfig) -> Result<Report, CliError> {
    let shape = s_functional(a.n)?.settings_shape();
    let tuples: usize = shape.iter().product();
    if let Some(c) = a.settings_count {
        if c != tuples {
            return Err(usage(format!("--settings-count {c} does not match the {tuples} setting tuples of S_{}", a.n)));
        }
    }
    let plan = ShotPlan::equal(&shape, a.events, config.seed)?;
    let rep = simulate_ghz(a.n, a.visibility, &plan, a.replications, config.threads)?;
    let mut r = Report::new("simulate");
    r.push("n", rep.n);
    r.push("visibility", rep.visibility);
    r.push("events", rep.events);
    r.push("settings_count", tuples);
    r.push(
        "allocation",
        match rep.allocation {
            Allocation::EqualAssumed => "equal (assumed)",
            Allocation::Custom => "custom",
        },
    );
    r.push("replications", rep.replications);
    r.push("master_seed", rep.master_seed);
    r.push("estimate", rep.estimate);
    r.push("std_error", rep.std_error);
    r.push("bound", rep.bound);
    r.push("sigma_violation", rep.sigma_violation);
    if rep.replications > 1 {
        r.push("mean_estimate", rep.mean_estimate);
        r.push("mean_std_error", rep.mean_std_error);
        r.push("empirical_sd", rep.empirical_sd);
        let mut t = Table::new("replications", &["replication", "estimate", "std_error"]);
        t.rows = rep
            .estimates
            .iter()
            .zip(&rep.std_errors)
            .enumerate()
            .map(|(i, (&e, &s))| vec![i.into(), e.into(), s.into()])
            .collect();
        r.tables.push(t);
    }
    Ok(r)
}

fn cmd_fidelity(a: &FidelityArgs) -> Result<Report, CliError> {
    let file = std::fs::File::open(&a.file).map_err(|e| usage(format!("cannot open {}: {e}", a.file.display())))?;
    let values = read_expectations_csv(file).map_err(|e| usage(format!("{}: {e}", a.file.display())))?;
    let n = match a.n {
        Some(n) => n,
        None => values
            .iter()
            .find(|v| v.basis_label != "POP")
            .map(|v| v.basis_label.len())
            .ok_or_else(|| usage("cannot infer n: no Pauli basis labels"))?,
    };
    let est = match n {
        3 => fidelity_ghz3(&values)?,
        4 => fidelity_ghz4(&values)?,
        _ => return Err(usage(format!("fidelity supports n = 3 or 4, got {n}"))),
    };
    let mut r = Report::new("fidelity");
    r.push("n", est.n);
    r.push("fidelity", est.fidelity);
    r.push("std_error", est.std_error);
    r.push("visibility", est.visibility);
    r.push("visibility_std_error", est.visibility_std_error);
    Ok(r)
}

fn parse_pair(spec: &InflationSpec, text: &str) -> Result<PartyPair, CliError> {
    let (p, q) = text.split_once(',').ok_or_else(|| usage(format!("pair {text:?} must look like `B,C'`")))?;
    Ok((spec.party_index(p)?, spec.party_index(q)?))
}

fn pair_label(spec: &InflationSpec, (a, b): PartyPair) -> String {
    format!("{},{}", spec.party_label(a), spec.party_label(b))
}

fn cmd_isomorphism(a: &IsomorphismArgs) -> Result<Report, CliError> {
    let spec = match &a.matrix {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            InflationSpec::from_text(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => build_theorem_inflation(a.n)?,
    };
    let validity = validate_inflation(&spec);
    let mut r = Report::new("isomorphism");
    r.push("n_types", spec.n_types);
    r.push("order", spec.order);
    r.push("valid_non_fan_out", validity.is_valid());
    let mut pairs = Table::new("pairs", &["pair", "gamma"]);
    for text in &a.pair {
        let p = parse_pair(&spec, text)?;
        if p.0 == p.1 {
            return Err(usage(format!("pair {text:?} repeats a party")));
        }
        pairs.rows.push(vec![pair_label(&spec, p).into(), gamma_vector(&spec, p.0, p.1)?.to_string().into()]);
    }
    let mut comparisons = Table::new("comparisons", &["first", "second", "isomorphic", "oracle"]);
    for text in &a.compare {
        let (x, y) = text.split_once(':').ok_or_else(|| usage(format!("comparison {text:?} must look like `A,B:A',B'`")))?;
        let (p, q) = (parse_pair(&spec, x)?, parse_pair(&spec, y)?);
        comparisons.rows.push(vec![
            pair_label(&spec, p).into(),
            pair_label(&spec, q).into(),
            are_isomorphic(&spec, p, q)?.into(),
            oracle_isomorphic(&spec, p, q)?.into(),
        ]);
    }
    let mut classes = Table::new("classes", &["class", "gamma", "members"]);
    for (i, class) in isomorphism_classes(&spec).iter().enumerate() {
        let g = gamma_vector(&spec, class[0].0, class[0].1)?;
        let members = class.iter().map(|&p| Val::Str(pair_label(&spec, p))).collect();
        classes.rows.push(vec![i.into(), g.to_string().into(), Val::List(members)]);
    }
    r.push("n_classes", classes.rows.len());
    r.tables.extend([pairs, comparisons, classes]);
    Ok(r)
}

fn cmd_optimize(a: &OptimizeArgs, config: &RunConfig) -> Result<Report, CliError> {
    let functional = s_functional(a.n)?;
    let opts = SeesawOptions {
        restarts: a.restarts,
        max_iter: a.max_iter,
        tol: a.tol,
        seed: config.seed,
        optimize_xi: a.optimize_xi,
        threads: config.threads,
    };
    let res = seesaw_quantum_max(a.n, &functional, &opts)?;
    let quantum = bounds(a.n)?.quantum;
    let mut r = Report::new("optimize");
    r.push("n", a.n);
    r.push("value", res.value);
    r.push("quantum_bound", quantum);
    r.push("gap", quantum - res.value);
    r.push("status", if res.status == SeesawStatus::Converged { "converged" } else { "not_converged" });
    r.push("iterations", res.iterations);
    r.push("best_restart", res.best_restart);
    r.push("restarts", res.restart_values.len());
    r.push("xi", res.xi);
    let mut t = Table::new("settings", &["party", "setting", "x", "y", "z"]);
    for (p, obs) in res.scenario.settings.iter().enumerate() {
        for (s, o) in obs.iter().enumerate() {
            let [x, y, z] = o.bloch();
            t.rows.push(vec![crate::netcore::type_letter(p).into(), s.into(), x.into(), y.into(), z.into()]);
        }
    }
    r.tables.push(t);
    Ok(r)
}
