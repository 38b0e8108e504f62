//! Command-line front end. Every run writes CSV data plus a
//! `manifest.json` holding the exact arguments, so `replay` can regenerate
//! the same files.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors, 1 for
//! domain and filesystem failures.

pub mod io;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::achievability::{gamma1, gamma2, integral_sum_rate, monte_carlo_p2_check, scheme_sum_rate, Partition, RateAllocationCurve};
use crate::distortion::{brute_force_wz_curve, rd_iterate, DistortionModel, Family, RDDomain, RdConfig};
use crate::error::Error;
use crate::iteration::{iterate, sum_rate_field, IterationConfig};
use crate::model::{FunctionSpec, ProductPmfGrid, Terminal};
use crate::oracles::{rho_star_field, ClosedForm};
use io::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "sumrate", version, about = "Minimum sum-rate surfaces for two-terminal interactive function computation")]
pub struct Cli {
    /// Worker threads (falls back to SUMRATE_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Alternating envelope iteration on the (p, q) grid.
    Iterate(IterateArgs),
    /// Message rates of the nested-rectangle scheme and their integral limit.
    Achievability(AchievabilityArgs),
    /// Sum-rate against a distortion budget at B.
    Rd(RdArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

/// `and-both`, `and-at-b`, or `custom:<8 symbols>` giving f_A then f_B in
/// the order (0,0), (0,1), (1,0), (1,1).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionArg {
    pub name: String,
    pub spec: FunctionSpec,
    pub closed_form: Option<ClosedForm>,
}

impl Serialize for FunctionArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

impl FromStr for FunctionArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (spec, closed_form) = match s {
            "and-both" => (FunctionSpec::and_both(), Some(ClosedForm::AndBoth)),
            "and-at-b" => (FunctionSpec::and_at_b(), Some(ClosedForm::AndAtB)),
            _ => match s.strip_prefix("custom:") {
                Some(code) => (code.parse::<FunctionSpec>().map_err(|e| e.to_string())?, None),
                None => return Err(format!("unknown function {s:?}; use and-both, and-at-b or custom:<8 symbols>")),
            },
        };
        Ok(Self {
            name: s.to_string(),
            spec,
            closed_form,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum StartArg {
    A,
    B,
}

impl From<StartArg> for Terminal {
    fn from(s: StartArg) -> Self {
        match s {
            StartArg::A => Terminal::A,
            StartArg::B => Terminal::B,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IterateArgs {
    #[arg(long, default_value = "and-at-b")]
    pub function: FunctionArg,
    /// Grid points per axis.
    #[arg(long, default_value_t = 201)]
    pub n: usize,
    #[arg(long = "t-max", default_value_t = 50)]
    pub t_max: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "a", ignore_case = true)]
    pub start: StartArg,
    /// Track the gap to the closed-form surface (AND examples only).
    #[arg(long)]
    pub oracle: bool,
    /// Write every intermediate field.
    #[arg(long)]
    pub history: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessagesArg {
    Integral,
    Count(usize),
}

impl Serialize for MessagesArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MessagesArg::Integral => s.serialize_str("integral"),
            MessagesArg::Count(t) => s.serialize_u64(*t as u64),
        }
    }
}

impl FromStr for MessagesArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "integral" {
            return Ok(Self::Integral);
        }
        let t: usize = s.parse().map_err(|_| format!("expected an even message count or \"integral\", got {s:?}"))?;
        if t == 0 || t % 2 == 1 {
            return Err(format!("message count must be even and positive, got {t}"));
        }
        Ok(Self::Count(t))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AchievabilityArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    /// `gamma1`, `gamma2`, `auto`, or `file:<csv of alpha,beta>`.
    #[arg(long, default_value = "auto")]
    pub curve: String,
    /// Even number of messages, or `integral` for the unbounded limit.
    #[arg(long, default_value = "integral")]
    pub messages: MessagesArg,
    /// Monte Carlo draws for the decoding check (0 skips it).
    #[arg(long = "mc-samples", default_value_t = 0)]
    pub mc_samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum RdMode {
    /// One message over a fixed side channel.
    WynerZiv,
    /// Rate-distortion of X alone (Y constant).
    SingleTerminal,
    /// Hamming cost on f_B over the full product grid.
    HammingZero,
}

#[derive(Debug, Args, Serialize)]
pub struct RdArgs {
    #[arg(long, value_enum)]
    pub mode: RdMode,
    /// P(X = 1) at which the rate curve is reported.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Crossover of the symmetric side channel (wyner-ziv).
    #[arg(long, default_value_t = 0.25)]
    pub crossover: f64,
    /// Side channel `w00,w01,w10,w11` as P(y | x); overrides --crossover.
    #[arg(long)]
    pub channel: Option<String>,
    /// Distortion table, rows `x,y,z,d`; Hamming on X by default.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Function for hamming-zero mode.
    #[arg(long, default_value = "and-at-b")]
    pub function: FunctionArg,
    /// Parameter grid points (product grid size in hamming-zero mode).
    #[arg(long = "np", alias = "n", default_value_t = 201)]
    pub n_param: usize,
    /// Distortion grid points (default 101, or 11 in hamming-zero mode).
    #[arg(long = "nd")]
    pub n_d: Option<usize>,
    /// Top of the distortion grid (default: table maximum).
    #[arg(long)]
    pub dmax: Option<f64>,
    #[arg(long = "t-max", default_value_t = 50)]
    pub t_max: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also run the direct test-channel search (wyner-ziv).
    #[arg(long)]
    pub search: bool,
    #[arg(long = "u-card", default_value_t = 3)]
    pub u_card: usize,
    #[arg(long)]
    pub history: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Output directory (default: the manifest's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Parse { .. } => CliError::Usage(e.to_string()),
            other => CliError::Failure(other),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the binary name), runs, returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let threads = cli.threads.or_else(|| std::env::var("SUMRATE_THREADS").ok().and_then(|v| v.parse().ok()));
    let outcome = match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(pool) => pool.install(|| dispatch(cli.command, recorded)),
        Err(e) => Err(CliError::Usage(format!("cannot start {threads:?} threads: {e}"))),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Failure(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, recorded: Vec<String>) -> CliResult<()> {
    let args = strip_global(recorded);
    match command {
        Command::Iterate(a) => cmd_iterate(&a, args),
        Command::Achievability(a) => cmd_achievability(&a, args),
        Command::Rd(a) => cmd_rd(&a, args),
        Command::Replay(a) => cmd_replay(&a),
    }
}

// thread count never changes outputs, so it is not part of the recipe
fn strip_global(args: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--threads" {
            skip = true;
        } else if !a.starts_with("--threads=") {
            out.push(a);
        }
    }
    out
}

/// Collects output paths and writes the manifest last.
struct Outputs {
    dir: Option<PathBuf>,
    files: Vec<String>,
    started: Instant,
}

impl Outputs {
    fn new(dir: Option<&Path>) -> CliResult<Self> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d).map_err(|e| CliError::Failure(Error::io(d, e)))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&Path) -> crate::error::Result<()>) -> CliResult<()> {
        if let Some(dir) = &self.dir {
            f(&dir.join(name)).map_err(CliError::Failure)?;
            self.files.push(name.to_string());
        }
        Ok(())
    }

    fn finish(mut self, subcommand: &str, args: Vec<String>, params: &impl Serialize, seed: u64) -> CliResult<()> {
        let Some(dir) = self.dir.clone() else { return Ok(()) };
        let parameters: BTreeMap<String, serde_json::Value> = match serde_json::to_value(params) {
            Ok(serde_json::Value::Object(map)) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        self.files.push("manifest.json".into());
        let manifest = RunManifest {
            subcommand: subcommand.into(),
            args,
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.files,
        };
        manifest.write(&dir.join("manifest.json")).map_err(CliError::Failure)
    }
}

fn cmd_iterate(a: &IterateArgs, recorded: Vec<String>) -> CliResult<()> {
    let cfg = IterationConfig::new(a.n, a.t_max, a.tol)?
        .with_history(a.history)
        .starting_with(a.start.into());
    let oracle = match (a.oracle, a.function.closed_form) {
        (false, _) => None,
        (true, Some(which)) => Some(rho_star_field(ProductPmfGrid::new(a.n)?, which)),
        (true, None) => return Err(CliError::Usage("--oracle needs and-both or and-at-b".into())),
    };
    let mut out = Outputs::new(a.out.as_deref())?;
    let result = iterate(&a.function.spec, &cfg, oracle.as_ref())?;

    for field in &result.history {
        let name = format!("rho_{:03}.csv", crate::iteration::message_count(field.label()));
        out.write(&name, |p| io::write_field_csv(p, field))?;
    }
    out.write("rho_final.csv", |p| io::write_field_csv(p, &result.last))?;
    out.write("rate_final.csv", |p| io::write_sum_rate_csv(p, &sum_rate_field(&result.last)))?;
    out.write("trace.csv", |p| io::write_trace_csv(p, &result.trace))?;

    let last = result.trace.records.last().expect("at least one step");
    println!("final field      {}", result.last.label());
    println!("steps            {}", result.trace.records.len());
    println!("converged        {}", result.trace.converged);
    println!("last sup change  {:.3e}", last.sup_change);
    if let Some(gap) = last.max_oracle_gap {
        println!("max oracle gap   {gap:.6e}");
    }
    out.finish("iterate", recorded, a, 0)
}

fn load_curve(a: &AchievabilityArgs) -> CliResult<RateAllocationCurve> {
    let curve = match a.curve.as_str() {
        "gamma1" => gamma1(a.p, a.q)?,
        "gamma2" => gamma2(a.p, a.q)?,
        "auto" if a.p <= a.q => gamma1(a.p, a.q)?,
        "auto" => gamma2(a.p, a.q)?,
        other => match other.strip_prefix("file:") {
            Some(path) => {
                let path = Path::new(path);
                if !path.exists() {
                    return Err(CliError::Usage(format!("curve file {} not found", path.display())));
                }
                RateAllocationCurve::from_csv(path, a.p, a.q)?
            }
            None => return Err(CliError::Usage(format!("unknown curve {other:?}"))),
        },
    };
    Ok(curve)
}

fn cmd_achievability(a: &AchievabilityArgs, recorded: Vec<String>) -> CliResult<()> {
    let curve = load_curve(a)?;
    let mut out = Outputs::new(a.out.as_deref())?;
    let integral = integral_sum_rate(&curve)?;

    match &a.messages {
        MessagesArg::Integral => {
            println!("integral {integral:.12}");
            out.write("integral.csv", |p| {
                std::fs::write(p, format!("integral\n{}\n", io::format_f64(integral))).map_err(|e| Error::io(p, e))
            })?;
        }
        MessagesArg::Count(t) => {
            let partition = Partition::uniform(t / 2)?;
            let rates = scheme_sum_rate(&curve, &partition)?;
            let mut text = String::from("message,terminal,rate\n");
            for (k, r) in rates.per_message.iter().enumerate() {
                let terminal = if k % 2 == 0 { "A" } else { "B" };
                text.push_str(&format!("{},{terminal},{}\n", k + 1, io::format_f64(*r)));
                println!("message {:4} {terminal} {r:.12}", k + 1);
            }
            println!("total    {:.12}", rates.total);
            println!("integral {integral:.12}");
            out.write("rates.csv", |p| std::fs::write(p, &text).map_err(|e| Error::io(p, e)))?;
        }
    }

    if a.mc_samples > 0 {
        let partition = match &a.messages {
            MessagesArg::Count(t) => Partition::uniform(t / 2)?,
            MessagesArg::Integral => Partition::uniform(64)?,
        };
        let report = monte_carlo_p2_check(&curve, &partition, a.mc_samples, a.seed)?;
        println!(
            "monte carlo      {} samples, {} decoding errors, {} chain violations",
            report.samples, report.decoding_errors, report.chain_violations
        );
        out.write("monte_carlo.json", |p| {
            let text = serde_json::to_string_pretty(&report).map_err(|e| Error::parse("report", e))?;
            std::fs::write(p, text + "\n").map_err(|e| Error::io(p, e))
        })?;
    }
    out.finish("achievability", recorded, a, a.seed)
}

fn parse_channel(s: &str) -> CliResult<[[f64; 2]; 2]> {
    let w: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad --channel {s:?}: {e}")))?;
    if w.len() != 4 {
        return Err(CliError::Usage(format!("--channel needs four entries, got {}", w.len())));
    }
    Ok([[w[0], w[1]], [w[2], w[3]]])
}

fn cmd_rd(a: &RdArgs, recorded: Vec<String>) -> CliResult<()> {
    let model = match (&a.model, a.mode) {
        (Some(_), RdMode::HammingZero) => {
            return Err(CliError::Usage("hamming-zero mode derives its table from --function".into()))
        }
        (Some(path), _) if !path.exists() => {
            return Err(CliError::Usage(format!("model file {} not found", path.display())))
        }
        (Some(path), _) => DistortionModel::from_csv(path)?,
        (None, RdMode::HammingZero) => {
            if !a.function.spec.f_a_is_constant() {
                return Err(CliError::Usage("hamming-zero mode needs a constant f_A (A's cost is zero)".into()));
            }
            DistortionModel::hamming_on_function(&a.function.spec.f_b)
        }
        (None, _) => DistortionModel::hamming_on_x(),
    };
    let model = match a.dmax {
        Some(d) => model.with_d_max(d)?,
        None => model,
    };
    // a constant table has d_max 0; the grid still needs a positive span
    let d_max = if model.d_max() > 0.0 { model.d_max() } else { 1.0 };
    let n_d = a.n_d.unwrap_or(if a.mode == RdMode::HammingZero { 11 } else { 101 });
    let domain = match a.mode {
        RdMode::WynerZiv => {
            let channel = match &a.channel {
                Some(s) => parse_channel(s)?,
                None => [[1.0 - a.crossover, a.crossover], [a.crossover, 1.0 - a.crossover]],
            };
            RDDomain::fixed_conditional(channel, a.n_param, n_d, d_max)?
        }
        RdMode::SingleTerminal => RDDomain::product_row(0.0, a.n_param, n_d, d_max)?,
        RdMode::HammingZero => RDDomain::product(a.n_param, n_d, d_max)?,
    };
    let t_max = if domain.has_b_lines() { a.t_max } else { 1 };
    let cfg = RdConfig::new(t_max, a.tol)?.with_history(a.history);
    let mut out = Outputs::new(a.out.as_deref())?;
    let result = rd_iterate(domain, &model, &cfg)?;

    out.write("rho_final.csv", |p| io::write_rd_field_csv(p, &result.last))?;
    out.write("trace.csv", |p| io::write_trace_csv(p, &result.trace))?;

    if domain.has_b_lines() {
        for field in &result.history {
            let name = format!("rho_{:03}_d0.csv", crate::iteration::message_count(field.label()));
            let slice = field.product_slice(0)?;
            out.write(&name, |p| io::write_field_csv(p, &slice))?;
        }
        let slice = result.last.product_slice(0)?;
        out.write("rho_final_d0.csv", |p| io::write_field_csv(p, &slice))?;
        println!("final field      {}", result.last.label());
        println!("steps            {}", result.trace.records.len());
        println!("converged        {}", result.trace.converged);
    } else {
        let i = domain.nearest_param(a.p);
        if (domain.param(i) - a.p).abs() > 1e-9 {
            return Err(CliError::Failure(Error::domain(format!("--p {} is not a grid node", a.p))));
        }
        let curve = result.last.rate_curve(i, 0);
        let ds: Vec<f64> = curve.iter().map(|c| c.0).collect();
        let rates: Vec<f64> = curve.iter().map(|c| c.1).collect();
        let mut columns: Vec<(&str, &[f64])> = vec![("rate", &rates)];
        let search = match (a.search, domain.family()) {
            (true, Family::FixedConditional { channel }) => Some(brute_force_wz_curve(a.p, channel, &model, &ds, a.u_card)?),
            (true, _) => return Err(CliError::Usage("--search applies to wyner-ziv mode".into())),
            (false, _) => None,
        };
        if let Some(s) = &search {
            columns.push(("search", s));
        }
        out.write("rd.csv", |p| io::write_curve_csv(p, &ds, &columns))?;
        for (k, (d, r)) in curve.iter().enumerate() {
            match &search {
                Some(s) => println!("D {d:.6}  rate {r:.6}  search {:.6}", s[k]),
                None => println!("D {d:.6}  rate {r:.6}"),
            }
        }
    }
    out.finish("rd", recorded, a, 0)
}

fn cmd_replay(a: &ReplayArgs) -> CliResult<()> {
    if !a.manifest.exists() {
        return Err(CliError::Usage(format!("manifest {} not found", a.manifest.display())));
    }
    let manifest = RunManifest::read(&a.manifest)?;
    let dir = match &a.out {
        Some(d) => d.clone(),
        None => a.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut args = vec!["sumrate".to_string()];
    let mut skip = false;
    for arg in &manifest.args {
        if skip {
            skip = false;
        } else if arg == "--out" {
            skip = true;
        } else if !arg.starts_with("--out=") {
            args.push(arg.clone());
        }
    }
    args.push("--out".into());
    args.push(dir.to_string_lossy().into_owned());
    let cli = Cli::try_parse_from(&args).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a manifest cannot replay another replay".into()));
    }
    dispatch(cli.command, args.into_iter().skip(1).collect())
}
