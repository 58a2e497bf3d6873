//! `sharenav run | plan | serve`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sharenav_core::costmap::CostFilterParams;
use sharenav_core::planner::EdgeCosts;
use sharenav_core::scenario::{load_world, plan_scene, run, InputTrace, Outcome, WorldModel};
use sharenav_core::{ControlMode, SimConfig, Vec2};
use thiserror::Error;

use crate::server::{ServeOptions, Server};

pub const ENV_CONFIG: &str = "SHARENAV_CONFIG";

pub mod exit {
    pub const GOAL: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const TIMEOUT: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const NO_INPUT: i32 = 66;
}

#[derive(Debug, Parser)]
#[command(name = "sharenav", version, about = "Shared-control navigation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a world headlessly, replaying an input trace.
    Run(RunArgs),
    /// Plan once from the start pose and dump the composed costmap.
    Plan(PlanArgs),
    /// Serve a live session over WebSocket.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// TOML config file (defaults to $SHARENAV_CONFIG when set).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "FILE")]
    pub world: PathBuf,
    #[arg(long, value_parser = parse_mode)]
    pub mode: ControlMode,
    /// JSON-lines input trace; omitted means no operator input.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Where to write the run record (JSON lines).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long, value_name = "FILE")]
    pub world: PathBuf,
    /// Cost filter, e.g. "d=2.5,w=3,l=5,s=100,p=1.2"; unset keys use the config.
    #[arg(long)]
    pub filter: Option<String>,
    /// Costmap CSV; a `<FILE>.header.json` sidecar is written next to it.
    #[arg(long, value_name = "FILE")]
    pub dump: PathBuf,
    /// Path as JSON; printed to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub path: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, value_name = "FILE")]
    pub world: PathBuf,
    #[arg(long, value_parser = parse_mode, default_value = "sc")]
    pub mode: ControlMode,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8765)]
    pub port: u16,
    /// State broadcast rate (Hz).
    #[arg(long, default_value_t = 20.0)]
    pub rate: f64,
    /// Input latency (s); overrides the config.
    #[arg(long)]
    pub latency: Option<f64>,
    /// Simulated seconds per wall-clock second; 0 runs unpaced.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
    /// Start ticking without waiting for a start command.
    #[arg(long)]
    pub autostart: bool,
    /// Write the run record here when a run ends.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

fn parse_mode(s: &str) -> Result<ControlMode, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("invalid --filter: {0}")]
    Filter(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } => exit::NO_INPUT,
            CliError::Filter(_) => exit::USAGE,
            _ => exit::ERROR,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

pub fn read_world(path: &Path) -> Result<Arc<WorldModel>, CliError> {
    let text = read(path)?;
    load_world(&text).map(Arc::new).map_err(|e| CliError::Invalid {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Config from `--config`, else `$SHARENAV_CONFIG`, else defaults.
pub fn load_config(arg: &ConfigArg) -> Result<SimConfig, CliError> {
    let path = arg
        .config
        .clone()
        .or_else(|| std::env::var_os(ENV_CONFIG).filter(|v| !v.is_empty()).map(PathBuf::from));
    let Some(path) = path else {
        return Ok(SimConfig::default());
    };
    let text = read(&path)?;
    let config: SimConfig = toml::from_str(&text).map_err(|e| CliError::Invalid {
        path: path.clone(),
        message: e.to_string(),
    })?;
    config.validate().map_err(|e| CliError::Invalid {
        path,
        message: e.to_string(),
    })?;
    Ok(config)
}

/// Parses `key=value` pairs over `base`; returns the offset and the shape.
pub fn parse_filter(spec: &str, base: CostFilterParams) -> Result<(f64, CostFilterParams), CliError> {
    let mut d = 0.0;
    let mut params = base;
    for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Filter(format!("`{pair}` is not key=value")))?;
        let bad = |e: &dyn std::fmt::Display| CliError::Filter(format!("`{pair}`: {e}"));
        let number = || value.trim().parse::<f64>().map_err(|e| bad(&e));
        match key.trim() {
            "d" => d = number()?,
            "w" => params.w = number()?,
            "l" => params.l = number()?,
            "p" => params.p = number()?,
            "s" => params.s = value.trim().parse::<u8>().map_err(|e| bad(&e))?,
            other => return Err(CliError::Filter(format!("unknown key `{other}`"))),
        }
    }
    if !d.is_finite() || d.abs() > 5.0 {
        return Err(CliError::Filter(format!("d = {d} is outside [-5, 5]")));
    }
    params.validate().map_err(|e| CliError::Filter(e.to_string()))?;
    Ok((d, params))
}

pub fn header_path(dump: &Path) -> PathBuf {
    let mut name = dump.as_os_str().to_owned();
    name.push(".header.json");
    PathBuf::from(name)
}

#[derive(Debug, Serialize)]
struct PlanReport {
    cost: u64,
    cost_m: f64,
    length: f64,
    filter_origin: Option<Vec2>,
    filter_axis: Option<Vec2>,
    points: Vec<Vec2>,
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let world = read_world(&args.world)?;
    let trace = match &args.trace {
        Some(path) => InputTrace::from_jsonl(&read(path)?).map_err(|e| CliError::Invalid {
            path: path.clone(),
            message: e.to_string(),
        })?,
        None => InputTrace::empty(),
    };
    let config = load_config(&args.config)?;
    let record = run(world, args.mode, &trace, &config).map_err(|e| CliError::Other(e.to_string()))?;
    write(&args.out, &record.to_jsonl())?;
    let _ = writeln!(out, "{}", serde_json::to_string(&record.summary).expect("summary serializes"));
    Ok(match record.summary.outcome {
        Outcome::Goal => exit::GOAL,
        Outcome::Timeout => exit::TIMEOUT,
    })
}

fn cmd_plan(args: &PlanArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let world = read_world(&args.world)?;
    let mut config = load_config(&args.config)?;
    let d = match &args.filter {
        Some(spec) => {
            let (d, params) = parse_filter(spec, config.filter)?;
            config.filter = params;
            Some(d)
        }
        None => None,
    };
    let scene = plan_scene(&world, &config, d).map_err(|e| CliError::Other(e.to_string()))?;
    write(&args.dump, &scene.costmap.to_csv())?;
    let header = serde_json::to_string_pretty(&scene.costmap.header()).expect("header serializes");
    write(&header_path(&args.dump), &(header + "\n"))?;
    let path = scene.path.map_err(|e| CliError::Other(format!("no path: {e}")))?;
    let total = path.total_cost().unwrap_or(0);
    let report = PlanReport {
        cost: total,
        cost_m: EdgeCosts::to_meters(total, config.resolution),
        length: path.length(),
        filter_origin: scene.filter.map(|f| f.frame.origin),
        filter_axis: scene.filter.map(|f| f.frame.y_axis),
        points: path.points().to_vec(),
    };
    let json = serde_json::to_string(&report).expect("report serializes");
    match &args.path {
        Some(p) => write(p, &(json + "\n"))?,
        None => {
            let _ = writeln!(out, "{json}");
        }
    }
    Ok(exit::GOAL)
}

fn cmd_serve(args: &ServeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let world = read_world(&args.world)?;
    let mut sim = load_config(&args.config)?;
    if let Some(latency) = args.latency {
        sim.latency = latency;
    }
    let opts = ServeOptions {
        world,
        mode: args.mode,
        sim,
        rate: args.rate,
        speed: args.speed,
        autostart: args.autostart,
        record_out: args.out.clone(),
    };
    let server = Server::bind(format!("{}:{}", args.host, args.port), opts).map_err(|e| CliError::Other(e.to_string()))?;
    let _ = writeln!(out, "listening on ws://{}", server.local_addr());
    let _ = out.flush();
    server.wait();
    Ok(exit::GOAL)
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::GOAL };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Plan(a) => cmd_plan(a, out),
        Command::Serve(a) => cmd_serve(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "sharenav: {e}");
            e.exit_code()
        }
    }
}
