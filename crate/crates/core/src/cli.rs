//! `saferad` command line: `run`, `sweep` and `synth`.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors
//! (bad flags, missing inputs, invalid configuration).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::evaluation::report::{
    write_scan_table, write_sequence_table, write_sets, write_sweep_table, write_treatment_table,
};
use crate::evaluation::{
    compute_metrics, run_sequences, run_sweep, EvalSets, Mode, PipelineConfig, SweepPoint,
    TraceOptions,
};
use crate::model::{load_sequence, write_sequence, Label, Sequence};
use crate::synth::{generate, SceneSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "saferad", version, about = "Criticality-aware radar point cloud pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline over sequences and write per-sequence reports.
    Run(RunArgs),
    /// Evaluate a grid of modes and thresholds.
    Sweep(SweepArgs),
    /// Generate a synthetic sequence from a scene description.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Sequence files (.jsonl) or directories containing them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Pipeline configuration, JSON or TOML (by extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
    /// Worker threads; sequences are processed in parallel.
    #[arg(long, env = "SAFERAD_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
}

/// One flag per configuration field; set flags win over the config file.
#[derive(Debug, Default, Args)]
pub struct ConfigOverrides {
    #[arg(long)]
    pub v_max_domain: Option<f64>,
    #[arg(long)]
    pub vehicle_half_width: Option<f64>,
    #[arg(long)]
    pub safety_margin: Option<f64>,
    #[arg(long)]
    pub insecurity_width: Option<f64>,
    #[arg(long)]
    pub t_react: Option<f64>,
    #[arg(long)]
    pub a_brake: Option<f64>,
    #[arg(long)]
    pub crit_thresh: Option<f64>,
    #[arg(long)]
    pub vehicle_length: Option<f64>,

    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub y_abs_max: Option<f64>,
    #[arg(long)]
    pub v_comp_min: Option<f64>,
    #[arg(long)]
    pub v_dopp_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rcs_thresh: Option<f64>,
    #[arg(long)]
    pub static_filter_enabled: Option<bool>,

    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub min_pts: Option<usize>,

    /// Region radius per age, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub t_life: Option<u32>,

    #[arg(long)]
    pub a_long_max: Option<f64>,
    #[arg(long)]
    pub a_lat_max: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Speed cap of synthesized trajectories.
    #[arg(long)]
    pub reach_v_max_domain: Option<f64>,
    #[arg(long)]
    pub track_expand_radius: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub vru_labels: Option<Vec<Label>>,
}

impl ConfigOverrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        let c = &mut cfg.criticality;
        set(&mut c.v_max_domain, &self.v_max_domain);
        set(&mut c.vehicle_half_width, &self.vehicle_half_width);
        set(&mut c.safety_margin, &self.safety_margin);
        set(&mut c.insecurity_width, &self.insecurity_width);
        set(&mut c.t_react, &self.t_react);
        set(&mut c.a_brake, &self.a_brake);
        set(&mut c.crit_thresh, &self.crit_thresh);
        set(&mut c.vehicle_length, &self.vehicle_length);
        let f = &mut cfg.filter;
        set(&mut f.x_max, &self.x_max);
        set(&mut f.y_abs_max, &self.y_abs_max);
        set(&mut f.v_comp_min, &self.v_comp_min);
        set(&mut f.v_dopp_max, &self.v_dopp_max);
        set(&mut f.rcs_thresh, &self.rcs_thresh);
        set(&mut f.static_filter_enabled, &self.static_filter_enabled);
        set(&mut cfg.clustering.eps, &self.eps);
        set(&mut cfg.clustering.min_pts, &self.min_pts);
        set(&mut cfg.regions.radii, &self.radii);
        set(&mut cfg.regions.t_life, &self.t_life);
        let r = &mut cfg.reachability;
        set(&mut r.a_long_max, &self.a_long_max);
        set(&mut r.a_lat_max, &self.a_lat_max);
        set(&mut r.r_min, &self.r_min);
        set(&mut r.v_max_domain, &self.reach_v_max_domain);
        set(&mut r.track_expand_radius, &self.track_expand_radius);
        set(&mut r.vru_labels, &self.vru_labels);
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "posteriori")]
    pub mode: Mode,
    /// Write removed points with their removal reason to audit.jsonl.
    #[arg(long)]
    pub audit: bool,
    /// Write region births and deaths to regions.jsonl.
    #[arg(long)]
    pub region_trace: bool,
    /// Write synthesized critical trajectories to trajectories.jsonl.
    #[arg(long)]
    pub export_trajectories: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Modes to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "posteriori")]
    pub modes: Vec<Mode>,
    /// Criticality thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub crit_thresholds: Vec<f64>,
    /// RCS thresholds in dBm², comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rcs_thresholds: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene description (JSON).
    pub spec: PathBuf,
    /// Output sequence file.
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Reproducibility record written next to every report.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub modes: Vec<Mode>,
    pub inputs: Vec<PathBuf>,
    pub sequences: Vec<String>,
    pub output_dir: PathBuf,
    pub jobs: usize,
    pub config: PipelineConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepPoint>,
    pub wall_clock_s: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => CliError::Usage(format!("invalid configuration: {m}")),
            other => CliError::Runtime(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("saferad: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

pub fn load_config(path: Option<&Path>, overrides: &ConfigOverrides) -> CliResult<PipelineConfig> {
    let mut cfg = match path {
        None => PipelineConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            let is_toml = p.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
            let parsed = if is_toml {
                toml::from_str(&text).map_err(|e| e.to_string())
            } else {
                serde_json::from_str(&text).map_err(|e| e.to_string())
            };
            parsed.map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))?
        }
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Expands directories to their `.jsonl` files (sorted) and loads everything.
pub fn load_inputs(inputs: &[PathBuf]) -> CliResult<Vec<Sequence>> {
    let mut files = Vec::new();
    for path in inputs {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| CliError::Runtime(Error::io(path, e)))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else if path.is_file() {
            files.push(path.clone());
        } else {
            return Err(CliError::Usage(format!("input not found: {}", path.display())));
        }
    }
    let mut seqs = Vec::with_capacity(files.len());
    for f in &files {
        let seq = load_sequence(f).map_err(|e| match e {
            Error::Io { .. } => CliError::Runtime(e),
            other => CliError::Runtime(Error::Validation(format!("{}: {other}", f.display()))),
        })?;
        if seqs.iter().any(|s: &Sequence| s.id == seq.id) {
            return Err(CliError::Usage(format!(
                "duplicate sequence id '{}' ({})",
                seq.id,
                f.display()
            )));
        }
        seqs.push(seq);
    }
    Ok(seqs)
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(Error::io(path, e)))
}

fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::Runtime(Error::io(path, e)))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> CliResult<()> {
    let mut w = create(dir, "manifest.json")?;
    serde_json::to_writer_pretty(&mut w, manifest).map_err(|e| CliError::Runtime(e.into()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Runtime(Error::io(dir.join("manifest.json"), e)))
}

fn prepare_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(Error::io(dir, e)))
}

pub fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let started = Instant::now();
    let cfg = load_config(args.input.config.as_deref(), &args.input.overrides)?;
    let seqs = load_inputs(&args.input.inputs)?;
    let out = &args.input.out;
    prepare_out(out)?;

    let trace = TraceOptions {
        audit: args.audit,
        regions: args.region_trace,
        trajectories: args.export_trajectories,
    };
    let runs = run_sequences(&seqs, &cfg, args.mode, trace, args.input.jobs.max(1))?;
    let sets: Vec<EvalSets> = runs.iter().map(|r| r.sets.clone()).collect();
    let report = compute_metrics(&sets);

    write_sequence_table(create(out, "sequences.csv")?, &report.rows, &report.aggregate)?;
    write_sets(create(out, "sets.csv")?, &sets)?;
    let traces: Vec<(String, Vec<_>)> = runs
        .iter()
        .map(|r| (r.sets.sequence.clone(), r.scans.clone()))
        .collect();
    write_scan_table(create(out, "scans.csv")?, &traces)?;
    if trace.audit {
        write_bytes(out, "audit.jsonl", &runs.iter().flat_map(|r| r.audit.clone()).collect::<Vec<_>>())?;
    }
    if trace.regions {
        let bytes: Vec<u8> = runs.iter().flat_map(|r| r.region_events.clone()).collect();
        write_bytes(out, "regions.jsonl", &bytes)?;
    }
    if trace.trajectories {
        let bytes: Vec<u8> = runs.iter().flat_map(|r| r.trajectories.clone()).collect();
        write_bytes(out, "trajectories.jsonl", &bytes)?;
    }

    write_manifest(
        out,
        &RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: "run",
            modes: vec![args.mode],
            inputs: args.input.inputs.clone(),
            sequences: sets.iter().map(|s| s.sequence.clone()).collect(),
            output_dir: out.clone(),
            jobs: args.input.jobs,
            config: cfg,
            sweep: Vec::new(),
            wall_clock_s: started.elapsed().as_secs_f64(),
        },
    )
}

/// Cartesian product of modes, crit thresholds and RCS thresholds. An empty
/// threshold list falls back to the configured value, but at least one list
/// must be given.
pub fn sweep_points(
    modes: &[Mode],
    crit: &[f64],
    rcs: &[f64],
    base: &PipelineConfig,
) -> CliResult<Vec<SweepPoint>> {
    if crit.is_empty() && rcs.is_empty() {
        return Err(CliError::Usage(
            "empty sweep: pass --crit-thresholds and/or --rcs-thresholds".into(),
        ));
    }
    if modes.is_empty() {
        return Err(CliError::Usage("empty sweep: no modes given".into()));
    }
    let crit = if crit.is_empty() { vec![base.criticality.crit_thresh] } else { crit.to_vec() };
    let rcs = if rcs.is_empty() { vec![base.filter.rcs_thresh] } else { rcs.to_vec() };
    let mut points = Vec::new();
    for &mode in modes {
        for &crit_thresh in &crit {
            for &rcs_thresh in &rcs {
                points.push(SweepPoint {
                    mode,
                    crit_thresh,
                    rcs_thresh,
                });
            }
        }
    }
    Ok(points)
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let started = Instant::now();
    let cfg = load_config(args.input.config.as_deref(), &args.input.overrides)?;
    let points = sweep_points(&args.modes, &args.crit_thresholds, &args.rcs_thresholds, &cfg)?;
    let seqs = load_inputs(&args.input.inputs)?;
    let out = &args.input.out;
    prepare_out(out)?;

    let rows = run_sweep(&seqs, &cfg, &points, args.input.jobs.max(1))?;
    write_sweep_table(create(out, "sweep.csv")?, &rows)?;

    let by_mode = |m: Mode| rows.iter().filter(|r| r.point.mode == m).cloned().collect::<Vec<_>>();
    let (base, post) = (by_mode(Mode::Baseline), by_mode(Mode::Posteriori));
    if !base.is_empty() && !post.is_empty() {
        write_treatment_table(create(out, "treatment.csv")?, &base, &post)?;
    }

    write_manifest(
        out,
        &RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: "sweep",
            modes: args.modes.clone(),
            inputs: args.input.inputs.clone(),
            sequences: seqs.iter().map(|s| s.id.clone()).collect(),
            output_dir: out.clone(),
            jobs: args.input.jobs,
            config: cfg,
            sweep: points,
            wall_clock_s: started.elapsed().as_secs_f64(),
        },
    )
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    if !args.spec.is_file() {
        return Err(CliError::Usage(format!("input not found: {}", args.spec.display())));
    }
    let spec = SceneSpec::load(&args.spec).map_err(|e| match e {
        Error::Json(e) => CliError::Usage(format!("invalid scene {}: {e}", args.spec.display())),
        other => other.into(),
    })?;
    let seq = generate(&spec)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_out(parent)?;
    }
    write_sequence(&seq, &args.out)?;
    Ok(())
}
