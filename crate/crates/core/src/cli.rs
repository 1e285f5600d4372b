//! Command-line front end: argument parsing, file I/O and report rendering.
//!
//! [`run`] is the whole program minus process setup, so tests drive it
//! with in-memory writers.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bippt::{self, SearchConfig, SearchOutcome, SearchRecord};
use crate::bounds::{self, BoundReport, DegradabilityReport, Estimates};
use crate::channel::{self, Channel, Family};
use crate::distill::{self, OrderEpsilons, StateEstimates};
use crate::error::{Error, Result};
use crate::optim::{OptimOptions, DEFAULT_SEED};
use crate::sdp::SdpOptions;
use crate::state::BipartiteState;

/// Version tag carried by every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "CAPBOUND_THREADS";

#[derive(Debug, Parser)]
#[command(name = "capbound", version, about = "Capacity bounds for quantum channels and one-way distillation bounds for states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Random restarts per optimization.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Iteration cap per restart.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Optimizer convergence tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Feasibility and duality-gap tolerance of the SDP solver.
    #[arg(long, global = true)]
    pub sdp_tol: Option<f64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest Hilbert-space dimension an optimizer may allocate.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical, quantum and private capacity chains for a channel file.
    Bounds {
        /// Channel JSON file, or `-` for stdin.
        channel: PathBuf,
        /// Also report the chains assisted by the symmetric side channel of this dimension.
        #[arg(long)]
        side_channel: Option<usize>,
    },
    /// Approximate (anti)degradability parameters and the chains they imply.
    Degradability { channel: PathBuf },
    /// One-way distillable entanglement and key chains for a bipartite state file.
    StateBounds {
        state: PathBuf,
        /// Also estimate the order parameters of the state.
        #[arg(long)]
        orders: bool,
    },
    /// Randomized search for channels whose channel and complement are both close to PPT.
    SearchBippt(SearchArgs),
    /// Print a named channel as JSON.
    Builtin {
        /// identity, erasure, depolarizing, amplitude_damping, dephasing or symmetric_side.
        name: String,
        #[arg(allow_negative_numbers = true)]
        params: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub din: Option<usize>,
    #[arg(long)]
    pub dout: Option<usize>,
    #[arg(long)]
    pub denv: Option<usize>,
    /// Number of consecutive seeds, starting at `--seed`.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Gradient iterations per seed.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub ppt_eps: Option<f64>,
    #[arg(long)]
    pub q_upper_max: Option<f64>,
    #[arg(long)]
    pub coherent_info_min: Option<f64>,
    /// Search configuration as JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON-lines file of earlier records; their seeds are skipped.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Write all records to this JSON-lines file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Optimizer and solver settings echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunOptions {
    pub optim: OptimOptions,
    pub sdp_tol: f64,
    pub sdp_max_iter: u32,
}

impl RunOptions {
    pub fn new(optim: OptimOptions, sdp: &SdpOptions) -> Self {
        RunOptions { optim, sdp_tol: sdp.feas, sdp_max_iter: sdp.max_iter }
    }

    pub fn sdp(&self) -> SdpOptions {
        SdpOptions { feas: self.sdp_tol, gap: self.sdp_tol, max_iter: self.sdp_max_iter }
    }
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions::new(OptimOptions::default(), &SdpOptions::default())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelSummary {
    pub dim_in: usize,
    pub dim_out: usize,
    pub dim_env: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
}

impl ChannelSummary {
    pub fn of(ch: &Channel) -> Self {
        ChannelSummary { dim_in: ch.dim_in(), dim_out: ch.dim_out(), dim_env: ch.dim_env(), family: ch.family() }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize + ?Sized> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// A report body that can be rendered as a versioned JSON document.
pub trait Document: Serialize {
    const COMMAND: &'static str;

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Envelope { schema: SCHEMA_VERSION, command: Self::COMMAND, body: self })?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsDocument {
    pub options: RunOptions,
    pub channel: ChannelSummary,
    pub estimates: Estimates,
    pub reports: Vec<BoundReport>,
}

impl Document for BoundsDocument {
    const COMMAND: &'static str = "bounds";
}

impl BoundsDocument {
    /// Classical and quantum/private chains, plus the side-channel chains
    /// when `side_channel` gives a dimension.
    pub fn compute(ch: &Channel, options: RunOptions, side_channel: Option<usize>) -> Result<Self> {
        let estimates = Estimates::compute(ch, &options.optim, &options.sdp())?;
        let mut reports = bounds::classical_bounds_from(&estimates)?;
        reports.extend(bounds::qp_bounds_from(&estimates)?);
        if let Some(d) = side_channel {
            reports.extend(bounds::ss_bounds(ch, d, &options.optim)?);
        }
        Ok(BoundsDocument { options, channel: ChannelSummary::of(ch), estimates, reports })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegradabilityDocument {
    pub options: RunOptions,
    pub channel: ChannelSummary,
    pub degradability: DegradabilityReport,
}

impl Document for DegradabilityDocument {
    const COMMAND: &'static str = "degradability";
}

impl DegradabilityDocument {
    pub fn compute(ch: &Channel, options: RunOptions) -> Result<Self> {
        let degradability = bounds::approx_degradability_bounds(ch, &options.optim, &options.sdp())?;
        Ok(DegradabilityDocument { options, channel: ChannelSummary::of(ch), degradability })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StateDocument {
    pub options: RunOptions,
    pub dims: [usize; 2],
    pub estimates: StateEstimates,
    pub reports: Vec<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orders: Option<OrderEpsilons>,
}

impl Document for StateDocument {
    const COMMAND: &'static str = "state-bounds";
}

impl StateDocument {
    pub fn compute(st: &BipartiteState, options: RunOptions, orders: bool) -> Result<Self> {
        let estimates = StateEstimates::compute(st, &options.optim)?;
        let reports = distill::state_bounds_from(&estimates, options.optim.tol)?;
        let orders = orders.then(|| distill::state_order_epsilons(st, &options.optim));
        Ok(StateDocument { options, dims: st.dims(), estimates, reports, orders })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchDocument {
    pub config: SearchConfig,
    #[serde(flatten)]
    pub outcome: SearchOutcome,
}

impl Document for SearchDocument {
    const COMMAND: &'static str = "search-bippt";
}

/// Parses `args` (program name first) and executes the command; returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    configure_threads();
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        // The reader went away (e.g. `| head`); nothing left to report.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`]; later calls are no-ops.
pub fn configure_threads() {
    let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn options(c: &CommonArgs) -> Result<RunOptions> {
    let mut optim = OptimOptions { seed: c.seed, ..OptimOptions::default() };
    if let Some(r) = c.restarts {
        optim.restarts = r;
    }
    if let Some(m) = c.max_iter {
        optim.max_iter = m;
    }
    if let Some(t) = c.tol {
        optim.tol = t;
    }
    if let Some(b) = c.budget {
        optim.budget = b;
    }
    optim.validate()?;
    Ok(RunOptions::new(optim, &sdp_options(c)?))
}

fn sdp_options(c: &CommonArgs) -> Result<SdpOptions> {
    let mut o = SdpOptions::default();
    if let Some(t) = c.sdp_tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Config(format!("SDP tolerance {t} not in (0, 1)")));
        }
        o.feas = t;
        o.gap = t;
    }
    Ok(o)
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    channel::channel_from_json(&read_input(path)?)
}

pub fn load_state(path: &Path) -> Result<BipartiteState> {
    Ok(serde_json::from_str(&read_input(path)?)?)
}

fn emit<T: Document>(out: &mut dyn Write, doc: &T) -> Result<()> {
    writeln!(out, "{}", doc.to_json()?)?;
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let c = &cli.common;
    let started = Instant::now();
    match &cli.command {
        Command::Builtin { name, params } => {
            let ch = channel::builtin(name, params)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&ch)?)?;
        }
        Command::Bounds { channel, side_channel } => {
            let opts = options(c)?;
            let ch = load_channel(channel)?;
            let doc = BoundsDocument::compute(&ch, opts, *side_channel)?;
            match c.format {
                Format::Json => emit(out, &doc)?,
                Format::Text => {
                    let mut s = channel_header(&ch);
                    for r in &doc.reports {
                        writeln!(s, "\n{r}").ok();
                    }
                    write_text(out, &s, started)?;
                }
            }
        }
        Command::Degradability { channel } => {
            let opts = options(c)?;
            let ch = load_channel(channel)?;
            let doc = DegradabilityDocument::compute(&ch, opts)?;
            match c.format {
                Format::Json => emit(out, &doc)?,
                Format::Text => write_text(out, &degradability_text(&ch, &doc.degradability), started)?,
            }
        }
        Command::StateBounds { state, orders } => {
            let opts = options(c)?;
            let st = load_state(state)?;
            let doc = StateDocument::compute(&st, opts, *orders)?;
            match c.format {
                Format::Json => emit(out, &doc)?,
                Format::Text => {
                    let mut s = format!("state on {}x{}\n", st.dim_a(), st.dim_b());
                    for r in &doc.reports {
                        writeln!(s, "\n{r}").ok();
                    }
                    if let Some(o) = &doc.orders {
                        writeln!(s, "\norder parameters").ok();
                        writeln!(s, "  more secret          {:.6}", o.more_secret_eps).ok();
                        writeln!(s, "  more informative     {:.6}", o.more_informative_eps).ok();
                        writeln!(s, "  anti more secret     {:.6}", o.anti_more_secret_eps).ok();
                        writeln!(s, "  anti more informative {:.6}", o.anti_more_informative_eps).ok();
                        writeln!(s, "  weaker condition     {:.6}", o.weaker_condition_eps).ok();
                    }
                    write_text(out, &s, started)?;
                }
            }
        }
        Command::SearchBippt(args) => {
            let cfg = search_config(c, args)?;
            let previous = match &args.resume {
                Some(p) => resumed(p, &cfg)?,
                None => Vec::new(),
            };
            let outcome = bippt::search_resume(&cfg, previous)?;
            if let Some(p) = &args.out {
                let file = std::fs::File::create(p)?;
                bippt::write_jsonl(std::io::BufWriter::new(file), &outcome.records)?;
            }
            match c.format {
                Format::Json => emit(out, &SearchDocument { config: cfg, outcome })?,
                Format::Text => write_text(out, &search_text(&cfg, &outcome), started)?,
            }
        }
    }
    Ok(())
}

fn search_config(c: &CommonArgs, a: &SearchArgs) -> Result<SearchConfig> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str::<SearchConfig>(&read_input(p)?)?,
        None => SearchConfig { seed: c.seed, ..SearchConfig::default() },
    };
    // An explicit --seed always wins over the file.
    if a.config.is_none() || c.seed != DEFAULT_SEED {
        cfg.seed = c.seed;
    }
    let set = |dst: &mut usize, v: Option<usize>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut cfg.dim_in, a.din);
    set(&mut cfg.dim_out, a.dout);
    set(&mut cfg.dim_env, a.denv);
    set(&mut cfg.seeds, a.seeds);
    set(&mut cfg.iterations, a.iterations);
    set(&mut cfg.optim.restarts, c.restarts);
    set(&mut cfg.optim.max_iter, c.max_iter);
    set(&mut cfg.optim.budget, c.budget);
    if let Some(t) = c.tol {
        cfg.optim.tol = t;
    }
    for (dst, v) in [(&mut cfg.ppt_eps, a.ppt_eps), (&mut cfg.q_upper_max, a.q_upper_max), (&mut cfg.coherent_info_min, a.coherent_info_min)] {
        if let Some(v) = v {
            *dst = v;
        }
    }
    cfg.optim.seed = cfg.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn resumed(path: &Path, cfg: &SearchConfig) -> Result<Vec<SearchRecord>> {
    let records = bippt::read_jsonl(path)?;
    if let Some(r) = records.iter().find(|r| {
        (r.channel.dim_in(), r.channel.dim_out(), r.channel.dim_env()) != (cfg.dim_in, cfg.dim_out, cfg.dim_env)
    }) {
        return Err(Error::Config(format!(
            "resume file record for seed {} has dims {},{},{}; search uses {},{},{}",
            r.seed,
            r.channel.dim_in(),
            r.channel.dim_out(),
            r.channel.dim_env(),
            cfg.dim_in,
            cfg.dim_out,
            cfg.dim_env
        )));
    }
    Ok(records)
}

fn write_text(out: &mut dyn Write, body: &str, started: Instant) -> Result<()> {
    write!(out, "{body}")?;
    writeln!(out, "\nelapsed {:.2}s", started.elapsed().as_secs_f64())?;
    Ok(())
}

fn channel_header(ch: &Channel) -> String {
    let family = ch.family().map(|f| format!(" ({f:?})")).unwrap_or_default();
    format!("channel {} -> {}, environment {}{family}\n", ch.dim_in(), ch.dim_out(), ch.dim_env())
}

fn degradability_text(ch: &Channel, r: &DegradabilityReport) -> String {
    let mut s = channel_header(ch);
    writeln!(s, "eps-degradable      {:.6e}", r.eps_degradable).ok();
    writeln!(s, "eps-antidegradable  {:.6e}", r.eps_antidegradable).ok();
    writeln!(s, "f1 = {:.6}  f2 = {:.6}", r.chains.f1, r.chains.f2).ok();
    for rep in r.improved.iter().chain(&r.earlier).chain(&r.antidegradable) {
        writeln!(s, "\n{rep}").ok();
    }
    s
}

fn search_text(cfg: &SearchConfig, o: &SearchOutcome) -> String {
    let mut s = format!(
        "search {}->{} (environment {}), seeds {}..{}, {} iterations\n\n",
        cfg.dim_in,
        cfg.dim_out,
        cfg.dim_env,
        cfg.seed,
        cfg.seed.wrapping_add(cfg.seeds as u64),
        cfg.iterations
    );
    writeln!(s, "{:>6} {:>5} {:>10} {:>10} {:>10} {:>10} {:>11}  accepted", "seed", "iter", "ppt(N)", "ppt(Nc)", "TQ(N)", "TQ(Nc)", "Q1 lower").ok();
    for r in &o.records {
        let x = &r.scores;
        writeln!(
            s,
            "{:>6} {:>5} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>11.3e}  {}",
            r.seed, r.iteration, x.ppt_dist_n, x.ppt_dist_nc, x.q_upper_n, x.q_upper_nc, x.coh_info_lb, r.accepted
        )
        .ok();
    }
    for f in &o.failures {
        writeln!(s, "seed {} failed: {}", f.seed, f.error).ok();
    }
    writeln!(s, "\n{} of {} accepted", o.accepted().count(), o.records.len()).ok();
    s
}
