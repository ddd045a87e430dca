//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::aiger::{parse_with, write_ascii, write_binary, write_witness, ParseOptions};
use crate::bmc::{Bmc, BmcOptions, BmcOutcome};
use crate::constraints::{ConstraintMode, PatternOptions};
use crate::testgen::{constraint_tightness, generate, ConstraintSpec, Family, GenSpec};
use crate::unroll::ReduceOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fraig-bmc", version, about = "Bounded model checking with on-the-fly SAT sweeping")]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated benchmark circuit.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// AIGER file (.aag or .aig)
    #[arg(required = true)]
    pub input: Option<PathBuf>,
    /// Largest bound to check
    #[arg(short = 'k', long, default_value_t = 100)]
    pub max_bound: usize,
    /// Disable all reduction (plain Tseitin encoding)
    #[arg(long)]
    pub no_fraig: bool,
    /// Keep trivial and structural merging but skip SAT sweeping
    #[arg(long)]
    pub no_functional: bool,
    /// Members per equivalence class
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub ec_limit: u64,
    /// 64-bit simulation words per node
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub sim_words: u64,
    /// Counterexample patterns collected before re-simulation
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub refine_batch: u64,
    #[arg(long, default_value_t = ReduceOptions::default().seed)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ConstraintMode::Auto)]
    pub constraint_mode: ConstraintMode,
    /// Filtered patterns needed before sampling takes over (auto mode)
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_patterns: u64,
    /// Filtering rounds before giving up (auto mode)
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_rounds: u64,
    /// Patterns drawn per sampling session
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub sample_count: u64,
    /// Conflict budget per equivalence query
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub equiv_conflicts: u64,
    /// Wall-clock limit in seconds
    #[arg(long, value_parser = positive_seconds)]
    pub time_limit: Option<f64>,
    /// Write per-bound statistics as CSV
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Write 0 in the timing columns of the statistics
    #[arg(long)]
    pub no_timings: bool,
    /// Dump the final clause database in DIMACS format
    #[arg(long)]
    pub dimacs: Option<PathBuf>,
    /// Do not treat outputs as properties when no bad section exists
    #[arg(long)]
    pub no_outputs_as_bads: bool,
    /// Only merge nodes of equal phase
    #[arg(long)]
    pub same_phase_only: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub gates: usize,
    #[arg(long, default_value_t = 8)]
    pub latches: usize,
    #[arg(long, default_value_t = 4)]
    pub inputs: usize,
    /// Add a constraint that is a cube over this many inputs
    #[arg(long, conflicts_with = "gate_constraint")]
    pub cube: Option<usize>,
    /// Add a constraint on a random internal signal
    #[arg(long)]
    pub gate_constraint: bool,
    /// Write binary AIGER instead of ASCII
    #[arg(long)]
    pub binary: bool,
    /// Output file (stdout when absent)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn positive_seconds(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number of seconds, got {s:?}")),
    }
}

impl CheckArgs {
    pub fn bmc_options(&self) -> BmcOptions {
        BmcOptions {
            max_bound: self.max_bound,
            reduce: ReduceOptions {
                reduce: !self.no_fraig,
                functional: !self.no_functional,
                same_phase_only: self.same_phase_only,
                ec_limit: self.ec_limit as usize,
                sim_words: self.sim_words as usize,
                refine_batch: self.refine_batch as usize,
                equiv_conflicts: Some(self.equiv_conflicts),
                seed: self.seed,
            },
            patterns: PatternOptions {
                mode: self.constraint_mode,
                min_patterns: self.min_patterns as usize,
                max_rounds: self.max_rounds as usize,
                sample_count: self.sample_count as usize,
            },
            time_limit: self.time_limit.map(Duration::from_secs_f64),
        }
    }
}

/// Runs the command line `args` (including the program name). Returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Some(Command::Gen(g)) => gen(g, out),
        None => check(&cli.check, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "fraig-bmc: {msg}");
            EXIT_ERROR
        }
    }
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32, String> {
    let path = args.input.as_ref().expect("clap enforces the input");
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let net = parse_with(&bytes, ParseOptions { outputs_as_bads: !args.no_outputs_as_bads })
        .map_err(|e| format!("{}: {e}", path.display()))?;

    let mut bmc = Bmc::new(&net, args.bmc_options());
    let outcome = bmc.run().map_err(|e| format!("internal error: {e}"))?;
    let io = |e: std::io::Error| format!("write failed: {e}");

    if let Some(p) = &args.stats {
        let mut f = fs::File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?;
        bmc.stats().write_csv(&mut f, !args.no_timings).map_err(io)?;
    }
    if let Some(p) = &args.dimacs {
        let mut f = fs::File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?;
        bmc.unroller().solver().write_dimacs(&mut f).map_err(io)?;
    }
    match outcome {
        BmcOutcome::Unsafe(cex) => {
            out.write_all(write_witness(&cex, &net).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        BmcOutcome::Safe { upto } => {
            writeln!(out, "0\nc no violation up to bound {upto}").map_err(io)?;
            Ok(EXIT_OK)
        }
        BmcOutcome::Limit { bound } => {
            writeln!(out, "0\nc resource limit reached at bound {bound}").map_err(io)?;
            Ok(EXIT_LIMIT)
        }
    }
}

fn gen(args: &GenArgs, out: &mut dyn Write) -> Result<i32, String> {
    let constraint = match (args.cube, args.gate_constraint) {
        (Some(m), _) => ConstraintSpec::Cube(m),
        (None, true) => ConstraintSpec::Gate,
        (None, false) => ConstraintSpec::None,
    };
    if let ConstraintSpec::Cube(m) = constraint {
        if m == 0 || m > args.inputs {
            return Err(format!("--cube must be between 1 and the input count ({})", args.inputs));
        }
    }
    let spec = GenSpec {
        seed: args.seed,
        family: args.family,
        gates: args.gates,
        latches: args.latches,
        inputs: args.inputs,
        constraint,
    };
    let net = generate(&spec);
    let bytes = if args.binary {
        write_binary(&net).map_err(|e| e.to_string())?
    } else {
        let mut text = write_ascii(&net);
        if constraint != ConstraintSpec::None && net.inputs().len() <= 16 {
            text.push_str(&format!("c\nconstraint tightness {}\n", constraint_tightness(&net)));
        }
        text.into_bytes()
    };
    match &args.output {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("cannot write {}: {e}", p.display()))?,
        None => out.write_all(&bytes).map_err(|e| format!("write failed: {e}"))?,
    }
    Ok(EXIT_OK)
}
