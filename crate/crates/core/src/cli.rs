//! Command-line surface of the `intsel` binary.
//!
//! Exit status: 0 when every checked guarantee held, 1 when one failed,
//! 2 on usage or input errors.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::harness::{self, Algo, RunParams, TrialPlan};
use crate::hashing::CounterKind;
use crate::model::{format_stream, parse_stream_detailed, Instance};
use crate::oracle::alpha;

#[derive(Parser, Debug)]
#[command(name = "intsel", version, about = "Streaming interval selection and estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance in stream format.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run a one-pass selector and report its solution.
    Select {
        #[arg(long, value_enum, default_value_t = Family::General)]
        algo: Family,
        /// Common interval length (same-length selector; inferred if omitted).
        #[arg(long)]
        lambda: Option<i64>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Estimate the optimum size in one pass.
    Estimate {
        #[arg(long, value_enum, default_value_t = Family::General)]
        algo: Family,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Multiplier on the general estimator's sample counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = CounterKind::Exact)]
        counter: CounterKind,
        #[arg(long)]
        lambda: Option<i64>,
        /// Universe size; defaults to the stream header or the largest endpoint.
        #[arg(long)]
        n: Option<i64>,
        /// Replace every estimated quantity by its exact value.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Exact optimum of the stream.
    Exact {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Repeat an algorithm over consecutive seeds and summarize.
    Trials {
        /// One of select-general, select-samelen, estimate-general,
        /// estimate-samelen, oracle-general, oracle-samelen, distinct-points.
        #[arg(long)]
        algo: Algo,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long)]
        lambda: Option<i64>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = CounterKind::Exact)]
        counter: CounterKind,
        #[arg(long)]
        n: Option<i64>,
        /// Also report success of medians over groups of this many trials.
        #[arg(long)]
        group: Option<usize>,
        /// Required success fraction (default 1 for deterministic algorithms, 2/3 otherwise).
        #[arg(long)]
        min_success: Option<f64>,
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Random closed intervals (fixed length with --lambda).
    Uniform {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 16)]
        max_len: i64,
        #[arg(long)]
        lambda: Option<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same-length instance whose optimum is 3 or 2 by membership of the index.
    IndexSamelen {
        #[command(flatten)]
        index: IndexArgs,
    },
    /// Mixed-length instance whose optimum is 2k+1 or k+1 by membership of the index.
    IndexGeneral {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long, default_value_t = 3)]
        k: i64,
    },
    /// One interval per segment-tree node, shuffled.
    TreeCover {
        #[arg(long)]
        n: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct IndexArgs {
    #[arg(long)]
    n_bits: i64,
    /// Comma-separated members of the set; random with --seed when omitted.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    index: Option<i64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Stream file; standard input when omitted or `-`.
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    General,
    Samelen,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command, stdin) {
        Ok((text, out, ok)) => match emit(&text, out.as_deref(), stdout) {
            Ok(()) => i32::from(!ok),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn emit(text: &str, out: Option<&std::path::Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

type Outcome = (String, Option<PathBuf>, bool);

fn execute(cmd: Command, stdin: &mut dyn Read) -> Result<Outcome> {
    match cmd {
        Command::Gen { kind } => gen(kind),
        Command::Select { algo, lambda, io } => {
            let (inst, id) = load(&io, None, stdin)?;
            let a = alpha(&inst);
            let (algo, lambda) = match algo {
                Family::General => (Algo::SelectGeneral, 0),
                Family::Samelen => samelen_algo(Algo::SelectSamelen, lambda, &inst),
            };
            let params = RunParams { lambda, ..RunParams::new(algo) };
            let report = harness::run_once(&inst, &params, 0, a, &id)?;
            let solution: Vec<String> = match algo {
                Algo::SelectGeneral => crate::selector::select(&inst.intervals).solution(),
                Algo::SelectSamelen => crate::samelen::select_samelen(lambda, &inst.intervals)?.solution(),
                _ => distinct_points(&inst),
            }
            .iter()
            .map(|iv| iv.to_string())
            .collect();
            let mut v = report_value(&report, false);
            v["solution"] = json!(solution);
            Ok((line(&v), io.out, report.success))
        }
        Command::Estimate { algo, eps, seed, scale, counter, lambda, n, oracle, timing, io } => {
            let (inst, id) = load(&io, n, stdin)?;
            let a = alpha(&inst);
            let (algo, lambda) = match (algo, oracle) {
                (Family::General, false) => (Algo::EstimateGeneral, 0),
                (Family::General, true) => (Algo::OracleGeneral, 0),
                (Family::Samelen, false) => samelen_algo(Algo::EstimateSamelen, lambda, &inst),
                (Family::Samelen, true) => samelen_algo(Algo::OracleSamelen, lambda, &inst),
            };
            let params = RunParams { algo, eps, lambda, scale, counter };
            let report = harness::run_once(&inst, &params, seed, a, &id)?;
            Ok((line(&report_value(&report, timing)), io.out, report.success))
        }
        Command::Exact { io } => {
            let (inst, id) = load(&io, None, stdin)?;
            let v = json!({"instance": id, "n": inst.n, "count": inst.len(), "alpha": alpha(&inst)});
            Ok((line(&v), io.out, true))
        }
        Command::Trials {
            algo, trials, workers, seed, eps, lambda, scale, counter, n, group, min_success, timing, io,
        } => {
            if let Some(m) = min_success {
                if !(0.0..=1.0).contains(&m) {
                    return Err(Error::param("min-success", format!("must lie in [0, 1], got {m}")));
                }
            }
            let (inst, id) = load(&io, n, stdin)?;
            let (algo, lambda) = match algo {
                Algo::SelectSamelen | Algo::EstimateSamelen | Algo::OracleSamelen => {
                    samelen_algo(algo, lambda, &inst)
                }
                other => (other, lambda.unwrap_or(0)),
            };
            let plan = TrialPlan {
                params: RunParams { algo, eps, lambda, scale, counter },
                trials,
                base_seed: seed,
                workers,
                group,
                timing,
                instance_id: id,
            };
            let (reports, summary) = harness::run_trials(&inst, &plan)?;
            let need = min_success.unwrap_or(if algo.is_randomized() { 2.0 / 3.0 } else { 1.0 });
            let ok = summary.success_fraction >= need;
            Ok((harness::render_jsonl(&reports, &summary), io.out, ok))
        }
    }
}

/// Picks λ (given or taken from the first interval); λ = 0 becomes a point count.
fn samelen_algo(algo: Algo, lambda: Option<i64>, inst: &Instance) -> (Algo, i64) {
    let lambda = lambda.unwrap_or_else(|| inst.intervals.first().map_or(1, |iv| iv.len()));
    if lambda == 0 {
        (Algo::DistinctPoints, 0)
    } else {
        (algo, lambda)
    }
}

fn distinct_points(inst: &Instance) -> Vec<crate::model::Interval> {
    let mut seen = BTreeSet::new();
    inst.intervals.iter().copied().filter(|iv| seen.insert(iv.left())).collect()
}

fn report_value(r: &harness::TrialReport, timing: bool) -> Value {
    let mut r = r.clone();
    if !timing {
        r.wall_ms = None;
    }
    serde_json::to_value(&r).expect("report serializes")
}

fn line(v: &Value) -> String {
    format!("{v}\n")
}

fn load(io: &IoArgs, n: Option<i64>, stdin: &mut dyn Read) -> Result<(Instance, String)> {
    let (text, id) = match io.input.as_deref() {
        Some(p) if p.as_os_str() != "-" => (
            std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
            p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned()),
        ),
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            (s, "stdin".to_string())
        }
    };
    let parsed = parse_stream_detailed(&text)?;
    let inst = match n {
        Some(n) => Instance::new(n, parsed.instance.intervals)?,
        None => parsed.instance,
    };
    Ok((inst, id))
}

fn parse_set(s: &str) -> Result<BTreeSet<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::param("set", format!("not an integer: `{t}`"))))
        .collect()
}

fn index_input(a: &IndexArgs) -> Result<(BTreeSet<i64>, i64)> {
    let (rs, ri) = harness::random_index_input(a.n_bits, a.seed);
    let set = match &a.set {
        Some(s) => parse_set(s)?,
        None => rs,
    };
    Ok((set, a.index.unwrap_or(ri)))
}

fn gen(kind: GenKind) -> Result<Outcome> {
    let (inst, out) = match kind {
        GenKind::Uniform { n, count, max_len, lambda, seed, out } => {
            let inst = match lambda {
                Some(l) => harness::gen_uniform_samelen(n, count, l, seed)?,
                None => harness::gen_uniform(n, count, max_len, seed)?,
            };
            (inst, out)
        }
        GenKind::IndexSamelen { index } => {
            let (set, i) = index_input(&index)?;
            (harness::gen_index_samelen(index.n_bits, &set, i)?, index.out)
        }
        GenKind::IndexGeneral { index, k } => {
            let (set, i) = index_input(&index)?;
            (harness::gen_index_general(index.n_bits, &set, i, k)?, index.out)
        }
        GenKind::TreeCover { n, seed, out } => (harness::gen_tree_cover(n, seed)?, out),
    };
    Ok((format_stream(&inst), out, true))
}

