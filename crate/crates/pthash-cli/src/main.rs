//! Command-line front end for the `pthash` crate: build a minimal perfect
//! hash function over a key set, then query, verify or benchmark it.
//!
//! Exit codes: 0 on success, 2 for usage errors (from the argument parser),
//! 3 for build failures, 4 for verification failures and 5 for I/O or
//! function-file decode failures.

mod function;
mod report;
mod source;

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pthash::{
    build_external_with_stats, build_partitioned_with_stats, build_with_stats, BuildConfig,
    BuildError, EncoderKind, HemConfig, MemoryBudget,
};

use function::FunctionFile;
use report::{emit_rows, RunReport};
use source::KeyBag;

/// Keys per partition when `--avg-partition-size` is left at its default:
/// sized for desk-scale experiments rather than the library's billion-key
/// default of five million.
const DEFAULT_AVG_PARTITION_SIZE: u64 = 100_000;

#[derive(Parser)]
#[command(name = "pthash", version, about = "Minimal perfect hash functions: build, query, verify, bench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a function over a key set and write it to a file.
    Build(BuildArgs),
    /// Print the value of each given key under a built function.
    Query(QueryArgs),
    /// Check that a function maps its key set one-to-one onto [0, n).
    Verify(VerifyArgs),
    /// Time lookups over a key set and report nanoseconds per key.
    Bench(BenchArgs),
}

/// Where the keys come from. Exactly one of the two flags must be given.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Newline-delimited key file; keys are the raw line bytes.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,

    /// Use N distinct synthetic 8-byte keys derived from the seed.
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Destination for the serialized function.
    #[arg(short, long, value_name = "PATH")]
    output: PathBuf,

    /// Bucket density: the build uses ceil(c * n / log2 n) buckets.
    #[arg(short, value_name = "C", default_value_t = 7.0)]
    c: f64,

    /// Load factor: n keys occupy ceil(n / alpha) slots.
    #[arg(short, long, value_name = "ALPHA", default_value_t = 0.94)]
    alpha: f64,

    /// Pilot-table representation.
    #[arg(long, value_enum, default_value_t = EncoderFlag::Dd)]
    encoder: EncoderFlag,

    /// Worker threads for the map and pilot-search phases.
    #[arg(long, value_name = "K", default_value_t = 1)]
    threads: usize,

    /// Seed for the build, and for --gen key synthesis.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Construct with bounded memory, spilling sorted runs to disk.
    #[arg(long, requires = "ram_budget")]
    external: bool,

    /// Byte budget for --external construction state.
    #[arg(long, value_name = "BYTES", requires = "external")]
    ram_budget: Option<usize>,

    /// Spill-file directory for --external (system temp by default).
    #[arg(long, value_name = "PATH", requires = "external")]
    tmp_dir: Option<PathBuf>,

    /// Split the keys into R partitions, each built independently.
    #[arg(long, value_name = "R", conflicts_with_all = ["external", "avg_partition_size"])]
    partitions: Option<u64>,

    /// Partitioned layout with roughly this many keys per partition.
    #[arg(long, value_name = "B", conflicts_with = "external")]
    avg_partition_size: Option<u64>,

    /// Append the CSV row to this file instead of printing it to stdout.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Function file produced by `build`.
    #[arg(value_name = "FUNCTION")]
    function: PathBuf,

    /// Keys to look up, taken as their literal bytes; with none given,
    /// newline-delimited keys are read from stdin.
    #[arg(value_name = "KEY")]
    keys: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Function file produced by `build`.
    #[arg(value_name = "FUNCTION")]
    function: PathBuf,

    #[command(flatten)]
    source: SourceArgs,

    /// Seed used at build time (relevant for --gen sources).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Function file produced by `build`.
    #[arg(value_name = "FUNCTION")]
    function: PathBuf,

    #[command(flatten)]
    source: SourceArgs,

    /// Seed used at build time (relevant for --gen sources).
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Timed passes over the key set; the row reports their average.
    #[arg(long, default_value_t = 5)]
    reps: u32,

    /// Append the CSV row to this file instead of printing it to stdout.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

/// `--encoder` values, mirroring [`EncoderKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EncoderFlag {
    /// Front-back dictionary.
    Dd,
    /// Partitioned compact.
    Pc,
    /// Elias-Fano.
    Ef,
}

impl EncoderFlag {
    fn kind(self) -> EncoderKind {
        match self {
            EncoderFlag::Dd => EncoderKind::Dictionary,
            EncoderFlag::Pc => EncoderKind::Compact,
            EncoderFlag::Ef => EncoderKind::EliasFano,
        }
    }
}

/// CSV label for an encoder; matches the `--encoder` flag values.
fn encoder_label(kind: EncoderKind) -> &'static str {
    match kind {
        EncoderKind::Dictionary => "dd",
        EncoderKind::Compact => "pc",
        EncoderKind::EliasFano => "ef",
    }
}

/// Command failures, each mapped to a distinct exit code.
#[derive(Debug, thiserror::Error)]
pub(crate) enum CliError {
    #[error("build failed: {0}")]
    Build(#[from] BuildError),

    /// Caught by the pre-build scan so the report can name line numbers
    /// instead of a seed-dependent hash collision deep in the pipeline.
    #[error("build failed: line {line} of {path} repeats the key on line {first}")]
    DuplicateKey { path: PathBuf, line: usize, first: usize },

    #[error("verification failed: {0}")]
    Verify(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Build(_) | CliError::DuplicateKey { .. } => 3,
            CliError::Verify(_) => 4,
            CliError::Io { .. } => 5,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Query(args) => cmd_query(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_build(args: BuildArgs) -> Result<(), CliError> {
    let bag = KeyBag::load(args.source.input.as_deref(), args.source.gen, args.seed)?;
    bag.scan_duplicates()?;
    let keys = bag.keys();

    let config = BuildConfig {
        c: args.c,
        alpha: args.alpha,
        seed: args.seed,
        workers: args.threads,
        encoder: args.encoder.kind(),
        ..BuildConfig::default()
    };

    let partitioned = args.partitions.is_some() || args.avg_partition_size.is_some();
    let started = Instant::now();
    let (bytes, stats, bits_per_key, mode, partition_count) = if partitioned {
        let hem = HemConfig {
            build: config,
            avg_partition_size: args.avg_partition_size.unwrap_or(DEFAULT_AVG_PARTITION_SIZE),
            num_partitions: args.partitions,
        };
        let (f, stats) = build_partitioned_with_stats(&keys, &hem)?;
        (f.to_bytes(), stats, f.bits_per_key(), "internal-hem", Some(f.num_partitions()))
    } else if args.external {
        let budget = args.ram_budget.expect("clap ties --external to --ram-budget");
        let (f, stats, _) =
            build_external_with_stats(&keys, &config, MemoryBudget::new(budget)?, args.tmp_dir.as_deref())?;
        (f.to_bytes(), stats, f.bits_per_key(), "external-flat", None)
    } else {
        let (f, stats) = build_with_stats(&keys, &config)?;
        (f.to_bytes(), stats, f.bits_per_key(), "internal-flat", None)
    };
    let seconds = started.elapsed().as_secs_f64();

    std::fs::write(&args.output, &bytes)
        .map_err(|e| CliError::io(format!("writing {}", args.output.display()), e))?;

    let partition_note = partition_count
        .map(|r| format!(" across {r} partitions"))
        .unwrap_or_default();
    eprintln!(
        "built {} keys into {} buckets{} with seed {} in {:.3}s; wrote {} ({} bytes, {:.3} bits/key)",
        stats.num_keys,
        stats.num_buckets,
        partition_note,
        stats.seed,
        seconds,
        args.output.display(),
        bytes.len(),
        bits_per_key,
    );

    let row = RunReport {
        n: stats.num_keys,
        c: Some(args.c),
        alpha: Some(args.alpha),
        encoder: encoder_label(args.encoder.kind()),
        workers: Some(args.threads),
        mode,
        construction_seconds: Some(seconds),
        bits_per_key,
        lookup_ns_per_key: None,
        pilot_attempts: Some(stats.pilot_attempts),
        seed: stats.seed,
    };
    emit_rows(&[row], args.report.as_deref())
        .map_err(|e| CliError::io("writing report".to_string(), e))
}

fn cmd_query(args: QueryArgs) -> Result<(), CliError> {
    let function = FunctionFile::load(&args.function)?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut print = |key: &[u8]| -> Result<(), CliError> {
        writeln!(out, "{}", function.lookup(key))
            .map_err(|e| CliError::io("writing to stdout".to_string(), e))
    };
    if args.keys.is_empty() {
        let mut data = Vec::new();
        io::stdin()
            .read_to_end(&mut data)
            .map_err(|e| CliError::io("reading keys from stdin".to_string(), e))?;
        for key in pthash::util::split_key_lines(&data) {
            print(key)?;
        }
    } else {
        for key in &args.keys {
            print(key.as_bytes())?;
        }
    }
    out.flush().map_err(|e| CliError::io("writing to stdout".to_string(), e))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let function = FunctionFile::load(&args.function)?;
    let bag = KeyBag::load(args.source.input.as_deref(), args.source.gen, args.seed)?;
    let keys = bag.keys();

    let n = function.num_keys();
    if keys.len() as u64 != n {
        return Err(CliError::Verify(format!(
            "function holds {n} keys but the source supplied {}",
            keys.len()
        )));
    }

    // One owner slot per value; u64::MAX marks "not hit yet".
    let mut owner: Vec<u64> = vec![u64::MAX; keys.len()];
    for (index, key) in keys.iter().enumerate() {
        let value = function.lookup(key);
        if value >= n {
            return Err(CliError::Verify(format!(
                "key #{} maps to {value}, outside [0, {n})",
                index + 1
            )));
        }
        let slot = &mut owner[value as usize];
        if *slot == u64::MAX {
            *slot = index as u64 + 1;
        } else {
            return Err(CliError::Verify(format!(
                "keys #{} and #{} both map to {value}",
                *slot,
                index + 1
            )));
        }
    }
    println!("ok: {n} keys map one-to-one onto [0, {n})");
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let function = FunctionFile::load(&args.function)?;
    let bag = KeyBag::load(args.source.input.as_deref(), args.source.gen, args.seed)?;
    let keys = bag.keys();
    if keys.is_empty() {
        // Nothing to time; no rows.
        return Ok(());
    }

    let reps = args.reps.max(1);
    let mut per_rep = Vec::with_capacity(reps as usize);
    for _ in 0..reps {
        let started = Instant::now();
        let mut sink = 0u64;
        for key in &keys {
            sink ^= function.lookup(std::hint::black_box(*key));
        }
        let nanos = started.elapsed().as_nanos() as f64;
        std::hint::black_box(sink);
        per_rep.push(nanos / keys.len() as f64);
    }
    let average = per_rep.iter().sum::<f64>() / per_rep.len() as f64;
    eprintln!("{} passes over {} keys: {:.2} ns/key", reps, keys.len(), average);

    let row = RunReport {
        n: keys.len() as u64,
        c: None,
        alpha: None,
        encoder: encoder_label(function.encoder()),
        workers: Some(1),
        mode: function.layout(),
        construction_seconds: None,
        bits_per_key: function.bits_per_key(),
        lookup_ns_per_key: Some(average),
        pilot_attempts: None,
        seed: function.seed(),
    };
    emit_rows(&[row], args.report.as_deref())
        .map_err(|e| CliError::io("writing report".to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_definitions_are_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn encoder_flags_round_trip_their_labels() {
        for flag in [EncoderFlag::Dd, EncoderFlag::Pc, EncoderFlag::Ef] {
            let label = encoder_label(flag.kind());
            let parsed = <EncoderFlag as ValueEnum>::from_str(label, false).unwrap();
            assert_eq!(parsed, flag);
        }
    }

    #[test]
    fn exit_codes_are_distinct_per_failure_class() {
        let build = CliError::Build(BuildError::Config("x".into()));
        let dup = CliError::DuplicateKey { path: "k".into(), line: 2, first: 1 };
        let verify = CliError::Verify("x".into());
        let io = CliError::io("ctx", io::Error::new(io::ErrorKind::NotFound, "x"));
        assert_eq!(build.exit_code(), 3);
        assert_eq!(dup.exit_code(), 3);
        assert_eq!(verify.exit_code(), 4);
        assert_eq!(io.exit_code(), 5);
    }
}
