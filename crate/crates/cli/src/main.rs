use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use motkip_core::codec::dump::{decode_dump, encode_dump};
use motkip_core::codec::{decapsulate, encapsulate, KeyMaterial, Msdu, Scheme, DEFAULT_MAX_FRAGMENT};
use motkip_core::keymix::{phase1, phase2, MacAddr, P1k, TemporalKey};
use motkip_core::session::{Role, SecurityAssociation};
use motkip_core::sim::{SERVER_ADDR, STATION_ADDR};
use motkip_core::vectors::{check_vectors, decode_fixed, decode_u16, decode_u32, format_p1, format_p2};
use motkip_core::Error;

mod bench;
mod selftest;

use bench::{BenchConfig, Preset, RunReport};

const EXIT_USAGE: u8 = 1;
const EXIT_INTEGRITY: u8 = 2;
const EXIT_REPLAY: u8 = 3;
const EXIT_BLACKOUT: u8 = 4;

#[derive(Parser)]
#[command(name = "motkip", version, about = "TKIP / MoTKIP codecs, key-mixing vectors and link benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute or check TKIP key-mixing vectors.
    Keymix(KeymixArgs),
    /// Write a fresh key file.
    Keygen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        key_id: u8,
    },
    /// Encapsulate a file into an MTKP frame dump.
    Encap(EncapArgs),
    /// Decapsulate an MTKP frame dump back into a file.
    Decap(DecapArgs),
    /// Run the four-scheme link benchmark.
    Bench(BenchArgs),
    /// Run recorded vectors and a quick invariant suite.
    Selftest {
        /// Additional vector files to check.
        #[arg(long = "vectors")]
        vectors: Vec<PathBuf>,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct KeymixArgs {
    #[command(subcommand)]
    phase: Option<Phase>,
    /// Vector file to validate.
    #[arg(long)]
    check: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Phase {
    P1 {
        #[arg(long)]
        tk: String,
        #[arg(long)]
        ta: String,
        #[arg(long)]
        iv32: String,
    },
    P2 {
        #[arg(long)]
        p1k: Option<String>,
        #[arg(long)]
        tk: String,
        /// Derive P1K from TA and IV32 instead of passing it.
        #[arg(long, requires = "iv32", conflicts_with = "p1k")]
        ta: Option<String>,
        #[arg(long)]
        iv32: Option<String>,
        #[arg(long)]
        iv16: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Plain,
    Wep,
    Tkip,
    Motkip,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Plain => Scheme::Plain,
            SchemeArg::Wep => Scheme::Wep,
            SchemeArg::Tkip => Scheme::Tkip,
            SchemeArg::Motkip => Scheme::MoTkip,
        }
    }
}

#[derive(Args)]
struct LinkArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// key=value key file (see `keygen`).
    #[arg(long)]
    keys: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    /// Transmitter address, 12 hex digits.
    #[arg(long)]
    ta: Option<String>,
}

#[derive(Args)]
struct EncapArgs {
    #[command(flatten)]
    link: LinkArgs,
    #[arg(long, default_value_t = 1500)]
    msdu: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_FRAGMENT)]
    max_fragment: usize,
}

#[derive(Args)]
struct DecapArgs {
    #[command(flatten)]
    link: LinkArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BenchArgs {
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run the configuration echoed in an earlier CSV or JSON report.
    #[arg(long, conflicts_with_all = ["config", "table1", "table2"])]
    replay: Option<PathBuf>,
    #[arg(long, conflicts_with = "table2")]
    table1: bool,
    #[arg(long)]
    table2: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// MSDU size in octets.
    #[arg(long)]
    msdu: Option<usize>,
    /// Number of MSDUs.
    #[arg(long)]
    count: Option<u64>,
    /// Total payload; sets the MSDU count.
    #[arg(long)]
    bytes: Option<u64>,
    #[arg(long)]
    loss: Option<f64>,
    #[arg(long)]
    reorder: Option<usize>,
    #[arg(long)]
    corrupt: Option<f64>,
    #[arg(long)]
    precompute: Option<usize>,
    /// Comma-separated scheme list.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the event log (JSON lines) here.
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Print host wall-clock timings to stderr (informative only).
    #[arg(long)]
    wallclock: bool,
}

/// An error that carries its exit status.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

fn usage(e: impl Into<anyhow::Error>) -> Exit {
    Exit(EXIT_USAGE, e.into())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::IcvMismatch | Error::MicFailure | Error::EpochMismatch => EXIT_INTEGRITY,
        Error::ReplayDetected(_) => EXIT_REPLAY,
        Error::Blackout { .. } => EXIT_BLACKOUT,
        _ => EXIT_USAGE,
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_out(path: Option<&Path>, data: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, data).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(data).context("writing stdout"),
    }
}

fn mac(s: Option<&str>, default: MacAddr) -> Result<MacAddr> {
    Ok(match s {
        Some(s) => MacAddr(decode_fixed(s)?),
        None => default,
    })
}

fn cmd_keymix(args: KeymixArgs) -> Result<(), Exit> {
    if let Some(path) = args.check {
        let text = read_text(&path).map_err(usage)?;
        let outcomes = check_vectors(&text);
        let mut failed = 0;
        for o in &outcomes {
            if let Err(e) = &o.result {
                failed += 1;
                eprintln!("{}:{}: {} FAILED: {e}", path.display(), o.line, o.name);
            }
        }
        if outcomes.is_empty() {
            return Err(usage(anyhow!("{}: no vectors found", path.display())));
        }
        println!("{} vectors, {} passed, {failed} failed", outcomes.len(), outcomes.len() - failed);
        return if failed == 0 { Ok(()) } else { Err(Exit(EXIT_USAGE, anyhow!("{failed} vector(s) failed"))) };
    }
    let line = match args.phase {
        None => return Err(usage(anyhow!("expected `p1`, `p2` or `--check <file>`"))),
        Some(Phase::P1 { tk, ta, iv32 }) => {
            let tk = TemporalKey(decode_fixed(&tk).map_err(usage)?);
            let ta = MacAddr(decode_fixed(&ta).map_err(usage)?);
            let iv32 = decode_u32(&iv32).map_err(usage)?;
            format_p1(&tk, &ta, iv32, &phase1(&tk, &ta, iv32))
        }
        Some(Phase::P2 { p1k, tk, ta, iv32, iv16 }) => {
            let tk = TemporalKey(decode_fixed(&tk).map_err(usage)?);
            let iv16 = decode_u16(&iv16).map_err(usage)?;
            let p1k = match (p1k, ta, iv32) {
                (Some(p), _, _) => P1k::from_hex(&p).map_err(usage)?,
                (None, Some(ta), Some(iv32)) => {
                    phase1(&tk, &MacAddr(decode_fixed(&ta).map_err(usage)?), decode_u32(&iv32).map_err(usage)?)
                }
                _ => return Err(usage(anyhow!("p2 needs --p1k, or --ta with --iv32"))),
            };
            format_p2(&p1k, &tk, iv16, &phase2(&p1k, &tk, iv16))
        }
    };
    println!("{line}");
    Ok(())
}

fn association(link: &LinkArgs, role: Role) -> Result<SecurityAssociation> {
    let text = read_text(&link.keys)?;
    let keys = KeyMaterial::from_key_file(&text).with_context(|| format!("key file {}", link.keys.display()))?;
    let keys = if role == Role::Receiver { keys.peer() } else { keys };
    let ta = mac(link.ta.as_deref(), STATION_ADDR)?;
    let mut sa = SecurityAssociation::new(link.scheme.into(), role, keys, ta);
    sa.set_bssid(SERVER_ADDR);
    Ok(sa)
}

fn cmd_encap(args: EncapArgs) -> Result<(), Exit> {
    if args.msdu == 0 {
        return Err(usage(anyhow!("--msdu must be positive")));
    }
    let mut sa = association(&args.link, Role::Transmitter).map_err(usage)?;
    let data = read(&args.link.input).map_err(usage)?;
    let ta = sa.transmitter_address();
    let mut frames = Vec::new();
    for (i, chunk) in data.chunks(args.msdu).enumerate() {
        let msdu = Msdu::new(SERVER_ADDR, ta, chunk.to_vec());
        let out = encapsulate(&mut sa, &msdu, args.max_fragment, 0).map_err(|e| Exit(exit_code(&e), anyhow!("MSDU {i}: {e}")))?;
        frames.extend(out);
    }
    fs::write(&args.link.output, encode_dump(&frames)).with_context(|| format!("writing {}", args.link.output.display())).map_err(usage)?;
    eprintln!("{} octets -> {} frames", data.len(), frames.len());
    Ok(())
}

fn cmd_decap(args: DecapArgs) -> Result<(), Exit> {
    let mut sa = association(&args.link, Role::Receiver).map_err(usage)?;
    let dump = read(&args.link.input).map_err(usage)?;
    let frames = decode_dump(&dump).map_err(usage)?;
    let mut out = Vec::new();
    // Exit with the most severe class seen: blackout > replay > integrity > format.
    let mut worst: Option<(u8, String)> = None;
    let mut failures = 0;
    for (i, f) in frames.iter().enumerate() {
        match decapsulate(&mut sa, f, 0) {
            Ok(Some(m)) => out.extend_from_slice(&m.payload),
            Ok(None) => {}
            Err(e) => {
                failures += 1;
                let msg = format!("frame {}: {e}", i + 1);
                eprintln!("{msg}");
                let code = exit_code(&e);
                if worst.as_ref().is_none_or(|(c, _)| code > *c) {
                    worst = Some((code, msg));
                }
            }
        }
    }
    fs::write(&args.link.output, &out).with_context(|| format!("writing {}", args.link.output.display())).map_err(usage)?;
    match worst {
        None => Ok(()),
        Some((code, msg)) => Err(Exit(code, anyhow!("{failures} of {} frames rejected; worst: {msg}", frames.len()))),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Exit> {
    let mut cfg = match (args.table1, args.table2) {
        (true, _) => BenchConfig::preset(Preset::Table1),
        (_, true) => BenchConfig::preset(Preset::Table2),
        _ => BenchConfig::default(),
    };
    if let Some(p) = &args.replay {
        cfg = bench::config_from_report(&read_text(p).map_err(usage)?).with_context(|| format!("report {}", p.display())).map_err(usage)?;
    }
    if let Some(p) = &args.config {
        cfg.apply_text(&read_text(p).map_err(usage)?).with_context(|| format!("config {}", p.display())).map_err(usage)?;
    }
    let overrides = [
        ("seed", args.seed.map(|v| v.to_string())),
        ("msdu_octets", args.msdu.map(|v| v.to_string())),
        ("msdu_count", args.count.map(|v| v.to_string())),
        ("loss_prob", args.loss.map(|v| v.to_string())),
        ("reorder_depth", args.reorder.map(|v| v.to_string())),
        ("corrupt_prob", args.corrupt.map(|v| v.to_string())),
        ("precompute_depth", args.precompute.map(|v| v.to_string())),
        ("schemes", args.schemes.clone()),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            cfg.set(k, &v).map_err(usage)?;
        }
    }
    // An explicit count wins over a byte total from a preset or file.
    if args.count.is_some() {
        cfg.bytes = None;
    }
    if let Some(b) = args.bytes {
        cfg.bytes = Some(b);
    }
    let cfg = cfg.resolved().map_err(usage)?;

    let start = Instant::now();
    let metrics = bench::run(&cfg, args.threads.max(1)).map_err(usage)?;
    if args.wallclock {
        eprintln!(
            "wall-clock (non-normative, host dependent): {} runs in {:.1} ms",
            metrics.len(),
            start.elapsed().as_secs_f64() * 1e3
        );
    }
    if let Some(path) = &args.events {
        let mut lines = String::new();
        for m in &metrics {
            for e in &m.events {
                let mut v = serde_json::to_value(e).expect("event serializes");
                v["scheme"] = serde_json::Value::String(m.scheme.to_string());
                lines.push_str(&v.to_string());
                lines.push('\n');
            }
        }
        fs::write(path, lines).with_context(|| format!("writing {}", path.display())).map_err(usage)?;
    }
    let report = RunReport::new(cfg, &metrics);
    let text = match args.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    write_out(args.out.as_deref(), text.as_bytes()).map_err(usage)
}

fn cmd_selftest(vectors: Vec<PathBuf>) -> Result<(), Exit> {
    let mut extra = Vec::new();
    for p in vectors {
        extra.push((p.display().to_string(), read_text(&p).map_err(usage)?));
    }
    let results = selftest::run_all(&extra);
    let mut failed = 0;
    for r in &results {
        println!("{}", r.line());
        failed += !r.failures.is_empty() as usize;
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Exit(EXIT_USAGE, anyhow!("{failed} suite(s) failed")))
    }
}

fn cmd_keygen(seed: u64, key_id: u8) -> Result<(), Exit> {
    if key_id > 3 {
        return Err(usage(anyhow!("--key-id must be 0-3")));
    }
    let keys = KeyMaterial { key_id, ..KeyMaterial::from_seed(seed) };
    print!("{}", keys.to_key_file());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Keymix(a) => cmd_keymix(a),
        Command::Keygen { seed, key_id } => cmd_keygen(seed, key_id),
        Command::Encap(a) => cmd_encap(a),
        Command::Decap(a) => cmd_decap(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Selftest { vectors } => cmd_selftest(vectors),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
