//! `bcod`: encode, decode, inspect and benchmark run-token recoding.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 corrupt or foreign
//! archive.

mod report;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bcod_core::bench::{self, GeneratorKind, GeneratorSpec};
use bcod_core::{model, tokenize, Archive, BitVector, Mode};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::{emit, opt_ratio, ratio, Format, Row};

#[derive(Debug, Parser)]
#[command(name = "bcod", version, about = "Run-token recoding of binary files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Huffman,
    Symmetric,
    Shannon,
    Raw,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Huffman => Mode::Huffman,
            ModeArg::Symmetric => Mode::Symmetric,
            ModeArg::Shannon => Mode::Shannon,
            ModeArg::Raw => Mode::Raw,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a file into a .bcod archive.
    Encode {
        /// Input file, or `-` for standard input.
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(short, long, value_enum, default_value = "huffman")]
        mode: ModeArg,
        #[arg(short, long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Restore the original file from an archive.
    Decode {
        archive: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print token statistics and projected payload sizes.
    Stats {
        input: PathBuf,
        #[arg(short, long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Flip payload bits of a symmetric encoding and measure recovery.
    Flip {
        input: PathBuf,
        /// Payload bit to flip; repeatable.
        #[arg(short, long = "position", conflicts_with = "random")]
        positions: Vec<usize>,
        /// Flip this many distinct random payload bits.
        #[arg(short, long)]
        random: Option<usize>,
        #[arg(short, long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Measure payload and container ratios on a corpus or synthetic sources.
    Bench {
        /// Directory of input files.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// uniform | bernoulli:P | zeros | ones | file:PATH; repeatable.
        #[arg(short, long = "generator")]
        generators: Vec<String>,
        /// Bits per generated input.
        #[arg(short, long, default_value_t = 1_000_000)]
        bits: usize,
        /// Modes to measure; repeatable.
        #[arg(short, long = "mode", value_enum, default_values = ["huffman"])]
        modes: Vec<ModeArg>,
        #[arg(short, long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, value_enum, default_value = "table")]
        format: Format,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String, io::Error),
    Format(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(..) => 2,
            CliError::Format(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Format(m) => f.write_str(m),
            CliError::Io(what, e) => write!(f, "{what}: {e}"),
        }
    }
}

impl From<bcod_core::Error> for CliError {
    fn from(e: bcod_core::Error) -> Self {
        match e {
            bcod_core::Error::Io(io) => CliError::Io("i/o".into(), io),
            e if e.is_format_error() => CliError::Format(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_err(what: impl AsRef<Path>) -> impl FnOnce(io::Error) -> CliError {
    let what = what.as_ref().display().to_string();
    move |e| CliError::Io(what, e)
}

fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(io_err("<stdin>"))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(io_err(path))
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io(path.display().to_string(), e.error))?;
    Ok(())
}

#[derive(Serialize)]
struct EncodeRow {
    input: String,
    mode: &'static str,
    original_bits: u64,
    payload_bits: u64,
    residue_bits: u64,
    table_bytes: usize,
    container_bytes: usize,
    payload_ratio: f64,
    container_ratio: f64,
}

impl Row for EncodeRow {
    const HEADER: &'static [&'static str] = &[
        "input",
        "mode",
        "original_bits",
        "payload_bits",
        "residue_bits",
        "table_bytes",
        "container_bytes",
        "payload_ratio",
        "container_ratio",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.input.clone(),
            self.mode.into(),
            self.original_bits.to_string(),
            self.payload_bits.to_string(),
            self.residue_bits.to_string(),
            self.table_bytes.to_string(),
            self.container_bytes.to_string(),
            ratio(self.payload_ratio),
            ratio(self.container_ratio),
        ]
    }
}

fn cmd_encode(input: &Path, output: &Path, mode: Mode, format: Format) -> CliResult {
    let bytes = read_input(input)?;
    let bits = BitVector::from_byte_slice(&bytes);
    let archive = bcod_core::compress(&bits, mode);
    let packed = archive.pack();
    write_atomic(output, &packed)?;

    let original = bits.len() as u64;
    let row = EncodeRow {
        input: input.display().to_string(),
        mode: mode.name(),
        original_bits: original,
        payload_bits: archive.payload_bits(),
        residue_bits: archive.residue_len,
        table_bytes: archive.table_bytes(),
        container_bytes: packed.len(),
        payload_ratio: if original == 0 {
            1.0
        } else {
            archive.payload_and_residue_bits() as f64 / original as f64
        },
        container_ratio: if original == 0 {
            f64::INFINITY
        } else {
            (packed.len() * 8) as f64 / original as f64
        },
    };
    emit(&mut io::stdout().lock(), format, &[row]).map_err(io_err("<stdout>"))
}

fn cmd_decode(archive: &Path, output: &Path) -> CliResult {
    let bytes = fs::read(archive).map_err(io_err(archive))?;
    let archive = Archive::unpack(&bytes)?;
    let bits = bcod_core::decompress(&archive)?;
    if bits.len() % 8 != 0 {
        eprintln!(
            "warning: archive holds {} bits; the last byte is zero-padded",
            bits.len()
        );
    }
    write_atomic(output, bits.as_bytes())
}

#[derive(Serialize)]
struct ClassRow {
    k: u64,
    count: u64,
    probability: f64,
}

impl Row for ClassRow {
    const HEADER: &'static [&'static str] = &["k", "count", "probability"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.count.to_string(),
            format!("{:.6}", self.probability),
        ]
    }
}

#[derive(Serialize)]
struct StatsSummary {
    input_bits: u64,
    tokens: u64,
    classes: usize,
    residue_bits: u64,
    entropy_bits_per_token: Option<f64>,
    identity_payload_bits: u128,
    huffman_payload_bits: u128,
    symmetric_payload_bits: u128,
    shannon_payload_bits: u128,
    raw_payload_bits: u64,
}

fn cmd_stats(input: &Path, format: Format) -> CliResult {
    let bytes = read_input(input)?;
    let bits = BitVector::from_byte_slice(&bytes);
    let stream = tokenize(&bits);
    let table = model::count(&stream);

    let rows: Vec<ClassRow> = table
        .iter()
        .map(|(k, n)| ClassRow {
            k: k.get(),
            count: n,
            probability: table.probability(k),
        })
        .collect();
    let projected = |mode: Mode| -> Option<u128> {
        let book = mode.build_book(&table).ok()??;
        book.payload_bits(&table).ok()
    };
    let summary = StatsSummary {
        input_bits: bits.len() as u64,
        tokens: table.total(),
        classes: table.alphabet_len(),
        residue_bits: stream.residue,
        entropy_bits_per_token: table.entropy_bits_per_token().ok(),
        identity_payload_bits: table.identity_payload_bits(),
        huffman_payload_bits: projected(Mode::Huffman).unwrap_or(0),
        symmetric_payload_bits: projected(Mode::Symmetric).unwrap_or(0),
        shannon_payload_bits: projected(Mode::Shannon).unwrap_or(0),
        raw_payload_bits: bits.len() as u64,
    };

    let out = &mut io::stdout().lock();
    let write = |out: &mut dyn Write| -> io::Result<()> {
        match format {
            Format::JsonLines => {
                emit(out, format, &rows)?;
                serde_json::to_writer(&mut *out, &serde_json::json!({ "summary": summary }))?;
                writeln!(out)
            }
            Format::Csv | Format::Table => {
                emit(out, format, &rows)?;
                writeln!(out)?;
                let value = serde_json::to_value(&summary).map_err(io::Error::other)?;
                let pairs: Vec<Vec<String>> = value
                    .as_object()
                    .unwrap()
                    .iter()
                    .map(|(key, v)| {
                        let v = match v {
                            serde_json::Value::Null => "n/a".to_string(),
                            serde_json::Value::Number(n) if n.is_f64() => {
                                format!("{:.4}", n.as_f64().unwrap())
                            }
                            other => other.to_string(),
                        };
                        vec![key.clone(), v]
                    })
                    .collect();
                if format == Format::Csv {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["metric", "value"])?;
                    for p in &pairs {
                        w.write_record(p)?;
                    }
                    w.flush()
                } else {
                    for p in &pairs {
                        writeln!(out, "{:<24} {}", p[0], p[1])?;
                    }
                    Ok(())
                }
            }
        }
    };
    write(out).map_err(io_err("<stdout>"))
}

#[derive(Serialize)]
struct FlipRow {
    input: String,
    payload_bits: usize,
    flipped: String,
    total_tokens: usize,
    forward_recovered: usize,
    backward_recovered: usize,
    bidirectional_recovered: usize,
    damage_window_bits: usize,
}

impl Row for FlipRow {
    const HEADER: &'static [&'static str] = &[
        "input",
        "payload_bits",
        "flipped",
        "total_tokens",
        "forward",
        "backward",
        "bidirectional",
        "damage_window_bits",
    ];

    fn cells(&self) -> Vec<String> {
        let pct = |n: usize| {
            if self.total_tokens == 0 {
                format!("{n}")
            } else {
                format!("{n} ({:.1}%)", 100.0 * n as f64 / self.total_tokens as f64)
            }
        };
        vec![
            self.input.clone(),
            self.payload_bits.to_string(),
            self.flipped.clone(),
            self.total_tokens.to_string(),
            pct(self.forward_recovered),
            pct(self.backward_recovered),
            pct(self.bidirectional_recovered),
            self.damage_window_bits.to_string(),
        ]
    }
}

fn cmd_flip(
    input: &Path,
    positions: Vec<usize>,
    random: Option<usize>,
    seed: u64,
    format: Format,
) -> CliResult {
    let bytes = read_input(input)?;
    let bits = BitVector::from_byte_slice(&bytes);
    let payload_bits = bench::symmetric_payload_bits(&bits);
    let positions = match random {
        Some(n) => bench::random_positions(payload_bits, n, seed)?,
        None => positions,
    };
    let r = bench::flip_experiment(&bits, &positions)?;
    let row = FlipRow {
        input: input.display().to_string(),
        payload_bits,
        flipped: positions
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" "),
        total_tokens: r.total_tokens,
        forward_recovered: r.forward_recovered,
        backward_recovered: r.backward_recovered,
        bidirectional_recovered: r.bidirectional_recovered,
        damage_window_bits: r.damage_window,
    };
    emit(&mut io::stdout().lock(), format, &[row]).map_err(io_err("<stdout>"))
}

#[derive(Serialize)]
struct BenchRow {
    input: String,
    bits: u64,
    mode: &'static str,
    payload_bits: u64,
    payload_ratio: f64,
    container_ratio: f64,
    /// Analytic expectation for Bernoulli sources.
    oracle_ratio: Option<f64>,
    /// Binary entropy of the source, a floor for any lossless code.
    entropy_bound: Option<f64>,
    millis: f64,
}

impl Row for BenchRow {
    const HEADER: &'static [&'static str] = &[
        "input",
        "bits",
        "mode",
        "payload_bits",
        "payload_ratio",
        "container_ratio",
        "oracle_ratio",
        "entropy_bound",
        "millis",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.input.clone(),
            self.bits.to_string(),
            self.mode.into(),
            self.payload_bits.to_string(),
            ratio(self.payload_ratio),
            ratio(self.container_ratio),
            opt_ratio(self.oracle_ratio),
            opt_ratio(self.entropy_bound),
            format!("{:.2}", self.millis),
        ]
    }
}

struct BenchInput {
    name: String,
    bits: BitVector,
    /// Probability of a 1-bit, when the source is a known i.i.d. generator.
    p_one: Option<f64>,
}

fn bench_inputs(
    corpus: Option<&Path>,
    generators: &[String],
    bits: usize,
    seed: u64,
) -> CliResult<Vec<BenchInput>> {
    let mut inputs = Vec::new();
    if let Some(dir) = corpus {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        for p in paths {
            let bytes = fs::read(&p).map_err(io_err(&p))?;
            inputs.push(BenchInput {
                name: p.display().to_string(),
                bits: BitVector::from_byte_slice(&bytes),
                p_one: None,
            });
        }
    }
    for (i, g) in generators.iter().enumerate() {
        let kind: GeneratorKind = g.parse()?;
        let p_one = match kind {
            GeneratorKind::Uniform => Some(0.5),
            GeneratorKind::Bernoulli(p) => Some(p),
            _ => None,
        };
        let spec = GeneratorSpec::new(kind, bits, seed.wrapping_add(i as u64));
        inputs.push(BenchInput {
            name: g.clone(),
            bits: bench::generate(&spec)?,
            p_one,
        });
    }
    if inputs.is_empty() {
        return Err(CliError::Usage(
            "bench needs --corpus DIR or at least one --generator".into(),
        ));
    }
    Ok(inputs)
}

fn cmd_bench(
    corpus: Option<&Path>,
    generators: &[String],
    bits: usize,
    modes: &[Mode],
    seed: u64,
    format: Format,
) -> CliResult {
    let inputs = bench_inputs(corpus, generators, bits, seed)?;
    let mut rows = Vec::new();
    for input in &inputs {
        for &mode in modes {
            let m = bench::measure(&input.bits, mode)?;
            let interior = input.p_one.filter(|p| *p > 0.0 && *p < 1.0);
            rows.push(BenchRow {
                input: input.name.clone(),
                bits: m.input_bits,
                mode: mode.name(),
                payload_bits: m.payload_bits + m.residue_bits,
                payload_ratio: m.payload_ratio(),
                container_ratio: m.container_ratio(),
                oracle_ratio: interior.and_then(|p| bench::expected_ratio_oracle(p, mode).ok()),
                entropy_bound: input.p_one.map(bench::binary_entropy),
                millis: m.elapsed.as_secs_f64() * 1e3,
            });
        }
    }
    for &mode in modes {
        let of_mode: Vec<&BenchRow> = rows.iter().filter(|r| r.mode == mode.name()).collect();
        let n = of_mode.len() as f64;
        let mean = |f: fn(&BenchRow) -> f64| of_mode.iter().map(|r| f(r)).sum::<f64>() / n;
        let summary = BenchRow {
            input: "mean".into(),
            bits: (of_mode.iter().map(|r| r.bits).sum::<u64>() as f64 / n) as u64,
            mode: mode.name(),
            payload_bits: (of_mode.iter().map(|r| r.payload_bits).sum::<u64>() as f64 / n) as u64,
            payload_ratio: mean(|r| r.payload_ratio),
            container_ratio: mean(|r| r.container_ratio),
            oracle_ratio: None,
            entropy_bound: None,
            millis: mean(|r| r.millis),
        };
        rows.push(summary);
    }

    let out = &mut io::stdout().lock();
    emit(out, format, &rows).map_err(io_err("<stdout>"))?;
    if format == Format::Table {
        let note = "note: payload_ratio excludes the code table and header; container_ratio \
                    includes them. For i.i.d. uniform bits the token classes are exactly \
                    dyadic, so no prefix recoding can beat a payload ratio of 1.0 on average; \
                    reductions appear only on biased or structured inputs.";
        writeln!(out, "\n{note}").map_err(io_err("<stdout>"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Encode {
            input,
            output,
            mode,
            format,
        } => cmd_encode(&input, &output, mode.into(), format),
        Command::Decode { archive, output } => cmd_decode(&archive, &output),
        Command::Stats { input, format } => cmd_stats(&input, format),
        Command::Flip {
            input,
            positions,
            random,
            seed,
            format,
        } => cmd_flip(&input, positions, random, seed, format),
        Command::Bench {
            corpus,
            generators,
            bits,
            modes,
            seed,
            format,
        } => {
            let modes: Vec<Mode> = modes.into_iter().map(Mode::from).collect();
            cmd_bench(corpus.as_deref(), &generators, bits, &modes, seed, format)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcod: {e}");
            ExitCode::from(e.code())
        }
    }
}
