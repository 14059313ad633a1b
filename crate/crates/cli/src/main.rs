use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rmd_core::container::{Container, Payload};
use rmd_core::corpus::{entropy_h0, entropy_h1, CorpusModel, Scheme};
use rmd_core::{elias_encode, Codec, Error, IndexParams, RmdArray};

const CSV_HEADER: &str = "codec,l1,l2,payload_bytes,index_bytes,overhead_pct,ns_per_query";

#[derive(Parser)]
#[command(name = "rmd", version, about = "Build and query RMD-coded integer arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode values or text into a container file.
    Build(BuildArgs),
    /// Print element T.
    Get { container: PathBuf, t: u64 },
    /// Print every value, one per line.
    Decode(DecodeArgs),
    /// Time random element access, one CSV row per configuration.
    Bench(BenchArgs),
    /// Print header fields, section sizes and entropy figures.
    Stats { container: PathBuf },
}

#[derive(Args)]
struct Source {
    /// File with one unsigned decimal per line.
    values: Option<PathBuf>,
    /// Build from a text file instead of a values file.
    #[arg(long, conflicts_with = "values")]
    text: Option<PathBuf>,
    #[arg(long, default_value = "word", requires = "text")]
    scheme: String,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "rmd24inf")]
    codec: String,
    #[arg(long, default_value_t = 16)]
    l1: u32,
    #[arg(long, default_value_t = 8)]
    l2: u32,
    #[arg(long, default_value_t = 7)]
    chunk_size: u32,
    /// Sample interval for the elias codec.
    #[arg(long, default_value_t = 512)]
    sample_interval: u32,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    container: PathBuf,
    /// Compare indexed access with sequential decoding.
    #[arg(long)]
    verify: bool,
    /// Write the reconstructed text instead of values (needs a dictionary).
    #[arg(long)]
    text: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Container to benchmark as stored.
    #[arg(long, conflicts_with_all = ["values", "text"])]
    container: Option<PathBuf>,
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "rmd24inf")]
    codec: String,
    /// Comma-separated l1 values for a grid run.
    #[arg(long, value_delimiter = ',', default_values_t = [16])]
    l1: Vec<u32>,
    /// Comma-separated l2 values for a grid run.
    #[arg(long, value_delimiter = ',', default_values_t = [8])]
    l2: Vec<u32>,
    #[arg(long, default_value_t = 7)]
    chunk_size: u32,
    /// Also time Elias δ with these sample intervals.
    #[arg(long, value_delimiter = ',')]
    elias: Vec<u32>,
    #[arg(long, default_value_t = 10_000_000)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Io(String),
    Capacity(String),
    Corruption(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Capacity(_) => 3,
            Failure::Corruption(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Capacity(m) | Failure::Corruption(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::Config(_) | Error::OutOfBounds { .. } | Error::UndefinedEntropy => Failure::Usage(m),
            Error::Capacity(_) => Failure::Capacity(m),
            Error::InvalidCodeword(_) | Error::InsufficientContext(_) | Error::Phase { .. } | Error::Corruption(_) => {
                Failure::Corruption(m)
            }
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

type CliResult<T = ()> = Result<T, Failure>;

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| io_error(path, e))
}

fn parse_values(path: &Path) -> CliResult<Vec<u64>> {
    let raw = read_file(path)?;
    let text = String::from_utf8(raw).map_err(|_| Failure::Usage(format!("{}: not UTF-8", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<u64>()
                .map_err(|e| Failure::Usage(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

struct Loaded {
    values: Vec<u64>,
    text: Option<(Vec<u8>, CorpusModel)>,
}

fn load_source(source: &Source) -> CliResult<Loaded> {
    match (&source.values, &source.text) {
        (Some(path), None) => Ok(Loaded {
            values: parse_values(path)?,
            text: None,
        }),
        (None, Some(path)) => {
            let scheme: Scheme = source.scheme.parse()?;
            let text = read_file(path)?;
            let model = CorpusModel::from_text(&text, scheme);
            Ok(Loaded {
                values: model.sequence.clone(),
                text: Some((text, model)),
            })
        }
        _ => Err(Failure::Usage("give a values file or --text".into())),
    }
}

fn load_container(path: &Path) -> CliResult<Container> {
    Ok(Container::from_bytes(&read_file(path)?)?)
}

fn build(args: BuildArgs) -> CliResult {
    let codec: Codec = args.codec.parse()?;
    let params = IndexParams::new(args.l1, args.l2, args.chunk_size)?;
    let loaded = load_source(&args.source)?;
    let mut container = Container::build(codec, &loaded.values, params, args.sample_interval)?;
    if let Some((_, model)) = &loaded.text {
        container = container.with_dictionary(model.scheme, model.dictionary.clone());
    }
    let bytes = container.to_bytes();
    fs::write(&args.output, &bytes).map_err(|e| io_error(&args.output, e))?;

    let mut out = io::stdout().lock();
    let _ = writeln!(out, "codec: {codec}");
    let _ = writeln!(out, "elements: {}", container.len());
    let _ = writeln!(out, "payload_bytes: {}", container.payload_bytes());
    print_payload_sizes(&mut out, &container);
    let _ = writeln!(out, "file_bytes: {}", bytes.len());
    if let Some((text, model)) = &loaded.text {
        let h0 = model.h0_bits()?;
        let payload_bits = match container.payload() {
            Payload::Rmd(a) => a.stream().payload_bits(),
            Payload::Elias(e) => e.payload_bits(),
        };
        let _ = writeln!(out, "tokens: {} distinct: {}", model.sequence.len(), model.dictionary.len());
        let _ = writeln!(out, "h0_bytes: {:.0}", h0 / 8.0);
        let _ = writeln!(out, "payload_over_h0: {:.4}", payload_bits as f64 / h0);
        if let Ok(h1) = entropy_h1(text) {
            let _ = writeln!(out, "h1_bytes: {:.0}", h1 / 8.0);
        }
    }
    Ok(())
}

fn print_payload_sizes(out: &mut impl Write, container: &Container) {
    match container.payload() {
        Payload::Rmd(a) => {
            let ov = a.overhead();
            let _ = writeln!(out, "index_level1_bytes: {}", ov.level1_bytes);
            let _ = writeln!(out, "index_delta_b_bytes: {}", ov.delta_b_bytes);
            let _ = writeln!(out, "index_delta_c_bytes: {}", ov.delta_c_bytes);
            let _ = writeln!(out, "table_bytes: {}", ov.table_bytes);
            let _ = writeln!(out, "overhead_pct: {:.3}", 100.0 * ov.ratio());
            if ov.payload_bytes > 0 {
                let _ = writeln!(
                    out,
                    "delta_b_pct: {:.3}",
                    100.0 * ov.delta_b_bytes as f64 / ov.payload_bytes as f64
                );
            }
        }
        Payload::Elias(e) => {
            let _ = writeln!(out, "sample_interval: {}", e.sample_interval());
            let _ = writeln!(out, "sample_bytes: {}", e.sample_bytes());
        }
    }
}

fn get(path: &Path, t: u64) -> CliResult {
    let c = load_container(path)?;
    println!("{}", c.get(t)?);
    Ok(())
}

fn decode(args: DecodeArgs) -> CliResult {
    let c = load_container(&args.container)?;
    let values = c.decode_all()?;
    if args.verify {
        for (t, &v) in values.iter().enumerate() {
            let fast = c.get(t as u64)?;
            if fast != v {
                return Err(Failure::Corruption(format!(
                    "element {t}: indexed access gives {fast}, sequential decoding {v}"
                )));
            }
        }
        eprintln!("verified {} elements", values.len());
    }
    let sink: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| io_error(p, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    let written = if args.text {
        let (_, dict) = c
            .dictionary()
            .ok_or_else(|| Failure::Usage("container has no dictionary".into()))?;
        let text = rmd_core::corpus::decode_tokens(dict, &values)?;
        w.write_all(&text)
    } else {
        values.iter().try_for_each(|v| writeln!(w, "{v}"))
    };
    written.and_then(|_| w.flush()).map_err(|e| Failure::Io(e.to_string()))
}

fn time_queries(len: u64, queries: usize, seed: u64, get: impl Fn(u64) -> rmd_core::Result<u64>) -> CliResult<f64> {
    if len == 0 || queries == 0 {
        return Ok(0.0);
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let picks: Vec<u64> = (0..queries).map(|_| rng.random_range(0..len)).collect();
    let mut sink = 0u64;
    let start = Instant::now();
    for &t in &picks {
        sink = sink.wrapping_add(get(t)?);
    }
    let ns = start.elapsed().as_nanos() as f64 / queries as f64;
    std::hint::black_box(sink);
    Ok(ns)
}

fn csv_row(codec: Codec, l1: u32, l2: u32, payload: u64, index: u64, ns: f64) -> String {
    let pct = if payload == 0 { 0.0 } else { 100.0 * index as f64 / payload as f64 };
    format!("{codec},{l1},{l2},{payload},{index},{pct:.3},{ns:.1}")
}

fn container_row(c: &Container, queries: usize, seed: u64) -> CliResult<String> {
    let ns = time_queries(c.len(), queries, seed, |t| c.get(t))?;
    Ok(match c.payload() {
        Payload::Rmd(a) => {
            let ov = a.overhead();
            let p = a.index().params();
            csv_row(c.codec(), p.l1(), p.l2(), ov.payload_bytes, ov.total_bytes(), ns)
        }
        Payload::Elias(e) => csv_row(Codec::Elias, e.sample_interval(), 0, e.payload_bytes(), e.sample_bytes(), ns),
    })
}

fn bench(args: BenchArgs) -> CliResult {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{CSV_HEADER}");
    if let Some(path) = &args.container {
        let c = load_container(path)?;
        let _ = writeln!(out, "{}", container_row(&c, args.queries, args.seed)?);
        return Ok(());
    }
    let codec: Codec = args.codec.parse()?;
    let spec = codec
        .spec()
        .ok_or_else(|| Failure::Usage("grid runs need an rmd codec; use --elias for the baseline".into()))?;
    let values = load_source(&args.source)?.values;
    for &l1 in &args.l1 {
        for &l2 in &args.l2 {
            let params = IndexParams::new(l1, l2, args.chunk_size)?;
            let a = RmdArray::build(spec.clone(), &values, params)?;
            let c = Container::rmd(codec, a)?;
            let _ = writeln!(out, "{}", container_row(&c, args.queries, args.seed)?);
        }
    }
    for &s in &args.elias {
        let c = Container::elias(elias_encode(&values, s)?);
        let _ = writeln!(out, "{}", container_row(&c, args.queries, args.seed)?);
    }
    Ok(())
}

fn stats(path: &Path) -> CliResult {
    let bytes = read_file(path)?;
    let c = Container::from_bytes(&bytes)?;
    let table = Container::section_table(&bytes)?;
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "codec: {}", c.codec());
    let _ = writeln!(out, "elements: {}", c.len());
    if let Payload::Rmd(a) = c.payload() {
        let p = a.index().params();
        let _ = writeln!(out, "l1: {} l2: {} chunk_size: {}", p.l1(), p.l2(), p.chunk_size());
    }
    let _ = writeln!(out, "file_bytes: {}", bytes.len());
    let header = table.first().map_or(bytes.len() as u64, |s| s.offset);
    let _ = writeln!(out, "header_bytes: {header}");
    for s in &table {
        let _ = writeln!(out, "section {}: {} bytes at {}", s.tag.name(), s.length, s.offset);
    }
    let _ = writeln!(out, "padding_bytes: {}", bytes.len() as u64 - header - table.iter().map(|s| s.length).sum::<u64>());
    let _ = writeln!(out, "payload_bytes: {}", c.payload_bytes());
    print_payload_sizes(&mut out, &c);
    if let Some((scheme, dict)) = c.dictionary() {
        let values = c.decode_all()?;
        let mut freq = vec![0u64; dict.len()];
        for &v in &values {
            if let Some(f) = freq.get_mut(v as usize) {
                *f += 1;
            }
        }
        let _ = writeln!(out, "scheme: {scheme} dictionary_tokens: {}", dict.len());
        if let Ok(h0) = entropy_h0(&freq) {
            let _ = writeln!(out, "h0_bytes: {:.0}", h0 / 8.0);
            let _ = writeln!(out, "payload_over_h0: {:.4}", 8.0 * c.payload_bytes() as f64 / h0);
        }
        let text = rmd_core::corpus::decode_tokens(dict, &values)?;
        if let Ok(h1) = entropy_h1(&text) {
            let _ = writeln!(out, "h1_bytes: {:.0}", h1 / 8.0);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Build(a) => build(a),
        Command::Get { container, t } => get(&container, t),
        Command::Decode(a) => decode(a),
        Command::Bench(a) => bench(a),
        Command::Stats { container } => stats(&container),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rmd: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
