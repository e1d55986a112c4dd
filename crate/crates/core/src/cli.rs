//! Command-line front end. `main` only sets up logging and calls [`run`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assemble::{assemble, Assembly, AssemblyConfig, AssemblyMode};
use crate::export::{export_html, write_pptx, ExportContext, ExportOptions};
use crate::manifest::deck_manifest;
use crate::model::Topic;
use crate::schema::PresentationSchema;
use crate::services::Services;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_ASSEMBLY: i32 = 4;
pub const EXIT_EXPORT: i32 = 5;

/// Overrides the bundled asset directory (schemas, corpus, bench lists).
pub const ASSETS_ENV: &str = "DECKFORGE_ASSETS";
pub const CACHE_ENV: &str = "DECKFORGE_CACHE_DIR";
pub const DEFAULT_SCHEMA: &str = "improvised_ted_talk";

pub fn assets_dir() -> PathBuf {
    std::env::var_os(ASSETS_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("assets"))
}

pub fn default_corpus_dir() -> PathBuf {
    assets_dir().join("corpus")
}

/// A bundled schema name such as `pecha_kucha`, or a path to a schema file.
pub fn schema_path(arg: &str) -> PathBuf {
    let bundled = assets_dir().join("schemas").join(format!("{arg}.json"));
    if !arg.contains(['/', '\\']) && !arg.ends_with(".json") && bundled.exists() {
        bundled
    } else {
        PathBuf::from(arg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "deckforge", version, about = "Generate a slide deck about a topic word")]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time deck generation over a list of topics, one per line.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pptx,
    Html,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Pptx => "pptx",
            Format::Html => "html",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Number of slides [default: the schema's deck length]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    slides: Option<u32>,
    /// Bundled schema name or path to a schema file
    #[arg(long, default_value = DEFAULT_SCHEMA)]
    schema: String,
    /// Master RNG seed [default: random, always printed]
    #[arg(long)]
    seed: Option<u64>,
    /// Use only the local corpus (the default)
    #[arg(long, overrides_with = "online")]
    offline: bool,
    /// Query online services first, falling back to the local corpus
    #[arg(long, overrides_with = "offline")]
    online: bool,
    /// Corpus directory [default: bundled corpus]
    #[arg(long)]
    corpus_dir: Option<PathBuf>,
    /// Where online answers are cached [default: $DECKFORGE_CACHE_DIR or .deckforge-cache]
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Worker threads [default: logical CPU count]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    parallelism: Option<u32>,
    /// Generation rounds before falling back, the first included
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    max_rounds: u32,
    /// Generate slides one at a time instead of in parallel rounds
    #[arg(long)]
    serial: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Topic word
    topic: Option<String>,
    /// Output file; `-` writes to standard output [default: ./<topic>.<format>]
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Pptx)]
    format: Format,
    /// Reference images by path instead of embedding them (pptx only)
    #[arg(long)]
    link_media: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// File with one topic per line
    topics: PathBuf,
    /// Decks per topic; run k uses seed + k
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,
    /// Wall-time threshold in seconds for the summary fraction
    #[arg(long, default_value_t = 2.5)]
    threshold: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl std::fmt::Display) -> Failure {
    Failure { code, message: message.to_string() }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().ansi().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Some(Command::Bench(b)) => bench(&b, out),
        None => match cli.run.topic.as_deref() {
            Some(topic) => run_one(topic, &cli.run, out, err),
            None => {
                let mut cmd = <Cli as clap::CommandFactory>::command();
                let _ = writeln!(err, "error: a topic is required\n\n{}", cmd.render_usage());
                return EXIT_USAGE;
            }
        },
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

struct Loaded {
    schema: PresentationSchema,
    services: Services,
}

fn load(c: &Common) -> Result<Loaded, Failure> {
    let path = schema_path(&c.schema);
    let schema = PresentationSchema::load(&path).map_err(|e| fail(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    let corpus = c.corpus_dir.clone().unwrap_or_else(default_corpus_dir);
    let services = if c.online { online_services(&corpus, c)? } else { Services::offline(&corpus) }
        .map_err(|e| fail(EXIT_CONFIG, format!("corpus {}: {e}", corpus.display())))?;
    Ok(Loaded { schema, services })
}

#[cfg(feature = "online")]
fn online_services(corpus: &Path, c: &Common) -> Result<Result<Services, crate::services::ServicesError>, Failure> {
    let cache = c
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(".deckforge-cache"));
    Ok(Services::online(corpus, &cache, std::sync::Arc::new(crate::net::HttpTransport::new())))
}

#[cfg(not(feature = "online"))]
fn online_services(_: &Path, _: &Common) -> Result<Result<Services, crate::services::ServicesError>, Failure> {
    Err(fail(EXIT_CONFIG, "this build has no online support; rebuild with --features online"))
}

fn config(c: &Common, schema: &PresentationSchema, seed: u64) -> AssemblyConfig {
    let defaults = AssemblyConfig::default();
    AssemblyConfig {
        n_slides: c.slides.map(|n| n as usize).unwrap_or(schema.deck_length_default),
        parallelism: c.parallelism.map(|p| p as usize).unwrap_or(defaults.parallelism),
        max_rounds: c.max_rounds as usize,
        master_rng_seed: seed,
        mode: if c.serial { AssemblyMode::Serial } else { AssemblyMode::Parallel },
    }
}

fn topic(word: &str) -> Result<Topic, Failure> {
    Topic::new(word).map_err(|e| fail(EXIT_USAGE, e))
}

fn default_output(topic: &Topic, format: Format) -> PathBuf {
    let stem: String = topic.as_str().chars().map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' }).collect();
    PathBuf::from(format!("{stem}.{}", format.extension()))
}

fn render(a: &Assembly, loaded: &Loaded, format: Format, link_media: bool) -> Result<Vec<u8>, Failure> {
    let ctx = ExportContext::new(&loaded.schema.templates, loaded.services.corpus_root());
    match format {
        Format::Json => Ok(deck_manifest(&a.deck).into_bytes()),
        Format::Html => crate::export::render_html(&a.deck, &ctx).map(String::into_bytes).map_err(|e| fail(EXIT_EXPORT, e)),
        Format::Pptx => {
            let options = ExportOptions { embed_media: !link_media, ..ExportOptions::default() };
            write_pptx(&a.deck, &ctx, &options, std::io::Cursor::new(Vec::new()))
                .map(|c| c.into_inner())
                .map_err(|e| fail(EXIT_EXPORT, e))
        }
    }
}

fn run_one(word: &str, args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let topic = topic(word)?;
    let seed = args.common.seed.unwrap_or_else(rand::random);
    let loaded = load(&args.common)?;
    let cfg = config(&args.common, &loaded.schema, seed);
    let started = Instant::now();
    let assembly = assemble(&topic, &loaded.schema, &loaded.services, &cfg).map_err(|e| fail(EXIT_ASSEMBLY, e))?;
    let bytes = render(&assembly, &loaded, args.format, args.link_media)?;
    let to_stdout = args.output.as_deref() == Some(Path::new("-"));
    let output = args.output.clone().unwrap_or_else(|| default_output(&topic, args.format));
    if to_stdout {
        out.write_all(&bytes).map_err(|e| fail(EXIT_EXPORT, e))?;
    } else if args.format == Format::Html {
        let ctx = ExportContext::new(&loaded.schema.templates, loaded.services.corpus_root());
        export_html(&assembly.deck, &ctx, &output).map_err(|e| fail(EXIT_EXPORT, e))?;
    } else {
        std::fs::write(&output, &bytes).map_err(|e| fail(EXIT_EXPORT, format!("{}: {e}", output.display())))?;
    }
    let elapsed = started.elapsed();
    let report: &mut dyn Write = if to_stdout { err } else { out };
    let regenerated: usize = assembly.reports.iter().map(|r| r.regenerated_slide_indices.len()).sum();
    let _ = writeln!(report, "topic: {}", topic.as_str());
    let _ = writeln!(report, "seed: {seed}");
    let _ = writeln!(report, "slides: {}", assembly.deck.len());
    let _ = writeln!(report, "rounds: {}", assembly.reports.len());
    let _ = writeln!(report, "regenerated: {regenerated}");
    let _ = writeln!(report, "fallback_slides: {}", assembly.fallback_slides.len());
    let _ = writeln!(report, "elapsed_s: {:.3}", elapsed.as_secs_f64());
    let _ = writeln!(report, "io_wait_s: {:.3}", loaded.services.io_clock.total().as_secs_f64());
    let _ = writeln!(report, "output: {}", if to_stdout { "-".to_string() } else { output.display().to_string() });
    Ok(EXIT_OK)
}

/// One bench row.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub topic: String,
    pub run: u32,
    pub seed: u64,
    pub ok: bool,
    pub slides: usize,
    pub rounds: usize,
    pub wall: Duration,
    pub compute: Duration,
    pub error: Option<String>,
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

pub fn median(sorted: &[f64]) -> Option<f64> {
    match sorted.len() {
        0 => None,
        n if n % 2 == 1 => Some(sorted[n / 2]),
        n => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(&args.topics)
        .map_err(|e| fail(EXIT_CONFIG, format!("{}: {e}", args.topics.display())))?;
    let topics: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let base_seed = args.common.seed.unwrap_or_else(rand::random);
    let loaded = load(&args.common)?;
    let _ = writeln!(out, "seed: {base_seed}");
    let _ = writeln!(out, "topic\trun\tseed\tstatus\tslides\trounds\twall_s\tcompute_s");
    let mut rows = Vec::new();
    for word in &topics {
        for k in 0..args.runs {
            let seed = base_seed.wrapping_add(k as u64);
            let row = bench_one(word, k, seed, &loaded, &args.common);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
                row.topic,
                row.run,
                row.seed,
                if row.ok { "ok" } else { "failed" },
                row.slides,
                row.rounds,
                row.wall.as_secs_f64(),
                row.compute.as_secs_f64()
            );
            if let Some(e) = &row.error {
                log::warn!("{} (seed {}): {e}", row.topic, row.seed);
            }
            rows.push(row);
        }
    }
    let mut wall: Vec<f64> = rows.iter().filter(|r| r.ok).map(|r| r.wall.as_secs_f64()).collect();
    let mut compute: Vec<f64> = rows.iter().filter(|r| r.ok).map(|r| r.compute.as_secs_f64()).collect();
    wall.sort_by(f64::total_cmp);
    compute.sort_by(f64::total_cmp);
    let failures = rows.iter().filter(|r| !r.ok).count();
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into());
    let under = if rows.is_empty() {
        0.0
    } else {
        wall.iter().filter(|w| **w <= args.threshold).count() as f64 / rows.len() as f64
    };
    let _ = writeln!(out, "decks: {}", rows.len());
    let _ = writeln!(out, "failures: {failures}");
    let _ = writeln!(out, "median_wall_s: {}", fmt(median(&wall)));
    let _ = writeln!(out, "p95_wall_s: {}", fmt(percentile(&wall, 95.0)));
    let _ = writeln!(out, "max_wall_s: {}", fmt(wall.last().copied()));
    let _ = writeln!(out, "median_compute_s: {}", fmt(median(&compute)));
    let _ = writeln!(out, "under_threshold: {under:.3} (threshold {:.2} s)", args.threshold);
    Ok(if failures == 0 { EXIT_OK } else { EXIT_ASSEMBLY })
}

fn bench_one(word: &str, run: u32, seed: u64, loaded: &Loaded, common: &Common) -> BenchRow {
    let mut row = BenchRow {
        topic: word.to_string(),
        run,
        seed,
        ok: false,
        slides: 0,
        rounds: 0,
        wall: Duration::ZERO,
        compute: Duration::ZERO,
        error: None,
    };
    let topic = match Topic::new(word) {
        Ok(t) => t,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let io_before = loaded.services.io_clock.total();
    let started = Instant::now();
    let result = assemble(&topic, &loaded.schema, &loaded.services, &config(common, &loaded.schema, seed))
        .map_err(|e| e.to_string())
        .and_then(|a| render(&a, loaded, Format::Pptx, false).map(|_| a).map_err(|f| f.message));
    row.wall = started.elapsed();
    row.compute = row.wall.saturating_sub(loaded.services.io_clock.total().saturating_sub(io_before));
    match result {
        Ok(a) => {
            row.ok = true;
            row.slides = a.deck.len();
            row.rounds = a.reports.len();
        }
        Err(e) => row.error = Some(e),
    }
    row
}
