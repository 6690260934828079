//! Command-line front end: `generate`, `analyze` and `spectrum`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::localstat::census;
use crate::measures::{ck_regimes, write_profile_csv, CkOscillation};
use crate::rauzy::{build_digraph, underlying_graph};
use crate::report::{analyze_with_data, language_data, required_lengths, slice_pair, AnalyzeConfig, Thresholds};
use crate::spectra::{histogram, spectral_summary};
use crate::wordgen::{ck_words, parse_letter_map, CkSchedule, Slope, Substitution, WordSource};

pub const JOBS_ENV: &str = "RAUZY_LAB_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "rauzy-lab",
    version,
    about = "Rauzy graphs of subshifts",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads; RAUZY_LAB_JOBS takes precedence.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// key=value file whose entries act as flags placed before the command
    /// line ones.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a word prefix to a file.
    Generate(GenerateArgs),
    /// Build Rauzy graphs over an n grid and write a convergence report.
    Analyze(AnalyzeArgs),
    /// Dense spectra, moments and histograms of undirected Rauzy graphs.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Generator in text form, e.g. `sturmian:golden` or `periodic:01`.
    #[arg(long)]
    pub source: Option<String>,
    /// Substitution images, e.g. `0:01,1:0`.
    #[arg(long)]
    pub substitution: Option<String>,
    #[arg(long)]
    pub seed: Option<char>,
    /// Letter-to-letter coding applied after the substitution, e.g. `0:a,1:b`.
    #[arg(long)]
    pub coding: Option<String>,
    /// `golden` or a decimal in (0, 1).
    #[arg(long)]
    pub sturmian_alpha: Option<String>,
    /// `desk`, `dexp[N]` or `l,m,n;l,m,n;...`.
    #[arg(long)]
    pub ck_schedule: Option<String>,
    #[arg(long)]
    pub full_shift: Option<usize>,
    #[arg(long)]
    pub periodic: Option<String>,
    /// Word read from a file (trailing whitespace ignored).
    #[arg(long)]
    pub word: Option<PathBuf>,
}

impl SourceArgs {
    /// The word source, and a schedule kept only for regime annotation when
    /// both `--word` and `--ck-schedule` are given.
    pub fn resolve(&self) -> Result<(WordSource, Option<CkSchedule>)> {
        let schedule = self.ck_schedule.as_deref().map(str::parse::<CkSchedule>).transpose()?;
        let mut found: Vec<WordSource> = Vec::new();
        if let Some(s) = &self.source {
            found.push(s.parse()?);
        }
        if let Some(map) = &self.substitution {
            let images = parse_letter_map(map)?;
            let seed = match self.seed {
                Some(c) => ascii(c, "seed")?,
                None => *images
                    .keys()
                    .next()
                    .ok_or_else(|| Error::InvalidSource("empty substitution".into()))?,
            };
            let mut sub = Substitution::new(images, seed)?;
            if let Some(c) = &self.coding {
                let raw = parse_letter_map(c)?;
                let coding = raw
                    .into_iter()
                    .map(|(a, w)| match w.as_slice() {
                        [b] => Ok((a, *b)),
                        _ => Err(Error::InvalidSource(format!(
                            "coding image of {:?} must be one letter",
                            a as char
                        ))),
                    })
                    .collect::<Result<_>>()?;
                sub.coding = Some(coding);
                sub.validate()?;
            }
            found.push(WordSource::Substitution(sub));
        } else if self.seed.is_some() || self.coding.is_some() {
            return Err(Error::Config("--seed and --coding need --substitution".into()));
        }
        if let Some(a) = &self.sturmian_alpha {
            found.push(WordSource::Sturmian(Slope::parse(a)?));
        }
        if let Some(k) = self.full_shift {
            found.push(WordSource::FullShift { k });
            WordSource::FullShift { k }.alphabet()?;
        }
        if let Some(p) = &self.periodic {
            if p.is_empty() {
                return Err(Error::InvalidSource("empty periodic pattern".into()));
            }
            found.push(WordSource::Periodic {
                pattern: p.as_bytes().to_vec(),
            });
        }
        if let Some(path) = &self.word {
            found.push(WordSource::FileWord { path: path.clone() });
        }
        match (found.len(), schedule) {
            (0, Some(s)) => Ok((WordSource::CassaigneKabore(s), None)),
            (1, s) => Ok((found.pop().expect("one source"), s)),
            (0, None) => Err(Error::Config(
                "no generator given; use one of --source, --substitution, --sturmian-alpha, --ck-schedule, --full-shift, --periodic, --word".into(),
            )),
            _ => Err(Error::Config("more than one generator given".into())),
        }
    }
}

fn ascii(c: char, what: &str) -> Result<u8> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii_graphic)
        .ok_or_else(|| Error::Config(format!("{what} {c:?} must be a printable ASCII letter")))
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub length: usize,
    /// For CK schedules: write the block `u_depth` instead of a prefix.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, short, default_value = "word.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    /// Prefix length N; defaults to 10^6, or the whole file for --word.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long = "n", value_delimiter = ',', action = clap::ArgAction::Set, default_values_t = [10, 50, 100, 200])]
    pub n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_values_t = [1, 2, 3])]
    pub radii: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    pub moments: usize,
    #[arg(long, default_value_t = 4096)]
    pub eig_cap: usize,
    #[arg(long, default_value_t = 100)]
    pub truncation_ratio: usize,
    /// Adjoin `z·L_{n-1}` with this new letter.
    #[arg(long)]
    pub sentinel: Option<char>,
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set)]
    pub cylinders: Vec<String>,
    #[arg(long)]
    pub oscillation: bool,
    /// Window lengths for the uniform-frequency profile of the first letter.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set)]
    pub profile_n: Vec<usize>,
    #[arg(long, default_value_t = 1.05)]
    pub ratio_threshold: f64,
    #[arg(long, default_value_t = 0.9)]
    pub line_threshold: f64,
    #[arg(long, default_value_t = 2)]
    pub line_radius: usize,
    #[arg(long, default_value_t = 0.5)]
    pub moment_threshold: f64,
    #[arg(long, default_value_t = 4)]
    pub moment_order: usize,
    #[arg(long, default_value_t = 0.1)]
    pub prolongable_threshold: f64,
    /// Also write every slice and Rauzy digraph used by the report.
    #[arg(long)]
    pub export_slices: bool,
    /// Also write ball censuses at every radius.
    #[arg(long)]
    pub export_census: bool,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub src: SourceArgs,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long = "n", value_delimiter = ',', action = clap::ArgAction::Set, default_values_t = [10, 50, 100, 200])]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    pub moments: usize,
    #[arg(long, default_value_t = 4096)]
    pub eig_cap: usize,
    #[arg(long, default_value_t = 100)]
    pub truncation_ratio: usize,
    #[arg(long)]
    pub sentinel: Option<char>,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

/// Turns `key=value` lines into flags; `#` starts a comment, `true` becomes
/// a bare switch and `false` drops the key.
pub fn config_flags(text: &str) -> Result<Vec<String>> {
    let mut flags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {} has no '=': {raw:?}", i + 1)))?;
        let (k, v) = (k.trim().trim_start_matches("--").replace('_', "-"), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("config line {} has an empty key", i + 1)));
        }
        match v {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    Ok(flags)
}

const COMMANDS: [&str; 3] = ["generate", "analyze", "spectrum"];

/// Splices config-file flags in right after the subcommand name.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text =
        fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let flags = config_flags(&text)?;
    let Some(at) = args
        .iter()
        .position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let mut out = args[..=at].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

fn jobs(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(JOBS_ENV) {
        return v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&j| j > 0)
            .ok_or_else(|| Error::Config(format!("{JOBS_ENV}={v:?} is not a positive integer")));
    }
    match flag {
        Some(0) => Err(Error::Config("--jobs must be positive".into())),
        Some(j) => Ok(j),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs(cli.jobs)?)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let (source, _) = a.src.resolve()?;
    let word = match (&source, a.depth) {
        (WordSource::CassaigneKabore(s), Some(depth)) => {
            let word = ck_words(s, depth)?.0;
            let regimes = ck_regimes(s, depth.min(s.len() - 1))?;
            for lr in &regimes {
                for (k, r) in [(1, &lr.first), (2, &lr.second)] {
                    println!(
                        "level {} regime {k} {}: {}",
                        lr.level,
                        r.describe(),
                        if r.nonempty { "ok" } else { "EMPTY" }
                    );
                }
            }
            let mut side = a.out.clone().into_os_string();
            side.push(".schedule.json");
            serde_json::to_writer_pretty(create(Path::new(&side))?, &regimes)?;
            word
        }
        (_, Some(_)) => return Err(Error::Config("--depth applies to --ck-schedule only".into())),
        (source, None) => source.prefix(a.length)?,
    };
    let mut out = create(&a.out)?;
    out.write_all(&word)?;
    out.flush()?;
    eprintln!("wrote {} symbols of {source} to {}", word.len(), a.out.display());
    Ok(())
}

fn default_length(source: &WordSource, flag: Option<usize>) -> Result<usize> {
    match (flag, source) {
        (Some(n), _) => Ok(n),
        (None, WordSource::FileWord { path }) => Ok(crate::wordgen::read_word_file(path)?.len()),
        (None, _) => Ok(1_000_000),
    }
}

fn letter(c: Option<char>) -> Result<Option<u8>> {
    c.map(|c| ascii(c, "sentinel")).transpose()
}

pub fn analyze_config(a: &AnalyzeArgs) -> Result<AnalyzeConfig> {
    let (source, schedule) = a.src.resolve()?;
    let mut cfg = AnalyzeConfig::new(source);
    cfg.prefix_len = default_length(&cfg.source, a.length)?;
    cfg.n_grid = a.n_grid.clone();
    cfg.radii = a.radii.clone();
    cfg.max_moment = a.moments;
    cfg.dense_cap = a.eig_cap;
    cfg.truncation_ratio = a.truncation_ratio;
    cfg.sentinel = letter(a.sentinel)?;
    cfg.cylinders = a
        .cylinders
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| c.as_bytes().to_vec())
        .collect();
    cfg.oscillation = a.oscillation;
    cfg.ck_schedule = schedule;
    cfg.profile_ns = a.profile_n.clone();
    cfg.thresholds = Thresholds {
        ratio: a.ratio_threshold,
        line_fraction: a.line_threshold,
        line_radius: a.line_radius,
        moment_gap: a.moment_threshold,
        moment_order: a.moment_order,
        almost_prolongable: a.prolongable_threshold,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    let cfg = analyze_config(a)?;
    let data = language_data(&cfg, &required_lengths(&cfg))?;
    let report = analyze_with_data(&cfg, &data)?;
    fs::create_dir_all(&a.out_dir)?;
    report.write_json(create(&a.out_dir.join("report.json"))?)?;
    report.write_csv(create(&a.out_dir.join("report.csv"))?)?;
    if let Some(osc) = &report.oscillation {
        let table = CkOscillation {
            schedule: cfg.ck_schedule.as_ref().map(ToString::to_string).unwrap_or_default(),
            depth: osc.regimes.len().saturating_sub(1),
            corpus_level: 0,
            regimes: osc.regimes.clone(),
            empty_regimes: Vec::new(),
            rows: osc.rows.clone(),
        };
        table.write_csv(create(&a.out_dir.join("oscillation.csv"))?)?;
    }
    if !report.profiles.is_empty() {
        write_profile_csv(&report.profiles, create(&a.out_dir.join("profile.csv"))?)?;
    }
    if a.export_slices || a.export_census {
        for &n in &cfg.n_grid {
            let (ln, ln1) = slice_pair(&data, cfg.sentinel, n)?;
            let g = build_digraph(&ln, &ln1, true)?;
            if a.export_slices {
                ln.write_to(create(&a.out_dir.join(format!("slices/L_{n}.txt")))?)?;
                ln1.write_to(create(&a.out_dir.join(format!("slices/L_{}.txt", n + 1)))?)?;
                g.write_edge_list(create(&a.out_dir.join(format!("graphs/R_{n}.txt")))?)?;
            }
            if a.export_census {
                for &r in &cfg.radii {
                    let c = census(&g, r, false);
                    c.write_csv(create(&a.out_dir.join(format!("census/n{n}_r{r}.csv")))?)?;
                    serde_json::to_writer_pretty(
                        create(&a.out_dir.join(format!("census/n{n}_r{r}.json")))?,
                        &serde_json::json!({
                            "summary": c.summary(),
                            "cycles": crate::localstat::cycle_components(&g),
                        }),
                    )?;
                }
            }
        }
    }
    let v = &report.verdicts;
    let show = |x: Option<bool>| x.map_or("n/a", |b| if b { "yes" } else { "no" });
    println!("{}", report.generator);
    for r in &report.rows {
        let line = r
            .line_fraction
            .iter()
            .map(|x| format!("r{}={:.4}", x.r, x.undirected))
            .collect::<Vec<_>>()
            .join(" ");
        println!(
            "  n={:<6} p={:<8} ratio={:<12} {line} m2={:.4}",
            r.n, r.p, r.ratio, r.moments[2]
        );
    }
    println!(
        "  ratio->1: {}  line->1: {}  moments->arcsine: {}  almost prolongable: {}  ({})",
        show(v.ratio_to_one),
        show(v.line_fraction_to_one),
        show(v.moments_to_arcsine),
        show(v.almost_prolongable),
        v.agreement
    );
    for w in &report.warnings {
        log::warn!("{w}");
    }
    println!("  report written to {}", a.out_dir.join("report.json").display());
    Ok(())
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<()> {
    let (source, _) = a.src.resolve()?;
    let mut cfg = AnalyzeConfig::new(source);
    cfg.prefix_len = default_length(&cfg.source, a.length)?;
    cfg.n_grid = a.n_grid.clone();
    cfg.max_moment = a.moments;
    cfg.dense_cap = a.eig_cap;
    cfg.truncation_ratio = a.truncation_ratio;
    cfg.sentinel = letter(a.sentinel)?;
    cfg.thresholds.moment_order = cfg.thresholds.moment_order.min(a.moments);
    cfg.validate()?;
    let data = language_data(&cfg, &required_lengths(&cfg))?;
    fs::create_dir_all(&a.out_dir)?;
    for &n in &cfg.n_grid {
        let (ln, ln1) = slice_pair(&data, cfg.sentinel, n)?;
        let mg = underlying_graph(&build_digraph(&ln, &ln1, false)?);
        if mg.vertex_count() > cfg.dense_cap {
            return Err(Error::CapExceeded {
                vertices: mg.vertex_count(),
                cap: cfg.dense_cap,
            });
        }
        let s = spectral_summary(&mg, n, cfg.max_moment, Some(cfg.dense_cap))?;
        s.write_spectrum_csv(create(&a.out_dir.join(format!("spectrum_n{n}.csv")))?)?;
        serde_json::to_writer(create(&a.out_dir.join(format!("moments_n{n}.json")))?, &s.moments)?;
        let h = histogram(s.eigenvalues.as_deref().unwrap_or(&[]), a.bins);
        serde_json::to_writer_pretty(create(&a.out_dir.join(format!("histogram_n{n}.json")))?, &h)?;
        println!(
            "n={n} p={} KS={} moment consistency={}",
            s.vertices,
            s.ks_distance.map_or("n/a".into(), |x| format!("{x:.6}")),
            s.moment_consistency.map_or("n/a".into(), |x| format!("{x:.2e}")),
        );
    }
    Ok(())
}
