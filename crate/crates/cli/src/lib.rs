//! The `rootbias` command line. [`run`] takes the arguments and output
//! streams explicitly so the end-to-end tests can drive it in process.
//!
//! Exit codes: 0 success, 1 verification or validation mismatch, 2 usage
//! error, 3 external data unavailable.

use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use rootbias::bias;
use rootbias::trace;
use rootbias::verify::{self, Formulas};
use rootbias_lmfdb::{self as lmfdb, Cache, Client, ClientConfig, MinimalOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNAVAILABLE: i32 = 3;

pub const TABLE_SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "rootbias", version, about = "Fricke traces and root number bias of newforms on Γ0(N)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Δ(N,k), refined dimensions, newspace case and zero classification.
    Delta { n: u64, k: u32 },
    /// One row per (N,k) over a grid of levels and even weights.
    Table {
        /// Levels, `a..b` inclusive.
        #[arg(long = "N", value_name = "A..B")]
        n: String,
        /// Weights, `a..b` inclusive; odd values are skipped.
        #[arg(long = "k", value_name = "A..B")]
        k: String,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        /// Worker threads, 0 for all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Check every closed form against its independent route on a grid.
    Verify {
        #[arg(long = "N", value_name = "N_MAX")]
        n: u64,
        #[arg(long = "k", value_name = "K_MAX")]
        k: u32,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Largest |discriminant| for the class number relations; defaults to 4·N_MAX.
        #[arg(long)]
        class_bound: Option<u64>,
    },
    /// List every (N,k) on the grid with Δ(N,k) < 0.
    ScanNegative {
        #[arg(long = "N", value_name = "N_MAX")]
        n: u64,
        #[arg(long = "k", value_name = "K_MAX")]
        k: u32,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Compare Δ(N,k) with root numbers of newform orbits from the LMFDB.
    ValidateLmfdb {
        n: u64,
        k: u32,
        /// Use only the cache and the bundled fixtures.
        #[arg(long)]
        offline: bool,
        /// Cache directory; defaults to $ROOTBIAS_CACHE_DIR or the user cache directory.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Also sum root numbers over twist-minimal orbits.
        #[arg(long)]
        minimal: bool,
        /// Delay between HTTP requests in milliseconds.
        #[arg(long, default_value_t = 2000)]
        delay_ms: u64,
        #[arg(long, default_value = lmfdb::DEFAULT_BASE_URL)]
        base_url: String,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

/// One output row; TSV columns follow the field order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub k: u32,
    pub tr_full: i64,
    pub tr_new: i64,
    pub delta: i64,
    pub dim_new: u64,
    pub dim_plus: u64,
    pub dim_minus: u64,
    pub case_tag: String,
    pub zero_class: Option<String>,
}

pub const TSV_HEADER: &str = "N\tk\ttr_full\ttr_new\tdelta\tdim_new\tdim_plus\tdim_minus\tcase_tag\tzero_class";

impl OutputRow {
    pub fn compute(n: u64, k: u32) -> rootbias::Result<OutputRow> {
        let report = trace::trace_report(n, k)?;
        let record = bias::bias_record(n, k)?;
        Ok(OutputRow {
            n,
            k,
            tr_full: report.tr_full,
            tr_new: report.tr_new,
            delta: report.delta,
            dim_new: record.dim_plus + record.dim_minus,
            dim_plus: record.dim_plus,
            dim_minus: record.dim_minus,
            case_tag: report.case_tag.to_string(),
            zero_class: record.zero_class.map(|z| z.to_string()),
        })
    }

    pub fn tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.n,
            self.k,
            self.tr_full,
            self.tr_new,
            self.delta,
            self.dim_new,
            self.dim_plus,
            self.dim_minus,
            self.case_tag,
            self.zero_class.as_deref().unwrap_or("-")
        )
    }
}

#[derive(Serialize)]
struct TableDocument<'a> {
    schema_version: u32,
    rows: &'a [OutputRow],
}

/// Parses `a..b` (inclusive) with `1 ≤ a ≤ b`; a single number `a` means `a..a`.
pub fn parse_range(text: &str) -> anyhow::Result<RangeInclusive<u64>> {
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (text, text),
    };
    let a: u64 = a.trim().parse().with_context(|| format!("bad range start in {text:?}"))?;
    let b: u64 = b.trim().parse().with_context(|| format!("bad range end in {text:?}"))?;
    if a == 0 || a > b {
        bail!("range {text:?} is empty or starts below 1");
    }
    Ok(a..=b)
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn check_bounds(n: u64, k: u32) -> Result<(), String> {
    if n == 0 {
        return Err("level must be at least 1".into());
    }
    rootbias::check_weight(k).map_err(|e| e.to_string())
}

fn usage(err: &mut dyn Write, message: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {message}");
    EXIT_USAGE
}

/// Runs the command line with `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, &Formulas::default(), out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_MISMATCH
        }
    }
}

/// Runs one command with the given trace formulas. Only `verify` uses them.
pub fn dispatch(command: Command, formulas: &Formulas, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Delta { n, k } => {
            if let Err(m) = check_bounds(n, k) {
                return Ok(usage(err, m));
            }
            cmd_delta(n, k, out)
        }
        Command::Table { n, k, format, jobs } => {
            let (levels, weights) = match (parse_range(&n), parse_range(&k)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return Ok(usage(err, e)),
            };
            let weights: Vec<u32> = weights.filter(|k| k % 2 == 0 && *k >= 2).map(|k| k as u32).collect();
            if weights.is_empty() {
                return Ok(usage(err, "weight range contains no even weight >= 2"));
            }
            cmd_table(levels, &weights, format, jobs, out)
        }
        Command::Verify { n, k, jobs, class_bound } => {
            if let Err(m) = check_bounds(n, k) {
                return Ok(usage(err, m));
            }
            let report = verify::verify_grid(formulas, n, k, class_bound.unwrap_or(4 * n), jobs)?;
            writeln!(out, "{report}")?;
            Ok(report.exit_code())
        }
        Command::ScanNegative { n, k, jobs } => {
            if let Err(m) = check_bounds(n, k) {
                return Ok(usage(err, m));
            }
            let hits = pool(jobs)?.install(|| bias::scan_negative(n, k))?;
            writeln!(out, "N\tk\tdelta")?;
            for (n, k, d) in &hits {
                writeln!(out, "{n}\t{k}\t{d}")?;
            }
            let stray: Vec<u64> = hits.iter().map(|h| h.0).filter(|&n| !bias::is_cubefree_square(n)).collect();
            writeln!(out, "# {} negative points; levels outside cubefree squares: {}", hits.len(), stray.len())?;
            Ok(if stray.is_empty() { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::ValidateLmfdb { n, k, offline, cache_dir, minimal, delay_ms, base_url } => {
            if let Err(m) = check_bounds(n, k) {
                return Ok(usage(err, m));
            }
            let config = ClientConfig {
                base_url,
                request_delay: Duration::from_millis(delay_ms),
                offline,
                ..ClientConfig::default()
            };
            let cache = Cache::new(cache_dir.unwrap_or_else(lmfdb::default_cache_dir));
            cmd_validate(&Client::new(config, cache), n, k, minimal, out, err)
        }
    }
}

fn cmd_delta(n: u64, k: u32, out: &mut dyn Write) -> anyhow::Result<i32> {
    let row = OutputRow::compute(n, k)?;
    let report = trace::trace_report(n, k)?;
    writeln!(out, "N = {n}, k = {k}")?;
    writeln!(out, "delta = {}", row.delta)?;
    writeln!(out, "dim_new = {}, dim_plus = {}, dim_minus = {}", row.dim_new, row.dim_plus, row.dim_minus)?;
    writeln!(out, "tr_full = {}, tr_new = {}", row.tr_full, row.tr_new)?;
    writeln!(out, "case = {}", row.case_tag)?;
    writeln!(out, "xi = {} (xi0 = {}, eps = {})", report.corrections.xi(), report.corrections.xi0, report.corrections.eps)?;
    writeln!(out, "zero_class = {}", row.zero_class.as_deref().unwrap_or("-"))?;
    if let Some(s) = bias::bias_record(n, k)?.predicted_sign_large_k {
        writeln!(out, "large_k_sign = {s:+}")?;
    }
    Ok(EXIT_OK)
}

fn cmd_table(
    levels: RangeInclusive<u64>,
    weights: &[u32],
    format: Format,
    jobs: usize,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let rows: Vec<OutputRow> = pool(jobs)?.install(|| {
        levels
            .into_par_iter()
            .flat_map_iter(|n| weights.iter().map(move |&k| OutputRow::compute(n, k)))
            .collect::<rootbias::Result<Vec<_>>>()
    })?;
    match format {
        Format::Tsv => {
            writeln!(out, "{TSV_HEADER}")?;
            for r in &rows {
                writeln!(out, "{}", r.tsv())?;
            }
        }
        Format::Json => {
            let doc = TableDocument { schema_version: TABLE_SCHEMA_VERSION, rows: &rows };
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_validate(
    client: &Client,
    n: u64,
    k: u32,
    minimal: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<i32> {
    let unavailable = |e: &lmfdb::LmfdbError| {
        matches!(
            e,
            lmfdb::LmfdbError::Network { .. } | lmfdb::LmfdbError::NoData { .. } | lmfdb::LmfdbError::OfflineMiss { .. }
        )
    };
    let report = match lmfdb::validate_delta(client, n, k) {
        Ok(r) => r,
        Err(e) if unavailable(&e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_UNAVAILABLE);
        }
        Err(e) => return Err(e.into()),
    };
    writeln!(
        out,
        "N = {n}, k = {k}: computed delta = {}, external sum = {} over {} orbits ({:?}, fetched {})",
        report.computed_delta,
        report.external_sum,
        report.orbit_count,
        report.source,
        report.fetched_at.format("%Y-%m-%dT%H:%M:%SZ")
    )?;
    writeln!(out, "dimension: computed {}, external {}", report.computed_dim, report.external_dim)?;
    let mut ok = report.matched && report.dims_match();
    writeln!(out, "{}", if ok { "match" } else { "MISMATCH" })?;
    if minimal {
        match lmfdb::validate_minimal(client, n, k)? {
            MinimalOutcome::Report(m) => {
                writeln!(
                    out,
                    "minimal: sum = {} over {} orbits; balance predicted: {}",
                    m.minimal_sum, m.minimal_orbits, m.balance_predicted
                )?;
                if !m.consistent {
                    writeln!(out, "MISMATCH: balance predicted but minimal sum is nonzero")?;
                    ok = false;
                }
            }
            MinimalOutcome::InsufficientData { unflagged, .. } => {
                writeln!(out, "minimal: insufficient data ({} orbits without a minimality flag)", unflagged.len())?;
            }
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_MISMATCH })
}
