//! Command-line front end for `symprod-core`.
//!
//! Exit status: 0 on success, 1 when inputs fail validation, 2 when a verify
//! run detects a violated invariant (the report is still written).

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use symprod_core::cone::{check_cone_comparison, disk_sample};
use symprod_core::distortion::{
    adversarial_search, estimate_distortion_with_pairs, pairs_to_csv, CircleMap, EmbeddingMap,
    RetractionMap, SetMap, TomographyMap,
};
use symprod_core::extension::{ball_extension, ExtensionOptions, SampledMap};
use symprod_core::pipeline::{build_rd, dimension, MAX_DIMENSION_N};
use symprod_core::tomography::{make_line_family, separation_constant, verify_separation};
use symprod_core::{build_pipeline, hausdorff_distance, retract_to, FinitePointSet, MetricSampler};

/// Default output directory for reports when `--out` is not given.
pub const OUT_DIR_ENV: &str = "SYMPROD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "symprod", version, about = "Symmetric products: embeddings, retractions, projections and distortion checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Embed,
    Retract,
    Tomo,
    Circle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hausdorff distance between two point-set documents (paths or inline JSON).
    Hausdorff { a: String, b: String },
    /// Embed sets on the line with the capacity-n pipeline.
    Embed {
        #[arg(long)]
        n: usize,
        input: PathBuf,
        output: PathBuf,
    },
    /// Embed sets in R^d (d = 2, 3) through projections to the line.
    EmbedRd {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        input: PathBuf,
        output: PathBuf,
    },
    /// Retract sets from capacity n to capacity k.
    Retract {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        input: PathBuf,
        output: PathBuf,
    },
    /// Build a line family, certify its separation constant and optionally verify it.
    Tomo {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        certify: bool,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the cone metric with its Euclidean lift over a sampled disk.
    ConeCheck {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample and search for the extreme distortion of a map.
    Distortion {
        #[arg(long, value_enum)]
        map: MapKind,
        #[arg(long)]
        n: usize,
        /// Ambient dimension for `--map tomo`.
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Adversarial search iterations per witness.
        #[arg(long, default_value_t = 0)]
        search: usize,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write every sampled pair as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the output dimension table for n = 1..=max.
    Dims {
        #[arg(long)]
        max: usize,
    },
    /// Print the stage tree and constants of the capacity-n pipeline.
    Pipeline {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extend a sampled map on the unit sphere to the ball.
    Extend {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        radial_steps: usize,
        #[arg(long, default_value_t = 0.1)]
        neighbourhood: f64,
        input: PathBuf,
        output: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Schema(String),
    Core(symprod_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<symprod_core::Error> for CliError {
    fn from(e: symprod_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    InvariantViolated,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InvariantViolated => 2,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Ok
        } else {
            Status::InvariantViolated
        }
    }
}

fn read_json(arg: &str) -> Result<Value, CliError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{arg}: {e}")))
}

fn parse_set(v: Value) -> Result<FinitePointSet, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Schema(e.to_string()))
}

/// A point-set document or an array of them.
fn read_sets(arg: &str) -> Result<(Vec<FinitePointSet>, bool), CliError> {
    match read_json(arg)? {
        Value::Array(items) => Ok((items.into_iter().map(parse_set).collect::<Result<_, _>>()?, true)),
        v => Ok((vec![parse_set(v)?], false)),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory, so a failed
/// run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Report destination: `--out`, else `$SYMPROD_OUT_DIR/<default_name>`,
/// else stdout.
fn emit(out: Option<&Path>, default_name: &str, contents: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    let target = out
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)));
    match target {
        Some(p) => write_atomic(&p, contents),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

#[derive(Serialize)]
struct EmbeddedRecord<'a> {
    input: &'a FinitePointSet,
    vector: Vec<f64>,
}

#[derive(Serialize)]
struct TomoReport {
    certificate: symprod_core::SeparationCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<symprod_core::tomography::SeparationReport>,
    passed: bool,
}

#[derive(Serialize)]
struct ExtendOutput {
    report: symprod_core::extension::ExtensionReport,
    map: SampledMap,
}

fn check_range(name: &str, value: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if value < lo || value > hi {
        return Err(CliError::Core(symprod_core::Error::BadRange(format!(
            "--{name} must be in {lo}..={hi}, got {value}"
        ))));
    }
    Ok(())
}

/// Runs one command, writing human-facing output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<Status, CliError> {
    match cli.command {
        Command::Hausdorff { a, b } => {
            let (sa, many_a) = read_sets(&a)?;
            let (sb, many_b) = read_sets(&b)?;
            if many_a || many_b {
                return Err(CliError::Schema("hausdorff takes two single point-set documents".into()));
            }
            let d = hausdorff_distance(&sa[0], &sb[0])?;
            writeln!(stdout, "{d}").map_err(|e| CliError::Io(e.to_string()))?;
            Ok(Status::Ok)
        }
        Command::Embed { n, input, output } => {
            let pipeline = build_pipeline(n)?;
            let (sets, _) = read_sets(&input.to_string_lossy())?;
            let vectors = pipeline.embed_batch(&sets)?;
            let records: Vec<_> = sets
                .iter()
                .zip(vectors)
                .map(|(input, vector)| EmbeddedRecord { input, vector })
                .collect();
            write_atomic(&output, &to_json(&records))?;
            Ok(Status::Ok)
        }
        Command::EmbedRd { n, d, input, output } => {
            let rd = build_rd(n, d)?;
            let (sets, _) = read_sets(&input.to_string_lossy())?;
            let records = sets
                .iter()
                .map(|s| Ok(EmbeddedRecord { input: s, vector: rd.embed(s)? }))
                .collect::<Result<Vec<_>, CliError>>()?;
            write_atomic(&output, &to_json(&records))?;
            Ok(Status::Ok)
        }
        Command::Retract { n, k, input, output } => {
            let (sets, many) = read_sets(&input.to_string_lossy())?;
            let out = sets
                .iter()
                .map(|s| retract_to(s, n, k))
                .collect::<symprod_core::Result<Vec<_>>>()?;
            let text = if many { to_json(&out) } else { to_json(&out[0]) };
            write_atomic(&output, &text)?;
            Ok(Status::Ok)
        }
        Command::Tomo {
            q,
            d,
            certify,
            samples,
            seed,
            out,
        } => {
            let certificate = separation_constant(&make_line_family(q, d)?)?;
            let verification = if certify {
                Some(verify_separation(&certificate, samples, seed)?)
            } else {
                None
            };
            let passed = verification.as_ref().map_or(true, |v| v.passed());
            let report = TomoReport {
                certificate,
                verification,
                passed,
            };
            emit(out.as_deref(), &format!("tomo-q{q}-d{d}.json"), &to_json(&report), stdout)?;
            Ok(Status::from_pass(passed))
        }
        Command::ConeCheck {
            samples,
            points,
            seed,
            out,
        } => {
            let space = disk_sample(points, seed);
            let report = check_cone_comparison(&space, 0, samples, seed)?;
            emit(out.as_deref(), "cone-check.json", &to_json(&report), stdout)?;
            Ok(Status::from_pass(report.passed()))
        }
        Command::Distortion {
            map,
            n,
            d,
            samples,
            search,
            step,
            seed,
            csv,
            out,
        } => {
            let boxed: Box<dyn SetMap> = match map {
                MapKind::Embed => Box::new(EmbeddingMap {
                    pipeline: build_pipeline(n)?,
                }),
                MapKind::Retract => {
                    check_range("n", n, 2, 64)?;
                    Box::new(RetractionMap { n })
                }
                MapKind::Tomo => Box::new(TomographyMap {
                    certificate: separation_constant(&make_line_family(n, d)?)?,
                }),
                MapKind::Circle => {
                    check_range("n", n, 3, 64)?;
                    Box::new(CircleMap { n })
                }
            };
            let sampler = MetricSampler::cube(seed, boxed.domain_dim(), 1.0, boxed.capacity())?;
            let (report, pairs) = estimate_distortion_with_pairs(boxed.as_ref(), &sampler, samples)?;
            let report = adversarial_search(boxed.as_ref(), &report, search, step, seed);
            if let Some(path) = csv {
                write_atomic(&path, &pairs_to_csv(&pairs))?;
            }
            emit(out.as_deref(), &format!("distortion-{}.json", report.map_id), &to_json(&report), stdout)?;
            Ok(Status::from_pass(report.within_certified))
        }
        Command::Dims { max } => {
            check_range("max", max, 1, MAX_DIMENSION_N)?;
            for n in 1..=max {
                writeln!(stdout, "{n} {}", dimension(n)?).map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok(Status::Ok)
        }
        Command::Pipeline { n, out } => {
            let description = build_pipeline(n)?.describe();
            emit(out.as_deref(), &format!("pipeline-n{n}.json"), &to_json(&description), stdout)?;
            Ok(Status::Ok)
        }
        Command::Extend {
            n,
            radial_steps,
            neighbourhood,
            input,
            output,
        } => {
            let f: SampledMap = serde_json::from_value(read_json(&input.to_string_lossy())?)
                .map_err(|e| CliError::Schema(e.to_string()))?;
            let ext = ball_extension(
                &f,
                n,
                ExtensionOptions {
                    radial_steps,
                    neighbourhood,
                },
            )?;
            let pass = ext.report.boundary_agrees;
            write_atomic(
                &output,
                &to_json(&ExtendOutput {
                    report: ext.report,
                    map: ext.map,
                }),
            )?;
            Ok(Status::from_pass(pass))
        }
    }
}
