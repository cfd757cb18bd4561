//! Command-line front end. Every subcommand writes one JSON document (to
//! `--out` or stdout) and one run manifest (to `<out>.manifest.json`, or to
//! stderr when writing to stdout).
//!
//! Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{Rational, DEFAULT_PRIMES};
use crate::collide::{find_collisions_with, CollideError, SearchConfig, SearchSpace};
use crate::ffield::{ff_collision_search, FfError};
use crate::local::{padic_collision, real_collision, LocalError};
use crate::parse::{parse_poly, ExprError};
use crate::pipeline::{build_injection, BuildConfig, PipelineError};
use crate::poly::{BinaryForm, MultiPoly, PolyError};
use crate::surface::{scan_surface_with, ScanConfig, SurfaceError};

#[derive(Debug, Parser)]
#[command(name = "polyinj", version, about = "Bounded-height experiments with polynomial injections Q x Q -> Q")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rational points of bounded height on F(x,y) = F(z,w).
    Surface(SurfaceArgs),
    /// Twist, shift and compose a form into a candidate injection.
    Build(BuildArgs),
    /// Exhaustive collision search for f(x,y) = f(z,w).
    Collide(CollideArgs),
    /// Real or p-adic collisions near a base point.
    Local(LocalArgs),
    /// Collision search for x^p + t*y^p over F_p(t).
    Ffield(FfieldArgs),
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Binary form, inline or @file.
    #[arg(long)]
    pub form: String,
    #[arg(long)]
    pub height: u64,
    /// Join buckets are sharded by this many bits.
    #[arg(long, default_value_t = 6)]
    pub shard_bits: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub form: String,
    #[arg(long)]
    pub height: u64,
    #[arg(long, default_value_t = 3)]
    pub max_twists: usize,
    /// Stop twisting before the total degree of f would exceed this.
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_MAX_F_DEGREE)]
    pub max_f_degree: u32,
    /// Drawn from system entropy when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Search residual collisions of G over rationals instead of integers.
    #[arg(long)]
    pub g_rationals: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Int,
    Rat,
}

#[derive(Debug, Args)]
pub struct CollideArgs {
    /// Polynomial in x and y, inline or @file.
    #[arg(long)]
    pub poly: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Int)]
    pub mode: ModeArg,
    #[arg(long)]
    pub height: u64,
    #[arg(long, default_value_t = 16)]
    pub shards: usize,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, requires = "checkpoint")]
    pub resume: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("field").required(true).args(["real", "padic"]))]
pub struct LocalArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long)]
    pub real: bool,
    /// Prime for the p-adic search.
    #[arg(long, requires = "prec")]
    pub padic: Option<u64>,
    /// p-adic precision k.
    #[arg(long, requires = "padic")]
    pub prec: Option<u32>,
    /// Base point `x0,y0`.
    #[arg(long, value_parser = parse_pair)]
    pub at: (Rational, Rational),
    #[arg(long, default_value_t = crate::local::TOL_FLOOR)]
    pub tol: f64,
    /// Perturbation of x (default 1/1024 real, p p-adic).
    #[arg(long)]
    pub delta: Option<Rational>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FfieldArgs {
    #[arg(long)]
    pub p: u32,
    /// Degree bound for numerators and denominators.
    #[arg(long)]
    pub deg: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(Rational, Rational), String> {
    let (a, b) = s.split_once(',').ok_or("expected x0,y0")?;
    let p = |t: &str| t.trim().parse::<Rational>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Collide(#[from] CollideError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Ffield(#[from] FfError),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Expr(_) => "parse",
            CliError::Poly(_) => "polynomial",
            CliError::Surface(_) => "surface",
            CliError::Pipeline(_) => "build",
            CliError::Collide(_) => "collide",
            CliError::Local(_) => "local",
            CliError::Ffield(_) => "ffield",
        }
    }

    fn exit_code(&self) -> i32 {
        if matches!(self, CliError::Usage(_)) {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub rng_seed: Option<u64>,
    pub primes: Vec<u64>,
    pub version: String,
    pub wall_time_ms: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Run {
    inputs: Vec<FileDigest>,
    seed: Option<u64>,
}

impl Run {
    /// Inline expression, or the contents of the file after `@`.
    fn poly_source(&mut self, arg: &str) -> Result<MultiPoly, CliError> {
        let text = match arg.strip_prefix('@') {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|source| CliError::Io {
                    path: path.into(),
                    source,
                })?;
                self.inputs.push(FileDigest {
                    path: path.to_string(),
                    sha256: sha256_hex(&bytes),
                });
                String::from_utf8_lossy(&bytes).into_owned()
            }
            None => arg.to_string(),
        };
        Ok(parse_poly(text.trim())?)
    }

    fn seed(&mut self, given: Option<u64>) -> u64 {
        let s = given.unwrap_or_else(|| {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            s
        });
        self.seed = Some(s);
        s
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

fn execute(cmd: &Command, run: &mut Run) -> Result<Vec<u8>, CliError> {
    match cmd {
        Command::Surface(a) => {
            let form = BinaryForm::from_poly(&run.poly_source(&a.form)?)?;
            let cfg = ScanConfig {
                shard_bits: a.shard_bits,
                ..ScanConfig::default()
            };
            let (set, _) = scan_surface_with(&form, a.height, &cfg)?;
            Ok(to_json(&set.report()))
        }
        Command::Build(a) => {
            let form = BinaryForm::from_poly(&run.poly_source(&a.form)?)?;
            let cfg = BuildConfig {
                max_twists: a.max_twists,
                max_f_degree: a.max_f_degree,
                g_rationals: a.g_rationals,
                ..BuildConfig::new(a.height, run.seed(a.seed))
            };
            Ok(to_json(&build_injection(&form, &cfg)?))
        }
        Command::Collide(a) => {
            let f = run.poly_source(&a.poly)?;
            let space = match a.mode {
                ModeArg::Int => SearchSpace::integers(a.height),
                ModeArg::Rat => SearchSpace::rationals(a.height),
            };
            let cfg = SearchConfig {
                shards: a.shards,
                checkpoint: a.checkpoint.clone(),
                resume: a.resume,
                ..SearchConfig::default()
            };
            let mut report = find_collisions_with(&f, space, &cfg)?;
            // timing lives in the manifest so reruns are byte-identical
            report.stats.wall_time_ms = 0;
            Ok(to_json(&report))
        }
        Command::Local(a) => {
            let f = run.poly_source(&a.poly)?;
            let (x0, y0) = &a.at;
            if a.real {
                return Ok(to_json(&real_collision(&f, x0, y0, a.tol, a.delta.clone())?));
            }
            let (p, k) = (a.padic.expect("clap group"), a.prec.expect("clap requires"));
            let int = |r: &Rational, what: &str| -> Result<BigInt, CliError> {
                if r.is_integer() {
                    Ok(r.numer().clone())
                } else {
                    Err(CliError::Usage(format!("{what} must be an integer for --padic, got {r}")))
                }
            };
            let delta = match &a.delta {
                Some(d) => int(d, "--delta")?,
                None => BigInt::from(p),
            };
            let base = (int(x0, "x0")?, int(y0, "y0")?);
            Ok(to_json(&padic_collision(&f, p, k, base, delta)?))
        }
        Command::Ffield(a) => {
            let seed = run.seed(a.seed);
            Ok(to_json(&ff_collision_search(a.p, a.deg, a.trials, seed)?))
        }
    }
}

fn out_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Surface(a) => a.out.as_deref(),
        Command::Build(a) => a.out.as_deref(),
        Command::Collide(a) => a.out.as_deref(),
        Command::Local(a) => a.out.as_deref(),
        Command::Ffield(a) => a.out.as_deref(),
    }
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Surface(_) => "surface",
        Command::Build(_) => "build",
        Command::Collide(_) => "collide",
        Command::Local(_) => "local",
        Command::Ffield(_) => "ffield",
    }
}

fn report_error(e: &CliError) -> i32 {
    let body = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{body}");
    e.exit_code()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return report_error(&CliError::Usage("--threads must be at least 1".into()));
        }
        // fails only if a pool already exists, in which case it is reused
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let start = Instant::now();
    let mut run = Run {
        inputs: Vec::new(),
        seed: None,
    };
    let bytes = match execute(&cli.command, &mut run) {
        Ok(b) => b,
        Err(e) => return report_error(&e),
    };
    let out = out_path(&cli.command);
    let out_name = match out {
        Some(p) => {
            if let Err(e) = write_file(p, &bytes) {
                return report_error(&e);
            }
            p.display().to_string()
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(&bytes);
            "-".to_string()
        }
    };
    if let Command::Collide(a) = &cli.command {
        if let Some(cp) = &a.checkpoint {
            if let Ok(b) = std::fs::read(cp) {
                run.inputs.push(FileDigest {
                    path: cp.display().to_string(),
                    sha256: sha256_hex(&b),
                });
            }
        }
    }
    let manifest = RunManifest {
        subcommand: name(&cli.command).to_string(),
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        rng_seed: run.seed,
        primes: DEFAULT_PRIMES.to_vec(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: start.elapsed().as_millis() as u64,
        inputs: run.inputs,
        outputs: vec![FileDigest {
            path: out_name,
            sha256: sha256_hex(&bytes),
        }],
    };
    match out {
        Some(p) => {
            let mut mp = p.as_os_str().to_owned();
            mp.push(".manifest.json");
            if let Err(e) = write_file(Path::new(&mp), &to_json(&manifest)) {
                return report_error(&e);
            }
        }
        None => eprintln!("{}", serde_json::to_string(&manifest).expect("serializable")),
    }
    0
}
