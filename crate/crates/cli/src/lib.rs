//! Command-line front end: argument parsing, the thread pool, the L-polynomial
//! cache and output files.

pub mod cache;
pub mod check;
pub mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use census_core::family::NtildeField;
use census_core::moduli::{Beta1Variant, StrataModel};
use census_core::theory::SquareWeight;
use census_core::{Error, ErrorClass};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Environment variable that overrides `--cache-dir`.
pub const CACHE_ENV: &str = "MODULI_CENSUS_CACHE";

/// Exit status for a survey whose tolerance rows did not all pass.
pub const EXIT_TOLERANCE: i32 = 1;

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Input => 2,
        ErrorClass::Unsupported => 3,
        ErrorClass::Resource => 4,
        ErrorClass::Internal => 5,
    }
}

#[derive(Parser, Debug, Serialize)]
#[command(name = "moduli-census", version, about = "Point counts of moduli spaces of bundles over hyperelliptic curves y^2 = F(x)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory of the L-polynomial cache (overridden by MODULI_CENSUS_CACHE).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: all available).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file, or output prefix for `survey`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report cache activity and point-counting work on stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    /// Form of β₁ used for the rank-2 degree-0 counts.
    #[arg(long, global = true, value_enum, default_value_t = Beta1Arg::Full)]
    pub beta1_variant: Beta1Arg,
    /// Model for the strictly semistable strata.
    #[arg(long, global = true, value_enum, default_value_t = StrataArg::Rational)]
    pub strata: StrataArg,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Point counts, L-polynomial, Jacobian orders and zeta values of one curve.
    Curve(CurveArgs),
    /// N_q(M_L(n,d)) for gcd(n,d) = 1.
    Moduli(ModuliArgs),
    /// N_q(M^s(2,0)).
    Stable20(CurveArgs),
    /// N_q of the desingularization of M(2,0).
    Ntilde(CurveArgs),
    /// Statistics over the family of squarefree F of degree γ.
    Survey(SurveyArgs),
    /// Theoretical moments H(r) or the characteristic function φ(τ).
    Theory(TheoryArgs),
    /// Run the invariant suite on reference inputs.
    Check,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct CurveArgs {
    /// Field size (an odd prime power).
    #[arg(long)]
    pub q: u64,
    /// Coefficients of F as canonical field labels, constant term first.
    /// The leading 1 may be written out as a final entry or left implicit:
    /// a trailing 1 is read as the leading coefficient when the remaining
    /// entries still give degree >= 5. Give --gamma to remove the ambiguity.
    #[arg(long, value_delimiter = ',', required = true)]
    pub poly: Vec<u64>,
    /// Degree of F, to disambiguate --poly.
    #[arg(long)]
    pub gamma: Option<usize>,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct ModuliArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Rank n.
    #[arg(long)]
    pub rank: usize,
    /// Degree d.
    #[arg(long, allow_hyphen_values = true)]
    pub deg: i64,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct SurveyArgs {
    #[arg(long)]
    pub q: u64,
    /// Degree γ of F.
    #[arg(long)]
    pub gamma: usize,
    /// Enumerate every squarefree F.
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    /// Number of sampled curves.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = census_core::rng::DEFAULT_SEED)]
    pub seed: u64,
    /// Truncation Z of Δ_Z (default γ).
    #[arg(long = "Z")]
    pub z: Option<usize>,
    /// Degree bound D for H(r).
    #[arg(long, default_value_t = 12)]
    pub degree_bound: usize,
    /// Number of moments R.
    #[arg(long, default_value_t = 4)]
    pub r_max: usize,
    /// Add the statistic of M_L(rank, deg).
    #[arg(long, requires = "deg")]
    pub rank: Option<usize>,
    #[arg(long, requires = "rank", allow_hyphen_values = true)]
    pub deg: Option<i64>,
    /// Further statistics.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub stats: Vec<ExtraStat>,
    /// Field over which Ñ is counted.
    #[arg(long, value_enum, default_value_t = NtildeFieldArg::Q)]
    pub ntilde_field: NtildeFieldArg,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct TheoryArgs {
    #[arg(value_enum)]
    pub kind: TheoryKind,
    #[arg(long)]
    pub q: u64,
    /// Moment order (hr).
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Degree bound D.
    #[arg(long, default_value_t = 12)]
    pub degree_bound: usize,
    /// Largest number of distinct primes in a product (phi).
    #[arg(long, default_value_t = 6)]
    pub r_max: usize,
    /// Arguments τ (phi).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.5,1,2")]
    pub tau: Vec<f64>,
    /// Square-class weight of the first form of H(r).
    #[arg(long, value_enum, default_value_t = WeightArg::Reciprocal)]
    pub square_weight: WeightArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum TheoryKind {
    Hr,
    Phi,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum ExtraStat {
    Ms20,
    Ntilde,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum Beta1Arg {
    Full,
    SingleExtension,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum StrataArg {
    Rational,
    Geometric,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum NtildeFieldArg {
    Q,
    Q2,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum WeightArg {
    Reciprocal,
    Literal,
}

impl From<Beta1Arg> for Beta1Variant {
    fn from(a: Beta1Arg) -> Self {
        match a {
            Beta1Arg::Full => Beta1Variant::Full,
            Beta1Arg::SingleExtension => Beta1Variant::SingleExtension,
        }
    }
}

impl From<StrataArg> for StrataModel {
    fn from(a: StrataArg) -> Self {
        match a {
            StrataArg::Rational => StrataModel::Rational,
            StrataArg::Geometric => StrataModel::Geometric,
        }
    }
}

impl From<NtildeFieldArg> for NtildeField {
    fn from(a: NtildeFieldArg) -> Self {
        match a {
            NtildeFieldArg::Q => NtildeField::Q,
            NtildeFieldArg::Q2 => NtildeField::Q2,
        }
    }
}

impl From<WeightArg> for SquareWeight {
    fn from(a: WeightArg) -> Self {
        match a {
            WeightArg::Reciprocal => SquareWeight::Reciprocal,
            WeightArg::Literal => SquareWeight::Literal,
        }
    }
}

impl Cli {
    /// The cache directory after applying the environment override.
    pub fn effective_cache_dir(&self) -> Option<PathBuf> {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
            _ => self.cache_dir.clone(),
        }
    }
}

/// Parse arguments, run the command, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 4;
        }
    };
    match pool.install(|| commands::dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
