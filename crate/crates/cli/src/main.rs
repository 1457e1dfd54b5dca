//! `affkms`: evaluate, check and decompose KMS states of the affine Toeplitz
//! algebra from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use affine_kms::acceptance::DEFAULT_SEED;
use clap::{ArgGroup, Args, Parser, Subcommand};

mod commands;
mod output;
mod parse;

use output::Format;

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input. Exit code 1.
    Usage(String),
    /// A checked property does not hold, or the computation broke down. Exit code 2.
    Violation(String),
}

impl From<affine_kms::Error> for Failure {
    fn from(e: affine_kms::Error) -> Self {
        match e {
            affine_kms::Error::NotSubconformal { .. } | affine_kms::Error::Numerical(_) => {
                Failure::Violation(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "affkms",
    version,
    about = "KMS states of the affine Toeplitz algebra",
    max_term_width = 100
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by all subcommands. Each can also be set through an
/// `AFFKMS_*` environment variable; a flag wins over the environment.
#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Inverse temperature.
    #[arg(long, global = true, env = "AFFKMS_BETA")]
    pub beta: Option<f64>,
    /// Level n of ν_{β,n}, ψ_{β,n} or of a quotient.
    #[arg(long = "n", global = true, env = "AFFKMS_N")]
    pub n: Option<u64>,
    /// Level N of a ℚ/ℤ state.
    #[arg(long, global = true, env = "AFFKMS_LEVEL")]
    pub level: Option<u64>,
    /// Subgroup label m, for H = (1/m)ℤ/ℤ or ψ̄_{β,m}.
    #[arg(long, global = true, env = "AFFKMS_SUBGROUP")]
    pub subgroup: Option<u64>,
    /// Truncation bound C for series.
    #[arg(long, global = true, env = "AFFKMS_TRUNCATION", default_value_t = 100_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub truncation: u64,
    /// Tolerance for property checks.
    #[arg(long, global = true, env = "AFFKMS_TOL", default_value_t = 1e-10, value_parser = positive)]
    pub tol: f64,
    /// Largest extra prime tried by the subconformality checker.
    #[arg(
        long = "prime-bound",
        global = true,
        env = "AFFKMS_PRIME_BOUND",
        default_value_t = 30
    )]
    pub prime_bound: u64,
    /// Seed for random probes.
    #[arg(long, global = true, env = "AFFKMS_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "AFFKMS_JOBS", default_value_t = 1,
          value_parser = clap::value_parser!(u64).range(1..=256))]
    pub jobs: u64,
    #[arg(long, global = true, env = "AFFKMS_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true, env = "AFFKMS_OUTPUT")]
    pub output: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a state on a monomial, a ℚ/ℤ monomial or an element.
    #[command(group(ArgGroup::new("argument").required(true).args(["monomial", "qz", "element"])))]
    EvalState {
        /// State, e.g. `finite:n=2,beta=1` or `@state.json`.
        #[arg(long)]
        state: String,
        /// `a,k,b`.
        #[arg(long, allow_hyphen_values = true)]
        monomial: Option<String>,
        /// `a,p/q,b` for the ℚ/ℤ families.
        #[arg(long)]
        qz: Option<String>,
        /// JSON list of {a, k, b, re, im} terms.
        #[arg(long)]
        element: Option<PathBuf>,
    },
    /// Check the KMS condition on random monomial pairs.
    KmsCheck {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
        max_index: u64,
        #[arg(long, default_value_t = 30)]
        max_power: u32,
    },
    /// Write a measure as a combination of the extremal measures ν_{β,n}.
    Decompose {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Check that A_{β,F}ν ≥ 0 over a window of primes.
    CheckSubconformal {
        #[arg(long)]
        measure: PathBuf,
    },
    /// The extremal measure ν_{β,n}.
    ExtremalMeasure,
    /// Push a measure forward along z ↦ z^k.
    Pushforward {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
    },
    /// Apply the transfer operator T_β (β > 1), truncated or exactly at a root.
    #[command(name = "t-beta", group(ArgGroup::new("input").required(true).args(["measure", "root"])))]
    TBeta {
        #[arg(long)]
        measure: Option<PathBuf>,
        /// `p/q`: use the exact formula for a point mass.
        #[arg(long)]
        root: Option<String>,
    },
    /// Distance of T_β δ_z from uniform measure as β → 1⁺.
    #[command(name = "limit-beta1")]
    LimitBeta1 {
        #[arg(long, default_value = "1/4")]
        root: String,
        /// β = 1 + 10^{-j} for j = 1..=j-max.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=12))]
        j_max: u32,
    },
    /// Compare ψ_{β,n} with the superposition of low-temperature states.
    SuperpositionCheck,
    /// Apply the symmetry κ_b, optionally checking it against ψ_{β,n}.
    Kappa {
        #[arg(long)]
        b: u64,
        #[arg(long, allow_hyphen_values = true)]
        monomial: String,
    },
    /// Evaluate a state of the quotient by U^n = 1.
    QuotientEval {
        #[arg(long, allow_hyphen_values = true)]
        monomial: String,
        /// `p/q` of order dividing n: the character state, for β > 1.
        #[arg(long)]
        zeta: Option<String>,
    },
    /// Compare a ℚ/ℤ subgroup state with the matching quotient state.
    QzCoherence {
        /// `a,p/q,b` with q dividing n.
        #[arg(long)]
        qz: String,
    },
    /// Reconstruct ψ(U^k) from the corner state at e_F.
    Reconstruct {
        #[arg(long)]
        state: String,
        /// Comma-separated primes forming F.
        #[arg(long)]
        primes: String,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
    /// Evaluate the projection e_F and compare with ∏(1 − p^{−β}).
    #[command(name = "e-f-mass")]
    EFMass {
        #[arg(long)]
        state: String,
        #[arg(long)]
        primes: String,
    },
    /// Count y-smooth integers up to x.
    PsiCount {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
    },
    /// The Dickman function ρ(u).
    Dickman {
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
    },
    /// ∫_0^{u_max} ρ, which tends to e^γ.
    DickmanMass {
        #[arg(long, default_value_t = 20.0)]
        u_max: f64,
        #[arg(long, default_value_t = 0.005)]
        h: f64,
    },
    /// ∏_{p≤x}(1 − 1/p) log x against e^{−γ}.
    Mertens {
        #[arg(long, value_delimiter = ',', default_value = "1000,1000000")]
        x: Vec<u64>,
    },
    /// Normalized harmonic sums over smooth numbers, for n_primes = 3..=n-max.
    SmoothSum {
        /// `one`, `primes`, `squares` or `@values.json`.
        #[arg(long, default_value = "primes")]
        sequence: String,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Normalized sums of ν̂(ℓm + k)/m over smooth m, for n_primes = 3..=n-max.
    #[command(group(ArgGroup::new("data").required(true).args(["fourier", "measure"])))]
    WienerSum {
        /// JSON list of {m, re, im} coefficients.
        #[arg(long)]
        fourier: Option<PathBuf>,
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Primes excluded from m.
        #[arg(long, default_value = "2")]
        exclude: String,
        #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
        ell: i64,
        #[arg(long, default_value_t = -10, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Estimate ∫_u^∞ Ψ(x^s, x)/x^s ds at one x.
    DeltaEstimate {
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 1000)]
        x: u64,
    },
    /// Run the acceptance suite.
    SelfTest {
        /// Run one criterion, 1 through 17.
        #[arg(long)]
        criterion: Option<u8>,
        /// Perturb ν_{β,2} inside the decomposition check.
        #[arg(long)]
        corrupt_two_level: bool,
        /// Include wall-clock times (makes output run-dependent).
        #[arg(long)]
        timings: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::EvalState { .. } => "eval-state",
            Command::KmsCheck { .. } => "kms-check",
            Command::Decompose { .. } => "decompose",
            Command::CheckSubconformal { .. } => "check-subconformal",
            Command::ExtremalMeasure => "extremal-measure",
            Command::Pushforward { .. } => "pushforward",
            Command::TBeta { .. } => "t-beta",
            Command::LimitBeta1 { .. } => "limit-beta1",
            Command::SuperpositionCheck => "superposition-check",
            Command::Kappa { .. } => "kappa",
            Command::QuotientEval { .. } => "quotient-eval",
            Command::QzCoherence { .. } => "qz-coherence",
            Command::Reconstruct { .. } => "reconstruct",
            Command::EFMass { .. } => "e-f-mass",
            Command::PsiCount { .. } => "psi-count",
            Command::Dickman { .. } => "dickman",
            Command::DickmanMass { .. } => "dickman-mass",
            Command::Mertens { .. } => "mertens",
            Command::SmoothSum { .. } => "smooth-sum",
            Command::WienerSum { .. } => "wiener-sum",
            Command::DeltaEstimate { .. } => "delta-estimate",
            Command::SelfTest { .. } => "self-test",
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
    let name = cli.command.name();
    let result = commands::run(&cli.command, &cli.opts).and_then(|report| {
        let bytes = output::render(&report, cli.opts.format, name)?;
        output::emit(&bytes, cli.opts.output.as_deref())?;
        Ok(report.violation)
    });
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(message)) => {
            eprintln!("violation: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Violation(message)) => {
            eprintln!("violation: {message}");
            ExitCode::from(2)
        }
    }
}
