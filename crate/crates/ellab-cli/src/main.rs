//! Command-line driver for the ellab toolkit.
//!
//! Every subcommand prints a machine-readable result (CSV or JSON with
//! lexicographically sorted keys) on stdout and diagnostics on stderr.
//! Exit codes: 0 success and all checks pass, 1 a mathematical assertion
//! failed, 2 usage or parse error, 3 precision or convergence failure.

mod cache;
mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Shared knobs. Each subcommand reads the subset it documents; the rest
/// are ignored. `ELLAB_CACHE_DIR` in the environment wins over `--cache-dir`.
#[derive(Debug, Args)]
pub struct RunOpts {
    /// Working precision in bits (floor 53).
    #[arg(long = "bits", default_value_t = 128)]
    pub precision_bits: u32,

    /// Highest series coefficient index to compute or dump.
    #[arg(long = "nmax", default_value_t = 50)]
    pub n_max: usize,

    /// Sampling circle radius in (0, 1); default is the plan's 0.5.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Circle sample count, a power of two >= 8; default grows with --nmax.
    #[arg(long = "dft-size")]
    pub dft_size: Option<usize>,

    /// Largest prime still counted by full enumeration.
    #[arg(long, default_value_t = 65537)]
    pub exhaustive_threshold: u64,

    /// Seed for baby-step giant-step point sampling.
    #[arg(long, default_value_t = 0x11A)]
    pub seed: u64,

    /// Tolerance for height convergence and audit comparisons.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    /// Directory holding the prime trace cache; caching is off without it.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,

    /// JSON file supplying reduction data at primes the classifier cannot
    /// settle (bad reduction at 2 or 3), and optionally the conductor.
    #[arg(long = "conductor-override")]
    pub conductor_override_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormKind {
    /// Degree form m^2 + a m n + q n^2 of Frobenius data.
    Frobenius,
    /// Height pairing form on supplied rational points.
    NeronTate,
    /// Integer form with user coefficients (defaults to an indefinite one).
    Planted,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace-of-Frobenius table over one prime or an inclusive range.
    Count {
        /// Curve "a1,a2,a3,a4,a6" over Q.
        #[arg(long)]
        curve: String,
        /// Single prime to count at.
        #[arg(long)]
        p: Option<u64>,
        /// Prime range "lo..hi", both ends inclusive.
        #[arg(long = "p-range")]
        p_range: Option<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Reduction type of the curve at one prime.
    Classify {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Conductor with its per-prime breakdown.
    Conductor {
        #[arg(long)]
        curve: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Dirichlet series value L(s), with an optional coefficient dump.
    Lvalue {
        #[arg(long)]
        curve: String,
        /// Evaluation point "re,im".
        #[arg(long)]
        s: String,
        /// Write coefficients a_1..a_nmax as CSV "n,an" to this path.
        #[arg(long = "dump-coeffs")]
        dump_coeffs: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Completed symmetric value xi(s), satisfying xi(s) = w xi(1-s).
    Xi {
        #[arg(long)]
        curve: String,
        /// Evaluation point "re,im".
        #[arg(long)]
        s: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Positivity report for the series coefficients; exits 0 only when
    /// every computed coefficient is nonnegative.
    Li {
        #[arg(long)]
        curve: String,
        /// Also write the per-coefficient table as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Canonical heights of rational points, with error bounds.
    Height {
        #[arg(long)]
        curve: String,
        /// Points "x,y" or "x_num/x_den,y_num/y_den" or "O", ';'-separated.
        #[arg(long)]
        points: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Gram matrix of the height pairing on a list of points.
    Pairing {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        points: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Cauchy-Schwarz check for a pair of points; exits 1 on violation.
    CsCheck {
        #[arg(long)]
        curve: String,
        /// Exactly two ';'-separated points.
        #[arg(long)]
        points: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Solution count of x^2 y^2 + x^2 + y^2 = 1 mod p, for p = 1 mod 4.
    Gauss {
        #[arg(long)]
        p: u64,
    },
    /// Positivity and bilinearity audit of a quadratic form witness;
    /// exits 1 when the form fails a law.
    AuditQform {
        /// Which witness to audit.
        #[arg(long, value_enum)]
        form: FormKind,
        /// Frobenius trace (frobenius form only).
        #[arg(long, default_value_t = 2)]
        a: i64,
        /// Field size (frobenius form only).
        #[arg(long, default_value_t = 5)]
        q: u64,
        /// Integer form coefficients "s1,cross,s2" (planted form only).
        #[arg(long, default_value = "1,10,1")]
        coeffs: String,
        /// Curve for the height form (neron-tate only).
        #[arg(long)]
        curve: Option<String>,
        /// Elements for the height form (neron-tate only).
        #[arg(long)]
        points: Option<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Debug, Parser)]
#[command(name = "ellab", version, about = "Elliptic curve series laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Failures sorted by exit code class. Usage covers everything the caller
/// can fix by changing the invocation, Math is a violated assertion the
/// pipeline checked, Precision is an honest inability to converge.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Math(String),
    Precision(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Math(_) => 1,
            CliError::Precision(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Math(m) | CliError::Precision(m) => f.write_str(m),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match commands::dispatch(&cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
