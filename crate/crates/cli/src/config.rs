//! Run configuration: command-line grammar and the coefficient-token format.
//!
//! Symbols are passed as comma-separated complex tokens, lowest degree
//! first: `--g "0,1"` is `g = z`, `--g "0,0,1+0.5i"` is `g = (1+0.5i)z²`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use focklab_core::{Error, Result};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "focklab", version, about = "Weighted Fock-space numerics")]
pub struct Cli {
    /// RNG seed for power-iteration start vectors.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Output directory for report and curve files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Output file prefix (defaults to the subcommand name).
    #[arg(long, global = true)]
    pub name: Option<String>,

    /// Radial node count override.
    #[arg(long, global = true)]
    pub n_radial: Option<usize>,

    /// Angular node count override.
    #[arg(long, global = true)]
    pub n_angular: Option<usize>,

    /// Radial truncation override.
    #[arg(long, global = true)]
    pub r_max: Option<f64>,

    /// Quadrature tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Path to a thresholds TOML overriding the bundled calibration.
    #[arg(long, global = true)]
    pub thresholds: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the Mittag-Leffler function E_{1/m,1/m}(z).
    MlEval {
        #[arg(long)]
        m: f64,
        /// Complex argument, e.g. "2" or "1.5-0.25i".
        #[arg(long)]
        z: String,
        /// Force the Taylor-series branch regardless of |z|.
        #[arg(long)]
        series_only: bool,
    },
    /// Evaluate the reproducing kernel K_m(z, w).
    Kernel {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        z: String,
        #[arg(long)]
        w: String,
    },
    /// Berezin transforms of |e^{±g}|² and their product along the worst
    /// ray (default) or at explicit points.
    Berezin {
        #[arg(long)]
        m: f64,
        /// Symbol coefficients, lowest degree first.
        #[arg(long)]
        g: String,
        /// Comma-separated evaluation points (switches off the ray sweep).
        #[arg(long)]
        z: Option<String>,
        /// Largest sweep radius.
        #[arg(long)]
        x_max: Option<f64>,
        /// Number of sweep radii.
        #[arg(long, default_value_t = 8)]
        points: usize,
    },
    /// Largest singular value of the N×N section of T_u T_v̄, u = e^g.
    CompressNorm {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        g: String,
        /// Section dimension.
        #[arg(long = "N", short = 'N', alias = "n")]
        n: usize,
        /// Full curve dimensions, e.g. "16,32,64" (defaults to a ramp to N).
        #[arg(long)]
        ns: Option<String>,
    },
    /// Schur-test sweep and the (C₁, C₂) bound fit.
    Schur {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        g: String,
    },
    /// Boundedness classifier with the full evidence bundle.
    Classify {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        g: String,
    },
    /// Laplace-method and minimizer-rate checks for the phase family h_x.
    LaplaceCheck {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        a: f64,
        /// Lower-order absorption constant C in h_x.
        #[arg(long, default_value_t = 0.0)]
        c0: f64,
        /// Largest radius of the verification grid.
        #[arg(long, default_value_t = 16.0)]
        x_max: f64,
        /// Number of grid radii.
        #[arg(long, default_value_t = 8)]
        points: usize,
    },
    /// Numeric envelope verification of one integral estimate.
    Envelope {
        /// One of: eq8, lemma4a, lemma4b, lemma5i, lemma5j, lemma6i,
        /// lemma6j, lemma1.
        #[arg(long)]
        lemma: String,
        #[arg(long)]
        m: f64,
    },
}

impl Command {
    pub fn default_name(&self) -> &'static str {
        match self {
            Command::MlEval { .. } => "ml-eval",
            Command::Kernel { .. } => "kernel",
            Command::Berezin { .. } => "berezin",
            Command::CompressNorm { .. } => "compress-norm",
            Command::Schur { .. } => "schur",
            Command::Classify { .. } => "classify",
            Command::LaplaceCheck { .. } => "laplace-check",
            Command::Envelope { .. } => "envelope",
        }
    }
}

/// Parses one complex token: "1.5", "-2i", "1.5-0.25i", "i".
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Config("empty complex token".into()));
    }
    if !s.ends_with('i') {
        let re: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("bad real token: {token}")))?;
        return Ok(Complex64::new(re, 0.0));
    }
    let body = &s[..s.len() - 1];
    // split at the sign that separates re from im (not leading, not after e/E)
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im: f64 = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other
            .parse()
            .map_err(|_| Error::Config(format!("bad imaginary token: {token}")))?,
    };
    let re: f64 = if re_str.is_empty() {
        0.0
    } else {
        re_str
            .parse()
            .map_err(|_| Error::Config(format!("bad real part: {token}")))?
    };
    Ok(Complex64::new(re, im))
}

/// Parses comma-separated coefficient tokens into a symbol.
pub fn parse_symbol(s: &str) -> Result<focklab_core::PolynomialSymbol64> {
    let coeffs: Result<Vec<Complex64>> = s.split(',').map(parse_complex).collect();
    focklab_core::symbols::PolynomialSymbol::new(coeffs?)
}

/// Parses a comma-separated point list.
pub fn parse_points(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(parse_complex).collect()
}

/// Parses a comma-separated dimension list.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad dimension: {t}")))
        })
        .collect()
}
