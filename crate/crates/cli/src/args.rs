use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use dflow_core::catalog::{Family, NamedFlow};
use dflow_core::hopf::SolverConfig;
use dflow_core::rootfind::{RootFindConfig, RootFindMode};
use serde::Serialize;

use crate::failure::Failure;

/// Times used when `--t` is not given.
pub const DEFAULT_TIMES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

#[derive(Parser, Debug, Serialize)]
#[command(name = "dflow", version, about = "Zeros of repeated derivatives and the Hopf equation on Cauchy transforms")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct GlobalArgs {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "dflow-out")]
    pub out: PathBuf,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Relative tolerance for root finding and characteristic solves.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
}

impl GlobalArgs {
    pub fn validate(&self) -> Result<(), Failure> {
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(Failure::usage(format!("--tol {} outside (0, 1e-3]", self.tol)));
        }
        if self.jobs == Some(0) {
            return Err(Failure::usage("--jobs must be positive"));
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tol,
            ..SolverConfig::default()
        }
    }

    pub fn rootfind(&self, mode: RootFindMode) -> RootFindConfig {
        RootFindConfig {
            tolerance: self.tol,
            ..RootFindConfig::with_mode(mode)
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Zeros of the k-th derivative for k = round(t * degree).
    Flow(FlowArgs),
    /// u(z, t) by characteristics on a grid of z.
    Hopf(HopfArgs),
    /// Moment polynomials m_k(t).
    Moments(MomentsArgs),
    /// Density and Hilbert transform on the real line, with the transport residual.
    Density(DensityArgs),
    /// Distances between an empirical zero distribution and the flow.
    Compare(CompareArgs),
    /// Rescaled zeros against the fractional free convolution power.
    Freeconv(FreeconvArgs),
    /// Closed-form u, densities and edges of a catalogued flow.
    Example(ExampleArgs),
    /// Randomized property suite.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Flow(_) => "flow",
            Command::Hopf(_) => "hopf",
            Command::Moments(_) => "moments",
            Command::Density(_) => "density",
            Command::Compare(_) => "compare",
            Command::Freeconv(_) => "freeconv",
            Command::Example(_) => "example",
            Command::Verify(_) => "verify",
        }
    }
}

/// `lo,hi,points`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [lo, hi, points] = parts.as_slice() else {
            return Err(format!("expected lo,hi,points, got {s:?}"));
        };
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("not a number: {x:?}"));
        let range = GridRange {
            lo: num(lo)?,
            hi: num(hi)?,
            points: points.parse().map_err(|_| format!("not a count: {points:?}"))?,
        };
        if !(range.lo < range.hi) || range.points < 2 {
            return Err(format!("need lo < hi and at least 2 points, got {s:?}"));
        }
        Ok(range)
    }
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        dflow_core::density_flow::uniform_grid(self.lo, self.hi, self.points)
    }
}

/// The initial measure: a catalogued flow or a JSON specification.
#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
pub struct MeasureSource {
    /// Catalogued flow: arcsine, semicircle, rodrigues, kalyagin, cubic, uniform, signed:<a>.
    #[arg(long)]
    pub named: Option<NamedFlow>,
    /// Measure specification as inline JSON or a path to a JSON file.
    #[arg(long)]
    pub measure: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
pub struct PolySource {
    /// Polynomial family: chebyshev, hermite, laguerre, equispaced, rodrigues, kalyagin, cubic.
    #[arg(long)]
    pub named: Option<Family>,
    /// Coefficients `[[re, im], ...]` in ascending order.
    #[arg(long)]
    pub poly: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct FlowArgs {
    #[command(flatten)]
    pub source: PolySource,
    /// Degree for a family; power of the polynomial for `--poly`.
    #[arg(long)]
    pub n: usize,
    /// Comma-separated times in [0, 1).
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct HopfArgs {
    #[command(flatten)]
    pub source: MeasureSource,
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Circle radius (default: 2 * support radius + 1).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Rectangular grid instead of a circle: real range `lo,hi,points`.
    #[arg(long, requires = "im", allow_hyphen_values = true)]
    pub re: Option<GridRange>,
    /// Imaginary range `lo,hi,points`.
    #[arg(long, requires = "re", allow_hyphen_values = true)]
    pub im: Option<GridRange>,
}

/// Initial moments, directly or from a measure.
#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
pub struct MomentSource {
    /// Initial moments `m_0, m_1, ...` as rationals or decimals; `m_0` must be 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m0: Option<Vec<String>>,
    #[arg(long)]
    pub named: Option<NamedFlow>,
    #[arg(long)]
    pub measure: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub source: MomentSource,
    #[arg(long, default_value_t = 8)]
    pub kmax: usize,
    /// Times at which to evaluate the polynomials.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub source: MeasureSource,
    #[arg(long, value_delimiter = ',', conflicts_with = "t_range")]
    pub t: Vec<f64>,
    /// Uniform time grid `lo,hi,points`; enables the transport residual.
    #[arg(long, allow_hyphen_values = true)]
    pub t_range: Option<GridRange>,
    /// Space grid `lo,hi,points` (default: the support disk's diameter, 201 points).
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<GridRange>,
    /// Distance from the real axis for boundary values.
    #[arg(long, default_value_t = dflow_core::density_flow::DEFAULT_EPS)]
    pub eps: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    /// Table with header `re,im,weight` or `re,im,multiplicity`.
    #[arg(long)]
    pub empirical: PathBuf,
    #[command(flatten)]
    pub source: MeasureSource,
    #[arg(long)]
    pub t: f64,
    /// Degree of the undifferentiated polynomial, when known.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comparison radius (default: 2 * support radius + 1).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct FreeconvArgs {
    /// Polynomial family.
    #[arg(long)]
    pub named: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Comparison radius (default: 2 * support radius + 1).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ExampleArgs {
    #[arg(long)]
    pub named: NamedFlow,
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Space grid `lo,hi,points` for densities.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<GridRange>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Random cases per randomized check.
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn grid_range_parses() {
        let r: GridRange = "-1,1,5".parse().unwrap();
        assert_eq!(r.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!("1,-1,5".parse::<GridRange>().is_err());
        assert!("0,1".parse::<GridRange>().is_err());
        assert!("0,1,1".parse::<GridRange>().is_err());
    }

    #[test]
    fn sources_are_exclusive() {
        assert!(Cli::try_parse_from(["dflow", "hopf", "--named", "semicircle", "--measure", "{}"]).is_err());
        assert!(Cli::try_parse_from(["dflow", "hopf"]).is_err());
        assert!(Cli::try_parse_from(["dflow", "moments", "--m0", "1,0", "--named", "arcsine"]).is_err());
        let cli = Cli::try_parse_from(["dflow", "flow", "--named", "chebyshev", "--n", "8", "--t", "0.25,0.5"]).unwrap();
        match cli.command {
            Command::Flow(a) => assert_eq!(a.t, vec![0.25, 0.5]),
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn config_serializes() {
        let cli = Cli::try_parse_from(["dflow", "--seed", "7", "example", "--named", "signed:2"]).unwrap();
        let v = serde_json::to_value(&cli).unwrap();
        assert_eq!(v["global"]["seed"], 7);
        assert_eq!(v["command"]["command"], "example");
    }
}
