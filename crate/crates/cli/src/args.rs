use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pepforge::design::Method;
use pepforge::schedules::Family;

#[derive(Parser, Debug)]
#[command(name = "pepforge", version, about = "Worst-case analysis and step-size design for fixed-step first-order methods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify the worst case of one schedule; prints w and writes the certificate.
    Analyze {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value = "certificate.json")]
        out: PathBuf,
    },
    /// Optimize a schedule; prints a summary line and writes the design report.
    Design {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value = "design.json")]
        out: PathBuf,
    },
    /// Worst case (fixed steps) or designed bound (with --method) for a range of horizons.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Fit w(N) ~ 1 / (alpha N^nu + beta) to a sweep CSV.
    Fit {
        input: PathBuf,
        #[arg(long, default_value = "fit.json")]
        out: PathBuf,
    },
    /// Worst case of two-step gradient descent over a grid of step pairs.
    Landscape {
        #[command(flatten)]
        spec: SpecArgs,
        /// Interior points per axis.
        #[arg(long, default_value_t = 40)]
        res: usize,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 2.0)]
        hi: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "landscape.csv")]
        out: PathBuf,
    },
    /// Check a certificate against a schedule; exit 0 iff it passes.
    Verify {
        /// Certificate JSON, or a design report carrying one.
        #[arg(long)]
        certificate: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    #[value(name = "smooth_convex", alias = "smooth-convex")]
    SmoothConvex,
    #[value(name = "smooth_strongly_convex", alias = "smooth-strongly-convex")]
    SmoothStronglyConvex,
    Inexact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Gap,
    Dist,
    #[value(name = "min_grad", alias = "min-grad")]
    MinGrad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Dist,
    Gap,
}

/// Schedule and problem flags. Flags override the fields of `--schedule`.
#[derive(Args, Debug, Clone, Default)]
pub struct SpecArgs {
    /// Schedule JSON document, or a design report (its final schedule is used).
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    /// Horizon; `sweep` also takes `a,b,c` or `a..b`.
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Free parameters of the family, comma separated; one value is repeated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub steps: Option<Vec<f64>>,
    /// Full coefficient triangle as JSON, e.g. `[[1.5],[1.5,1.8]]`.
    #[arg(long)]
    pub coeffs: Option<String>,
    /// Cycle length of CGD (defaults to the number of --steps, else N).
    #[arg(long)]
    pub core_length: Option<usize>,
    #[arg(long, value_enum)]
    pub class: Option<ClassArg>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[arg(long = "R")]
    pub r: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DesignArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long = "T")]
    pub t_max: Option<usize>,
    #[arg(long)]
    pub tolw: Option<f64>,
    #[arg(long)]
    pub tola: Option<f64>,
    #[arg(long = "D0")]
    pub d0: Option<f64>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: pepforge::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: pepforge::Error| e.to_string())
}
