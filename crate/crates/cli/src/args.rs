use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use eastlab_core::Flavor;

#[derive(Debug, Parser)]
#[command(
    name = "eastlab",
    version = eastlab_core::VERSION,
    about = "Experiments on the East and Modified East models",
    args_override_self = true,
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the dynamics and report per-vertex infection and occupation times.
    Simulate(SimulateArgs),
    /// First passage times of the p = 0 reduction on the whole box.
    Fpp(FppArgs),
    /// Slab crossing probability of oriented percolation on a grid of p.
    PercCrossing(PercCrossingArgs),
    /// Finite-size oriented percolation threshold over several scales.
    PercPc(PercPcArgs),
    /// Extinction of the percolation cluster of diagonal seeds.
    PercSurvival(PercSurvivalArgs),
    /// Closed-form constants and the diagonal-speed condition.
    Constants(ConstantsArgs),
    /// Exact total-variation curve or mixing time of a small box.
    MixExact(MixExactArgs),
    /// Coalescence times of the grand coupling.
    MixCouple(MixCoupleArgs),
    /// Inverse front speed of the one-dimensional chain.
    Rho(RhoArgs),
    /// Axis and diagonal front speeds from the all-healthy start.
    Front(FrontArgs),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fpp(_) => "fpp",
            Command::PercCrossing(_) => "perc-crossing",
            Command::PercPc(_) => "perc-pc",
            Command::PercSurvival(_) => "perc-survival",
            Command::Constants(_) => "constants",
            Command::MixExact(_) => "mix-exact",
            Command::MixCouple(_) => "mix-couple",
            Command::Rho(_) => "rho",
            Command::Front(_) => "front",
            Command::Accept(_) => "accept",
        }
    }
}

/// Options shared by every subcommand. None of them enters the run hash.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed.
    #[arg(long, env = "EASTLAB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Replica worker threads (default: available cores).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=1024))]
    pub jobs: Option<u32>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File of `key = value` lines supplying flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FlavorArg {
    #[value(alias = "east", alias = "s")]
    Site,
    #[value(alias = "modified-east", alias = "b")]
    Bond,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Site => Flavor::East,
            FlavorArg::Bond => Flavor::ModifiedEast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    Healthy,
    Infected,
    /// Product measure with healthy density `p`.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Table,
}

pub fn probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("p = {p} is out of range [0, 1)"))
    }
}

pub fn open_unit(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(format!("{p} is out of range (0, 1)"))
    }
}

pub fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} must be positive and finite"))
    }
}

pub fn non_negative(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} must be non-negative and finite"))
    }
}

pub fn half_open_delta(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x > 0.0 && x < 0.5 {
        Ok(x)
    } else {
        Err(format!("delta = {x} is out of range (0, 1/2)"))
    }
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    let items: Result<Vec<T>, _> = s.split(',').map(|t| t.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(format!("{s:?} is not a comma-separated list of {what}")),
    }
}

pub fn size_list(s: &str) -> Result<Vec<usize>, String> {
    let v: Vec<usize> = list(s, "sizes")?;
    if v.contains(&0) {
        return Err("sizes must be positive".into());
    }
    Ok(v)
}

pub fn probability_list(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = list(s, "probabilities")?;
    if let Some(bad) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("p = {bad} is out of range [0, 1]"));
    }
    Ok(v)
}

/// `x1,x2;y1,y2;...`
pub fn vertex_list(s: &str) -> Result<Vec<Vec<i64>>, String> {
    s.split(';').map(|v| list::<i64>(v, "coordinates")).collect()
}

pub fn criteria(s: &str) -> Result<Vec<usize>, String> {
    let v: Vec<usize> = list(s, "criterion numbers")?;
    if let Some(bad) = v.iter().find(|&&c| !(1..=13).contains(&c)) {
        return Err(format!("criterion {bad} is out of range 1..=13"));
    }
    Ok(v)
}

fn dim_range() -> clap::builder::RangedU64ValueParser<usize> {
    clap::builder::RangedU64ValueParser::new().range(1..=8)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Model {
    /// Dimension.
    #[arg(long, default_value_t = 2, value_parser = dim_range())]
    pub d: usize,
    /// Box side: the box is {0,..,L}^d.
    #[arg(long = "L", id = "L", default_value_t = 10)]
    #[serde(rename = "l")]
    pub side: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::Site)]
    pub flavor: FlavorArg,
    /// Probability that a resample is healthy.
    #[arg(long, default_value_t = 0.05, value_parser = probability)]
    pub p: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 50.0, value_parser = non_negative)]
    pub horizon: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Healthy)]
    pub init: InitArg,
    /// Tracked vertices as `x1,x2;y1,y2` (default: the far corner).
    #[arg(long, value_parser = vertex_list)]
    pub track: Option<::std::vec::Vec<Vec<i64>>>,
    /// Track every vertex of the box.
    #[arg(long, conflicts_with = "track")]
    pub track_all: bool,
    /// Also record the hitting time of the good set with this window.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FppArgs {
    #[arg(long, default_value_t = 2, value_parser = dim_range())]
    pub d: usize,
    #[arg(long = "L", id = "L", default_value_t = 10)]
    #[serde(rename = "l")]
    pub side: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::Site)]
    pub flavor: FlavorArg,
    /// Report the exponential moment of the diagonal passage time over
    /// `--reps` boxes instead of the time field.
    #[arg(long)]
    pub moment: bool,
    /// Threshold `T` for the moment bound `exp(d β_T + ε)`.
    #[arg(long, value_parser = positive, requires = "moment")]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = 0.1, value_parser = non_negative)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..))]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PercCrossingArgs {
    #[arg(long, default_value_t = 2, value_parser = dim_range())]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::Bond)]
    pub flavor: FlavorArg,
    /// Grid of p values.
    #[arg(long, value_parser = probability_list, default_value = "0.5,0.55,0.6,0.65,0.7,0.75,0.8")]
    pub ps: ::std::vec::Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.2, value_parser = half_open_delta)]
    pub delta: f64,
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PercPcArgs {
    #[arg(long, default_value_t = 2, value_parser = dim_range())]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::Bond)]
    pub flavor: FlavorArg,
    #[arg(long, value_parser = size_list, default_value = "32,64,128")]
    pub scales: ::std::vec::Vec<usize>,
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u64).range(4..))]
    pub reps: u64,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-4, value_parser = positive)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PercSurvivalArgs {
    #[arg(long, default_value_t = 2, value_parser = dim_range())]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::Bond)]
    pub flavor: FlavorArg,
    #[arg(long, default_value_t = 0.7, value_parser = probability)]
    pub p: f64,
    /// Seed sizes |A|.
    #[arg(long, value_parser = size_list, default_value = "1,2,4,8")]
    pub sizes: ::std::vec::Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub generations: usize,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstantsArgs {
    /// Oriented percolation threshold p_c.
    #[arg(long, value_parser = open_unit)]
    pub pc: f64,
    #[arg(long, default_value_t = 2, value_parser = dim_range())]
    pub d: usize,
    /// Threshold T for β_T and the Chernoff level.
    #[arg(long = "T", id = "T", value_parser = positive)]
    #[serde(rename = "t")]
    pub threshold: Option<f64>,
    /// ρ for the cutoff location (needs --L).
    #[arg(long, value_parser = positive, requires = "L")]
    pub rho: Option<f64>,
    #[arg(long = "L", id = "L")]
    #[serde(rename = "l")]
    pub side: Option<usize>,
    /// Mark p_c as estimated rather than supplied.
    #[arg(long)]
    pub estimated: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MixExactArgs {
    #[arg(long, default_value_t = 1, value_parser = dim_range())]
    pub d: usize,
    #[arg(long = "L", id = "L", default_value_t = 3)]
    #[serde(rename = "l")]
    pub side: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::Site)]
    pub flavor: FlavorArg,
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    pub p: f64,
    /// Report `T_mix` as JSON instead of the curve.
    #[arg(long)]
    pub tmix: bool,
    #[arg(long, default_value_t = 0.25, value_parser = open_unit)]
    pub threshold: f64,
    #[arg(long, default_value_t = 20.0, value_parser = positive)]
    pub t_max: f64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..=100_000))]
    pub points: u64,
    /// log2 of the largest state space accepted.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=26))]
    pub cap_log2: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MixCoupleArgs {
    #[command(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 1000.0, value_parser = positive)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RhoArgs {
    #[arg(long, default_value_t = 0.05, value_parser = probability)]
    pub p: f64,
    #[arg(long, value_parser = size_list, default_value = "200,400,600,800,1000,1200,1400,1600")]
    pub scales: ::std::vec::Vec<usize>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
    pub reps: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FrontArgs {
    #[arg(long, default_value_t = 2, value_parser = dim_range())]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::Site)]
    pub flavor: FlavorArg,
    #[arg(long, default_value_t = 0.02, value_parser = probability)]
    pub p: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub n: usize,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
    pub reps: u64,
    /// ρ for the late-event frequency.
    #[arg(long, value_parser = positive)]
    pub rho: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AcceptArgs {
    /// Run only these criteria, e.g. `1,2,13`.
    #[arg(long, value_parser = criteria)]
    pub only: Option<::std::vec::Vec<usize>>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}
