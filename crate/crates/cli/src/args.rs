use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use definetti_core::bounds::BoundId;
use definetti_core::divergence::Metric;
use definetti_core::suite::Scope;
use definetti_core::urn::UrnComposition;
use definetti_core::ExactRational;

#[derive(Debug, Parser)]
#[command(
    name = "definetti",
    version,
    about = "Exact divergences and bound checks for sampling and finite exchangeability"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Minimum working precision, in bits, for logarithms and exponentials.
    #[arg(long, global = true, default_value_t = 50, value_parser = clap::value_parser!(u32).range(50..=4096))]
    pub precision_bits: u32,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare draws without and with replacement from one urn.
    Sampling(SamplingArgs),
    /// De Finetti gaps of an exchangeable model against the bounds.
    Definetti(DefinettiArgs),
    /// Evaluate every bound at one parameter point.
    BoundsTable(BoundsTableArgs),
    /// Run the verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Tabulate divergences and bounds over a grid of urns.
    Sweep(SweepArgs),
    /// Print the bound registry as JSON.
    Registry,
    /// Write a model file.
    Model(ModelArgs),
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Ball counts per colour, e.g. `2,2`.
    #[arg(long, value_parser = parse_urn)]
    pub urn: UrnComposition,

    /// Number of draws.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    /// Metrics to report.
    #[arg(long, value_delimiter = ',', default_value = "tv,kl", value_parser = parse_metric)]
    pub metric: Vec<Metric>,
}

#[derive(Debug, Args)]
pub struct DefinettiArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,

    /// Marginal lengths, e.g. `1,2,3` or `1..3`; defaults to every k <= n.
    #[arg(long, value_parser = parse_range)]
    pub k: Option<IntList>,

    /// Metrics to report.
    #[arg(long, value_delimiter = ',', default_value = "tv,kl", value_parser = parse_metric)]
    pub metric: Vec<Metric>,
}

#[derive(Debug, Args)]
pub struct BoundsTableArgs {
    /// Alphabet size / colour count.
    #[arg(long)]
    pub c: Option<usize>,

    /// Urn size / sequence length.
    #[arg(long)]
    pub n: Option<u64>,

    #[arg(long)]
    pub k: u64,

    /// Urn composition; supplies `c` and `n` when those are omitted.
    #[arg(long, value_parser = parse_urn)]
    pub urn: Option<UrnComposition>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_scope)]
    pub scope: Scope,

    /// Multiply one bound by a rational factor before checking, e.g.
    /// `stam=1/100`. Used to confirm that failures are detected.
    #[arg(long, value_parser = parse_scaling)]
    pub scale_bound: Vec<(BoundId, ExactRational)>,

    /// Maximum number of failure witnesses printed per criterion.
    #[arg(long, default_value_t = 5)]
    pub max_witnesses: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UrnFamily {
    /// Every composition of n into c colours, empty colours included.
    All,
    /// Every composition with all colours present.
    Full,
    /// The n-colour urn with one ball per colour (c = n; --c-range is ignored).
    Uniform,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Colour counts, e.g. `2..4` (inclusive) or `2,3`.
    #[arg(long, value_parser = parse_range, default_value = "2")]
    pub c_range: IntList,

    #[arg(long, value_parser = parse_range)]
    pub n_range: IntList,

    #[arg(long, value_parser = parse_range)]
    pub k_range: IntList,

    #[arg(long, value_enum, default_value_t = UrnFamily::All)]
    pub urns: UrnFamily,

    /// Bounds to include; defaults to every bound that applies to urns.
    #[arg(long, value_delimiter = ',', value_parser = parse_bound_id)]
    pub bounds: Option<Vec<BoundId>>,

    /// Output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Uniformly random ordering of n distinct symbols.
    Permutation,
    /// Random type mixture drawn from the seed.
    Random,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub kind: ModelKind,

    #[arg(long)]
    pub n: u64,

    /// Alphabet size for random models.
    #[arg(long, default_value_t = 2)]
    pub c: usize,

    #[arg(long, default_value_t = definetti_core::exchangeable::SUITE_SEED)]
    pub seed: u64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_urn(s: &str) -> Result<UrnComposition, String> {
    let counts = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad count `{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    UrnComposition::new(counts).map_err(|e| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: definetti_core::Error| e.to_string())
}

fn parse_scope(s: &str) -> Result<Scope, String> {
    s.parse().map_err(|e: definetti_core::Error| e.to_string())
}

fn parse_bound_id(s: &str) -> Result<BoundId, String> {
    s.parse().map_err(|e: definetti_core::Error| e.to_string())
}

fn parse_scaling(s: &str) -> Result<(BoundId, ExactRational), String> {
    let (id, factor) = s
        .split_once('=')
        .ok_or_else(|| format!("expected id=factor, got `{s}`"))?;
    let id = parse_bound_id(id)?;
    let factor = factor.trim().parse::<ExactRational>().map_err(|e| e.to_string())?;
    Ok((id, factor))
}

/// A sorted, deduplicated list of integers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntList(pub Vec<u64>);

/// `a..b` (inclusive), `a-b`, `a`, or a comma list of those. A reversed
/// range such as `5..4` is empty.
pub fn parse_range(s: &str) -> Result<IntList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bounds = part.split_once("..").or_else(|| part.split_once('-'));
        match bounds {
            Some((a, b)) => {
                let a: u64 = a
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad range start in `{part}`: {e}"))?;
                let b: u64 = b
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|e| format!("bad range end in `{part}`: {e}"))?;
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|e| format!("bad integer `{part}`: {e}"))?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(IntList(out))
}
