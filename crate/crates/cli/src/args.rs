//! Command-line flags. Every parameter group also deserializes from the
//! matching section of a TOML config file; flags win over the file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "bzl",
    version,
    about = "Wannier-Stark ladders and Bloch-Zener dynamics of driven non-Hermitian lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML config file with [model], [walk], [numerics], [evolution] and [output] sections
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for CSV, JSON and manifest files
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (defaults to all cores); results do not depend on it
    #[arg(long, global = true, env = "BZL_THREADS")]
    pub threads: Option<usize>,

    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact ladder offset θ from the ordered exponential
    Spectrum(ModelCommand),
    /// Adiabatic (WKB) estimate of θ
    Wkb(ModelCommand),
    /// Dense diagonalization of the truncated real-space operator
    WsDiag(ModelCommand),
    /// θ over a gain/loss range with sharp/smooth classification
    Sweep(ModelCommand),
    /// Time evolution from a single-site excitation
    Evolve(EvolveCommand),
    /// Periodicity classification of a recorded revival trace
    Classify(ClassifyArgs),
    /// Quasi-energy θ(q) of the forced quantum walk
    QwSpectrum(WalkCommand),
    /// Walk quasi-energy over a gain/loss range
    QwSweep(WalkCommand),
    /// Pulse dynamics of the quantum walk
    QwEvolve(WalkEvolveCommand),
    /// Band-collapse check of the forced walk
    QwFlatness(WalkCommand),
    /// Compare the small-angle walk with the matching Rice-Mele chain
    ContinuumCheck(ModelCommand),
    /// Reproduce a figure with preset parameters
    Repro(ReproArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Wkb(_) => "wkb",
            Command::WsDiag(_) => "ws-diag",
            Command::Sweep(_) => "sweep",
            Command::Evolve(_) => "evolve",
            Command::Classify(_) => "classify",
            Command::QwSpectrum(_) => "qw-spectrum",
            Command::QwSweep(_) => "qw-sweep",
            Command::QwEvolve(_) => "qw-evolve",
            Command::QwFlatness(_) => "qw-flatness",
            Command::ContinuumCheck(_) => "continuum-check",
            Command::Repro(_) => "repro",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelCommand {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub numerics: NumericsArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveCommand {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WalkCommand {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub numerics: NumericsArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WalkEvolveCommand {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    /// CSV whose first two columns are time (or step) and amplitude
    #[arg(long)]
    pub input: PathBuf,
    /// Force of a continuous-time run; the period is 2π/F
    #[arg(long, conflicts_with = "m")]
    pub force: Option<f64>,
    /// Steps per period of a quantum-walk recurrence trace
    #[arg(long)]
    pub m: Option<u32>,
    /// Transient to skip, in periods [default: 3]
    #[arg(long)]
    pub transient: Option<f64>,
    /// Mismatch tolerance [default: 0.05]
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1b,
    Fig1cd,
    Fig2b,
    Fig2cd,
    Fig3a,
    Fig3bc,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub figure: Figure,
}

fn number_or_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|r| match r {
        Raw::Num(x) => format!("{x:?}"),
        Raw::Text(s) => s,
    }))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelArgs {
    /// Lattice model: model1 or rice-mele
    #[arg(long)]
    #[serde(rename = "kind", alias = "model")]
    pub model: Option<String>,
    /// Hopping t1
    #[arg(long)]
    pub t1: Option<f64>,
    /// Hopping t2
    #[arg(long)]
    pub t2: Option<f64>,
    /// Gain/loss Δ: a value, or start:stop:intervals for sweeps
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "number_or_text")]
    pub delta: Option<String>,
    /// dc force F
    #[arg(long)]
    pub force: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct WalkArgs {
    /// Coupling angle β1 (pi-expressions allowed, e.g. pi/2-0.1)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "number_or_text")]
    pub beta1: Option<String>,
    /// Coupling angle β2
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "number_or_text")]
    pub beta2: Option<String>,
    /// Gain/loss Δ: a value, or start:stop:intervals for sweeps
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "number_or_text")]
    pub delta: Option<String>,
    /// Steps per force period (F = 2π/M)
    #[arg(long)]
    pub m: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct NumericsArgs {
    /// Initial k-slices of the ordered exponential [default: 4096]
    #[arg(long)]
    pub n_k: Option<usize>,
    /// Tolerance of the k-grid doubling check [default: 1e-9]
    #[arg(long)]
    pub k_tol: Option<f64>,
    /// Lattice cells (default: auto-sized for evolve, 200 for ws-diag)
    #[arg(long)]
    pub n_cells: Option<usize>,
    /// Dense diagonalization cap in cells [default: 2000]
    #[arg(long)]
    pub max_cells: Option<usize>,
    /// ε floor of the sharp/smooth classifier [default: 1e-6]
    #[arg(long)]
    pub eps_floor: Option<f64>,
    /// Quasi-momentum grid size for walk band checks [default: 64]
    #[arg(long)]
    pub n_q: Option<usize>,
    /// Skip the WKB estimate in sweeps
    #[arg(long)]
    #[serde(default)]
    pub no_wkb: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvolutionArgs {
    /// Duration in force periods [default: 10]
    #[arg(long, conflicts_with = "t_end")]
    pub periods: Option<f64>,
    /// Duration in time units
    #[arg(long)]
    pub t_end: Option<f64>,
    /// RK4 step (default: auto from the spectral-radius bound)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integration steps between samples (default: 64 samples per period)
    #[arg(long)]
    pub sample_every: Option<usize>,
    /// Walk steps [default: 10·M]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Revival cell relative to the excited cell [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub revival_offset: Option<i64>,
    /// Classifier transient in periods [default: 3]
    #[arg(long)]
    pub transient: Option<f64>,
    /// Classifier tolerance [default: 0.05]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Walk map: keep sites whose normalized amplitude ever exceeds this [default: 1e-12]
    #[arg(long)]
    pub map_threshold: Option<f64>,
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
    fn parses_walk_expressions_and_negative_values() {
        let cli = Cli::try_parse_from([
            "bzl",
            "qw-evolve",
            "--m",
            "61",
            "--beta1",
            "pi/2-0.1",
            "--beta2",
            "-0.5",
            "--delta",
            "0.06",
        ])
        .unwrap();
        let Command::QwEvolve(c) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(c.walk.beta1.as_deref(), Some("pi/2-0.1"));
        assert_eq!(c.walk.beta2.as_deref(), Some("-0.5"));
        assert_eq!(c.walk.m, Some(61));
    }

    #[test]
    fn periods_and_t_end_conflict() {
        let r = Cli::try_parse_from(["bzl", "evolve", "--periods", "3", "--t-end", "10"]);
        assert!(r.is_err());
    }

    #[test]
    fn repro_takes_a_figure() {
        let cli = Cli::try_parse_from(["bzl", "repro", "fig2cd"]).unwrap();
        assert!(matches!(
            cli.command,
            Command::Repro(ReproArgs { figure: Figure::Fig2cd })
        ));
        assert_eq!(cli.command.name(), "repro");
        assert!(Cli::try_parse_from(["bzl", "repro", "fig4"]).is_err());
    }
}
