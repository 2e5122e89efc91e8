//! Subcommand-first front end. Every subcommand reads one profile, writes
//! its tables and images into the output directory and exits with 0 on
//! success, 2 on configuration errors, 3 on tolerance failures and 4 when
//! extended precision cannot hold the requested accuracy.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oampnr::profile::{OutputFormat, RunProfile};
use oampnr::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "oampnr", version, about = "Photon-number-resolved OAM correlations of partially coherent light")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PlaneArg {
    /// Modulator plane, E = G e^{iΦ}.
    Source,
    /// Back focal plane of a lens (Fourier transform of the source plane).
    Focal,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run profile; the built-in paper fit when omitted.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the Monte Carlo and synthesis seeds.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also write SVG images.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Joint photon-number distribution P(N, M) of one mode pair.
    Jointpnr {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        l1: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        l2: Option<i64>,
    },
    /// Classical g² over an (ℓ1, ℓ2) grid.
    G2map {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        l_min: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        l_max: Option<i64>,
    },
    /// g̃²(n1, n2) over the OAM grid, or over (n1, n2) at the profile's pair.
    G2tilde {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "n2")]
        n1: Option<usize>,
        #[arg(long, requires = "n1")]
        n2: Option<usize>,
        /// Map over photon numbers instead of OAM.
        #[arg(long, conflicts_with_all = ["n1", "n2"])]
        photon_grid: bool,
    },
    /// ℓ1 scans at fixed ℓ2: classical, projected and single-mode.
    Interference {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        l2: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        l1_min: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        l1_max: Option<i64>,
        /// Projection "n1,n2"; repeatable. Defaults to the profile's list.
        #[arg(long = "projection", value_parser = parse_pair)]
        projections: Vec<[usize; 2]>,
    },
    /// Sampled photon counts checked against the analytic distribution.
    Montecarlo {
        #[command(flatten)]
        common: Common,
    },
    /// Synthesized random fields: mode statistics and field maps.
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "focal")]
        plane: PlaneArg,
    },
    /// Grid search of the source parameters against the target anchors.
    Fit {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_pair(s: &str) -> std::result::Result<[usize; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected n1,n2, got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok([p(a)?, p(b)?])
}

/// Profile and flags resolved into one run context.
pub(crate) struct Run {
    pub profile: RunProfile,
    pub digest: String,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub svg: bool,
}

impl Run {
    fn new(common: &Common) -> Result<Self> {
        let mut profile = match &common.profile {
            Some(p) => RunProfile::load(p)?,
            None => RunProfile::paper_fit(),
        };
        if let Some(seed) = common.seed {
            if let Some(mc) = profile.mc.as_mut() {
                mc.seed = seed;
            }
            if let Some(s) = profile.synthesis.as_mut() {
                s.seed = seed;
            }
        }
        if let Some(n) = common.workers {
            if n == 0 {
                return Err(Error::Config("--workers must be positive".into()));
            }
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let format = match common.format {
            Some(FormatArg::Csv) => OutputFormat::Csv,
            Some(FormatArg::Json) => OutputFormat::Json,
            None => profile.outputs.format,
        };
        let svg = common.svg || profile.outputs.svg;
        let out = common
            .out
            .clone()
            .or_else(|| profile.outputs.directory.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out)?;
        let digest = profile.digest();
        Ok(Self { profile, digest, out, format, svg })
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Jointpnr { common, l1, l2 } => commands::jointpnr(&Run::new(&common)?, l1, l2),
        Command::G2map { common, l_min, l_max } => commands::g2map(&Run::new(&common)?, l_min, l_max),
        Command::G2tilde { common, n1, n2, photon_grid } => {
            let run = Run::new(&common)?;
            if photon_grid {
                commands::g2tilde_photons(&run)
            } else {
                commands::g2tilde_oam(&run, n1.zip(n2))
            }
        }
        Command::Interference { common, l2, l1_min, l1_max, projections } => {
            commands::interference(&Run::new(&common)?, l2, l1_min, l1_max, projections)
        }
        Command::Montecarlo { common } => commands::montecarlo(&Run::new(&common)?),
        Command::Synthesize { common, plane } => commands::synthesize(&Run::new(&common)?, plane == PlaneArg::Focal),
        Command::Fit { common } => commands::fit(&Run::new(&common)?),
    }
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
