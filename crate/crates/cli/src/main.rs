use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emocam_cli::{
    cmd_analyze, cmd_overlay, cmd_perturb, cmd_predict, cmd_rsa, cmd_synth, parse_methods, CliError, ConfigLayer, RunConfig,
    SynthOptions,
};
use log::{error, info, warn};

#[derive(Parser)]
#[command(name = "emocam", version, about = "Class-activation analysis of image emotion classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every image and write predictions.jsonl
    Predict(Common),
    /// Compute CAMs, select important boxes and build association matrices
    Analyze(Common),
    /// Correlate the methods' association matrices
    Rsa(Common),
    /// Paste patch objects over a position grid and record label switches
    Perturb(Common),
    /// Render one image's CAM with its important boxes outlined
    Overlay {
        #[command(flatten)]
        common: Common,
        /// Image id (file stem under --images)
        #[arg(long)]
        id: String,
        /// CAM method to render; defaults to the first configured method
        #[arg(long)]
        method: Option<String>,
    },
    /// Generate a seeded demo corpus, model and config
    Synth {
        #[arg(long, default_value = "demo")]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        images: usize,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with any of the options below
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model descriptor (JSON)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Weights container
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Detections (JSON lines)
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Directory of input images
    #[arg(long)]
    images: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of gradcam,ablationcam,occlusion
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    det_threshold: Option<f64>,
    #[arg(long)]
    cact_threshold: Option<f64>,
    /// Occlusion grid cells per side
    #[arg(long)]
    grid_n: Option<usize>,
    /// Worker threads (falls back to EMOCAM_WORKERS, then all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// File of "cx,cy" lines replacing the default 17-position grid
    #[arg(long)]
    positions: Option<PathBuf>,
    /// Comma-separated RGBA patch images
    #[arg(long, value_delimiter = ',')]
    patches: Option<Vec<PathBuf>>,
    /// Class vocabulary, one name per line, fixing row order
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Matrix form flattened for RSA: counts or percent
    #[arg(long)]
    rsa_input: Option<String>,
    /// Ignore and do not write the cache
    #[arg(long)]
    no_cache: bool,
}

impl Common {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => ConfigLayer::load(p)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            model: self.model,
            weights: self.weights,
            detections: self.detections,
            images: self.images,
            out: self.out,
            methods: self.methods,
            det_threshold: self.det_threshold,
            cact_threshold: self.cact_threshold,
            grid_n: self.grid_n,
            workers: self.workers,
            positions: self.positions,
            patches: self.patches,
            classes: self.classes,
            rsa_input: self.rsa_input,
            cache: self.no_cache.then_some(false),
        };
        RunConfig::resolve(flags.over(file))
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Predict(c) => {
            let r = cmd_predict(&c.resolve()?)?;
            info!("{} of {} images predicted", r.predicted, r.images);
            if !r.failed.is_empty() {
                warn!("{} images failed", r.failed.len());
            }
        }
        Command::Analyze(c) => {
            let r = cmd_analyze(&c.resolve()?)?;
            info!(
                "{} of {} images analyzed; {} without detections, {} size mismatches, {} degenerate boxes",
                r.analyzed,
                r.images,
                r.missing_detections.len(),
                r.size_mismatches.len(),
                r.degenerate_boxes
            );
        }
        Command::Rsa(c) => {
            let r = cmd_rsa(&c.resolve()?)?;
            let m = r.methods.len();
            for i in 0..m {
                for j in i + 1..m {
                    info!("{} vs {}: rho {:.4}, p {:.3e}", r.methods[i], r.methods[j], r.rho_at(i, j), r.p_at(i, j));
                }
            }
        }
        Command::Perturb(c) => {
            let r = cmd_perturb(&c.resolve()?)?;
            info!("{} outcomes ({} images skipped)", r.outcomes, r.skipped.len());
        }
        Command::Overlay { common, id, method } => {
            let method = match method {
                Some(m) => parse_methods(&[m])?.first().copied(),
                None => None,
            };
            let path = cmd_overlay(&common.resolve()?, &id, method)?;
            info!("wrote {}", path.display());
        }
        Command::Synth { out, images, size, seed } => {
            cmd_synth(&SynthOptions {
                out: out.clone(),
                images,
                image_size: size,
                model_input: size,
                seed,
            })?;
            info!("wrote demo corpus to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
