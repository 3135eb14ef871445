use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use pointline_core::pseudolabel::{Connectivity, GrowConfig, GrowConfigPatch, Stages, StagesPatch};
use pointline_core::weaklabel::MidpointRule;

/// Pipeline settings. Precedence: flag, then `--config` file, then default.
#[derive(Debug, Clone, Default, Args)]
pub struct GrowArgs {
    /// TOML or JSON file with any subset of the settings below
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Growth tolerance around the backbone mean intensity [default: 30]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Odd side of the mean-smoothing window [default: 3]
    #[arg(long)]
    pub smooth_kernel: Option<usize>,
    /// Odd side of the closing structuring element [default: 3]
    #[arg(long)]
    pub close_kernel: Option<usize>,
    /// Dilations and erosions per closing [default: 1]
    #[arg(long)]
    pub close_iterations: Option<usize>,
    /// Perpendicular distance of the horn arc control points [default: 3]
    #[arg(long)]
    pub bezier_offset: Option<f64>,
    /// Growth neighbourhood, 4 or 8 [default: 8]
    #[arg(long)]
    pub connectivity: Option<Connectivity>,
    /// Stage set: all, center, or a comma list of backbone,fill,edge [default: all]
    #[arg(long)]
    pub stages: Option<Stages>,
    /// How a line's middle is chosen [default: index]
    #[arg(long, value_enum)]
    pub midpoint: Option<MidpointArg>,
    /// Seed the backbone with the annotated line pixels too [default: false]
    #[arg(long)]
    pub include_line_in_backbone: Option<bool>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MidpointArg {
    Index,
    Arclength,
}

impl GrowArgs {
    fn flags(&self) -> GrowConfigPatch {
        GrowConfigPatch {
            epsilon: self.epsilon,
            smooth_kernel: self.smooth_kernel,
            close_kernel: self.close_kernel,
            close_iterations: self.close_iterations,
            bezier_offset: self.bezier_offset,
            connectivity: self.connectivity,
            midpoint: self.midpoint.map(|m| match m {
                MidpointArg::Index => MidpointRule::Index,
                MidpointArg::Arclength => MidpointRule::Arclength,
            }),
            include_line_in_backbone: self.include_line_in_backbone,
            stages: self.stages.map(StagesPatch::from),
        }
    }

    /// Merged, validated config; also logged to stderr.
    pub fn resolve(&self) -> anyhow::Result<GrowConfig> {
        let mut cfg = GrowConfig::default();
        if let Some(path) = &self.config {
            cfg = GrowConfig::from_file(path).map_err(anyhow::Error::msg)?.apply(&cfg);
        }
        cfg = self.flags().apply(&cfg);
        cfg.validate().map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
        eprintln!("config: {}", serde_json::to_string(&cfg)?);
        Ok(cfg)
    }
}

pub fn jobs_or_default(jobs: Option<usize>) -> anyhow::Result<usize> {
    match jobs {
        Some(0) => anyhow::bail!("--jobs must be at least 1"),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn mask_name(image: &Path) -> String {
    let stem = image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "slice".into());
    format!("{stem}_pseudo.png")
}
