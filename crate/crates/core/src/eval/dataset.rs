use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{dice_with, DiceMode};
use crate::imaging::{read_gray, read_mask, BinaryMask, GrayImage};
use crate::pseudolabel::{generate_pseudo_label, GrowConfig, Stages};
use crate::weaklabel::{parse_weak_labels, Manifest, ManifestEntry, WeakLabelSet};

/// How a dataset run is executed and scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Worker threads; results never depend on it.
    pub jobs: usize,
    pub dice_mode: DiceMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { jobs: 1, dice_mode: DiceMode::Standard }
    }
}

impl EvalOptions {
    pub fn with_jobs(jobs: usize) -> Self {
        Self { jobs, ..Default::default() }
    }
}

/// One loaded slice.
#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub image: GrayImage,
    pub labels: WeakLabelSet,
    pub truth: Option<BinaryMask>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceScore {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dice: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub slices: Vec<SliceScore>,
    /// Mean over scored slices; `None` when nothing was scored.
    pub mean: Option<f64>,
    pub scored: usize,
    /// Slices without ground truth.
    pub skipped: usize,
    pub failed: usize,
}

impl EvaluationReport {
    fn from_slices(slices: Vec<SliceScore>) -> Self {
        let scores: Vec<f64> = slices.iter().filter_map(|s| s.dice).collect();
        let failed = slices.iter().filter(|s| s.error.is_some()).count();
        let skipped = slices.len() - scores.len() - failed;
        Self { mean: mean(&scores), scored: scores.len(), skipped, failed, slices }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let width = self.slices.iter().map(|s| s.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  dice\n", "slice");
        for s in &self.slices {
            let value = match (&s.dice, &s.error) {
                (Some(d), _) => format!("{d:.4}"),
                (None, Some(e)) => format!("error: {e}"),
                (None, None) => "skipped (no ground truth)".to_string(),
            };
            out += &format!("{:<width$}  {value}\n", s.name);
        }
        out += &format!(
            "{:<width$}  {}\n",
            "mean",
            self.mean.map_or("undefined".to_string(), |m| format!("{m:.4}"))
        );
        out += &format!("scored {}, skipped {}, failed {}\n", self.scored, self.skipped, self.failed);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub name: String,
    pub stages: Stages,
    pub mean: Option<f64>,
    pub per_slice: Vec<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub skipped: usize,
    pub failed: usize,
}

impl AblationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(6).max(6);
        let mut out = format!("{:<width$}  {:>9}  {:>6}\n", "method", "mean dice", "slices");
        for r in &self.rows {
            let m = r.mean.map_or("undefined".to_string(), |m| format!("{m:.4}"));
            out += &format!("{:<width$}  {m:>9}  {:>6}\n", r.name, r.count);
        }
        out
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Applies `f` to every item on a pool of `jobs` threads; results keep input order.
pub fn map_ordered<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(e) => {
            tracing::warn!("thread pool unavailable ({e}); running serially");
            items.iter().map(f).collect()
        }
    }
}

/// Reads one manifest entry: image, weak labels and optional ground truth.
pub fn load_sample(manifest: &Manifest, entry: &ManifestEntry) -> Result<Sample, String> {
    let image_path = manifest.resolve(&entry.image);
    let image = read_gray(&image_path).map_err(|e| format!("{}: {e}", image_path.display()))?;
    let labels_path = manifest.resolve(&entry.labels);
    let text = std::fs::read_to_string(&labels_path).map_err(|e| format!("{}: {e}", labels_path.display()))?;
    let labels = parse_weak_labels(&text).map_err(|e| format!("{}: {e}", labels_path.display()))?;
    let truth = match &entry.ground_truth {
        Some(p) => {
            let path = manifest.resolve(p);
            Some(read_mask(&path).map_err(|e| format!("{}: {e}", path.display()))?)
        }
        None => None,
    };
    Ok(Sample { name: sample_name(&entry.image), image, labels, truth })
}

fn sample_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Loads every entry; failures are kept per entry as `(name, message)`.
pub fn load_manifest(manifest: &Manifest, jobs: usize) -> Vec<Result<Sample, (String, String)>> {
    map_ordered(&manifest.entries, jobs, |e| load_sample(manifest, e).map_err(|m| (sample_name(&e.image), m)))
}

fn score(sample: &Sample, cfg: &GrowConfig, mode: DiceMode) -> SliceScore {
    let name = sample.name.clone();
    let Some(truth) = &sample.truth else {
        return SliceScore { name, dice: None, error: None };
    };
    let result = generate_pseudo_label(&sample.image, &sample.labels, cfg)
        .map_err(|e| e.to_string())
        .and_then(|mask| dice_with(&mask, truth, mode).map_err(|e| e.to_string()));
    match result {
        Ok(d) => SliceScore { name, dice: Some(d), error: None },
        Err(e) => SliceScore { name, dice: None, error: Some(e) },
    }
}

fn score_all(loaded: &[Result<Sample, (String, String)>], cfg: &GrowConfig, opts: EvalOptions) -> Vec<SliceScore> {
    map_ordered(loaded, opts.jobs, |item| match item {
        Ok(sample) => score(sample, cfg, opts.dice_mode),
        Err((name, e)) => SliceScore { name: name.clone(), dice: None, error: Some(e.clone()) },
    })
}

/// Dice of pseudo-labels against ground truth for in-memory samples.
pub fn evaluate_samples(samples: &[Sample], cfg: &GrowConfig, opts: EvalOptions) -> EvaluationReport {
    let loaded: Vec<_> = samples.iter().cloned().map(Ok).collect();
    EvaluationReport::from_slices(score_all(&loaded, cfg, opts))
}

pub fn evaluate_dataset(manifest: &Manifest, cfg: &GrowConfig, opts: EvalOptions) -> EvaluationReport {
    let loaded = load_manifest(manifest, opts.jobs);
    EvaluationReport::from_slices(score_all(&loaded, cfg, opts))
}

fn ablate_loaded(loaded: &[Result<Sample, (String, String)>], cfg: &GrowConfig, opts: EvalOptions) -> AblationReport {
    let mut rows = Vec::with_capacity(Stages::LADDER.len());
    let (mut skipped, mut failed) = (0, 0);
    for (name, stages) in Stages::LADDER {
        let report = EvaluationReport::from_slices(score_all(loaded, &cfg.with_stages(stages), opts));
        skipped = skipped.max(report.skipped);
        failed = failed.max(report.failed);
        let per_slice: Vec<f64> = report.slices.iter().filter_map(|s| s.dice).collect();
        rows.push(AblationRow { name: name.to_string(), stages, mean: report.mean, count: per_slice.len(), per_slice });
    }
    AblationReport { rows, skipped, failed }
}

/// Evaluates the four cumulative stage sets, in ladder order.
pub fn ablate_samples(samples: &[Sample], cfg: &GrowConfig, opts: EvalOptions) -> AblationReport {
    let loaded: Vec<_> = samples.iter().cloned().map(Ok).collect();
    ablate_loaded(&loaded, cfg, opts)
}

pub fn ablate(manifest: &Manifest, cfg: &GrowConfig, opts: EvalOptions) -> AblationReport {
    ablate_loaded(&load_manifest(manifest, opts.jobs), cfg, opts)
}
