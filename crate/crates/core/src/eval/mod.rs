//! Dice and BCE+Dice metrics, dataset evaluation, ablation and phantoms.

mod dataset;
mod metrics;
mod phantom;

pub use dataset::{
    ablate, ablate_samples, evaluate_dataset, evaluate_samples, load_manifest, load_sample, map_ordered,
    AblationReport, AblationRow, EvalOptions, EvaluationReport, Sample, SliceScore,
};
pub use metrics::{bce_dice_loss, dice, dice_with, sample_loss, BceForm, DiceMode, ProbabilityMap, LOG_FLOOR};
pub use phantom::{make_phantom, phantom_suite, Phantom, PhantomKind, PhantomParams};
