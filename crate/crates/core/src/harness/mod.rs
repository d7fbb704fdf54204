//! Dataset manifests, synthetic data, and the cross-validated training protocol.

mod cv;
mod manifest;
mod synth;

pub use cv::{
    accuracy_from_confusion, cv_splits, evaluate, fragment_from_confusion, load_clips, make_batches, mean_and_std,
    per_class_accuracy, run_cv, run_cv_clips, run_holdout, train_model, Clip, EpochLog, EvalFragment, EvalReport,
    FoldResult, TrainConfig, TrainedFold, TARGET_SAMPLE_RATE,
};
pub use manifest::{load_manifest, DatasetManifest, LoadedManifest, ManifestEntry, CLASS_ABBREVIATIONS, CLASS_NAMES, N_FOLDS};
pub use synth::{gen_synthetic, synth_clip, Family, CLASS_BANDS, SYNTH_SAMPLE_RATE};
