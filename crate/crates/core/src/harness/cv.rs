use std::collections::HashSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, N_FOLDS};
use crate::audio::{read_wav, resample, Framer, FramingPolicy, Waveform, WindowKind};
use crate::error::{Error, Result};
use crate::inference::{classify_clip_with_id, AggregationRule};
use crate::model::{Model, ModelConfig};
use crate::nn::Mode;
use crate::optim::{Adadelta, AdadeltaConfig};

pub const TARGET_SAMPLE_RATE: u32 = 16_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub framing: FramingPolicy,
    pub rule: AggregationRule,
    pub optimizer: AdadeltaConfig,
    pub seed: u64,
}

impl TrainConfig {
    /// Protocol defaults: batch 100, up to 100 epochs, patience 10, frames of
    /// the model's input length with 50% overlap, rectangular window, sum rule.
    pub fn new(model: ModelConfig) -> Self {
        let framing = FramingPolicy::new(model.input_len, 0.5, WindowKind::Rectangular, true)
            .expect("model input length is positive");
        Self {
            model,
            batch_size: 100,
            max_epochs: 100,
            early_stop_patience: 10,
            framing,
            rule: AggregationRule::SumRule,
            optimizer: AdadeltaConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument("batch size must be at least 2 for batch norm".into()));
        }
        if self.max_epochs == 0 || self.early_stop_patience == 0 {
            return Err(Error::InvalidArgument("epochs and patience must be positive".into()));
        }
        if self.framing.frame_len() != self.model.input_len {
            return Err(Error::InvalidArgument(format!(
                "frame length {} does not match {} input length {}",
                self.framing.frame_len(),
                self.model.id(),
                self.model.input_len
            )));
        }
        self.optimizer.validate()
    }
}

/// A decoded clip resampled to the working rate.
#[derive(Debug, Clone)]
pub struct Clip {
    pub id: String,
    pub path: PathBuf,
    pub class_id: usize,
    pub fold: u8,
    pub waveform: Waveform,
}

/// Decodes every manifest entry (in parallel) and resamples to 16 kHz.
pub fn load_clips(manifest: &DatasetManifest) -> Result<Vec<Clip>> {
    manifest
        .entries
        .par_iter()
        .map(|e| {
            let w = read_wav(&e.file_path)?;
            Ok(Clip {
                id: e.clip_id(),
                path: e.file_path.clone(),
                class_id: e.class_id,
                fold: e.fold,
                waveform: resample(&w, TARGET_SAMPLE_RATE)?,
            })
        })
        .collect()
}

/// Clip-level results on one subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFragment {
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
    pub per_class_accuracy: Vec<f64>,
    pub n_clips: usize,
}

pub fn accuracy_from_confusion(confusion: &[Vec<u64>]) -> f64 {
    let total: u64 = confusion.iter().flatten().sum();
    let diag: u64 = confusion.iter().enumerate().map(|(i, r)| r[i]).sum();
    if total == 0 {
        0.0
    } else {
        diag as f64 / total as f64
    }
}

pub fn per_class_accuracy(confusion: &[Vec<u64>]) -> Vec<f64> {
    confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let n: u64 = row.iter().sum();
            if n == 0 {
                0.0
            } else {
                row[i] as f64 / n as f64
            }
        })
        .collect()
}

pub fn fragment_from_confusion(confusion: Vec<Vec<u64>>) -> EvalFragment {
    EvalFragment {
        accuracy: accuracy_from_confusion(&confusion),
        per_class_accuracy: per_class_accuracy(&confusion),
        n_clips: confusion.iter().flatten().sum::<u64>() as usize,
        confusion,
    }
}

/// Clip-level evaluation of an eval-mode model.
pub fn evaluate(model: &Model, clips: &[&Clip], framing: &FramingPolicy, rule: AggregationRule) -> Result<EvalFragment> {
    if clips.is_empty() {
        return Err(Error::Empty("evaluation subset has no clips".into()));
    }
    let k = model.n_classes();
    let predicted = clips
        .iter()
        .map(|c| classify_clip_with_id(model, &c.id, &c.waveform, framing, rule).map(|d| d.class_index))
        .collect::<Result<Vec<_>>>()?;
    let mut confusion = vec![vec![0u64; k]; k];
    for (clip, p) in clips.iter().zip(predicted) {
        confusion[clip.class_id][p] += 1;
    }
    Ok(fragment_from_confusion(confusion))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub test_fold: u8,
    pub val_fold: u8,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub test: EvalFragment,
    pub history: Vec<EpochLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: String,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Sample standard deviation (n − 1) of the per-fold accuracies.
    pub std_dev: f64,
    pub confusion: Vec<Vec<u64>>,
    pub per_class_accuracy: Vec<f64>,
    pub folds: Vec<FoldResult>,
}

pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl EvalReport {
    pub fn from_folds(config: String, folds: Vec<FoldResult>) -> Self {
        let per_fold_accuracy: Vec<f64> = folds.iter().map(|f| f.test.accuracy).collect();
        let (mean_accuracy, std_dev) = mean_and_std(&per_fold_accuracy);
        let k = folds.first().map(|f| f.test.confusion.len()).unwrap_or(0);
        let mut confusion = vec![vec![0u64; k]; k];
        for f in &folds {
            for (row, frow) in confusion.iter_mut().zip(&f.test.confusion) {
                row.iter_mut().zip(frow).for_each(|(a, b)| *a += b);
            }
        }
        Self {
            config,
            per_fold_accuracy,
            mean_accuracy,
            std_dev,
            per_class_accuracy: per_class_accuracy(&confusion),
            confusion,
            folds,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec_pretty(self)?)
    }

    pub fn confusion_csv(&self, class_names: &[String]) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(class_names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in class_names.iter().zip(&self.confusion) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// `(test fold, validation fold, training folds)` for every split of the
/// 10-fold protocol. Validation is the next fold cyclically.
pub fn cv_splits() -> Vec<(u8, u8, Vec<u8>)> {
    (1..=N_FOLDS)
        .map(|test| {
            let val = test % N_FOLDS + 1;
            let train = (1..=N_FOLDS).filter(|&f| f != test && f != val).collect();
            (test, val, train)
        })
        .collect()
}

fn check_disjoint(train: &[&Clip], val: &[&Clip], test: &[&Clip]) -> Result<()> {
    let ids = |s: &[&Clip]| s.iter().map(|c| c.path.clone()).collect::<HashSet<_>>();
    let (tr, va, te) = (ids(train), ids(val), ids(test));
    if !tr.is_disjoint(&va) || !tr.is_disjoint(&te) || !va.is_disjoint(&te) {
        return Err(Error::InvalidArgument("training, validation and test clips overlap".into()));
    }
    Ok(())
}

/// Trained model for one split plus its training history.
pub struct TrainedFold {
    pub model: Model,
    pub best_epoch: usize,
    pub history: Vec<EpochLog>,
}

/// Splits a shuffled frame list into batches; a trailing batch of one is
/// merged into its predecessor so batch norm always sees two samples.
pub fn make_batches<T: Clone>(items: &[T], batch_size: usize) -> Vec<Vec<T>> {
    let mut batches: Vec<Vec<T>> = items.chunks(batch_size).map(|c| c.to_vec()).collect();
    if batches.len() > 1 && batches.last().map(|b| b.len()) == Some(1) {
        let last = batches.pop().expect("non-empty");
        batches.last_mut().expect("at least one batch").extend(last);
    }
    batches
}

/// Frame-level training with early stopping on clip-level validation
/// accuracy. Returns the model from the last epoch that reached the best
/// validation accuracy.
pub fn train_model(train: &[&Clip], val: &[&Clip], tc: &TrainConfig, seed: u64) -> Result<TrainedFold> {
    tc.validate()?;
    let framer = Framer::new(tc.framing);
    let mut index: Vec<(usize, usize)> = Vec::new();
    for (ci, clip) in train.iter().enumerate() {
        for fi in 0..framer.count(clip.waveform.len())? {
            index.push((ci, fi));
        }
    }
    if index.len() < 2 {
        return Err(Error::InvalidArgument("need at least two training frames".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::from_config(tc.model.clone(), seed)?;
    let mut optimizer = Adadelta::new(tc.optimizer)?;
    let mut best: Option<(f64, usize, Model)> = None;
    let mut since_best = 0;
    let mut history = Vec::new();

    for epoch in 1..=tc.max_epochs {
        index.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for batch in make_batches(&index, tc.batch_size) {
            let frames: Vec<Vec<f64>> = batch
                .iter()
                .map(|&(ci, fi)| framer.frame(train[ci].waveform.samples(), fi).values)
                .collect();
            let refs: Vec<&[f64]> = frames.iter().map(|f| f.as_slice()).collect();
            let labels: Vec<usize> = batch.iter().map(|&(ci, _)| train[ci].class_id).collect();
            let loss = model.train_step(&refs, &labels, &mut optimizer, &mut rng)?;
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }
        model.set_mode(Mode::Eval);
        let val_accuracy = if val.is_empty() {
            0.0
        } else {
            evaluate(&model, val, &tc.framing, tc.rule)?.accuracy
        };
        let train_loss = loss_sum / seen as f64;
        log::info!("epoch {epoch}: train loss {train_loss:.6}, validation accuracy {val_accuracy:.4}");
        history.push(EpochLog {
            epoch,
            train_loss,
            val_accuracy,
        });

        // A tie moves the checkpoint forward (same validation score, more
        // training) but only a strict gain resets patience.
        let best_acc = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0);
        if val_accuracy > best_acc {
            since_best = 0;
        } else {
            since_best += 1;
        }
        if val_accuracy >= best_acc {
            best = Some((val_accuracy, epoch, model.clone()));
        }
        if since_best >= tc.early_stop_patience {
            break;
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch ran");
    Ok(TrainedFold {
        model,
        best_epoch,
        history,
    })
}

fn fold_seed(seed: u64, test_fold: u8) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(test_fold as u64)
}

fn run_split(clips: &[Clip], test: u8, val: u8, train_folds: &[u8], tc: &TrainConfig) -> Result<(FoldResult, Model)> {
    let pick = |folds: &[u8]| clips.iter().filter(|c| folds.contains(&c.fold)).collect::<Vec<_>>();
    let (train, val_set, test_set) = (pick(train_folds), pick(&[val]), pick(&[test]));
    for (name, set) in [("training", &train), ("validation", &val_set), ("test", &test_set)] {
        if set.is_empty() {
            return Err(Error::Empty(format!("{name} split for test fold {test} has no clips")));
        }
    }
    check_disjoint(&train, &val_set, &test_set)?;
    log::info!(
        "test fold {test}: {} training, {} validation, {} test clips",
        train.len(),
        val_set.len(),
        test_set.len()
    );
    let trained = train_model(&train, &val_set, tc, fold_seed(tc.seed, test))?;
    let test_eval = evaluate(&trained.model, &test_set, &tc.framing, tc.rule)?;
    log::info!("test fold {test}: accuracy {:.4}", test_eval.accuracy);
    let result = FoldResult {
        test_fold: test,
        val_fold: val,
        best_epoch: trained.best_epoch,
        epochs_run: trained.history.len(),
        test: test_eval,
        history: trained.history,
    };
    Ok((result, trained.model))
}

/// Full 10-fold cross-validation on already-decoded clips.
pub fn run_cv_clips(clips: &[Clip], tc: &TrainConfig) -> Result<EvalReport> {
    tc.validate()?;
    for fold in 1..=N_FOLDS {
        if !clips.iter().any(|c| c.fold == fold) {
            return Err(Error::Empty(format!("fold {fold} has no clips")));
        }
    }
    let folds = cv_splits()
        .into_iter()
        .map(|(test, val, train)| run_split(clips, test, val, &train, tc).map(|(r, _)| r))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_folds(tc.model.id(), folds))
}

pub fn run_cv(manifest: &DatasetManifest, tc: &TrainConfig) -> Result<EvalReport> {
    tc.validate()?;
    if let Some(f) = manifest.fold_sizes().iter().position(|&n| n == 0) {
        return Err(Error::Empty(format!("fold {} has no clips", f + 1)));
    }
    run_cv_clips(&load_clips(manifest)?, tc)
}

/// One split of the protocol (`test_fold`, validated on the next fold),
/// returning the selected model alongside its report.
pub fn run_holdout(manifest: &DatasetManifest, tc: &TrainConfig, test_fold: u8) -> Result<(EvalReport, Model)> {
    tc.validate()?;
    let (test, val, train) = cv_splits()
        .into_iter()
        .find(|s| s.0 == test_fold)
        .ok_or_else(|| Error::InvalidArgument(format!("test fold must be in 1..={N_FOLDS}, got {test_fold}")))?;
    let clips = load_clips(manifest)?;
    let (fold, model) = run_split(&clips, test, val, &train, tc)?;
    Ok((EvalReport::from_folds(tc.model.id(), vec![fold]), model))
}
