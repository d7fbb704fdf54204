//! Clip-level classification: frame a clip, score every frame, aggregate.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{frame_signal, FramingPolicy, Waveform};
use crate::error::{Error, Result};
use crate::gammatone::argmax;
use crate::model::Model;
use crate::nn::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregationRule {
    /// Count per-frame argmax votes.
    MajorityVote,
    /// Average the per-frame posteriors.
    SumRule,
}

impl FromStr for AggregationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vote" | "majority" => Ok(AggregationRule::MajorityVote),
            "sum" => Ok(AggregationRule::SumRule),
            other => Err(Error::InvalidArgument(format!("unknown rule {other:?} (valid: vote, sum)"))),
        }
    }
}

impl fmt::Display for AggregationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationRule::MajorityVote => "vote",
            AggregationRule::SumRule => "sum",
        })
    }
}

/// Per-frame class posteriors for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub clip_id: String,
    pub per_frame: Vec<Vec<f64>>,
}

impl PredictionSet {
    pub fn new(clip_id: impl Into<String>, per_frame: Vec<Vec<f64>>) -> Result<Self> {
        let first = per_frame
            .first()
            .ok_or_else(|| Error::Empty("prediction set has no frames".into()))?;
        let k = first.len();
        if k == 0 || per_frame.iter().any(|v| v.len() != k) {
            return Err(Error::shape("prediction set", format!("{k} classes per frame"), "ragged frames"));
        }
        Ok(Self {
            clip_id: clip_id.into(),
            per_frame,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.per_frame.len()
    }

    pub fn n_classes(&self) -> usize {
        self.per_frame[0].len()
    }
}

/// Clip score vector `y` under `rule`.
pub fn aggregate(preds: &PredictionSet, rule: AggregationRule) -> Vec<f64> {
    let k = preds.n_classes();
    let mut y = vec![0.0; k];
    match rule {
        AggregationRule::SumRule => {
            for v in &preds.per_frame {
                y.iter_mut().zip(v).for_each(|(a, b)| *a += b);
            }
            let s = preds.n_frames() as f64;
            y.iter_mut().for_each(|a| *a /= s);
        }
        AggregationRule::MajorityVote => {
            for v in &preds.per_frame {
                y[argmax(v)] += 1.0;
            }
        }
    }
    y
}

/// Class with the highest score; lowest index on ties.
pub fn decide(scores: &[f64]) -> usize {
    argmax(scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipDecision {
    pub class_index: usize,
    pub scores: Vec<f64>,
    pub predictions: PredictionSet,
}

/// Posteriors for every frame of a clip, computed in parallel against a shared model.
pub fn predict_frames(model: &Model, clip_id: &str, w: &Waveform, policy: &FramingPolicy) -> Result<PredictionSet> {
    let frames = frame_signal(w, policy)?;
    if frames.is_empty() {
        return Err(Error::Empty(format!("clip {clip_id} produced no frames")));
    }
    let per_frame = frames
        .par_iter()
        .map(|f| model.predict(&f.values))
        .collect::<Result<Vec<_>>>()?;
    PredictionSet::new(clip_id, per_frame)
}

pub fn classify_clip(
    model: &Model,
    w: &Waveform,
    policy: &FramingPolicy,
    rule: AggregationRule,
) -> Result<ClipDecision> {
    classify_clip_with_id(model, "clip", w, policy, rule)
}

pub fn classify_clip_with_id(
    model: &Model,
    clip_id: &str,
    w: &Waveform,
    policy: &FramingPolicy,
    rule: AggregationRule,
) -> Result<ClipDecision> {
    if model.mode() != Mode::Eval {
        return Err(Error::InvalidArgument("clip classification requires an eval-mode model".into()));
    }
    let predictions = predict_frames(model, clip_id, w, policy)?;
    let scores = aggregate(&predictions, rule);
    Ok(ClipDecision {
        class_index: decide(&scores),
        scores,
        predictions,
    })
}
