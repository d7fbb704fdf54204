use crate::error::{Error, Result};

/// Mean squared logarithmic error, `(1/K) Σ [ln(p + 1) − ln(t + 1)]²`, and its
/// gradient with respect to `pred`.
pub fn msle_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::shape(
            "msle",
            format!("{} predictions", target.len()),
            format!("{} predictions", pred.len()),
        ));
    }
    if let Some(i) = pred.iter().position(|&p| p.is_nan() || p < 0.0) {
        return Err(Error::Domain(format!("prediction {} at index {i} is negative", pred[i])));
    }
    if let Some(i) = target.iter().position(|&t| t.is_nan() || t < 0.0) {
        return Err(Error::Domain(format!("target {} at index {i} is negative", target[i])));
    }
    let k = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let d = (p + 1.0).ln() - (t + 1.0).ln();
            loss += d * d;
            2.0 * d / (k * (p + 1.0))
        })
        .collect();
    Ok((loss / k, grad))
}
