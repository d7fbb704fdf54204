//! Adadelta parameter updates.
//!
//! Per coordinate:
//!
//! ```text
//! Eg ← ρ·Eg + (1−ρ)·g²
//! Δ  ← −sqrt(Ex + ε) / sqrt(Eg + ε) · g
//! Ex ← ρ·Ex + (1−ρ)·Δ²
//! θ  ← θ + lr·Δ
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ParamRef;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdadeltaConfig {
    pub lr: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        Self {
            lr: 1.0,
            rho: 0.95,
            epsilon: 1e-6,
        }
    }
}

impl AdadeltaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!("rho {} outside (0, 1)", self.rho)));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidArgument(format!("epsilon {} must be positive", self.epsilon)));
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(Error::InvalidArgument(format!("learning rate {} must be finite and >= 0", self.lr)));
        }
        Ok(())
    }
}

/// Running averages for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub config: AdadeltaConfig,
    pub accum_grad_sq: Vec<f64>,
    pub accum_update_sq: Vec<f64>,
}

impl AdadeltaState {
    pub fn new(config: AdadeltaConfig, len: usize) -> Self {
        Self {
            config,
            accum_grad_sq: vec![0.0; len],
            accum_update_sq: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.accum_grad_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accum_grad_sq.is_empty()
    }
}

/// One Adadelta update of `params` in place. Gradients are checked for
/// finiteness before anything is modified.
pub fn adadelta_step(state: &mut AdadeltaState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.len() {
        return Err(Error::shape(
            "adadelta",
            format!("{} parameters", state.len()),
            format!("{} parameters, {} gradients", params.len(), grads.len()),
        ));
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index });
    }
    let AdadeltaConfig { lr, rho, epsilon } = state.config;
    for (((p, &g), eg), ex) in params
        .iter_mut()
        .zip(grads)
        .zip(state.accum_grad_sq.iter_mut())
        .zip(state.accum_update_sq.iter_mut())
    {
        *eg = rho * *eg + (1.0 - rho) * g * g;
        let delta = -((*ex + epsilon).sqrt() / (*eg + epsilon).sqrt()) * g;
        *ex = rho * *ex + (1.0 - rho) * delta * delta;
        *p += lr * delta;
    }
    Ok(())
}

/// Adadelta over every parameter block of a model. Non-trainable blocks are
/// skipped entirely, including their accumulators.
#[derive(Debug, Clone)]
pub struct Adadelta {
    config: AdadeltaConfig,
    states: Vec<AdadeltaState>,
}

impl Adadelta {
    pub fn new(config: AdadeltaConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            states: Vec::new(),
        })
    }

    pub fn config(&self) -> AdadeltaConfig {
        self.config
    }

    pub fn states(&self) -> &[AdadeltaState] {
        &self.states
    }

    /// Applies one step to the blocks in a fixed order; the order must not
    /// change between calls.
    pub fn step(&mut self, params: Vec<ParamRef<'_>>) -> Result<()> {
        if self.states.is_empty() {
            self.states = params
                .iter()
                .map(|p| AdadeltaState::new(self.config, p.value.len()))
                .collect();
        }
        if self.states.len() != params.len() {
            return Err(Error::shape(
                "adadelta",
                format!("{} parameter blocks", self.states.len()),
                format!("{} parameter blocks", params.len()),
            ));
        }
        let mut offset = 0;
        for (state, p) in self.states.iter_mut().zip(params) {
            let len = p.value.len();
            if p.trainable {
                adadelta_step(state, p.value, p.grad).map_err(|e| match e {
                    Error::NonFiniteGradient { index } => Error::NonFiniteGradient { index: offset + index },
                    other => other,
                })?;
            }
            offset += len;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_gradient_decays_accumulators() {
        let mut s = AdadeltaState::new(AdadeltaConfig::default(), 2);
        s.accum_grad_sq = vec![1.0, 2.0];
        s.accum_update_sq = vec![0.5, 0.25];
        let mut p = vec![3.0, -4.0];
        adadelta_step(&mut s, &mut p, &[0.0, 0.0]).unwrap();
        assert_eq!(p, vec![3.0, -4.0]);
        assert!((s.accum_grad_sq[0] - 0.95).abs() < 1e-15);
        assert!((s.accum_grad_sq[1] - 1.9).abs() < 1e-15);
        assert!((s.accum_update_sq[0] - 0.475).abs() < 1e-15);
    }

    #[test]
    fn first_step_hand_value() {
        let mut s = AdadeltaState::new(AdadeltaConfig::default(), 1);
        let mut w = [1.0];
        adadelta_step(&mut s, &mut w, &[1.0]).unwrap();
        // Eg = 0.05, Ex = 0 → Δ = −sqrt(1e-6) / sqrt(0.05 + 1e-6)
        let delta = -(1e-6f64).sqrt() / (0.05f64 + 1e-6).sqrt();
        assert!((delta + 4.472_09e-3).abs() < 1e-8);
        assert!((w[0] - (1.0 + delta)).abs() < 1e-15);
        assert!((w[0] - 0.99553).abs() < 1e-5);
    }

    #[test]
    fn non_finite_gradient_names_index() {
        let mut s = AdadeltaState::new(AdadeltaConfig::default(), 3);
        let mut p = [0.0; 3];
        let err = adadelta_step(&mut s, &mut p, &[0.0, f64::NAN, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { index: 1 }));
        assert_eq!(s.accum_grad_sq, vec![0.0; 3]);
    }

    #[test]
    fn config_validation() {
        assert!(Adadelta::new(AdadeltaConfig { rho: 1.0, ..Default::default() }).is_err());
        assert!(Adadelta::new(AdadeltaConfig { epsilon: 0.0, ..Default::default() }).is_err());
        assert!(Adadelta::new(AdadeltaConfig { lr: f64::NAN, ..Default::default() }).is_err());
    }

    #[test]
    fn frozen_blocks_are_untouched() {
        let mut opt = Adadelta::new(AdadeltaConfig::default()).unwrap();
        let mut frozen = vec![1.0, 2.0];
        let mut live = vec![1.0];
        let grads_f = vec![5.0, 5.0];
        let grads_l = vec![5.0];
        opt.step(vec![
            ParamRef { value: &mut frozen, grad: &grads_f, trainable: false },
            ParamRef { value: &mut live, grad: &grads_l, trainable: true },
        ])
        .unwrap();
        assert_eq!(frozen, vec![1.0, 2.0]);
        assert!(live[0] < 1.0);
        assert_eq!(opt.states()[0].accum_grad_sq, vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn update_opposes_gradient(grads in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 4), 1..30)) {
            let mut s = AdadeltaState::new(AdadeltaConfig::default(), 4);
            let mut p = vec![0.0; 4];
            for g in &grads {
                let before = p.clone();
                adadelta_step(&mut s, &mut p, g).unwrap();
                for i in 0..4 {
                    prop_assert!((p[i] - before[i]) * g[i] <= 0.0);
                }
                prop_assert!(s.accum_grad_sq.iter().chain(&s.accum_update_sq).all(|&a| a >= 0.0));
            }
        }

        #[test]
        fn zero_learning_rate_freezes(grads in prop::collection::vec(-10.0f64..10.0, 1..20)) {
            let cfg = AdadeltaConfig { lr: 0.0, ..Default::default() };
            let mut s = AdadeltaState::new(cfg, 1);
            let mut p = [2.0];
            for g in grads {
                adadelta_step(&mut s, &mut p, &[g]).unwrap();
            }
            prop_assert_eq!(p[0], 2.0);
        }
    }
}
