//! AdamW with decoupled weight decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::params::ParamStore;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// One AdamW update over every parameter in the store.
///
/// Decoupled decay: `p -= lr * wd * p` is applied separately from the
/// moment-based update, so a zero gradient with positive decay still shrinks
/// the parameter by exactly `(1 - lr * wd)`. Gradients are cleared and the
/// step counter advances on success.
pub fn adamw_step(store: &mut ParamStore, lr: f64, config: &AdamConfig) -> Result<()> {
    let t = store.step() + 1;
    let bias1 = 1.0 - config.beta1.powi(t as i32);
    let bias2 = 1.0 - config.beta2.powi(t as i32);
    let names: Vec<String> = store.names().map(String::from).collect();
    for name in &names {
        let (value, grad, m, v) = store.adam_state_mut(name)?;
        if !grad.is_finite() {
            return Err(Error::Training(format!(
                "non-finite gradient for parameter {name}"
            )));
        }
        let g = grad.clone();
        for i in 0..value.len() {
            let gi = g.data()[i];
            let mi = config.beta1 * m.data()[i] + (1.0 - config.beta1) * gi;
            let vi = config.beta2 * v.data()[i] + (1.0 - config.beta2) * gi * gi;
            m.data_mut()[i] = mi;
            v.data_mut()[i] = vi;
            let m_hat = mi / bias1;
            let v_hat = vi / bias2;
            let p = value.data()[i];
            value.data_mut()[i] =
                p - lr * m_hat / (v_hat.sqrt() + config.epsilon) - lr * config.weight_decay * p;
        }
    }
    store.clear_grads_and_advance();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor2;

    #[test]
    fn zero_gradient_zero_decay_leaves_parameters_unchanged() {
        let mut store = ParamStore::new();
        store
            .define("w", Tensor2::row_vector(&[1.0, -2.0, 3.0]))
            .unwrap();
        adamw_step(&mut store, 0.1, &AdamConfig::default()).unwrap();
        assert_eq!(store.value("w").unwrap().data(), &[1.0, -2.0, 3.0]);
        assert_eq!(store.step(), 1);
    }

    #[test]
    fn first_step_matches_hand_computed_update() {
        // One step with gradient g: m = (1-b1) g, v = (1-b2) g^2, bias
        // corrections divide those by the same factors, so the update is
        // exactly -lr * g / (|g| + eps).
        let g = 0.5;
        let lr = 0.01;
        let cfg = AdamConfig::default();
        let m_hat = (1.0 - cfg.beta1) * g / (1.0 - cfg.beta1);
        let v_hat = (1.0 - cfg.beta2) * g * g / (1.0 - cfg.beta2);
        let expected = 2.0 - lr * m_hat / (v_hat.sqrt() + cfg.epsilon);

        let mut store = ParamStore::new();
        store.define("w", Tensor2::row_vector(&[2.0])).unwrap();
        store
            .accumulate_grad("w", &Tensor2::row_vector(&[g]))
            .unwrap();
        adamw_step(&mut store, lr, &cfg).unwrap();
        let got = store.value("w").unwrap().get(0, 0);
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        // Gradients cleared.
        assert_eq!(store.grad("w").unwrap().data(), &[0.0]);
    }

    #[test]
    fn decoupled_decay_shrinks_without_gradient() {
        let mut store = ParamStore::new();
        store.define("w", Tensor2::row_vector(&[4.0])).unwrap();
        let cfg = AdamConfig {
            weight_decay: 0.1,
            ..AdamConfig::default()
        };
        adamw_step(&mut store, 0.5, &cfg).unwrap();
        let got = store.value("w").unwrap().get(0, 0);
        assert!((got - 4.0 * (1.0 - 0.5 * 0.1)).abs() < 1e-15);
    }

    #[test]
    fn nan_gradient_is_rejected_with_the_parameter_name() {
        let mut store = ParamStore::new();
        store.define("dec.w", Tensor2::row_vector(&[1.0])).unwrap();
        store.inject_test_grad("dec.w", f64::NAN);
        let err = adamw_step(&mut store, 0.1, &AdamConfig::default()).unwrap_err();
        assert!(err.to_string().contains("dec.w"), "{err}");
    }
}
