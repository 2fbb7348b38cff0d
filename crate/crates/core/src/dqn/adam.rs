use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

/// Moment estimates for a list of parameter groups.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub hyper: AdamHyper,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(group_sizes: &[usize], hyper: AdamHyper) -> Self {
        AdamState {
            hyper,
            first: group_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second: group_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam step. Each group has its own learning rate.
    pub fn update(&mut self, params: &mut [&mut [f64]], grads: &[Vec<f64>], learning_rates: &[f64]) {
        assert_eq!(params.len(), self.first.len(), "group count mismatch");
        assert_eq!(grads.len(), self.first.len(), "group count mismatch");
        assert_eq!(learning_rates.len(), self.first.len(), "group count mismatch");
        self.step += 1;
        let AdamHyper {
            beta1,
            beta2,
            epsilon,
        } = self.hyper;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for (g_idx, group) in params.iter_mut().enumerate() {
            let (m, v) = (&mut self.first[g_idx], &mut self.second[g_idx]);
            let grad = &grads[g_idx];
            assert_eq!(group.len(), m.len(), "parameter group {g_idx} changed size");
            assert_eq!(grad.len(), m.len(), "gradient group {g_idx} has wrong size");
            let lr = learning_rates[g_idx];
            for i in 0..group.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                group[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
    }
}
