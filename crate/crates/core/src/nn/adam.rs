//! Adam with bias-corrected first and second moments.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(n: usize, config: AdamConfig) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            config,
        }
    }

    /// One update `theta <- theta - alpha m_hat / (sqrt(v_hat) + eps)`.
    ///
    /// # Panics
    /// If `params`, `grad` and the moment buffers differ in length.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter/state length mismatch");
        assert_eq!(grad.len(), self.m.len(), "gradient/state length mismatch");
        let c = self.config;
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * g;
            self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= c.alpha * m_hat / (v_hat.sqrt() + c.epsilon);
        }
    }
}

pub fn adam_update(state: &mut AdamState, params: &mut [f64], grad: &[f64]) {
    state.step(params, grad);
}
