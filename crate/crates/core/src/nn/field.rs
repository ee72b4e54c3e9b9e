use super::mlp::{BatchCache, Mlp};
use crate::sde::{FieldKind, VectorField, MAX_STATE_DIM};

/// A vector field `V(t, x) = scale * mlp(t / horizon, x)`.
#[derive(Clone, Debug)]
pub struct MlpField {
    pub net: Mlp,
    pub horizon: f64,
    pub scale: f64,
}

impl MlpField {
    /// # Panics
    /// If the network does not map `1 + N` inputs to `N` outputs.
    pub fn new(net: Mlp, horizon: f64, scale: f64) -> Self {
        assert_eq!(net.input_dim(), net.output_dim() + 1, "network must map (t, x) to x-space");
        MlpField { net, horizon, scale }
    }

    fn encode(&self, t: f64, x: &[f64], buf: &mut [f64]) {
        buf[0] = t / self.horizon;
        buf[1..=x.len()].copy_from_slice(x);
    }
}

impl VectorField for MlpField {
    fn dim(&self) -> usize {
        self.net.output_dim()
    }

    fn kind(&self) -> FieldKind {
        FieldKind::MlpBacked
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let mut input = [0.0; MAX_STATE_DIM + 1];
        let n = x.len();
        self.encode(t, x, &mut input);
        let mut cache = BatchCache::default();
        self.net.forward_batch(&input[..n + 1], 1, &mut cache, out);
        for o in out.iter_mut() {
            *o *= self.scale;
        }
    }

    /// One reverse pass per output coordinate.
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) {
        let n = x.len();
        let mut input = [0.0; MAX_STATE_DIM + 1];
        self.encode(t, x, &mut input);
        let mut cache = BatchCache::default();
        let mut out = [0.0; MAX_STATE_DIM];
        self.net.forward_batch(&input[..n + 1], 1, &mut cache, &mut out[..n]);
        let mut scratch = vec![0.0; self.net.param_count()];
        let mut ig = [0.0; MAX_STATE_DIM + 1];
        for k in 0..n {
            let mut up = [0.0; MAX_STATE_DIM];
            up[k] = self.scale;
            self.net.backward_batch(&cache, &up[..n], &mut scratch, Some(&mut ig[..n + 1]));
            jac[k * n..(k + 1) * n].copy_from_slice(&ig[1..=n]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ProjectionInit;
    use crate::schemes::{nv_step, Partition};
    use crate::sde::{ModelKind, ModelSpec, Payoff, FieldRef};
    use std::sync::Arc;

    fn field(seed: u64) -> MlpField {
        MlpField::new(Mlp::new(3, 2, seed, ProjectionInit::HeUniform).unwrap(), 1.0, 0.1)
    }

    #[test]
    fn jacobian_against_finite_differences() {
        let f = field(3);
        let x = [0.3, -0.4];
        let mut jac = [0.0; 4];
        f.jacobian(0.2, &x, &mut jac);
        let h = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let (mut fp, mut fm) = ([0.0; 2], [0.0; 2]);
            f.eval(0.2, &xp, &mut fp);
            f.eval(0.2, &xm, &mut fm);
            for r in 0..2 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                assert!((fd - jac[r * 2 + c]).abs() < 1e-7, "({r},{c}) {fd} {}", jac[r * 2 + c]);
            }
        }
    }

    #[test]
    fn drives_a_splitting_step() {
        let fields: Vec<FieldRef> = vec![Arc::new(field(1)), Arc::new(field(2)), Arc::new(field(3))];
        let m = ModelSpec::new(ModelKind::Custom, fields, vec![0.5, 0.5], Payoff::put(1.0)).unwrap();
        assert_eq!(m.drift().kind(), FieldKind::MlpBacked);
        let p = Partition::uniform(1.0, 1).unwrap();
        let zero = nv_step(&m, 0.0, &m.x0, p.delta(0), &[0.0, 0.0], 1.0, 4).unwrap();
        let full = crate::ode::flow_field(m.drift(), 0.0, &m.x0, 1.0, 8).unwrap();
        for k in 0..2 {
            assert!((zero[k] - full[k]).abs() < 1e-8);
        }
        let moved = nv_step(&m, 0.0, &m.x0, 1.0, &[1.0, -0.5], -1.0, 4).unwrap();
        assert!(moved.iter().all(|v| v.is_finite()));
        assert_ne!(moved, zero);
    }
}
