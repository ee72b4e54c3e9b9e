//! Fully connected ReLU network with batched forward and reverse passes.
//!
//! The default architecture is `input -> 32 -> 32 -> 32 -> output`: three
//! affine layers followed by ReLU and a bias-free linear projection.
//! Parameters live in one flat vector; for each layer the weights come first,
//! stored input-major (`w[i * output + o]`), followed by the bias.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};

pub const HIDDEN_WIDTH: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layer {
    pub input: usize,
    pub output: usize,
    pub bias: bool,
    pub relu: bool,
    offset: usize,
}

impl Layer {
    pub fn param_count(&self) -> usize {
        self.input * self.output + if self.bias { self.output } else { 0 }
    }

    fn weights<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.offset..self.offset + self.input * self.output]
    }

    fn bias_slice<'a>(&self, params: &'a [f64]) -> Option<&'a [f64]> {
        self.bias.then(|| {
            let o = self.offset + self.input * self.output;
            &params[o..o + self.output]
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionInit {
    /// The projection starts at zero, so the network initially outputs zero.
    Zero,
    HeUniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    params: Vec<f64>,
    seed: u64,
}

fn build_layers(spec: &[(usize, usize, bool, bool)]) -> Vec<Layer> {
    let mut offset = 0;
    spec.iter()
        .map(|&(input, output, bias, relu)| {
            let l = Layer {
                input,
                output,
                bias,
                relu,
                offset,
            };
            offset += l.param_count();
            l
        })
        .collect()
}

impl Mlp {
    /// The standard three-ReLU-layer network with He-uniform weights and zero biases.
    pub fn new(input_dim: usize, output_dim: usize, seed: u64, projection: ProjectionInit) -> Result<Self> {
        Self::with_width(input_dim, HIDDEN_WIDTH, output_dim, seed, projection)
    }

    pub fn with_width(
        input_dim: usize,
        width: usize,
        output_dim: usize,
        seed: u64,
        projection: ProjectionInit,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || width == 0 {
            return Err(Error::invalid("mlp", "all layer sizes must be positive"));
        }
        let layers = build_layers(&[
            (input_dim, width, true, true),
            (width, width, true, true),
            (width, width, true, true),
            (width, output_dim, false, false),
        ]);
        let total = layers.iter().map(Layer::param_count).sum();
        let mut params = vec![0.0; total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = layers.len() - 1;
        for (li, l) in layers.iter().enumerate() {
            if li == last && projection == ProjectionInit::Zero {
                continue;
            }
            let limit = (6.0 / l.input as f64).sqrt();
            for w in &mut params[l.offset..l.offset + l.input * l.output] {
                *w = rng.gen_range(-limit..limit);
            }
        }
        Ok(Mlp { layers, params, seed })
    }

    /// Rebuilds a network from explicit layers (used by checkpoint loading).
    pub fn from_parts(spec: &[(usize, usize, bool, bool)], params: Vec<f64>, seed: u64) -> Result<Self> {
        if spec.is_empty() {
            return Err(Error::Shape("network without layers".into()));
        }
        if spec.windows(2).any(|w| w[0].1 != w[1].0) {
            return Err(Error::Shape("layer sizes do not chain".into()));
        }
        let layers = build_layers(spec);
        let total: usize = layers.iter().map(Layer::param_count).sum();
        if total != params.len() {
            return Err(Error::Shape(format!(
                "layers need {total} parameters, got {}",
                params.len()
            )));
        }
        Ok(Mlp { layers, params, seed })
    }

    /// A network whose output is `value` in every coordinate for every input.
    pub fn constant(input_dim: usize, output_dim: usize, value: f64) -> Result<Self> {
        let mut net = Self::with_width(input_dim, 1, output_dim, 0, ProjectionInit::Zero)?;
        net.params.fill(0.0);
        let layers = net.layers.clone();
        for l in &layers[..3] {
            let b = l.offset + l.input * l.output;
            net.params[b] = 1.0;
        }
        let p = layers[3];
        for w in &mut net.params[p.offset..p.offset + p.output] {
            *w = value;
        }
        Ok(net)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn max_width(&self) -> usize {
        self.layers.iter().map(|l| l.output.max(l.input)).max().unwrap()
    }

    /// Single-input forward pass; fails on a wrong input length or a non-finite value.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        let mut cache = BatchCache::default();
        let mut out = vec![0.0; self.output_dim()];
        self.forward_batch(input, 1, &mut cache, &mut out);
        for (li, act) in cache.acts.iter().enumerate() {
            if act[..self.layers[li].output].iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric(format!("mlp layer {}", li + 1)));
            }
        }
        Ok(out)
    }

    /// Forward pass over `rows` inputs stored row-major in `inputs`.
    ///
    /// `cache` keeps the activations needed by [`Mlp::backward_batch`].
    pub fn forward_batch(&self, inputs: &[f64], rows: usize, cache: &mut BatchCache, out: &mut [f64]) {
        let nl = self.layers.len();
        cache.rows = rows;
        cache.inputs.clear();
        cache.inputs.extend_from_slice(&inputs[..rows * self.input_dim()]);
        cache.acts.resize_with(nl, Vec::new);
        for li in 0..nl {
            let l = self.layers[li];
            let mut act = std::mem::take(&mut cache.acts[li]);
            act.clear();
            act.resize(rows * l.output, 0.0);
            {
                let prev: &[f64] = if li == 0 { &cache.inputs } else { &cache.acts[li - 1] };
                let w = l.weights(&self.params);
                let b = l.bias_slice(&self.params);
                for r in 0..rows {
                    let x = &prev[r * l.input..(r + 1) * l.input];
                    let y = &mut act[r * l.output..(r + 1) * l.output];
                    match b {
                        Some(b) => y.copy_from_slice(b),
                        None => y.fill(0.0),
                    }
                    for (i, &xi) in x.iter().enumerate() {
                        if xi != 0.0 {
                            let wi = &w[i * l.output..(i + 1) * l.output];
                            for (yo, &wo) in y.iter_mut().zip(wi) {
                                *yo += xi * wo;
                            }
                        }
                    }
                    if l.relu {
                        for v in y.iter_mut() {
                            // keep NaN visible to the caller
                            if *v < 0.0 {
                                *v = 0.0;
                            }
                        }
                    }
                }
            }
            cache.acts[li] = act;
        }
        out[..rows * self.output_dim()].copy_from_slice(&cache.acts[nl - 1]);
    }

    /// Reverse pass for the batch held in `cache`.
    ///
    /// `upstream` is `dL/d output` (`rows x output_dim`). Parameter gradients are
    /// added into `grad`; `input_grad` (if given) receives `dL/d input`.
    pub fn backward_batch(
        &self,
        cache: &BatchCache,
        upstream: &[f64],
        grad: &mut [f64],
        mut input_grad: Option<&mut [f64]>,
    ) {
        let rows = cache.rows;
        let nl = self.layers.len();
        let width = self.max_width();
        let mut delta = vec![0.0; rows * width];
        let mut next = vec![0.0; rows * width];
        let out_dim = self.output_dim();
        delta[..rows * out_dim].copy_from_slice(&upstream[..rows * out_dim]);
        for li in (0..nl).rev() {
            let l = self.layers[li];
            let act = &cache.acts[li];
            if l.relu {
                for (d, &a) in delta[..rows * l.output].iter_mut().zip(act.iter()) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let prev: &[f64] = if li == 0 { &cache.inputs } else { &cache.acts[li - 1] };
            let (gw, gb) = grad[l.offset..l.offset + l.param_count()].split_at_mut(l.input * l.output);
            let w = l.weights(&self.params);
            let need_input = li > 0 || input_grad.is_some();
            for r in 0..rows {
                let d = &delta[r * l.output..(r + 1) * l.output];
                if d.iter().all(|&v| v == 0.0) {
                    if need_input {
                        next[r * l.input..(r + 1) * l.input].fill(0.0);
                    }
                    continue;
                }
                let x = &prev[r * l.input..(r + 1) * l.input];
                for (i, &xi) in x.iter().enumerate() {
                    if xi != 0.0 {
                        for (g, &dv) in gw[i * l.output..(i + 1) * l.output].iter_mut().zip(d) {
                            *g += xi * dv;
                        }
                    }
                }
                if l.bias {
                    for (g, &dv) in gb.iter_mut().zip(d) {
                        *g += dv;
                    }
                }
                if need_input {
                    let o = &mut next[r * l.input..(r + 1) * l.input];
                    for (i, oi) in o.iter_mut().enumerate() {
                        *oi = dot(&w[i * l.output..(i + 1) * l.output], d);
                    }
                }
            }
            std::mem::swap(&mut delta, &mut next);
        }
        if let Some(ig) = input_grad.as_deref_mut() {
            let n = rows * self.input_dim();
            ig[..n].copy_from_slice(&delta[..n]);
        }
    }

    /// Forward pass recorded on a tape, with parameters and inputs as variables.
    pub fn forward_on_tape<'t>(&self, params: &[Var<'t>], input: &[Var<'t>]) -> Vec<Var<'t>> {
        let mut cur: Vec<Var<'t>> = input.to_vec();
        for l in &self.layers {
            let tape: &'t Tape = params[0].tape();
            let mut out = Vec::with_capacity(l.output);
            for o in 0..l.output {
                let mut acc = if l.bias {
                    params[l.offset + l.input * l.output + o]
                } else {
                    tape.var(0.0)
                };
                for (i, &x) in cur.iter().enumerate() {
                    acc = acc + x * params[l.offset + i * l.output + o];
                }
                out.push(if l.relu { acc.relu() } else { acc });
            }
            cur = out;
        }
        cur
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Activations retained between a batched forward and reverse pass.
#[derive(Clone, Debug, Default)]
pub struct BatchCache {
    rows: usize,
    inputs: Vec<f64>,
    acts: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::grad;

    fn random_input(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    #[test]
    fn layer_dimensions_chain() {
        let net = Mlp::new(3, 2, 1, ProjectionInit::HeUniform).unwrap();
        let dims: Vec<(usize, usize)> = net.layers().iter().map(|l| (l.input, l.output)).collect();
        assert_eq!(dims, vec![(3, 32), (32, 32), (32, 32), (32, 2)]);
        assert_eq!(net.param_count(), 3 * 32 + 32 + 2 * (32 * 32 + 32) + 32 * 2);
        assert!(net.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let mut net = Mlp::new(2, 3, 0, ProjectionInit::HeUniform).unwrap();
        net.params_mut().fill(0.0);
        assert_eq!(net.forward(&[5.0, -1.0]).unwrap(), vec![0.0; 3]);
        let zero = Mlp::new(2, 1, 4, ProjectionInit::Zero).unwrap();
        assert_eq!(zero.forward(&[0.3, 0.9]).unwrap(), vec![0.0]);
    }

    #[test]
    fn scalar_relu_unit() {
        let net = Mlp::from_parts(&[(1, 1, true, true)], vec![1.0, 0.0], 0).unwrap();
        assert_eq!(net.forward(&[-3.0]).unwrap(), vec![0.0]);
        assert_eq!(net.forward(&[2.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn constant_network() {
        let net = Mlp::constant(4, 2, 0.7).unwrap();
        for x in [[0.0; 4], [1.0, -5.0, 2.0, 9.0]] {
            assert_eq!(net.forward(&x).unwrap(), vec![0.7, 0.7]);
        }
    }

    #[test]
    fn positive_homogeneity_without_biases() {
        let net = Mlp::new(3, 2, 9, ProjectionInit::HeUniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = random_input(&mut rng, 3);
            let c = rng.gen_range(0.1..10.0);
            let a = net.forward(&x).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| c * v).collect();
            let b = net.forward(&xs).unwrap();
            for k in 0..2 {
                assert!((b[k] - c * a[k]).abs() <= 1e-12 * (1.0 + b[k].abs()));
            }
        }
    }

    #[test]
    fn non_finite_input_names_layer() {
        let net = Mlp::new(1, 1, 0, ProjectionInit::HeUniform).unwrap();
        let err = net.forward(&[f64::NAN]).unwrap_err();
        assert!(err.to_string().contains("layer 1"), "{err}");
    }

    #[test]
    fn batched_forward_matches_single() {
        let net = Mlp::new(3, 2, 5, ProjectionInit::HeUniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = 7;
        let inputs = random_input(&mut rng, rows * 3);
        let mut cache = BatchCache::default();
        let mut out = vec![0.0; rows * 2];
        net.forward_batch(&inputs, rows, &mut cache, &mut out);
        for r in 0..rows {
            let single = net.forward(&inputs[r * 3..r * 3 + 3]).unwrap();
            assert_eq!(&out[r * 2..r * 2 + 2], &single[..]);
        }
    }

    #[test]
    fn backward_matches_tape() {
        let mut net = Mlp::new(3, 2, 7, ProjectionInit::HeUniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in net.params_mut().iter_mut() {
            *p += rng.gen_range(-0.1..0.1);
        }
        let rows = 5;
        let inputs = random_input(&mut rng, rows * 3);
        let up = random_input(&mut rng, rows * 2);

        let mut cache = BatchCache::default();
        let mut out = vec![0.0; rows * 2];
        net.forward_batch(&inputs, rows, &mut cache, &mut out);
        let mut g = vec![0.0; net.param_count()];
        let mut ig = vec![0.0; rows * 3];
        net.backward_batch(&cache, &up, &mut g, Some(&mut ig));

        // the same contraction, differentiated on the tape with respect to parameters and inputs
        let mut all = net.params().to_vec();
        all.extend_from_slice(&inputs);
        let np = net.param_count();
        let (_, tg) = grad(&all, |tape, v| {
            let (p, x) = v.split_at(np);
            let mut acc = tape.var(0.0);
            for r in 0..rows {
                let y = net.forward_on_tape(p, &x[r * 3..r * 3 + 3]);
                for k in 0..2 {
                    acc = acc + y[k] * up[r * 2 + k];
                }
            }
            acc
        })
        .unwrap();
        for (a, b) in g.iter().zip(&tg[..np]) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
        for (a, b) in ig.iter().zip(&tg[np..]) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn backward_against_finite_differences() {
        let net = Mlp::new(2, 1, 11, ProjectionInit::HeUniform).unwrap();
        let x = [0.4, -0.7];
        let mut cache = BatchCache::default();
        let mut out = [0.0];
        net.forward_batch(&x, 1, &mut cache, &mut out);
        let mut g = vec![0.0; net.param_count()];
        net.backward_batch(&cache, &[1.0], &mut g, None);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-5;
        for _ in 0..20 {
            let i = rng.gen_range(0..net.param_count());
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let fd = (plus.forward(&x).unwrap()[0] - minus.forward(&x).unwrap()[0]) / (2.0 * h);
            let rel = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-8);
            assert!(rel < 1e-4 || (fd - g[i]).abs() < 1e-9, "param {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn initialisation_is_seeded() {
        let a = Mlp::new(3, 1, 42, ProjectionInit::HeUniform).unwrap();
        let b = Mlp::new(3, 1, 42, ProjectionInit::HeUniform).unwrap();
        let c = Mlp::new(3, 1, 43, ProjectionInit::HeUniform).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params(), c.params());
        let limit = (6.0f64 / 3.0).sqrt();
        assert!(a.params()[..96].iter().all(|w| w.abs() <= limit));
    }
}
