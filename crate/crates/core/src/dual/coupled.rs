//! Joint simulation of the asset `X` and the provisional martingale `M'`.
//!
//! Both are driven by the same draws: for each step the `X` coordinates follow
//! the asset model's fields and `M'` follows the network fields
//! `V^M_j(t, X, M)`, integrated as one coupled system. The reverse pass only
//! carries the adjoint of `M`, since `X` does not depend on the parameters.
//! Steps are recomputed during the reverse pass from the stored states.

use rayon::prelude::*;

use super::net::MartingaleNet;
use crate::error::{Error, Result};
use crate::nn::BatchCache;
use crate::ode::RK5;
use crate::qmc::DrawBlock;
use crate::schemes::{em_step, step_plan, NnCoefficients, Partition, Scheme, SimOptions, StepDraws};
use crate::sde::{ItoDrift, ModelSpec, MAX_STATE_DIM};

/// Paths processed together by one worker.
pub const CHUNK: usize = 32;

/// States of the coupled system, path-major: `x[(p * (steps + 1) + k) * N + i]`, `m[p * (steps + 1) + k]`.
#[derive(Clone, Debug)]
pub struct CoupledPaths {
    pub batch: usize,
    pub steps: usize,
    pub dim: usize,
    pub x: Vec<f64>,
    pub m: Vec<f64>,
}

impl CoupledPaths {
    pub fn x_at(&self, p: usize, k: usize) -> &[f64] {
        let o = (p * (self.steps + 1) + k) * self.dim;
        &self.x[o..o + self.dim]
    }

    pub fn m_at(&self, p: usize, k: usize) -> f64 {
        self.m[p * (self.steps + 1) + k]
    }

    pub fn m_path(&self, p: usize) -> &[f64] {
        &self.m[p * (self.steps + 1)..(p + 1) * (self.steps + 1)]
    }
}

pub(crate) struct StepInput<'b> {
    pub t_start: f64,
    pub t_end: f64,
    pub draws: Vec<StepDraws<'b>>,
}

pub(crate) struct SubstepRecord {
    h: f64,
    w: Vec<f64>,
    active: Vec<bool>,
    caches: Vec<BatchCache>,
}

pub(crate) enum StepRecord {
    Empty,
    Euler { coef: Vec<f64>, caches: Vec<BatchCache> },
    Flows(Vec<SubstepRecord>),
}

#[derive(Default)]
pub(crate) struct Scratch {
    inputs: Vec<f64>,
    outs: Vec<f64>,
    caches: Vec<BatchCache>,
    up: Vec<f64>,
    ig: Vec<f64>,
}

/// The coupled `(X, M)` dynamics for one network, model and scheme.
pub struct Coupled<'a> {
    pub net: &'a MartingaleNet,
    pub model: &'a ModelSpec,
    ito: ItoDrift,
    nn: NnCoefficients,
    substeps: usize,
    scheme: Scheme,
}

impl<'a> Coupled<'a> {
    pub fn new(net: &'a MartingaleNet, model: &'a ModelSpec, opts: &SimOptions) -> Result<Self> {
        if net.state_dim() != model.state_dim() || net.noise_dim() != model.noise_dim() {
            return Err(Error::Shape(format!(
                "network is built for N={}, d={} but the model has N={}, d={}",
                net.state_dim(),
                net.noise_dim(),
                model.state_dim(),
                model.noise_dim()
            )));
        }
        if opts.substeps == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        Ok(Coupled {
            net,
            model,
            ito: model.ito_drift(),
            nn: opts.nn.coefficients()?,
            substeps: opts.substeps,
            scheme: net.kind.scheme(),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn check_draws(&self, partition: &Partition, draws: &DrawBlock) -> Result<()> {
        if draws.scheme != self.scheme {
            return Err(Error::Shape(format!(
                "{} needs {} draws, got {}",
                self.net.kind, self.scheme, draws.scheme
            )));
        }
        if draws.steps != partition.steps() || draws.d != self.model.noise_dim() {
            return Err(Error::Shape(format!(
                "draws have {} steps x {} noises, expected {} x {}",
                draws.steps,
                draws.d,
                partition.steps(),
                self.model.noise_dim()
            )));
        }
        Ok(())
    }

    fn encode_rows(&self, t: f64, x: &[f64], m: &[f64], inputs: &mut Vec<f64>) {
        let n = self.model.state_dim();
        let w = self.net.input_dim();
        inputs.resize(m.len() * w, 0.0);
        for (r, &mr) in m.iter().enumerate() {
            self.net.encode(t, &x[r * n..(r + 1) * n], mr, &mut inputs[r * w..(r + 1) * w]);
        }
    }

    /// Advances `rows = m.len()` states over one step, optionally recording what the reverse pass needs.
    pub(crate) fn step(
        &self,
        si: &StepInput<'_>,
        x: &mut [f64],
        m: &mut [f64],
        record: Option<&mut StepRecord>,
        scratch: &mut Scratch,
    ) -> Result<()> {
        let rows = m.len();
        let n = self.model.state_dim();
        let d = self.model.noise_dim();
        let s = self.net.field_scale;
        let dt = si.t_end - si.t_start;
        if rows == 0 {
            return Ok(());
        }
        match self.scheme {
            Scheme::Em => {
                let sq = dt.sqrt();
                let coef: Vec<f64> = si
                    .draws
                    .iter()
                    .flat_map(|dr| dr.eta.iter().map(move |e| sq * e))
                    .collect();
                self.encode_rows(si.t_start, x, m, &mut scratch.inputs);
                let mut caches = match &record {
                    Some(_) => vec![BatchCache::default(); d],
                    None => std::mem::take(&mut scratch.caches),
                };
                caches.resize_with(d, BatchCache::default);
                scratch.outs.resize(rows, 0.0);
                let mut dm = vec![0.0; rows];
                for j in 0..d {
                    self.net.mlps[j].forward_batch(&scratch.inputs, rows, &mut caches[j], &mut scratch.outs);
                    for r in 0..rows {
                        dm[r] += coef[r * d + j] * s * scratch.outs[r];
                    }
                }
                for r in 0..rows {
                    m[r] += dm[r];
                    let xr = &mut x[r * n..(r + 1) * n];
                    let y = em_step(self.model, &self.ito, si.t_start, xr, dt, si.draws[r].eta)?;
                    xr.copy_from_slice(&y);
                }
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::numeric("martingale Euler step"));
                }
                match record {
                    Some(rec) => *rec = StepRecord::Euler { coef, caches },
                    None => scratch.caches = caches,
                }
                Ok(())
            }
            _ => {
                let plans = si
                    .draws
                    .iter()
                    .map(|dr| step_plan(self.scheme, dt, *dr, &self.nn))
                    .collect::<Result<Vec<_>>>()?;
                let nseg = plans[0].len();
                let mut subs = record.as_ref().map(|_| Vec::new());
                let h = 1.0 / self.substeps as f64;
                for sidx in 0..nseg {
                    let drift = plans[0][sidx].drift;
                    let mut w = vec![0.0; rows * d];
                    for (r, plan) in plans.iter().enumerate() {
                        w[r * d..(r + 1) * d].copy_from_slice(&plan[sidx].diffusion);
                    }
                    let active: Vec<bool> = (0..d).map(|j| (0..rows).any(|r| w[r * d + j] != 0.0)).collect();
                    for _ in 0..self.substeps {
                        let caches = self.rk5_substep(si.t_end, drift, &w, &active, h, x, m, subs.is_some(), scratch)?;
                        if let Some(subs) = subs.as_mut() {
                            subs.push(SubstepRecord {
                                h,
                                w: w.clone(),
                                active: active.clone(),
                                caches,
                            });
                        }
                    }
                }
                if let (Some(rec), Some(subs)) = (record, subs) {
                    *rec = StepRecord::Flows(subs);
                }
                Ok(())
            }
        }
    }

    /// One RK5 step of length `h` along `drift V_0 + sum_j w_j V_j` (X part) and `sum_j w_j V^M_j` (M part).
    #[allow(clippy::too_many_arguments)]
    fn rk5_substep(
        &self,
        t: f64,
        drift: f64,
        w: &[f64],
        active: &[bool],
        h: f64,
        x: &mut [f64],
        m: &mut [f64],
        keep: bool,
        scratch: &mut Scratch,
    ) -> Result<Vec<BatchCache>> {
        let rows = m.len();
        let n = self.model.state_dim();
        let d = self.model.noise_dim();
        let s = self.net.field_scale;
        let fields = self.model.fields();
        let any_active = active.iter().any(|&a| a);
        let mut kx = vec![0.0; 6 * rows * n];
        let mut km = vec![0.0; 6 * rows];
        let mut yx = vec![0.0; rows * n];
        let mut ym = vec![0.0; rows];
        let mut caches = if keep && any_active {
            vec![BatchCache::default(); 6 * d]
        } else {
            Vec::new()
        };
        if scratch.caches.len() < d {
            scratch.caches.resize_with(d, BatchCache::default);
        }
        let mut tmp = [0.0; MAX_STATE_DIM];
        for i in 0..6 {
            yx.copy_from_slice(x);
            ym.copy_from_slice(m);
            for (j, &aij) in RK5.a[i][..i].iter().enumerate() {
                if aij != 0.0 {
                    let c = h * aij;
                    let kxj = &kx[j * rows * n..(j + 1) * rows * n];
                    for (y, k) in yx.iter_mut().zip(kxj) {
                        *y += c * k;
                    }
                    for (y, k) in ym.iter_mut().zip(&km[j * rows..(j + 1) * rows]) {
                        *y += c * k;
                    }
                }
            }
            let kxi = &mut kx[i * rows * n..(i + 1) * rows * n];
            for r in 0..rows {
                let y = &yx[r * n..(r + 1) * n];
                let out = &mut kxi[r * n..(r + 1) * n];
                if drift != 0.0 {
                    fields[0].eval(t, y, &mut tmp[..n]);
                    for q in 0..n {
                        out[q] += drift * tmp[q];
                    }
                }
                for j in 0..d {
                    let wj = w[r * d + j];
                    if wj != 0.0 {
                        fields[j + 1].eval(t, y, &mut tmp[..n]);
                        for q in 0..n {
                            out[q] += wj * tmp[q];
                        }
                    }
                }
            }
            if any_active {
                self.encode_rows(t, &yx, &ym, &mut scratch.inputs);
                scratch.outs.resize(rows, 0.0);
                for j in 0..d {
                    if !active[j] {
                        continue;
                    }
                    let cache = if keep {
                        &mut caches[i * d + j]
                    } else {
                        &mut scratch.caches[j]
                    };
                    self.net.mlps[j].forward_batch(&scratch.inputs, rows, cache, &mut scratch.outs);
                    let kmi = &mut km[i * rows..(i + 1) * rows];
                    for r in 0..rows {
                        kmi[r] += w[r * d + j] * s * scratch.outs[r];
                    }
                }
            }
        }
        for i in 0..6 {
            let c = h * RK5.b[i];
            if c == 0.0 {
                continue;
            }
            for (xv, k) in x.iter_mut().zip(&kx[i * rows * n..(i + 1) * rows * n]) {
                *xv += c * k;
            }
            for (mv, k) in m.iter_mut().zip(&km[i * rows..(i + 1) * rows]) {
                *mv += c * k;
            }
        }
        if x.iter().chain(m.iter()).any(|v| !v.is_finite()) {
            return Err(Error::numeric("coupled RK5 flow"));
        }
        Ok(caches)
    }

    /// Pulls `mbar = dL/dM_k` back to `dL/dM_{k-1}` through a recorded step, adding parameter gradients.
    pub(crate) fn step_backward(&self, rec: &StepRecord, mbar: &mut [f64], grad: &mut [f64], scratch: &mut Scratch) {
        let rows = mbar.len();
        let d = self.model.noise_dim();
        let s = self.net.field_scale;
        let width = self.net.input_dim();
        let midx = self.net.m_index();
        let inv_ms = 1.0 / self.net.m_scale;
        let offsets = self.net.offsets();
        scratch.up.resize(rows, 0.0);
        scratch.ig.resize(rows * width, 0.0);
        match rec {
            StepRecord::Empty => {}
            StepRecord::Euler { coef, caches } => {
                let mut dm = vec![0.0; rows];
                for j in 0..d {
                    let net = &self.net.mlps[j];
                    for r in 0..rows {
                        scratch.up[r] = mbar[r] * coef[r * d + j] * s;
                    }
                    let g = &mut grad[offsets[j]..offsets[j] + net.param_count()];
                    net.backward_batch(&caches[j], &scratch.up, g, Some(&mut scratch.ig));
                    for r in 0..rows {
                        dm[r] += scratch.ig[r * width + midx] * inv_ms;
                    }
                }
                for r in 0..rows {
                    mbar[r] += dm[r];
                }
            }
            StepRecord::Flows(subs) => {
                let mut kbar = vec![0.0; 6 * rows];
                let mut ybar = vec![0.0; 6 * rows];
                for sub in subs.iter().rev() {
                    if !sub.active.iter().any(|&a| a) {
                        continue;
                    }
                    let h = sub.h;
                    for i in (0..6).rev() {
                        for r in 0..rows {
                            let mut v = h * RK5.b[i] * mbar[r];
                            for l in i + 1..6 {
                                let a = RK5.a[l][i];
                                if a != 0.0 {
                                    v += h * a * ybar[l * rows + r];
                                }
                            }
                            kbar[i * rows + r] = v;
                            ybar[i * rows + r] = 0.0;
                        }
                        for j in 0..d {
                            if !sub.active[j] {
                                continue;
                            }
                            let net = &self.net.mlps[j];
                            for r in 0..rows {
                                scratch.up[r] = kbar[i * rows + r] * sub.w[r * d + j] * s;
                            }
                            let g = &mut grad[offsets[j]..offsets[j] + net.param_count()];
                            net.backward_batch(&sub.caches[i * d + j], &scratch.up, g, Some(&mut scratch.ig));
                            for r in 0..rows {
                                ybar[i * rows + r] += scratch.ig[r * width + midx] * inv_ms;
                            }
                        }
                    }
                    for r in 0..rows {
                        let mut acc = 0.0;
                        for i in 0..6 {
                            acc += ybar[i * rows + r];
                        }
                        mbar[r] += acc;
                    }
                }
            }
        }
    }

    fn step_input<'b>(&self, partition: &Partition, draws: &'b DrawBlock, p0: usize, rows: usize, k: usize) -> StepInput<'b> {
        let times = partition.times();
        StepInput {
            t_start: times[k],
            t_end: times[k + 1],
            draws: (0..rows).map(|r| StepDraws::from_block(draws, p0 + r, k)).collect(),
        }
    }

    /// Simulates `(X, M')` with `M'_0 = 0` for every path of `draws`.
    pub fn mart_paths(&self, partition: &Partition, draws: &DrawBlock) -> Result<CoupledPaths> {
        self.check_draws(partition, draws)?;
        let steps = partition.steps();
        let n = self.model.state_dim();
        let batch = draws.batch;
        let len = steps + 1;
        let mut x = vec![0.0; batch * len * n];
        let mut m = vec![0.0; batch * len];
        x.par_chunks_mut(CHUNK * len * n)
            .zip(m.par_chunks_mut(CHUNK * len))
            .enumerate()
            .try_for_each(|(c, (xc, mc))| -> Result<()> {
                let rows = mc.len() / len;
                let p0 = c * CHUNK;
                let mut cx: Vec<f64> = (0..rows).flat_map(|_| self.model.x0.iter().copied()).collect();
                let mut cm = vec![0.0; rows];
                let mut scratch = Scratch::default();
                for r in 0..rows {
                    xc[r * len * n..r * len * n + n].copy_from_slice(&self.model.x0);
                }
                for k in 0..steps {
                    let si = self.step_input(partition, draws, p0, rows, k);
                    self.step(&si, &mut cx, &mut cm, None, &mut scratch)?;
                    for r in 0..rows {
                        let o = (r * len + k + 1) * n;
                        xc[o..o + n].copy_from_slice(&cx[r * n..(r + 1) * n]);
                        mc[r * len + k + 1] = cm[r];
                    }
                }
                Ok(())
            })?;
        Ok(CoupledPaths {
            batch,
            steps,
            dim: n,
            x,
            m,
        })
    }

    /// Gradient of a loss with respect to all network parameters, given `m_bar = dL/dM'` at every grid point.
    ///
    /// Chunks are reduced in path order, so the result does not depend on the thread count.
    pub fn mart_backward(
        &self,
        partition: &Partition,
        draws: &DrawBlock,
        paths: &CoupledPaths,
        m_bar: &[f64],
    ) -> Result<Vec<f64>> {
        self.check_draws(partition, draws)?;
        let steps = partition.steps();
        let len = steps + 1;
        let n = self.model.state_dim();
        if m_bar.len() != paths.m.len() {
            return Err(Error::Shape(format!(
                "adjoint of length {} for {} states",
                m_bar.len(),
                paths.m.len()
            )));
        }
        let np = self.net.param_count();
        let chunks = paths.batch.div_ceil(CHUNK);
        let parts = (0..chunks)
            .into_par_iter()
            .map(|c| -> Result<Vec<f64>> {
                let p0 = c * CHUNK;
                let rows = CHUNK.min(paths.batch - p0);
                let mut grad = vec![0.0; np];
                let mut scratch = Scratch::default();
                let mut mbar: Vec<f64> = (0..rows).map(|r| m_bar[(p0 + r) * len + steps]).collect();
                let mut xs = vec![0.0; rows * n];
                let mut ms = vec![0.0; rows];
                for k in (0..steps).rev() {
                    for r in 0..rows {
                        xs[r * n..(r + 1) * n].copy_from_slice(paths.x_at(p0 + r, k));
                        ms[r] = paths.m_at(p0 + r, k);
                    }
                    let si = self.step_input(partition, draws, p0, rows, k);
                    let mut rec = StepRecord::Empty;
                    self.step(&si, &mut xs, &mut ms, Some(&mut rec), &mut scratch)?;
                    self.step_backward(&rec, &mut mbar, &mut grad, &mut scratch);
                    for r in 0..rows {
                        mbar[r] += m_bar[(p0 + r) * len + k];
                    }
                }
                Ok(grad)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = vec![0.0; np];
        for part in parts {
            for (t, g) in total.iter_mut().zip(part) {
                *t += g;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::NetKind;
    use crate::nn::ProjectionInit;
    use crate::qmc::{draws_for, DrawMode, Source};
    use crate::schemes::simulate;
    use crate::sde::{make_bsm_model, make_heston_model, HestonParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bsm() -> ModelSpec {
        make_bsm_model(100.0, 0.0, 0.32).unwrap()
    }

    fn draws(kind: NetKind, d: usize, steps: usize, batch: usize) -> DrawBlock {
        draws_for(kind.scheme(), d, steps, batch, DrawMode::Gaussian, Source::Qmc { seed: 4, skip: 0 }).unwrap()
    }

    #[test]
    fn zero_fields_give_zero_martingale() {
        let m = bsm();
        for kind in [NetKind::ResNet, NetKind::NvNet, NetKind::NnNet] {
            let net = MartingaleNet::new(kind, &m, 1.0, 1, ProjectionInit::Zero).unwrap();
            let c = Coupled::new(&net, &m, &SimOptions::default()).unwrap();
            let p = Partition::uniform(1.0, 4).unwrap();
            let paths = c.mart_paths(&p, &draws(kind, 1, 4, 40)).unwrap();
            assert!(paths.m.iter().all(|&v| v == 0.0), "{kind}");
        }
    }

    #[test]
    fn asset_coordinates_match_scheme_simulation() {
        let h = make_heston_model(HestonParams::reference()).unwrap();
        for kind in [NetKind::ResNet, NetKind::NvNet, NetKind::NnNet] {
            let net = MartingaleNet::new(kind, &h, 1.0, 2, ProjectionInit::HeUniform).unwrap();
            let opts = SimOptions::default();
            let c = Coupled::new(&net, &h, &opts).unwrap();
            let p = Partition::uniform(1.0, 4).unwrap();
            let b = draws(kind, 2, 4, 70);
            let paths = c.mart_paths(&p, &b).unwrap();
            let asset = simulate(&h, kind.scheme(), &p, &b, &opts).unwrap();
            for (a, b) in paths.x.iter().zip(&asset.states) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{kind}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_field_euler_unrolls_to_brownian_sum() {
        let m = bsm();
        let c0 = 3.0;
        let net = MartingaleNet::new(NetKind::ResNet, &m, 1.0, 0, ProjectionInit::Zero)
            .unwrap()
            .with_constant_fields(&[c0])
            .unwrap();
        let c = Coupled::new(&net, &m, &SimOptions::default()).unwrap();
        let p = Partition::uniform(1.0, 8).unwrap();
        let b = draws(NetKind::ResNet, 1, 8, 5);
        let paths = c.mart_paths(&p, &b).unwrap();
        for path in 0..5 {
            let mut acc = 0.0;
            for k in 0..8 {
                acc += c0 * p.delta(k).sqrt() * b.eta_row(path, k)[0];
                assert!((paths.m_at(path, k + 1) - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_field_nv_step_is_linear() {
        let m = bsm();
        let c0 = -1.7;
        let net = MartingaleNet::new(NetKind::NvNet, &m, 1.0, 0, ProjectionInit::Zero)
            .unwrap()
            .with_constant_fields(&[c0])
            .unwrap();
        let c = Coupled::new(&net, &m, &SimOptions::default()).unwrap();
        let p = Partition::uniform(1.0, 1).unwrap();
        let b = draws(NetKind::NvNet, 1, 1, 9);
        let paths = c.mart_paths(&p, &b).unwrap();
        for path in 0..9 {
            let want = c0 * b.eta_row(path, 0)[0];
            assert!((paths.m_at(path, 1) - want).abs() < 1e-12);
        }
    }

    fn perturbed(kind: NetKind, model: &ModelSpec, seed: u64) -> MartingaleNet {
        let mut net = MartingaleNet::new(kind, model, 1.0, seed, ProjectionInit::HeUniform).unwrap();
        let mut flat = net.params_flat();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut flat {
            *v = *v * 0.05 + rng.gen_range(-0.02..0.02);
        }
        net.set_params_flat(&flat).unwrap();
        net
    }

    fn weighted_sum(paths: &CoupledPaths, wts: &[f64]) -> f64 {
        paths.m.iter().zip(wts).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn reverse_pass_matches_finite_differences() {
        let h = make_heston_model(HestonParams::reference()).unwrap();
        for kind in [NetKind::ResNet, NetKind::NvNet, NetKind::NnNet] {
            let net = perturbed(kind, &h, 8);
            let opts = SimOptions { substeps: 2, ..SimOptions::default() };
            let p = Partition::uniform(1.0, 3).unwrap();
            let b = draws(kind, 2, 3, 37);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let wts: Vec<f64> = (0..37 * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = Coupled::new(&net, &h, &opts).unwrap();
            let paths = c.mart_paths(&p, &b).unwrap();
            let g = c.mart_backward(&p, &b, &paths, &wts).unwrap();
            let eps = 1e-6;
            for _ in 0..12 {
                let i = rng.gen_range(0..net.param_count());
                let mut flat = net.params_flat();
                flat[i] += eps;
                let mut np = net.clone();
                np.set_params_flat(&flat).unwrap();
                flat[i] -= 2.0 * eps;
                let mut nm = net.clone();
                nm.set_params_flat(&flat).unwrap();
                let fp = weighted_sum(&Coupled::new(&np, &h, &opts).unwrap().mart_paths(&p, &b).unwrap(), &wts);
                let fm = weighted_sum(&Coupled::new(&nm, &h, &opts).unwrap().mart_paths(&p, &b).unwrap(), &wts);
                let fd = (fp - fm) / (2.0 * eps);
                let scale = fd.abs().max(g[i].abs()).max(1e-6);
                assert!((fd - g[i]).abs() / scale < 1e-5, "{kind} param {i}: fd {fd} ad {}", g[i]);
            }
        }
    }

    #[test]
    fn mismatched_draws_rejected() {
        let m = bsm();
        let net = MartingaleNet::new(NetKind::NvNet, &m, 1.0, 1, ProjectionInit::Zero).unwrap();
        let c = Coupled::new(&net, &m, &SimOptions::default()).unwrap();
        let p = Partition::uniform(1.0, 4).unwrap();
        assert!(c.mart_paths(&p, &draws(NetKind::ResNet, 1, 4, 4)).is_err());
        assert!(c.mart_paths(&p, &draws(NetKind::NvNet, 1, 3, 4)).is_err());
        let h = make_heston_model(HestonParams::reference()).unwrap();
        assert!(Coupled::new(&net, &h, &SimOptions::default()).is_err());
    }
}
