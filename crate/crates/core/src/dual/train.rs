//! Training the martingale network by minimising the sample dual bound.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::coupled::{Coupled, CoupledPaths};
use super::loss::{bridge_sigmas, center, center_backward, column_means, rogers_loss, BridgeInputs};
use super::net::{MartingaleNet, NetKind};
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, AdamState, Checkpoint, ProjectionInit};
use crate::qmc::{draws_for, DrawBlock, DrawMode, Source};
use crate::schemes::{NnParams, Partition, SimOptions};
use crate::sde::ModelSpec;

/// Pilot paths used for the bridge volatility.
pub const PILOT_PATHS: usize = 10;

const BRIDGE_STREAM_SALT: u64 = 0x5DEE_CE66_D1CE_4E5B;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub net: NetKind,
    pub horizon: f64,
    pub steps: usize,
    pub batch: usize,
    pub iterations: usize,
    pub seed: u64,
    pub bridge: bool,
    pub substeps: usize,
    pub nn: NnParams,
    pub adam: AdamConfig,
    pub projection: ProjectionInit,
    pub checkpoint_every: usize,
    pub checkpoint_dir: Option<PathBuf>,
}

impl TrainConfig {
    /// Desk-scale defaults for a network kind: 1024 Euler steps for ResNet, 4 steps otherwise.
    pub fn desk(net: NetKind) -> Self {
        TrainConfig {
            net,
            horizon: 1.0,
            steps: if net == NetKind::ResNet { 1024 } else { 4 },
            batch: 512,
            iterations: 300,
            seed: 1,
            bridge: true,
            substeps: 1,
            nn: NnParams::default(),
            adam: AdamConfig::default(),
            projection: ProjectionInit::Zero,
            checkpoint_every: 100,
            checkpoint_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iters", "must be at least 1"));
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch", "must be at least 1"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("T", "must be positive"));
        }
        self.nn.coefficients()?;
        Ok(())
    }

    fn sim_options(&self) -> SimOptions {
        SimOptions {
            substeps: self.substeps,
            nn: self.nn,
        }
    }
}

/// The randomness of one training iteration, frozen so the loss is a deterministic function of the parameters.
#[derive(Clone, Debug)]
pub struct Objective {
    pub partition: Partition,
    pub draws: DrawBlock,
    pub uniforms: Option<Vec<f64>>,
    /// Bridge volatilities; estimated from the pilot paths when absent.
    pub sigma: Option<Vec<f64>>,
    pub opts: SimOptions,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
    /// Largest absolute batch mean of the centred martingale over the grid.
    pub center_residual: f64,
    pub paths: CoupledPaths,
}

impl Objective {
    /// Draws for iteration `iteration` (1-based): the QMC shift uses seed `seed + iteration`.
    pub fn for_iteration(model: &ModelSpec, cfg: &TrainConfig, iteration: u64) -> Result<Self> {
        let partition = Partition::uniform(cfg.horizon, cfg.steps)?;
        let draws = draws_for(
            cfg.net.scheme(),
            model.noise_dim(),
            cfg.steps,
            cfg.batch,
            DrawMode::Gaussian,
            Source::Qmc {
                seed: cfg.seed.wrapping_add(iteration),
                skip: 0,
            },
        )?;
        let uniforms = cfg.bridge.then(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ BRIDGE_STREAM_SALT);
            rng.set_stream(iteration);
            (0..cfg.batch * cfg.steps).map(|_| rng.gen::<f64>()).collect()
        });
        Ok(Objective {
            partition,
            draws,
            uniforms,
            sigma: None,
            opts: cfg.sim_options(),
        })
    }

    fn payoff_minus_martingale(&self, model: &ModelSpec, paths: &CoupledPaths) -> (Vec<f64>, f64) {
        let len = paths.steps + 1;
        let m = center(&paths.m, paths.batch, len);
        let residual = column_means(&m, paths.batch, len)
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let y = (0..paths.batch * len)
            .map(|i| {
                let (p, k) = (i / len, i % len);
                model.payoff.eval(paths.x_at(p, k)) - m[i]
            })
            .collect();
        (y, residual)
    }

    /// Loss and (optionally) its gradient with respect to the flat network parameters.
    pub fn evaluate(&self, model: &ModelSpec, net: &MartingaleNet, with_grad: bool) -> Result<Evaluation> {
        let coupled = Coupled::new(net, model, &self.opts)?;
        let paths = coupled.mart_paths(&self.partition, &self.draws)?;
        let batch = paths.batch;
        let len = paths.steps + 1;
        let (y, center_residual) = self.payoff_minus_martingale(model, &paths);
        let sigma = self.uniforms.as_ref().map(|_| {
            self.sigma
                .clone()
                .unwrap_or_else(|| bridge_sigmas(&y, batch, &self.partition, PILOT_PATHS))
        });
        let bridge = match (&self.uniforms, &sigma) {
            (Some(u), Some(s)) => Some(BridgeInputs {
                sigma: s,
                uniforms: u,
                partition: &self.partition,
            }),
            _ => None,
        };
        let r = rogers_loss(&y, batch, len, bridge.as_ref())?;
        let grad = if with_grad {
            // y = Z - centre(M'), and Z does not depend on the parameters
            let dm: Vec<f64> = r.dy.iter().map(|v| -v).collect();
            let dm_prime = center_backward(&dm, batch, len);
            coupled.mart_backward(&self.partition, &self.draws, &paths, &dm_prime)?
        } else {
            Vec::new()
        };
        Ok(Evaluation {
            loss: r.loss,
            grad,
            sigma,
            center_residual,
            paths,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub loss: f64,
    pub wall_ms: f64,
    pub center_residual: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub net: MartingaleNet,
    pub records: Vec<IterationRecord>,
    pub checkpoints: Vec<PathBuf>,
}

impl TrainOutcome {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }
}

fn write_checkpoint(cfg: &TrainConfig, net: &MartingaleNet, iteration: usize, name: &str) -> Result<Option<PathBuf>> {
    let Some(dir) = &cfg.checkpoint_dir else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    Checkpoint {
        seed: cfg.seed,
        iteration: iteration as u64,
        nets: net.mlps.clone(),
    }
    .save(&path)?;
    Ok(Some(path))
}

/// Runs `cfg.iterations` Adam updates (one per batch), calling `observer` after each.
///
/// The loss recorded at iteration `i` is evaluated with the parameters before the `i`-th update.
pub fn train<F>(model: &ModelSpec, cfg: &TrainConfig, mut observer: F) -> Result<TrainOutcome>
where
    F: FnMut(&IterationRecord),
{
    cfg.validate()?;
    let mut net = MartingaleNet::new(cfg.net, model, cfg.horizon, cfg.seed, cfg.projection)?;
    let mut params = net.params_flat();
    let mut adam = AdamState::new(params.len(), cfg.adam);
    let mut records = Vec::with_capacity(cfg.iterations);
    let mut checkpoints = Vec::new();
    let start = Instant::now();
    for it in 1..=cfg.iterations {
        let objective = Objective::for_iteration(model, cfg, it as u64)?;
        let eval = match objective.evaluate(model, &net, true) {
            Ok(e) if e.loss.is_finite() && e.grad.iter().all(|g| g.is_finite()) => e,
            Ok(_) | Err(Error::NumericFailure { .. }) => {
                if let Some(p) = write_checkpoint(cfg, &net, it, &format!("diagnostic_{it:05}.ckpt"))? {
                    checkpoints.push(p);
                }
                return Err(Error::NonFiniteLoss { iteration: it });
            }
            Err(e) => return Err(e),
        };
        adam.step(&mut params, &eval.grad);
        net.set_params_flat(&params)?;
        let rec = IterationRecord {
            iteration: it,
            loss: eval.loss,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            center_residual: eval.center_residual,
        };
        observer(&rec);
        records.push(rec);
        if cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0 {
            if let Some(p) = write_checkpoint(cfg, &net, it, &format!("ckpt_{it:05}.ckpt"))? {
                checkpoints.push(p);
            }
        }
    }
    Ok(TrainOutcome {
        net,
        records,
        checkpoints,
    })
}
