//! Path-wise centering by conditional resampling, a costly cross-check of the batch surrogate.

use super::coupled::{Coupled, Scratch, StepInput};
use super::net::MartingaleNet;
use crate::error::{Error, Result};
use crate::qmc::{draws_for, DrawMode, Source};
use crate::schemes::{Partition, SimOptions, StepDraws};
use crate::sde::ModelSpec;

/// One path `(X, M)` where every increment of `M` is centred over `k` conditional one-step draws.
///
/// At step `i`, `k` realisations are drawn from the current state; the path continues along the
/// first one and `M_{t_i} = M_{t_{i-1}} + M'_{i,1} - (1/k) sum_j M'_{i,j}` (increments `M'`).
pub fn canonical_center(
    net: &MartingaleNet,
    model: &ModelSpec,
    partition: &Partition,
    opts: &SimOptions,
    k: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::invalid("K", "need at least one conditional draw"));
    }
    let coupled = Coupled::new(net, model, opts)?;
    let n = model.state_dim();
    let steps = partition.steps();
    let times = partition.times();
    let mut xs = model.x0.clone();
    let mut ms = vec![0.0];
    let mut x = model.x0.clone();
    let mut m = 0.0;
    let mut scratch = Scratch::default();
    for i in 0..steps {
        let block = draws_for(
            coupled.scheme(),
            model.noise_dim(),
            1,
            k,
            DrawMode::Gaussian,
            Source::Pseudo {
                seed: seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64),
            },
        )?;
        let si = StepInput {
            t_start: times[i],
            t_end: times[i + 1],
            draws: (0..k).map(|r| StepDraws::from_block(&block, r, 0)).collect(),
        };
        let mut cx: Vec<f64> = (0..k).flat_map(|_| x.iter().copied()).collect();
        let mut cm = vec![m; k];
        coupled.step(&si, &mut cx, &mut cm, None, &mut scratch)?;
        let mean = cm.iter().map(|v| v - m).sum::<f64>() / k as f64;
        m += (cm[0] - m) - mean;
        x.copy_from_slice(&cx[..n]);
        xs.extend_from_slice(&x);
        ms.push(m);
    }
    Ok((xs, ms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::NetKind;
    use crate::nn::ProjectionInit;
    use crate::sde::make_bsm_model;

    #[test]
    fn single_draw_is_degenerate() {
        let m = make_bsm_model(100.0, 0.0, 0.32).unwrap();
        let net = MartingaleNet::new(NetKind::NvNet, &m, 1.0, 1, ProjectionInit::HeUniform).unwrap();
        let p = Partition::uniform(1.0, 4).unwrap();
        let (_, path) = canonical_center(&net, &m, &p, &SimOptions::default(), 1, 3).unwrap();
        assert!(path.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_fields_stay_zero() {
        let m = make_bsm_model(100.0, 0.0, 0.32).unwrap();
        let net = MartingaleNet::new(NetKind::ResNet, &m, 1.0, 1, ProjectionInit::Zero).unwrap();
        let p = Partition::uniform(1.0, 8).unwrap();
        let (x, path) = canonical_center(&net, &m, &p, &SimOptions::default(), 16, 3).unwrap();
        assert_eq!(x.len(), 9);
        assert!(path.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_field_euler_step_has_zero_mean() {
        let m = make_bsm_model(100.0, 0.0, 0.32).unwrap();
        let net = MartingaleNet::new(NetKind::ResNet, &m, 1.0, 1, ProjectionInit::Zero)
            .unwrap()
            .with_constant_fields(&[5.0])
            .unwrap();
        let p = Partition::uniform(1.0, 1).unwrap();
        let reps = 10_000;
        let vals: Vec<f64> = (0..reps)
            .map(|r| canonical_center(&net, &m, &p, &SimOptions::default(), 4, r as u64).unwrap().1[1])
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        assert!(sd > 0.0);
        assert!(mean.abs() < 3.0 * sd / (reps as f64).sqrt(), "mean {mean} sd {sd}");
    }
}
