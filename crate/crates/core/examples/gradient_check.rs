//! Reverse-mode gradient of the training loss against central differences.

use sdenet::dual::{MartingaleNet, NetKind, Objective, TrainConfig};
use sdenet::nn::ProjectionInit;
use sdenet::sde::make_bsm_model;

fn main() -> sdenet::Result<()> {
    let model = make_bsm_model(100.0, 0.0, 0.32)?;
    let cfg = TrainConfig { steps: 1, batch: 256, projection: ProjectionInit::HeUniform, ..TrainConfig::desk(NetKind::NvNet) };
    let mut net = MartingaleNet::new(cfg.net, &model, cfg.horizon, cfg.seed, cfg.projection)?;
    let mut obj = Objective::for_iteration(&model, &cfg, 1)?;
    let eval = obj.evaluate(&model, &net, true)?;
    obj.sigma = eval.sigma.clone();
    let base = net.params_flat();
    let h = 1e-5;
    for idx in (0..base.len()).step_by(base.len() / 8) {
        let mut p = base.clone();
        p[idx] = base[idx] + h;
        net.set_params_flat(&p)?;
        let up = obj.evaluate(&model, &net, false)?.loss;
        p[idx] = base[idx] - h;
        net.set_params_flat(&p)?;
        let down = obj.evaluate(&model, &net, false)?.loss;
        let fd = (up - down) / (2.0 * h);
        println!("param {idx:>5}: reverse {:+.6e}  finite difference {fd:+.6e}", eval.grad[idx]);
    }
    Ok(())
}
