//! Dual upper bound for an American put under Heston dynamics.
//!
//! `cargo run --release --example train_heston -- [nvnet|resnet|nnet] [iterations]`

use sdenet::dual::{train, NetKind, TrainConfig};
use sdenet::sde::{make_heston_model, HestonParams};

fn main() -> sdenet::Result<()> {
    let mut args = std::env::args().skip(1);
    let net: NetKind = args.next().as_deref().unwrap_or("nvnet").parse()?;
    let iterations = args.next().map(|s| s.parse().expect("iteration count")).unwrap_or(300);
    let model = make_heston_model(HestonParams::reference())?;
    let cfg = TrainConfig { iterations, checkpoint_every: 0, ..TrainConfig::desk(net) };
    let out = train(&model, &cfg, |r| {
        if r.iteration % 25 == 0 || r.iteration == 1 {
            println!("{:>4}  {:.4}  ({:.0} ms)", r.iteration, r.loss, r.wall_ms);
        }
    })?;
    let l = out.losses();
    if l.len() >= 50 {
        println!("loss at 50: {:.4}, final: {:.4}", l[49], l[l.len() - 1]);
    }
    Ok(())
}
