//! Learn a martingale for the Black-Scholes American put and compare with the tree price.
//!
//! `cargo run --release --example train_bsm -- [nvnet|resnet|nnet] [iterations]`

use sdenet::dual::{train, NetKind, TrainConfig};
use sdenet::oracles::binomial_american_put;
use sdenet::sde::make_bsm_model;

fn main() -> sdenet::Result<()> {
    let mut args = std::env::args().skip(1);
    let net: NetKind = args.next().as_deref().unwrap_or("nvnet").parse()?;
    let iterations = args.next().map(|s| s.parse().expect("iteration count")).unwrap_or(300);
    let model = make_bsm_model(100.0, 0.0, 0.32)?;
    let cfg = TrainConfig { iterations, checkpoint_every: 0, ..TrainConfig::desk(net) };
    let out = train(&model, &cfg, |r| {
        if r.iteration % 25 == 0 || r.iteration == 1 {
            println!("{:>4}  {:.4}", r.iteration, r.loss);
        }
    })?;
    let tail = &out.losses()[out.records.len().saturating_sub(20)..];
    let avg = tail.iter().sum::<f64>() / tail.len() as f64;
    let tree = binomial_american_put(100.0, 100.0, 0.0, 0.32, 1.0, 2000)?;
    println!("{net}: mean of last {} losses {avg:.4}; binomial price {tree:.4}", tail.len());
    Ok(())
}
