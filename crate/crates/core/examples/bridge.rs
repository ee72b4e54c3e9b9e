//! Sampling the maximum of a pinned Brownian motion over one interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdenet::dual::{bridge_cdf, bridge_sup, BridgeParams};

fn main() -> sdenet::Result<()> {
    let p = BridgeParams { a: 1.0, b: 0.5, sigma: 0.8, dt: 0.25 };
    for u in [0.0, 0.25, 0.5, 0.75, 0.99] {
        let g = bridge_sup(&p, u)?;
        println!("u = {u:<4}  G = {g:.6}  F(G) = {:.6}", bridge_cdf(&p, g));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let mean = (0..n).map(|_| bridge_sup(&p, rng.gen::<f64>()).unwrap()).sum::<f64>() / n as f64;
    println!("mean sup over {n} samples: {mean:.5} (endpoint max {})", p.a.max(p.b));
    Ok(())
}
