//! American put on a CRR tree next to the European closed form.

use sdenet::oracles::{binomial_american_put, bs_european_put};

fn main() -> sdenet::Result<()> {
    let euro = bs_european_put(100.0, 100.0, 0.0, 0.32, 1.0)?;
    println!("European put (closed form): {euro:.5}");
    for n in [250, 500, 1000, 2000, 4000] {
        let a = binomial_american_put(100.0, 100.0, 0.0, 0.32, 1.0, n)?;
        println!("American put, {n:>4} steps: {a:.5}");
    }
    let a = binomial_american_put(100.0, 100.0, 0.05, 0.32, 1.0, 2000)?;
    let e = bs_european_put(100.0, 100.0, 0.05, 0.32, 1.0)?;
    println!("with r = 5%: American {a:.5}, European {e:.5}, premium {:.5}", a - e);
    Ok(())
}
