//! Empirical weak order of EM, NV and NN on the Black-Scholes European put.

use sdenet::experiment::{run_convergence, BsmSetup};
use sdenet::schemes::Scheme;

fn main() -> sdenet::Result<()> {
    let setup = BsmSetup::paper();
    let model = setup.model()?;
    let plans = [
        (Scheme::Em, vec![8, 16, 32, 64]),
        (Scheme::Nv, vec![1, 2, 4, 8]),
        (Scheme::Nn, vec![1, 2, 4, 8]),
    ];
    for (scheme, counts) in plans {
        let rep = run_convergence(&model, &setup, scheme, &counts, 1 << 14, 1)?;
        let errs: Vec<String> = rep.rows.iter().map(|r| format!("{:.2e}", r.error)).collect();
        println!("{scheme:>4}: errors {} slope {:.3}", errs.join(" "), rep.slope.unwrap_or(f64::NAN));
    }
    Ok(())
}
