//! Shifted Sobol' points and the Gaussian and cubature draws built from them.

use sdenet::qmc::{draws_for, sobol_points, DrawMode, Source};
use sdenet::schemes::Scheme;

fn main() -> sdenet::Result<()> {
    let pts = sobol_points(3, 4, None, 0)?;
    for i in 0..pts.n {
        println!("point {i}: {:?}", pts.row(i));
    }
    let n = 1 << 14;
    let g = draws_for(Scheme::Nv, 1, 1, n, DrawMode::Gaussian, Source::Qmc { seed: 7, skip: 0 })?;
    let c = draws_for(Scheme::Cub3, 1, 1, n, DrawMode::Cubature, Source::Qmc { seed: 7, skip: 0 })?;
    for (name, block) in [("gaussian", &g), ("cubature", &c)] {
        let m2 = (0..n).map(|p| block.eta_row(p, 0)[0].powi(2)).sum::<f64>() / n as f64;
        let m4 = (0..n).map(|p| block.eta_row(p, 0)[0].powi(4)).sum::<f64>() / n as f64;
        println!("{name:>9}: E[eta^2] = {m2:.5}, E[eta^4] = {m4:.5}");
    }
    let plus = (0..n).filter(|&p| g.lambda(p, 0) == Some(1.0)).count();
    println!("NV ordering sign +1 on {plus} of {n} paths");
    Ok(())
}
