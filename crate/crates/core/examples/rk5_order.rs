//! Global error of the fifth-order Runge-Kutta flow on dz/dt = z.

use sdenet::ode::flow;

fn main() -> sdenet::Result<()> {
    let exact = std::f64::consts::E;
    let mut prev: Option<f64> = None;
    println!("{:>4} {:>14} {:>8}", "m", "error", "ratio");
    for m in [1usize, 2, 4, 8, 16] {
        let mut out = [0.0];
        flow(|z, o| o[0] = z[0], &[1.0], 1.0, m, &mut out)?;
        let err = (out[0] - exact).abs();
        let ratio = prev.map(|p| format!("{:.2}", p / err)).unwrap_or_default();
        println!("{m:>4} {err:>14.3e} {ratio:>8}");
        prev = Some(err);
    }
    Ok(())
}
