//! Reference prices: Cox-Ross-Rubinstein lattice for the American put and the
//! Black-Scholes closed forms.

use crate::error::{Error, Result};
use crate::qmc::norm_cdf;

fn check_inputs(s0: f64, strike: f64, r: f64, sigma: f64, t: f64) -> Result<()> {
    for (name, v) in [("S0", s0), ("K", strike), ("sigma", sigma), ("T", t)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
        }
    }
    if !r.is_finite() {
        return Err(Error::invalid("r", "must be finite"));
    }
    Ok(())
}

/// American put on a recombining CRR tree with `n` steps.
///
/// Fails when the risk-neutral up probability leaves `(0, 1)`, which happens
/// when `|r| dt` is large against `sigma sqrt(dt)`.
pub fn binomial_american_put(s0: f64, strike: f64, r: f64, sigma: f64, t: f64, n: usize) -> Result<f64> {
    check_inputs(s0, strike, r, sigma, t)?;
    if n == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    let dt = t / n as f64;
    let up = (sigma * dt.sqrt()).exp();
    let down = 1.0 / up;
    let growth = (r * dt).exp();
    let p = (growth - down) / (up - down);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(
            "steps",
            format!("risk-neutral probability {p} outside (0, 1); refine the lattice"),
        ));
    }
    let disc = 1.0 / growth;
    let (pu, pd) = (disc * p, disc * (1.0 - p));
    let mut values: Vec<f64> = (0..=n)
        .map(|j| (strike - s0 * up.powi(j as i32) * down.powi((n - j) as i32)).max(0.0))
        .collect();
    for step in (0..n).rev() {
        for j in 0..=step {
            let spot = s0 * up.powi(j as i32) * down.powi((step - j) as i32);
            let cont = pu * values[j + 1] + pd * values[j];
            values[j] = cont.max(strike - spot);
        }
    }
    Ok(values[0])
}

fn d1d2(s0: f64, strike: f64, r: f64, sigma: f64, t: f64) -> (f64, f64) {
    let v = sigma * t.sqrt();
    let d1 = ((s0 / strike).ln() + (r + 0.5 * sigma * sigma) * t) / v;
    (d1, d1 - v)
}

pub fn bs_european_put(s0: f64, strike: f64, r: f64, sigma: f64, t: f64) -> Result<f64> {
    check_inputs(s0, strike, r, sigma, t)?;
    let (d1, d2) = d1d2(s0, strike, r, sigma, t);
    Ok(strike * (-r * t).exp() * norm_cdf(-d2) - s0 * norm_cdf(-d1))
}

pub fn bs_european_call(s0: f64, strike: f64, r: f64, sigma: f64, t: f64) -> Result<f64> {
    check_inputs(s0, strike, r, sigma, t)?;
    let (d1, d2) = d1d2(s0, strike, r, sigma, t);
    Ok(s0 * norm_cdf(d1) - strike * (-r * t).exp() * norm_cdf(d2))
}
