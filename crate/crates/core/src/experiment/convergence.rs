//! Empirical weak order of the schemes on the Black-Scholes European put.
//!
//! The error at `#Delta = n` is estimated as the QMC mean of
//! `f(X_T^n) - f(X_T)`, where `X_T = S0 exp((mu - sigma^2/2) T + sigma W_T)` is
//! the exact solution driven by the very Brownian increments the scheme
//! consumed. Its expectation is the weak error, and most of the QMC
//! integration error cancels in the difference.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracles::bs_european_put;
use crate::qmc::{draws_for, DrawBlock, DrawMode, Source};
use crate::schemes::{nn_zeta, simulate, NnParams, Partition, Scheme, SimOptions};
use crate::sde::{ModelKind, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsmSetup {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub strike: f64,
    pub horizon: f64,
}

impl BsmSetup {
    pub fn paper() -> Self {
        BsmSetup {
            s0: 100.0,
            mu: 0.0,
            sigma: 0.32,
            strike: 100.0,
            horizon: 1.0,
        }
    }

    pub fn model(&self) -> Result<ModelSpec> {
        Ok(crate::sde::make_bsm_model(self.s0, self.mu, self.sigma)?.with_strike(self.strike))
    }

    pub fn reference(&self) -> Result<f64> {
        bs_european_put(self.s0, self.strike, self.mu, self.sigma, self.horizon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    /// `|mean(f(X^n) - f(X))|`.
    pub error: f64,
    /// Three QMC standard errors of that mean, from the per-path differences.
    pub error_band: f64,
    /// `|mean f(X^n) - reference|` without the exact-path correction.
    pub raw_error: f64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log #Delta`; absent for fewer than two counts.
    pub slope: Option<f64>,
}

/// Brownian increment `W_{t_k} - W_{t_{k-1}}` (first noise) implied by the draws of one step.
fn increment(scheme: Scheme, draws: &DrawBlock, p: usize, k: usize, dt: f64, nn: &NnParams) -> Result<f64> {
    let eta = draws.eta_row(p, k)[0];
    Ok(match scheme {
        Scheme::Em | Scheme::Cub3 | Scheme::Nv => dt.sqrt() * eta,
        Scheme::Nn => {
            let c = nn.coefficients()?;
            let xi = draws.xi_row(p, k).expect("NN draws carry xi")[0];
            (c.r11 * dt).sqrt() * eta + dt.sqrt() * nn_zeta(&c, eta, xi)
        }
    })
}

pub fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Weak-error study on `model` for the given ascending step counts.
///
/// Only the Black-Scholes model has the exact reference this needs; other
/// models are a usage error.
pub fn run_convergence(
    model: &ModelSpec,
    setup: &BsmSetup,
    scheme: Scheme,
    step_counts: &[usize],
    qmc_points: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    if model.kind != ModelKind::Bsm {
        return Err(Error::Usage(format!(
            "convergence studies need the closed-form reference; {:?} has none",
            model.kind
        )));
    }
    if step_counts.is_empty() || step_counts.windows(2).any(|w| w[1] <= w[0]) || step_counts[0] == 0 {
        return Err(Error::invalid("step_counts", "must be positive and strictly ascending"));
    }
    let reference = setup.reference()?;
    let opts = SimOptions::default();
    let drift = setup.mu - 0.5 * setup.sigma * setup.sigma;
    let mut rows = Vec::with_capacity(step_counts.len());
    for &n in step_counts {
        let partition = Partition::uniform(setup.horizon, n)?;
        let draws = draws_for(scheme, 1, n, qmc_points, DrawMode::Gaussian, Source::Qmc { seed, skip: 0 })?;
        let paths = simulate(model, scheme, &partition, &draws, &opts)?;
        let mut diffs = Vec::with_capacity(qmc_points);
        let mut sum = 0.0;
        for p in 0..qmc_points {
            let mut w = 0.0;
            for k in 0..n {
                w += increment(scheme, &draws, p, k, partition.delta(k), &opts.nn)?;
            }
            let exact = setup.s0 * (drift * setup.horizon + setup.sigma * w).exp();
            let f = model.payoff.eval(paths.terminal(p));
            sum += f;
            diffs.push(f - model.payoff.eval(&[exact]));
        }
        let q = qmc_points as f64;
        let mean = diffs.iter().sum::<f64>() / q;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (q - 1.0).max(1.0);
        let estimate = sum / q;
        rows.push(ConvergenceRow {
            steps: n,
            error: mean.abs(),
            error_band: 3.0 * (var / q).sqrt(),
            raw_error: (estimate - reference).abs(),
            estimate,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.steps as f64, r.error)).collect();
    Ok(ConvergenceReport {
        scheme,
        reference,
        slope: slope(&pts),
        rows,
    })
}
