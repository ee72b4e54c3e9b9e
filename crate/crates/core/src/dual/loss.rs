//! Centering of the provisional martingale, the Brownian-bridge refinement of
//! the running supremum and the sample form of Rogers' dual bound.

use crate::error::{Error, Result};
use crate::schemes::Partition;

/// Subtracts the batch mean at every grid point. `paths` is path-major with `len` points per path.
pub fn center(paths: &[f64], batch: usize, len: usize) -> Vec<f64> {
    let means = column_means(paths, batch, len);
    let mut out = paths.to_vec();
    for row in out.chunks_exact_mut(len) {
        for (v, mu) in row.iter_mut().zip(&means) {
            *v -= mu;
        }
    }
    out
}

/// Reverse pass of [`center`]: the adjoint minus its batch mean.
pub fn center_backward(adjoint: &[f64], batch: usize, len: usize) -> Vec<f64> {
    center(adjoint, batch, len)
}

/// Compensated per-column means.
pub fn column_means(paths: &[f64], batch: usize, len: usize) -> Vec<f64> {
    let mut sum = vec![0.0; len];
    let mut comp = vec![0.0; len];
    for row in paths.chunks_exact(len).take(batch) {
        for k in 0..len {
            let t = sum[k] + row[k];
            if sum[k].abs() >= row[k].abs() {
                comp[k] += (sum[k] - t) + row[k];
            } else {
                comp[k] += (row[k] - t) + sum[k];
            }
            sum[k] = t;
        }
    }
    sum.iter().zip(&comp).map(|(s, c)| (s + c) / batch as f64).collect()
}

/// A Brownian bridge `sigma B` pinned at `a` and `b` over an interval of length `dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BridgeParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub dt: f64,
}

impl BridgeParams {
    fn check(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// `G(u) = (a + b + sqrt((a - b)^2 - 2 sigma^2 dt log(1 - u))) / 2`, a draw of the bridge maximum.
pub fn bridge_sup(bp: &BridgeParams, u: f64) -> Result<f64> {
    bp.check()?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("bridge uniform {u} outside [0, 1)")));
    }
    Ok(bridge_sup_partials(bp, u).0)
}

/// `(G, dG/da, dG/db)`; at the kink `a = b`, `u = 0` both partials are taken as 1/2.
pub fn bridge_sup_partials(bp: &BridgeParams, u: f64) -> (f64, f64, f64) {
    let diff = bp.a - bp.b;
    let c = -2.0 * bp.sigma * bp.sigma * bp.dt * (-u).ln_1p();
    let r = (diff * diff + c).sqrt();
    let g = 0.5 * (bp.a + bp.b + r);
    if r == 0.0 {
        (g, 0.5, 0.5)
    } else {
        (g, 0.5 * (1.0 + diff / r), 0.5 * (1.0 - diff / r))
    }
}

/// Distribution function of the bridge maximum, `1 - exp(-2 (x - a)(x - b) / (sigma^2 dt))` for `x >= max(a, b)`.
pub fn bridge_cdf(bp: &BridgeParams, x: f64) -> f64 {
    if x <= bp.a.max(bp.b) {
        return 0.0;
    }
    -(-2.0 * (x - bp.a) * (x - bp.b) / (bp.sigma * bp.sigma * bp.dt)).exp_m1()
}

/// Sample volatility of the increments over interval `k` (1-based) of `rows` pilot paths.
///
/// Returns the sample standard deviation divided by `sqrt(dt)`, floored at `1e-8`.
pub fn estimate_sigma(pilot: &[f64], rows: usize, len: usize, k: usize, dt: f64) -> f64 {
    const FLOOR: f64 = 1e-8;
    if rows < 2 || k == 0 || k >= len {
        return FLOOR;
    }
    let inc: Vec<f64> = pilot
        .chunks_exact(len)
        .take(rows)
        .map(|p| p[k] - p[k - 1])
        .collect();
    let mean = inc.iter().sum::<f64>() / rows as f64;
    let var = inc.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (rows - 1) as f64;
    (var.sqrt() / dt.sqrt()).max(FLOOR)
}

/// Per-interval bridge volatilities from the first `min(pilot, batch)` rows of `y = Z - M`.
pub fn bridge_sigmas(y: &[f64], batch: usize, partition: &Partition, pilot: usize) -> Vec<f64> {
    let len = partition.steps() + 1;
    let rows = pilot.min(batch);
    (1..len)
        .map(|k| estimate_sigma(y, rows, len, k, partition.delta(k - 1)))
        .collect()
}

/// Everything the bridge refinement needs beyond the paths.
#[derive(Clone, Copy, Debug)]
pub struct BridgeInputs<'a> {
    /// One volatility per interval.
    pub sigma: &'a [f64],
    /// Uniforms in `[0, 1)`, path-major, one per interval.
    pub uniforms: &'a [f64],
    pub partition: &'a Partition,
}

#[derive(Clone, Debug)]
pub struct RogersLoss {
    pub loss: f64,
    /// `dloss / dy` at every grid point, path-major.
    pub dy: Vec<f64>,
}

/// `(1/K) sum_i sup_t y_t(omega_i)` for `y = Z - M` stored path-major with `len` points per path.
///
/// Without a bridge the supremum is the maximum over the grid (including both ends);
/// with one, each interval contributes a bridge-maximum draw.
pub fn rogers_loss(y: &[f64], batch: usize, len: usize, bridge: Option<&BridgeInputs<'_>>) -> Result<RogersLoss> {
    if batch == 0 || len == 0 || y.len() != batch * len {
        return Err(Error::Shape(format!(
            "{} values for {batch} paths of {len} points",
            y.len()
        )));
    }
    if let Some(b) = bridge {
        let n = len - 1;
        if b.sigma.len() != n || b.uniforms.len() != batch * n || b.partition.steps() != n {
            return Err(Error::Shape("bridge inputs do not match the paths".into()));
        }
    }
    let inv = 1.0 / batch as f64;
    let mut dy = vec![0.0; batch * len];
    let mut total = 0.0;
    for (p, row) in y.chunks_exact(len).enumerate() {
        let grad = &mut dy[p * len..(p + 1) * len];
        match bridge {
            Some(b) if len > 1 => {
                let mut best = f64::NEG_INFINITY;
                let mut at = (0, 0.0, 0.0);
                for k in 1..len {
                    let bp = BridgeParams {
                        a: row[k - 1],
                        b: row[k],
                        sigma: b.sigma[k - 1],
                        dt: b.partition.delta(k - 1),
                    };
                    let (g, ga, gb) = bridge_sup_partials(&bp, b.uniforms[p * (len - 1) + k - 1]);
                    if g > best {
                        best = g;
                        at = (k, ga, gb);
                    }
                }
                grad[at.0 - 1] += inv * at.1;
                grad[at.0] += inv * at.2;
                total += best;
            }
            _ => {
                let (k, v) = row
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
                grad[k] += inv;
                total += v;
            }
        }
    }
    let loss = total * inv;
    if !loss.is_finite() {
        return Err(Error::numeric("dual loss"));
    }
    Ok(RogersLoss { loss, dy })
}
