//! Mapping of low-discrepancy (or pseudo-random) coordinates to the random
//! variables each scheme consumes per path and step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::normal::inv_norm;
use super::sobol::SobolSequence;
use crate::error::{Error, Result};
use crate::schemes::Scheme;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrawMode {
    /// Standard normal variables through `Phi^{-1}`.
    Gaussian,
    /// Three-point variables on `{-sqrt 3, 0, sqrt 3}` with masses `1/6, 2/3, 1/6`.
    Cubature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// Sobol' points, digitally shifted by `seed`, starting after `skip` points.
    Qmc { seed: u64, skip: u64 },
    /// ChaCha8 with one stream per path.
    Pseudo { seed: u64 },
}

/// Per-path randomness for a whole partition.
///
/// Arrays are flattened path-major: `eta[(p * steps + k) * d + i]`.
#[derive(Clone, Debug)]
pub struct DrawBlock {
    pub scheme: Scheme,
    pub mode: DrawMode,
    pub source: Source,
    pub batch: usize,
    pub steps: usize,
    pub d: usize,
    pub eta: Vec<f64>,
    pub xi: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
}

impl DrawBlock {
    pub fn eta_row(&self, path: usize, step: usize) -> &[f64] {
        let o = (path * self.steps + step) * self.d;
        &self.eta[o..o + self.d]
    }

    pub fn xi_row(&self, path: usize, step: usize) -> Option<&[f64]> {
        let o = (path * self.steps + step) * self.d;
        self.xi.as_ref().map(|xi| &xi[o..o + self.d])
    }

    pub fn lambda(&self, path: usize, step: usize) -> Option<f64> {
        self.lambda
            .as_ref()
            .map(|l| l[path * self.steps + step])
    }

    /// All-zero Gaussian draws (with `Lambda = +1`), handy for deterministic checks.
    pub fn zeros(scheme: Scheme, d: usize, steps: usize, batch: usize) -> Self {
        let n = batch * steps * d;
        DrawBlock {
            scheme,
            mode: DrawMode::Gaussian,
            source: Source::Pseudo { seed: 0 },
            batch,
            steps,
            d,
            eta: vec![0.0; n],
            xi: (scheme == Scheme::Nn).then(|| vec![0.0; n]),
            lambda: (scheme == Scheme::Nv).then(|| vec![1.0; batch * steps]),
        }
    }
}

/// Coordinates consumed by one path: `d`, `d + 1` or `2d` per step.
pub fn dims_per_path(scheme: Scheme, d: usize, steps: usize) -> usize {
    let per_step = match scheme {
        Scheme::Em | Scheme::Cub3 => d,
        Scheme::Nv => d + 1,
        Scheme::Nn => 2 * d,
    };
    per_step * steps
}

#[inline]
fn cubature_value(u: f64) -> f64 {
    if u < 1.0 / 6.0 {
        -SQRT3
    } else if u < 5.0 / 6.0 {
        0.0
    } else {
        SQRT3
    }
}

pub fn draws_for(
    scheme: Scheme,
    d: usize,
    steps: usize,
    batch: usize,
    mode: DrawMode,
    source: Source,
) -> Result<DrawBlock> {
    if batch == 0 {
        return Err(Error::invalid("batch", "must be at least 1"));
    }
    if d == 0 {
        return Err(Error::invalid("d", "must be at least 1"));
    }
    let dim = dims_per_path(scheme, d, steps);
    let mut u = vec![0.0; batch * dim];
    match source {
        Source::Qmc { seed, skip } => {
            SobolSequence::new(dim)?.with_shift(seed).fill(1 + skip, &mut u)?;
        }
        Source::Pseudo { seed } => {
            for (p, row) in u.chunks_exact_mut(dim.max(1)).enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(p as u64);
                for x in row {
                    // open interval (0, 1)
                    *x = (rng.gen::<u32>() as f64 + 0.5) / 4_294_967_296.0;
                }
            }
        }
    }

    let map = |x: f64| match mode {
        DrawMode::Gaussian => inv_norm(x),
        DrawMode::Cubature => cubature_value(x),
    };
    let n = batch * steps * d;
    let mut eta = vec![0.0; n];
    let mut xi = (scheme == Scheme::Nn).then(|| vec![0.0; n]);
    let mut lambda = (scheme == Scheme::Nv).then(|| vec![0.0; batch * steps]);
    let per_step = if steps == 0 { 0 } else { dim / steps };
    for p in 0..batch {
        for k in 0..steps {
            let coords = &u[p * dim + k * per_step..p * dim + (k + 1) * per_step];
            let o = (p * steps + k) * d;
            for i in 0..d {
                eta[o + i] = map(coords[i]);
            }
            if let Some(xi) = xi.as_mut() {
                for i in 0..d {
                    xi[o + i] = map(coords[d + i]);
                }
            }
            if let Some(l) = lambda.as_mut() {
                l[p * steps + k] = if coords[d] < 0.5 { -1.0 } else { 1.0 };
            }
        }
    }
    Ok(DrawBlock {
        scheme,
        mode,
        source,
        batch,
        steps,
        d,
        eta,
        xi,
        lambda,
    })
}
