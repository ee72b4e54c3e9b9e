//! Six-stage explicit Runge-Kutta integrator of order five, used to evaluate
//! the flows `exp(tV)x` that the splitting schemes are made of.

use crate::error::{Error, Result};
use crate::sde::{VectorField, MAX_STATE_DIM};

/// Butcher coefficients of an explicit six-stage method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk5Tableau {
    /// Strictly lower triangular stage matrix, `a[i][j]` with `j < i`.
    pub a: [[f64; 6]; 6],
    pub b: [f64; 6],
}

impl Rk5Tableau {
    pub fn nodes(&self) -> [f64; 6] {
        let mut c = [0.0; 6];
        for (ci, row) in c.iter_mut().zip(&self.a) {
            *ci = row.iter().sum();
        }
        c
    }
}

pub const RK5: Rk5Tableau = Rk5Tableau {
    a: [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [2.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [11.0 / 64.0, 5.0 / 64.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0 / 2.0, 0.0, 0.0, 0.0],
        [3.0 / 64.0, -15.0 / 64.0, 3.0 / 8.0, 9.0 / 16.0, 0.0, 0.0],
        [0.0, 5.0 / 7.0, 6.0 / 7.0, -12.0 / 7.0, 8.0 / 7.0, 0.0],
    ],
    b: [
        7.0 / 90.0,
        0.0,
        32.0 / 90.0,
        12.0 / 90.0,
        32.0 / 90.0,
        7.0 / 90.0,
    ],
};

/// One step `x -> x + h sum_j b_j Z_j` of the tableau for an autonomous field.
///
/// `h` may be negative. `out` and `x` must have the same length.
pub fn rk5_step<F>(mut field: F, x: &[f64], h: f64, out: &mut [f64]) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    if n > MAX_STATE_DIM || out.len() != n {
        return Err(Error::Shape(format!(
            "rk5_step on a {n}-vector with a {}-vector output",
            out.len()
        )));
    }
    let mut z = [[0.0; MAX_STATE_DIM]; 6];
    let mut y = [0.0; MAX_STATE_DIM];
    for i in 0..6 {
        y[..n].copy_from_slice(x);
        for (j, &aij) in RK5.a[i][..i].iter().enumerate() {
            if aij != 0.0 {
                for k in 0..n {
                    y[k] += h * aij * z[j][k];
                }
            }
        }
        field(&y[..n], &mut z[i][..n]);
        if z[i][..n].iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("rk5 stage {}", i + 1)));
        }
    }
    out.copy_from_slice(x);
    for (j, &bj) in RK5.b.iter().enumerate() {
        if bj != 0.0 {
            for k in 0..n {
                out[k] += h * bj * z[j][k];
            }
        }
    }
    Ok(())
}

/// Approximates `exp(total_time V) x` with `substeps` equal RK5 steps.
pub fn flow<F>(mut field: F, x: &[f64], total_time: f64, substeps: usize, out: &mut [f64]) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if substeps == 0 {
        return Err(Error::invalid("substeps", "must be at least 1"));
    }
    out.copy_from_slice(x);
    if total_time == 0.0 {
        return Ok(());
    }
    let h = total_time / substeps as f64;
    let mut cur = [0.0; MAX_STATE_DIM];
    let n = x.len();
    for _ in 0..substeps {
        cur[..n].copy_from_slice(out);
        rk5_step(&mut field, &cur[..n], h, out)?;
    }
    Ok(())
}

/// `flow` for a [`VectorField`] frozen at time label `t_eval`.
pub fn flow_field(
    field: &dyn VectorField,
    t_eval: f64,
    x: &[f64],
    total_time: f64,
    substeps: usize,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    flow(
        |y: &[f64], o: &mut [f64]| field.eval(t_eval, y, o),
        x,
        total_time,
        substeps,
        &mut out,
    )?;
    Ok(out)
}
