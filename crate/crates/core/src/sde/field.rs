//! Tangent vector fields on `R^N`.

use std::fmt;
use std::sync::Arc;

use crate::autodiff::{Tape, Var};

/// Largest state dimension accepted by the integrators (stack-allocated stages).
pub const MAX_STATE_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// Explicit formula with an analytic Jacobian.
    ClosedForm,
    /// Explicit formula whose Jacobian comes from the reverse-mode tape.
    Autodiff,
    /// Coefficients produced by a multilayer perceptron.
    MlpBacked,
}

/// The coefficient vector `V I_N(t, x)` of a tangent vector field.
///
/// `eval` must write exactly `dim()` entries for a `dim()`-vector input.
/// `jacobian` writes the row-major matrix `jac[k * n + j] = d(V I_N)^k / dx_j`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn kind(&self) -> FieldKind;
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]);

    fn eval_vec(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(t, x, &mut out);
        out
    }

    /// `V_i` acting on its own coefficients: `(J(x) V I_N(x))^k`.
    fn self_derivative(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let mut v = [0.0; MAX_STATE_DIM];
        let mut jac = [0.0; MAX_STATE_DIM * MAX_STATE_DIM];
        self.eval(t, x, &mut v[..n]);
        self.jacobian(t, x, &mut jac[..n * n]);
        for k in 0..n {
            out[k] = (0..n).map(|j| jac[k * n + j] * v[j]).sum();
        }
    }
}

impl fmt::Debug for dyn VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField(dim={}, {:?})", self.dim(), self.kind())
    }
}

pub type FieldRef = Arc<dyn VectorField>;

/// `y -> c * y` on `R^1`.
#[derive(Clone, Copy, Debug)]
pub struct LinearField {
    pub coef: f64,
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        1
    }
    fn kind(&self) -> FieldKind {
        FieldKind::ClosedForm
    }
    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        out[0] = self.coef * x[0];
    }
    fn jacobian(&self, _t: f64, _x: &[f64], jac: &mut [f64]) {
        jac[0] = self.coef;
    }
}

/// A field with constant coefficients.
#[derive(Clone, Debug)]
pub struct ConstantField {
    pub value: Vec<f64>,
}

impl ConstantField {
    pub fn new(value: Vec<f64>) -> Self {
        ConstantField { value }
    }

    pub fn zero(dim: usize) -> Self {
        ConstantField {
            value: vec![0.0; dim],
        }
    }
}

impl VectorField for ConstantField {
    fn dim(&self) -> usize {
        self.value.len()
    }
    fn kind(&self) -> FieldKind {
        FieldKind::ClosedForm
    }
    fn eval(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.value);
    }
    fn jacobian(&self, _t: f64, _x: &[f64], jac: &mut [f64]) {
        jac.fill(0.0);
    }
}

type EvalFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// Closed-form field given by a pair of closures (coefficients, Jacobian).
pub struct ClosureField {
    dim: usize,
    eval: Box<EvalFn>,
    jac: Box<EvalFn>,
}

impl ClosureField {
    pub fn new<F, J>(dim: usize, eval: F, jac: J) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        J: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        ClosureField {
            dim,
            eval: Box::new(eval),
            jac: Box::new(jac),
        }
    }
}

impl VectorField for ClosureField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn kind(&self) -> FieldKind {
        FieldKind::ClosedForm
    }
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.eval)(t, x, out)
    }
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) {
        (self.jac)(t, x, jac)
    }
}

type TapeFn = dyn for<'t> Fn(&'t Tape, f64, &[Var<'t>]) -> Vec<Var<'t>> + Send + Sync;

/// A field written once against the tape; the Jacobian is obtained by one
/// reverse sweep per output component.
pub struct AutodiffField {
    dim: usize,
    f: Box<TapeFn>,
}

impl AutodiffField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: for<'t> Fn(&'t Tape, f64, &[Var<'t>]) -> Vec<Var<'t>> + Send + Sync + 'static,
    {
        AutodiffField {
            dim,
            f: Box::new(f),
        }
    }
}

impl VectorField for AutodiffField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn kind(&self) -> FieldKind {
        FieldKind::Autodiff
    }
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let tape = Tape::new();
        let xs = tape.vars(x);
        for (o, v) in out.iter_mut().zip((self.f)(&tape, t, &xs)) {
            *o = v.value();
        }
    }
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) {
        let n = self.dim;
        let tape = Tape::new();
        let xs = tape.vars(x);
        let ys = (self.f)(&tape, t, &xs);
        for (k, y) in ys.iter().enumerate() {
            // A non-finite adjoint leaves the row as NaN for the caller to catch.
            match tape.gradient(*y, &xs) {
                Ok(row) => jac[k * n..(k + 1) * n].copy_from_slice(&row),
                Err(_) => jac[k * n..(k + 1) * n].fill(f64::NAN),
            }
        }
    }
}

/// `sqrt(max(y, 0))` and its derivative (zero at and below the floor).
#[inline]
pub(crate) fn clamped_sqrt(y: f64) -> (f64, f64) {
    if y > 0.0 {
        let s = y.sqrt();
        (s, 0.5 / s)
    } else {
        (0.0, 0.0)
    }
}

/// Heston drift in Stratonovich form.
#[derive(Clone, Copy, Debug)]
pub struct HestonDrift {
    pub mu: f64,
    pub theta: f64,
    pub alpha: f64,
    pub rho: f64,
    pub beta: f64,
}

impl VectorField for HestonDrift {
    fn dim(&self) -> usize {
        2
    }
    fn kind(&self) -> FieldKind {
        FieldKind::ClosedForm
    }
    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let (y1, y2) = (x[0], x[1]);
        out[0] = (self.mu - y2 / 2.0 - self.rho * self.beta / 4.0) * y1;
        out[1] = self.alpha * (self.theta - y2) - self.beta * self.beta / 4.0;
    }
    fn jacobian(&self, _t: f64, x: &[f64], jac: &mut [f64]) {
        let (y1, y2) = (x[0], x[1]);
        jac[0] = self.mu - y2 / 2.0 - self.rho * self.beta / 4.0;
        jac[1] = -y1 / 2.0;
        jac[2] = 0.0;
        jac[3] = -self.alpha;
    }
}

/// First Heston diffusion field `(y1 sqrt(y2), rho beta sqrt(y2))`.
#[derive(Clone, Copy, Debug)]
pub struct HestonDiffusion1 {
    pub rho: f64,
    pub beta: f64,
}

impl VectorField for HestonDiffusion1 {
    fn dim(&self) -> usize {
        2
    }
    fn kind(&self) -> FieldKind {
        FieldKind::ClosedForm
    }
    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let (s, _) = clamped_sqrt(x[1]);
        out[0] = x[0] * s;
        out[1] = self.rho * self.beta * s;
    }
    fn jacobian(&self, _t: f64, x: &[f64], jac: &mut [f64]) {
        let (s, ds) = clamped_sqrt(x[1]);
        jac[0] = s;
        jac[1] = x[0] * ds;
        jac[2] = 0.0;
        jac[3] = self.rho * self.beta * ds;
    }
}

/// Second Heston diffusion field `(0, beta sqrt((1 - rho^2) y2))`.
#[derive(Clone, Copy, Debug)]
pub struct HestonDiffusion2 {
    pub rho: f64,
    pub beta: f64,
}

impl VectorField for HestonDiffusion2 {
    fn dim(&self) -> usize {
        2
    }
    fn kind(&self) -> FieldKind {
        FieldKind::ClosedForm
    }
    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let (s, _) = clamped_sqrt(x[1]);
        out[0] = 0.0;
        out[1] = self.beta * (1.0 - self.rho * self.rho).sqrt() * s;
    }
    fn jacobian(&self, _t: f64, x: &[f64], jac: &mut [f64]) {
        let (_, ds) = clamped_sqrt(x[1]);
        jac[0] = 0.0;
        jac[1] = 0.0;
        jac[2] = 0.0;
        jac[3] = self.beta * (1.0 - self.rho * self.rho).sqrt() * ds;
    }
}
