use std::sync::Arc;

use super::field::{
    FieldKind, FieldRef, HestonDiffusion1, HestonDiffusion2, HestonDrift, LinearField, VectorField,
    MAX_STATE_DIM,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Bsm,
    Heston,
    Custom,
}

/// American put on the first state coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Payoff {
    pub strike: f64,
}

impl Payoff {
    pub fn put(strike: f64) -> Self {
        Payoff { strike }
    }

    /// `max(K - S, 0)` where `S = x[0]`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.strike - x[0]).max(0.0)
    }
}

pub fn payoff_eval(p: &Payoff, x: &[f64]) -> f64 {
    p.eval(x)
}

/// Parameters of the Heston instance, in the order the constructor takes them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HestonParams {
    pub s0: f64,
    pub u0: f64,
    pub mu: f64,
    pub theta: f64,
    pub alpha: f64,
    pub rho: f64,
    pub beta: f64,
}

impl HestonParams {
    /// The configuration used in the pricing experiments.
    pub fn reference() -> Self {
        HestonParams {
            s0: 100.0,
            u0: 0.32,
            mu: 0.0,
            theta: 0.25,
            alpha: 3.0,
            rho: 0.3,
            beta: 0.4,
        }
    }
}

/// An SDE in Stratonovich form, `dX = sum_i V_i I_N(X) o dB^i`, with `B^0(t) = t`.
#[derive(Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    fields: Vec<FieldRef>,
    pub x0: Vec<f64>,
    pub payoff: Payoff,
    /// Index of a coordinate that must stay non-negative (Heston variance).
    nonneg_coordinate: Option<usize>,
}

impl std::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSpec")
            .field("kind", &self.kind)
            .field("state_dim", &self.state_dim())
            .field("noise_dim", &self.noise_dim())
            .field("x0", &self.x0)
            .field("payoff", &self.payoff)
            .finish()
    }
}

impl ModelSpec {
    /// Builds a model from `d + 1` fields (index 0 is the drift `V_0`).
    pub fn new(kind: ModelKind, fields: Vec<FieldRef>, x0: Vec<f64>, payoff: Payoff) -> Result<Self> {
        if fields.len() < 2 {
            return Err(Error::invalid(
                "fields",
                "need a drift and at least one diffusion field",
            ));
        }
        let n = x0.len();
        if n == 0 || n > MAX_STATE_DIM {
            return Err(Error::UnsupportedDimension {
                requested: n,
                max: MAX_STATE_DIM,
            });
        }
        if let Some(bad) = fields.iter().position(|f| f.dim() != n) {
            return Err(Error::Shape(format!(
                "field {bad} has dimension {} but the state has {n}",
                fields[bad].dim()
            )));
        }
        Ok(ModelSpec {
            kind,
            fields,
            x0,
            payoff,
            nonneg_coordinate: None,
        })
    }

    pub fn with_strike(mut self, strike: f64) -> Self {
        self.payoff = Payoff::put(strike);
        self
    }

    pub fn state_dim(&self) -> usize {
        self.x0.len()
    }

    /// Number of driving Brownian motions `d`.
    pub fn noise_dim(&self) -> usize {
        self.fields.len() - 1
    }

    /// All `d + 1` Stratonovich fields.
    pub fn fields(&self) -> &[FieldRef] {
        &self.fields
    }

    pub fn drift(&self) -> &dyn VectorField {
        self.fields[0].as_ref()
    }

    /// Diffusion field `V_i`, `1 <= i <= d`.
    pub fn diffusion(&self, i: usize) -> &dyn VectorField {
        self.fields[i].as_ref()
    }

    /// Whether a state lies in the region where the fields are unclamped.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        match self.nonneg_coordinate {
            Some(i) => x[i] >= 0.0,
            None => true,
        }
    }

    pub fn ito_drift(&self) -> ItoDrift {
        ito_drift(self)
    }
}

/// Black-Scholes-Merton: `V_0 I(y) = (mu - sigma^2 / 2) y`, `V_1 I(y) = sigma y`.
pub fn make_bsm_model(s0: f64, mu: f64, sigma: f64) -> Result<ModelSpec> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    if !(s0 > 0.0) {
        return Err(Error::invalid("S0", format!("must be positive, got {s0}")));
    }
    let drift: FieldRef = Arc::new(LinearField {
        coef: mu - sigma * sigma / 2.0,
    });
    let diffusion: FieldRef = Arc::new(LinearField { coef: sigma });
    ModelSpec::new(
        ModelKind::Bsm,
        vec![drift, diffusion],
        vec![s0],
        Payoff::put(s0),
    )
}

/// Heston stochastic volatility in Stratonovich form on `(S, U)`.
pub fn make_heston_model(p: HestonParams) -> Result<ModelSpec> {
    if !(p.s0 > 0.0) {
        return Err(Error::invalid("S0", format!("must be positive, got {}", p.s0)));
    }
    if !(p.u0 > 0.0) {
        return Err(Error::invalid("U0", format!("must be positive, got {}", p.u0)));
    }
    if !(p.beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be positive, got {}", p.beta)));
    }
    if !(p.rho.abs() < 1.0) {
        return Err(Error::invalid("rho", format!("|rho| must be < 1, got {}", p.rho)));
    }
    if !(p.alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("must be positive, got {}", p.alpha)));
    }
    if !(p.theta > 0.0) {
        return Err(Error::invalid("theta", format!("must be positive, got {}", p.theta)));
    }
    let fields: Vec<FieldRef> = vec![
        Arc::new(HestonDrift {
            mu: p.mu,
            theta: p.theta,
            alpha: p.alpha,
            rho: p.rho,
            beta: p.beta,
        }),
        Arc::new(HestonDiffusion1 {
            rho: p.rho,
            beta: p.beta,
        }),
        Arc::new(HestonDiffusion2 {
            rho: p.rho,
            beta: p.beta,
        }),
    ];
    let mut m = ModelSpec::new(
        ModelKind::Heston,
        fields,
        vec![p.s0, p.u0],
        Payoff::put(p.s0),
    )?;
    m.nonneg_coordinate = Some(1);
    Ok(m)
}

/// Ito drift `(V~_0 I)^k = (V_0 I)^k + 1/2 sum_i V_i (V_i I)^k`.
#[derive(Clone, Debug)]
pub struct ItoDrift {
    fields: Vec<FieldRef>,
}

pub fn ito_drift(model: &ModelSpec) -> ItoDrift {
    ItoDrift {
        fields: model.fields.clone(),
    }
}

impl VectorField for ItoDrift {
    fn dim(&self) -> usize {
        self.fields[0].dim()
    }

    fn kind(&self) -> FieldKind {
        self.fields
            .iter()
            .map(|f| f.kind())
            .find(|k| *k != FieldKind::ClosedForm)
            .unwrap_or(FieldKind::ClosedForm)
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        self.fields[0].eval(t, x, out);
        let mut corr = [0.0; MAX_STATE_DIM];
        for f in &self.fields[1..] {
            f.self_derivative(t, x, &mut corr[..n]);
            for k in 0..n {
                out[k] += 0.5 * corr[k];
            }
        }
    }

    /// Not needed by any scheme; finite differences of `eval`.
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) {
        let n = self.dim();
        let mut xp = [0.0; MAX_STATE_DIM];
        let mut fp = [0.0; MAX_STATE_DIM];
        let mut fm = [0.0; MAX_STATE_DIM];
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            xp[..n].copy_from_slice(x);
            xp[j] = x[j] + h;
            self.eval(t, &xp[..n], &mut fp[..n]);
            xp[j] = x[j] - h;
            self.eval(t, &xp[..n], &mut fm[..n]);
            for k in 0..n {
                jac[k * n + j] = (fp[k] - fm[k]) / (2.0 * h);
            }
        }
    }
}
