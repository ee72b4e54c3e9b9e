use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nn::{Mlp, ProjectionInit};
use crate::schemes::Scheme;
use crate::sde::ModelSpec;

/// Architecture of the martingale network: which scheme its layers follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NetKind {
    /// Euler-Maruyama layers over the asset's Euler paths.
    ResNet,
    /// Ninomiya-Victoir layers (RK5 flows) over the asset's NV paths.
    NvNet,
    /// Ninomiya-Ninomiya layers over the asset's NN paths.
    NnNet,
}

impl NetKind {
    pub fn scheme(self) -> Scheme {
        match self {
            NetKind::ResNet => Scheme::Em,
            NetKind::NvNet => Scheme::Nv,
            NetKind::NnNet => Scheme::Nn,
        }
    }
}

impl FromStr for NetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "resnet" | "resnet-em" => Ok(NetKind::ResNet),
            "nvnet" => Ok(NetKind::NvNet),
            "nnet" | "nnnet" => Ok(NetKind::NnNet),
            other => Err(Error::Usage(format!(
                "unknown network `{other}` (expected resnet, nvnet or nnet)"
            ))),
        }
    }
}

impl fmt::Display for NetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetKind::ResNet => "resnet",
            NetKind::NvNet => "nvnet",
            NetKind::NnNet => "nnet",
        })
    }
}

/// The trainable fields `V^M_1 .. V^M_d` of the martingale; `V^M_0 = 0`.
///
/// Field `j` is `field_scale * mlp_j(t / T, x / x_scale, m / m_scale)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleNet {
    pub kind: NetKind,
    pub mlps: Vec<Mlp>,
    pub horizon: f64,
    pub x_scale: Vec<f64>,
    pub m_scale: f64,
    pub field_scale: f64,
}

impl MartingaleNet {
    /// One network per Brownian motion of `model`, seeded `seed, seed + 1, ..`.
    ///
    /// Inputs are scaled by the initial state and the strike; outputs are in units of the strike.
    pub fn new(kind: NetKind, model: &ModelSpec, horizon: f64, seed: u64, init: ProjectionInit) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("T", format!("must be positive, got {horizon}")));
        }
        let n = model.state_dim();
        let mlps = (0..model.noise_dim())
            .map(|j| Mlp::new(n + 2, 1, seed.wrapping_add(j as u64), init))
            .collect::<Result<Vec<_>>>()?;
        let strike = model.payoff.strike.abs().max(f64::MIN_POSITIVE);
        Ok(MartingaleNet {
            kind,
            mlps,
            horizon,
            x_scale: model.x0.iter().map(|v| if *v != 0.0 { v.abs() } else { 1.0 }).collect(),
            m_scale: strike,
            field_scale: strike,
        })
    }

    /// Replaces every network by one that outputs `value` (in field units) everywhere.
    pub fn with_constant_fields(mut self, values: &[f64]) -> Result<Self> {
        if values.len() != self.mlps.len() {
            return Err(Error::Shape(format!(
                "{} constant values for {} fields",
                values.len(),
                self.mlps.len()
            )));
        }
        let input = self.input_dim();
        for (net, &v) in self.mlps.iter_mut().zip(values) {
            *net = Mlp::constant(input, 1, v / self.field_scale)?;
        }
        Ok(self)
    }

    pub fn noise_dim(&self) -> usize {
        self.mlps.len()
    }

    pub fn state_dim(&self) -> usize {
        self.x_scale.len()
    }

    pub fn input_dim(&self) -> usize {
        self.state_dim() + 2
    }

    /// Position of `m` in the network input.
    pub(crate) fn m_index(&self) -> usize {
        self.state_dim() + 1
    }

    pub fn encode(&self, t: f64, x: &[f64], m: f64, out: &mut [f64]) {
        out[0] = t / self.horizon;
        for (k, (&xk, &s)) in x.iter().zip(&self.x_scale).enumerate() {
            out[1 + k] = xk / s;
        }
        out[self.m_index()] = m / self.m_scale;
    }

    /// `V^M_j(t, x, m)` for every `j`.
    pub fn field_values(&self, t: f64, x: &[f64], m: f64) -> Result<Vec<f64>> {
        let mut input = vec![0.0; self.input_dim()];
        self.encode(t, x, m, &mut input);
        self.mlps
            .iter()
            .map(|net| Ok(self.field_scale * net.forward(&input)?[0]))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.mlps.iter().map(Mlp::param_count).sum()
    }

    /// Start of each network's block in the flat parameter vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut o = 0;
        self.mlps
            .iter()
            .map(|n| {
                let s = o;
                o += n.param_count();
                s
            })
            .collect()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        self.mlps.iter().flat_map(|n| n.params().iter().copied()).collect()
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "{} parameters for a network with {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut o = 0;
        for n in &mut self.mlps {
            let c = n.param_count();
            n.params_mut().copy_from_slice(&flat[o..o + c]);
            o += c;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{make_bsm_model, make_heston_model, HestonParams};

    #[test]
    fn one_network_per_noise() {
        let h = make_heston_model(HestonParams::reference()).unwrap();
        let net = MartingaleNet::new(NetKind::NvNet, &h, 1.0, 3, ProjectionInit::Zero).unwrap();
        assert_eq!(net.mlps.len(), 2);
        assert_eq!(net.input_dim(), 4);
        assert_eq!(net.field_values(0.5, &[90.0, 0.2], 1.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn flat_parameters_round_trip() {
        let m = make_bsm_model(100.0, 0.0, 0.32).unwrap();
        let mut net = MartingaleNet::new(NetKind::ResNet, &m, 1.0, 1, ProjectionInit::HeUniform).unwrap();
        let mut flat = net.params_flat();
        flat[5] += 1.0;
        net.set_params_flat(&flat).unwrap();
        assert_eq!(net.params_flat(), flat);
        assert!(net.set_params_flat(&flat[1..]).is_err());
        assert_eq!(net.offsets(), vec![0]);
    }

    #[test]
    fn constant_fields() {
        let m = make_bsm_model(100.0, 0.0, 0.32).unwrap();
        let net = MartingaleNet::new(NetKind::ResNet, &m, 1.0, 1, ProjectionInit::Zero)
            .unwrap()
            .with_constant_fields(&[2.5])
            .unwrap();
        let v = net.field_values(0.3, &[80.0], -4.0).unwrap()[0];
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn tags() {
        assert_eq!("NVnet".parse::<NetKind>().unwrap(), NetKind::NvNet);
        assert_eq!("resnet-em".parse::<NetKind>().unwrap().scheme(), Scheme::Em);
        assert!("lstm".parse::<NetKind>().is_err());
    }
}
