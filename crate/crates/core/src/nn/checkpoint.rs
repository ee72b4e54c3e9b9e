//! Binary parameter checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      b"SDNC"
//! version    u32 (= 1)
//! seed       u64
//! iteration  u64
//! n_nets     u32
//! per net:
//!   n_layers u32
//!   per layer: input u32, output u32, bias u8, relu u8
//!   n_params u64
//!   params   n_params x f64
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::mlp::Mlp;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SDNC";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub seed: u64,
    pub iteration: u64,
    pub nets: Vec<Mlp>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&self.seed.to_le_bytes());
        b.extend_from_slice(&self.iteration.to_le_bytes());
        b.extend_from_slice(&(self.nets.len() as u32).to_le_bytes());
        for net in &self.nets {
            b.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
            for l in net.layers() {
                b.extend_from_slice(&(l.input as u32).to_le_bytes());
                b.extend_from_slice(&(l.output as u32).to_le_bytes());
                b.push(l.bias as u8);
                b.push(l.relu as u8);
            }
            b.extend_from_slice(&(net.param_count() as u64).to_le_bytes());
            for p in net.params() {
                b.extend_from_slice(&p.to_le_bytes());
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Config("not a checkpoint file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != VERSION {
            return Err(Error::Config(format!("unsupported checkpoint version {version}")));
        }
        let seed = u64::from_le_bytes(take(&mut r)?);
        let iteration = u64::from_le_bytes(take(&mut r)?);
        let n_nets = u32::from_le_bytes(take(&mut r)?) as usize;
        let mut nets = Vec::with_capacity(n_nets);
        for _ in 0..n_nets {
            let n_layers = u32::from_le_bytes(take(&mut r)?) as usize;
            let mut spec = Vec::with_capacity(n_layers);
            for _ in 0..n_layers {
                let input = u32::from_le_bytes(take(&mut r)?) as usize;
                let output = u32::from_le_bytes(take(&mut r)?) as usize;
                let [bias, relu] = take::<2>(&mut r)?;
                spec.push((input, output, bias != 0, relu != 0));
            }
            let n = u64::from_le_bytes(take(&mut r)?) as usize;
            if r.len() < n * 8 {
                return Err(Error::Config("checkpoint truncated".into()));
            }
            let params = (0..n)
                .map(|_| take(&mut r).map(f64::from_le_bytes))
                .collect::<Result<Vec<_>>>()?;
            nets.push(Mlp::from_parts(&spec, params, seed)?);
        }
        if !r.is_empty() {
            return Err(Error::Config("trailing bytes after checkpoint".into()));
        }
        Ok(Checkpoint {
            seed,
            iteration,
            nets,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn read_exact(r: &mut &[u8], out: &mut [u8]) -> Result<()> {
    r.read_exact(out)
        .map_err(|_| Error::Config("checkpoint truncated".into()))
}

fn take<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    read_exact(r, &mut b)?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ProjectionInit;

    fn sample() -> Checkpoint {
        Checkpoint {
            seed: 17,
            iteration: 200,
            nets: vec![
                Mlp::new(3, 1, 17, ProjectionInit::HeUniform).unwrap(),
                Mlp::new(4, 1, 18, ProjectionInit::Zero).unwrap(),
            ],
        }
    }

    #[test]
    fn round_trip_bytes() {
        let c = sample();
        let back = Checkpoint::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!(back.iteration, 200);
        assert_eq!(back.nets.len(), 2);
        for (a, b) in c.nets.iter().zip(&back.nets) {
            assert_eq!(a.layers(), b.layers());
            assert!(a.params().iter().zip(b.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn round_trip_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.ckpt");
        sample().save(&p).unwrap();
        assert_eq!(Checkpoint::load(&p).unwrap().nets[1].params(), sample().nets[1].params());
    }

    #[test]
    fn header_is_documented_layout() {
        let b = sample().to_bytes();
        assert_eq!(&b[..4], b"SDNC");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 17);
    }

    #[test]
    fn corrupt_input_rejected() {
        let b = sample().to_bytes();
        assert!(Checkpoint::from_bytes(&b[..b.len() - 3]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut extra = b;
        extra.push(0);
        assert!(Checkpoint::from_bytes(&extra).is_err());
        assert!(Checkpoint::load(Path::new("/nonexistent/dir/x.ckpt")).is_err());
    }
}
