//! Versioned text checkpoints. The first line is a fixed magic string with
//! the format version; the rest is one JSON document. Floats are written in
//! shortest round-trip form so a load reproduces every bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Adam, MlpSpec, Network};
use crate::error::{Error, Result};

pub const MAGIC: &str = "swarm-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Free-form role tag, e.g. `teacher-8` or `division`.
    pub role: String,
    pub spec: MlpSpec,
    pub params: Vec<f64>,
    pub optimizer: Option<Adam>,
}

impl Checkpoint {
    pub fn from_network(role: &str, net: &Network, optimizer: Option<&Adam>) -> Self {
        Checkpoint {
            role: role.to_string(),
            spec: net.spec.clone(),
            params: net.params.0.clone(),
            optimizer: optimizer.cloned(),
        }
    }

    pub fn network(&self) -> Result<Network> {
        Network::new(self.spec.clone(), super::ParamVector(self.params.clone()))
    }

    pub fn to_text(&self) -> Result<String> {
        if self.params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("refusing to checkpoint non-finite parameters".into()));
        }
        let body = serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))?;
        Ok(format!("{MAGIC} v{VERSION}\n{body}\n"))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (head, body) = text.split_once('\n').ok_or(Error::Parse {
            line: 1,
            message: "truncated checkpoint".into(),
        })?;
        let expected = format!("{MAGIC} v{VERSION}");
        if head.trim() != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected `{expected}`, found `{head}`"),
            });
        }
        serde_json::from_str(body).map_err(|e| Error::Parse {
            line: 2 + e.line().saturating_sub(1),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::HeadKind;
    use rand::SeedableRng;

    #[test]
    fn round_trip_is_bit_exact() {
        let spec = MlpSpec::new(5, &[7, 3], 2, HeadKind::Gaussian);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let net = Network::init(spec, &mut rng, -0.5).unwrap();
        let mut opt = Adam::new(net.params.len(), 3e-4);
        let g = super::super::ParamVector(net.params.0.iter().map(|v| v.sin() / 3.0).collect());
        let stepped = opt.step(&net.params, &g);
        let net = Network::new(net.spec.clone(), stepped).unwrap();
        let ck = Checkpoint::from_network("teacher-4", &net, Some(&opt));
        let text = ck.to_text().unwrap();
        let back = Checkpoint::from_text(&text).unwrap();
        assert_eq!(back, ck);
        for (a, b) in back.params.iter().zip(&ck.params) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_text().unwrap(), text);
    }

    #[test]
    fn wrong_magic_rejected() {
        assert!(Checkpoint::from_text("something else\n{}").is_err());
    }
}
