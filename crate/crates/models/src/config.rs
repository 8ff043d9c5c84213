use qcgen_core::dag::NODE_TYPE_COUNT;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Largest register the models accept; port and qubit embeddings are sized to it.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gru,
    Gcn,
    #[serde(rename = "deepgmg")]
    DeepGmg,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Gru, Variant::Gcn, Variant::DeepGmg];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gru => "gru",
            Variant::Gcn => "gcn",
            Variant::DeepGmg => "deepgmg",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown model variant `{s}` (expected gru, gcn or deepgmg)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub hidden_dim: usize,
    pub latent_dim: usize,
    pub gcn_rounds: usize,
    /// GRU encoder only.
    pub bidirectional: bool,
    /// DeepGMG encoder only.
    pub edge_feature_dim: usize,
    pub temperature: f64,
    pub node_type_count: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 128,
            latent_dim: 32,
            gcn_rounds: 3,
            bidirectional: true,
            edge_feature_dim: 8,
            temperature: 1.0,
            node_type_count: NODE_TYPE_COUNT,
        }
    }
}

impl ModelConfig {
    pub fn small(hidden_dim: usize, latent_dim: usize) -> Self {
        Self {
            hidden_dim,
            latent_dim,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.hidden_dim == 0 || self.latent_dim == 0 || self.edge_feature_dim == 0 {
            return Err("model dimensions must be positive".into());
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(format!("temperature must be positive, got {}", self.temperature));
        }
        if self.node_type_count != NODE_TYPE_COUNT {
            return Err(format!(
                "node_type_count is fixed at {NODE_TYPE_COUNT}, got {}",
                self.node_type_count
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = ModelConfig::default();
        assert_eq!((c.hidden_dim, c.latent_dim, c.gcn_rounds), (128, 32, 3));
        assert!(c.bidirectional);
        assert_eq!(c.node_type_count, 24);
        assert!(c.validate().is_ok());
        let bad = ModelConfig {
            node_type_count: 23,
            ..c.clone()
        };
        assert!(bad.validate().is_err());
        let cold = ModelConfig { temperature: 0.0, ..c };
        assert!(cold.validate().is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
            assert_eq!(serde_json::to_string(&v).unwrap(), format!("\"{}\"", v.name()));
        }
        assert!("vae".parse::<Variant>().is_err());
    }
}
