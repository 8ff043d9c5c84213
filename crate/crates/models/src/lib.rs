//! Generative graph models over circuit DAGs: three encoders, a decoder that
//! only emits valid circuits, training, and latent-space search.

pub mod blocks;
pub mod config;
pub mod decoder;
pub mod encoder;
pub mod gradcheck;
pub mod latent;
pub mod model;
pub mod params;
pub mod search;
pub mod tape;
pub mod train;

pub use blocks::{block_optimize, block_partition, reassemble, Block};
pub use config::{ModelConfig, Variant, MAX_QUBITS};
pub use decoder::{type_mask, DecodeMode};
pub use gradcheck::{check_gradients, GradCheck};
pub use latent::{kld, reparameterize, LatentCode};
pub use model::{Model, ModelError};
pub use search::{perturb_search, reconstruct, select_best, Candidate, EvalContext, Provenance, SearchReport};
pub use train::{train, EpochStats, TrainConfig, TrainHistory};
