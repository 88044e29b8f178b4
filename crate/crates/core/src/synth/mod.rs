//! Synthetic scale-free networks, precision matrices and Gaussian samples.

mod graphs;
mod precision;
mod rng;

pub use graphs::{ba_generate, hub_generate};
pub use precision::{precision_from_graph, sample_gaussian, GeneratorSpec, Instance};
pub use rng::Rng;
