//! Adaptive steganography for triangle meshes.
//!
//! Vertex coordinates are quantized to a fixed number of decimals and viewed
//! as bitplanes. Every candidate coordinate change gets a cost from how much
//! it disturbs the local normal-voting-tensor features; the cheapest change
//! distribution that carries the payload is a Gibbs distribution, and it is
//! realized bitplane by bitplane with syndrome-trellis codes.
//!
//! ```no_run
//! use meshsteg::prelude::*;
//!
//! let (cover, _) = read_mesh("bunny.off".as_ref()).unwrap();
//! let changes = ChangeSet::preset(3.0);
//! let costs = compute_costs(&cover, 6, changes.steps(), Profile::IfpdCs, CostOptions::default()).unwrap();
//! let message = bytes_to_bits(b"hello");
//! let out = embed(&cover, &message, &EmbedConfig::new(changes), &costs).unwrap();
//! assert_eq!(extract(&out.stego, &out.params).unwrap(), message);
//! ```

pub mod cli;
pub mod distortion;
pub mod error;
pub mod features;
pub mod fixtures;
pub mod gibbs;
pub mod layered;
pub mod mesh;
pub mod params;
pub mod quant;
pub mod stc;
pub mod vec3;

pub mod prelude {
    pub use crate::distortion::{compute_costs, ifpd_cost_table, CostOptions, CostTable, Profile};
    pub use crate::error::{ParseError, StegoError};
    pub use crate::layered::{bits_to_bytes, bytes_to_bits, embed, extract, ChangeSet, EmbedConfig, Embedding};
    pub use crate::mesh::{parse_mesh, read_mesh, write_mesh, Mesh, MeshFormat};
    pub use crate::params::StegoParams;
    pub use crate::quant::Channel;
}
