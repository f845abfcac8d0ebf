pub mod distance;
pub mod error;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod noise;
pub mod ops;
pub mod pipeline;
pub mod shapes;
pub mod solver;
pub mod vertex;

pub use error::{Error, Result};
pub use mesh::{Geometry, Mesh, Point};
pub use metrics::{mean_angular_difference, vertex_error};
pub use noise::{add_gaussian_noise, NoiseDirection, NoiseSpec};
pub use pipeline::{denoise_mesh, Denoised};
pub use solver::{denoise_normals, DenoiseParams, Diagnostics};
pub use vertex::{update_vertices, VertexUpdate};
