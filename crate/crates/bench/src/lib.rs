//! Shared inputs for the benchmarks.

use semisparse::{add_gaussian_noise, shapes, Mesh, NoiseDirection, NoiseSpec};

/// Rounded cube with `12 n^2` faces and 0.2 mean-edge-length noise.
pub fn noisy_rounded_cube(n: usize) -> (Mesh, Mesh) {
    let clean = shapes::rounded_cube(n, 0.4);
    let spec = NoiseSpec { sigma_rel: 0.2, direction: NoiseDirection::Random, seed: 1 };
    let noisy = add_gaussian_noise(&clean, &spec).expect("noise on a valid mesh");
    (clean, noisy)
}
