//! Synthetic Gaussian vertex noise.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::mesh::{Geometry, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDirection {
    /// Independent offsets on every coordinate.
    #[default]
    Random,
    /// One offset along the area-weighted vertex normal.
    Normal,
}

impl FromStr for NoiseDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Self::Random),
            "normal" => Ok(Self::Normal),
            _ => Err(Error::InvalidParameter(format!("unknown noise direction `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation as a multiple of the mean edge length.
    pub sigma_rel: f64,
    pub direction: NoiseDirection,
    pub seed: u64,
}

/// Perturbs every vertex with zero-mean Gaussian noise of standard deviation
/// `sigma_rel` times the mean edge length. Connectivity is kept.
pub fn add_gaussian_noise(mesh: &Mesh, spec: &NoiseSpec) -> Result<Mesh> {
    if !(spec.sigma_rel >= 0.0 && spec.sigma_rel.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be non-negative, got {}", spec.sigma_rel)));
    }
    if spec.sigma_rel == 0.0 {
        return Ok(mesh.clone());
    }
    let geometry = Geometry::new(mesh)?;
    let std = spec.sigma_rel * geometry.mean_edge_length;
    let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vertices = match spec.direction {
        NoiseDirection::Random => {
            mesh.vertices().iter().map(|p| p + Point::from_fn(|_, _| normal.sample(&mut rng))).collect()
        }
        NoiseDirection::Normal => {
            let mut vn = vec![Point::zeros(); mesh.num_vertices()];
            for (f, &[a, b, c]) in mesh.faces().iter().enumerate() {
                let w = geometry.face_normal[f] * geometry.face_area[f];
                vn[a] += w;
                vn[b] += w;
                vn[c] += w;
            }
            mesh.vertices()
                .iter()
                .zip(vn)
                .map(|(p, n)| {
                    let offset = normal.sample(&mut rng);
                    let len = n.norm();
                    if len > 0.0 {
                        p + n * (offset / len)
                    } else {
                        *p
                    }
                })
                .collect()
        }
    };
    mesh.with_vertices(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn spec(sigma_rel: f64, seed: u64) -> NoiseSpec {
        NoiseSpec { sigma_rel, direction: NoiseDirection::Random, seed }
    }

    #[test]
    fn zero_sigma_is_identity() {
        let m = shapes::cube();
        assert_eq!(add_gaussian_noise(&m, &spec(0.0, 1)).unwrap().vertices(), m.vertices());
    }

    #[test]
    fn same_seed_same_mesh() {
        let m = shapes::icosphere(2);
        for direction in [NoiseDirection::Random, NoiseDirection::Normal] {
            let s = NoiseSpec { sigma_rel: 0.3, direction, seed: 9 };
            let a = add_gaussian_noise(&m, &s).unwrap();
            let b = add_gaussian_noise(&m, &s).unwrap();
            assert_eq!(a.vertices(), b.vertices());
            let c = add_gaussian_noise(&m, &NoiseSpec { seed: 10, ..s }).unwrap();
            assert_ne!(a.vertices(), c.vertices());
        }
    }

    #[test]
    fn empirical_std_matches() {
        // 3 * 3426 coordinates, over 10^4 samples
        let m = shapes::subdivide(&shapes::subdivide(&shapes::subdivide(&shapes::beveled_cube(0.3, 1))));
        let unit = Geometry::new(&m).unwrap().mean_edge_length;
        let noisy = add_gaussian_noise(&m, &spec(0.2, 5)).unwrap();
        let d: Vec<f64> = noisy
            .vertices()
            .iter()
            .zip(m.vertices())
            .flat_map(|(a, b)| (a - b).iter().copied().collect::<Vec<_>>())
            .collect();
        assert!(d.len() >= 10_000);
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        let target = 0.2 * unit;
        assert!((var.sqrt() - target).abs() < 0.05 * target);
    }

    #[test]
    fn normal_direction_moves_along_normals() {
        let m = shapes::grid(4, 4);
        let noisy =
            add_gaussian_noise(&m, &NoiseSpec { sigma_rel: 0.5, direction: NoiseDirection::Normal, seed: 3 }).unwrap();
        for (a, b) in noisy.vertices().iter().zip(m.vertices()) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
        assert!(noisy.vertices().iter().any(|p| p.z != 0.0));
    }

    #[test]
    fn direction_parses() {
        assert_eq!("normal".parse::<NoiseDirection>().unwrap(), NoiseDirection::Normal);
        assert!("sideways".parse::<NoiseDirection>().is_err());
    }
}
