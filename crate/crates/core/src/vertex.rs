//! Fitting vertex positions to a filtered normal field.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Default number of vertex sweeps.
pub const DEFAULT_VERTEX_ITERS: usize = 35;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexUpdate {
    pub vertices: Vec<Point>,
    /// Faces whose final normal points away from the target normal.
    pub flipped_faces: usize,
}

/// Moves every vertex toward the planes through the centroids of its incident
/// faces with the target normals:
///
/// `v_i += 1/|M1(v_i)| * sum_t N_t (N_t . (c_t - v_i))`
///
/// Each sweep reads only the previous sweep's positions.
pub fn update_vertices(mesh: &Mesh, normals: &[Point], iterations: usize) -> Result<VertexUpdate> {
    if normals.len() != mesh.num_faces() {
        return Err(Error::LengthMismatch { expected: mesh.num_faces(), actual: normals.len() });
    }
    let faces = mesh.faces();
    let mut pos = mesh.vertices().to_vec();
    for _ in 0..iterations {
        let centroids: Vec<Point> = faces.iter().map(|&[a, b, c]| (pos[a] + pos[b] + pos[c]) / 3.0).collect();
        pos = (0..pos.len())
            .into_par_iter()
            .map(|i| {
                let ring = mesh.vertex_faces_unchecked(i);
                if ring.is_empty() {
                    return pos[i];
                }
                let step: Point = ring.iter().map(|&t| normals[t] * normals[t].dot(&(centroids[t] - pos[i]))).sum();
                pos[i] + step / ring.len() as f64
            })
            .collect();
    }
    let flipped_faces = faces
        .iter()
        .zip(normals)
        .filter(|(&[a, b, c], n)| (pos[b] - pos[a]).cross(&(pos[c] - pos[a])).dot(n) < 0.0)
        .count();
    if flipped_faces > 0 {
        log::warn!("vertex update left {flipped_faces} faces flipped against the filtered normals");
    }
    Ok(VertexUpdate { vertices: pos, flipped_faces })
}

/// `sum_t s_t sum_{(i,j) in t} (N_t . (v_i - v_j))^2` with areas from `vertices`.
pub fn orthogonality_residual(mesh: &Mesh, vertices: &[Point], normals: &[Point]) -> f64 {
    mesh.faces()
        .iter()
        .zip(normals)
        .map(|(&[a, b, c], n)| {
            let area = 0.5 * (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a])).norm();
            let r: f64 =
                [(a, b), (b, c), (c, a)].iter().map(|&(i, j)| n.dot(&(vertices[i] - vertices[j])).powi(2)).sum();
            area * r
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy(mesh: &Mesh, amount: f64, seed: u64) -> Mesh {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = mesh.vertices().iter().map(|p| p + Point::from_fn(|_, _| rng.random_range(-amount..amount))).collect();
        mesh.with_vertices(v).unwrap()
    }

    #[test]
    fn zero_iterations_is_identity() {
        let m = noisy(&shapes::icosphere(1), 0.05, 1);
        let out = update_vertices(&m, &shapes::icosphere(1).face_normals(), 0).unwrap();
        assert_eq!(out.vertices, m.vertices());
    }

    #[test]
    fn planar_mesh_is_fixed() {
        let m = shapes::grid(4, 3);
        let out = update_vertices(&m, &vec![Point::z(); m.num_faces()], 35).unwrap();
        for (a, b) in out.vertices.iter().zip(m.vertices()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(out.flipped_faces, 0);
    }

    #[test]
    fn residual_decreases_on_noisy_cube() {
        let clean = shapes::subdivide(&shapes::subdivide(&shapes::cube()));
        let target = clean.face_normals();
        let m = noisy(&clean, 0.02, 2);
        let mut prev = orthogonality_residual(&m, m.vertices(), &target);
        let start = prev;
        let mut cur = m.clone();
        for _ in 0..35 {
            let v = update_vertices(&cur, &target, 1).unwrap().vertices;
            let r = orthogonality_residual(&cur, &v, &target);
            assert!(r <= prev + 1e-15);
            prev = r;
            cur = cur.with_vertices(v).unwrap();
        }
        assert!(prev < start);
    }

    #[test]
    fn rejects_wrong_length() {
        let m = shapes::cube();
        assert!(matches!(update_vertices(&m, &[Point::z()], 1), Err(Error::LengthMismatch { .. })));
    }
}
