//! Quality measures against a ground-truth mesh.

use rayon::prelude::*;

use crate::distance::SurfaceDistance;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Per-face angle in degrees between two normal fields.
///
/// Evaluated as `atan2(|a x b|, a . b)`, which equals `acos(a . b)` for unit
/// vectors but stays exact near 0 and 180 degrees.
pub fn angular_errors(n: &[Point], n_gt: &[Point]) -> Result<Vec<f64>> {
    if n.len() != n_gt.len() {
        return Err(Error::LengthMismatch { expected: n_gt.len(), actual: n.len() });
    }
    Ok(n.iter().zip(n_gt).map(|(a, b)| a.cross(b).norm().atan2(a.dot(b)).to_degrees()).collect())
}

/// Mean angle in degrees between corresponding unit normals.
pub fn mean_angular_difference(n: &[Point], n_gt: &[Point]) -> Result<f64> {
    let errs = angular_errors(n, n_gt)?;
    if errs.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Area-weighted RMS distance from the vertices of `mesh` to the surface of
/// `ground_truth`. Each vertex is weighted by the area of its incident faces
/// on `mesh`.
pub fn vertex_error(mesh: &Mesh, ground_truth: &Mesh) -> Result<f64> {
    vertex_error_with(mesh, &SurfaceDistance::new(ground_truth))
}

pub fn vertex_error_with(mesh: &Mesh, surface: &SurfaceDistance) -> Result<f64> {
    if mesh.num_faces() == 0 {
        return Err(Error::EmptyMesh);
    }
    let v = mesh.vertices();
    let areas: Vec<f64> =
        mesh.faces().iter().map(|&[a, b, c]| 0.5 * (v[b] - v[a]).cross(&(v[c] - v[a])).norm()).collect();
    let total: f64 = areas.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyMesh);
    }
    let sum: f64 = (0..mesh.num_vertices())
        .into_par_iter()
        .map(|i| {
            let ring = mesh.vertex_faces_unchecked(i);
            if ring.is_empty() {
                return 0.0;
            }
            let w: f64 = ring.iter().map(|&t| areas[t]).sum();
            w * surface.distance_squared(&v[i])
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok((sum / (3.0 * total)).sqrt())
}
