//! Normal filtering followed by vertex fitting.

use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::solver::{denoise_normals, DenoiseParams, Diagnostics};
use crate::vertex::update_vertices;

#[derive(Debug, Clone)]
pub struct Denoised {
    pub mesh: Mesh,
    /// Filtered face normals, before the vertex update.
    pub normals: Vec<Point>,
    pub diagnostics: Diagnostics,
    pub flipped_faces: usize,
}

/// Filters the face normals of `mesh` and refits its vertices to them.
pub fn denoise_mesh(mesh: &Mesh, params: &DenoiseParams, vertex_iters: usize) -> Result<Denoised> {
    let n0 = mesh.face_normals();
    let (normals, diagnostics) = denoise_normals(mesh, &n0, params)?;
    let update = update_vertices(mesh, &normals, vertex_iters)?;
    Ok(Denoised {
        mesh: mesh.with_vertices(update.vertices)?,
        normals,
        diagnostics,
        flipped_faces: update.flipped_faces,
    })
}
