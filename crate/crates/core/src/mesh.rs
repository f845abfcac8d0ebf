//! Indexed triangle mesh with the connectivity tables used by the discrete
//! operators.
//!
//! Besides vertices, edges and faces, a [`Mesh`] owns three *lines* per face.
//! A line joins the face barycenter to one of its corners; line `3 * f + j`
//! belongs to face `f` and touches its `j`-th vertex. For each line we record
//! the two face edges meeting at that corner: `e_plus` enters the corner and
//! `e_minus` leaves it when walking the face counterclockwise. The faces on the
//! far side of those edges (`face_plus`, `face_minus`) form the three-face
//! stencil of the second-order difference.
//!
//! Edges are oriented from the lower to the higher vertex index. A face edge has
//! sign `+1` when the face traverses it in that direction and `-1` otherwise.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// One edge of a face together with its relative orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceEdge {
    pub edge: usize,
    /// `+1.0` if the face walks the edge from its lower to its higher vertex.
    pub sign: f64,
}

/// The one or two faces incident to an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFaces {
    faces: [usize; 2],
    count: u8,
}

impl EdgeFaces {
    pub fn as_slice(&self) -> &[usize] {
        &self.faces[..self.count as usize]
    }

    pub fn is_boundary(&self) -> bool {
        self.count < 2
    }

    /// The face across the edge from `face`, if any.
    pub fn opposite(&self, face: usize) -> Option<usize> {
        match self.as_slice() {
            [a, b] if *a == face => Some(*b),
            [a, b] if *b == face => Some(*a),
            _ => None,
        }
    }
}

/// Barycenter-to-vertex segment of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line {
    pub face: usize,
    /// Local corner index in `0..3`.
    pub corner: usize,
    pub vertex: usize,
    pub e_plus: usize,
    pub e_minus: usize,
    pub face_plus: Option<usize>,
    pub face_minus: Option<usize>,
}

impl Line {
    /// True when either incident edge lies on the boundary; such lines carry no
    /// second-order difference.
    pub fn is_boundary(&self) -> bool {
        self.face_plus.is_none() || self.face_minus.is_none()
    }
}

/// Immutable triangle mesh with full adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    face_edges: Vec<[FaceEdge; 3]>,
    edge_faces: Vec<EdgeFaces>,
    lines: Vec<Line>,
    vertex_faces: Vec<Vec<usize>>,
    vertex_neighbors: Vec<Vec<usize>>,
}

impl Mesh {
    /// Builds every connectivity table from raw vertex positions and
    /// counterclockwise index triples.
    ///
    /// Fails on out-of-range indices, repeated indices within a face, edges
    /// shared by more than two faces, and neighbouring faces with opposite
    /// winding.
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= nv {
                    return Err(Error::IndexOutOfRange { index: v, len: nv });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateFace { face: fi });
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 2);
        let mut edges = Vec::with_capacity(faces.len() * 3 / 2 + 3);
        let mut edge_faces: Vec<EdgeFaces> = Vec::with_capacity(edges.capacity());
        let mut edge_signs: Vec<[f64; 2]> = Vec::with_capacity(edges.capacity());
        let mut face_edges = Vec::with_capacity(faces.len());

        for (fi, f) in faces.iter().enumerate() {
            let mut fe = [FaceEdge { edge: 0, sign: 0.0 }; 3];
            for j in 0..3 {
                let (a, b) = (f[j], f[(j + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let sign = if a < b { 1.0 } else { -1.0 };
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_faces.push(EdgeFaces { faces: [usize::MAX; 2], count: 0 });
                    edge_signs.push([0.0; 2]);
                    edges.len() - 1
                });
                let slot = &mut edge_faces[e];
                if slot.count == 2 {
                    return Err(Error::NonManifoldEdge { a: key.0, b: key.1 });
                }
                edge_signs[e][slot.count as usize] = sign;
                slot.faces[slot.count as usize] = fi;
                slot.count += 1;
                fe[j] = FaceEdge { edge: e, sign };
            }
            face_edges.push(fe);
        }

        for (e, ef) in edge_faces.iter().enumerate() {
            if ef.count == 2 && edge_signs[e][0] * edge_signs[e][1] > 0.0 {
                return Err(Error::InconsistentOrientation { a: edges[e][0], b: edges[e][1] });
            }
        }

        let mut lines = Vec::with_capacity(faces.len() * 3);
        for (fi, f) in faces.iter().enumerate() {
            for j in 0..3 {
                let e_plus = face_edges[fi][(j + 2) % 3].edge;
                let e_minus = face_edges[fi][j].edge;
                lines.push(Line {
                    face: fi,
                    corner: j,
                    vertex: f[j],
                    e_plus,
                    e_minus,
                    face_plus: edge_faces[e_plus].opposite(fi),
                    face_minus: edge_faces[e_minus].opposite(fi),
                });
            }
        }

        let mut vertex_faces = vec![Vec::new(); nv];
        let mut vertex_neighbors = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }
        for e in &edges {
            vertex_neighbors[e[0]].push(e[1]);
            vertex_neighbors[e[1]].push(e[0]);
        }
        for n in &mut vertex_neighbors {
            n.sort_unstable();
        }

        Ok(Self { vertices, faces, edges, face_edges, edge_faces, lines, vertex_faces, vertex_neighbors })
    }

    /// Same connectivity, new positions.
    pub fn with_vertices(&self, vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::LengthMismatch { expected: self.vertices.len(), actual: vertices.len() });
        }
        Ok(Self { vertices, ..self.clone() })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn face_edges(&self) -> &[[FaceEdge; 3]] {
        &self.face_edges
    }

    pub fn edge_faces(&self) -> &[EdgeFaces] {
        &self.edge_faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_faces[e].is_boundary()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edge_faces.iter().filter(|ef| !ef.is_boundary()).count()
    }

    pub fn is_closed(&self) -> bool {
        self.edge_faces.iter().all(|ef| !ef.is_boundary())
    }

    /// `D1(face)`: faces sharing an edge with `face`, in local edge order.
    pub fn face_ring(&self, face: usize) -> Result<Vec<usize>> {
        self.check_face(face)?;
        Ok(self.face_edges[face].iter().filter_map(|fe| self.edge_faces[fe.edge].opposite(face)).collect())
    }

    /// `B1(face)`: the face's own three lines.
    pub fn face_lines(&self, face: usize) -> Result<[usize; 3]> {
        self.check_face(face)?;
        Ok([3 * face, 3 * face + 1, 3 * face + 2])
    }

    /// `B2(face)`: lines of the ring faces whose touched vertex lies on `face`.
    /// These are exactly the lines that use `face` as their `face_plus` or
    /// `face_minus`.
    pub fn face_outer_lines(&self, face: usize) -> Result<Vec<usize>> {
        self.check_face(face)?;
        let own = &self.faces[face];
        let mut out = Vec::with_capacity(6);
        for fe in &self.face_edges[face] {
            if let Some(other) = self.edge_faces[fe.edge].opposite(face) {
                for l in 3 * other..3 * other + 3 {
                    let line = &self.lines[l];
                    if own.contains(&line.vertex) && self.edges[fe.edge].contains(&line.vertex) {
                        out.push(l);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `B1(edge)`: lines of the incident faces that touch an endpoint of `edge`.
    pub fn edge_lines(&self, edge: usize) -> Result<Vec<usize>> {
        if edge >= self.edges.len() {
            return Err(Error::IndexOutOfRange { index: edge, len: self.edges.len() });
        }
        let [a, b] = self.edges[edge];
        let mut out = Vec::with_capacity(4);
        for &f in self.edge_faces[edge].as_slice() {
            for l in 3 * f..3 * f + 3 {
                let v = self.lines[l].vertex;
                if v == a || v == b {
                    out.push(l);
                }
            }
        }
        Ok(out)
    }

    /// `M1(vertex)`: faces containing the vertex.
    pub fn vertex_faces(&self, vertex: usize) -> Result<&[usize]> {
        self.vertex_faces
            .get(vertex)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange { index: vertex, len: self.vertices.len() })
    }

    /// `N1(vertex)`: vertices joined to it by an edge.
    pub fn vertex_neighbors(&self, vertex: usize) -> Result<&[usize]> {
        self.vertex_neighbors
            .get(vertex)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange { index: vertex, len: self.vertices.len() })
    }

    pub(crate) fn vertex_faces_unchecked(&self, vertex: usize) -> &[usize] {
        &self.vertex_faces[vertex]
    }

    /// Unit face normals from the current positions; degenerate faces yield zero.
    pub fn face_normals(&self) -> Vec<Point> {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let n = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    Point::zeros()
                }
            })
            .collect()
    }

    /// Axis-aligned bounding box diagonal length.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        if self.vertices.is_empty() {
            0.0
        } else {
            (hi - lo).norm()
        }
    }

    fn check_face(&self, face: usize) -> Result<()> {
        if face < self.faces.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: face, len: self.faces.len() })
        }
    }
}

/// Per-element measures derived from vertex positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub face_area: Vec<f64>,
    pub face_normal: Vec<Point>,
    pub face_centroid: Vec<Point>,
    pub edge_length: Vec<f64>,
    pub line_length: Vec<f64>,
    pub mean_edge_length: f64,
}

impl Geometry {
    /// Fails with [`Error::DegenerateFace`] when a face area drops below
    /// `1e-14` times the squared bounding-box diagonal.
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let vs = mesh.vertices();
        let diag = mesh.bbox_diagonal();
        let min_area = 1e-14 * diag * diag;

        let mut face_area = Vec::with_capacity(mesh.num_faces());
        let mut face_normal = Vec::with_capacity(mesh.num_faces());
        let mut face_centroid = Vec::with_capacity(mesh.num_faces());
        for (fi, &[a, b, c]) in mesh.faces().iter().enumerate() {
            let cross = (vs[b] - vs[a]).cross(&(vs[c] - vs[a]));
            let twice = cross.norm();
            let area = 0.5 * twice;
            if !(area > min_area) {
                return Err(Error::DegenerateFace { face: fi });
            }
            face_area.push(area);
            face_normal.push(cross / twice);
            face_centroid.push((vs[a] + vs[b] + vs[c]) / 3.0);
        }

        let edge_length: Vec<f64> = mesh.edges().iter().map(|&[a, b]| (vs[b] - vs[a]).norm()).collect();
        let line_length = mesh.lines().iter().map(|l| (vs[l.vertex] - face_centroid[l.face]).norm()).collect();
        let mean_edge_length =
            if edge_length.is_empty() { 0.0 } else { edge_length.iter().sum::<f64>() / edge_length.len() as f64 };

        Ok(Self { face_area, face_normal, face_centroid, edge_length, line_length, mean_edge_length })
    }

    /// Uniformly rescales the measures as if every position were multiplied by
    /// `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            face_area: self.face_area.iter().map(|a| a * factor * factor).collect(),
            face_normal: self.face_normal.clone(),
            face_centroid: self.face_centroid.iter().map(|c| c * factor).collect(),
            edge_length: self.edge_length.iter().map(|l| l * factor).collect(),
            line_length: self.line_length.iter().map(|l| l * factor).collect(),
            mean_edge_length: self.mean_edge_length * factor,
        }
    }

    pub fn total_area(&self) -> f64 {
        self.face_area.iter().sum()
    }
}
