//! Discrete difference operators on face, edge and line fields.
//!
//! Three function spaces are involved: `U` holds one value per face, `V` one
//! per edge and `W` one per barycenter line. Each carries a weighted inner
//! product (face area, edge length, line length respectively).
//!
//! * [`first_order`] maps `U -> V`: the signed jump across each interior edge.
//! * [`second_order`] maps `U -> W`: `u(face_plus) - 2 u(face) + u(face_minus)`.
//! * [`edge_jump`] maps `V -> W`: the jump of an edge field around a corner.
//!
//! Boundary rows are empty. The element-wise adjoint formulas
//! ([`divergence`], [`second_order_adjoint`], [`edge_adjoint`]) are computed by
//! walking the mesh neighbourhoods directly and serve as an independent check of
//! the transposed matrices.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{Geometry, Mesh, Point};

const PAR_ROWS: usize = 8192;

/// Sparse matrix in compressed-row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Builds from per-row entry lists. Repeated columns within a row are summed
    /// and exact zeros are dropped; columns keep their first-seen order.
    pub fn from_rows(ncols: usize, rows: impl IntoIterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            let start = col_idx.len();
            for (c, v) in row {
                debug_assert!(c < ncols);
                match col_idx[start..].iter().position(|&x| x == c) {
                    Some(k) => values[start + k] += v,
                    None => {
                        col_idx.push(c);
                        values.push(v);
                    }
                }
            }
            let mut k = start;
            while k < col_idx.len() {
                if values[k] == 0.0 {
                    col_idx.remove(k);
                    values.remove(k);
                } else {
                    k += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows: row_ptr.len() - 1, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|&(cc, _)| cc == c).map(|(_, v)| v).sum()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row = |r: usize| self.row(r).map(|(c, v)| v * x[c]).sum::<f64>();
        if self.nrows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        }
    }

    /// Applies the operator channel-wise to a 3-vector field.
    pub fn apply_vec3(&self, x: &[Point]) -> Vec<Point> {
        assert_eq!(x.len(), self.ncols);
        let row = |r: usize| self.row(r).fold(Point::zeros(), |acc, (c, v)| acc + x[c] * v);
        if self.nrows >= PAR_ROWS {
            (0..self.nrows).into_par_iter().map(row).collect()
        } else {
            (0..self.nrows).map(row).collect()
        }
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.ncols];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                rows[c].push((r, v));
            }
        }
        Self::from_rows(self.nrows, rows)
    }

    /// Scales row `r` by `d[r]`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.nrows);
        let mut out = self.clone();
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.values[k] *= d[r];
            }
        }
        out
    }

    /// Dense row-major copy. Intended for tests and debugging on small meshes.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
        }
        m
    }

    /// Writes the operator in MatrixMarket coordinate format (1-based).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// `D_M`: edges x faces. Interior edge rows hold the two face signs.
pub fn first_order(mesh: &Mesh) -> SparseOperator {
    let mut rows = vec![Vec::new(); mesh.num_edges()];
    for (f, fes) in mesh.face_edges().iter().enumerate() {
        for fe in fes {
            if !mesh.is_boundary_edge(fe.edge) {
                rows[fe.edge].push((f, fe.sign));
            }
        }
    }
    SparseOperator::from_rows(mesh.num_faces(), rows)
}

/// `D2_M`: lines x faces with stencil `(+1, -2, +1)` on
/// `(face_plus, face, face_minus)`.
pub fn second_order(mesh: &Mesh) -> SparseOperator {
    let rows = mesh.lines().iter().map(|l| match (l.face_plus, l.face_minus) {
        (Some(p), Some(m)) => vec![(p, 1.0), (l.face, -2.0), (m, 1.0)],
        _ => Vec::new(),
    });
    SparseOperator::from_rows(mesh.num_faces(), rows)
}

/// `D_E`: lines x edges, the corner jump `v(e+) sgn(e+, face) + v(e-) sgn(e-, face)`.
pub fn edge_jump(mesh: &Mesh) -> SparseOperator {
    let rows = mesh.lines().iter().map(|l| {
        if l.is_boundary() {
            return Vec::new();
        }
        let fe = &mesh.face_edges()[l.face];
        let plus = fe[(l.corner + 2) % 3];
        let minus = fe[l.corner];
        vec![(plus.edge, plus.sign), (minus.edge, minus.sign)]
    });
    SparseOperator::from_rows(mesh.num_edges(), rows)
}

/// The two difference operators and their transposes, assembled once per mesh.
#[derive(Debug, Clone)]
pub struct Operators {
    pub first: SparseOperator,
    pub first_t: SparseOperator,
    pub second: SparseOperator,
    pub second_t: SparseOperator,
}

impl Operators {
    pub fn new(mesh: &Mesh) -> Self {
        let first = first_order(mesh);
        let second = second_order(mesh);
        Self { first_t: first.transpose(), second_t: second.transpose(), first, second }
    }
}

/// The three function spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Per face, weighted by area.
    U,
    /// Per edge, weighted by length.
    V,
    /// Per line, weighted by length.
    W,
}

/// Diagonal mass matrices of the three spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrices {
    pub face: Vec<f64>,
    pub edge: Vec<f64>,
    pub line: Vec<f64>,
}

impl MassMatrices {
    pub fn new(geometry: &Geometry) -> Self {
        Self {
            face: geometry.face_area.clone(),
            edge: geometry.edge_length.clone(),
            line: geometry.line_length.clone(),
        }
    }

    pub fn weights(&self, space: Space) -> &[f64] {
        match space {
            Space::U => &self.face,
            Space::V => &self.edge,
            Space::W => &self.line,
        }
    }

    pub fn inner(&self, space: Space, a: &[f64], b: &[f64]) -> Result<f64> {
        let w = self.weights(space);
        check_len(w.len(), a.len())?;
        check_len(w.len(), b.len())?;
        Ok(a.iter().zip(b).zip(w).map(|((x, y), m)| x * y * m).sum())
    }

    pub fn norm(&self, space: Space, a: &[f64]) -> Result<f64> {
        self.inner(space, a, a).map(f64::sqrt)
    }

    /// Vector-field inner product: the sum of the three channel products.
    pub fn inner_vec(&self, space: Space, a: &[Point], b: &[Point]) -> Result<f64> {
        let w = self.weights(space);
        check_len(w.len(), a.len())?;
        check_len(w.len(), b.len())?;
        Ok(a.iter().zip(b).zip(w).map(|((x, y), m)| x.dot(y) * m).sum())
    }

    pub fn norm_vec(&self, space: Space, a: &[Point]) -> Result<f64> {
        self.inner_vec(space, a, a).map(f64::sqrt)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

/// Adjoint of the first-order difference with respect to the `U`/`V` inner
/// products, normalized so that `(v, D u)_V = -(div v, u)_U`:
/// `div v|f = -(1/s_f) * sum over interior edges e of f of v_e sgn(e, f) len(e)`.
pub fn divergence(mesh: &Mesh, geometry: &Geometry, v: &[f64]) -> Vec<f64> {
    assert_eq!(v.len(), mesh.num_edges());
    mesh.face_edges()
        .iter()
        .enumerate()
        .map(|(f, fes)| {
            let sum: f64 = fes
                .iter()
                .filter(|fe| !mesh.is_boundary_edge(fe.edge))
                .map(|fe| v[fe.edge] * fe.sign * geometry.edge_length[fe.edge])
                .sum();
            -sum / geometry.face_area[f]
        })
        .collect()
}

/// Adjoint of the second-order difference, `(w, D2 u)_W = (adj w, u)_U`,
/// gathered from the lines of the neighbouring faces (`B2`) and the face's own
/// lines (`B1`).
pub fn second_order_adjoint(mesh: &Mesh, geometry: &Geometry, w: &[f64]) -> Vec<f64> {
    assert_eq!(w.len(), mesh.num_lines());
    let weighted = |l: usize| {
        if mesh.lines()[l].is_boundary() {
            0.0
        } else {
            w[l] * geometry.line_length[l]
        }
    };
    (0..mesh.num_faces())
        .map(|f| {
            let outer: f64 = mesh.face_outer_lines(f).expect("valid face").into_iter().map(weighted).sum();
            let own: f64 = mesh.face_lines(f).expect("valid face").into_iter().map(weighted).sum();
            (outer - 2.0 * own) / geometry.face_area[f]
        })
        .collect()
}

/// Adjoint of [`edge_jump`], `(w, D_E v)_W = (adj w, v)_V`, gathered from the
/// lines `B1(e)` of the faces incident to each edge.
pub fn edge_adjoint(mesh: &Mesh, geometry: &Geometry, w: &[f64]) -> Vec<f64> {
    assert_eq!(w.len(), mesh.num_lines());
    (0..mesh.num_edges())
        .map(|e| {
            let sum: f64 = mesh
                .edge_lines(e)
                .expect("valid edge")
                .into_iter()
                .filter(|&l| !mesh.lines()[l].is_boundary())
                .map(|l| {
                    let face = mesh.lines()[l].face;
                    let sign = mesh.face_edges()[face].iter().find(|fe| fe.edge == e).expect("edge of face").sign;
                    w[l] * sign * geometry.line_length[l]
                })
                .sum();
            sum / geometry.edge_length[e]
        })
        .collect()
}
