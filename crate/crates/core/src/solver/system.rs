//! The normal-field linear system and its preconditioned CG solver.
//!
//! Per channel the N-step solves
//!
//! ```text
//! (lambda M_s + rho1 D^T M_e W_e D + rho2 D2^T M_l W_l D2) n
//!     = lambda M_s n0 + D^T M_e W_e (rho1 p - z_p) + D2^T M_l W_l (rho2 q - z_q)
//! ```
//!
//! The operator is applied matrix-free; [`NormalSystem::to_sparse`] assembles it
//! explicitly for inspection.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::ops::{MassMatrices, Operators, SparseOperator};

pub struct NormalSystem<'a> {
    ops: &'a Operators,
    lambda_mass: Vec<f64>,
    rho1: f64,
    rho2: f64,
    /// `len(e) * w_e`
    edge_weight: Vec<f64>,
    /// `len(l) * w_l`
    line_weight: Vec<f64>,
}

impl<'a> NormalSystem<'a> {
    /// `w_e`/`w_l` of `None` leave the penalties unweighted.
    pub fn new(
        ops: &'a Operators,
        mass: &MassMatrices,
        lambda: f64,
        rho1: f64,
        rho2: f64,
        w_e: Option<&[f64]>,
        w_l: Option<&[f64]>,
    ) -> Self {
        let weigh = |m: &[f64], w: Option<&[f64]>| match w {
            Some(w) => m.iter().zip(w).map(|(a, b)| a * b).collect(),
            None => m.to_vec(),
        };
        Self {
            ops,
            lambda_mass: mass.face.iter().map(|s| lambda * s).collect(),
            rho1,
            rho2,
            edge_weight: weigh(&mass.edge, w_e),
            line_weight: weigh(&mass.line, w_l),
        }
    }

    pub fn dim(&self) -> usize {
        self.lambda_mass.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((out, xi), m) in y.iter_mut().zip(x).zip(&self.lambda_mass) {
            *out = m * xi;
        }
        if self.rho1 != 0.0 {
            let mut dx = self.ops.first.apply(x);
            for (v, w) in dx.iter_mut().zip(&self.edge_weight) {
                *v *= self.rho1 * w;
            }
            accumulate(&self.ops.first_t, &dx, y);
        }
        if self.rho2 != 0.0 {
            let mut dx = self.ops.second.apply(x);
            for (v, w) in dx.iter_mut().zip(&self.line_weight) {
                *v *= self.rho2 * w;
            }
            accumulate(&self.ops.second_t, &dx, y);
        }
    }

    /// Diagonal of the system matrix (Jacobi preconditioner).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = self.lambda_mass.clone();
        for (e, w) in self.edge_weight.iter().enumerate() {
            for (c, v) in self.ops.first.row(e) {
                d[c] += self.rho1 * w * v * v;
            }
        }
        for (l, w) in self.line_weight.iter().enumerate() {
            for (c, v) in self.ops.second.row(l) {
                d[c] += self.rho2 * w * v * v;
            }
        }
        d
    }

    /// Right-hand side for all three channels.
    pub fn rhs(&self, n0: &[Point], p: &[Point], z_p: &[Point], q: &[Point], z_q: &[Point]) -> Vec<Point> {
        let mut b: Vec<Point> = n0.iter().zip(&self.lambda_mass).map(|(n, m)| n * *m).collect();
        let ep: Vec<Point> =
            p.iter().zip(z_p).zip(&self.edge_weight).map(|((p, z), w)| (p * self.rho1 - z) * *w).collect();
        for (bi, t) in b.iter_mut().zip(self.ops.first_t.apply_vec3(&ep)) {
            *bi += t;
        }
        let lq: Vec<Point> =
            q.iter().zip(z_q).zip(&self.line_weight).map(|((q, z), w)| (q * self.rho2 - z) * *w).collect();
        for (bi, t) in b.iter_mut().zip(self.ops.second_t.apply_vec3(&lq)) {
            *bi += t;
        }
        b
    }

    /// Explicit sparse assembly of the system matrix.
    pub fn to_sparse(&self) -> SparseOperator {
        let n = self.dim();
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, m) in self.lambda_mass.iter().enumerate() {
            *rows[i].entry(i).or_default() += m;
        }
        let mut add_gram = |op: &SparseOperator, rho: f64, weight: &[f64]| {
            for (r, w) in weight.iter().enumerate() {
                let entries: Vec<(usize, f64)> = op.row(r).collect();
                for &(a, va) in &entries {
                    for &(b, vb) in &entries {
                        *rows[a].entry(b).or_default() += rho * w * va * vb;
                    }
                }
            }
        };
        add_gram(&self.ops.first, self.rho1, &self.edge_weight);
        add_gram(&self.ops.second, self.rho2, &self.line_weight);
        SparseOperator::from_rows(n, rows.into_iter().map(|r| r.into_iter().collect()))
    }
}

fn accumulate(op_t: &SparseOperator, x: &[f64], y: &mut [f64]) {
    for (out, v) in y.iter_mut().zip(op_t.apply(x)) {
        *out += v;
    }
}

/// Outcome of one CG solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradient. `x` holds the initial guess and
/// receives the solution. Converged when `|r| <= tol |b|`.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<CgStats> {
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgStats { iterations: 0, residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = norm(&r) / b_norm;
    let mut it = 0;
    while rel > tol {
        if it >= max_iters {
            return Err(Error::SolverDiverged { iterations: it, residual: rel });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverDiverged { iterations: it, residual: rel });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = norm(&r) / b_norm;
        it += 1;
    }
    if !rel.is_finite() {
        return Err(Error::NonFiniteValue("conjugate gradient residual"));
    }
    Ok(CgStats { iterations: it, residual: rel })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
