//! Semi-sparse face-normal filtering.
//!
//! The filtered normals minimize
//!
//! ```text
//! lambda/2 |N - N0|_U^2
//!   + alpha * sum_e w_e |D N|_e|_1 len(e)
//!   + beta  * sum_l w_l |D2 N|_l|_0 len(l)
//! ```
//!
//! over unit per-face normals. The solver splits `P = D N` and `Q = D2 N` and
//! alternates a linear solve for `N` (followed by projection onto the unit
//! sphere), soft thresholding for `P`, group hard thresholding for `Q`, and a
//! scaled dual update.

mod prox;
mod system;
mod weights;

use std::io::Write;

use rayon::prelude::*;

pub use prox::{dual_step, hard_threshold, l0_threshold, p_step, q_step, soft_threshold};
pub use system::{pcg, CgStats, NormalSystem};
pub use weights::compute_dynamic_weights;

use crate::error::{Error, Result};
use crate::mesh::{Geometry, Mesh, Point};
use crate::ops::{MassMatrices, Operators, Space};

/// Normals whose pre-projection length falls below this keep their previous value.
const MIN_NORMAL_LEN: f64 = 1e-12;
/// A line counts toward the L0 term when its second difference exceeds this.
pub const L0_ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightUpdate {
    /// Recompute `w_e`, `w_l` from the current normals after every iteration.
    EveryIter,
    /// Hold all weights at 1.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Start from the noisy normals.
    Noisy,
    /// Start from the zero field.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma_e: f64,
    pub sigma_l: f64,
    /// Stop once `|N^k - N^(k-1)|^2 <= eps`. `None` means `1e-8 * |T|`.
    pub eps: Option<f64>,
    pub max_iters: usize,
    pub cg_tol: f64,
    /// `None` means `10 * |T|`.
    pub cg_max_iters: Option<usize>,
    pub weight_update: WeightUpdate,
    /// Include `W_e`, `W_l` in the N-step quadratic penalties.
    pub weights_in_system: bool,
    pub init: Init,
    /// Measure areas and lengths on the mesh rescaled to unit mean edge
    /// length, so parameters do not depend on model units.
    pub normalize_scale: bool,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            alpha: 0.1,
            beta: 1.0,
            rho1: 1.0,
            rho2: 0.01,
            sigma_e: 0.3,
            sigma_l: 0.5,
            eps: None,
            max_iters: 100,
            cg_tol: 1e-8,
            cg_max_iters: None,
            weight_update: WeightUpdate::EveryIter,
            weights_in_system: true,
            init: Init::Noisy,
            normalize_scale: true,
        }
    }
}

impl DenoiseParams {
    /// `lambda`, `rho1`, `rho2`, `sigma_e`, `sigma_l` must be positive;
    /// `alpha` and `beta` non-negative (zero switches a term off).
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("sigma_e", self.sigma_e),
            ("sigma_l", self.sigma_l),
            ("cg_tol", self.cg_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps >= 0.0) {
                return Err(Error::InvalidParameter(format!("eps must be non-negative, got {eps}")));
            }
        }
        Ok(())
    }
}

/// Auxiliary, dual and weight variables of the splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub p: Vec<Point>,
    pub q: Vec<Point>,
    pub z_p: Vec<Point>,
    pub z_q: Vec<Point>,
    pub w_e: Vec<f64>,
    pub w_l: Vec<f64>,
    pub k: usize,
}

impl AdmmState {
    pub fn zeros(num_edges: usize, num_lines: usize) -> Self {
        Self {
            p: vec![Point::zeros(); num_edges],
            q: vec![Point::zeros(); num_lines],
            z_p: vec![Point::zeros(); num_edges],
            z_q: vec![Point::zeros(); num_lines],
            w_e: vec![1.0; num_edges],
            w_l: vec![1.0; num_lines],
            k: 0,
        }
    }
}

/// Terms of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub data: f64,
    pub first_order: f64,
    pub second_order: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.data + self.first_order + self.second_order
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    /// `|D N - P|_V`
    pub res_p: f64,
    /// `|D2 N - Q|_W`
    pub res_q: f64,
    /// `|N^k - N^(k-1)|^2`
    pub dn: f64,
    pub cg_iters: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// Face normals left unchanged because the linear solve returned ~0.
    pub degenerate_normals: usize,
}

impl Diagnostics {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,energy,res_P,res_Q,dN")?;
        for r in &self.iterations {
            writeln!(w, "{},{:.12e},{:.12e},{:.12e},{:.12e}", r.iter, r.energy, r.res_p, r.res_q, r.dn)?;
        }
        Ok(())
    }
}

/// Operators and mass matrices of one mesh, reusable across solves.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub mesh: &'a Mesh,
    pub geometry: Geometry,
    pub ops: Operators,
    pub mass: MassMatrices,
}

impl<'a> Problem<'a> {
    pub fn new(mesh: &'a Mesh, normalize_scale: bool) -> Result<Self> {
        let mut geometry = Geometry::new(mesh)?;
        if normalize_scale && geometry.mean_edge_length > 0.0 {
            geometry = geometry.scaled(1.0 / geometry.mean_edge_length);
        }
        let mass = MassMatrices::new(&geometry);
        Ok(Self { mesh, ops: Operators::new(mesh), geometry, mass })
    }

    fn num_faces(&self) -> usize {
        self.mesh.num_faces()
    }

    /// Linear solve plus projection onto unit normals. `prev` seeds CG and
    /// replaces normals that collapse to ~0. Returns the new field, the total CG
    /// iterations and the number of collapsed normals.
    pub fn n_step(
        &self,
        state: &AdmmState,
        n0: &[Point],
        prev: &[Point],
        params: &DenoiseParams,
    ) -> Result<(Vec<Point>, usize, usize)> {
        let (we, wl) = if params.weights_in_system {
            (Some(state.w_e.as_slice()), Some(state.w_l.as_slice()))
        } else {
            (None, None)
        };
        let sys = NormalSystem::new(&self.ops, &self.mass, params.lambda, params.rho1, params.rho2, we, wl);
        let b = sys.rhs(n0, &state.p, &state.z_p, &state.q, &state.z_q);
        let diag = sys.diagonal();
        let max_iters = params.cg_max_iters.unwrap_or(10 * self.num_faces()).max(1);

        let channels: Vec<Result<(Vec<f64>, CgStats)>> = (0..3)
            .into_par_iter()
            .map(|c| {
                let bc: Vec<f64> = b.iter().map(|v| v[c]).collect();
                let mut x: Vec<f64> = prev.iter().map(|v| v[c]).collect();
                let stats = pcg(|u, v| sys.apply(u, v), &diag, &bc, &mut x, params.cg_tol, max_iters)?;
                Ok((x, stats))
            })
            .collect();
        let mut cols = Vec::with_capacity(3);
        let mut cg_iters = 0;
        for ch in channels {
            let (x, stats) = ch?;
            cg_iters += stats.iterations;
            cols.push(x);
        }

        let mut collapsed = 0;
        let n = (0..self.num_faces())
            .map(|i| {
                let v = Point::new(cols[0][i], cols[1][i], cols[2][i]);
                let len = v.norm();
                if len < MIN_NORMAL_LEN {
                    collapsed += 1;
                    if prev[i].norm() > MIN_NORMAL_LEN {
                        prev[i]
                    } else {
                        n0[i]
                    }
                } else {
                    v / len
                }
            })
            .collect::<Vec<_>>();
        if n.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFiniteValue("normal field"));
        }
        Ok((n, cg_iters, collapsed))
    }

    pub fn energy(&self, n: &[Point], n0: &[Point], w_e: &[f64], w_l: &[f64], params: &DenoiseParams) -> Energy {
        let diff: Vec<Point> = n.iter().zip(n0).map(|(a, b)| a - b).collect();
        let data = 0.5 * params.lambda * self.mass.inner_vec(Space::U, &diff, &diff).expect("face field");
        let dn = self.ops.first.apply_vec3(n);
        let first_order = params.alpha
            * dn.iter().zip(w_e).zip(&self.mass.edge).map(|((d, w), len)| w * d.lp_norm(1) * len).sum::<f64>();
        let d2n = self.ops.second.apply_vec3(n);
        let second_order = params.beta
            * d2n
                .iter()
                .zip(w_l)
                .zip(&self.mass.line)
                .filter(|((d, _), _)| d.norm() > L0_ZERO_TOL)
                .map(|((_, w), len)| w * len)
                .sum::<f64>();
        Energy { data, first_order, second_order }
    }

    fn weights(&self, n: &[Point], params: &DenoiseParams) -> (Vec<f64>, Vec<f64>) {
        match params.weight_update {
            WeightUpdate::EveryIter => compute_dynamic_weights(self.mesh, n, params.sigma_e, params.sigma_l),
            WeightUpdate::Frozen => (vec![1.0; self.mesh.num_edges()], vec![1.0; self.mesh.num_lines()]),
        }
    }

    /// Runs the alternating scheme until the normal change drops below `eps`
    /// or `max_iters` iterations have been taken.
    pub fn denoise(&self, n0: &[Point], params: &DenoiseParams) -> Result<(Vec<Point>, Diagnostics)> {
        params.validate()?;
        if n0.len() != self.num_faces() {
            return Err(Error::LengthMismatch { expected: self.num_faces(), actual: n0.len() });
        }
        let eps = params.eps.unwrap_or(1e-8 * self.num_faces() as f64);

        let mut n = match params.init {
            Init::Noisy => n0.to_vec(),
            Init::Zero => vec![Point::zeros(); self.num_faces()],
        };
        let mut state = AdmmState::zeros(self.mesh.num_edges(), self.mesh.num_lines());
        (state.w_e, state.w_l) = self.weights(&n, params);
        let mut diag = Diagnostics::default();

        while state.k < params.max_iters {
            let (next, cg_iters, collapsed) = self.n_step(&state, n0, &n, params)?;
            if collapsed > 0 {
                log::warn!("iteration {}: {collapsed} normals collapsed, kept previous", state.k + 1);
                diag.degenerate_normals += collapsed;
            }
            let dn = self.ops.first.apply_vec3(&next);
            let d2n = self.ops.second.apply_vec3(&next);
            state.p = p_step(&dn, &state.z_p, &state.w_e, params.alpha, params.rho1);
            state.q = q_step(&d2n, &state.z_q, &state.w_l, params.beta, params.rho2);
            dual_step(&mut state, &dn, &d2n, params.rho1, params.rho2);
            if params.weight_update == WeightUpdate::EveryIter {
                (state.w_e, state.w_l) = self.weights(&next, params);
            }
            state.k += 1;

            let change: f64 = next.iter().zip(&n).map(|(a, b)| (a - b).norm_squared()).sum();
            let res_p = residual_norm(&self.mass, Space::V, &dn, &state.p);
            let res_q = residual_norm(&self.mass, Space::W, &d2n, &state.q);
            let energy = self.energy(&next, n0, &state.w_e, &state.w_l, params).total();
            if !(energy.is_finite() && res_p.is_finite() && res_q.is_finite()) {
                return Err(Error::NonFiniteValue("solver state"));
            }
            diag.iterations.push(IterationRecord { iter: state.k, energy, res_p, res_q, dn: change, cg_iters });
            n = next;
            if change <= eps {
                diag.converged = true;
                break;
            }
        }
        Ok((n, diag))
    }
}

fn residual_norm(mass: &MassMatrices, space: Space, a: &[Point], b: &[Point]) -> f64 {
    let r: Vec<Point> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mass.norm_vec(space, &r).expect("matching field")
}

/// Filters the per-face normals `n0` of `mesh`.
pub fn denoise_normals(mesh: &Mesh, n0: &[Point], params: &DenoiseParams) -> Result<(Vec<Point>, Diagnostics)> {
    Problem::new(mesh, params.normalize_scale)?.denoise(n0, params)
}
