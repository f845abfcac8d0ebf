//! Closed-form proximal steps and the dual ascent.

use crate::mesh::Point;

use super::AdmmState;

/// Scalar soft threshold `sign(x) max(|x| - t, 0)`.
#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Group hard threshold: zero when `|x| <= t`, otherwise `x` unchanged.
#[inline]
pub fn hard_threshold(x: Point, t: f64) -> Point {
    if x.norm() <= t {
        Point::zeros()
    } else {
        x
    }
}

/// Threshold at which the prox of `c * [q != 0] + (1/2) |q - x|^2` switches
/// from `0` to `x`.
#[inline]
pub fn l0_threshold(c: f64) -> f64 {
    (2.0 * c).sqrt()
}

/// Per edge and channel: `P = soft(D N + z_P / rho1, w_e alpha / rho1)`.
pub fn p_step(dn: &[Point], z_p: &[Point], w_e: &[f64], alpha: f64, rho1: f64) -> Vec<Point> {
    dn.iter()
        .zip(z_p)
        .zip(w_e)
        .map(|((d, z), w)| {
            let x = d + z / rho1;
            let t = w * alpha / rho1;
            x.map(|c| soft_threshold(c, t))
        })
        .collect()
}

/// Per line: `Q = H(D2 N + z_Q / rho2, sqrt(2 w_l beta / rho2))`.
pub fn q_step(d2n: &[Point], z_q: &[Point], w_l: &[f64], beta: f64, rho2: f64) -> Vec<Point> {
    d2n.iter()
        .zip(z_q)
        .zip(w_l)
        .map(|((d, z), w)| hard_threshold(d + z / rho2, l0_threshold(w * beta / rho2)))
        .collect()
}

/// `z_P += rho1 (D N - P)` and `z_Q += rho2 (D2 N - Q)`.
pub fn dual_step(state: &mut AdmmState, dn: &[Point], d2n: &[Point], rho1: f64, rho2: f64) {
    for ((z, d), p) in state.z_p.iter_mut().zip(dn).zip(&state.p) {
        *z += rho1 * (d - p);
    }
    for ((z, d), q) in state.z_q.iter_mut().zip(d2n).zip(&state.q) {
        *z += rho2 * (d - q);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(2.0, 0.5), 1.5);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
    }

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(hard_threshold(Point::new(0.1, 0.0, 0.0), 0.2), Point::zeros());
        let x = Point::new(3.0, 4.0, 0.0);
        assert_eq!(hard_threshold(x, 0.2), x);
    }

    /// argmin over a grid of `t |p| + (p - x)^2 / 2`
    fn grid_argmin(x: f64, t: f64, step: f64) -> f64 {
        let n = ((x.abs() + 1.0) / step).ceil() as i64;
        (-n..=n)
            .map(|i| i as f64 * step)
            .min_by(|a, b| {
                let fa = t * a.abs() + 0.5 * (a - x).powi(2);
                let fb = t * b.abs() + 0.5 * (b - x).powi(2);
                fa.total_cmp(&fb)
            })
            .unwrap()
    }

    #[test]
    fn soft_threshold_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-3;
        for _ in 0..200 {
            let x = rng.random_range(-3.0..3.0);
            let t = rng.random_range(0.0..1.5);
            assert!((soft_threshold(x, t) - grid_argmin(x, t, step)).abs() <= step);
        }
    }

    #[test]
    fn hard_threshold_matches_two_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let x = Point::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let c = rng.random_range(0.0..0.5);
            let keep = c + 0.0;
            let zero = 0.5 * x.norm_squared();
            let expected = if zero <= keep { Point::zeros() } else { x };
            assert_eq!(hard_threshold(x, l0_threshold(c)), expected);
        }
    }

    #[test]
    fn dual_step_examples() {
        let r = vec![Point::new(1.0, -2.0, 0.5)];
        let mut s = AdmmState {
            p: vec![Point::zeros()],
            q: vec![],
            z_p: vec![Point::zeros()],
            z_q: vec![],
            w_e: vec![1.0],
            w_l: vec![],
            k: 0,
        };
        dual_step(&mut s, &r, &[], 2.0, 1.0);
        assert_eq!(s.z_p[0], r[0] * 2.0);
        dual_step(&mut s, &r, &[], 2.0, 1.0);
        assert_eq!(s.z_p[0], r[0] * 4.0);

        // feasible: D N == P leaves the dual alone
        s.p = r.clone();
        let before = s.z_p.clone();
        dual_step(&mut s, &r, &[], 2.0, 1.0);
        assert_eq!(s.z_p, before);
    }

    proptest! {
        #[test]
        fn soft_threshold_shrinks(x in -10.0..10.0f64, t in 0.0..5.0f64) {
            let y = soft_threshold(x, t);
            prop_assert!(y.abs() <= x.abs());
            prop_assert!(y == 0.0 || y.signum() == x.signum());
            prop_assert!((x - y).abs() <= t + 1e-12);
        }
    }
}
