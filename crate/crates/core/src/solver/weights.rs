use crate::mesh::{Mesh, Point};

/// Edge and line attenuation factors from the current normal field.
///
/// `w_e = exp(-|N+ - N-|^2 / (2 sigma_e^2))` across each interior edge and
/// `w_l = exp(-|N+ - 2 N + N-|^4 / (2 sigma_l^4))` on each interior line.
/// Boundary edges and lines get weight 1.
pub fn compute_dynamic_weights(mesh: &Mesh, normals: &[Point], sigma_e: f64, sigma_l: f64) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(normals.len(), mesh.num_faces());
    let denom_e = 2.0 * sigma_e.powi(2);
    let denom_l = 2.0 * sigma_l.powi(4);
    let w_e = mesh
        .edge_faces()
        .iter()
        .map(|ef| match ef.as_slice() {
            [a, b] => (-(normals[*a] - normals[*b]).norm_squared() / denom_e).exp(),
            _ => 1.0,
        })
        .collect();
    let w_l = mesh
        .lines()
        .iter()
        .map(|l| match (l.face_plus, l.face_minus) {
            (Some(p), Some(m)) => {
                let sq = (normals[p] - 2.0 * normals[l.face] + normals[m]).norm_squared();
                (-(sq * sq) / denom_l).exp()
            }
            _ => 1.0,
        })
        .collect();
    (w_e, w_l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn flat_field_has_unit_weights() {
        let m = shapes::grid(3, 3);
        let n = vec![Point::z(); m.num_faces()];
        let (we, wl) = compute_dynamic_weights(&m, &n, 0.3, 0.5);
        assert!(we.iter().chain(&wl).all(|&w| w == 1.0));
    }

    #[test]
    fn perpendicular_neighbours() {
        let m =
            Mesh::new(vec![Point::zeros(), Point::x(), Point::new(1., 1., 0.), Point::y()], vec![[0, 1, 2], [0, 2, 3]])
                .unwrap();
        let n = vec![Point::x(), Point::y()];
        let (we, _) = compute_dynamic_weights(&m, &n, 1.0, 1.0);
        let shared = (0..m.num_edges()).find(|&e| !m.is_boundary_edge(e)).unwrap();
        assert_relative_eq!(we[shared], (-1f64).exp(), epsilon = 1e-15);
        assert!((we[shared] - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn second_difference_of_norm_sqrt_two() {
        let m = shapes::cube();
        let l = m.lines()[0];
        // N+ - 2N + N- = (1, 1, 0) has norm sqrt(2)
        let mut n = vec![Point::z(); m.num_faces()];
        n[l.face_plus.unwrap()] = Point::new(1.0, 1.0, 0.0);
        n[l.face] = Point::zeros();
        n[l.face_minus.unwrap()] = Point::zeros();
        let (_, wl) = compute_dynamic_weights(&m, &n, 1.0, 1.0);
        assert_relative_eq!(wl[0], (-2f64).exp(), epsilon = 1e-15);
        assert!(wl.iter().all(|&w| w > 0.0 && w <= 1.0));
    }
}
