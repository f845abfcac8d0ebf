//! Synthetic test meshes.

use std::collections::HashMap;

use crate::mesh::{Mesh, Point};

/// Unit cube `[0,1]^3` split into 12 outward-facing triangles.
pub fn cube() -> Mesh {
    let vertices = vec![
        Point::new(0., 0., 0.),
        Point::new(1., 0., 0.),
        Point::new(1., 1., 0.),
        Point::new(0., 1., 0.),
        Point::new(0., 0., 1.),
        Point::new(1., 0., 1.),
        Point::new(1., 1., 1.),
        Point::new(0., 1., 1.),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [3, 7, 6],
        [3, 6, 2],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    Mesh::new(vertices, faces).expect("cube is valid")
}

/// Unit-radius icosphere after `levels` rounds of 1-to-4 subdivision.
pub fn icosphere(levels: usize) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let vertices: Vec<Point> = [
        (-1., t, 0.),
        (1., t, 0.),
        (-1., -t, 0.),
        (1., -t, 0.),
        (0., -1., t),
        (0., 1., t),
        (0., -1., -t),
        (0., 1., -t),
        (t, 0., -1.),
        (t, 0., 1.),
        (-t, 0., -1.),
        (-t, 0., 1.),
    ]
    .iter()
    .map(|&(x, y, z)| Point::new(x, y, z).normalize())
    .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut mesh = Mesh::new(vertices, faces).expect("icosahedron is valid");
    for _ in 0..levels {
        mesh = subdivide(&mesh);
        let projected = mesh.vertices().iter().map(|v| v.normalize()).collect();
        mesh = mesh.with_vertices(projected).expect("same vertex count");
    }
    mesh
}

/// Planar `nx` by `ny` grid of unit squares in `z = 0`, two triangles each.
pub fn grid(nx: usize, ny: usize) -> Mesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(i as f64, j as f64, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(vertices, faces).expect("grid is valid")
}

/// Cube `[-1,1]^3` with every edge chamfered at 45 degrees.
///
/// `bevel` is the inset of the chamfer along each axis (in `(0, 1)`). The coarse
/// polyhedron has 44 triangles; each subdivision level multiplies that by 4.
pub fn beveled_cube(bevel: f64, levels: usize) -> Mesh {
    assert!(bevel > 0.0 && bevel < 1.0, "bevel must lie in (0, 1)");
    let inner = 1.0 - bevel;
    let mut vertices = Vec::with_capacity(24);
    for &sx in &[-1.0, 1.0] {
        for &sy in &[-1.0, 1.0] {
            for &sz in &[-1.0, 1.0] {
                vertices.push(Point::new(sx, sy * inner, sz * inner));
                vertices.push(Point::new(sx * inner, sy, sz * inner));
                vertices.push(Point::new(sx * inner, sy * inner, sz));
            }
        }
    }

    // Each face is the support set of one of the 26 lattice directions.
    let mut faces = Vec::new();
    for dx in -1i32..=1 {
        for dy in -1i32..=1 {
            for dz in -1i32..=1 {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let n = Point::new(dx as f64, dy as f64, dz as f64).normalize();
                let support = vertices.iter().map(|v| n.dot(v)).fold(f64::NEG_INFINITY, f64::max);
                let mut poly: Vec<usize> =
                    (0..vertices.len()).filter(|&i| (n.dot(&vertices[i]) - support).abs() < 1e-9).collect();
                let c = poly.iter().map(|&i| vertices[i]).sum::<Point>() / poly.len() as f64;
                let u = n.cross(&if n.x.abs() < 0.9 { Point::x() } else { Point::y() }).normalize();
                let w = n.cross(&u);
                let angle = |i: usize| {
                    let d = vertices[i] - c;
                    w.dot(&d).atan2(u.dot(&d))
                };
                poly.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
        }
    }
    let mut mesh = Mesh::new(vertices, faces).expect("chamfered cube is valid");
    for _ in 0..levels {
        mesh = subdivide(&mesh);
    }
    mesh
}

/// Cube `[-1,1]^3` with edges and corners rounded to `radius`.
///
/// Starts from a regular `n x n` grid on each cube face and pushes every point
/// onto the offset surface of the inner box `[-(1-radius), 1-radius]^3`: flat
/// faces stay put, edges become quarter cylinders and corners sphere octants.
/// The result has `12 n^2` triangles.
pub fn rounded_cube(n: usize, radius: f64) -> Mesh {
    assert!(n >= 1, "need at least one cell per side");
    assert!(radius > 0.0 && radius < 1.0, "radius must lie in (0, 1)");
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut id = |key: [usize; 3], vertices: &mut Vec<Point>| {
        *index.entry(key).or_insert_with(|| {
            vertices.push(Point::from_fn(|i, _| 2.0 * key[i] as f64 / n as f64 - 1.0));
            vertices.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(12 * n * n);
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0, n] {
            for i in 0..n {
                for j in 0..n {
                    let mut quad = [0usize; 4];
                    for (k, (di, dj)) in [(0, 0), (1, 0), (1, 1), (0, 1)].into_iter().enumerate() {
                        let mut key = [0; 3];
                        key[axis] = side;
                        key[u] = i + di;
                        key[v] = j + dj;
                        quad[k] = id(key, &mut vertices);
                    }
                    // (u, v, axis) is right-handed, so the quad winds outward on the far side
                    let [a, b, c, d] = if side == n { quad } else { [quad[0], quad[3], quad[2], quad[1]] };
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                }
            }
        }
    }
    let inner = 1.0 - radius;
    for p in &mut vertices {
        let q = p.map(|c| c.clamp(-inner, inner));
        let d = *p - q;
        *p = q + d * (radius / d.norm());
    }
    Mesh::new(vertices, faces).expect("rounded cube is valid")
}

/// Linear 1-to-4 split: inserts edge midpoints without moving any vertex.
pub fn subdivide(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| {
        *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
            vertices.push((vertices[a] + vertices[b]) * 0.5);
            vertices.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(mesh.num_faces() * 4);
    for &[a, b, c] in mesh.faces() {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        faces.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    Mesh::new(vertices, faces).expect("subdivision preserves validity")
}
