//! Exact point-to-triangle distances and closest-triangle queries.

use crate::mesh::{Mesh, Point};

/// Triangle counts at or above this use the bounding-volume hierarchy.
pub const BVH_THRESHOLD: usize = 50_000;

/// Closest point on triangle `abc` to `p`, by Voronoi-region classification.
pub fn closest_point_on_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

pub fn point_triangle_distance_squared(p: &Point, a: &Point, b: &Point, c: &Point) -> f64 {
    (p - closest_point_on_triangle(p, a, b, c)).norm_squared()
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Point,
    max: Point,
}

impl Aabb {
    fn empty() -> Self {
        Self { min: Point::repeat(f64::INFINITY), max: Point::repeat(f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: &Point) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&o.min), max: self.max.sup(&o.max) }
    }

    fn distance_squared(&self, p: &Point) -> f64 {
        let d = (self.min - p).sup(&(p - self.max)).sup(&Point::zeros());
        d.norm_squared()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

const LEAF_SIZE: usize = 8;

/// Unsigned distance queries against a fixed triangle mesh.
#[derive(Debug, Clone)]
pub struct SurfaceDistance {
    triangles: Vec<[Point; 3]>,
    nodes: Vec<Node>,
}

impl SurfaceDistance {
    /// Builds a hierarchy only when the mesh has at least [`BVH_THRESHOLD`] faces.
    pub fn new(mesh: &Mesh) -> Self {
        Self::with_hierarchy(mesh, mesh.num_faces() >= BVH_THRESHOLD)
    }

    pub fn with_hierarchy(mesh: &Mesh, hierarchy: bool) -> Self {
        let v = mesh.vertices();
        let mut triangles: Vec<[Point; 3]> = mesh.faces().iter().map(|&[a, b, c]| [v[a], v[b], v[c]]).collect();
        let mut nodes = Vec::new();
        if hierarchy && !triangles.is_empty() {
            let n = triangles.len();
            build(&mut triangles, 0, n, &mut nodes);
        }
        Self { triangles, nodes }
    }

    pub fn distance_squared(&self, p: &Point) -> f64 {
        if self.nodes.is_empty() {
            return self
                .triangles
                .iter()
                .map(|[a, b, c]| point_triangle_distance_squared(p, a, b, c))
                .fold(f64::INFINITY, f64::min);
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.bounds().distance_squared(p) >= best {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for [a, b, c] in &self.triangles[start..end] {
                        best = best.min(point_triangle_distance_squared(p, a, b, c));
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left].bounds().distance_squared(p);
                    let dr = self.nodes[right].bounds().distance_squared(p);
                    // visit the nearer child first
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }

    pub fn distance(&self, p: &Point) -> f64 {
        self.distance_squared(p).sqrt()
    }
}

fn build(tris: &mut [[Point; 3]], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let mut bounds = Aabb::empty();
    let mut centers = Aabb::empty();
    for t in &tris[start..end] {
        t.iter().for_each(|p| bounds.grow(p));
        centers.grow(&((t[0] + t[1] + t[2]) / 3.0));
    }
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start, end });
        return id;
    }
    nodes.push(Node::Leaf { bounds, start, end });
    let axis = (centers.max - centers.min).imax();
    let mid = start + (end - start) / 2;
    let key = |t: &[Point; 3]| t[0][axis] + t[1][axis] + t[2][axis];
    tris[start..end].select_nth_unstable_by(mid - start, |a, b| key(a).total_cmp(&key(b)));
    let left = build(tris, start, mid, nodes);
    let right = build(tris, mid, end, nodes);
    let merged = nodes[left].bounds().merge(nodes[right].bounds());
    nodes[id] = Node::Inner { bounds: merged, left, right };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Plane projection if it lands inside, otherwise the nearest edge segment.
    pub(crate) fn oracle(p: &Point, a: &Point, b: &Point, c: &Point) -> f64 {
        let n = (b - a).cross(&(c - a));
        let n2 = n.norm_squared();
        let q = p - n * (n.dot(&(p - a)) / n2);
        let u = (b - q).cross(&(c - q)).dot(&n) / n2;
        let v = (c - q).cross(&(a - q)).dot(&n) / n2;
        let w = 1.0 - u - v;
        if u >= 0.0 && v >= 0.0 && w >= 0.0 {
            return (p - q).norm();
        }
        let seg = |s: &Point, e: &Point| {
            let d = e - s;
            let t = ((p - s).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            (p - (s + d * t)).norm()
        };
        seg(a, b).min(seg(b, c)).min(seg(c, a))
    }

    #[test]
    fn above_interior() {
        let (a, b, c) = (Point::zeros(), Point::x(), Point::y());
        let h = 0.37;
        let d = point_triangle_distance_squared(&Point::new(0.25, 0.25, h), &a, &b, &c).sqrt();
        assert!((d - h).abs() < 1e-15);
    }

    #[test]
    fn matches_region_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut r = || Point::from_fn(|_, _| rng.random_range(-1.0..1.0));
        for _ in 0..100_000 {
            let (a, b, c, p) = (r(), r(), r(), r() * 2.0);
            if (b - a).cross(&(c - a)).norm() < 1e-6 {
                continue;
            }
            let d = point_triangle_distance_squared(&p, &a, &b, &c).sqrt();
            assert!((d - oracle(&p, &a, &b, &c)).abs() < 1e-10);
        }
    }

    #[test]
    fn beyond_edge_matches_dense_sampling() {
        let (a, b, c) = (Point::zeros(), Point::new(2.0, 0.0, 0.0), Point::new(0.5, 1.5, 0.0));
        let p = Point::new(1.0, -0.7, 0.3);
        let d = point_triangle_distance_squared(&p, &a, &b, &c).sqrt();
        let n = 1414;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                let q = a + (b - a) * u + (c - a) * v;
                best = best.min((p - q).norm());
            }
        }
        // sample spacing bounds the discrepancy
        assert!(d <= best + 1e-12 && best - d < 2.0 / n as f64);
        assert!((d - (0.7f64.powi(2) + 0.09).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hierarchy_agrees_with_brute_force() {
        let m = shapes::icosphere(3);
        let brute = SurfaceDistance::with_hierarchy(&m, false);
        let tree = SurfaceDistance::with_hierarchy(&m, true);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..2000 {
            let p = Point::from_fn(|_, _| rng.random_range(-1.5..1.5));
            assert_eq!(brute.distance_squared(&p), tree.distance_squared(&p));
        }
    }
}
