//! Small geometric vocabulary shared by every stage: points, boxes, grid
//! derivatives and ray casting against sampled faces.

use nalgebra::{Point3 as NaPoint3, Vector3};
use serde::{Deserialize, Serialize};

/// A point in millimetres.
pub type Point3 = NaPoint3<f64>;
/// A free vector (directions, normals, offsets).
pub type Vec3 = Vector3<f64>;

/// Axis-aligned box, `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub min: Point3,
    pub max: Point3,
}

impl Box3 {
    /// Smallest box containing every point, `None` for an empty iterator.
    pub fn from_points<'a, I: IntoIterator<Item = &'a Point3>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Box3 {
            min: first,
            max: first,
        };
        for p in it {
            b.include(p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: &Point3) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn union(&self, other: &Box3) -> Box3 {
        let mut b = *self;
        b.include(&other.min);
        b.include(&other.max);
        b
    }

    pub fn contains_box(&self, other: &Box3) -> bool {
        (0..3).all(|k| self.min[k] <= other.min[k] && other.max[k] <= self.max[k])
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn corners(&self) -> [Point3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Point3::new(a.x, a.y, a.z),
            Point3::new(b.x, a.y, a.z),
            Point3::new(a.x, b.y, a.z),
            Point3::new(b.x, b.y, a.z),
            Point3::new(a.x, a.y, b.z),
            Point3::new(b.x, a.y, b.z),
            Point3::new(a.x, b.y, b.z),
            Point3::new(b.x, b.y, b.z),
        ]
    }

    /// Slab test. Returns the parametric entry/exit interval of the ray
    /// `origin + t * dir` for `t >= t_min`, if any.
    pub fn ray_interval(&self, origin: &Point3, dir: &Vec3, t_min: f64) -> Option<(f64, f64)> {
        let mut lo = t_min;
        let mut hi = f64::INFINITY;
        for k in 0..3 {
            if dir[k].abs() < 1e-15 {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
            } else {
                let inv = 1.0 / dir[k];
                let mut t0 = (self.min[k] - origin[k]) * inv;
                let mut t1 = (self.max[k] - origin[k]) * inv;
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                lo = lo.max(t0);
                hi = hi.min(t1);
                if lo > hi {
                    return None;
                }
            }
        }
        Some((lo, hi))
    }
}

/// Unit vector, or `None` when the input is (numerically) zero.
pub fn unit(v: &Vec3) -> Option<Vec3> {
    let n = v.norm();
    (n > 1e-12 && n.is_finite()).then(|| v / n)
}

/// Two unit vectors completing `d` to a right-handed orthonormal frame.
pub fn orthonormal_frame(d: &Vec3) -> (Vec3, Vec3) {
    let helper = if d.x.abs() < 0.6 {
        Vec3::x()
    } else if d.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = (helper - d * d.dot(&helper)).normalize();
    let e2 = d.cross(&e1);
    (e1, e2)
}

/// Angle between two directions in radians, robust near 0 and pi.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Lexicographic comparison of vector components.
pub fn lex_cmp(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    for k in 0..3 {
        match a[k].total_cmp(&b[k]) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// First-order partial derivatives of a sampled grid by index, central in the
/// interior and second-order one-sided at the border.
pub(crate) fn grid_derivatives(grid: &[Vec<Point3>], i: usize, j: usize) -> (Vec3, Vec3) {
    (
        diff_along(grid.len(), i, |k| grid[k][j]),
        diff_along(grid[0].len(), j, |k| grid[i][k]),
    )
}

fn diff_along<F: Fn(usize) -> Point3>(n: usize, k: usize, at: F) -> Vec3 {
    if n < 2 {
        return Vec3::zeros();
    }
    if k > 0 && k + 1 < n {
        return (at(k + 1) - at(k - 1)) * 0.5;
    }
    if n == 2 {
        return at(1) - at(0);
    }
    if k == 0 {
        (at(1) - at(0)) * 2.0 - (at(2) - at(0)) * 0.5
    } else {
        (at(k) - at(k - 1)) * 2.0 - (at(k) - at(k - 2)) * 0.5
    }
}

/// Unit normal `d/du x d/dv` at every grid node. Zero where degenerate.
pub fn grid_normals(grid: &[Vec<Point3>]) -> Vec<Vec<Vec3>> {
    (0..grid.len())
        .map(|i| {
            (0..grid[0].len())
                .map(|j| {
                    let (du, dv) = grid_derivatives(grid, i, j);
                    unit(&du.cross(&dv)).unwrap_or_else(Vec3::zeros)
                })
                .collect()
        })
        .collect()
}

/// Sum of the cells' vector areas (oriented like `d/du x d/dv`) and the total
/// unsigned area.
pub fn vector_area(grid: &[Vec<Point3>]) -> (Vec3, f64) {
    let mut sum = Vec3::zeros();
    let mut total = 0.0;
    for i in 0..grid.len().saturating_sub(1) {
        for j in 0..grid[i].len().saturating_sub(1) {
            let a = (grid[i + 1][j + 1] - grid[i][j]).cross(&(grid[i][j + 1] - grid[i + 1][j])) * 0.5;
            sum += a;
            total += a.norm();
        }
    }
    (sum, total)
}

/// Nodes not on the grid border. Falls back to every node along a dimension
/// that has fewer than three samples.
pub fn interior_nodes(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let ri: Vec<usize> = if rows >= 3 { (1..rows - 1).collect() } else { (0..rows).collect() };
    let ci: Vec<usize> = if cols >= 3 { (1..cols - 1).collect() } else { (0..cols).collect() };
    ri.iter()
        .flat_map(|&i| ci.iter().map(move |&j| (i, j)))
        .collect()
}

/// Triangulated view of a sampled face for exact ray tests. Hits on the
/// face's outer boundary are excluded so that rays grazing a shared edge do
/// not count as occluded.
#[derive(Debug, Clone)]
pub struct TriangleSoup {
    pub bbox: Box3,
    tris: Vec<Tri>,
}

#[derive(Debug, Clone)]
struct Tri {
    a: Point3,
    b: Point3,
    c: Point3,
    // boundary flags for edges ab (v = 0), ac (u = 0), bc (w = 0)
    border: [bool; 3],
    // boundary flags for vertices a, b, c
    corner: [bool; 3],
}

const BARY_EPS: f64 = 1e-9;

impl TriangleSoup {
    pub fn from_grid(grid: &[Vec<Point3>]) -> Self {
        let rows = grid.len();
        let cols = grid[0].len();
        let mut tris = Vec::with_capacity(2 * (rows - 1) * (cols - 1));
        let on_border = |i: usize, j: usize| i == 0 || j == 0 || i + 1 == rows || j + 1 == cols;
        for i in 0..rows - 1 {
            for j in 0..cols - 1 {
                let p00 = grid[i][j];
                let p10 = grid[i + 1][j];
                let p01 = grid[i][j + 1];
                let p11 = grid[i + 1][j + 1];
                tris.push(Tri {
                    a: p00,
                    b: p10,
                    c: p11,
                    border: [j == 0, false, i + 2 == rows],
                    corner: [on_border(i, j), on_border(i + 1, j), on_border(i + 1, j + 1)],
                });
                tris.push(Tri {
                    a: p00,
                    b: p01,
                    c: p11,
                    border: [i == 0, false, j + 2 == cols],
                    corner: [on_border(i, j), on_border(i, j + 1), on_border(i + 1, j + 1)],
                });
            }
        }
        let bbox = Box3::from_points(grid.iter().flatten()).expect("non-empty grid");
        TriangleSoup { bbox, tris }
    }

    /// Whether the ray hits the surface at some `t > t_min`.
    pub fn ray_hits(&self, origin: &Point3, dir: &Vec3, t_min: f64) -> bool {
        if self.bbox.ray_interval(origin, dir, t_min).is_none() {
            return false;
        }
        self.tris.iter().any(|t| t.hit(origin, dir, t_min))
    }
}

impl Tri {
    fn hit(&self, origin: &Point3, dir: &Vec3, t_min: f64) -> bool {
        let e1 = self.b - self.a;
        let e2 = self.c - self.a;
        let p = dir.cross(&e2);
        let det = e1.dot(&p);
        let scale = e1.norm() * e2.norm();
        if det.abs() <= 1e-12 * scale.max(1e-300) {
            return false;
        }
        let inv = 1.0 / det;
        let s = origin - self.a;
        let u = s.dot(&p) * inv;
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        let w = 1.0 - u - v;
        let ok = |val: f64, border: bool| if border { val > BARY_EPS } else { val >= -BARY_EPS };
        if !(ok(v, self.border[0]) && ok(u, self.border[1]) && ok(w, self.border[2])) {
            return false;
        }
        if [w, u, v].iter().zip(self.corner).any(|(&x, c)| c && x >= 1.0 - BARY_EPS) {
            return false;
        }
        let t = e2.dot(&q) * inv;
        t > t_min
    }
}
