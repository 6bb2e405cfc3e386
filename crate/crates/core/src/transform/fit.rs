//! Least-squares primitive fits used by the face classifier.
//!
//! Planes use the covariance eigen-solution. Cylinders and cones are
//! initialised from the sampled normals (all normals of a surface of
//! revolution meet the axis) and refined with Levenberg-Marquardt on the
//! orthogonal distances.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{grid_normals, orthonormal_frame, unit, Point3, Vec3};

/// Iteration budget for the non-linear refinements.
pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("underdetermined fit: {0}")]
    Underdetermined(&'static str),
    #[error("fit failed: {0}")]
    Failed(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    /// Unit normal, oriented like the grid normal.
    pub normal: Vec3,
    /// Signed offset: `normal . p = offset` on the plane.
    pub offset: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderFit {
    pub axis_point: Point3,
    pub axis: Vec3,
    pub radius: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeFit {
    pub apex: Point3,
    /// Unit axis pointing from the apex into the sampled nappe.
    pub axis: Vec3,
    /// Half-angle in radians.
    pub half_angle: f64,
    pub rms_residual: f64,
}

fn flat(grid: &[Vec<Point3>]) -> Vec<Point3> {
    grid.iter().flatten().copied().collect()
}

fn centroid(points: &[Point3]) -> Point3 {
    let s = points.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords);
    Point3::from(s / points.len() as f64)
}

fn mean_grid_normal(grid: &[Vec<Point3>]) -> Vec3 {
    grid_normals(grid).iter().flatten().fold(Vec3::zeros(), |a, n| a + n)
}

/// Eigen-decomposition sorted by ascending eigenvalue.
fn sorted_eigen(m: Matrix3<f64>) -> ([f64; 3], [Vec3; 3]) {
    let eig = SymmetricEigen::new(m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    (
        idx.map(|k| eig.eigenvalues[k]),
        idx.map(|k| eig.eigenvectors.column(k).into_owned()),
    )
}

/// Orthogonal least-squares plane through the samples.
pub fn fit_plane(grid: &[Vec<Point3>]) -> Result<PlaneFit, FitError> {
    let pts = flat(grid);
    if pts.len() < 3 {
        return Err(FitError::Underdetermined("fewer than three samples"));
    }
    let c = centroid(&pts);
    let cov = pts.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - c;
        acc + d * d.transpose()
    });
    let (vals, vecs) = sorted_eigen(cov);
    if vals[2] <= 0.0 || vals[1] <= 1e-12 * vals[2] {
        return Err(FitError::Underdetermined("samples are collinear"));
    }
    let mut normal = vecs[0].normalize();
    if normal.dot(&mean_grid_normal(grid)) < 0.0 {
        normal = -normal;
    }
    let rms = pts
        .iter()
        .map(|p| (p - c).dot(&normal).powi(2))
        .sum::<f64>()
        / pts.len() as f64;
    Ok(PlaneFit {
        normal,
        offset: normal.dot(&c.coords),
        rms_residual: rms.sqrt(),
    })
}

/// State of a model refined by [`levenberg_marquardt`]. Parameters live in a
/// local chart around the current state; `retract` moves the state.
trait LmModel: Sized {
    fn dim(&self) -> usize;
    fn residuals(&self, points: &[Point3]) -> DVector<f64>;
    fn retract(&self, delta: &DVector<f64>) -> Self;
}

fn cost(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

fn levenberg_marquardt<M: LmModel>(mut model: M, points: &[Point3], max_iter: usize) -> Option<M> {
    let n = model.dim();
    let mut r = model.residuals(points);
    let mut c = cost(&r);
    if !c.is_finite() {
        return None;
    }
    let mut lambda = 1e-3;
    let h = 1e-7;
    for _ in 0..max_iter {
        if c < 1e-28 {
            return Some(model);
        }
        let mut jac = DMatrix::zeros(points.len(), n);
        for k in 0..n {
            let mut e = DVector::zeros(n);
            e[k] = h;
            let plus = model.retract(&e).residuals(points);
            let minus = model.retract(&(-&e)).residuals(points);
            jac.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * &r;
        if g.amax() <= 1e-14 * (1.0 + c) {
            return Some(model);
        }
        loop {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-12);
            }
            let Some(delta) = damped.cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    return Some(model);
                }
                continue;
            };
            let cand = model.retract(&delta);
            let rc = cand.residuals(points);
            let cc = cost(&rc);
            if cc.is_finite() && cc < c {
                let gain = c - cc;
                model = cand;
                r = rc;
                let small = gain <= 1e-14 * c || delta.norm() <= 1e-12;
                c = cc;
                lambda = (lambda / 3.0).max(1e-12);
                if small {
                    return Some(model);
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e12 {
                // no descent direction left: stationary point
                return Some(model);
            }
        }
    }
    None
}

fn perturbed_direction(d: &Vec3, a: f64, b: f64) -> Vec3 {
    let (e1, e2) = orthonormal_frame(d);
    (d + e1 * a + e2 * b).normalize()
}

#[derive(Debug, Clone)]
struct CylinderModel {
    point: Point3,
    axis: Vec3,
    radius: f64,
}

impl LmModel for CylinderModel {
    fn dim(&self) -> usize {
        5
    }

    fn residuals(&self, points: &[Point3]) -> DVector<f64> {
        DVector::from_iterator(
            points.len(),
            points.iter().map(|x| (x - self.point).cross(&self.axis).norm() - self.radius),
        )
    }

    fn retract(&self, d: &DVector<f64>) -> Self {
        let (e1, e2) = orthonormal_frame(&self.axis);
        CylinderModel {
            point: self.point + e1 * d[2] + e2 * d[3],
            axis: perturbed_direction(&self.axis, d[0], d[1]),
            radius: self.radius + d[4],
        }
    }
}

#[derive(Debug, Clone)]
struct ConeModel {
    apex: Point3,
    axis: Vec3,
    half_angle: f64,
}

impl LmModel for ConeModel {
    fn dim(&self) -> usize {
        6
    }

    fn residuals(&self, points: &[Point3]) -> DVector<f64> {
        let (s, c) = self.half_angle.sin_cos();
        DVector::from_iterator(
            points.len(),
            points.iter().map(|x| {
                let v = x - self.apex;
                let h = v.dot(&self.axis);
                let rho = (v - self.axis * h).norm();
                rho * c - h * s
            }),
        )
    }

    fn retract(&self, d: &DVector<f64>) -> Self {
        ConeModel {
            apex: self.apex + Vec3::new(d[2], d[3], d[4]),
            axis: perturbed_direction(&self.axis, d[0], d[1]),
            half_angle: self.half_angle + d[5],
        }
    }
}

/// Axis estimate shared by cylinders and cones: the direction along which
/// every normal has the same component, and a point where the projected
/// normal lines meet.
struct AxisSeed {
    axis: Vec3,
    point: Point3,
}

fn seed_axis(grid: &[Vec<Point3>], pts: &[Point3]) -> Result<AxisSeed, FitError> {
    let normals: Vec<(Point3, Vec3)> = grid
        .iter()
        .flatten()
        .zip(grid_normals(grid).into_iter().flatten())
        .filter(|(_, n)| n.norm() > 0.5)
        .map(|(p, n)| (*p, n))
        .collect();
    if normals.len() < 3 {
        return Err(FitError::Underdetermined("not enough usable normals"));
    }
    let mean = normals.iter().fold(Vec3::zeros(), |a, (_, n)| a + n) / normals.len() as f64;
    let cov = normals.iter().fold(Matrix3::zeros(), |acc, (_, n)| {
        let d = n - mean;
        acc + d * d.transpose()
    });
    let (vals, vecs) = sorted_eigen(cov);
    if vals[2] < 1e-10 * normals.len() as f64 {
        return Err(FitError::Failed("normals do not vary (planar samples)"));
    }
    let axis = vecs[0].normalize();
    let (e1, e2) = orthonormal_frame(&axis);
    let c = centroid(pts);
    let mut lhs = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for (p, n) in &normals {
        let m = Vector2::new(n.dot(&e1), n.dot(&e2));
        let Some(m) = (m.norm() > 1e-9).then(|| m.normalize()) else {
            continue;
        };
        let x = Vector2::new((p - c).dot(&e1), (p - c).dot(&e2));
        let proj = Matrix2::identity() - m * m.transpose();
        lhs += proj;
        rhs += proj * x;
    }
    let det = lhs.determinant();
    if det.abs() <= 1e-9 * lhs.norm_squared().max(1e-300) {
        return Err(FitError::Failed("normal lines are parallel"));
    }
    let q = lhs.try_inverse().ok_or(FitError::Failed("singular axis system"))? * rhs;
    Ok(AxisSeed {
        axis,
        point: c + e1 * q.x + e2 * q.y,
    })
}

fn extent(pts: &[Point3]) -> f64 {
    let c = centroid(pts);
    pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max)
}

fn rms(r: &DVector<f64>) -> f64 {
    (r.norm_squared() / r.len() as f64).sqrt()
}

/// Least-squares circular cylinder through the samples.
pub fn fit_cylinder(grid: &[Vec<Point3>]) -> Result<CylinderFit, FitError> {
    let pts = flat(grid);
    if grid.len() < 3 || grid[0].len() < 3 {
        return Err(FitError::Underdetermined("cylinder fit needs a 3x3 grid"));
    }
    let seed = seed_axis(grid, &pts)?;
    let r0 = pts.iter().map(|x| (x - seed.point).cross(&seed.axis).norm()).sum::<f64>() / pts.len() as f64;
    let model = CylinderModel {
        point: seed.point,
        axis: seed.axis,
        radius: r0,
    };
    let m = levenberg_marquardt(model, &pts, MAX_ITERATIONS).ok_or(FitError::Failed("no convergence"))?;
    let size = extent(&pts);
    if !(m.radius.is_finite() && m.radius > 0.0) || m.radius > 1e3 * size.max(1e-9) {
        return Err(FitError::Failed("degenerate radius"));
    }
    // express the axis point as the foot of the centroid
    let c = centroid(&pts);
    let foot = m.point + m.axis * (c - m.point).dot(&m.axis);
    Ok(CylinderFit {
        axis_point: foot,
        axis: m.axis,
        radius: m.radius,
        rms_residual: rms(&m.residuals(&pts)),
    })
}

/// Least-squares circular cone through the samples.
pub fn fit_cone(grid: &[Vec<Point3>]) -> Result<ConeFit, FitError> {
    let pts = flat(grid);
    if grid.len() < 3 || grid[0].len() < 3 {
        return Err(FitError::Underdetermined("cone fit needs a 3x3 grid"));
    }
    let seed = seed_axis(grid, &pts)?;
    // rho = k * h + b along the seeded axis
    let hr: Vec<(f64, f64)> = pts
        .iter()
        .map(|x| {
            let v = x - seed.point;
            let h = v.dot(&seed.axis);
            (h, (v - seed.axis * h).norm())
        })
        .collect();
    let n = hr.len() as f64;
    let mh = hr.iter().map(|p| p.0).sum::<f64>() / n;
    let mr = hr.iter().map(|p| p.1).sum::<f64>() / n;
    let shh = hr.iter().map(|p| (p.0 - mh).powi(2)).sum::<f64>();
    if shh <= 1e-18 {
        return Err(FitError::Underdetermined("no extent along the axis"));
    }
    let k = hr.iter().map(|p| (p.0 - mh) * (p.1 - mr)).sum::<f64>() / shh;
    let b = mr - k * mh;
    let min_slope = 0.5f64.to_radians().tan();
    if k.abs() < min_slope || k.abs() > 1.0 / min_slope {
        return Err(FitError::Failed("half-angle out of range"));
    }
    let apex_h = -b / k;
    let axis = if k > 0.0 { seed.axis } else { -seed.axis };
    let model = ConeModel {
        apex: seed.point + seed.axis * apex_h,
        axis,
        half_angle: k.abs().atan(),
    };
    let m = levenberg_marquardt(model, &pts, MAX_ITERATIONS).ok_or(FitError::Failed("no convergence"))?;
    let limit = 0.5f64.to_radians();
    if !m.half_angle.is_finite() || m.half_angle < limit || m.half_angle > std::f64::consts::FRAC_PI_2 - limit {
        return Err(FitError::Failed("half-angle out of range"));
    }
    if (m.apex - centroid(&pts)).norm() > 1e3 * extent(&pts).max(1e-9) {
        return Err(FitError::Failed("apex at infinity"));
    }
    Ok(ConeFit {
        apex: m.apex,
        axis: m.axis,
        half_angle: m.half_angle,
        rms_residual: rms(&m.residuals(&pts)),
    })
}

/// Unit normal of a fitted cylinder at `x`, pointing away from the axis.
pub(crate) fn cylinder_normal(fit: &CylinderFit, x: &Point3) -> Option<Vec3> {
    let v = x - fit.axis_point;
    unit(&(v - fit.axis * v.dot(&fit.axis)))
}

/// Unit normal of a fitted cone at `x`, pointing away from the axis.
pub(crate) fn cone_normal(fit: &ConeFit, x: &Point3) -> Option<Vec3> {
    let v = x - fit.apex;
    let radial = unit(&(v - fit.axis * v.dot(&fit.axis)))?;
    let (s, c) = fit.half_angle.sin_cos();
    Some(radial * c - fit.axis * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid<F: Fn(f64, f64) -> Point3>(n: usize, m: usize, f: F) -> Vec<Vec<Point3>> {
        (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| f(i as f64 / (n - 1) as f64, j as f64 / (m - 1) as f64))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn plane_z0() {
        let g = grid(3, 3, |u, v| Point3::new(u, v, 0.0));
        let f = fit_plane(&g).unwrap();
        assert!((f.normal.z.abs() - 1.0).abs() < 1e-12);
        assert!(f.rms_residual < 1e-12);
    }

    #[test]
    fn plane_x_plus_y_plus_z() {
        let g = grid(4, 5, |u, v| Point3::new(u, v, 1.0 - u - v));
        let f = fit_plane(&g).unwrap();
        let expected = Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        assert!((f.normal.dot(&expected).abs() - 1.0).abs() < 1e-9);
        assert!(f.rms_residual < 1e-9);
    }

    #[test]
    fn collinear_plane_is_underdetermined() {
        let g = grid(3, 3, |u, v| Point3::new(u + v, 0.0, 0.0));
        assert!(matches!(fit_plane(&g), Err(FitError::Underdetermined(_))));
    }

    #[test]
    fn exact_cylinder() {
        let g = grid(7, 9, |u, v| {
            let t = v * 120f64.to_radians();
            Point3::new(5.0 * t.cos(), 5.0 * t.sin(), 10.0 * u)
        });
        let f = fit_cylinder(&g).unwrap();
        assert!((f.radius - 5.0).abs() < 1e-6, "{f:?}");
        assert!(f.rms_residual < 1e-6);
        assert!((f.axis.z.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cylinder_on_plane_fails_or_misses() {
        let g = grid(5, 5, |u, v| Point3::new(10.0 * u, 10.0 * v, 0.0));
        match fit_cylinder(&g) {
            Err(_) => {}
            Ok(f) => assert!(f.rms_residual > 1e-3),
        }
    }

    #[test]
    fn exact_cone() {
        let alpha = 25f64.to_radians();
        let g = grid(6, 9, |u, v| {
            let h = 4.0 + 8.0 * u;
            let t = v * PI;
            let r = h * alpha.tan();
            Point3::new(r * t.cos(), r * t.sin(), -h)
        });
        let f = fit_cone(&g).unwrap();
        assert!((f.half_angle - alpha).abs() < 1e-7, "{f:?}");
        assert!(f.rms_residual < 1e-7);
        assert!(f.apex.coords.norm() < 1e-6);
        assert!((f.axis + Vec3::z()).norm() < 1e-6);
    }
}
