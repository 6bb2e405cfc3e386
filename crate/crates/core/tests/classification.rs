//! Geometry-type classification on constructed surfaces, under rigid motions,
//! and against independent fits.

use std::collections::BTreeMap;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, Point3, Rotation3, Translation3, Unit, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use ose_planner::fixtures::{all_parts, pump_carter, sample_grid, type_zoo};
use ose_planner::part::Part;
use ose_planner::transform::fit::{fit_cylinder, fit_plane};
use ose_planner::transform::{classify_face, classify_grid, GeometryType, Tolerances};

type Vec3 = Vector3<f64>;

fn random_motion(rng: &mut ChaCha8Rng) -> impl Fn(&Point3<f64>) -> Point3<f64> {
    let axis = Vec3::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    );
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), rng.gen_range(-3.1..3.1));
    let shift = Translation3::new(
        rng.gen_range(-200.0..200.0),
        rng.gen_range(-200.0..200.0),
        rng.gen_range(-200.0..200.0),
    );
    move |p| shift * (rot * p)
}

fn types(part: &Part) -> BTreeMap<String, GeometryType> {
    let tol = Tolerances::default();
    part.faces
        .iter()
        .map(|f| (f.id.clone(), classify_face(f, &tol).geometry_type))
        .collect()
}

#[test]
fn type_zoo_is_classified_exactly() {
    use GeometryType::*;
    let expected = BTreeMap::from([
        ("ZOO_PLANE".to_string(), Plan),
        ("ZOO_CYLINDER".to_string(), Cylinder),
        ("ZOO_CONE".to_string(), ConeShaped),
        ("ZOO_RULED".to_string(), Ruled),
        ("ZOO_TORUS".to_string(), ConstRadiusSweep),
        ("ZOO_BUMP".to_string(), Unspecified),
    ]);
    let zoo = type_zoo();
    assert_eq!(types(&zoo), expected);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..20 {
        let moved = zoo.map_points(random_motion(&mut rng));
        assert_eq!(types(&moved), expected, "motion {k}");
    }
}

#[test]
fn pump_carter_synthesis() {
    use GeometryType::*;
    let t = types(&pump_carter());
    let count = |g| t.values().filter(|&&x| x == g).count();
    assert_eq!(
        [Plan, Cylinder, ConeShaped, Ruled, ConstRadiusSweep, Unspecified].map(count),
        [16, 4, 1, 1, 1, 1]
    );
    assert_eq!(t["BORE"], Cylinder);
    assert_eq!(t["CSK"], ConeShaped);
    assert_eq!(t["RIGHT"], Ruled);
    assert_eq!(t["TORUS"], ConstRadiusSweep);
    assert_eq!(t["TOP_W"], Unspecified);
    assert_eq!(t["FIL_SE"], Cylinder);
}

#[test]
fn every_fixture_is_stable_under_rigid_motions() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for part in all_parts() {
        let reference = types(&part);
        for k in 0..20 {
            let moved = part.map_points(random_motion(&mut rng));
            assert_eq!(types(&moved), reference, "{} motion {k}", part.id);
        }
    }
}

fn plane_grid(normal: Vec3, origin: Vec3, u: (f64, f64), v: (f64, f64), rows: usize, cols: usize, warp: f64) -> Vec<Vec<Point3<f64>>> {
    let n = normal.normalize();
    let (e1, e2) = ose_planner::geometry::orthonormal_frame(&n);
    sample_grid(rows, cols, |s, t| {
        // non-uniform but monotone parametrisation inside the plane
        let s = s + warp * s * (1.0 - s);
        let t = t - warp * t * (1.0 - t) * 0.5;
        Point3::from(origin + e1 * (u.0 * s + v.0 * t) + e2 * (u.1 * s + v.1 * t))
    })
}

fn unit_vec() -> impl Strategy<Value = Vec3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 0.05)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalize())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planes_are_plan_never_ruled(
        n in unit_vec(),
        ox in -100.0f64..100.0, oy in -100.0f64..100.0, oz in -100.0f64..100.0,
        ua in 5.0f64..80.0, vb in 5.0f64..80.0, shear in -0.8f64..0.8,
        rows in 3usize..9, cols in 3usize..9, warp in 0.0f64..0.9,
    ) {
        let grid = plane_grid(n, Vec3::new(ox, oy, oz), (ua, 0.0), (shear * vb, vb), rows, cols, warp);
        let c = classify_grid(&grid, &Tolerances::default());
        prop_assert_eq!(c.geometry_type, GeometryType::Plan);
    }

    #[test]
    fn plane_residual_matches_svd(
        n in unit_vec(),
        seed in any::<u64>(),
        noise in 0.0f64..0.05,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = plane_grid(n, Vec3::zeros(), (40.0, 0.0), (0.0, 25.0), 7, 6, 0.0);
        for p in grid.iter_mut().flatten() {
            *p += n * noise * rng.gen_range(-1.0..1.0);
        }
        let pts: Vec<Point3<f64>> = grid.iter().flatten().copied().collect();
        let c = pts.iter().fold(Vec3::zeros(), |a, p| a + p.coords) / pts.len() as f64;
        let m = DMatrix::from_fn(pts.len(), 3, |i, j| pts[i][j] - c[j]);
        let sv = m.svd(false, false).singular_values;
        let oracle = sv.min() / (pts.len() as f64).sqrt();
        let fit = fit_plane(&grid).unwrap();
        prop_assert!((fit.rms_residual - oracle).abs() < 1e-9, "{} vs {}", fit.rms_residual, oracle);
        let expected = if fit.rms_residual <= Tolerances::default().plane {
            GeometryType::Plan
        } else {
            classify_grid(&grid, &Tolerances::default()).geometry_type
        };
        prop_assert_eq!(classify_grid(&grid, &Tolerances::default()).geometry_type, expected);
        prop_assert_ne!(classify_grid(&grid, &Tolerances::default()).geometry_type, GeometryType::Ruled);
    }
}

/// Sum of squared radial deviations for an axis given by spherical angles and
/// a point in the plane through `centre` orthogonal to the initial axis.
struct CylinderCost {
    points: Vec<Point3<f64>>,
    centre: Vec3,
    frame: (Vec3, Vec3),
}

impl CylinderCost {
    fn axis_and_point(&self, x: &[f64]) -> (Vec3, Vec3) {
        let axis = Vec3::new(x[0].sin() * x[1].cos(), x[0].sin() * x[1].sin(), x[0].cos());
        (axis, self.centre + self.frame.0 * x[2] + self.frame.1 * x[3])
    }

    fn radii(&self, x: &[f64]) -> Vec<f64> {
        let (axis, q) = self.axis_and_point(x);
        self.points
            .iter()
            .map(|p| {
                let d = p.coords - q;
                (d - axis * d.dot(&axis)).norm()
            })
            .collect()
    }
}

impl CostFunction for CylinderCost {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> Result<f64, argmin::core::Error> {
        let r = self.radii(x);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        Ok(r.iter().map(|v| (v - mean).powi(2)).sum())
    }
}

#[test]
fn cylinder_fit_agrees_with_nelder_mead() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..12 {
        let radius = rng.gen_range(3.0..40.0);
        let span = rng.gen_range(1.0..3.0);
        let height = rng.gen_range(5.0..50.0);
        let grid = sample_grid(9, 7, |s, t| {
            let a = span * s;
            Point3::new(radius * a.cos(), radius * a.sin(), height * t)
        });
        let motion = random_motion(&mut rng);
        let grid: Vec<Vec<Point3<f64>>> = grid
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|p| {
                        let n = Vec3::new(p.x, p.y, 0.0).normalize();
                        motion(&(p + n * 0.0005 * rng.gen_range(-1.0..1.0)))
                    })
                    .collect()
            })
            .collect();

        let fit = fit_cylinder(&grid).unwrap();

        // start from the true axis tilted a few degrees and shifted
        let true_axis = (motion(&Point3::new(0.0, 0.0, 1.0)) - motion(&Point3::origin())).normalize();
        let centre = motion(&Point3::new(0.0, 0.0, height / 2.0)).coords;
        let (e1, e2) = ose_planner::geometry::orthonormal_frame(&true_axis);
        let theta = true_axis.z.clamp(-1.0, 1.0).acos() + 0.05;
        let phi = true_axis.y.atan2(true_axis.x) - 0.05;
        let cost = CylinderCost {
            points: grid.iter().flatten().copied().collect(),
            centre,
            frame: (e1, e2),
        };
        let x0 = vec![theta, phi, 0.3, -0.2];
        let simplex: Vec<Vec<f64>> = std::iter::once(x0.clone())
            .chain((0..4).map(|k| {
                let mut x = x0.clone();
                x[k] += if k < 2 { 0.05 } else { 0.5 };
                x
            }))
            .collect();
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-14).unwrap();
        let res = Executor::new(cost, solver)
            .configure(|s| s.max_iters(20_000))
            .run()
            .unwrap();
        let best = res.state.best_param.clone().unwrap();
        let radii = res.problem.problem.as_ref().unwrap().radii(&best);
        let oracle_radius = radii.iter().sum::<f64>() / radii.len() as f64;
        let oracle_rms = (radii.iter().map(|r| (r - oracle_radius).powi(2)).sum::<f64>() / radii.len() as f64).sqrt();

        assert!((fit.radius - oracle_radius).abs() < 2e-3 * radius.max(1.0), "case {case}: {} vs {}", fit.radius, oracle_radius);
        assert!(fit.rms_residual <= oracle_rms + 1e-5, "case {case}: {} vs {}", fit.rms_residual, oracle_rms);
        assert!(fit.axis.cross(&true_axis).norm() < 1e-2, "case {case}");
        assert_eq!(classify_grid(&grid, &Tolerances::default()).geometry_type, GeometryType::Cylinder);
    }
}
