use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::geometry::Point3;
use crate::part::{Adjacency, Part, SampledFace};

/// Material angle across a convex edge, in degrees.
pub const CONVEX: f64 = 90.0;
/// Material angle across a concave edge.
pub const CONCAVE: f64 = 270.0;
/// Material angle across a tangent or coplanar edge.
pub const FLUSH: f64 = 180.0;

fn lin(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn steps(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| k as f64 / (n - 1) as f64)
}

fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

/// Samples `f(s, t)` on a `rows x cols` grid, `s` and `t` running over `[0, 1]`.
pub fn sample_grid<F: Fn(f64, f64) -> Point3>(rows: usize, cols: usize, f: F) -> Vec<Vec<Point3>> {
    steps(rows).map(|s| steps(cols).map(|t| f(s, t)).collect()).collect()
}

/// Points on a horizontal circular arc at height `z`.
fn arc(cx: f64, cy: f64, r: f64, a0: f64, a1: f64, n: usize, z: f64) -> Vec<Point3> {
    steps(n)
        .map(|t| {
            let a = lin(a0, a1, t);
            p(cx + r * a.cos(), cy + r * a.sin(), z)
        })
        .collect()
}

#[derive(Default)]
struct PartBuilder {
    faces: Vec<SampledFace>,
}

impl PartBuilder {
    fn add(&mut self, id: &str, label: &str, grid: Vec<Vec<Point3>>) {
        self.faces.push(SampledFace {
            id: id.to_string(),
            grid,
            adjacency: vec![],
            label: Some(label.to_string()),
        });
    }

    fn link(&mut self, a: &str, b: &str, angle: f64) {
        for (from, to) in [(a, b), (b, a)] {
            let f = self
                .faces
                .iter_mut()
                .find(|f| f.id == from)
                .unwrap_or_else(|| panic!("unknown fixture face {from}"));
            f.adjacency.push(Adjacency {
                face: to.to_string(),
                material_angle_deg: angle,
            });
        }
    }

    fn link_all(&mut self, a: &str, others: &[&str], angle: f64) {
        for b in others {
            self.link(a, b, angle);
        }
    }

    fn build(self, id: &str) -> Part {
        Part::new(id, self.faces)
    }
}

/// Adds the six faces of the box `[0,lx] x [0,ly] x [0,lz]` shifted by `o`,
/// with ids `{prefix}TOP`, `{prefix}BOTTOM`, `{prefix}FRONT` (y = 0),
/// `{prefix}BACK`, `{prefix}LEFT` (x = 0) and `{prefix}RIGHT`.
fn add_block(b: &mut PartBuilder, prefix: &str, o: [f64; 3], l: [f64; 3], n: usize) {
    let [ox, oy, oz] = o;
    let [lx, ly, lz] = l;
    let id = |s: &str| format!("{prefix}{s}");
    b.add(&id("TOP"), "block top", sample_grid(n, n, |s, t| p(ox + lx * s, oy + ly * t, oz + lz)));
    b.add(&id("BOTTOM"), "block bottom", sample_grid(n, n, |s, t| p(ox + lx * t, oy + ly * s, oz)));
    b.add(&id("FRONT"), "block side", sample_grid(n, n, |s, t| p(ox + lx * s, oy, oz + lz * t)));
    b.add(&id("BACK"), "block side", sample_grid(n, n, |s, t| p(ox + lx * t, oy + ly, oz + lz * s)));
    b.add(&id("LEFT"), "block side", sample_grid(n, n, |s, t| p(ox, oy + ly * t, oz + lz * s)));
    b.add(&id("RIGHT"), "block side", sample_grid(n, n, |s, t| p(ox + lx, oy + ly * s, oz + lz * t)));
    let sides = [id("FRONT"), id("RIGHT"), id("BACK"), id("LEFT")];
    for k in 0..4 {
        b.link(&sides[k], &sides[(k + 1) % 4], CONVEX);
        b.link(&sides[k], &id("TOP"), CONVEX);
        b.link(&sides[k], &id("BOTTOM"), CONVEX);
    }
}

/// A lone rectangular block `[0,lx] x [0,ly] x [0,lz]`.
pub fn isolated_block(lx: f64, ly: f64, lz: f64) -> Part {
    let mut b = PartBuilder::default();
    add_block(&mut b, "", [0.0; 3], [lx, ly, lz], 5);
    b.build("isolated-block")
}

/// One face of each geometry type, far enough apart not to interact: a
/// plane, a cylinder patch, a cone patch, a hyperbolic paraboloid, a torus
/// patch and a Gaussian bump.
pub fn type_zoo() -> Part {
    let mut b = PartBuilder::default();
    b.add("ZOO_PLANE", "plane", sample_grid(9, 9, |s, t| p(20.0 * s, 50.0 * t, 0.0)));
    b.add(
        "ZOO_CYLINDER",
        "cylinder patch r=10",
        sample_grid(13, 9, |s, t| {
            let a = lin(0.0, TAU / 3.0, s);
            p(100.0 + 10.0 * a.cos(), 10.0 * a.sin(), 30.0 * t)
        }),
    );
    b.add(
        "ZOO_CONE",
        "cone patch, half angle 30 deg",
        sample_grid(13, 9, |s, t| {
            let a = lin(0.0, TAU / 3.0, s);
            let z = 20.0 * t;
            let r = 5.0 + z * (PI / 6.0).tan();
            p(200.0 + r * a.cos(), r * a.sin(), z)
        }),
    );
    b.add(
        "ZOO_RULED",
        "hyperbolic paraboloid z = xy/20",
        sample_grid(11, 11, |s, t| {
            let (x, y) = (lin(-10.0, 10.0, s), lin(-10.0, 10.0, t));
            p(300.0 + x, y, x * y / 20.0)
        }),
    );
    b.add(
        "ZOO_TORUS",
        "torus patch R=20 r=3",
        sample_grid(13, 11, |s, t| {
            let a = lin(0.0, PI / 3.0, s);
            let phi = lin(0.0, FRAC_PI_2, t);
            let rho = 20.0 + 3.0 * phi.cos();
            p(400.0 + rho * a.cos(), rho * a.sin(), 3.0 * phi.sin())
        }),
    );
    b.add(
        "ZOO_BUMP",
        "gaussian bump",
        sample_grid(15, 15, |s, t| {
            let (x, y) = (lin(-10.0, 10.0, s), lin(-10.0, 10.0, t));
            p(500.0 + x, y, 4.0 * (-(x * x + y * y) / 50.0).exp())
        }),
    );
    b.build("type-zoo")
}

const BORE_CENTRE: (f64, f64) = (90.0, 40.0);
const BORE_SAMPLES: usize = 33;
const TORUS_TUBE: f64 = 3.0;

fn bore_angle(k: usize) -> f64 {
    TAU * k as f64 / (BORE_SAMPLES - 1) as f64
}

fn bore_point(rho: f64, k: usize, z: f64) -> Point3 {
    let a = bore_angle(k);
    p(BORE_CENTRE.0 + rho * a.cos(), BORE_CENTRE.1 + rho * a.sin(), z)
}

/// Radius at which the torus round meets the top face.
fn torus_mouth() -> f64 {
    // the round is tangent to the top plane and to the 45 degree countersink
    // whose radius is 5 at z = 35
    10.0 - TORUS_TUBE + 2.0 * TORUS_TUBE * FRAC_PI_4.sin()
}

/// Top face around the bore mouth, between the mouth circle and the
/// rectangle `[76,104] x [y0,y1]`, for bore sample indices `k0..=k1`.
fn mouth_piece(k0: usize, k1: usize, y_edge: f64) -> Vec<Vec<Point3>> {
    let (cx, cy) = BORE_CENTRE;
    let mouth = torus_mouth();
    let cols = k1 - k0 + 1;
    (0..5)
        .map(|i| {
            let t = i as f64 / 4.0;
            (0..cols)
                .map(|j| {
                    let a = bore_angle(k0 + j);
                    let (c, s) = (a.cos(), a.sin());
                    let tx = if c.abs() < 1e-12 {
                        f64::INFINITY
                    } else if c > 0.0 {
                        (104.0 - cx) / c
                    } else {
                        (76.0 - cx) / c
                    };
                    let ty = if s.abs() < 1e-12 || (y_edge - cy) / s < 0.0 {
                        f64::INFINITY
                    } else {
                        (y_edge - cy) / s
                    };
                    let rho = lin(mouth, tx.min(ty), t);
                    p(cx + rho * c, cy + rho * s, 40.0)
                })
                .collect()
        })
        .collect()
}

/// The 24-face pump-carter-like part: a 120 x 80 x 40 block with a pocket
/// (four walls, two corner fillets r = 5, floor 30 mm deep), a countersunk
/// blind bore with a toroidal mouth round, a twisted ruled side, a rounded
/// vertical corner and a shallow freeform dip in the top.
pub fn pump_carter() -> Part {
    let mut b = PartBuilder::default();
    let n = 9;
    let na = 7;
    let twist = 0.002;

    // outline of the rounded corner at (5, 5), shared by top, bottom and round
    let corner = arc(5.0, 5.0, 5.0, PI, 1.5 * PI, na, 0.0);
    let mut south: Vec<(f64, f64)> = corner.iter().map(|q| (q.x, q.y)).collect();
    south.extend(steps(n).skip(1).map(|t| (lin(5.0, 120.0, t), 0.0)));

    b.add("BOTTOM", "bottom", {
        (0..5)
            .map(|i| {
                let t = i as f64 / 4.0;
                south.iter().map(|&(x, y)| p(x, lin(y, 80.0, t), 0.0)).collect()
            })
            .collect()
    });
    b.add("FRONT", "front side", sample_grid(n, 5, |s, t| p(lin(5.0, 120.0, s), 0.0, 40.0 * t)));
    b.add("BACK", "back side", sample_grid(5, n, |s, t| p(120.0 * t, 80.0, 40.0 * s)));
    b.add("LEFT", "left side", sample_grid(5, n, |s, t| p(0.0, lin(5.0, 80.0, t), 40.0 * s)));
    b.add(
        "RIGHT",
        "twisted right side",
        sample_grid(n, 7, |s, t| {
            let (y, z) = (80.0 * s, 40.0 * t);
            p(120.0 + twist * (y - 40.0) * (z - 20.0), y, z)
        }),
    );
    b.add(
        "ROUND_FL",
        "vertical corner round r=5",
        corner
            .iter()
            .map(|q| steps(5).map(|t| p(q.x, q.y, 40.0 * t)).collect())
            .collect(),
    );

    // top face pieces
    b.add(
        "TOP_S",
        "top, south strip",
        south
            .iter()
            .map(|&(x, y)| steps(5).map(|t| p(x, lin(y, 20.0, t), 40.0)).collect())
            .collect(),
    );
    b.add("TOP_N", "top, north strip", sample_grid(n, 5, |s, t| p(120.0 * s, lin(60.0, 80.0, t), 40.0)));
    b.add(
        "TOP_W",
        "top, freeform dip",
        sample_grid(9, 13, |s, t| {
            let (x, y) = (20.0 * s, lin(20.0, 60.0, t));
            let r2 = (x - 10.0).powi(2) + (y - 40.0).powi(2);
            p(x, y, 40.0 - 1.5 * (-r2 / 16.0).exp())
        }),
    );
    b.add("TOP_E", "top, east piece", sample_grid(5, n, |s, t| p(lin(104.0, 120.0, s), lin(20.0, 60.0, t), 40.0)));

    // east rim of the pocket: fillet, straight wall, fillet
    let fil_se = arc(55.0, 25.0, 5.0, -FRAC_PI_2, 0.0, na, 0.0);
    let fil_ne = arc(55.0, 55.0, 5.0, 0.0, FRAC_PI_2, na, 0.0);
    let mut rim: Vec<(f64, f64)> = fil_se.iter().map(|q| (q.x, q.y)).collect();
    rim.extend(steps(n).skip(1).take(n - 2).map(|t| (60.0, lin(25.0, 55.0, t))));
    rim.extend(fil_ne.iter().map(|q| (q.x, q.y)));

    b.add(
        "TOP_M",
        "top, between pocket and bore",
        steps(5)
            .map(|t| rim.iter().map(|&(x, y)| p(lin(x, 76.0, t), y, 40.0)).collect())
            .collect(),
    );
    b.add("TOP_BS", "top, south of bore", mouth_piece((BORE_SAMPLES - 1) / 2, BORE_SAMPLES - 1, 20.0));
    b.add("TOP_BN", "top, north of bore", mouth_piece(0, (BORE_SAMPLES - 1) / 2, 60.0));

    // pocket
    b.add(
        "FLOOR",
        "pocket floor",
        steps(n)
            .map(|t| rim.iter().map(|&(x, y)| p(lin(20.0, x, t), y, 10.0)).collect())
            .collect(),
    );
    b.add("WALL_W", "pocket wall", sample_grid(n, 7, |s, t| p(20.0, lin(20.0, 60.0, s), lin(10.0, 40.0, t))));
    b.add("WALL_S", "pocket wall", sample_grid(7, n, |s, t| p(lin(20.0, 55.0, t), 20.0, lin(10.0, 40.0, s))));
    b.add("WALL_N", "pocket wall", sample_grid(n, 7, |s, t| p(lin(20.0, 55.0, s), 60.0, lin(10.0, 40.0, t))));
    b.add("WALL_E", "pocket wall", sample_grid(7, n, |s, t| p(60.0, lin(25.0, 55.0, t), lin(10.0, 40.0, s))));
    for (id, pts) in [("FIL_SE", &fil_se), ("FIL_NE", &fil_ne)] {
        b.add(
            id,
            "pocket corner fillet r=5",
            steps(7)
                .map(|t| pts.iter().map(|q| p(q.x, q.y, lin(10.0, 40.0, t))).collect())
                .collect(),
        );
    }

    // bore with countersink and mouth round
    let cone_top = 35.0 + torus_mouth() - TORUS_TUBE * FRAC_PI_4.sin() - 5.0;
    b.add(
        "BORE",
        "blind bore r=5",
        steps(7)
            .map(|t| (0..BORE_SAMPLES).map(|k| bore_point(5.0, k, lin(15.0, 35.0, t))).collect())
            .collect(),
    );
    b.add(
        "CSK",
        "countersink 45 deg",
        steps(5)
            .map(|t| {
                let z = lin(35.0, cone_top, t);
                (0..BORE_SAMPLES).map(|k| bore_point(5.0 + (z - 35.0), k, z)).collect()
            })
            .collect(),
    );
    b.add(
        "TORUS",
        "toroidal mouth round r=3",
        (0..BORE_SAMPLES)
            .map(|k| {
                steps(7)
                    .map(|t| {
                        let phi = lin(0.0, FRAC_PI_4, t);
                        bore_point(
                            torus_mouth() - TORUS_TUBE * phi.sin(),
                            k,
                            40.0 - TORUS_TUBE + TORUS_TUBE * phi.cos(),
                        )
                    })
                    .collect()
            })
            .collect(),
    );
    b.add(
        "BORE_BOTTOM",
        "bore bottom",
        sample_grid(5, 5, |s, t| p(lin(86.5, 93.5, s), lin(36.5, 43.5, t), 15.0)),
    );

    b.link_all("BOTTOM", &["FRONT", "BACK", "LEFT", "RIGHT", "ROUND_FL"], CONVEX);
    b.link_all("FRONT", &["TOP_S", "RIGHT"], CONVEX);
    b.link_all("ROUND_FL", &["FRONT", "LEFT"], FLUSH);
    b.link("ROUND_FL", "TOP_S", CONVEX);
    b.link_all("BACK", &["TOP_N", "LEFT", "RIGHT"], CONVEX);
    b.link_all("LEFT", &["TOP_S", "TOP_W", "TOP_N"], CONVEX);
    b.link_all("RIGHT", &["TOP_S", "TOP_E", "TOP_N"], CONVEX);
    b.link_all("TOP_S", &["TOP_W", "TOP_M", "TOP_BS", "TOP_E"], FLUSH);
    b.link_all("TOP_N", &["TOP_W", "TOP_M", "TOP_BN", "TOP_E"], FLUSH);
    b.link_all("TOP_M", &["TOP_BS", "TOP_BN"], FLUSH);
    b.link_all("TOP_E", &["TOP_BS", "TOP_BN"], FLUSH);
    b.link("TOP_BS", "TOP_BN", FLUSH);
    b.link("TOP_S", "WALL_S", CONVEX);
    b.link("TOP_N", "WALL_N", CONVEX);
    b.link("TOP_W", "WALL_W", CONVEX);
    b.link_all("TOP_M", &["FIL_SE", "WALL_E", "FIL_NE"], CONVEX);
    b.link_all("FLOOR", &["WALL_W", "WALL_S", "WALL_N", "WALL_E", "FIL_SE", "FIL_NE"], CONCAVE);
    b.link_all("WALL_W", &["WALL_S", "WALL_N"], CONCAVE);
    b.link_all("FIL_SE", &["WALL_S", "WALL_E"], FLUSH);
    b.link_all("FIL_NE", &["WALL_N", "WALL_E"], FLUSH);
    b.link_all("TORUS", &["TOP_BS", "TOP_BN", "CSK"], FLUSH);
    b.link("CSK", "BORE", 225.0);
    b.link("BORE", "BORE_BOTTOM", CONCAVE);
    b.build("pump-carter")
}

/// A 10-face L-shaped bracket: a 60 x 40 x 10 base with a 10 mm thick upright
/// rising to z = 50 along x = 0.
pub fn bracket() -> Part {
    let mut b = PartBuilder::default();
    let n = 5;
    b.add("BASE_BOTTOM", "base bottom", sample_grid(n, n, |s, t| p(60.0 * t, 40.0 * s, 0.0)));
    b.add("BASE_TOP", "base top", sample_grid(n, n, |s, t| p(lin(10.0, 60.0, s), 40.0 * t, 10.0)));
    b.add("BASE_END", "base end", sample_grid(n, n, |s, t| p(60.0, 40.0 * s, 10.0 * t)));
    b.add("UP_TOP", "upright top", sample_grid(n, n, |s, t| p(10.0 * s, 40.0 * t, 50.0)));
    b.add("UP_INNER", "upright inner side", sample_grid(n, n, |s, t| p(10.0, 40.0 * s, lin(10.0, 50.0, t))));
    b.add("OUTER", "outer side", sample_grid(n, n, |s, t| p(0.0, 40.0 * t, 50.0 * s)));
    b.add("FRONT_BASE", "front", sample_grid(n, n, |s, t| p(60.0 * s, 0.0, 10.0 * t)));
    b.add("FRONT_UP", "front", sample_grid(n, n, |s, t| p(10.0 * s, 0.0, lin(10.0, 50.0, t))));
    b.add("BACK_BASE", "back", sample_grid(n, n, |s, t| p(60.0 * t, 40.0, 10.0 * s)));
    b.add("BACK_UP", "back", sample_grid(n, n, |s, t| p(10.0 * t, 40.0, lin(10.0, 50.0, s))));
    b.link_all("BASE_BOTTOM", &["BASE_END", "OUTER", "FRONT_BASE", "BACK_BASE"], CONVEX);
    b.link_all("BASE_TOP", &["BASE_END", "FRONT_BASE", "BACK_BASE"], CONVEX);
    b.link("BASE_TOP", "UP_INNER", CONCAVE);
    b.link_all("BASE_END", &["FRONT_BASE", "BACK_BASE"], CONVEX);
    b.link_all("UP_TOP", &["UP_INNER", "OUTER", "FRONT_UP", "BACK_UP"], CONVEX);
    b.link_all("UP_INNER", &["FRONT_UP", "BACK_UP"], CONVEX);
    b.link_all("OUTER", &["FRONT_BASE", "FRONT_UP", "BACK_BASE", "BACK_UP"], CONVEX);
    b.link("FRONT_BASE", "FRONT_UP", FLUSH);
    b.link("BACK_BASE", "BACK_UP", FLUSH);
    b.build("bracket")
}

/// A 40 x 40 x 20 block enclosing a planar face no tool can reach.
pub fn sealed_cavity() -> Part {
    let mut b = PartBuilder::default();
    add_block(&mut b, "", [0.0; 3], [40.0, 40.0, 20.0], 5);
    b.add("CAVITY", "enclosed cavity floor", sample_grid(5, 5, |s, t| p(lin(10.0, 30.0, s), lin(10.0, 30.0, t), 8.0)));
    b.build("sealed-cavity")
}

/// A free-standing C-shaped web: an elliptic arc spanning 220 degrees,
/// extruded 30 mm along z.
pub fn curved_web() -> Part {
    let mut b = PartBuilder::default();
    let half = 110f64.to_radians();
    b.add(
        "WEB",
        "curved web",
        sample_grid(23, 7, |s, t| {
            let a = lin(-half, half, s);
            p(10.0 * a.cos(), 6.0 * a.sin(), 30.0 * t)
        }),
    );
    b.build("curved-web")
}

/// A lone 60 degree sector of an external cone, half angle 30 degrees.
pub fn cone_flank() -> Part {
    let mut b = PartBuilder::default();
    b.add(
        "CONE",
        "external cone flank",
        sample_grid(9, 7, |s, t| {
            let a = lin(-PI / 6.0, PI / 6.0, s);
            let z = 20.0 * t;
            let r = 5.0 + z * (PI / 6.0).tan();
            p(r * a.cos(), r * a.sin(), z)
        }),
    );
    b.build("cone-flank")
}

/// A floor blending into a wall through a concave fillet of radius 3.
pub fn fillet_blend() -> Part {
    let mut b = PartBuilder::default();
    b.add("FLOOR", "floor", sample_grid(7, 7, |s, t| p(30.0 * s, lin(3.0, 20.0, t), 0.0)));
    b.add(
        "FILLET",
        "concave fillet r=3",
        sample_grid(9, 7, |s, t| {
            let beta = lin(0.0, FRAC_PI_2, s);
            p(30.0 * t, 3.0 - 3.0 * beta.sin(), 3.0 - 3.0 * beta.cos())
        }),
    );
    b.add("WALL", "wall", sample_grid(7, 7, |s, t| p(30.0 * t, 0.0, lin(3.0, 20.0, s))));
    b.link("FLOOR", "FILLET", FLUSH);
    b.link("FILLET", "WALL", FLUSH);
    b.build("fillet-blend")
}

/// A slot between a vertical ruled wall (a parabolic profile extruded along
/// z) and a facing plane, closed below by a floor.
pub fn ruled_slot() -> Part {
    let mut b = PartBuilder::default();
    let f = |y: f64| 0.01 * (y - 25.0).powi(2);
    let ys: Vec<f64> = steps(13).map(|t| 50.0 * t).collect();
    b.add(
        "RULED_WALL",
        "vertical ruled wall",
        ys.iter().map(|&y| steps(5).map(|t| p(f(y), y, 20.0 * t)).collect()).collect(),
    );
    b.add("FACING", "facing wall", sample_grid(5, 13, |s, t| p(15.0, 50.0 * t, 20.0 * s)));
    b.add(
        "SLOT_FLOOR",
        "slot floor",
        steps(5)
            .map(|t| ys.iter().map(|&y| p(lin(f(y), 15.0, t), y, 0.0)).collect())
            .collect(),
    );
    b.link_all("SLOT_FLOOR", &["RULED_WALL", "FACING"], CONCAVE);
    b.build("ruled-slot")
}

/// A plate with rectangular pockets laid out in rows; `pockets[r]` is the
/// number of pockets in row `r`. The face count is
/// `6 * sum(pockets) + 2 * rows + 6`.
pub fn pocket_plate(pockets: &[usize]) -> Part {
    let mut b = PartBuilder::default();
    let n = 5;
    let rows = pockets.len();
    let q_max = pockets.iter().copied().max().unwrap_or(0);
    let (lx, ly, lz) = (12.0 * q_max as f64 + 4.0, 12.0 * rows as f64 + 4.0, 10.0);
    add_block(&mut b, "", [0.0; 3], [lx, ly, lz], n);
    // the block top is replaced by strips and pieces around the pockets
    b.faces.retain(|f| f.id != "TOP");
    for f in &mut b.faces {
        f.adjacency.retain(|a| a.face != "TOP");
    }
    for k in 0..=rows {
        let y0 = 12.0 * k as f64;
        let id = format!("STRIP{k}");
        b.add(&id, "top strip", sample_grid(n, n, |s, t| p(lx * s, y0 + 4.0 * t, lz)));
        if k == 0 {
            b.link("FRONT", &id, CONVEX);
        }
        if k == rows {
            b.link("BACK", &id, CONVEX);
        }
        b.link_all(&id, &["LEFT", "RIGHT"], CONVEX);
    }
    for (r, &q) in pockets.iter().enumerate() {
        let y0 = 12.0 * r as f64 + 4.0;
        for c in 0..=q {
            let x0 = 12.0 * c as f64;
            let x1 = if c == q { lx } else { x0 + 4.0 };
            let id = format!("LAND{r}_{c}");
            b.add(&id, "top land", sample_grid(n, n, |s, t| p(lin(x0, x1, s), y0 + 8.0 * t, lz)));
            b.link_all(&id, &[&format!("STRIP{r}"), &format!("STRIP{}", r + 1)], FLUSH);
            if c == 0 {
                b.link(&id, "LEFT", CONVEX);
            }
            if c == q {
                b.link(&id, "RIGHT", CONVEX);
            }
        }
        for c in 0..q {
            let (x0, x1) = (12.0 * c as f64 + 4.0, 12.0 * c as f64 + 12.0);
            let (y1, zf) = (y0 + 8.0, lz - 3.0 - 2.0 * ((r + c) % 3) as f64);
            let id = |s: &str| format!("P{r}_{c}_{s}");
            b.add(&id("FLOOR"), "pocket floor", sample_grid(n, n, |s, t| p(lin(x0, x1, s), lin(y0, y1, t), zf)));
            b.add(&id("WS"), "pocket wall", sample_grid(n, n, |s, t| p(lin(x0, x1, t), y0, lin(zf, lz, s))));
            b.add(&id("WN"), "pocket wall", sample_grid(n, n, |s, t| p(lin(x0, x1, s), y1, lin(zf, lz, t))));
            b.add(&id("WW"), "pocket wall", sample_grid(n, n, |s, t| p(x0, lin(y0, y1, s), lin(zf, lz, t))));
            b.add(&id("WE"), "pocket wall", sample_grid(n, n, |s, t| p(x1, lin(y0, y1, t), lin(zf, lz, s))));
            let walls = [id("WS"), id("WE"), id("WN"), id("WW")];
            for k in 0..4 {
                b.link(&walls[k], &walls[(k + 1) % 4], CONCAVE);
                b.link(&walls[k], &id("FLOOR"), CONCAVE);
            }
            b.link(&id("WS"), &format!("STRIP{r}"), CONVEX);
            b.link(&id("WN"), &format!("STRIP{}", r + 1), CONVEX);
            b.link(&id("WW"), &format!("LAND{r}_{c}"), CONVEX);
            b.link(&id("WE"), &format!("LAND{r}_{}", c + 1), CONVEX);
        }
    }
    b.build("pocket-plate")
}

/// The generated 500-face scale part: ten rows of pockets, 79 in total.
pub fn generated_500() -> Part {
    let mut rows = vec![8; 9];
    rows.push(7);
    pocket_plate(&rows)
}
