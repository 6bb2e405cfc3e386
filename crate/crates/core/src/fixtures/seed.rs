use std::collections::BTreeMap;

use crate::ose::{
    AttributeRef, Check, ConditionRanges, CuttingParam, CuttingSet, CuttingSetType, DimensionRanges,
    ExtendedCuttingConditions, GeometryFamily, Interval, Mode, Op, Ose, OseDatabase, Priority, Tmc,
    TrajectoryStrategy,
};
use crate::transform::{GeometryType, MfgType};

use MfgType::{Drilling, EndManufacturing as End, FlankManufacturing as Flank, Sweeping};
use Mode::{Finishing, Roughing, SemiFinishing};

fn iv(min: f64, max: f64) -> Interval {
    Interval::new(min, max)
}

fn face(name: &str) -> AttributeRef {
    AttributeRef::face(name)
}

fn tool(name: &str) -> AttributeRef {
    AttributeRef::tool(name)
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn conditions(speed: [f64; 2], fpt: [f64; 2], ax: [f64; 2], az: [f64; 2], feed: [f64; 2]) -> ConditionRanges {
    ConditionRanges {
        cutting_speed: speed.into(),
        feed_per_tooth: fpt.into(),
        advance_x: ax.into(),
        advance_z: az.into(),
        feed_rate: feed.into(),
    }
}

fn family(id: &str, ty: GeometryType, checks: Vec<Check>) -> GeometryFamily {
    GeometryFamily {
        id: id.into(),
        required_type: ty,
        checks,
    }
}

fn config(
    id: &str,
    mfg: MfgType,
    mode: Mode,
    strategy: TrajectoryStrategy,
    tmcs: &[&str],
    priority: Priority,
) -> ExtendedCuttingConditions {
    ExtendedCuttingConditions {
        id: id.into(),
        mfg_type: mfg,
        mode,
        trajectory_strategy: Some(strategy),
        allowed_tmcs: strings(tmcs),
        priority,
    }
}

fn tmc(id: &str, cutting_material: &str, speed: [f64; 2], feed: [f64; 2], lubrication: &str) -> Tmc {
    Tmc {
        id: id.into(),
        cut_material: "AL7075".into(),
        cutting_material: cutting_material.into(),
        constraints: BTreeMap::from([
            (CuttingParam::CuttingSpeed, speed.into()),
            (CuttingParam::FeedRate, feed.into()),
        ]),
        lubrication: lubrication.into(),
    }
}

fn ose(id: &str, family: &str, config: &str, cst: &str, checks: Vec<Check>) -> Ose {
    Ose {
        id: id.into(),
        family: family.into(),
        config: config.into(),
        cutting_set_type: cst.into(),
        compliance_checks: checks,
    }
}

/// The geometrical compliance of an end-milled planar face: the tool fits
/// the face, reaches its depth and its corner radius fits the fillets.
pub fn end_milling_checks() -> Vec<Check> {
    vec![
        Check::attr(tool("diameter"), Op::Lt, face("end_accessibility")),
        Check::attr(tool("tool_length"), Op::Gt, face("global_accessibility")),
        Check::attr(face("min_fillet_radius"), Op::Ge, tool("end_radius")),
    ]
}

/// Face membership for planar end machining under a single compulsory
/// access direction.
pub fn plan_end_family_checks() -> Vec<Check> {
    vec![
        Check::sym(face("potential_mfg_types"), End.as_str()),
        Check::sym(face("access_kind"), "SingleVector"),
        Check::flag(face("access_compulsory"), true),
    ]
}

fn flank_checks() -> Vec<Check> {
    vec![
        Check::attr(tool("cutting_length"), Op::Ge, face("axial_extent")),
        Check::attr(tool("radius"), Op::Le, face("min_fillet_radius")),
    ]
}

/// The seed knowledge base: nine geometry families, six configurations, four
/// cutting-set types, three tool/material couples and ten OSEs.
pub fn seed_db() -> OseDatabase {
    let mfg = |m: MfgType| Check::sym(face("potential_mfg_types"), m.as_str());
    let families = vec![
        family("F_PLAN_END", GeometryType::Plan, plan_end_family_checks()),
        family("F_PLAN_FLANK", GeometryType::Plan, vec![mfg(Flank)]),
        family(
            "F_CYL_FLANK",
            GeometryType::Cylinder,
            vec![mfg(Flank), Check::num(face("end_accessibility"), Op::Lt, 6.0)],
        ),
        family(
            "F_CYL_DRILL",
            GeometryType::Cylinder,
            vec![mfg(Drilling), Check::num(face("end_accessibility"), Op::Ge, 6.0)],
        ),
        family(
            "F_CONE",
            GeometryType::ConeShaped,
            vec![Check::any_of(face("potential_mfg_types"), &[End.as_str(), Flank.as_str()])],
        ),
        family("F_TORUS", GeometryType::ConstRadiusSweep, vec![mfg(Sweeping)]),
        family("F_FREEFORM", GeometryType::Unspecified, vec![mfg(Sweeping)]),
        family("F_RULED_END", GeometryType::Ruled, vec![mfg(End)]),
        family("F_RULED_FLANK", GeometryType::Ruled, vec![mfg(Flank)]),
    ];
    let configs = vec![
        config("C_END_ROUGH", End, Roughing, TrajectoryStrategy::InOutSpiral, &["TMC1", "TMC3"], Priority::Qmax),
        config("C_END_FINISH", End, Finishing, TrajectoryStrategy::BackAndForth, &["TMC1"], Priority::Default),
        config("C_FLANK_ROUGH", Flank, Roughing, TrajectoryStrategy::Flank, &["TMC1", "TMC3"], Priority::Qmax),
        config("C_FLANK_FINISH", Flank, Finishing, TrajectoryStrategy::Flank, &["TMC3"], Priority::Default),
        config("C_DRILL", Drilling, Roughing, TrajectoryStrategy::NormalDrilling, &["TMC2"], Priority::Default),
        config("C_SWEEP_FINISH", Sweeping, Finishing, TrajectoryStrategy::Sweeping, &["TMC1", "TMC3"], Priority::Default),
    ];
    let carbide_conditions = conditions([100.0, 800.0], [0.01, 0.3], [0.1, 20.0], [0.1, 20.0], [100.0, 3000.0]);
    let cutting_set_types = vec![
        CuttingSetType {
            id: "CST_END".into(),
            dimensions: DimensionRanges {
                diameter: iv(6.0, 32.0),
                cutting_length: iv(10.0, 60.0),
                tool_length: iv(50.0, 150.0),
                end_radius: iv(0.0, 6.0),
            },
            conditions: carbide_conditions,
            cutting_material: "carbide".into(),
            mfg_types: vec![End, Flank],
            modes: vec![Roughing, SemiFinishing, Finishing],
            tmcs: strings(&["TMC1", "TMC3"]),
        },
        CuttingSetType {
            id: "CST_FLANK".into(),
            dimensions: DimensionRanges {
                diameter: iv(8.0, 25.0),
                cutting_length: iv(30.0, 60.0),
                tool_length: iv(80.0, 160.0),
                end_radius: iv(0.0, 4.0),
            },
            conditions: carbide_conditions,
            cutting_material: "carbide".into(),
            mfg_types: vec![Flank],
            modes: vec![Roughing, Finishing],
            tmcs: strings(&["TMC1", "TMC3"]),
        },
        CuttingSetType {
            id: "CST_BALL".into(),
            dimensions: DimensionRanges {
                diameter: iv(2.0, 20.0),
                cutting_length: iv(5.0, 40.0),
                tool_length: iv(40.0, 120.0),
                end_radius: iv(1.0, 10.0),
            },
            conditions: carbide_conditions,
            cutting_material: "carbide".into(),
            mfg_types: vec![Sweeping],
            modes: vec![SemiFinishing, Finishing],
            tmcs: strings(&["TMC1", "TMC3"]),
        },
        CuttingSetType {
            id: "CST_DRILL".into(),
            dimensions: DimensionRanges {
                diameter: iv(3.0, 20.0),
                cutting_length: iv(10.0, 80.0),
                tool_length: iv(50.0, 160.0),
                end_radius: iv(0.0, 0.0),
            },
            conditions: conditions([20.0, 150.0], [0.02, 0.4], [0.0, 0.0], [0.1, 5.0], [20.0, 600.0]),
            cutting_material: "hss".into(),
            mfg_types: vec![Drilling],
            modes: vec![Roughing],
            tmcs: strings(&["TMC2"]),
        },
    ];
    let tmcs = vec![
        tmc("TMC1", "carbide", [200.0, 600.0], [300.0, 1800.0], "emulsion"),
        tmc("TMC2", "hss", [40.0, 120.0], [50.0, 400.0], "emulsion"),
        tmc("TMC3", "coated carbide", [300.0, 800.0], [500.0, 2500.0], "mist"),
    ];
    let mut plan_end = end_milling_checks();
    plan_end.push(Check::attr(
        face("potential_mfg_types"),
        Op::Eq,
        AttributeRef::config("mfg_type"),
    ));
    let oses = vec![
        ose("O_PLAN_END_R", "F_PLAN_END", "C_END_ROUGH", "CST_END", plan_end),
        ose("O_PLAN_FLANK_R", "F_PLAN_FLANK", "C_FLANK_ROUGH", "CST_FLANK", flank_checks()),
        ose("O_PLAN_FLANK_F", "F_PLAN_FLANK", "C_FLANK_FINISH", "CST_END", flank_checks()),
        ose("O_CYL_FLANK", "F_CYL_FLANK", "C_FLANK_FINISH", "CST_END", flank_checks()),
        ose(
            "O_CYL_DRILL",
            "F_CYL_DRILL",
            "C_DRILL",
            "CST_DRILL",
            vec![
                Check::attr(tool("diameter"), Op::Le, face("end_accessibility")),
                Check::attr(tool("cutting_length"), Op::Ge, face("axial_extent")),
            ],
        ),
        ose(
            "O_CONE_END",
            "F_CONE",
            "C_END_FINISH",
            "CST_END",
            vec![
                Check::attr(tool("diameter"), Op::Lt, face("end_accessibility")),
                Check::attr(tool("end_radius"), Op::Le, face("min_fillet_radius")),
            ],
        ),
        ose(
            "O_TORUS_SWEEP",
            "F_TORUS",
            "C_SWEEP_FINISH",
            "CST_BALL",
            vec![Check::attr(tool("radius"), Op::Le, face("min_fillet_radius"))],
        ),
        ose(
            "O_FREE_SWEEP",
            "F_FREEFORM",
            "C_SWEEP_FINISH",
            "CST_BALL",
            vec![Check::attr(tool("radius"), Op::Le, face("min_fillet_radius"))],
        ),
        ose(
            "O_RULED_END",
            "F_RULED_END",
            "C_END_FINISH",
            "CST_END",
            vec![Check::attr(tool("diameter"), Op::Lt, face("end_accessibility"))],
        ),
        ose(
            "O_RULED_FLANK",
            "F_RULED_FLANK",
            "C_FLANK_ROUGH",
            "CST_FLANK",
            vec![Check::attr(tool("cutting_length"), Op::Ge, face("axial_extent"))],
        ),
    ];
    OseDatabase {
        version: Some("seed-1".into()),
        families,
        configs,
        cutting_set_types,
        tmcs,
        oses,
    }
}

/// The seed database plus a copy of `O_PLAN_END_R` under another id and an
/// OSE whose diameter check contradicts its cutting-set type.
pub fn audit_seeded_db() -> OseDatabase {
    let mut db = seed_db();
    db.version = Some("seed-1-audit".into());
    let mut dup = db.ose("O_PLAN_END_R").expect("seed OSE").clone();
    dup.id = "O_PLAN_END_R_COPY".into();
    db.oses.push(dup);
    db.oses.push(ose(
        "O_CONE_ROUGH_TINY",
        "F_CONE",
        "C_END_ROUGH",
        "CST_END",
        vec![Check::num(tool("diameter"), Op::Lt, 5.0)],
    ));
    db
}

struct ToolSpec {
    id: &'static str,
    dims: [f64; 4],
    material: &'static str,
    mfg: &'static [MfgType],
    modes: &'static [Mode],
    tmcs: &'static [&'static str],
    feed: [f64; 2],
}

/// Fourteen cutting sets: end mills, long flank mills, ball mills, drills and
/// one generalist end mill.
pub fn seed_tools() -> Vec<CuttingSet> {
    const EF: &[MfgType] = &[End, Flank];
    const ALL_MODES: &[Mode] = &[Roughing, SemiFinishing, Finishing];
    const RF: &[Mode] = &[Roughing, Finishing];
    const T13: &[&str] = &["TMC1", "TMC3"];
    let specs = [
        ToolSpec { id: "E6", dims: [6.0, 15.0, 60.0, 0.0], material: "carbide", mfg: EF, modes: ALL_MODES, tmcs: T13, feed: [400.0, 2000.0] },
        ToolSpec { id: "E10", dims: [10.0, 25.0, 75.0, 0.0], material: "carbide", mfg: EF, modes: RF, tmcs: T13, feed: [300.0, 1800.0] },
        ToolSpec { id: "E16", dims: [16.0, 32.0, 90.0, 0.5], material: "carbide", mfg: EF, modes: ALL_MODES, tmcs: T13, feed: [300.0, 1600.0] },
        ToolSpec { id: "E25", dims: [25.0, 40.0, 110.0, 1.0], material: "carbide", mfg: &[End], modes: &[Roughing], tmcs: &["TMC1"], feed: [200.0, 1200.0] },
        ToolSpec { id: "R32", dims: [32.0, 20.0, 100.0, 0.0], material: "carbide", mfg: &[End], modes: &[Roughing], tmcs: T13, feed: [600.0, 2400.0] },
        ToolSpec { id: "G12", dims: [12.0, 30.0, 90.0, 0.0], material: "carbide", mfg: EF, modes: RF, tmcs: T13, feed: [350.0, 1700.0] },
        ToolSpec { id: "F8L", dims: [8.0, 35.0, 100.0, 0.0], material: "carbide", mfg: &[Flank], modes: RF, tmcs: T13, feed: [300.0, 1500.0] },
        ToolSpec { id: "F10L", dims: [10.0, 35.0, 100.0, 0.0], material: "carbide", mfg: &[Flank, End], modes: RF, tmcs: T13, feed: [300.0, 1500.0] },
        ToolSpec { id: "F16L", dims: [16.0, 45.0, 120.0, 0.0], material: "carbide", mfg: &[Flank], modes: RF, tmcs: &["TMC3"], feed: [400.0, 1400.0] },
        ToolSpec { id: "F20L", dims: [20.0, 50.0, 140.0, 0.0], material: "carbide", mfg: &[Flank], modes: &[Roughing], tmcs: &["TMC1"], feed: [250.0, 1100.0] },
        ToolSpec { id: "B4", dims: [4.0, 8.0, 60.0, 2.0], material: "carbide", mfg: &[Sweeping], modes: &[SemiFinishing, Finishing], tmcs: T13, feed: [200.0, 1200.0] },
        ToolSpec { id: "B6", dims: [6.0, 12.0, 70.0, 3.0], material: "carbide", mfg: &[Sweeping], modes: &[SemiFinishing, Finishing], tmcs: T13, feed: [250.0, 1400.0] },
        ToolSpec { id: "B10", dims: [10.0, 20.0, 80.0, 5.0], material: "carbide", mfg: &[Sweeping], modes: &[Finishing], tmcs: &["TMC1"], feed: [300.0, 1500.0] },
        ToolSpec { id: "D8", dims: [8.0, 30.0, 90.0, 0.0], material: "hss", mfg: &[Drilling], modes: &[Roughing], tmcs: &["TMC2"], feed: [60.0, 300.0] },
        ToolSpec { id: "D10", dims: [10.0, 40.0, 100.0, 0.0], material: "hss", mfg: &[Drilling], modes: &[Roughing], tmcs: &["TMC2"], feed: [50.0, 280.0] },
    ];
    specs
        .into_iter()
        .map(|s| {
            let [diameter, cutting_length, tool_length, end_radius] = s.dims;
            let hss = s.material == "hss";
            CuttingSet {
                id: s.id.into(),
                diameter,
                cutting_length,
                tool_length,
                end_radius,
                cutting_material: s.material.into(),
                mfg_types: s.mfg.to_vec(),
                modes: s.modes.to_vec(),
                tmcs: strings(s.tmcs),
                conditions: if hss {
                    conditions([30.0, 90.0], [0.05, 0.2], [0.0, 0.0], [0.5, 2.0], s.feed)
                } else {
                    conditions([150.0, 450.0], [0.02, 0.12], [0.5, diameter * 0.6], [0.5, diameter], s.feed)
                },
            }
        })
        .collect()
}
