//! Preparation phase: grouping faces into setups by access direction, then
//! into sequences of adjacent faces sharing a selected candidate, and ordering
//! both into the process-plan skeleton.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_between, lex_cmp, Vec3};
use crate::matching::{Candidate, Origin, TraceEntry};
use crate::ose::{Mode, OseDatabase, Priority, TrajectoryStrategy};
use crate::part::Part;
use crate::report::ResolvedConditions;
use crate::transform::{FaceAttributes, MfgType};

/// Two directions are the same setup direction below this angle (radians).
pub const DIRECTION_TOL: f64 = 1e-6;

pub fn same_direction(a: &Vec3, b: &Vec3) -> bool {
    angle_between(a, b) < DIRECTION_TOL
}

/// Admissible directions of one face, as seen by the setup planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceAccess {
    pub face: String,
    pub directions: Vec<Vec3>,
    pub compulsory: bool,
}

impl FaceAccess {
    pub fn from_attributes(a: &FaceAttributes) -> Self {
        FaceAccess {
            face: a.face.clone(),
            directions: a.access.iter().map(|d| d.direction).collect(),
            compulsory: a.compulsory(),
        }
    }

    pub fn admits(&self, d: &Vec3) -> bool {
        self.directions.iter().any(|x| same_direction(x, d))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub id: String,
    pub direction: Vec3,
    pub faces: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupResult {
    pub setups: Vec<Setup>,
    /// Faces without any admissible direction.
    pub excluded: Vec<String>,
}

/// Distinct directions over all faces, greatest first.
pub fn candidate_directions(faces: &[FaceAccess]) -> Vec<Vec3> {
    let mut dirs: Vec<Vec3> = Vec::new();
    for f in faces {
        for d in &f.directions {
            if !dirs.iter().any(|x| same_direction(x, d)) {
                dirs.push(*d);
            }
        }
    }
    dirs.sort_by(|a, b| lex_cmp(b, a));
    dirs
}

/// Greedy set cover of faces by access directions.
///
/// Directions of faces with a single compulsory direction are taken first;
/// then the direction covering the most unassigned faces is taken until every
/// face is covered. Ties go to the lexicographically greatest direction
/// (so `+z` before `-z`). A face joins the first chosen setup admitting it.
pub fn build_setups(faces: &[FaceAccess]) -> SetupResult {
    let excluded: Vec<String> = faces
        .iter()
        .filter(|f| f.directions.is_empty())
        .map(|f| f.face.clone())
        .collect();
    let dirs = candidate_directions(faces);
    let covers: Vec<Vec<usize>> = dirs
        .iter()
        .map(|d| (0..faces.len()).filter(|&i| faces[i].admits(d)).collect())
        .collect();
    let mut assigned: Vec<Option<usize>> = vec![None; faces.len()];
    let mut chosen: Vec<usize> = Vec::new();

    let pick = |pool: &[usize], assigned: &[Option<usize>]| -> Option<usize> {
        pool.iter()
            .map(|&k| (k, covers[k].iter().filter(|&&i| assigned[i].is_none()).count()))
            .filter(|&(_, n)| n > 0)
            // dirs is sorted greatest first, so the first maximum wins ties
            .fold(None, |best: Option<(usize, usize)>, (k, n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((k, n)),
            })
            .map(|(k, _)| k)
    };
    let take = |k: usize, assigned: &mut Vec<Option<usize>>, chosen: &mut Vec<usize>| {
        for &i in &covers[k] {
            if assigned[i].is_none() {
                assigned[i] = Some(chosen.len());
            }
        }
        chosen.push(k);
    };

    let seeds: Vec<usize> = (0..dirs.len())
        .filter(|&k| {
            faces
                .iter()
                .any(|f| f.compulsory && f.directions.len() == 1 && same_direction(&f.directions[0], &dirs[k]))
        })
        .collect();
    while let Some(k) = pick(&seeds, &assigned) {
        take(k, &mut assigned, &mut chosen);
    }
    let all: Vec<usize> = (0..dirs.len()).collect();
    while let Some(k) = pick(&all, &assigned) {
        take(k, &mut assigned, &mut chosen);
    }

    let setups = chosen
        .iter()
        .enumerate()
        .map(|(s, &k)| Setup {
            id: format!("S{}", s + 1),
            direction: dirs[k],
            faces: (0..faces.len())
                .filter(|&i| assigned[i] == Some(s))
                .map(|i| faces[i].face.clone())
                .collect(),
        })
        .filter(|s| !s.faces.is_empty())
        .collect();
    SetupResult { setups, excluded }
}

/// Adjacent faces of one setup machined with the same candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub id: String,
    pub setup: String,
    pub faces: Vec<String>,
    pub ose: String,
    pub cutting_set: String,
    /// Selected candidate of the first member face.
    pub candidate: String,
    pub config: String,
    pub mode: Mode,
    /// Position used for ordering within the setup.
    pub index: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Connected components of the setup's faces under adjacency, keeping only
/// edges between faces whose selected candidates share OSE and cutting set.
/// Every face of the setup must have a selected candidate.
pub fn group_sequences(
    setup: &Setup,
    selected: &BTreeMap<String, &Candidate>,
    part: &Part,
    db: &OseDatabase,
) -> Vec<Sequence> {
    let order = part.face_index();
    let mut members: Vec<&str> = setup.faces.iter().map(String::as_str).collect();
    members.sort_by_key(|f| order.get(f).copied().unwrap_or(usize::MAX));
    let pos: BTreeMap<&str, usize> = members.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut uf = UnionFind((0..members.len()).collect());
    for (i, f) in members.iter().enumerate() {
        let Some(face) = part.face(f) else { continue };
        for adj in &face.adjacency {
            let Some(&j) = pos.get(adj.face.as_str()) else { continue };
            if selected[*f].sequence_key() == selected[adj.face.as_str()].sequence_key() {
                uf.union(i, j);
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, f) in members.iter().enumerate() {
        let root = uf.find(i);
        comps.entry(root).or_default().push(f);
    }
    comps
        .into_values()
        .enumerate()
        .map(|(n, faces)| {
            let c = selected[faces[0]];
            let mode = db.config(&c.config).map_or(Mode::Roughing, |cfg| cfg.mode);
            Sequence {
                id: format!("{}-Q{}", setup.id, n + 1),
                setup: setup.id.clone(),
                faces: faces.iter().map(|f| f.to_string()).collect(),
                ose: c.ose.clone(),
                cutting_set: c.cutting_set.clone(),
                candidate: c.id.clone(),
                config: c.config.clone(),
                mode,
                index: n + 1,
            }
        })
        .collect()
}

/// Why one face is machined by a sequence: its own candidate and check trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Justification {
    pub face: String,
    pub candidate: String,
    pub rank: usize,
    pub origin: Origin,
    pub trace: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSequence {
    pub id: String,
    pub faces: Vec<String>,
    pub ose: String,
    pub config: String,
    pub cutting_set: String,
    pub candidate: String,
    pub mfg_type: Option<MfgType>,
    pub mode: Mode,
    pub trajectory_strategy: Option<TrajectoryStrategy>,
    pub priority: Option<Priority>,
    pub conditions: Option<ResolvedConditions>,
    pub justification: Vec<Justification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSetup {
    pub id: String,
    pub direction: Vec3,
    pub faces: Vec<String>,
    pub sequences: Vec<PlannedSequence>,
}

/// A face whose setup direction differs from the direction its attributes
/// (and therefore its candidates) were computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tension {
    pub face: String,
    pub setup: String,
    pub setup_direction: Vec3,
    pub matched_direction: Vec3,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Exceptions {
    /// Accessible faces without any capable process.
    pub unmatched: Vec<String>,
    /// Faces without an admissible access direction.
    pub inaccessible: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessPlan {
    pub part: String,
    pub setups: Vec<PlannedSetup>,
    pub unmatched: Vec<String>,
    pub inaccessible: Vec<String>,
    #[serde(default)]
    pub tensions: Vec<Tension>,
    #[serde(default)]
    pub notices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<crate::report::SynthesisTable>,
}

impl ProcessPlan {
    /// Face ids in plan order: setup members, then exceptions.
    pub fn all_faces(&self) -> Vec<&str> {
        self.setups
            .iter()
            .flat_map(|s| s.sequences.iter().flat_map(|q| q.faces.iter()))
            .chain(&self.unmatched)
            .chain(&self.inaccessible)
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("partition violation: {0}")]
    PartitionViolation(String),
}

fn setup_order(a: &Setup, b: &Setup) -> Ordering {
    b.faces.len().cmp(&a.faces.len()).then_with(|| lex_cmp(&b.direction, &a.direction))
}

/// Orders setups (most faces first, then greatest direction) and their
/// sequences (Roughing, SemiFinishing, Finishing, then creation order), and
/// attaches the exception lists. Every face of the part must appear in
/// exactly one setup or exception list.
pub fn plan_skeleton(
    part: &Part,
    setups: &[Setup],
    sequences: &[Sequence],
    exceptions: &Exceptions,
    candidates: &BTreeMap<String, Vec<Candidate>>,
    db: &OseDatabase,
) -> Result<ProcessPlan, PlanError> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for f in setups
        .iter()
        .flat_map(|s| s.faces.iter())
        .chain(&exceptions.unmatched)
        .chain(&exceptions.inaccessible)
    {
        *seen.entry(f.as_str()).or_default() += 1;
    }
    for f in &part.faces {
        match seen.get(f.id.as_str()) {
            Some(1) => {}
            Some(n) => {
                return Err(PlanError::PartitionViolation(format!("face {} appears {n} times", f.id)));
            }
            None => return Err(PlanError::PartitionViolation(format!("face {} is not planned", f.id))),
        }
    }
    let known: BTreeSet<&str> = part.faces.iter().map(|f| f.id.as_str()).collect();
    if let Some(extra) = seen.keys().find(|f| !known.contains(*f)) {
        return Err(PlanError::PartitionViolation(format!("face {extra} is not part of {}", part.id)));
    }

    let mut ordered: Vec<&Setup> = setups.iter().collect();
    ordered.sort_by(|a, b| setup_order(a, b));
    let planned = ordered
        .into_iter()
        .map(|s| {
            let mut seqs: Vec<&Sequence> = sequences.iter().filter(|q| q.setup == s.id).collect();
            seqs.sort_by_key(|q| (q.mode, q.index));
            let covered: usize = seqs.iter().map(|q| q.faces.len()).sum();
            if covered != s.faces.len() {
                return Err(PlanError::PartitionViolation(format!(
                    "setup {} has {} faces but its sequences cover {covered}",
                    s.id,
                    s.faces.len()
                )));
            }
            Ok(PlannedSetup {
                id: s.id.clone(),
                direction: s.direction,
                faces: s.faces.clone(),
                sequences: seqs.into_iter().map(|q| plan_sequence(q, candidates, db)).collect(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProcessPlan {
        part: part.id.clone(),
        setups: planned,
        unmatched: exceptions.unmatched.clone(),
        inaccessible: exceptions.inaccessible.clone(),
        tensions: vec![],
        notices: vec![],
        synthesis: None,
    })
}

fn plan_sequence(q: &Sequence, candidates: &BTreeMap<String, Vec<Candidate>>, db: &OseDatabase) -> PlannedSequence {
    let config = db.config(&q.config);
    PlannedSequence {
        id: q.id.clone(),
        faces: q.faces.clone(),
        ose: q.ose.clone(),
        config: q.config.clone(),
        cutting_set: q.cutting_set.clone(),
        candidate: q.candidate.clone(),
        mfg_type: config.map(|c| c.mfg_type),
        mode: q.mode,
        trajectory_strategy: config.and_then(|c| c.trajectory_strategy),
        priority: config.map(|c| c.priority),
        conditions: None,
        justification: q
            .faces
            .iter()
            .filter_map(|f| candidates.get(f)?.iter().find(|c| c.selected))
            .map(|c| Justification {
                face: c.face.clone(),
                candidate: c.id.clone(),
                rank: c.rank,
                origin: c.origin,
                trace: c.trace.clone(),
                warnings: c.warnings.clone(),
            })
            .collect(),
    }
}
