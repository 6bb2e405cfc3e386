//! Interactive planning sessions: the batch pipeline's state held open for
//! expert selections, with an append-only event log that replays to the same
//! plan.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::matching::{match_all, reconcile, select_candidate, Candidate, SelectError, Selection};
use crate::ose::{what_if_expand, CuttingSet, OseDatabase, Variant, WhatIfError, WhatIfField};
use crate::part::Part;
use crate::pipeline::{build_plan, default_selections, validate_inputs, PipelineError};
use crate::report::{generate_documentation, PlanDocument};
use crate::setup::ProcessPlan;
use crate::transform::{transform_part, FaceAttributes, Tolerances, TransformOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Select { face: String, selection: Selection },
    Rebuild,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    /// Session version reached by applying this event.
    pub version: u64,
    pub event: Event,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("face {0} not found")]
    UnknownFace(String),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error("version conflict: expected {expected}, session is at {actual}")]
    Conflict { expected: u64, actual: u64 },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    WhatIf(#[from] WhatIfError),
    #[error("session store: {0}")]
    Store(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub version: u64,
    pub tolerances: Tolerances,
    pub part: Part,
    pub db: OseDatabase,
    pub tools: Vec<CuttingSet>,
    pub attributes: TransformOutput,
    pub candidates: BTreeMap<String, Vec<Candidate>>,
    pub plan: ProcessPlan,
    /// Selections changed since the plan was last built.
    pub stale: bool,
    /// Notices from automatic demotions and reverted selections.
    pub notices: Vec<String>,
    pub events: Vec<LoggedEvent>,
}

/// Compact view of a session for listings and the synthesis template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub version: u64,
    pub part: String,
    pub db_version: Option<String>,
    pub faces: usize,
    pub stale: bool,
    pub synthesis: Option<crate::report::SynthesisTable>,
    pub unmatched: Vec<String>,
    pub inaccessible: Vec<String>,
    pub selections: BTreeMap<String, Option<String>>,
    pub notices: Vec<String>,
    pub events: usize,
}

/// Per-face view: attributes plus candidate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceView {
    pub attributes: FaceAttributes,
    pub candidates: Vec<Candidate>,
    pub selected: Option<String>,
}

impl Session {
    /// Runs transformation and matching and proposes level-1 selections.
    pub fn create(
        id: impl Into<String>,
        part: Part,
        db: OseDatabase,
        tools: Vec<CuttingSet>,
        tolerances: Tolerances,
    ) -> Result<Session, SessionError> {
        let report = validate_inputs(&part, &db);
        if !report.is_empty() {
            return Err(PipelineError::Validation(report).into());
        }
        let attributes = transform_part(&part, &tolerances);
        let mut candidates = match_all(&attributes.faces, &db, &tools);
        let notices = default_selections(&mut candidates, &db, &tools)?;
        let plan = build_plan(&part, &attributes, &candidates, &db, &tools, &notices)?;
        Ok(Session {
            id: id.into(),
            version: 0,
            tolerances,
            part,
            db,
            tools,
            attributes,
            candidates,
            plan,
            stale: false,
            notices,
            events: vec![],
        })
    }

    fn check_version(&self, expected: Option<u64>) -> Result<(), SessionError> {
        match expected {
            Some(e) if e != self.version => Err(SessionError::Conflict {
                expected: e,
                actual: self.version,
            }),
            _ => Ok(()),
        }
    }

    /// Applies one event after checking the optimistic-concurrency version.
    pub fn apply(&mut self, event: Event, expected_version: Option<u64>) -> Result<(), SessionError> {
        self.check_version(expected_version)?;
        match &event {
            Event::Select { face, selection } => {
                let cands = self
                    .candidates
                    .get_mut(face)
                    .ok_or_else(|| SessionError::UnknownFace(face.clone()))?;
                select_candidate(cands, face, selection, &self.db, &self.tools)?;
                self.stale = true;
            }
            Event::Rebuild => {
                self.plan = build_plan(
                    &self.part,
                    &self.attributes,
                    &self.candidates,
                    &self.db,
                    &self.tools,
                    &self.notices,
                )?;
                self.stale = false;
            }
        }
        self.version += 1;
        self.events.push(LoggedEvent {
            version: self.version,
            event,
        });
        Ok(())
    }

    pub fn select(&mut self, face: &str, selection: Selection, expected: Option<u64>) -> Result<(), SessionError> {
        self.apply(
            Event::Select {
                face: face.into(),
                selection,
            },
            expected,
        )
    }

    pub fn rebuild(&mut self, expected: Option<u64>) -> Result<(), SessionError> {
        self.apply(Event::Rebuild, expected)
    }

    /// Re-matches every face against a new database or tool list, keeping
    /// expert selections whose candidates survive.
    pub fn rematch(&mut self, db: OseDatabase, tools: Vec<CuttingSet>) -> Result<(), SessionError> {
        let mut fresh = match_all(&self.attributes.faces, &db, &tools);
        let mut notices = Vec::new();
        for (face, cands) in fresh.iter_mut() {
            let prev = self.candidates.get(face).cloned().unwrap_or_default();
            let (merged, notice) = reconcile(&prev, std::mem::take(cands));
            *cands = merged;
            notices.extend(notice.map(|n| format!("face {face}: {n}")));
        }
        self.db = db;
        self.tools = tools;
        for cands in fresh.values_mut() {
            if !cands.is_empty() && !cands.iter().any(|c| c.selected) {
                let face = cands[0].face.clone();
                select_candidate(cands, &face, &Selection::Default, &self.db, &self.tools)?;
            }
        }
        self.candidates = fresh;
        self.notices.extend(notices);
        self.stale = true;
        self.version += 1;
        Ok(())
    }

    pub fn export(&self) -> PlanDocument {
        generate_documentation(&self.plan)
    }

    pub fn face(&self, id: &str) -> Result<FaceView, SessionError> {
        let attributes = self
            .attributes
            .face(id)
            .ok_or_else(|| SessionError::UnknownFace(id.into()))?
            .clone();
        let candidates = self.candidates.get(id).cloned().unwrap_or_default();
        Ok(FaceView {
            selected: candidates.iter().find(|c| c.selected).map(|c| c.id.clone()),
            attributes,
            candidates,
        })
    }

    pub fn faces(&self) -> Vec<FaceView> {
        self.attributes
            .faces
            .iter()
            .map(|a| self.face(&a.face).expect("attributes and candidates share faces"))
            .collect()
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            version: self.version,
            part: self.part.id.clone(),
            db_version: self.db.version.clone(),
            faces: self.part.faces.len(),
            stale: self.stale,
            synthesis: self.plan.synthesis.clone(),
            unmatched: self.plan.unmatched.clone(),
            inaccessible: self.plan.inaccessible.clone(),
            selections: self
                .candidates
                .iter()
                .map(|(f, cs)| (f.clone(), cs.iter().find(|c| c.selected).map(|c| c.id.clone())))
                .collect(),
            notices: self.notices.clone(),
            events: self.events.len(),
        }
    }

    pub fn what_if(&self, ose: &str, vary: &[WhatIfField]) -> Result<Vec<Variant>, SessionError> {
        Ok(what_if_expand(ose, &self.db, vary)?)
    }

    /// Rebuilds a session from its inputs and event log.
    pub fn replay(
        id: impl Into<String>,
        part: Part,
        db: OseDatabase,
        tools: Vec<CuttingSet>,
        tolerances: Tolerances,
        events: &[LoggedEvent],
    ) -> Result<Session, SessionError> {
        let mut s = Session::create(id, part, db, tools, tolerances)?;
        for e in events {
            s.apply(e.event.clone(), None)?;
        }
        Ok(s)
    }
}

/// Sessions persisted as one JSON document each in a directory.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, SessionError> {
        std::fs::create_dir_all(dir.as_ref()).map_err(|e| SessionError::Store(e.to_string()))?;
        Ok(SessionStore {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    fn path(&self, id: &str) -> Option<PathBuf> {
        let ok = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        ok.then(|| self.dir.join(format!("{id}.json")))
    }

    /// Ids of stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>, SessionError> {
        let mut ids: Vec<String> = std::fs::read_dir(&self.dir)
            .map_err(|e| SessionError::Store(e.to_string()))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".json").map(str::to_string)
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Next free id of the form `s0001`.
    pub fn next_id(&self) -> Result<String, SessionError> {
        let n = self
            .list()?
            .iter()
            .filter_map(|id| id.strip_prefix('s')?.parse::<u64>().ok())
            .max()
            .unwrap_or(0);
        Ok(format!("s{:04}", n + 1))
    }

    pub fn save(&self, s: &Session) -> Result<(), SessionError> {
        let path = self.path(&s.id).ok_or_else(|| SessionError::NotFound(s.id.clone()))?;
        let json = serde_json::to_string(s).map_err(|e| SessionError::Store(e.to_string()))?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, json).map_err(|e| SessionError::Store(e.to_string()))?;
        std::fs::rename(&tmp, &path).map_err(|e| SessionError::Store(e.to_string()))
    }

    pub fn load(&self, id: &str) -> Result<Session, SessionError> {
        let path = self.path(id).ok_or_else(|| SessionError::NotFound(id.into()))?;
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(SessionError::NotFound(id.into())),
            Err(e) => return Err(SessionError::Store(e.to_string())),
        };
        serde_json::from_str(&text).map_err(|e| SessionError::Store(format!("{id}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_ids_stay_inside_the_directory() {
        let dir = std::env::temp_dir().join(format!("ose-unit-store-{}", std::process::id()));
        let store = SessionStore::open(&dir).unwrap();
        assert_eq!(store.next_id().unwrap(), "s0001");
        for bad in ["", "..", "../x", "a/b", "s 1"] {
            assert!(store.path(bad).is_none(), "{bad:?}");
        }
        assert!(store.path("s0001").unwrap().starts_with(&dir));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
