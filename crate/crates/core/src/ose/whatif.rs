//! What-if analysis: which single-field variations of an OSE's configuration
//! the database already covers for the same geometry family.

use serde::{Deserialize, Serialize};

use super::model::{Mode, OseDatabase};
use crate::transform::MfgType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhatIfField {
    MfgType,
    Mode,
    Tmc,
}

impl WhatIfField {
    pub const ALL: [WhatIfField; 3] = [WhatIfField::MfgType, WhatIfField::Mode, WhatIfField::Tmc];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub field: WhatIfField,
    pub value: String,
    pub covered: bool,
    /// OSEs of the same family whose configuration realises the variant.
    pub covering: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WhatIfError {
    #[error("no OSE with id {0}")]
    UnknownOse(String),
    #[error("OSE {0} references a configuration that does not exist")]
    DanglingConfig(String),
}

/// Enumerates every single-field substitution of the OSE's configuration over
/// `vary` and reports whether an OSE of the same family already provides it.
///
/// A manufacturing-type or mode variant is covered by an OSE whose config has
/// the substituted value and the original value of the other field. A TMC
/// variant (a TMC the configuration does not allow) is covered by an OSE with
/// the same type and mode whose config allows that TMC.
pub fn what_if_expand(ose_id: &str, db: &OseDatabase, vary: &[WhatIfField]) -> Result<Vec<Variant>, WhatIfError> {
    let ose = db.ose(ose_id).ok_or_else(|| WhatIfError::UnknownOse(ose_id.into()))?;
    let cfg = db
        .config(&ose.config)
        .ok_or_else(|| WhatIfError::DanglingConfig(ose_id.into()))?;
    let siblings: Vec<_> = db
        .oses
        .iter()
        .filter(|o| o.family == ose.family && o.id != ose.id)
        .filter_map(|o| db.config(&o.config).map(|c| (o, c)))
        .collect();
    let mut fields: Vec<WhatIfField> = vary.to_vec();
    fields.sort();
    fields.dedup();
    let mut out = Vec::new();
    for field in fields {
        let values: Vec<String> = match field {
            WhatIfField::MfgType => MfgType::ALL
                .iter()
                .filter(|m| **m != cfg.mfg_type)
                .map(|m| m.as_str().into())
                .collect(),
            WhatIfField::Mode => Mode::ALL
                .iter()
                .filter(|m| **m != cfg.mode)
                .map(|m| m.as_str().into())
                .collect(),
            WhatIfField::Tmc => db
                .tmcs
                .iter()
                .map(|t| t.id.clone())
                .filter(|t| !cfg.allowed_tmcs.contains(t))
                .collect(),
        };
        for value in values {
            let covering: Vec<String> = siblings
                .iter()
                .filter(|(_, c)| match field {
                    WhatIfField::MfgType => c.mfg_type.as_str() == value && c.mode == cfg.mode,
                    WhatIfField::Mode => c.mode.as_str() == value && c.mfg_type == cfg.mfg_type,
                    WhatIfField::Tmc => {
                        c.mfg_type == cfg.mfg_type && c.mode == cfg.mode && c.allowed_tmcs.contains(&value)
                    }
                })
                .map(|(o, _)| o.id.clone())
                .collect();
            out.push(Variant {
                field,
                value,
                covered: !covering.is_empty(),
                covering,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::seed_db;

    #[test]
    fn unknown_ose_is_an_error() {
        assert_eq!(
            what_if_expand("NOPE", &seed_db(), &WhatIfField::ALL),
            Err(WhatIfError::UnknownOse("NOPE".into()))
        );
    }

    #[test]
    fn variants_exclude_the_current_value() {
        let db = seed_db();
        let ose = db.ose("O_PLAN_END_R").unwrap();
        let cfg = db.config(&ose.config).unwrap();
        let v = what_if_expand(&ose.id, &db, &[WhatIfField::Tmc, WhatIfField::Mode, WhatIfField::Tmc]).unwrap();
        assert!(v.iter().all(|x| x.field != WhatIfField::MfgType));
        assert!(v.iter().filter(|x| x.field == WhatIfField::Mode).all(|x| x.value != cfg.mode.as_str()));
        assert!(v.iter().filter(|x| x.field == WhatIfField::Tmc).all(|x| !cfg.allowed_tmcs.contains(&x.value)));
        assert_eq!(v.iter().filter(|x| x.field == WhatIfField::Mode).count(), Mode::ALL.len() - 1);
        for x in &v {
            for o in &x.covering {
                assert_eq!(db.ose(o).unwrap().family, ose.family);
            }
        }
    }
}
