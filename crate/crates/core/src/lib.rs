//! Knowledge-based process planning for milled parts.

mod vocab;

pub mod geometry;
pub mod part;
pub mod transform;
pub mod ose;
pub mod matching;
pub mod setup;
pub mod report;
pub mod pipeline;
pub mod session;
pub mod fixtures;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/part-model.md")]
    pub struct PartModel;
    #[doc = include_str!("../../../book/src/transformation.md")]
    pub struct Transformation;
    #[doc = include_str!("../../../book/src/ose-database.md")]
    pub struct OseDatabase;
    #[doc = include_str!("../../../book/src/matching.md")]
    pub struct Matching;
    #[doc = include_str!("../../../book/src/setups.md")]
    pub struct Setups;
    #[doc = include_str!("../../../book/src/automation.md")]
    pub struct Automation;
    #[doc = include_str!("../../../book/src/sessions.md")]
    pub struct Sessions;
    #[doc = include_str!("../../../book/src/audit.md")]
    pub struct Audit;
    #[doc = include_str!("../../../book/src/cli-and-http.md")]
    pub struct CliAndHttp;
}
