//! Command-line verbs and the HTTP session service of the OSE planner.

pub mod batch;
pub mod server;
