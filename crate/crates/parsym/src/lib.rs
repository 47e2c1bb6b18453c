//! Command-line front end and report formats for `parsym-core`.

pub mod cli;
pub mod load;
pub mod pipeline;
pub mod report;
