//! Scenario parsing, experiment runners and the check registry behind the
//! `platelab` binary.

pub mod checks;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod scenario;
