//! Fixtures shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

pub mod fixtures;
pub mod oracle;
