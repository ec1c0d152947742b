//! Report types and output formatting shared by the `msadapt` binary and its tests.

pub mod json;
pub mod report;
