//! Instance files, command bodies and the self-test suite behind the `eac`
//! binary.

pub mod commands;
pub mod schema;
pub mod selftest;
