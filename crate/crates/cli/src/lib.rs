//! Parsing and command implementations behind the `spherecalc` binary.

pub mod catalog;
pub mod commands;
pub mod parse;
