//! File formats, experiment runner and command-line front end on top of
//! [`instab_core`].

pub mod experiment;
pub mod format;

pub use instab_core as core;
