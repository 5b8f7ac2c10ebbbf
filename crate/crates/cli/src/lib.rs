//! Configuration handling and command implementations for `codedconv`.

pub mod commands;
pub mod config;
