//! Command-line entry points and the live session server.

pub mod commands;
pub mod server;
pub mod wire;
