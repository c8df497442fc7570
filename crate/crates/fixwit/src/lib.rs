//! File formats, certificates, the `fixwit` command line and the HTTP game
//! server.

pub mod error;
pub mod model;
pub mod syntax;
pub mod payload;
pub mod cert;
pub mod session;
pub mod server;
pub mod commands;
