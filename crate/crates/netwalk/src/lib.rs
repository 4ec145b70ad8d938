//! File formats, ensemble experiments, CLI and live session server built on
//! [`netwalk_core`].

pub mod cli;
pub mod experiments;
pub mod io;
pub mod server;
pub mod session;

pub use netwalk_core as core;
