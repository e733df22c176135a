//! HTTP session service and command-line front end for `scis-core`.

pub mod cli;
pub mod server;

pub use server::{router, AppState, Config, SessionInfo, StrokesResponse};
