//! Consultation sessions over the mu engine: an event-sourced session model,
//! JSON-lines persistence, the `/v1` HTTP protocol and the `mu` command.

pub mod cli;
pub mod error;
pub mod event;
pub mod http;
pub mod kbs;
pub mod manager;
pub mod protocol;
pub mod session;
pub mod store;

pub use error::ServiceError;
pub use kbs::KbRegistry;
pub use manager::SessionManager;
pub use session::Session;
