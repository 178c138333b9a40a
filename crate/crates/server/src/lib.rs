//! Dialogue service: learners start a session on a recommended path, ask
//! about a material on it, confirm the service's reading of the question and
//! only then receive a generated explanation.

pub mod api;
pub mod session;

pub use api::{router, serve, ApiError, AppState, SessionStore};
pub use session::{interpret, Confirmation, Interpretation, Phase, QuestionKind, Session, SessionError};
