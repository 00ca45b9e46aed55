//! Command language, sessions, batch files and the interactive loop for
//! the `senseref` binary.

pub mod batch;
pub mod command;
pub mod repl;
pub mod session;

pub use batch::{run_batch_text, BatchReport};
pub use command::{parse_command, Command};
pub use session::{Config, Outcome, ReportStyle, Session, SessionError};
