//! Conversation simulator: a script runner, a recorder and a load driver for
//! the loopback channel.

pub mod client;
pub mod load;
pub mod record;
pub mod runner;
pub mod script;

pub use client::{Client, ClientError, Http, InProcess};
pub use runner::{run_script, FailKind, Run, Verdict};
pub use script::{parse, Script};
