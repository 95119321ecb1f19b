//! Command-line front end for the `geofil` solvers: run configs, file
//! formats, named scenarios, and the subcommand implementations.

use std::fmt;

pub mod commands;
pub mod config;
pub mod formats;
pub mod scenarios;

/// Everything that can abort a command, sorted by exit class. The message is
/// already a single line; [`main`] prints it to stderr verbatim.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: flags, config files, parameter values. Exit 1.
    Validation(String),
    /// The run itself failed after validation passed. Exit 2.
    Solver(String),
    /// Reading or writing files went wrong. Exit 2.
    Io(String),
    /// `verify` found failing checks. Exit 3.
    Verify { failed: usize },
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Solver(_) | Failure::Io(_) => 2,
            Failure::Verify { .. } => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(msg) => write!(f, "error[validation]: {msg}"),
            Failure::Solver(msg) => write!(f, "error[solver]: {msg}"),
            Failure::Io(msg) => write!(f, "error[io]: {msg}"),
            Failure::Verify { failed } => {
                write!(f, "error[verify]: {failed} check(s) failed; see the report")
            }
        }
    }
}

impl std::error::Error for Failure {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_failure_class() {
        assert_eq!(Failure::Validation("x".into()).code(), 1);
        assert_eq!(Failure::Solver("x".into()).code(), 2);
        assert_eq!(Failure::Io("x".into()).code(), 2);
        assert_eq!(Failure::Verify { failed: 3 }.code(), 3);
    }

    #[test]
    fn messages_are_single_lines_with_a_class_prefix() {
        for (fail, prefix) in [
            (Failure::Validation("bad key".into()), "error[validation]: "),
            (Failure::Solver("stalled".into()), "error[solver]: "),
            (Failure::Io("denied".into()), "error[io]: "),
            (Failure::Verify { failed: 1 }, "error[verify]: "),
        ] {
            let msg = fail.to_string();
            assert!(msg.starts_with(prefix), "{msg}");
            assert!(!msg.contains('\n'));
        }
    }
}
