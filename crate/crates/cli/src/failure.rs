use std::fmt::Display;

pub const PROPERTY: u8 = 1;
pub const USAGE: u8 = 2;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(msg: impl Display) -> Self {
        Failure {
            code: USAGE,
            message: msg.to_string(),
        }
    }

    pub fn property(msg: impl Display) -> Self {
        Failure {
            code: PROPERTY,
            message: msg.to_string(),
        }
    }

    pub fn context(mut self, ctx: impl Display) -> Self {
        self.message = format!("{ctx}: {}", self.message);
        self
    }
}

impl From<quadgraph::Error> for Failure {
    fn from(e: quadgraph::Error) -> Self {
        match e {
            quadgraph::Error::Inconsistency(_) => Failure::property(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::usage(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(e)
    }
}
