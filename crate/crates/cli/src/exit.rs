use std::fmt;

pub const FAILURE: u8 = 1;
pub const CONFIG: u8 = 2;
pub const IO: u8 = 3;
pub const NUMERIC: u8 = 4;

/// An error that carries its own exit code.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub message: String,
}

impl Coded {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Coded {}

pub fn code_of(err: &anyhow::Error) -> u8 {
    use causal_scope::Error as E;
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<Coded>() {
            return c.code;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidConfig(_) | E::InvalidInput(_) | E::DimensionMismatch(_) | E::Json(_) => CONFIG,
                E::Io(_) | E::Format(_) => IO,
                E::Numerical(_) | E::EpisodeFinished { .. } => NUMERIC,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return IO;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return CONFIG;
        }
    }
    FAILURE
}
