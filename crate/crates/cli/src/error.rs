use std::fmt;

/// Terminal command failure, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unknown preset or model name.
    Usage(String),
    /// Unreadable or inconsistent input data.
    Data(String),
    /// Renderer or inference runtime failure.
    External(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::External(_) => 3,
        }
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        CliError::Data(msg.to_string())
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::External(m) => f.write_str(m),
        }
    }
}

impl From<tablesieve::Error> for CliError {
    fn from(e: tablesieve::Error) -> Self {
        use tablesieve::Error as E;
        match e {
            E::InvalidArgument(_) => CliError::Usage(e.to_string()),
            E::RenderFailed { .. } | E::Inference(_) => CliError::External(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, CliError>;
