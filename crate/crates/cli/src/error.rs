use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {}{message}", path.display(), position(*line, *column))]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] entwit::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for anything wrong with the input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use entwit::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::InvalidDims(_)
                | E::DimensionMismatch { .. }
                | E::NotHermitian { .. }
                | E::NotPsd { .. }
                | E::NonFinite(_)
                | E::ZeroNorm
                | E::InvalidMeasurement(_)
                | E::InvalidState(_)
                | E::ProbabilityOutOfRange(_)
                | E::ShapeMismatch(_)
                | E::InvalidModel(_)
                | E::InvalidCut(_)
                | E::InvalidArgument(_) => 2,
                _ => 1,
            },
        }
    }
}

fn position(line: usize, column: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!("line {line}, column {column}: ")
    }
}
