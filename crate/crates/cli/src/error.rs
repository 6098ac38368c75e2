use std::fmt;

/// CLI failure classes, each with a stable exit code: usage errors exit 1,
/// data/ingestion errors 2, numerical failures 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => {
                f.write_str(m)
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<jcurve::Error> for CliError {
    fn from(e: jcurve::Error) -> Self {
        match e {
            // a segment too short or non-positive to fit is a data problem;
            // everything else the library reports is numerical
            jcurve::Error::DegenerateSegment(_) => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
