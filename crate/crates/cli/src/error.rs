use thiserror::Error;

use superint::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_UNKNOWN_ENTRY: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Mode(String),

    #[error("I/O: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            CliError::Config(_) | CliError::Mode(_) => EXIT_SCHEMA,
            CliError::Io(_) => EXIT_FAILED,
        }
    }
}

pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::UnknownEntry(_) => EXIT_UNKNOWN_ENTRY,
        CoreError::UnknownParameter(_)
        | CoreError::InvalidParameter { .. }
        | CoreError::InvalidInitialCondition(_)
        | CoreError::InvalidInterval { .. }
        | CoreError::ConfigMismatch { .. }
        | CoreError::SeedInvalid { .. }
        | CoreError::NoLimit(_) => EXIT_SCHEMA,
        CoreError::PoleCollision { .. }
        | CoreError::ImmediatePole { .. }
        | CoreError::SingularPoint { .. }
        | CoreError::GridSingularity { .. }
        | CoreError::ZeroCrossing { .. }
        | CoreError::OutOfDomain { .. }
        | CoreError::BranchTurning { .. }
        | CoreError::QuadratureDomain { .. } => EXIT_SINGULAR,
        _ => EXIT_FAILED,
    }
}
