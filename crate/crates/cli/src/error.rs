use std::fmt;

use polar_amm::pool::ReplayError;
use polar_amm::AmmError;

#[derive(Debug)]
pub enum CliError {
    Amm(AmmError),
    /// A replayed trade failed; carries its sequence number.
    Replay(ReplayError),
    /// Unreadable files or malformed input documents.
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        let amm = match self {
            CliError::Amm(e) => e,
            CliError::Replay(r) => &r.error,
            CliError::Input(_) => return 2,
        };
        match amm {
            AmmError::InsufficientLiquidity { .. } => 3,
            AmmError::Overflow(_) | AmmError::Numeric(_) => 4,
            AmmError::Domain(_) | AmmError::Shape(_) | AmmError::Validation(_) | AmmError::NotFound(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Amm(e) => write!(f, "{e}"),
            CliError::Replay(r) => write!(f, "{r}"),
            CliError::Input(msg) => f.write_str(msg),
        }
    }
}

impl From<AmmError> for CliError {
    fn from(e: AmmError) -> Self {
        CliError::Amm(e)
    }
}

impl From<ReplayError> for CliError {
    fn from(e: ReplayError) -> Self {
        CliError::Replay(e)
    }
}
