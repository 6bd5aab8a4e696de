use thiserror::Error;

/// Errors reported by the simulator, the learning engine and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for a universe of size {universe}")]
    IndexOutOfRange { index: usize, universe: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("matrix is rank deficient: effective rank {rank}, needed {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("search space of {candidates} candidates exceeds the budget of {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("training diverged at epoch {epoch}, batch {batch}: {detail}")]
    Divergence {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("checksum mismatch in {what}: stored {stored:08x}, computed {computed:08x}")]
    Checksum {
        what: String,
        stored: u32,
        computed: u32,
    },

    #[error("receiver bank has no network for carrier group {0}")]
    MissingNetwork(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
