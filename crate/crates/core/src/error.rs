use thiserror::Error;

/// Errors produced by the planning and graph-generation algorithms.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The connectivity ratio is undefined because total user weight is zero.
    #[error("connectivity ratio undefined: total user weight is zero")]
    UndefinedRatio,

    /// The infection loop hit its step cap with access points still
    /// unconnected. Reports the indices of the uninfected vertices.
    #[error("infection did not terminate within {max_steps} steps; {} vertices uninfected: {uninfected:?}", uninfected.len())]
    NonTermination {
        max_steps: u64,
        uninfected: Vec<usize>,
    },

    /// A backhaul graph violates the forest contract (for example an access
    /// point with no path to a backhaul node).
    #[error("corrupt backhaul graph: {0}")]
    CorruptGraph(String),
}

pub type Result<T> = std::result::Result<T, Error>;
