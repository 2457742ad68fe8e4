use alloc::string::String;

/// Errors raised by simulators and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A requested size would exceed a hard resource cap.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    /// A simulated state became non-finite or exceeded the explosion bound.
    #[error("state exploded at t = {time}")]
    Explosion { time: f64 },
    /// Central differences would lose monotonicity on this grid.
    #[error("Péclet condition violated: at least {required_n} grid intervals needed")]
    Peclet { required_n: usize },
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
