use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("order too large: {order} exceeds {limit}")]
    OrderTooLarge { order: u32, limit: u32 },

    #[error("conversion table limited to first order (got p={p}, l={l})")]
    UnsupportedConversion { p: u32, l: i32 },

    #[error("grid under-resolved for requested order {order}: {detail}")]
    UnderResolved { order: u32, detail: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("geometry mismatch between expansions")]
    GeometryMismatch,

    #[error("degenerate spherical triangle")]
    DegenerateTriangle,

    #[error("invalid spherical triangle: {0}")]
    InvalidTriangle(String),

    #[error("invalid mirror path: {0}")]
    InvalidPath(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("zero input power")]
    ZeroInput,

    #[error("device modeled for vertical polarization only")]
    NonVerticalInput,

    #[error("fiber outside three-mode regime: {0}")]
    FiberRegime(String),

    #[error("compressor model limited to first order")]
    CompressorOrder,

    #[error("state fully rejected")]
    StateRejected,

    #[error("zero-probability trigger")]
    EmptyTrigger,

    #[error("unsupported terms present: {0}")]
    UnsupportedTerms(String),

    #[error("unsupported polarization state: {0}")]
    UnsupportedPolarization(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by malformed user input rather than by the model.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::OutOfRange(_)
                | Error::InvalidGrid(_)
                | Error::InvalidNetwork(_)
        )
    }
}
