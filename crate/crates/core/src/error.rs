use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series diverged numerically")]
    SeriesDiverged,
    #[error("non-finite matrix")]
    NonFinite,
    #[error("no principal logarithm")]
    NoPrincipalLog,
    #[error("sqrt iteration failed")]
    SqrtIterationFailed,
    #[error("singular matrix")]
    Singular,
    #[error("half-turn: Euler–Rodrigues vector undefined")]
    HalfTurn,
    #[error("not diagonalizable: screw transformation (pitch {pitch:.3e})")]
    Screw { pitch: f64 },
    #[error("ill-conditioned eigenbasis (cond {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("not diagonalizable: defective eigenvalue {0}")]
    Defective(String),
    #[error("imaginary residue {residue:.3e} exceeds tolerance")]
    ComplexResidue { residue: f64 },
    #[error("degenerate Euler extraction")]
    GimbalLock,
    #[error("not a rigid transform: {0}")]
    NotRigid(String),
    #[error("not a homogeneous matrix")]
    NotHomogeneous,
    #[error("empty mask")]
    EmptyMask,
    #[error("incompatible grids")]
    IncompatibleGrids,
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed field file: {0}")]
    MalformedField(String),
    #[error("memory cap exceeded: run needs {required} bytes, cap is {cap} bytes")]
    MemoryCap { required: u64, cap: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to I/O or bad arguments).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SeriesDiverged
                | Error::NonFinite
                | Error::NoPrincipalLog
                | Error::SqrtIterationFailed
                | Error::Singular
                | Error::HalfTurn
                | Error::Screw { .. }
                | Error::IllConditioned { .. }
                | Error::Defective(_)
                | Error::ComplexResidue { .. }
                | Error::GimbalLock
                | Error::NotRigid(_)
                | Error::NotHomogeneous
                | Error::EmptyMask
                | Error::MemoryCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
