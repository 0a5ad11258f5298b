use std::path::PathBuf;

/// Errors produced by the signal, interpolation, vocoder and evaluation code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav error on {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("unsupported wav encoding: {0}")]
    UnsupportedCodec(String),

    #[error("wav file {0} has an empty data chunk")]
    EmptyData(PathBuf),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("corrupt weight file header: {0}")]
    CorruptHeader(String),

    #[error("weight file is missing tensor `{0}`")]
    MissingTensor(String),

    #[error("weight file has unexpected tensor `{0}`")]
    UnexpectedTensor(String),

    #[error("weight file payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("empty input: {0}")]
    Empty(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem or of decoding a file container,
    /// as opposed to bad arguments or inconsistent data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Wav { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
