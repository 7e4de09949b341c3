use crate::geometry::BoundingBox;

/// Errors produced by the tracking library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("frame has a zero dimension ({width}x{height})")]
    EmptyFrame { width: u32, height: u32 },

    #[error("rectangle ({},{}) {}x{} out of bounds for a {width}x{height} image", rect.x, rect.y, rect.w, rect.h)]
    OutOfBounds {
        rect: BoundingBox,
        width: u32,
        height: u32,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("tracking lost at frame {frame}: {reason}")]
    TrackingLost { frame: usize, reason: String },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
