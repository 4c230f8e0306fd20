use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("back-face incidence (d·n = {0})")]
    BackFaceIncidence(f64),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("configuration error: {0}")]
    Config(String),
}
