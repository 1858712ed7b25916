use crate::estimator::EstimatorError;
use crate::grid::GridError;
use crate::midas::MidasError;
use crate::schemes::SchemeError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("solver: {0}")]
    Scheme(#[from] SchemeError),
    #[error("estimator: {0}")]
    Estimator(#[from] EstimatorError),
    #[error("midas: {0}")]
    Midas(#[from] MidasError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
