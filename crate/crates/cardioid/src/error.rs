use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {name} = {value} outside {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("point ({x}, {y}) is outside the domain of {map}")]
    OutsideDomain { map: &'static str, x: f64, y: f64 },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("no sign change of the fitted slope in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range<T>(name: &'static str, value: f64, expected: &'static str) -> Result<T> {
    Err(Error::OutOfRange {
        name,
        value,
        expected,
    })
}
