//! Library side of the `cardioid` command: configuration, file formats and the subcommands.

pub mod boundary;
pub mod config;
pub mod error;
pub mod eval;
pub mod exponents;
pub mod render;
pub mod verify;

use std::path::Path;

pub use config::{ImageSpec, ScenarioConfig};
pub use error::{CliError, CliResult};

/// 17 significant digits: every `f64` survives a text round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    std::fs::write(path, bytes).map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, 5e-324, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
