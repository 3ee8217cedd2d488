//! Scenario and image configuration, validated before anything is computed.

use std::path::PathBuf;

use cardioid::analysis::series::EXP_MODE_MAX_J;
use cardioid::analysis::{thresholds, QuadParams, Quantity};
use cardioid::extension::{Construction, Extension};
use cardioid::squeeze::SqueezeParams;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Largest accepted image side.
pub const MAX_SIDE: u32 = 8192;

/// First cell of the standard cardioid (fixed by its local cusp fit).
pub const CARDIOID_J0: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// The model domain M_s.
    Ms,
    /// The standard cardioid, s = 3/2, through f0(z) = E(z + 1).
    Cardioid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionKind {
    Simple,
    Squeezed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DeltaKind {
    Exp,
    Powerlog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub s: f64,
    pub j0: u32,
    pub construction: ConstructionKind,
    pub delta: DeltaKind,
    /// Exponent of the power-log squeeze.
    pub delta_p: Option<f64>,
    pub j_min: u32,
    pub j_max: u32,
    pub quantities: Vec<Quantity>,
    /// Exponents for `Kf` and `Kfinv`; empty means thresholds-based defaults.
    pub q_grid: Vec<f64>,
    /// Exponents for `Df` and `Dfinv`.
    pub p_grid: Vec<f64>,
    pub out: PathBuf,
    pub quad: QuadParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Ms,
            s: 1.5,
            j0: 6,
            construction: ConstructionKind::Simple,
            delta: DeltaKind::Exp,
            delta_p: None,
            j_min: 6,
            j_max: 14,
            quantities: vec![Quantity::Kf, Quantity::Kfinv, Quantity::Dfinv],
            q_grid: Vec::new(),
            p_grid: Vec::new(),
            out: PathBuf::from("out"),
            quad: QuadParams::default(),
        }
    }
}

fn bad<T>(msg: String) -> CliResult<T> {
    Err(CliError::Config(msg))
}

impl ScenarioConfig {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.s > 1.0) || !self.s.is_finite() {
            return bad(format!("s must be a finite number > 1, got {}", self.s));
        }
        if self.model == ModelKind::Cardioid {
            if self.s != 1.5 {
                return bad(format!("the standard cardioid has s = 1.5, got {}", self.s));
            }
            if self.j0 != CARDIOID_J0 {
                return bad(format!("the standard cardioid has j0 = {CARDIOID_J0}, got {}", self.j0));
            }
        }
        if self.j0 == 0 {
            return bad("j0 must be >= 1".into());
        }
        if !(self.j0 <= self.j_min && self.j_min <= self.j_max) {
            return bad(format!(
                "need j0 <= jmin <= jmax, got {} / {} / {}",
                self.j0, self.j_min, self.j_max
            ));
        }
        if self.j_max > cardioid::extension::MAX_CELL {
            return bad(format!("jmax {} beyond the last cell", self.j_max));
        }
        if self.construction == ConstructionKind::Squeezed {
            match self.delta {
                DeltaKind::Exp if self.j_max > EXP_MODE_MAX_J => {
                    return bad(format!(
                        "exp-mode delta caps jmax at {EXP_MODE_MAX_J}, got {}",
                        self.j_max
                    ))
                }
                DeltaKind::Powerlog => match self.delta_p {
                    Some(p) if p > 1.0 && p.is_finite() => {}
                    Some(p) => return bad(format!("power-log delta needs p > 1, got {p}")),
                    None => return bad("power-log delta needs --p".into()),
                },
                DeltaKind::Exp => {}
            }
        }
        for &v in self.q_grid.iter().chain(&self.p_grid) {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("exponents must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }

    pub fn construction(&self) -> CliResult<Construction<f64>> {
        Ok(match self.construction {
            ConstructionKind::Simple => Construction::Simple,
            ConstructionKind::Squeezed => Construction::Squeezed {
                params: match self.delta {
                    DeltaKind::Exp => SqueezeParams::exp(),
                    DeltaKind::Powerlog => {
                        SqueezeParams::power_log(self.delta_p.unwrap_or(f64::NAN))?
                    }
                },
            },
        })
    }

    pub fn build(&self) -> CliResult<Extension<f64>> {
        self.validate()?;
        let c = self.construction()?;
        Ok(match self.model {
            ModelKind::Ms => Extension::cardioid_type(self.s, self.j0, c)?,
            ModelKind::Cardioid => Extension::standard_cardioid(c)?,
        })
    }

    /// Critical value of `quantity` predicted for this scenario, when there is one.
    pub fn predicted_critical(&self, quantity: Quantity) -> CliResult<Option<f64>> {
        let th = thresholds(self.s, self.power_log_p())?;
        let squeezed = self.construction == ConstructionKind::Squeezed;
        Ok(match quantity {
            Quantity::Kf if !squeezed => Some(1.0 / (self.s - 1.0)),
            Quantity::Kf => Some(th.q_combined.unwrap_or(th.q_kf)),
            Quantity::Kfinv => Some(th.q_kfinv),
            Quantity::Dfinv => Some(th.p_inv),
            Quantity::Df | Quantity::Jac => None,
        })
    }

    fn power_log_p(&self) -> Option<f64> {
        (self.construction == ConstructionKind::Squeezed && self.delta == DeltaKind::Powerlog)
            .then_some(self.delta_p)
            .flatten()
    }

    /// The exponents run for `quantity`: the user grid, else the prediction and one step either side.
    pub fn exponent_grid(&self, quantity: Quantity) -> CliResult<Vec<f64>> {
        let user = match quantity {
            Quantity::Kf | Quantity::Kfinv => &self.q_grid,
            Quantity::Df | Quantity::Dfinv => &self.p_grid,
            Quantity::Jac => return Ok(vec![1.0]),
        };
        if !user.is_empty() {
            return Ok(user.clone());
        }
        Ok(match (quantity, self.predicted_critical(quantity)?) {
            (Quantity::Kfinv, Some(c)) => vec![c - 2.0, c, c + 2.0],
            (Quantity::Dfinv, Some(c)) => vec![c - 0.5, c, c + 0.5],
            (_, Some(c)) => vec![(c - 1.0).max(c / 2.0), c, c + 1.0],
            (_, None) => vec![1.0, 2.0],
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    /// Grayscale of `log10 K` clipped to `[0, 6]`.
    Heatmap,
    /// Images of the lines of a Cartesian grid.
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub width: u32,
    pub height: u32,
    pub mode: RenderMode,
    /// Grid lines per axis in grid mode.
    pub grid_lines: u32,
}

impl ImageSpec {
    pub fn validate(&self) -> CliResult<()> {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return bad(format!("empty viewport {:?} x {:?}", self.x_range, self.y_range));
        }
        if self.width == 0 || self.height == 0 || self.width > MAX_SIDE || self.height > MAX_SIDE {
            return bad(format!(
                "resolution {}x{} outside 1..={MAX_SIDE}",
                self.width, self.height
            ));
        }
        if self.mode == RenderMode::Grid && self.grid_lines < 2 {
            return bad("grid mode needs at least 2 lines".into());
        }
        Ok(())
    }

    /// Center of pixel `(i, k)`; row 0 is the top of the viewport.
    pub fn pixel_center(&self, i: u32, k: u32) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        (
            x0 + (x1 - x0) * (i as f64 + 0.5) / self.width as f64,
            y1 - (y1 - y0) * (k as f64 + 0.5) / self.height as f64,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_caps() {
        let mut c = ScenarioConfig::default();
        assert!(c.validate().is_ok());
        c.j_min = 5;
        assert!(c.validate().is_err());
        c.j_min = 6;
        c.construction = ConstructionKind::Squeezed;
        assert!(c.validate().is_ok());
        c.j_max = 15;
        assert!(c.validate().is_err());
    }

    #[test]
    fn powerlog_needs_p() {
        let mut c = ScenarioConfig {
            construction: ConstructionKind::Squeezed,
            delta: DeltaKind::Powerlog,
            j_max: 12,
            ..ScenarioConfig::default()
        };
        assert!(c.validate().is_err());
        c.delta_p = Some(1.0);
        assert!(c.validate().is_err());
        c.delta_p = Some(2.0);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn default_grids_bracket_the_prediction() {
        let c = ScenarioConfig::default();
        assert_eq!(c.exponent_grid(Quantity::Kf).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(c.exponent_grid(Quantity::Kfinv).unwrap(), vec![3.0, 5.0, 7.0]);
        assert_eq!(c.exponent_grid(Quantity::Dfinv).unwrap(), vec![2.0, 2.5, 3.0]);
    }

    #[test]
    fn image_caps() {
        let mut im = ImageSpec {
            x_range: (-1.0, 1.0),
            y_range: (-1.0, 1.0),
            width: 8192,
            height: 10,
            mode: RenderMode::Heatmap,
            grid_lines: 10,
        };
        assert!(im.validate().is_ok());
        im.width = 8193;
        assert!(im.validate().is_err());
        im.width = 10;
        im.x_range = (1.0, 1.0);
        assert!(im.validate().is_err());
    }
}
