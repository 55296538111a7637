//! Yield and wafer/panel dicing kernels shared by the die and interposer
//! cost models.
//!
//! All areas are mm²; defect densities are per cm². The mm² → cm²
//! conversion happens here, in one place, where the defect density is
//! applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::techdb::PanelSpec;

pub const MM2_PER_CM2: f64 = 100.0;

/// Parameters of the negative binomial yield model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldParams {
    /// Systematic yield multiplier in (0, 1].
    pub base_yield: f64,
    /// Defect density in defects per cm².
    pub defect_density: f64,
    /// Defect clustering parameter, > 0.
    pub clustering_alpha: f64,
}

impl YieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_yield > 0.0 && self.base_yield <= 1.0) {
            return Err(Error::Domain {
                operation: "yield_params",
                reason: format!("base_yield must be in (0,1], got {}", self.base_yield),
            });
        }
        if !(self.defect_density >= 0.0) {
            return Err(Error::Domain {
                operation: "yield_params",
                reason: format!("defect_density must be >= 0, got {}", self.defect_density),
            });
        }
        if !(self.clustering_alpha > 0.0) {
            return Err(Error::Domain {
                operation: "yield_params",
                reason: format!(
                    "clustering_alpha must be > 0, got {}",
                    self.clustering_alpha
                ),
            });
        }
        Ok(())
    }
}

/// Negative binomial yield: `base × (1 + A·D0/α)^(−α)` with `A` in cm².
///
/// `defect_density = 0` and `area = 0` both return `base_yield` exactly.
pub fn negbin_yield(area_mm2: f64, params: &YieldParams) -> Result<f64> {
    params.validate()?;
    if !(area_mm2 >= 0.0) {
        return Err(Error::Domain {
            operation: "negbin_yield",
            reason: format!("area must be >= 0, got {area_mm2}"),
        });
    }
    let area_cm2 = area_mm2 / MM2_PER_CM2;
    let x = area_cm2 * params.defect_density;
    if x == 0.0 {
        return Ok(params.base_yield);
    }
    Ok(params.base_yield * (1.0 + x / params.clustering_alpha).powf(-params.clustering_alpha))
}

/// Gross dies per round wafer using the standard two-term approximation:
/// `floor(π(d/2)²/A − πd/√(2A))`, clamped at zero when the die does not
/// fit.
pub fn dies_per_round_wafer(die_area_mm2: f64, wafer_diameter_mm: f64) -> Result<u64> {
    if !(die_area_mm2 > 0.0) {
        return Err(Error::Domain {
            operation: "dies_per_round_wafer",
            reason: format!("die area must be > 0, got {die_area_mm2}"),
        });
    }
    if !(wafer_diameter_mm > 0.0) {
        return Err(Error::Domain {
            operation: "dies_per_round_wafer",
            reason: format!("wafer diameter must be > 0, got {wafer_diameter_mm}"),
        });
    }
    let radius = wafer_diameter_mm / 2.0;
    let gross = std::f64::consts::PI * radius * radius / die_area_mm2
        - std::f64::consts::PI * wafer_diameter_mm / (2.0 * die_area_mm2).sqrt();
    Ok(gross.max(0.0).floor() as u64)
}

/// Interposers per panel as a pure area ratio: `floor(A_panel / A_unit)`.
///
/// Deliberately no 2D packing; the ratio slightly overestimates what a
/// rectangular cut plan can achieve.
pub fn units_per_panel(unit_area_mm2: f64, panel: &PanelSpec) -> Result<u64> {
    if !(unit_area_mm2 > 0.0) {
        return Err(Error::Domain {
            operation: "units_per_panel",
            reason: format!("unit area must be > 0, got {unit_area_mm2}"),
        });
    }
    Ok((panel.area_mm2() / unit_area_mm2).floor() as u64)
}
