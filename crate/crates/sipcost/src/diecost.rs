//! Die-level economics: from a functional description to area,
//! manufacturing cost, and yield at a technology node.
//!
//! The one non-obvious rule lives in [`die_area`]: I/O transistors stop
//! shrinking long before logic does, so a die's I/O portion is converted
//! to area at a derated density (`transistor_density × io_density_factor`
//! from the node record) rather than at the logic density.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::techdb::TechNode;
use crate::yieldcore::{dies_per_round_wafer, negbin_yield};
use crate::Result;

/// Functional description of one die, resolvable to silicon at a node.
///
/// Size can be given as a transistor budget, an explicit area, or both;
/// when both are present they must agree within 1% (the explicit area is
/// then used, so hand-tuned floorplans survive round-trips through a
/// transistor budget).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DieSpec {
    /// Identifier used in reports and error messages.
    pub name: String,
    /// Name of the technology node the die is manufactured on.
    pub node: String,
    /// Transistor budget in billions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transistor_count_billions: Option<f64>,
    /// Explicit die area in mm².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_mm2: Option<f64>,
    /// Fraction of the transistor budget that is peripheral I/O, in
    /// [0, 1). Zero for pure logic.
    #[serde(default)]
    pub io_fraction: f64,
}

impl DieSpec {
    /// A die described by its area alone.
    pub fn by_area(name: impl Into<String>, node: impl Into<String>, area_mm2: f64) -> DieSpec {
        DieSpec {
            name: name.into(),
            node: node.into(),
            transistor_count_billions: None,
            area_mm2: Some(area_mm2),
            io_fraction: 0.0,
        }
    }

    /// A die described by its transistor budget.
    pub fn by_transistor_count(
        name: impl Into<String>,
        node: impl Into<String>,
        billions: f64,
        io_fraction: f64,
    ) -> DieSpec {
        DieSpec {
            name: name.into(),
            node: node.into(),
            transistor_count_billions: Some(billions),
            area_mm2: None,
            io_fraction,
        }
    }

    fn validate(&self) -> Result<()> {
        let record = format!("die `{}`", self.name);
        if self.transistor_count_billions.is_none() && self.area_mm2.is_none() {
            return Err(Error::Validation {
                record,
                field: "transistor_count_billions/area_mm2".to_string(),
                reason: "at least one sizing field is required".to_string(),
            });
        }
        if let Some(t) = self.transistor_count_billions {
            if !(t > 0.0) {
                return Err(Error::Validation {
                    record,
                    field: "transistor_count_billions".to_string(),
                    reason: format!("must be > 0, got {t}"),
                });
            }
        }
        if let Some(a) = self.area_mm2 {
            if !(a > 0.0) {
                return Err(Error::Validation {
                    record,
                    field: "area_mm2".to_string(),
                    reason: format!("must be > 0, got {a}"),
                });
            }
        }
        if !(self.io_fraction >= 0.0 && self.io_fraction < 1.0) {
            return Err(Error::Validation {
                record,
                field: "io_fraction".to_string(),
                reason: format!("must be in [0, 1), got {}", self.io_fraction),
            });
        }
        Ok(())
    }
}

/// Cost and yield of one die instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DieCostResult {
    /// Resolved die area in mm².
    pub area_mm2: f64,
    /// Manufacturing cost per die (wafer cost amortized over dice).
    pub unit_cost: f64,
    /// Probability the die is good.
    #[serde(rename = "yield")]
    pub yield_fraction: f64,
    /// Expected cost per good die: `unit_cost / yield`.
    pub yielded_cost: f64,
}

impl DieCostResult {
    /// A free, always-good unit: used for parts whose manufacture cost is
    /// out of scope (purchased memory stacks) but which still occupy
    /// area and a bond site. A purchase price may stand in as the cost.
    pub fn purchased(area_mm2: f64, unit_price: f64) -> DieCostResult {
        DieCostResult {
            area_mm2,
            unit_cost: unit_price,
            yield_fraction: 1.0,
            yielded_cost: unit_price,
        }
    }
}

/// Resolve a die description to silicon area at a node.
///
/// A transistor budget splits into a logic portion converted at the
/// node's full density and an I/O portion converted at the derated
/// density; an explicit area passes through unchanged.
pub fn die_area(spec: &DieSpec, node: &TechNode) -> Result<f64> {
    spec.validate()?;
    let computed = spec
        .transistor_count_billions
        .map(|billions| area_from_transistors(billions, spec.io_fraction, node));
    match (computed, spec.area_mm2) {
        (None, Some(explicit)) => Ok(explicit),
        (Some(derived), None) => Ok(derived),
        (Some(derived), Some(explicit)) => {
            if (derived - explicit).abs() > 0.01 * explicit {
                Err(Error::Validation {
                    record: format!("die `{}`", spec.name),
                    field: "area_mm2".to_string(),
                    reason: format!(
                        "explicit area {explicit} mm\u{b2} disagrees with the \
                         transistor budget ({derived:.4} mm\u{b2} at node `{}`) by more than 1%",
                        node.name
                    ),
                })
            } else {
                Ok(explicit)
            }
        }
        (None, None) => unreachable!("validate() requires a sizing field"),
    }
}

fn area_from_transistors(billions: f64, io_fraction: f64, node: &TechNode) -> f64 {
    // Density is in MTx/mm²; one billion transistors = 1000 MTx.
    let total_mtx = billions * 1000.0;
    let io_mtx = total_mtx * io_fraction;
    let logic_mtx = total_mtx - io_mtx;
    let io_density = node.transistor_density * node.io_density_factor;
    logic_mtx / node.transistor_density + io_mtx / io_density
}

/// Price a die described by a [`DieSpec`] at a node.
pub fn die_cost(spec: &DieSpec, node: &TechNode) -> Result<DieCostResult> {
    let area = die_area(spec, node)?;
    die_cost_for_area(area, node)
}

/// Price a die of known area at a node: wafer cost amortized over the
/// dice count, negative-binomial yield, and the yielded quotient.
pub fn die_cost_for_area(area_mm2: f64, node: &TechNode) -> Result<DieCostResult> {
    let dice = dies_per_round_wafer(area_mm2, node.wafer_diameter)?;
    if dice == 0 {
        return Err(Error::DieTooLarge {
            area_mm2,
            wafer_diameter_mm: node.wafer_diameter,
        });
    }
    let unit_cost = node.wafer_cost / dice as f64;
    let yield_fraction = negbin_yield(area_mm2, &node.yield_params())?;
    Ok(DieCostResult {
        area_mm2,
        unit_cost,
        yield_fraction,
        yielded_cost: unit_cost / yield_fraction,
    })
}
