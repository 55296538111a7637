//! Integration substrate cost and yield: silicon interposers cut from
//! wafers, organic interposers cut from panels, or none at all (MCM,
//! where dies land directly on the package substrate).
//!
//! The structural rule encoded here: an MCM carries exactly zero
//! substrate cost — [`none_interposer`] is all zeros with unit yield —
//! which is the entire difference between the two assembly equations.

use serde::{Deserialize, Serialize};

use crate::diecost::die_cost_for_area;
use crate::error::Error;
use crate::techdb::{PanelSpec, TechNode};
use crate::yieldcore::{negbin_yield, units_per_panel};
use crate::Result;

/// Which integration substrate a system sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterposerKind {
    Silicon,
    Organic,
    None,
}

impl std::fmt::Display for InterposerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InterposerKind::Silicon => "silicon",
            InterposerKind::Organic => "organic",
            InterposerKind::None => "none",
        })
    }
}

/// Priced interposer, ready to drop into an assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterposerCostResult {
    pub kind: InterposerKind,
    pub area_mm2: f64,
    /// Manufacturing cost per interposer.
    pub unit_cost: f64,
    /// Probability the interposer is good.
    #[serde(rename = "yield")]
    pub yield_fraction: f64,
    /// Expected cost per good interposer: `unit_cost / yield`.
    pub yielded_cost: f64,
}

/// The MCM case: no substrate between dies and package, so no cost term
/// and nothing that can fail.
pub fn none_interposer() -> InterposerCostResult {
    InterposerCostResult {
        kind: InterposerKind::None,
        area_mm2: 0.0,
        unit_cost: 0.0,
        yield_fraction: 1.0,
        yielded_cost: 0.0,
    }
}

/// Price an organic interposer cut from a production panel: the panel
/// cost is amortized over `floor(panel area / unit area)` units, and the
/// unit yield follows the panel's defect model.
pub fn organic_interposer_cost(area_mm2: f64, panel: &PanelSpec) -> Result<InterposerCostResult> {
    if !(area_mm2 > 0.0) {
        return Err(Error::Domain {
            operation: "organic_interposer_cost",
            reason: format!("interposer area must be > 0, got {area_mm2}"),
        });
    }
    if area_mm2 > panel.area_mm2() {
        return Err(Error::ExceedsPanel {
            area_mm2,
            panel_area_mm2: panel.area_mm2(),
        });
    }
    let units = units_per_panel(area_mm2, panel)?;
    let unit_cost = panel.panel_cost / units as f64;
    let yield_fraction = negbin_yield(area_mm2, &panel.yield_params())?;
    Ok(InterposerCostResult {
        kind: InterposerKind::Organic,
        area_mm2,
        unit_cost,
        yield_fraction,
        yielded_cost: unit_cost / yield_fraction,
    })
}

/// Price a silicon interposer: same wafer economics as a die, at the
/// (typically coarse, passive) interposer node.
pub fn silicon_interposer_cost(area_mm2: f64, node: &TechNode) -> Result<InterposerCostResult> {
    let die = die_cost_for_area(area_mm2, node)?;
    Ok(InterposerCostResult {
        kind: InterposerKind::Silicon,
        area_mm2,
        unit_cost: die.unit_cost,
        yield_fraction: die.yield_fraction,
        yielded_cost: die.yielded_cost,
    })
}

/// Interposer area as the sum of placed die areas plus a fixed overhead
/// fraction for spacing, keep-out, and routing margin.
pub fn interposer_area_with_overhead(die_areas_mm2: &[f64], overhead_fraction: f64) -> Result<f64> {
    if die_areas_mm2.is_empty() {
        return Err(Error::Domain {
            operation: "interposer_area_with_overhead",
            reason: "die list must not be empty".to_string(),
        });
    }
    if !(overhead_fraction >= 0.0) {
        return Err(Error::Domain {
            operation: "interposer_area_with_overhead",
            reason: format!("overhead fraction must be >= 0, got {overhead_fraction}"),
        });
    }
    let mut total = 0.0;
    for (i, &a) in die_areas_mm2.iter().enumerate() {
        if !(a > 0.0) {
            return Err(Error::Domain {
                operation: "interposer_area_with_overhead",
                reason: format!("die area [{i}] must be > 0, got {a}"),
            });
        }
        total += a;
    }
    Ok(total * (1.0 + overhead_fraction))
}

/// Interposer area from a spacing-based floorplan proxy: each die is
/// modeled as a square padded by the spacing on both axes, i.e.
/// `Σ (√Aᵢ + s)²`. Not a floorplanner — a deterministic proxy that is
/// permutation-invariant and never below the summed die area.
pub fn interposer_area_from_floorplan(die_areas_mm2: &[f64], spacing_mm: f64) -> Result<f64> {
    if !(spacing_mm >= 0.0) {
        return Err(Error::Domain {
            operation: "interposer_area_from_floorplan",
            reason: format!("spacing must be >= 0, got {spacing_mm}"),
        });
    }
    // Validates the list; the overhead fraction is recomputed below.
    let summed = interposer_area_with_overhead(die_areas_mm2, 0.0)?;
    let padded: f64 = die_areas_mm2
        .iter()
        .map(|&a| {
            let side = a.sqrt() + spacing_mm;
            side * side
        })
        .sum();
    debug_assert!(padded >= summed);
    Ok(padded)
}

/// Informational estimate of interposer routing layers:
/// `ceil(signals / (shoreline × signals per layer per mm))`. Reported as
/// metadata; it only affects cost if the dataset prices substrates per
/// layer count and the caller selects a record with it.
pub fn wiring_layers_estimate(
    inter_die_signals: u64,
    shoreline_mm: f64,
    signals_per_layer_per_mm: f64,
) -> u32 {
    if inter_die_signals == 0 || !(shoreline_mm > 0.0) || !(signals_per_layer_per_mm > 0.0) {
        return 0;
    }
    let per_layer = shoreline_mm * signals_per_layer_per_mm;
    (inter_die_signals as f64 / per_layer).ceil() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::techdb::{TechDatabase, TechNode};
    use proptest::prelude::*;

    fn panel(cost: f64, width: f64, height: f64, d0: f64) -> PanelSpec {
        PanelSpec {
            name: "test-panel".to_string(),
            panel_cost: cost,
            panel_width: width,
            panel_height: height,
            panel_base_yield: 1.0,
            defect_density: d0,
            clustering_alpha: 2.0,
            layers: None,
            provenance: None,
        }
    }

    fn passive_node(wafer_cost: f64, d0: f64) -> TechNode {
        TechNode {
            name: "passive".to_string(),
            wafer_cost,
            wafer_diameter: 300.0,
            defect_density: d0,
            clustering_alpha: 3.0,
            transistor_density: 1.0,
            wafer_base_yield: 1.0,
            io_density_factor: 1.0,
            provenance: None,
        }
    }

    #[test]
    fn organic_amortizes_panel_over_units() {
        // 500×500 panel at cost 1000, 2500 mm² units → 100 per panel,
        // unit cost 10; perfect yield with D0 = 0.
        let p = panel(1000.0, 500.0, 500.0, 0.0);
        let r = organic_interposer_cost(2500.0, &p).unwrap();
        assert!((r.unit_cost - 10.0).abs() < 1e-12);
        assert_eq!(r.yield_fraction, 1.0);
        assert_eq!(r.yielded_cost, r.unit_cost);
    }

    #[test]
    fn panel_sized_unit_costs_the_whole_panel() {
        let p = panel(1000.0, 500.0, 500.0, 0.0);
        let r = organic_interposer_cost(p.area_mm2(), &p).unwrap();
        assert_eq!(r.unit_cost, 1000.0);
    }

    #[test]
    fn unit_larger_than_panel_is_rejected() {
        let p = panel(1000.0, 500.0, 500.0, 0.0);
        match organic_interposer_cost(250_001.0, &p).unwrap_err() {
            Error::ExceedsPanel { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn silicon_matches_die_economics() {
        // 100 mm² on a 300 mm wafer → 640 units; 2000/640 = 3.125.
        let n = passive_node(2000.0, 0.0);
        let r = silicon_interposer_cost(100.0, &n).unwrap();
        assert!((r.yielded_cost - 3.125).abs() < 1e-12);
    }

    #[test]
    fn silicon_doubling_area_more_than_doubles_yielded_cost() {
        let n = passive_node(2000.0, 0.05);
        for area in [50.0, 100.0, 200.0, 400.0] {
            let small = silicon_interposer_cost(area, &n).unwrap();
            let large = silicon_interposer_cost(2.0 * area, &n).unwrap();
            assert!(large.yielded_cost > 2.0 * small.yielded_cost);
        }
    }

    #[test]
    fn mcm_contributes_exactly_zero() {
        let r = none_interposer();
        assert_eq!(r.unit_cost, 0.0);
        assert_eq!(r.yielded_cost, 0.0);
        assert_eq!(r.yield_fraction, 1.0);
        assert_eq!(r.kind, InterposerKind::None);
    }

    #[test]
    fn organic_beats_silicon_on_default_dataset() {
        // Bundled dataset ordering: at equal area, an organic interposer
        // is cheaper per good unit than a silicon one.
        let db = TechDatabase::bundled();
        let p = db.panel(&db.defaults().organic_panel).unwrap();
        let n = db.node(&db.defaults().silicon_interposer_node).unwrap();
        for area in [100.0, 200.0, 400.0, 800.0] {
            let org = organic_interposer_cost(area, p).unwrap();
            let sil = silicon_interposer_cost(area, n).unwrap();
            assert!(
                org.yielded_cost < sil.yielded_cost,
                "area {area}: organic {} !< silicon {}",
                org.yielded_cost,
                sil.yielded_cost
            );
        }
    }

    #[test]
    fn floorplan_overhead_oracle() {
        // Two 100 mm² dies with 10% overhead → 220 mm².
        let area = interposer_area_with_overhead(&[100.0, 100.0], 0.10).unwrap();
        assert!((area - 220.0).abs() < 1e-12);
    }

    #[test]
    fn single_die_zero_spacing_is_the_die_area() {
        let area = interposer_area_from_floorplan(&[144.0], 0.0).unwrap();
        assert!((area - 144.0).abs() < 1e-12);
    }

    #[test]
    fn floorplan_rejects_empty_and_nonpositive() {
        assert!(interposer_area_with_overhead(&[], 0.1).is_err());
        assert!(interposer_area_with_overhead(&[100.0, -1.0], 0.1).is_err());
        assert!(interposer_area_from_floorplan(&[100.0], -0.5).is_err());
    }

    #[test]
    fn wiring_layers_oracle() {
        // 2000 signals over a 20 mm shoreline at 50 signals/layer/mm:
        // one layer routes 1000, so two layers.
        assert_eq!(wiring_layers_estimate(2000, 20.0, 50.0), 2);
        assert_eq!(wiring_layers_estimate(0, 20.0, 50.0), 0);
    }

    proptest! {
        #[test]
        fn organic_cost_non_decreasing_in_area(
            a in 1.0f64..1000.0,
            delta in 0.1f64..500.0,
        ) {
            let p = panel(1500.0, 510.0, 515.0, 0.02);
            let small = organic_interposer_cost(a, &p).unwrap();
            let large = organic_interposer_cost(a + delta, &p).unwrap();
            prop_assert!(large.yielded_cost >= small.yielded_cost);
        }

        #[test]
        fn floorplan_is_permutation_invariant(
            mut areas in proptest::collection::vec(1.0f64..400.0, 1..6),
            spacing in 0.0f64..2.0,
        ) {
            let forward = interposer_area_from_floorplan(&areas, spacing).unwrap();
            areas.reverse();
            let backward = interposer_area_from_floorplan(&areas, spacing).unwrap();
            prop_assert!((forward - backward).abs() <= 1e-9 * forward);
            prop_assert!(forward >= areas.iter().sum::<f64>());
        }
    }
}
