//! Assembly composition: yielded dies, the interposer, and per-die
//! bonding roll up into the unpackaged-system cost.
//!
//! The shape of the total is
//!
//! ```text
//! ( interposer_term + Σᵢ (die_yielded_cost(i) + bond_cost(i)) ) / Π Y_bond
//! ```
//!
//! with the bond-yield product running over dies 2..n — the first die's
//! attach is charged but its yield does not divide the total. That index
//! range is deliberate and preserved as the published form of the model;
//! [`BondYieldPolicy::AllDies`] switches to the 1..n variant for anyone
//! who wants every attach to count.

use serde::{Deserialize, Serialize};

use crate::diecost::DieCostResult;
use crate::error::Error;
use crate::interposer::{InterposerCostResult, InterposerKind};
use crate::techdb::BumpTech;
use crate::Result;

/// Which die attaches contribute to the compounding assembly yield.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondYieldPolicy {
    /// The published form: the product runs over dies 2..n, so a
    /// single-die assembly divides by nothing.
    #[default]
    SkipFirstDie,
    /// Every attach counts: the product runs over dies 1..n.
    AllDies,
}

/// One bonded unit: a priced die (or purchased part) plus the attach
/// technology that lands it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssemblyItem {
    /// Label used in breakdowns and error messages.
    pub label: String,
    pub die: DieCostResult,
    pub bond: BumpTech,
}

/// Everything the assembly step needs, in bonding order. The order is
/// load-bearing: the first item's attach yield is skipped under the
/// default policy.
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblySpec {
    pub items: Vec<AssemblyItem>,
    pub interposer: InterposerCostResult,
    pub policy: BondYieldPolicy,
}

/// Assembly cost with the terms that built it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssemblyCostResult {
    /// Unpackaged-system cost.
    pub total: f64,
    /// The interposer's yielded cost (zero for MCM).
    pub interposer_term: f64,
    /// Per item: yielded die cost + bond cost, in bonding order.
    pub per_die_terms: Vec<f64>,
    /// Σ bond costs alone, for breakdowns.
    pub bonding_cost_total: f64,
    /// Π of the counted attach yields; total = numerator / this.
    pub bond_yield_divisor: f64,
}

/// Assemble a 2.5D system: dies bonded onto a silicon or organic
/// interposer.
pub fn assemble_interposer_system(spec: &AssemblySpec) -> Result<AssemblyCostResult> {
    if spec.interposer.kind == InterposerKind::None {
        return Err(Error::Domain {
            operation: "assemble_interposer_system",
            reason: "interposer kind is `none`; use the MCM assembly".to_string(),
        });
    }
    assemble(spec, spec.interposer.yielded_cost)
}

/// Assemble an MCM: dies bonded directly onto the package substrate, no
/// interposer term at all.
pub fn assemble_mcm_system(spec: &AssemblySpec) -> Result<AssemblyCostResult> {
    if spec.interposer.kind != InterposerKind::None {
        return Err(Error::Domain {
            operation: "assemble_mcm_system",
            reason: format!(
                "interposer kind is `{}`; use the interposer assembly",
                spec.interposer.kind
            ),
        });
    }
    assemble(spec, 0.0)
}

fn assemble(spec: &AssemblySpec, interposer_term: f64) -> Result<AssemblyCostResult> {
    if spec.items.is_empty() {
        return Err(Error::Domain {
            operation: "assemble",
            reason: "an assembly needs at least one die".to_string(),
        });
    }
    for item in &spec.items {
        if !(item.bond.bond_yield > 0.0 && item.bond.bond_yield <= 1.0) {
            return Err(Error::Validation {
                record: format!("assembly item `{}`", item.label),
                field: "bond_yield".to_string(),
                reason: format!("must be in (0, 1], got {}", item.bond.bond_yield),
            });
        }
        if !(item.bond.bond_cost_per_die >= 0.0) {
            return Err(Error::Validation {
                record: format!("assembly item `{}`", item.label),
                field: "bond_cost_per_die".to_string(),
                reason: format!("must be >= 0, got {}", item.bond.bond_cost_per_die),
            });
        }
    }

    let per_die_terms: Vec<f64> = spec
        .items
        .iter()
        .map(|item| item.die.yielded_cost + item.bond.bond_cost_per_die)
        .collect();
    let bonding_cost_total: f64 = spec.items.iter().map(|i| i.bond.bond_cost_per_die).sum();
    let skip = match spec.policy {
        BondYieldPolicy::SkipFirstDie => 1,
        BondYieldPolicy::AllDies => 0,
    };
    let bond_yield_divisor: f64 = spec
        .items
        .iter()
        .skip(skip)
        .map(|i| i.bond.bond_yield)
        .product();

    let numerator = interposer_term + per_die_terms.iter().sum::<f64>();
    Ok(AssemblyCostResult {
        total: numerator / bond_yield_divisor,
        interposer_term,
        per_die_terms,
        bonding_cost_total,
        bond_yield_divisor,
    })
}
