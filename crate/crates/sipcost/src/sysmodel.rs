//! End-to-end system evaluation: a [`SystemSpec`] goes in, a fully
//! decomposed [`CostReport`] comes out.
//!
//! This module owns the glue the submodels don't: resolving dataset
//! references, the bump-grid interface-area model that decides whether
//! an integration style is feasible at all, the floorplan proxy that
//! sizes the interposer (HBM footprints included), and the relative
//! cost breakdown normalized to the core dies' manufacture cost.

use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_interposer_system, assemble_mcm_system, AssemblyCostResult, AssemblyItem,
    AssemblySpec, BondYieldPolicy,
};
use crate::diecost::{die_cost, DieCostResult, DieSpec};
use crate::error::{Error, ResultExt};
use crate::interposer::{
    interposer_area_from_floorplan, interposer_area_with_overhead, none_interposer,
    organic_interposer_cost, silicon_interposer_cost, wiring_layers_estimate,
    InterposerCostResult,
};
use crate::package::{
    fit_package_regression, package_cost, substrate_requirements, PackageRegression,
};
use crate::techdb::{BumpTech, TechDatabase};
use crate::Result;

/// How the dies are integrated into one package.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntegrationKind {
    /// Dies on a passive silicon interposer, finest bump pitch.
    #[serde(rename = "silicon-2.5d")]
    Silicon25D,
    /// Dies on a panel-built organic interposer, medium pitch.
    #[serde(rename = "organic-2.5d")]
    Organic25D,
    /// Dies directly on the package substrate, coarsest pitch, no
    /// interposer at all.
    #[serde(rename = "mcm")]
    Mcm,
}

impl IntegrationKind {
    pub const ALL: [IntegrationKind; 3] = [
        IntegrationKind::Silicon25D,
        IntegrationKind::Organic25D,
        IntegrationKind::Mcm,
    ];
}

impl std::fmt::Display for IntegrationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IntegrationKind::Silicon25D => "silicon-2.5d",
            IntegrationKind::Organic25D => "organic-2.5d",
            IntegrationKind::Mcm => "mcm",
        })
    }
}

/// One die entry in a system: the die description plus how many
/// identical instances are placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDie {
    #[serde(flatten)]
    pub spec: DieSpec,
    /// Number of identical instances, default 1.
    #[serde(default = "default_count")]
    pub count: u32,
}

fn default_count() -> u32 {
    1
}

/// HBM attachment: purchased stacks that occupy interposer area and a
/// bond site each, with a wide parallel interface that needs fine bump
/// pitch. Stack manufacture cost is out of scope; `unit_price` (default
/// 0) lets a purchase price flow through the assembly sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbmConfig {
    pub stacks: u32,
    /// Per-stack footprint in mm².
    pub footprint_mm2: f64,
    /// Interface width in bits, default 1024.
    #[serde(default = "default_signal_bits")]
    pub signal_bits: u32,
    /// Purchase price per stack, default 0 (excluded from scope).
    #[serde(default)]
    pub unit_price: f64,
}

fn default_signal_bits() -> u32 {
    1024
}

/// A complete system description. Optional fields default from the
/// dataset's `[defaults]` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub integration: IntegrationKind,
    #[serde(rename = "die")]
    pub dies: Vec<SystemDie>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbm: Option<HbmConfig>,
    /// Package class name; dataset default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package_class: Option<String>,
    /// Bump technology name; the dataset maps one per integration kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<String>,
    /// Organic panel name; dataset default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panel: Option<String>,
    /// Silicon interposer node name; dataset default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interposer_node: Option<String>,
    /// Explicit interposer area; must hold every placed die. When
    /// absent the floorplan proxy sizes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interposer_area_mm2: Option<f64>,
    /// Floorplan overhead fraction override (area = Σ dies × (1 + f)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interposer_overhead: Option<f64>,
    /// Alternative overhead source: per-die spacing padding in mm.
    /// Mutually exclusive with `interposer_overhead`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub die_spacing_mm: Option<f64>,
    /// External signal count per die instance; dataset default when
    /// absent. HBM interfaces stay inside the package and add none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals_per_die: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package_fanout: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_ground_ratio: Option<f64>,
}

impl SystemSpec {
    /// Minimal programmatic constructor; optional fields all default.
    pub fn new(
        name: impl Into<String>,
        integration: IntegrationKind,
        dies: Vec<SystemDie>,
    ) -> SystemSpec {
        SystemSpec {
            name: name.into(),
            integration,
            dies,
            hbm: None,
            package_class: None,
            bump: None,
            panel: None,
            interposer_node: None,
            interposer_area_mm2: None,
            interposer_overhead: None,
            die_spacing_mm: None,
            signals_per_die: None,
            package_fanout: None,
            power_ground_ratio: None,
        }
    }

    /// Parse a system spec from TOML text. `origin` names the source in
    /// error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<SystemSpec> {
        let spec: SystemSpec = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let record = format!("system `{}`", self.name);
        if self.dies.is_empty() {
            return Err(Error::Validation {
                record,
                field: "die".to_string(),
                reason: "a system needs at least one die".to_string(),
            });
        }
        for (i, d) in self.dies.iter().enumerate() {
            if d.count == 0 {
                return Err(Error::Validation {
                    record: format!("{record} die[{i}] ({})", d.spec.name),
                    field: "count".to_string(),
                    reason: "must be >= 1".to_string(),
                });
            }
        }
        if let Some(h) = &self.hbm {
            if h.stacks > 0 {
                if !(h.footprint_mm2 > 0.0) {
                    return Err(Error::Validation {
                        record: format!("{record} hbm"),
                        field: "footprint_mm2".to_string(),
                        reason: format!("must be > 0, got {}", h.footprint_mm2),
                    });
                }
                if h.signal_bits == 0 {
                    return Err(Error::Validation {
                        record: format!("{record} hbm"),
                        field: "signal_bits".to_string(),
                        reason: "must be > 0".to_string(),
                    });
                }
                if !(h.unit_price >= 0.0) {
                    return Err(Error::Validation {
                        record: format!("{record} hbm"),
                        field: "unit_price".to_string(),
                        reason: format!("must be >= 0, got {}", h.unit_price),
                    });
                }
            }
        }
        if self.interposer_overhead.is_some() && self.die_spacing_mm.is_some() {
            return Err(Error::Validation {
                record,
                field: "interposer_overhead/die_spacing_mm".to_string(),
                reason: "give one overhead source, not both".to_string(),
            });
        }
        if self.integration == IntegrationKind::Mcm && self.interposer_area_mm2.is_some() {
            return Err(Error::Validation {
                record,
                field: "interposer_area_mm2".to_string(),
                reason: "an MCM has no interposer; remove the explicit area".to_string(),
            });
        }
        Ok(())
    }
}

/// Evaluation options orthogonal to the system description.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EvalOptions {
    pub bond_yield_policy: BondYieldPolicy,
}

/// Area of a parallel signal interface landed on a square bump grid:
/// `(ceil(√bits) × pitch)²`, pitch in µm, result in mm².
pub fn interface_area_mm2(signal_bits: u32, pitch_um: f64) -> Result<f64> {
    if signal_bits == 0 {
        return Err(Error::Domain {
            operation: "interface_area_mm2",
            reason: "signal count must be > 0".to_string(),
        });
    }
    if !(pitch_um > 0.0) {
        return Err(Error::Domain {
            operation: "interface_area_mm2",
            reason: format!("pitch must be > 0, got {pitch_um}"),
        });
    }
    let side_bumps = f64::from(signal_bits).sqrt().ceil();
    let side_mm = side_bumps * (pitch_um / 1000.0);
    Ok(side_mm * side_mm)
}

/// One interface checked against the bump pitch it must land on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceCheck {
    pub interface: String,
    pub pitch_um: f64,
    pub required_mm2: f64,
    pub available_mm2: f64,
    pub feasible: bool,
}

/// Feasibility of an integration choice: every wide interface must fit
/// within its die's footprint at the integration's bump pitch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub checks: Vec<InterfaceCheck>,
}

/// Check whether the system's wide interfaces physically land at the
/// integration's bump pitch. A verdict, not an error: infeasible
/// configurations are data (a case study reports them as exclusions).
pub fn check_integration_feasibility(
    sys: &SystemSpec,
    db: &TechDatabase,
) -> Result<FeasibilityVerdict> {
    let bump = resolve_bump(sys, db)?;
    feasibility_against(sys, bump)
}

fn feasibility_against(sys: &SystemSpec, bump: &BumpTech) -> Result<FeasibilityVerdict> {
    let mut checks = Vec::new();
    if let Some(h) = &sys.hbm {
        if h.stacks > 0 {
            let required_mm2 = interface_area_mm2(h.signal_bits, bump.pitch)?;
            checks.push(InterfaceCheck {
                interface: format!("hbm {}-bit interface", h.signal_bits),
                pitch_um: bump.pitch,
                required_mm2,
                available_mm2: h.footprint_mm2,
                feasible: required_mm2 <= h.footprint_mm2,
            });
        }
    }
    Ok(FeasibilityVerdict {
        feasible: checks.iter().all(|c| c.feasible),
        checks,
    })
}

fn resolve_bump<'d>(sys: &SystemSpec, db: &'d TechDatabase) -> Result<&'d BumpTech> {
    let name = match &sys.bump {
        Some(n) => n.clone(),
        None => match sys.integration {
            IntegrationKind::Silicon25D => db.defaults().bump_silicon_2_5d.clone(),
            IntegrationKind::Organic25D => db.defaults().bump_organic_2_5d.clone(),
            IntegrationKind::Mcm => db.defaults().bump_mcm.clone(),
        },
    };
    db.bump(&name).in_component("bump")
}

/// One die entry of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DieLine {
    pub name: String,
    pub node: String,
    pub count: u32,
    pub area_mm2: f64,
    pub unit_cost: f64,
    #[serde(rename = "yield")]
    pub yield_fraction: f64,
    pub yielded_cost: f64,
}

/// Package section of the report: the fitted plane and its evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackageLine {
    pub class: String,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub r_squared: f64,
    pub substrate_area_mm2: f64,
    pub pin_count: u64,
    pub cost: f64,
    pub extrapolated: bool,
}

/// Cost shares normalized to the core dies' manufacture cost (the 100%
/// base). `integration_overhead` is the sum of the interposer, bonding,
/// and bond-yield-loss shares — the price of choosing chiplets over a
/// lone die, before the package.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeBreakdown {
    /// Σ yielded manufacture cost of the core dies — the base unit.
    pub core_die_base: f64,
    pub interposer: f64,
    pub bonding: f64,
    pub bond_yield_loss: f64,
    pub hbm_price: f64,
    pub package: f64,
    pub integration_overhead: f64,
}

/// Full evaluation result, serializable to JSON; `render_text` gives the
/// human-readable table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub system: String,
    pub integration: IntegrationKind,
    pub dataset_version: String,
    pub bond_yield_policy: BondYieldPolicy,
    pub dies: Vec<DieLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbm: Option<HbmConfig>,
    pub bump: BumpTech,
    pub interposer: InterposerCostResult,
    /// Informational routing-layer estimate; 0 for MCM.
    pub wiring_layers_estimate: u32,
    pub assembly: AssemblyCostResult,
    pub package: PackageLine,
    pub grand_total: f64,
    pub breakdown: RelativeBreakdown,
}

/// Evaluate a system against a dataset with default options.
pub fn evaluate_system(sys: &SystemSpec, db: &TechDatabase) -> Result<CostReport> {
    evaluate_system_with(sys, db, EvalOptions::default())
}

/// Evaluate a system against a dataset.
pub fn evaluate_system_with(
    sys: &SystemSpec,
    db: &TechDatabase,
    opts: EvalOptions,
) -> Result<CostReport> {
    sys.validate()?;
    let defaults = db.defaults();
    let bump = resolve_bump(sys, db)?;

    let verdict = feasibility_against(sys, bump)?;
    if let Some(bad) = verdict.checks.iter().find(|c| !c.feasible) {
        return Err(Error::Infeasible {
            interface: bad.interface.clone(),
            pitch_um: bad.pitch_um,
            required_mm2: bad.required_mm2,
            available_mm2: bad.available_mm2,
        });
    }

    // Price each die entry and expand instances into assembly items.
    let mut die_lines = Vec::with_capacity(sys.dies.len());
    let mut items = Vec::new();
    let mut placed_areas = Vec::new();
    let mut core_die_base = 0.0;
    for (i, entry) in sys.dies.iter().enumerate() {
        let component = format!("die[{i}] ({})", entry.spec.name);
        let node = db.node(&entry.spec.node).in_component(component.clone())?;
        let cost = die_cost(&entry.spec, node).in_component(component)?;
        die_lines.push(DieLine {
            name: entry.spec.name.clone(),
            node: entry.spec.node.clone(),
            count: entry.count,
            area_mm2: cost.area_mm2,
            unit_cost: cost.unit_cost,
            yield_fraction: cost.yield_fraction,
            yielded_cost: cost.yielded_cost,
        });
        for k in 0..entry.count {
            placed_areas.push(cost.area_mm2);
            items.push(AssemblyItem {
                label: format!("{}[{k}]", entry.spec.name),
                die: cost,
                bond: bump.clone(),
            });
            core_die_base += cost.yielded_cost;
        }
    }

    let mut hbm_price_total = 0.0;
    if let Some(h) = &sys.hbm {
        for k in 0..h.stacks {
            placed_areas.push(h.footprint_mm2);
            items.push(AssemblyItem {
                label: format!("hbm[{k}]"),
                die: DieCostResult::purchased(h.footprint_mm2, h.unit_price),
                bond: bump.clone(),
            });
            hbm_price_total += h.unit_price;
        }
    }

    // Footprint: explicit interposer area, or the floorplan proxy.
    let summed_area: f64 = placed_areas.iter().sum();
    let footprint = match sys.interposer_area_mm2 {
        Some(a) => {
            if a < summed_area {
                return Err(Error::Validation {
                    record: format!("system `{}`", sys.name),
                    field: "interposer_area_mm2".to_string(),
                    reason: format!(
                        "explicit area {a} mm\u{b2} cannot hold the {summed_area} mm\u{b2} of placed dies"
                    ),
                });
            }
            a
        }
        None => match sys.die_spacing_mm {
            Some(s) => interposer_area_from_floorplan(&placed_areas, s)?,
            None => {
                let overhead = sys
                    .interposer_overhead
                    .unwrap_or(defaults.interposer_area_overhead);
                interposer_area_with_overhead(&placed_areas, overhead)?
            }
        },
    };

    let interposer = match sys.integration {
        IntegrationKind::Mcm => none_interposer(),
        IntegrationKind::Silicon25D => {
            let node_name = sys
                .interposer_node
                .clone()
                .unwrap_or_else(|| defaults.silicon_interposer_node.clone());
            let node = db.node(&node_name).in_component("interposer")?;
            silicon_interposer_cost(footprint, node).in_component("interposer")?
        }
        IntegrationKind::Organic25D => {
            let panel_name = sys
                .panel
                .clone()
                .unwrap_or_else(|| defaults.organic_panel.clone());
            let panel = db.panel(&panel_name).in_component("interposer")?;
            organic_interposer_cost(footprint, panel).in_component("interposer")?
        }
    };

    let assembly_spec = AssemblySpec {
        items,
        interposer,
        policy: opts.bond_yield_policy,
    };
    let assembly = match sys.integration {
        IntegrationKind::Mcm => assemble_mcm_system(&assembly_spec),
        _ => assemble_interposer_system(&assembly_spec),
    }
    .in_component("assembly")?;

    // Signals: per-die external signals reach package pins; HBM
    // interfaces stay inside. The wiring estimate counts both, since
    // both cross the interposer.
    let signals_per_die = sys.signals_per_die.unwrap_or(defaults.signals_per_die);
    let die_instances: u64 = sys.dies.iter().map(|d| u64::from(d.count)).sum();
    let signal_pins = die_instances * signals_per_die;
    let hbm_signals: u64 = sys
        .hbm
        .as_ref()
        .map(|h| u64::from(h.stacks) * u64::from(h.signal_bits))
        .unwrap_or(0);
    let wiring_layers = match sys.integration {
        IntegrationKind::Mcm => 0,
        _ => wiring_layers_estimate(
            signal_pins + hbm_signals,
            footprint.sqrt(),
            defaults.signals_per_layer_per_mm,
        ),
    };

    let demand = substrate_requirements(
        footprint,
        sys.package_fanout.unwrap_or(defaults.package_fanout),
        signal_pins,
        sys.power_ground_ratio.unwrap_or(defaults.power_ground_ratio),
    )
    .in_component("package")?;
    let class_name = sys
        .package_class
        .clone()
        .unwrap_or_else(|| defaults.package_class.clone());
    let class = db.package_class(&class_name).in_component("package")?;
    let regression: PackageRegression = fit_package_regression(class).in_component("package")?;
    let pkg = package_cost(&regression, demand.substrate_area_mm2, demand.pin_count)
        .in_component("package")?;

    let grand_total = assembly.total + pkg.cost;

    // Breakdown relative to the core-die base. The yield loss is what
    // compounding attach yields add on top of the summed parts.
    let numerator =
        assembly.interposer_term + assembly.per_die_terms.iter().sum::<f64>();
    let bond_yield_loss = assembly.total - numerator;
    let base = core_die_base;
    let breakdown = RelativeBreakdown {
        core_die_base: base,
        interposer: assembly.interposer_term / base,
        bonding: assembly.bonding_cost_total / base,
        bond_yield_loss: bond_yield_loss / base,
        hbm_price: hbm_price_total / base,
        package: pkg.cost / base,
        integration_overhead: (assembly.interposer_term
            + assembly.bonding_cost_total
            + bond_yield_loss)
            / base,
    };

    Ok(CostReport {
        system: sys.name.clone(),
        integration: sys.integration,
        dataset_version: db.version().to_string(),
        bond_yield_policy: opts.bond_yield_policy,
        dies: die_lines,
        hbm: sys.hbm.clone(),
        bump: bump.clone(),
        interposer,
        wiring_layers_estimate: wiring_layers,
        assembly,
        package: PackageLine {
            class: class_name,
            mu0: regression.mu0,
            mu1: regression.mu1,
            mu2: regression.mu2,
            r_squared: regression.r_squared,
            substrate_area_mm2: demand.substrate_area_mm2,
            pin_count: demand.pin_count,
            cost: pkg.cost,
            extrapolated: pkg.extrapolated,
        },
        grand_total,
        breakdown,
    })
}

impl CostReport {
    /// Machine-readable JSON, pretty-printed, trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Long-format rows (`section, item, metric, value`) for CSV output.
    pub fn csv_rows(&self) -> Vec<[String; 4]> {
        let f = |v: f64| v.to_string();
        let mut rows = Vec::new();
        let mut push = |section: &str, item: &str, metric: &str, value: String| {
            rows.push([
                section.to_string(),
                item.to_string(),
                metric.to_string(),
                value,
            ]);
        };
        push("system", "", "name", self.system.clone());
        push("system", "", "integration", self.integration.to_string());
        push("system", "", "dataset_version", self.dataset_version.clone());
        for d in &self.dies {
            push("die", &d.name, "node", d.node.clone());
            push("die", &d.name, "count", d.count.to_string());
            push("die", &d.name, "area_mm2", f(d.area_mm2));
            push("die", &d.name, "unit_cost", f(d.unit_cost));
            push("die", &d.name, "yield", f(d.yield_fraction));
            push("die", &d.name, "yielded_cost", f(d.yielded_cost));
        }
        if let Some(h) = &self.hbm {
            push("hbm", "", "stacks", h.stacks.to_string());
            push("hbm", "", "footprint_mm2", f(h.footprint_mm2));
            push("hbm", "", "signal_bits", h.signal_bits.to_string());
            push("hbm", "", "unit_price", f(h.unit_price));
        }
        let ik = self.interposer.kind.to_string();
        push("interposer", &ik, "area_mm2", f(self.interposer.area_mm2));
        push("interposer", &ik, "unit_cost", f(self.interposer.unit_cost));
        push("interposer", &ik, "yield", f(self.interposer.yield_fraction));
        push("interposer", &ik, "yielded_cost", f(self.interposer.yielded_cost));
        push(
            "interposer",
            &ik,
            "wiring_layers_estimate",
            self.wiring_layers_estimate.to_string(),
        );
        push("assembly", "", "bonding_cost_total", f(self.assembly.bonding_cost_total));
        push("assembly", "", "bond_yield_divisor", f(self.assembly.bond_yield_divisor));
        push("assembly", "", "total", f(self.assembly.total));
        push("package", &self.package.class, "mu0", f(self.package.mu0));
        push("package", &self.package.class, "mu1", f(self.package.mu1));
        push("package", &self.package.class, "mu2", f(self.package.mu2));
        push("package", &self.package.class, "r_squared", f(self.package.r_squared));
        push(
            "package",
            &self.package.class,
            "substrate_area_mm2",
            f(self.package.substrate_area_mm2),
        );
        push("package", &self.package.class, "pin_count", self.package.pin_count.to_string());
        push("package", &self.package.class, "cost", f(self.package.cost));
        push(
            "package",
            &self.package.class,
            "extrapolated",
            self.package.extrapolated.to_string(),
        );
        push("total", "", "grand_total", f(self.grand_total));
        let b = &self.breakdown;
        push("breakdown", "", "core_die_base", f(b.core_die_base));
        push("breakdown", "", "interposer_frac", f(b.interposer));
        push("breakdown", "", "bonding_frac", f(b.bonding));
        push("breakdown", "", "bond_yield_loss_frac", f(b.bond_yield_loss));
        push("breakdown", "", "hbm_price_frac", f(b.hbm_price));
        push("breakdown", "", "package_frac", f(b.package));
        push("breakdown", "", "integration_overhead_frac", f(b.integration_overhead));
        rows
    }

    /// Human-readable aligned table.
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "system: {} ({})", self.system, self.integration);
        let _ = writeln!(out, "dataset: {}", self.dataset_version);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>6} {:>10} {:>10} {:>8} {:>10}",
            "die", "node", "count", "area mm2", "unit", "yield", "yielded"
        );
        for d in &self.dies {
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>6} {:>10.2} {:>10.3} {:>8.4} {:>10.3}",
                d.name, d.node, d.count, d.area_mm2, d.unit_cost, d.yield_fraction, d.yielded_cost
            );
        }
        if let Some(h) = &self.hbm {
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>6} {:>10.2} {:>10.3} {:>8} {:>10.3}",
                "hbm-stack", "-", h.stacks, h.footprint_mm2, h.unit_price, "-", h.unit_price
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "interposer ({}): area {:.2} mm2, unit {:.3}, yield {:.4}, yielded {:.3}",
            self.interposer.kind,
            self.interposer.area_mm2,
            self.interposer.unit_cost,
            self.interposer.yield_fraction,
            self.interposer.yielded_cost,
        );
        let _ = writeln!(
            out,
            "assembly: bonding {:.3}, attach-yield divisor {:.4}, total {:.3}",
            self.assembly.bonding_cost_total, self.assembly.bond_yield_divisor, self.assembly.total
        );
        let _ = writeln!(
            out,
            "package ({}): {:.2} mm2, {} pins, cost {:.3}{}",
            self.package.class,
            self.package.substrate_area_mm2,
            self.package.pin_count,
            self.package.cost,
            if self.package.extrapolated {
                "  [extrapolated beyond fitted samples]"
            } else {
                ""
            }
        );
        let _ = writeln!(out, "grand total: {:.3}", self.grand_total);
        let b = &self.breakdown;
        let pct = |v: f64| format!("{:.1}%", v * 100.0);
        let _ = writeln!(
            out,
            "relative to core dies ({:.3}): interposer {}, bonding {}, bond-yield loss {}, \
             package {}, integration overhead {}",
            b.core_die_base,
            pct(b.interposer),
            pct(b.bonding),
            pct(b.bond_yield_loss),
            pct(b.package),
            pct(b.integration_overhead),
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::techdb::{
        Dataset, DatasetDefaults, DatasetInfo, PackageClass, PackageSample, PanelSpec, TechNode,
    };

    fn single_die_system(integration: IntegrationKind, node: &str, area: f64) -> SystemSpec {
        SystemSpec::new(
            "test",
            integration,
            vec![SystemDie {
                spec: DieSpec::by_area("core", node, area),
                count: 1,
            }],
        )
    }

    fn hbm_system(integration: IntegrationKind, core_area: f64, stacks: u32) -> SystemSpec {
        let mut sys = single_die_system(integration, "7nm", core_area);
        sys.hbm = Some(HbmConfig {
            stacks,
            footprint_mm2: 39.95,
            signal_bits: 1024,
            unit_price: 0.0,
        });
        sys
    }

    /// A dataset where every lossy mechanism is switched off, so the
    /// grand total collapses to the bare die cost.
    fn lossless_dataset() -> TechDatabase {
        let doc = Dataset {
            schema_version: crate::techdb::SCHEMA_VERSION,
            dataset: DatasetInfo {
                version: "lossless-test".to_string(),
                description: None,
            },
            nodes: vec![TechNode {
                name: "ideal".to_string(),
                wafer_cost: 6400.0,
                wafer_diameter: 300.0,
                defect_density: 0.0,
                clustering_alpha: 3.0,
                transistor_density: 50.0,
                wafer_base_yield: 1.0,
                io_density_factor: 1.0,
                provenance: None,
            }],
            panels: vec![PanelSpec {
                name: "ideal-panel".to_string(),
                panel_cost: 1000.0,
                panel_width: 500.0,
                panel_height: 500.0,
                panel_base_yield: 1.0,
                defect_density: 0.0,
                clustering_alpha: 2.0,
                layers: None,
                provenance: None,
            }],
            bumps: vec![BumpTech {
                name: "free-bond".to_string(),
                pitch: 200.0,
                bond_cost_per_die: 0.0,
                bond_yield: 1.0,
                provenance: None,
            }],
            package_classes: vec![PackageClass {
                name: "free-package".to_string(),
                core_layers: 2,
                buildup_layers: 5,
                samples: vec![
                    PackageSample { area: 100.0, pins: 400, cost: 0.0 },
                    PackageSample { area: 200.0, pins: 1200, cost: 0.0 },
                    PackageSample { area: 500.0, pins: 900, cost: 0.0 },
                ],
                provenance: None,
            }],
            defaults: DatasetDefaults {
                silicon_interposer_node: "ideal".to_string(),
                organic_panel: "ideal-panel".to_string(),
                bump_silicon_2_5d: "free-bond".to_string(),
                bump_organic_2_5d: "free-bond".to_string(),
                bump_mcm: "free-bond".to_string(),
                package_class: "free-package".to_string(),
                interposer_area_overhead: 0.0,
                package_fanout: 1.0,
                power_ground_ratio: 1.0,
                signals_per_die: 100,
                signals_per_layer_per_mm: 50.0,
            },
        };
        TechDatabase::from_dataset(doc, "test").unwrap()
    }

    #[test]
    fn interface_area_matches_hbm1_footprint_within_two_percent() {
        // 1024 bits at 197 µm: a 32×32 grid of 0.197 mm pitch,
        // (32 × 0.197)² = 39.74 mm² — within 2% of the 39.95 mm²
        // HBM1-generation stack footprint.
        let a = interface_area_mm2(1024, 197.0).unwrap();
        assert!((a - 39.740416).abs() < 1e-9);
        assert!((a - 39.95).abs() / 39.95 < 0.02);
    }

    #[test]
    fn interface_area_oracles() {
        let a = interface_area_mm2(1024, 45.0).unwrap();
        assert!((a - 2.0736).abs() < 1e-12);
        // A single bump is one pitch square.
        let one = interface_area_mm2(1, 250.0).unwrap();
        assert!((one - 0.0625).abs() < 1e-15);
        assert!(interface_area_mm2(0, 45.0).is_err());
        assert!(interface_area_mm2(1024, 0.0).is_err());
    }

    #[test]
    fn mcm_with_hbm_is_infeasible_on_default_dataset() {
        let db = TechDatabase::bundled();
        let sys = hbm_system(IntegrationKind::Mcm, 200.0, 4);
        let v = check_integration_feasibility(&sys, &db).unwrap();
        assert!(!v.feasible);
        assert_eq!(v.checks.len(), 1);
        assert!(v.checks[0].required_mm2 > v.checks[0].available_mm2);
        // Evaluation refuses it with the violating interface named.
        match evaluate_system(&sys, &db).unwrap_err() {
            Error::Infeasible { interface, .. } => assert!(interface.contains("1024")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn fine_pitch_integrations_carry_hbm() {
        let db = TechDatabase::bundled();
        for kind in [IntegrationKind::Silicon25D, IntegrationKind::Organic25D] {
            let v = check_integration_feasibility(&hbm_system(kind, 200.0, 4), &db).unwrap();
            assert!(v.feasible, "{kind} should carry HBM");
        }
    }

    #[test]
    fn no_hbm_is_always_feasible() {
        let db = TechDatabase::bundled();
        let sys = single_die_system(IntegrationKind::Mcm, "7nm", 200.0);
        let v = check_integration_feasibility(&sys, &db).unwrap();
        assert!(v.feasible);
        assert!(v.checks.is_empty());
    }

    #[test]
    fn lossless_system_collapses_to_die_unit_cost() {
        // Perfect yields, free bonds, zero-cost package: the grand
        // total is exactly the wafer cost over the dice count.
        let db = lossless_dataset();
        let sys = single_die_system(IntegrationKind::Mcm, "ideal", 100.0);
        let report = evaluate_system(&sys, &db).unwrap();
        // 100 mm² on 300 mm dices into 640: 6400/640 = 10.
        assert_eq!(report.grand_total, 10.0);
        assert_eq!(report.breakdown.integration_overhead, 0.0);
    }

    #[test]
    fn report_totals_are_internally_consistent() {
        let db = TechDatabase::bundled();
        let sys = hbm_system(IntegrationKind::Organic25D, 200.0, 4);
        let r = evaluate_system(&sys, &db).unwrap();
        let rebuilt = (r.assembly.interposer_term + r.assembly.per_die_terms.iter().sum::<f64>())
            / r.assembly.bond_yield_divisor
            + r.package.cost;
        assert!((r.grand_total - rebuilt).abs() <= 1e-9 * r.grand_total);
        let b = &r.breakdown;
        let overhead = b.interposer + b.bonding + b.bond_yield_loss;
        assert!((b.integration_overhead - overhead).abs() <= 1e-12);
    }

    #[test]
    fn organic_hbm_overhead_under_half_and_below_silicon() {
        let db = TechDatabase::bundled();
        let organic = evaluate_system(&hbm_system(IntegrationKind::Organic25D, 200.0, 4), &db)
            .unwrap();
        let silicon = evaluate_system(&hbm_system(IntegrationKind::Silicon25D, 200.0, 4), &db)
            .unwrap();
        assert!(
            organic.breakdown.integration_overhead < 0.5,
            "organic overhead = {}",
            organic.breakdown.integration_overhead
        );
        assert!(
            silicon.breakdown.integration_overhead > organic.breakdown.integration_overhead,
            "silicon {} !> organic {}",
            silicon.breakdown.integration_overhead,
            organic.breakdown.integration_overhead
        );
    }

    #[test]
    fn bond_yield_loss_dominates_organic_hbm_overhead() {
        let db = TechDatabase::bundled();
        let r = evaluate_system(&hbm_system(IntegrationKind::Organic25D, 200.0, 4), &db).unwrap();
        let b = &r.breakdown;
        assert!(
            b.bond_yield_loss > 0.5 * b.integration_overhead,
            "loss {} vs overhead {}",
            b.bond_yield_loss,
            b.integration_overhead
        );
    }

    #[test]
    fn evaluation_is_deterministic() {
        let db = TechDatabase::bundled();
        let sys = hbm_system(IntegrationKind::Organic25D, 400.0, 4);
        let a = evaluate_system(&sys, &db).unwrap();
        let b = evaluate_system(&sys, &db).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
    }

    #[test]
    fn unknown_node_error_names_the_component() {
        let db = TechDatabase::bundled();
        let sys = single_die_system(IntegrationKind::Mcm, "3nm", 100.0);
        let err = evaluate_system(&sys, &db).unwrap_err().to_string();
        assert!(err.contains("die[0] (core)"), "message: {err}");
        assert!(err.contains("3nm"), "message: {err}");
    }

    #[test]
    fn explicit_interposer_area_must_hold_the_dies() {
        let db = TechDatabase::bundled();
        let mut sys = hbm_system(IntegrationKind::Organic25D, 200.0, 4);
        sys.interposer_area_mm2 = Some(100.0);
        assert!(evaluate_system(&sys, &db).is_err());
        sys.interposer_area_mm2 = Some(500.0);
        let r = evaluate_system(&sys, &db).unwrap();
        assert_eq!(r.interposer.area_mm2, 500.0);
    }

    #[test]
    fn mcm_rejects_explicit_interposer_area() {
        let db = TechDatabase::bundled();
        let mut sys = single_die_system(IntegrationKind::Mcm, "7nm", 200.0);
        sys.interposer_area_mm2 = Some(500.0);
        assert!(evaluate_system(&sys, &db).is_err());
    }

    #[test]
    fn system_spec_parses_from_toml() {
        let text = r#"
            name = "parsed"
            integration = "organic-2.5d"

            [[die]]
            name = "core"
            node = "7nm"
            area_mm2 = 150.0
            count = 2

            [hbm]
            stacks = 4
            footprint_mm2 = 39.95
        "#;
        let sys = SystemSpec::from_toml_str(text, "inline").unwrap();
        assert_eq!(sys.dies.len(), 1);
        assert_eq!(sys.dies[0].count, 2);
        assert_eq!(sys.hbm.as_ref().unwrap().signal_bits, 1024);
        let db = TechDatabase::bundled();
        assert!(evaluate_system(&sys, &db).is_ok());
    }

    #[test]
    fn empty_die_list_is_rejected() {
        let sys = SystemSpec::new("empty", IntegrationKind::Mcm, vec![]);
        let db = TechDatabase::bundled();
        assert!(evaluate_system(&sys, &db).is_err());
    }
}
