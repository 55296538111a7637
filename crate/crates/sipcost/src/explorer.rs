//! Design-space exploration on top of the system evaluator: grid
//! sweeps, monolithic-versus-chiplet switching points, and the two
//! flagship case studies (HBM integration styles, hybrid fine/mature
//! partitioning).
//!
//! Everything here is deterministic: points expand in lexicographic
//! axis order, parallel evaluation preserves that order, and per-point
//! failures are recorded as row data instead of aborting the grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diecost::DieSpec;
use crate::error::Error;
use crate::sysmodel::{
    check_integration_feasibility, evaluate_system_with, CostReport, EvalOptions,
    FeasibilityVerdict, HbmConfig, IntegrationKind, SystemDie, SystemSpec,
};
use crate::techdb::TechDatabase;
use crate::Result;

/// How a partitioned system is scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    /// Core-logic transistor budget in billions. With an IO node the
    /// IO share is added on top; without one each die carries its
    /// `io_fraction` internally.
    TransistorsBillions(f64),
    /// Total core silicon area, split equally across the dies.
    AreaMm2(f64),
}

/// Recipe for one partitioned system: how many core dies, on what
/// node, with the IO share either on-die or split out to a mature
/// node.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPlan<'a> {
    pub name: &'a str,
    pub integration: IntegrationKind,
    pub core_node: &'a str,
    /// When set, the IO share moves to one extra die on this node.
    pub io_node: Option<&'a str>,
    /// Number of core dies; a split-out IO die comes on top.
    pub core_die_count: u32,
    /// IO share of the transistor budget.
    pub io_fraction: f64,
    pub scale: Scale,
}

/// Build the [`SystemSpec`] a plan describes. Hybrid plans (an IO node
/// present) need a transistor budget: the IO share is sized on the IO
/// node's derated density and becomes one extra die.
pub fn build_partitioned_system(plan: &PartitionPlan, db: &TechDatabase) -> Result<SystemSpec> {
    if plan.core_die_count == 0 {
        return Err(Error::Domain {
            operation: "build_partitioned_system",
            reason: "core_die_count must be >= 1".to_string(),
        });
    }
    let mut dies = Vec::new();
    match plan.io_node {
        None => {
            let spec = match plan.scale {
                Scale::TransistorsBillions(t) => {
                    if !(t > 0.0) {
                        return Err(Error::Domain {
                            operation: "build_partitioned_system",
                            reason: format!("transistor budget must be > 0, got {t}"),
                        });
                    }
                    if !(plan.io_fraction >= 0.0 && plan.io_fraction < 1.0) {
                        return Err(Error::Domain {
                            operation: "build_partitioned_system",
                            reason: format!(
                                "io_fraction must be in [0, 1), got {}",
                                plan.io_fraction
                            ),
                        });
                    }
                    // Gross the core budget up by the on-die IO share so
                    // a given scale carries the same logic content with
                    // or without a split-out IO die.
                    let total = t / (1.0 - plan.io_fraction);
                    DieSpec::by_transistor_count(
                        "core",
                        plan.core_node,
                        total / f64::from(plan.core_die_count),
                        plan.io_fraction,
                    )
                }
                Scale::AreaMm2(a) => {
                    if !(a > 0.0) {
                        return Err(Error::Domain {
                            operation: "build_partitioned_system",
                            reason: format!("area must be > 0, got {a}"),
                        });
                    }
                    let mut d = DieSpec::by_area(
                        "core",
                        plan.core_node,
                        a / f64::from(plan.core_die_count),
                    );
                    d.io_fraction = plan.io_fraction;
                    d
                }
            };
            dies.push(SystemDie {
                spec,
                count: plan.core_die_count,
            });
        }
        Some(io_node) => {
            let core_tx = match plan.scale {
                Scale::TransistorsBillions(t) if t > 0.0 => t,
                Scale::TransistorsBillions(t) => {
                    return Err(Error::Domain {
                        operation: "build_partitioned_system",
                        reason: format!("transistor budget must be > 0, got {t}"),
                    });
                }
                Scale::AreaMm2(_) => {
                    return Err(Error::Domain {
                        operation: "build_partitioned_system",
                        reason: "a split-out IO die needs a transistor budget, not an area scale"
                            .to_string(),
                    });
                }
            };
            if !(plan.io_fraction > 0.0 && plan.io_fraction < 1.0) {
                return Err(Error::Domain {
                    operation: "build_partitioned_system",
                    reason: format!(
                        "io_fraction must be in (0, 1) to split out an IO die, got {}",
                        plan.io_fraction
                    ),
                });
            }
            // Pure-logic core dies on the fine node.
            dies.push(SystemDie {
                spec: DieSpec::by_transistor_count(
                    "core",
                    plan.core_node,
                    core_tx / f64::from(plan.core_die_count),
                    0.0,
                ),
                count: plan.core_die_count,
            });
            // The IO share sized on the mature node's derated density.
            let node = db.node(io_node)?;
            let io_tx_millions = core_tx * 1000.0 * plan.io_fraction / (1.0 - plan.io_fraction);
            let io_area = io_tx_millions / (node.transistor_density * node.io_density_factor);
            dies.push(SystemDie {
                spec: DieSpec::by_area("io", io_node, io_area),
                count: 1,
            });
        }
    }
    Ok(SystemSpec::new(plan.name, plan.integration, dies))
}

/// One core/IO node pairing on a sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePair {
    pub core: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub io: Option<String>,
}

fn default_max_points() -> u64 {
    1_000_000
}

/// A grid sweep: the cartesian product of the listed axes. Exactly one
/// scale axis (transistor budget or area) must be non-empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    /// Core-logic transistor budgets in billions. The IO share set by
    /// `io_fractions` comes on top — on-die for plain node pairs, as a
    /// split-out die for pairs with an `io` node.
    #[serde(default)]
    pub scale_tx_billions: Vec<f64>,
    /// Core silicon areas in mm² (homogeneous splits only).
    #[serde(default)]
    pub scale_area_mm2: Vec<f64>,
    pub io_fractions: Vec<f64>,
    /// Core-die counts; a pair with an IO node adds its IO die on top.
    pub die_counts: Vec<u32>,
    pub node_pairs: Vec<NodePair>,
    pub integrations: Vec<IntegrationKind>,
    /// Fixed HBM attachment applied to every point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbm: Option<HbmConfig>,
    /// Refusal threshold for the expanded grid size.
    #[serde(default = "default_max_points")]
    pub max_points: u64,
}

impl SweepSpec {
    /// Parse a sweep spec from TOML text.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<SweepSpec> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let record = format!("sweep `{}`", self.name);
        let reject = |field: &str, reason: String| -> Result<()> {
            Err(Error::Validation {
                record: record.clone(),
                field: field.to_string(),
                reason,
            })
        };
        match (self.scale_tx_billions.is_empty(), self.scale_area_mm2.is_empty()) {
            (true, true) => {
                return reject(
                    "scale_tx_billions/scale_area_mm2",
                    "one scale axis is required".to_string(),
                )
            }
            (false, false) => {
                return reject(
                    "scale_tx_billions/scale_area_mm2",
                    "give one scale axis, not both".to_string(),
                )
            }
            _ => {}
        }
        if self.io_fractions.is_empty() {
            return reject("io_fractions", "at least one value is required".to_string());
        }
        if self.die_counts.is_empty() {
            return reject("die_counts", "at least one value is required".to_string());
        }
        if self.node_pairs.is_empty() {
            return reject("node_pairs", "at least one pairing is required".to_string());
        }
        if self.integrations.is_empty() {
            return reject("integrations", "at least one kind is required".to_string());
        }
        if !self.scale_area_mm2.is_empty() && self.node_pairs.iter().any(|p| p.io.is_some()) {
            return reject(
                "node_pairs",
                "split-out IO dies need the transistor-budget scale axis".to_string(),
            );
        }
        if self.max_points == 0 {
            return reject("max_points", "must be >= 1".to_string());
        }
        Ok(())
    }

    fn point_count(&self) -> u128 {
        let scales = self.scale_tx_billions.len().max(self.scale_area_mm2.len());
        scales as u128
            * self.io_fractions.len() as u128
            * self.die_counts.len() as u128
            * self.node_pairs.len() as u128
            * self.integrations.len() as u128
    }
}

/// Coordinates of one sweep point plus its outcome. Failed points keep
/// their coordinates and carry the error text instead of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_tx_billions: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_area_mm2: Option<f64>,
    pub io_fraction: f64,
    pub die_count: u32,
    pub core_node: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub io_node: Option<String>,
    pub integration: IntegrationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CostReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A completed sweep: the resolved spec, the dataset it ran against,
/// and one row per grid point in lexicographic axis order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub dataset_version: String,
    pub rows: Vec<SweepRow>,
}

/// Run a sweep with default evaluation options. The grid expands
/// lexicographically over (scale, io_fraction, die_count, node_pair,
/// integration); rows are evaluated in parallel but returned in grid
/// order.
pub fn run_sweep(spec: &SweepSpec, db: &TechDatabase) -> Result<SweepResult> {
    run_sweep_with(spec, db, EvalOptions::default())
}

/// [`run_sweep`] with explicit evaluation options.
pub fn run_sweep_with(
    spec: &SweepSpec,
    db: &TechDatabase,
    opts: EvalOptions,
) -> Result<SweepResult> {
    spec.validate()?;
    let count = spec.point_count();
    if count > u128::from(spec.max_points) {
        return Err(Error::SweepCapExceeded {
            points: u64::try_from(count).unwrap_or(u64::MAX),
            cap: spec.max_points,
        });
    }

    let mut points = Vec::with_capacity(count as usize);
    let scales: Vec<Scale> = if spec.scale_tx_billions.is_empty() {
        spec.scale_area_mm2.iter().map(|&a| Scale::AreaMm2(a)).collect()
    } else {
        spec.scale_tx_billions
            .iter()
            .map(|&t| Scale::TransistorsBillions(t))
            .collect()
    };
    for &scale in &scales {
        for &io_fraction in &spec.io_fractions {
            for &die_count in &spec.die_counts {
                for pair in &spec.node_pairs {
                    for &integration in &spec.integrations {
                        points.push((scale, io_fraction, die_count, pair.clone(), integration));
                    }
                }
            }
        }
    }

    let rows: Vec<SweepRow> = points
        .into_par_iter()
        .enumerate()
        .map(|(index, (scale, io_fraction, die_count, pair, integration))| {
            let plan = PartitionPlan {
                name: &spec.name,
                integration,
                core_node: &pair.core,
                io_node: pair.io.as_deref(),
                core_die_count: die_count,
                io_fraction,
                scale,
            };
            let outcome = build_partitioned_system(&plan, db).and_then(|mut sys| {
                sys.hbm = spec.hbm.clone();
                evaluate_system_with(&sys, db, opts)
            });
            let (scale_tx, scale_area) = match scale {
                Scale::TransistorsBillions(t) => (Some(t), None),
                Scale::AreaMm2(a) => (None, Some(a)),
            };
            let (report, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow {
                index: index as u64,
                scale_tx_billions: scale_tx,
                scale_area_mm2: scale_area,
                io_fraction,
                die_count,
                core_node: pair.core.clone(),
                io_node: pair.io.clone(),
                integration,
                report,
                error,
            }
        })
        .collect();

    Ok(SweepResult {
        spec: spec.clone(),
        dataset_version: db.version().to_string(),
        rows,
    })
}

impl SweepResult {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep serializes");
        s.push('\n');
        s
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "index",
            "scale_tx_billions",
            "scale_area_mm2",
            "io_fraction",
            "die_count",
            "core_node",
            "io_node",
            "integration",
            "status",
            "grand_total",
            "assembly_total",
            "package_cost",
            "core_die_base",
            "interposer_frac",
            "bonding_frac",
            "bond_yield_loss_frac",
            "hbm_price_frac",
            "package_frac",
            "integration_overhead_frac",
            "error",
        ]
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| {
                let b = r.report.as_ref().map(|rep| &rep.breakdown);
                vec![
                    r.index.to_string(),
                    opt(r.scale_tx_billions),
                    opt(r.scale_area_mm2),
                    r.io_fraction.to_string(),
                    r.die_count.to_string(),
                    r.core_node.clone(),
                    r.io_node.clone().unwrap_or_default(),
                    r.integration.to_string(),
                    if r.report.is_some() { "ok" } else { "error" }.to_string(),
                    opt(r.report.as_ref().map(|rep| rep.grand_total)),
                    opt(r.report.as_ref().map(|rep| rep.assembly.total)),
                    opt(r.report.as_ref().map(|rep| rep.package.cost)),
                    opt(b.map(|b| b.core_die_base)),
                    opt(b.map(|b| b.interposer)),
                    opt(b.map(|b| b.bonding)),
                    opt(b.map(|b| b.bond_yield_loss)),
                    opt(b.map(|b| b.hbm_price)),
                    opt(b.map(|b| b.package)),
                    opt(b.map(|b| b.integration_overhead)),
                    r.error.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }

    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "sweep: {} ({} points, dataset {})",
            self.spec.name,
            self.rows.len(),
            self.dataset_version
        );
        let _ = writeln!(
            out,
            "{:>6} {:>10} {:>8} {:>6} {:<10} {:<10} {:<13} {:>12}  {}",
            "index", "scale", "io_frac", "dies", "core", "io", "integration", "total", "note"
        );
        for r in &self.rows {
            let scale = r
                .scale_tx_billions
                .map(|t| format!("{t}B"))
                .or_else(|| r.scale_area_mm2.map(|a| format!("{a}mm2")))
                .unwrap_or_default();
            let total = r
                .report
                .as_ref()
                .map(|rep| format!("{:.3}", rep.grand_total))
                .unwrap_or_else(|| "-".to_string());
            let _ = writeln!(
                out,
                "{:>6} {:>10} {:>8} {:>6} {:<10} {:<10} {:<13} {:>12}  {}",
                r.index,
                scale,
                r.io_fraction,
                r.die_count,
                r.core_node,
                r.io_node.as_deref().unwrap_or("-"),
                r.integration.to_string(),
                total,
                r.error.as_deref().unwrap_or("")
            );
        }
        out
    }
}

/// Equal-split partitioning rule and the area window a switching-point
/// search scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionRule {
    /// A system larger than this splits into ceil(area / max) equal
    /// dies, never fewer than two.
    pub max_die_area_mm2: f64,
    pub search_min_mm2: f64,
    pub search_max_mm2: f64,
}

impl Default for PartitionRule {
    fn default() -> Self {
        PartitionRule {
            max_die_area_mm2: 150.0,
            search_min_mm2: 10.0,
            search_max_mm2: 800.0,
        }
    }
}

impl PartitionRule {
    fn validate(&self) -> Result<()> {
        if !(self.max_die_area_mm2 > 0.0) {
            return Err(Error::Domain {
                operation: "find_switching_point",
                reason: format!("max_die_area_mm2 must be > 0, got {}", self.max_die_area_mm2),
            });
        }
        if !(self.search_min_mm2 > 0.0 && self.search_min_mm2 < self.search_max_mm2) {
            return Err(Error::Domain {
                operation: "find_switching_point",
                reason: format!(
                    "search window [{}, {}] must be positive and ordered",
                    self.search_min_mm2, self.search_max_mm2
                ),
            });
        }
        Ok(())
    }

    /// Core-die count the rule assigns at a given total area.
    pub fn die_count(&self, area_mm2: f64) -> u32 {
        ((area_mm2 / self.max_die_area_mm2).ceil() as u32).max(2)
    }
}

/// Where (if anywhere) inside the search window the chiplet build
/// overtakes the monolithic one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SwitchOutcome {
    /// Monolithic is cheaper below, chiplet above.
    Crossover {
        area_mm2: f64,
        /// The crossover area restated as a transistor budget at the
        /// node's full-logic density.
        transistor_count_billions: f64,
    },
    /// Chiplet wins across the whole window.
    ChipletAlwaysCheaper { lower_bound_mm2: f64 },
    /// Monolithic wins across the whole window.
    MonolithicAlwaysCheaper { upper_bound_mm2: f64 },
}

/// Find the die area where an equal-split chiplet build (on the given
/// integration) overtakes a monolithic single-die package on the same
/// node. Bisects to 1 mm² after checking the window is single-crossing.
pub fn find_switching_point(
    node: &str,
    integration: IntegrationKind,
    rule: &PartitionRule,
    db: &TechDatabase,
) -> Result<SwitchOutcome> {
    find_switching_point_with(node, integration, rule, db, EvalOptions::default())
}

/// [`find_switching_point`] with explicit evaluation options.
pub fn find_switching_point_with(
    node: &str,
    integration: IntegrationKind,
    rule: &PartitionRule,
    db: &TechDatabase,
    opts: EvalOptions,
) -> Result<SwitchOutcome> {
    rule.validate()?;
    let node_rec = db.node(node)?;

    let total_at = |area: f64, kind: IntegrationKind, count: u32| -> Result<f64> {
        let plan = PartitionPlan {
            name: "switchpoint",
            integration: kind,
            core_node: node,
            io_node: None,
            core_die_count: count,
            io_fraction: 0.0,
            scale: Scale::AreaMm2(area),
        };
        let sys = build_partitioned_system(&plan, db)?;
        Ok(evaluate_system_with(&sys, db, opts)?.grand_total)
    };
    // Positive: monolithic cheaper. Negative: chiplet cheaper.
    let gap = |area: f64| -> Result<f64> {
        let mono = total_at(area, IntegrationKind::Mcm, 1)?;
        let chiplet = total_at(area, integration, rule.die_count(area))?;
        Ok(chiplet - mono)
    };

    // Sample the window: the model should cross at most once; refuse
    // to bisect a shape that doesn't.
    const SAMPLES: usize = 17;
    let (lo, hi) = (rule.search_min_mm2, rule.search_max_mm2);
    let mut signs = Vec::with_capacity(SAMPLES);
    for i in 0..SAMPLES {
        let a = lo + (hi - lo) * (i as f64) / ((SAMPLES - 1) as f64);
        let g = gap(a)?;
        if g != 0.0 {
            signs.push(g > 0.0);
        }
    }
    let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if flips > 1 {
        return Err(Error::Domain {
            operation: "find_switching_point",
            reason: format!(
                "cost gap for {node} on {integration} crosses zero more than once in \
                 [{lo}, {hi}] mm2; narrow the window"
            ),
        });
    }
    let g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if g_lo <= 0.0 && g_hi <= 0.0 {
        return Ok(SwitchOutcome::ChipletAlwaysCheaper { lower_bound_mm2: lo });
    }
    if g_lo >= 0.0 && g_hi >= 0.0 {
        return Ok(SwitchOutcome::MonolithicAlwaysCheaper { upper_bound_mm2: hi });
    }
    if g_lo < 0.0 {
        return Err(Error::Domain {
            operation: "find_switching_point",
            reason: format!(
                "cost gap for {node} on {integration} is inverted: chiplet wins at {lo} mm2 \
                 but not at {hi} mm2"
            ),
        });
    }

    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1.0 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let area = 0.5 * (lo + hi);
    Ok(SwitchOutcome::Crossover {
        area_mm2: area,
        transistor_count_billions: node_rec.transistor_density * area / 1000.0,
    })
}

/// Node list a switching-point study scans by default, fine to mature.
pub const DEFAULT_SWITCH_NODES: [&str; 6] = ["7nm", "10nm", "12nm", "16nm", "20nm", "28nm"];

/// A switching-point study over nodes × integration styles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwitchStudySpec {
    pub nodes: Vec<String>,
    pub integrations: Vec<IntegrationKind>,
    pub rule: PartitionRule,
}

impl Default for SwitchStudySpec {
    fn default() -> Self {
        SwitchStudySpec {
            nodes: DEFAULT_SWITCH_NODES.iter().map(|s| s.to_string()).collect(),
            integrations: vec![IntegrationKind::Mcm, IntegrationKind::Organic25D],
            rule: PartitionRule::default(),
        }
    }
}

impl SwitchStudySpec {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<SwitchStudySpec> {
        let spec: SwitchStudySpec = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        if spec.nodes.is_empty() || spec.integrations.is_empty() {
            return Err(Error::Validation {
                record: "switching-point study".to_string(),
                field: "nodes/integrations".to_string(),
                reason: "both lists need at least one entry".to_string(),
            });
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchRow {
    pub node: String,
    pub integration: IntegrationKind,
    #[serde(flatten)]
    pub outcome: SwitchOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchStudy {
    pub spec: SwitchStudySpec,
    pub dataset_version: String,
    pub rows: Vec<SwitchRow>,
}

/// Run the switching-point search for every node × integration pair,
/// in listed order (nodes outer).
pub fn run_switch_study(spec: &SwitchStudySpec, db: &TechDatabase) -> Result<SwitchStudy> {
    run_switch_study_with(spec, db, EvalOptions::default())
}

/// [`run_switch_study`] with explicit evaluation options.
pub fn run_switch_study_with(
    spec: &SwitchStudySpec,
    db: &TechDatabase,
    opts: EvalOptions,
) -> Result<SwitchStudy> {
    let mut pairs = Vec::new();
    for node in &spec.nodes {
        for &integration in &spec.integrations {
            pairs.push((node.clone(), integration));
        }
    }
    let rows: Vec<Result<SwitchRow>> = pairs
        .into_par_iter()
        .map(|(node, integration)| {
            find_switching_point_with(&node, integration, &spec.rule, db, opts).map(|outcome| {
                SwitchRow {
                    node,
                    integration,
                    outcome,
                }
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SwitchStudy {
        spec: spec.clone(),
        dataset_version: db.version().to_string(),
        rows,
    })
}

impl SwitchStudy {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("study serializes");
        s.push('\n');
        s
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "node",
            "integration",
            "outcome",
            "area_mm2",
            "transistor_count_billions",
            "window_bound_mm2",
        ]
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let (outcome, area, tx, bound) = match r.outcome {
                    SwitchOutcome::Crossover {
                        area_mm2,
                        transistor_count_billions,
                    } => (
                        "crossover",
                        area_mm2.to_string(),
                        transistor_count_billions.to_string(),
                        String::new(),
                    ),
                    SwitchOutcome::ChipletAlwaysCheaper { lower_bound_mm2 } => (
                        "chiplet_always_cheaper",
                        String::new(),
                        String::new(),
                        lower_bound_mm2.to_string(),
                    ),
                    SwitchOutcome::MonolithicAlwaysCheaper { upper_bound_mm2 } => (
                        "monolithic_always_cheaper",
                        String::new(),
                        String::new(),
                        upper_bound_mm2.to_string(),
                    ),
                };
                vec![
                    r.node.clone(),
                    r.integration.to_string(),
                    outcome.to_string(),
                    area,
                    tx,
                    bound,
                ]
            })
            .collect()
    }

    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "switching points (max die {} mm2, window [{}, {}] mm2, dataset {})",
            self.spec.rule.max_die_area_mm2,
            self.spec.rule.search_min_mm2,
            self.spec.rule.search_max_mm2,
            self.dataset_version
        );
        let _ = writeln!(
            out,
            "{:<8} {:<13} {}",
            "node", "integration", "chiplet wins above"
        );
        for r in &self.rows {
            let desc = match r.outcome {
                SwitchOutcome::Crossover {
                    area_mm2,
                    transistor_count_billions,
                } => format!("{area_mm2:.0} mm2 (~{transistor_count_billions:.1}B transistors)"),
                SwitchOutcome::ChipletAlwaysCheaper { lower_bound_mm2 } => {
                    format!("everywhere above {lower_bound_mm2} mm2")
                }
                SwitchOutcome::MonolithicAlwaysCheaper { upper_bound_mm2 } => {
                    format!("never below {upper_bound_mm2} mm2")
                }
            };
            let _ = writeln!(out, "{:<8} {:<13} {}", r.node, r.integration.to_string(), desc);
        }
        out
    }
}

fn default_hbm_attachment() -> HbmConfig {
    HbmConfig {
        stacks: 4,
        footprint_mm2: 39.95,
        signal_bits: 1024,
        unit_price: 0.0,
    }
}

/// HBM case study: one logic die per scale with a fixed HBM attachment,
/// priced across every integration style; styles whose bump pitch
/// cannot land the interface come back as exclusions, not errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HbmStudySpec {
    pub core_node: String,
    pub scale_areas_mm2: Vec<f64>,
    pub hbm: HbmConfig,
}

impl Default for HbmStudySpec {
    fn default() -> Self {
        HbmStudySpec {
            core_node: "7nm".to_string(),
            scale_areas_mm2: vec![200.0, 400.0, 800.0],
            hbm: default_hbm_attachment(),
        }
    }
}

impl HbmStudySpec {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<HbmStudySpec> {
        let spec: HbmStudySpec = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        if spec.scale_areas_mm2.is_empty() {
            return Err(Error::Validation {
                record: "hbm study".to_string(),
                field: "scale_areas_mm2".to_string(),
                reason: "at least one scale is required".to_string(),
            });
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbmStudyRow {
    pub scale_area_mm2: f64,
    pub integration: IntegrationKind,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CostReport>,
    /// Interface checks for infeasible rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<FeasibilityVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbmStudy {
    pub spec: HbmStudySpec,
    pub dataset_version: String,
    pub rows: Vec<HbmStudyRow>,
}

/// Run the HBM integration-style comparison.
pub fn case_study_hbm(spec: &HbmStudySpec, db: &TechDatabase) -> Result<HbmStudy> {
    case_study_hbm_with(spec, db, EvalOptions::default())
}

/// [`case_study_hbm`] with explicit evaluation options.
pub fn case_study_hbm_with(
    spec: &HbmStudySpec,
    db: &TechDatabase,
    opts: EvalOptions,
) -> Result<HbmStudy> {
    let mut rows = Vec::new();
    for &area in &spec.scale_areas_mm2 {
        for integration in IntegrationKind::ALL {
            let mut sys = SystemSpec::new(
                "hbm-study",
                integration,
                vec![SystemDie {
                    spec: DieSpec::by_area("core", &spec.core_node, area),
                    count: 1,
                }],
            );
            sys.hbm = Some(spec.hbm.clone());
            let verdict = check_integration_feasibility(&sys, db)?;
            if verdict.feasible {
                let report = evaluate_system_with(&sys, db, opts)?;
                rows.push(HbmStudyRow {
                    scale_area_mm2: area,
                    integration,
                    feasible: true,
                    report: Some(report),
                    exclusion: None,
                });
            } else {
                rows.push(HbmStudyRow {
                    scale_area_mm2: area,
                    integration,
                    feasible: false,
                    report: None,
                    exclusion: Some(verdict),
                });
            }
        }
    }
    Ok(HbmStudy {
        spec: spec.clone(),
        dataset_version: db.version().to_string(),
        rows,
    })
}

impl HbmStudy {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("study serializes");
        s.push('\n');
        s
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "scale_area_mm2",
            "integration",
            "feasible",
            "grand_total",
            "core_die_base",
            "interposer_frac",
            "bonding_frac",
            "bond_yield_loss_frac",
            "package_frac",
            "integration_overhead_frac",
            "note",
        ]
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let b = r.report.as_ref().map(|rep| &rep.breakdown);
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                let note = match &r.exclusion {
                    Some(v) => v
                        .checks
                        .iter()
                        .filter(|c| !c.feasible)
                        .map(|c| {
                            format!(
                                "{} needs {:.2} mm2 at {} um pitch but only {:.2} mm2 is available",
                                c.interface, c.required_mm2, c.pitch_um, c.available_mm2
                            )
                        })
                        .collect::<Vec<_>>()
                        .join("; "),
                    None => String::new(),
                };
                vec![
                    r.scale_area_mm2.to_string(),
                    r.integration.to_string(),
                    r.feasible.to_string(),
                    opt(r.report.as_ref().map(|rep| rep.grand_total)),
                    opt(b.map(|b| b.core_die_base)),
                    opt(b.map(|b| b.interposer)),
                    opt(b.map(|b| b.bonding)),
                    opt(b.map(|b| b.bond_yield_loss)),
                    opt(b.map(|b| b.package)),
                    opt(b.map(|b| b.integration_overhead)),
                    note,
                ]
            })
            .collect()
    }

    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "hbm integration study: {} core, {} stacks x {} mm2 (dataset {})",
            self.spec.core_node,
            self.spec.hbm.stacks,
            self.spec.hbm.footprint_mm2,
            self.dataset_version
        );
        let _ = writeln!(
            out,
            "{:>10} {:<13} {:>10} {:>10} {:>10}  {}",
            "core mm2", "integration", "total", "overhead", "yld-loss", "note"
        );
        for r in &self.rows {
            match (&r.report, &r.exclusion) {
                (Some(rep), _) => {
                    let _ = writeln!(
                        out,
                        "{:>10} {:<13} {:>10.3} {:>9.1}% {:>9.1}%",
                        r.scale_area_mm2,
                        r.integration.to_string(),
                        rep.grand_total,
                        rep.breakdown.integration_overhead * 100.0,
                        rep.breakdown.bond_yield_loss * 100.0,
                    );
                }
                (None, Some(v)) => {
                    let why = v
                        .checks
                        .iter()
                        .filter(|c| !c.feasible)
                        .map(|c| {
                            format!(
                                "{} needs {:.2} mm2 > {:.2} mm2 footprint",
                                c.interface, c.required_mm2, c.available_mm2
                            )
                        })
                        .collect::<Vec<_>>()
                        .join("; ");
                    let _ = writeln!(
                        out,
                        "{:>10} {:<13} {:>10} {:>10} {:>10}  excluded: {}",
                        r.scale_area_mm2,
                        r.integration.to_string(),
                        "-",
                        "-",
                        "-",
                        why
                    );
                }
                (None, None) => unreachable!("row without report or exclusion"),
            }
        }
        out
    }
}

/// Hybrid partitioning case study: a transistor budget split between a
/// fine logic node and a mature IO node, compared against single-die
/// builds on either node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridStudySpec {
    pub core_node: String,
    pub io_node: String,
    pub integration: IntegrationKind,
    /// Core-logic transistor budgets in billions.
    pub core_tx_billions: Vec<f64>,
    pub io_fractions: Vec<f64>,
    pub die_counts: Vec<u32>,
}

impl Default for HybridStudySpec {
    fn default() -> Self {
        HybridStudySpec {
            core_node: "7nm".to_string(),
            io_node: "12nm".to_string(),
            integration: IntegrationKind::Mcm,
            core_tx_billions: vec![5.0, 10.0, 50.0],
            io_fractions: vec![0.3, 0.4, 0.5],
            die_counts: vec![2, 4, 8],
        }
    }
}

impl HybridStudySpec {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<HybridStudySpec> {
        let spec: HybridStudySpec = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        if spec.core_tx_billions.is_empty()
            || spec.io_fractions.is_empty()
            || spec.die_counts.is_empty()
        {
            return Err(Error::Validation {
                record: "hybrid study".to_string(),
                field: "core_tx_billions/io_fractions/die_counts".to_string(),
                reason: "every axis needs at least one entry".to_string(),
            });
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridCell {
    pub die_count: u32,
    pub grand_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridStudyRow {
    pub core_tx_billions: f64,
    pub io_fraction: f64,
    /// Single die on the fine node, IO on-die.
    pub monolithic_fine: f64,
    /// Single die on the mature node, IO on-die.
    pub monolithic_mature: f64,
    /// Partitioned builds, one per core-die count.
    pub hybrids: Vec<HybridCell>,
    pub best_count: u32,
    pub best_total: f64,
    /// 1 − best / monolithic_fine.
    pub improvement_vs_fine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridStudy {
    pub spec: HybridStudySpec,
    pub dataset_version: String,
    pub rows: Vec<HybridStudyRow>,
}

/// Run the hybrid partitioning comparison.
pub fn case_study_hybrid(spec: &HybridStudySpec, db: &TechDatabase) -> Result<HybridStudy> {
    case_study_hybrid_with(spec, db, EvalOptions::default())
}

/// [`case_study_hybrid`] with explicit evaluation options.
pub fn case_study_hybrid_with(
    spec: &HybridStudySpec,
    db: &TechDatabase,
    opts: EvalOptions,
) -> Result<HybridStudy> {
    let mut rows = Vec::new();
    for &core_tx in &spec.core_tx_billions {
        for &io_fraction in &spec.io_fractions {
            if !(io_fraction > 0.0 && io_fraction < 1.0) {
                return Err(Error::Domain {
                    operation: "case_study_hybrid",
                    reason: format!("io_fraction must be in (0, 1), got {io_fraction}"),
                });
            }
            // The monolithic references carry the whole budget with
            // the IO share on-die (the builder grosses the core budget
            // up by the IO share).
            let mono = |node: &str| -> Result<f64> {
                let plan = PartitionPlan {
                    name: "hybrid-study",
                    integration: IntegrationKind::Mcm,
                    core_node: node,
                    io_node: None,
                    core_die_count: 1,
                    io_fraction,
                    scale: Scale::TransistorsBillions(core_tx),
                };
                let sys = build_partitioned_system(&plan, db)?;
                Ok(evaluate_system_with(&sys, db, opts)?.grand_total)
            };
            let monolithic_fine = mono(&spec.core_node)?;
            let monolithic_mature = mono(&spec.io_node)?;

            let mut hybrids = Vec::new();
            for &die_count in &spec.die_counts {
                let plan = PartitionPlan {
                    name: "hybrid-study",
                    integration: spec.integration,
                    core_node: &spec.core_node,
                    io_node: Some(&spec.io_node),
                    core_die_count: die_count,
                    io_fraction,
                    scale: Scale::TransistorsBillions(core_tx),
                };
                let sys = build_partitioned_system(&plan, db)?;
                hybrids.push(HybridCell {
                    die_count,
                    grand_total: evaluate_system_with(&sys, db, opts)?.grand_total,
                });
            }
            let best = hybrids
                .iter()
                .copied()
                .min_by(|a, b| {
                    a.grand_total
                        .partial_cmp(&b.grand_total)
                        .expect("totals are finite")
                })
                .expect("die_counts validated non-empty");
            rows.push(HybridStudyRow {
                core_tx_billions: core_tx,
                io_fraction,
                monolithic_fine,
                monolithic_mature,
                hybrids,
                best_count: best.die_count,
                best_total: best.grand_total,
                improvement_vs_fine: 1.0 - best.grand_total / monolithic_fine,
            });
        }
    }
    Ok(HybridStudy {
        spec: spec.clone(),
        dataset_version: db.version().to_string(),
        rows,
    })
}

impl HybridStudy {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("study serializes");
        s.push('\n');
        s
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "core_tx_billions",
            "io_fraction",
            "variant",
            "core_die_count",
            "grand_total",
            "best",
            "improvement_vs_fine",
        ]
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for r in &self.rows {
            let base = |variant: &str, count: String, total: f64, best: bool| {
                vec![
                    r.core_tx_billions.to_string(),
                    r.io_fraction.to_string(),
                    variant.to_string(),
                    count,
                    total.to_string(),
                    if best { "true".to_string() } else { String::new() },
                    if best {
                        r.improvement_vs_fine.to_string()
                    } else {
                        String::new()
                    },
                ]
            };
            out.push(base("monolithic-fine", "1".to_string(), r.monolithic_fine, false));
            out.push(base(
                "monolithic-mature",
                "1".to_string(),
                r.monolithic_mature,
                false,
            ));
            for h in &r.hybrids {
                out.push(base(
                    "hybrid",
                    h.die_count.to_string(),
                    h.grand_total,
                    h.die_count == r.best_count,
                ));
            }
        }
        out
    }

    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "hybrid partitioning study: {} cores + {} io on {} (dataset {})",
            self.spec.core_node, self.spec.io_node, self.spec.integration, self.dataset_version
        );
        let counts = self
            .spec
            .die_counts
            .iter()
            .map(|c| format!("{:>9}", format!("n={c}")))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            "{:>8} {:>8} {:>10} {:>10} {} {:>6} {:>8}",
            "core tx", "io frac", "mono-fine", "mono-mat", counts, "best", "improve"
        );
        for r in &self.rows {
            let cells = r
                .hybrids
                .iter()
                .map(|h| format!("{:>9.3}", h.grand_total))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                out,
                "{:>7}B {:>8} {:>10.3} {:>10.3} {} {:>6} {:>7.1}%",
                r.core_tx_billions,
                r.io_fraction,
                r.monolithic_fine,
                r.monolithic_mature,
                cells,
                r.best_count,
                r.improvement_vs_fine * 100.0
            );
        }
        out
    }
}
