//! Technology dataset: loading, validation, and lookup.
//!
//! Every technology-dependent number in the model — wafer and panel
//! costs, defect densities, bump parameters, package cost samples —
//! lives in one versioned TOML dataset. All other modules take a
//! [`TechDatabase`] value; none of them ever read a file.
//!
//! The bundled default dataset (`data/default.toml`) carries placeholder
//! values with a provenance note on every record. It is a starting
//! point, not a calibrated source: anyone with access to real foundry or
//! OSAT pricing is expected to edit it.
//!
//! Dataset resolution order: explicit path argument, then the
//! `SIPCOST_DATASET` environment variable, then the bundled default.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::yieldcore::YieldParams;

/// Environment variable that overrides the default dataset path.
pub const DATASET_ENV_VAR: &str = "SIPCOST_DATASET";

/// Schema version this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

const BUNDLED_DATASET: &str = include_str!("../data/default.toml");

fn default_io_density_factor() -> f64 {
    1.0
}

fn default_signals_per_layer_per_mm() -> f64 {
    50.0
}

/// Per-node manufacturing parameters for wafer-built silicon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechNode {
    pub name: String,
    /// Processed-wafer cost, currency per wafer.
    pub wafer_cost: f64,
    /// Wafer diameter in mm.
    pub wafer_diameter: f64,
    /// Defect density in defects per cm².
    pub defect_density: f64,
    /// Defect clustering parameter.
    pub clustering_alpha: f64,
    /// Logic transistor density in million transistors per mm².
    pub transistor_density: f64,
    /// Systematic wafer yield in (0, 1].
    pub wafer_base_yield: f64,
    /// Density derating for I/O transistors relative to logic: effective
    /// I/O density = `transistor_density × io_density_factor`.
    #[serde(default = "default_io_density_factor")]
    pub io_density_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl TechNode {
    pub fn yield_params(&self) -> YieldParams {
        YieldParams {
            base_yield: self.wafer_base_yield,
            defect_density: self.defect_density,
            clustering_alpha: self.clustering_alpha,
        }
    }

    /// Feature size in nm parsed from a leading number in the name
    /// ("7nm" → 7, "65nm-passive" → 65). Used only for ordering checks.
    pub fn feature_nm(&self) -> Option<f64> {
        let digits: String = self
            .name
            .chars()
            .take_while(|c| c.is_ascii_digit() || *c == '.')
            .collect();
        digits.parse().ok()
    }
}

/// Organic interposer panel parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub name: String,
    /// Processed-panel cost, currency per panel.
    pub panel_cost: f64,
    /// Panel width in mm.
    pub panel_width: f64,
    /// Panel height in mm.
    pub panel_height: f64,
    /// Systematic panel yield in (0, 1].
    pub panel_base_yield: f64,
    /// Defect density in defects per cm².
    pub defect_density: f64,
    /// Defect clustering parameter.
    pub clustering_alpha: f64,
    /// Routing layer count this cost entry corresponds to, when the
    /// dataset carries one entry per layer count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl PanelSpec {
    pub fn area_mm2(&self) -> f64 {
        self.panel_width * self.panel_height
    }

    pub fn yield_params(&self) -> YieldParams {
        YieldParams {
            base_yield: self.panel_base_yield,
            defect_density: self.defect_density,
            clustering_alpha: self.clustering_alpha,
        }
    }
}

/// One die-attach technology: bump pitch plus bonding cost and yield.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpTech {
    pub name: String,
    /// Bump pitch in µm.
    pub pitch: f64,
    /// Bonding cost per die attach, currency.
    pub bond_cost_per_die: f64,
    /// Probability one die attach succeeds, in (0, 1].
    pub bond_yield: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// One tabulated (substrate area, pin count, cost) sample for a package
/// class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackageSample {
    pub area: f64,
    pub pins: u64,
    pub cost: f64,
}

/// A package substrate configuration with its cost sample table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageClass {
    pub name: String,
    pub core_layers: u32,
    pub buildup_layers: u32,
    pub samples: Vec<PackageSample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// Dataset-wide default parameters referenced by the system model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDefaults {
    /// Node record used for passive silicon interposers.
    pub silicon_interposer_node: String,
    /// Panel record used for organic interposers.
    pub organic_panel: String,
    /// Bump record per integration style.
    pub bump_silicon_2_5d: String,
    pub bump_organic_2_5d: String,
    pub bump_mcm: String,
    /// Package class assumed when a system spec names none.
    pub package_class: String,
    /// Interposer area = Σ die areas × (1 + this fraction).
    pub interposer_area_overhead: f64,
    /// Package substrate area = footprint × this factor.
    pub package_fanout: f64,
    /// Power/ground pins added per signal pin.
    pub power_ground_ratio: f64,
    /// External signal count assumed per die when the system spec does
    /// not say.
    pub signals_per_die: u64,
    /// Routable signals per interposer routing layer per mm of die
    /// shoreline; only feeds the informational wiring-layer estimate.
    #[serde(default = "default_signals_per_layer_per_mm")]
    pub signals_per_layer_per_mm: f64,
}

/// Header block carrying the dataset identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// The raw dataset document, exactly as serialized on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub dataset: DatasetInfo,
    #[serde(rename = "node")]
    pub nodes: Vec<TechNode>,
    #[serde(rename = "panel")]
    pub panels: Vec<PanelSpec>,
    #[serde(rename = "bump")]
    pub bumps: Vec<BumpTech>,
    #[serde(rename = "package_class")]
    pub package_classes: Vec<PackageClass>,
    pub defaults: DatasetDefaults,
}

/// Validated, immutable technology database. Cheap to clone, safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct TechDatabase {
    doc: Dataset,
    nodes: BTreeMap<String, usize>,
    panels: BTreeMap<String, usize>,
    bumps: BTreeMap<String, usize>,
    package_classes: BTreeMap<String, usize>,
    warnings: Vec<String>,
}

/// Load a dataset file, validate it, and build the lookup maps.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<TechDatabase> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    TechDatabase::from_toml_str(&text, &path.display().to_string())
}

impl TechDatabase {
    /// Parse and validate a dataset from TOML text. `origin` names the
    /// source in error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<TechDatabase> {
        let doc: Dataset = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        Self::from_dataset(doc, origin)
    }

    /// Validate an in-memory dataset document.
    pub fn from_dataset(doc: Dataset, origin: &str) -> Result<TechDatabase> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse {
                origin: origin.to_string(),
                message: format!(
                    "unsupported schema_version {} (this build reads {})",
                    doc.schema_version, SCHEMA_VERSION
                ),
            });
        }
        let mut warnings = Vec::new();
        validate_nodes(&doc.nodes, &mut warnings)?;
        validate_panels(&doc.panels)?;
        validate_bumps(&doc.bumps)?;
        validate_package_classes(&doc.package_classes)?;

        let nodes = index_by_name(doc.nodes.iter().map(|n| n.name.clone()), "node")?;
        let panels = index_by_name(doc.panels.iter().map(|p| p.name.clone()), "panel")?;
        let bumps = index_by_name(doc.bumps.iter().map(|b| b.name.clone()), "bump")?;
        let package_classes = index_by_name(
            doc.package_classes.iter().map(|c| c.name.clone()),
            "package_class",
        )?;

        let db = TechDatabase {
            doc,
            nodes,
            panels,
            bumps,
            package_classes,
            warnings,
        };
        db.validate_defaults()?;
        Ok(db)
    }

    /// The bundled default dataset.
    pub fn bundled() -> TechDatabase {
        TechDatabase::from_toml_str(BUNDLED_DATASET, "bundled default dataset")
            .expect("bundled dataset must be valid")
    }

    /// The bundled default dataset as TOML text, e.g. for writing a
    /// starting point to disk.
    pub fn bundled_toml() -> &'static str {
        BUNDLED_DATASET
    }

    /// Resolve a dataset: explicit path override, then `SIPCOST_DATASET`,
    /// then the bundled default. Returns the database and a label for
    /// where it came from.
    pub fn resolve(path_override: Option<&Path>) -> Result<(TechDatabase, String)> {
        if let Some(p) = path_override {
            return Ok((load_dataset(p)?, p.display().to_string()));
        }
        if let Ok(p) = std::env::var(DATASET_ENV_VAR) {
            if !p.is_empty() {
                return Ok((load_dataset(&p)?, p));
            }
        }
        Ok((TechDatabase::bundled(), "bundled".to_string()))
    }

    pub fn version(&self) -> &str {
        &self.doc.dataset.version
    }

    /// Non-fatal validation findings (e.g. a density ordering anomaly).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The raw document, for re-serialization or inspection.
    pub fn dataset(&self) -> &Dataset {
        &self.doc
    }

    /// Serialize the dataset back to TOML. Loading the output yields
    /// field-for-field identical records.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(&self.doc).expect("dataset serializes")
    }

    pub fn node(&self, name: &str) -> Result<&TechNode> {
        match self.nodes.get(name) {
            Some(&i) => Ok(&self.doc.nodes[i]),
            None => Err(self.not_found("node", name, &self.nodes)),
        }
    }

    pub fn panel(&self, name: &str) -> Result<&PanelSpec> {
        match self.panels.get(name) {
            Some(&i) => Ok(&self.doc.panels[i]),
            None => Err(self.not_found("panel", name, &self.panels)),
        }
    }

    pub fn bump(&self, name: &str) -> Result<&BumpTech> {
        match self.bumps.get(name) {
            Some(&i) => Ok(&self.doc.bumps[i]),
            None => Err(self.not_found("bump", name, &self.bumps)),
        }
    }

    pub fn package_class(&self, name: &str) -> Result<&PackageClass> {
        match self.package_classes.get(name) {
            Some(&i) => Ok(&self.doc.package_classes[i]),
            None => Err(self.not_found("package class", name, &self.package_classes)),
        }
    }

    pub fn node_names(&self) -> Vec<String> {
        self.nodes.keys().cloned().collect()
    }

    pub fn package_class_names(&self) -> Vec<String> {
        self.package_classes.keys().cloned().collect()
    }

    pub fn defaults(&self) -> &DatasetDefaults {
        &self.doc.defaults
    }

    fn not_found(&self, kind: &'static str, name: &str, map: &BTreeMap<String, usize>) -> Error {
        Error::NotFound {
            kind,
            name: name.to_string(),
            available: map.keys().cloned().collect(),
        }
    }

    fn validate_defaults(&self) -> Result<()> {
        let d = &self.doc.defaults;
        self.node(&d.silicon_interposer_node)
            .map_err(|e| defaults_ref_error("silicon_interposer_node", e))?;
        self.panel(&d.organic_panel)
            .map_err(|e| defaults_ref_error("organic_panel", e))?;
        self.bump(&d.bump_silicon_2_5d)
            .map_err(|e| defaults_ref_error("bump_silicon_2_5d", e))?;
        self.bump(&d.bump_organic_2_5d)
            .map_err(|e| defaults_ref_error("bump_organic_2_5d", e))?;
        self.bump(&d.bump_mcm)
            .map_err(|e| defaults_ref_error("bump_mcm", e))?;
        self.package_class(&d.package_class)
            .map_err(|e| defaults_ref_error("package_class", e))?;
        let checks = [
            ("interposer_area_overhead", d.interposer_area_overhead, 0.0),
            ("package_fanout", d.package_fanout, 1.0),
            ("signals_per_layer_per_mm", d.signals_per_layer_per_mm, 0.0),
        ];
        for (field, value, min) in checks {
            if !(value >= min) {
                return Err(Error::Validation {
                    record: "defaults".to_string(),
                    field: field.to_string(),
                    reason: format!("must be >= {min}, got {value}"),
                });
            }
        }
        if !(d.power_ground_ratio >= 0.0) {
            return Err(Error::Validation {
                record: "defaults".to_string(),
                field: "power_ground_ratio".to_string(),
                reason: format!("must be >= 0, got {}", d.power_ground_ratio),
            });
        }
        Ok(())
    }
}

fn defaults_ref_error(field: &str, source: Error) -> Error {
    Error::Validation {
        record: "defaults".to_string(),
        field: field.to_string(),
        reason: source.to_string(),
    }
}

fn index_by_name(
    names: impl Iterator<Item = String>,
    kind: &str,
) -> Result<BTreeMap<String, usize>> {
    let mut map = BTreeMap::new();
    for (i, name) in names.enumerate() {
        if name.is_empty() {
            return Err(Error::Validation {
                record: format!("{kind}[{i}]"),
                field: "name".to_string(),
                reason: "must not be empty".to_string(),
            });
        }
        if map.insert(name.clone(), i).is_some() {
            return Err(Error::Validation {
                record: format!("{kind} `{name}`"),
                field: "name".to_string(),
                reason: "duplicate record name".to_string(),
            });
        }
    }
    Ok(map)
}

fn positive(record: &str, field: &str, value: f64) -> Result<()> {
    if !(value > 0.0) {
        return Err(Error::Validation {
            record: record.to_string(),
            field: field.to_string(),
            reason: format!("must be > 0, got {value}"),
        });
    }
    Ok(())
}

fn fraction(record: &str, field: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value <= 1.0) {
        return Err(Error::Validation {
            record: record.to_string(),
            field: field.to_string(),
            reason: format!("must be in (0, 1], got {value}"),
        });
    }
    Ok(())
}

fn non_negative(record: &str, field: &str, value: f64) -> Result<()> {
    if !(value >= 0.0) {
        return Err(Error::Validation {
            record: record.to_string(),
            field: field.to_string(),
            reason: format!("must be >= 0, got {value}"),
        });
    }
    Ok(())
}

fn validate_nodes(nodes: &[TechNode], warnings: &mut Vec<String>) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Validation {
            record: "dataset".to_string(),
            field: "node".to_string(),
            reason: "at least one node record is required".to_string(),
        });
    }
    for n in nodes {
        let record = format!("node `{}`", n.name);
        positive(&record, "wafer_cost", n.wafer_cost)?;
        positive(&record, "wafer_diameter", n.wafer_diameter)?;
        // Zero defect density is the perfect-yield limit and is allowed.
        non_negative(&record, "defect_density", n.defect_density)?;
        positive(&record, "clustering_alpha", n.clustering_alpha)?;
        positive(&record, "transistor_density", n.transistor_density)?;
        fraction(&record, "wafer_base_yield", n.wafer_base_yield)?;
        fraction(&record, "io_density_factor", n.io_density_factor)?;
    }
    // Density should fall as the node matures (larger feature size).
    // Anomalies are reported, not rejected: a dataset may legitimately
    // carry oddballs like cost-reduced half-nodes.
    let mut by_feature: Vec<&TechNode> = nodes.iter().filter(|n| n.feature_nm().is_some()).collect();
    by_feature.sort_by(|a, b| a.feature_nm().partial_cmp(&b.feature_nm()).unwrap());
    for pair in by_feature.windows(2) {
        let (finer, coarser) = (pair[0], pair[1]);
        if finer.feature_nm() == coarser.feature_nm() {
            continue;
        }
        if coarser.transistor_density >= finer.transistor_density {
            warnings.push(format!(
                "node `{}` ({} MTx/mm\u{b2}) is not denser than the more mature `{}` ({} MTx/mm\u{b2})",
                finer.name, finer.transistor_density, coarser.name, coarser.transistor_density
            ));
        }
    }
    Ok(())
}

fn validate_panels(panels: &[PanelSpec]) -> Result<()> {
    for p in panels {
        let record = format!("panel `{}`", p.name);
        positive(&record, "panel_cost", p.panel_cost)?;
        positive(&record, "panel_width", p.panel_width)?;
        positive(&record, "panel_height", p.panel_height)?;
        fraction(&record, "panel_base_yield", p.panel_base_yield)?;
        non_negative(&record, "defect_density", p.defect_density)?;
        positive(&record, "clustering_alpha", p.clustering_alpha)?;
    }
    Ok(())
}

fn validate_bumps(bumps: &[BumpTech]) -> Result<()> {
    for b in bumps {
        let record = format!("bump `{}`", b.name);
        positive(&record, "pitch", b.pitch)?;
        non_negative(&record, "bond_cost_per_die", b.bond_cost_per_die)?;
        fraction(&record, "bond_yield", b.bond_yield)?;
    }
    Ok(())
}

fn validate_package_classes(classes: &[PackageClass]) -> Result<()> {
    for c in classes {
        let record = format!("package_class `{}`", c.name);
        if c.samples.len() < 3 {
            return Err(Error::Validation {
                record,
                field: "samples".to_string(),
                reason: format!("regression needs >= 3 sample points, got {}", c.samples.len()),
            });
        }
        for (i, s) in c.samples.iter().enumerate() {
            let srec = format!("{record} sample[{i}]");
            positive(&srec, "area", s.area)?;
            if s.pins == 0 {
                return Err(Error::Validation {
                    record: srec,
                    field: "pins".to_string(),
                    reason: "must be > 0".to_string(),
                });
            }
            non_negative(&srec, "cost", s.cost)?;
        }
        if samples_collinear(&c.samples) {
            return Err(Error::Validation {
                record,
                field: "samples".to_string(),
                reason: "sample points are collinear in (area, pins); the plane fit is rank-deficient"
                    .to_string(),
            });
        }
    }
    Ok(())
}

/// True when every (area, pins) point lies on one line, which makes the
/// two regressors linearly dependent.
fn samples_collinear(samples: &[PackageSample]) -> bool {
    let (x0, y0) = (samples[0].area, samples[0].pins as f64);
    // Find one point distinct from the first to define a direction.
    let Some(p1) = samples[1..]
        .iter()
        .find(|s| s.area != x0 || s.pins as f64 != y0)
    else {
        return true;
    };
    let (dx, dy) = (p1.area - x0, p1.pins as f64 - y0);
    let dir_norm = dx.hypot(dy);
    samples.iter().all(|s| {
        let (ex, ey) = (s.area - x0, s.pins as f64 - y0);
        let cross = dx * ey - dy * ex;
        cross.abs() <= 1e-10 * dir_norm * ex.hypot(ey).max(dir_norm)
    })
}
