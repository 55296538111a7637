//! Command-line front end: argument parsing and output plumbing around
//! the library. Result data goes to stdout or `--output`; diagnostics
//! go to stderr. A repeated invocation writes byte-identical output.
//!
//! Exit codes: 0 success, 1 model/domain failure (infeasible systems,
//! zero-die wafers, sweep cap), 2 usage, 3 i/o, 4 parse, 5 validation
//! or unknown-name references.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::assembly::BondYieldPolicy;
use crate::error::Error;
use crate::explorer::{
    case_study_hbm_with, case_study_hybrid_with, run_sweep_with, run_switch_study_with,
    HbmStudySpec, HybridStudySpec, SweepSpec, SwitchStudySpec,
};
use crate::sysmodel::{evaluate_system_with, EvalOptions, SystemSpec};
use crate::techdb::{load_dataset, TechDatabase};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Human-readable aligned text.
    Table,
    /// Pretty JSON with the run configuration embedded.
    Json,
    /// Long-format CSV with a `#` comment preamble.
    Csv,
}

impl OutputFormat {
    fn name(self) -> &'static str {
        match self {
            OutputFormat::Table => "table",
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

/// Cost modeling for 2.5D-integrated systems-in-package.
#[derive(Debug, Parser)]
#[command(name = "sipcost", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Dataset TOML file (default: $SIPCOST_DATASET, else the bundled
    /// dataset).
    #[arg(long, global = true, value_name = "FILE")]
    dataset: Option<PathBuf>,

    /// Output format for the primary result.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,

    /// Write the primary result to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Also write long-format CSV files for plotting into a directory.
    #[arg(long = "plot-data", global = true, value_name = "DIR")]
    plot_data: Option<PathBuf>,

    /// Count the first die's attach yield too (by default the first
    /// placement is treated as safe and yield loss starts with the
    /// second die).
    #[arg(long = "bond-yield-from-first-die", global = true)]
    bond_yield_from_first_die: bool,

    /// Override a sweep spec's grid-size cap.
    #[arg(long = "max-points", global = true, value_name = "N")]
    max_points: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price one system from a system spec file.
    Cost {
        /// System spec (TOML).
        spec: PathBuf,
    },
    /// Evaluate a grid of design points from a sweep spec file.
    Sweep {
        /// Sweep spec (TOML).
        spec: PathBuf,
    },
    /// Find the die areas where chiplet builds overtake monolithic ones.
    Switchpoint {
        /// Study spec (TOML); an empty file selects the defaults.
        spec: PathBuf,
    },
    /// Reproduce a bundled case study.
    #[command(subcommand)]
    Casestudy(CaseStudyCmd),
    /// Dataset utilities.
    #[command(subcommand)]
    Dataset(DatasetCmd),
}

#[derive(Debug, Subcommand)]
enum CaseStudyCmd {
    /// Integration styles for a logic die with HBM stacks.
    Hbm {
        /// Study spec (TOML); an empty file selects the defaults.
        spec: PathBuf,
    },
    /// Fine-node logic dies with the IO share split to a mature node.
    Hybrid {
        /// Study spec (TOML); an empty file selects the defaults.
        spec: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum DatasetCmd {
    /// Check that a dataset parses and satisfies every invariant.
    Validate {
        /// Dataset file; defaults to --dataset / $SIPCOST_DATASET /
        /// the bundled dataset.
        path: Option<PathBuf>,
    },
}

/// Parse arguments and run. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Map an error to the process exit code class it belongs to.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 3,
        Error::Parse { .. } => 4,
        Error::Validation { .. } | Error::NotFound { .. } => 5,
        Error::Domain { .. }
        | Error::DieTooLarge { .. }
        | Error::ExceedsPanel { .. }
        | Error::Infeasible { .. }
        | Error::SweepCapExceeded { .. } => 1,
        Error::Component { source, .. } => exit_code_for(source),
    }
}

/// The run configuration echoed into machine-readable outputs.
#[derive(Debug, Serialize)]
struct RunEcho {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<String>,
    dataset_origin: String,
    dataset_version: String,
    format: &'static str,
    bond_yield_policy: BondYieldPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_points: Option<u64>,
}

impl RunEcho {
    fn preamble(&self) -> String {
        format!(
            "# sipcost {}\n# dataset: {} ({})\n# config: {}\n",
            self.command,
            self.dataset_version,
            self.dataset_origin,
            serde_json::to_string(self).expect("echo serializes"),
        )
    }
}

fn envelope(echo: &RunEcho, result: &impl Serialize) -> String {
    let doc = serde_json::json!({
        "run": echo,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("envelope serializes");
    s.push('\n');
    s
}

fn render_csv(preamble: &str, header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).expect("csv header");
    for row in rows {
        wtr.write_record(&row).expect("csv row");
    }
    let body = wtr.into_inner().expect("csv buffer");
    format!(
        "{preamble}{}",
        String::from_utf8(body).expect("csv is utf-8")
    )
}

fn read_spec(path: &Path) -> Result<(String, String)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((text, path.display().to_string()))
}

/// One command's rendered output: the primary document plus the
/// long-format CSV that `--plot-data` writes.
struct Rendered {
    primary: String,
    plot_name: &'static str,
    plot_csv: String,
}

fn execute(cli: Cli) -> Result<()> {
    let opts = EvalOptions {
        bond_yield_policy: if cli.bond_yield_from_first_die {
            BondYieldPolicy::AllDies
        } else {
            BondYieldPolicy::SkipFirstDie
        },
    };

    // `dataset validate PATH` checks that file; everything else (and
    // validate without a path) resolves the ambient dataset.
    let (db, origin) = match &cli.command {
        Command::Dataset(DatasetCmd::Validate { path: Some(p) }) => {
            (load_dataset(p)?, p.display().to_string())
        }
        _ => TechDatabase::resolve(cli.dataset.as_deref())?,
    };
    for w in db.warnings() {
        eprintln!("warning: {w}");
    }

    let mut echo = RunEcho {
        command: String::new(),
        spec: None,
        dataset_origin: origin,
        dataset_version: db.version().to_string(),
        format: cli.format.name(),
        bond_yield_policy: opts.bond_yield_policy,
        max_points: cli.max_points,
    };

    let rendered = match &cli.command {
        Command::Cost { spec } => {
            echo.command = "cost".to_string();
            echo.spec = Some(spec.display().to_string());
            let (text, origin) = read_spec(spec)?;
            let sys = SystemSpec::from_toml_str(&text, &origin)?;
            let report = evaluate_system_with(&sys, &db, opts)?;
            let csv = render_csv(
                &echo.preamble(),
                &["section", "item", "metric", "value"],
                report.csv_rows().into_iter().map(|r| r.to_vec()).collect(),
            );
            Rendered {
                primary: match cli.format {
                    OutputFormat::Table => report.render_text(),
                    OutputFormat::Json => envelope(&echo, &report),
                    OutputFormat::Csv => csv.clone(),
                },
                plot_name: "cost.csv",
                plot_csv: csv,
            }
        }
        Command::Sweep { spec } => {
            echo.command = "sweep".to_string();
            echo.spec = Some(spec.display().to_string());
            let (text, origin) = read_spec(spec)?;
            let mut sweep = SweepSpec::from_toml_str(&text, &origin)?;
            if let Some(cap) = cli.max_points {
                sweep.max_points = cap;
            }
            let result = run_sweep_with(&sweep, &db, opts)?;
            let csv = render_csv(
                &echo.preamble(),
                crate::explorer::SweepResult::csv_header(),
                result.csv_rows(),
            );
            Rendered {
                primary: match cli.format {
                    OutputFormat::Table => result.render_text(),
                    OutputFormat::Json => envelope(&echo, &result),
                    OutputFormat::Csv => csv.clone(),
                },
                plot_name: "sweep.csv",
                plot_csv: csv,
            }
        }
        Command::Switchpoint { spec } => {
            echo.command = "switchpoint".to_string();
            echo.spec = Some(spec.display().to_string());
            let (text, origin) = read_spec(spec)?;
            let study_spec = SwitchStudySpec::from_toml_str(&text, &origin)?;
            let study = run_switch_study_with(&study_spec, &db, opts)?;
            let csv = render_csv(
                &echo.preamble(),
                crate::explorer::SwitchStudy::csv_header(),
                study.csv_rows(),
            );
            Rendered {
                primary: match cli.format {
                    OutputFormat::Table => study.render_text(),
                    OutputFormat::Json => envelope(&echo, &study),
                    OutputFormat::Csv => csv.clone(),
                },
                plot_name: "switchpoints.csv",
                plot_csv: csv,
            }
        }
        Command::Casestudy(CaseStudyCmd::Hbm { spec }) => {
            echo.command = "casestudy hbm".to_string();
            echo.spec = Some(spec.display().to_string());
            let (text, origin) = read_spec(spec)?;
            let study_spec = HbmStudySpec::from_toml_str(&text, &origin)?;
            let study = case_study_hbm_with(&study_spec, &db, opts)?;
            let csv = render_csv(
                &echo.preamble(),
                crate::explorer::HbmStudy::csv_header(),
                study.csv_rows(),
            );
            Rendered {
                primary: match cli.format {
                    OutputFormat::Table => study.render_text(),
                    OutputFormat::Json => envelope(&echo, &study),
                    OutputFormat::Csv => csv.clone(),
                },
                plot_name: "casestudy_hbm.csv",
                plot_csv: csv,
            }
        }
        Command::Casestudy(CaseStudyCmd::Hybrid { spec }) => {
            echo.command = "casestudy hybrid".to_string();
            echo.spec = Some(spec.display().to_string());
            let (text, origin) = read_spec(spec)?;
            let study_spec = HybridStudySpec::from_toml_str(&text, &origin)?;
            let study = case_study_hybrid_with(&study_spec, &db, opts)?;
            let csv = render_csv(
                &echo.preamble(),
                crate::explorer::HybridStudy::csv_header(),
                study.csv_rows(),
            );
            Rendered {
                primary: match cli.format {
                    OutputFormat::Table => study.render_text(),
                    OutputFormat::Json => envelope(&echo, &study),
                    OutputFormat::Csv => csv.clone(),
                },
                plot_name: "casestudy_hybrid.csv",
                plot_csv: csv,
            }
        }
        Command::Dataset(DatasetCmd::Validate { path }) => {
            echo.command = "dataset validate".to_string();
            echo.spec = path.as_ref().map(|p| p.display().to_string());
            let summary = DatasetSummary::new(&db, &echo.dataset_origin);
            let csv = render_csv(
                &echo.preamble(),
                &["kind", "name"],
                summary.record_rows(),
            );
            Rendered {
                primary: match cli.format {
                    OutputFormat::Table => summary.render_text(),
                    OutputFormat::Json => envelope(&echo, &summary),
                    OutputFormat::Csv => csv.clone(),
                },
                plot_name: "records.csv",
                plot_csv: csv,
            }
        }
    };

    match &cli.output {
        Some(path) => std::fs::write(path, &rendered.primary).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{}", rendered.primary),
    }
    if let Some(dir) = &cli.plot_data {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        let target = dir.join(rendered.plot_name);
        std::fs::write(&target, &rendered.plot_csv).map_err(|source| Error::Io {
            path: target.clone(),
            source,
        })?;
    }
    Ok(())
}

/// Everything `dataset validate` reports about a dataset.
#[derive(Debug, Serialize)]
struct DatasetSummary {
    origin: String,
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    nodes: Vec<String>,
    panels: Vec<String>,
    bumps: Vec<String>,
    package_classes: Vec<String>,
    warnings: Vec<String>,
}

impl DatasetSummary {
    fn new(db: &TechDatabase, origin: &str) -> DatasetSummary {
        let doc = db.dataset();
        DatasetSummary {
            origin: origin.to_string(),
            version: db.version().to_string(),
            description: doc.dataset.description.clone(),
            nodes: doc.nodes.iter().map(|n| n.name.clone()).collect(),
            panels: doc.panels.iter().map(|p| p.name.clone()).collect(),
            bumps: doc.bumps.iter().map(|b| b.name.clone()).collect(),
            package_classes: doc.package_classes.iter().map(|c| c.name.clone()).collect(),
            warnings: db.warnings().to_vec(),
        }
    }

    fn record_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (kind, names) in [
            ("node", &self.nodes),
            ("panel", &self.panels),
            ("bump", &self.bumps),
            ("package_class", &self.package_classes),
        ] {
            for name in names {
                rows.push(vec![kind.to_string(), name.clone()]);
            }
        }
        rows
    }

    fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "dataset {} ({}): valid", self.version, self.origin);
        if let Some(d) = &self.description {
            let _ = writeln!(out, "  {d}");
        }
        let _ = writeln!(
            out,
            "records: {} nodes, {} panels, {} bump technologies, {} package classes",
            self.nodes.len(),
            self.panels.len(),
            self.bumps.len(),
            self.package_classes.len()
        );
        let _ = writeln!(out, "  nodes: {}", self.nodes.join(", "));
        let _ = writeln!(out, "  panels: {}", self.panels.join(", "));
        let _ = writeln!(out, "  bumps: {}", self.bumps.join(", "));
        let _ = writeln!(out, "  package classes: {}", self.package_classes.join(", "));
        if self.warnings.is_empty() {
            let _ = writeln!(out, "warnings: none");
        } else {
            let _ = writeln!(out, "warnings:");
            for w in &self.warnings {
                let _ = writeln!(out, "  - {w}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_cover_every_error_class() {
        let io = Error::Io {
            path: PathBuf::from("x"),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "gone"),
        };
        assert_eq!(exit_code_for(&io), 3);
        let parse = Error::Parse {
            origin: "f".to_string(),
            message: "bad".to_string(),
        };
        assert_eq!(exit_code_for(&parse), 4);
        let validation = Error::Validation {
            record: "r".to_string(),
            field: "f".to_string(),
            reason: "why".to_string(),
        };
        assert_eq!(exit_code_for(&validation), 5);
        let not_found = Error::NotFound {
            kind: "node",
            name: "3nm".to_string(),
            available: vec![],
        };
        assert_eq!(exit_code_for(&not_found), 5);
        let domain = Error::Domain {
            operation: "op",
            reason: "r".to_string(),
        };
        assert_eq!(exit_code_for(&domain), 1);
        // Attribution wrappers keep the class of the root cause.
        let wrapped = Error::Component {
            component: "assembly".to_string(),
            source: Box::new(Error::Parse {
                origin: "f".to_string(),
                message: "bad".to_string(),
            }),
        };
        assert_eq!(exit_code_for(&wrapped), 4);
    }

    #[test]
    fn csv_rendering_quotes_and_prefixes_deterministically() {
        let out = render_csv(
            "# p\n",
            &["a", "b"],
            vec![vec!["1".to_string(), "x,y".to_string()]],
        );
        assert_eq!(out, "# p\na,b\n1,\"x,y\"\n");
    }

    #[test]
    fn help_and_usage_exit_codes() {
        assert_eq!(main_with_args(["sipcost", "--help"]), 0);
        assert_eq!(main_with_args(["sipcost", "no-such-command"]), 2);
        assert_eq!(main_with_args(["sipcost", "cost"]), 2);
    }

    #[test]
    fn cost_runs_end_to_end_through_the_cli() {
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("sys.toml");
        std::fs::write(
            &spec,
            r#"
                name = "cli-test"
                integration = "organic-2.5d"

                [[die]]
                name = "core"
                node = "7nm"
                area_mm2 = 200.0
            "#,
        )
        .unwrap();
        let out = dir.path().join("report.json");
        let plots = dir.path().join("plots");
        let code = main_with_args([
            "sipcost".to_string(),
            "cost".to_string(),
            spec.display().to_string(),
            "--format".to_string(),
            "json".to_string(),
            "--output".to_string(),
            out.display().to_string(),
            "--plot-data".to_string(),
            plots.display().to_string(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("\"grand_total\""));
        assert!(text.contains("\"dataset_version\""));
        let plot = std::fs::read_to_string(plots.join("cost.csv")).unwrap();
        assert!(plot.starts_with("# sipcost cost\n"));
        assert!(plot.contains("grand_total"));
    }

    #[test]
    fn missing_spec_file_maps_to_io_exit_code() {
        let code = main_with_args(["sipcost", "cost", "/no/such/spec.toml"]);
        assert_eq!(code, 3);
    }
}
