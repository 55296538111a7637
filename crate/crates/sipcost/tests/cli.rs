//! End-to-end tests of the installed binary: exit codes per error
//! class, stream discipline, output formats, and the shipped config
//! files staying valid.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sipcost"));
    // Keep runs hermetic regardless of the ambient environment.
    cmd.env_remove("SIPCOST_DATASET");
    cmd
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

#[test]
fn cost_table_goes_to_stdout() {
    let spec = configs().join("system_hbm.toml");
    let out = run(&["cost", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("grand total"));
    assert!(text.contains("hbm-organic-200"));
    assert!(text.contains("organic-2.5d"));
}

#[test]
fn every_shipped_config_runs() {
    let configs = configs();
    let cases: &[(&[&str], &str)] = &[
        (&["cost"], "system_hbm.toml"),
        (&["cost"], "system_hybrid.toml"),
        (&["sweep"], "sweep_scaling.toml"),
        (&["switchpoint"], "switchpoint.toml"),
        (&["casestudy", "hbm"], "casestudy_hbm.toml"),
        (&["casestudy", "hybrid"], "casestudy_hybrid.toml"),
    ];
    for (cmd, file) in cases {
        let spec = configs.join(file);
        let mut args: Vec<&str> = cmd.to_vec();
        let spec_str = spec.to_str().unwrap().to_string();
        args.push(&spec_str);
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{file} failed: {}",
            stderr_of(&out)
        );
        assert!(!stdout_of(&out).is_empty(), "{file} wrote no output");
    }
}

#[test]
fn json_output_parses_and_embeds_run_config() {
    let spec = configs().join("system_hbm.toml");
    let out = run(&["cost", spec.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid json");
    assert_eq!(doc["run"]["command"], "cost");
    assert_eq!(doc["run"]["dataset_origin"], "bundled");
    assert!(doc["run"]["dataset_version"].is_string());
    assert!(doc["result"]["grand_total"].is_number());
    assert_eq!(doc["result"]["dataset_version"], doc["run"]["dataset_version"]);
}

#[test]
fn csv_output_has_comment_preamble_then_clean_table() {
    let spec = configs().join("casestudy_hbm.toml");
    let out = run(&[
        "casestudy",
        "hbm",
        spec.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# sipcost casestudy hbm"));
    assert!(lines.next().unwrap().starts_with("# dataset: "));
    assert!(lines.next().unwrap().starts_with("# config: "));
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "scale_area_mm2,integration,feasible,grand_total,core_die_base,interposer_frac,\
         bonding_frac,bond_yield_loss_frac,package_frac,integration_overhead_frac,note"
    );
    // 3 scales × 3 integration styles.
    assert_eq!(lines.clone().count(), 9);
    // The MCM rows are exclusions with an explanation, not errors.
    let mcm: Vec<&str> = lines.filter(|l| l.contains(",mcm,")).collect();
    assert_eq!(mcm.len(), 3);
    for row in mcm {
        assert!(row.contains("false"), "mcm must be infeasible: {row}");
    }
}

#[test]
fn plot_data_directory_gets_long_format_csv() {
    let dir = tempfile::tempdir().unwrap();
    let plots = dir.path().join("plots");
    let spec = configs().join("casestudy_hybrid.toml");
    let out = run(&[
        "casestudy",
        "hybrid",
        spec.to_str().unwrap(),
        "--plot-data",
        plots.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(plots.join("casestudy_hybrid.csv")).unwrap();
    assert!(csv.starts_with("# sipcost casestudy hybrid\n"));
    assert!(csv.contains("monolithic-fine"));
    assert!(csv.contains("hybrid"));
}

#[test]
fn rerun_writes_byte_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = configs().join("system_hybrid.toml");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let res = run(&[
            "cost",
            spec.to_str().unwrap(),
            "--format",
            "csv",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0));
        // File mode keeps stdout silent.
        assert!(stdout_of(&res).is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn bond_yield_flag_changes_the_answer() {
    let spec = configs().join("system_hbm.toml");
    let base = run(&["cost", spec.to_str().unwrap(), "--format", "json"]);
    let strict = run(&[
        "cost",
        spec.to_str().unwrap(),
        "--format",
        "json",
        "--bond-yield-from-first-die",
    ]);
    let get = |out: &Output| -> f64 {
        let doc: serde_json::Value = serde_json::from_str(&stdout_of(out)).unwrap();
        doc["result"]["grand_total"].as_f64().unwrap()
    };
    let (a, b) = (get(&base), get(&strict));
    assert!(
        b > a,
        "counting the first attach yield must raise the total ({b} vs {a})"
    );
}

#[test]
fn dataset_validate_reports_the_bundled_dataset() {
    let out = run(&["dataset", "validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("valid"));
    assert!(text.contains("7nm"));
}

#[test]
fn dataset_validate_accepts_an_explicit_file() {
    let dir = tempfile::tempdir().unwrap();
    // Round-trip the bundled dataset through a file.
    let path = dir.path().join("data.toml");
    let out = run(&["dataset", "validate", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let bundled: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();

    std::fs::write(&path, sipcost::techdb::TechDatabase::bundled_toml()).unwrap();
    let out = run(&["dataset", "validate", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["result"]["version"], bundled["result"]["version"]);
    assert_eq!(doc["result"]["nodes"], bundled["result"]["nodes"]);
}

#[test]
fn custom_dataset_flag_changes_the_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pricier.toml");
    // Double the 7nm wafer cost in a copy of the bundled dataset.
    let mut doc: toml::Value = toml::from_str(sipcost::techdb::TechDatabase::bundled_toml()).unwrap();
    let nodes = doc["node"].as_array_mut().unwrap();
    for node in nodes.iter_mut() {
        if node["name"].as_str() == Some("7nm") {
            let cost = node["wafer_cost"].as_float().unwrap();
            node["wafer_cost"] = toml::Value::Float(cost * 2.0);
        }
    }
    doc["dataset"]["version"] = toml::Value::String("pricier-7nm".to_string());
    std::fs::write(&path, toml::to_string(&doc).unwrap()).unwrap();

    let spec = configs().join("system_hbm.toml");
    let base = run(&["cost", spec.to_str().unwrap(), "--format", "json"]);
    let pricier = run(&[
        "cost",
        spec.to_str().unwrap(),
        "--format",
        "json",
        "--dataset",
        path.to_str().unwrap(),
    ]);
    assert_eq!(pricier.status.code(), Some(0), "{}", stderr_of(&pricier));
    let get = |out: &Output| -> serde_json::Value {
        serde_json::from_str(&stdout_of(out)).unwrap()
    };
    let (a, b) = (get(&base), get(&pricier));
    assert_eq!(b["run"]["dataset_version"], "pricier-7nm");
    assert!(
        b["result"]["grand_total"].as_f64().unwrap()
            > a["result"]["grand_total"].as_f64().unwrap()
    );
}

#[test]
fn exit_codes_separate_error_classes() {
    // 2: usage.
    let out = run(&["cost"]);
    assert_eq!(out.status.code(), Some(2));
    // 3: missing file.
    let out = run(&["cost", "/no/such/file.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("error:"));

    let dir = tempfile::tempdir().unwrap();

    // 4: malformed TOML.
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = [unclosed").unwrap();
    let out = run(&["cost", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));

    // 5: valid TOML referencing an unknown node.
    let unknown = dir.path().join("unknown.toml");
    std::fs::write(
        &unknown,
        r#"
            name = "x"
            integration = "mcm"
            [[die]]
            name = "core"
            node = "3nm"
            area_mm2 = 100.0
        "#,
    )
    .unwrap();
    let out = run(&["cost", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr_of(&out).contains("3nm"));

    // 1: a model-level refusal (coarse bumps cannot land HBM).
    let infeasible = dir.path().join("infeasible.toml");
    std::fs::write(
        &infeasible,
        r#"
            name = "x"
            integration = "mcm"
            [[die]]
            name = "core"
            node = "7nm"
            area_mm2 = 100.0
            [hbm]
            stacks = 4
            footprint_mm2 = 39.95
        "#,
    )
    .unwrap();
    let out = run(&["cost", infeasible.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("pitch"));

    // Data never leaks onto stdout in error cases.
    assert!(stdout_of(&out).is_empty());
}

#[test]
fn sweep_cap_flag_refuses_oversized_grids() {
    let spec = configs().join("sweep_scaling.toml");
    let out = run(&[
        "sweep",
        spec.to_str().unwrap(),
        "--max-points",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("cap"));
}

#[test]
fn empty_study_spec_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let out = run(&["switchpoint", empty.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["result"]["rows"].as_array().unwrap().len(), 12);
}
