//! Bring your own technology numbers.
//!
//! Every cost this crate produces is relative to a technology dataset:
//! wafer prices, defect densities, panel costs, bump parameters, package
//! quotes. The bundled dataset is a plausible placeholder, not a price
//! list. This example derives a custom dataset from the bundled one —
//! a hypothetical mature 7nm with half the defect density — and shows
//! how the same system reprices, then prints the TOML skeleton to start
//! a dataset of your own.
//!
//! ```text
//! cargo run --example custom_dataset
//! ```

use sipcost::diecost::DieSpec;
use sipcost::sysmodel::{evaluate_system, IntegrationKind, SystemDie, SystemSpec};
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let baseline = TechDatabase::bundled();

    // Datasets are plain TOML: edit a copy of the bundled one rather
    // than starting from nothing. The CLI takes the same file via
    // `--dataset` (or the SIPCOST_DATASET environment variable).
    let mut doc = baseline.dataset().clone();
    doc.dataset.version = "mature-7nm-demo".to_string();
    for node in &mut doc.nodes {
        if node.name == "7nm" {
            node.defect_density /= 2.0;
        }
    }
    let matured = TechDatabase::from_dataset(doc, "in-memory demo")?;

    let sys = SystemSpec::new(
        "big-die",
        IntegrationKind::Mcm,
        vec![SystemDie {
            spec: DieSpec::by_area("soc", "7nm", 600.0),
            count: 1,
        }],
    );

    let before = evaluate_system(&sys, &baseline)?;
    let after = evaluate_system(&sys, &matured)?;
    println!(
        "600 mm2 monolithic 7nm die, bundled dataset ({}):",
        baseline.version()
    );
    println!(
        "  yield {:.4}, grand total {:.2}",
        before.dies[0].yield_fraction, before.grand_total
    );
    println!("same die after halving 7nm defect density ({}):", matured.version());
    println!(
        "  yield {:.4}, grand total {:.2}  ({:+.1}%)",
        after.dies[0].yield_fraction,
        after.grand_total,
        100.0 * (after.grand_total / before.grand_total - 1.0)
    );

    // A minimal dataset needs one node, one bump, and one package class
    // with at least three quote samples; panels only matter for organic
    // interposers. The bundled file documents every field.
    println!();
    println!("--- bundled dataset, first lines, as a starting point ---");
    for line in TechDatabase::bundled_toml().lines().take(18) {
        println!("{line}");
    }
    Ok(())
}
