//! What attaching HBM really costs, integration style by style.
//!
//! Runs the ready-made HBM study: a core die at three sizes, four HBM
//! stacks, priced under MCM, organic-interposer, and silicon-interposer
//! integration. MCM drops out — its coarse package bumps cannot land a
//! 1024-bit interface in the stack footprint — and the study quantifies
//! how the interposer premium shrinks as the silicon under it grows.
//!
//! ```text
//! cargo run --example hbm_overhead
//! ```

use sipcost::explorer::{case_study_hbm, HbmStudySpec};
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let db = TechDatabase::bundled();
    let spec = HbmStudySpec::default();
    let study = case_study_hbm(&spec, &db)?;

    // The rendered form is what the CLI prints.
    print!("{}", study.render_text());

    // The structured rows carry the full cost reports; pull the headline
    // overhead trend out directly.
    println!();
    println!("integration overhead on top of the bare compute dies:");
    for row in &study.rows {
        match &row.report {
            Some(report) => {
                let b = &report.breakdown;
                println!(
                    "  {:>4.0} mm2 on {:<13} {:>6.2}% overhead, of which {:>4.1}% is \
                     yield loss in bonding",
                    row.scale_area_mm2,
                    format!("{}:", row.integration),
                    100.0 * b.integration_overhead,
                    100.0 * b.bond_yield_loss / b.integration_overhead,
                );
            }
            None => {
                let why = row
                    .exclusion
                    .as_ref()
                    .map(|v| {
                        v.checks
                            .iter()
                            .filter(|c| !c.feasible)
                            .map(|c| {
                                format!(
                                    "{} needs {:.2} mm2 but has {:.2}",
                                    c.interface, c.required_mm2, c.available_mm2
                                )
                            })
                            .collect::<Vec<_>>()
                            .join("; ")
                    })
                    .unwrap_or_default();
                println!(
                    "  {:>4.0} mm2 on {:<13} infeasible — {why}",
                    row.scale_area_mm2,
                    format!("{}:", row.integration)
                );
            }
        }
    }
    Ok(())
}
