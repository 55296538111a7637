//! Price one complete system and walk through the report.
//!
//! Builds a 2.5D package in code — two compute chiplets on an organic
//! interposer with four HBM stacks — evaluates it against the bundled
//! technology dataset, and prints both the rendered report and a few
//! numbers pulled out of the structured result.
//!
//! ```text
//! cargo run --example cost_report
//! ```

use sipcost::diecost::DieSpec;
use sipcost::sysmodel::{evaluate_system, HbmConfig, IntegrationKind, SystemDie, SystemSpec};
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let db = TechDatabase::bundled();

    let mut sys = SystemSpec::new(
        "compute-card",
        IntegrationKind::Organic25D,
        vec![SystemDie {
            spec: DieSpec::by_area("compute", "7nm", 150.0),
            count: 2,
        }],
    );
    sys.hbm = Some(HbmConfig {
        stacks: 4,
        footprint_mm2: 39.95,
        signal_bits: 1024,
        unit_price: 0.0,
    });

    let report = evaluate_system(&sys, &db)?;

    // The same report renders as text, JSON, or CSV rows; the text form
    // is what the CLI prints by default.
    print!("{}", report.render_text());

    println!();
    println!("pulled out of the structured report:");
    println!(
        "  the interposer itself is {:.1}% of the unpackaged cost",
        100.0 * report.interposer.yielded_cost / report.assembly.total
    );
    println!(
        "  assembly survives bonding with probability {:.4} (divisor on every unit)",
        report.assembly.bond_yield_divisor
    );
    let b = &report.breakdown;
    println!(
        "  integration overhead = interposer + bonding + bond-yield loss \
         = {:.1}% on top of the bare dies",
        100.0 * b.integration_overhead
    );
    println!(
        "  package substrate: {:.0} mm2, {} pins, {:.2} currency units{}",
        report.package.substrate_area_mm2,
        report.package.pin_count,
        report.package.cost,
        if report.package.extrapolated {
            " (outside the fitted sample hull)"
        } else {
            ""
        }
    );
    Ok(())
}
