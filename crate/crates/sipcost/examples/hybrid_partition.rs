//! Splitting a big SoC into chiplets with I/O on a cheaper node.
//!
//! I/O circuitry stopped shrinking around the 16 nm generation, so
//! spending leading-edge wafers on it is wasted money. The hybrid study
//! compares a monolithic die against partitions that keep the logic on
//! a fine node and move the I/O onto a mature one, across logic budgets,
//! I/O fractions, and chiplet counts.
//!
//! ```text
//! cargo run --example hybrid_partition
//! ```

use sipcost::explorer::{case_study_hybrid, HybridStudySpec};
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let db = TechDatabase::bundled();
    let spec = HybridStudySpec::default();
    println!(
        "logic on {}, i/o on {}, {} integration",
        spec.core_node, spec.io_node, spec.integration
    );
    println!();

    let study = case_study_hybrid(&spec, &db)?;
    print!("{}", study.render_text());

    println!();
    println!("cheapest configuration per design point:");
    for row in &study.rows {
        println!(
            "  {:>4.0}B transistors, {:.0}% i/o: {} core chiplet(s) + mature i/o die \
             saves {:.1}% vs the monolithic fine-node die",
            row.core_tx_billions,
            100.0 * row.io_fraction,
            row.best_count,
            100.0 * row.improvement_vs_fine
        );
    }
    Ok(())
}
