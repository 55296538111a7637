//! Sweep a design grid and post-process the rows in code.
//!
//! Builds a sweep spec programmatically — the same shape the `sweep`
//! subcommand reads from TOML — runs it, and reduces the rows to one
//! question: across transistor budgets, which (die count, integration)
//! pair is cheapest? Rows that fail to evaluate carry their error inline
//! instead of aborting the grid.
//!
//! ```text
//! cargo run --example parameter_sweep
//! ```

use sipcost::explorer::{run_sweep, NodePair, SweepResult, SweepSpec};
use sipcost::sysmodel::IntegrationKind;
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let db = TechDatabase::bundled();

    let spec = SweepSpec {
        name: "budget-vs-splitting".to_string(),
        scale_tx_billions: vec![5.0, 10.0, 20.0, 50.0],
        io_fractions: vec![0.3],
        die_counts: vec![1, 2, 4, 8],
        node_pairs: vec![NodePair {
            core: "7nm".to_string(),
            io: Some("12nm".to_string()),
        }],
        integrations: vec![IntegrationKind::Mcm, IntegrationKind::Organic25D],
        scale_area_mm2: vec![],
        hbm: None,
        max_points: 1_000_000,
    };
    println!(
        "sweeping {} points ({} budgets x {} die counts x {} integrations)",
        spec.scale_tx_billions.len() * spec.die_counts.len() * spec.integrations.len(),
        spec.scale_tx_billions.len(),
        spec.die_counts.len(),
        spec.integrations.len()
    );

    let result = run_sweep(&spec, &db)?;

    println!();
    println!("cheapest configuration per transistor budget:");
    for &budget in &spec.scale_tx_billions {
        let best = result
            .rows
            .iter()
            .filter(|r| r.scale_tx_billions == Some(budget))
            .filter_map(|r| r.report.as_ref().map(|rep| (r, rep.grand_total)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((row, total)) => println!(
                "  {budget:>4.0}B: {} x {} core + {} i/o on {:<12} -> {total:.2}",
                row.die_count,
                row.core_node,
                row.io_node.as_deref().unwrap_or("-"),
                row.integration.to_string()
            ),
            None => println!("  {budget:>4.0}B: no feasible point"),
        }
    }

    let errors = result.rows.iter().filter(|r| r.error.is_some()).count();
    println!();
    println!(
        "{} of {} rows carried errors instead of reports",
        errors,
        result.rows.len()
    );

    // The full grid serializes to CSV for plotting; print the first rows.
    println!();
    println!("{}", SweepResult::csv_header().join(","));
    for row in result.csv_rows().iter().take(4) {
        println!("{}", row.join(","));
    }
    Ok(())
}
