//! The yield model and wafer dicing, from first principles.
//!
//! Shows how die yield falls with area under the negative binomial
//! model, how many dice a round wafer gives up as dice grow, and why
//! those two curves together make one big die cost much more than the
//! same silicon split into chiplets.
//!
//! ```text
//! cargo run --example yield_and_dicing
//! ```

use sipcost::diecost::die_cost_for_area;
use sipcost::yieldcore::{dies_per_round_wafer, negbin_yield};
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let db = TechDatabase::bundled();
    let node = db.node("7nm")?;
    let params = node.yield_params();

    println!(
        "7nm wafer: {:.0} currency/wafer, {} defects/cm2, clustering {}",
        node.wafer_cost, params.defect_density, params.clustering_alpha
    );
    println!();

    println!("{:>10}  {:>8}  {:>10}  {:>10}  {:>12}", "area mm2", "yield", "dice/wafer", "cost/die", "cost/good die");
    for area in [25.0, 50.0, 100.0, 200.0, 400.0, 800.0] {
        let y = negbin_yield(area, &params)?;
        let dice = dies_per_round_wafer(area, node.wafer_diameter)?;
        let cost = die_cost_for_area(area, node)?;
        println!(
            "{:>10}  {:>8.4}  {:>10}  {:>10.2}  {:>12.2}",
            area, y, dice, cost.unit_cost, cost.yielded_cost
        );
    }

    // Yield loss compounds superlinearly with area, so k smaller dice
    // beat one big one even before any other consideration.
    println!();
    println!("same 800 mm2 of silicon, split k ways (7nm):");
    let whole = die_cost_for_area(800.0, node)?.yielded_cost;
    for k in [1u32, 2, 4, 8] {
        let part = die_cost_for_area(800.0 / f64::from(k), node)?.yielded_cost;
        let total = part * f64::from(k);
        println!(
            "  k = {k}: {total:>9.2} per set ({:>5.1}% of the monolithic cost)",
            100.0 * total / whole
        );
    }

    // The same model prices organic panels; only the parameters change.
    println!();
    let panel = db.panel("organic-4layer")?;
    let y = negbin_yield(900.0, &panel.yield_params())?;
    println!(
        "a 900 mm2 interposer on the {} panel yields {:.4}",
        panel.name, y
    );
    Ok(())
}
