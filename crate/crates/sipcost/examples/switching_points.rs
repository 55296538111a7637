//! Where chiplets start beating a monolithic die, node by node.
//!
//! For each process node, grow a design until splitting it into chiplets
//! (one die per started 150 mm²) becomes cheaper than building it as one
//! die — bonding overhead and all. The crossing moves toward larger
//! designs on mature nodes, where defects are rarer and big dies still
//! yield tolerably.
//!
//! ```text
//! cargo run --example switching_points
//! ```

use sipcost::explorer::{
    find_switching_point, run_switch_study, PartitionRule, SwitchOutcome, SwitchStudySpec,
};
use sipcost::sysmodel::IntegrationKind;
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let db = TechDatabase::bundled();

    // The full study: every default node, MCM and organic integration.
    let study = run_switch_study(&SwitchStudySpec::default(), &db)?;
    print!("{}", study.render_text());

    // One search in isolation, with a custom partition rule: smaller
    // chiplets (100 mm2 max) under silicon-interposer integration.
    println!();
    let rule = PartitionRule {
        max_die_area_mm2: 100.0,
        ..PartitionRule::default()
    };
    let outcome =
        find_switching_point("7nm", IntegrationKind::Silicon25D, &rule, &db)?;
    match outcome {
        SwitchOutcome::Crossover {
            area_mm2,
            transistor_count_billions,
        } => println!(
            "7nm, silicon interposer, 100 mm2 chiplets: chiplets win past \
             {area_mm2:.0} mm2 (~{transistor_count_billions:.1}B transistors)"
        ),
        SwitchOutcome::ChipletAlwaysCheaper { lower_bound_mm2 } => println!(
            "7nm, silicon interposer: chiplets already cheaper at {lower_bound_mm2:.0} mm2"
        ),
        SwitchOutcome::MonolithicAlwaysCheaper { upper_bound_mm2 } => println!(
            "7nm, silicon interposer: monolithic still cheaper at {upper_bound_mm2:.0} mm2"
        ),
    }
    Ok(())
}
