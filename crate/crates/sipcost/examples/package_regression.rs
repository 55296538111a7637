//! Fit and use a package cost plane.
//!
//! Package substrates are priced by a plane — cost per mm² of substrate
//! plus cost per pin plus a floor — fitted by least squares to sampled
//! quotes for one package class. This example fits both bundled classes,
//! prints the coefficients, and prices a few points, including one far
//! enough outside the sample cloud to trip the extrapolation flag.
//!
//! ```text
//! cargo run --example package_regression
//! ```

use sipcost::package::{fit_package_regression, package_cost, residuals};
use sipcost::TechDatabase;

fn main() -> sipcost::Result<()> {
    let db = TechDatabase::bundled();

    for class_name in db.package_class_names() {
        let class = db.package_class(&class_name)?;
        let reg = fit_package_regression(class)?;
        println!(
            "{}: cost = {:.4}·area + {:.4}·pins + {:.2}   (r2 = {:.4}, {} samples)",
            class.name,
            reg.mu0,
            reg.mu1,
            reg.mu2,
            reg.r_squared,
            class.samples.len()
        );
        let res = residuals(&reg, &class.samples);
        let worst = res.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        println!("  residuals: worst |r| = {worst:.3}");
    }

    // Price a few substrate demands against the finer-pitch class.
    let class = db.package_class_names().into_iter().next().unwrap();
    let reg = fit_package_regression(db.package_class(&class)?)?;
    println!();
    println!("pricing against `{class}`:");
    for (area, pins) in [(500.0, 1800_u64), (1000.0, 3800), (8000.0, 6000)] {
        let p = package_cost(&reg, area, pins)?;
        println!(
            "  {area:>6.0} mm2, {pins:>5} pins -> {:>8.2}{}",
            p.cost,
            if p.extrapolated {
                "  (extrapolated beyond the fitted samples)"
            } else {
                ""
            }
        );
    }
    Ok(())
}
