//! Package substrate cost: a per-class linear model
//! `cost = µ0·area + µ1·pins + µ2` fitted from the class's sampled
//! quotes, plus the translation from a system's footprint and signal
//! count to substrate area and pin count.
//!
//! The fit is ordinary least squares on the 3-parameter plane. To keep
//! the normal equations well conditioned with mm²/pin magnitudes in the
//! thousands, regressors are centered and scaled before the solve and
//! the coefficients mapped back afterwards; results are deterministic.

use serde::Serialize;

use crate::error::Error;
use crate::techdb::{PackageClass, PackageSample};
use crate::Result;

/// Fitted package cost plane for one substrate class.
#[derive(Debug, Clone, Serialize)]
pub struct PackageRegression {
    /// Currency per mm² of substrate.
    pub mu0: f64,
    /// Currency per pin.
    pub mu1: f64,
    /// Intercept, currency.
    pub mu2: f64,
    /// Goodness of fit on the class samples.
    pub r_squared: f64,
    /// Name of the class the fit came from; evaluation refuses nothing
    /// by itself, but reports carry this so cross-class mistakes show.
    pub source_class: String,
    /// Convex hull of the (area, pins) sample points, for extrapolation
    /// flagging.
    #[serde(skip)]
    hull: Vec<(f64, f64)>,
}

/// A package cost plus whether it was an extrapolation beyond the
/// fitted sample hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PackageCost {
    pub cost: f64,
    /// True when the queried (area, pins) point lies outside the convex
    /// hull of the fitted samples. The value is still the plane's —
    /// never clamped — but deserves less trust.
    pub extrapolated: bool,
}

/// Substrate area and pin count demanded by a system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubstrateDemand {
    pub substrate_area_mm2: f64,
    pub pin_count: u64,
}

/// Fit the cost plane for a package class by ordinary least squares.
pub fn fit_package_regression(class: &PackageClass) -> Result<PackageRegression> {
    let samples = &class.samples;
    if samples.len() < 3 {
        return Err(Error::Validation {
            record: format!("package_class `{}`", class.name),
            field: "samples".to_string(),
            reason: format!("regression needs >= 3 sample points, got {}", samples.len()),
        });
    }
    let n = samples.len() as f64;

    // Center and scale the regressors so the 3×3 solve is far from the
    // raw data's conditioning.
    let mean_a = samples.iter().map(|s| s.area).sum::<f64>() / n;
    let mean_p = samples.iter().map(|s| s.pins as f64).sum::<f64>() / n;
    let scale_of = |spread: f64| if spread > 0.0 { spread } else { 1.0 };
    let scale_a = scale_of(
        samples
            .iter()
            .map(|s| (s.area - mean_a).abs())
            .fold(0.0, f64::max),
    );
    let scale_p = scale_of(
        samples
            .iter()
            .map(|s| (s.pins as f64 - mean_p).abs())
            .fold(0.0, f64::max),
    );

    // Normal equations M β = v over rows [1, a', p'].
    let mut m = [[0.0f64; 3]; 3];
    let mut v = [0.0f64; 3];
    for s in samples {
        let row = [
            1.0,
            (s.area - mean_a) / scale_a,
            (s.pins as f64 - mean_p) / scale_p,
        ];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            v[i] += row[i] * s.cost;
        }
    }
    let beta = solve_3x3(m, v).ok_or_else(|| Error::Domain {
        operation: "fit_package_regression",
        reason: format!(
            "sample points of package_class `{}` are collinear; the plane fit is rank-deficient",
            class.name
        ),
    })?;

    // Map back to the unscaled plane.
    let mu0 = beta[1] / scale_a;
    let mu1 = beta[2] / scale_p;
    let mu2 = beta[0] - mu0 * mean_a - mu1 * mean_p;

    let mean_y = samples.iter().map(|s| s.cost).sum::<f64>() / n;
    let ss_tot: f64 = samples.iter().map(|s| (s.cost - mean_y).powi(2)).sum();
    let ss_res: f64 = samples
        .iter()
        .map(|s| (s.cost - (mu0 * s.area + mu1 * s.pins as f64 + mu2)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= 1e-18 {
        1.0
    } else {
        0.0
    };

    let hull = convex_hull(samples.iter().map(|s| (s.area, s.pins as f64)).collect());
    Ok(PackageRegression {
        mu0,
        mu1,
        mu2,
        r_squared,
        source_class: class.name.clone(),
        hull,
    })
}

/// Evaluate the fitted plane at a (substrate area, pin count) point.
pub fn package_cost(
    reg: &PackageRegression,
    substrate_area_mm2: f64,
    pin_count: u64,
) -> Result<PackageCost> {
    if !(substrate_area_mm2 > 0.0) {
        return Err(Error::Domain {
            operation: "package_cost",
            reason: format!("substrate area must be > 0, got {substrate_area_mm2}"),
        });
    }
    if pin_count == 0 {
        return Err(Error::Domain {
            operation: "package_cost",
            reason: "pin count must be > 0".to_string(),
        });
    }
    let pins = pin_count as f64;
    let cost = reg.mu0 * substrate_area_mm2 + reg.mu1 * pins + reg.mu2;
    let extrapolated = !inside_hull(&reg.hull, (substrate_area_mm2, pins));
    Ok(PackageCost { cost, extrapolated })
}

/// Translate a system footprint and signal count into the substrate the
/// package must provide: area grows by the fan-out factor, pins add a
/// power/ground allocation on top of the signals.
pub fn substrate_requirements(
    footprint_mm2: f64,
    package_fanout: f64,
    signal_pins: u64,
    power_ground_ratio: f64,
) -> Result<SubstrateDemand> {
    if !(footprint_mm2 > 0.0) {
        return Err(Error::Domain {
            operation: "substrate_requirements",
            reason: format!("footprint must be > 0, got {footprint_mm2}"),
        });
    }
    if !(package_fanout >= 1.0) {
        return Err(Error::Domain {
            operation: "substrate_requirements",
            reason: format!("package fan-out must be >= 1, got {package_fanout}"),
        });
    }
    if signal_pins == 0 {
        return Err(Error::Domain {
            operation: "substrate_requirements",
            reason: "system exposes no external signals; pin count would be zero".to_string(),
        });
    }
    if !(power_ground_ratio >= 0.0) {
        return Err(Error::Domain {
            operation: "substrate_requirements",
            reason: format!("power/ground ratio must be >= 0, got {power_ground_ratio}"),
        });
    }
    let pin_count = (signal_pins as f64 * (1.0 + power_ground_ratio)).ceil() as u64;
    Ok(SubstrateDemand {
        substrate_area_mm2: footprint_mm2 * package_fanout,
        pin_count,
    })
}

/// Residuals of a fit against its class samples, for diagnostics and
/// the orthogonality tests.
pub fn residuals(reg: &PackageRegression, samples: &[PackageSample]) -> Vec<f64> {
    samples
        .iter()
        .map(|s| s.cost - (reg.mu0 * s.area + reg.mu1 * s.pins as f64 + reg.mu2))
        .collect()
}

/// Solve a 3×3 system by Gaussian elimination with partial pivoting.
/// Returns None when a pivot falls below the relative rank tolerance.
fn solve_3x3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    const RANK_TOL: f64 = 1e-10;
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1e-300);
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot_row][col].abs() <= RANK_TOL * scale {
            return None;
        }
        if pivot_row != col {
            m.swap(col, pivot_row);
            v.swap(col, pivot_row);
        }
        for row in (col + 1)..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            v[row] -= factor * v[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = v[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Convex hull (counter-clockwise) via the monotone chain; duplicates
/// collapse, collinear boundary points drop out.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let chain =
        |iter: &mut dyn Iterator<Item = (f64, f64)>| -> Vec<(f64, f64)> {
            let mut out: Vec<(f64, f64)> = Vec::new();
            for p in iter {
                while out.len() >= 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= 0.0 {
                    out.pop();
                }
                out.push(p);
            }
            out.pop();
            out
        };
    let mut hull = chain(&mut pts.iter().copied());
    hull.extend(chain(&mut pts.iter().rev().copied()));
    hull
}

/// Point-in-convex-polygon, boundary inclusive (within a relative eps).
fn inside_hull(hull: &[(f64, f64)], p: (f64, f64)) -> bool {
    if hull.len() < 3 {
        return false;
    }
    let extent = hull
        .iter()
        .fold(0.0f64, |acc, &(x, y)| acc.max(x.abs()).max(y.abs()))
        .max(1.0);
    let eps = 1e-9 * extent * extent;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if cross < -eps {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(name: &str, samples: Vec<PackageSample>) -> PackageClass {
        PackageClass {
            name: name.to_string(),
            core_layers: 2,
            buildup_layers: 5,
            samples,
            provenance: None,
        }
    }

    fn sample(area: f64, pins: u64, cost: f64) -> PackageSample {
        PackageSample { area, pins, cost }
    }

    fn planar_samples(mu: (f64, f64, f64), noise: &[f64]) -> Vec<PackageSample> {
        let points: [(f64, u64); 8] = [
            (100.0, 400),
            (200.0, 800),
            (400.0, 1200),
            (600.0, 2500),
            (900.0, 3600),
            (1200.0, 4400),
            (1600.0, 5200),
            (2000.0, 6000),
        ];
        points
            .iter()
            .enumerate()
            .map(|(i, &(a, p))| {
                let e = noise.get(i % noise.len().max(1)).copied().unwrap_or(0.0);
                sample(a, p, mu.0 * a + mu.1 * p as f64 + mu.2 + e)
            })
            .collect()
    }

    #[test]
    fn exact_plane_is_recovered_to_machine_precision() {
        let mu = (0.02, 0.001, 1.5);
        let c = class("exact", planar_samples(mu, &[0.0]));
        let reg = fit_package_regression(&c).unwrap();
        assert!((reg.mu0 - mu.0).abs() < 1e-9, "mu0 = {}", reg.mu0);
        assert!((reg.mu1 - mu.1).abs() < 1e-9, "mu1 = {}", reg.mu1);
        assert!((reg.mu2 - mu.2).abs() < 1e-9, "mu2 = {}", reg.mu2);
        assert!((reg.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noisy_fit_stays_near_the_plane_with_r2_below_one() {
        let mu = (0.02, 0.001, 1.5);
        let eps = 0.05;
        let c = class("noisy", planar_samples(mu, &[eps, -eps]));
        let reg = fit_package_regression(&c).unwrap();
        assert!((reg.mu0 - mu.0).abs() < eps, "mu0 = {}", reg.mu0);
        assert!((reg.mu1 - mu.1).abs() < eps, "mu1 = {}", reg.mu1);
        assert!((reg.mu2 - mu.2).abs() < 10.0 * eps, "mu2 = {}", reg.mu2);
        assert!(reg.r_squared < 1.0);
        assert!(reg.r_squared > 0.9);
    }

    #[test]
    fn residuals_are_orthogonal_to_regressors() {
        let c = class("noisy", planar_samples((0.02, 0.001, 1.5), &[0.05, -0.03, 0.02]));
        let reg = fit_package_regression(&c).unwrap();
        let r = residuals(&reg, &c.samples);
        let sum: f64 = r.iter().sum();
        let dot_a: f64 = r.iter().zip(&c.samples).map(|(ri, s)| ri * s.area).sum();
        let dot_p: f64 = r
            .iter()
            .zip(&c.samples)
            .map(|(ri, s)| ri * s.pins as f64)
            .sum();
        assert!(sum.abs() < 1e-8, "Σr = {sum}");
        assert!(dot_a.abs() < 1e-8, "Σr·area = {dot_a}");
        assert!(dot_p.abs() < 1e-8, "Σr·pins = {dot_p}");
    }

    #[test]
    fn duplicate_points_do_not_break_rank() {
        // {P, P, Q, R} with three distinct non-collinear points fits.
        let c = class(
            "padded",
            vec![
                sample(100.0, 400, 2.0),
                sample(100.0, 400, 2.0),
                sample(200.0, 1200, 4.0),
                sample(500.0, 900, 5.5),
            ],
        );
        assert!(fit_package_regression(&c).is_ok());
    }

    #[test]
    fn collinear_samples_are_rejected() {
        let c = class(
            "line",
            vec![
                sample(100.0, 100, 2.0),
                sample(200.0, 200, 3.0),
                sample(300.0, 300, 4.0),
                sample(400.0, 400, 5.0),
            ],
        );
        match fit_package_regression(&c).unwrap_err() {
            Error::Domain { operation, .. } => assert_eq!(operation, "fit_package_regression"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn constant_plane_costs_the_intercept_everywhere() {
        let c = class(
            "flat",
            vec![
                sample(100.0, 400, 3.0),
                sample(200.0, 1200, 3.0),
                sample(500.0, 900, 3.0),
            ],
        );
        let reg = fit_package_regression(&c).unwrap();
        for (a, p) in [(1.0, 1), (1000.0, 5000)] {
            let r = package_cost(&reg, a, p).unwrap();
            assert!((r.cost - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn evaluation_oracle_and_pin_linearity() {
        let mu = (0.02, 0.001, 1.5);
        let reg = fit_package_regression(&class("exact", planar_samples(mu, &[0.0]))).unwrap();
        let r = package_cost(&reg, 1000.0, 2000).unwrap();
        assert!((r.cost - 23.5).abs() < 1e-9, "cost = {}", r.cost);
        // Cost difference at equal area is exactly µ1·ΔN.
        let r2 = package_cost(&reg, 1000.0, 3500).unwrap();
        assert!((r2.cost - r.cost - reg.mu1 * 1500.0).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_is_flagged_but_not_clamped() {
        let mu = (0.02, 0.001, 1.5);
        let reg = fit_package_regression(&class("exact", planar_samples(mu, &[0.0]))).unwrap();
        // Centroid of the samples: interior.
        let inside = package_cost(&reg, 800.0, 3000).unwrap();
        assert!(!inside.extrapolated);
        // A sample point itself: boundary counts as inside.
        let boundary = package_cost(&reg, 100.0, 400).unwrap();
        assert!(!boundary.extrapolated);
        // Far outside on both axes: flagged, value still linear.
        let outside = package_cost(&reg, 5000.0, 20000).unwrap();
        assert!(outside.extrapolated);
        let expected = mu.0 * 5000.0 + mu.1 * 20000.0 + mu.2;
        assert!((outside.cost - expected).abs() < 1e-6);
    }

    #[test]
    fn nonpositive_evaluation_inputs_are_rejected() {
        let reg =
            fit_package_regression(&class("exact", planar_samples((0.02, 0.001, 1.5), &[0.0])))
                .unwrap();
        assert!(package_cost(&reg, 0.0, 100).is_err());
        assert!(package_cost(&reg, 100.0, 0).is_err());
    }

    #[test]
    fn substrate_requirements_oracle() {
        let d = substrate_requirements(100.0, 1.0, 500, 1.0).unwrap();
        assert_eq!(d.substrate_area_mm2, 100.0);
        assert_eq!(d.pin_count, 1000);
    }

    #[test]
    fn substrate_requirements_rejects_degenerate_systems() {
        assert!(substrate_requirements(0.0, 1.0, 500, 1.0).is_err());
        assert!(substrate_requirements(100.0, 0.9, 500, 1.0).is_err());
        assert!(substrate_requirements(100.0, 1.2, 0, 1.0).is_err());
    }

    #[test]
    fn pin_count_monotone_in_die_count() {
        let pins_for = |dies: u64| {
            substrate_requirements(100.0 * dies as f64, 1.2, 200 * dies, 1.0)
                .unwrap()
                .pin_count
        };
        assert!(pins_for(1) < pins_for(2));
        assert!(pins_for(2) < pins_for(4));
    }

    #[test]
    fn bundled_classes_keep_their_cost_ordering() {
        // More build-up layers must never be cheaper at equal demand.
        let db = crate::techdb::TechDatabase::bundled();
        let five = fit_package_regression(db.package_class("fcbga-2c5b").unwrap()).unwrap();
        let nine = fit_package_regression(db.package_class("fcbga-2c9b").unwrap()).unwrap();
        for (a, p) in [(150.0, 500), (600.0, 2500), (1200.0, 4400), (1900.0, 5900)] {
            let c5 = package_cost(&five, a, p).unwrap().cost;
            let c9 = package_cost(&nine, a, p).unwrap().cost;
            assert!(c9 >= c5, "at ({a}, {p}): {c9} < {c5}");
        }
        assert!(five.r_squared > 0.99);
        assert!(nine.r_squared > 0.99);
    }
}
