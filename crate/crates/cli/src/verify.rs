//! End-to-end checks for one sampling function.

use dmspec::{
    enumerate_orbits, gap_label, ids_estimate, periodic_bands, union_spectrum, IntegralityVerdict,
    SpectrumApprox,
};
use serde::{Deserialize, Serialize};

use crate::commands::{rotation_row, verdict_label};
use crate::config::RunConfig;
use crate::output::Tabular;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub continuous: bool,
    pub max_period: u32,
    pub checks: Vec<Check>,
}

impl Tabular for VerifyReport {
    type Row = Check;
    const HEADER: &'static [&'static str] = &["name", "passed", "detail"];

    fn rows(&self) -> Vec<Check> {
        self.checks.clone()
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

/// Agreement allowed between a rotation number and `1 - k`.
const IDENTITY_TOL: f64 = 0.03;

pub fn verify(config: &RunConfig) -> dmspec::Result<VerifyReport> {
    let f = &config.sampling;
    let c = &config.command;
    let continuous = f.is_continuous();
    let mut checks = Vec::new();

    // fixed point
    let f0 = f.eval(0.0);
    let fixed = &enumerate_orbits(1, config.base)?[0];
    let b = periodic_bands(fixed, f, c.tol)?;
    let err = (b[0].lo - (f0 - 2.0)).abs().max((b[0].hi - (f0 + 2.0)).abs());
    checks.push(check(
        "fixed_point_band",
        b.len() == 1 && err < 1e-8,
        format!("[{}, {}] vs [f(0)-2, f(0)+2], error {err:.2e}", b[0].lo, b[0].hi),
    ));

    let unions: Vec<SpectrumApprox> = (1..=c.max_period)
        .map(|p| union_spectrum(f, p, config.base, c.tol))
        .collect::<dmspec::Result<_>>()?;
    let last = unions.last().expect("max_period >= 1");

    if continuous {
        let uncovered: Vec<u32> = unions
            .iter()
            .filter(|s| !s.covers(f0 - 2.0, f0 + 2.0, 1e-6))
            .map(|s| s.max_period_used)
            .collect();
        checks.push(check(
            "containment",
            uncovered.is_empty(),
            format!("periods not covering [f(0)-2, f(0)+2]: {uncovered:?}"),
        ));
    }

    let not_nested: Vec<u32> = unions
        .windows(2)
        .filter(|w| !w[0].bands.iter().all(|b| w[1].covers(b.lo, b.hi, 10.0 * c.tol)))
        .map(|w| w[0].max_period_used)
        .collect();
    checks.push(check(
        "nested_unions",
        not_nested.is_empty(),
        format!("periods whose union is not contained in the next: {not_nested:?}"),
    ));

    let gaps = dmspec::gap_report(last);
    if continuous {
        let seq: Vec<f64> = unions
            .iter()
            .filter(|s| s.max_period_used % 2 == 0)
            .map(SpectrumApprox::max_gap_length)
            .collect();
        let nonincreasing = seq.windows(2).all(|w| w[1] <= w[0]);
        let max_gap = last.max_gap_length();
        checks.push(check(
            "connected",
            nonincreasing && max_gap < c.gap_threshold,
            format!(
                "max interior gap {max_gap:.3e} at period {} (threshold {}), even-period sequence {seq:?}",
                c.max_period, c.gap_threshold
            ),
        ));
    } else {
        let open: Vec<_> = gaps.iter().filter(|g| g.length >= c.gap_threshold).take(3).collect();
        if open.is_empty() {
            checks.push(check(
                "gap_labels",
                true,
                format!("no gap longer than {} at period {}", c.gap_threshold, c.max_period),
            ));
        }
        for g in open {
            let grid: Vec<f64> = (1..=40).map(|i| g.lo + g.length * i as f64 / 41.0).collect();
            let table = ids_estimate(f, &grid, c.truncation_size, c.samples, config.seed, config.base)?;
            let label = gap_label(&table, g.lo, g.hi)?;
            let mid = 0.5 * (g.lo + g.hi);
            let row = rotation_row(config, mid)?;
            let (passed, rot) = match row.value {
                Some(v) => (label.flat && (v - (1.0 - label.value)).abs() < IDENTITY_TOL, v),
                None => (false, f64::NAN),
            };
            checks.push(check(
                "gap_labels",
                passed,
                format!(
                    "disconnected: gap ({:.4}, {:.4}) label {:.4} (spread {:.4}), rotation at {mid:.4} = {rot:.4}, verdict {}",
                    g.lo,
                    g.hi,
                    label.value,
                    label.spread,
                    row.verdict.as_ref().map_or("none".into(), verdict_label)
                ),
            ));
        }
    }

    let hull = last.hull;
    let probe = [hull.lo - 0.1, hull.hi + 0.1];
    let table = ids_estimate(f, &probe, c.truncation_size, c.samples, config.seed, config.base)?;
    let tol = table.tolerance();
    checks.push(check(
        "ids_limits",
        table.k_values[0] <= tol && table.k_values[1] >= 1.0 - tol,
        format!(
            "k(hull.lo - 0.1) = {}, k(hull.hi + 0.1) = {}, tolerance {tol:.4}",
            table.k_values[0], table.k_values[1]
        ),
    ));

    for (e, want) in [(hull.lo - 0.5, 1), (hull.hi + 0.5, 0)] {
        let k = ids_estimate(f, &[e], c.truncation_size, c.samples, config.seed, config.base)?.k_values[0];
        let row = rotation_row(config, e)?;
        let passed = matches!(row.value, Some(v) if (v - (1.0 - k)).abs() < IDENTITY_TOL)
            && row.verdict == Some(IntegralityVerdict::Integer(want));
        checks.push(check(
            "gap_labelling_outside_hull",
            passed,
            format!(
                "E = {e:.4}: rotation {:?}, 1 - k = {:.4}, verdict {} (want integer {want})",
                row.value,
                1.0 - k,
                row.verdict.as_ref().map_or("none".into(), verdict_label)
            ),
        ));
    }

    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        continuous,
        max_period: c.max_period,
        checks,
    })
}
