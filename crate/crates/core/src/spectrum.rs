//! Periodic band spectra and their union over all periodic orbits of the
//! map, which approximates the almost-sure spectrum from inside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{discriminant_of, orbit_potential};
use crate::dynamics::{enumerate_orbits, PeriodicOrbit};
use crate::sampling::SamplingFunction;
use crate::tridiag;
use crate::{Error, Result};

/// Closed energy interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("band [{lo}, {hi}] has lo > hi")));
        }
        Ok(Band { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, energy: f64) -> bool {
        self.lo <= energy && energy <= self.hi
    }
}

/// Open interval between two consecutive merged bands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    pub length: f64,
    /// Shorter than 100·tol, so possibly a bisection artifact.
    pub below_resolution: bool,
}

/// Sorted, merged union of bands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumApprox {
    pub bands: Vec<Band>,
    pub max_period_used: u32,
    pub gaps: Vec<Gap>,
    pub hull: Band,
    pub tol: f64,
}

impl SpectrumApprox {
    /// Merges `bands` (any order) with touching tolerance `10·tol`.
    pub fn from_bands(mut bands: Vec<Band>, max_period_used: u32, tol: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidParameter("no bands to merge".into()));
        }
        bands.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let merge_tol = 10.0 * tol;
        let mut merged: Vec<Band> = Vec::with_capacity(bands.len());
        for b in bands {
            match merged.last_mut() {
                Some(last) if b.lo <= last.hi + merge_tol => last.hi = last.hi.max(b.hi),
                _ => merged.push(b),
            }
        }
        let gaps = merged
            .windows(2)
            .map(|w| {
                let length = w[1].lo - w[0].hi;
                Gap {
                    lo: w[0].hi,
                    hi: w[1].lo,
                    length,
                    below_resolution: length < 100.0 * tol,
                }
            })
            .collect();
        let hull = Band {
            lo: merged[0].lo,
            hi: merged[merged.len() - 1].hi,
        };
        Ok(SpectrumApprox {
            bands: merged,
            max_period_used,
            gaps,
            hull,
            tol,
        })
    }

    pub fn contains(&self, energy: f64) -> bool {
        let i = self.bands.partition_point(|b| b.hi < energy);
        i < self.bands.len() && self.bands[i].contains(energy)
    }

    /// Distance from `energy` to the band union (0 inside).
    pub fn distance(&self, energy: f64) -> f64 {
        self.bands
            .iter()
            .map(|b| (b.lo - energy).max(energy - b.hi).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `[lo, hi]` lies inside a single merged band, allowing `slack`
    /// at each end.
    pub fn covers(&self, lo: f64, hi: f64, slack: f64) -> bool {
        self.bands
            .iter()
            .any(|b| b.lo <= lo + slack && hi - slack <= b.hi)
    }

    /// Length of the longest interior gap, 0 for a single interval.
    pub fn max_gap_length(&self) -> f64 {
        self.gaps.iter().map(|g| g.length).fold(0.0, f64::max)
    }
}

/// Bisects between `inside` (where `g <= 0`) and `outside` until the bracket
/// is shorter than `tol`; returns the last point known to satisfy `g <= 0`.
fn bisect_edge(mut inside: f64, mut outside: f64, tol: f64, g: impl Fn(f64) -> f64) -> f64 {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if g(mid) <= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Bands of the periodic operator with one period of potential `v`.
///
/// The `p - 1` Dirichlet eigenvalues of `diag(v_1, ..., v_{p-1})` each lie in
/// the closure of a distinct gap, so they cut the line into `p` intervals
/// holding exactly one band each. Inside an interval the discriminant has a
/// single zero, and the two edges are where `|Δ| - 2` changes sign on either
/// side of it.
pub(crate) fn bands_of_potential(v: &[f64], tol: f64, label: &str) -> Result<Vec<Band>> {
    let fail = |detail: String| Error::RootBracketingFailure {
        orbit: label.to_string(),
        detail,
    };
    let p = v.len();
    let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let outer = 2.0 + vmax + 1.0;
    let mut cuts = vec![-outer];
    cuts.extend(tridiag::eigenvalues(&v[1..], (tol * 1e-3).max(1e-15 * outer)));
    cuts.push(outer);

    let disc = |e: f64| discriminant_of(v, e);
    let g = |e: f64| disc(e).abs() - 2.0;

    let mut bands = Vec::with_capacity(p);
    for (j, w) in cuts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let (da, db) = (disc(a), disc(b));
        if !(da * db < 0.0) {
            return Err(fail(format!(
                "discriminant has no sign change on [{a}, {b}] (values {da}, {db}); \
                 brackets were the Dirichlet eigenvalues with outer bounds ±{outer}"
            )));
        }
        // zero of Δ, which sits inside band j
        let (mut lo, mut hi) = (a, b);
        while hi - lo > tol * 1e-3 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if disc(mid) * da > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let zero = 0.5 * (lo + hi);
        let edge_lo = bisect_edge(zero, a, tol, g);
        let edge_hi = bisect_edge(zero, b, tol, g);
        if !(edge_lo <= edge_hi) {
            return Err(fail(format!("band {j}: edges {edge_lo} > {edge_hi}")));
        }
        bands.push(Band {
            lo: edge_lo,
            hi: edge_hi,
        });
    }
    Ok(bands)
}

/// Closure of `{E : |Δ(E)| <= 2}` for one periodic orbit, as `p` closed bands
/// in increasing order. Bands separated by a closed gap are returned
/// separately and touch.
pub fn periodic_bands(orbit: &PeriodicOrbit, f: &SamplingFunction, tol: f64) -> Result<Vec<Band>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    bands_of_potential(&orbit_potential(orbit, f), tol, &orbit.label())
}

/// Bands of every orbit with period at most `max_period`, in orbit order.
pub fn orbit_bands(
    f: &SamplingFunction,
    max_period: u32,
    base: u32,
    tol: f64,
) -> Result<Vec<(PeriodicOrbit, Vec<Band>)>> {
    if max_period == 0 {
        return Err(Error::InvalidParameter("max_period must be >= 1".into()));
    }
    let orbits = enumerate_orbits(max_period, base)?;
    orbits
        .into_par_iter()
        .map(|o| periodic_bands(&o, f, tol).map(|b| (o, b)))
        .collect()
}

/// Union of periodic spectra over all orbits of period at most `max_period`.
pub fn union_spectrum(
    f: &SamplingFunction,
    max_period: u32,
    base: u32,
    tol: f64,
) -> Result<SpectrumApprox> {
    let per_orbit = orbit_bands(f, max_period, base, tol)?;
    let bands = per_orbit.into_iter().flat_map(|(_, b)| b).collect();
    SpectrumApprox::from_bands(bands, max_period, tol)
}

/// Interior gaps, longest first.
pub fn gap_report(s: &SpectrumApprox) -> Vec<Gap> {
    let mut gaps = s.gaps.clone();
    gaps.sort_by(|a, b| b.length.total_cmp(&a.length).then(a.lo.total_cmp(&b.lo)));
    gaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, SymmetricEigen};

    const TOL: f64 = 1e-12;

    /// Eigenvalues of the p×p periodic (`sign = 1`) or antiperiodic
    /// (`sign = -1`) Jacobi matrix.
    fn bloch_eigenvalues(v: &[f64], sign: f64) -> Vec<f64> {
        let p = v.len();
        let mut m = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            m[(i, i)] = v[i];
        }
        if p == 1 {
            m[(0, 0)] += 2.0 * sign;
        } else {
            for i in 0..p - 1 {
                m[(i, i + 1)] += 1.0;
                m[(i + 1, i)] += 1.0;
            }
            m[(0, p - 1)] += sign;
            m[(p - 1, 0)] += sign;
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn edge_oracle(v: &[f64]) -> Vec<f64> {
        let mut all = bloch_eigenvalues(v, 1.0);
        all.extend(bloch_eigenvalues(v, -1.0));
        all.sort_by(f64::total_cmp);
        all
    }

    #[test]
    fn fixed_point_band() {
        let orbit = &enumerate_orbits(1, 2).unwrap()[0];
        for c in [0.0, 1.5, -3.0] {
            let b = periodic_bands(orbit, &SamplingFunction::constant(c), TOL).unwrap();
            assert_eq!(b.len(), 1);
            assert_abs_diff_eq!(b[0].lo, c - 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(b[0].hi, c + 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn period_two_cosine_is_shifted_free_band() {
        let orbit = &enumerate_orbits(2, 2).unwrap()[1];
        let b = periodic_bands(orbit, &SamplingFunction::cosine(1.0), TOL).unwrap();
        // V ≡ -1: the gap between the two bands is closed
        let s = SpectrumApprox::from_bands(b, 2, TOL).unwrap();
        assert_eq!(s.bands.len(), 1);
        assert_abs_diff_eq!(s.hull.lo, -3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.hull.hi, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn band_edges_match_bloch_oracle() {
        let fs = [
            SamplingFunction::cosine(1.0),
            SamplingFunction::cosine(0.5),
            SamplingFunction::bernoulli(5.0),
            SamplingFunction::trig_poly(0.3, vec![0.8, -0.4], vec![0.6]).unwrap(),
        ];
        for f in &fs {
            for orbit in enumerate_orbits(9, 2).unwrap() {
                let v = orbit_potential(&orbit, f);
                let bands = periodic_bands(&orbit, f, TOL).unwrap();
                assert_eq!(bands.len(), orbit.period() as usize);
                let edges: Vec<f64> = bands.iter().flat_map(|b| [b.lo, b.hi]).collect();
                let oracle = edge_oracle(&v);
                for (x, y) in edges.iter().zip(&oracle) {
                    assert!((x - y).abs() < 1e-7, "{}: {x} vs {y}", orbit.label());
                }
            }
        }
    }

    #[test]
    fn free_union_is_one_band() {
        for p in 1..=7 {
            let s = union_spectrum(&SamplingFunction::constant(0.0), p, 2, 1e-10).unwrap();
            assert_eq!(s.bands.len(), 1, "p={p}: {:?}", s.bands);
            assert_abs_diff_eq!(s.hull.lo, -2.0, epsilon = 1e-8);
            assert_abs_diff_eq!(s.hull.hi, 2.0, epsilon = 1e-8);
            assert!(gap_report(&s).is_empty());
        }
    }

    #[test]
    fn bernoulli_small_orbits() {
        let f = SamplingFunction::bernoulli(5.0);
        let s = union_spectrum(&f, 1, 2, 1e-10).unwrap();
        assert_eq!(s.bands.len(), 1);
        assert_abs_diff_eq!(s.hull.lo, 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.hull.hi, 7.0, epsilon = 1e-8);

        // {1/3, 2/3} samples (5, 0): Δ = E(E-5) - 2
        let orbit = &enumerate_orbits(2, 2).unwrap()[1];
        assert_eq!(orbit_potential(orbit, &f), vec![5.0, 0.0]);
        let b = periodic_bands(orbit, &f, 1e-12).unwrap();
        let r = |c: f64| (5.0 + (25.0 + 4.0 * c).sqrt()) / 2.0;
        let roots = [5.0 - r(4.0), 5.0 - r(0.0), r(0.0), r(4.0)];
        for (x, y) in [b[0].lo, b[0].hi, b[1].lo, b[1].hi].iter().zip(roots) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn gap_report_orders_by_length() {
        let s = SpectrumApprox::from_bands(
            vec![
                Band::new(3.0, 7.0).unwrap(),
                Band::new(-2.0, 2.0).unwrap(),
                Band::new(8.0, 9.0).unwrap(),
            ],
            1,
            1e-10,
        )
        .unwrap();
        let g = gap_report(&s);
        assert_eq!(g.len(), 2);
        assert_eq!((g[0].lo, g[0].hi, g[0].length), (2.0, 3.0, 1.0));
        assert_eq!((g[1].lo, g[1].hi), (7.0, 8.0));

        let one = SpectrumApprox::from_bands(vec![Band::new(0.0, 1.0).unwrap()], 1, 1e-10).unwrap();
        assert!(gap_report(&one).is_empty());
    }

    #[test]
    fn merging_and_resolution_flags() {
        let tol = 1e-6;
        let s = SpectrumApprox::from_bands(
            vec![
                Band::new(0.0, 1.0).unwrap(),
                Band::new(1.0 + 5e-6, 2.0).unwrap(),
                Band::new(2.0 + 5e-5, 3.0).unwrap(),
                Band::new(4.0, 5.0).unwrap(),
            ],
            1,
            tol,
        )
        .unwrap();
        assert_eq!(s.bands.len(), 3);
        assert!(s.gaps[0].below_resolution);
        assert!(!s.gaps[1].below_resolution);
        assert!(s.contains(0.5) && !s.contains(3.5) && s.contains(5.0));
        assert_abs_diff_eq!(s.distance(3.5), 0.5, epsilon = 1e-12);
        assert!(Band::new(1.0, 0.0).is_err());
    }

    #[test]
    fn cosine_union_contains_fixed_point_band() {
        let f = SamplingFunction::cosine(0.5);
        let s = union_spectrum(&f, 10, 2, 1e-10).unwrap();
        assert!(s.covers(-1.0, 3.0, 1e-6));
        assert_eq!(s.max_period_used, 10);
    }

    #[test]
    fn union_is_monotone_in_period() {
        let f = SamplingFunction::bernoulli(2.0);
        let mut prev = union_spectrum(&f, 1, 2, 1e-10).unwrap();
        for p in 2..=8 {
            let next = union_spectrum(&f, p, 2, 1e-10).unwrap();
            for b in &prev.bands {
                assert!(next.covers(b.lo, b.hi, 1e-9), "p={p}: {b:?}");
            }
            prev = next;
        }
    }

    #[test]
    fn rejects_bad_input() {
        let orbit = &enumerate_orbits(1, 2).unwrap()[0];
        assert!(periodic_bands(orbit, &SamplingFunction::constant(0.0), 0.0).is_err());
        assert!(union_spectrum(&SamplingFunction::constant(0.0), 0, 2, 1e-9).is_err());
        assert!(matches!(
            union_spectrum(&SamplingFunction::constant(0.0), 127, 2, 1e-9),
            Err(Error::CapacityExceeded { .. })
        ));
    }
}
