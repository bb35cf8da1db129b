//! Integrated density of states by Sturm counting on finite truncations,
//! averaged over random starting points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::OrbitPoint;
use crate::sampling::{Potential, SamplingFunction};
use crate::spectrum::Band;
use crate::tridiag::sturm_count;
use crate::{Error, Result};

/// Eigenvalues `<= energy` of the Dirichlet truncation with diagonal
/// `potential` and unit off-diagonal.
pub fn eigen_count(potential: &Potential, energy: f64) -> usize {
    sturm_count(potential.values(), energy)
}

/// Monte Carlo error model `3/√(M·N) + 2/N`.
pub fn mc_tolerance(truncation_size: usize, sample_count: usize) -> f64 {
    3.0 / ((truncation_size * sample_count) as f64).sqrt() + 2.0 / truncation_size as f64
}

/// `points` evenly spaced energies over `[hull.lo - 1, hull.hi + 1]`.
pub fn default_grid(hull: &Band, points: usize) -> Vec<f64> {
    let (lo, hi) = (hull.lo - 1.0, hull.hi + 1.0);
    if points < 2 {
        return vec![0.5 * (lo + hi)];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

pub const DEFAULT_GRID_POINTS: usize = 2001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsTable {
    pub energies: Vec<f64>,
    pub k_values: Vec<f64>,
    pub truncation_size: usize,
    pub sample_count: usize,
    pub seed: u64,
}

impl IdsTable {
    pub fn tolerance(&self) -> f64 {
        mc_tolerance(self.truncation_size, self.sample_count)
    }

    /// `k` at the largest grid energy not exceeding `energy` (0 below the grid).
    pub fn value_at(&self, energy: f64) -> f64 {
        let i = self.energies.partition_point(|&e| e <= energy);
        if i == 0 {
            0.0
        } else {
            self.k_values[i - 1]
        }
    }
}

/// `k(E) ≈ (1/(M·N)) Σ_samples #{eigenvalues <= E}` on the truncations
/// `V(0), .., V(N-1)` started at `M` independent random points. All grid
/// energies share the same potentials, so the estimate is nondecreasing.
pub fn ids_estimate(
    f: &SamplingFunction,
    grid: &[f64],
    truncation_size: usize,
    sample_count: usize,
    seed: u64,
    base: u32,
) -> Result<IdsTable> {
    if truncation_size < 16 {
        return Err(Error::InvalidParameter(format!(
            "truncation size must be >= 16, got {truncation_size}"
        )));
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    if grid.is_empty() || grid.iter().any(|e| !e.is_finite()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "energy grid must be nonempty, finite and sorted".into(),
        ));
    }

    let per_sample: Vec<Vec<u32>> = (0..sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let v: Vec<f64> = OrbitPoint::random(base, seed, i)
                .forward_values(truncation_size)
                .into_iter()
                .map(|w| f.eval(w))
                .collect();
            grid.iter().map(|&e| sturm_count(&v, e) as u32).collect()
        })
        .collect();

    let mut totals = vec![0u64; grid.len()];
    for counts in &per_sample {
        for (t, &c) in totals.iter_mut().zip(counts) {
            *t += c as u64;
        }
    }
    let denom = (truncation_size * sample_count) as f64;
    Ok(IdsTable {
        energies: grid.to_vec(),
        k_values: totals.iter().map(|&t| t as f64 / denom).collect(),
        truncation_size,
        sample_count,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLabel {
    pub value: f64,
    /// `max k - min k` over grid points in the gap.
    pub spread: f64,
    /// Spread within three times the Monte Carlo tolerance.
    pub flat: bool,
    pub points: usize,
}

/// Mean of `k` over the grid energies strictly inside `(lo, hi)`.
pub fn gap_label(table: &IdsTable, lo: f64, hi: f64) -> Result<GapLabel> {
    let inside: Vec<f64> = table
        .energies
        .iter()
        .zip(&table.k_values)
        .filter(|(e, _)| lo < **e && **e < hi)
        .map(|(_, k)| *k)
        .collect();
    if inside.is_empty() {
        return Err(Error::EmptyGapGrid { lo, hi });
    }
    let value = inside.iter().sum::<f64>() / inside.len() as f64;
    let (mn, mx) = inside
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| (a.min(k), b.max(k)));
    let spread = mx - mn;
    Ok(GapLabel {
        value,
        spread,
        flat: spread <= 3.0 * table.tolerance(),
        points: inside.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::union_spectrum;
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_eigenvalues(v: &[f64], corner: f64) -> Vec<f64> {
        let n = v.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = v[i];
            if i + 1 < n {
                m[(i, i + 1)] = 1.0;
                m[(i + 1, i)] = 1.0;
            }
        }
        m[(0, n - 1)] += corner;
        m[(n - 1, 0)] += corner;
        SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
    }

    #[test]
    fn eigen_count_examples() {
        assert_eq!(eigen_count(&Potential::from_values(vec![0.0]), 1.0), 1);
        assert_eq!(eigen_count(&Potential::from_values(vec![0.0, 0.0]), 0.0), 1);
    }

    #[test]
    fn sturm_matches_dense_oracle() {
        for case in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(case);
            let n = if case < 10 { 8 } else { rng.gen_range(2..=64) };
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let ev = dense_eigenvalues(&v, 0.0);
            for _ in 0..50 {
                let e = rng.gen_range(-7.0..7.0);
                // keep clear of eigenvalues so the dense solver's roundoff
                // cannot flip the comparison
                if ev.iter().any(|x| (x - e).abs() < 1e-9) {
                    continue;
                }
                let dense = ev.iter().filter(|&&x| x <= e).count();
                assert_eq!(eigen_count(&Potential::from_values(v.clone()), e), dense);
            }
        }
    }

    #[test]
    fn free_ids() {
        let f = SamplingFunction::constant(0.0);
        let t = ids_estimate(&f, &[-3.0, 0.0, 2.5], 512, 64, 1, 2).unwrap();
        assert_eq!(t.k_values[0], 0.0);
        assert!((t.k_values[1] - 0.5).abs() < 0.02);
        assert_eq!(t.k_values[2], 1.0);
    }

    #[test]
    fn free_ids_matches_arccos() {
        let f = SamplingFunction::constant(0.0);
        let grid: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
        let t = ids_estimate(&f, &grid, 256, 4, 3, 2).unwrap();
        for (e, k) in grid.iter().zip(&t.k_values) {
            let exact = 1.0 - (e / 2.0).clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
            assert!((k - exact).abs() <= 1.0 / 256.0 + 1e-12, "{e}: {k} vs {exact}");
        }
    }

    #[test]
    fn bernoulli_gap_carries_half() {
        let f = SamplingFunction::bernoulli(5.0);
        let grid: Vec<f64> = (0..=20).map(|i| 2.0 + 0.05 * i as f64).collect();
        let t = ids_estimate(&f, &grid, 512, 64, 7, 2).unwrap();
        assert!((t.value_at(2.5) - 0.5).abs() < 0.02);
        let label = gap_label(&t, 2.1, 2.9).unwrap();
        assert!((label.value - 0.5).abs() < 0.02);
        assert!(label.flat);
    }

    #[test]
    fn bernoulli_dense_cross_check() {
        // weight of [-2, 2] from full diagonalisation of one long sample
        let f = SamplingFunction::bernoulli(5.0);
        let v: Vec<f64> = OrbitPoint::random(2, 11, 0)
            .forward_values(256)
            .into_iter()
            .map(|w| f.eval(w))
            .collect();
        let below = dense_eigenvalues(&v, 0.0).iter().filter(|&&x| x <= 2.5).count();
        assert!((below as f64 / 256.0 - 0.5).abs() < 0.1);
        assert_eq!(below, sturm_count(&v, 2.5));
    }

    #[test]
    fn gap_label_examples() {
        let f = SamplingFunction::constant(0.0);
        let grid: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
        let t = ids_estimate(&f, &grid, 64, 8, 0, 2).unwrap();
        assert_eq!(gap_label(&t, 2.5, 3.05).unwrap().value, 1.0);
        assert_eq!(gap_label(&t, -3.05, -2.5).unwrap().value, 0.0);
        assert!(matches!(
            gap_label(&t, 2.51, 2.52),
            Err(Error::EmptyGapGrid { .. })
        ));
        // a "gap" across the spectrum is not flat
        assert!(!gap_label(&t, -1.5, 1.5).unwrap().flat);
    }

    #[test]
    fn ids_is_monotone_and_reproducible() {
        let f = SamplingFunction::cosine(0.5);
        let grid: Vec<f64> = (0..=200).map(|i| -3.0 + 0.035 * i as f64).collect();
        let a = ids_estimate(&f, &grid, 64, 16, 5, 2).unwrap();
        let b = ids_estimate(&f, &grid, 64, 16, 5, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.k_values.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.k_values.iter().all(|k| (0.0..=1.0).contains(k)));
        assert_eq!(a.value_at(-10.0), 0.0);
    }

    #[test]
    fn boundary_condition_changes_k_by_at_most_two_over_n() {
        let f = SamplingFunction::cosine(0.5);
        let n = 96;
        for s in 0..4u64 {
            let v: Vec<f64> = OrbitPoint::random(2, 21, s)
                .forward_values(n)
                .into_iter()
                .map(|w| f.eval(w))
                .collect();
            let periodic = dense_eigenvalues(&v, 1.0);
            for i in 0..=80 {
                let e = -3.5 + 0.1 * i as f64;
                let d = sturm_count(&v, e) as f64 / n as f64;
                let p = periodic.iter().filter(|&&x| x <= e).count() as f64 / n as f64;
                assert!((d - p).abs() <= 2.0 / n as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn dk_mass_sits_on_the_spectrum() {
        let f = SamplingFunction::cosine(0.5);
        let s = union_spectrum(&f, 10, 2, 1e-10).unwrap();
        let (n, m) = (256, 16);
        let h = 0.1;
        let grid: Vec<f64> = (0..=140).map(|i| -3.5 + 0.05 * i as f64).collect();
        let t = ids_estimate(&f, &grid, n, m, 9, 2).unwrap();
        let tol = t.tolerance();
        for (i, &e) in grid.iter().enumerate() {
            let j = grid.partition_point(|&x| x <= e + h) - 1;
            let mass = t.k_values[j] - t.k_values[i];
            if mass > 5.0 * tol {
                // mass in (e, e + h] must come from near the bands
                assert!(s.distance(e + 0.5 * h) <= h, "{e}: mass {mass}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = SamplingFunction::constant(0.0);
        assert!(ids_estimate(&f, &[0.0], 8, 4, 0, 2).is_err());
        assert!(ids_estimate(&f, &[0.0], 32, 0, 0, 2).is_err());
        assert!(ids_estimate(&f, &[1.0, 0.0], 32, 1, 0, 2).is_err());
        assert!(ids_estimate(&f, &[], 32, 1, 0, 2).is_err());
    }
}
