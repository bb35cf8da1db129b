//! Rotation number of the stable section through the interpolated cocycle,
//! and the integrality check that separates continuous from discontinuous
//! sampling functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::cocycle::{contracted_direction, dichotomy_test, interpolated_step, DichotomyParams, Direction};
use crate::dynamics::OrbitPoint;
use crate::sampling::SamplingFunction;
use crate::{Error, Result};

fn wrap(x: f64) -> f64 {
    // into (-π, π]
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Follows the vector `Y(t) u` for `t` on a uniform grid of `substeps`
/// intervals, `u` the unit vector of `dir_in`, and sums the increments of its
/// argument. Returns the direction at `t = 1` and the lifted change.
pub fn argument_winding_step(
    energy: f64,
    v: f64,
    dir_in: Direction,
    substeps: usize,
) -> Result<(Direction, f64)> {
    if substeps < 8 {
        return Err(Error::InvalidParameter(format!(
            "substeps must be >= 8, got {substeps}"
        )));
    }
    let u = dir_in.unit();
    let mut prev = u[1].atan2(u[0]);
    let mut total = 0.0;
    let mut last = u;
    for i in 1..=substeps {
        let t = i as f64 / substeps as f64;
        let w = interpolated_step(energy, v, t)?.apply(u);
        let angle = w[1].atan2(w[0]);
        let increment = wrap(angle - prev);
        if increment.abs() >= FRAC_PI_2 {
            return Err(Error::LiftingAmbiguity {
                substep: i,
                increment,
            });
        }
        total += increment;
        prev = angle;
        last = w;
    }
    Ok((Direction::from_vector(last), total))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub omega_samples: usize,
    pub steps: usize,
    pub substeps: usize,
    /// Replace the propagated direction by a freshly computed stable
    /// direction every this many steps.
    pub reanchor_every: usize,
    /// Minimum depth for stable directions; raised to whatever the dichotomy
    /// pretest needed.
    pub depth: usize,
    pub seed: u64,
    pub dichotomy: DichotomyParams,
}

impl Default for RotationParams {
    fn default() -> Self {
        RotationParams {
            omega_samples: 32,
            steps: 2000,
            substeps: 64,
            reanchor_every: 1,
            depth: 60,
            seed: 0,
            dichotomy: DichotomyParams::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub energy: f64,
    pub value: f64,
    pub stderr: f64,
    pub per_step_args: ArgSummary,
    pub steps_used: usize,
    pub omega_samples: usize,
    pub depth: usize,
    /// Largest projective distance between a propagated direction and the
    /// fresh stable direction that replaced it.
    pub max_reanchor_residual: f64,
}

struct Track {
    total: f64,
    min_step: f64,
    max_step: f64,
    residual: f64,
}

fn track(
    f: &SamplingFunction,
    energy: f64,
    omega: &OrbitPoint,
    depth: usize,
    params: &RotationParams,
) -> Result<Track> {
    let v: Vec<f64> = omega
        .forward_values(params.steps + depth + 1)
        .into_iter()
        .map(|w| f.eval(w))
        .collect();
    let mut dir = contracted_direction(energy, &v[..depth])?;
    let mut out = Track {
        total: 0.0,
        min_step: f64::INFINITY,
        max_step: f64::NEG_INFINITY,
        residual: 0.0,
    };
    for n in 0..params.steps {
        let (next, delta) = argument_winding_step(energy, v[n], dir, params.substeps)?;
        out.total += delta;
        out.min_step = out.min_step.min(delta);
        out.max_step = out.max_step.max(delta);
        dir = if (n + 1) % params.reanchor_every == 0 {
            let fresh = contracted_direction(energy, &v[n + 1..n + 1 + depth])?;
            out.residual = out.residual.max(next.distance(&fresh));
            fresh
        } else {
            next
        };
    }
    Ok(out)
}

/// Average winding of the stable section per step, in units of `π`.
///
/// Fails with [`Error::NotHyperbolic`] unless the energy passes
/// [`dichotomy_test`].
pub fn rotation_number(
    f: &SamplingFunction,
    energy: f64,
    params: &RotationParams,
) -> Result<RotationEstimate> {
    if params.omega_samples == 0 || params.steps == 0 || params.reanchor_every == 0 {
        return Err(Error::InvalidParameter(
            "omega_samples, steps and reanchor_every must be >= 1".into(),
        ));
    }
    if params.substeps < 8 {
        return Err(Error::InvalidParameter(format!(
            "substeps must be >= 8, got {}",
            params.substeps
        )));
    }
    let report = dichotomy_test(f, energy, &params.dichotomy)?;
    if !report.is_hyperbolic {
        return Err(Error::NotHyperbolic { energy });
    }
    let depth = params.depth.max(report.diagnostics.max_depth_used);
    let base = params.dichotomy.base;

    let tracks: Vec<Track> = (0..params.omega_samples as u64)
        .into_par_iter()
        .map(|i| track(f, energy, &OrbitPoint::random(base, params.seed, i), depth, params))
        .collect::<Result<_>>()?;

    let scale = PI * params.steps as f64;
    let per_sample: Vec<f64> = tracks.iter().map(|t| t.total / scale).collect();
    let m = per_sample.len() as f64;
    let value = per_sample.iter().sum::<f64>() / m;
    let stderr = if per_sample.len() > 1 {
        let var = per_sample.iter().map(|x| (x - value).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok(RotationEstimate {
        energy,
        value,
        stderr,
        per_step_args: ArgSummary {
            mean: tracks.iter().map(|t| t.total).sum::<f64>() / (m * params.steps as f64),
            min: tracks.iter().map(|t| t.min_step).fold(f64::INFINITY, f64::min),
            max: tracks.iter().map(|t| t.max_step).fold(f64::NEG_INFINITY, f64::max),
        },
        steps_used: params.steps,
        omega_samples: params.omega_samples,
        depth,
        max_reanchor_residual: tracks.iter().map(|t| t.residual).fold(0.0, f64::max),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralityVerdict {
    Integer(i64),
    NonInteger,
    Inconclusive,
}

/// `Integer(n)` when the estimate sits within `tol` of `n` with standard
/// error below `tol`; `NonInteger` when it is further than
/// `3·max(tol, stderr)` from every integer.
pub fn integrality_check(est: &RotationEstimate, tol: f64) -> IntegralityVerdict {
    let nearest = est.value.round();
    let distance = (est.value - nearest).abs();
    if distance < tol && est.stderr < tol {
        IntegralityVerdict::Integer(nearest as i64)
    } else if distance > 3.0 * tol.max(est.stderr) {
        IntegralityVerdict::NonInteger
    } else {
        IntegralityVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{most_contracted_direction, step_matrix};
    use approx::assert_abs_diff_eq;

    fn quick() -> RotationParams {
        RotationParams {
            omega_samples: 8,
            steps: 300,
            dichotomy: DichotomyParams {
                sample_count: 32,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn estimate(value: f64, stderr: f64) -> RotationEstimate {
        RotationEstimate {
            energy: 0.0,
            value,
            stderr,
            per_step_args: ArgSummary {
                mean: 0.0,
                min: 0.0,
                max: 0.0,
            },
            steps_used: 1,
            omega_samples: 1,
            depth: 1,
            max_reanchor_residual: 0.0,
        }
    }

    #[test]
    fn pure_rotation_step() {
        let (out, delta) = argument_winding_step(1.3, 1.3, Direction::new(0.0), 64).unwrap();
        assert_abs_diff_eq!(delta, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(out.angle(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn fixed_direction_of_hyperbolic_step() {
        let w = OrbitPoint::float(0.0, 2);
        let f = SamplingFunction::constant(0.0);
        let stable = most_contracted_direction(&f, 3.0, &w, 40).unwrap().direction;
        assert_abs_diff_eq!(stable.slope(), (3.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-9);
        let (out, delta) = argument_winding_step(3.0, 0.0, stable, 64).unwrap();
        assert!(out.distance(&stable) < 1e-9);
        assert!(delta.abs() < PI);
        assert_abs_diff_eq!(delta.rem_euclid(PI).min(PI - delta.rem_euclid(PI)), 0.0, epsilon = 1e-9);
        let (_, again) = argument_winding_step(3.0, 0.0, out, 64).unwrap();
        assert_abs_diff_eq!(again, delta, epsilon = 1e-9);
    }

    #[test]
    fn winding_endpoint_matches_step_matrix() {
        for &(e, v, a) in &[(0.7, -1.0, 0.3), (4.0, 0.5, 2.9), (-2.5, 1.0, 1.2)] {
            let d = Direction::new(a);
            let (out, _) = argument_winding_step(e, v, d, 64).unwrap();
            assert!(out.distance(&d.image(&step_matrix(e, v))) < 1e-12);
        }
    }

    #[test]
    fn lifting_needs_enough_substeps() {
        assert!(argument_winding_step(0.0, 0.0, Direction::new(0.0), 4).is_err());
        assert!(matches!(
            argument_winding_step(200.0, 0.0, Direction::new(0.3), 8),
            Err(Error::LiftingAmbiguity { .. })
        ));
    }

    #[test]
    fn free_rotation_numbers() {
        let f = SamplingFunction::constant(0.0);
        let above = rotation_number(&f, 3.0, &quick()).unwrap();
        assert!(above.value.abs() < 0.01, "{above:?}");
        assert!(above.max_reanchor_residual < 1e-5);
        let below = rotation_number(&f, -3.0, &quick()).unwrap();
        assert!((below.value - 1.0).abs() < 0.01, "{below:?}");
        assert_eq!(integrality_check(&above, 0.01), IntegralityVerdict::Integer(0));
        assert_eq!(integrality_check(&below, 0.01), IntegralityVerdict::Integer(1));
    }

    #[test]
    fn inside_spectrum_is_rejected() {
        let f = SamplingFunction::constant(0.0);
        assert!(matches!(
            rotation_number(&f, 0.5, &quick()),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn continuous_sampling_gives_integers() {
        let f = SamplingFunction::cosine(0.5);
        for &e in &[-4.0, -3.2, 3.6, 5.0] {
            let est = rotation_number(&f, e, &quick()).unwrap();
            assert!(est.max_reanchor_residual < 1e-5);
            assert!(matches!(
                integrality_check(&est, 0.01),
                IntegralityVerdict::Integer(0) | IntegralityVerdict::Integer(1)
            ));
        }
    }

    #[test]
    fn independent_sample_sets_agree() {
        let f = SamplingFunction::bernoulli(5.0);
        let a = rotation_number(&f, 2.5, &RotationParams { seed: 1, ..quick() }).unwrap();
        let b = rotation_number(&f, 2.5, &RotationParams { seed: 2, ..quick() }).unwrap();
        assert!((a.value - b.value).abs() < 3.0 * (a.stderr + b.stderr) + 1e-3);
        assert!((a.value - 0.5).abs() < 0.05, "{a:?}");
    }

    #[test]
    fn integrality_examples() {
        use IntegralityVerdict::*;
        assert_eq!(integrality_check(&estimate(0.004, 0.002), 0.01), Integer(0));
        assert_eq!(integrality_check(&estimate(0.998, 0.003), 0.01), Integer(1));
        assert_eq!(integrality_check(&estimate(0.5, 0.003), 0.01), NonInteger);
        assert_eq!(integrality_check(&estimate(0.02, 0.003), 0.01), Inconclusive);
        assert_eq!(integrality_check(&estimate(-0.996, 0.001), 0.01), Integer(-1));
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap(PI), PI);
        assert_abs_diff_eq!(wrap(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap(3.0 * PI / 2.0), -FRAC_PI_2, epsilon = 1e-15);
    }
}
