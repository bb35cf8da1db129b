//! Schrödinger cocycles: transfer matrices, Floquet discriminants, stable
//! directions, a uniform hyperbolicity test, and the interpolated cocycle
//! that connects the identity to a single transfer step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Mul;

use crate::dynamics::{enumerate_orbits, OrbitPoint, PeriodicOrbit};
use crate::sampling::SamplingFunction;
use crate::{Error, Result};

/// Relative singular-value gap below which no direction is contracted.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// A real 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        TransferMatrix { a11, a12, a21, a22 }
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        TransferMatrix::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn frobenius(&self) -> f64 {
        (self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22)
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        TransferMatrix::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn max_entry_diff(&self, other: &TransferMatrix) -> f64 {
        [
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        ]
        .iter()
        .fold(0.0, |acc: f64, d| acc.max(d.abs()))
    }

    /// `MᵀM` as `(a, b, c)` for `[[a, b], [b, c]]`.
    fn gram(&self) -> (f64, f64, f64) {
        (
            self.a11 * self.a11 + self.a21 * self.a21,
            self.a11 * self.a12 + self.a21 * self.a22,
            self.a12 * self.a12 + self.a22 * self.a22,
        )
    }

    /// Singular values `(s_max, s_min)` in closed form.
    pub fn singular_values(&self) -> (f64, f64) {
        let (a, b, c) = self.gram();
        let split = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
        let s_max = (0.5 * (a + c + split)).sqrt();
        let s_min = if s_max > 0.0 {
            self.det().abs() / s_max
        } else {
            0.0
        };
        (s_max, s_min)
    }

    /// Most contracted right singular direction and the relative singular gap
    /// `(s_max - s_min) / s_max`.
    fn contracted(&self) -> (Direction, f64) {
        let (a, b, c) = self.gram();
        let split = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
        let (s_max, s_min) = self.singular_values();
        let gap = if s_max > 0.0 {
            split / (s_max * (s_max + s_min))
        } else {
            0.0
        };
        let expanded = 0.5 * (2.0 * b).atan2(a - c);
        (Direction::new(expanded + FRAC_PI_2), gap)
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, r: TransferMatrix) -> TransferMatrix {
        TransferMatrix::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

/// A line through the origin, `span{(cos θ, sin θ)}` with `θ ∈ [0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    angle: f64,
}

impl Direction {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(PI);
        if a >= PI {
            a = 0.0;
        }
        Direction { angle: a }
    }

    pub fn from_vector(v: [f64; 2]) -> Self {
        Direction::new(v[1].atan2(v[0]))
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn unit(&self) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [c, s]
    }

    /// `v₂ / v₁` for a spanning vector.
    pub fn slope(&self) -> f64 {
        self.angle.tan()
    }

    /// Projective distance `min(|θ-θ'|, π-|θ-θ'|)`.
    pub fn distance(&self, other: &Direction) -> f64 {
        let d = (self.angle - other.angle).abs();
        d.min(PI - d)
    }

    pub fn image(&self, m: &TransferMatrix) -> Direction {
        Direction::from_vector(m.apply(self.unit()))
    }
}

/// `[[E - v, -1], [1, 0]]`.
pub fn step_matrix(energy: f64, v: f64) -> TransferMatrix {
    TransferMatrix::new(energy - v, -1.0, 1.0, 0.0)
}

/// Ordered product `A(v_{n-1}) ··· A(v_0)`.
pub(crate) fn product_of(energy: f64, potential: &[f64]) -> TransferMatrix {
    potential
        .iter()
        .fold(TransferMatrix::IDENTITY, |acc, &v| step_matrix(energy, v) * acc)
}

/// Product renormalised after every factor; the true product is
/// `matrix · exp(log_scale)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ScaledProduct {
    pub matrix: TransferMatrix,
    pub log_scale: f64,
}

impl ScaledProduct {
    pub fn of(energy: f64, potential: &[f64]) -> Self {
        let mut matrix = TransferMatrix::IDENTITY;
        let mut log_scale = 0.0;
        for &v in potential {
            matrix = step_matrix(energy, v) * matrix;
            let norm = matrix.frobenius();
            matrix = matrix.scaled(1.0 / norm);
            log_scale += norm.ln();
        }
        ScaledProduct { matrix, log_scale }
    }

    /// `log ‖A^n‖` in operator norm.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.matrix.singular_values().0.ln()
    }
}

/// `A^n(ω) = A(T^{n-1}ω) ··· A(Tω) A(ω)` with `A(ω) = [[E - f(ω), -1], [1, 0]]`.
pub fn cocycle_product(
    f: &SamplingFunction,
    energy: f64,
    omega: &OrbitPoint,
    n: usize,
) -> TransferMatrix {
    let v: Vec<f64> = omega.forward_values(n).into_iter().map(|w| f.eval(w)).collect();
    product_of(energy, &v)
}

/// Values of `f` along one period of `orbit`, from its canonical point.
pub fn orbit_potential(orbit: &PeriodicOrbit, f: &SamplingFunction) -> Vec<f64> {
    orbit.points().iter().map(|p| f.eval(p.to_f64())).collect()
}

/// Floquet discriminant: the trace of the transfer matrix over one period.
pub fn discriminant(orbit: &PeriodicOrbit, f: &SamplingFunction, energy: f64) -> f64 {
    product_of(energy, &orbit_potential(orbit, f)).trace()
}

pub(crate) fn discriminant_of(potential: &[f64], energy: f64) -> f64 {
    product_of(energy, potential).trace()
}

/// Most contracted direction of the product over `potential`.
pub(crate) fn contracted_direction(energy: f64, potential: &[f64]) -> Result<Direction> {
    let (dir, gap) = ScaledProduct::of(energy, potential).matrix.contracted();
    if gap < DEGENERACY_GAP {
        return Err(Error::DegenerateSingularValues { gap });
    }
    Ok(dir)
}

/// Output of [`most_contracted_direction`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractedDirection {
    pub direction: Direction,
    pub converged: bool,
    /// Projective distance to the answer at half the depth.
    pub half_depth_distance: f64,
}

/// Projective tolerance for "the depth-n and depth-n/2 answers agree".
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// Right singular direction of `A^n(ω)` for the smaller singular value.
pub fn most_contracted_direction(
    f: &SamplingFunction,
    energy: f64,
    omega: &OrbitPoint,
    depth: usize,
) -> Result<ContractedDirection> {
    if depth < 2 {
        return Err(Error::InvalidParameter(format!("depth must be >= 2, got {depth}")));
    }
    let v: Vec<f64> = omega.forward_values(depth).into_iter().map(|w| f.eval(w)).collect();
    let direction = contracted_direction(energy, &v)?;
    let half_depth_distance = match contracted_direction(energy, &v[..depth / 2]) {
        Ok(half) => direction.distance(&half),
        Err(_) => f64::INFINITY,
    };
    Ok(ContractedDirection {
        direction,
        converged: half_depth_distance < CONVERGENCE_TOL,
        half_depth_distance,
    })
}

/// Knobs for [`dichotomy_test`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyParams {
    pub sample_count: usize,
    /// Starting depth; doubled until the contracted directions converge.
    pub depth: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub base: u32,
    pub convergence_tol: f64,
    pub invariance_tol: f64,
    pub rate_floor: f64,
    /// Periodic orbits up to this period are checked for `|Δ(E)| <= 2`.
    pub probe_period: u32,
}

impl Default for DichotomyParams {
    fn default() -> Self {
        DichotomyParams {
            sample_count: 200,
            depth: 60,
            max_depth: 480,
            seed: 0,
            base: 2,
            convergence_tol: CONVERGENCE_TOL,
            invariance_tol: 1e-6,
            rate_floor: 1e-3,
            probe_period: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyDiagnostics {
    pub samples: usize,
    pub unconverged_samples: usize,
    pub max_depth_used: usize,
    pub max_convergence_distance: f64,
    pub max_invariance_residual: f64,
    /// A periodic orbit whose band contains the energy, if one was found.
    pub elliptic_orbit: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub energy: f64,
    pub is_hyperbolic: bool,
    /// Smallest per-sample `(1/n) log ‖A^n‖`.
    pub growth_rate: f64,
    /// Largest observed `‖A^k u‖ e^{ck}` over stable unit vectors `u`.
    pub prefactor: f64,
    pub stable_direction_at: Vec<(f64, Direction)>,
    pub diagnostics: DichotomyDiagnostics,
}

struct SampleOutcome {
    omega: f64,
    direction: Option<Direction>,
    converged: bool,
    depth: usize,
    distance: f64,
    residual: f64,
    growth: f64,
    prefactor: f64,
}

fn probe_sample(
    f: &SamplingFunction,
    energy: f64,
    omega: &OrbitPoint,
    params: &DichotomyParams,
) -> SampleOutcome {
    let max_depth = params.max_depth.max(params.depth);
    let v: Vec<f64> = omega
        .forward_values(max_depth + 1)
        .into_iter()
        .map(|w| f.eval(w))
        .collect();

    let mut depth = params.depth;
    let mut found = None;
    let mut distance = f64::INFINITY;
    loop {
        if let Ok(dir) = contracted_direction(energy, &v[..depth]) {
            distance = contracted_direction(energy, &v[..depth / 2])
                .map(|half| dir.distance(&half))
                .unwrap_or(f64::INFINITY);
            found = Some(dir);
            if distance < params.convergence_tol {
                break;
            }
        }
        if depth * 2 > max_depth {
            break;
        }
        depth *= 2;
    }

    let product = ScaledProduct::of(energy, &v[..depth]);
    let growth = product.log_norm() / depth as f64;

    let (residual, prefactor) = match found {
        Some(dir) => {
            let residual = match contracted_direction(energy, &v[1..depth + 1]) {
                Ok(next) => dir.image(&step_matrix(energy, v[0])).distance(&next),
                Err(_) => f64::INFINITY,
            };
            // decay of the stable vector, only trusted over the first half
            let mut u = dir.unit();
            let mut log_len = 0.0;
            let mut worst: f64 = 1.0;
            for (k, &vk) in v[..depth / 2].iter().enumerate() {
                u = step_matrix(energy, vk).apply(u);
                let len = u[0].hypot(u[1]);
                log_len += len.ln();
                u = [u[0] / len, u[1] / len];
                worst = worst.max((log_len + growth * (k + 1) as f64).exp());
            }
            (residual, worst)
        }
        None => (f64::INFINITY, f64::INFINITY),
    };

    SampleOutcome {
        omega: omega.value(),
        direction: found,
        converged: found.is_some() && distance < params.convergence_tol,
        depth,
        distance,
        residual,
        growth,
        prefactor,
    }
}

/// Numerical test for an exponential dichotomy of `(T, A_{E-f})`.
///
/// The energy is declared hyperbolic iff no periodic orbit up to
/// `probe_period` has `|Δ(E)| <= 2`, every sampled stable direction
/// converges, the invariance `A(ω)Λ(ω) = Λ(Tω)` holds to `invariance_tol`
/// at every sample, and the slowest sampled growth rate is at least
/// `rate_floor`.
pub fn dichotomy_test(
    f: &SamplingFunction,
    energy: f64,
    params: &DichotomyParams,
) -> Result<DichotomyReport> {
    if params.sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be >= 1".into()));
    }
    if params.depth < 8 {
        return Err(Error::InvalidParameter(format!(
            "depth must be >= 8, got {}",
            params.depth
        )));
    }

    let elliptic_orbit = if params.probe_period > 0 {
        enumerate_orbits(params.probe_period, params.base)?
            .iter()
            .find(|o| discriminant(o, f, energy).abs() <= 2.0)
            .map(PeriodicOrbit::label)
    } else {
        None
    };

    let outcomes: Vec<SampleOutcome> = (0..params.sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let omega = OrbitPoint::random(params.base, params.seed, i);
            probe_sample(f, energy, &omega, params)
        })
        .collect();

    let unconverged = outcomes.iter().filter(|o| !o.converged).count();
    let max_residual = outcomes.iter().fold(0.0f64, |a, o| a.max(o.residual));
    let max_distance = outcomes.iter().fold(0.0f64, |a, o| a.max(o.distance));
    let growth_rate = outcomes.iter().fold(f64::INFINITY, |a, o| a.min(o.growth));
    let prefactor = outcomes.iter().fold(0.0f64, |a, o| a.max(o.prefactor));
    let max_depth_used = outcomes.iter().map(|o| o.depth).max().unwrap_or(params.depth);

    let is_hyperbolic = elliptic_orbit.is_none()
        && unconverged == 0
        && max_residual < params.invariance_tol
        && growth_rate >= params.rate_floor;

    Ok(DichotomyReport {
        energy,
        is_hyperbolic,
        growth_rate,
        prefactor,
        stable_direction_at: outcomes
            .iter()
            .filter_map(|o| o.direction.map(|d| (o.omega, d)))
            .collect(),
        diagnostics: DichotomyDiagnostics {
            samples: outcomes.len(),
            unconverged_samples: unconverged,
            max_depth_used,
            max_convergence_distance: max_distance,
            max_invariance_residual: max_residual,
            elliptic_orbit,
        },
    })
}

/// `σ(u) / (σ(u) + σ(1-u))` with `σ(u) = exp(-1/u)` for `u > 0`: a smooth,
/// nondecreasing transition from 0 (for `u <= 0`) to 1 (for `u >= 1`), flat to
/// all orders at both ends.
pub fn smooth_transition(u: f64) -> f64 {
    let sigma = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = sigma(u);
        a / (a + sigma(1.0 - u))
    }
}

/// The path `Y(t)` from the identity (`t = 0`) through the quarter rotation
/// (`t = 1/2`) to `step_matrix(E, v)` (`t = 1`).
pub fn interpolated_step(energy: f64, v: f64, t: f64) -> Result<TransferMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
    }
    Ok(if t <= 0.5 {
        TransferMatrix::rotation(FRAC_PI_2 * smooth_transition(2.0 * t))
    } else {
        TransferMatrix::new(smooth_transition(2.0 * t - 1.0) * (energy - v), -1.0, 1.0, 0.0)
    })
}
