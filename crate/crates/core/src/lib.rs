//! Spectral numerics for discrete Schrödinger operators whose potentials are
//! generated by the doubling map `ω ↦ 2ω mod 1` (or more generally
//! `ω ↦ mω`).
//!
//! The operator acts on sequences by
//!
//! ```text
//! (Hψ)(n) = ψ(n+1) + ψ(n-1) + f(T^n ω) ψ(n)
//! ```
//!
//! and the crate provides the pieces needed to study its almost-sure
//! essential spectrum numerically:
//!
//! * [`dynamics`]: exact rational arithmetic for the expanding circle map,
//!   periodic orbits, random points and backward (solenoid) extensions.
//! * [`sampling`]: sampling functions and the potentials they generate.
//! * [`cocycle`]: transfer matrices, Floquet discriminants, stable directions,
//!   a uniform hyperbolicity test and the interpolated cocycle.
//! * [`spectrum`]: periodic band spectra and their union.
//! * [`ids`]: integrated density of states by Sturm counting.
//! * [`schwartzman`]: the rotation number of the stable section and its
//!   integrality verdict.

pub mod cocycle;
pub mod dynamics;
mod error;
pub mod ids;
pub mod sampling;
pub mod schwartzman;
pub mod spectrum;
pub mod tridiag;

pub use error::{Error, Result};

pub use cocycle::{
    cocycle_product, dichotomy_test, discriminant, interpolated_step, most_contracted_direction,
    step_matrix, DichotomyParams, DichotomyReport, Direction, TransferMatrix,
};
pub use dynamics::{
    enumerate_orbits, extend_backward, map_forward, solenoid_forward, BackwardDigits, CirclePoint,
    OrbitPoint, PeriodicOrbit,
};
pub use ids::{eigen_count, gap_label, ids_estimate, GapLabel, IdsTable};
pub use sampling::{potential, Potential, SamplingFunction};
pub use schwartzman::{
    argument_winding_step, integrality_check, rotation_number, IntegralityVerdict,
    RotationEstimate, RotationParams,
};
pub use spectrum::{gap_report, periodic_bands, union_spectrum, Band, Gap, SpectrumApprox};
