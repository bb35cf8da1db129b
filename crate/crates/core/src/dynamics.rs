//! The expanding circle map `T(ω) = mω mod 1`, its periodic orbits, and the
//! backward extension used to build two-sided potentials.
//!
//! Three representations of a base point are supported:
//!
//! * [`CirclePoint`]: an exact fraction, iterated without rounding.
//! * `f64`: plain floating point. Each application of `T` shifts one base-`m`
//!   digit out of the mantissa, so after roughly `53 / log2(m)` steps the
//!   orbit collapses onto `0`.
//! * A random digit expansion ([`OrbitPoint::random`]). The base-`m` digits of
//!   a Lebesgue-random `ω` are i.i.d. uniform, so `ω` is stored as a seeded,
//!   unbounded digit stream and `T^n ω` is read off as the digits from
//!   position `n` onward. This gives honest orbits of any length.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An exact point `numerator / denominator` of the circle, in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CirclePoint {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `(a * b) mod modulus` without overflow.
fn mul_mod(a: u128, b: u128, modulus: u128) -> u128 {
    if let Some(p) = a.checked_mul(b) {
        return p % modulus;
    }
    let (mut a, mut b) = (a % modulus, b);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, modulus);
        }
        a = add_mod(a, a, modulus);
        b >>= 1;
    }
    acc
}

fn add_mod(a: u128, b: u128, modulus: u128) -> u128 {
    // a, b < modulus
    if a >= modulus - b {
        a - (modulus - b)
    } else {
        a + b
    }
}

impl CirclePoint {
    pub const ZERO: CirclePoint = CirclePoint { num: 0, den: 1 };

    /// Builds `num / den mod 1` in lowest terms.
    pub fn new(num: u128, den: u128) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("denominator must be positive".into()));
        }
        let num = num % den;
        let g = gcd(num, den);
        Ok(CirclePoint {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u128 {
        self.num
    }

    pub fn denominator(&self) -> u128 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// One application of `ω ↦ mω mod 1`.
    pub fn map(self, base: u32) -> Self {
        let num = mul_mod(self.num, base as u128, self.den);
        let g = gcd(num, self.den);
        CirclePoint {
            num: num / g,
            den: self.den / g,
        }
    }

    /// The preimage `(ω + digit) / m` selected by `digit`.
    pub fn preimage(self, digit: u32, base: u32) -> Result<Self> {
        let overflow = || Error::CapacityExceeded {
            base,
            requested: 0,
            max_period: max_safe_period(base),
        };
        let den = self.den.checked_mul(base as u128).ok_or_else(overflow)?;
        let num = (digit as u128)
            .checked_mul(self.den)
            .and_then(|d| d.checked_add(self.num))
            .ok_or_else(overflow)?;
        CirclePoint::new(num, den)
    }
}

impl std::fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A value on the circle that the map and its inverse branches act on.
pub trait CircleValue: Copy {
    fn map(self, base: u32) -> Self;
    fn preimage(self, digit: u32, base: u32) -> Result<Self>;
    fn to_f64(self) -> f64;
}

impl CircleValue for CirclePoint {
    fn map(self, base: u32) -> Self {
        CirclePoint::map(self, base)
    }

    fn preimage(self, digit: u32, base: u32) -> Result<Self> {
        CirclePoint::preimage(self, digit, base)
    }

    fn to_f64(self) -> f64 {
        CirclePoint::to_f64(self)
    }
}

impl CircleValue for f64 {
    fn map(self, base: u32) -> Self {
        frac(self * base as f64)
    }

    fn preimage(self, digit: u32, base: u32) -> Result<Self> {
        Ok((frac(self) + digit as f64) / base as f64)
    }

    fn to_f64(self) -> f64 {
        frac(self)
    }
}

/// Reduces to `[0, 1)`.
pub(crate) fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `T^steps(point)`.
pub fn map_forward<P: CircleValue>(point: P, steps: u64, base: u32) -> P {
    (0..steps).fold(point, |p, _| p.map(base))
}

/// Largest period whose candidates `k / (m^p - 1)` can be handled in `u128`
/// arithmetic, keeping `m · numerator` representable.
pub fn max_safe_period(base: u32) -> u32 {
    let mut power: u128 = base as u128;
    let mut p = 0;
    while let Some(next) = power.checked_mul(base as u128) {
        power = next;
        p += 1;
    }
    p
}

/// A periodic orbit of minimal period `period`, stored from its smallest point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    period: u32,
    points: Vec<CirclePoint>,
    map_base: u32,
}

impl PeriodicOrbit {
    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn points(&self) -> &[CirclePoint] {
        &self.points
    }

    pub fn map_base(&self) -> u32 {
        self.map_base
    }

    /// The canonical (smallest) point.
    pub fn start(&self) -> CirclePoint {
        self.points[0]
    }

    pub fn label(&self) -> String {
        format!("p={} start={}", self.period, self.points[0])
    }
}

/// Lyndon words of length `<= n` over `{0, .., m-1}` in lexicographic order
/// (Fredricksen–Kessler–Maiorana).
fn lyndon_words(n: usize, m: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut w = vec![0u32];
    loop {
        out.push(w.clone());
        let len = w.len();
        while w.len() < n {
            w.push(w[w.len() - len]);
        }
        while w.last() == Some(&(m - 1)) {
            w.pop();
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

/// All periodic orbits of minimal period at most `max_period`, each listed
/// once, ordered by period and then by canonical point.
///
/// The orbits of minimal period `p` are exactly the rotation classes of
/// aperiodic base-`m` words of length `p`; the canonical point of each class
/// is its Lyndon word read as `k / (m^p - 1)`.
pub fn enumerate_orbits(max_period: u32, base: u32) -> Result<Vec<PeriodicOrbit>> {
    if max_period == 0 {
        return Err(Error::InvalidParameter("max_period must be at least 1".into()));
    }
    if base < 2 {
        return Err(Error::InvalidParameter(format!("map base must be >= 2, got {base}")));
    }
    let safe = max_safe_period(base);
    if max_period > safe {
        return Err(Error::CapacityExceeded {
            base,
            requested: max_period,
            max_period: safe,
        });
    }

    let mut orbits: Vec<(u32, u128, PeriodicOrbit)> = lyndon_words(max_period as usize, base)
        .into_iter()
        .filter(|w| !(w.len() == 1 && w[0] == base - 1))
        .map(|w| {
            let p = w.len() as u32;
            let den = (base as u128).pow(p) - 1;
            let k = w.iter().fold(0u128, |acc, &d| acc * base as u128 + d as u128);
            let mut points = Vec::with_capacity(p as usize);
            let mut cur = k;
            for _ in 0..p {
                points.push(CirclePoint::new(cur, den).expect("den > 0"));
                cur = mul_mod(cur, base as u128, den);
            }
            (
                p,
                k,
                PeriodicOrbit {
                    period: p,
                    points,
                    map_base: base,
                },
            )
        })
        .collect();
    orbits.sort_by_key(|(p, k, _)| (*p, *k));
    Ok(orbits.into_iter().map(|(_, _, o)| o).collect())
}

/// Digits selecting a backward branch at each step: `ω_{-n} = (ω_{-n+1} + d_n) / m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackwardDigits {
    base: u32,
    digits: Vec<u32>,
    seed: Option<u64>,
}

impl BackwardDigits {
    pub fn new(base: u32, digits: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!("map base must be >= 2, got {base}")));
        }
        if let Some(bad) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidParameter(format!(
                "digit {bad} out of range for base {base}"
            )));
        }
        Ok(BackwardDigits {
            base,
            digits,
            seed: None,
        })
    }

    pub fn zeros(base: u32, len: usize) -> Self {
        assert!(base >= 2, "map base must be >= 2");
        BackwardDigits {
            base,
            digits: vec![0; len],
            seed: None,
        }
    }

    /// `len` i.i.d. uniform digits from a seeded generator.
    pub fn random(base: u32, len: usize, seed: u64) -> Self {
        assert!(base >= 2, "map base must be >= 2");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let digits = (0..len).map(|_| (rng.next_u64() % base as u64) as u32).collect();
        BackwardDigits {
            base,
            digits,
            seed: Some(seed),
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The digit used for step `n`, counting from 1.
    pub fn digit(&self, n: usize) -> u32 {
        self.digits[n - 1]
    }
}

/// `ω_{-n}` reached from `anchor` by following `digits` backward.
pub fn extend_backward<P: CircleValue>(anchor: P, digits: &BackwardDigits, n: usize) -> Result<P> {
    if digits.len() < n {
        return Err(Error::InsufficientDigits {
            needed: n,
            available: digits.len(),
        });
    }
    (1..=n).try_fold(anchor, |w, k| w.preimage(digits.digit(k), digits.base))
}

/// A point of the solid torus `T × D²`; its first coordinate is a circle value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolenoidPoint<P> {
    pub omega: P,
    pub x: f64,
    pub y: f64,
}

/// One application of the solenoid map
/// `(ω, x, y) ↦ (2ω, λx + ½cos 2πω, λy + ½sin 2πω)`.
pub fn solenoid_forward<P: CircleValue>(
    point: SolenoidPoint<P>,
    lambda: f64,
) -> Result<SolenoidPoint<P>> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "solenoid contraction must lie in (0, 1/2), got {lambda}"
        )));
    }
    if point.x * point.x + point.y * point.y > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter("fiber point lies outside the unit disk".into()));
    }
    let phase = 2.0 * std::f64::consts::PI * point.omega.to_f64();
    Ok(SolenoidPoint {
        omega: point.omega.map(2),
        x: lambda * point.x + 0.5 * phase.cos(),
        y: lambda * point.y + 0.5 * phase.sin(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    Exact(CirclePoint),
    Float(f64),
    Expansion { seed: u64, stream: u64, offset: u64 },
}

/// A base point together with the map it is iterated under.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitPoint {
    base: u32,
    repr: Repr,
}

/// Number of base-`m` digits that determine an `f64` in `[0, 1)`.
fn precision_digits(base: u32) -> usize {
    (54.0 / (base as f64).log2()).ceil() as usize
}

impl OrbitPoint {
    pub fn exact(point: CirclePoint, base: u32) -> Self {
        assert!(base >= 2, "map base must be >= 2");
        OrbitPoint {
            base,
            repr: Repr::Exact(point),
        }
    }

    pub fn float(omega: f64, base: u32) -> Self {
        assert!(base >= 2, "map base must be >= 2");
        OrbitPoint {
            base,
            repr: Repr::Float(frac(omega)),
        }
    }

    /// A Lebesgue-random point given by an unbounded stream of i.i.d. digits.
    /// Distinct `stream` values give independent points for the same seed.
    pub fn random(base: u32, seed: u64, stream: u64) -> Self {
        assert!(base >= 2, "map base must be >= 2");
        OrbitPoint {
            base,
            repr: Repr::Expansion {
                seed,
                stream,
                offset: 0,
            },
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn as_exact(&self) -> Option<CirclePoint> {
        match self.repr {
            Repr::Exact(p) => Some(p),
            _ => None,
        }
    }

    /// The current point as a float in `[0, 1)`.
    pub fn value(&self) -> f64 {
        self.forward_values(1)[0]
    }

    /// `T^n` of this point.
    pub fn advance(&self, n: u64) -> Self {
        let repr = match self.repr {
            Repr::Exact(p) => Repr::Exact(map_forward(p, n, self.base)),
            Repr::Float(x) => Repr::Float(map_forward(x, n, self.base)),
            Repr::Expansion {
                seed,
                stream,
                offset,
            } => Repr::Expansion {
                seed,
                stream,
                offset: offset + n,
            },
        };
        OrbitPoint {
            base: self.base,
            repr,
        }
    }

    /// The points `T^0 ω, .., T^{len-1} ω` as floats.
    pub fn forward_values(&self, len: usize) -> Vec<f64> {
        match self.repr {
            Repr::Exact(p) => {
                let mut out = Vec::with_capacity(len);
                let mut cur = p;
                for _ in 0..len {
                    out.push(cur.to_f64());
                    cur = cur.map(self.base);
                }
                out
            }
            Repr::Float(x) => {
                let mut out = Vec::with_capacity(len);
                let mut cur = x;
                for _ in 0..len {
                    out.push(cur);
                    cur = cur.map(self.base);
                }
                out
            }
            Repr::Expansion {
                seed,
                stream,
                offset,
            } => {
                let k = precision_digits(self.base);
                let digits = expansion_digits(seed, stream, offset, len + k, self.base);
                let m = self.base as f64;
                let below_one = 1.0 - f64::EPSILON / 2.0;
                (0..len)
                    .map(|n| {
                        let v = digits[n..n + k]
                            .iter()
                            .rev()
                            .fold(0.0, |acc, &d| (acc + d as f64) / m);
                        v.min(below_one)
                    })
                    .collect()
            }
        }
    }
}

impl From<CirclePoint> for OrbitPoint {
    fn from(p: CirclePoint) -> Self {
        OrbitPoint::exact(p, 2)
    }
}

impl From<f64> for OrbitPoint {
    fn from(x: f64) -> Self {
        OrbitPoint::float(x, 2)
    }
}

fn expansion_digits(seed: u64, stream: u64, start: u64, count: usize, base: u32) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * start as u128);
    (0..count)
        .map(|_| (rng.next_u64() % base as u64) as u32)
        .collect()
}
