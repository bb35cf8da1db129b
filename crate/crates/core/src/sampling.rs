//! Sampling functions `f: T → R` and the potentials `V_ω(n) = f(T^n ω)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{extend_backward, frac, BackwardDigits, OrbitPoint};
use crate::{Error, Result};

/// A real function on the circle.
///
/// The JSON form is
/// `{"type":"trigpoly","const":c,"cos":[..],"sin":[..]}` or
/// `{"type":"step","breaks":[..],"values":[..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawSampling")]
pub enum SamplingFunction {
    /// `c + Σ_k a_k cos(2π(k+1)ω) + b_k sin(2π(k+1)ω)`.
    #[serde(rename = "trigpoly")]
    TrigPoly {
        #[serde(rename = "const")]
        constant: f64,
        #[serde(rename = "cos")]
        cos_coeffs: Vec<f64>,
        #[serde(rename = "sin")]
        sin_coeffs: Vec<f64>,
    },
    /// Right-continuous step function, equal to `values[i]` on
    /// `[breakpoints[i], breakpoints[i+1])`.
    Step {
        #[serde(rename = "breaks")]
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawSampling {
    #[serde(rename = "trigpoly")]
    TrigPoly {
        #[serde(rename = "const", default)]
        constant: f64,
        #[serde(rename = "cos", default)]
        cos_coeffs: Vec<f64>,
        #[serde(rename = "sin", default)]
        sin_coeffs: Vec<f64>,
    },
    Step {
        #[serde(rename = "breaks")]
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl TryFrom<RawSampling> for SamplingFunction {
    type Error = Error;

    fn try_from(raw: RawSampling) -> Result<Self> {
        match raw {
            RawSampling::TrigPoly {
                constant,
                cos_coeffs,
                sin_coeffs,
            } => SamplingFunction::trig_poly(constant, cos_coeffs, sin_coeffs),
            RawSampling::Step {
                breakpoints,
                values,
            } => SamplingFunction::step(breakpoints, values),
        }
    }
}

impl SamplingFunction {
    pub fn trig_poly(constant: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Result<Self> {
        let all_finite = std::iter::once(&constant)
            .chain(&cos_coeffs)
            .chain(&sin_coeffs)
            .all(|c| c.is_finite());
        if !all_finite {
            return Err(Error::InvalidSamplingFunction(
                "trigonometric coefficients must be finite".into(),
            ));
        }
        Ok(SamplingFunction::TrigPoly {
            constant,
            cos_coeffs,
            sin_coeffs,
        })
    }

    pub fn step(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidSamplingFunction(msg.into()));
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return bad("step function needs one value per breakpoint");
        }
        if breakpoints[0] != 0.0 {
            return bad("first breakpoint must be 0");
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("breakpoints must be strictly increasing");
        }
        if breakpoints.iter().any(|&b| !(0.0..1.0).contains(&b)) {
            return bad("breakpoints must lie in [0, 1)");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("step values must be finite");
        }
        Ok(SamplingFunction::Step {
            breakpoints,
            values,
        })
    }

    /// `f ≡ c`.
    pub fn constant(c: f64) -> Self {
        SamplingFunction::TrigPoly {
            constant: c,
            cos_coeffs: vec![],
            sin_coeffs: vec![],
        }
    }

    /// `f(ω) = 2λ cos(2πω)`.
    pub fn cosine(lambda: f64) -> Self {
        SamplingFunction::TrigPoly {
            constant: 0.0,
            cos_coeffs: vec![2.0 * lambda],
            sin_coeffs: vec![],
        }
    }

    /// `f(ω) = λ χ_[0,1/2)(ω)`.
    pub fn bernoulli(lambda: f64) -> Self {
        SamplingFunction::Step {
            breakpoints: vec![0.0, 0.5],
            values: vec![lambda, 0.0],
        }
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            SamplingFunction::TrigPoly { .. } => true,
            SamplingFunction::Step { values, .. } => values.windows(2).all(|w| w[0] == w[1])
                && values.first() == values.last(),
        }
    }

    /// An upper bound for `sup |f|`; exact for step functions.
    pub fn sup_bound(&self) -> f64 {
        match self {
            SamplingFunction::TrigPoly {
                constant,
                cos_coeffs,
                sin_coeffs,
            } => {
                constant.abs()
                    + cos_coeffs.iter().map(|c| c.abs()).sum::<f64>()
                    + sin_coeffs.iter().map(|c| c.abs()).sum::<f64>()
            }
            SamplingFunction::Step { values, .. } => {
                values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
            }
        }
    }

    /// `f(ω)`, with `ω` read mod 1.
    pub fn eval(&self, omega: f64) -> f64 {
        let w = frac(omega);
        match self {
            SamplingFunction::TrigPoly {
                constant,
                cos_coeffs,
                sin_coeffs,
            } => {
                let mut acc = *constant;
                for (k, a) in cos_coeffs.iter().enumerate() {
                    acc += a * (2.0 * PI * (k + 1) as f64 * w).cos();
                }
                for (k, b) in sin_coeffs.iter().enumerate() {
                    acc += b * (2.0 * PI * (k + 1) as f64 * w).sin();
                }
                acc
            }
            SamplingFunction::Step {
                breakpoints,
                values,
            } => {
                // last breakpoint <= w; breakpoints[0] == 0 so the index exists
                let idx = breakpoints.partition_point(|&b| b <= w) - 1;
                values[idx]
            }
        }
    }
}

/// Where the negative-index part of a potential came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ForwardOnly,
    TwoSided { digit_seed: Option<u64> },
}

/// Potential values on the window `n_min ..= n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    n_min: i64,
    values: Vec<f64>,
    anchor: f64,
    provenance: Provenance,
}

impl Potential {
    pub fn from_values(values: Vec<f64>) -> Self {
        Potential {
            n_min: 0,
            values,
            anchor: f64::NAN,
            provenance: Provenance::ForwardOnly,
        }
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.values.len() as i64 - 1
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// All values, ordered from `n_min` to `n_max`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: i64) -> Option<f64> {
        let idx = usize::try_from(n - self.n_min).ok()?;
        self.values.get(idx).copied()
    }
}

/// `V_ω(n) = f(T^n ω)` for `n_min <= n <= n_max`. Negative sites follow the
/// backward branch chosen by `digits`.
pub fn potential(
    f: &SamplingFunction,
    omega: &OrbitPoint,
    n_min: i64,
    n_max: i64,
    digits: Option<&BackwardDigits>,
) -> Result<Potential> {
    if n_min > 0 || n_max < 0 {
        return Err(Error::InvalidParameter(format!(
            "window must contain 0, got {n_min}..={n_max}"
        )));
    }
    let back = (-n_min) as usize;
    let mut values = Vec::with_capacity(back + n_max as usize + 1);
    let provenance = if back > 0 {
        let digits = digits.ok_or(Error::MissingDigits)?;
        if digits.base() != omega.base() {
            return Err(Error::InvalidParameter(format!(
                "digit base {} differs from map base {}",
                digits.base(),
                omega.base()
            )));
        }
        for n in (1..=back).rev() {
            let w = match omega.as_exact() {
                Some(p) => extend_backward(p, digits, n)?.to_f64(),
                None => extend_backward(omega.value(), digits, n)?,
            };
            values.push(f.eval(w));
        }
        Provenance::TwoSided {
            digit_seed: digits.seed(),
        }
    } else {
        Provenance::ForwardOnly
    };
    values.extend(
        omega
            .forward_values(n_max as usize + 1)
            .into_iter()
            .map(|w| f.eval(w)),
    );
    Ok(Potential {
        n_min,
        values,
        anchor: omega.value(),
        provenance,
    })
}
