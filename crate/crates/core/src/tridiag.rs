//! Symmetric tridiagonal matrices with unit off-diagonal: Sturm counts and
//! bisection eigenvalues.

/// Pivot used in place of an exact zero; it counts as negative.
const ZERO_PIVOT: f64 = -1e-300;

/// Number of eigenvalues `<= energy` of the matrix with the given diagonal and
/// all off-diagonal entries equal to 1.
///
/// Runs the LDLᵀ recursion `d_1 = V_1 - E`, `d_i = V_i - E - 1/d_{i-1}` and
/// counts non-positive pivots.
pub fn sturm_count(diagonal: &[f64], energy: f64) -> usize {
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for &v in diagonal {
        let mut d = match prev {
            None => v - energy,
            Some(p) => v - energy - 1.0 / p,
        };
        if d == 0.0 {
            d = ZERO_PIVOT;
        }
        if d < 0.0 {
            count += 1;
        }
        prev = Some(d);
    }
    count
}

/// All eigenvalues in ascending order, each located by bisection on the
/// Sturm count to absolute tolerance `tol`.
pub fn eigenvalues(diagonal: &[f64], tol: f64) -> Vec<f64> {
    let n = diagonal.len();
    if n == 0 {
        return Vec::new();
    }
    let (vmin, vmax) = diagonal
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let lo0 = vmin - 2.0 - 1.0;
    let hi0 = vmax + 2.0 + 1.0;
    (0..n)
        .map(|k| {
            // smallest E with count(E) >= k + 1
            let (mut lo, mut hi) = (lo0, hi0);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(diagonal, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}
