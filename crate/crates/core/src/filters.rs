//! External smoothing filters applied per dimension along the time axis of a
//! row-major `T×m` signal. Boundaries are mirrored (reflected about the end
//! samples, which are not repeated).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("window must be odd and at least 3 (got {0})")]
    Window(usize),
    #[error("polynomial degree {degree} must be below window {window}")]
    Degree { window: usize, degree: usize },
    #[error("signal of length {len} is shorter than window {window}")]
    TooShort { len: usize, window: usize },
    #[error("signal length {len} is not a multiple of dimension {dim}")]
    Shape { len: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgFilterSpec {
    pub window: usize,
    pub degree: usize,
}

impl SgFilterSpec {
    pub fn new(window: usize, degree: usize) -> Result<Self, FilterError> {
        let spec = Self { window, degree };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if self.window < 3 || self.window % 2 == 0 {
            return Err(FilterError::Window(self.window));
        }
        if self.degree >= self.window {
            return Err(FilterError::Degree { window: self.window, degree: self.degree });
        }
        Ok(())
    }

    /// Smoothing weights for the window centre, index 0 ↔ offset `-half`.
    pub fn coefficients(&self) -> Vec<f64> {
        let half = (self.window / 2) as i64;
        (-half..=half).map(|i| sg_weight(i, 0, half, self.degree as i64)).collect()
    }
}

/// Gram polynomial `P_k(i)` on the symmetric grid `-m..=m`.
fn gram_poly(i: i64, m: i64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let (mut p_prev, mut p) = (0.0, 1.0);
    for j in 1..=k {
        let jf = j as f64;
        let denom = jf * (2 * m - j + 1) as f64;
        let next = (4.0 * jf - 2.0) / denom * i as f64 * p - ((jf - 1.0) * (2 * m + j) as f64) / denom * p_prev;
        p_prev = p;
        p = next;
    }
    p
}

/// Falling factorial `a (a-1) ... (a-b+1)`.
fn falling(a: i64, b: i64) -> f64 {
    ((a - b + 1)..=a).fold(1.0, |acc, j| acc * j as f64)
}

fn sg_weight(i: i64, t: i64, m: i64, degree: i64) -> f64 {
    (0..=degree)
        .map(|k| {
            (2 * k + 1) as f64 * falling(2 * m, k) / falling(2 * m + k + 1, k + 1) * gram_poly(i, m, k) * gram_poly(t, m, k)
        })
        .sum()
}

/// Reflects an out-of-range index back into `0..len`.
pub fn mirror_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let r = i.rem_euclid(period);
    (if r < len as isize { r } else { period - r }) as usize
}

fn check_shape(signal: &[f64], dim: usize) -> Result<usize, FilterError> {
    if dim == 0 || signal.len() % dim != 0 {
        return Err(FilterError::Shape { len: signal.len(), dim });
    }
    Ok(signal.len() / dim)
}

/// Centered convolution with `kernel` per dimension, mirrored boundaries.
fn convolve(signal: &[f64], dim: usize, kernel: &[f64], left: usize) -> Vec<f64> {
    let len = signal.len() / dim;
    let mut out = vec![0.0; signal.len()];
    for t in 0..len {
        for (j, w) in kernel.iter().enumerate() {
            let src = mirror_index(t as isize + j as isize - left as isize, len);
            for d in 0..dim {
                out[t * dim + d] += w * signal[src * dim + d];
            }
        }
    }
    out
}

/// Savitzky–Golay smoothing of a `T×dim` signal.
pub fn savitzky_golay(signal: &[f64], dim: usize, spec: &SgFilterSpec) -> Result<Vec<f64>, FilterError> {
    spec.validate()?;
    let len = check_shape(signal, dim)?;
    if len < spec.window {
        return Err(FilterError::TooShort { len, window: spec.window });
    }
    Ok(convolve(signal, dim, &spec.coefficients(), spec.window / 2))
}

/// Centered moving average of a `T×dim` signal. Even windows lean one sample
/// to the right.
pub fn moving_average(signal: &[f64], dim: usize, window: usize) -> Result<Vec<f64>, FilterError> {
    if window == 0 {
        return Err(FilterError::Window(0));
    }
    check_shape(signal, dim)?;
    let kernel = vec![1.0 / window as f64; window];
    Ok(convolve(signal, dim, &kernel, (window - 1) / 2))
}

/// A configured smoothing filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Smoother {
    SavitzkyGolay { window: usize, degree: usize },
    MovingAverage { window: usize },
}

impl Smoother {
    pub fn validate(&self) -> Result<(), FilterError> {
        match *self {
            Smoother::SavitzkyGolay { window, degree } => SgFilterSpec::new(window, degree).map(|_| ()),
            Smoother::MovingAverage { window } if window == 0 => Err(FilterError::Window(0)),
            Smoother::MovingAverage { .. } => Ok(()),
        }
    }

    pub fn apply(&self, signal: &[f64], dim: usize) -> Result<Vec<f64>, FilterError> {
        match *self {
            Smoother::SavitzkyGolay { window, degree } => savitzky_golay(signal, dim, &SgFilterSpec { window, degree }),
            Smoother::MovingAverage { window } => moving_average(signal, dim, window),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Centre-row weights of the least-squares fit, from the normal equations
    /// `(JᵀJ) c = Jᵀ` solved by Gauss–Jordan elimination.
    fn normal_equation_weights(window: usize, degree: usize) -> Vec<f64> {
        let half = (window / 2) as f64;
        let p = degree + 1;
        let jac: Vec<Vec<f64>> =
            (0..window).map(|r| (0..p).map(|c| (r as f64 - half).powi(c as i32)).collect()).collect();
        // augmented [JᵀJ | Jᵀ]
        let mut a: Vec<Vec<f64>> = (0..p)
            .map(|i| {
                let mut row: Vec<f64> = (0..p).map(|j| (0..window).map(|r| jac[r][i] * jac[r][j]).sum()).collect();
                row.extend((0..window).map(|r| jac[r][i]));
                row
            })
            .collect();
        for col in 0..p {
            let piv = (col..p).max_by(|x, y| a[*x][col].abs().total_cmp(&a[*y][col].abs())).unwrap();
            a.swap(col, piv);
            let d = a[col][col];
            a[col].iter_mut().for_each(|v| *v /= d);
            for r in 0..p {
                if r != col {
                    let f = a[r][col];
                    let pivot_row = a[col].clone();
                    a[r].iter_mut().zip(&pivot_row).for_each(|(v, q)| *v -= f * q);
                }
            }
        }
        a[0][p..].to_vec()
    }

    #[test]
    fn coefficients_match_least_squares() {
        for (w, d) in [(5, 2), (7, 3), (9, 3), (9, 4), (11, 2), (5, 0)] {
            let got = SgFilterSpec::new(w, d).unwrap().coefficients();
            let want = normal_equation_weights(w, d);
            for (g, e) in got.iter().zip(&want) {
                assert!((g - e).abs() < 1e-12, "({w},{d}): {got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn constant_signal_unchanged() {
        let sig = vec![2.5; 20];
        for out in [
            savitzky_golay(&sig, 1, &SgFilterSpec::new(7, 2).unwrap()).unwrap(),
            moving_average(&sig, 1, 4).unwrap(),
        ] {
            assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-12));
        }
    }

    #[test]
    fn quadratic_reproduced_on_interior() {
        let sig: Vec<f64> = (0..30).map(|t| (t as f64 * 0.1).powi(2)).collect();
        let spec = SgFilterSpec::new(5, 2).unwrap();
        let out = savitzky_golay(&sig, 1, &spec).unwrap();
        for t in 2..28 {
            assert!((out[t] - sig[t]).abs() < 1e-10);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(SgFilterSpec::new(4, 2), Err(FilterError::Window(4)));
        assert_eq!(SgFilterSpec::new(1, 0), Err(FilterError::Window(1)));
        assert_eq!(SgFilterSpec::new(5, 5), Err(FilterError::Degree { window: 5, degree: 5 }));
        let spec = SgFilterSpec::new(7, 2).unwrap();
        assert_eq!(savitzky_golay(&[0.0; 6], 1, &spec), Err(FilterError::TooShort { len: 6, window: 7 }));
        assert!(moving_average(&[0.0; 6], 1, 0).is_err());
        assert!(moving_average(&[0.0; 5], 2, 3).is_err());
    }

    #[test]
    fn moving_average_window_one_is_identity() {
        let sig = [0.3, -1.0, 4.0, 2.0, 9.5, -0.25];
        assert_eq!(moving_average(&sig, 2, 1).unwrap(), sig.to_vec());
    }

    #[test]
    fn moving_average_matches_loop_oracle() {
        let sig = [0.3, -1.0, 4.0, 2.0, 9.5, -0.25, 1.75];
        let out = moving_average(&sig, 1, 3).unwrap();
        let n = sig.len();
        for t in 0..n {
            let left = if t == 0 { sig[1] } else { sig[t - 1] };
            let right = if t == n - 1 { sig[n - 2] } else { sig[t + 1] };
            assert!((out[t] - (left + sig[t] + right) / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dimensions_filtered_independently() {
        let a: Vec<f64> = (0..12).map(|t| ((t * 7) % 5) as f64).collect();
        let b: Vec<f64> = (0..12).map(|t| ((t * 3) % 4) as f64 - 1.0).collect();
        let joint: Vec<f64> = a.iter().zip(&b).flat_map(|(x, y)| [*x, *y]).collect();
        let spec = SgFilterSpec::new(5, 2).unwrap();
        let out = savitzky_golay(&joint, 2, &spec).unwrap();
        let fa = savitzky_golay(&a, 1, &spec).unwrap();
        let fb = savitzky_golay(&b, 1, &spec).unwrap();
        for t in 0..12 {
            assert_eq!(out[2 * t], fa[t]);
            assert_eq!(out[2 * t + 1], fb[t]);
        }
    }

    #[test]
    fn mirror_indices() {
        assert_eq!(mirror_index(-1, 5), 1);
        assert_eq!(mirror_index(-2, 5), 2);
        assert_eq!(mirror_index(5, 5), 3);
        assert_eq!(mirror_index(6, 5), 2);
        assert_eq!(mirror_index(-3, 2), 1);
        assert_eq!(mirror_index(4, 1), 0);
    }

    proptest! {
        #[test]
        fn filters_are_linear(
            x in proptest::collection::vec(-10.0f64..10.0, 16),
            y in proptest::collection::vec(-10.0f64..10.0, 16),
            a in -3.0f64..3.0, b in -3.0f64..3.0,
        ) {
            let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            for f in [Smoother::SavitzkyGolay { window: 7, degree: 3 }, Smoother::MovingAverage { window: 4 }] {
                let fx = f.apply(&x, 2).unwrap();
                let fy = f.apply(&y, 2).unwrap();
                let fc = f.apply(&combo, 2).unwrap();
                for i in 0..16 {
                    prop_assert!((fc[i] - (a * fx[i] + b * fy[i])).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn sg_reproduces_polynomials(coeffs in proptest::collection::vec(-2.0f64..2.0, 4), scale in 0.05f64..0.5) {
            for (w, d) in [(5usize, 2usize), (7, 3), (9, 3)] {
                let sig: Vec<f64> = (0..24)
                    .map(|t| {
                        let x = t as f64 * scale;
                        coeffs.iter().take(d + 1).enumerate().map(|(k, c)| c * x.powi(k as i32)).sum()
                    })
                    .collect();
                let out = savitzky_golay(&sig, 1, &SgFilterSpec::new(w, d).unwrap()).unwrap();
                for t in w / 2..24 - w / 2 {
                    prop_assert!((out[t] - sig[t]).abs() < 1e-10, "({},{}) t={}", w, d, t);
                }
            }
        }
    }
}
