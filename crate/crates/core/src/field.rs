//! Sampled complex fields and the quadrature rules used on them.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex samples of one wave component on an x-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentField {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl ComponentField {
    pub fn new(x: Vec<f64>, values: Vec<Complex64>) -> Self {
        assert_eq!(x.len(), values.len(), "grid and sample counts differ");
        Self { x, values }
    }

    pub fn zeros(x: Vec<f64>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); x.len()];
        Self { x, values }
    }

    pub fn norm_sqr(&self) -> f64 {
        trapezoid(&self.x, |i| self.values[i].norm_sqr())
    }
}

/// `n` equally spaced points on `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * h }).collect()
        }
    }
}

/// Uniform grid with spacing `h` that contains `anchor` as a node and covers
/// `[lo, hi]`.
pub fn anchored_grid(lo: f64, hi: f64, h: f64, anchor: f64) -> Vec<f64> {
    let i_lo = ((lo - anchor) / h).floor() as i64;
    let i_hi = ((hi - anchor) / h).ceil() as i64;
    (i_lo..=i_hi).map(|i| anchor + i as f64 * h).collect()
}

/// Trapezoidal rule over a (possibly non-uniform) grid, integrand given by index.
pub fn trapezoid<F: Fn(usize) -> f64>(x: &[f64], f: F) -> f64 {
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (f(i) + f(i - 1));
    }
    acc
}

pub fn trapezoid_complex<F: Fn(usize) -> Complex64>(x: &[f64], f: F) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 1..x.len() {
        acc += (f(i) + f(i - 1)) * (0.5 * (x[i] - x[i - 1]));
    }
    acc
}

/// Error estimate for the trapezoidal rule on a uniform grid: compares against
/// the rule on every second node and applies the h² Richardson factor.
pub fn trapezoid_error_estimate<F: Fn(usize) -> f64>(x: &[f64], f: F) -> f64 {
    if x.len() < 5 {
        return f64::INFINITY;
    }
    let last = if (x.len() - 1) % 2 == 0 { x.len() - 1 } else { x.len() - 2 };
    let mut coarse = 0.0;
    let mut fine_part = 0.0;
    let mut i = 0;
    while i + 2 <= last {
        coarse += 0.5 * (x[i + 2] - x[i]) * (f(i) + f(i + 2));
        fine_part += 0.5 * (x[i + 1] - x[i]) * (f(i) + f(i + 1))
            + 0.5 * (x[i + 2] - x[i + 1]) * (f(i + 1) + f(i + 2));
        i += 2;
    }
    (fine_part - coarse).abs() / 3.0
}

/// Composite Simpson weights for `n` (odd) equally spaced nodes with spacing `h`.
pub fn simpson_weights(n: usize, h: f64) -> Result<Vec<f64>> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidGrid(format!(
            "Simpson's rule needs an odd node count >= 3, got {n}"
        )));
    }
    Ok((0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect())
}

/// Simpson's rule for `f` on `[lo, hi]` with `intervals` (rounded up to even)
/// subintervals.
pub fn simpson<F: Fn(f64) -> f64>(lo: f64, hi: f64, intervals: usize, f: F) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += c * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}
