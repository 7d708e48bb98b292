//! Independent reference solutions shared by the integration tests.
//!
//! Nothing here calls into the transfer-matrix or spectral code: the barrier
//! is integrated with plain RK4 and the free packet is the textbook Gaussian.

#![allow(dead_code)]

use num_complex::Complex64;
use tunnelsplit::potential::PotentialSpec;

pub const CANONICAL_CONFIG: &str = r#"{
    "potential": {"a": -1.0, "segments": [[2.0, 1.0]]},
    "packet": {"k0": 1.0, "sigma_k": 0.05, "x0": -60.0}
}"#;

/// Rectangular-barrier transmission probability in closed form.
pub fn rectangular_transmission(v0: f64, width: f64, e: f64) -> f64 {
    if e < v0 {
        let kappa = (2.0 * (v0 - e)).sqrt();
        let s = (kappa * width).sinh();
        1.0 / (1.0 + v0 * v0 * s * s / (4.0 * e * (v0 - e)))
    } else if e > v0 {
        let q = (2.0 * (e - v0)).sqrt();
        let s = (q * width).sin();
        1.0 / (1.0 + v0 * v0 * s * s / (4.0 * e * (e - v0)))
    } else {
        1.0 / (1.0 + v0 * width * width / 2.0)
    }
}

type Y = [Complex64; 2];

fn rhs(v: f64, e: f64, y: Y) -> Y {
    [y[1], 2.0 * (v - e) * y[0]]
}

fn rk4(v: f64, e: f64, y: Y, h: f64) -> Y {
    let add = |a: Y, b: Y, s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let k1 = rhs(v, e, y);
    let k2 = rhs(v, e, add(y, k1, h / 2.0));
    let k3 = rhs(v, e, add(y, k2, h / 2.0));
    let k4 = rhs(v, e, add(y, k3, h));
    [
        y[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
        y[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
    ]
}

/// Integrates the solution that is `e^{ikx}` right of the barrier leftwards
/// to `x_target`, with at most `h_max` per step and no step straddling an edge.
fn integrate_left(spec: &PotentialSpec, e: f64, x_target: f64, h_max: f64) -> Y {
    let k = (2.0 * e).sqrt();
    let edges = spec.edges();
    let b = *edges.last().unwrap();
    let i = Complex64::i();
    let mut x = b;
    let mut y = [(i * k * b).exp(), i * k * (i * k * b).exp()];
    for (j, seg) in spec.segments().iter().enumerate().rev() {
        let lo = edges[j].max(x_target);
        if lo >= x {
            break;
        }
        let n = ((x - lo) / h_max).ceil().max(1.0) as usize;
        let h = (x - lo) / n as f64;
        for _ in 0..n {
            y = rk4(seg.height, e, y, -h);
        }
        x = lo;
    }
    y
}

/// Transmission and reflection amplitudes `(t, r)` from direct ODE
/// integration.
pub fn ode_amplitudes(spec: &PotentialSpec, e: f64, h_max: f64) -> (Complex64, Complex64) {
    let k = (2.0 * e).sqrt();
    let a = spec.left_edge();
    let y = integrate_left(spec, e, a, h_max);
    let i = Complex64::i();
    let d = y[1] / (i * k);
    let plus = 0.5 * (y[0] + d) * (-i * k * a).exp();
    let minus = 0.5 * (y[0] - d) * (i * k * a).exp();
    (1.0 / plus, minus / plus)
}

/// `Ψ_full(x)` (incident amplitude 1) from direct ODE integration.
pub fn ode_full_psi(spec: &PotentialSpec, e: f64, x: f64, h_max: f64) -> Complex64 {
    let (t, r) = ode_amplitudes(spec, e, h_max);
    let k = (2.0 * e).sqrt();
    let i = Complex64::i();
    if x >= spec.right_edge() {
        t * (i * k * x).exp()
    } else if x <= spec.left_edge() {
        (i * k * x).exp() + r * (-i * k * x).exp()
    } else {
        t * integrate_left(spec, e, x, h_max)[0]
    }
}

/// Free Gaussian packet with spectrum
/// `(2πσ²)^{-1/4} exp(−(k−k0)²/(4σ²) − ikx0)` at time `t`, from the Gaussian
/// integral over k in closed form.
pub fn free_gaussian(k0: f64, sigma: f64, x0: f64, t: f64, x: f64) -> Complex64 {
    let s2 = sigma * sigma;
    let a = Complex64::new(1.0 / (4.0 * s2), t / 2.0);
    let b = Complex64::new(k0 / (2.0 * s2), x - x0);
    let c = -k0 * k0 / (4.0 * s2);
    let pi = std::f64::consts::PI;
    let pref = (2.0 * pi * s2).powf(-0.25) / (2.0 * pi).sqrt();
    (Complex64::new(pi, 0.0) / a).sqrt() * (b * b / (4.0 * a) + c).exp() * pref
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares fit `y = α + β s` returning `(α, β, R²)`.
pub fn linear_fit(s: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = s.len() as f64;
    let ms = s.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = s.iter().zip(y).map(|(a, b)| (a - ms) * (b - my)).sum();
    let sxx: f64 = s.iter().map(|a| (a - ms).powi(2)).sum();
    let beta = sxy / sxx;
    let alpha = my - beta * ms;
    let ss_res: f64 = s.iter().zip(y).map(|(a, b)| (b - alpha - beta * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (alpha, beta, 1.0 - ss_res / ss_tot)
}

/// Least-squares fit `y = c0 + c1 t + c2 t²` returning `([c0, c1, c2], R²)`.
/// The fit runs in `t − mean(t)` for conditioning; `c2` is unaffected by
/// the shift and the others are mapped back.
pub fn quadratic_fit(t: &[f64], y: &[f64]) -> ([f64; 3], f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let s: Vec<f64> = t.iter().map(|v| v - mt).collect();
    let mut a = [[0.0f64; 4]; 3];
    for (si, yi) in s.iter().zip(y) {
        let basis = [1.0, *si, si * si];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += basis[r] * basis[c];
            }
            a[r][3] += basis[r] * yi;
        }
    }
    // Gauss-Jordan with partial pivoting on the 3×3 normal equations
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..4 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let d = [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]];
    let my = y.iter().sum::<f64>() / n;
    let ss_res: f64 = s.iter().zip(y).map(|(si, yi)| (yi - d[0] - d[1] * si - d[2] * si * si).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - my).powi(2)).sum();
    let coeffs = [d[0] - d[1] * mt + d[2] * mt * mt, d[1] - 2.0 * d[2] * mt, d[2]];
    (coeffs, 1.0 - ss_res / ss_tot)
}
