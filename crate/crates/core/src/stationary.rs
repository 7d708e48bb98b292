//! Stationary scattering on piecewise-constant barriers.
//!
//! Inside a segment of height `V` the solutions of `ψ'' = 2(V − E)ψ` are
//! propagated as the pair `(ψ, ψ')` with the exact segment propagator, which
//! also covers the band-edge case `E = V` through the linear solution.
//!
//! Outside the barrier a solution is written in the global plane-wave basis
//! `c⁺ e^{ikx} + c⁻ e^{−ikx}` (no per-edge phase offsets), so a flat barrier
//! has the identity transfer matrix.
//!
//! Field evaluation never propagates a decaying solution forward through an
//! opaque region. Every solution is expanded in the two Jost solutions
//! `f` (pure `e^{ikx}` to the right of the barrier, integrated leftwards) and
//! `g` (pure `e^{−ikx}` to the left, integrated rightwards); each grows in its
//! own direction of integration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComponentField;
use crate::potential::PotentialSpec;

pub type Matrix2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// |M22| above this is reported as overflow (κL ≳ 345).
pub const OVERFLOW_LIMIT: f64 = 1e150;

/// A propagating energy `E > 0` and its free wavenumber `k = √(2E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMode {
    energy: f64,
    k: f64,
}

impl EnergyMode {
    pub fn new(energy: f64) -> Result<Self> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::NonPositiveEnergy(energy));
        }
        Ok(Self {
            energy,
            k: (2.0 * energy).sqrt(),
        })
    }

    pub fn from_wavenumber(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::NonPositiveEnergy(0.5 * k * k));
        }
        Ok(Self {
            energy: 0.5 * k * k,
            k,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Local wavevector inside one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavevector {
    pub q: Complex64,
    /// `E == V` exactly; the segment solution is `α + βx`.
    pub degenerate: bool,
}

/// `q = √(2(E − V))`, or `i√(2(V − E))` below the segment height.
pub fn segment_wavevector(energy: f64, height: f64) -> Wavevector {
    let d = energy - height;
    if d == 0.0 {
        Wavevector {
            q: ZERO,
            degenerate: true,
        }
    } else if d > 0.0 {
        Wavevector {
            q: Complex64::new((2.0 * d).sqrt(), 0.0),
            degenerate: false,
        }
    } else {
        Wavevector {
            q: Complex64::new(0.0, (-2.0 * d).sqrt()),
            degenerate: false,
        }
    }
}

/// Value and derivative of a solution at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub psi: Complex64,
    pub dpsi: Complex64,
}

impl State {
    fn new(psi: Complex64, dpsi: Complex64) -> Self {
        Self { psi, dpsi }
    }

    fn is_finite(&self) -> bool {
        self.psi.is_finite() && self.dpsi.is_finite()
    }
}

/// Exact propagation of `(ψ, ψ')` across a distance `dx` (either sign) of
/// constant potential.
fn propagate(wv: Wavevector, dx: f64, s: State) -> State {
    if wv.degenerate {
        return State::new(s.psi + s.dpsi * dx, s.dpsi);
    }
    let (c, sn) = segment_trig(wv.q, dx);
    State::new(c * s.psi + sn / wv.q * s.dpsi, -wv.q * sn * s.psi + c * s.dpsi)
}

fn segment_trig(q: Complex64, dx: f64) -> (Complex64, Complex64) {
    let z = q * dx;
    if q.im == 0.0 {
        let (s, c) = z.re.sin_cos();
        (Complex64::new(c, 0.0), Complex64::new(s, 0.0))
    } else {
        // q = iκ: cos(iκx) = cosh κx, sin(iκx) = i sinh κx
        let y = z.im;
        (Complex64::new(y.cosh(), 0.0), Complex64::new(0.0, y.sinh()))
    }
}

fn propagator_matrix(wv: Wavevector, dx: f64) -> Matrix2 {
    if wv.degenerate {
        return [[ONE, Complex64::new(dx, 0.0)], [ZERO, ONE]];
    }
    let (c, s) = segment_trig(wv.q, dx);
    [[c, s / wv.q], [-wv.q * s, c]]
}

fn matmul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn det(m: &Matrix2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn plane(k: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, k * x)
}

/// `(ψ, ψ')` at `x` of `c⁺ e^{ikx} + c⁻ e^{−ikx}`.
fn state_from_pair(k: f64, x: f64, plus: Complex64, minus: Complex64) -> State {
    let ep = plane(k, x);
    let em = ep.conj();
    State::new(plus * ep + minus * em, I * k * (plus * ep - minus * em))
}

/// Inverse of [`state_from_pair`].
fn pair_from_state(k: f64, x: f64, s: State) -> (Complex64, Complex64) {
    let ep = plane(k, x);
    let d = s.dpsi / (I * k);
    (0.5 * (s.psi + d) * ep.conj(), 0.5 * (s.psi - d) * ep)
}

/// Complex amplitudes of the stationary state incident from the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    /// Coefficient of `e^{ikx}` to the right of the barrier.
    pub transmitted: Complex64,
    /// Coefficient of `e^{−ikx}` to the left of the barrier.
    pub reflected: Complex64,
    pub transmission: f64,
    pub reflection: f64,
}

impl ScatteringAmplitudes {
    fn from_amplitudes(transmitted: Complex64, reflected: Complex64) -> Self {
        Self {
            transmitted,
            reflected,
            transmission: transmitted.norm_sqr(),
            reflection: reflected.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Asymptotic plane-wave pair on one side of the barrier.
///
/// On the left `incoming` multiplies `e^{ikx}` and `outgoing` multiplies
/// `e^{−ikx}`; on the right the roles of the two exponentials swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryAmplitudes {
    pub incoming: Complex64,
    pub outgoing: Complex64,
    pub side: Side,
}

impl BoundaryAmplitudes {
    pub fn left(incoming: Complex64, outgoing: Complex64) -> Self {
        Self {
            incoming,
            outgoing,
            side: Side::Left,
        }
    }

    pub fn right(incoming: Complex64, outgoing: Complex64) -> Self {
        Self {
            incoming,
            outgoing,
            side: Side::Right,
        }
    }
}

/// Transfer matrix from the left pair at `a` to the right pair at `b`.
pub fn total_transfer(spec: &PotentialSpec, mode: EnergyMode) -> Result<Matrix2> {
    let k = mode.k();
    let e = mode.energy();
    let mut p: Matrix2 = [[ONE, ZERO], [ZERO, ONE]];
    for seg in spec.segments() {
        let wv = segment_wavevector(e, seg.height);
        p = matmul(&propagator_matrix(wv, seg.width), &p);
    }
    let (a, b) = (spec.left_edge(), spec.right_edge());
    // columns: states at a of e^{ikx} and e^{−ikx}
    let ea = plane(k, a);
    let w_a: Matrix2 = [[ea, ea.conj()], [I * k * ea, -I * k * ea.conj()]];
    let eb = plane(k, b);
    let ik2 = 2.0 * I * k;
    let w_b_inv: Matrix2 = [
        [0.5 * eb.conj(), eb.conj() / ik2],
        [0.5 * eb, -eb / ik2],
    ];
    let m = matmul(&w_b_inv, &matmul(&p, &w_a));
    let finite = m.iter().flatten().all(|z| z.is_finite());
    let mag = m[1][1].norm();
    if !finite || mag > OVERFLOW_LIMIT {
        return Err(Error::Overflow {
            magnitude: if finite { mag } else { f64::INFINITY },
        });
    }
    Ok(m)
}

/// Amplitudes of `e^{ikx} + A_R e^{−ikx}` (left) and `A_T e^{ikx}` (right).
pub fn solve_full(spec: &PotentialSpec, mode: EnergyMode) -> Result<ScatteringAmplitudes> {
    let m = total_transfer(spec, mode)?;
    // (A_T, 0) = M (1, A_R)
    if m[1][1].norm() < 1e-300 {
        return Err(Error::SolveSingular);
    }
    let reflected = -m[1][0] / m[1][1];
    let transmitted = ONE / m[1][1];
    Ok(ScatteringAmplitudes::from_amplitudes(transmitted, reflected))
}

/// Coordinates of a solution in the Jost basis: `ψ = α f + β g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionCoeffs {
    pub alpha: Complex64,
    pub beta: Complex64,
}

/// Values and derivatives of both Jost solutions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostBasis {
    pub f: State,
    pub g: State,
}

impl JostBasis {
    #[inline]
    pub fn combine(&self, c: SolutionCoeffs) -> State {
        State::new(
            c.alpha * self.f.psi + c.beta * self.g.psi,
            c.alpha * self.f.dpsi + c.beta * self.g.dpsi,
        )
    }
}

/// Precomputed stationary solver for one barrier at one energy.
#[derive(Debug, Clone)]
pub struct Scatterer {
    mode: EnergyMode,
    edges: Vec<f64>,
    wavevectors: Vec<Wavevector>,
    f_edges: Vec<State>,
    g_edges: Vec<State>,
    // left pair of f, right pair of g
    f_left: (Complex64, Complex64),
    g_right: (Complex64, Complex64),
    amplitudes: ScatteringAmplitudes,
}

impl Scatterer {
    pub fn new(spec: &PotentialSpec, mode: EnergyMode) -> Result<Self> {
        let k = mode.k();
        let edges = spec.edges().to_vec();
        let wavevectors: Vec<Wavevector> = spec
            .segments()
            .iter()
            .map(|s| segment_wavevector(mode.energy(), s.height))
            .collect();
        let n = wavevectors.len();
        let (a, b) = (edges[0], edges[n]);

        let mut g_edges = Vec::with_capacity(n + 1);
        g_edges.push(state_from_pair(k, a, ZERO, ONE));
        for j in 0..n {
            let next = propagate(wavevectors[j], edges[j + 1] - edges[j], g_edges[j]);
            g_edges.push(next);
        }
        let mut f_edges = vec![State::new(ZERO, ZERO); n + 1];
        f_edges[n] = state_from_pair(k, b, ONE, ZERO);
        for j in (0..n).rev() {
            f_edges[j] = propagate(wavevectors[j], edges[j] - edges[j + 1], f_edges[j + 1]);
        }
        if !f_edges[0].is_finite() || !g_edges[n].is_finite() {
            return Err(Error::Overflow {
                magnitude: f64::INFINITY,
            });
        }
        let f_left = pair_from_state(k, a, f_edges[0]);
        let g_right = pair_from_state(k, b, g_edges[n]);
        let mag = f_left.0.norm();
        if !mag.is_finite() || mag > OVERFLOW_LIMIT {
            return Err(Error::Overflow { magnitude: mag });
        }
        if mag < 1e-300 {
            return Err(Error::SolveSingular);
        }
        // Ψ_full = t f: left pair of f is (1/t, r/t)
        let transmitted = ONE / f_left.0;
        let reflected = f_left.1 / f_left.0;
        Ok(Self {
            mode,
            edges,
            wavevectors,
            f_edges,
            g_edges,
            f_left,
            g_right,
            amplitudes: ScatteringAmplitudes::from_amplitudes(transmitted, reflected),
        })
    }

    pub fn mode(&self) -> EnergyMode {
        self.mode
    }

    pub fn amplitudes(&self) -> ScatteringAmplitudes {
        self.amplitudes
    }

    pub fn left_edge(&self) -> f64 {
        self.edges[0]
    }

    pub fn right_edge(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Wavevector of the segment containing `x`, or `None` outside `[a, b)`.
    pub fn wavevector_at(&self, x: f64) -> Option<Wavevector> {
        if x < self.left_edge() || x >= self.right_edge() {
            return None;
        }
        let idx = self.edges.partition_point(|&e| e <= x) - 1;
        Some(self.wavevectors[idx.min(self.wavevectors.len() - 1)])
    }

    /// Jost coordinates of the solution with the given asymptotic pair.
    pub fn coefficients(&self, boundary: BoundaryAmplitudes) -> SolutionCoeffs {
        match boundary.side {
            Side::Left => {
                let alpha = boundary.incoming / self.f_left.0;
                let beta = boundary.outgoing - boundary.incoming * self.amplitudes.reflected;
                SolutionCoeffs { alpha, beta }
            }
            Side::Right => {
                // right: f = e^{ikx}, g = G⁺ e^{ikx} + G⁻ e^{−ikx}
                let beta = boundary.incoming / self.g_right.1;
                let alpha = boundary.outgoing - beta * self.g_right.0;
                SolutionCoeffs { alpha, beta }
            }
        }
    }

    /// Both Jost solutions at `x`.
    pub fn basis(&self, x: f64) -> JostBasis {
        let k = self.mode.k();
        let n = self.wavevectors.len();
        if x <= self.edges[0] {
            return JostBasis {
                f: state_from_pair(k, x, self.f_left.0, self.f_left.1),
                g: state_from_pair(k, x, ZERO, ONE),
            };
        }
        if x >= self.edges[n] {
            return JostBasis {
                f: state_from_pair(k, x, ONE, ZERO),
                g: state_from_pair(k, x, self.g_right.0, self.g_right.1),
            };
        }
        let j = (self.edges.partition_point(|&e| e <= x) - 1).min(n - 1);
        let wv = self.wavevectors[j];
        JostBasis {
            f: propagate(wv, x - self.edges[j + 1], self.f_edges[j + 1]),
            g: propagate(wv, x - self.edges[j], self.g_edges[j]),
        }
    }

    pub fn state(&self, c: SolutionCoeffs, x: f64) -> State {
        self.basis(x).combine(c)
    }

    /// Asymptotic pair of a solution on the requested side.
    pub fn boundary_pair(&self, c: SolutionCoeffs, side: Side) -> BoundaryAmplitudes {
        let k = self.mode.k();
        match side {
            Side::Left => {
                let x = self.left_edge();
                let (p, m) = pair_from_state(k, x, self.state(c, x));
                BoundaryAmplitudes::left(p, m)
            }
            Side::Right => {
                let x = self.right_edge();
                let (p, m) = pair_from_state(k, x, self.state(c, x));
                BoundaryAmplitudes::right(m, p)
            }
        }
    }
}

/// Samples of the unique solution fixed by an asymptotic pair.
pub fn evaluate_state(
    spec: &PotentialSpec,
    mode: EnergyMode,
    boundary: BoundaryAmplitudes,
    x_grid: &[f64],
) -> Result<ComponentField> {
    let sc = Scatterer::new(spec, mode)?;
    let c = sc.coefficients(boundary);
    let values = x_grid.iter().map(|&x| sc.state(c, x).psi).collect();
    Ok(ComponentField::new(x_grid.to_vec(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Segment;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn closed_form_t(v0: f64, l: f64, e: f64) -> f64 {
        if e < v0 {
            let kappa = (2.0 * (v0 - e)).sqrt();
            1.0 / (1.0 + v0 * v0 * (kappa * l).sinh().powi(2) / (4.0 * e * (v0 - e)))
        } else if e > v0 {
            let q = (2.0 * (e - v0)).sqrt();
            1.0 / (1.0 + v0 * v0 * (q * l).sin().powi(2) / (4.0 * e * (e - v0)))
        } else {
            1.0 / (1.0 + v0 * l * l / 2.0)
        }
    }

    #[test]
    fn wavevector_cases() {
        assert_eq!(segment_wavevector(2.0, 0.0).q, Complex64::new(2.0, 0.0));
        assert_eq!(segment_wavevector(0.5, 2.5).q, Complex64::new(0.0, 2.0));
        let d = segment_wavevector(1.0, 1.0);
        assert!(d.degenerate);
        assert_eq!(d.q, ZERO);
    }

    #[test]
    fn energy_must_be_positive() {
        assert!(EnergyMode::new(0.0).is_err());
        assert!(EnergyMode::new(-1.0).is_err());
        assert_eq!(EnergyMode::new(2.0).unwrap().k(), 2.0);
    }

    #[test]
    fn flat_barrier_is_identity() {
        let spec = PotentialSpec::rectangular(0.0, 3.0, -1.2).unwrap();
        let m = total_transfer(&spec, EnergyMode::new(0.8).unwrap()).unwrap();
        assert_relative_eq!(m[0][0].norm(), 1.0, epsilon = 1e-14);
        assert!(m[0][1].norm() < 1e-14);
        let amp = solve_full(&spec, EnergyMode::new(0.8).unwrap()).unwrap();
        assert_relative_eq!(amp.transmission, 1.0, epsilon = 1e-14);
        assert!(amp.reflected.norm() < 1e-14);
    }

    #[test]
    fn determinant_is_one() {
        let spec = PotentialSpec::rectangular(2.0, 1.0, 0.0).unwrap();
        let m = total_transfer(&spec, EnergyMode::new(1.0).unwrap()).unwrap();
        assert!((det(&m) - ONE).norm() < 1e-12);
    }

    #[test]
    fn rectangular_closed_form() {
        let spec = PotentialSpec::rectangular(1.0, 2.0, 0.0).unwrap();
        let amp = solve_full(&spec, EnergyMode::new(0.5).unwrap()).unwrap();
        let expected = 1.0 / (1.0 + 2.0f64.sinh().powi(2));
        assert_relative_eq!(amp.transmission, expected, max_relative = 1e-13);
        assert!((amp.transmission - 0.0703).abs() < 5e-4);

        // E == V0 goes through the linear segment solution
        let spec = PotentialSpec::rectangular(1.5, 2.0, 0.3).unwrap();
        let amp = solve_full(&spec, EnergyMode::new(1.5).unwrap()).unwrap();
        assert_relative_eq!(amp.transmission, 1.0 / (1.0 + 1.5 * 4.0 / 2.0), max_relative = 1e-13);
        assert_relative_eq!(amp.transmission, closed_form_t(1.5, 2.0, 1.5), max_relative = 1e-13);
    }

    #[test]
    fn jost_route_matches_transfer_matrix() {
        let spec = PotentialSpec::piecewise(
            -0.4,
            vec![Segment::new(0.5, 1.0), Segment::new(1.0, -0.5), Segment::new(0.5, 1.0)],
        )
        .unwrap();
        for e in [0.1, 0.5, 1.0, 3.0] {
            let mode = EnergyMode::new(e).unwrap();
            let a = solve_full(&spec, mode).unwrap();
            let b = Scatterer::new(&spec, mode).unwrap().amplitudes();
            assert!((a.transmitted - b.transmitted).norm() < 1e-13);
            assert!((a.reflected - b.reflected).norm() < 1e-13);
        }
    }

    #[test]
    fn free_state_is_plane_wave() {
        let spec = PotentialSpec::rectangular(0.0, 2.0, 0.0).unwrap();
        let mode = EnergyMode::new(0.72).unwrap();
        let x: Vec<f64> = (0..50).map(|i| -3.0 + 0.17 * i as f64).collect();
        let f = evaluate_state(&spec, mode, BoundaryAmplitudes::left(ONE, ZERO), &x).unwrap();
        for (xi, v) in x.iter().zip(&f.values) {
            assert!((v - plane(mode.k(), *xi)).norm() < 1e-13);
        }
    }

    #[test]
    fn full_state_right_side() {
        let spec = PotentialSpec::rectangular(1.0, 2.0, -1.0).unwrap();
        let mode = EnergyMode::new(0.5).unwrap();
        let amp = solve_full(&spec, mode).unwrap();
        let x: Vec<f64> = (0..40).map(|i| 1.0 + 0.25 * i as f64).collect();
        let f = evaluate_state(&spec, mode, BoundaryAmplitudes::left(ONE, amp.reflected), &x).unwrap();
        for (xi, v) in x.iter().zip(&f.values) {
            assert!((v - amp.transmitted * plane(mode.k(), *xi)).norm() < 1e-10);
        }
    }

    #[test]
    fn right_side_boundary_roundtrip() {
        let spec = PotentialSpec::rectangular(1.3, 1.7, 0.2).unwrap();
        let sc = Scatterer::new(&spec, EnergyMode::new(0.9).unwrap()).unwrap();
        let c = sc.coefficients(BoundaryAmplitudes::left(Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.5)));
        let right = sc.boundary_pair(c, Side::Right);
        let c2 = sc.coefficients(right);
        for x in [-1.0, 0.5, 1.0, 3.0] {
            assert!((sc.state(c, x).psi - sc.state(c2, x).psi).norm() < 1e-12);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let spec = PotentialSpec::rectangular(50.0, 60.0, 0.0).unwrap();
        assert!(matches!(
            solve_full(&spec, EnergyMode::new(1.0).unwrap()),
            Err(Error::Overflow { .. })
        ));
        assert!(matches!(
            Scatterer::new(&spec, EnergyMode::new(1.0).unwrap()),
            Err(Error::Overflow { .. })
        ));
    }

    proptest! {
        #[test]
        fn linearity(
            ar in -1.0..1.0f64, ai in -1.0..1.0f64, br in -1.0..1.0f64, bi in -1.0..1.0f64,
            e in 0.1..3.0f64,
        ) {
            let spec = PotentialSpec::rectangular(1.0, 2.0, -1.0).unwrap();
            let mode = EnergyMode::new(e).unwrap();
            let alpha = Complex64::new(ar, ai);
            let beta = Complex64::new(br, bi);
            let b1 = BoundaryAmplitudes::left(Complex64::new(0.7, -0.2), Complex64::new(0.1, 0.4));
            let b2 = BoundaryAmplitudes::left(Complex64::new(-0.3, 0.5), Complex64::new(0.9, 0.0));
            let comb = BoundaryAmplitudes::left(
                alpha * b1.incoming + beta * b2.incoming,
                alpha * b1.outgoing + beta * b2.outgoing,
            );
            let x: Vec<f64> = (0..60).map(|i| -4.0 + 0.13 * i as f64).collect();
            let f1 = evaluate_state(&spec, mode, b1, &x).unwrap();
            let f2 = evaluate_state(&spec, mode, b2, &x).unwrap();
            let fc = evaluate_state(&spec, mode, comb, &x).unwrap();
            for i in 0..x.len() {
                let lhs = fc.values[i];
                let rhs = alpha * f1.values[i] + beta * f2.values[i];
                prop_assert!((lhs - rhs).norm() < 1e-10);
            }
        }

        #[test]
        fn unitarity_and_determinant(
            h1 in -1.0..6.0f64, h2 in -1.0..6.0f64, w1 in 0.1..2.0f64, w2 in 0.1..2.0f64,
            loge in -2.0..2.0f64,
        ) {
            let spec = PotentialSpec::general(0.3, vec![Segment::new(w1, h1), Segment::new(w2, h2)]).unwrap();
            let mode = EnergyMode::new(10f64.powf(loge)).unwrap();
            let amp = solve_full(&spec, mode).unwrap();
            prop_assert!((amp.transmission + amp.reflection - 1.0).abs() < 1e-10);
            let m = total_transfer(&spec, mode).unwrap();
            let scale = (m[0][0] * m[1][1]).norm().max(1.0);
            prop_assert!((det(&m) - ONE).norm() < 1e-10 * scale);
        }
    }
}
