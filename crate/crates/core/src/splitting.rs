//! Splitting of the stationary scattering state into transmission and
//! reflection sub-process states.
//!
//! For a symmetric barrier with midpoint `x_c` the full state
//! `Ψ_full = e^{ikx} + A_R e^{−ikx}` (left), `A_T e^{ikx}` (right) is written as
//! `Ψ_full = Ψ_tr + Ψ_ref`, where both terms solve the stationary equation and
//! have left-side pairs `(A_tr_in, 0)` and `(A_ref_in, A_R)`. The incident
//! amplitudes satisfy
//!
//! ```text
//! A_tr_in + A_ref_in = 1,   |A_tr_in|² = T,   |A_ref_in|² = R
//! ```
//!
//! which has exactly two solutions, `A_tr_in = T ± i√(TR)`. One of them makes
//! `Ψ_ref` odd about `x_c` (so `Ψ_ref(x_c) = 0`); that root is selected
//! empirically by evaluating both candidates at the midpoint.
//!
//! The sub-process components are then cut at `x_c`:
//! `ψ_ref = Ψ_ref, ψ_tr = Ψ_tr` for `x ≤ x_c` and `ψ_ref = 0, ψ_tr = Ψ_full`
//! beyond it.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::stationary::{
    BoundaryAmplitudes, EnergyMode, ScatteringAmplitudes, Scatterer, Side, SolutionCoeffs, State,
};

/// Absolute bound on `|Ψ_ref(x_c)|` for the odd root (incident amplitude 1).
pub const PARITY_TOL: f64 = 1e-8;
/// Relative bound on `max |Ψ_ref(x_c − d) + Ψ_ref(x_c + d)|`.
pub const ODDNESS_TOL: f64 = 1e-7;
/// Tolerance on `T + R = 1` accepted by the root construction.
pub const NORMALIZATION_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
    Undetermined,
}

/// One solution of the incident-amplitude constraint system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitAmplitudes {
    pub tr_in: Complex64,
    pub ref_in: Complex64,
    /// Sign in front of `i√(TR)` in `tr_in`.
    pub root_sign: i8,
    pub parity: Parity,
}

/// The two roots `A_tr_in = T ± i√(TR)`, `A_ref_in = 1 − A_tr_in`.
pub fn split_amplitude_candidates(t: f64, r: f64) -> Result<[SplitAmplitudes; 2]> {
    let sum = t + r;
    if !sum.is_finite() || (sum - 1.0).abs() > NORMALIZATION_TOL || t < -NORMALIZATION_TOL || r < -NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum });
    }
    let t = t.clamp(0.0, 1.0);
    let r = r.clamp(0.0, 1.0);
    let s = (t * r).sqrt();
    let make = |sign: i8| {
        let tr_in = Complex64::new(t, f64::from(sign) * s);
        SplitAmplitudes {
            tr_in,
            ref_in: Complex64::new(1.0, 0.0) - tr_in,
            root_sign: sign,
            parity: Parity::Undetermined,
        }
    };
    Ok([make(1), make(-1)])
}

/// Jost coordinates of `Ψ_ref` for one root. `β = r − r·A_ref_in` is formed
/// as `r·A_tr_in`; the subtraction loses everything once `|A_tr_in| ~ √T` is
/// tiny, and `g` is of size `1/√T` on the far side of an opaque barrier.
fn ref_coefficients(scatterer: &Scatterer, root: SplitAmplitudes) -> SolutionCoeffs {
    let amp = scatterer.amplitudes();
    let alpha = scatterer
        .coefficients(BoundaryAmplitudes::left(root.ref_in, amp.reflected))
        .alpha;
    SolutionCoeffs {
        alpha,
        beta: amp.reflected * root.tr_in,
    }
}

/// Which wave a sample refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Component {
    /// `Ψ_full`
    Full,
    /// `Ψ_tr` on the whole line
    WholeTr,
    /// `Ψ_ref` on the whole line
    WholeRef,
    /// `ψ_tr`, cut at `x_c`
    Tr,
    /// `ψ_ref`, cut at `x_c`
    Ref,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Full,
        Component::WholeTr,
        Component::WholeRef,
        Component::Tr,
        Component::Ref,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Component::Full => "full",
            Component::WholeTr => "TR",
            Component::WholeRef => "REF",
            Component::Tr => "tr",
            Component::Ref => "ref",
        }
    }
}

/// Solver plus the Jost coordinates of the three whole-line states; enough to
/// evaluate every component anywhere.
#[derive(Debug, Clone)]
pub struct SplitStates {
    scatterer: Scatterer,
    x_c: f64,
    full: SolutionCoeffs,
    whole_tr: SolutionCoeffs,
    whole_ref: SolutionCoeffs,
    split: SplitAmplitudes,
    rejected: SplitAmplitudes,
    midpoint_residual: f64,
    rejected_midpoint_residual: f64,
}

impl SplitStates {
    /// Builds both candidate roots and keeps the one whose `Ψ_ref` vanishes at
    /// the barrier midpoint.
    pub fn new(spec: &PotentialSpec, mode: EnergyMode) -> Result<Self> {
        if !spec.is_symmetric() {
            return Err(Error::AsymmetricPotential { mismatch: f64::NAN });
        }
        let scatterer = Scatterer::new(spec, mode)?;
        let amp = scatterer.amplitudes();
        let x_c = spec.midpoint();
        let candidates = split_amplitude_candidates(amp.transmission, amp.reflection)?;
        let ref_coeffs = candidates.map(|c| ref_coefficients(&scatterer, c));
        let residuals = ref_coeffs.map(|c| scatterer.state(c, x_c).psi.norm());

        let pass = residuals.map(|r| r < PARITY_TOL);
        let chosen = match pass {
            [true, false] => 0,
            [false, true] => 1,
            [true, true] => usize::from(residuals[1] < residuals[0]),
            [false, false] => {
                return Err(Error::OddSelectionFailed {
                    residual_plus: residuals[0],
                    residual_minus: residuals[1],
                })
            }
        };
        let other = 1 - chosen;
        let both = pass[0] && pass[1];
        let mut split = candidates[chosen];
        let mut rejected = candidates[other];
        split.parity = if both { Parity::Undetermined } else { Parity::Odd };
        rejected.parity = if both { Parity::Undetermined } else { Parity::Even };

        let full = scatterer.coefficients(BoundaryAmplitudes::left(Complex64::new(1.0, 0.0), amp.reflected));
        let whole_tr = scatterer.coefficients(BoundaryAmplitudes::left(split.tr_in, ZERO));
        Ok(Self {
            scatterer,
            x_c,
            full,
            whole_tr,
            whole_ref: ref_coeffs[chosen],
            split,
            rejected,
            midpoint_residual: residuals[chosen],
            rejected_midpoint_residual: residuals[other],
        })
    }

    pub fn scatterer(&self) -> &Scatterer {
        &self.scatterer
    }

    pub fn mode(&self) -> EnergyMode {
        self.scatterer.mode()
    }

    pub fn amplitudes(&self) -> ScatteringAmplitudes {
        self.scatterer.amplitudes()
    }

    pub fn split(&self) -> SplitAmplitudes {
        self.split
    }

    /// The root that was not selected (even `Ψ_ref` when the roots differ).
    pub fn rejected(&self) -> SplitAmplitudes {
        self.rejected
    }

    pub fn midpoint(&self) -> f64 {
        self.x_c
    }

    pub fn midpoint_residual(&self) -> f64 {
        self.midpoint_residual
    }

    pub fn rejected_midpoint_residual(&self) -> f64 {
        self.rejected_midpoint_residual
    }

    pub fn coefficients(&self, which: Component) -> SolutionCoeffs {
        match which {
            Component::Full => self.full,
            Component::WholeTr | Component::Tr => self.whole_tr,
            Component::WholeRef | Component::Ref => self.whole_ref,
        }
    }

    /// Jost coordinates of `Ψ_ref` built from the rejected root.
    pub fn rejected_ref_coefficients(&self) -> SolutionCoeffs {
        ref_coefficients(&self.scatterer, self.rejected)
    }

    /// Value and derivative of a component. The cut components take their
    /// left branch at `x = x_c`.
    pub fn state(&self, which: Component, x: f64) -> State {
        let basis = self.scatterer.basis(x);
        self.state_from_basis(which, x, &basis)
    }

    #[inline]
    pub fn state_from_basis(
        &self,
        which: Component,
        x: f64,
        basis: &crate::stationary::JostBasis,
    ) -> State {
        let right = x > self.x_c;
        match which {
            Component::Full => basis.combine(self.full),
            Component::WholeTr => basis.combine(self.whole_tr),
            Component::WholeRef => basis.combine(self.whole_ref),
            Component::Tr if right => basis.combine(self.full),
            Component::Tr => basis.combine(self.whole_tr),
            Component::Ref if right => State {
                psi: ZERO,
                dpsi: ZERO,
            },
            Component::Ref => basis.combine(self.whole_ref),
        }
    }

    /// Outgoing amplitude of a sub-process: the right-side `e^{ikx}`
    /// coefficient of `ψ_tr`, or the left-side `e^{−ikx}` coefficient of
    /// `ψ_ref`.
    pub fn outgoing_amplitude(&self, which: Component) -> Complex64 {
        match which {
            Component::Tr | Component::WholeTr => {
                // ψ_tr coincides with Ψ_full beyond x_c
                self.scatterer.boundary_pair(self.full, Side::Right).outgoing
            }
            Component::Ref | Component::WholeRef => {
                self.scatterer.boundary_pair(self.whole_ref, Side::Left).outgoing
            }
            Component::Full => self.amplitudes().transmitted,
        }
    }

    /// Largest relative deviation from `Ψ_ref(x_c − d) = −Ψ_ref(x_c + d)` over
    /// the given offsets.
    pub fn oddness_residual(&self, offsets: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &d in offsets {
            let l = self.state(Component::WholeRef, self.x_c - d).psi;
            let r = self.state(Component::WholeRef, self.x_c + d).psi;
            worst = worst.max((l + r).norm());
            scale = scale.max(l.norm()).max(r.norm());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// Stationary decomposition sampled on an x-grid.
#[derive(Debug, Clone)]
pub struct StationaryDecomposition {
    pub states: SplitStates,
    pub x: Vec<f64>,
    pub full: Vec<Complex64>,
    pub whole_tr: Vec<Complex64>,
    pub whole_ref: Vec<Complex64>,
    pub tr: Vec<Complex64>,
    pub ref_: Vec<Complex64>,
    /// `Ψ_ref` built from the rejected root, kept for diagnostics.
    pub rejected_ref: Vec<Complex64>,
    pub oddness_residual: f64,
}

impl StationaryDecomposition {
    pub fn mode(&self) -> EnergyMode {
        self.states.mode()
    }

    pub fn amplitudes(&self) -> ScatteringAmplitudes {
        self.states.amplitudes()
    }

    pub fn split(&self) -> SplitAmplitudes {
        self.states.split()
    }

    pub fn midpoint(&self) -> f64 {
        self.states.midpoint()
    }

    pub fn field(&self, which: Component) -> &[Complex64] {
        match which {
            Component::Full => &self.full,
            Component::WholeTr => &self.whole_tr,
            Component::WholeRef => &self.whole_ref,
            Component::Tr => &self.tr,
            Component::Ref => &self.ref_,
        }
    }

    /// Grid spacing (minimum over the grid), or `None` for fewer than two points.
    pub fn spacing(&self) -> Option<f64> {
        self.x
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(None, |acc: Option<f64>, h| Some(acc.map_or(h, |a| a.min(h))))
    }
}

/// Builds the decomposition and samples every component on `x_grid`.
pub fn build_decomposition(
    spec: &PotentialSpec,
    mode: EnergyMode,
    x_grid: &[f64],
) -> Result<StationaryDecomposition> {
    let states = SplitStates::new(spec, mode)?;
    let x_c = states.midpoint();

    // mirror offsets: every grid point plus a fixed sampling of the barrier
    let half = 0.5 * spec.width();
    let mut offsets: Vec<f64> = (0..=32).map(|i| (half + 1.0) * i as f64 / 32.0).collect();
    offsets.extend(x_grid.iter().map(|&x| (x - x_c).abs()));
    let oddness_residual = states.oddness_residual(&offsets);
    if states.split().parity == Parity::Odd && oddness_residual >= ODDNESS_TOL {
        return Err(Error::OddSelectionFailed {
            residual_plus: states.midpoint_residual(),
            residual_minus: oddness_residual,
        });
    }

    let rejected = states.rejected_ref_coefficients();
    let n = x_grid.len();
    let mut out = StationaryDecomposition {
        x: x_grid.to_vec(),
        full: Vec::with_capacity(n),
        whole_tr: Vec::with_capacity(n),
        whole_ref: Vec::with_capacity(n),
        tr: Vec::with_capacity(n),
        ref_: Vec::with_capacity(n),
        rejected_ref: Vec::with_capacity(n),
        oddness_residual,
        states,
    };
    for &x in x_grid {
        let basis = out.states.scatterer().basis(x);
        let st = &out.states;
        out.full.push(st.state_from_basis(Component::Full, x, &basis).psi);
        out.whole_tr.push(st.state_from_basis(Component::WholeTr, x, &basis).psi);
        out.whole_ref.push(st.state_from_basis(Component::WholeRef, x, &basis).psi);
        out.tr.push(st.state_from_basis(Component::Tr, x, &basis).psi);
        out.ref_.push(st.state_from_basis(Component::Ref, x, &basis).psi);
        out.rejected_ref.push(basis.combine(rejected).psi);
    }
    Ok(out)
}

/// One-sided second-order estimates of `ψ'(x_c⁺) − ψ'(x_c⁻)` for the two cut
/// components, with step `h`.
pub fn derivative_jump_with_step(states: &SplitStates, h: f64) -> (Complex64, Complex64) {
    let xc = states.midpoint();
    let psi = |c: Component, x: f64| states.state(c, x).psi;
    let right = |c: Component| {
        (-3.0 * psi(c, xc) + 4.0 * psi(c, xc + h) - psi(c, xc + 2.0 * h)) / (2.0 * h)
    };
    let left = |c: Component| {
        (3.0 * psi(c, xc) - 4.0 * psi(c, xc - h) + psi(c, xc - 2.0 * h)) / (2.0 * h)
    };
    // right branches: ψ_tr → Ψ_full, ψ_ref → 0
    let jump_tr = right(Component::Full) - left(Component::WholeTr);
    let jump_ref = -left(Component::WholeRef);
    (jump_tr, jump_ref)
}

/// [`derivative_jump_with_step`] at the decomposition's grid spacing.
pub fn derivative_jump(dec: &StationaryDecomposition) -> (Complex64, Complex64) {
    let h = dec.spacing().unwrap_or(dec.states.scatterer().right_edge() - dec.states.scatterer().left_edge());
    derivative_jump_with_step(&dec.states, h.min(1e-2).max(1e-6))
}

/// Exact jumps from the analytic derivatives at `x_c`.
pub fn exact_derivative_jump(states: &SplitStates) -> (Complex64, Complex64) {
    let xc = states.midpoint();
    let full = states.state(Component::Full, xc).dpsi;
    let tr = states.state(Component::WholeTr, xc).dpsi;
    let rf = states.state(Component::WholeRef, xc).dpsi;
    (full - tr, -rf)
}
