//! Time-dependent wave packets built from the stationary decomposition, and
//! the diagnostics evaluated on them.
//!
//! Every component is synthesized as
//!
//! ```text
//! ψ(x, t) = (2π)^{-1/2} Σ_j w_j f(k_j) φ(x; k_j) e^{−i k_j² t / 2}
//! ```
//!
//! with composite Simpson weights `w_j` on a uniform k-grid and `φ` the
//! stationary component at `k_j`. Because each term is an exact stationary
//! solution, the sum is an exact solution of the time-dependent equation for
//! the discretized spectrum; `t` is a parameter, not an evolution variable.
//!
//! Work is split over x-chunks; each output sample is reduced over `k` in a
//! fixed order, so results do not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{anchored_grid, simpson_weights, trapezoid, trapezoid_complex, trapezoid_error_estimate, ComponentField};
use crate::potential::PotentialSpec;
use crate::splitting::{Component, SplitStates};
use crate::stationary::EnergyMode;

/// Default number of k-nodes (power of two plus one).
pub const DEFAULT_N_K: usize = 513;
/// Default half-width of the k-grid in units of `sigma_k`.
pub const DEFAULT_SPAN_SIGMAS: f64 = 8.0;
/// Quadrature error bound above which norms report [`Error::GridTooCoarse`].
pub const NORM_QUADRATURE_TOL: f64 = 1e-4;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const CHUNK: usize = 128;

/// Gaussian spectrum
/// `f(k) = (2π σ_k²)^{-1/4} exp(−(k − k0)² / (4σ_k²)) exp(−i k x0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub k0: f64,
    pub sigma_k: f64,
    pub x0: f64,
}

impl PacketSpec {
    pub fn new(k0: f64, sigma_k: f64, x0: f64) -> Result<Self> {
        if !(sigma_k > 0.0) || !k0.is_finite() || !sigma_k.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidPacket(format!(
                "need finite k0, x0 and sigma_k > 0 (got k0={k0}, sigma_k={sigma_k}, x0={x0})"
            )));
        }
        if k0 - 5.0 * sigma_k <= 0.0 {
            return Err(Error::SpectrumDomainError(format!(
                "k0 - 5 sigma_k = {} must be positive",
                k0 - 5.0 * sigma_k
            )));
        }
        Ok(Self { k0, sigma_k, x0 })
    }

    /// Initial position spread `1 / (2σ_k)`.
    pub fn position_width(&self) -> f64 {
        0.5 / self.sigma_k
    }

    /// Requires the packet to start at least five position widths left of the
    /// barrier.
    pub fn check_separation(&self, spec: &PotentialSpec) -> Result<()> {
        let front = self.x0 + 5.0 * self.position_width();
        if front >= spec.left_edge() {
            return Err(Error::InvalidPacket(format!(
                "packet front x0 + 5/(2 sigma_k) = {front} overlaps the barrier at {}",
                spec.left_edge()
            )));
        }
        Ok(())
    }

    pub fn amplitude(&self, k: f64) -> Complex64 {
        let s2 = self.sigma_k * self.sigma_k;
        let norm = (2.0 * std::f64::consts::PI * s2).powf(-0.25);
        let env = (-(k - self.k0).powi(2) / (4.0 * s2)).exp();
        Complex64::from_polar(norm * env, -k * self.x0)
    }

    pub fn density(&self, k: f64) -> f64 {
        self.amplitude(k).norm_sqr()
    }
}

/// Uniform k-grid with Simpson weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub k: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(packet: &PacketSpec, n_k: usize, span_sigmas: f64) -> Result<Self> {
        if n_k < 65 || n_k % 2 == 0 {
            return Err(Error::SpectrumDomainError(format!(
                "n_k must be odd and at least 65, got {n_k}"
            )));
        }
        // never closer to k = 0 than halfway between k0 - 5σ and 0
        let half = (span_sigmas * packet.sigma_k).min(0.5 * (packet.k0 + 5.0 * packet.sigma_k));
        let lo = packet.k0 - half;
        if lo <= 0.0 {
            return Err(Error::SpectrumDomainError(format!(
                "k-grid reaches k = {lo} <= 0"
            )));
        }
        let h = 2.0 * half / (n_k - 1) as f64;
        let k = (0..n_k).map(|j| lo + j as f64 * h).collect();
        Ok(Self {
            k,
            weights: simpson_weights(n_k, h)?,
        })
    }

    pub fn k_max(&self) -> f64 {
        *self.k.last().unwrap()
    }

    /// Simpson estimate of `∫ g(k) dk`.
    pub fn integrate<F: Fn(usize, f64) -> f64>(&self, g: F) -> f64 {
        self.k
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(j, (&k, &w))| w * g(j, k))
            .sum()
    }
}

/// Components `Ψ_full`, `ψ_tr`, `ψ_ref` and their x-derivatives at one time.
///
/// Derivatives of the cut components are left limits at `x_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedField {
    pub t: f64,
    pub x: Vec<f64>,
    pub full: Vec<Complex64>,
    pub tr: Vec<Complex64>,
    pub ref_: Vec<Complex64>,
    pub d_full: Vec<Complex64>,
    pub d_tr: Vec<Complex64>,
    pub d_ref: Vec<Complex64>,
}

impl EvolvedField {
    pub fn component(&self, which: Component) -> Option<(&[Complex64], &[Complex64])> {
        match which {
            Component::Full => Some((&self.full, &self.d_full)),
            Component::Tr => Some((&self.tr, &self.d_tr)),
            Component::Ref => Some((&self.ref_, &self.d_ref)),
            _ => None,
        }
    }

    /// `2 Re(ψ_tr* ψ_ref)` on the grid.
    pub fn interference(&self) -> Vec<f64> {
        self.tr
            .iter()
            .zip(&self.ref_)
            .map(|(a, b)| 2.0 * (a.conj() * b).re)
            .collect()
    }

    /// Largest `|ψ_tr + ψ_ref − Ψ_full|` on the grid.
    pub fn sum_residual(&self) -> f64 {
        self.tr
            .iter()
            .zip(&self.ref_)
            .zip(&self.full)
            .map(|((a, b), c)| (a + b - c).norm())
            .fold(0.0, f64::max)
    }
}

/// Values and derivatives of one synthesized component.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub values: Vec<Complex64>,
    pub derivs: Vec<Complex64>,
}

/// Spectral superposition engine for one barrier and one packet.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    packet: PacketSpec,
    grid: SpectralGrid,
    modes: Vec<SplitStates>,
    // w_j f(k_j) / √(2π)
    weights: Vec<Complex64>,
    x_c: f64,
}

impl Synthesizer {
    pub fn new(spec: &PotentialSpec, packet: PacketSpec, n_k: usize) -> Result<Self> {
        Self::with_span(spec, packet, n_k, DEFAULT_SPAN_SIGMAS)
    }

    pub fn with_span(spec: &PotentialSpec, packet: PacketSpec, n_k: usize, span_sigmas: f64) -> Result<Self> {
        let grid = SpectralGrid::new(&packet, n_k, span_sigmas)?;
        let modes = grid
            .k
            .par_iter()
            .map(|&k| SplitStates::new(spec, EnergyMode::from_wavenumber(k)?))
            .collect::<Result<Vec<_>>>()?;
        let inv = (2.0 * std::f64::consts::PI).sqrt().recip();
        let weights = grid
            .k
            .iter()
            .zip(&grid.weights)
            .map(|(&k, &w)| packet.amplitude(k) * (w * inv))
            .collect();
        Ok(Self {
            packet,
            grid,
            modes,
            weights,
            x_c: spec.midpoint(),
        })
    }

    pub fn packet(&self) -> &PacketSpec {
        &self.packet
    }

    pub fn spectral_grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[SplitStates] {
        &self.modes
    }

    pub fn midpoint(&self) -> f64 {
        self.x_c
    }

    /// Synthesizes the requested components at every time; result is indexed
    /// `[time][component]`.
    pub fn synthesize_many(&self, x: &[f64], times: &[f64], comps: &[Component]) -> Vec<Vec<Sampled>> {
        let nt = times.len();
        let nc = comps.len();
        let phases: Vec<Complex64> = self
            .grid
            .k
            .iter()
            .zip(&self.weights)
            .flat_map(|(&k, &w)| times.iter().map(move |&t| w * Complex64::from_polar(1.0, -0.5 * k * k * t)))
            .collect();

        let chunks: Vec<(Vec<Complex64>, Vec<Complex64>)> = x
            .par_chunks(CHUNK)
            .map(|chunk| {
                let m = chunk.len();
                let mut vals = vec![ZERO; nt * nc * m];
                let mut ders = vec![ZERO; nt * nc * m];
                for (j, st) in self.modes.iter().enumerate() {
                    let ph = &phases[j * nt..(j + 1) * nt];
                    for (ix, &xv) in chunk.iter().enumerate() {
                        let basis = st.scatterer().basis(xv);
                        for (ic, &c) in comps.iter().enumerate() {
                            let s = st.state_from_basis(c, xv, &basis);
                            for (it, &p) in ph.iter().enumerate() {
                                let idx = (it * nc + ic) * m + ix;
                                vals[idx] += p * s.psi;
                                ders[idx] += p * s.dpsi;
                            }
                        }
                    }
                }
                (vals, ders)
            })
            .collect();

        let mut out: Vec<Vec<Sampled>> = (0..nt)
            .map(|_| {
                (0..nc)
                    .map(|_| Sampled {
                        values: Vec::with_capacity(x.len()),
                        derivs: Vec::with_capacity(x.len()),
                    })
                    .collect()
            })
            .collect();
        for (ci, (vals, ders)) in chunks.iter().enumerate() {
            let m = (x.len() - ci * CHUNK).min(CHUNK);
            for it in 0..nt {
                for ic in 0..nc {
                    let base = (it * nc + ic) * m;
                    out[it][ic].values.extend_from_slice(&vals[base..base + m]);
                    out[it][ic].derivs.extend_from_slice(&ders[base..base + m]);
                }
            }
        }
        out
    }

    /// One component at one time.
    pub fn synthesize(&self, which: Component, t: f64, x: &[f64]) -> ComponentField {
        let mut s = self.synthesize_many(x, &[t], &[which]);
        ComponentField::new(x.to_vec(), s.remove(0).remove(0).values)
    }

    /// `Ψ_full`, `ψ_tr` and `ψ_ref` at each requested time.
    pub fn evolve(&self, x: &[f64], times: &[f64]) -> Vec<EvolvedField> {
        let comps = [Component::Full, Component::Tr, Component::Ref];
        self.synthesize_many(x, times, &comps)
            .into_iter()
            .zip(times)
            .map(|(mut s, &t)| {
                let rf = s.pop().unwrap();
                let tr = s.pop().unwrap();
                let full = s.pop().unwrap();
                EvolvedField {
                    t,
                    x: x.to_vec(),
                    full: full.values,
                    tr: tr.values,
                    ref_: rf.values,
                    d_full: full.derivs,
                    d_tr: tr.derivs,
                    d_ref: rf.derivs,
                }
            })
            .collect()
    }

    /// Spectral average `∫|f|² g dk / ∫|f|² dk` of a per-mode quantity.
    pub fn spectral_average<F: Fn(&SplitStates) -> f64>(&self, g: F) -> f64 {
        let num = self.grid.integrate(|j, k| self.packet.density(k) * g(&self.modes[j]));
        let den = self.grid.integrate(|_, k| self.packet.density(k));
        num / den
    }

    /// `∫|f|² T(k) dk` over the k-grid.
    pub fn spectral_transmission(&self) -> f64 {
        self.grid
            .integrate(|j, k| self.packet.density(k) * self.modes[j].amplitudes().transmission)
    }

    /// Default x-grid, see [`default_grid_bounds`].
    pub fn default_grid(&self, spec: &PotentialSpec) -> Vec<f64> {
        let (lo, hi, h) = default_grid_bounds(spec, &self.packet, &self.grid);
        anchored_grid(lo, hi, h, self.x_c)
    }
}

/// `(lo, hi, h)` of the default x-grid: spacing `min(2π/(8 k_max), L/64)`,
/// from `x0 − 10/(2σ_k)` to its mirror image about `x_c`. Callers anchor the
/// grid on `x_c`.
pub fn default_grid_bounds(spec: &PotentialSpec, packet: &PacketSpec, grid: &SpectralGrid) -> (f64, f64, f64) {
    let h = (2.0 * std::f64::consts::PI / (8.0 * grid.k_max())).min(spec.width() / 64.0);
    let lo = packet.x0 - 10.0 * packet.position_width();
    let hi = 2.0 * spec.midpoint() - lo;
    (lo, hi, h)
}

/// Norms of the sub-process components and of the full packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub tr: f64,
    pub ref_: f64,
    pub total: f64,
}

pub fn norms(field: &EvolvedField) -> Result<Norms> {
    let x = &field.x;
    let estimate = trapezoid_error_estimate(x, |i| field.full[i].norm_sqr());
    if estimate > NORM_QUADRATURE_TOL {
        return Err(Error::GridTooCoarse { estimate });
    }
    Ok(Norms {
        tr: trapezoid(x, |i| field.tr[i].norm_sqr()),
        ref_: trapezoid(x, |i| field.ref_[i].norm_sqr()),
        total: trapezoid(x, |i| field.full[i].norm_sqr()),
    })
}

/// `⟨ψ_tr | ψ_ref⟩`.
pub fn overlap(field: &EvolvedField) -> Complex64 {
    trapezoid_complex(&field.x, |i| field.tr[i].conj() * field.ref_[i])
}

/// Position and momentum expectation values of one component, normalized by
/// the component's own norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub xbar: f64,
    pub pbar: f64,
    pub var_x: f64,
}

/// Moments from samples and their x-derivatives.
pub fn moments(x: &[f64], values: &[Complex64], derivs: &[Complex64]) -> Result<Moments> {
    let norm = trapezoid(x, |i| values[i].norm_sqr());
    if norm < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    let xbar = trapezoid(x, |i| x[i] * values[i].norm_sqr()) / norm;
    let x2 = trapezoid(x, |i| (x[i] - xbar).powi(2) * values[i].norm_sqr()) / norm;
    // ⟨ψ| −i∂x |ψ⟩ = ∫ Im(ψ* ψ') + i(...) ; the real part is the expectation
    let pbar = trapezoid(x, |i| (values[i].conj() * derivs[i]).im) / norm;
    Ok(Moments {
        norm,
        xbar,
        pbar,
        var_x: x2,
    })
}

pub fn component_moments(field: &EvolvedField, which: Component) -> Result<Moments> {
    let (v, d) = field.component(which).ok_or(Error::ZeroNorm)?;
    moments(&field.x, v, d)
}

/// Probability current `Im(ψ* ψ')`.
pub fn current(psi: Complex64, dpsi: Complex64) -> f64 {
    (psi.conj() * dpsi).im
}

/// Settings for the continuity-equation residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityProbe {
    /// Time step of the central difference in `t`.
    pub dt: f64,
    /// Spacing of the window grid (the x central difference uses it too).
    pub h: f64,
    pub window: (f64, f64),
    /// Exclude nodes within `2h` of `x_c` and stencils that cross it.
    pub exclude_cut: bool,
}

/// `max |∂ρ/∂t + ∂j/∂x|` over a window, by central differences.
pub fn continuity_residual(synth: &Synthesizer, which: Component, t: f64, probe: ContinuityProbe) -> f64 {
    let x_c = synth.midpoint();
    let x = anchored_grid(probe.window.0, probe.window.1, probe.h, x_c);
    let x: Vec<f64> = x
        .into_iter()
        .filter(|&v| v >= probe.window.0 - 1e-12 && v <= probe.window.1 + 1e-12)
        .collect();
    let s = synth.synthesize_many(&x, &[t - probe.dt, t, t + probe.dt], &[which]);
    continuity_from_samples(&x, &s[0][0], &s[1][0], &s[2][0], probe, x_c)
}

fn continuity_from_samples(
    x: &[f64],
    before: &Sampled,
    now: &Sampled,
    after: &Sampled,
    probe: ContinuityProbe,
    x_c: f64,
) -> f64 {
    let h = probe.h;
    let guard = 2.0 * h - 1e-9 * h;
    let mut worst: f64 = 0.0;
    for i in 1..x.len().saturating_sub(1) {
        if probe.exclude_cut {
            let side = |v: f64| v > x_c;
            if (x[i] - x_c).abs() <= guard || side(x[i - 1]) != side(x[i + 1]) {
                continue;
            }
        }
        let drho = (after.values[i].norm_sqr() - before.values[i].norm_sqr()) / (2.0 * probe.dt);
        let jp = current(now.values[i + 1], now.derivs[i + 1]);
        let jm = current(now.values[i - 1], now.derivs[i - 1]);
        let dj = (jp - jm) / (x[i + 1] - x[i - 1]);
        worst = worst.max((drho + dj).abs());
    }
    worst
}

/// One row of the time-resolved diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub norms: Norms,
    pub overlap: Complex64,
    pub full: Moments,
    pub tr: Moments,
    /// `None` when ψ_ref has zero norm.
    pub ref_: Option<Moments>,
    pub continuity_residual: f64,
    /// `Im(ψ_ref* ψ_ref')` one grid step left of `x_c`.
    pub ref_current_at_cut: f64,
    pub sum_residual: f64,
}

/// Diagnostics at every requested time on `x`. The continuity residual is the
/// worse of ψ_tr and ψ_ref over the whole grid, with the cut excluded.
pub fn diagnostics(synth: &Synthesizer, x: &[f64], times: &[f64], dt: f64) -> Result<Vec<DiagnosticsRow>> {
    if x.len() < 5 {
        return Err(Error::InvalidGrid("need at least 5 grid points".into()));
    }
    let h = x[1] - x[0];
    let x_c = synth.midpoint();
    let mut all_times = Vec::with_capacity(3 * times.len());
    for &t in times {
        all_times.extend_from_slice(&[t - dt, t, t + dt]);
    }
    let comps = [Component::Full, Component::Tr, Component::Ref];
    let s = synth.synthesize_many(x, &all_times, &comps);
    let probe = ContinuityProbe {
        dt,
        h,
        window: (x[0], x[x.len() - 1]),
        exclude_cut: true,
    };
    let cut_index = x.partition_point(|&v| v < x_c - 0.5 * h).saturating_sub(1);

    let mut rows = Vec::with_capacity(times.len());
    for (n, &t) in times.iter().enumerate() {
        let now = &s[3 * n + 1];
        let field = EvolvedField {
            t,
            x: x.to_vec(),
            full: now[0].values.clone(),
            tr: now[1].values.clone(),
            ref_: now[2].values.clone(),
            d_full: now[0].derivs.clone(),
            d_tr: now[1].derivs.clone(),
            d_ref: now[2].derivs.clone(),
        };
        let nrm = norms(&field)?;
        let residual = [1usize, 2]
            .iter()
            .map(|&c| continuity_from_samples(x, &s[3 * n][c], &now[c], &s[3 * n + 2][c], probe, x_c))
            .fold(0.0, f64::max);
        rows.push(DiagnosticsRow {
            t,
            norms: nrm,
            overlap: overlap(&field),
            full: component_moments(&field, Component::Full)?,
            tr: component_moments(&field, Component::Tr)?,
            ref_: component_moments(&field, Component::Ref).ok(),
            continuity_residual: residual,
            ref_current_at_cut: current(field.ref_[cut_index], field.d_ref[cut_index]),
            sum_residual: field.sum_residual(),
        });
    }
    Ok(rows)
}
