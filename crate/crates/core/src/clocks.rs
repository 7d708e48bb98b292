//! Characteristic times of the transmission and reflection sub-processes.
//!
//! Dwell time: `τ = ∫ |ψ_sub|² dx / (k |A_sub^In|²)` over the barrier (up to
//! `x_c` for reflection, where `ψ_ref` vanishes).
//!
//! Larmor time: a weak field confined to the barrier shifts the two spin
//! projections to `V ∓ ω/2`. Each is solved as an independent scalar problem
//! and the precession angle is read from the sub-process outgoing amplitude,
//! `φ(ω) = arg A↑ − arg A↓`. Raw times `φ/ω` are Richardson-extrapolated to
//! `ω → 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{simpson, trapezoid_complex};
use crate::packet::{overlap, PacketSpec, SpectralGrid, Synthesizer, DEFAULT_SPAN_SIGMAS};
use crate::potential::{PotentialSpec, Segment};
use crate::splitting::{Component, SplitStates};
use crate::stationary::EnergyMode;

/// Incident sub-process flux density below which the sub-process is absent.
pub const ZERO_FLUX_TOL: f64 = 1e-14;
/// Largest allowed `ω / E`.
pub const MAX_RELATIVE_OMEGA: f64 = 0.01;
/// Overlap fraction of `√(TR)` below which sub-packets count as separated.
pub const READOUT_OVERLAP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subprocess {
    Tr,
    Ref,
}

impl Subprocess {
    pub fn component(self) -> Component {
        match self {
            Subprocess::Tr => Component::Tr,
            Subprocess::Ref => Component::Ref,
        }
    }

    fn weight(self, states: &SplitStates) -> f64 {
        let amp = states.amplitudes();
        match self {
            Subprocess::Tr => amp.transmission,
            Subprocess::Ref => amp.reflection,
        }
    }

    fn incident(self, states: &SplitStates) -> Complex64 {
        let split = states.split();
        match self {
            Subprocess::Tr => split.tr_in,
            Subprocess::Ref => split.ref_in,
        }
    }
}

/// How `omega_sequence` is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaScale {
    /// Absolute Larmor frequencies.
    Absolute,
    /// Fractions of the probed energy `E`.
    RelativeToEnergy,
}

/// Field strengths and extrapolation settings for the Larmor clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockConfig {
    /// Strictly descending.
    #[serde(default = "default_omegas")]
    pub omega_sequence: Vec<f64>,
    #[serde(default = "default_scale")]
    pub omega_scale: OmegaScale,
    /// Field region; `None` means the barrier support `[a, b]`.
    #[serde(default)]
    pub region: Option<[f64; 2]>,
    /// Power of the leading `ω` error term removed by the extrapolation.
    #[serde(default = "default_order")]
    pub extrapolation_order: u32,
}

fn default_omegas() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

fn default_scale() -> OmegaScale {
    OmegaScale::RelativeToEnergy
}

fn default_order() -> u32 {
    2
}

impl Default for ClockConfig {
    fn default() -> Self {
        Self {
            omega_sequence: default_omegas(),
            omega_scale: default_scale(),
            region: None,
            extrapolation_order: default_order(),
        }
    }
}

impl ClockConfig {
    /// Absolute frequencies at energy `e`, after validation.
    pub fn omegas(&self, e: f64) -> Result<Vec<f64>> {
        let seq = &self.omega_sequence;
        if seq.len() < 2 {
            return Err(Error::InvalidClock("need at least two field strengths".into()));
        }
        if self.extrapolation_order == 0 {
            return Err(Error::InvalidClock("extrapolation_order must be >= 1".into()));
        }
        if seq.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidClock("field strengths must be positive".into()));
        }
        if seq.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::InvalidClock("omega_sequence must be strictly descending".into()));
        }
        let abs: Vec<f64> = match self.omega_scale {
            OmegaScale::Absolute => seq.clone(),
            OmegaScale::RelativeToEnergy => seq.iter().map(|w| w * e).collect(),
        };
        if abs[0] > MAX_RELATIVE_OMEGA * e * (1.0 + 1e-12) {
            return Err(Error::InvalidClock(format!(
                "largest omega {} exceeds {MAX_RELATIVE_OMEGA} E = {}",
                abs[0],
                MAX_RELATIVE_OMEGA * e
            )));
        }
        Ok(abs)
    }

    fn region_for(&self, spec: &PotentialSpec) -> Result<(f64, f64)> {
        match self.region {
            None => Ok((spec.left_edge(), spec.right_edge())),
            Some([lo, hi]) => {
                if !(hi > lo) {
                    return Err(Error::InvalidClock(format!("empty region [{lo}, {hi}]")));
                }
                let xc = spec.midpoint();
                if ((lo + hi) - 2.0 * xc).abs() > 1e-12 * (1.0 + xc.abs() + (hi - lo)) {
                    return Err(Error::InvalidClock(format!(
                        "region [{lo}, {hi}] is not centred on the barrier midpoint {xc}"
                    )));
                }
                Ok((lo, hi))
            }
        }
    }
}

/// Raw and extrapolated Larmor times for one sub-process.
#[derive(Debug, Clone, PartialEq)]
pub struct LarmorEstimate {
    pub omegas: Vec<f64>,
    /// `φ(ω)/ω` for each field strength.
    pub raw: Vec<f64>,
    pub extrapolated: f64,
    /// `|raw_i − extrapolated|`, same order as `omegas`.
    pub residuals: Vec<f64>,
    /// Out-of-plane companion `ln(|A↑|/|A↓|)/ω`, extrapolated the same way.
    pub tau_z: f64,
}

impl LarmorEstimate {
    pub fn omega_min(&self) -> f64 {
        *self.omegas.last().unwrap()
    }

    /// Extrapolated value no further from the smallest-ω raw value than the
    /// two smallest-ω raw values are from each other.
    pub fn within_spread(&self) -> bool {
        let n = self.raw.len();
        let (small, big) = (self.raw[n - 1], self.raw[n - 2]);
        (self.extrapolated - small).abs() <= (small - big).abs() * (1.0 + 1e-9) + f64::EPSILON * small.abs()
    }
}

/// All clock outputs at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockResult {
    pub energy: f64,
    pub tau_dwell_tr: f64,
    /// `None` when reflection is absent (`ZeroFlux`).
    pub tau_dwell_ref: Option<f64>,
    pub larmor_tr: LarmorEstimate,
    pub larmor_ref: Option<LarmorEstimate>,
    /// Residuals of the transmission extrapolation.
    pub convergence_residuals: Vec<f64>,
}

impl ClockResult {
    /// Finite, non-negative times and extrapolations inside their spread.
    pub fn check_invariants(&self) -> Result<()> {
        let mut times = vec![self.tau_dwell_tr, self.larmor_tr.extrapolated];
        times.extend(self.tau_dwell_ref);
        times.extend(self.larmor_ref.as_ref().map(|l| l.extrapolated));
        if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidClock(format!("clock time {t} is negative or non-finite")));
        }
        for l in std::iter::once(&self.larmor_tr).chain(self.larmor_ref.as_ref()) {
            if !l.within_spread() {
                return Err(Error::InvalidClock(format!(
                    "extrapolated {} lies outside the spread of {:?}",
                    l.extrapolated, l.raw
                )));
            }
        }
        Ok(())
    }
}

/// Dwell time with the default quadrature resolution.
pub fn dwell_time(states: &SplitStates, sub: Subprocess) -> Result<f64> {
    dwell_time_with_resolution(states, sub, 1, None)
}

/// Dwell time with `refine` times the default number of Simpson nodes per
/// sub-interval. `region` defaults to the barrier support.
pub fn dwell_time_with_resolution(
    states: &SplitStates,
    sub: Subprocess,
    refine: usize,
    region: Option<(f64, f64)>,
) -> Result<f64> {
    let incident = sub.incident(states).norm_sqr();
    if incident < ZERO_FLUX_TOL {
        return Err(Error::ZeroFlux);
    }
    let sc = states.scatterer();
    let (lo, hi) = region.unwrap_or((sc.left_edge(), sc.right_edge()));
    let x_c = states.midpoint();
    let hi = match sub {
        Subprocess::Tr => hi,
        Subprocess::Ref => hi.min(x_c),
    };
    let mode = states.mode();
    let comp = sub.component();

    // Sub-intervals split at x_c and at every point where V jumps.
    let mut cuts = vec![lo, hi];
    if x_c > lo && x_c < hi {
        cuts.push(x_c);
    }
    let edges = sc.edges();
    cuts.extend(edges.iter().copied().filter(|&e| e > lo && e < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let density = |x: f64| states.state(comp, x).psi.norm_sqr();
    let mut n = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let mid = 0.5 * (x0 + x1);
        let q = sc.wavevector_at(mid).map_or(0.0, |w| w.q.norm());
        let scale = q.max(mode.k()).max(1.0);
        let intervals = ((32.0 * (x1 - x0) * scale).ceil() as usize).max(64) * refine.max(1);
        n += simpson(x0, x1, intervals, density);
    }
    Ok(n / (mode.k() * incident))
}

/// `spec` with `dv` added on `[lo, hi)` only.
pub fn zeeman_shifted(spec: &PotentialSpec, region: (f64, f64), dv: f64) -> Result<PotentialSpec> {
    let (lo, hi) = region;
    if lo == spec.left_edge() && hi == spec.right_edge() {
        return Ok(spec.shifted(dv));
    }
    let start = lo.min(spec.left_edge());
    let end = hi.max(spec.right_edge());
    let mut cuts: Vec<f64> = spec.edges().to_vec();
    cuts.extend([start, end, lo, hi]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let segments = cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let extra = if mid >= lo && mid < hi { dv } else { 0.0 };
            Segment::new(w[1] - w[0], spec.evaluate(mid) + extra)
        })
        .collect();
    PotentialSpec::piecewise(start, segments)
}

fn outgoing(states: &SplitStates, sub: Subprocess) -> Result<Complex64> {
    let a = states.outgoing_amplitude(sub.component());
    if a.norm_sqr() < ZERO_FLUX_TOL {
        return Err(Error::ZeroFlux);
    }
    Ok(a)
}

/// Richardson step on the two smallest field strengths and the residuals of
/// every raw value against the result.
fn extrapolate(omegas: &[f64], raw: &[f64], order: u32) -> (f64, Vec<f64>) {
    let n = raw.len();
    let rho = (omegas[n - 2] / omegas[n - 1]).powi(order as i32);
    let ext = (rho * raw[n - 1] - raw[n - 2]) / (rho - 1.0);
    let residuals = raw.iter().map(|r| (r - ext).abs()).collect();
    (ext, residuals)
}

fn check_convergence(residuals: &[f64], scale: f64) -> Result<()> {
    let slack = 1e-13 * scale.abs();
    if residuals.windows(2).any(|w| w[1] > w[0] + slack) {
        return Err(Error::ExtrapolationDiverged {
            residuals: residuals.to_vec(),
        });
    }
    Ok(())
}

/// Spin-up (`V − ω/2`) and spin-down (`V + ω/2`) decompositions for each ω.
fn spin_pairs(
    spec: &PotentialSpec,
    mode: EnergyMode,
    cfg: &ClockConfig,
) -> Result<(Vec<f64>, Vec<(SplitStates, SplitStates)>)> {
    let omegas = cfg.omegas(mode.energy())?;
    let region = cfg.region_for(spec)?;
    let pairs = omegas
        .par_iter()
        .map(|&w| {
            let up = SplitStates::new(&zeeman_shifted(spec, region, -0.5 * w)?, mode)?;
            let down = SplitStates::new(&zeeman_shifted(spec, region, 0.5 * w)?, mode)?;
            Ok((up, down))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((omegas, pairs))
}

fn larmor_from_pairs(
    omegas: &[f64],
    pairs: &[(SplitStates, SplitStates)],
    sub: Subprocess,
    order: u32,
) -> Result<LarmorEstimate> {
    let mut raw = Vec::with_capacity(omegas.len());
    let mut raw_z = Vec::with_capacity(omegas.len());
    for (&w, (up, down)) in omegas.iter().zip(pairs) {
        let ratio = outgoing(up, sub)? / outgoing(down, sub)?;
        raw.push(ratio.arg() / w);
        raw_z.push(ratio.norm().ln() / w);
    }
    let (extrapolated, residuals) = extrapolate(omegas, &raw, order);
    check_convergence(&residuals, extrapolated)?;
    let (tau_z, _) = extrapolate(omegas, &raw_z, order);
    Ok(LarmorEstimate {
        omegas: omegas.to_vec(),
        raw,
        extrapolated,
        residuals,
        tau_z,
    })
}

/// Larmor time of one sub-process at one energy.
pub fn larmor_times(spec: &PotentialSpec, mode: EnergyMode, cfg: &ClockConfig, sub: Subprocess) -> Result<LarmorEstimate> {
    let (omegas, pairs) = spin_pairs(spec, mode, cfg)?;
    larmor_from_pairs(&omegas, &pairs, sub, cfg.extrapolation_order)
}

fn absent_as_none<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroFlux) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Dwell and Larmor times for both sub-processes at one energy.
pub fn clock_times(spec: &PotentialSpec, mode: EnergyMode, cfg: &ClockConfig) -> Result<ClockResult> {
    let states = SplitStates::new(spec, mode)?;
    let region = cfg.region_for(spec)?;
    let tau_dwell_tr = dwell_time_with_resolution(&states, Subprocess::Tr, 1, Some(region))?;
    let tau_dwell_ref = absent_as_none(dwell_time_with_resolution(&states, Subprocess::Ref, 1, Some(region)))?;
    let (omegas, pairs) = spin_pairs(spec, mode, cfg)?;
    let larmor_tr = larmor_from_pairs(&omegas, &pairs, Subprocess::Tr, cfg.extrapolation_order)?;
    let larmor_ref = if tau_dwell_ref.is_some() {
        absent_as_none(larmor_from_pairs(&omegas, &pairs, Subprocess::Ref, cfg.extrapolation_order))?
    } else {
        None
    };
    Ok(ClockResult {
        energy: mode.energy(),
        tau_dwell_tr,
        tau_dwell_ref,
        convergence_residuals: larmor_tr.residuals.clone(),
        larmor_tr,
        larmor_ref,
    })
}

/// Spin-averaged perturbation `|(W↑ + W↓)/2 − W|` of the sub-process weight
/// (`T` or `R`) for each ω, and the least-squares slope of its log against
/// `log ω`.
pub fn non_invasiveness(spec: &PotentialSpec, mode: EnergyMode, cfg: &ClockConfig, sub: Subprocess) -> Result<(Vec<f64>, f64)> {
    let base = SplitStates::new(spec, mode)?;
    let w0 = sub.weight(&base);
    let (omegas, pairs) = spin_pairs(spec, mode, cfg)?;
    let deltas: Vec<f64> = pairs
        .iter()
        .map(|(u, d)| (0.5 * (sub.weight(u) + sub.weight(d)) - w0).abs())
        .collect();
    let pts: Vec<(f64, f64)> = omegas.iter().zip(&deltas).map(|(w, d)| (w.ln(), d.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((deltas, sxy / sxx))
}

/// Where and how finely the packet readout samples the sub-packets.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    pub t: f64,
    pub x: Vec<f64>,
    pub n_k: usize,
}

/// Packet-level Larmor time: spin-up and spin-down packets are synthesized
/// with the shifted barriers and the precession angle is the phase of
/// `⟨ψ↓_sub|ψ↑_sub⟩` at the readout time, i.e. the in-plane direction of the
/// average spin of the sub-packet.
///
/// Fails with [`Error::PrematureReadout`] while the unperturbed sub-packets
/// still overlap by more than `0.05 √(TR)`.
pub fn larmor_packet_readout(
    spec: &PotentialSpec,
    packet: PacketSpec,
    cfg: &ClockConfig,
    sub: Subprocess,
    readout: &Readout,
) -> Result<LarmorEstimate> {
    let base = Synthesizer::new(spec, packet, readout.n_k)?;
    let fields = base.evolve(&readout.x, &[readout.t]);
    let ov = overlap(&fields[0]).norm();
    let t_avg = base.spectral_transmission();
    let threshold = READOUT_OVERLAP_FRACTION * (t_avg * (1.0 - t_avg)).max(0.0).sqrt();
    // absolute floor so a fully transparent or opaque case can still be read
    if ov > threshold.max(1e-12) {
        return Err(Error::PrematureReadout { overlap: ov, threshold });
    }

    let e0 = 0.5 * packet.k0 * packet.k0;
    let omegas = cfg.omegas(e0)?;
    let region = cfg.region_for(spec)?;
    let comp = sub.component();
    let x = &readout.x;
    let ratios = omegas
        .iter()
        .map(|&w| {
            let up = Synthesizer::new(&zeeman_shifted(spec, region, -0.5 * w)?, packet, readout.n_k)?;
            let down = Synthesizer::new(&zeeman_shifted(spec, region, 0.5 * w)?, packet, readout.n_k)?;
            let fu = up.synthesize(comp, readout.t, x);
            let fd = down.synthesize(comp, readout.t, x);
            let inner = trapezoid_complex(x, |i| fd.values[i].conj() * fu.values[i]);
            let nu = trapezoid_complex(x, |i| fu.values[i].conj() * fu.values[i]).re;
            let nd = trapezoid_complex(x, |i| fd.values[i].conj() * fd.values[i]).re;
            if inner.norm() < ZERO_FLUX_TOL {
                return Err(Error::ZeroFlux);
            }
            Ok((inner.arg() / w, 0.5 * (nu / nd).ln() / w))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = ratios.iter().map(|r| r.0).collect();
    let raw_z: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    let (extrapolated, residuals) = extrapolate(&omegas, &raw, cfg.extrapolation_order);
    check_convergence(&residuals, extrapolated)?;
    let (tau_z, _) = extrapolate(&omegas, &raw_z, cfg.extrapolation_order);
    Ok(LarmorEstimate {
        omegas,
        raw,
        extrapolated,
        residuals,
        tau_z,
    })
}

/// `∫ |f|² W τ_L dk / ∫ |f|² W dk` with `W = T` or `R` and `τ_L` the
/// extrapolated stationary Larmor time.
pub fn spectral_larmor_average(
    spec: &PotentialSpec,
    packet: PacketSpec,
    cfg: &ClockConfig,
    sub: Subprocess,
    n_k: usize,
) -> Result<f64> {
    let grid = SpectralGrid::new(&packet, n_k, DEFAULT_SPAN_SIGMAS)?;
    let samples = grid
        .k
        .par_iter()
        .map(|&k| {
            let mode = EnergyMode::from_wavenumber(k)?;
            let w = sub.weight(&SplitStates::new(spec, mode)?);
            let tau = larmor_times(spec, mode, cfg, sub)?.extrapolated;
            Ok((w, tau))
        })
        .collect::<Result<Vec<_>>>()?;
    let num = grid.integrate(|j, k| packet.density(k) * samples[j].0 * samples[j].1);
    let den = grid.integrate(|j, k| packet.density(k) * samples[j].0);
    Ok(num / den)
}

/// One point of a barrier-width sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct HartmanRow {
    pub kappa_l: f64,
    pub width: f64,
    pub clock: ClockResult,
}

/// Clock times for rectangular barriers of height `v0` centred on 0 with
/// widths `L = κL / κ` at fixed energy below the barrier.
pub fn hartman_sweep(v0: f64, energy: f64, kappa_l: &[f64], cfg: &ClockConfig) -> Result<Vec<HartmanRow>> {
    if !(energy < v0) {
        return Err(Error::InvalidClock(format!(
            "sweep energy {energy} must lie below the barrier height {v0}"
        )));
    }
    let mode = EnergyMode::new(energy)?;
    let kappa = (2.0 * (v0 - energy)).sqrt();
    kappa_l
        .iter()
        .map(|&kl| {
            let width = kl / kappa;
            let spec = PotentialSpec::rectangular(v0, width, -0.5 * width)?;
            Ok(HartmanRow {
                kappa_l: kl,
                width,
                clock: clock_times(&spec, mode, cfg)?,
            })
        })
        .collect()
}

/// `true` when the sequence is strictly increasing.
pub fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> PotentialSpec {
        PotentialSpec::rectangular(1.0, 2.0, -1.0).unwrap()
    }

    #[test]
    fn free_flight_times() {
        for (l, k) in [(1.0, 0.7), (2.0, 1.0), (5.0, 1.6)] {
            let spec = PotentialSpec::rectangular(0.0, l, 0.3).unwrap();
            let mode = EnergyMode::from_wavenumber(k).unwrap();
            let states = SplitStates::new(&spec, mode).unwrap();
            let dwell = dwell_time(&states, Subprocess::Tr).unwrap();
            assert!((dwell - l / k).abs() < 1e-10 * l / k, "dwell {dwell}");
            assert_eq!(dwell_time(&states, Subprocess::Ref), Err(Error::ZeroFlux));
            let lt = larmor_times(&spec, mode, &ClockConfig::default(), Subprocess::Tr).unwrap();
            assert!((lt.extrapolated - l / k).abs() < 1e-8 * l / k, "larmor {}", lt.extrapolated);
        }
    }

    #[test]
    fn canonical_dwell_is_resolution_stable() {
        let states = SplitStates::new(&canonical(), EnergyMode::new(0.5).unwrap()).unwrap();
        for sub in [Subprocess::Tr, Subprocess::Ref] {
            let coarse = dwell_time(&states, sub).unwrap();
            let fine = dwell_time_with_resolution(&states, sub, 10, None).unwrap();
            assert!(coarse > 0.0);
            assert!((coarse - fine).abs() < 1e-6 * fine);
        }
    }

    #[test]
    fn canonical_larmor_converges() {
        let r = clock_times(&canonical(), EnergyMode::new(0.5).unwrap(), &ClockConfig::default()).unwrap();
        assert!(r.larmor_tr.residuals.windows(2).all(|w| w[1] < w[0]));
        assert!(r.larmor_tr.within_spread());
        assert!(r.larmor_ref.is_some());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ClockConfig::default();
        assert!(cfg.omegas(1.0).is_ok());
        cfg.omega_sequence = vec![1e-3, 1e-2];
        assert!(matches!(cfg.omegas(1.0), Err(Error::InvalidClock(_))));
        cfg.omega_sequence = vec![0.1, 0.01];
        assert!(matches!(cfg.omegas(1.0), Err(Error::InvalidClock(_))));
        cfg.omega_sequence = vec![0.01];
        assert!(matches!(cfg.omegas(1.0), Err(Error::InvalidClock(_))));
        cfg = ClockConfig {
            omega_scale: OmegaScale::Absolute,
            omega_sequence: vec![0.004, 0.001],
            ..ClockConfig::default()
        };
        assert!(cfg.omegas(0.5).is_ok());
        assert!(cfg.omegas(0.3).is_err());
    }

    #[test]
    fn non_invasive_at_second_order() {
        let (_, p) = non_invasiveness(&canonical(), EnergyMode::new(0.5).unwrap(), &ClockConfig::default(), Subprocess::Tr).unwrap();
        assert!(p >= 1.9, "exponent {p}");
    }

    #[test]
    fn wider_region_shift_matches_direct_construction() {
        let spec = canonical();
        let wide = zeeman_shifted(&spec, (-2.0, 2.0), 0.1).unwrap();
        assert_eq!(wide.left_edge(), -2.0);
        assert_eq!(wide.evaluate(-1.5), 0.1);
        assert_eq!(wide.evaluate(0.0), 1.1);
        assert_eq!(zeeman_shifted(&spec, (-1.0, 1.0), 0.1).unwrap().evaluate(0.0), 1.1);
    }

    #[test]
    fn readout_at_start_is_premature() {
        let p = PacketSpec::new(1.0, 0.05, -60.0).unwrap();
        let readout = Readout {
            t: 0.0,
            x: crate::field::linspace(-150.0, 150.0, 3001),
            n_k: 129,
        };
        let r = larmor_packet_readout(&canonical(), p, &ClockConfig::default(), Subprocess::Tr, &readout);
        assert!(matches!(r, Err(Error::PrematureReadout { .. })));
    }
}
