//! Run configuration for the command-line front end.
//!
//! A run is described by one JSON file. Unknown keys are rejected, every
//! derived default is written back into the struct by [`parse_config`], and the
//! materialized config is what gets echoed next to the outputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clocks::ClockConfig;
use crate::error::Error;
use crate::packet::{default_grid_bounds, PacketSpec, SpectralGrid, DEFAULT_N_K, DEFAULT_SPAN_SIGMAS};
use crate::potential::{PotentialConfig, PotentialSpec};

/// Configuration problems, reported with the offending field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("cannot read config: {0}")]
    Io(String),
}

impl ConfigError {
    fn schema(path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        ConfigError::Schema {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub k0: f64,
    pub sigma_k: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "default_n_k")]
    pub n_k: usize,
    #[serde(default = "default_span")]
    pub span_sigmas: f64,
}

fn default_n_k() -> usize {
    DEFAULT_N_K
}

fn default_span() -> f64 {
    DEFAULT_SPAN_SIGMAS
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            n_k: DEFAULT_N_K,
            span_sigmas: DEFAULT_SPAN_SIGMAS,
        }
    }
}

/// Uniform x-grid anchored on the barrier midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Time step of the central difference in the continuity residual.
    #[serde(default = "default_continuity_dt")]
    pub continuity_dt: f64,
}

fn default_continuity_dt() -> f64 {
    0.05
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            continuity_dt: default_continuity_dt(),
        }
    }
}

/// Crank–Nicolson cross-check settings. Missing fields are derived from the
/// packet and the time samples.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HartmanConfig {
    #[serde(default = "default_hartman_v0")]
    pub v0: f64,
    #[serde(default = "default_hartman_energy")]
    pub energy: f64,
    #[serde(default = "default_kappa_l")]
    pub kappa_l: Vec<f64>,
}

fn default_hartman_v0() -> f64 {
    1.0
}

fn default_hartman_energy() -> f64 {
    0.5
}

fn default_kappa_l() -> Vec<f64> {
    (0..=16).map(|i| 2.0 + 0.5 * i as f64).collect()
}

impl Default for HartmanConfig {
    fn default() -> Self {
        Self {
            v0: default_hartman_v0(),
            energy: default_hartman_energy(),
            kappa_l: default_kappa_l(),
        }
    }
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    /// Energies for `stationary`, `decompose` (first entry) and `clock`.
    /// Defaults to `k0²/2` when a packet is given.
    #[serde(default)]
    pub energies: Vec<f64>,
    #[serde(default)]
    pub packet: Option<PacketConfig>,
    #[serde(default)]
    pub spectral: SpectralConfig,
    /// Packet grid for `evolve` and `diagnostics`.
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// Stationary grid for `decompose`; defaults to five wavelengths either
    /// side of the barrier.
    #[serde(default)]
    pub decompose_grid: Option<GridConfig>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub clock: ClockConfig,
    #[serde(default)]
    pub hartman: HartmanConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_output_dir() -> String {
    "out".into()
}

fn default_workers() -> usize {
    1
}

/// Oracle settings with every default resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedOracle {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub tolerance: f64,
}

impl RunConfig {
    pub fn potential_spec(&self) -> PotentialSpec {
        self.potential.build().expect("validated by parse_config")
    }

    pub fn packet_spec(&self) -> Option<PacketSpec> {
        self.packet
            .map(|p| PacketSpec::new(p.k0, p.sigma_k, p.x0).expect("validated by parse_config"))
    }

    pub fn resolved_oracle(&self) -> Option<ResolvedOracle> {
        let o = &self.oracle;
        Some(ResolvedOracle {
            x_min: o.x_min?,
            x_max: o.x_max?,
            h: o.h?,
            dt: o.dt?,
            times: o.times.clone()?,
            tolerance: o.tolerance?,
        })
    }
}

/// Reads, validates and materializes a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::schema(path, e.into_inner())
    })?;
    validate_and_materialize(&mut cfg)?;
    Ok(cfg)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::schema(path, format!("must be positive and finite, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::schema(path, format!("must be finite, got {v}")))
    }
}

fn module_error(path: &str, e: Error) -> ConfigError {
    ConfigError::schema(path, format!("{e:?}: {e}"))
}

fn validate_and_materialize(cfg: &mut RunConfig) -> Result<(), ConfigError> {
    let spec = cfg.potential.build().map_err(|e| module_error("potential.segments", e))?;
    if cfg.workers == 0 {
        return Err(ConfigError::schema("workers", "must be at least 1"));
    }

    let packet = match cfg.packet {
        Some(p) => Some(PacketSpec::new(p.k0, p.sigma_k, p.x0).map_err(|e| module_error("packet", e))?),
        None => None,
    };
    if cfg.energies.is_empty() {
        if let Some(p) = packet {
            cfg.energies.push(0.5 * p.k0 * p.k0);
        }
    }
    for (i, &e) in cfg.energies.iter().enumerate() {
        positive(&format!("energies[{i}]"), e)?;
        cfg.clock
            .omegas(e)
            .map_err(|err| module_error("clock.omega_sequence", err))?;
    }
    if let Some([lo, hi]) = cfg.clock.region {
        finite("clock.region[0]", lo)?;
        finite("clock.region[1]", hi)?;
    }

    if cfg.decompose_grid.is_none() {
        if let Some(&e) = cfg.energies.first() {
            let lambda = 2.0 * std::f64::consts::PI / (2.0 * e).sqrt();
            cfg.decompose_grid = Some(GridConfig {
                x_min: spec.left_edge() - 5.0 * lambda,
                x_max: spec.right_edge() + 5.0 * lambda,
                h: (lambda / 64.0).min(spec.width() / 64.0),
            });
        }
    }
    for (name, g) in [("grid", cfg.grid), ("decompose_grid", cfg.decompose_grid)] {
        if let Some(g) = g {
            finite(&format!("{name}.x_min"), g.x_min)?;
            finite(&format!("{name}.x_max"), g.x_max)?;
            positive(&format!("{name}.h"), g.h)?;
            if g.x_max <= g.x_min {
                return Err(ConfigError::schema(format!("{name}.x_max"), "must exceed x_min"));
            }
        }
    }
    positive("diagnostics.continuity_dt", cfg.diagnostics.continuity_dt)?;
    positive("spectral.span_sigmas", cfg.spectral.span_sigmas)?;

    let h = &cfg.hartman;
    positive("hartman.v0", h.v0)?;
    positive("hartman.energy", h.energy)?;
    if h.energy >= h.v0 {
        return Err(ConfigError::schema("hartman.energy", "must lie below hartman.v0"));
    }
    for (i, &kl) in h.kappa_l.iter().enumerate() {
        positive(&format!("hartman.kappa_l[{i}]"), kl)?;
    }
    cfg.clock
        .omegas(h.energy)
        .map_err(|err| module_error("clock.omega_sequence", err))?;

    let Some(packet) = packet else {
        return Ok(());
    };
    let grid = SpectralGrid::new(&packet, cfg.spectral.n_k, cfg.spectral.span_sigmas)
        .map_err(|e| module_error("spectral", e))?;
    packet
        .check_separation(&spec)
        .map_err(|e| module_error("packet.x0", e))?;

    if cfg.grid.is_none() {
        let (x_min, x_max, h) = default_grid_bounds(&spec, &packet, &grid);
        cfg.grid = Some(GridConfig { x_min, x_max, h });
    }
    let times = cfg.times.get_or_insert_with(|| {
        let t_end = 4.0 / 3.0 * (spec.midpoint() - packet.x0) / packet.k0;
        (0..=40).map(|i| t_end * i as f64 / 40.0).collect()
    });
    if times.is_empty() {
        return Err(ConfigError::schema("times", "must not be empty"));
    }
    for (i, &t) in times.iter().enumerate() {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(ConfigError::schema(format!("times[{i}]"), format!("must be finite and >= 0, got {t}")));
        }
    }
    let t_max = times.iter().copied().fold(0.0, f64::max);

    let o = &mut cfg.oracle;
    let half = 200.0f64.max((spec.midpoint() - packet.x0).abs() + grid.k_max() * t_max);
    let x_min = *o.x_min.get_or_insert(spec.midpoint() - half);
    let x_max = *o.x_max.get_or_insert(spec.midpoint() + half);
    let oh = *o.h.get_or_insert(0.01);
    let odt = *o.dt.get_or_insert(0.01);
    let tol = *o.tolerance.get_or_insert(1e-3);
    finite("oracle.x_min", x_min)?;
    finite("oracle.x_max", x_max)?;
    positive("oracle.h", oh)?;
    positive("oracle.dt", odt)?;
    positive("oracle.tolerance", tol)?;
    if x_max <= x_min {
        return Err(ConfigError::schema("oracle.x_max", "must exceed oracle.x_min"));
    }
    let otimes = o.times.get_or_insert_with(|| {
        let mid = times[times.len() / 2];
        let mut v = vec![times[0], mid, t_max];
        v.dedup();
        v
    });
    for (i, &t) in otimes.iter().enumerate() {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(ConfigError::schema(format!("oracle.times[{i}]"), format!("must be finite and >= 0, got {t}")));
        }
    }
    Ok(())
}
