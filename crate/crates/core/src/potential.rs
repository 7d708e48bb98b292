//! Piecewise-constant barriers with finite support.
//!
//! A [`PotentialSpec`] is the only potential representation understood by the
//! solvers. Heights are given in units where ħ = m = 1, so an energy `E`
//! corresponds to a free wavenumber `k = sqrt(2E)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for the palindrome check on widths and heights.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// One constant piece of the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub width: f64,
    pub height: f64,
}

impl Segment {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }
}

/// A barrier made of constant segments laid end to end from `a`.
///
/// Segment boundaries are accumulated once at construction so every consumer
/// sees identical edge positions. `V = 0` outside `[a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    a: f64,
    segments: Vec<Segment>,
    edges: Vec<f64>,
    symmetric: bool,
}

impl PotentialSpec {
    /// Single rectangular barrier of height `v0` on `[a, a + width]`.
    pub fn rectangular(v0: f64, width: f64, a: f64) -> Result<Self> {
        Self::piecewise(a, vec![Segment::new(width, v0)])
    }

    /// Symmetric piecewise barrier. Rejects non-palindromic segment lists.
    pub fn piecewise(a: f64, segments: Vec<Segment>) -> Result<Self> {
        let spec = Self::general(a, segments)?;
        if !spec.symmetric {
            return Err(Error::AsymmetricPotential {
                mismatch: spec.symmetry_mismatch(),
            });
        }
        Ok(spec)
    }

    /// Piecewise barrier without the symmetry requirement.
    ///
    /// Scattering amplitudes are defined for these; the decomposition refuses
    /// them.
    pub fn general(a: f64, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyPotential);
        }
        if !a.is_finite() {
            return Err(Error::NonFinitePotential);
        }
        for s in &segments {
            if !s.width.is_finite() || !s.height.is_finite() {
                return Err(Error::NonFinitePotential);
            }
            if s.width <= 0.0 {
                return Err(Error::NonPositiveWidth(s.width));
            }
        }
        let mut edges = Vec::with_capacity(segments.len() + 1);
        let mut x = a;
        edges.push(x);
        for s in &segments {
            x += s.width;
            edges.push(x);
        }
        let mut spec = Self {
            a,
            segments,
            edges,
            symmetric: false,
        };
        spec.symmetric = spec.symmetry_mismatch() <= SYMMETRY_TOL;
        Ok(spec)
    }

    /// Uniform segmentation of a smooth profile on `[a, b]`, sampled at segment
    /// midpoints. Accuracy relative to the smooth profile is not controlled.
    pub fn discretize<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, profile: F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPotential);
        }
        let w = (b - a) / n as f64;
        let segments = (0..n)
            .map(|i| Segment::new(w, profile(a + (i as f64 + 0.5) * w)))
            .collect();
        Self::general(a, segments)
    }

    fn symmetry_mismatch(&self) -> f64 {
        self.segments
            .iter()
            .zip(self.segments.iter().rev())
            .map(|(l, r)| (l.height - r.height).abs().max((l.width - r.width).abs()))
            .fold(0.0, f64::max)
    }

    pub fn left_edge(&self) -> f64 {
        self.a
    }

    pub fn right_edge(&self) -> f64 {
        *self.edges.last().expect("at least one segment")
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left_edge() + self.right_edge())
    }

    pub fn width(&self) -> f64 {
        self.right_edge() - self.left_edge()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Boundaries `x_0 = a < x_1 < ... < x_n = b`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `V(x)` with right-open segments: at an interior edge the right-hand
    /// segment's height is returned, and `V(b) = 0`.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x < self.a || x >= self.right_edge() {
            return 0.0;
        }
        // edges is sorted; find the last edge <= x
        let idx = self.edges.partition_point(|&e| e <= x) - 1;
        self.segments[idx.min(self.segments.len() - 1)].height
    }

    /// Copy of this barrier with every height shifted by `dv` (support unchanged).
    pub fn shifted(&self, dv: f64) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment::new(s.width, s.height + dv))
            .collect();
        let mut out = Self::general(self.a, segments).expect("shift keeps widths valid");
        out.symmetric = self.symmetric;
        out
    }

    /// Largest segment height.
    pub fn max_height(&self) -> f64 {
        self.segments.iter().map(|s| s.height).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Serializable form used by the CLI configuration.
    pub fn to_config(&self) -> PotentialConfig {
        PotentialConfig {
            a: self.a,
            segments: self.segments.iter().map(|s| [s.width, s.height]).collect(),
        }
    }
}

/// `{"a": number, "segments": [[width, height], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub a: f64,
    pub segments: Vec<[f64; 2]>,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        PotentialSpec::piecewise(
            self.a,
            self.segments.iter().map(|&[w, h]| Segment::new(w, h)).collect(),
        )
    }
}
