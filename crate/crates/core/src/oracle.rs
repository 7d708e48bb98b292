//! Crank–Nicolson reference propagator for `i ∂_t ψ = −½ ∂²_x ψ + V ψ`.
//!
//! Only used to cross-check the spectral synthesis of `Ψ_full`. The potential
//! is sampled pointwise from [`PotentialSpec::evaluate`] and never touches the
//! transfer-matrix code.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{linspace, trapezoid, trapezoid_complex, ComponentField};
use crate::packet::PacketSpec;
use crate::potential::PotentialSpec;

/// Probability allowed within [`WALL_POINTS`] nodes of either wall.
pub const WALL_MASS_TOL: f64 = 1e-6;
pub const WALL_POINTS: usize = 5;

/// Uniform grid with hard walls at `x_min` and `x_max`, and `n_t` steps of `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub dt: f64,
    pub n_t: usize,
}

impl GridSpec {
    /// Grid with spacing `h` (rounded so the walls are nodes) up to `t_max`.
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64, dt: f64, t_max: f64) -> Result<Self> {
        if !(h > 0.0) || !(dt > 0.0) || !(x_max > x_min) || !(t_max >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "bad grid: [{x_min}, {x_max}], h={h}, dt={dt}, t_max={t_max}"
            )));
        }
        let n_x = ((x_max - x_min) / h).round() as usize + 1;
        let n_t = (t_max / dt).round() as usize;
        let g = Self { x_min, x_max, n_x, dt, n_t };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 3 {
            return Err(Error::InvalidGrid(format!("n_x = {} < 3", self.n_x)));
        }
        if !(self.dt > 0.0) || !(self.x_max > self.x_min) {
            return Err(Error::InvalidGrid(format!(
                "need dt > 0 and x_max > x_min (dt={}, [{}, {}])",
                self.dt, self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn x(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.n_x)
    }

    pub fn t_max(&self) -> f64 {
        self.n_t as f64 * self.dt
    }
}

/// Snapshots of `Ψ_full` from one propagation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CnRun {
    pub snapshots: Vec<(f64, ComponentField)>,
    /// `max_n |‖ψ_n‖ − ‖ψ_0‖|` in the discrete norm `(h Σ |ψ_i|²)^{1/2}`.
    pub norm_drift: f64,
    /// Largest probability seen within [`WALL_POINTS`] of either wall.
    pub wall_mass: f64,
}

impl CnRun {
    /// Snapshot closest to `t`.
    pub fn at(&self, t: f64) -> Option<&ComponentField> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|(_, f)| f)
    }
}

/// Analytic Gaussian matching [`PacketSpec::amplitude`] at `t = 0`:
/// `(2π s²)^{-1/4} exp(−(x − x0)²/(4s²) + i k0 (x − x0))`, `s = 1/(2σ_k)`.
pub fn gaussian_initial(packet: &PacketSpec, x: &[f64]) -> ComponentField {
    let s = packet.position_width();
    let norm = (2.0 * std::f64::consts::PI * s * s).powf(-0.25);
    let values = x
        .iter()
        .map(|&xi| {
            let d = xi - packet.x0;
            Complex64::from_polar(norm * (-d * d / (4.0 * s * s)).exp(), packet.k0 * d)
        })
        .collect();
    ComponentField::new(x.to_vec(), values)
}

/// Potential at each node, averaged over `x ± h/4` so a node sitting on a
/// segment edge picks up the mean of the two heights.
fn sample_potential(spec: &PotentialSpec, x: &[f64], h: f64) -> Vec<f64> {
    x.iter()
        .map(|&xi| 0.5 * (spec.evaluate(xi - 0.25 * h) + spec.evaluate(xi + 0.25 * h)))
        .collect()
}

fn discrete_norm(psi: &[Complex64], h: f64) -> f64 {
    (h * psi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

fn wall_mass(psi: &[Complex64], h: f64) -> f64 {
    let n = psi.len();
    let m = WALL_POINTS.min(n);
    let left: f64 = psi[..m].iter().map(|z| z.norm_sqr()).sum();
    let right: f64 = psi[n - m..].iter().map(|z| z.norm_sqr()).sum();
    h * left.max(right)
}

/// Propagates `initial` over `grid`, storing a snapshot at every step index in
/// `snapshot_steps` (step 0 is the initial state).
///
/// Each step solves `(1 + i dt H/2) ψ' = (1 − i dt H/2) ψ` with the three-point
/// Laplacian; the interior matrix is factorised once.
pub fn crank_nicolson_propagate(
    spec: &PotentialSpec,
    initial: &ComponentField,
    grid: &GridSpec,
    snapshot_steps: &[usize],
) -> Result<CnRun> {
    grid.validate()?;
    let x = grid.x();
    if initial.x.len() != x.len()
        || initial.x.iter().zip(&x).any(|(a, b)| (a - b).abs() > 1e-9 * grid.spacing())
    {
        return Err(Error::GridMismatch);
    }
    let h = grid.spacing();
    let n = grid.n_x;
    let v = sample_potential(spec, &x, h);

    let i = Complex64::new(0.0, 1.0);
    let off = -0.5 / (h * h);
    let half_dt = 0.5 * grid.dt;
    // A = 1 + i dt/2 H on the interior nodes 1..n-1
    let a_off = i * half_dt * off;
    let a_diag: Vec<Complex64> = (0..n).map(|j| 1.0 + i * half_dt * (1.0 / (h * h) + v[j])).collect();
    let b_diag: Vec<Complex64> = (0..n).map(|j| 1.0 - i * half_dt * (1.0 / (h * h) + v[j])).collect();
    let b_off = -a_off;

    // Thomas factorisation: c'_j and the pivots 1/(a_j − off c'_{j−1})
    let mut cprime = vec![Complex64::new(0.0, 0.0); n];
    let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n - 1 {
        let denom = if j == 1 { a_diag[j] } else { a_diag[j] - a_off * cprime[j - 1] };
        if denom.norm() == 0.0 {
            return Err(Error::SolveSingular);
        }
        inv_pivot[j] = 1.0 / denom;
        cprime[j] = a_off * inv_pivot[j];
    }

    let mut psi = initial.values.clone();
    psi[0] = Complex64::new(0.0, 0.0);
    psi[n - 1] = Complex64::new(0.0, 0.0);
    let norm0 = discrete_norm(&psi, h);
    let mut drift = 0.0f64;
    let mut max_wall = wall_mass(&psi, h);
    if max_wall > WALL_MASS_TOL {
        return Err(Error::BoundaryContamination { mass: max_wall });
    }

    let mut snapshots = Vec::with_capacity(snapshot_steps.len());
    let record = |step: usize, psi: &[Complex64], out: &mut Vec<(f64, ComponentField)>| {
        if snapshot_steps.contains(&step) {
            out.push((step as f64 * grid.dt, ComponentField::new(x.clone(), psi.to_vec())));
        }
    };
    record(0, &psi, &mut snapshots);

    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for step in 1..=grid.n_t {
        for j in 1..n - 1 {
            rhs[j] = b_diag[j] * psi[j] + b_off * (psi[j - 1] + psi[j + 1]);
        }
        // forward sweep, then back substitution
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 1..n - 1 {
            let d = (rhs[j] - a_off * prev) * inv_pivot[j];
            rhs[j] = d;
            prev = d;
        }
        psi[n - 2] = rhs[n - 2];
        for j in (1..n - 2).rev() {
            psi[j] = rhs[j] - cprime[j] * psi[j + 1];
        }

        drift = drift.max((discrete_norm(&psi, h) - norm0).abs());
        let wm = wall_mass(&psi, h);
        max_wall = max_wall.max(wm);
        if wm > WALL_MASS_TOL {
            return Err(Error::BoundaryContamination { mass: wm });
        }
        record(step, &psi, &mut snapshots);
    }

    Ok(CnRun {
        snapshots,
        norm_drift: drift,
        wall_mass: max_wall,
    })
}

/// Phase-aligned distances `(‖a − e^{iθ} b‖₂, max |a − e^{iθ} b|)` with
/// `e^{iθ} = ⟨b|a⟩ / |⟨b|a⟩|`. The L₂ norm uses the trapezoidal rule.
pub fn compare_fields(a: &ComponentField, b: &ComponentField) -> Result<(f64, f64)> {
    if a.x != b.x {
        return Err(Error::GridMismatch);
    }
    let inner = trapezoid_complex(&a.x, |i| b.values[i].conj() * a.values[i]);
    let phase = if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let diff: Vec<Complex64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(u, w)| u - phase * w)
        .collect();
    let l2 = trapezoid(&a.x, |i| diff[i].norm_sqr()).sqrt();
    let linf = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((l2, linf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free() -> PotentialSpec {
        PotentialSpec::rectangular(0.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn zero_field_stays_zero() {
        let grid = GridSpec::with_spacing(-10.0, 10.0, 0.1, 0.05, 1.0).unwrap();
        let init = ComponentField::zeros(grid.x());
        let spec = PotentialSpec::rectangular(1.0, 2.0, -1.0).unwrap();
        let run = crank_nicolson_propagate(&spec, &init, &grid, &[0, grid.n_t]).unwrap();
        assert_eq!(run.snapshots.len(), 2);
        assert!(run.snapshots[1].1.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn norm_is_conserved_over_ten_thousand_steps() {
        let p = PacketSpec::new(1.0, 0.15, -20.0).unwrap();
        let grid = GridSpec::with_spacing(-80.0, 80.0, 0.05, 0.002, 20.0).unwrap();
        assert_eq!(grid.n_t, 10_000);
        let spec = PotentialSpec::rectangular(1.0, 2.0, -1.0).unwrap();
        let run = crank_nicolson_propagate(&spec, &gaussian_initial(&p, &grid.x()), &grid, &[]).unwrap();
        assert!(run.norm_drift < 1e-10, "drift {}", run.norm_drift);
    }

    #[test]
    fn compare_fields_is_phase_blind() {
        let p = PacketSpec::new(1.0, 0.15, 0.0).unwrap();
        let f = gaussian_initial(&p, &linspace(-20.0, 20.0, 401));
        let rotated = ComponentField::new(
            f.x.clone(),
            f.values.iter().map(|z| z * Complex64::from_polar(1.0, 0.7)).collect(),
        );
        let (l2, linf) = compare_fields(&f, &f).unwrap();
        assert_eq!((l2, linf), (0.0, 0.0));
        let (l2, linf) = compare_fields(&f, &rotated).unwrap();
        assert!(l2 < 1e-14 && linf < 1e-14);
        let other = ComponentField::zeros(linspace(-20.0, 20.0, 400));
        assert_eq!(compare_fields(&f, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn walls_flag_contamination() {
        let p = PacketSpec::new(2.0, 0.2, 0.0).unwrap();
        let grid = GridSpec::with_spacing(-15.0, 15.0, 0.05, 0.01, 20.0).unwrap();
        let err = crank_nicolson_propagate(&free(), &gaussian_initial(&p, &grid.x()), &grid, &[]);
        assert!(matches!(err, Err(Error::BoundaryContamination { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec { x_min: 0.0, x_max: 1.0, n_x: 2, dt: 0.1, n_t: 1 }.validate().is_err());
        let grid = GridSpec::with_spacing(-1.0, 1.0, 0.1, 0.1, 1.0).unwrap();
        let init = ComponentField::zeros(linspace(-1.0, 1.0, 5));
        assert_eq!(
            crank_nicolson_propagate(&free(), &init, &grid, &[]),
            Err(Error::GridMismatch)
        );
    }
}
