//! Incompressible Neo-Hookean constitutive layer.
//!
//! Stretches are principal stretches of an incompressible solid. The tube
//! model works in the reduced pair `(λθ, λz)`; the radial stretch
//! `λr = 1/(λθ λz)` is always derived from the pair and never stored.
//!
//! With `W = μ/2 (I₁ − 3)` and `I₁ = λθ² + λz² + 1/(λθ²λz²)`:
//!
//! ```text
//! ∇W  = μ [λθ − 1/(λθ³λz²),  λz − 1/(λθ²λz³)]
//! ∇²W = μ [[1 + 3/(λθ⁴λz²), 2/(λθ³λz³)],
//!          [2/(λθ³λz³),     1 + 3/(λθ²λz⁴)]]
//! ```

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible principal stretch. Below this the inverse powers in
/// the energy derivatives overflow long before the model means anything.
pub const MIN_STRETCH: f64 = 1e-6;

/// Shear modulus and first-order damping coefficient of the solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Low-strain shear modulus, Pa.
    pub mu: f64,
    /// Linear damping coefficient, Pa·s.
    pub eta: f64,
}

impl MaterialParams {
    pub fn new(mu: f64, eta: f64) -> Result<Self> {
        let p = MaterialParams { mu, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::Domain(format!("shear modulus must be > 0, got {}", self.mu)));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Domain(format!("damping must be >= 0, got {}", self.eta)));
        }
        Ok(())
    }
}

impl Default for MaterialParams {
    /// μ makes a uniaxial stretch of 2 store exactly 7.9 kJ/m³. η is
    /// uncalibrated; see the README for how it was chosen.
    fn default() -> Self {
        MaterialParams {
            mu: 7900.0,
            eta: DEFAULT_ETA,
        }
    }
}

/// Default damping coefficient, Pa·s. Uncalibrated.
pub const DEFAULT_ETA: f64 = 3200.0;

/// Circumferential and axial principal stretches of the tube wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchPair {
    pub lambda_theta: f64,
    pub lambda_z: f64,
}

impl StretchPair {
    pub const IDENTITY: StretchPair = StretchPair {
        lambda_theta: 1.0,
        lambda_z: 1.0,
    };

    pub fn new(lambda_theta: f64, lambda_z: f64) -> Result<Self> {
        for (name, v) in [("lambda_theta", lambda_theta), ("lambda_z", lambda_z)] {
            if !(v.is_finite() && v >= MIN_STRETCH) {
                return Err(Error::Domain(format!(
                    "{name} must be finite and >= {MIN_STRETCH}, got {v}"
                )));
            }
        }
        if lambda_theta * lambda_z < MIN_STRETCH {
            return Err(Error::Domain(format!(
                "stretch product {} below {MIN_STRETCH}",
                lambda_theta * lambda_z
            )));
        }
        Ok(StretchPair { lambda_theta, lambda_z })
    }

    /// Radial stretch implied by incompressibility.
    pub fn lambda_r(&self) -> f64 {
        1.0 / (self.lambda_theta * self.lambda_z)
    }

    pub fn as_vector(&self) -> Vector2<f64> {
        Vector2::new(self.lambda_theta, self.lambda_z)
    }
}

/// Three principal stretches. Slot 1 is the traction-free (radial) axis whose
/// stretch is fixed by incompressibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalTriplet {
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub lambda_3: f64,
}

impl PrincipalTriplet {
    pub fn new(lambda_1: f64, lambda_2: f64, lambda_3: f64) -> Result<Self> {
        for v in [lambda_1, lambda_2, lambda_3] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "principal stretch must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(PrincipalTriplet {
            lambda_1,
            lambda_2,
            lambda_3,
        })
    }

    /// Builds `(1/(λ₂λ₃), λ₂, λ₃)`.
    pub fn incompressible(lambda_2: f64, lambda_3: f64) -> Result<Self> {
        let pair = StretchPair::new(lambda_2, lambda_3)?;
        Ok(PrincipalTriplet {
            lambda_1: pair.lambda_r(),
            lambda_2,
            lambda_3,
        })
    }

    /// Uniaxial tension with loading stretch `lambda` on axis 2 and both
    /// lateral axes at `1/√λ`.
    pub fn uniaxial(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= MIN_STRETCH) {
            return Err(Error::Domain(format!("uniaxial stretch must be > 0, got {lambda}")));
        }
        let lateral = 1.0 / lambda.sqrt();
        Ok(PrincipalTriplet {
            lambda_1: lateral,
            lambda_2: lambda,
            lambda_3: lateral,
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.lambda_1, self.lambda_2, self.lambda_3]
    }

    pub fn product(&self) -> f64 {
        self.lambda_1 * self.lambda_2 * self.lambda_3
    }
}

/// `I₁ = tr(B) = λ₁² + λ₂² + λ₃²`.
pub fn first_invariant(t: &PrincipalTriplet) -> f64 {
    t.lambda_1 * t.lambda_1 + t.lambda_2 * t.lambda_2 + t.lambda_3 * t.lambda_3
}

/// Strain energy density `W = μ/2 (I₁ − 3)`, J/m³.
pub fn strain_energy(p: &MaterialParams, s: &StretchPair) -> f64 {
    let (a, b) = (s.lambda_theta, s.lambda_z);
    let inv = 1.0 / (a * a * b * b);
    0.5 * p.mu * (a * a + b * b + inv - 3.0)
}

/// Analytic gradient of [`strain_energy`] with respect to `(λθ, λz)`, Pa.
pub fn strain_energy_gradient(p: &MaterialParams, s: &StretchPair) -> Vector2<f64> {
    let (a, b) = (s.lambda_theta, s.lambda_z);
    let a2b2 = a * a * b * b;
    Vector2::new(p.mu * (a - 1.0 / (a2b2 * a)), p.mu * (b - 1.0 / (a2b2 * b)))
}

/// Analytic Hessian of [`strain_energy`], Pa. Symmetric positive definite on
/// the whole admissible domain.
pub fn strain_energy_hessian(p: &MaterialParams, s: &StretchPair) -> Matrix2<f64> {
    let (a, b) = (s.lambda_theta, s.lambda_z);
    let a2b2 = a * a * b * b;
    let off = 2.0 / (a2b2 * a * b);
    let d_theta = 1.0 + 3.0 / (a2b2 * a * a);
    let d_z = 1.0 + 3.0 / (a2b2 * b * b);
    Matrix2::new(d_theta, off, off, d_z) * p.mu
}

/// Principal Cauchy stress on `axis` (1-based), Pa.
///
/// Axis 1 is traction free, which fixes the Lagrange multiplier at
/// `p = μ λ₁²`; its own stress is therefore zero.
pub fn cauchy_stress(p: &MaterialParams, t: &PrincipalTriplet, axis: usize) -> Result<f64> {
    let stretches = t.as_array();
    let lambda = *stretches
        .get(axis.wrapping_sub(1))
        .ok_or_else(|| Error::Domain(format!("principal axis must be 1, 2 or 3, got {axis}")))?;
    let lagrange = p.mu * t.lambda_1 * t.lambda_1;
    Ok(p.mu * lambda * lambda - lagrange)
}

/// Uniaxial strain energy `μ/2 (λ² + 2/λ − 3)` per unit μ.
fn uniaxial_energy_per_mu(lambda: f64) -> f64 {
    0.5 * (lambda * lambda + 2.0 / lambda - 3.0)
}

/// Uniaxial Cauchy stress per unit μ, `λ² − 1/λ`.
pub fn uniaxial_stress_basis(lambda: f64) -> f64 {
    lambda * lambda - 1.0 / lambda
}

/// Shear modulus for which the uniaxial energy at `lambda_crit` equals `w_safe`.
pub fn calibrate_mu_from_safe_energy(w_safe: f64, lambda_crit: f64) -> Result<f64> {
    if !(w_safe.is_finite() && w_safe > 0.0) {
        return Err(Error::Domain(format!("critical energy must be > 0, got {w_safe}")));
    }
    if !(lambda_crit.is_finite() && lambda_crit > 1.0) {
        return Err(Error::Domain(format!(
            "calibration stretch must be > 1, got {lambda_crit}"
        )));
    }
    let denom = lambda_crit * lambda_crit + 2.0 / lambda_crit - 3.0;
    Ok(2.0 * w_safe / denom)
}

/// One uniaxial tensile sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensileSample {
    pub stretch: f64,
    #[serde(rename = "stress_pa")]
    pub stress: f64,
}

/// Result of a least-squares modulus fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensileFit {
    pub mu: f64,
    /// RMS of the stress residuals, Pa.
    pub residual_rms: f64,
    /// Standard error of `mu` given the residual scatter (zero for one sample).
    pub std_error: f64,
}

/// Fits μ to uniaxial data by linear least squares on `σ = μ(λ² − 1/λ)`.
pub fn fit_mu_from_tensile_data(samples: &[TensileSample]) -> Result<TensileFit> {
    if samples.is_empty() {
        return Err(Error::Calibration("no tensile samples".into()));
    }
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, s) in samples.iter().enumerate() {
        if !(s.stretch.is_finite() && s.stretch > 0.0 && s.stress.is_finite()) {
            return Err(Error::Calibration(format!(
                "sample {i} is not a finite positive stretch with finite stress"
            )));
        }
        let phi = uniaxial_stress_basis(s.stretch);
        sxy += phi * s.stress;
        sxx += phi * phi;
    }
    if sxx <= 1e-24 {
        return Err(Error::Calibration(
            "degenerate data: every sample is at zero strain".into(),
        ));
    }
    let mu = sxy / sxx;
    let sse: f64 = samples
        .iter()
        .map(|s| {
            let r = s.stress - mu * uniaxial_stress_basis(s.stretch);
            r * r
        })
        .sum();
    let n = samples.len();
    let std_error = if n > 1 {
        (sse / (n - 1) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(TensileFit {
        mu,
        residual_rms: (sse / n as f64).sqrt(),
        std_error,
    })
}

/// Barrier values `w_safe − W` sampled on a uniform stretch grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeSetGrid {
    pub theta_axis: Vec<f64>,
    pub z_axis: Vec<f64>,
    /// `h_values[i][j]` is the barrier at `(theta_axis[i], z_axis[j])`.
    pub h_values: Vec<Vec<f64>>,
}

/// Uniform axis `lo + span·i/(n−1)`. Written so that node `2i` of a grid with
/// `2n−1` points is bit-identical to node `i` of a grid with `n` points.
pub fn uniform_axis(range: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = range;
    let span = hi - lo;
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + span * i as f64 / last })
        .collect()
}

pub fn scan_safe_set(
    p: &MaterialParams,
    w_safe: f64,
    theta_range: (f64, f64),
    z_range: (f64, f64),
    n: (usize, usize),
) -> Result<SafeSetGrid> {
    for (name, (lo, hi)) in [("theta_range", theta_range), ("z_range", z_range)] {
        if !(lo.is_finite() && hi.is_finite() && lo >= MIN_STRETCH && hi > lo) {
            return Err(Error::Domain(format!(
                "{name} must satisfy 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
    }
    if n.0 < 2 || n.1 < 2 {
        return Err(Error::Domain(format!(
            "grid needs at least 2 points per axis, got {n:?}"
        )));
    }
    let theta_axis = uniform_axis(theta_range, n.0);
    let z_axis = uniform_axis(z_range, n.1);
    let h_values = theta_axis
        .par_iter()
        .map(|&lt| {
            z_axis
                .iter()
                .map(|&lz| {
                    let s = StretchPair {
                        lambda_theta: lt,
                        lambda_z: lz,
                    };
                    w_safe - strain_energy(p, &s)
                })
                .collect()
        })
        .collect();
    Ok(SafeSetGrid {
        theta_axis,
        z_axis,
        h_values,
    })
}

impl SafeSetGrid {
    pub fn is_safe(&self, i: usize, j: usize) -> bool {
        self.h_values[i][j] >= 0.0
    }

    /// Number of 4-connected components of safe nodes.
    pub fn safe_components(&self) -> usize {
        let (ni, nj) = (self.theta_axis.len(), self.z_axis.len());
        let mut seen = vec![vec![false; nj]; ni];
        let mut components = 0;
        let mut stack = Vec::new();
        for i in 0..ni {
            for j in 0..nj {
                if seen[i][j] || !self.is_safe(i, j) {
                    continue;
                }
                components += 1;
                seen[i][j] = true;
                stack.push((i, j));
                while let Some((ci, cj)) = stack.pop() {
                    let neighbours = [
                        (ci.wrapping_sub(1), cj),
                        (ci + 1, cj),
                        (ci, cj.wrapping_sub(1)),
                        (ci, cj + 1),
                    ];
                    for (a, b) in neighbours {
                        if a < ni && b < nj && !seen[a][b] && self.is_safe(a, b) {
                            seen[a][b] = true;
                            stack.push((a, b));
                        }
                    }
                }
            }
        }
        components
    }

    /// True when every axis-parallel segment between two safe nodes is safe.
    pub fn is_axis_convex(&self) -> bool {
        let (ni, nj) = (self.theta_axis.len(), self.z_axis.len());
        let run_is_contiguous = |flags: &mut dyn Iterator<Item = bool>| {
            // safe nodes along a line must form one run
            let mut state = 0; // 0: before run, 1: inside, 2: after
            for safe in flags {
                match (state, safe) {
                    (0, true) => state = 1,
                    (1, false) => state = 2,
                    (2, true) => return false,
                    _ => {}
                }
            }
            true
        };
        (0..ni).all(|i| run_is_contiguous(&mut (0..nj).map(|j| self.is_safe(i, j))))
            && (0..nj).all(|j| run_is_contiguous(&mut (0..ni).map(|i| self.is_safe(i, j))))
    }

    /// Grid index of the node closest to `(lambda_theta, lambda_z)`.
    pub fn nearest(&self, lambda_theta: f64, lambda_z: f64) -> (usize, usize) {
        let closest = |axis: &[f64], v: f64| {
            axis.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0)
        };
        (closest(&self.theta_axis, lambda_theta), closest(&self.z_axis, lambda_z))
    }
}

/// Energy of a uniaxial specimen at `lambda`, J/m³.
pub fn uniaxial_strain_energy(p: &MaterialParams, lambda: f64) -> f64 {
    p.mu * uniaxial_energy_per_mu(lambda)
}
