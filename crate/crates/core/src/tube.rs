//! Uniformly inflating thick-walled tube in principal stretch coordinates.
//!
//! Second-order model `M λ̈ + F^v(λ̇) + F^e(λ) = F^ext(λ) u` with a constant
//! diagonal mass matrix, rewritten in control-affine form
//! `ṡ = f(s) + g(s) u` for the state `s = [λθ, λz, λ̇θ, λ̇z]`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{MaterialParams, PrincipalTriplet, StretchPair};

/// Reference-configuration dimensions of the actuator, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeGeometry {
    pub r_inner: f64,
    pub r_outer: f64,
    /// Free wall length between the end caps.
    pub z_eff: f64,
    /// End-cap height. Not part of the dynamics.
    pub cap_height: f64,
    /// kg/m³.
    pub density: f64,
}

impl Default for TubeGeometry {
    fn default() -> Self {
        TubeGeometry {
            r_inner: 10.21e-3,
            r_outer: 14.43e-3,
            z_eff: 90e-3,
            cap_height: 20e-3,
            density: 1070.0,
        }
    }
}

impl TubeGeometry {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.r_inner, self.r_outer, self.z_eff, self.cap_height, self.density]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Domain("geometry values must be finite".into()));
        }
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer) {
            return Err(Error::Domain(format!(
                "need 0 < r_inner < r_outer, got {} and {}",
                self.r_inner, self.r_outer
            )));
        }
        if self.z_eff <= 0.0 {
            return Err(Error::Domain(format!("z_eff must be > 0, got {}", self.z_eff)));
        }
        if self.density <= 0.0 {
            return Err(Error::Domain(format!("density must be > 0, got {}", self.density)));
        }
        if self.cap_height < 0.0 {
            return Err(Error::Domain(format!(
                "cap_height must be >= 0, got {}",
                self.cap_height
            )));
        }
        Ok(())
    }

    pub fn wall_thickness(&self) -> f64 {
        self.r_outer - self.r_inner
    }

    pub fn mean_radius(&self) -> f64 {
        0.5 * (self.r_outer + self.r_inner)
    }

    /// Reference volume of the wall, m³.
    pub fn wall_volume(&self) -> f64 {
        PI * (self.r_outer * self.r_outer - self.r_inner * self.r_inner) * self.z_eff
    }

    /// Effective areas `(Z_eff t, 2π R_m t)` that scale the wall forces, m².
    pub fn force_areas(&self) -> Vector2<f64> {
        let t = self.wall_thickness();
        Vector2::new(self.z_eff * t, 2.0 * PI * self.mean_radius() * t)
    }

    /// Cavity volume `π R_i² Z_eff λθ² λz` at the given stretch, m³.
    pub fn cavity_volume(&self, s: &StretchPair) -> f64 {
        PI * self.r_inner * self.r_inner * self.z_eff * s.lambda_theta * s.lambda_theta * s.lambda_z
    }
}

/// Stretches and stretch rates of the tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchState {
    pub stretch: StretchPair,
    /// `(λ̇θ, λ̇z)`, 1/s.
    pub rate: [f64; 2],
}

impl StretchState {
    pub const REST: StretchState = StretchState {
        stretch: StretchPair::IDENTITY,
        rate: [0.0, 0.0],
    };

    pub fn new(lambda_theta: f64, lambda_z: f64, rate_theta: f64, rate_z: f64) -> Result<Self> {
        let stretch = StretchPair::new(lambda_theta, lambda_z)?;
        if !(rate_theta.is_finite() && rate_z.is_finite()) {
            return Err(Error::Domain("stretch rates must be finite".into()));
        }
        Ok(StretchState {
            stretch,
            rate: [rate_theta, rate_z],
        })
    }

    pub fn from_vector(v: &Vector4<f64>) -> Result<Self> {
        StretchState::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(
            self.stretch.lambda_theta,
            self.stretch.lambda_z,
            self.rate[0],
            self.rate[1],
        )
    }

    pub fn rate_vector(&self) -> Vector2<f64> {
        Vector2::new(self.rate[0], self.rate[1])
    }
}

/// `F = diag(1/(λθλz), λθ, λz)` as a principal triplet, radial first.
pub fn deformation_gradient(s: &StretchPair) -> PrincipalTriplet {
    PrincipalTriplet {
        lambda_1: s.lambda_r(),
        lambda_2: s.lambda_theta,
        lambda_3: s.lambda_z,
    }
}

/// Constant diagonal mass matrix in stretch coordinates, kg·m.
pub fn mass_matrix(g: &TubeGeometry) -> Matrix2<f64> {
    let (ri, ro, z) = (g.r_inner, g.r_outer, g.z_eff);
    let m_theta = g.density * PI * (ro.powi(4) - ri.powi(4)) * z / (2.0 * ri);
    let m_z = g.density * PI / 3.0 * (ro * ro - ri * ri) * z * z;
    Matrix2::new(m_theta, 0.0, 0.0, m_z)
}

/// Elastic restoring force, N.
pub fn elastic_force(p: &MaterialParams, g: &TubeGeometry, s: &StretchPair) -> Vector2<f64> {
    let (a, b) = (s.lambda_theta, s.lambda_z);
    let inv = 1.0 / (a * a * b * b);
    let areas = g.force_areas();
    Vector2::new(areas.x * (a * a - inv), areas.y * (b * b - inv)) * p.mu
}

/// First-order viscous force, N.
pub fn viscous_force(p: &MaterialParams, g: &TubeGeometry, st: &StretchState) -> Vector2<f64> {
    g.force_areas().component_mul(&st.rate_vector()) * p.eta
}

/// Pressure-to-force map `[2πR_i λθ Z_eff λz, πR_i² λθ²]`, m².
pub fn external_force_vector(g: &TubeGeometry, s: &StretchPair) -> Vector2<f64> {
    let (a, b) = (s.lambda_theta, s.lambda_z);
    let ri = g.r_inner;
    Vector2::new(2.0 * PI * ri * a * g.z_eff * b, PI * ri * ri * a * a)
}

/// Material and geometry bundled into the control-affine tube model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeModel {
    pub material: MaterialParams,
    pub geometry: TubeGeometry,
    mass: Matrix2<f64>,
}

impl TubeModel {
    pub fn new(material: MaterialParams, geometry: TubeGeometry) -> Result<Self> {
        material.validate()?;
        geometry.validate()?;
        Ok(TubeModel {
            material,
            geometry,
            mass: mass_matrix(&geometry),
        })
    }

    pub fn mass(&self) -> &Matrix2<f64> {
        &self.mass
    }

    fn inv_mass(&self, v: Vector2<f64>) -> Vector2<f64> {
        Vector2::new(v.x / self.mass[(0, 0)], v.y / self.mass[(1, 1)])
    }

    /// `M⁻¹ F^ext(λ)`: stretch acceleration per pascal.
    pub fn input_gain(&self, s: &StretchPair) -> Vector2<f64> {
        self.inv_mass(external_force_vector(&self.geometry, s))
    }

    /// `−M⁻¹ (F^v + F^e)`: unforced stretch acceleration.
    pub fn unforced_acceleration(&self, st: &StretchState) -> Vector2<f64> {
        let fv = viscous_force(&self.material, &self.geometry, st);
        let fe = elastic_force(&self.material, &self.geometry, &st.stretch);
        -self.inv_mass(fv + fe)
    }

    /// `λ̈` under pressure `u`.
    pub fn acceleration(&self, st: &StretchState, u: f64) -> Vector2<f64> {
        self.unforced_acceleration(st) + self.input_gain(&st.stretch) * u
    }

    /// Drift `f(s)`.
    pub fn drift(&self, st: &StretchState) -> Vector4<f64> {
        let acc = self.unforced_acceleration(st);
        Vector4::new(st.rate[0], st.rate[1], acc.x, acc.y)
    }

    /// Input column `g(s)`.
    pub fn input_matrix(&self, s: &StretchPair) -> Vector4<f64> {
        let gain = self.input_gain(s);
        Vector4::new(0.0, 0.0, gain.x, gain.y)
    }

    /// `ṡ = f(s) + g(s) u`.
    pub fn state_derivative(&self, st: &StretchState, u: f64) -> Vector4<f64> {
        let acc = self.acceleration(st, u);
        Vector4::new(st.rate[0], st.rate[1], acc.x, acc.y)
    }

    /// Kinetic energy plus wall-volume strain energy, J.
    ///
    /// The wall force is area-weighted Cauchy stress, which is not the
    /// gradient of `V_wall·W`, so this quantity is not a Lyapunov function
    /// of the unforced model. See [`TubeModel::energy_power_residual`].
    pub fn mechanical_energy(&self, st: &StretchState) -> f64 {
        let v = st.rate_vector();
        0.5 * v.dot(&(self.mass * v))
            + self.geometry.wall_volume() * crate::material::strain_energy(&self.material, &st.stretch)
    }

    /// Time derivative of [`TubeModel::mechanical_energy`] predicted by the
    /// work-energy balance at pressure `u`:
    /// `λ̇·(F^ext u − F^v) + λ̇·(V_wall ∇W − F^e)`.
    pub fn energy_power_residual(&self, st: &StretchState, u: f64) -> f64 {
        let v = st.rate_vector();
        let fv = viscous_force(&self.material, &self.geometry, st);
        let fe = elastic_force(&self.material, &self.geometry, &st.stretch);
        let fx = external_force_vector(&self.geometry, &st.stretch) * u;
        let grad = crate::material::strain_energy_gradient(&self.material, &st.stretch) * self.geometry.wall_volume();
        v.dot(&(fx - fv)) + v.dot(&(grad - fe))
    }
}
