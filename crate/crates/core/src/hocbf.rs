//! Strain-energy barrier of relative degree two.
//!
//! `h = W_safe − W(λ)`, `ḣ = −∇Wᵀλ̇`, `ḧ = −λ̇ᵀ∇²Wλ̇ − ∇Wᵀλ̈`, and the
//! ψ-chain `ψ₀ = h`, `ψ₁ = ψ̇₀ + α₁(ψ₀)`, `ψ₂ = ψ̇₁ + α₂(ψ₁)`. The control
//! enters through `λ̈`, so `ψ₂ ≥ 0` is an affine constraint `a·u ≤ b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{strain_energy, strain_energy_gradient, strain_energy_hessian, MaterialParams, StretchPair};
use crate::tube::{StretchState, TubeModel};

/// Class-K function used in the ψ-chain.
pub trait ClassK {
    fn value(&self, x: f64) -> f64;
    /// Derivative, needed to differentiate `α₁(h)` along trajectories.
    fn slope(&self, x: f64) -> f64;
}

/// `α(x) = gain·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGain(pub f64);

impl ClassK for LinearGain {
    fn value(&self, x: f64) -> f64 {
        self.0 * x
    }

    fn slope(&self, _x: f64) -> f64 {
        self.0
    }
}

/// Which second-order condition the filter enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintForm {
    /// `ḧ + α₁'(h)ḣ + α₂(ψ₁) ≥ 0`, i.e. `ψ₂ = ψ̇₁ + α₂(ψ₁) ≥ 0`.
    #[default]
    Full,
    /// `ḧ + α₂(ψ₁) ≥ 0`. Drops the `α₁'ḣ` term; with equal linear gains the
    /// closed-loop barrier dynamics are underdamped and `h` overshoots
    /// below zero. Kept for comparison only.
    WithoutCrossTerm,
}

/// Critical energy and class-K gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetySpec {
    /// J/m³.
    pub w_safe: f64,
    /// 1/s.
    pub alpha1: f64,
    /// 1/s.
    pub alpha2: f64,
    pub form: ConstraintForm,
}

impl Default for SafetySpec {
    fn default() -> Self {
        SafetySpec {
            w_safe: 7900.0,
            alpha1: 2500.0,
            alpha2: 2500.0,
            form: ConstraintForm::Full,
        }
    }
}

impl SafetySpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w_safe", self.w_safe),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn class_k(&self) -> (LinearGain, LinearGain) {
        (LinearGain(self.alpha1), LinearGain(self.alpha2))
    }
}

/// Barrier quantities at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierEval {
    pub h: f64,
    pub h_dot: f64,
    pub psi1: f64,
    /// Row multiplying `u` in `a·u ≤ b`.
    pub a_coeff: f64,
    pub b_coeff: f64,
}

pub fn barrier(spec: &SafetySpec, p: &MaterialParams, s: &StretchPair) -> f64 {
    spec.w_safe - strain_energy(p, s)
}

/// `ḣ = −∇Wᵀλ̇`.
pub fn barrier_rate(p: &MaterialParams, st: &StretchState) -> f64 {
    -strain_energy_gradient(p, &st.stretch).dot(&st.rate_vector())
}

/// `ḧ` under pressure `u`, with `λ̈` taken from the tube dynamics.
pub fn barrier_accel(model: &TubeModel, st: &StretchState, u: f64) -> f64 {
    let p = &model.material;
    let v = st.rate_vector();
    let hess = strain_energy_hessian(p, &st.stretch);
    let grad = strain_energy_gradient(p, &st.stretch);
    -v.dot(&(hess * v)) - grad.dot(&model.acceleration(st, u))
}

/// `(ψ₀, ψ₁)` with linear gains.
pub fn psi_sequence(spec: &SafetySpec, p: &MaterialParams, st: &StretchState) -> (f64, f64) {
    let h = barrier(spec, p, &st.stretch);
    let psi1 = barrier_rate(p, st) + spec.alpha1 * h;
    (h, psi1)
}

/// `(a, b)` such that `a·u ≤ b` is the second-order barrier condition.
pub fn constraint_coefficients(spec: &SafetySpec, model: &TubeModel, st: &StretchState) -> (f64, f64) {
    let e = evaluate(spec, model, st);
    (e.a_coeff, e.b_coeff)
}

/// Full barrier evaluation with the gains of `spec`.
pub fn evaluate(spec: &SafetySpec, model: &TubeModel, st: &StretchState) -> BarrierEval {
    let (k1, k2) = spec.class_k();
    evaluate_with(spec.w_safe, &k1, &k2, spec.form, model, st)
}

/// Barrier evaluation for arbitrary class-K functions.
pub fn evaluate_with<K1: ClassK, K2: ClassK>(
    w_safe: f64,
    alpha1: &K1,
    alpha2: &K2,
    form: ConstraintForm,
    model: &TubeModel,
    st: &StretchState,
) -> BarrierEval {
    let p = &model.material;
    let v = st.rate_vector();
    let grad = strain_energy_gradient(p, &st.stretch);
    let hess = strain_energy_hessian(p, &st.stretch);

    let h = w_safe - strain_energy(p, &st.stretch);
    let h_dot = -grad.dot(&v);
    let psi1 = h_dot + alpha1.value(h);

    // ḧ = −λ̇ᵀHλ̇ − ∇Wᵀλ̈₀ − (∇Wᵀ M⁻¹F^ext) u
    let a_coeff = grad.dot(&model.input_gain(&st.stretch));
    let mut b_coeff = -v.dot(&(hess * v)) - grad.dot(&model.unforced_acceleration(st)) + alpha2.value(psi1);
    if form == ConstraintForm::Full {
        b_coeff += alpha1.slope(h) * h_dot;
    }
    BarrierEval {
        h,
        h_dot,
        psi1,
        a_coeff,
        b_coeff,
    }
}
