//! On-demand verification report: derivative checks, barrier reconstruction,
//! filter oracle, convergence order and forward invariance for one run.

use std::fmt;

use nalgebra::{Matrix2, Vector2};

use crate::config::ResolvedRun;
use crate::hocbf::{self, barrier_accel};
use crate::integrator::{rk4_step, simulate, ControlUpdate, SimulationConfig, SimulationError, SimulationTrace};
use crate::material::{
    strain_energy, strain_energy_gradient, strain_energy_hessian, uniform_axis, MaterialParams, StretchPair,
};
use crate::safety_filter::filter_scalar;
use crate::tube::{StretchState, TubeModel};

pub const GRADIENT_TOL: f64 = 1e-6;
pub const HESSIAN_TOL: f64 = 1e-5;
pub const RECONSTRUCTION_TOL: f64 = 1e-4;
pub const QP_TOL: f64 = 1e-8;
pub const ORDER_RANGE: (f64, f64) = (3.7, 4.3);
/// Allowed `min h`, as a fraction of `w_safe`.
pub const INVARIANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: &'static str,
    pub measured: f64,
    pub limit: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            writeln!(
                f,
                "{} {:<24} measured {:<12.4e} limit {}",
                if i.passed { "PASS" } else { "FAIL" },
                i.name,
                i.measured,
                i.limit
            )?;
        }
        Ok(())
    }
}

/// The gradient under test. The `fault-injection` feature perturbs it so the
/// derivative check has a negative control.
pub fn gradient_under_test(p: &MaterialParams, s: &StretchPair) -> Vector2<f64> {
    let g = strain_energy_gradient(p, s);
    if cfg!(feature = "fault-injection") {
        g * (1.0 + 1e-3)
    } else {
        g
    }
}

/// Radical-inverse (Halton) point; deterministic space-filling samples.
pub fn halton(index: usize, base: usize) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, index);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Fourth-order central difference of a scalar function.
fn central5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn pair(lt: f64, lz: f64) -> StretchPair {
    StretchPair {
        lambda_theta: lt,
        lambda_z: lz,
    }
}

/// Largest norm-wise relative error of the gradient on an `n × n` grid.
pub fn gradient_fd_error(p: &MaterialParams, range: (f64, f64), n: usize) -> f64 {
    let axis = uniform_axis(range, n);
    let mut worst = 0.0_f64;
    for &lt in &axis {
        for &lz in &axis {
            let h = 1e-3;
            let fd = Vector2::new(
                central5(|x| strain_energy(p, &pair(x, lz)), lt, h * lt),
                central5(|x| strain_energy(p, &pair(lt, x)), lz, h * lz),
            );
            let an = gradient_under_test(p, &pair(lt, lz));
            worst = worst.max((an - fd).norm() / an.norm());
        }
    }
    worst
}

/// Largest norm-wise (Frobenius) relative error of the Hessian on a grid.
pub fn hessian_fd_error(p: &MaterialParams, range: (f64, f64), n: usize) -> f64 {
    let axis = uniform_axis(range, n);
    let mut worst = 0.0_f64;
    for &lt in &axis {
        for &lz in &axis {
            let h = 1e-3;
            let dt = |k: usize| central5(|x| strain_energy_gradient(p, &pair(x, lz))[k], lt, h * lt);
            let dz = |k: usize| central5(|x| strain_energy_gradient(p, &pair(lt, x))[k], lz, h * lz);
            let fd = Matrix2::new(dt(0), dz(0), dt(1), dz(1));
            let an = strain_energy_hessian(p, &pair(lt, lz));
            worst = worst.max((an - fd).norm() / an.norm());
        }
    }
    worst
}

/// Open-loop state after `tau` seconds (negative allowed) in `steps` RK4 steps.
fn flow(model: &TubeModel, st: &StretchState, u: f64, tau: f64, steps: usize) -> StretchState {
    let mut s = *st;
    for _ in 0..steps {
        s = rk4_step(model, &s, u, tau / steps as f64).expect("micro-trajectory stays admissible");
    }
    s
}

/// `ḧ` by a fourth-order second difference of `h` along the open-loop flow.
pub fn barrier_accel_fd(run: &ResolvedRun, st: &StretchState, u: f64, delta: f64) -> f64 {
    let p = &run.model.material;
    let h = |tau: f64| {
        if tau == 0.0 {
            hocbf::barrier(&run.spec, p, &st.stretch)
        } else {
            hocbf::barrier(&run.spec, p, &flow(&run.model, st, u, tau, 20).stretch)
        }
    };
    (-h(-2.0 * delta) + 16.0 * h(-delta) - 30.0 * h(0.0) + 16.0 * h(delta) - h(2.0 * delta)) / (12.0 * delta * delta)
}

/// Relative disagreement between the differenced and analytic `ḧ`, scaled by
/// the magnitudes of its two terms `λ̇ᵀHλ̇` and `∇Wᵀλ̈`.
pub fn reconstruction_error(run: &ResolvedRun, st: &StretchState, u: f64) -> f64 {
    let p = &run.model.material;
    let v = st.rate_vector();
    let curvature = v.dot(&(strain_energy_hessian(p, &st.stretch) * v));
    let drive = strain_energy_gradient(p, &st.stretch).dot(&run.model.acceleration(st, u));
    let an = barrier_accel(&run.model, st, u);
    let fd = barrier_accel_fd(run, st, u, 5e-6);
    (fd - an).abs() / (curvature.abs() + drive.abs())
}

/// Safe states `(λθ, λz, λ̇θ, λ̇z)` and pressures from a Halton sequence.
pub fn sample_safe_states(run: &ResolvedRun, count: usize) -> Vec<(StretchState, f64)> {
    let p = &run.model.material;
    let mut out = Vec::with_capacity(count);
    let mut k = 1;
    while out.len() < count {
        let lt = 0.5 + 2.0 * halton(k, 2);
        let lz = 0.5 + 2.0 * halton(k, 3);
        let rt = -5.0 + 10.0 * halton(k, 5);
        let rz = -5.0 + 10.0 * halton(k, 7);
        let u = -20_000.0 + 40_000.0 * halton(k, 11);
        k += 1;
        if hocbf::barrier(&run.spec, p, &pair(lt, lz)) <= 0.0 {
            continue;
        }
        out.push((StretchState::new(lt, lz, rt, rz).expect("sampled inside the box"), u));
    }
    out
}

/// Minimiser of `|u − u_nom|` over `{a·u ≤ b}` by repeated grid refinement.
pub fn brute_force_scalar(u_nom: f64, a: f64, b: f64) -> Option<f64> {
    let feasible = |u: f64| a * u <= b;
    let mut centre = u_nom;
    let mut half = 4.0 * (u_nom.abs() + (b / a).abs() + 1.0);
    let mut best = None;
    for _ in 0..60 {
        let n = 200;
        let mut round_best: Option<f64> = None;
        for i in 0..=n {
            let u = centre - half + 2.0 * half * i as f64 / n as f64;
            if feasible(u) && round_best.is_none_or(|v| (u - u_nom).abs() < (v - u_nom).abs()) {
                round_best = Some(u);
            }
        }
        match round_best {
            Some(u) => {
                best = Some(u);
                centre = u;
                half *= 2.0 / n as f64 * 2.0;
            }
            None => break,
        }
        if half < 1e-13 * u_nom.abs().max(1.0) {
            break;
        }
    }
    best
}

/// Largest gap between the closed-form filter and the brute-force oracle.
pub fn qp_oracle_error(count: usize) -> f64 {
    let mut worst = 0.0_f64;
    for k in 1..=count {
        let u_nom = -10.0 + 20.0 * halton(k, 2);
        let mut a = -3.0 + 6.0 * halton(k, 3);
        if a.abs() < 0.05 {
            a = 0.05_f64.copysign(a);
        }
        let b = -10.0 + 20.0 * halton(k, 5);
        let filtered = filter_scalar(u_nom, a, b).expect("a is bounded away from zero").u_safe;
        let oracle = brute_force_scalar(u_nom, a, b).expect("the half-line is never empty");
        worst = worst.max((filtered - oracle).abs() / u_nom.abs().max(1.0));
    }
    worst
}

fn endpoint(cfg: &SimulationConfig, run: &ResolvedRun, dt: f64) -> Result<[f64; 4], SimulationError> {
    let c = SimulationConfig {
        dt,
        log_stride: 1,
        ..cfg.clone()
    };
    let trace = simulate(&c, &run.spec, &run.model)?;
    let r = trace.rows.last().expect("a successful run logs at least one row");
    Ok([r.lambda_theta, r.lambda_z, r.dlambda_theta, r.dlambda_z])
}

/// Richardson order estimate from runs at `2dt`, `dt` and `dt/2`.
pub fn convergence_order(run: &ResolvedRun, cfg: &SimulationConfig) -> Result<f64, SimulationError> {
    let dt = cfg.dt;
    let coarse = endpoint(cfg, run, 2.0 * dt)?;
    let mid = endpoint(cfg, run, dt)?;
    let fine = endpoint(cfg, run, 0.5 * dt)?;
    let diff = |x: &[f64; 4], y: &[f64; 4]| (0..4).map(|i| (x[i] - y[i]).abs()).fold(0.0, f64::max);
    Ok((diff(&coarse, &mid) / diff(&mid, &fine)).log2())
}

/// Runs every check for the resolved configuration.
pub fn run_checks(run: &ResolvedRun) -> CheckReport {
    let mut items = Vec::new();
    let p = run.model.material;
    let range = (0.5, 2.5);

    let g = gradient_fd_error(&p, range, 50);
    items.push(CheckItem {
        name: "gradient_fd",
        measured: g,
        limit: format!("< {GRADIENT_TOL:e}"),
        passed: g < GRADIENT_TOL,
    });
    let h = hessian_fd_error(&p, range, 50);
    items.push(CheckItem {
        name: "hessian_fd",
        measured: h,
        limit: format!("< {HESSIAN_TOL:e}"),
        passed: h < HESSIAN_TOL,
    });

    let rec = sample_safe_states(run, 1000)
        .iter()
        .map(|(st, u)| reconstruction_error(run, st, *u))
        .fold(0.0, f64::max);
    items.push(CheckItem {
        name: "barrier_reconstruction",
        measured: rec,
        limit: format!("< {RECONSTRUCTION_TOL:e}"),
        passed: rec < RECONSTRUCTION_TOL,
    });

    let qp = qp_oracle_error(1000);
    items.push(CheckItem {
        name: "qp_oracle",
        measured: qp,
        limit: format!("< {QP_TOL:e}"),
        passed: qp < QP_TOL,
    });

    let located = SimulationConfig {
        control_update: ControlUpdate::SwitchLocated,
        ..run.simulation.clone()
    };
    let order = convergence_order(run, &located).unwrap_or(f64::NAN);
    items.push(CheckItem {
        name: "rk4_order",
        measured: order,
        limit: format!("in [{}, {}]", ORDER_RANGE.0, ORDER_RANGE.1),
        passed: (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&order),
    });

    if run.simulation.filter_enabled {
        let min_h = simulate(&run.simulation, &run.spec, &run.model)
            .map(|t: SimulationTrace| t.min_h())
            .unwrap_or(f64::NEG_INFINITY);
        let floor = -INVARIANCE_TOL * run.spec.w_safe;
        items.push(CheckItem {
            name: "forward_invariance",
            measured: min_h,
            limit: format!(">= {floor:.4e}"),
            passed: min_h >= floor,
        });
    }
    CheckReport { items }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_points() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn brute_force_finds_the_boundary() {
        let u = brute_force_scalar(5.0, 1.0, 3.0).unwrap();
        assert!((u - 3.0).abs() < 1e-10, "{u}");
        assert_eq!(brute_force_scalar(1.0, 1.0, 3.0).unwrap(), 1.0);
        let u = brute_force_scalar(-4.0, -2.0, 2.0).unwrap();
        assert!((u + 1.0).abs() < 1e-10, "{u}");
    }

    #[test]
    fn central_difference_is_fourth_order() {
        let err = |h: f64| (central5(f64::sin, 0.7, h) - 0.7f64.cos()).abs();
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }
}
