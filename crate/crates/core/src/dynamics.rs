// SPDX-License-Identifier: Apache-2.0

//! Time integrators for the free flow, the Landau-Pekar flow and the
//! dressed flow.
//!
//! The split Landau-Pekar step treats `-Δ` exactly and integrates the rest
//! in closed form: with `u` only changing phase, `|u|²` is frozen, so `α`
//! solves a linear ODE with constant source and the phase of `u` is the
//! time integral of `A_α`, which is again a field `A` of the integrated `α`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRow;
use crate::error::{LabError, Result};
use crate::form_factors::FormFactorSet;
use crate::hamiltonians::{
    field_a, grad_dressed, grad_dressed_interaction, grad_undressed, h_dressed, h_undressed, GradientPair,
};
use crate::spectral::{SpectralGrid, C64};
use crate::state::PhasePoint;

const I: C64 = Complex64::new(0.0, 1.0);
const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    StrangSplit,
    Rk4OnGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flow {
    LandauPekar,
    Dressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    /// Keep full phase points at the recorded times.
    #[serde(default)]
    pub keep_states: bool,
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_end: f64, scheme: Scheme) -> Self {
        Self { dt, t_end, scheme, record_every: 1, keep_states: false }
    }

    /// Number of steps; `t_end` must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(LabError::InvalidConfig(format!("horizon must be non-negative, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(LabError::InvalidConfig("record_every must be at least 1".into()));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(LabError::InvalidConfig(format!(
                "horizon {} is not a multiple of dt {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub flow: Flow,
    pub rows: Vec<DiagnosticsRow>,
    /// Phase points at the recorded times, if requested.
    pub states: Vec<PhasePoint>,
    pub final_state: PhasePoint,
    /// Trapezoid `‖u‖_{L²_t L^q_x}` over the recorded times, `q = 2d/(d-2)`
    /// (`q = ∞` for `d ≤ 2`).
    pub strichartz_norm: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }
}

/// Exponent `2d/(d-2)` of the endpoint Strichartz space, infinite for `d ≤ 2`.
pub fn strichartz_exponent(dim: usize) -> f64 {
    if dim > 2 {
        2.0 * dim as f64 / (dim as f64 - 2.0)
    } else {
        f64::INFINITY
    }
}

fn multiplier_flow(grid: &SpectralGrid, u: &[C64], t: f64) -> Vec<C64> {
    let k2 = grid.k_squared();
    grid.apply_multiplier(u, |i| C64::from_polar(1.0, -t * k2[i]))
}

/// `φ⁰_t(u, α) = (e^{itΔ} u, e^{-it} α)`.
pub fn free_flow(z: &PhasePoint, t: f64) -> PhasePoint {
    let u = multiplier_flow(z.grid(), &z.u, t);
    let phase = C64::from_polar(1.0, -t);
    z.with_fields(u, z.alpha.iter().map(|a| a * phase).collect())
}

/// Exact flow of `i u' = A_α u`, `i α' = α + f Ŝ(|u|²)` over time `t`.
fn potential_phonon_flow(z: &PhasePoint, t: f64, ff: &FormFactorSet) -> PhasePoint {
    let grid = z.grid();
    let rho: Vec<C64> = z.u.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
    let src: Vec<C64> = grid.fourier_sum(&rho).iter().zip(&ff.f).map(|(s, f)| s * f).collect();
    let e = C64::from_polar(1.0, -t);
    // ∫_0^t e^{-is} ds
    let w = (C64::new(1.0, 0.0) - e) / I;
    let alpha = z.alpha.iter().zip(&src).map(|(a, s)| e * a + (e - 1.0) * s).collect();
    let integral: Vec<C64> = z.alpha.iter().zip(&src).map(|(a, s)| a * w + s * (w - t)).collect();
    let phase = field_a(grid, &integral, &ff.f, C64::new(1.0, 0.0)).expect("grid-sized tables");
    let u = z.u.iter().zip(&phase).map(|(v, p)| v * C64::from_polar(1.0, -p)).collect();
    z.with_fields(u, alpha)
}

/// One Strang step of the Landau-Pekar flow.
pub fn lp_step(z: &PhasePoint, dt: f64, ff: &FormFactorSet) -> PhasePoint {
    let grid = z.grid();
    let half = z.with_fields(multiplier_flow(grid, &z.u, 0.5 * dt), z.alpha.clone());
    let mid = potential_phonon_flow(&half, dt, ff);
    mid.with_fields(multiplier_flow(grid, &mid.u, 0.5 * dt), mid.alpha.clone())
}

fn tangent(grad: GradientPair, z: &PhasePoint) -> PhasePoint {
    z.with_fields(
        grad.du.into_iter().map(|v| -I * v).collect(),
        grad.dalpha.into_iter().map(|v| -I * v).collect(),
    )
}

/// Classical RK4 step for the autonomous field `v(z)`.
fn rk4<F>(z: &PhasePoint, dt: f64, v: F) -> PhasePoint
where
    F: Fn(&PhasePoint) -> PhasePoint,
{
    let k1 = v(z);
    let k2 = v(&z.axpy(C64::new(0.5 * dt, 0.0), &k1));
    let k3 = v(&z.axpy(C64::new(0.5 * dt, 0.0), &k2));
    let k4 = v(&z.axpy(C64::new(dt, 0.0), &k3));
    combine_rk4(z, dt, [&k1, &k2, &k3, &k4])
}

fn combine_rk4(z: &PhasePoint, dt: f64, k: [&PhasePoint; 4]) -> PhasePoint {
    let c = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
    let mut u = z.u.clone();
    let mut alpha = z.alpha.clone();
    for (ki, ci) in k.iter().zip(c) {
        u.iter_mut().zip(&ki.u).for_each(|(a, b)| *a += ci * b);
        alpha.iter_mut().zip(&ki.alpha).for_each(|(a, b)| *a += ci * b);
    }
    z.with_fields(u, alpha)
}

/// One step of the dressed flow: exact free half steps around an RK4 step
/// of the interaction part.
pub fn dressed_step(z: &PhasePoint, dt: f64, ff: &FormFactorSet) -> Result<PhasePoint> {
    require_uv_free(ff)?;
    let half = free_flow(z, 0.5 * dt);
    let mid = rk4(&half, dt, |w| tangent(grad_dressed_interaction(w, ff).expect("checked"), w));
    Ok(free_flow(&mid, 0.5 * dt))
}

/// `X(t, w) = -i φ⁰_{-t} ∇_z̄ ĥ_{∞,I}(φ⁰_t w)`.
pub fn interaction_field_x(t: f64, w: &PhasePoint, ff: &FormFactorSet) -> Result<PhasePoint> {
    let g = grad_dressed_interaction(&free_flow(w, t), ff)?;
    Ok(free_flow(&tangent(g, w), -t))
}

/// Dressed flow through the interaction picture: RK4 on `w' = X(t, w)`
/// from `w(0) = z0`, mapped back by `φ⁰_T`.
pub fn dressed_evolve_interaction_picture(z0: &PhasePoint, ff: &FormFactorSet, dt: f64, t_end: f64) -> Result<PhasePoint> {
    let steps = EvolutionConfig::new(dt, t_end, Scheme::Rk4OnGradient).steps()?;
    let mut w = z0.clone();
    let x = |t: f64, w: &PhasePoint| interaction_field_x(t, w, ff);
    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = x(t, &w)?;
        let k2 = x(t + 0.5 * dt, &w.axpy(C64::new(0.5 * dt, 0.0), &k1))?;
        let k3 = x(t + 0.5 * dt, &w.axpy(C64::new(0.5 * dt, 0.0), &k2))?;
        let k4 = x(t + dt, &w.axpy(C64::new(dt, 0.0), &k3))?;
        w = combine_rk4(&w, dt, [&k1, &k2, &k3, &k4]);
        check_blow_up(&w, n + 1, t + dt, None)?;
    }
    Ok(free_flow(&w, t_end))
}

fn require_uv_free(ff: &FormFactorSet) -> Result<()> {
    if ff.sigma().is_some() {
        return Err(LabError::InvalidCutoff("the dressed flow needs tables built without an ultraviolet cutoff".into()));
    }
    Ok(())
}

fn max_abs(u: &[C64]) -> f64 {
    u.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn check_blow_up(z: &PhasePoint, step: usize, time: f64, initial_max: Option<f64>) -> Result<()> {
    if !z.is_finite() {
        return Err(LabError::BlowUp { step, time, reason: "non-finite field value".into() });
    }
    if let Some(m0) = initial_max {
        let m = max_abs(&z.u);
        if m0 > 0.0 && m > BLOW_UP_FACTOR * m0 {
            return Err(LabError::BlowUp {
                step,
                time,
                reason: format!("max|u| = {m:e} exceeds {BLOW_UP_FACTOR:e} times its initial value {m0:e}"),
            });
        }
    }
    Ok(())
}

/// Single step of the requested flow and scheme.
pub fn step(z: &PhasePoint, dt: f64, ff: &FormFactorSet, flow: Flow, scheme: Scheme) -> Result<PhasePoint> {
    match (flow, scheme) {
        (Flow::LandauPekar, Scheme::StrangSplit) => Ok(lp_step(z, dt, ff)),
        (Flow::LandauPekar, Scheme::Rk4OnGradient) => Ok(rk4(z, dt, |w| tangent(grad_undressed(w, ff), w))),
        (Flow::Dressed, Scheme::StrangSplit) => dressed_step(z, dt, ff),
        (Flow::Dressed, Scheme::Rk4OnGradient) => {
            require_uv_free(ff)?;
            Ok(rk4(z, dt, |w| tangent(grad_dressed(w, ff).expect("checked"), w)))
        }
    }
}

pub fn energy(z: &PhasePoint, ff: &FormFactorSet, flow: Flow) -> Result<f64> {
    match flow {
        Flow::LandauPekar => Ok(h_undressed(z, ff).total),
        Flow::Dressed => Ok(h_dressed(z, ff)?.total),
    }
}

fn row(z: &PhasePoint, t: f64, ff: &FormFactorSet, flow: Flow) -> Result<DiagnosticsRow> {
    let undressed = h_undressed(z, ff);
    let dressed = match h_dressed(z, ff) {
        Ok(e) => Some(e),
        Err(e) if matches!(flow, Flow::Dressed) => return Err(e),
        Err(_) => None,
    };
    let energy = match (flow, dressed) {
        (Flow::Dressed, Some(e)) => e.total,
        _ => undressed.total,
    };
    let mass = z.mass();
    Ok(DiagnosticsRow {
        time: t,
        mass,
        energy,
        undressed,
        dressed,
        h1_norm: (mass + undressed.kinetic).sqrt(),
        phonon_norm2: z.phonon_norm2(),
        max_abs_u: max_abs(&z.u),
    })
}

/// Evolve `z0` and record diagnostics every `record_every` steps and at the
/// final time.
pub fn evolve(z0: &PhasePoint, ff: &FormFactorSet, flow: Flow, cfg: &EvolutionConfig) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let grid = z0.grid();
    let q = strichartz_exponent(grid.dim());
    let m0 = max_abs(&z0.u);
    let mut z = z0.clone();
    let mut rows = vec![row(&z, 0.0, ff, flow)?];
    let mut states = Vec::new();
    if cfg.keep_states {
        states.push(z.clone());
    }
    let mut lq = vec![grid.lq_norm(&z.u, q)];
    for n in 1..=steps {
        let t = n as f64 * cfg.dt;
        z = step(&z, cfg.dt, ff, flow, cfg.scheme)?;
        check_blow_up(&z, n, t, Some(m0))?;
        if n % cfg.record_every == 0 || n == steps {
            rows.push(row(&z, t, ff, flow)?);
            lq.push(grid.lq_norm(&z.u, q));
            if cfg.keep_states {
                states.push(z.clone());
            }
        }
    }
    let mut acc = 0.0;
    for i in 1..rows.len() {
        let h = rows[i].time - rows[i - 1].time;
        acc += 0.5 * h * (lq[i] * lq[i] + lq[i - 1] * lq[i - 1]);
    }
    Ok(Trajectory { flow, rows, states, final_state: z, strichartz_norm: acc.sqrt() })
}

/// Endpoint of `evolve` without diagnostics.
pub fn evolve_endpoint(z0: &PhasePoint, ff: &FormFactorSet, flow: Flow, dt: f64, t_end: f64, scheme: Scheme) -> Result<PhasePoint> {
    let steps = EvolutionConfig::new(dt, t_end, scheme).steps()?;
    let m0 = max_abs(&z0.u);
    let mut z = z0.clone();
    for n in 1..=steps {
        z = step(&z, dt, ff, flow, scheme)?;
        check_blow_up(&z, n, n as f64 * dt, Some(m0))?;
    }
    Ok(z)
}
