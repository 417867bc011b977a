// SPDX-License-Identifier: Apache-2.0

//! Duhamel fixed-point map for the Landau-Pekar system and its Picard
//! iteration, plus space-time Lebesgue norms along sampled trajectories.
//!
//! Time integrals are trapezoid sums on the uniform mesh of the candidate.
//! The integrand is pulled back by the free flow first, so the oscillating
//! factors `e^{-i(t-s)|k|²}` and `e^{-i(t-s)}` are applied exactly.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::free_flow;
use crate::error::{LabError, Result};
use crate::form_factors::FormFactorSet;
use crate::hamiltonians::field_a;
use crate::spectral::{SpectralGrid, C64};
use crate::state::PhasePoint;

const I: C64 = Complex64::new(0.0, 1.0);

/// Uniform time mesh `t_n = n T / M`, `n = 0..=M`.
pub fn mesh(t_end: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|n| t_end * n as f64 / intervals.max(1) as f64).collect()
}

/// `sup_n ‖a(t_n) - b(t_n)‖` in `L² ⊕ L²`.
pub fn trajectory_distance(a: &[PhasePoint], b: &[PhasePoint]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.distance(y)).fold(0.0, f64::max)
}

/// `ℒ(candidate)` on the candidate's mesh over `[0, t_end]`.
pub fn duhamel_map(
    candidate: &[PhasePoint],
    z0: &PhasePoint,
    t_end: f64,
    ff: &FormFactorSet,
) -> Result<Vec<PhasePoint>> {
    if candidate.is_empty() {
        return Err(LabError::MeshMismatch("empty candidate trajectory".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(LabError::MeshMismatch(format!("horizon must be non-negative, got {t_end}")));
    }
    if candidate.len() == 1 && t_end > 0.0 {
        return Err(LabError::MeshMismatch("a positive horizon needs at least two mesh points".into()));
    }
    for c in candidate {
        z0.same_grid(c)?;
    }
    let grid = z0.grid();
    let m = candidate.len() - 1;
    let times = mesh(t_end, m);
    let h = if m > 0 { t_end / m as f64 } else { 0.0 };

    let mut u_acc = grid.zeros();
    let mut a_acc = grid.zeros();
    let mut prev: Option<(Vec<C64>, Vec<C64>)> = None;
    let mut u0_hat = z0.u.clone();
    grid.raw_forward(&mut u0_hat);
    let mut out = Vec::with_capacity(candidate.len());
    for (n, (c, &t)) in candidate.iter().zip(&times).enumerate() {
        // Pulled-back integrands at s = t_n, kept in Fourier variables.
        let a = field_a(grid, &c.alpha, &ff.f, C64::new(1.0, 0.0))?;
        let mut fu: Vec<C64> = c.u.iter().zip(&a).map(|(u, a)| u * a).collect();
        grid.raw_forward(&mut fu);
        fu.iter_mut().zip(grid.k_squared()).for_each(|(v, k2)| *v *= C64::from_polar(1.0, t * k2));
        let rho: Vec<C64> = c.u.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        let eis = C64::from_polar(1.0, t);
        let fa: Vec<C64> = grid.fourier_sum(&rho).iter().zip(&ff.f).map(|(s, f)| s * f * eis).collect();
        if let Some((pu, pa)) = &prev {
            for i in 0..u_acc.len() {
                u_acc[i] += 0.5 * h * (pu[i] + fu[i]);
                a_acc[i] += 0.5 * h * (pa[i] + fa[i]);
            }
        }
        let mut u: Vec<C64> = (0..u_acc.len())
            .map(|i| (u0_hat[i] - I * u_acc[i]) * C64::from_polar(1.0, -t * grid.k_squared()[i]))
            .collect();
        grid.raw_backward(&mut u);
        let scale = 1.0 / grid.size() as f64;
        u.iter_mut().for_each(|v| *v *= scale);
        let e = C64::from_polar(1.0, -t);
        let alpha = z0.alpha.iter().zip(&a_acc).map(|(a0, acc)| e * (a0 - I * acc)).collect();
        out.push(z0.with_fields(u, alpha));
        prev = Some((fu, fa));
        debug_assert!(n < candidate.len());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardOptions {
    pub intervals: usize,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { intervals: 200, tol: 1e-12, max_iterations: 60 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    pub t_end: f64,
    pub times: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Vec<PhasePoint>,
    pub iterations: usize,
    /// `sup_t ‖ℒⁿ⁺¹ - ℒⁿ‖` per iteration.
    pub increments: Vec<f64>,
    /// Successive increment ratios.
    pub ratios: Vec<f64>,
    /// `sup_t ‖ℒⁿ‖` per iterate, the bounded-iterate monitor.
    pub iterate_norms: Vec<f64>,
}

impl PicardReport {
    pub fn endpoint(&self) -> &PhasePoint {
        self.trajectory.last().expect("mesh has at least one point")
    }

    /// Longest run of consecutive ratios `≤ bound`, ignoring iterations whose
    /// increment is already at rounding level.
    pub fn contracting_run(&self, bound: f64, floor: f64) -> usize {
        let mut best = 0;
        let mut run = 0;
        for (r, inc) in self.ratios.iter().zip(&self.increments[1..]) {
            if *inc < floor {
                break;
            }
            if *r <= bound {
                run += 1;
                best = best.max(run);
            } else {
                run = 0;
            }
        }
        best
    }
}

/// Iterate `ℒ` from the free flow of `z0` until successive iterates differ
/// by less than `tol`.
pub fn picard_solve(z0: &PhasePoint, t_end: f64, ff: &FormFactorSet, opts: &PicardOptions) -> Result<PicardReport> {
    let times = mesh(t_end, opts.intervals);
    let mut cur: Vec<PhasePoint> = times.iter().map(|&t| free_flow(z0, t)).collect();
    let sup_norm = |traj: &[PhasePoint]| traj.iter().map(|z| z.norm2().sqrt()).fold(0.0, f64::max);
    let mut increments: Vec<f64> = Vec::new();
    let mut ratios = Vec::new();
    let mut norms = vec![sup_norm(&cur)];
    let mut bad = 0;
    for it in 1..=opts.max_iterations {
        let next = duhamel_map(&cur, z0, t_end, ff)?;
        let inc = trajectory_distance(&next, &cur);
        norms.push(sup_norm(&next));
        if let Some(&last) = increments.last() {
            let r = if last > 0.0 { inc / last } else { 0.0 };
            ratios.push(r);
            bad = if r >= 1.0 { bad + 1 } else { 0 };
            if bad >= 3 {
                return Err(LabError::NotContracting { iteration: it, ratio: r });
            }
        }
        increments.push(inc);
        cur = next;
        if !inc.is_finite() {
            return Err(LabError::NotContracting { iteration: it, ratio: f64::INFINITY });
        }
        if inc < opts.tol {
            return Ok(PicardReport {
                t_end,
                times,
                trajectory: cur,
                iterations: it,
                increments,
                ratios,
                iterate_norms: norms,
            });
        }
    }
    Err(LabError::PicardNoConvergence { iterations: opts.max_iterations, tol: opts.tol })
}

/// The first `checks` increment ratios of the iteration started at the free
/// flow, or `None` if an iterate blows up first.
pub fn leading_ratios(z0: &PhasePoint, t_end: f64, ff: &FormFactorSet, intervals: usize, checks: usize) -> Option<Vec<f64>> {
    let times = mesh(t_end, intervals);
    let mut cur: Vec<PhasePoint> = times.iter().map(|&t| free_flow(z0, t)).collect();
    let mut last: Option<f64> = None;
    let mut ratios = Vec::with_capacity(checks);
    while ratios.len() < checks {
        let next = duhamel_map(&cur, z0, t_end, ff).ok()?;
        let inc = trajectory_distance(&next, &cur);
        if !inc.is_finite() {
            return None;
        }
        if let Some(l) = last {
            ratios.push(if l > 0.0 { inc / l } else { 0.0 });
        }
        last = Some(inc);
        cur = next;
    }
    Some(ratios)
}

/// Largest horizon in `[0, t_max]`, to bisection resolution, on which the
/// first `checks` increment ratios all stay `≤ bound`.
pub fn contraction_horizon(
    z0: &PhasePoint,
    ff: &FormFactorSet,
    t_max: f64,
    intervals: usize,
    checks: usize,
    bound: f64,
    bisections: usize,
) -> f64 {
    let ok = |t: f64| leading_ratios(z0, t, ff, intervals, checks).is_some_and(|r| r.iter().all(|x| *x <= bound));
    if ok(t_max) {
        return t_max;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..bisections {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `‖u‖_{L^p_t L^q_x}` by the trapezoid rule in time.
pub fn spacetime_norm(grid: &SpectralGrid, times: &[f64], fields: &[&[C64]], p: f64, q: f64) -> f64 {
    let lq: Vec<f64> = fields.iter().map(|u| grid.lq_norm(u, q)).collect();
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (lq[i].powf(p) + lq[i - 1].powf(p));
    }
    acc.powf(1.0 / p)
}

/// `‖u‖₂^{3/4} ‖u‖_{2d/(d-2)}^{1/4} - ‖u‖_{4d/(2d-1)}`; Hölder makes this
/// nonnegative with constant one.
pub fn interpolation_residual(grid: &SpectralGrid, u: &[C64]) -> Option<f64> {
    let d = grid.dim() as f64;
    if grid.dim() < 3 {
        return None;
    }
    let q = 2.0 * d / (d - 2.0);
    let r = 4.0 * d / (2.0 * d - 1.0);
    Some(grid.lq_norm(u, 2.0).powf(0.75) * grid.lq_norm(u, q).powf(0.25) - grid.lq_norm(u, r))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrichartzNorm {
    pub p: f64,
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StrichartzReport {
    NotApplicable { dim: usize },
    Norms {
        norms: Vec<StrichartzNorm>,
        /// Smallest interpolation residual over the sampled times.
        min_interpolation_residual: f64,
    },
}

/// Norms for the pairs `(2, 2d/(d-2))`, `(4, 2d/(d-1))`, `(8, 4d/(2d-1))`.
pub fn strichartz_report(grid: &SpectralGrid, times: &[f64], fields: &[&[C64]]) -> StrichartzReport {
    if grid.dim() < 3 {
        return StrichartzReport::NotApplicable { dim: grid.dim() };
    }
    let d = grid.dim() as f64;
    let pairs = [(2.0, 2.0 * d / (d - 2.0)), (4.0, 2.0 * d / (d - 1.0)), (8.0, 4.0 * d / (2.0 * d - 1.0))];
    let norms =
        pairs.iter().map(|&(p, q)| StrichartzNorm { p, q, value: spacetime_norm(grid, times, fields, p, q) }).collect();
    let min_interpolation_residual = fields
        .iter()
        .filter_map(|u| interpolation_residual(grid, u))
        .fold(f64::INFINITY, f64::min);
    StrichartzReport::Norms { norms, min_interpolation_residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_endpoint, Flow, Scheme};
    use crate::state::{RandomSmooth, WavePacket};
    use std::sync::Arc;

    fn setup() -> (Arc<SpectralGrid>, FormFactorSet) {
        let g = Arc::new(SpectralGrid::new(3, 8, 8.0).unwrap());
        let ff = FormFactorSet::new(&g, 1.0, None).unwrap();
        (g, ff)
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let (g, ff) = setup();
        let z = PhasePoint::zero(g.clone());
        let r = picard_solve(&z, 0.5, &ff, &PicardOptions { intervals: 10, ..Default::default() }).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.endpoint().norm2() == 0.0);
    }

    #[test]
    fn empty_electron_maps_free_flow_to_itself() {
        let (g, ff) = setup();
        let z = RandomSmooth { bandwidth: 1.0, mass: 1.0, phonon_norm2: 0.5 }.sample(&g, 1);
        let z = z.with_fields(g.zeros(), z.alpha.clone());
        let times = mesh(0.4, 8);
        let free: Vec<PhasePoint> = times.iter().map(|&t| free_flow(&z, t)).collect();
        let image = duhamel_map(&free, &z, 0.4, &ff).unwrap();
        assert!(trajectory_distance(&free, &image) < 1e-14);
    }

    #[test]
    fn mesh_errors() {
        let (g, ff) = setup();
        let z = PhasePoint::zero(g);
        assert!(duhamel_map(&[], &z, 1.0, &ff).is_err());
        assert!(duhamel_map(&[z.clone()], &z, 1.0, &ff).is_err());
    }

    #[test]
    fn fixed_point_matches_split_step_flow() {
        let (g, ff) = setup();
        let z = RandomSmooth { bandwidth: 0.8, mass: 0.5, phonon_norm2: 0.3 }.sample(&g, 3);
        let r = picard_solve(&z, 0.1, &ff, &PicardOptions { intervals: 400, ..Default::default() }).unwrap();
        let s = evolve_endpoint(&z, &ff, Flow::LandauPekar, 1e-4, 0.1, Scheme::StrangSplit).unwrap();
        assert!(r.endpoint().distance(&s) < 1e-6, "{}", r.endpoint().distance(&s));
        let bound = 2.0 * r.iterate_norms[0];
        assert!(r.iterate_norms.iter().all(|n| *n < bound));
    }

    #[test]
    fn larger_data_contracts_on_shorter_horizon() {
        let (g, ff) = setup();
        let z = RandomSmooth { bandwidth: 0.8, mass: 2.0, phonon_norm2: 1.0 }.sample(&g, 5);
        let t1 = contraction_horizon(&z, &ff, 8.0, 40, 5, 0.5, 6);
        let t2 = contraction_horizon(&z.scale(C64::new(2.0, 0.0)), &ff, 8.0, 40, 5, 0.5, 6);
        assert!(t2 < t1, "{t1} {t2}");
    }

    #[test]
    fn interpolation_and_norms() {
        let g = SpectralGrid::new(3, 8, 6.0).unwrap();
        let u = WavePacket { amplitude: 1.0, center: [3.0; 3], width: 1.0, momentum: [0.0; 3] }.sample(&g);
        assert!(interpolation_residual(&g, &u).unwrap() >= 0.0);
        let zero = g.zeros();
        match strichartz_report(&g, &[0.0, 1.0], &[&zero, &zero]) {
            StrichartzReport::Norms { norms, .. } => assert!(norms.iter().all(|n| n.value == 0.0)),
            _ => panic!(),
        }
        let g2 = SpectralGrid::new(2, 8, 6.0).unwrap();
        assert!(matches!(strichartz_report(&g2, &[0.0], &[&g2.zeros()]), StrichartzReport::NotApplicable { dim: 2 }));
    }
}
