// SPDX-License-Identifier: Apache-2.0

//! Conserved-quantity tracking, convergence orders and gradient checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::hamiltonians::{EnergyBreakdown, GradientPair};
use crate::spectral::C64;
use crate::state::PhasePoint;

/// One sampled time of a trajectory. Both energy functionals are recorded
/// whichever flow produced the state; the dressed one is absent when the
/// form factors carry a UV cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub mass: f64,
    /// Energy of the flow being integrated.
    pub energy: f64,
    pub undressed: EnergyBreakdown,
    pub dressed: Option<EnergyBreakdown>,
    /// `(‖u‖² + ‖∇u‖²)^{1/2}`.
    pub h1_norm: f64,
    pub phonon_norm2: f64,
    pub max_abs_u: f64,
}

const BREAKDOWN_FIELDS: [&str; 7] = ["kinetic", "phonon", "coupling", "pair", "quadratic", "drift", "total"];

fn breakdown_values(e: Option<&EnergyBreakdown>) -> [f64; 7] {
    match e {
        Some(e) => [e.kinetic, e.phonon, e.coupling, e.pair, e.quadratic, e.drift, e.total],
        None => [f64::NAN; 7],
    }
}

impl DiagnosticsRow {
    pub fn csv_header() -> String {
        let mut cols = vec!["time".to_string(), "mass".into(), "energy".into()];
        for prefix in ["h", "hdressed"] {
            cols.extend(BREAKDOWN_FIELDS.iter().map(|f| format!("{prefix}_{f}")));
        }
        cols.extend(["h1_norm".into(), "phonon_norm2".into(), "max_abs_u".into()]);
        cols.join(",")
    }

    pub fn csv_line(&self) -> String {
        let mut vals = vec![self.time, self.mass, self.energy];
        vals.extend(breakdown_values(Some(&self.undressed)));
        vals.extend(breakdown_values(self.dressed.as_ref()));
        vals.extend([self.h1_norm, self.phonon_norm2, self.max_abs_u]);
        vals.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
    }
}

/// `max_t |q(t) - q(0)| / (1 + |q(0)|)`.
pub fn relative_drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    it.map(|v| (v - first).abs()).fold(0.0, f64::max) / (1.0 + first.abs())
}

/// Observed orders `log2(e_i / e_{i+1})` for errors at successively halved
/// steps, with a flag set when the errors fail to decrease.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceOrder {
    pub errors: Vec<f64>,
    pub ratios: Vec<f64>,
    pub orders: Vec<f64>,
    pub non_monotone: bool,
}

pub fn convergence_order(errors: &[f64]) -> ConvergenceOrder {
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let orders = ratios.iter().map(|r| r.log2()).collect();
    let non_monotone = errors.windows(2).any(|w| !(w[1] < w[0]));
    ConvergenceOrder { errors: errors.to_vec(), ratios, orders, non_monotone }
}

/// Standard normal direction in both components.
pub fn random_direction(z: &PhasePoint, rng: &mut ChaCha8Rng) -> PhasePoint {
    let mut draw = |n: usize| -> Vec<C64> {
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut *rng);
                let im: f64 = StandardNormal.sample(&mut *rng);
                C64::new(re, im)
            })
            .collect()
    };
    let u = draw(z.u.len());
    let alpha = draw(z.alpha.len());
    z.with_fields(u, alpha)
}

/// Result of comparing a gradient against central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientCheck {
    pub directions: usize,
    pub step: f64,
    /// Worst `|fd - an| / (‖G‖ ‖v‖)` over all directions.
    pub max_relative_error: f64,
}

/// Central-difference check of `δh = 2 Re⟨G, v⟩` along seeded random
/// directions `v`. Errors are measured against `‖G‖ ‖v‖`, the natural scale
/// of a directional derivative, so that directions nearly orthogonal to `G`
/// are not penalized for rounding noise.
pub fn gradient_check<H>(
    h: H,
    grad: &GradientPair,
    z: &PhasePoint,
    directions: usize,
    step: f64,
    seed: u64,
) -> GradientCheck
where
    H: Fn(&PhasePoint) -> f64,
{
    let grid = z.grid();
    let gnorm = grad.norm(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let v = random_direction(z, &mut rng);
        let vnorm = v.norm2().sqrt();
        let v = v.scale(C64::new(1.0 / vnorm, 0.0));
        let plus = h(&z.axpy(C64::new(step, 0.0), &v));
        let minus = h(&z.axpy(C64::new(-step, 0.0), &v));
        let fd = (plus - minus) / (2.0 * step);
        let an = grad.directional(grid, &v);
        let scale = gnorm.max(f64::MIN_POSITIVE);
        worst = worst.max((fd - an).abs() / scale);
    }
    GradientCheck { directions, step, max_relative_error: worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form_factors::FormFactorSet;
    use crate::hamiltonians::{
        grad_dressed, grad_dressed_term, grad_undressed, h_dressed, h_dressed_term, h_undressed, DressedTerm,
    };
    use crate::spectral::SpectralGrid;
    use crate::state::RandomSmooth;
    use std::sync::Arc;

    fn setup() -> (PhasePoint, FormFactorSet) {
        let g = Arc::new(SpectralGrid::new(3, 8, 6.0).unwrap());
        let ff = FormFactorSet::new(&g, 1.0, None).unwrap();
        let z = RandomSmooth { bandwidth: 1.5, mass: 1.0, phonon_norm2: 0.8 }.sample(&g, 5);
        (z, ff)
    }

    #[test]
    fn drift_and_orders() {
        assert_eq!(relative_drift([1.0, 1.5, 0.0]), 0.5);
        let c = convergence_order(&[1.0, 0.25, 0.0625]);
        assert!(c.orders.iter().all(|o| (o - 2.0).abs() < 1e-12));
        assert!(!c.non_monotone);
        assert!(convergence_order(&[1.0, 2.0]).non_monotone);
    }

    #[test]
    fn csv_columns_line_up() {
        let row = DiagnosticsRow {
            time: 0.5,
            mass: 1.0,
            energy: 2.0,
            undressed: EnergyBreakdown::default(),
            dressed: None,
            h1_norm: 1.5,
            phonon_norm2: 0.25,
            max_abs_u: 0.1,
        };
        let header = DiagnosticsRow::csv_header();
        let line = row.csv_line();
        assert_eq!(header.split(',').count(), line.split(',').count());
        assert!(line.contains("NaN"));
    }

    #[test]
    fn undressed_gradient_matches_differences() {
        let (z, ff) = setup();
        let g = grad_undressed(&z, &ff);
        let r = gradient_check(|w| h_undressed(w, &ff).total, &g, &z, 20, 1e-5, 1);
        assert!(r.max_relative_error < 1e-7, "{r:?}");
    }

    #[test]
    fn dressed_gradient_matches_differences_termwise() {
        let (z, ff) = setup();
        for term in DressedTerm::ALL {
            let g = grad_dressed_term(term, &z, &ff);
            let r = gradient_check(|w| h_dressed_term(term, w, &ff), &g, &z, 20, 1e-5, 2);
            assert!(r.max_relative_error < 1e-7, "{term:?}: {r:?}");
        }
        let g = grad_dressed(&z, &ff).unwrap();
        let r = gradient_check(|w| h_dressed(w, &ff).unwrap().total, &g, &z, 20, 1e-5, 3);
        assert!(r.max_relative_error < 1e-7, "{r:?}");
    }
}
