// SPDX-License-Identifier: Apache-2.0

//! The classical Gross transformation `D(θ)`.
//!
//! `D(θ)` is the time-`θ` flow of the quadratic-in-`u`, linear-in-`α`
//! generator built from `B`. Along that flow `|u|` is conserved, so
//! `Ŝ(|u|²)` and the shift of `α` are constant, and the phase field is
//! `A_{α,iB}` with `α` replaced by `α0 + sBŜ`. The shift contributes
//! `A_{BŜ,iB}`, which vanishes identically because `B` is real and even
//! while `Ŝ(-k) = conj(Ŝ(k))`. The flow is therefore closed form.

use num_complex::Complex64;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::random_direction;
use crate::dynamics::{evolve, EvolutionConfig, Flow};
use crate::error::Result;
use crate::form_factors::FormFactorSet;
use crate::hamiltonians::{field_a, h_dressed, h_undressed};
use crate::spectral::C64;
use crate::state::PhasePoint;

const I: C64 = Complex64::new(0.0, 1.0);

/// `Ŝ(|u|²)(k) = Σ_x |u|² e^{-ik·x} dx`, times `B(k)`.
fn density_shift(z: &PhasePoint, ff: &FormFactorSet) -> Vec<C64> {
    let grid = z.grid();
    let rho: Vec<C64> = z.u.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
    grid.fourier_sum(&rho).iter().zip(&ff.b).map(|(s, b)| s * b).collect()
}

/// `max_x |A_{BŜ,iB}(x)|`, which should be rounding noise.
pub fn self_phase_residual(z: &PhasePoint, ff: &FormFactorSet) -> f64 {
    let shift = density_shift(z, ff);
    field_a(z.grid(), &shift, &ff.b, I).expect("grid-sized tables").iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Apply `D(θ)` to `z`.
pub fn dressing_apply(z: &PhasePoint, theta: f64, ff: &FormFactorSet) -> PhasePoint {
    let grid = z.grid();
    let phase = field_a(grid, &z.alpha, &ff.b, I).expect("grid-sized tables");
    debug_assert!(self_phase_residual(z, ff) < 1e-8 * (1.0 + z.mass()));
    let u = z.u.iter().zip(&phase).map(|(v, p)| v * C64::from_polar(1.0, -theta * p)).collect();
    let shift = density_shift(z, ff);
    let alpha = z.alpha.iter().zip(&shift).map(|(a, s)| a + theta * s).collect();
    z.with_fields(u, alpha)
}

/// `|ĥ∞(z) - h∞(D(1)z)| / (1 + |ĥ∞(z)|)`.
pub fn dressed_identity_residual(z: &PhasePoint, ff: &FormFactorSet) -> Result<f64> {
    let hd = h_dressed(z, ff)?.total;
    let h = h_undressed(&dressing_apply(z, 1.0, ff), ff).total;
    Ok((hd - h).abs() / (1.0 + hd.abs()))
}

/// Distances `‖φ_t(z0) - D(1) φ̂_t(D(-1) z0)‖` at the recorded times.
///
/// Since `ĥ∞ = h∞ ∘ D(1)`, the dressed flow is `D(-1) ∘ φ_t ∘ D(1)`; the
/// undressed flow is recovered as `D(1) ∘ φ̂_t ∘ D(-1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugationCurve {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
}

impl ConjugationCurve {
    pub fn final_distance(&self) -> f64 {
        self.distances.last().copied().unwrap_or(0.0)
    }
}

/// Run both flows with the same configuration and compare them through the
/// dressing.
pub fn verify_conjugation(z0: &PhasePoint, ff: &FormFactorSet, cfg: &EvolutionConfig) -> Result<ConjugationCurve> {
    let cfg = EvolutionConfig { keep_states: true, ..*cfg };
    let lp = evolve(z0, ff, Flow::LandauPekar, &cfg)?;
    let dressed = evolve(&dressing_apply(z0, -1.0, ff), ff, Flow::Dressed, &cfg)?;
    let distances =
        lp.states.iter().zip(&dressed.states).map(|(a, b)| a.distance(&dressing_apply(b, 1.0, ff))).collect();
    Ok(ConjugationCurve { times: lp.times(), distances })
}

/// Largest `|Im⟨Dv, Dw⟩ - Im⟨v, w⟩|` over seeded unit tangent pairs, with the
/// pushforward `D = dD(1)` taken by central differences of step `h`.
pub fn symplectic_defect(z: &PhasePoint, ff: &FormFactorSet, h: f64, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let push = |v: &PhasePoint| {
        let p = dressing_apply(&z.axpy(C64::new(h, 0.0), v), 1.0, ff);
        let m = dressing_apply(&z.axpy(C64::new(-h, 0.0), v), 1.0, ff);
        p.axpy(C64::new(-1.0, 0.0), &m).scale(C64::new(0.5 / h, 0.0))
    };
    let unit = |v: PhasePoint| {
        let n = v.norm2().sqrt();
        v.scale(C64::new(1.0 / n, 0.0))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let v = unit(random_direction(z, &mut rng));
        let w = unit(random_direction(z, &mut rng));
        worst = worst.max((push(&v).symplectic(&push(&w)) - v.symplectic(&w)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;
    use crate::dynamics::Scheme;
    use crate::state::RandomSmooth;
    use std::sync::Arc;

    fn setup() -> (Arc<SpectralGrid>, FormFactorSet) {
        let g = Arc::new(SpectralGrid::new(3, 16, 8.0).unwrap());
        let ff = FormFactorSet::new(&g, 1.0, None).unwrap();
        (g, ff)
    }

    #[test]
    fn group_law_and_inverse() {
        let (g, ff) = setup();
        let z = RandomSmooth { bandwidth: 0.6, mass: 1.0, phonon_norm2: 0.5 }.sample(&g, 3);
        let back = dressing_apply(&dressing_apply(&z, 1.0, &ff), -1.0, &ff);
        assert!(back.sup_distance(&z) < 1e-12);
        let two = dressing_apply(&dressing_apply(&z, 0.3, &ff), 0.4, &ff);
        assert!(two.sup_distance(&dressing_apply(&z, 0.7, &ff)) < 1e-12);
    }

    #[test]
    fn mass_preserved_and_self_phase_vanishes() {
        let (g, ff) = setup();
        let z = RandomSmooth { bandwidth: 0.8, mass: 2.0, phonon_norm2: 1.0 }.sample(&g, 9);
        assert!(self_phase_residual(&z, &ff) < 1e-12);
        assert!((dressing_apply(&z, 0.7, &ff).mass() - z.mass()).abs() < 1e-12);
    }

    #[test]
    fn conjugation_error_vanishes_on_empty_electron_and_shrinks_with_dt() {
        let (g, ff) = setup();
        let z = RandomSmooth { bandwidth: 0.4, mass: 1.0, phonon_norm2: 0.5 }.sample(&g, 8);
        let empty = z.with_fields(g.zeros(), z.alpha.clone());
        let cfg = EvolutionConfig::new(0.02, 0.2, Scheme::StrangSplit);
        let c = verify_conjugation(&empty, &ff, &cfg).unwrap();
        assert!(c.distances.iter().all(|d| *d < 1e-13));
        let e1 = verify_conjugation(&z, &ff, &cfg).unwrap();
        assert!(e1.distances[0] < 1e-14);
        let e2 = verify_conjugation(&z, &ff, &EvolutionConfig::new(0.01, 0.2, Scheme::StrangSplit)).unwrap();
        let r = e1.final_distance() / e2.final_distance();
        assert!((3.0..=5.0).contains(&r), "{r}");
    }

    #[test]
    fn pushforward_preserves_symplectic_pairing() {
        let (g, ff) = setup();
        let z = RandomSmooth { bandwidth: 0.6, mass: 1.0, phonon_norm2: 0.5 }.sample(&g, 2);
        for h in [1e-3, 1e-4] {
            let d = symplectic_defect(&z, &ff, h, 5, 1);
            assert!(d < h, "h = {h}: {d:e}");
        }
    }

    #[test]
    fn dressed_energy_matches_undressed_after_transform() {
        let (g, ff) = setup();
        for seed in 0..3 {
            let z = RandomSmooth { bandwidth: 0.6, mass: 1.0, phonon_norm2: 0.5 }.sample(&g, seed);
            let r = dressed_identity_residual(&z, &ff).unwrap();
            assert!(r < 1e-9, "seed {seed}: {r:e}");
        }
    }
}
