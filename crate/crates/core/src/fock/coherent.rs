// SPDX-License-Identifier: Apache-2.0

//! Coherent states and Weyl operators on the truncated basis.
//!
//! `Φ(f) = (a†(f) + a(f))/√2` with `a†(f) = Σ f_m a†_m`, and
//! `W(f) = exp(iΦ(f))`. The coherent state with amplitudes `z` is
//! `W(√2 z/(iε)) Ω`, which has `⟨a_m⟩ = z_m`.

use nalgebra::{DMatrix, DVector};

use super::operator::{Monomial, OperatorMatrix, PolyOp};
use super::FockModel;
use crate::error::{LabError, Result};
use crate::spectral::C64;

/// Smallest `n` with `P(N > n) < tol` for `N ~ Poisson(λ)`.
pub fn poisson_cutoff(lambda: f64, tol: f64) -> usize {
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut n = 0;
    while 1.0 - cdf >= tol && n < 10_000 {
        n += 1;
        p *= lambda / n as f64;
        cdf += p;
    }
    n
}

/// Check the margin `‖z‖²/ε ≤ n_max/3` separately for particles and phonons.
fn check_margin(model: &FockModel, z: &[C64]) -> Result<()> {
    if z.len() != model.mode_count() {
        return Err(LabError::InvalidModel(format!("{} amplitudes for {} modes", z.len(), model.mode_count())));
    }
    let mp = model.particle_mode_count();
    let eps = model.epsilon();
    let particle_max = model.spec().particle_numbers.iter().copied().max().unwrap_or(0);
    let sectors = [("particle", &z[..mp], particle_max), ("phonon", &z[mp..], model.spec().phonon_max)];
    for (name, amps, cap) in sectors {
        let mean = amps.iter().map(|a| a.norm_sqr()).sum::<f64>() / eps;
        if mean > cap as f64 / 3.0 {
            return Err(LabError::TruncationMargin(format!(
                "{name} mean occupancy {mean:.3} exceeds {cap}/3"
            )));
        }
    }
    Ok(())
}

/// Normalized truncated coherent state with `⟨a_m⟩ ≈ z_m`.
pub fn coherent_state(model: &FockModel, z: &[C64]) -> Result<DVector<C64>> {
    check_margin(model, z)?;
    let beta: Vec<C64> = z.iter().map(|v| v / model.epsilon().sqrt()).collect();
    let mut psi = DVector::from_iterator(
        model.dim(),
        model.basis().iter().map(|occ| {
            occ.iter().zip(&beta).fold(C64::new(1.0, 0.0), |acc, (&n, b)| {
                let fact: f64 = (1..=n as u32).map(f64::from).product();
                acc * b.powu(n as u32) / fact.sqrt()
            })
        }),
    );
    let norm = psi.norm();
    psi /= C64::new(norm, 0.0);
    Ok(psi)
}

/// `Φ(f)`.
pub fn field_operator(model: &FockModel, f: &[C64]) -> PolyOp {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut op = PolyOp::default();
    for (m, fm) in f.iter().enumerate().take(model.mode_count()) {
        op.push_hermitian(Monomial::new(fm * s, vec![m], vec![]));
    }
    op
}

/// Argument `√2 z/(iε)` of the Weyl operator that creates the coherent
/// state with amplitudes `z`.
pub fn displacement_exponent(z: &[C64], epsilon: f64) -> Vec<C64> {
    z.iter().map(|v| v * std::f64::consts::SQRT_2 / C64::new(0.0, epsilon)).collect()
}

fn weyl(model: &FockModel, f: &[C64]) -> Result<DMatrix<C64>> {
    OperatorMatrix::from_poly(model, &field_operator(model, f))?.unitary_exp(1.0)
}

/// `max |(W(f)W(g) - W(f+g) e^{-iε Im⟨f,g⟩/2}) e_j|` over basis vectors
/// `e_j` with at most `cap` quanta in total.
pub fn weyl_defect(model: &FockModel, f: &[C64], g: &[C64], cap: usize) -> Result<f64> {
    let sum: Vec<C64> = f.iter().zip(g).map(|(a, b)| a + b).collect();
    let im: f64 = f.iter().zip(g).map(|(a, b)| (a.conj() * b).im).sum();
    let phase = C64::from_polar(1.0, -0.5 * model.epsilon() * im);
    let lhs = weyl(model, f)? * weyl(model, g)?;
    let rhs = weyl(model, &sum)? * phase;
    let mut worst: f64 = 0.0;
    for j in 0..model.dim() {
        let (np, nf) = model.occupations(j);
        if np + nf <= cap {
            for i in 0..model.dim() {
                worst = worst.max((lhs[(i, j)] - rhs[(i, j)]).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::FockModelSpec;
    use super::*;
    use std::f64::consts::PI;

    fn model(nmax: usize) -> FockModel {
        FockModel::new(FockModelSpec {
            epsilon: 0.25,
            box_len: 2.0 * PI,
            particle_modes: vec![[0, 0, 0]],
            phonon_modes: vec![[1, 0, 0], [-1, 0, 0]],
            particle_numbers: vec![0, 1],
            phonon_max: nmax,
            total_momentum: None,
            max_dim: 5000,
        })
        .unwrap()
    }

    #[test]
    fn weyl_relation_away_from_cutoff() {
        let m = model(24);
        let f = [C64::new(0.0, 0.0), C64::new(-0.1, 0.15), C64::new(0.05, -0.2)];
        let g = [C64::new(0.0, 0.0), C64::new(0.1, 0.05), C64::new(0.2, 0.1)];
        let d = weyl_defect(&m, &f, &g, 1).unwrap();
        assert!(d < 1e-8, "{d:e}");
    }

    #[test]
    fn coherent_state_matches_weyl_orbit_and_mean() {
        let m = model(24);
        let z = [C64::new(0.0, 0.0), C64::new(0.15, 0.1), C64::new(-0.1, 0.2)];
        let psi = coherent_state(&m, &z).unwrap();
        let w = weyl(&m, &displacement_exponent(&z, m.epsilon())).unwrap();
        let vac = m.index_of(&[0, 0, 0]).unwrap();
        assert!(psi.dotc(&psi).re > 0.0);
        let err = (0..m.dim()).fold(0.0f64, |a, i| a.max((w[(i, vac)] - psi[i]).norm()));
        assert!(err < 1e-9, "{err:e}");
        for (mode, zm) in z.iter().enumerate() {
            let a = OperatorMatrix::from_poly(&m, &PolyOp::new(vec![Monomial::new(C64::new(1.0, 0.0), vec![], vec![mode])]))
                .unwrap();
            assert!((psi.dotc(&(&a.matrix * &psi)) - zm).norm() < 1e-9);
        }
    }

    #[test]
    fn margin_rule_enforced() {
        let m = model(3);
        let z = [C64::new(0.0, 0.0), C64::new(0.6, 0.0), C64::new(0.0, 0.0)];
        assert!(matches!(coherent_state(&m, &z), Err(LabError::TruncationMargin(_))));
    }

    #[test]
    fn poisson_tail() {
        assert_eq!(poisson_cutoff(0.0, 1e-9), 0);
        let n = poisson_cutoff(2.0, 1e-6);
        assert!((10..=14).contains(&n), "{n}");
    }
}
