// SPDX-License-Identifier: Apache-2.0

//! Form-bound search: `|⟨φ, Ĥ_I φ⟩| ≤ a ⟨φ, H₀ φ⟩ + C ‖φ‖²` over random
//! normalized states, where `Ĥ_I = Ĥ - H₀`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::hamiltonian::{free_hamiltonian, DressedParts, FockCouplings};
use super::operator::sparse_matvec;
use super::FockModel;
use crate::error::Result;
use crate::spectral::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlmnReport {
    pub samples: usize,
    /// `‖kB‖²` next to the scale `1/(εn)` used to pick `σ0`.
    pub kb_norm2: f64,
    pub inverse_eps_n: f64,
    pub c_grid: Vec<f64>,
    /// Smallest `a` dominating every sample at each `C`; infinite when some
    /// sample with `⟨H₀⟩ = 0` exceeds `C`.
    pub a_of_c: Vec<f64>,
    /// Smallest grid `C` whose `a(C)` is at most `a_max`, with that `a`.
    pub pair: Option<(f64, f64)>,
}

/// Sample `samples` Gaussian states on the model basis (which should fix the
/// particle number) and scan `C` over 21 equally spaced values up to
/// `max |⟨Ĥ_I⟩|`.
pub fn klmn_check(model: &FockModel, cp: &FockCouplings, samples: usize, a_max: f64, seed: u64) -> Result<KlmnReport> {
    let interaction = {
        let mut op = DressedParts::new(model, cp).assembled();
        op.extend(&free_hamiltonian(model).scaled(C64::new(-1.0, 0.0)));
        op.to_sparse(model)
    };
    let free = free_hamiltonian(model).to_sparse(model);
    let n = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut points = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut phi: Vec<C64> = (0..n)
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let norm = phi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        phi.iter_mut().for_each(|v| *v /= norm);
        let mut expect = |op| {
            sparse_matvec(op, &phi, &mut buf);
            phi.iter().zip(&buf).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
        };
        points.push((expect(&interaction).abs(), expect(&free)));
    }
    let c_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let c_grid: Vec<f64> = (0..=20).map(|j| c_max * j as f64 / 20.0).collect();
    let a_of_c: Vec<f64> = c_grid
        .iter()
        .map(|&c| {
            points
                .iter()
                .filter(|(x, _)| *x > c)
                .map(|&(x, y)| if y > 0.0 { (x - c) / y } else { f64::INFINITY })
                .fold(0.0, f64::max)
        })
        .collect();
    let pair = c_grid.iter().zip(&a_of_c).find(|(_, a)| **a <= a_max).map(|(c, a)| (*a, *c));
    let particles = model.spec().particle_numbers.iter().copied().max().unwrap_or(0).max(1);
    Ok(KlmnReport {
        samples,
        kb_norm2: cp.kb_norm2(model),
        inverse_eps_n: 1.0 / (model.epsilon() * particles as f64),
        c_grid,
        a_of_c,
        pair,
    })
}

#[cfg(test)]
mod tests {
    use super::super::FockModelSpec;
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bound_found_and_monotone_in_c() {
        let model = FockModel::new(FockModelSpec {
            epsilon: 0.25,
            box_len: 2.0 * PI,
            particle_modes: vec![[-1, 0, 0], [0, 0, 0], [1, 0, 0]],
            phonon_modes: vec![[1, 0, 0], [-1, 0, 0]],
            particle_numbers: vec![2],
            phonon_max: 5,
            total_momentum: None,
            max_dim: 5000,
        })
        .unwrap();
        let cp = FockCouplings::new(&model, 0.5, None).unwrap();
        let r = klmn_check(&model, &cp, 200, 0.9, 4).unwrap();
        assert!(r.kb_norm2 <= r.inverse_eps_n);
        let (a, c) = r.pair.unwrap();
        assert!(a <= 0.9 && c >= 0.0);
        assert!(r.a_of_c.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*r.a_of_c.last().unwrap(), 0.0);
    }
}
