// SPDX-License-Identifier: Apache-2.0

//! Finite-mode, occupancy-truncated second quantization of the
//! electron-phonon model.
//!
//! Particle modes are plane waves with lattice momenta `p = (2π/L) m` and
//! phonon modes carry lattice momenta `k`. Ladder operators are scaled so
//! that `[a, a†] = ε`. A basis state is an occupation tuple over all modes;
//! the basis keeps the tuples whose particle number lies in an allowed set,
//! whose phonon number is at most `phonon_max`, and optionally whose total
//! momentum equals a given lattice vector. Operators are projected onto
//! this basis.

mod coherent;
mod correspondence;
mod hamiltonian;
mod klmn;
mod operator;

pub use coherent::{coherent_state, displacement_exponent, field_operator, poisson_cutoff, weyl_defect};
pub use correspondence::{
    classical_flow, correspondence_experiment, quantum_expectations, CorrespondenceConfig, CorrespondenceRow,
    CorrespondenceTable,
};
pub use hamiltonian::{
    build_hamiltonian, build_t, dress_hamiltonian, free_hamiltonian, interior_states, DressedHamiltonian,
    DressedParts, FockCouplings,
};
pub use klmn::{klmn_check, KlmnReport};
pub use operator::{propagate, Monomial, OperatorMatrix, PolyOp};

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default ceiling on the basis size.
pub const DEFAULT_MAX_DIM: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockModelSpec {
    pub epsilon: f64,
    pub box_len: f64,
    /// Particle momenta in lattice units.
    pub particle_modes: Vec<[i32; 3]>,
    /// Phonon momenta in lattice units; must be nonzero.
    pub phonon_modes: Vec<[i32; 3]>,
    /// Allowed total particle numbers.
    pub particle_numbers: Vec<usize>,
    pub phonon_max: usize,
    /// Keep only states with this total momentum (lattice units).
    #[serde(default)]
    pub total_momentum: Option<[i32; 3]>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

#[derive(Debug, Clone)]
pub struct FockModel {
    spec: FockModelSpec,
    basis: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    particle_lookup: HashMap<[i32; 3], usize>,
}

/// All tuples of `modes` nonnegative integers with sum exactly `total`.
fn compositions(modes: usize, total: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, modes: usize, left: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == modes {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for n in (0..=left).rev() {
            prefix.push(n as u8);
            rec(prefix, modes, left - n, out);
            prefix.pop();
        }
    }
    if modes == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return;
    }
    rec(&mut Vec::with_capacity(modes), modes, total, out);
}

fn add_momenta(a: [i32; 3], b: [i32; 3], s: i32) -> [i32; 3] {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

impl FockModel {
    pub fn new(spec: FockModelSpec) -> Result<Self> {
        if !(spec.epsilon > 0.0 && spec.epsilon.is_finite()) {
            return Err(LabError::InvalidModel(format!("ε must be positive, got {}", spec.epsilon)));
        }
        if !(spec.box_len > 0.0 && spec.box_len.is_finite()) {
            return Err(LabError::InvalidModel(format!("box length must be positive, got {}", spec.box_len)));
        }
        if spec.phonon_modes.iter().any(|k| *k == [0, 0, 0]) {
            return Err(LabError::InvalidModel("phonon modes must have nonzero momentum".into()));
        }
        let mut particle_lookup = HashMap::new();
        for (i, p) in spec.particle_modes.iter().enumerate() {
            if particle_lookup.insert(*p, i).is_some() {
                return Err(LabError::InvalidModel(format!("duplicate particle mode {p:?}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if !spec.phonon_modes.iter().all(|k| seen.insert(*k)) {
            return Err(LabError::InvalidModel("duplicate phonon mode".into()));
        }
        if spec.phonon_max > u8::MAX as usize || spec.particle_numbers.iter().any(|n| *n > u8::MAX as usize) {
            return Err(LabError::InvalidModel("occupancy cutoffs above 255 are not supported".into()));
        }
        let mp = spec.particle_modes.len();
        let mf = spec.phonon_modes.len();
        let mut particles = Vec::new();
        let mut numbers = spec.particle_numbers.clone();
        numbers.sort_unstable();
        numbers.dedup();
        for &n in &numbers {
            compositions(mp, n, &mut particles);
        }
        let mut phonons = Vec::new();
        for n in 0..=spec.phonon_max {
            compositions(mf, n, &mut phonons);
        }
        let momentum = |occ: &[u8], modes: &[[i32; 3]]| {
            occ.iter().zip(modes).fold([0; 3], |acc, (&n, m)| add_momenta(acc, *m, n as i32))
        };
        let mut basis = Vec::new();
        for p in &particles {
            let pm = momentum(p, &spec.particle_modes);
            for f in &phonons {
                if let Some(target) = spec.total_momentum {
                    if add_momenta(pm, momentum(f, &spec.phonon_modes), 1) != target {
                        continue;
                    }
                }
                let mut state = p.clone();
                state.extend_from_slice(f);
                basis.push(state);
                if basis.len() > spec.max_dim {
                    return Err(LabError::DimensionOverflow { dim: basis.len(), limit: spec.max_dim });
                }
            }
        }
        let index = basis.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { spec, basis, index, particle_lookup })
    }

    pub fn spec(&self) -> &FockModelSpec {
        &self.spec
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn particle_mode_count(&self) -> usize {
        self.spec.particle_modes.len()
    }

    pub fn phonon_mode_count(&self) -> usize {
        self.spec.phonon_modes.len()
    }

    pub fn mode_count(&self) -> usize {
        self.particle_mode_count() + self.phonon_mode_count()
    }

    /// Global index of phonon mode `k`.
    pub fn phonon_index(&self, k: usize) -> usize {
        self.particle_mode_count() + k
    }

    /// Particle mode with lattice momentum `m`, if present.
    pub fn particle_index(&self, m: [i32; 3]) -> Option<usize> {
        self.particle_lookup.get(&m).copied()
    }

    /// Lattice spacing `2π/L` of the momenta.
    pub fn momentum_unit(&self) -> f64 {
        2.0 * PI / self.spec.box_len
    }

    pub fn particle_momentum(&self, p: usize) -> [f64; 3] {
        let s = self.momentum_unit();
        self.spec.particle_modes[p].map(|m| s * m as f64)
    }

    pub fn phonon_momentum(&self, k: usize) -> [f64; 3] {
        let s = self.momentum_unit();
        self.spec.phonon_modes[k].map(|m| s * m as f64)
    }

    /// Particle-mode pairs `(p - q, p)` for a lattice shift `q`: the nonzero
    /// terms of `ρ_q = Σ_p ψ†_{p-q} ψ_p`.
    pub fn shift_pairs(&self, q: [i32; 3]) -> Vec<(usize, usize)> {
        self.spec
            .particle_modes
            .iter()
            .enumerate()
            .filter_map(|(i, p)| self.particle_index(add_momenta(*p, q, -1)).map(|j| (j, i)))
            .collect()
    }

    /// Total particle and phonon numbers of basis state `i` (unscaled).
    pub fn occupations(&self, i: usize) -> (usize, usize) {
        let s = &self.basis[i];
        let mp = self.particle_mode_count();
        (
            s[..mp].iter().map(|&n| n as usize).sum(),
            s[mp..].iter().map(|&n| n as usize).sum(),
        )
    }

    /// Operators `N₁ = Σ ψ†ψ` and `N₂ = Σ a†a`, both carrying a factor `ε`.
    pub fn number_operators(&self) -> (PolyOp, PolyOp) {
        let n1 = (0..self.particle_mode_count()).map(|p| Monomial::number(1.0, p)).collect();
        let n2 = (0..self.phonon_mode_count()).map(|k| Monomial::number(1.0, self.phonon_index(k))).collect();
        (PolyOp::new(n1), PolyOp::new(n2))
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn lattice_add(a: [i32; 3], b: [i32; 3], s: i32) -> [i32; 3] {
    add_momenta(a, b, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_spec() -> FockModelSpec {
        FockModelSpec {
            epsilon: 0.5,
            box_len: 2.0 * PI,
            particle_modes: vec![[0, 0, 0], [1, 0, 0]],
            phonon_modes: vec![[1, 0, 0], [-1, 0, 0]],
            particle_numbers: vec![0, 1, 2],
            phonon_max: 3,
            total_momentum: None,
            max_dim: 1000,
        }
    }

    #[test]
    fn basis_counts() {
        let m = FockModel::new(small_spec()).unwrap();
        // particles: 1 + 2 + 3 tuples, phonons: 1 + 2 + 3 + 4
        assert_eq!(m.dim(), 6 * 10);
        for (i, s) in m.basis().iter().enumerate() {
            assert_eq!(m.index_of(s), Some(i));
        }
    }

    #[test]
    fn momentum_sector_filter() {
        let mut spec = small_spec();
        spec.total_momentum = Some([0, 0, 0]);
        let m = FockModel::new(spec).unwrap();
        for s in m.basis() {
            let p = s[1] as i32 + s[2] as i32 - s[3] as i32;
            assert_eq!(p, 0);
        }
        assert!(m.dim() < 60);
    }

    #[test]
    fn overflow_and_validation() {
        let mut spec = small_spec();
        spec.max_dim = 10;
        assert!(matches!(FockModel::new(spec), Err(LabError::DimensionOverflow { .. })));
        let mut spec = small_spec();
        spec.phonon_modes.push([0, 0, 0]);
        assert!(FockModel::new(spec).is_err());
    }

    #[test]
    fn shift_pairs_stay_in_window() {
        let m = FockModel::new(small_spec()).unwrap();
        assert_eq!(m.shift_pairs([1, 0, 0]), vec![(0, 1)]);
        assert_eq!(m.shift_pairs([-1, 0, 0]), vec![(1, 0)]);
        assert!(m.shift_pairs([2, 0, 0]).is_empty());
    }
}
