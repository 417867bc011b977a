// SPDX-License-Identifier: Apache-2.0

//! Quantum-classical correspondence for coherent initial states.
//!
//! The quantum side evolves a truncated coherent state under `e^{-itH/ε}`
//! and records the mode expectations `⟨a_m⟩`. The classical side integrates
//! `i ż_m = ∂h/∂z̄_m` for the Wick symbol `h` of the same polynomial with the
//! explicitly `ε`-dependent constant removed.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::coherent::{coherent_state, poisson_cutoff};
use super::hamiltonian::{build_hamiltonian, DressedParts, FockCouplings};
use super::operator::{propagate, PolyOp};
use super::{FockModel, FockModelSpec};
use crate::error::{LabError, Result};
use crate::spectral::C64;

/// `⟨ψ|a_m|ψ⟩` for every mode.
pub fn quantum_expectations(model: &FockModel, psi: &[C64]) -> Vec<C64> {
    let eps = model.epsilon();
    let mut out = vec![C64::new(0.0, 0.0); model.mode_count()];
    for (j, occ) in model.basis().iter().enumerate() {
        if psi[j] == C64::new(0.0, 0.0) {
            continue;
        }
        let mut lowered = occ.clone();
        for (m, slot) in out.iter_mut().enumerate() {
            if occ[m] == 0 {
                continue;
            }
            lowered[m] -= 1;
            if let Some(i) = model.index_of(&lowered) {
                *slot += psi[i].conj() * psi[j] * (eps * occ[m] as f64).sqrt();
            }
            lowered[m] += 1;
        }
    }
    out
}

/// RK4 for `i ż = ∂h/∂z̄`, sampled at `samples + 1` equally spaced times.
pub fn classical_flow(symbol: &PolyOp, z0: &[C64], t_end: f64, steps: usize, samples: usize) -> Vec<Vec<C64>> {
    let rhs = |z: &[C64]| -> Vec<C64> { symbol.symbol_gradient(z).iter().map(|g| C64::new(0.0, -1.0) * g).collect() };
    let axpy = |z: &[C64], a: f64, k: &[C64]| -> Vec<C64> { z.iter().zip(k).map(|(x, y)| x + y * a).collect() };
    let per_sample = steps.div_ceil(samples.max(1)).max(1);
    let dt = t_end / (per_sample * samples.max(1)) as f64;
    let mut z = z0.to_vec();
    let mut out = vec![z.clone()];
    for _ in 0..samples.max(1) {
        for _ in 0..per_sample {
            let k1 = rhs(&z);
            let k2 = rhs(&axpy(&z, dt / 2.0, &k1));
            let k3 = rhs(&axpy(&z, dt / 2.0, &k2));
            let k4 = rhs(&axpy(&z, dt, &k3));
            for i in 0..z.len() {
                z[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        out.push(z.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceConfig {
    pub epsilons: Vec<f64>,
    pub t_end: f64,
    pub samples: usize,
    pub box_len: f64,
    pub particle_modes: Vec<[i32; 3]>,
    pub phonon_modes: Vec<[i32; 3]>,
    pub sigma0: f64,
    /// Initial amplitudes, particle modes first.
    pub z0: Vec<[f64; 2]>,
    /// Evolve with the dressed Hamiltonian instead of the undressed one.
    pub dressed: bool,
    /// Poisson tail mass allowed beyond each occupancy cutoff.
    pub tail: f64,
    pub classical_steps: usize,
}

impl Default for CorrespondenceConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.5, 0.25, 0.125],
            t_end: 0.5,
            samples: 5,
            box_len: 2.0 * std::f64::consts::PI,
            particle_modes: vec![[0, 0, 0], [1, 0, 0]],
            phonon_modes: vec![[1, 0, 0], [-1, 0, 0]],
            sigma0: 0.5,
            z0: vec![[0.3, 0.0], [0.0, 0.25], [0.2, 0.0], [-0.15, 0.1]],
            dressed: true,
            tail: 1e-10,
            classical_steps: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceRow {
    pub epsilon: f64,
    pub dim: usize,
    pub particle_cutoff: usize,
    pub phonon_cutoff: usize,
    pub times: Vec<f64>,
    /// `‖⟨a(t)⟩ - z(t)‖` at each sampled time.
    pub errors: Vec<f64>,
    pub norm_defect: f64,
    pub energy_defect: f64,
    pub particle_number_defect: f64,
}

impl CorrespondenceRow {
    pub fn final_error(&self) -> f64 {
        self.errors.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceTable {
    pub rows: Vec<CorrespondenceRow>,
    /// Each final error is at most 1.1 times the previous one.
    pub monotone: bool,
}

fn polynomials(model: &FockModel, cp: &FockCouplings, dressed: bool) -> (PolyOp, PolyOp) {
    if dressed {
        let parts = DressedParts::new(model, cp);
        let mut classical = parts.h_sigma0.clone();
        for part in [&parts.pair, &parts.quadratic, &parts.drift] {
            classical.extend(part);
        }
        (parts.assembled(), classical)
    } else {
        let h = build_hamiltonian(model, cp);
        (h.clone(), h)
    }
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn correspondence_experiment(cfg: &CorrespondenceConfig) -> Result<CorrespondenceTable> {
    let mp = cfg.particle_modes.len();
    if cfg.z0.len() != mp + cfg.phonon_modes.len() {
        return Err(LabError::InvalidModel("z0 must list one amplitude per mode".into()));
    }
    if !(cfg.t_end > 0.0) || cfg.samples == 0 || cfg.epsilons.is_empty() {
        return Err(LabError::InvalidConfig("need t_end > 0, samples ≥ 1 and at least one ε".into()));
    }
    let z0: Vec<C64> = cfg.z0.iter().map(|[re, im]| C64::new(*re, *im)).collect();

    // The classical trajectory only depends on the modes, so build it once on
    // a throwaway model.
    let probe = FockModel::new(FockModelSpec {
        epsilon: 1.0,
        box_len: cfg.box_len,
        particle_modes: cfg.particle_modes.clone(),
        phonon_modes: cfg.phonon_modes.clone(),
        particle_numbers: vec![0],
        phonon_max: 0,
        total_momentum: None,
        max_dim: 1,
    })?;
    let cp = FockCouplings::new(&probe, cfg.sigma0, None)?;
    let (_, classical) = polynomials(&probe, &cp, cfg.dressed);
    let path = classical_flow(&classical, &z0, cfg.t_end, cfg.classical_steps, cfg.samples);
    let particle_mass: f64 = z0[..mp].iter().map(|z| z.norm_sqr()).sum();
    let phonon_peak = path.iter().map(|z| z[mp..].iter().map(|a| a.norm_sqr()).sum::<f64>()).fold(0.0, f64::max);

    let mut rows = Vec::new();
    for &eps in &cfg.epsilons {
        let particle_cutoff = poisson_cutoff(particle_mass / eps, cfg.tail).max((3.0 * particle_mass / eps).ceil() as usize);
        let phonon_cutoff = poisson_cutoff(phonon_peak / eps, cfg.tail).max((3.0 * phonon_peak / eps).ceil() as usize);
        let model = FockModel::new(FockModelSpec {
            epsilon: eps,
            box_len: cfg.box_len,
            particle_modes: cfg.particle_modes.clone(),
            phonon_modes: cfg.phonon_modes.clone(),
            particle_numbers: (0..=particle_cutoff).collect(),
            phonon_max: phonon_cutoff,
            total_momentum: None,
            max_dim: super::DEFAULT_MAX_DIM,
        })?;
        let (quantum, _) = polynomials(&model, &cp, cfg.dressed);
        let h = quantum.to_sparse(&model);
        let (n1, _) = model.number_operators();
        let n1 = n1.to_sparse(&model);
        let expect = |op: &nalgebra_sparse::CsrMatrix<C64>, psi: &[C64]| -> f64 {
            let mut out = vec![C64::new(0.0, 0.0); psi.len()];
            super::operator::sparse_matvec(op, psi, &mut out);
            psi.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum()
        };
        let psi0: DVector<C64> = coherent_state(&model, &z0)?;
        let mut psi: Vec<C64> = psi0.iter().copied().collect();
        let e0 = expect(&h, &psi);
        let n0 = expect(&n1, &psi);
        let dt = cfg.t_end / cfg.samples as f64;
        let mut times = vec![0.0];
        let mut errors = vec![sup_diff(&quantum_expectations(&model, &psi), &path[0])];
        let (mut norm_defect, mut energy_defect, mut particle_number_defect) = (0.0f64, 0.0f64, 0.0f64);
        for (s, z) in path.iter().enumerate().skip(1) {
            psi = propagate(&h, &psi, dt, eps)?;
            times.push(s as f64 * dt);
            errors.push(sup_diff(&quantum_expectations(&model, &psi), z));
            let norm: f64 = psi.iter().map(|v| v.norm_sqr()).sum();
            norm_defect = norm_defect.max((norm - 1.0).abs());
            energy_defect = energy_defect.max((expect(&h, &psi) - e0).abs() / (1.0 + e0.abs()));
            particle_number_defect = particle_number_defect.max((expect(&n1, &psi) - n0).abs());
        }
        rows.push(CorrespondenceRow {
            epsilon: eps,
            dim: model.dim(),
            particle_cutoff,
            phonon_cutoff,
            times,
            errors,
            norm_defect,
            energy_defect,
            particle_number_defect,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].final_error() <= 1.1 * w[0].final_error());
    Ok(CorrespondenceTable { rows, monotone })
}
