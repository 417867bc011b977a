// SPDX-License-Identifier: Apache-2.0

//! Second-quantized Hamiltonians, the dressing generator and the
//! term-by-term expansion of the dressed Hamiltonian.
//!
//! With `ρ_q = Σ_p ψ†_{p-q} ψ_p` (the second quantization of `e^{-iq·x}`)
//! and mode weight `w`,
//!
//! ```text
//! H  = Σ |p|² ψ†ψ + Σ a†a + Σ_k √w f_k (a†_k ρ_k + ρ_k† a_k)
//! T  = Σ_k √w B_k (i a†_k ρ_k - i ρ_k† a_k)
//! Ĥ  = H[f_ir] + Σ_k w B_k(B_k + 2f_k) :ρ_k ρ_k†:
//!    + Σ_{k,k'} √(w w') (k·k') B_k B_k' (a†_k a†_k' ρ_{k+k'} + h.c. + 2 a†_k a_k' ρ_{k-k'})
//!    - 2 Σ_k √w B_k (Σ_p k·(p+k) a_k ψ†_{p+k}ψ_p + h.c.)
//!    + ε (⟨B, B + 2f⟩ + ‖kB‖²) N₁
//! ```
//!
//! where `f_ir = f + (1 + |k|²) B`. The `‖kB‖²` constant is the commutator
//! left over from normal ordering `(a(kB e) + a†(kB e))²` in the kinetic
//! term. The phonon modes with `B ≠ 0` must come in `±k` pairs; otherwise
//! the dressing leaves an odd c-number pair phase behind. All terms are restricted to the particle
//! momentum window, so the identity `e^{iT/ε} H e^{-iT/ε} = Ĥ` holds on
//! states far from both the occupancy cutoff and the window edge.

use nalgebra::DMatrix;
use serde::Serialize;

use super::operator::{Monomial, OperatorMatrix, PolyOp};
use super::{dot, lattice_add, FockModel};
use crate::error::{LabError, Result};
use crate::spectral::C64;

const D: usize = 3;

/// Per-phonon-mode coupling tables in three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockCouplings {
    pub sigma0: f64,
    pub sigma: Option<f64>,
    /// Quadrature weight `(2π/L)³` of each phonon mode.
    pub weight: f64,
    pub f: Vec<f64>,
    pub b: Vec<f64>,
    pub f_ir: Vec<f64>,
}

impl FockCouplings {
    pub fn new(model: &FockModel, sigma0: f64, sigma: Option<f64>) -> Result<Self> {
        if !(sigma0 > 0.0) || sigma.is_some_and(|s| !(s > sigma0)) {
            return Err(LabError::InvalidCutoff(format!("need 0 < σ0 < σ, got σ0 = {sigma0}, σ = {sigma:?}")));
        }
        let weight = model.momentum_unit().powi(D as i32);
        let mut f = Vec::new();
        let mut b = Vec::new();
        let mut f_ir = Vec::new();
        for k in 0..model.phonon_mode_count() {
            let kv = model.phonon_momentum(k);
            let k2 = dot(kv, kv);
            let kn = k2.sqrt();
            let inside = sigma.is_none_or(|s| kn <= s);
            let fk = if inside { kn.powf(-((D - 1) as f64) / 2.0) } else { 0.0 };
            let bk = if inside && kn >= sigma0 { -fk / (1.0 + k2) } else { 0.0 };
            f.push(fk);
            b.push(bk);
            f_ir.push(fk + (1.0 + k2) * bk);
        }
        Ok(Self { sigma0, sigma, weight, f, b, f_ir })
    }

    /// Smallest `σ0` among the phonon shells (plus one just beyond the
    /// largest) with `‖kB‖² ≤ 1/(εn)`.
    pub fn with_form_bound(model: &FockModel, particles: usize, sigma: Option<f64>) -> Result<Self> {
        let mut shells: Vec<f64> = (0..model.phonon_mode_count())
            .map(|k| dot(model.phonon_momentum(k), model.phonon_momentum(k)).sqrt())
            .collect();
        shells.sort_by(f64::total_cmp);
        shells.dedup();
        let top = shells.last().copied().unwrap_or(1.0) * 1.5;
        shells.push(top);
        let bound = 1.0 / (model.epsilon() * particles.max(1) as f64);
        for s0 in shells {
            let cp = Self::new(model, s0, sigma.map(|s| s.max(s0 * 1.5)))?;
            if cp.kb_norm2(model) <= bound {
                return Ok(cp);
            }
        }
        unreachable!("B vanishes above every shell")
    }

    /// `Σ_k w |k|² B_k²`.
    pub fn kb_norm2(&self, model: &FockModel) -> f64 {
        self.b
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let kv = model.phonon_momentum(k);
                self.weight * dot(kv, kv) * b * b
            })
            .sum()
    }

    /// `⟨B, B + 2f⟩`.
    pub fn self_energy(&self) -> f64 {
        self.b.iter().zip(&self.f).map(|(b, f)| self.weight * b * (b + 2.0 * f)).sum()
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kinetic and free phonon energy.
pub fn free_hamiltonian(model: &FockModel) -> PolyOp {
    let mut h = PolyOp::default();
    for p in 0..model.particle_mode_count() {
        let pv = model.particle_momentum(p);
        h.push(Monomial::number(dot(pv, pv), p));
    }
    for k in 0..model.phonon_mode_count() {
        h.push(Monomial::number(1.0, model.phonon_index(k)));
    }
    h
}

/// `Σ_k √w g_k (a†_k ρ_k + h.c.)` with complex prefactor `phase`.
fn linear_coupling(model: &FockModel, weight: f64, g: &[f64], phase: C64) -> PolyOp {
    let mut h = PolyOp::default();
    for (k, gk) in g.iter().enumerate() {
        let coeff = phase * weight.sqrt() * gk;
        for (dst, src) in model.shift_pairs(model.spec().phonon_modes[k]) {
            h.push_hermitian(Monomial::new(coeff, vec![model.phonon_index(k), dst], vec![src]));
        }
    }
    h
}

/// The undressed Hamiltonian with the couplings' `f`.
pub fn build_hamiltonian(model: &FockModel, cp: &FockCouplings) -> PolyOp {
    free_hamiltonian(model).plus(&linear_coupling(model, cp.weight, &cp.f, c(1.0, 0.0)))
}

/// The dressing generator `T`.
pub fn build_t(model: &FockModel, cp: &FockCouplings) -> PolyOp {
    linear_coupling(model, cp.weight, &cp.b, c(0.0, 1.0))
}

/// The summands of the dressed Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedParts {
    pub h_sigma0: PolyOp,
    pub pair: PolyOp,
    pub quadratic: PolyOp,
    pub drift: PolyOp,
    pub self_energy: PolyOp,
}

impl DressedParts {
    pub fn new(model: &FockModel, cp: &FockCouplings) -> Self {
        let h_sigma0 = free_hamiltonian(model).plus(&linear_coupling(model, cp.weight, &cp.f_ir, c(1.0, 0.0)));
        let modes = &model.spec().phonon_modes;
        let w = cp.weight;

        let mut pair = PolyOp::default();
        for (k, q) in modes.iter().enumerate() {
            let coeff = c(w * cp.b[k] * (cp.b[k] + 2.0 * cp.f[k]), 0.0);
            let pairs = model.shift_pairs(*q);
            for &(p_out, p_in) in &pairs {
                for &(q_in, q_out) in &pairs {
                    // ψ†_{p-k} ψ†_{q} ψ_p ψ_{q-k}
                    pair.push(Monomial::new(coeff, vec![p_out, q_out], vec![p_in, q_in]));
                }
            }
        }

        let mut quadratic = PolyOp::default();
        for (k, mk) in modes.iter().enumerate() {
            for (l, ml) in modes.iter().enumerate() {
                let coeff = w * dot(model.phonon_momentum(k), model.phonon_momentum(l)) * cp.b[k] * cp.b[l];
                if coeff == 0.0 {
                    continue;
                }
                let (ak, al) = (model.phonon_index(k), model.phonon_index(l));
                for (dst, src) in model.shift_pairs(lattice_add(*mk, *ml, 1)) {
                    quadratic.push_hermitian(Monomial::new(c(coeff, 0.0), vec![ak, al, dst], vec![src]));
                }
                for (dst, src) in model.shift_pairs(lattice_add(*mk, *ml, -1)) {
                    quadratic.push(Monomial::new(c(2.0 * coeff, 0.0), vec![ak, dst], vec![al, src]));
                }
            }
        }

        let mut drift = PolyOp::default();
        for (k, mk) in modes.iter().enumerate() {
            let kv = model.phonon_momentum(k);
            let ak = model.phonon_index(k);
            for (dst, src) in model.shift_pairs(*mk) {
                // a†_k (k·p) ψ†_{p-k} ψ_p; its adjoint is a_k (k·(p'+k)) ψ†_{p'+k} ψ_{p'}
                let coeff = -2.0 * w.sqrt() * cp.b[k] * dot(kv, model.particle_momentum(src));
                drift.push_hermitian(Monomial::new(c(coeff, 0.0), vec![ak, dst], vec![src]));
            }
        }

        let (n1, _) = model.number_operators();
        let constant = cp.self_energy() + cp.kb_norm2(model);
        let self_energy = n1.scaled(c(model.epsilon() * constant, 0.0));
        Self { h_sigma0, pair, quadratic, drift, self_energy }
    }

    pub fn assembled(&self) -> PolyOp {
        let mut h = self.h_sigma0.clone();
        for part in [&self.pair, &self.quadratic, &self.drift, &self.self_energy] {
            h.extend(part);
        }
        h
    }
}

/// The dressed Hamiltonian computed both by conjugation and term by term.
#[derive(Debug, Clone)]
pub struct DressedHamiltonian {
    /// `U = exp(iT/ε)`.
    pub u: DMatrix<C64>,
    /// `U H U†` with the truncated `U` and `H`.
    pub conjugated: OperatorMatrix,
    pub assembled: OperatorMatrix,
}

impl DressedHamiltonian {
    /// Largest `|⟨i|UHU† - Ĥ|j⟩|` over `i, j` in `states`.
    pub fn residual_on(&self, states: &[usize]) -> f64 {
        let mut worst: f64 = 0.0;
        for &i in states {
            for &j in states {
                worst = worst.max((self.conjugated.matrix[(i, j)] - self.assembled.matrix[(i, j)]).norm());
            }
        }
        worst
    }
}

pub fn dress_hamiltonian(model: &FockModel, cp: &FockCouplings) -> Result<DressedHamiltonian> {
    let h = OperatorMatrix::from_poly(model, &build_hamiltonian(model, cp))?;
    let t = OperatorMatrix::from_poly(model, &build_t(model, cp))?;
    let u = t.unitary_exp(1.0 / model.epsilon())?;
    let conjugated = h.conjugated(&u);
    let assembled = OperatorMatrix::from_poly(model, &DressedParts::new(model, cp).assembled())?;
    Ok(DressedHamiltonian { u, conjugated, assembled })
}

/// Basis states with at most `phonon_cap` phonons whose occupied particle
/// modes all lie within `radius` (sup norm, lattice units) of the origin.
pub fn interior_states(model: &FockModel, phonon_cap: usize, radius: i32) -> Vec<usize> {
    let modes = &model.spec().particle_modes;
    (0..model.dim())
        .filter(|&i| {
            let occ = &model.basis()[i];
            model.occupations(i).1 <= phonon_cap
                && modes.iter().zip(occ).all(|(m, &n)| n == 0 || m.iter().all(|c| c.abs() <= radius))
        })
        .collect()
}
