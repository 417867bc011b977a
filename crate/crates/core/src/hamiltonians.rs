// SPDX-License-Identifier: Apache-2.0

//! Classical energy functionals `h∞` (undressed) and `ĥ∞` (dressed) with
//! their Wirtinger gradients `∇_z̄`.
//!
//! Gradients are taken with respect to the weighted inner products of the
//! grid, so that `δh = 2 Re ⟨∇_z̄ h, δz⟩` and the Hamilton equation reads
//! `i ∂_t z = ∇_z̄ h`. With this convention the undressed gradient is
//! literally the right-hand side of the Landau-Pekar system.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::form_factors::FormFactorSet;
use crate::spectral::{SpectralGrid, C64};
use crate::state::PhasePoint;

const I: C64 = Complex64::new(0.0, 1.0);

/// `A_{α,g}(x) = 2 Re Σ_k conj(α(k)) c·g(k) e^{-ik·x} dk` for a real table
/// `g` and a constant complex prefactor `c` (1 for `f`, `i` for `iB`).
pub fn field_a(grid: &SpectralGrid, alpha: &[C64], g: &[f64], c: C64) -> Result<Vec<f64>> {
    grid.check(alpha)?;
    grid.check_len(g.len())?;
    let prod: Vec<C64> = alpha.iter().zip(g).map(|(a, &gg)| a.conj() * c * gg).collect();
    Ok(grid.mode_sum(&prod).iter().map(|v| 2.0 * v.re).collect())
}

/// Same as [`field_a`] for a general complex table, returning the imaginary
/// residue of `Σ conj(α) g e^{-ik·x} dk + c.c.` alongside the real field.
pub fn field_a_complex(grid: &SpectralGrid, alpha: &[C64], g: &[C64]) -> Result<(Vec<f64>, f64)> {
    grid.check(alpha)?;
    grid.check(g)?;
    let prod: Vec<C64> = alpha.iter().zip(g).map(|(a, gg)| a.conj() * gg).collect();
    let conj_prod: Vec<C64> = alpha.iter().zip(g).map(|(a, gg)| a * gg.conj()).collect();
    let s1 = grid.mode_sum(&prod);
    // Σ α conj(g) e^{+ik·x} dk is the conjugate of s1
    let mut s2 = conj_prod;
    grid.raw_backward(&mut s2);
    let mut out = Vec::with_capacity(s1.len());
    let mut residue: f64 = 0.0;
    for (a, b) in s1.iter().zip(&s2) {
        let v = a + b * grid.dk();
        residue = residue.max(v.im.abs());
        out.push(v.re);
    }
    Ok((out, residue))
}

impl SpectralGrid {
    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(LabError::GridMismatch { expected: self.size(), found: len });
        }
        Ok(())
    }
}

/// Itemized energy. Undressed functionals leave `pair`, `quadratic` and
/// `drift` at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub phonon: f64,
    /// `∫ A_{α,g} |u|²` with `g = f∞` (undressed) or `f_{σ0}` (dressed).
    pub coupling: f64,
    pub pair: f64,
    pub quadratic: f64,
    pub drift: f64,
    pub total: f64,
    /// Largest imaginary part discarded when forming the real parts.
    pub imag_residue: f64,
}

impl EnergyBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.kinetic + self.phonon + self.coupling + self.pair + self.quadratic + self.drift;
        self
    }

    pub fn interaction(&self) -> f64 {
        self.coupling + self.pair + self.quadratic + self.drift
    }
}

/// `(∂_ū, ∂_ᾱ)` of a functional.
#[derive(Debug, Clone)]
pub struct GradientPair {
    pub du: Vec<C64>,
    pub dalpha: Vec<C64>,
}

impl GradientPair {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self { du: grid.zeros(), dalpha: grid.zeros() }
    }

    /// Directional derivative `2 Re ⟨G, v⟩` of the functional along `v`.
    pub fn directional(&self, grid: &SpectralGrid, v: &PhasePoint) -> f64 {
        2.0 * (grid.inner_x(&self.du, &v.u).re + grid.inner_k(&self.dalpha, &v.alpha).re)
    }

    pub fn norm(&self, grid: &SpectralGrid) -> f64 {
        (grid.norm2_x(&self.du) + grid.norm2_k(&self.dalpha)).sqrt()
    }

    pub fn add(&mut self, other: &GradientPair) {
        self.du.iter_mut().zip(&other.du).for_each(|(a, b)| *a += b);
        self.dalpha.iter_mut().zip(&other.dalpha).for_each(|(a, b)| *a += b);
    }
}

/// Summands of `ĥ∞`; the undressed `h∞` uses `Kinetic`, `Phonon` and the
/// coupling with `f∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressedTerm {
    Kinetic,
    Phonon,
    Coupling,
    Pair,
    Quadratic,
    Drift,
}

impl DressedTerm {
    pub const ALL: [DressedTerm; 6] = [
        DressedTerm::Kinetic,
        DressedTerm::Phonon,
        DressedTerm::Coupling,
        DressedTerm::Pair,
        DressedTerm::Quadratic,
        DressedTerm::Drift,
    ];
    pub const INTERACTION: [DressedTerm; 4] =
        [DressedTerm::Coupling, DressedTerm::Pair, DressedTerm::Quadratic, DressedTerm::Drift];
}

fn density(u: &[C64]) -> Vec<f64> {
    u.iter().map(|v| v.norm_sqr()).collect()
}

fn real_to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// `h∞(u, α) = ‖∇u‖² + ‖α‖² + ∫ A_α |u|²`.
pub fn h_undressed(z: &PhasePoint, ff: &FormFactorSet) -> EnergyBreakdown {
    let g = z.grid();
    let rho = density(&z.u);
    let a = field_a(g, &z.alpha, &ff.f, C64::new(1.0, 0.0)).expect("phase point on grid");
    EnergyBreakdown {
        kinetic: g.kinetic(&z.u),
        phonon: z.phonon_norm2(),
        coupling: a.iter().zip(&rho).map(|(a, r)| a * r).sum::<f64>() * g.dx(),
        ..Default::default()
    }
    .finish()
}

/// `∇_z̄ h∞ = (-Δu + A_α u, α + f∞ Σ_x |u|² e^{-ik·x} dx)`.
pub fn grad_undressed(z: &PhasePoint, ff: &FormFactorSet) -> GradientPair {
    let mut grad = grad_undressed_interaction(z, ff);
    let lap = z.grid().neg_laplacian(&z.u);
    grad.du.iter_mut().zip(&lap).for_each(|(a, b)| *a += b);
    grad.dalpha.iter_mut().zip(&z.alpha).for_each(|(a, b)| *a += b);
    grad
}

/// Interaction part of [`grad_undressed`].
pub fn grad_undressed_interaction(z: &PhasePoint, ff: &FormFactorSet) -> GradientPair {
    let g = z.grid();
    let a = field_a(g, &z.alpha, &ff.f, C64::new(1.0, 0.0)).expect("phase point on grid");
    let du = z.u.iter().zip(&a).map(|(u, a)| u * a).collect();
    let s = g.fourier_sum(&real_to_complex(&density(&z.u)));
    let dalpha = s.iter().zip(&ff.f).map(|(s, f)| s * f).collect();
    GradientPair { du, dalpha }
}

/// Shared intermediate fields of `ĥ∞`.
struct DressedFields {
    rho: Vec<f64>,
    /// `Σ_x ρ e^{-ik·x} dx`
    rho_hat: Vec<C64>,
    /// `a_j(x) = ⟨α, k_j B e^{-ik·x}⟩`
    a: Vec<Vec<C64>>,
    /// `A_{α,kB}` components, `2 Re a_j`
    a_real: Vec<Vec<f64>>,
    /// `D_j u`
    du: Vec<Vec<C64>>,
}

impl DressedFields {
    fn new(z: &PhasePoint, ff: &FormFactorSet) -> Self {
        let g = z.grid();
        let d = g.dim();
        let rho = density(&z.u);
        let rho_hat = g.fourier_sum(&real_to_complex(&rho));
        let a: Vec<Vec<C64>> = (0..d)
            .map(|j| {
                let prod: Vec<C64> = z.alpha.iter().zip(&ff.kb[j]).map(|(al, kb)| al.conj() * kb).collect();
                g.mode_sum(&prod)
            })
            .collect();
        let a_real = a.iter().map(|aj| aj.iter().map(|v| 2.0 * v.re).collect()).collect();
        let mut uhat = z.u.clone();
        g.raw_forward(&mut uhat);
        let scale = 1.0 / g.size() as f64;
        let du = (0..d)
            .map(|j| {
                let mut buf: Vec<C64> = uhat.iter().enumerate().map(|(i, v)| v * g.k(i)[j] * scale).collect();
                g.raw_backward(&mut buf);
                buf
            })
            .collect();
        Self { rho, rho_hat, a, a_real, du }
    }

    fn a_squared(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rho.len()];
        for aj in &self.a_real {
            out.iter_mut().zip(aj).for_each(|(o, v)| *o += v * v);
        }
        out
    }

    fn pair_conv(&self, g: &SpectralGrid, ff: &FormFactorSet) -> Vec<f64> {
        ff.convolve_pair_hat(g, &self.rho_hat)
    }
}

fn dressed_term_energy(
    term: DressedTerm,
    z: &PhasePoint,
    ff: &FormFactorSet,
    fields: &DressedFields,
) -> (f64, f64) {
    let g = z.grid();
    match term {
        DressedTerm::Kinetic => (g.kinetic(&z.u), 0.0),
        DressedTerm::Phonon => (z.phonon_norm2(), 0.0),
        DressedTerm::Coupling => {
            let (a, res) = field_a_complex(g, &z.alpha, &real_to_complex(&ff.f_ir)).expect("on grid");
            (a.iter().zip(&fields.rho).map(|(a, r)| a * r).sum::<f64>() * g.dx(), res)
        }
        DressedTerm::Pair => {
            let conv = fields.pair_conv(g, ff);
            (conv.iter().zip(&fields.rho).map(|(c, r)| c * r).sum::<f64>() * g.dx(), 0.0)
        }
        DressedTerm::Quadratic => {
            let a2 = fields.a_squared();
            (a2.iter().zip(&fields.rho).map(|(a, r)| a * r).sum::<f64>() * g.dx(), 0.0)
        }
        DressedTerm::Drift => {
            // -2 ⟨u, (a·D + D·ā) u⟩, kept complex to expose the residue
            let first: C64 = (0..g.dim())
                .map(|j| {
                    z.u.iter()
                        .zip(&fields.a[j])
                        .zip(&fields.du[j])
                        .map(|((u, a), du)| u.conj() * a * du)
                        .sum::<C64>()
                })
                .sum();
            let second = g.inner_x(&z.u, &div_conj_a_u(g, &fields.a, &z.u)) / g.dx();
            let v = -2.0 * (first + second) * g.dx();
            (v.re, v.im.abs())
        }
    }
}

/// `Σ_j D_j (conj(a_j) u)`.
fn div_conj_a_u(g: &SpectralGrid, a: &[Vec<C64>], u: &[C64]) -> Vec<C64> {
    let mut acc = g.zeros();
    for (j, aj) in a.iter().enumerate() {
        let mut buf: Vec<C64> = aj.iter().zip(u).map(|(a, u)| a.conj() * u).collect();
        g.raw_forward(&mut buf);
        for (i, (acc, b)) in acc.iter_mut().zip(&buf).enumerate() {
            *acc += b * g.k(i)[j];
        }
    }
    g.raw_backward(&mut acc);
    let s = 1.0 / g.size() as f64;
    acc.iter_mut().for_each(|v| *v *= s);
    acc
}

fn dressed_term_gradient(
    term: DressedTerm,
    z: &PhasePoint,
    ff: &FormFactorSet,
    fields: &DressedFields,
) -> GradientPair {
    let g = z.grid();
    let mut out = GradientPair::zeros(g);
    match term {
        DressedTerm::Kinetic => out.du = g.neg_laplacian(&z.u),
        DressedTerm::Phonon => out.dalpha = z.alpha.clone(),
        DressedTerm::Coupling => {
            let a = field_a(g, &z.alpha, &ff.f_ir, C64::new(1.0, 0.0)).expect("on grid");
            out.du = z.u.iter().zip(&a).map(|(u, a)| u * a).collect();
            out.dalpha = fields.rho_hat.iter().zip(&ff.f_ir).map(|(s, f)| s * f).collect();
        }
        DressedTerm::Pair => {
            let conv = fields.pair_conv(g, ff);
            out.du = z.u.iter().zip(&conv).map(|(u, c)| u * (2.0 * c)).collect();
        }
        DressedTerm::Quadratic => {
            let a2 = fields.a_squared();
            out.du = z.u.iter().zip(&a2).map(|(u, a)| u * a).collect();
            for j in 0..g.dim() {
                let w: Vec<C64> =
                    fields.rho.iter().zip(&fields.a_real[j]).map(|(r, a)| C64::new(2.0 * r * a, 0.0)).collect();
                let hat = g.fourier_sum(&w);
                out.dalpha.iter_mut().zip(hat.iter().zip(&ff.kb[j])).for_each(|(o, (h, kb))| *o += h * kb);
            }
        }
        DressedTerm::Drift => {
            let div = div_conj_a_u(g, &fields.a, &z.u);
            let mut du = div;
            for j in 0..g.dim() {
                du.iter_mut()
                    .zip(fields.a[j].iter().zip(&fields.du[j]))
                    .for_each(|(o, (a, d))| *o += a * d);
            }
            out.du = du.into_iter().map(|v| -2.0 * v).collect();
            for j in 0..g.dim() {
                let w: Vec<C64> = z.u.iter().zip(&fields.du[j]).map(|(u, d)| u.conj() * d).collect();
                let hat = g.fourier_sum(&w);
                out.dalpha
                    .iter_mut()
                    .zip(hat.iter().zip(&ff.kb[j]))
                    .for_each(|(o, (h, kb))| *o += -2.0 * h * kb);
            }
        }
    }
    out
}

fn require_uv_free(ff: &FormFactorSet) -> Result<()> {
    if ff.sigma().is_some() {
        return Err(LabError::InvalidCutoff(
            "the dressed functional needs tables built without an ultraviolet cutoff".into(),
        ));
    }
    Ok(())
}

/// `ĥ∞` itemized: kinetic, phonon, `f_{σ0}` coupling, `V∞` pair potential,
/// the quadratic `(A_{α,kB})²` term and the drift term.
pub fn h_dressed(z: &PhasePoint, ff: &FormFactorSet) -> Result<EnergyBreakdown> {
    require_uv_free(ff)?;
    let fields = DressedFields::new(z, ff);
    let mut e = EnergyBreakdown::default();
    for term in DressedTerm::ALL {
        let (v, res) = dressed_term_energy(term, z, ff, &fields);
        e.imag_residue = e.imag_residue.max(res);
        match term {
            DressedTerm::Kinetic => e.kinetic = v,
            DressedTerm::Phonon => e.phonon = v,
            DressedTerm::Coupling => e.coupling = v,
            DressedTerm::Pair => e.pair = v,
            DressedTerm::Quadratic => e.quadratic = v,
            DressedTerm::Drift => e.drift = v,
        }
    }
    Ok(e.finish())
}

/// Energy of a single summand of `ĥ∞`.
pub fn h_dressed_term(term: DressedTerm, z: &PhasePoint, ff: &FormFactorSet) -> f64 {
    dressed_term_energy(term, z, ff, &DressedFields::new(z, ff)).0
}

/// Gradient of a single summand of `ĥ∞`.
pub fn grad_dressed_term(term: DressedTerm, z: &PhasePoint, ff: &FormFactorSet) -> GradientPair {
    dressed_term_gradient(term, z, ff, &DressedFields::new(z, ff))
}

#[cfg(test)]
fn grad_dressed_sum(z: &PhasePoint, ff: &FormFactorSet, terms: &[DressedTerm]) -> GradientPair {
    let fields = DressedFields::new(z, ff);
    let mut out = GradientPair::zeros(z.grid());
    for &t in terms {
        out.add(&dressed_term_gradient(t, z, ff, &fields));
    }
    out
}

/// `∇_z̄ ĥ∞`.
pub fn grad_dressed(z: &PhasePoint, ff: &FormFactorSet) -> Result<GradientPair> {
    require_uv_free(ff)?;
    let mut grad = fused_interaction_gradient(z, ff);
    let lap = z.grid().neg_laplacian(&z.u);
    grad.du.iter_mut().zip(&lap).for_each(|(a, b)| *a += b);
    grad.dalpha.iter_mut().zip(&z.alpha).for_each(|(a, b)| *a += b);
    Ok(grad)
}

/// `∇_z̄ ĥ_{∞,I}`, the dressed gradient without the free part.
pub fn grad_dressed_interaction(z: &PhasePoint, ff: &FormFactorSet) -> Result<GradientPair> {
    require_uv_free(ff)?;
    Ok(fused_interaction_gradient(z, ff))
}

/// Sum of the interaction gradients with the shared transforms done once;
/// the `α` components of the quadratic and drift terms share one transform
/// per axis.
fn fused_interaction_gradient(z: &PhasePoint, ff: &FormFactorSet) -> GradientPair {
    let g = z.grid();
    let fields = DressedFields::new(z, ff);
    let coupling = field_a(g, &z.alpha, &ff.f_ir, C64::new(1.0, 0.0)).expect("on grid");
    let conv = fields.pair_conv(g, ff);
    let a2 = fields.a_squared();
    let mut du = div_conj_a_u(g, &fields.a, &z.u);
    for j in 0..g.dim() {
        du.iter_mut().zip(fields.a[j].iter().zip(&fields.du[j])).for_each(|(o, (a, d))| *o += a * d);
    }
    for (i, o) in du.iter_mut().enumerate() {
        *o = z.u[i] * (coupling[i] + 2.0 * conv[i] + a2[i]) - 2.0 * *o;
    }
    let mut dalpha: Vec<C64> = fields.rho_hat.iter().zip(&ff.f_ir).map(|(s, f)| s * f).collect();
    for j in 0..g.dim() {
        let w: Vec<C64> = (0..z.u.len())
            .map(|i| 2.0 * fields.rho[i] * fields.a_real[j][i] - 2.0 * z.u[i].conj() * fields.du[j][i])
            .collect();
        let hat = g.fourier_sum(&w);
        dalpha.iter_mut().zip(hat.iter().zip(&ff.kb[j])).for_each(|(o, (h, kb))| *o += h * kb);
    }
    GradientPair { du, dalpha }
}

/// `-i ∇` applied to a gradient: the Hamiltonian vector field.
pub fn hamiltonian_vector(grad: &GradientPair) -> (Vec<C64>, Vec<C64>) {
    (grad.du.iter().map(|v| -I * v).collect(), grad.dalpha.iter().map(|v| -I * v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::RandomSmooth;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn setup(n: usize, l: f64) -> (Arc<SpectralGrid>, FormFactorSet) {
        let g = Arc::new(SpectralGrid::new(3, n, l).unwrap());
        let ff = FormFactorSet::new(&g, 1.0, None).unwrap();
        (g, ff)
    }

    #[test]
    fn fused_interaction_gradient_matches_term_sum() {
        let (g, ff) = setup(8, 6.0);
        let z = RandomSmooth { bandwidth: 1.5, mass: 1.0, phonon_norm2: 0.7 }.sample(&g, 4);
        let fused = grad_dressed_interaction(&z, &ff).unwrap();
        let sum = grad_dressed_sum(&z, &ff, &DressedTerm::INTERACTION);
        let diff = GradientPair {
            du: fused.du.iter().zip(&sum.du).map(|(a, b)| a - b).collect(),
            dalpha: fused.dalpha.iter().zip(&sum.dalpha).map(|(a, b)| a - b).collect(),
        };
        assert!(diff.norm(&g) < 1e-12 * sum.norm(&g));
    }

    #[test]
    fn zero_alpha_gives_zero_field() {
        let (g, ff) = setup(8, 6.0);
        let a = field_a(&g, &g.zeros(), &ff.f, C64::new(1.0, 0.0)).unwrap();
        assert!(a.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_mode_field_closed_form() {
        let (g, ff) = setup(8, 6.0);
        let k0 = g.flatten([1, 2, 0]);
        let mut alpha = g.zeros();
        alpha[k0] = C64::new(1.0, 0.0);
        let a = field_a(&g, &alpha, &ff.f, C64::new(1.0, 0.0)).unwrap();
        let kv = g.k(k0);
        let kn = g.k_norm(k0);
        for i in 0..g.size() {
            let x = g.x(i);
            let expect = 2.0 / kn * (kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2]).cos() * g.dk();
            assert!((a[i] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn imaginary_coupling_matches_direct_sum() {
        let g = Arc::new(SpectralGrid::new(3, 8, 2.0 * PI).unwrap());
        let ff = FormFactorSet::new(&g, 0.9, None).unwrap();
        // α = iβ with β real and even
        let beta = RandomSmooth { bandwidth: 1.5, mass: 1.0, phonon_norm2: 1.0 }.sample(&g, 5).alpha;
        let alpha: Vec<C64> = (0..g.size())
            .map(|i| {
                let r = g.reflect(i);
                C64::new(0.0, 0.5 * (beta[i].re + beta[r].re))
            })
            .collect();
        let fast = field_a(&g, &alpha, &ff.b, I).unwrap();
        for (i, fv) in fast.iter().enumerate() {
            let x = g.x(i);
            let direct: f64 = (0..g.size())
                .map(|m| {
                    let k = g.k(m);
                    let ph = C64::from_polar(1.0, -(k[0] * x[0] + k[1] * x[1] + k[2] * x[2]));
                    let ib = I * ff.b[m];
                    (ib * ph * alpha[m].conj() - ib * ph.conj() * alpha[m]).re
                })
                .sum::<f64>()
                * g.dk();
            assert!((fv - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_energies() {
        let (g, ff) = setup(8, 6.0);
        let z = RandomSmooth { bandwidth: 1.0, mass: 1.0, phonon_norm2: 0.4 }.sample(&g, 1);
        let zero = PhasePoint::zero(g.clone());
        assert_eq!(h_undressed(&zero, &ff).total, 0.0);
        assert_eq!(h_dressed(&zero, &ff).unwrap().total, 0.0);
        let only_alpha = zero.with_fields(g.zeros(), z.alpha.clone());
        assert!((h_undressed(&only_alpha, &ff).total - 0.4).abs() < 1e-14);
        assert!((h_dressed(&only_alpha, &ff).unwrap().total - 0.4).abs() < 1e-14);
        let only_u = zero.with_fields(z.u.clone(), g.zeros());
        let e = h_dressed(&only_u, &ff).unwrap();
        assert!((e.total - e.kinetic - e.pair).abs() < 1e-14 * e.total.abs());
        assert_eq!(e.quadratic, 0.0);
        assert_eq!(e.drift, 0.0);
    }

    #[test]
    fn undressed_gradient_at_zero_alpha_is_laplacian() {
        let (g, ff) = setup(8, 6.0);
        let z = RandomSmooth { bandwidth: 1.0, mass: 1.0, phonon_norm2: 0.0 }.sample(&g, 2);
        let z = z.with_fields(z.u.clone(), g.zeros());
        let grad = grad_undressed(&z, &ff);
        let lap = g.neg_laplacian(&z.u);
        assert_eq!(grad.du, lap);
        let zero = grad_undressed(&PhasePoint::zero(g.clone()), &ff);
        assert!(zero.du.iter().chain(&zero.dalpha).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dressed_requires_uv_free_tables() {
        let g = Arc::new(SpectralGrid::new(3, 8, 6.0).unwrap());
        let ff = FormFactorSet::new(&g, 1.0, Some(2.0)).unwrap();
        assert!(h_dressed(&PhasePoint::zero(g), &ff).is_err());
    }

    #[test]
    fn gauge_invariance_and_cubic_scaling() {
        let (g, ff) = setup(8, 6.0);
        let z = RandomSmooth { bandwidth: 1.0, mass: 1.0, phonon_norm2: 0.5 }.sample(&g, 4);
        let h0 = h_undressed(&z, &ff);
        let rotated = z.with_fields(z.u.iter().map(|v| v * C64::from_polar(1.0, 0.7)).collect(), z.alpha.clone());
        assert!((h_undressed(&rotated, &ff).total - h0.total).abs() < 1e-13 * h0.total.abs().max(1.0));
        for lambda in [1.0, 2.0, 4.0] {
            let scaled = z.scale(C64::new(lambda, 0.0));
            let e = h_undressed(&scaled, &ff);
            let cubic = e.total - lambda * lambda * (h0.kinetic + h0.phonon);
            assert!((cubic - lambda.powi(3) * h0.coupling).abs() < 1e-12 * lambda.powi(3));
        }
    }
}
