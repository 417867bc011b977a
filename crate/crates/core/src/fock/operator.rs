// SPDX-License-Identifier: Apache-2.0

//! Normal-ordered polynomials in the ladder operators and their matrices.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::FockModel;
use crate::error::{LabError, Result};
use crate::spectral::C64;

/// Largest basis for which dense matrices are formed.
pub const DENSE_LIMIT: usize = 5000;

/// `coeff · a†_{cre[0]} ⋯ a†_{cre[m]} a_{ann[0]} ⋯ a_{ann[n]}` over global
/// mode indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub cre: Vec<usize>,
    pub ann: Vec<usize>,
}

impl Monomial {
    pub fn new(coeff: C64, cre: Vec<usize>, ann: Vec<usize>) -> Self {
        Self { coeff, cre, ann }
    }

    pub fn number(coeff: f64, mode: usize) -> Self {
        Self::new(C64::new(coeff, 0.0), vec![mode], vec![mode])
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.coeff.conj(), self.ann.clone(), self.cre.clone())
    }

    /// Image of basis state `occ`, or `None` when it vanishes or leaves the
    /// basis.
    fn apply(&self, model: &FockModel, occ: &[u8]) -> Option<(usize, C64)> {
        let eps = model.epsilon();
        let mut s = occ.to_vec();
        let mut amp = self.coeff;
        for &m in &self.ann {
            if s[m] == 0 {
                return None;
            }
            amp *= (eps * s[m] as f64).sqrt();
            s[m] -= 1;
        }
        for &m in &self.cre {
            let n = s[m].checked_add(1)?;
            amp *= (eps * n as f64).sqrt();
            s[m] = n;
        }
        model.index_of(&s).map(|j| (j, amp))
    }

    /// Wick symbol `coeff Π conj(z_cre) Π z_ann`.
    fn symbol(&self, z: &[C64]) -> C64 {
        self.cre.iter().fold(self.coeff, |acc, &m| acc * z[m].conj()) * self.ann.iter().map(|&m| z[m]).product::<C64>()
    }
}

/// Sum of monomials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolyOp {
    pub terms: Vec<Monomial>,
}

impl PolyOp {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    pub fn push(&mut self, m: Monomial) {
        if m.coeff != C64::new(0.0, 0.0) {
            self.terms.push(m);
        }
    }

    /// Push `m` and its adjoint.
    pub fn push_hermitian(&mut self, m: Monomial) {
        let adj = m.adjoint();
        self.push(m);
        self.push(adj);
    }

    pub fn extend(&mut self, other: &PolyOp) {
        self.terms.extend(other.terms.iter().cloned());
    }

    pub fn plus(&self, other: &PolyOp) -> PolyOp {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn scaled(&self, s: C64) -> PolyOp {
        PolyOp::new(self.terms.iter().map(|m| Monomial { coeff: m.coeff * s, ..m.clone() }).collect())
    }

    pub fn adjoint(&self) -> PolyOp {
        PolyOp::new(self.terms.iter().map(Monomial::adjoint).collect())
    }

    /// Wick symbol at the mode amplitudes `z`.
    pub fn symbol(&self, z: &[C64]) -> C64 {
        self.terms.iter().map(|m| m.symbol(z)).sum()
    }

    /// `∂h/∂z̄_m` for the Wick symbol `h`, treating `z` and `z̄` as independent.
    pub fn symbol_gradient(&self, z: &[C64]) -> Vec<C64> {
        let mut g = vec![C64::new(0.0, 0.0); z.len()];
        for t in &self.terms {
            let ann: C64 = t.ann.iter().map(|&m| z[m]).product();
            for (i, &m) in t.cre.iter().enumerate() {
                let rest = t.cre.iter().enumerate().filter(|(j, _)| *j != i).fold(t.coeff, |acc, (_, &c)| acc * z[c].conj());
                g[m] += rest * ann;
            }
        }
        g
    }

    fn triplets(&self, model: &FockModel) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for (j, occ) in model.basis().iter().enumerate() {
            for t in &self.terms {
                if let Some((i, v)) = t.apply(model, occ) {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Projection onto the model basis as a sparse matrix.
    pub fn to_sparse(&self, model: &FockModel) -> CsrMatrix<C64> {
        let n = model.dim();
        let mut coo = CooMatrix::new(n, n);
        for (i, j, v) in self.triplets(model) {
            coo.push(i, j, v);
        }
        CsrMatrix::from(&coo)
    }

    /// Projection onto the model basis as a dense matrix.
    pub fn to_dense(&self, model: &FockModel) -> Result<DMatrix<C64>> {
        let n = model.dim();
        if n > DENSE_LIMIT {
            return Err(LabError::DimensionOverflow { dim: n, limit: DENSE_LIMIT });
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, j, v) in self.triplets(model) {
            m[(i, j)] += v;
        }
        Ok(m)
    }
}

/// Dense operator with a flag recording whether it passed the Hermiticity
/// check.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<C64>,
    pub hermitian: bool,
}

impl OperatorMatrix {
    /// Tolerance on `max |M - M†| / (1 + max |M|)` for the Hermitian flag.
    pub const HERMITIAN_TOL: f64 = 1e-12;

    pub fn new(matrix: DMatrix<C64>) -> Self {
        let hermitian = matrix.is_square() && hermiticity_defect(&matrix) <= Self::HERMITIAN_TOL;
        Self { matrix, hermitian }
    }

    pub fn from_poly(model: &FockModel, op: &PolyOp) -> Result<Self> {
        Ok(Self::new(op.to_dense(model)?))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `exp(i s M)` for Hermitian `M`, with the unitarity defect checked.
    pub fn unitary_exp(&self, s: f64) -> Result<DMatrix<C64>> {
        if !self.hermitian {
            return Err(LabError::InvalidModel("generator is not Hermitian".into()));
        }
        let u = (&self.matrix * C64::new(0.0, s)).exp();
        let defect = unitarity_defect(&u);
        if !(defect < 1e-10) {
            return Err(LabError::ExpNonConvergence(format!("‖UU† - I‖ = {defect:e}")));
        }
        Ok(u)
    }

    /// `U M U†`.
    pub fn conjugated(&self, u: &DMatrix<C64>) -> OperatorMatrix {
        OperatorMatrix::new(u * &self.matrix * u.adjoint())
    }

    pub fn expectation(&self, psi: &DVector<C64>) -> C64 {
        psi.dotc(&(&self.matrix * psi))
    }
}

pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let scale = 1.0 + m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm())) / scale
}

pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    (u * u.adjoint() - DMatrix::<C64>::identity(n, n)).iter().fold(0.0f64, |a, v| a.max(v.norm()))
}

pub(crate) fn sparse_matvec(h: &CsrMatrix<C64>, x: &[C64], y: &mut [C64]) {
    let (offsets, cols, vals) = h.csr_data();
    for (r, out) in y.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for k in offsets[r]..offsets[r + 1] {
            acc += vals[k] * x[cols[k]];
        }
        *out = acc;
    }
}

/// `exp(-i t H / ε) ψ` by a Taylor series on substeps of size at most
/// `ε / ‖H‖₁`. Fails if a substep needs more than 60 terms.
pub fn propagate(h: &CsrMatrix<C64>, psi: &[C64], t: f64, epsilon: f64) -> Result<Vec<C64>> {
    let (offsets, _, vals) = h.csr_data();
    let bound = (0..h.nrows())
        .map(|r| vals[offsets[r]..offsets[r + 1]].iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        / epsilon;
    let substeps = (t.abs() * bound).ceil().max(1.0) as usize;
    let dt = t / substeps as f64;
    let scale = C64::new(0.0, -dt / epsilon);
    let mut state = psi.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); psi.len()];
    let mut next = term.clone();
    for _ in 0..substeps {
        term.copy_from_slice(&state);
        let mut converged = false;
        for n in 1..=60 {
            sparse_matvec(h, &term, &mut next);
            let f = scale / n as f64;
            let mut norm = 0.0;
            for (t, x) in term.iter_mut().zip(&next) {
                *t = f * x;
                norm += t.norm_sqr();
            }
            for (s, t) in state.iter_mut().zip(&term) {
                *s += t;
            }
            if norm.sqrt() < 1e-17 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LabError::ExpNonConvergence("Taylor propagation did not converge in 60 terms".into()));
        }
    }
    Ok(state)
}
