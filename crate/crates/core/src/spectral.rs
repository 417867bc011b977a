// SPDX-License-Identifier: Apache-2.0

//! Periodic-box discretization and discrete Fourier transforms.
//!
//! Fields live on the lattice `x_j = j L / N` (per axis) and their
//! transforms on `k = (2π/L) m`, with `m` stored in FFT order
//! (`0, 1, …, N/2-1, -N/2, …, -1`). The unitary pair
//!
//! ```text
//! F u(k)    = (2π)^{-d/2} Σ_x u(x) e^{-ik·x} dx
//! F⁻¹ c(x)  = (2π)^{-d/2} Σ_k c(k) e^{+ik·x} dk
//! ```
//!
//! makes the weighted Parseval identity exact. The unnormalized sums
//! `Σ_x u e^{-ik·x} dx` and `Σ_k c e^{-ik·x} dk` that appear in the
//! Hamiltonians are exposed separately as [`SpectralGrid::fourier_sum`] and
//! [`SpectralGrid::mode_sum`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

#[derive(Clone)]
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    len: f64,
    total: usize,
    dx: f64,
    dk: f64,
    /// Wave vectors per flat index, unused components zero.
    kvec: Vec<[f64; 3]>,
    k2: Vec<f64>,
    nyquist: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    bwd: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("len", &self.len)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.len == other.len
    }
}

/// Lattice frequency index for FFT-ordered position `i`.
pub fn freq_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl SpectralGrid {
    pub fn new(dim: usize, n: usize, len: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(LabError::InvalidGrid(format!("dimension {dim} outside 1..=3")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(LabError::InvalidGrid(format!(
                "points per axis must be even and at least 4, got {n}"
            )));
        }
        if !(len > 0.0 && len.is_finite()) {
            return Err(LabError::InvalidGrid(format!("box length must be positive, got {len}")));
        }
        let total = n.pow(dim as u32);
        let dx = (len / n as f64).powi(dim as i32);
        let dk = (2.0 * PI / len).powi(dim as i32);
        let step = 2.0 * PI / len;
        let mut kvec = Vec::with_capacity(total);
        let mut nyquist = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten(flat, n, dim);
            let mut k = [0.0; 3];
            let mut nyq = false;
            for a in 0..dim {
                let m = freq_index(idx[a], n);
                nyq |= m == -(n as i64) / 2;
                k[a] = step * m as f64;
            }
            kvec.push(k);
            nyquist.push(nyq);
        }
        let k2 = kvec.iter().map(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let bwd = planner.plan_fft_inverse(n);
        Ok(Self { dim, n, len, total, dx, dk, kvec, k2, nyquist, fwd, bwd })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.len
    }

    /// Number of lattice sites, `N^d`.
    pub fn size(&self) -> usize {
        self.total
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    /// Spacing of the frequency lattice along one axis.
    pub fn dk_axis(&self) -> f64 {
        2.0 * PI / self.len
    }

    /// Largest radius such that the open ball contains no Nyquist-plane mode.
    pub fn nyquist_radius(&self) -> f64 {
        PI * self.n as f64 / self.len
    }

    pub fn k(&self, flat: usize) -> [f64; 3] {
        self.kvec[flat]
    }

    pub fn k_vectors(&self) -> &[[f64; 3]] {
        &self.kvec
    }

    pub fn k_squared(&self) -> &[f64] {
        &self.k2
    }

    pub fn k_norm(&self, flat: usize) -> f64 {
        self.k2[flat].sqrt()
    }

    /// True when any component of the mode sits on `m = -N/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        self.nyquist[flat]
    }

    /// Position of lattice site `flat`.
    pub fn x(&self, flat: usize) -> [f64; 3] {
        let idx = unflatten(flat, self.n, self.dim);
        let h = self.len / self.n as f64;
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = h * idx[a] as f64;
        }
        x
    }

    /// Per-axis multi-index of `flat`.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        unflatten(flat, self.n, self.dim)
    }

    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim {
            flat = flat * self.n + idx[a] % self.n;
        }
        flat
    }

    /// Flat index of the reflected site / mode `-idx (mod N)`.
    pub fn reflect(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        let mut r = [0; 3];
        for a in 0..self.dim {
            r[a] = (self.n - idx[a]) % self.n;
        }
        self.flatten(r)
    }

    pub fn check(&self, field: &[C64]) -> Result<()> {
        if field.len() != self.total {
            return Err(LabError::GridMismatch { expected: self.total, found: field.len() });
        }
        Ok(())
    }

    pub fn zeros(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.total]
    }

    fn raw(&self, buf: &mut [C64], inverse: bool) {
        const STRIP: usize = 16;
        let plan = if inverse { &self.bwd } else { &self.fwd };
        let n = self.n;
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut strip = vec![C64::new(0.0, 0.0); n * STRIP];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(buf, &mut scratch);
                continue;
            }
            // Each block is an n × stride row-major matrix whose columns are
            // transformed a narrow strip at a time.
            for block in buf.chunks_exact_mut(n * stride) {
                for c0 in (0..stride).step_by(STRIP) {
                    let w = STRIP.min(stride - c0);
                    for r in 0..n {
                        let row = &block[r * stride + c0..r * stride + c0 + w];
                        for (j, v) in row.iter().enumerate() {
                            strip[j * n + r] = *v;
                        }
                    }
                    plan.process_with_scratch(&mut strip[..w * n], &mut scratch);
                    for r in 0..n {
                        let row = &mut block[r * stride + c0..r * stride + c0 + w];
                        for (j, v) in row.iter_mut().enumerate() {
                            *v = strip[j * n + r];
                        }
                    }
                }
            }
        }
    }

    /// In place `Σ_j buf_j e^{-2πi m·j/N}` over all axes.
    pub fn raw_forward(&self, buf: &mut [C64]) {
        self.raw(buf, false);
    }

    /// In place `Σ_m buf_m e^{+2πi m·j/N}` over all axes.
    pub fn raw_backward(&self, buf: &mut [C64]) {
        self.raw(buf, true);
    }

    /// Unitary forward transform.
    pub fn transform(&self, u: &[C64]) -> Result<Vec<C64>> {
        self.check(u)?;
        let mut out = u.to_vec();
        self.raw_forward(&mut out);
        let s = (2.0 * PI).powf(-(self.dim as f64) / 2.0) * self.dx;
        out.iter_mut().for_each(|v| *v *= s);
        Ok(out)
    }

    /// Unitary inverse transform.
    pub fn inverse_transform(&self, c: &[C64]) -> Result<Vec<C64>> {
        self.check(c)?;
        let mut out = c.to_vec();
        self.raw_backward(&mut out);
        let s = (2.0 * PI).powf(-(self.dim as f64) / 2.0) * self.dk;
        out.iter_mut().for_each(|v| *v *= s);
        Ok(out)
    }

    /// `Σ_x u(x) e^{-ik·x} dx` on the k-lattice.
    pub fn fourier_sum(&self, u: &[C64]) -> Vec<C64> {
        debug_assert_eq!(u.len(), self.total);
        let mut out = u.to_vec();
        self.raw_forward(&mut out);
        out.iter_mut().for_each(|v| *v *= self.dx);
        out
    }

    /// Inverse of [`Self::fourier_sum`]: `(2π)^{-d} Σ_k c(k) e^{+ik·x} dk`.
    pub fn fourier_sum_inverse(&self, c: &[C64]) -> Vec<C64> {
        debug_assert_eq!(c.len(), self.total);
        let mut out = c.to_vec();
        self.raw_backward(&mut out);
        let s = self.dk / (2.0 * PI).powi(self.dim as i32);
        out.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `Σ_k c(k) e^{-ik·x} dk` on the x-lattice.
    pub fn mode_sum(&self, c: &[C64]) -> Vec<C64> {
        debug_assert_eq!(c.len(), self.total);
        let mut out = c.to_vec();
        self.raw_forward(&mut out);
        out.iter_mut().for_each(|v| *v *= self.dk);
        out
    }

    /// Weighted inner product `Σ_x conj(a) b dx`.
    pub fn inner_x(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(p, q)| p.conj() * q).sum::<C64>() * self.dx
    }

    /// Weighted inner product `Σ_k conj(a) b dk`.
    pub fn inner_k(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(p, q)| p.conj() * q).sum::<C64>() * self.dk
    }

    pub fn norm2_x(&self, a: &[C64]) -> f64 {
        a.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn norm2_k(&self, a: &[C64]) -> f64 {
        a.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dk
    }

    /// Discrete `L^q` norm with quadrature weight `dx`.
    pub fn lq_norm(&self, a: &[C64], q: f64) -> f64 {
        if q.is_infinite() {
            return a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        (a.iter().map(|v| v.norm().powf(q)).sum::<f64>() * self.dx).powf(1.0 / q)
    }

    /// Apply a real frequency multiplier to a spatial field.
    pub fn apply_multiplier(&self, u: &[C64], symbol: impl Fn(usize) -> C64) -> Vec<C64> {
        let mut buf = u.to_vec();
        self.raw_forward(&mut buf);
        for (i, v) in buf.iter_mut().enumerate() {
            *v *= symbol(i);
        }
        self.raw_backward(&mut buf);
        let s = 1.0 / self.total as f64;
        buf.iter_mut().for_each(|v| *v *= s);
        buf
    }

    /// `-Δu` via the multiplier `|k|²`.
    pub fn neg_laplacian(&self, u: &[C64]) -> Vec<C64> {
        self.apply_multiplier(u, |i| C64::new(self.k2[i], 0.0))
    }

    /// `D_a u = -i ∂_a u` via the multiplier `k_a`.
    pub fn momentum(&self, u: &[C64], axis: usize) -> Vec<C64> {
        self.apply_multiplier(u, |i| C64::new(self.kvec[i][axis], 0.0))
    }

    /// `‖∇u‖² = Σ_k |k|² |F u|² dk`.
    pub fn kinetic(&self, u: &[C64]) -> f64 {
        let mut buf = u.to_vec();
        self.raw_forward(&mut buf);
        let s = (2.0 * PI).powi(-(self.dim as i32)) * self.dx * self.dx * self.dk;
        buf.iter().zip(&self.k2).map(|(v, k2)| v.norm_sqr() * k2).sum::<f64>() * s
    }
}

fn unflatten(mut flat: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    for a in (0..dim).rev() {
        idx[a] = flat % n;
        flat /= n;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(0, 8, 1.0).is_err());
        assert!(SpectralGrid::new(4, 8, 1.0).is_err());
        assert!(SpectralGrid::new(1, 7, 1.0).is_err());
        assert!(SpectralGrid::new(1, 2, 1.0).is_err());
        assert!(SpectralGrid::new(1, 8, 0.0).is_err());
    }

    #[test]
    fn smallest_grid_lattice() {
        let g = SpectralGrid::new(1, 4, 2.0 * PI).unwrap();
        let mut ks: Vec<f64> = (0..4).map(|i| g.k(i)[0]).collect();
        ks.sort_by(f64::total_cmp);
        assert_eq!(ks, vec![-2.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn weights() {
        let g = SpectralGrid::new(3, 32, 16.0).unwrap();
        assert!((g.dk() - (2.0 * PI / 16.0).powi(3)).abs() < 1e-15);
        assert!((g.dx() - 0.5f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn constant_field_has_only_dc() {
        let g = SpectralGrid::new(2, 8, 3.0).unwrap();
        let f = g.transform(&vec![C64::new(1.0, 0.0); g.size()]).unwrap();
        assert!(f[0].norm() > 0.1);
        assert!(f.iter().skip(1).all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn plane_wave_single_mode() {
        let g = SpectralGrid::new(3, 8, 5.0).unwrap();
        let target = g.flatten([1, 7, 2]);
        let k0 = g.k(target);
        let u: Vec<C64> = (0..g.size())
            .map(|i| {
                let x = g.x(i);
                C64::from_polar(1.0, k0[0] * x[0] + k0[1] * x[1] + k0[2] * x[2])
            })
            .collect();
        let f = g.transform(&u).unwrap();
        for (i, v) in f.iter().enumerate() {
            if i == target {
                assert!(v.norm() > 1.0);
            } else {
                assert!(v.norm() < 1e-12, "mode {i} = {v}");
            }
        }
    }

    #[test]
    fn parseval_against_naive_dft() {
        let g = SpectralGrid::new(2, 8, 4.0).unwrap();
        let u = random_field(g.size(), 3);
        // naive O(N²) sum
        let pref = (2.0 * PI).powi(-1) * g.dx();
        let naive: Vec<C64> = (0..g.size())
            .map(|m| {
                let k = g.k(m);
                (0..g.size())
                    .map(|j| {
                        let x = g.x(j);
                        u[j] * C64::from_polar(1.0, -(k[0] * x[0] + k[1] * x[1]))
                    })
                    .sum::<C64>()
                    * pref
            })
            .collect();
        let fast = g.transform(&u).unwrap();
        for (a, b) in naive.iter().zip(&fast) {
            assert!((a - b).norm() < 1e-12);
        }
        let lhs = g.norm2_x(&u);
        let rhs = g.norm2_k(&naive);
        assert!((lhs - rhs).abs() / lhs < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g = SpectralGrid::new(1, 8, 1.0).unwrap();
        assert!(matches!(g.transform(&[C64::new(0.0, 0.0); 4]), Err(LabError::GridMismatch { .. })));
    }

    #[test]
    fn reflect_is_involution() {
        let g = SpectralGrid::new(3, 4, 1.0).unwrap();
        for i in 0..g.size() {
            assert_eq!(g.reflect(g.reflect(i)), i);
        }
    }
}
