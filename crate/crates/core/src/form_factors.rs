// SPDX-License-Identifier: Apache-2.0

//! Coupling tables on the frequency lattice.
//!
//! `f_σ(k) = 1_{|k|≤σ} |k|^{-(d-1)/2}` is the electron-phonon form factor and
//! `B_σ(k) = -1_{σ0≤|k|≤σ} / ((1+|k|²)|k|^{(d-1)/2})` generates the Gross
//! dressing. Every table vanishes at `k = 0` and outside the open Nyquist
//! ball `|k| < πN/L`, which keeps the supports symmetric under `k → -k`.

use crate::error::{LabError, Result};
use crate::spectral::{SpectralGrid, C64};

#[derive(Debug, Clone)]
pub struct FormFactorSet {
    sigma0: f64,
    sigma: Option<f64>,
    /// `f_σ` on the k-lattice.
    pub f: Vec<f64>,
    /// `f_{σ0} = f_σ + (1+|k|²) B_σ`, the coupling left after dressing.
    pub f_ir: Vec<f64>,
    /// `B_σ` on the k-lattice.
    pub b: Vec<f64>,
    /// Components of `k B_σ(k)`.
    pub kb: [Vec<f64>; 3],
    /// Symbol `|B|² + 2 B f` of the pair potential.
    pub pair_symbol: Vec<f64>,
    /// `V_σ(x) = Re Σ_k (|B|² + 2Bf) e^{-ik·x} dk` on the x-lattice.
    pub pair_potential: Vec<f64>,
    /// Unnormalized transform of `pair_potential`, used for convolutions.
    pair_potential_hat: Vec<C64>,
    ir_below_first_shell: bool,
}

fn radial_power(k: f64, dim: usize) -> f64 {
    k.powf((dim as f64 - 1.0) / 2.0)
}

impl FormFactorSet {
    /// Build the tables. `sigma = None` removes the UV cutoff down to the
    /// lattice Nyquist ball.
    pub fn new(grid: &SpectralGrid, sigma0: f64, sigma: Option<f64>) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(LabError::InvalidCutoff(format!("infrared cutoff must be positive, got {sigma0}")));
        }
        if let Some(s) = sigma {
            if !(s >= sigma0) {
                return Err(LabError::InvalidCutoff(format!(
                    "ultraviolet cutoff {s} is below the infrared cutoff {sigma0}"
                )));
            }
        }
        let dim = grid.dim();
        let kmax = grid.nyquist_radius();
        let size = grid.size();
        let mut f = vec![0.0; size];
        let mut b = vec![0.0; size];
        for i in 0..size {
            let k = grid.k_norm(i);
            if k == 0.0 || k >= kmax || sigma.is_some_and(|s| k > s) {
                continue;
            }
            let p = radial_power(k, dim);
            f[i] = 1.0 / p;
            if k >= sigma0 {
                b[i] = -1.0 / ((1.0 + k * k) * p);
            }
        }
        let f_ir: Vec<f64> = (0..size).map(|i| f[i] + (1.0 + grid.k_squared()[i]) * b[i]).collect();
        let kb = std::array::from_fn(|a| (0..size).map(|i| grid.k(i)[a] * b[i]).collect());
        let pair_symbol: Vec<f64> = b.iter().zip(&f).map(|(bb, ff)| bb * bb + 2.0 * bb * ff).collect();
        let sym: Vec<C64> = pair_symbol.iter().map(|&w| C64::new(w, 0.0)).collect();
        let pair_potential: Vec<f64> = grid.mode_sum(&sym).iter().map(|v| v.re).collect();
        let vc: Vec<C64> = pair_potential.iter().map(|&v| C64::new(v, 0.0)).collect();
        let pair_potential_hat = grid.fourier_sum(&vc);
        let ir_below_first_shell = sigma0 < grid.dk_axis();
        Ok(Self {
            sigma0,
            sigma,
            f,
            f_ir,
            b,
            kb,
            pair_symbol,
            pair_potential,
            pair_potential_hat,
            ir_below_first_shell,
        })
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    /// True when `σ0` sits below the first nonzero lattice shell, so `B`
    /// starts at that shell.
    pub fn ir_below_first_shell(&self) -> bool {
        self.ir_below_first_shell
    }

    /// Periodic convolution `(V ∗ ρ)(x) = Σ_y V(x-y) ρ(y) dx`.
    pub fn convolve_pair(&self, grid: &SpectralGrid, rho: &[f64]) -> Vec<f64> {
        let rc: Vec<C64> = rho.iter().map(|&r| C64::new(r, 0.0)).collect();
        self.convolve_pair_hat(grid, &grid.fourier_sum(&rc))
    }

    /// Same as [`Self::convolve_pair`] from `Σ_x ρ e^{-ik·x} dx`.
    pub fn convolve_pair_hat(&self, grid: &SpectralGrid, rho_hat: &[C64]) -> Vec<f64> {
        let hat: Vec<C64> = rho_hat.iter().zip(&self.pair_potential_hat).map(|(h, v)| h * v).collect();
        grid.fourier_sum_inverse(&hat).iter().map(|v| v.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_inverted_cutoffs() {
        let g = SpectralGrid::new(1, 8, 8.0).unwrap();
        assert!(FormFactorSet::new(&g, 2.0, Some(1.0)).is_err());
        assert!(FormFactorSet::new(&g, 0.0, None).is_err());
    }

    #[test]
    fn unit_shell_values_in_three_dimensions() {
        let g = SpectralGrid::new(3, 8, 2.0 * PI).unwrap();
        let ff = FormFactorSet::new(&g, 0.5, None).unwrap();
        let i = g.flatten([1, 0, 0]);
        assert!((ff.f[i] - 1.0).abs() < 1e-15);
        assert!((ff.b[i] + 0.5).abs() < 1e-15);
        assert_eq!(ff.f[0], 0.0);
        assert_eq!(ff.b[0], 0.0);
    }

    #[test]
    fn empty_shell_gives_zero_dressing() {
        let g = SpectralGrid::new(3, 8, 2.0 * PI).unwrap();
        // |k|² is an integer on this lattice, 1.5 is not a shell radius
        let ff = FormFactorSet::new(&g, 1.5, Some(1.5)).unwrap();
        assert!(ff.b.iter().all(|&b| b == 0.0));
        assert!(ff.pair_potential.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn supports() {
        let g = SpectralGrid::new(2, 16, 10.0).unwrap();
        let ff = FormFactorSet::new(&g, 1.0, Some(3.0)).unwrap();
        for i in 0..g.size() {
            let k = g.k_norm(i);
            if k < 1.0 || k > 3.0 {
                assert_eq!(ff.b[i], 0.0);
            }
            if k > 3.0 {
                assert_eq!(ff.f[i], 0.0);
            }
            if g.is_nyquist(i) {
                assert_eq!(ff.f[i], 0.0);
            }
        }
        assert!(!ff.ir_below_first_shell());
        let low = FormFactorSet::new(&g, 0.1, None).unwrap();
        assert!(low.ir_below_first_shell());
    }

    #[test]
    fn enlarging_sigma_only_adds_support() {
        let g = SpectralGrid::new(3, 8, 6.0).unwrap();
        let small = FormFactorSet::new(&g, 1.0, Some(2.0)).unwrap();
        let large = FormFactorSet::new(&g, 1.0, Some(3.5)).unwrap();
        for i in 0..g.size() {
            if small.f[i] != 0.0 {
                assert_eq!(small.f[i], large.f[i]);
            }
            if small.b[i] != 0.0 {
                assert_eq!(small.b[i], large.b[i]);
            }
        }
        assert!(large.f.iter().filter(|v| **v != 0.0).count() > small.f.iter().filter(|v| **v != 0.0).count());
    }

    #[test]
    fn kb_matches_componentwise_product() {
        let g = SpectralGrid::new(3, 8, 6.0).unwrap();
        let ff = FormFactorSet::new(&g, 1.0, None).unwrap();
        for i in 0..g.size() {
            let k = g.k(i);
            for a in 0..3 {
                assert_eq!(ff.kb[a][i], k[a] * ff.b[i]);
            }
        }
    }

    #[test]
    fn pair_potential_is_even() {
        let g = SpectralGrid::new(3, 16, 9.0).unwrap();
        let ff = FormFactorSet::new(&g, 0.8, None).unwrap();
        for i in 0..g.size() {
            let r = g.reflect(i);
            assert!((ff.pair_potential[i] - ff.pair_potential[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_potential_at_origin_two_ways() {
        let g = SpectralGrid::new(3, 32, 16.0).unwrap();
        let ff = FormFactorSet::new(&g, 1.0, None).unwrap();
        let quadrature: f64 = ff.pair_symbol.iter().sum::<f64>() * g.dk();
        let v0 = ff.pair_potential[0];
        assert!((quadrature - v0).abs() < 1e-10 * quadrature.abs().max(1.0));
        // |B|² + 2Bf = B(B + 2f) < 0 wherever B ≠ 0, because |B| < f.
        assert!(v0 < 0.0);
    }
}
