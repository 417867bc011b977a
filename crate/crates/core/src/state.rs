// SPDX-License-Identifier: Apache-2.0

//! Classical phase-space points `z = (u, α)` and initial-data families.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LabError, Result};
use crate::spectral::{SpectralGrid, C64};

/// Electron field on the x-lattice and phonon field on the k-lattice.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    grid: Arc<SpectralGrid>,
    pub u: Vec<C64>,
    pub alpha: Vec<C64>,
}

impl PhasePoint {
    pub fn new(grid: Arc<SpectralGrid>, u: Vec<C64>, alpha: Vec<C64>) -> Result<Self> {
        grid.check(&u)?;
        grid.check(&alpha)?;
        Ok(Self { grid, u, alpha })
    }

    pub fn zero(grid: Arc<SpectralGrid>) -> Self {
        let u = grid.zeros();
        let alpha = grid.zeros();
        Self { grid, u, alpha }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn same_grid(&self, other: &PhasePoint) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(LabError::InvalidGrid("phase points live on different grids".into()))
        }
    }

    pub fn with_fields(&self, u: Vec<C64>, alpha: Vec<C64>) -> Self {
        debug_assert_eq!(u.len(), self.u.len());
        debug_assert_eq!(alpha.len(), self.alpha.len());
        Self { grid: self.grid.clone(), u, alpha }
    }

    /// `‖u‖²` with weight `dx`.
    pub fn mass(&self) -> f64 {
        self.grid.norm2_x(&self.u)
    }

    pub fn phonon_norm2(&self) -> f64 {
        self.grid.norm2_k(&self.alpha)
    }

    /// `‖u‖² + ‖α‖²`.
    pub fn norm2(&self) -> f64 {
        self.mass() + self.phonon_norm2()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.alpha).all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `self + s·dir`.
    pub fn axpy(&self, s: C64, dir: &PhasePoint) -> PhasePoint {
        let u = self.u.iter().zip(&dir.u).map(|(a, b)| a + s * b).collect();
        let alpha = self.alpha.iter().zip(&dir.alpha).map(|(a, b)| a + s * b).collect();
        self.with_fields(u, alpha)
    }

    pub fn scale(&self, s: C64) -> PhasePoint {
        self.with_fields(
            self.u.iter().map(|v| v * s).collect(),
            self.alpha.iter().map(|v| v * s).collect(),
        )
    }

    /// `L² ⊕ L²` distance.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let du: f64 = self.u.iter().zip(&other.u).map(|(a, b)| (a - b).norm_sqr()).sum();
        let da: f64 = self.alpha.iter().zip(&other.alpha).map(|(a, b)| (a - b).norm_sqr()).sum();
        (du * self.grid.dx() + da * self.grid.dk()).sqrt()
    }

    /// Largest pointwise difference over both components.
    pub fn sup_distance(&self, other: &PhasePoint) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.alpha.iter().zip(&other.alpha))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Real inner product `Re⟨a, b⟩` on `L² ⊕ L²`.
    pub fn real_inner(&self, other: &PhasePoint) -> f64 {
        self.grid.inner_x(&self.u, &other.u).re + self.grid.inner_k(&self.alpha, &other.alpha).re
    }

    /// Symplectic pairing `Im⟨a, b⟩` on `L² ⊕ L²`.
    pub fn symplectic(&self, other: &PhasePoint) -> f64 {
        self.grid.inner_x(&self.u, &other.u).im + self.grid.inner_k(&self.alpha, &other.alpha).im
    }
}

/// Gaussian wave packet `A exp(-|x-c|²/(2w²) + i p·x)` on the periodic box,
/// using the nearest periodic image of the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    pub amplitude: f64,
    pub center: [f64; 3],
    pub width: f64,
    pub momentum: [f64; 3],
}

impl WavePacket {
    pub fn sample(&self, grid: &SpectralGrid) -> Vec<C64> {
        let l = grid.box_len();
        (0..grid.size())
            .map(|i| {
                let x = grid.x(i);
                let mut r2 = 0.0;
                let mut phase = 0.0;
                for a in 0..grid.dim() {
                    let mut dx = x[a] - self.center[a];
                    dx -= l * (dx / l).round();
                    r2 += dx * dx;
                    phase += self.momentum[a] * x[a];
                }
                C64::from_polar(self.amplitude * (-r2 / (2.0 * self.width * self.width)).exp(), phase)
            })
            .collect()
    }
}

/// Phonon profile `A exp(-|k-c|²/(2s²)) e^{iφ}` on the k-lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononProfile {
    pub amplitude: f64,
    pub center: [f64; 3],
    pub width: f64,
    pub phase: f64,
}

impl PhononProfile {
    pub fn sample(&self, grid: &SpectralGrid) -> Vec<C64> {
        (0..grid.size())
            .map(|i| {
                let k = grid.k(i);
                let r2: f64 = (0..grid.dim()).map(|a| (k[a] - self.center[a]).powi(2)).sum();
                C64::from_polar(self.amplitude * (-r2 / (2.0 * self.width * self.width)).exp(), self.phase)
            })
            .collect()
    }
}

/// Constant-amplitude phonon field on the lattice shell nearest to `radius`.
pub fn single_shell(grid: &SpectralGrid, radius: f64, amplitude: f64) -> Vec<C64> {
    let target = (0..grid.size())
        .map(|i| grid.k_norm(i))
        .filter(|k| *k > 0.0)
        .min_by(|a, b| (a - radius).abs().total_cmp(&(b - radius).abs()))
        .unwrap_or(0.0);
    (0..grid.size())
        .map(|i| {
            if target > 0.0 && (grid.k_norm(i) - target).abs() < 1e-12 {
                C64::new(amplitude, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Seeded random smooth fields: Gaussian random Fourier coefficients damped
/// by `exp(-|k|²/(2κ²))`, then rescaled to the requested norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSmooth {
    pub bandwidth: f64,
    pub mass: f64,
    pub phonon_norm2: f64,
}

impl RandomSmooth {
    pub fn sample(&self, grid: &Arc<SpectralGrid>, seed: u64) -> PhasePoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = |rng: &mut ChaCha8Rng| -> Vec<C64> {
            (0..grid.size())
                .map(|i| {
                    let env = (-grid.k_squared()[i] / (2.0 * self.bandwidth * self.bandwidth)).exp();
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im) * env
                })
                .collect()
        };
        let uhat = coeffs(&mut rng);
        let alpha = coeffs(&mut rng);
        let u = grid.inverse_transform(&uhat).expect("grid-sized");
        let mut z = PhasePoint { grid: grid.clone(), u, alpha };
        let m = z.mass();
        if m > 0.0 {
            let s = (self.mass / m).sqrt();
            z.u.iter_mut().for_each(|v| *v *= s);
        }
        let p = z.phonon_norm2();
        if p > 0.0 {
            let s = (self.phonon_norm2 / p).sqrt();
            z.alpha.iter_mut().for_each(|v| *v *= s);
        }
        z
    }
}
