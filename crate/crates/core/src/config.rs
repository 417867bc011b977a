// SPDX-License-Identifier: Apache-2.0

//! Run configuration. The TOML layout is documented in `config.schema.toml`
//! at the repository root; unknown keys are rejected.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolutionConfig, Flow, Scheme};
use crate::error::{LabError, Result};
use crate::fock::{CorrespondenceConfig, FockModelSpec};
use crate::spectral::SpectralGrid;
use crate::state::{single_shell, PhasePoint, PhononProfile, RandomSmooth, WavePacket};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    #[serde(default)]
    pub form_factors: FormFactorSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub fock: Option<FockSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub box_len: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFactorSection {
    pub sigma0: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
}

impl Default for FormFactorSection {
    fn default() -> Self {
        Self { sigma0: 1.0, sigma: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub flow: Flow,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn default_scheme() -> Scheme {
    Scheme::StrangSplit
}

fn one() -> usize {
    1
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self { flow: Flow::LandauPekar, dt: 1e-2, t_end: 0.1, scheme: Scheme::StrangSplit, record_every: 1 }
    }
}

impl EvolutionSection {
    pub fn config(&self) -> EvolutionConfig {
        EvolutionConfig { record_every: self.record_every, ..EvolutionConfig::new(self.dt, self.t_end, self.scheme) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Evolve one trajectory and check mass conservation.
    Evolve,
    /// Energy drift at three halved steps.
    EnergyOrder,
    /// Distance between the undressed flow and the conjugated dressed flow.
    Conjugation,
    /// `ĥ∞ = h∞ ∘ D(1)` on random smooth states.
    Identity,
    /// Analytic gradients against central differences.
    Gradient,
    /// Group law, self-phase cancellation and symplectic pairing of `D`.
    Dressing,
    /// Contraction horizon and Picard-vs-Strang endpoint.
    Picard,
    /// Interpolation inequality on random fields.
    Strichartz,
    /// Conjugated versus term-assembled dressed Hamiltonian.
    FockDressing,
    Klmn,
    Correspondence,
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ScenarioKind::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(s))
            .map_err(|e| e.to_string())
    }
}

/// Initial electron field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ElectronData {
    #[default]
    Zero,
    WavePacket { amplitude: f64, center: [f64; 3], width: f64, momentum: [f64; 3] },
    RandomSmooth { bandwidth: f64, mass: f64 },
}

/// Initial phonon field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhononData {
    #[default]
    Zero,
    Gaussian { amplitude: f64, center: [f64; 3], width: f64, phase: f64 },
    SingleShell { radius: f64, amplitude: f64 },
    RandomSmooth { bandwidth: f64, norm2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub u: ElectronData,
    #[serde(default)]
    pub alpha: PhononData,
    /// Random states or fields to sample.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Bandwidth of random smooth samples.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    /// Finite-difference step for gradient and symplectic checks.
    #[serde(default)]
    pub fd_step: Option<f64>,
    /// Horizon bound for the Picard bisection.
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Time intervals of the Picard mesh.
    #[serde(default)]
    pub intervals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSection {
    pub model: FockModelSpec,
    pub sigma0: f64,
    /// Phonon cap of the comparison sub-basis; defaults to half the cutoff.
    #[serde(default)]
    pub interior_phonons: Option<usize>,
    /// Particle momentum radius (lattice units) of the comparison sub-basis.
    #[serde(default = "two")]
    pub interior_radius: i32,
    #[serde(default = "klmn_a")]
    pub klmn_a: f64,
    #[serde(default)]
    pub correspondence: Option<CorrespondenceConfig>,
}

fn two() -> i32 {
    2
}

fn klmn_a() -> f64 {
    0.9
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn grid(&self) -> Result<Arc<SpectralGrid>> {
        Ok(Arc::new(SpectralGrid::new(self.grid.dim, self.grid.n, self.grid.box_len)?))
    }

    /// Initial phase point from the scenario's data families.
    pub fn initial_state(&self, grid: &Arc<SpectralGrid>) -> PhasePoint {
        let seed = self.scenario.seed;
        let u = match self.scenario.u {
            ElectronData::Zero => grid.zeros(),
            ElectronData::WavePacket { amplitude, center, width, momentum } => {
                WavePacket { amplitude, center, width, momentum }.sample(grid)
            }
            ElectronData::RandomSmooth { bandwidth, mass } => {
                RandomSmooth { bandwidth, mass, phonon_norm2: 0.0 }.sample(grid, seed).u
            }
        };
        let alpha = match self.scenario.alpha {
            PhononData::Zero => grid.zeros(),
            PhononData::Gaussian { amplitude, center, width, phase } => {
                PhononProfile { amplitude, center, width, phase }.sample(grid)
            }
            PhononData::SingleShell { radius, amplitude } => single_shell(grid, radius, amplitude),
            PhononData::RandomSmooth { bandwidth, norm2 } => {
                RandomSmooth { bandwidth, mass: 0.0, phonon_norm2: norm2 }.sample(grid, seed.wrapping_add(1)).alpha
            }
        };
        PhasePoint::zero(grid.clone()).with_fields(u, alpha)
    }
}
