// SPDX-License-Identifier: Apache-2.0

//! Numerical laboratory for the Landau-Pekar equations, the classical Gross
//! dressing transform and a finite-mode Fröhlich model.

pub mod config;
pub mod diagnostics;
pub mod dressing;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod form_factors;
pub mod hamiltonians;
pub mod picard;
pub mod run;
pub mod spectral;
pub mod state;

pub use error::{LabError, Result};
pub use form_factors::FormFactorSet;
pub use spectral::{SpectralGrid, C64};
pub use state::PhasePoint;
