// SPDX-License-Identifier: Apache-2.0

//! C ABI over the polaron-lab core.
//!
//! Handles are boxed behind opaque pointers and released with the matching
//! `_free`. Every fallible call returns a `PlStatus`; the message of the last
//! failure on the calling thread is available from `pl_last_error`.
//! Complex arrays are interleaved `re, im` doubles of length `2 * pl_grid_size`.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use num_complex::Complex64;
use polaron_lab::config::Config;
use polaron_lab::dressing::dressing_apply;
use polaron_lab::dynamics::{evolve_endpoint, Flow, Scheme};
use polaron_lab::error::LabError;
use polaron_lab::form_factors::FormFactorSet;
use polaron_lab::hamiltonians::{h_dressed, h_undressed};
use polaron_lab::run::{run, write_artifacts};
use polaron_lab::spectral::SpectralGrid;
use polaron_lab::state::{PhasePoint, RandomSmooth};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    BlowUp = 4,
    NotContracting = 5,
    ConfigError = 6,
    IoError = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlFlow {
    LandauPekar = 0,
    Dressed = 1,
}

pub struct PlGrid {
    inner: Arc<SpectralGrid>,
}

pub struct PlFormFactors {
    inner: FormFactorSet,
}

pub struct PlState {
    inner: PhasePoint,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &LabError) -> PlStatus {
    match e {
        LabError::GridMismatch { .. } => PlStatus::GridMismatch,
        LabError::BlowUp { .. } => PlStatus::BlowUp,
        LabError::NotContracting { .. } | LabError::PicardNoConvergence { .. } => PlStatus::NotContracting,
        LabError::Config(_) => PlStatus::ConfigError,
        LabError::Io(_) => PlStatus::IoError,
        LabError::InvalidGrid(_)
        | LabError::InvalidCutoff(_)
        | LabError::InvalidConfig(_)
        | LabError::InvalidModel(_)
        | LabError::DimensionOverflow { .. }
        | LabError::TruncationMargin(_) => PlStatus::InvalidArgument,
        _ => PlStatus::Internal,
    }
}

/// Run `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), PlStatus>) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside polaron-lab".into());
            PlStatus::Panic
        }
    }
}

fn lab<T>(r: polaron_lab::error::Result<T>) -> Result<T, PlStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, PlStatus> {
    p.as_ref().ok_or_else(|| {
        set_error(format!("{what} is null"));
        PlStatus::NullPointer
    })
}

unsafe fn out<T>(p: *mut *mut T, value: T) -> Result<(), PlStatus> {
    if p.is_null() {
        set_error("output pointer is null".into());
        return Err(PlStatus::NullPointer);
    }
    *p = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn read_field(p: *const f64, size: usize) -> Vec<Complex64> {
    if p.is_null() {
        return vec![Complex64::new(0.0, 0.0); size];
    }
    std::slice::from_raw_parts(p, 2 * size).chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

unsafe fn write_field(p: *mut f64, v: &[Complex64]) {
    if p.is_null() {
        return;
    }
    let dst = std::slice::from_raw_parts_mut(p, 2 * v.len());
    for (c, z) in dst.chunks_exact_mut(2).zip(v) {
        c[0] = z.re;
        c[1] = z.im;
    }
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
#[no_mangle]
pub unsafe extern "C" fn pl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

#[no_mangle]
pub unsafe extern "C" fn pl_grid_new(dim: usize, n: usize, box_len: f64, grid: *mut *mut PlGrid) -> PlStatus {
    guard(|| {
        let g = lab(SpectralGrid::new(dim, n, box_len))?;
        out(grid, PlGrid { inner: Arc::new(g) })
    })
}

/// Number of grid points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pl_grid_size(grid: *const PlGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.size())
}

#[no_mangle]
pub unsafe extern "C" fn pl_grid_free(grid: *mut PlGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// A non-positive or non-finite `sigma` means no ultraviolet cutoff.
#[no_mangle]
pub unsafe extern "C" fn pl_form_factors_new(
    grid: *const PlGrid,
    sigma0: f64,
    sigma: f64,
    ff: *mut *mut PlFormFactors,
) -> PlStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let uv = (sigma.is_finite() && sigma > 0.0).then_some(sigma);
        let inner = lab(FormFactorSet::new(&g.inner, sigma0, uv))?;
        out(ff, PlFormFactors { inner })
    })
}

#[no_mangle]
pub unsafe extern "C" fn pl_form_factors_free(ff: *mut PlFormFactors) {
    if !ff.is_null() {
        drop(Box::from_raw(ff));
    }
}

/// State from interleaved fields; a null field is taken as zero.
#[no_mangle]
pub unsafe extern "C" fn pl_state_new(
    grid: *const PlGrid,
    u: *const f64,
    alpha: *const f64,
    state: *mut *mut PlState,
) -> PlStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let n = g.inner.size();
        let inner = lab(PhasePoint::new(g.inner.clone(), read_field(u, n), read_field(alpha, n)))?;
        out(state, PlState { inner })
    })
}

#[no_mangle]
pub unsafe extern "C" fn pl_state_random_smooth(
    grid: *const PlGrid,
    bandwidth: f64,
    mass: f64,
    phonon_norm2: f64,
    seed: u64,
    state: *mut *mut PlState,
) -> PlStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        if !(bandwidth > 0.0 && mass >= 0.0 && phonon_norm2 >= 0.0) {
            set_error("bandwidth must be positive and norms non-negative".into());
            return Err(PlStatus::InvalidArgument);
        }
        let inner = RandomSmooth { bandwidth, mass, phonon_norm2 }.sample(&g.inner, seed);
        out(state, PlState { inner })
    })
}

/// Copy the fields out; either destination may be null.
#[no_mangle]
pub unsafe extern "C" fn pl_state_fields(state: *const PlState, u: *mut f64, alpha: *mut f64) -> PlStatus {
    guard(|| {
        let s = deref(state, "state")?;
        write_field(u, &s.inner.u);
        write_field(alpha, &s.inner.alpha);
        Ok(())
    })
}

/// Electron mass, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pl_state_mass(state: *const PlState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.inner.mass())
}

#[no_mangle]
pub unsafe extern "C" fn pl_state_free(state: *mut PlState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

#[no_mangle]
pub unsafe extern "C" fn pl_energy(
    state: *const PlState,
    ff: *const PlFormFactors,
    flow: PlFlow,
    energy: *mut f64,
) -> PlStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let f = deref(ff, "form factors")?;
        let e = match flow {
            PlFlow::LandauPekar => h_undressed(&s.inner, &f.inner).total,
            PlFlow::Dressed => lab(h_dressed(&s.inner, &f.inner))?.total,
        };
        let dst = energy.as_mut().ok_or(PlStatus::NullPointer)?;
        *dst = e;
        Ok(())
    })
}

/// New state `D(theta) state`.
#[no_mangle]
pub unsafe extern "C" fn pl_dress(
    state: *const PlState,
    ff: *const PlFormFactors,
    theta: f64,
    result: *mut *mut PlState,
) -> PlStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let f = deref(ff, "form factors")?;
        out(result, PlState { inner: dressing_apply(&s.inner, theta, &f.inner) })
    })
}

/// Strang-split evolution to `t_end`; a blow-up returns `BlowUp`.
#[no_mangle]
pub unsafe extern "C" fn pl_evolve(
    state: *const PlState,
    ff: *const PlFormFactors,
    flow: PlFlow,
    dt: f64,
    t_end: f64,
    result: *mut *mut PlState,
) -> PlStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let f = deref(ff, "form factors")?;
        let flow = match flow {
            PlFlow::LandauPekar => Flow::LandauPekar,
            PlFlow::Dressed => Flow::Dressed,
        };
        let inner = lab(evolve_endpoint(&s.inner, &f.inner, flow, dt, t_end, Scheme::StrangSplit))?;
        out(result, PlState { inner })
    })
}

/// Run a TOML configuration and write its artifacts to `out_dir`.
/// `passed` receives the overall verdict.
#[no_mangle]
pub unsafe extern "C" fn pl_run_config(config_toml: *const c_char, out_dir: *const c_char, passed: *mut bool) -> PlStatus {
    guard(|| {
        let text = CStr::from_ptr(deref(config_toml, "config")?).to_str().map_err(|_| {
            set_error("config is not UTF-8".into());
            PlStatus::InvalidArgument
        })?;
        let dir = CStr::from_ptr(deref(out_dir, "output directory")?).to_str().map_err(|_| {
            set_error("output directory is not UTF-8".into());
            PlStatus::InvalidArgument
        })?;
        let cfg = lab(Config::from_toml(text))?;
        let report = lab(run(&cfg))?;
        lab(write_artifacts(Path::new(dir), &report))?;
        if let Some(p) = passed.as_mut() {
            *p = report.passed();
        }
        Ok(())
    })
}
