// SPDX-License-Identifier: Apache-2.0

//! Scenario orchestration and artifact emission.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Config, ScenarioKind};
use crate::diagnostics::{convergence_order, gradient_check, relative_drift, DiagnosticsRow};
use crate::dressing::{dressed_identity_residual, dressing_apply, self_phase_residual, symplectic_defect, verify_conjugation};
use crate::dynamics::{evolve, evolve_endpoint, EvolutionConfig, Flow, Scheme};
use crate::error::{LabError, Result};
use crate::fock::{
    correspondence_experiment, dress_hamiltonian, interior_states, klmn_check, FockCouplings, FockModel,
};
use crate::form_factors::FormFactorSet;
use crate::hamiltonians::{grad_dressed, grad_undressed, h_dressed, h_undressed};
use crate::picard::{contraction_horizon, interpolation_residual, picard_solve, PicardOptions};
use crate::state::{PhasePoint, RandomSmooth};

/// Version tag written as the first line of every CSV.
pub const CSV_VERSION: &str = "# polaron-lab csv v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub value: f64,
    pub limit: String,
    pub pass: bool,
}

impl Verdict {
    fn below(check: &str, value: f64, limit: f64) -> Self {
        Self { check: check.into(), value, limit: format!("< {limit:e}"), pass: value < limit }
    }

    fn at_least(check: &str, value: f64, limit: f64) -> Self {
        Self { check: check.into(), value, limit: format!(">= {limit:e}"), pass: value >= limit }
    }

    fn within(check: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { check: check.into(), value, limit: format!("in [{lo}, {hi}]"), pass: (lo..=hi).contains(&value) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Abort {
    pub step: usize,
    pub time: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
    pub summary: Value,
    #[serde(skip)]
    pub csv: Option<String>,
    pub aborted: Option<Abort>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.aborted.is_none() && self.verdicts.iter().all(|v| v.pass)
    }
}

fn trajectory_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = format!("{CSV_VERSION}\n{}\n", DiagnosticsRow::csv_header());
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

fn form_factors(cfg: &Config, grid: &crate::spectral::SpectralGrid) -> Result<FormFactorSet> {
    FormFactorSet::new(grid, cfg.form_factors.sigma0, cfg.form_factors.sigma)
}

fn fock_section(cfg: &Config) -> Result<&crate::config::FockSection> {
    cfg.fock.as_ref().ok_or_else(|| LabError::Config("scenario needs a [fock] section".into()))
}

fn random_states(cfg: &Config, grid: &std::sync::Arc<crate::spectral::SpectralGrid>, default: usize) -> Vec<PhasePoint> {
    let gen = RandomSmooth { bandwidth: cfg.scenario.bandwidth.unwrap_or(0.6), mass: 1.0, phonon_norm2: 0.5 };
    (0..cfg.scenario.samples.unwrap_or(default) as u64).map(|s| gen.sample(grid, cfg.scenario.seed.wrapping_add(s))).collect()
}

/// Halved-step configurations `dt, dt/2, dt/4` sampling the same times.
fn halvings(cfg: &Config) -> [EvolutionConfig; 3] {
    let base = cfg.evolution.config();
    [1usize, 2, 4].map(|f| EvolutionConfig {
        dt: base.dt / f as f64,
        record_every: base.record_every * f,
        ..base
    })
}

/// Run the configured scenario. Blow-ups during evolution are recorded in
/// the report rather than returned as errors.
pub fn run(cfg: &Config) -> Result<RunReport> {
    let mut report = RunReport {
        scenario: cfg.scenario.kind,
        seed: cfg.scenario.seed,
        verdicts: Vec::new(),
        summary: Value::Null,
        csv: None,
        aborted: None,
    };
    match scenario(cfg, &mut report) {
        Ok(()) => Ok(report),
        Err(LabError::BlowUp { step, time, reason }) => {
            report.aborted = Some(Abort { step, time, reason });
            report.verdicts.push(Verdict { check: "no_blow_up".into(), value: time, limit: "completes".into(), pass: false });
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

fn scenario(cfg: &Config, report: &mut RunReport) -> Result<()> {
    use ScenarioKind::*;
    let kind = cfg.scenario.kind;
    let fock_kind = matches!(kind, FockDressing | Klmn | Correspondence);
    let (grid, ff, z0) = if fock_kind {
        (None, None, None)
    } else {
        let grid = cfg.grid()?;
        let ff = form_factors(cfg, &grid)?;
        let z0 = cfg.initial_state(&grid);
        (Some(grid), Some(ff), Some(z0))
    };
    let v = &mut report.verdicts;
    match kind {
        Evolve => {
            let (ff, z0) = (ff.as_ref().unwrap(), z0.as_ref().unwrap());
            let t = evolve(z0, ff, cfg.evolution.flow, &cfg.evolution.config())?;
            let mass = relative_drift(t.rows.iter().map(|r| r.mass));
            let energy = relative_drift(t.rows.iter().map(|r| r.energy));
            v.push(Verdict::below("mass_drift", mass, 1e-8));
            report.summary = json!({
                "flow": cfg.evolution.flow,
                "mass_drift": mass,
                "energy_drift": energy,
                "strichartz_norm": t.strichartz_norm,
                "steps": cfg.evolution.config().steps()?,
            });
            report.csv = Some(trajectory_csv(&t.rows));
        }
        EnergyOrder => {
            let (ff, z0) = (ff.as_ref().unwrap(), z0.as_ref().unwrap());
            let mut drifts = Vec::new();
            for c in halvings(cfg) {
                let t = evolve(z0, ff, cfg.evolution.flow, &c)?;
                drifts.push(relative_drift(t.rows.iter().map(|r| r.energy)));
            }
            let order = convergence_order(&drifts);
            for (i, r) in order.ratios.iter().enumerate() {
                v.push(Verdict::within(&format!("energy_drift_ratio_{i}"), *r, 3.0, 5.0));
            }
            report.summary = json!({ "flow": cfg.evolution.flow, "energy_order": order });
        }
        Conjugation => {
            let (ff, z0) = (ff.as_ref().unwrap(), z0.as_ref().unwrap());
            let mut finals = Vec::new();
            let mut curve = None;
            for c in halvings(cfg) {
                let r = verify_conjugation(z0, ff, &c)?;
                finals.push(r.final_distance());
                curve = Some(r);
            }
            let order = convergence_order(&finals);
            let largest = finals.iter().copied().fold(0.0, f64::max);
            if largest < 1e-12 {
                // exact up to round-off (e.g. empty electron), no order to measure
                v.push(Verdict::below("conjugation_distance", largest, 1e-12));
            } else {
                for (i, o) in order.orders.iter().enumerate() {
                    v.push(Verdict::within(&format!("conjugation_order_{i}"), *o, 1.7, 2.3));
                }
            }
            let curve = curve.expect("three levels");
            let mut csv = format!("{CSV_VERSION}\ntime,distance\n");
            for (t, d) in curve.times.iter().zip(&curve.distances) {
                csv.push_str(&format!("{t:.16e},{d:.16e}\n"));
            }
            report.csv = Some(csv);
            report.summary = json!({ "conjugation_order": order });
        }
        Identity => {
            let (grid, ff) = (grid.as_ref().unwrap(), ff.as_ref().unwrap());
            let mut worst: f64 = 0.0;
            for z in random_states(cfg, grid, 100) {
                worst = worst.max(dressed_identity_residual(&z, ff)?);
            }
            v.push(Verdict::below("dressed_identity_residual", worst, 1e-9));
            report.summary = json!({ "max_residual": worst });
        }
        Gradient => {
            let (ff, z0) = (ff.as_ref().unwrap(), z0.as_ref().unwrap());
            let dirs = cfg.scenario.samples.unwrap_or(200);
            let step = cfg.scenario.fd_step.unwrap_or(1e-5);
            let seed = cfg.scenario.seed;
            let und = gradient_check(|w| h_undressed(w, ff).total, &grad_undressed(z0, ff), z0, dirs, step, seed);
            let dre = gradient_check(|w| h_dressed(w, ff).map(|e| e.total).unwrap_or(f64::NAN), &grad_dressed(z0, ff)?, z0, dirs, step, seed);
            v.push(Verdict::below("gradient_undressed", und.max_relative_error, 1e-6));
            v.push(Verdict::below("gradient_dressed", dre.max_relative_error, 1e-6));
            report.summary = json!({ "undressed": und, "dressed": dre });
        }
        Dressing => {
            let (ff, z0) = (ff.as_ref().unwrap(), z0.as_ref().unwrap());
            let back = dressing_apply(&dressing_apply(z0, 1.0, ff), -1.0, ff);
            let inverse = back.sup_distance(z0);
            let phase = self_phase_residual(z0, ff);
            v.push(Verdict::below("inverse_residual", inverse, 1e-10));
            v.push(Verdict::below("self_phase_residual", phase, 1e-10));
            let mut defects = Vec::new();
            for h in [1e-3, 1e-4] {
                let d = symplectic_defect(z0, ff, h, cfg.scenario.samples.unwrap_or(5), cfg.scenario.seed);
                v.push(Verdict::below(&format!("symplectic_defect_h{h:e}"), d, h));
                defects.push(json!({ "h": h, "defect": d }));
            }
            report.summary = json!({ "inverse": inverse, "self_phase": phase, "symplectic": defects });
        }
        Picard => {
            let (ff, z0) = (ff.as_ref().unwrap(), z0.as_ref().unwrap());
            let intervals = cfg.scenario.intervals.unwrap_or(200);
            let t_max = cfg.scenario.t_max.unwrap_or(1.0);
            let horizon = contraction_horizon(z0, ff, t_max, intervals, 5, 0.5, 10);
            if horizon <= 0.0 {
                v.push(Verdict::at_least("contraction_horizon", horizon, f64::MIN_POSITIVE));
                report.summary = json!({ "horizon": horizon });
                return Ok(());
            }
            // The bisection mesh is coarse; the final solve uses a step of at most dt/2.
            let fine = intervals.max((2.0 * horizon / cfg.evolution.dt).ceil() as usize);
            let opts = PicardOptions { intervals: fine, ..PicardOptions::default() };
            let sol = picard_solve(z0, horizon, ff, &opts)?;
            let run = sol.contracting_run(0.5, 1e-13);
            let steps = (horizon / cfg.evolution.dt).ceil().max(1.0);
            let strang = evolve_endpoint(z0, ff, Flow::LandauPekar, horizon / steps, horizon, Scheme::StrangSplit)?;
            let gap = sol.endpoint().distance(&strang);
            v.push(Verdict::at_least("contracting_iterations", run as f64, 5.0));
            v.push(Verdict::below("picard_vs_strang", gap, 1e-6));
            report.summary = json!({
                "horizon": horizon,
                "intervals": fine,
                "iterations": sol.iterations,
                "ratios": sol.ratios,
                "iterate_norms": sol.iterate_norms,
                "endpoint_gap": gap,
            });
        }
        Strichartz => {
            let grid = grid.as_ref().unwrap();
            let mut worst = f64::INFINITY;
            for z in random_states(cfg, grid, 100) {
                let r = interpolation_residual(grid, &z.u)
                    .ok_or_else(|| LabError::Config("interpolation check needs dim ≥ 3".into()))?;
                worst = worst.min(r);
            }
            v.push(Verdict::at_least("min_interpolation_residual", worst, -1e-10));
            report.summary = json!({ "min_residual": worst });
        }
        FockDressing => {
            let f = fock_section(cfg)?;
            let model = FockModel::new(f.model.clone())?;
            let cp = FockCouplings::new(&model, f.sigma0, None)?;
            let d = dress_hamiltonian(&model, &cp)?;
            let cap = f.interior_phonons.unwrap_or(model.spec().phonon_max / 2);
            let inner = interior_states(&model, cap, f.interior_radius);
            let r = d.residual_on(&inner);
            v.push(Verdict::below("dressed_hamiltonian_residual", r, 1e-6));
            report.summary = json!({ "dim": model.dim(), "subbasis": inner.len(), "residual": r });
        }
        Klmn => {
            let f = fock_section(cfg)?;
            let model = FockModel::new(f.model.clone())?;
            let cp = FockCouplings::new(&model, f.sigma0, None)?;
            let r = klmn_check(&model, &cp, cfg.scenario.samples.unwrap_or(1000), f.klmn_a, cfg.scenario.seed)?;
            let a = r.pair.map(|p| p.0).unwrap_or(f64::INFINITY);
            v.push(Verdict { check: "klmn_pair".into(), value: a, limit: format!("a <= {}", f.klmn_a), pass: r.pair.is_some() });
            report.summary = serde_json::to_value(&r).map_err(|e| LabError::Config(e.to_string()))?;
        }
        Correspondence => {
            let f = fock_section(cfg)?;
            let cc = f.correspondence.clone().unwrap_or_default();
            let t = correspondence_experiment(&cc)?;
            v.push(Verdict {
                check: "correspondence_monotone".into(),
                value: t.rows.last().map(|r| r.final_error()).unwrap_or(0.0),
                limit: "each error ≤ 1.1 × previous".into(),
                pass: t.monotone,
            });
            let mut csv = format!("{CSV_VERSION}\nepsilon,dim,final_error\n");
            for r in &t.rows {
                csv.push_str(&format!("{:.16e},{},{:.16e}\n", r.epsilon, r.dim, r.final_error()));
            }
            report.csv = Some(csv);
            report.summary = serde_json::to_value(&t).map_err(|e| LabError::Config(e.to_string()))?;
        }
    }
    Ok(())
}

/// Write `trajectory.csv` (when present), `summary.json` and `verdict.json`.
pub fn write_artifacts(dir: &Path, report: &RunReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    if let Some(csv) = &report.csv {
        std::fs::write(dir.join("trajectory.csv"), csv)?;
    }
    let summary = json!({
        "scenario": report.scenario,
        "seed": report.seed,
        "summary": report.summary,
        "aborted": report.aborted,
    });
    let verdict = json!({ "pass": report.passed(), "checks": report.verdicts });
    let pretty = |v: &Value| serde_json::to_string_pretty(v).expect("plain JSON values") + "\n";
    std::fs::write(dir.join("summary.json"), pretty(&summary))?;
    std::fs::write(dir.join("verdict.json"), pretty(&verdict))?;
    Ok(())
}
