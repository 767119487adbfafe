//! Runs one scenario and writes its CSV/JSON pair.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use pulse_jcm_core::algebra::{embed, sigma_minus, sigma_plus};
use pulse_jcm_core::integrator::{evolve_with_observables, Trajectory};
use pulse_jcm_core::models::{self, FieldStateSpec, ModelSpec};
use pulse_jcm_core::oracle::{self, inner, FewPhotonState};
use pulse_jcm_core::{Complex, Operator64, Trajectory64};
use serde::Serialize;

use crate::config::{parse_fock_projector, FieldConfig, ModelChoice, ScenarioConfig};
use crate::error::{AppError, Result};
use crate::output::{ensure_writable, write_json, SeriesTable};

/// State-health thresholds applied to every recorded time.
pub const TRACE_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-8;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex matrix as rows of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn json_matrix(m: &DMatrix<Complex<f64>>) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub max_trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub healthy: bool,
    pub records: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
}

impl Diagnostics {
    fn from_trajectory(tr: &Trajectory64) -> Self {
        let (dev, eig) = (tr.max_trace_deviation(), tr.min_recorded_eigenvalue());
        Self {
            max_trace_deviation: dev,
            min_eigenvalue: eig,
            healthy: dev < TRACE_TOL && eig >= -EIGEN_TOL,
            records: tr.len(),
            accepted_steps: tr.stats.accepted,
            rejected_steps: tr.stats.rejected,
            rhs_evals: tr.stats.rhs_evals,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub model: String,
    pub version: String,
    pub config_hash: String,
    pub config: ScenarioConfig,
    pub final_values: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    /// Reduced states at the end of the window: `tls`, `u`, `v`.
    pub reduced_states: BTreeMap<String, JsonMatrix>,
    /// Reduced state of the pick-up mode (the `v` oscillator, or the input
    /// mode projected out of the oracle's output field).
    pub pickup_state: Option<JsonMatrix>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub table: SeriesTable,
    pub summary: RunSummary,
    pub trajectory: Option<Trajectory64>,
    pub oracle: Option<FewPhotonState<f64>>,
    /// Bin centers, input mode and extracted `v₂` for oracle runs.
    pub modes: Option<SeriesTable>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub run: ScenarioRun,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub modes_csv: Option<PathBuf>,
}

fn field_specs(cfg: &ScenarioConfig) -> Vec<FieldStateSpec<f64>> {
    match cfg.model.oscillators() {
        0 => vec![],
        1 => vec![cfg.input.field.spec()],
        _ => vec![cfg.input.field.spec(), FieldStateSpec::Vacuum],
    }
}

pub fn build_model(cfg: &ScenarioConfig) -> pulse_jcm_core::Result<ModelSpec<f64>> {
    let p = cfg.pulse.build()?;
    let pol = cfg.policy();
    let (g, gr) = (cfg.gamma, cfg.gamma_refl);
    let nu = cfg.truncation.n_u.unwrap_or(1);
    let nv = cfg.truncation.n_v.unwrap_or(1);
    let m = match cfg.model {
        ModelChoice::ReferenceJcm => return models::build_reference_jcm(&p, g, nu, false),
        ModelChoice::DampedJcm => return models::build_reference_jcm(&p, g, nu, true),
        ModelChoice::ClassicalDrive => {
            let alpha = match cfg.input.field {
                FieldConfig::Coherent { re, im } => Complex::new(re, im),
                _ => Complex::new(0.0, 0.0),
            };
            return models::build_classical_drive(&p, alpha, g, gr);
        }
        ModelChoice::Jcm1 => models::build_jcm1(&p, g, nu, &pol)?,
        ModelChoice::Jcm2 => {
            let v = match &cfg.pickup {
                Some(v) => v.build()?,
                None => p.clone(),
            };
            models::build_jcm2(&p, &v, g, nu, nv, &pol)?
        }
        ModelChoice::Jcm3 => models::build_jcm3(&p, g, nu, nv, &pol)?,
        ModelChoice::Oracle => {
            return Err(pulse_jcm_core::Error::InvalidArgument("the oracle has no master equation".into()))
        }
    };
    models::add_reflection(m, gr)
}

fn extra_operator(name: &str, dims: &[usize]) -> pulse_jcm_core::Result<Option<Operator64>> {
    let op = match name {
        "N_tot" | "min_eig" => return Ok(None),
        "sigma_x" => sigma_plus::<f64>().add(&sigma_minus())?,
        "sigma_y" => sigma_minus::<f64>().sub(&sigma_plus())?.scale(Complex::new(0.0, 1.0)),
        other => {
            let (k, slot) = parse_fock_projector(other)
                .ok_or_else(|| pulse_jcm_core::Error::InvalidArgument(format!("unknown observable {other}")))?;
            let proj = Operator64::from_triplets(dims[slot], [(k, k, Complex::new(1.0, 0.0))])?;
            return Ok(Some(embed(&proj, slot, dims)?));
        }
    };
    Ok(Some(embed(&op, 0, dims)?))
}

/// Runs the scenario without touching the file system.
pub fn simulate(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    let name = cfg.display_name().to_string();
    let sim = |e| AppError::sim(&name, e);
    if cfg.model == ModelChoice::Oracle {
        return simulate_oracle(cfg).map_err(sim);
    }
    let model = build_model(cfg).map_err(sim)?;
    let dims = model.subsystem_dims().to_vec();
    let s0 = models::initial_state(&model, cfg.input.tls_state(), &field_specs(cfg)).map_err(sim)?;
    let (t0, t1) = (cfg.pulse.t_start.unwrap_or(0.0), cfg.pulse.t_end.unwrap_or(0.0));
    let mut extras = Vec::new();
    for name in &cfg.observables {
        if let Some(op) = extra_operator(name, &dims).map_err(sim)? {
            extras.push((name.clone(), op));
        }
    }
    let tr = evolve_with_observables(&model, &s0, &cfg.integrator_config(t0, t1), &extras).map_err(sim)?;

    let mut table = SeriesTable::new();
    for col in ["t", "P_e", "n_u", "n_v", "trace"] {
        table.push(col, tr.series(col).unwrap_or_default().to_vec());
    }
    for name in &cfg.observables {
        table.push(name, tr.series(name).unwrap_or_default().to_vec());
    }
    let summary = summarize(cfg, &tr, &dims).map_err(sim)?;
    Ok(ScenarioRun { table, summary, trajectory: Some(tr), oracle: None, modes: None })
}

fn last(v: &[f64]) -> f64 {
    v.last().copied().unwrap_or(f64::NAN)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn summarize(cfg: &ScenarioConfig, tr: &Trajectory<f64>, dims: &[usize]) -> pulse_jcm_core::Result<RunSummary> {
    let mut final_values = BTreeMap::new();
    for col in ["P_e", "n_u", "n_v", "N_tot", "trace"] {
        final_values.insert(col.to_string(), last(tr.series(col).unwrap_or_default()));
    }
    for name in &cfg.observables {
        final_values.insert(name.clone(), last(tr.series(name).unwrap_or_default()));
    }
    let state = &tr.final_state;
    let mut reduced = BTreeMap::new();
    let mut metrics = BTreeMap::new();
    let labels = ["tls", "u", "v"];
    for slot in 0..dims.len() {
        let r = if dims.len() == 1 { state.clone() } else { state.partial_trace(&[slot])? };
        reduced.insert(labels[slot].to_string(), json_matrix(r.rho()));
    }
    metrics.insert("max_n_u".into(), max_of(&tr.n_u));
    metrics.insert("emitted_quanta".into(), tr.n_tot[0] - last(&tr.n_tot));
    let mut pickup = None;
    if dims.len() == 3 {
        let rv = state.partial_trace(&[2])?;
        pickup = Some(json_matrix(rv.rho()));
        metrics.insert("max_n_v".into(), max_of(&tr.n_v));
        if cfg.model == ModelChoice::Jcm3 {
            let ru = state.partial_trace(&[1])?;
            let ruv = state.partial_trace(&[1, 2])?;
            let k11 = pulse_jcm_core::algebra::basis_index(&dims[1..], &[1, 1])?;
            metrics.insert("subtraction_fidelity".into(), ru.rho()[(1, 1)].re);
            metrics.insert("joint_ip_11".into(), ruv.rho()[(k11, k11)].re);
        }
    }
    Ok(RunSummary {
        scenario: cfg.display_name().to_string(),
        model: cfg.model.name().to_string(),
        version: VERSION.to_string(),
        config_hash: cfg.content_hash(),
        config: cfg.clone(),
        final_values,
        metrics,
        reduced_states: reduced,
        pickup_state: pickup,
        diagnostics: Diagnostics::from_trajectory(tr),
    })
}

fn simulate_oracle(cfg: &ScenarioConfig) -> pulse_jcm_core::Result<ScenarioRun> {
    let p = cfg.pulse.build()?;
    let n = match cfg.input.field {
        FieldConfig::Fock { n } => n,
        _ => 0,
    };
    let st = oracle::timebin_solve(&p, cfg.gamma, cfg.gamma_refl, n, cfg.oracle.bins)?;
    let edges = st.edges();
    let norm = st.norm();
    let mut table = SeriesTable::new();
    table.push("t", edges.clone());
    table.push("P_e", st.p_e.clone());
    table.push("n_u", st.n_in.clone());
    table.push("n_v", st.n_out.clone());
    table.push("trace", vec![norm; edges.len()]);

    let u = oracle::pulse_mode(&p, &st);
    let mut metrics = BTreeMap::new();
    metrics.insert("output_photons".into(), st.photon_number());
    let rho = oracle::project_reduced_state(&st, &u)?;
    let eig = pulse_jcm_core::algebra::hermitian_eigvals_dense(&rho)?;
    let mut modes = None;
    if n > 0 {
        let dec = oracle::output_mode_decomposition(&st)?;
        metrics.insert("gram_defect".into(), dec.gram_defect());
        metrics.insert("coherence_total".into(), dec.total);
        if let Some(m2) = dec.modes.get(1) {
            metrics.insert("raw_second_mode_overlap".into(), inner(&u, m2, st.dt()).norm());
        }
        if let Ok((v2, occ)) = dec.dominant_orthogonal_mode(&u) {
            metrics.insert("v2_occupation".into(), occ);
            metrics.insert("v2_overlap".into(), inner(&u, &v2, st.dt()).norm());
            if n == 2 {
                metrics.insert("pair_population".into(), oracle::pair_population(&st, &u, &v2)?);
            }
            let mut t = SeriesTable::new();
            t.push("t", st.centers());
            t.push("u_re", u.iter().map(|z| z.re).collect());
            t.push("u_im", u.iter().map(|z| z.im).collect());
            t.push("v2_re", v2.iter().map(|z| z.re).collect());
            t.push("v2_im", v2.iter().map(|z| z.im).collect());
            modes = Some(t);
        }
    }
    let mut final_values = BTreeMap::new();
    final_values.insert("P_e".into(), last(&st.p_e));
    final_values.insert("n_u".into(), last(&st.n_in));
    final_values.insert("n_v".into(), last(&st.n_out));
    final_values.insert("trace".into(), norm);
    let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let summary = RunSummary {
        scenario: cfg.display_name().to_string(),
        model: cfg.model.name().to_string(),
        version: VERSION.to_string(),
        config_hash: cfg.content_hash(),
        config: cfg.clone(),
        final_values,
        metrics,
        reduced_states: BTreeMap::new(),
        pickup_state: Some(json_matrix(&rho)),
        diagnostics: Diagnostics {
            max_trace_deviation: (norm - 1.0).abs(),
            min_eigenvalue: min_eig,
            healthy: (norm - 1.0).abs() < TRACE_TOL && min_eig >= -EIGEN_TOL,
            records: edges.len(),
            accepted_steps: st.bin_count(),
            rejected_steps: 0,
            rhs_evals: 0,
        },
    };
    Ok(ScenarioRun { table, summary, trajectory: None, oracle: Some(st), modes })
}

/// Writes the run's files into `dir` under the config's stem.
pub fn write_run(run: ScenarioRun, cfg: &ScenarioConfig, dir: &Path) -> Result<ScenarioOutput> {
    let stem = cfg.stem();
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    run.table.write_csv(&csv)?;
    write_json(&json, &run.summary)?;
    let modes_csv = match &run.modes {
        Some(m) => {
            let path = dir.join(format!("{stem}_modes.csv"));
            m.write_csv(&path)?;
            Some(path)
        }
        None => None,
    };
    Ok(ScenarioOutput { run, csv, json, modes_csv })
}

/// Simulates `cfg` and writes `<stem>.csv` and `<stem>.json` into `out_dir`
/// (or the configured directory).
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<ScenarioOutput> {
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir());
    ensure_writable(&dir)?;
    let mut cfg = cfg.clone();
    cfg.output.dir = Some(dir.clone());
    let run = simulate(&cfg)?;
    write_run(run, &cfg, &dir)
}
