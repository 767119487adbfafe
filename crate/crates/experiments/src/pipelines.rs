//! Figure pipelines: the n = 20 Rabi suite, the subtraction sweep and the
//! Fock/coherent comparison.

use std::path::Path;

use pulse_jcm_core::models::FieldStateSpec;
use pulse_jcm_core::{Complex, FieldStateSpec64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{content_hash, FieldConfig, ModelChoice, PulseConfig, ScenarioConfig};
use crate::error::{AppError, Result};
use crate::output::{check_csv, ensure_writable, write_json, SeriesTable};
use crate::scenario::{run_scenario, simulate, ScenarioOutput, VERSION};

/// Photon number of the Rabi suite.
pub const FIG3_PHOTONS: usize = 20;

/// Reflection rates of the subtraction sweep, in units of γ.
pub const FIG4_GAMMA_REFL: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 1.0];

/// Pulse width of the two-photon subtraction optimum, in units of 1/γ.
pub const FIG4_TAU: f64 = 0.3799;

fn fock(n: usize) -> FieldConfig {
    FieldConfig::Fock { n }
}

pub fn fig3_configs() -> Vec<ScenarioConfig> {
    let p = PulseConfig::gaussian(1.0);
    let mut out = Vec::new();
    for (model, name) in [
        (ModelChoice::ReferenceJcm, "fig3a_undamped"),
        (ModelChoice::DampedJcm, "fig3a_damped"),
        (ModelChoice::Jcm1, "fig3b_jcm1"),
        (ModelChoice::Jcm2, "fig3b_jcm2"),
        (ModelChoice::Jcm3, "fig3c_jcm3"),
    ] {
        let mut c = ScenarioConfig::new(model, p.clone(), fock(FIG3_PHOTONS)).named(name);
        c.observables = vec!["N_tot".into()];
        out.push(c.resolve().expect("built-in configs are valid"));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig3Anchors {
    /// Largest `|⟨n⟩ + P_e − n₀|` of the undamped reference model.
    pub undamped_excitation_drift: f64,
    pub damped_loss: f64,
    pub jcm1_n_u_monotone: bool,
    pub jcm1_final_n_u: f64,
    pub jcm2_n_u_monotone: bool,
    pub jcm2_loss: f64,
    pub jcm2_final_n_v: f64,
    pub jcm3_max_n_v: f64,
    pub all_healthy: bool,
}

#[derive(Debug, Clone)]
pub struct Fig3Suite {
    pub runs: Vec<ScenarioOutput>,
    pub anchors: Fig3Anchors,
}

impl Fig3Suite {
    pub fn run(&self, name: &str) -> Option<&ScenarioOutput> {
        self.runs.iter().find(|r| r.run.summary.scenario == name)
    }
}

fn monotone_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

/// Runs the five panels concurrently and writes one CSV/JSON pair each plus
/// `fig3_anchors.json`.
pub fn fig3_suite(out_dir: &Path) -> Result<Fig3Suite> {
    ensure_writable(out_dir)?;
    let runs: Vec<ScenarioOutput> =
        fig3_configs().par_iter().map(|c| run_scenario(c, Some(out_dir))).collect::<Result<_>>()?;
    for r in &runs {
        check_csv(&r.csv, Some("t"))?;
    }
    let col = |name: &str, c: &str| -> Vec<f64> {
        let r = runs.iter().find(|r| r.run.summary.scenario == name).expect("suite member");
        r.run.table.column(c).unwrap_or_default().to_vec()
    };
    let n0 = FIG3_PHOTONS as f64;
    let last = |v: Vec<f64>| *v.last().expect("non-empty series");
    let drift = col("fig3a_undamped", "n_u")
        .iter()
        .zip(col("fig3a_undamped", "P_e"))
        .map(|(n, p)| (n + p - n0).abs())
        .fold(0.0, f64::max);
    let anchors = Fig3Anchors {
        undamped_excitation_drift: drift,
        damped_loss: n0 - last(col("fig3a_damped", "n_u")),
        jcm1_n_u_monotone: monotone_decreasing(&col("fig3b_jcm1", "n_u")),
        jcm1_final_n_u: last(col("fig3b_jcm1", "n_u")),
        jcm2_n_u_monotone: monotone_decreasing(&col("fig3b_jcm2", "n_u")),
        jcm2_loss: n0 - last(col("fig3b_jcm2", "N_tot")),
        jcm2_final_n_v: last(col("fig3b_jcm2", "n_v")),
        jcm3_max_n_v: col("fig3c_jcm3", "n_v").into_iter().fold(0.0, f64::max),
        all_healthy: runs.iter().all(|r| r.run.summary.diagnostics.healthy),
    };
    write_json(&out_dir.join("fig3_anchors.json"), &anchors)?;
    Ok(Fig3Suite { runs, anchors })
}

/// Two-photon Fock pulse of width `tau` on JCM-III with reflection `gamma_refl`.
pub fn subtraction_config(tau: f64, gamma_refl: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(ModelChoice::Jcm3, PulseConfig::gaussian(tau), fock(2)).named("fig4a_jcm3");
    c.gamma_refl = gamma_refl;
    c.observables = vec!["N_tot".into(), "p1_u".into()];
    c.integrator.record_points = 200;
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubtractionPoint {
    pub tau: f64,
    pub gamma_refl: f64,
    /// `⟨1|ρ_{u,IP}|1⟩` at the end of the window.
    pub fidelity: f64,
    pub n_u: f64,
    /// `2 − ⟨N_tot⟩` at the end of the window.
    pub emitted: f64,
    pub max_n_v: f64,
    pub joint_ip_11: f64,
    pub max_trace_deviation: f64,
    pub min_eigenvalue: f64,
}

pub fn fig4_subtraction(tau: f64, gamma_refl: f64) -> Result<SubtractionPoint> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(AppError::invalid(format!("tau: must be positive, got {tau}")));
    }
    let cfg = subtraction_config(tau, gamma_refl).resolve()?;
    let run = simulate(&cfg)?;
    let s = &run.summary;
    let m = |k: &str| s.metrics.get(k).copied().unwrap_or(f64::NAN);
    Ok(SubtractionPoint {
        tau,
        gamma_refl,
        fidelity: m("subtraction_fidelity"),
        n_u: s.final_values["n_u"],
        emitted: m("emitted_quanta"),
        max_n_v: m("max_n_v"),
        joint_ip_11: m("joint_ip_11"),
        max_trace_deviation: s.diagnostics.max_trace_deviation,
        min_eigenvalue: s.diagnostics.min_eigenvalue,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimum {
    pub gamma_refl: f64,
    pub point: SubtractionPoint,
    /// False when the grid maximum sits on the edge of the τ range.
    pub interior: bool,
    pub grid_tau: f64,
    pub grid_fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub taus: Vec<f64>,
    pub gamma_refls: Vec<f64>,
    /// `fidelity[g][t]` for `gamma_refls[g]`, `taus[t]`.
    pub fidelity: Vec<Vec<f64>>,
    pub points: Vec<SubtractionPoint>,
    pub optima: Vec<Optimum>,
    pub config_hash: String,
    pub version: String,
}

#[derive(Serialize)]
struct SweepSpec<'a> {
    taus: &'a [f64],
    gamma_refls: &'a [f64],
    template: ScenarioConfig,
    refine_tol: f64,
}

/// Absolute τ tolerance of the optimum refinement.
pub const REFINE_TOL: f64 = 1e-4;

fn golden_max(lo: f64, hi: f64, tol: f64, f: impl Fn(f64) -> Result<SubtractionPoint>) -> Result<SubtractionPoint> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc.fidelity >= fd.fidelity {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc.fidelity >= fd.fidelity { fc } else { fd })
}

/// Evaluates the subtraction fidelity on `taus × gamma_refls` concurrently,
/// then refines the maximum of each γ′ curve by golden-section search
/// between the grid neighbours of its grid maximum.
pub fn fig4_sweep(taus: &[f64], gamma_refls: &[f64]) -> Result<SweepResult> {
    let mut errs = Vec::new();
    if taus.is_empty() {
        errs.push("tau grid is empty".to_string());
    }
    if gamma_refls.is_empty() {
        errs.push("gamma_refl list is empty".to_string());
    }
    if taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) || taus.windows(2).any(|w| !(w[1] > w[0])) {
        errs.push("tau grid must be positive and strictly increasing".to_string());
    }
    if gamma_refls.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        errs.push("gamma_refl values must be non-negative".to_string());
    }
    if !errs.is_empty() {
        return Err(AppError::Validation(errs));
    }
    let jobs: Vec<(f64, f64)> = gamma_refls.iter().flat_map(|&g| taus.iter().map(move |&t| (t, g))).collect();
    let points: Vec<SubtractionPoint> =
        jobs.par_iter().map(|&(t, g)| fig4_subtraction(t, g)).collect::<Result<_>>()?;
    let nt = taus.len();
    let fidelity: Vec<Vec<f64>> = points.chunks(nt).map(|row| row.iter().map(|p| p.fidelity).collect()).collect();
    let optima: Vec<Optimum> = gamma_refls
        .par_iter()
        .zip(fidelity.par_iter())
        .map(|(&g, row)| {
            let k = row
                .iter()
                .enumerate()
                .fold(0, |best, (i, &f)| if f > row[best] { i } else { best });
            let interior = k > 0 && k + 1 < nt;
            let point = if interior {
                golden_max(taus[k - 1], taus[k + 1], REFINE_TOL, |t| fig4_subtraction(t, g))?
            } else {
                points[gamma_refls.iter().position(|x| *x == g).unwrap_or(0) * nt + k]
            };
            let point = if point.fidelity >= row[k] { point } else { fig4_subtraction(taus[k], g)? };
            Ok(Optimum { gamma_refl: g, point, interior, grid_tau: taus[k], grid_fidelity: row[k] })
        })
        .collect::<Result<_>>()?;
    let spec = SweepSpec {
        taus,
        gamma_refls,
        template: subtraction_config(1.0, 0.0).resolve()?,
        refine_tol: REFINE_TOL,
    };
    Ok(SweepResult {
        taus: taus.to_vec(),
        gamma_refls: gamma_refls.to_vec(),
        fidelity,
        points,
        optima,
        config_hash: content_hash(&spec),
        version: VERSION.to_string(),
    })
}

impl SweepResult {
    pub fn table(&self) -> SeriesTable {
        let mut t = SeriesTable::new();
        let col = |f: fn(&SubtractionPoint) -> f64| self.points.iter().map(f).collect::<Vec<_>>();
        t.push("tau", col(|p| p.tau));
        t.push("gamma_refl", col(|p| p.gamma_refl));
        t.push("fidelity", col(|p| p.fidelity));
        t.push("n_u", col(|p| p.n_u));
        t.push("emitted", col(|p| p.emitted));
        t.push("joint_ip_11", col(|p| p.joint_ip_11));
        t
    }

    pub fn optima_table(&self) -> SeriesTable {
        let mut t = SeriesTable::new();
        t.push("gamma_refl", self.optima.iter().map(|o| o.gamma_refl).collect());
        t.push("tau", self.optima.iter().map(|o| o.point.tau).collect());
        t.push("fidelity", self.optima.iter().map(|o| o.point.fidelity).collect());
        t.push("n_u", self.optima.iter().map(|o| o.point.n_u).collect());
        t.push("emitted", self.optima.iter().map(|o| o.point.emitted).collect());
        t
    }

    pub fn optimum(&self, gamma_refl: f64) -> Option<&Optimum> {
        self.optima.iter().find(|o| o.gamma_refl == gamma_refl)
    }

    /// Writes `fig4_sweep.csv`, `fig4_optima.csv` and `fig4_sweep.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        ensure_writable(dir)?;
        let sweep = dir.join("fig4_sweep.csv");
        let optima = dir.join("fig4_optima.csv");
        self.table().write_csv(&sweep)?;
        self.optima_table().write_csv(&optima)?;
        check_csv(&sweep, None)?;
        check_csv(&optima, None)?;
        write_json(&dir.join("fig4_sweep.json"), self)
    }
}

/// Default τ grid of the sweep.
pub fn default_taus() -> Vec<f64> {
    linspace(0.15, 0.9, 31)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Panel (a): the JCM-III populations at `tau` and the oracle's output modes.
pub fn fig4_panel_a(tau: f64, bins: usize, out_dir: &Path) -> Result<(ScenarioOutput, ScenarioOutput)> {
    let me = subtraction_config(tau, 0.0).resolve()?;
    let mut oc = ScenarioConfig::new(ModelChoice::Oracle, PulseConfig::gaussian(tau), fock(2)).named("fig4a_oracle");
    oc.oracle.bins = bins;
    let oc = oc.resolve()?;
    let (a, b) = rayon::join(|| run_scenario(&me, Some(out_dir)), || run_scenario(&oc, Some(out_dir)));
    let (a, b) = (a?, b?);
    check_csv(&a.csv, Some("t"))?;
    check_csv(&b.csv, Some("t"))?;
    if let Some(m) = &b.modes_csv {
        check_csv(m, Some("t"))?;
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseRevival {
    pub photons: usize,
    pub alpha: [f64; 2],
    pub tau: f64,
    pub times: Vec<f64>,
    pub fock_p_e: Vec<f64>,
    pub fock_ip_p_e: Vec<f64>,
    pub coherent_p_e: Vec<f64>,
    pub classical_p_e: Vec<f64>,
    pub fock_vs_ip: f64,
    pub coherent_vs_classical: f64,
    /// `None` when the oscillations never collapse within the window.
    pub fock_revival: Option<bool>,
    pub coherent_revival: Option<bool>,
    pub all_healthy: bool,
}

/// Sup-norm tolerance of both equivalence assertions.
pub const EQUIVALENCE_TOL: f64 = 1e-5;

/// Level P_e must fall below, after its peak, for the oscillations to count
/// as decayed, and the height a later local maximum needs to count as a revival.
pub const COLLAPSE_LEVEL: f64 = 0.1;
pub const REVIVAL_LEVEL: f64 = 0.5;

/// True when a local maximum above [`REVIVAL_LEVEL`] follows the first drop
/// of P_e below [`COLLAPSE_LEVEL`] after its global peak; `None` if it never
/// drops that far within the window.
pub fn revival(p_e: &[f64]) -> Option<bool> {
    let peak = (0..p_e.len()).fold(0, |m, k| if p_e[k] > p_e[m] { k } else { m });
    let low = (peak..p_e.len()).find(|&k| p_e[k] < COLLAPSE_LEVEL)?;
    let later = (low.max(1)..p_e.len().saturating_sub(1))
        .any(|k| p_e[k] > REVIVAL_LEVEL && p_e[k] > p_e[k - 1] && p_e[k] >= p_e[k + 1]);
    Some(later)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// P_e for a Fock and a coherent pulse of equal mean photon number, each
/// computed two ways: JCM-I against JCM-III for the Fock state and JCM-I
/// against the classical drive for the coherent state. Fails with an
/// equivalence error if either pair differs by [`EQUIVALENCE_TOL`] or more.
pub fn collapse_revival_experiment(field: &FieldStateSpec64, tau: f64) -> Result<CollapseRevival> {
    let mean = field.mean_photon_number();
    let photons = mean.round() as usize;
    let alpha = match field {
        FieldStateSpec::Coherent(a) => *a,
        _ => Complex::new(mean.sqrt(), 0.0),
    };
    if photons == 0 {
        return Err(AppError::invalid("field: collapse/revival needs a non-vacuum field"));
    }
    let pulse = PulseConfig::gaussian(tau);
    let coherent = FieldConfig::Coherent { re: alpha.re, im: alpha.im };
    let cfgs = [
        ScenarioConfig::new(ModelChoice::Jcm1, pulse.clone(), fock(photons)).named("collapse_fock"),
        ScenarioConfig::new(ModelChoice::Jcm3, pulse.clone(), fock(photons)).named("collapse_fock_ip"),
        ScenarioConfig::new(ModelChoice::Jcm1, pulse.clone(), coherent.clone()).named("collapse_coherent"),
        ScenarioConfig::new(ModelChoice::ClassicalDrive, pulse, coherent).named("collapse_classical"),
    ];
    let cfgs: Vec<ScenarioConfig> = cfgs.into_iter().map(ScenarioConfig::resolve).collect::<Result<_>>()?;
    let runs: Vec<_> = cfgs.par_iter().map(simulate).collect::<Result<_>>()?;
    let pe = |k: usize| runs[k].table.column("P_e").unwrap_or_default().to_vec();
    let out = CollapseRevival {
        photons,
        alpha: [alpha.re, alpha.im],
        tau,
        times: runs[0].table.column("t").unwrap_or_default().to_vec(),
        fock_vs_ip: sup_diff(&pe(0), &pe(1)),
        coherent_vs_classical: sup_diff(&pe(2), &pe(3)),
        fock_revival: revival(&pe(0)),
        coherent_revival: revival(&pe(2)),
        fock_p_e: pe(0),
        fock_ip_p_e: pe(1),
        coherent_p_e: pe(2),
        classical_p_e: pe(3),
        all_healthy: runs.iter().all(|r| r.summary.diagnostics.healthy),
    };
    for (what, d) in [("Fock JCM-I vs JCM-III", out.fock_vs_ip), ("coherent vs classical drive", out.coherent_vs_classical)] {
        if !(d < EQUIVALENCE_TOL) {
            return Err(AppError::sim(
                "collapse-revival",
                pulse_jcm_core::Error::Equivalence(format!("{what}: sup |ΔP_e| = {d:e}")),
            ));
        }
    }
    Ok(out)
}

impl CollapseRevival {
    pub fn table(&self) -> SeriesTable {
        let mut t = SeriesTable::new();
        t.push("t", self.times.clone());
        t.push("P_e_fock", self.fock_p_e.clone());
        t.push("P_e_fock_ip", self.fock_ip_p_e.clone());
        t.push("P_e_coherent", self.coherent_p_e.clone());
        t.push("P_e_classical", self.classical_p_e.clone());
        t
    }

    /// Writes `collapse_revival.csv` and `collapse_revival.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        ensure_writable(dir)?;
        let csv = dir.join("collapse_revival.csv");
        self.table().write_csv(&csv)?;
        check_csv(&csv, Some("t"))?;
        write_json(&dir.join("collapse_revival.json"), self)
    }
}
