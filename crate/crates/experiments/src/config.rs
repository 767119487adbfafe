//! TOML scenario files.
//!
//! A scenario names one model, one input pulse and one input state. Omitted
//! optional values are filled in by [`ScenarioConfig::resolve`], and the
//! resolved form is what gets hashed and embedded in the JSON summary.

use std::path::{Path, PathBuf};

use pulse_jcm_core::models::{FieldStateSpec, TlsState};
use pulse_jcm_core::pulses::{self, CouplingPolicy, ExponentialKind};
use pulse_jcm_core::{Complex, FieldStateSpec64, IntegratorConfig64, PulseShape64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

/// Window length, in units of the pulse width, behind an exponential edge.
const EXP_TAIL_WIDTHS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    ReferenceJcm,
    DampedJcm,
    Jcm1,
    Jcm2,
    Jcm3,
    ClassicalDrive,
    Oracle,
}

impl ModelChoice {
    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::ReferenceJcm => "reference-jcm",
            ModelChoice::DampedJcm => "damped-jcm",
            ModelChoice::Jcm1 => "jcm1",
            ModelChoice::Jcm2 => "jcm2",
            ModelChoice::Jcm3 => "jcm3",
            ModelChoice::ClassicalDrive => "classical-drive",
            ModelChoice::Oracle => "oracle",
        }
    }

    /// Number of oscillators in the master equation.
    pub fn oscillators(self) -> usize {
        match self {
            ModelChoice::Jcm2 | ModelChoice::Jcm3 => 2,
            ModelChoice::ClassicalDrive | ModelChoice::Oracle => 0,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    #[default]
    Gaussian,
    DecayingExponential,
    RisingExponential,
}

/// Temporal mode. `tau` is the amplitude standard deviation for a Gaussian and
/// the inverse rate for the exponentials; `t_center` is the Gaussian center or
/// the exponential edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    #[serde(default)]
    pub shape: PulseKind,
    pub tau: f64,
    pub t_center: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
}

impl PulseConfig {
    pub fn gaussian(tau: f64) -> Self {
        Self { shape: PulseKind::Gaussian, tau, t_center: None, t_start: None, t_end: None }
    }

    fn resolve(&mut self) {
        let tau = self.tau;
        match self.shape {
            PulseKind::Gaussian => {
                let (t0, tc, t1) = pulses::standard_window(tau);
                let tc = *self.t_center.get_or_insert(tc);
                self.t_start.get_or_insert(t0.min(tc - 6.0 * tau));
                self.t_end.get_or_insert(t1.max(tc + 6.0 * tau + 5.0));
            }
            PulseKind::DecayingExponential => {
                let tc = *self.t_center.get_or_insert(0.0);
                self.t_start.get_or_insert(tc);
                self.t_end.get_or_insert(tc + EXP_TAIL_WIDTHS * tau);
            }
            PulseKind::RisingExponential => {
                let tc = *self.t_center.get_or_insert(EXP_TAIL_WIDTHS * tau);
                self.t_start.get_or_insert(tc - EXP_TAIL_WIDTHS * tau);
                self.t_end.get_or_insert(tc + 5.0);
            }
        }
    }

    fn check(&self, key: &str, errs: &mut Vec<String>) {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            errs.push(format!("{key}.tau: must be positive, got {}", self.tau));
        }
        for (k, v) in [("t_center", self.t_center), ("t_start", self.t_start), ("t_end", self.t_end)] {
            if v.is_some_and(|x| !x.is_finite()) {
                errs.push(format!("{key}.{k}: must be finite"));
            }
        }
        if let (Some(a), Some(b)) = (self.t_start, self.t_end) {
            if !(b > a) {
                errs.push(format!("{key}.t_end: must exceed t_start ({a}), got {b}"));
            }
        }
    }

    /// Builds the pulse; call on a resolved config.
    pub fn build(&self) -> pulse_jcm_core::Result<PulseShape64> {
        let (tc, t0, t1) = (self.t_center.unwrap_or(0.0), self.t_start.unwrap_or(0.0), self.t_end.unwrap_or(0.0));
        match self.shape {
            PulseKind::Gaussian => pulses::gaussian_pulse(self.tau, tc, t0, t1),
            PulseKind::DecayingExponential => {
                pulses::exponential_pulse(1.0 / self.tau, tc, ExponentialKind::Decaying, t0, t1)
            }
            PulseKind::RisingExponential => {
                pulses::exponential_pulse(1.0 / self.tau, tc, ExponentialKind::Rising, t0, t1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TlsChoice {
    #[default]
    Ground,
    Excited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub n: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldConfig {
    #[default]
    Vacuum,
    Fock {
        n: usize,
    },
    Coherent {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Superposition {
        terms: Vec<Term>,
    },
}

impl FieldConfig {
    pub fn spec(&self) -> FieldStateSpec64 {
        match self {
            FieldConfig::Vacuum => FieldStateSpec::Vacuum,
            FieldConfig::Fock { n } => FieldStateSpec::Fock(*n),
            FieldConfig::Coherent { re, im } => FieldStateSpec::Coherent(Complex::new(*re, *im)),
            FieldConfig::Superposition { terms } => {
                FieldStateSpec::Superposition(terms.iter().map(|t| (Complex::new(t.re, t.im), t.n)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    #[serde(default)]
    pub tls: TlsChoice,
    #[serde(default)]
    pub field: FieldConfig,
}

impl InputConfig {
    pub fn tls_state(&self) -> TlsState {
        match self.tls {
            TlsChoice::Ground => TlsState::Ground,
            TlsChoice::Excited => TlsState::Excited,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub n_u: Option<usize>,
    pub n_v: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default = "default_eps")]
    pub eps_low: f64,
    #[serde(default = "default_eps")]
    pub eps_high: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { eps_low: default_eps(), eps_high: default_eps() }
    }
}

fn default_eps() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Defaults to a fiftieth of the pulse width.
    pub max_step: Option<f64>,
    /// Number of record intervals across the window.
    #[serde(default = "default_records")]
    pub record_points: usize,
    #[serde(default = "default_true")]
    pub eigen_checks: bool,
    /// Step budget; exceeding it is reported as stiffness.
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: default_rtol(),
            atol: default_atol(),
            max_step: None,
            record_points: default_records(),
            eigen_checks: true,
            max_steps: default_max_steps(),
        }
    }
}

fn default_rtol() -> f64 {
    1e-8
}

fn default_atol() -> f64 {
    1e-10
}

fn default_records() -> usize {
    400
}

fn default_max_steps() -> usize {
    50_000_000
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { bins: default_bins() }
    }
}

fn default_bins() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// File stem of the CSV/JSON pair; defaults to the scenario name.
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub model: ModelChoice,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_refl: f64,
    pub pulse: PulseConfig,
    /// Pick-up mode; defaults to the input pulse.
    pub pickup: Option<PulseConfig>,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// Extra CSV columns: `N_tot`, `min_eig`, `sigma_x`, `sigma_y`, `p<k>_u`, `p<k>_v`.
    #[serde(default)]
    pub observables: Vec<String>,
    #[serde(default)]
    pub oracle: OracleSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_gamma() -> f64 {
    1.0
}

/// Parsed `p<k>_<mode>` observable.
pub fn parse_fock_projector(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix('p')?;
    let (k, mode) = rest.split_once('_')?;
    let slot = match mode {
        "u" => 1,
        "v" => 2,
        _ => return None,
    };
    Some((k.parse().ok()?, slot))
}

impl ScenarioConfig {
    pub fn new(model: ModelChoice, pulse: PulseConfig, field: FieldConfig) -> Self {
        Self {
            name: None,
            model,
            gamma: default_gamma(),
            gamma_refl: 0.0,
            pulse,
            pickup: None,
            input: InputConfig { tls: TlsChoice::Ground, field },
            truncation: TruncationConfig::default(),
            policy: PolicyConfig::default(),
            integrator: IntegratorSettings::default(),
            observables: Vec::new(),
            oracle: OracleSettings::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// Parses and resolves a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: ScenarioConfig = toml::from_str(text).map_err(|e| AppError::invalid(e.to_string()))?;
        raw.resolve()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            AppError::Validation(errs) => {
                AppError::Validation(errs.into_iter().map(|m| format!("{}: {m}", path.display())).collect())
            }
            other => other,
        })
    }

    /// Checks ranges, fills every optional value and checks again against the
    /// filled values (pulse margins, truncations).
    pub fn resolve(mut self) -> Result<Self> {
        let mut errs = self.check_raw();
        if !errs.is_empty() {
            return Err(AppError::Validation(errs));
        }
        self.name.get_or_insert_with(|| self.model.name().to_string());
        self.pulse.resolve();
        if self.model == ModelChoice::Jcm2 && self.pickup.is_none() {
            self.pickup = Some(self.pulse.clone());
        }
        if let Some(p) = self.pickup.as_mut() {
            p.t_start.get_or_insert(self.pulse.t_start.unwrap_or(0.0));
            p.t_end.get_or_insert(self.pulse.t_end.unwrap_or(0.0));
            p.resolve();
        }
        let min_u = self.input.field.spec().min_truncation();
        if self.model.oscillators() > 0 {
            self.truncation.n_u.get_or_insert(min_u);
        } else {
            self.truncation.n_u = None;
        }
        if self.model.oscillators() == 2 {
            let nu = self.truncation.n_u.unwrap_or(min_u);
            self.truncation.n_v.get_or_insert(nu);
        } else {
            self.truncation.n_v = None;
        }
        self.integrator.max_step.get_or_insert(self.pulse.tau / 50.0);
        self.output.dir.get_or_insert_with(|| PathBuf::from("out"));
        let stem = self.name.clone().unwrap_or_default();
        self.output.stem.get_or_insert(stem);

        self.check_resolved(&mut errs);
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(AppError::Validation(errs))
        }
    }

    fn check_raw(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            errs.push(format!("gamma: must be a non-negative rate, got {}", self.gamma));
        }
        if !(self.gamma_refl >= 0.0 && self.gamma_refl.is_finite()) {
            errs.push(format!("gamma_refl: must be a non-negative rate, got {}", self.gamma_refl));
        }
        if self.gamma_refl > 0.0 && matches!(self.model, ModelChoice::ReferenceJcm | ModelChoice::DampedJcm) {
            errs.push("gamma_refl: not available for the reference models".into());
        }
        self.pulse.check("pulse", &mut errs);
        if let Some(p) = &self.pickup {
            p.check("pickup", &mut errs);
            if self.model != ModelChoice::Jcm2 {
                errs.push(format!("pickup: only the jcm2 model has a pick-up mode, model is {}", self.model.name()));
            }
        }
        let pol = &self.policy;
        if CouplingPolicy::new(pol.eps_low, pol.eps_high).is_err() {
            errs.push(format!(
                "policy: eps_low and eps_high must lie in (0, 1e-6], got {} and {}",
                pol.eps_low, pol.eps_high
            ));
        }
        let int = &self.integrator;
        if !(int.rtol >= 1e-12 && int.rtol <= 1e-4) {
            errs.push(format!("integrator.rtol: must lie in [1e-12, 1e-4], got {}", int.rtol));
        }
        if !(int.atol > 0.0 && int.atol.is_finite()) {
            errs.push(format!("integrator.atol: must be positive, got {}", int.atol));
        }
        if int.max_step.is_some_and(|h| !(h > 0.0 && h.is_finite())) {
            errs.push("integrator.max_step: must be positive".into());
        }
        if int.max_steps == 0 {
            errs.push("integrator.max_steps: must be at least 1".into());
        }
        if int.record_points == 0 {
            errs.push("integrator.record_points: must be at least 1".into());
        }
        if self.name.as_deref().is_some_and(|n| n.is_empty() || n.contains(['/', '\\'])) {
            errs.push("name: must be non-empty and free of path separators".into());
        }
        if self.output.stem.as_deref().is_some_and(|n| n.is_empty() || n.contains(['/', '\\'])) {
            errs.push("output.stem: must be non-empty and free of path separators".into());
        }
        self.check_input(&mut errs);
        self.check_observables(&mut errs);
        errs
    }

    fn check_input(&self, errs: &mut Vec<String>) {
        let field = &self.input.field;
        match field {
            FieldConfig::Coherent { re, im } if !(re.is_finite() && im.is_finite()) => {
                errs.push("input.field: coherent amplitude must be finite".into());
            }
            FieldConfig::Superposition { terms } => {
                let norm: f64 = terms.iter().map(|t| t.re * t.re + t.im * t.im).sum();
                if terms.is_empty() || (norm - 1.0).abs() > 1e-10 {
                    errs.push(format!("input.field.terms: amplitudes must be normalized, squared norm is {norm}"));
                }
            }
            _ => {}
        }
        match self.model {
            ModelChoice::ClassicalDrive => {
                if !matches!(field, FieldConfig::Coherent { .. } | FieldConfig::Vacuum) {
                    errs.push("input.field: classical-drive takes a coherent amplitude (or vacuum)".into());
                }
            }
            ModelChoice::Oracle => {
                if !matches!(field, FieldConfig::Vacuum | FieldConfig::Fock { n: 0..=2 }) {
                    errs.push("input.field: the time-bin oracle takes Fock states with at most 2 photons".into());
                }
                if self.input.tls != TlsChoice::Ground {
                    errs.push("input.tls: the time-bin oracle starts from the ground state".into());
                }
                if self.oracle.bins < 2 {
                    errs.push("oracle.bins: need at least 2 bins".into());
                }
            }
            _ => {}
        }
        if self.model.oscillators() > 0 {
            let need = field.spec().min_truncation();
            if let Some(nu) = self.truncation.n_u {
                if nu < need || nu == 0 {
                    errs.push(format!("truncation.n_u: {nu} cannot hold the input state (need {need})"));
                }
            }
        } else if self.truncation.n_u.is_some() {
            errs.push(format!("truncation.n_u: model {} has no oscillator", self.model.name()));
        }
        match (self.model.oscillators(), self.truncation.n_v) {
            (2, Some(0)) => errs.push("truncation.n_v: must be at least 1".into()),
            (n, Some(_)) if n < 2 => {
                errs.push(format!("truncation.n_v: model {} has no second oscillator", self.model.name()))
            }
            _ => {}
        }
    }

    fn check_observables(&self, errs: &mut Vec<String>) {
        for name in &self.observables {
            let ok = match name.as_str() {
                "N_tot" | "min_eig" | "sigma_x" | "sigma_y" => self.model != ModelChoice::Oracle,
                other => match parse_fock_projector(other) {
                    Some((_, slot)) => slot <= self.model.oscillators(),
                    None => false,
                },
            };
            if !ok {
                errs.push(format!("observables: `{name}` is unknown or unavailable for model {}", self.model.name()));
            }
        }
        let mut seen = self.observables.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            errs.push("observables: duplicate entries".into());
        }
    }

    fn check_resolved(&self, errs: &mut Vec<String>) {
        if let Err(e) = self.pulse.build() {
            errs.push(format!("pulse: {e}"));
        }
        if let Some(p) = &self.pickup {
            if p.t_start != self.pulse.t_start || p.t_end != self.pulse.t_end {
                errs.push("pickup: window must coincide with the input pulse window".into());
            } else if let Err(e) = p.build() {
                errs.push(format!("pickup: {e}"));
            }
        }
        if let Some(nu) = self.truncation.n_u {
            if let Err(e) = self.input.field.spec().amplitudes(nu) {
                errs.push(format!("truncation.n_u: {e}"));
            }
            for name in &self.observables {
                if let Some((k, slot)) = parse_fock_projector(name) {
                    let cap = if slot == 1 { nu } else { self.truncation.n_v.unwrap_or(0) };
                    if k > cap {
                        errs.push(format!("observables: `{name}` exceeds the truncation {cap}"));
                    }
                }
            }
        }
        if let Err(e) = self.integrator_config(self.pulse.t_start.unwrap_or(0.0), self.pulse.t_end.unwrap_or(0.0)).validate() {
            errs.push(format!("integrator: {e}"));
        }
    }

    pub fn policy(&self) -> CouplingPolicy<f64> {
        CouplingPolicy { eps_low: self.policy.eps_low, eps_high: self.policy.eps_high }
    }

    pub fn integrator_config(&self, t0: f64, t1: f64) -> IntegratorConfig64 {
        let int = &self.integrator;
        let mut cfg = IntegratorConfig64::uniform(t0, t1, int.record_points, int.max_step.unwrap_or(self.pulse.tau / 50.0))
            .with_tolerances(int.rtol, int.atol);
        cfg.eigen_checks = int.eigen_checks;
        cfg.max_steps = int.max_steps;
        cfg
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.model.name())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(self.display_name())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario configs always serialize")
    }

    /// SHA-256 of the canonical JSON encoding, output location excluded.
    pub fn content_hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        content_hash(&c)
    }
}

pub fn content_hash<S: Serialize>(value: &S) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}
