//! Adaptive Dormand-Prince 5(4) integration of the master equation with
//! observable recording and state-health checks.

mod rhs;

pub use rhs::{lindblad_rhs, LindbladRhs};

use crate::algebra::{hermitian_eigvals_dense, CsrMatrix, Operator, StateDiagnostics, SystemState};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::num::{cabs, is_finite_c, Complex, Real};
use nalgebra::DMatrix;

/// Trace drift or negative eigenvalue that aborts an integration.
pub const CORRUPTION_TOL: f64 = 1e-6;

/// [`CORRUPTION_TOL`], widened for scalar types too coarse to resolve it.
pub fn corruption_tol<T: Real>() -> T {
    T::lit(CORRUPTION_TOL).max(T::eps() * T::lit(1e4))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T: Real> {
    pub rtol: T,
    pub atol: T,
    pub max_step: T,
    /// Times at which observables are recorded; sorted, strictly increasing.
    pub record_grid: Vec<T>,
    /// Times at which full states are kept.
    pub snapshot_times: Vec<T>,
    /// Compute the smallest eigenvalue of ρ at every record time.
    pub eigen_checks: bool,
    pub max_steps: usize,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(record_grid: Vec<T>, max_step: T) -> Self {
        Self {
            rtol: T::lit(1e-8),
            atol: T::lit(1e-10),
            max_step,
            record_grid,
            snapshot_times: Vec::new(),
            eigen_checks: true,
            max_steps: 50_000_000,
        }
    }

    /// `intervals + 1` equally spaced record times on `[t0, t1]`.
    pub fn uniform(t0: T, t1: T, intervals: usize, max_step: T) -> Self {
        Self::new(uniform_grid(t0, t1, intervals), max_step)
    }

    /// Record grid spanning the model window with the default step limit `τ/50`.
    pub fn for_window(t0: T, t1: T, width: T, intervals: usize) -> Self {
        Self::uniform(t0, t1, intervals, width / T::lit(50.0))
    }

    pub fn with_tolerances(mut self, rtol: T, atol: T) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol >= T::lit(1e-12) && self.rtol <= T::lit(1e-4)) {
            return Err(Error::InvalidArgument(format!("rtol {} outside [1e-12, 1e-4]", self.rtol)));
        }
        if !(self.atol > T::zero()) {
            return Err(Error::InvalidArgument(format!("atol must be positive, got {}", self.atol)));
        }
        if !(self.max_step > T::zero()) {
            return Err(Error::InvalidArgument(format!("max_step must be positive, got {}", self.max_step)));
        }
        if self.record_grid.is_empty() {
            return Err(Error::InvalidArgument("record grid is empty".into()));
        }
        if self.record_grid.windows(2).any(|w| !(w[1] > w[0])) || !self.record_grid.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidArgument("record grid must be finite and strictly increasing".into()));
        }
        Ok(())
    }
}

pub fn uniform_grid<T: Real>(t0: T, t1: T, intervals: usize) -> Vec<T> {
    let n = intervals.max(1);
    let h = (t1 - t0) / T::lit(n as f64);
    (0..=n).map(|k| if k == n { t1 } else { t0 + h * T::lit(k as f64) }).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Recorded observables of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    /// Emitter excitation `⟨σ⁺σ⁻⟩`.
    pub p_e: Vec<T>,
    /// `⟨a†a⟩` of oscillator 1 (zeros when absent).
    pub n_u: Vec<T>,
    /// `⟨a†a⟩` of oscillator 2 (zeros when absent).
    pub n_v: Vec<T>,
    pub n_tot: Vec<T>,
    pub trace: Vec<T>,
    /// Smallest eigenvalue of ρ; NaN where not computed.
    pub min_eigenvalue: Vec<T>,
    pub extras: Vec<(String, Vec<T>)>,
    pub snapshots: Vec<SystemState<T>>,
    pub final_state: SystemState<T>,
    pub stats: StepStats,
}

impl<T: Real> Trajectory<T> {
    pub fn series(&self, name: &str) -> Option<&[T]> {
        match name {
            "t" => Some(&self.times),
            "P_e" => Some(&self.p_e),
            "n_u" => Some(&self.n_u),
            "n_v" => Some(&self.n_v),
            "N_tot" => Some(&self.n_tot),
            "trace" => Some(&self.trace),
            "min_eig" => Some(&self.min_eigenvalue),
            _ => self.extras.iter().find(|e| e.0 == name).map(|e| e.1.as_slice()),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_trace_deviation(&self) -> T {
        self.trace.iter().fold(T::zero(), |m, &x| m.max((x - T::one()).abs()))
    }

    /// Most negative recorded eigenvalue (ignores unchecked points).
    pub fn min_recorded_eigenvalue(&self) -> T {
        self.min_eigenvalue.iter().filter(|x| **x == **x).fold(T::max_value().unwrap(), |m, &x| m.min(x))
    }
}

/// Trace deviation, Hermiticity defect and smallest eigenvalue of a state.
pub fn check_state<T: Real>(state: &SystemState<T>) -> StateDiagnostics<T> {
    state.diagnostics()
}

fn min_block_eigenvalue<T: Real>(rhs: &LindbladRhs<T>, y: &[Complex<T>]) -> Result<T> {
    let mut min = T::max_value().unwrap();
    for (idx, blk) in rhs.blocks(y) {
        let n = idx.len();
        let m = DMatrix::from_column_slice(n, n, blk);
        let vals = hermitian_eigvals_dense(&m)?;
        if let Some(&v) = vals.first() {
            min = min.min(v);
        }
    }
    Ok(min)
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<T: Real> {
    k: Vec<Vec<Complex<T>>>,
    tmp: Vec<Complex<T>>,
    y_new: Vec<Complex<T>>,
    fsal: bool,
    h: T,
    stats: StepStats,
}

struct Segment<T: Real> {
    start: T,
    end: T,
    /// Latest time at which coefficients are sampled, so every stage sees the
    /// left limit at a breakpoint.
    end_left: T,
}

impl<T: Real> Segment<T> {
    fn new(start: T, end: T) -> Self {
        let scale = end.abs().max(start.abs()).max(T::one());
        let delta = (T::eps() * T::lit(64.0) * scale).max((end - start) * T::lit(1e-12));
        let end_left = if end - delta > start { end - delta } else { start };
        Self { start, end, end_left }
    }

    fn eval_time(&self, t: T) -> T {
        if t >= self.end_left {
            self.end_left
        } else {
            t.max(self.start)
        }
    }
}

impl<T: Real> Stepper<T> {
    fn new(len: usize, h: T) -> Self {
        Self {
            k: vec![vec![Complex::default(); len]; 7],
            tmp: vec![Complex::default(); len],
            y_new: vec![Complex::default(); len],
            fsal: false,
            h,
            stats: StepStats::default(),
        }
    }

    /// Advances `y` from `seg.start` to `seg.end`.
    fn run_segment(
        &mut self,
        rhs: &mut LindbladRhs<T>,
        y: &mut Vec<Complex<T>>,
        seg: &Segment<T>,
        cfg: &IntegratorConfig<T>,
    ) -> Result<()> {
        let mut t = seg.start;
        self.fsal = false;
        let span = seg.end - seg.start;
        if !(span > T::zero()) {
            return Ok(());
        }
        let h_min = T::eps() * T::lit(16.0) * seg.end.abs().max(T::one());
        let (rtol, atol) = (cfg.rtol, cfg.atol);
        while t < seg.end {
            if self.stats.accepted + self.stats.rejected >= cfg.max_steps {
                return Err(Error::Stiffness {
                    t: t.to_f64_lossy(),
                    detail: format!("step budget of {} exhausted", cfg.max_steps),
                });
            }
            let mut h = self.h.min(cfg.max_step);
            let remaining = seg.end - t;
            if remaining <= h_min {
                // rounding sliver
                break;
            }
            let last = h >= remaining * T::lit(0.999_999) || remaining - h < h_min * T::lit(4.0);
            if last {
                h = remaining;
            }
            if h < h_min {
                return Err(Error::Stiffness {
                    t: t.to_f64_lossy(),
                    detail: format!("step size {h} below minimum {h_min}"),
                });
            }
            if !self.fsal {
                let (k0, _) = self.k.split_at_mut(1);
                rhs.eval(seg.eval_time(t), y, &mut k0[0]);
                self.stats.rhs_evals += 1;
                self.fsal = true;
            }
            for s in 1..7 {
                let a = &A[s];
                let coeffs: Vec<T> = (0..s).map(|j| h * T::lit(a[j])).collect();
                {
                    let target = if s == 6 { &mut self.y_new } else { &mut self.tmp };
                    for (i, out) in target.iter_mut().enumerate() {
                        let mut acc = y[i];
                        for (j, &c) in coeffs.iter().enumerate() {
                            if c != T::zero() {
                                acc += self.k[j][i] * c;
                            }
                        }
                        *out = acc;
                    }
                }
                let ts = seg.eval_time(if s >= 5 && last { seg.end } else { t + h * T::lit(C[s]) });
                let (head, tail) = self.k.split_at_mut(s);
                let _ = head;
                let input = if s == 6 { &self.y_new } else { &self.tmp };
                rhs.eval(ts, input, &mut tail[0]);
                self.stats.rhs_evals += 1;
            }
            let mut err = T::zero();
            let mut finite = true;
            for i in 0..y.len() {
                let mut e: Complex<T> = Complex::default();
                for j in 0..7 {
                    if E[j] != 0.0 {
                        e += self.k[j][i] * (h * T::lit(E[j]));
                    }
                }
                let yn = self.y_new[i];
                if !is_finite_c(yn) {
                    finite = false;
                    break;
                }
                let sc = atol + rtol * cabs(y[i]).max(cabs(yn));
                err = err.max(cabs(e) / sc);
            }
            if !finite || !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * T::lit(0.2);
                continue;
            }
            if err <= T::one() {
                self.stats.accepted += 1;
                std::mem::swap(y, &mut self.y_new);
                self.k.swap(0, 6);
                t = if last { seg.end } else { t + h };
                let fac = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
                };
                // a step cut short by the segment end does not shrink the next one
                self.h = if last { self.h.max(h * fac) } else { h * fac };
            } else {
                self.stats.rejected += 1;
                self.h = h * (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::one());
                if last {
                    self.fsal = true;
                }
            }
        }
        Ok(())
    }
}

/// Observable operators evaluated at every record time.
struct Probes<T: Real> {
    p_e: CsrMatrix<T>,
    n_u: Option<CsrMatrix<T>>,
    n_v: Option<CsrMatrix<T>>,
    n_tot: CsrMatrix<T>,
    extras: Vec<(String, CsrMatrix<T>)>,
}

/// Integrates `model` from `state0` over `config.record_grid`.
pub fn evolve<T: Real>(model: &ModelSpec<T>, state0: &SystemState<T>, config: &IntegratorConfig<T>) -> Result<Trajectory<T>> {
    evolve_with_observables(model, state0, config, &[])
}

/// [`evolve`] with additional named observables recorded alongside the defaults.
pub fn evolve_with_observables<T: Real>(
    model: &ModelSpec<T>,
    state0: &SystemState<T>,
    config: &IntegratorConfig<T>,
    extras: &[(String, Operator<T>)],
) -> Result<Trajectory<T>> {
    config.validate()?;
    if state0.subsystem_dims() != model.subsystem_dims() {
        return Err(Error::InvalidDimension(format!(
            "state on {:?} does not match model on {:?}",
            state0.subsystem_dims(),
            model.subsystem_dims()
        )));
    }
    let t0 = state0.time();
    let grid = &config.record_grid;
    let slack = T::lit(1e-9) * (T::one() + t0.abs());
    if grid[0] < t0 - slack {
        return Err(Error::InvalidArgument(format!("record grid starts at {} before the initial time {t0}", grid[0])));
    }
    if let Some((ws, we)) = model.window() {
        let tol = T::lit(1e-9) * (T::one() + we.abs());
        if grid[0] < ws - tol || grid[grid.len() - 1] > we + tol {
            return Err(Error::InvalidArgument(format!("record grid leaves the pulse window [{ws}, {we}]")));
        }
    }
    let diag0 = state0.diagnostics();
    if diag0.hermiticity_flagged(T::lit(1e-9)) || diag0.trace_flagged(corruption_tol()) {
        return Err(Error::InvalidArgument(format!("initial state is not a valid density matrix: {diag0:?}")));
    }
    for (name, op) in extras {
        if op.subsystem_dims() != model.subsystem_dims() {
            return Err(Error::InvalidDimension(format!("observable {name} acts on {:?}", op.subsystem_dims())));
        }
    }

    let mut rhs = LindbladRhs::new(model, Some(state0.rho()))?;
    let probes = Probes {
        p_e: model.excited_projector()?.matrix().clone(),
        n_u: if model.subsystem_dims().len() > 1 { Some(model.number(1)?.matrix().clone()) } else { None },
        n_v: if model.subsystem_dims().len() > 2 { Some(model.number(2)?.matrix().clone()) } else { None },
        n_tot: model.total_excitation()?.matrix().clone(),
        extras: extras.iter().map(|(n, o)| (n.clone(), o.matrix().clone())).collect(),
    };

    let t_final = grid[grid.len() - 1];
    let mut stops: Vec<T> = grid.iter().copied().filter(|&t| t > t0).collect();
    stops.extend(config.snapshot_times.iter().copied().filter(|&t| t > t0 && t <= t_final));
    stops.extend(model.breakpoints().iter().copied().filter(|&t| t > t0 && t < t_final));
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    stops.dedup();

    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.len()),
        p_e: Vec::with_capacity(grid.len()),
        n_u: Vec::with_capacity(grid.len()),
        n_v: Vec::with_capacity(grid.len()),
        n_tot: Vec::with_capacity(grid.len()),
        trace: Vec::with_capacity(grid.len()),
        min_eigenvalue: Vec::with_capacity(grid.len()),
        extras: extras.iter().map(|(n, _)| (n.clone(), Vec::with_capacity(grid.len()))).collect(),
        snapshots: Vec::new(),
        final_state: state0.clone(),
        stats: StepStats::default(),
    };

    let mut y = rhs.pack(state0.rho());
    let mut stepper = Stepper::new(y.len(), config.max_step);
    let mut next_record = 0;
    let mut next_snapshot = 0;
    let mut t = t0;
    let record = |t: T, y: &[Complex<T>], rhs: &LindbladRhs<T>, traj: &mut Trajectory<T>, next: &mut usize| -> Result<()> {
        while *next < grid.len() && grid[*next] <= t + slack {
            let tr = rhs.trace(y).re;
            if !((tr - T::one()).abs() <= corruption_tol()) {
                return Err(Error::StateCorruption {
                    t: t.to_f64_lossy(),
                    detail: format!("trace drifted to {tr}"),
                });
            }
            let min_eig = if config.eigen_checks {
                let m = min_block_eigenvalue(rhs, y)?;
                if m < -corruption_tol::<T>() {
                    return Err(Error::StateCorruption {
                        t: t.to_f64_lossy(),
                        detail: format!("density matrix has eigenvalue {m}"),
                    });
                }
                m
            } else {
                T::lit(f64::NAN)
            };
            traj.times.push(grid[*next]);
            traj.trace.push(tr);
            traj.min_eigenvalue.push(min_eig);
            traj.p_e.push(rhs.expectation(&probes.p_e, y).re);
            traj.n_u.push(probes.n_u.as_ref().map_or(T::zero(), |o| rhs.expectation(o, y).re));
            traj.n_v.push(probes.n_v.as_ref().map_or(T::zero(), |o| rhs.expectation(o, y).re));
            traj.n_tot.push(rhs.expectation(&probes.n_tot, y).re);
            for (k, (_, op)) in probes.extras.iter().enumerate() {
                traj.extras[k].1.push(rhs.expectation(op, y).re);
            }
            *next += 1;
        }
        Ok(())
    };
    record(t, &y, &rhs, &mut traj, &mut next_record)?;
    for &stop in &stops {
        let seg = Segment::new(t, stop);
        stepper.run_segment(&mut rhs, &mut y, &seg, config).map_err(|e| match e {
            Error::Stiffness { t, detail } => Error::Stiffness { t, detail: format!("{} model: {detail}", model.kind().name()) },
            other => other,
        })?;
        t = stop;
        record(t, &y, &rhs, &mut traj, &mut next_record)?;
        while next_snapshot < config.snapshot_times.len() && config.snapshot_times[next_snapshot] <= t + slack {
            if config.snapshot_times[next_snapshot] >= t0 - slack {
                traj.snapshots.push(rhs.to_state(&y, t)?);
            }
            next_snapshot += 1;
        }
    }
    traj.final_state = rhs.to_state(&y, t)?;
    traj.stats = stepper.stats;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::sigma_minus;
    use crate::models::TimeDependentOperator;
    use crate::num::real;

    fn decay_model(gamma: f64) -> ModelSpec<f64> {
        let ch = TimeDependentOperator::constant(sigma_minus(), real(gamma.sqrt()));
        ModelSpec::custom(vec![2], TimeDependentOperator::new(), vec![ch]).unwrap()
    }

    fn excited() -> SystemState<f64> {
        SystemState::pure(&[real(0.0), real(1.0)], vec![2], 0.0).unwrap()
    }

    #[test]
    fn pure_decay_rhs() {
        let d = lindblad_rhs(&decay_model(1.0), 0.0, excited().rho()).unwrap();
        assert!((d[(1, 1)].re + 1.0).abs() < 1e-15);
        assert!((d[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_decay_is_accurate() {
        let cfg = IntegratorConfig::uniform(0.0, 10.0, 200, 0.02);
        let tr = evolve(&decay_model(1.0), &excited(), &cfg).unwrap();
        let worst = tr.times.iter().zip(&tr.p_e).map(|(t, p)| (p - (-t).exp()).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn empty_model_is_identity() {
        let m = ModelSpec::custom(vec![2], TimeDependentOperator::new(), Vec::new()).unwrap();
        let psi = [real(0.6), Complex::new(0.0, 0.8)];
        let s = SystemState::pure(&psi, vec![2], 0.0).unwrap();
        let tr = evolve(&m, &s, &IntegratorConfig::uniform(0.0, 3.0, 3, 0.1)).unwrap();
        assert_eq!(tr.final_state.rho(), s.rho());
    }

    #[test]
    fn config_validation() {
        let mut c = IntegratorConfig::uniform(0.0, 1.0, 10, 0.1);
        assert!(c.validate().is_ok());
        c.rtol = 1e-2;
        assert!(c.validate().is_err());
        let c = IntegratorConfig::<f64>::new(vec![0.0, 1.0, 0.5], 0.1);
        assert!(c.validate().is_err());
    }

    #[test]
    fn segment_samples_left_limit() {
        let s = Segment::new(0.0, 2.0);
        assert!(s.eval_time(2.0) < 2.0);
        assert!(s.eval_time(2.0) > 2.0 - 1e-10);
        assert_eq!(s.eval_time(1.0), 1.0);
    }
}
