//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! Steps are accepted against `abs_tol + rel_tol·|y|` in the RMS norm. After an
//! accepted step, components in `(-abs_tol, 0)` are snapped to zero and any
//! component at or below `-abs_tol` rejects the step and halves it.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::models::{excitation_weights, VectorField};
use crate::state::{IntegrationStats, Sample, State, StateError, Trajectory};

/// Autonomous first-order system `y' = f(y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[f64], dy: &mut [f64]);
    /// Whether the negativity guard applies.
    fn nonnegative(&self) -> bool {
        false
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest step before integration gives up [s].
pub const MIN_STEP: f64 = 1e-18;

/// Where trajectory samples are taken.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleGrid {
    /// `points` equally spaced times from 0 to `t_end` inclusive.
    Uniform { points: usize },
    /// `t = 0` followed by `points - 1` log-spaced times from `first` to `t_end`.
    Log { points: usize, first: f64 },
    /// Explicit times; `0` is prepended when missing.
    Explicit(Vec<f64>),
}

impl SampleGrid {
    pub fn times(&self, t_end: f64) -> Result<Vec<f64>, IntegrationError> {
        let times = match self {
            SampleGrid::Uniform { points } => {
                if *points < 2 {
                    return Err(IntegrationError::InvalidConfig("uniform grid needs at least 2 points"));
                }
                let last = (*points - 1) as f64;
                let mut t: Vec<f64> = (0..*points).map(|i| t_end * (i as f64) / last).collect();
                t[*points - 1] = t_end;
                t
            }
            SampleGrid::Log { points, first } => {
                if *points < 2 {
                    return Err(IntegrationError::InvalidConfig("log grid needs at least 2 points"));
                }
                if !(*first > 0.0 && *first <= t_end) {
                    return Err(IntegrationError::InvalidConfig("log grid start must lie in (0, t_end]"));
                }
                let mut t = vec![0.0];
                let n = *points - 1;
                if n == 1 {
                    t.push(t_end);
                } else {
                    let ratio = libm::log(t_end / first);
                    for i in 0..n {
                        t.push(first * libm::exp(ratio * (i as f64) / ((n - 1) as f64)));
                    }
                    t[n] = t_end;
                }
                t
            }
            SampleGrid::Explicit(ts) => {
                let mut t = Vec::with_capacity(ts.len() + 1);
                if ts.first().copied() != Some(0.0) {
                    t.push(0.0);
                }
                t.extend_from_slice(ts);
                t
            }
        };
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(IntegrationError::InvalidConfig("sample times must be strictly increasing"));
        }
        if times.last().is_some_and(|&t| t > t_end) {
            return Err(IntegrationError::InvalidConfig("sample times must not exceed t_end"));
        }
        Ok(times)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step; `None` means `t_end`.
    pub max_step: Option<f64>,
    /// First trial step; `None` estimates it from the initial derivative.
    pub initial_step: Option<f64>,
    pub t_end: f64,
    pub grid: SampleGrid,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn new(t_end: f64, grid: SampleGrid) -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-10, max_step: None, initial_step: None, t_end, grid, max_steps: 50_000_000 }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(IntegrationError::InvalidConfig("rel_tol must lie in (0, 1)"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(IntegrationError::InvalidConfig("abs_tol must be positive"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(IntegrationError::InvalidConfig("t_end must be positive"));
        }
        if self.max_step.is_some_and(|h| !(h > 0.0)) {
            return Err(IntegrationError::InvalidConfig("max_step must be positive"));
        }
        if self.initial_step.is_some_and(|h| !(h > 0.0)) {
            return Err(IntegrationError::InvalidConfig("initial_step must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrationError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid initial state: {0}")]
    InvalidInitialState(#[from] StateError),
    #[error("step size {h:e} s fell below the minimum at t = {t:e} s")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("non-finite state encountered at t = {t:e} s")]
    NonFiniteState { t: f64 },
    #[error("step budget exhausted at t = {t:e} s")]
    MaxStepsExceeded { t: f64 },
}

/// Piecewise quartic interpolant over the accepted steps.
#[derive(Debug, Clone, Default)]
pub struct DenseOutput {
    dim: usize,
    starts: Vec<f64>,
    steps: Vec<f64>,
    coeffs: Vec<f64>,
}

impl DenseOutput {
    fn new(dim: usize) -> Self {
        Self { dim, ..Self::default() }
    }

    fn push(&mut self, t0: f64, h: f64, c: &[Vec<f64>; 5]) {
        self.starts.push(t0);
        self.steps.push(h);
        for row in c {
            self.coeffs.extend_from_slice(row);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> usize {
        self.starts.len()
    }

    pub fn t_end(&self) -> f64 {
        match (self.starts.last(), self.steps.last()) {
            (Some(t), Some(h)) => t + h,
            _ => 0.0,
        }
    }

    /// Evaluates the interpolant at `t`, clamped to the integrated range.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        if self.starts.is_empty() {
            return;
        }
        let seg = match self.starts.partition_point(|&s| s <= t) {
            0 => 0,
            k => k - 1,
        };
        let h = self.steps[seg];
        let theta = ((t - self.starts[seg]) / h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let d = self.dim;
        let c = &self.coeffs[seg * 5 * d..(seg + 1) * 5 * d];
        for (i, o) in out.iter_mut().enumerate().take(d) {
            *o = c[i] + theta * (c[d + i] + theta1 * (c[2 * d + i] + theta * (c[3 * d + i] + theta1 * c[4 * d + i])));
        }
    }
}

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    let n = v.len().max(1) as f64;
    libm::sqrt(v.iter().zip(scale).map(|(x, s)| (x / s) * (x / s)).sum::<f64>() / n)
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn initial_step<S: OdeSystem>(sys: &S, y0: &[f64], f0: &[f64], cfg: &IntegratorConfig, h_max: f64) -> f64 {
    let n = y0.len();
    let scale: Vec<f64> = y0.iter().map(|y| cfg.abs_tol + cfg.rel_tol * y.abs()).collect();
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * cfg.t_end } else { 0.01 * d0 / d1 };
    let h0 = h0.min(h_max);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(&y1, &mut f1);
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    let dmax = d1.max(d2);
    let h1 = if !(dmax > 1e-15) { (h0 * 1e-3).max(1e-6 * cfg.t_end) } else { libm::pow(0.01 / dmax, 0.2) };
    (100.0 * h0).min(h1).min(h_max)
}

/// Integrates `sys` from `y0` at `t = 0` to `cfg.t_end`.
pub fn solve<S: OdeSystem>(
    sys: &S,
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(DenseOutput, Vec<f64>, IntegrationStats), IntegrationError> {
    cfg.validate()?;
    let n = sys.dim();
    assert_eq!(y0.len(), n, "initial state has the wrong dimension");
    if !all_finite(y0) {
        return Err(IntegrationError::NonFiniteState { t: 0.0 });
    }

    let guard = sys.nonnegative();
    let h_max = cfg.max_step.unwrap_or(cfg.t_end).min(cfg.t_end);
    let mut stats = IntegrationStats::default();
    let mut dense = DenseOutput::new(n);

    let mut t = 0.0_f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    sys.rhs(&y, &mut k1);
    stats.evaluations += 1;
    if !all_finite(&k1) {
        return Err(IntegrationError::NonFiniteState { t });
    }
    let mut h = match cfg.initial_step {
        Some(h) => h.min(h_max),
        None => {
            stats.evaluations += 1;
            initial_step(sys, &y, &k1, cfg, h_max)
        }
    };

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut scale = vec![0.0; n];
    let mut last_rejected = false;
    let mut steps = 0usize;

    while t < cfg.t_end {
        if steps >= cfg.max_steps {
            return Err(IntegrationError::MaxStepsExceeded { t });
        }
        steps += 1;
        if h < MIN_STEP {
            return Err(IntegrationError::StepSizeUnderflow { t, h });
        }
        let mut final_step = false;
        if t + h >= cfg.t_end || t + 1.01 * h >= cfg.t_end {
            h = cfg.t_end - t;
            final_step = true;
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(&tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(&tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(&tmp, &mut k6);
        for i in 0..n {
            y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(&y1, &mut k7);
        stats.evaluations += 6;

        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            scale[i] = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y1[i].abs());
        }
        let err_norm = rms_norm(&err, &scale);

        if !err_norm.is_finite() || !all_finite(&y1) || !all_finite(&k7) {
            stats.rejected += 1;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        if err_norm > 1.0 {
            stats.rejected += 1;
            h *= (0.9 * libm::pow(err_norm, -0.2)).max(0.2);
            last_rejected = true;
            continue;
        }

        if guard && y1.iter().any(|&v| v <= -cfg.abs_tol) {
            stats.rejected += 1;
            stats.negativity_rejections += 1;
            h *= 0.5;
            last_rejected = true;
            continue;
        }
        let mut snapped = false;
        for v in y1.iter_mut().filter(|_| guard) {
            if *v < 0.0 {
                *v = 0.0;
                snapped = true;
            }
        }
        if snapped {
            sys.rhs(&y1, &mut k7);
            stats.evaluations += 1;
        }

        // Dense output coefficients.
        let mut c: [Vec<f64>; 5] = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let ydiff = y1[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            c[0][i] = y[i];
            c[1][i] = ydiff;
            c[2][i] = bspl;
            c[3][i] = ydiff - h * k7[i] - bspl;
            c[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        dense.push(t, h, &c);
        stats.accepted += 1;

        t = if final_step { cfg.t_end } else { t + h };
        core::mem::swap(&mut y, &mut y1);
        core::mem::swap(&mut k1, &mut k7);

        let mut fac = (0.9 * libm::pow(err_norm.max(1e-10), -0.2)).clamp(0.2, 5.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h * fac).min(h_max);
    }

    Ok((dense, y, stats))
}

/// Integrates a model and samples it on the configured grid.
pub fn integrate(field: &VectorField, s0: &State, cfg: &IntegratorConfig) -> Result<Trajectory, IntegrationError> {
    cfg.validate()?;
    s0.validate(field.kind, &field.params)?;
    let times = cfg.grid.times(cfg.t_end)?;
    let y0 = s0.pack(field.kind);
    let (dense, y_end, stats) = solve(field, &y0, cfg)?;

    let dim = y0.len();
    let mut buf = vec![0.0; dim];
    let mut samples = Vec::with_capacity(times.len());
    for &t in &times {
        if t == 0.0 {
            buf.copy_from_slice(&y0);
        } else if t == cfg.t_end {
            buf.copy_from_slice(&y_end);
        } else {
            dense.eval(t, &mut buf);
        }
        for v in buf.iter_mut() {
            if *v < 0.0 && *v > -cfg.abs_tol {
                *v = 0.0;
            }
        }
        samples.push(Sample { t, state: State::unpack(field.kind, &buf) });
    }
    Ok(Trajectory { kind: field.kind, params: field.params, samples, stats, dense })
}

/// A sign change of a scalar observable along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// `true` for a change from negative to positive.
    pub rising: bool,
}

/// Locates sign changes of `g` along a trajectory.
///
/// `g` returns the observable and a noise floor; values inside the floor
/// count as zero and never start or end a sign interval. Brackets come from
/// the samples and are refined by bisection on the dense output.
pub fn sign_changes<G>(traj: &Trajectory, g: G) -> Vec<Crossing>
where
    G: Fn(&State) -> (f64, f64),
{
    let sign = |s: &State| {
        let (v, floor) = g(s);
        if v > floor {
            1
        } else if v < -floor {
            -1
        } else {
            0
        }
    };
    let mut out = Vec::new();
    let mut last: Option<(f64, i32)> = None;
    for sample in &traj.samples {
        let sg = sign(&sample.state);
        if sg == 0 {
            continue;
        }
        if let Some((t_prev, s_prev)) = last {
            if s_prev != sg {
                let (mut lo, mut hi) = (t_prev, sample.t);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let v = g(&traj.state_at(mid)).0;
                    if (v > 0.0) == (s_prev > 0) && v != 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(Crossing { t: 0.5 * (lo + hi), rising: sg > 0 });
            }
        }
        last = Some((sample.t, sg));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Convergence when `|f|∞ ≤ tolerance · rate_scale · max(1, |y|∞)`.
    pub tolerance: f64,
    pub max_newton_iterations: usize,
    /// Number of long-time integration attempts, each ten times longer.
    pub max_horizons: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_newton_iterations: 60, max_horizons: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SteadyStateError {
    #[error("steady state not found: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

struct Newton<'a> {
    field: &'a VectorField,
    /// Conservation weights and target, for conservative models.
    constraint: Option<(Vec<f64>, f64)>,
    m_index: usize,
    m_max: f64,
    scale: f64,
}

impl Newton<'_> {
    fn equations(&self, y: &[f64], out: &mut [f64]) {
        use crate::integrator::OdeSystem as _;
        self.field.rhs(y, out);
        if let Some((w, target)) = &self.constraint {
            let total: f64 = w.iter().zip(y).map(|(a, b)| a * b).sum();
            out[self.m_index] = self.scale * (total - target) / w.iter().sum::<f64>();
        }
    }

    fn merit(&self, y: &[f64], buf: &mut [f64]) -> f64 {
        self.equations(y, buf);
        buf.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    fn admissible(&self, y: &[f64]) -> bool {
        y.iter().enumerate().all(|(i, &v)| v >= 0.0 && (i != self.m_index || v <= self.m_max))
    }

    /// Damped Newton iteration; returns the last iterate and whether it converged.
    fn run(&self, y0: &[f64], opts: &SteadyStateOptions, iterations: &mut usize) -> (Vec<f64>, bool) {
        let n = y0.len();
        let mut y = y0.to_vec();
        let mut f = vec![0.0; n];
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        let mut trial = vec![0.0; n];
        // extra steps after convergence while they still reduce the residual
        let mut polish = 0;
        for _ in 0..opts.max_newton_iterations {
            *iterations += 1;
            if self.converged(&y) {
                polish += 1;
                if polish > 3 {
                    return (y, true);
                }
            }
            let merit = self.merit(&y, &mut f);
            if merit == 0.0 {
                let ok = self.converged(&y);
                return (y, ok);
            }
            let mut jac = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let step = 1e-6 * y[j].abs().max(1e-6);
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[j] += step;
                ym[j] -= step;
                self.equations(&yp, &mut fp);
                self.equations(&ym, &mut fm);
                for i in 0..n {
                    jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
                }
            }
            let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
            let Some(delta) = jac.lu().solve(&rhs) else {
                return (y, false);
            };
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-6 {
                for i in 0..n {
                    trial[i] = y[i] + lambda * delta[i];
                    // Newton lands on boundary roots up to rounding.
                    if trial[i] < 0.0 && trial[i] > -1e-6 * y[i].abs() {
                        trial[i] = 0.0;
                    }
                }
                if self.admissible(&trial) && self.merit(&trial, &mut fp) < merit {
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                let ok = self.converged(&y);
                return (y, ok);
            }
            y.copy_from_slice(&trial);
        }
        let ok = self.converged(&y);
        (y, ok)
    }

    fn converged(&self, y: &[f64]) -> bool {
        let s = State::unpack(self.field.kind, y);
        let threshold = self.tol_threshold(y);
        let on_manifold = match &self.constraint {
            Some((w, target)) => {
                let total: f64 = w.iter().zip(y).map(|(a, b)| a * b).sum();
                (total - target).abs() <= 1e-10 * target.abs().max(1e-300)
            }
            None => true,
        };
        on_manifold && self.field.residual(&s) <= threshold
    }

    fn tol_threshold(&self, y: &[f64]) -> f64 {
        let ymax = y.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        1e-12 * self.scale * ymax
    }
}

/// Finds a stationary state reachable from `s0`.
///
/// Conservative models are solved on the excitation manifold of `s0`. Newton
/// runs first; if it fails the state is propagated over growing horizons and
/// Newton is retried from each end point.
pub fn find_steady_state(field: &VectorField, s0: &State) -> Result<State, SteadyStateError> {
    find_steady_state_with(field, s0, &SteadyStateOptions::default())
}

pub fn find_steady_state_with(
    field: &VectorField,
    s0: &State,
    opts: &SteadyStateOptions,
) -> Result<State, SteadyStateError> {
    s0.validate(field.kind, &field.params).map_err(IntegrationError::from)?;
    let kind = field.kind;
    let p = &field.params;
    let scale = p.rate_scale();
    let m_index = kind.fields().len() - 1;
    let constraint = if kind.is_conservative() {
        let w = excitation_weights(kind, p).expect("conservative model").pack(kind);
        let target: f64 = w.iter().zip(s0.pack(kind)).map(|(a, b)| a * b).sum();
        Some((w, target))
    } else {
        None
    };
    let newton = Newton { field, constraint, m_index, m_max: p.m_total(), scale };
    let mut iterations = 0;

    let mut y = s0.pack(kind);
    if scale == 0.0 {
        return Ok(*s0);
    }
    let mut horizon = 10.0 / scale;
    let mut best = y.clone();
    for attempt in 0..=opts.max_horizons {
        let (candidate, ok) = newton.run(&y, opts, &mut iterations);
        if ok {
            return Ok(State::unpack(kind, &candidate));
        }
        best = candidate;
        if attempt == opts.max_horizons {
            break;
        }
        let cfg = IntegratorConfig::new(horizon, SampleGrid::Uniform { points: 2 }).with_tolerances(1e-12, 1e-300);
        let (_, end, _) = solve(field, &y, &cfg)?;
        y = end;
        horizon *= 10.0;
    }
    let residual = field.residual(&State::unpack(kind, &best));
    Err(SteadyStateError::NoConvergence { residual, iterations })
}
