//! Time stepping, sampling and steady-state detection.
//!
//! The state is advanced as 16 reals (see [`DensityMatrix::to_packed`]) by a
//! Dormand–Prince 5(4) pair with a mixed absolute/relative RMS error norm.
//! Steps are capped at τ/10 and clipped to land exactly on each sample time.
//! Every sample is checked for trace and positivity; a violation aborts the
//! run instead of being repaired.

use crate::drive;
use crate::error::{Error, Result};
use crate::liouvillian::master_rhs;
use crate::model::{DensityMatrix, Scenario, PACKED_LEN};
use crate::observables::ObservableRecord;

type State = [f64; PACKED_LEN];

const MAX_STEPS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub state: DensityMatrix,
    pub obs: ObservableRecord,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationStats {
    pub steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Default for IntegrationStats {
    fn default() -> Self {
        IntegrationStats {
            steps: 0,
            rejected_steps: 0,
            rhs_evals: 0,
            max_trace_error: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadySummary {
    pub time: f64,
    pub state: DensityMatrix,
    pub record: ObservableRecord,
    pub doublet_population: f64,
    pub doublet_purity: f64,
    pub abs_rho21: f64,
    /// Largest spread of the monitored observables over the trailing window.
    pub max_change: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub steady: Option<SteadySummary>,
    pub stats: IntegrationStats,
    /// Time after which both pulses are below 10⁻⁶ of their peaks.
    pub pulses_off: f64,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Sample grid `t_start + k·dt`, `k = 0..=floor((t_end − t_start)/dt)`.
pub fn sample_times(t_start: f64, t_end: f64, dt: f64) -> Vec<f64> {
    let n = ((t_end - t_start) / dt + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| t_start + k as f64 * dt).collect();
    if let Some(last) = times.last_mut() {
        if (*last - t_end).abs() <= 1e-9 * dt {
            *last = t_end;
        }
    }
    times
}

struct Rhs<'a> {
    scenario: &'a Scenario,
    evals: usize,
}

impl Rhs<'_> {
    fn eval(&mut self, t: f64, y: &State) -> State {
        self.evals += 1;
        let rho = DensityMatrix::from_packed(y);
        master_rhs(t, &rho, &self.scenario.params, &self.scenario.drive).to_packed()
    }
}

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for i in 0..PACKED_LEN {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn finite(y: &State) -> bool {
    y.iter().all(|x| x.is_finite())
}

/// Builds a sample and applies the physicality gate.
fn record(
    time: f64,
    y: &State,
    scenario: &Scenario,
    stats: &mut IntegrationStats,
) -> Result<Sample> {
    if !finite(y) {
        return Err(Error::NonFinite { time });
    }
    let state = DensityMatrix::from_packed(y);
    let obs = ObservableRecord::of(time, &state);
    stats.max_trace_error = stats.max_trace_error.max(obs.trace_error);
    stats.min_eigenvalue = stats.min_eigenvalue.min(obs.min_eigenvalue);
    if !(obs.trace_error <= scenario.trace_tol) || !(obs.min_eigenvalue >= -scenario.pos_tol) {
        return Err(Error::Physicality {
            time,
            trace_error: obs.trace_error,
            min_eigenvalue: obs.min_eigenvalue,
        });
    }
    Ok(Sample { time, state, obs })
}

// Dormand–Prince 5(4) coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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

struct Dopri<'a> {
    rhs: Rhs<'a>,
    rtol: f64,
    atol: f64,
}

impl Dopri<'_> {
    fn error_norm(&self, y: &State, y_new: &State, err: &State) -> f64 {
        let mut acc = 0.0;
        for i in 0..PACKED_LEN {
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            let r = err[i] / sc;
            acc += r * r;
        }
        (acc / PACKED_LEN as f64).sqrt()
    }

    fn rms(&self, y0: &State, v: &State) -> f64 {
        let mut acc = 0.0;
        for i in 0..PACKED_LEN {
            let r = v[i] / (self.atol + self.rtol * y0[i].abs());
            acc += r * r;
        }
        (acc / PACKED_LEN as f64).sqrt()
    }

    /// Starting step from the usual two-evaluation estimate.
    fn initial_step(&mut self, t: f64, y: &State, f0: &State, h_max: f64) -> f64 {
        let d0 = self.rms(y, y);
        let d1 = self.rms(y, f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(h_max);
        let y1 = axpy(y, &[(1.0, f0)], h0);
        let f1 = self.rhs.eval(t + h0, &y1);
        let mut diff = [0.0; PACKED_LEN];
        for i in 0..PACKED_LEN {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = self.rms(y, &diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(h_max)
    }

    /// One attempted step. Returns `(y_new, f_new, error_norm)`.
    fn attempt(&mut self, t: f64, y: &State, k1: &State, h: f64) -> (State, State, f64) {
        let k2 = self.rhs.eval(t + C2 * h, &axpy(y, &[(A21, k1)], h));
        let k3 = self
            .rhs
            .eval(t + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h));
        let k4 = self.rhs.eval(
            t + C4 * h,
            &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h),
        );
        let k5 = self.rhs.eval(
            t + C5 * h,
            &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = self.rhs.eval(
            t + h,
            &axpy(
                y,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ),
        );
        let y_new = axpy(
            y,
            &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            h,
        );
        let k7 = self.rhs.eval(t + h, &y_new);
        let mut err = [0.0; PACKED_LEN];
        for i in 0..PACKED_LEN {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = self.error_norm(y, &y_new, &err);
        (y_new, k7, e)
    }
}

/// Adaptive integration of a scenario over its sample grid.
pub fn integrate(scenario: &Scenario) -> Result<Trajectory> {
    scenario.validate()?;
    let times = sample_times(scenario.t_start, scenario.t_end, scenario.sample_interval);
    let h_max = scenario.drive.tau / 10.0;

    let mut stats = IntegrationStats::default();
    let mut samples = Vec::with_capacity(times.len());
    let mut y = scenario.initial_state.to_packed();
    let mut t = times[0];
    samples.push(record(t, &y, scenario, &mut stats)?);

    let mut solver = Dopri {
        rhs: Rhs { scenario, evals: 0 },
        rtol: scenario.rtol,
        atol: scenario.atol,
    };
    let mut f = solver.rhs.eval(t, &y);
    let mut h = solver.initial_step(t, &y, &f, h_max);

    for &t_target in &times[1..] {
        while t < t_target {
            if stats.steps + stats.rejected_steps >= MAX_STEPS {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
            let remaining = t_target - t;
            let landing = h >= remaining;
            let h_try = if landing { remaining } else { h };
            if h_try < 1e-12 * t.abs().max(1.0) && !landing {
                return Err(Error::StepUnderflow {
                    time: t,
                    step: h_try,
                });
            }
            let (y_new, f_new, err) = solver.attempt(t, &y, &f, h_try);
            if err.is_nan() {
                return Err(Error::NonFinite { time: t + h_try });
            }
            if err <= 1.0 {
                t = if landing { t_target } else { t + h_try };
                y = y_new;
                f = f_new;
                stats.steps += 1;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a clipped landing step says nothing about the step we wanted
                h = if landing {
                    h.max(h_try * fac)
                } else {
                    h_try * fac
                }
                .min(h_max);
            } else {
                stats.rejected_steps += 1;
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h < 1e-12 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { time: t, step: h });
                }
            }
        }
        samples.push(record(t, &y, scenario, &mut stats)?);
    }
    stats.rhs_evals = solver.rhs.evals;
    finish(scenario, samples, stats)
}

/// Classical fixed-step RK4 over the same sample grid; every sample
/// interval is split into equal substeps no longer than `dt`.
pub fn integrate_fixed_step(scenario: &Scenario, dt: f64) -> Result<Trajectory> {
    scenario.validate()?;
    let limit = scenario.drive.tau / 40.0;
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::invalid(
            "dt",
            format!("need 0 < dt <= tau/40 = {limit}, got {dt}"),
        ));
    }
    let times = sample_times(scenario.t_start, scenario.t_end, scenario.sample_interval);
    let mut stats = IntegrationStats::default();
    let mut samples = Vec::with_capacity(times.len());
    let mut rhs = Rhs { scenario, evals: 0 };
    let mut y = scenario.initial_state.to_packed();
    samples.push(record(times[0], &y, scenario, &mut stats)?);

    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / dt - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for k in 0..n {
            let t = a + k as f64 * h;
            let k1 = rhs.eval(t, &y);
            let k2 = rhs.eval(t + 0.5 * h, &axpy(&y, &[(0.5, &k1)], h));
            let k3 = rhs.eval(t + 0.5 * h, &axpy(&y, &[(0.5, &k2)], h));
            let k4 = rhs.eval(t + h, &axpy(&y, &[(1.0, &k3)], h));
            y = axpy(
                &y,
                &[
                    (1.0 / 6.0, &k1),
                    (2.0 / 6.0, &k2),
                    (2.0 / 6.0, &k3),
                    (1.0 / 6.0, &k4),
                ],
                h,
            );
            stats.steps += 1;
        }
        samples.push(record(b, &y, scenario, &mut stats)?);
    }
    stats.rhs_evals = rhs.evals;
    finish(scenario, samples, stats)
}

fn finish(
    scenario: &Scenario,
    samples: Vec<Sample>,
    stats: IntegrationStats,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        samples,
        steady: None,
        stats,
        pulses_off: drive::pulses_off_after(&scenario.drive),
    };
    traj.steady = detect_steady_state(&traj, scenario.steady.window, scenario.steady.tol).ok();
    Ok(traj)
}

/// Reads the steady state off the trailing `window` of a trajectory.
///
/// Converged when `ρ₁₁+ρ₂₂`, `|ρ₂₁|` and the doublet purity each vary by
/// less than `tol` over the window. The trajectory must extend at least
/// `window` past the time both pulses switch off.
pub fn detect_steady_state(traj: &Trajectory, window: f64, tol: f64) -> Result<SteadySummary> {
    let (first, last) = match (traj.samples.first(), traj.samples.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InsufficientData("empty trajectory".into())),
    };
    if !(window > 0.0) {
        return Err(Error::invalid(
            "window",
            format!("must be > 0, got {window}"),
        ));
    }
    let span = last.time - first.time;
    if window > span {
        return Err(Error::InsufficientData(format!(
            "window {window} exceeds trajectory span {span}"
        )));
    }
    let window_start = last.time - window;
    if window_start < traj.pulses_off {
        return Err(Error::InsufficientData(format!(
            "trajectory ends at t = {}, but the pulses only switch off at t = {}; need {window} more past that",
            last.time, traj.pulses_off
        )));
    }

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let eps = 1e-9 * window;
    for s in traj
        .samples
        .iter()
        .rev()
        .take_while(|s| s.time >= window_start - eps)
    {
        let v = [
            s.obs.doublet_population(),
            s.obs.c21.norm(),
            s.obs.doublet_purity,
        ];
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let max_change = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    Ok(SteadySummary {
        time: last.time,
        state: last.state,
        record: last.obs,
        doublet_population: last.obs.doublet_population(),
        doublet_purity: last.obs.doublet_purity,
        abs_rho21: last.obs.c21.norm(),
        max_change,
        converged: max_change < tol,
    })
}
