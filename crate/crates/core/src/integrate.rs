//! Adaptive Dormand–Prince 5(4) integration with PI step-size control.
//!
//! This is the independent numerical route for the growth law and the
//! competition dynamics. It only ever uses the right-hand side of the ODE, so
//! agreement with [`crate::kinetics`] is a genuine check of the closed forms.
//!
//! Hyperbolic trajectories (`p > 1`) are followed until either the value
//! exceeds [`IntegratorConfig::blowup_guard`] or the step size can no longer
//! advance time. The blow-up time is then estimated from the last accepted
//! points using the local form `c ∝ (t* - t)^(-1/(p-1))`, under which
//! `c^(1-p)` is linear in `t`.

use crate::error::{Error, Result};
use crate::kinetics::{self, GrowthSpec, GrowthValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    /// Absolute tolerance in reference units.
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Values above this stop the integration as a detected blow-up.
    pub blowup_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_steps: 200_000,
            blowup_guard: 1e300,
        }
    }
}

impl IntegratorConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(name, "positive and finite", v))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("blowup_guard", self.blowup_guard)?;
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps", "positive", 0.0));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Integrated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// The trajectory diverges; `t_est` is the estimated blow-up time.
    BlowupDetected { t_est: f64 },
}

/// A sampled trajectory `(time, value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCurve {
    pub samples: Vec<(f64, f64)>,
    pub method: Method,
    pub terminated: Termination,
}

impl GrowthCurve {
    pub fn last(&self) -> (f64, f64) {
        *self.samples.last().expect("curves are never empty")
    }

    /// Linear interpolation between samples; `None` outside the covered span.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        interpolate(&self.samples, t)
    }
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> Option<f64> {
    let (first, last) = (samples.first()?, samples.last()?);
    if t < first.0 || t > last.0 {
        return None;
    }
    let k = samples.partition_point(|&(s, _)| s < t);
    if samples[k].0 == t || k == 0 {
        return Some(samples[k].1);
    }
    let (t0, v0) = samples[k - 1];
    let (t1, v1) = samples[k];
    Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
}

/// Samples the closed form at `times`. Sampling stops at the first time at or
/// past blow-up, which is then reported as the termination.
pub fn closed_form_curve(spec: &GrowthSpec, times: &[f64]) -> GrowthCurve {
    let mut samples = Vec::with_capacity(times.len());
    let mut terminated = Termination::Completed;
    for &t in times {
        match kinetics::principal_at(spec, t) {
            GrowthValue::Finite(v) => samples.push((t, v)),
            GrowthValue::Diverged => {
                terminated = Termination::BlowupDetected {
                    t_est: kinetics::blowup_time(spec).unwrap_or(t),
                };
                break;
            }
        }
    }
    GrowthCurve {
        samples,
        method: Method::ClosedForm,
        terminated,
    }
}

/// Integrates `dc/dt = i c^p` from `0` to `t_end`, sampling at accepted steps.
pub fn integrate_growth(
    spec: &GrowthSpec,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<GrowthCurve> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain("t_end", "positive and finite", t_end));
    }
    let system = GrowthLaw {
        rate: spec.rate(),
        order: spec.order(),
    };
    let solution = solve(&system, &[spec.principal()], t_end, config)?;
    let samples: Vec<(f64, f64)> = solution
        .times
        .iter()
        .copied()
        .zip(solution.states.iter().copied())
        .collect();
    let terminated = match solution.stop {
        Stop::Reached => Termination::Completed,
        Stop::Guard | Stop::Underflow if spec.order() > 1.0 => Termination::BlowupDetected {
            t_est: estimate_blowup(&samples, spec.order()),
        },
        Stop::Guard => {
            return Err(Error::ValueOverflow {
                t: samples.last().map_or(0.0, |s| s.0),
            })
        }
        Stop::Underflow => {
            return Err(Error::StepUnderflow {
                t: samples.last().map_or(0.0, |s| s.0),
            })
        }
    };
    Ok(GrowthCurve {
        samples,
        method: Method::Integrated,
        terminated,
    })
}

/// Largest relative deviation of the integrated curve from the closed form,
/// over the accepted steps. Requires `t_end` before any blow-up.
pub fn max_rel_error_vs_closed_form(
    spec: &GrowthSpec,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<f64> {
    if let Some(t_star) = kinetics::blowup_time(spec) {
        if t_end >= t_star {
            return Err(Error::domain("t_end", "below the blow-up time", t_end));
        }
    }
    let curve = integrate_growth(spec, t_end, config)?;
    Ok(curve
        .samples
        .iter()
        .map(|&(t, v)| {
            let exact = kinetics::principal_at(spec, t)
                .finite()
                .expect("t_end precedes blow-up");
            ((v - exact) / exact).abs()
        })
        .fold(0.0, f64::max))
}

/// Least-squares fit of `c^(1-p) = a + b (t - t_last)` over the last points;
/// the root of the line is the blow-up time.
fn estimate_blowup(samples: &[(f64, f64)], order: f64) -> f64 {
    const FIT_POINTS: usize = 5;
    let (t_last, _) = *samples.last().expect("non-empty");
    let tail = &samples[samples.len().saturating_sub(FIT_POINTS)..];
    if tail.len() < 3 {
        return t_last;
    }
    let q = 1.0 - order;
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|&(t, c)| (t - t_last, (q * c.ln()).exp()))
        .collect();
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return t_last;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    if !(slope < 0.0) {
        return t_last;
    }
    t_last - intercept / slope
}

struct GrowthLaw {
    rate: f64,
    order: f64,
}

impl OdeSystem for GrowthLaw {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let c = y[0].max(0.0);
        dy[0] = if self.order == 1.0 {
            self.rate * c
        } else {
            self.rate * c.powf(self.order)
        };
    }
}

/// Autonomous system `dy/dt = f(y)`.
pub(crate) trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Reached,
    Guard,
    Underflow,
}

/// Accepted steps, with states stored row-major (`dim` values per time).
#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub dim: usize,
    pub stop: Stop,
}

impl Solution {
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }
}

// Dormand–Prince 5(4) tableau. The systems are autonomous, so the stage
// abscissae are not needed.
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

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

pub(crate) fn solve<S: OdeSystem>(
    system: &S,
    y0: &[f64],
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Solution> {
    config.validate()?;
    let n = system.dim();
    debug_assert_eq!(y0.len(), n);

    let mut times = vec![0.0];
    let mut states = y0.to_vec();
    let mut y = y0.to_vec();
    let mut t = 0.0_f64;

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    system.rhs(&y, &mut k1);
    let mut h = initial_step(system, &y, &k1, t_end, config);
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;
    let mut steps = 0usize;

    let stop = loop {
        if t >= t_end {
            break Stop::Reached;
        }
        if steps >= config.max_steps {
            return Err(Error::StepBudget {
                max_steps: config.max_steps,
                t,
            });
        }
        steps += 1;

        let remaining = t_end - t;
        let mut hit_end = false;
        if h >= remaining {
            h = remaining;
            hit_end = true;
        }
        if h <= 4.0 * f64::EPSILON * t.abs() {
            break Stop::Underflow;
        }

        let stage = |out: &mut [f64], coeffs: &[(f64, &[f64])]| {
            for j in 0..n {
                let mut acc = y[j];
                for &(a, k) in coeffs {
                    acc += h * a * k[j];
                }
                out[j] = acc;
            }
        };
        stage(&mut tmp, &[(A21, &k1)]);
        system.rhs(&tmp, &mut k2);
        stage(&mut tmp, &[(A31, &k1), (A32, &k2)]);
        system.rhs(&tmp, &mut k3);
        stage(&mut tmp, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        system.rhs(&tmp, &mut k4);
        stage(&mut tmp, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        system.rhs(&tmp, &mut k5);
        stage(
            &mut tmp,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        system.rhs(&tmp, &mut k6);
        stage(
            &mut y_new,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        system.rhs(&y_new, &mut k7);

        let mut err_sq = 0.0;
        for j in 0..n {
            let e = h
                * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
            let scale = config.abs_tol + config.rel_tol * y[j].abs().max(y_new[j].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            // Overflow inside the stages: retreat hard.
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            fac_old = err.max(1e-4);
            last_rejected = false;

            t = if hit_end { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            times.push(t);
            states.extend_from_slice(&y);

            if y.iter().any(|v| v.abs() > config.blowup_guard) {
                break Stop::Guard;
            }
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    };

    Ok(Solution {
        times,
        states,
        dim: n,
        stop,
    })
}

fn initial_step<S: OdeSystem>(
    system: &S,
    y: &[f64],
    f0: &[f64],
    t_end: f64,
    config: &IntegratorConfig,
) -> f64 {
    let n = y.len();
    let scale: Vec<f64> = y
        .iter()
        .map(|v| config.abs_tol + config.rel_tol * v.abs())
        .collect();
    let norm = |v: &[f64]| {
        (v.iter()
            .zip(&scale)
            .map(|(a, s)| (a / s).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(t_end);

    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, f)| a + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    system.rhs(&y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    if !d2.is_finite() {
        return h0 * 1e-3;
    }
    let d = d1.max(d2);
    let h1 = if d <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(t_end)
}
