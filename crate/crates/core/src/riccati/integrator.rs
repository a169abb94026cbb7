//! Adaptive Dormand–Prince 5(4) integrator for scalar complex ODEs
//! `y' = f(t, y)`, plus fixed-step modes used for order measurements.

use serde::{Deserialize, Serialize};

use crate::{ComplexValue, Error, Result};

/// Integration aborts once `|y|` exceeds this value.
pub const POLE_GUARD: f64 = 1e8;

const MAX_STEPS: usize = 10_000_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

// Dormand–Prince coefficients
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

// 5th-order weights (also row 7 of the tableau)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// difference between 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OdeMeta {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest accepted local error estimate, in absolute units.
    pub max_local_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    /// Accepted nodes `(t, y)`, strictly monotone in `t`, starting at `t0`.
    pub nodes: Vec<(f64, ComplexValue)>,
    pub meta: OdeMeta,
}

impl OdeSolution {
    pub fn last(&self) -> (f64, ComplexValue) {
        *self.nodes.last().expect("solution always holds the initial node")
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` with local error control
/// `|err| ≤ tol·(1 + |y|)` per step. Either direction of integration works.
pub fn integrate_complex_ode<F>(
    rhs: F,
    t0: f64,
    y0: ComplexValue,
    t1: f64,
    tol: f64,
) -> Result<OdeSolution>
where
    F: FnMut(f64, ComplexValue) -> ComplexValue,
{
    integrate_with_stops(rhs, t0, y0, &[t1], tol)
}

/// Like [`integrate_complex_ode`], but lands exactly on every stop in
/// `stops` (which must be monotone in the direction of integration). The
/// last stop is the end point.
pub fn integrate_with_stops<F>(
    rhs: F,
    t0: f64,
    y0: ComplexValue,
    stops: &[f64],
    tol: f64,
) -> Result<OdeSolution>
where
    F: FnMut(f64, ComplexValue) -> ComplexValue,
{
    let Some(&t_end) = stops.last() else {
        return Err(Error::domain("at least one stop is required"));
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    if !(t0.is_finite() && t_end.is_finite()) || t0 == t_end {
        return Err(Error::domain(format!("need finite t0 != t1, got {t0} and {t_end}")));
    }
    if !(y0.re.is_finite() && y0.im.is_finite()) {
        return Err(Error::domain("initial value must be finite"));
    }
    let dir = (t_end - t0).signum();
    let mut prev = t0;
    for &s in stops {
        if !s.is_finite() || (s - prev) * dir <= 0.0 {
            return Err(Error::domain("stops must be strictly monotone in the integration direction"));
        }
        prev = s;
    }

    let mut stepper = Stepper::new(rhs, t0, y0, tol);
    let mut nodes = vec![(t0, y0)];
    let mut h = dir * initial_step(&mut stepper, t_end);
    for &stop in stops {
        h = stepper.advance_to(stop, h, &mut nodes)?;
    }
    Ok(OdeSolution { nodes, meta: stepper.meta })
}

struct Stepper<F> {
    rhs: F,
    t: f64,
    y: ComplexValue,
    k1: ComplexValue,
    tol: f64,
    meta: OdeMeta,
}

impl<F> Stepper<F>
where
    F: FnMut(f64, ComplexValue) -> ComplexValue,
{
    fn new(mut rhs: F, t: f64, y: ComplexValue, tol: f64) -> Self {
        let k1 = rhs(t, y);
        Stepper { rhs, t, y, k1, tol, meta: OdeMeta { rhs_evaluations: 1, ..Default::default() } }
    }

    fn eval(&mut self, t: f64, y: ComplexValue) -> ComplexValue {
        self.meta.rhs_evaluations += 1;
        (self.rhs)(t, y)
    }

    /// Takes one trial step; returns (y5, k7, err).
    fn trial(&mut self, h: f64) -> (ComplexValue, ComplexValue, ComplexValue) {
        let (t, y, k1) = (self.t, self.y, self.k1);
        let k2 = self.eval(t + C2 * h, y + h * (A21 * k1));
        let k3 = self.eval(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = self.eval(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = self.eval(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = self.eval(
            t + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = self.eval(t + h, y5);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        (y5, k7, err)
    }

    /// Advances exactly to `target`, returning the step size to try next.
    fn advance_to(
        &mut self,
        target: f64,
        mut h: f64,
        nodes: &mut Vec<(f64, ComplexValue)>,
    ) -> Result<f64> {
        let dir = (target - self.t).signum();
        loop {
            if self.meta.accepted_steps + self.meta.rejected_steps >= MAX_STEPS {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            let remaining = target - self.t;
            let last = h.abs() >= remaining.abs();
            let step = if last { remaining } else { h };
            let min_step = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if step.abs() < min_step && !last {
                return Err(Error::StepUnderflow { t: self.t, h: step });
            }

            let (y_new, k7, err) = self.trial(step);
            let finite = y_new.re.is_finite() && y_new.im.is_finite() && err.norm().is_finite();
            let scale = self.tol * (1.0 + self.y.norm().max(y_new.norm()));
            let ratio = if finite { err.norm() / scale } else { f64::INFINITY };

            if ratio <= 1.0 {
                if y_new.norm() > POLE_GUARD {
                    return Err(Error::PoleEncountered { t_last: self.t, guard: POLE_GUARD });
                }
                self.t = if last { target } else { self.t + step };
                self.y = y_new;
                self.k1 = k7;
                self.meta.accepted_steps += 1;
                self.meta.max_local_error = self.meta.max_local_error.max(err.norm());
                nodes.push((self.t, self.y));
                let factor = if ratio == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * ratio.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a truncated final step says nothing about the natural step size
                let next = if last { h.abs().max(step.abs() * factor) } else { step.abs() * factor };
                if last {
                    return Ok(dir * next);
                }
                h = dir * next;
            } else {
                self.meta.rejected_steps += 1;
                if !finite && self.y.norm() * 1e3 > POLE_GUARD {
                    return Err(Error::PoleEncountered { t_last: self.t, guard: POLE_GUARD });
                }
                let factor = if finite {
                    (SAFETY * ratio.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = step * factor;
                if h.abs() < min_step {
                    if self.y.norm() * 1e3 > POLE_GUARD {
                        return Err(Error::PoleEncountered { t_last: self.t, guard: POLE_GUARD });
                    }
                    return Err(Error::StepUnderflow { t: self.t, h });
                }
            }
        }
    }
}

/// Hairer–Wanner starting step heuristic.
fn initial_step<F>(stepper: &mut Stepper<F>, t_end: f64) -> f64
where
    F: FnMut(f64, ComplexValue) -> ComplexValue,
{
    let span = (t_end - stepper.t).abs();
    let dir = (t_end - stepper.t).signum();
    let scale = stepper.tol * (1.0 + stepper.y.norm());
    let d0 = stepper.y.norm() / scale;
    let d1 = stepper.k1.norm() / scale;
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = stepper.y + dir * h0 * stepper.k1;
    let k1b = stepper.eval(stepper.t + dir * h0, y1);
    let d2 = (k1b - stepper.k1).norm() / scale / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Classical fixed-step schemes, kept for convergence-order measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedMethod {
    /// Classical 4th-order Runge–Kutta.
    Rk4,
    /// The 5th-order solution of the Dormand–Prince pair, without control.
    DormandPrince5,
}

pub fn integrate_fixed<F>(
    mut rhs: F,
    t0: f64,
    y0: ComplexValue,
    t1: f64,
    steps: usize,
    method: FixedMethod,
) -> Result<ComplexValue>
where
    F: FnMut(f64, ComplexValue) -> ComplexValue,
{
    if steps == 0 {
        return Err(Error::domain("fixed-step integration needs at least one step"));
    }
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        y = match method {
            FixedMethod::Rk4 => {
                let k1 = rhs(t, y);
                let k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
                let k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
                let k4 = rhs(t + h, y + h * k3);
                y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
            FixedMethod::DormandPrince5 => {
                let k1 = rhs(t, y);
                let k2 = rhs(t + C2 * h, y + h * (A21 * k1));
                let k3 = rhs(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
                let k4 = rhs(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
                let k5 = rhs(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
                let k6 = rhs(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
                y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            }
        };
        if y.norm() > POLE_GUARD || !y.re.is_finite() || !y.im.is_finite() {
            return Err(Error::PoleEncountered { t_last: t, guard: POLE_GUARD });
        }
    }
    Ok(y)
}
