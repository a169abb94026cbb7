//! Complex Riccati equations of the separated envelope problem.
//!
//! With `f = f₁(R) + f₂(θ)`, `y = f₂'` and `y₁ = f₁'` obey
//!
//! ```text
//! y'(θ)  = -i·y² - cot θ·y + C
//! y₁'(R) = -i·y₁² - (2/R)·y₁ - (C/R² - i·k²)
//! ```
//!
//! Closed forms exist for `C = 0` only. The right-hand sides accept a general
//! complex `C`; the cross-checks integrate the `C = 0` equations numerically
//! and compare against the closed forms.

pub mod integrator;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

pub use integrator::{
    integrate_complex_ode, integrate_fixed, integrate_with_stops, FixedMethod, OdeMeta,
    OdeSolution, POLE_GUARD,
};

use crate::field::{check_open_theta, check_radius, check_wavenumber, log_tan_half, SINGULAR_MARGIN};
use crate::{Branch, ComplexValue, Error, Result};

/// A cross-check passes when the worst relative deviation is within this
/// multiple of the per-step tolerance.
pub const CROSSCHECK_TOLERANCE_FACTOR: f64 = 100.0;

const I: ComplexValue = ComplexValue::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RiccatiProblem {
    Angular { c: ComplexValue, c0: ComplexValue },
    Radial { c: ComplexValue, k: f64 },
}

impl RiccatiProblem {
    /// Right-hand side of the problem's equation in its natural unknown.
    pub fn rhs(&self, t: f64, y: ComplexValue) -> Result<ComplexValue> {
        match *self {
            RiccatiProblem::Angular { c, .. } => angular_rhs(t, y, c),
            RiccatiProblem::Radial { c, k } => radial_rhs(t, y, c, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub interval: (f64, f64),
    pub n_samples: usize,
    /// Relative error threshold that decided `passed`.
    pub threshold: f64,
    pub passed: bool,
    pub meta: OdeMeta,
}

/// `y'(θ) = -i·y² - cot θ·y + C`.
pub fn angular_rhs(theta: f64, y: ComplexValue, c: ComplexValue) -> Result<ComplexValue> {
    check_open_theta(theta)?;
    let cot = theta.cos() / theta.sin();
    Ok(-I * y * y - cot * y + c)
}

/// `u'(θ) = -i·csc θ·u² + C·sin θ`, the equation for `u = sin θ · y`.
pub fn angular_u_rhs(theta: f64, u: ComplexValue, c: ComplexValue) -> Result<ComplexValue> {
    check_open_theta(theta)?;
    let s = theta.sin();
    Ok(-I * u * u / s + c * s)
}

/// `u(θ) = 1/(C₀ + i·ln tan(θ/2))`, exact solution of the `C = 0` u-equation.
pub fn angular_closed_u(theta: f64, c0: ComplexValue) -> Result<ComplexValue> {
    check_open_theta(theta)?;
    let denom = c0 + I * log_tan_half(theta);
    if denom.norm() <= SINGULAR_MARGIN {
        return Err(Error::singular(format!(
            "C0 + i·ln tan(θ/2) vanishes at theta = {theta} (C0 = {c0})"
        )));
    }
    Ok(denom.inv())
}

/// `y(θ) = csc θ · u(θ)`, the angular derivative `f₂'`.
pub fn angular_closed_y(theta: f64, c0: ComplexValue) -> Result<ComplexValue> {
    Ok(angular_closed_u(theta, c0)? / theta.sin())
}

/// `y₁'(R) = -i·y₁² - (2/R)·y₁ - C/R² + i·k²`.
pub fn radial_rhs(r: f64, y: ComplexValue, c: ComplexValue, k: f64) -> Result<ComplexValue> {
    check_radius(r)?;
    check_wavenumber(k)?;
    Ok(-I * y * y - (2.0 / r) * y - c / (r * r) + I * (k * k))
}

/// Closed-form `y₁ = u₁ + i/R` of the `C = 0` radial equation, with
/// `u₁ = k·tanh(ikR) = ik·tan(kR)` (Cos) or `u₁ = k·coth(ikR) = -ik·cot(kR)` (Sin).
pub fn radial_closed_y1(r: f64, k: f64, branch: Branch) -> Result<ComplexValue> {
    check_radius(r)?;
    check_wavenumber(k)?;
    let kr = k * r;
    let (s, c) = kr.sin_cos();
    let u1 = match branch {
        Branch::Cos => {
            if c.abs() <= SINGULAR_MARGIN {
                return Err(Error::singular(format!("tan(kR) pole at kR = {kr}")));
            }
            I * (k * s / c)
        }
        Branch::Sin => {
            if s.abs() <= SINGULAR_MARGIN {
                return Err(Error::singular(format!("cot(kR) pole at kR = {kr}")));
            }
            -I * (k * c / s)
        }
    };
    Ok(u1 + I / r)
}

fn sample_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|j| if j + 1 == n { b } else { a + j as f64 * step }).collect()
}

fn validate_crosscheck(a: f64, b: f64, tol: f64, n_samples: usize) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain(format!("interval must satisfy a < b, got [{a}, {b}]")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    if n_samples < 2 {
        return Err(Error::domain("at least two comparison samples are required"));
    }
    Ok(())
}

fn compare<F>(
    rhs: F,
    exact: impl Fn(f64) -> Result<ComplexValue>,
    a: f64,
    b: f64,
    tol: f64,
    n_samples: usize,
) -> Result<CrosscheckReport>
where
    F: FnMut(f64, ComplexValue) -> ComplexValue,
{
    let samples = sample_points(a, b, n_samples);
    let y0 = exact(a)?;
    let sol = integrate_with_stops(rhs, a, y0, &samples[1..], tol)?;

    let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
    let mut nodes = sol.nodes.iter();
    for &t in &samples {
        let &(_, y) = nodes
            .find(|(tn, _)| *tn == t)
            .expect("integrator lands on every stop");
        let reference = exact(t)?;
        let abs = (y - reference).norm();
        max_abs = max_abs.max(abs);
        max_rel = max_rel.max(abs / reference.norm().max(1e-300));
    }
    let threshold = CROSSCHECK_TOLERANCE_FACTOR * tol;
    Ok(CrosscheckReport {
        max_abs_error: max_abs,
        max_rel_error: max_rel,
        interval: (a, b),
        n_samples,
        threshold,
        passed: max_rel <= threshold,
        meta: sol.meta,
    })
}

/// Integrates the `C = 0` u-equation from `theta_a`, seeded with the closed
/// form, and compares against [`angular_closed_u`] at `n_samples` points.
pub fn crosscheck_angular(
    c0: ComplexValue,
    theta_a: f64,
    theta_b: f64,
    tol: f64,
    n_samples: usize,
) -> Result<CrosscheckReport> {
    validate_crosscheck(theta_a, theta_b, tol, n_samples)?;
    check_open_theta(theta_a)?;
    check_open_theta(theta_b)?;
    if !(c0.re.is_finite() && c0.im.is_finite()) {
        return Err(Error::domain("C0 must be finite"));
    }
    // C0 + i·ln tan(θ/2) = 0 needs Re C0 = 0 and ln tan(θ/2) = Im C0
    if c0.re.abs() <= SINGULAR_MARGIN {
        let pole = 2.0 * c0.im.exp().atan();
        if pole >= theta_a - SINGULAR_MARGIN && pole <= theta_b + SINGULAR_MARGIN {
            return Err(Error::domain(format!(
                "closed-form u has a pole at theta = {pole} inside [{theta_a}, {theta_b}]"
            )));
        }
    }
    let zero = ComplexValue::new(0.0, 0.0);
    compare(
        |t, u| angular_u_rhs(t, u, zero).unwrap_or(ComplexValue::new(f64::NAN, f64::NAN)),
        |t| angular_closed_u(t, c0),
        theta_a,
        theta_b,
        tol,
        n_samples,
    )
}

/// Integrates the `C = 0` radial equation from `r_a`, seeded with
/// [`radial_closed_y1`], and compares at `n_samples` points.
pub fn crosscheck_radial(
    k: f64,
    r_a: f64,
    r_b: f64,
    branch: Branch,
    tol: f64,
    n_samples: usize,
) -> Result<CrosscheckReport> {
    check_wavenumber(k)?;
    validate_crosscheck(r_a, r_b, tol, n_samples)?;
    check_radius(r_a)?;
    // tan poles sit at kR = π/2 + nπ, cot poles at kR = nπ
    let offset = match branch {
        Branch::Cos => FRAC_PI_2,
        Branch::Sin => 0.0,
    };
    let (lo, hi) = (k * r_a - SINGULAR_MARGIN, k * r_b + SINGULAR_MARGIN);
    let first = ((lo - offset) / PI).ceil();
    let pole = offset + first * PI;
    if pole <= hi && pole > 0.0 {
        return Err(Error::domain(format!(
            "{branch} closed form has a pole at kR = {pole} inside [{}, {}]",
            k * r_a,
            k * r_b
        )));
    }
    let zero = ComplexValue::new(0.0, 0.0);
    compare(
        |r, y| radial_rhs(r, y, zero, k).unwrap_or(ComplexValue::new(f64::NAN, f64::NAN)),
        |r| radial_closed_y1(r, k, branch),
        r_a,
        r_b,
        tol,
        n_samples,
    )
}
