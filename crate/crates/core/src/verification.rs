//! Finite-difference verification of the closed-form solution.
//!
//! The spherical Laplacian
//!
//! ```text
//! ΔA = A_RR + (2/R)·A_R + A_φφ/(R² sin²θ) + A_θθ/R² + cot θ·A_θ/R²
//! ```
//!
//! is discretised with central differences per coordinate; there are no
//! mixed derivatives, so no cross stencil is needed. The radial step is
//! `h·max(1, R)`, angular steps are `h` radians.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::field::{check_radius, check_wavenumber};
use crate::{
    eval_branch, eval_envelope_exponent, select_branch, BeamSpec, Branch, ComplexValue, Error,
    Result, SphericalPoint,
};

/// Denominator floor for relative magnitudes, so the θ = π/2 zero line
/// yields a finite report.
pub const RELATIVE_FLOOR: f64 = 1e-300;

/// Residuals below this multiple of `k²·|A|` are dominated by rounding.
pub const PRECISION_LIMIT: f64 = 1e-14;

/// Multiplier on the summed stencil magnitudes when estimating rounding noise.
const NOISE_SAFETY: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// 3-point central differences, O(h²).
    #[default]
    SecondOrder,
    /// 5-point central differences, O(h⁴).
    FourthOrder,
}

impl Stencil {
    /// How many steps the stencil reaches out from the centre.
    pub fn reach(self) -> f64 {
        match self {
            Stencil::SecondOrder => 1.0,
            Stencil::FourthOrder => 2.0,
        }
    }

    /// (offset, first-derivative weight, second-derivative weight), with the
    /// weights still to be divided by h and h² respectively.
    fn weights(self) -> &'static [(f64, f64, f64)] {
        match self {
            Stencil::SecondOrder => &[(-1.0, -0.5, 1.0), (0.0, 0.0, -2.0), (1.0, 0.5, 1.0)],
            Stencil::FourthOrder => &[
                (-2.0, 1.0 / 12.0, -1.0 / 12.0),
                (-1.0, -8.0 / 12.0, 16.0 / 12.0),
                (0.0, 0.0, -30.0 / 12.0),
                (1.0, 8.0 / 12.0, 16.0 / 12.0),
                (2.0, -1.0 / 12.0, -1.0 / 12.0),
            ],
        }
    }
}

/// Steps actually used for a nominal `h` at radius `r`.
pub fn step_sizes(h: f64, r: f64) -> (f64, f64) {
    (h * r.max(1.0), h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: ComplexValue,
    /// `|residual| / (scale + RELATIVE_FLOOR)`; the scale is `k²·|A|` for the
    /// Helmholtz residual and `k²` for the envelope residual.
    pub relative_magnitude: f64,
    pub h: f64,
    pub point: SphericalPoint,
    pub branch: Option<Branch>,
    /// Estimated rounding floor of `|residual|` in the same units.
    pub noise_floor: f64,
}

impl ResidualReport {
    /// True when the residual is above the estimated rounding floor.
    pub fn above_noise(&self) -> bool {
        self.residual.norm() > self.noise_floor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub h_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Mean of `log2(res(h)/res(h/2))`; `None` when precision-limited.
    pub estimated_order: Option<f64>,
    pub precision_limited: bool,
}

/// Laplacian value together with its estimated rounding noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianEstimate {
    pub value: ComplexValue,
    pub noise: f64,
}

fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("step h must be > 0, got {h}")));
    }
    Ok(())
}

fn check_stencil(pt: &SphericalPoint, h: f64, stencil: Stencil) -> Result<(f64, f64)> {
    check_step(h)?;
    check_radius(pt.r)?;
    let (hr, ht) = step_sizes(h, pt.r);
    let reach = stencil.reach();
    if pt.r - reach * hr <= 0.0 {
        return Err(Error::domain(format!(
            "radial stencil reaches R = {} <= 0",
            pt.r - reach * hr
        )));
    }
    if pt.theta - reach * ht <= 0.0 || pt.theta + reach * ht >= PI {
        return Err(Error::domain(format!(
            "angular stencil around theta = {} leaves (0, π)",
            pt.theta
        )));
    }
    Ok((hr, ht))
}

/// Second-order finite-difference spherical Laplacian of `field` at `pt`.
pub fn laplacian_spherical_fd<F>(field: F, pt: &SphericalPoint, h: f64) -> Result<ComplexValue>
where
    F: Fn(&SphericalPoint) -> Result<ComplexValue>,
{
    Ok(laplacian_estimate(field, pt, h, Stencil::SecondOrder)?.value)
}

/// Finite-difference spherical Laplacian with a choice of stencil and a
/// rounding-noise estimate.
pub fn laplacian_estimate<F>(
    field: F,
    pt: &SphericalPoint,
    h: f64,
    stencil: Stencil,
) -> Result<LaplacianEstimate>
where
    F: Fn(&SphericalPoint) -> Result<ComplexValue>,
{
    let (hr, ht) = check_stencil(pt, h, stencil)?;
    let hp = h;
    let (r, theta) = (pt.r, pt.theta);
    let sin_t = theta.sin();
    let cot_t = theta.cos() / sin_t;

    let mut value = ComplexValue::new(0.0, 0.0);
    let mut noise = 0.0;
    for &(offset, d1, d2) in stencil.weights() {
        let radial = SphericalPoint::new(r + offset * hr, theta, pt.phi)?;
        let polar = SphericalPoint::new(r, theta + offset * ht, pt.phi)?;
        let azimuthal = SphericalPoint::new(r, theta, pt.phi + offset * hp)?;
        let w_r = d2 / (hr * hr) + (2.0 / r) * d1 / hr;
        let w_t = (d2 / (ht * ht) + cot_t * d1 / ht) / (r * r);
        let w_p = d2 / (hp * hp) / (r * r * sin_t * sin_t);
        for (w, p) in [(w_r, radial), (w_t, polar), (w_p, azimuthal)] {
            if w == 0.0 {
                continue;
            }
            let a = field(&p)?;
            value += w * a;
            noise += w.abs() * a.norm();
        }
    }
    Ok(LaplacianEstimate { value, noise: NOISE_SAFETY * f64::EPSILON * noise })
}

/// Residual `ΔA + k²A` of an arbitrary field, normalised by `k²·|A|`.
pub fn helmholtz_residual_of<F>(
    field: F,
    k: f64,
    pt: &SphericalPoint,
    h: f64,
    stencil: Stencil,
) -> Result<ResidualReport>
where
    F: Fn(&SphericalPoint) -> Result<ComplexValue>,
{
    check_wavenumber(k)?;
    let centre = field(pt)?;
    let lap = laplacian_estimate(&field, pt, h, stencil)?;
    let k2 = k * k;
    let residual = lap.value + k2 * centre;
    Ok(ResidualReport {
        residual,
        relative_magnitude: residual.norm() / (k2 * centre.norm() + RELATIVE_FLOOR),
        h,
        point: *pt,
        branch: None,
        noise_floor: lap.noise + f64::EPSILON * k2 * centre.norm(),
    })
}

/// Helmholtz residual of the closed-form field, with the branch fixed to the
/// one selected at `pt`.
pub fn helmholtz_residual(beam: &BeamSpec, pt: &SphericalPoint, h: f64) -> Result<ResidualReport> {
    helmholtz_residual_with_stencil(beam, pt, h, Stencil::SecondOrder)
}

pub fn helmholtz_residual_with_stencil(
    beam: &BeamSpec,
    pt: &SphericalPoint,
    h: f64,
    stencil: Stencil,
) -> Result<ResidualReport> {
    beam.validate()?;
    check_step(h)?;
    let branch = select_branch(beam.k, pt.r)?;
    let (hr, _) = step_sizes(h, pt.r);
    let reach = stencil.reach() * hr;
    let (r_lo, r_hi) = (pt.r - reach, pt.r + reach);
    if r_lo > 0.0 && select_branch(beam.k, r_lo)? != select_branch(beam.k, r_hi)? {
        return Err(Error::BranchCrossing { r_lo, r_hi, k: beam.k });
    }
    let mut report =
        helmholtz_residual_of(|p| eval_branch(beam, p, branch), beam.k, pt, h, stencil)?;
    report.branch = Some(branch);
    Ok(report)
}

/// Distance in `kR` from the nearest zero of the branch's trig factor.
fn trig_zero_distance(kr: f64, branch: Branch) -> f64 {
    let offset = match branch {
        Branch::Cos => PI / 2.0,
        Branch::Sin => 0.0,
    };
    let n = ((kr - offset) / PI).round();
    (kr - offset - n * PI).abs()
}

/// Residual of the envelope PDE
///
/// ```text
/// f_RR + i·f_R² + (2/R)·f_R + (f_θθ + i·f_θ² + cot θ·f_θ)/R² - i·k² = 0
/// ```
///
/// for the closed-form exponent, by second-order central differences.
pub fn pde_envelope_residual(
    beam: &BeamSpec,
    pt: &SphericalPoint,
    branch: Branch,
    h: f64,
) -> Result<ResidualReport> {
    beam.validate()?;
    check_step(h)?;
    check_radius(pt.r)?;
    let (hr, ht) = step_sizes(h, pt.r);
    let margin = 10.0;
    if (pt.theta - PI / 2.0).abs() <= margin * ht {
        return Err(Error::domain(format!(
            "envelope stencil at theta = {} is within {margin}h of the zero line π/2",
            pt.theta
        )));
    }
    if trig_zero_distance(beam.k * pt.r, branch) <= margin * beam.k * hr {
        return Err(Error::domain(format!(
            "envelope stencil at kR = {} is within {margin}h of a {branch} zero",
            beam.k * pt.r
        )));
    }
    let mut report = pde_envelope_residual_of(
        |p| eval_envelope_exponent(beam, p, branch),
        beam.k,
        pt,
        h,
    )?;
    report.branch = Some(branch);
    Ok(report)
}

/// Envelope PDE residual for an arbitrary exponent `f(R, θ)`.
pub fn pde_envelope_residual_of<F>(
    f: F,
    k: f64,
    pt: &SphericalPoint,
    h: f64,
) -> Result<ResidualReport>
where
    F: Fn(&SphericalPoint) -> Result<ComplexValue>,
{
    check_wavenumber(k)?;
    let (hr, ht) = check_stencil(pt, h, Stencil::SecondOrder)?;
    let at = |r: f64, theta: f64| f(&SphericalPoint::new(r, theta, pt.phi)?);
    let (r, theta) = (pt.r, pt.theta);
    let centre = at(r, theta)?;
    let (r_minus, r_plus) = (at(r - hr, theta)?, at(r + hr, theta)?);
    let (t_minus, t_plus) = (at(r, theta - ht)?, at(r, theta + ht)?);

    let f_r = (r_plus - r_minus) / (2.0 * hr);
    let f_rr = (r_plus - 2.0 * centre + r_minus) / (hr * hr);
    let f_t = (t_plus - t_minus) / (2.0 * ht);
    let f_tt = (t_plus - 2.0 * centre + t_minus) / (ht * ht);
    let i = ComplexValue::i();
    let cot = theta.cos() / theta.sin();
    let residual = f_rr + i * f_r * f_r + (2.0 / r) * f_r
        + (f_tt + i * f_t * f_t + cot * f_t) / (r * r)
        - i * (k * k);

    let mag = centre.norm().max(r_minus.norm()).max(r_plus.norm());
    let mag_t = t_minus.norm().max(t_plus.norm()).max(centre.norm());
    let noise = NOISE_SAFETY
        * f64::EPSILON
        * (4.0 * mag / (hr * hr) + 4.0 * mag_t / (ht * ht * r * r) + k * k);
    Ok(ResidualReport {
        residual,
        relative_magnitude: residual.norm() / (k * k + RELATIVE_FLOOR),
        h,
        point: *pt,
        branch: None,
        noise_floor: noise,
    })
}

/// `|d(1/sin θ)/dθ + cot θ / sin θ|` with the analytic derivative
/// `-cos θ / sin² θ`. Identically zero up to rounding.
pub fn angular_identity(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::domain(format!("theta must lie in (0, π), got {theta}")));
    }
    let (s, c) = theta.sin_cos();
    let derivative = -c / (s * s);
    let cot = c / s;
    Ok((derivative + cot * (1.0 / s)).abs())
}

/// Radial factor `g(R)` of the given branch, without the `1/k` normalisation.
pub fn radial_factor(r: f64, k: f64, branch: Branch) -> f64 {
    match branch {
        Branch::Cos => (k * r).cos() / r,
        Branch::Sin => (k * r).sin() / r,
    }
}

/// `|g'' + (2/R)·g' + k²·g|` for `g = cos(kR)/R` or `sin(kR)/R`, with the
/// derivatives written out analytically.
pub fn radial_identity(r: f64, k: f64, branch: Branch) -> Result<f64> {
    check_radius(r)?;
    check_wavenumber(k)?;
    let (s, c) = (k * r).sin_cos();
    let (r2, r3) = (r * r, r * r * r);
    let (g, g1, g2) = match branch {
        Branch::Cos => (
            c / r,
            (-k * s * r - c) / r2,
            -k * k * c / r + 2.0 * k * s / r2 + 2.0 * c / r3,
        ),
        Branch::Sin => (
            s / r,
            (k * c * r - s) / r2,
            -k * k * s / r - 2.0 * k * c / r2 + 2.0 * s / r3,
        ),
    };
    Ok((g2 + (2.0 / r) * g1 + k * k * g).abs())
}

/// Helmholtz residual under successive halving `h0, h0/2, …`.
pub fn convergence_order(
    beam: &BeamSpec,
    pt: &SphericalPoint,
    h0: f64,
    levels: usize,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::domain(format!("need at least 3 refinement levels, got {levels}")));
    }
    let h_values: Vec<f64> = (0..levels).map(|j| h0 / f64::powi(2.0, j as i32)).collect();
    let reports = h_values
        .iter()
        .map(|&h| helmholtz_residual(beam, pt, h))
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = reports.iter().map(|r| r.residual.norm()).collect();

    let (field, _) = crate::eval_field(beam, pt)?;
    let scale = beam.k * beam.k * field.norm();
    let precision_limited = residuals[0] <= PRECISION_LIMIT * scale
        || residuals.iter().any(|&r| r == 0.0)
        || reports.iter().any(|r| !r.above_noise());
    let estimated_order = (!precision_limited).then(|| {
        let slopes: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        slopes.iter().sum::<f64>() / slopes.len() as f64
    });
    Ok(ConvergenceReport { h_values, residuals, estimated_order, precision_limited })
}
