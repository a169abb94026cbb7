//! Paraxial limit, admissible θ-window, vortex locus and shell energy.

pub mod quadrature;

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{check_open_theta, check_radius, log_tan_half};
use crate::{eval_branch, select_branch, BeamSpec, Error, Result, SphericalPoint};
use quadrature::{pairwise_sum, GaussLegendre};

/// Nodes per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 16;

/// Relative change below which panel doubling is considered converged.
pub const ENERGY_CONVERGENCE: f64 = 1e-6;

/// A comparison is flagged non-paraxial once `r/Z` or the Fresnel
/// parameter `k·r²/(2Z)` exceeds this.
pub const PARAXIAL_LIMIT: f64 = 0.1;

const REL_FLOOR: f64 = 1e-300;

/// Angles where `|ln tan(θ/2)| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaWindow {
    pub theta0: f64,
    pub theta1: f64,
}

impl ThetaWindow {
    pub fn contains(&self, theta: f64) -> bool {
        (self.theta0..=self.theta1).contains(&theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParaxialComparison {
    pub exact: f64,
    pub approx: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    /// `k·r²/(2Z)`.
    pub fresnel_parameter: f64,
    pub non_paraxial: bool,
}

/// What is integrated over the shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyDensity {
    /// `|A|²`
    #[default]
    Intensity,
    /// `|A|`
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub r_lo: f64,
    pub r_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub value: f64,
    /// Radial and angular Gauss–Legendre panel counts.
    pub n_radial: usize,
    pub n_angular: usize,
    pub density: EnergyDensity,
}

pub fn admissible_theta_window() -> ThetaWindow {
    ThetaWindow { theta0: 2.0 * (1.0 / E).atan(), theta1: 2.0 * E.atan() }
}

/// True iff `|ln tan(θ/2)| ≤ 1`, i.e. `theta` lies in the admissible window
/// (endpoints included).
pub fn amplitude_within_bound(theta: f64) -> Result<bool> {
    check_open_theta(theta)?;
    Ok(admissible_theta_window().contains(theta))
}

fn check_transverse(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::domain("cartesian coordinates must be finite"));
    }
    let rho = x.hypot(y);
    if rho == 0.0 {
        return Err(Error::domain("transverse radius r = 0 is on the log singularity"));
    }
    if z <= 0.0 {
        return Err(Error::domain(format!("axial position Z must be > 0, got {z}")));
    }
    Ok(rho)
}

/// Real part of the Cos-branch field written in Cartesian form,
/// `(k·a/2)·ln((ρ−Z)/(ρ+Z))·cos(kρ)/(kρ)` with `ρ = √(r² + Z²)`.
pub fn exact_real_part_cartesian(beam: &BeamSpec, x: f64, y: f64, z: f64) -> Result<f64> {
    beam.validate()?;
    let r = check_transverse(x, y, z)?;
    let rho = r.hypot(z);
    // ρ − Z = r²/(ρ + Z) without cancellation
    let ratio = (r * r / (rho + z)) / (rho + z);
    let krho = beam.k * rho;
    Ok(0.5 * beam.k * beam.a * ratio.ln() * krho.cos() / krho)
}

/// Paraxial approximation `(k·a)·ln(r/(2Z))·cos(kZ)/(kZ)`.
pub fn paraxial_field(beam: &BeamSpec, x: f64, y: f64, z: f64) -> Result<f64> {
    beam.validate()?;
    let r = check_transverse(x, y, z)?;
    let kz = beam.k * z;
    Ok(beam.k * beam.a * (r / (2.0 * z)).ln() * kz.cos() / kz)
}

pub fn paraxial_error(beam: &BeamSpec, x: f64, y: f64, z: f64) -> Result<ParaxialComparison> {
    let exact = exact_real_part_cartesian(beam, x, y, z)?;
    let approx = paraxial_field(beam, x, y, z)?;
    let r = x.hypot(y);
    let abs_error = (exact - approx).abs();
    let fresnel_parameter = beam.k * r * r / (2.0 * z);
    Ok(ParaxialComparison {
        exact,
        approx,
        abs_error,
        rel_error: abs_error / exact.abs().max(REL_FLOOR),
        fresnel_parameter,
        non_paraxial: r / z > PARAXIAL_LIMIT || fresnel_parameter > PARAXIAL_LIMIT,
    })
}

/// Polar angle of the zero line of the field at radius `r`, found by
/// bisection on `ln tan(θ/2)` over the admissible window.
pub fn locate_vortex(beam: &BeamSpec, r: f64) -> Result<f64> {
    beam.validate()?;
    check_radius(r)?;
    let window = admissible_theta_window();
    let (mut lo, mut hi) = (window.theta0, window.theta1);
    let mut f_lo = log_tan_half(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = log_tan_half(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(if log_tan_half(lo).abs() <= log_tan_half(hi).abs() { lo } else { hi })
}

/// Shell energy with `|A|²` density and the given panel counts.
#[allow(clippy::too_many_arguments)]
pub fn shell_energy(
    beam: &BeamSpec,
    r_lo: f64,
    r_hi: f64,
    theta_lo: f64,
    theta_hi: f64,
    n_radial: usize,
    n_angular: usize,
) -> Result<EnergyReport> {
    shell_energy_with(
        beam,
        (r_lo, r_hi),
        (theta_lo, theta_hi),
        n_radial,
        n_angular,
        EnergyDensity::Intensity,
    )
}

fn validate_shell(beam: &BeamSpec, r: (f64, f64), theta: (f64, f64), n_r: usize, n_t: usize) -> Result<()> {
    beam.validate()?;
    if !(r.0.is_finite() && r.1.is_finite() && r.0 > 0.0 && r.0 < r.1) {
        return Err(Error::domain(format!("need 0 < R_lo < R_hi, got [{}, {}]", r.0, r.1)));
    }
    if !(theta.0 >= 0.0 && theta.0 < theta.1 && theta.1 <= PI) {
        return Err(Error::domain(format!(
            "need 0 <= theta_lo < theta_hi <= π, got [{}, {}]",
            theta.0, theta.1
        )));
    }
    if n_r < 8 || n_t < 8 {
        return Err(Error::domain(format!("quadrature sizes must be >= 8, got {n_r} x {n_t}")));
    }
    Ok(())
}

/// Integrates `density(A)·R²·sin θ·2π` over the shell with composite
/// Gauss–Legendre panels. The radial range is split at `kR = π/4` so no panel
/// straddles the branch switch. Quadrature nodes are interior, so the θ range
/// may extend to the poles.
pub fn shell_energy_with(
    beam: &BeamSpec,
    r: (f64, f64),
    theta: (f64, f64),
    n_radial: usize,
    n_angular: usize,
    density: EnergyDensity,
) -> Result<EnergyReport> {
    validate_shell(beam, r, theta, n_radial, n_angular)?;
    let rule = GaussLegendre::new(PANEL_ORDER);
    let boundary = FRAC_PI_4 / beam.k;

    let mut pieces = vec![r];
    if r.0 < boundary && boundary < r.1 {
        pieces = vec![(r.0, boundary), (boundary, r.1)];
    }
    let span = r.1 - r.0;
    let mut panels = Vec::new();
    for &(a, b) in &pieces {
        let n = ((n_radial as f64) * (b - a) / span).round().max(1.0) as usize;
        let w = (b - a) / n as f64;
        panels.extend((0..n).map(|j| (a + j as f64 * w, if j + 1 == n { b } else { a + (j + 1) as f64 * w })));
    }

    let contributions = panels
        .par_iter()
        .map(|&(a, b)| -> Result<f64> {
            let branch = select_branch(beam.k, 0.5 * (a + b))?;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut sum = 0.0;
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let radius = mid + half * x;
                let angular = rule.integrate(
                    |t| {
                        let pt = SphericalPoint { r: radius, theta: t, phi: 0.0 };
                        let value = eval_branch(beam, &pt, branch).map(|v| v.norm()).unwrap_or(f64::NAN);
                        let d = match density {
                            EnergyDensity::Intensity => value * value,
                            EnergyDensity::Magnitude => value,
                        };
                        d * t.sin()
                    },
                    theta.0,
                    theta.1,
                    n_angular,
                );
                sum += w * angular * radius * radius;
            }
            Ok(sum * half)
        })
        .collect::<Result<Vec<f64>>>()?;

    let value = 2.0 * PI * pairwise_sum(&contributions);
    if !value.is_finite() {
        return Err(Error::domain("shell energy integrand is not finite on the quadrature nodes"));
    }
    Ok(EnergyReport {
        r_lo: r.0,
        r_hi: r.1,
        theta_lo: theta.0,
        theta_hi: theta.1,
        value,
        n_radial,
        n_angular,
        density,
    })
}

/// Doubles both panel counts from a resolution-aware start until the result
/// changes by less than [`ENERGY_CONVERGENCE`] relative.
pub fn shell_energy_converged(
    beam: &BeamSpec,
    r: (f64, f64),
    theta: (f64, f64),
    density: EnergyDensity,
) -> Result<EnergyReport> {
    validate_shell(beam, r, theta, 8, 8)?;
    // one panel per quarter wavelength to start with
    let mut n_r = ((beam.k * (r.1 - r.0) / FRAC_PI_2).ceil() as usize).max(8);
    let mut n_t = 8;
    let mut prev = shell_energy_with(beam, r, theta, n_r, n_t, density)?;
    for _ in 0..12 {
        n_r *= 2;
        n_t *= 2;
        let next = shell_energy_with(beam, r, theta, n_r, n_t, density)?;
        let change = (next.value - prev.value).abs();
        if change <= ENERGY_CONVERGENCE * next.value.abs() || next.value == 0.0 {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}
