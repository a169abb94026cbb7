//! Closed-form evaluation of the non-paraxial beam, its envelope exponent
//! `f = f₁(R) + f₂(θ)`, coordinate transforms and the classical Gaussian-beam
//! `p`/`q` parameter mapping.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{ComplexValue, Error, Result};

/// Guard margin around poles and log-argument zeros.
pub const SINGULAR_MARGIN: f64 = 1e-8;

/// Amplitude constant `a` and wavenumber `k` of one beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub a: f64,
    pub k: f64,
}

impl BeamSpec {
    pub fn new(a: f64, k: f64) -> Result<Self> {
        let beam = BeamSpec { a, k };
        beam.validate()?;
        Ok(beam)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::domain(format!("amplitude a must be finite, got {}", self.a)));
        }
        check_wavenumber(self.k)
    }
}

pub(crate) fn check_wavenumber(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::domain(format!("wavenumber k must be finite and > 0, got {k}")));
    }
    Ok(())
}

pub(crate) fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::domain(format!("radius R must be finite and > 0, got {r}")));
    }
    Ok(())
}

pub(crate) fn check_open_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::domain(format!("theta must lie in (0, π), got {theta}")));
    }
    Ok(())
}

/// Point in spherical coordinates. `theta` is the polar angle measured from
/// the +Z axis, `phi` the azimuth in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    /// Builds a point with `R > 0` and `theta ∈ [0, π]`; `phi` is wrapped
    /// into `[0, 2π)`. Field evaluators further require `theta ∈ (0, π)`.
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        check_radius(r)?;
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::domain(format!("theta must lie in [0, π], got {theta}")));
        }
        if !phi.is_finite() {
            return Err(Error::domain(format!("phi must be finite, got {phi}")));
        }
        Ok(SphericalPoint { r, theta, phi: wrap_phi(phi) })
    }

    pub fn to_cartesian(&self) -> CartesianPoint {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        CartesianPoint { x: self.r * st * cp, y: self.r * st * sp, z: self.r * ct }
    }

    fn validate_open(&self) -> Result<()> {
        check_radius(self.r)?;
        check_open_theta(self.theta)
    }
}

fn wrap_phi(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::domain("cartesian coordinates must be finite"));
        }
        Ok(CartesianPoint { x, y, z })
    }
}

/// Piecewise regime of the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `cos(kR)/(kR)` radial factor, used for `kR ≤ π/4`.
    Cos,
    /// `i·sin(kR)/(kR)` radial factor, used for `kR > π/4`.
    Sin,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Cos => "cos",
            Branch::Sin => "sin",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cos" => Ok(Branch::Cos),
            "sin" => Ok(Branch::Sin),
            other => Err(Error::Parse(format!("unknown branch '{other}', expected cos or sin"))),
        }
    }
}

/// Wavefront radius of curvature. `Flat` is the exact `r = ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Curvature {
    Flat,
    Finite(f64),
}

/// Classical Gaussian-beam parameters at axial position `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBeamParams {
    /// Beam waist size `w(Z)`.
    pub w: f64,
    pub r_curv: Curvature,
    /// Gouy phase `ζ(Z)`.
    pub zeta: f64,
    pub z: f64,
}

/// Complex phase shift `p` and the transverse coefficient `1/(2q)` of
/// `exp[i(p + (X²+Y²)/(2q))]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PQPair {
    pub p: ComplexValue,
    pub inv_2q: ComplexValue,
}

/// `ln(tan(θ/2))`, the angular factor of the field.
///
/// Evaluated as `-atanh(cos θ)`, which keeps full relative precision near the
/// zero at `θ = π/2` where `ln` of a number close to 1 would not.
pub fn log_tan_half(theta: f64) -> f64 {
    -theta.cos().atanh()
}

pub fn spherical_from_cartesian(pt: CartesianPoint) -> Result<SphericalPoint> {
    let CartesianPoint { x, y, z } = pt;
    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::domain("cartesian coordinates must be finite"));
    }
    if x == 0.0 && y == 0.0 && z == 0.0 {
        return Err(Error::domain("the origin has no spherical representation"));
    }
    let rho = x.hypot(y);
    let r = rho.hypot(z);
    // atan2 keeps accuracy near the axis where acos(z/r) loses digits
    let theta = rho.atan2(z);
    let phi = wrap_phi(y.atan2(x));
    Ok(SphericalPoint { r, theta, phi })
}

/// Chooses the branch from `kR`; the tie `kR = π/4` resolves to `Cos`.
pub fn select_branch(k: f64, r: f64) -> Result<Branch> {
    check_wavenumber(k)?;
    check_radius(r)?;
    Ok(if k * r <= FRAC_PI_4 { Branch::Cos } else { Branch::Sin })
}

/// Evaluates the requested branch at `pt` without checking the `kR` regime.
pub fn eval_branch(beam: &BeamSpec, pt: &SphericalPoint, branch: Branch) -> Result<ComplexValue> {
    beam.validate()?;
    pt.validate_open()?;
    let kr = beam.k * pt.r;
    let angular = beam.k * beam.a * log_tan_half(pt.theta);
    let value = match branch {
        Branch::Cos => ComplexValue::new(angular * kr.cos() / kr, 0.0),
        Branch::Sin => ComplexValue::new(0.0, angular * kr.sin() / kr),
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::domain(format!("field overflowed at R = {}, theta = {}", pt.r, pt.theta)));
    }
    Ok(value)
}

pub fn eval_field(beam: &BeamSpec, pt: &SphericalPoint) -> Result<(ComplexValue, Branch)> {
    let branch = select_branch(beam.k, pt.r)?;
    Ok((eval_branch(beam, pt, branch)?, branch))
}

/// Envelope exponent `f = f₁(R) + f₂(θ)` with `A = a·exp(i·f)`.
///
/// Principal complex logarithms throughout:
/// `f₂ = -i·ln(ln tan(θ/2))`,
/// `f₁ = -i·ln cos(kR) + i·ln R` (Cos) or `-i·ln sin(kR) + i·ln R - i·ln i` (Sin).
pub fn eval_envelope_exponent(
    beam: &BeamSpec,
    pt: &SphericalPoint,
    branch: Branch,
) -> Result<ComplexValue> {
    beam.validate()?;
    pt.validate_open()?;
    let angular = log_tan_half(pt.theta);
    if angular.abs() <= SINGULAR_MARGIN {
        return Err(Error::singular(format!(
            "envelope exponent undefined on the zero line theta = π/2 (theta = {})",
            pt.theta
        )));
    }
    let kr = beam.k * pt.r;
    let trig = match branch {
        Branch::Cos => kr.cos(),
        Branch::Sin => kr.sin(),
    };
    if trig.abs() <= SINGULAR_MARGIN {
        return Err(Error::singular(format!("{branch} factor vanishes at kR = {kr}")));
    }
    let i = ComplexValue::i();
    let f2 = -i * ComplexValue::new(angular, 0.0).ln();
    let mut f1 = -i * ComplexValue::new(trig, 0.0).ln() + i * pt.r.ln();
    if branch == Branch::Sin {
        // ln i = iπ/2, so -i·ln i = π/2
        f1 += ComplexValue::new(FRAC_PI_2, 0.0);
    }
    Ok(f1 + f2)
}

/// Maps classical Gaussian-beam parameters onto `p = (ζ - kZ) + i·ln w` and
/// `1/(2q) = i/w² - k/(2r)`.
pub fn beam_parameters_to_pq(params: &GaussianBeamParams, k: f64) -> Result<PQPair> {
    check_wavenumber(k)?;
    let GaussianBeamParams { w, r_curv, zeta, z } = *params;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::domain(format!("beam waist w must be > 0, got {w}")));
    }
    if !(zeta.is_finite() && z.is_finite()) {
        return Err(Error::domain("Gouy phase and axial position must be finite"));
    }
    let curvature_term = match r_curv {
        Curvature::Flat => 0.0,
        Curvature::Finite(r) if r == 0.0 || !r.is_finite() => {
            return Err(Error::domain(format!(
                "finite curvature radius must be non-zero and finite, got {r}"
            )))
        }
        Curvature::Finite(r) => k / (2.0 * r),
    };
    Ok(PQPair {
        p: ComplexValue::new(zeta - k * z, w.ln()),
        inv_2q: ComplexValue::new(-curvature_term, 1.0 / (w * w)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_3};

    // 30-digit mpmath references
    const COS_REF: f64 = -0.964_122_986_813_605_4;
    const SIN_REF: f64 = -0.462_225_182_233_805_7;

    fn unit_beam() -> BeamSpec {
        BeamSpec::new(1.0, 1.0).unwrap()
    }

    fn sp(r: f64, theta: f64) -> SphericalPoint {
        SphericalPoint::new(r, theta, 0.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn cartesian_conversion_examples() {
        let p = spherical_from_cartesian(CartesianPoint::new(0.0, 0.0, 5.0).unwrap()).unwrap();
        assert_eq!((p.r, p.theta, p.phi), (5.0, 0.0, 0.0));

        let p = spherical_from_cartesian(CartesianPoint::new(3.0, 4.0, 0.0).unwrap()).unwrap();
        assert_eq!(p.r, 5.0);
        assert!(close(p.theta, FRAC_PI_2, 1e-15));
        assert!(close(p.phi, 4f64.atan2(3.0), 1e-15));

        let p = spherical_from_cartesian(CartesianPoint::new(1.0, 1.0, 2f64.sqrt()).unwrap())
            .unwrap();
        assert!(close(p.r, 2.0, 1e-15));
        assert!(close(p.theta, FRAC_PI_4, 1e-15));
    }

    #[test]
    fn origin_is_rejected() {
        let origin = CartesianPoint::new(0.0, 0.0, 0.0).unwrap();
        assert!(matches!(spherical_from_cartesian(origin), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_azimuth_is_wrapped() {
        let p = spherical_from_cartesian(CartesianPoint::new(1.0, -1.0, 0.0).unwrap()).unwrap();
        assert!(close(p.phi, 7.0 * FRAC_PI_4, 1e-15));
        assert!(SphericalPoint::new(1.0, 1.0, -1e-300).unwrap().phi < TAU);
    }

    #[test]
    fn branch_selection() {
        assert_eq!(select_branch(1.0, 0.5).unwrap(), Branch::Cos);
        assert_eq!(select_branch(1.0, 1.0).unwrap(), Branch::Sin);
        assert_eq!(select_branch(1.0, FRAC_PI_4).unwrap(), Branch::Cos);
        assert!(select_branch(0.0, 1.0).is_err());
        assert!(select_branch(-1.0, 1.0).is_err());
        assert!(select_branch(1.0, 0.0).is_err());
    }

    #[test]
    fn branch_values() {
        let beam = unit_beam();
        let cos = eval_branch(&beam, &sp(0.5, FRAC_PI_3), Branch::Cos).unwrap();
        assert!(close(cos.re, COS_REF, 1e-14));
        assert_eq!(cos.im, 0.0);

        let sin = eval_branch(&beam, &sp(1.0, FRAC_PI_3), Branch::Sin).unwrap();
        assert_eq!(sin.re, 0.0);
        assert!(close(sin.im, SIN_REF, 1e-14));
    }

    #[test]
    fn field_uses_selected_branch() {
        let beam = unit_beam();
        let (v, b) = eval_field(&beam, &sp(0.5, FRAC_PI_3)).unwrap();
        assert_eq!(b, Branch::Cos);
        assert!(close(v.re, COS_REF, 1e-14));
        let (v, b) = eval_field(&beam, &sp(1.0, FRAC_PI_3)).unwrap();
        assert_eq!(b, Branch::Sin);
        assert!(close(v.im, SIN_REF, 1e-14));
    }

    #[test]
    fn equator_is_a_zero_line() {
        let beam = BeamSpec::new(3.0, 2.0).unwrap();
        for r in [0.1, 0.3, 1.0, 7.5] {
            let (v, _) = eval_field(&beam, &sp(r, FRAC_PI_2)).unwrap();
            // fl(π/2) is 6e-17 away from the true zero
            assert!(v.norm() <= 1e-15 * beam.k * beam.a.abs() / (beam.k * r).min(1.0));
        }
    }

    #[test]
    fn poles_are_rejected() {
        let beam = unit_beam();
        for theta in [0.0, PI] {
            let pt = SphericalPoint::new(1.0, theta, 0.0).unwrap();
            assert!(matches!(eval_branch(&beam, &pt, Branch::Cos), Err(Error::Domain(_))));
        }
        let bad = SphericalPoint { r: -1.0, theta: 1.0, phi: 0.0 };
        assert!(eval_branch(&beam, &bad, Branch::Sin).is_err());
    }

    #[test]
    fn envelope_reproduces_field() {
        let beam = unit_beam();
        let pt = sp(0.5, FRAC_PI_3);
        let f = eval_envelope_exponent(&beam, &pt, Branch::Cos).unwrap();
        let a = beam.a * (ComplexValue::i() * f).exp();
        assert!((a - ComplexValue::new(COS_REF, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn envelope_angular_part_vanishes_at_unit_log() {
        // ln tan(θ/2) = 1, so f₂ = 0 and f reduces to f₁
        let theta = 2.0 * E.atan();
        let beam = unit_beam();
        let r: f64 = 0.5;
        let f = eval_envelope_exponent(&beam, &sp(r, theta), Branch::Cos).unwrap();
        let f1 = -ComplexValue::i() * ComplexValue::new(r.cos(), 0.0).ln()
            + ComplexValue::i() * r.ln();
        assert!((f - f1).norm() <= 1e-14);
    }

    #[test]
    fn envelope_principal_branch_below_equator() {
        let beam = unit_beam();
        let theta = FRAC_PI_2 - 0.01;
        let f = eval_envelope_exponent(&beam, &sp(0.3, theta), Branch::Cos).unwrap();
        let f1 = eval_envelope_exponent(&beam, &sp(0.3, 2.0 * E.atan()), Branch::Cos).unwrap();
        let f2 = f - f1;
        // log of a negative real contributes +π to the real part of -i·ln
        assert!(close(f2.re, PI, 1e-14));
        let angular = (ComplexValue::i() * f2).exp();
        assert!((angular.re - log_tan_half(theta)).abs() <= 1e-15);
        assert!(angular.im.abs() <= 1e-15);
    }

    #[test]
    fn envelope_singularities() {
        let beam = unit_beam();
        assert!(matches!(
            eval_envelope_exponent(&beam, &sp(0.5, FRAC_PI_2), Branch::Cos),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            eval_envelope_exponent(&beam, &sp(FRAC_PI_2, 1.0), Branch::Cos),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            eval_envelope_exponent(&beam, &sp(PI, 1.0), Branch::Sin),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn pq_flat_unit_waist() {
        let params = GaussianBeamParams { w: 1.0, r_curv: Curvature::Flat, zeta: 0.0, z: 0.0 };
        let pq = beam_parameters_to_pq(&params, 3.7).unwrap();
        assert_eq!(pq.p, ComplexValue::new(0.0, 0.0));
        assert_eq!(pq.inv_2q, ComplexValue::new(0.0, 1.0));
    }

    #[test]
    fn pq_converging_and_diverging() {
        let params =
            GaussianBeamParams { w: 2.0, r_curv: Curvature::Finite(5.0), zeta: 0.3, z: 1.0 };
        let pq = beam_parameters_to_pq(&params, 1.0).unwrap();
        assert!(close(pq.p.re, -0.7, 1e-15));
        assert!(close(pq.p.im, 2f64.ln(), 1e-15));
        assert_eq!(pq.inv_2q, ComplexValue::new(-0.1, 0.25));

        let params =
            GaussianBeamParams { w: 1.0, r_curv: Curvature::Finite(-5.0), zeta: 0.0, z: 0.0 };
        let pq = beam_parameters_to_pq(&params, 1.0).unwrap();
        assert_eq!(pq.inv_2q, ComplexValue::new(0.1, 1.0));
    }

    #[test]
    fn pq_rejects_bad_waist() {
        for w in [0.0, -1.0, f64::NAN] {
            let params = GaussianBeamParams { w, r_curv: Curvature::Flat, zeta: 0.0, z: 0.0 };
            assert!(beam_parameters_to_pq(&params, 1.0).is_err());
        }
        let params =
            GaussianBeamParams { w: 1.0, r_curv: Curvature::Finite(0.0), zeta: 0.0, z: 0.0 };
        assert!(beam_parameters_to_pq(&params, 1.0).is_err());
    }

    #[test]
    fn pq_reproduces_classical_exponent() {
        // exp[i(p + ρ²·inv_2q)] against the textbook Gaussian form
        let (w, r, zeta, z, k, rho2) = (1.3, 4.0, 0.2, 0.7, 2.5, 0.4);
        let params = GaussianBeamParams { w, r_curv: Curvature::Finite(r), zeta, z };
        let pq = beam_parameters_to_pq(&params, k).unwrap();
        let lhs = (ComplexValue::i() * (pq.p + pq.inv_2q * rho2)).exp();
        let classical = (1.0 / w)
            * ComplexValue::new(-rho2 / (w * w), -k * z - k * rho2 / (2.0 * r) + zeta).exp();
        assert!((lhs - classical).norm() <= 1e-14);
    }
}
