use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use helmbeam::analysis::{
    admissible_theta_window, amplitude_within_bound, paraxial_error, shell_energy_converged,
    EnergyDensity,
};
use helmbeam::grids::{figure_grid, parse_csv, parse_json, to_csv, to_json, Figure};
use helmbeam::riccati::{
    angular_closed_u, angular_closed_y, angular_rhs, angular_u_rhs, radial_closed_y1, radial_rhs,
};
use helmbeam::verification::laplacian_spherical_fd;
use helmbeam::{
    eval_branch, eval_envelope_exponent, eval_field, field::log_tan_half, spherical_from_cartesian,
    BeamSpec, Branch, ComplexValue, SphericalPoint,
};
use proptest::prelude::*;

const I: ComplexValue = ComplexValue::new(0.0, 1.0);
const ZERO: ComplexValue = ComplexValue::new(0.0, 0.0);

fn rel(a: ComplexValue, b: ComplexValue) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn sp(r: f64, theta: f64, phi: f64) -> SphericalPoint {
    SphericalPoint::new(r, theta, phi).unwrap()
}

fn branch() -> impl Strategy<Value = Branch> {
    prop_oneof![Just(Branch::Cos), Just(Branch::Sin)]
}

fn beam() -> impl Strategy<Value = BeamSpec> {
    (-5.0..5.0f64, 0.1..10.0f64).prop_map(|(a, k)| BeamSpec::new(a, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn antisymmetry(beam in beam(), r in 0.01..50.0f64, theta in 1e-3..PI - 1e-3, b in branch()) {
        let v = eval_branch(&beam, &sp(r, theta, 0.0), b).unwrap();
        let m = eval_branch(&beam, &sp(r, PI - theta, 0.0), b).unwrap();
        prop_assert!((m + v).norm() <= 1e-12 * v.norm());
    }

    #[test]
    fn zero_line(beam in beam(), r in 0.01..50.0f64) {
        let (v, _) = eval_field(&beam, &sp(r, FRAC_PI_2, 0.0)).unwrap();
        // L(fl(π/2)) is a few ulps of zero, not exactly zero
        prop_assert!(v.norm() <= 1e-15 * (beam.k * beam.a).abs() / (beam.k * r));
    }

    #[test]
    fn branch_reality(beam in beam(), r in 0.01..50.0f64, theta in 1e-3..PI - 1e-3) {
        let c = eval_branch(&beam, &sp(r, theta, 0.0), Branch::Cos).unwrap();
        let s = eval_branch(&beam, &sp(r, theta, 0.0), Branch::Sin).unwrap();
        prop_assert_eq!(c.im, 0.0);
        prop_assert_eq!(s.re, 0.0);
    }

    #[test]
    fn azimuthal_independence(beam in beam(), r in 0.01..50.0f64, theta in 1e-3..PI - 1e-3, phi in -10.0..10.0f64) {
        let base = eval_field(&beam, &sp(r, theta, 0.0)).unwrap();
        let turned = eval_field(&beam, &sp(r, theta, phi)).unwrap();
        prop_assert_eq!(base, turned);
    }

    #[test]
    fn cartesian_round_trip(r in 1e-3..1e3f64, theta in 1e-3..PI - 1e-3, phi in 0.0..2.0 * PI) {
        let p = sp(r, theta, phi);
        let back = spherical_from_cartesian(p.to_cartesian()).unwrap();
        prop_assert!((back.r - p.r).abs() <= 1e-12 * p.r);
        prop_assert!((back.theta - p.theta).abs() <= 1e-12 * p.theta);
        let dphi = (back.phi - p.phi).abs();
        prop_assert!(dphi.min(2.0 * PI - dphi) <= 1e-12 * p.phi.max(1.0));
    }

    #[test]
    fn envelope_consistency(
        a in prop_oneof![-3.0..-0.01f64, 0.01..3.0f64],
        k in 0.2..5.0f64,
        kr in 0.01..20.0f64,
        theta in 0.05..PI - 0.05,
        b in branch(),
    ) {
        let trig = match b { Branch::Cos => kr.cos(), Branch::Sin => kr.sin() };
        prop_assume!((theta - FRAC_PI_2).abs() > 0.05 && trig.abs() > 0.05);
        let beam = BeamSpec::new(a, k).unwrap();
        let pt = sp(kr / k, theta, 0.0);
        let f = eval_envelope_exponent(&beam, &pt, b).unwrap();
        let direct = eval_branch(&beam, &pt, b).unwrap();
        prop_assert!(rel(a * (I * f).exp(), direct) <= 1e-12);
    }

    #[test]
    fn angular_closed_form_solves_riccati(theta in 0.05..PI - 0.05, c0_re in -2.0..2.0f64, c0_im in -2.0..2.0f64) {
        let c0 = ComplexValue::new(c0_re, c0_im);
        prop_assume!((c0 + I * log_tan_half(theta)).norm() > 0.05);
        let y = angular_closed_y(theta, c0).unwrap();
        let u = angular_closed_u(theta, c0).unwrap();
        let s = theta.sin();
        let analytic = -I * u * u / (s * s) - theta.cos() / s * y;
        let rhs = angular_rhs(theta, y, ZERO).unwrap();
        prop_assert!(rel(analytic, rhs) <= 1e-10);
        let h = 1e-6;
        let fd = (angular_closed_y(theta + h, c0).unwrap() - angular_closed_y(theta - h, c0).unwrap()) / (2.0 * h);
        prop_assert!(rel(fd, rhs) <= 1e-6);
    }

    #[test]
    fn angular_substitution_consistency(theta in 0.05..PI - 0.05, c0_re in -2.0..2.0f64, c0_im in -2.0..2.0f64) {
        let c0 = ComplexValue::new(c0_re, c0_im);
        prop_assume!((c0 + I * log_tan_half(theta)).norm() > 0.05);
        // y = csc·u  ⇒  u' = sin·y' + cos·y
        let u = angular_closed_u(theta, c0).unwrap();
        let y = u / theta.sin();
        let via_y = theta.sin() * angular_rhs(theta, y, ZERO).unwrap() + theta.cos() * y;
        let via_u = angular_u_rhs(theta, u, ZERO).unwrap();
        prop_assert!(rel(via_y, via_u) <= 1e-10);
    }

    #[test]
    fn radial_closed_form_solves_riccati(k in 0.2..5.0f64, kr in 0.05..20.0f64) {
        let b = if kr <= FRAC_PI_4 { Branch::Cos } else { Branch::Sin };
        // stay away from the cot poles at nπ
        prop_assume!(b == Branch::Cos || (kr / PI - (kr / PI).round()).abs() * PI > 0.05);
        let r = kr / k;
        let y = radial_closed_y1(r, k, b).unwrap();
        let analytic = match b {
            Branch::Cos => I * (k * k / kr.cos().powi(2)) - I / (r * r),
            Branch::Sin => I * (k * k / kr.sin().powi(2)) - I / (r * r),
        };
        let rhs = radial_rhs(r, y, ZERO, k).unwrap();
        prop_assert!(rel(analytic, rhs) <= 1e-10);
        let h = 1e-6 * r;
        let fd = (radial_closed_y1(r + h, k, b).unwrap() - radial_closed_y1(r - h, k, b).unwrap()) / (2.0 * h);
        prop_assert!(rel(fd, rhs) <= 1e-6);
    }

    #[test]
    fn laplacian_linearity(
        ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64, bi in -2.0..2.0f64,
        r in 0.5..5.0f64, theta in 0.3..PI - 0.3,
    ) {
        let (alpha, beta) = (ComplexValue::new(ar, ai), ComplexValue::new(br, bi));
        let f = |p: &SphericalPoint| Ok(ComplexValue::new(p.r.powi(2) * p.theta.cos(), p.r.sin()));
        let g = |p: &SphericalPoint| Ok(ComplexValue::new((0.3 * p.r).exp() * p.theta.sin(), p.r.ln()));
        // a coarse step keeps stencil cancellation well below the tolerance
        let h = 0.1;
        let pt = sp(r, theta, 0.0);
        let combined = laplacian_spherical_fd(|p| Ok(alpha * f(p)? + beta * g(p)?), &pt, h).unwrap();
        let separate = alpha * laplacian_spherical_fd(f, &pt, h).unwrap()
            + beta * laplacian_spherical_fd(g, &pt, h).unwrap();
        let scale = separate.norm() + (alpha.norm() + beta.norm()) * (r * r + 2.0) / (h * h);
        prop_assert!((combined - separate).norm() <= 1e-12 * scale);
    }

    #[test]
    fn amplitude_bound_inside_window(beam in beam(), t in 0.0..=1.0f64) {
        let w = admissible_theta_window();
        let theta = w.theta0 + t * (w.theta1 - w.theta0);
        prop_assert!(amplitude_within_bound(theta).unwrap());
        prop_assert!((beam.k * beam.a * log_tan_half(theta)).abs() <= (beam.k * beam.a).abs() * (1.0 + 1e-15));
    }
}

#[test]
fn window_characterization_on_dense_grid() {
    let w = admissible_theta_window();
    assert!((w.theta0 + w.theta1 - PI).abs() <= 1e-12);
    let n = 10_000;
    for j in 0..n {
        let theta = PI * (j as f64 + 0.5) / n as f64;
        let inside = log_tan_half(theta).abs() <= 1.0;
        assert_eq!(amplitude_within_bound(theta).unwrap(), inside, "θ = {theta}");
        assert_eq!(inside, (w.theta0..=w.theta1).contains(&theta), "θ = {theta}");
    }
}

#[test]
fn paraxial_error_shrinks_with_r() {
    for k in [0.5, 1.0, 2.0] {
        let beam = BeamSpec::new(1.0, k).unwrap();
        let z = 1e3 / k;
        let errs: Vec<f64> = [1.0, 0.5, 0.25, 0.125]
            .iter()
            .map(|&r| paraxial_error(&beam, r, 0.0, z).unwrap().rel_error)
            .collect();
        for pair in errs.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "k = {k}: {errs:?}");
        }
    }
}

fn window_energy(beam: &BeamSpec, r_lo: f64, r_hi: f64) -> f64 {
    let w = admissible_theta_window();
    shell_energy_converged(beam, (r_lo, r_hi), (w.theta0, w.theta1), EnergyDensity::Intensity)
        .unwrap()
        .value
}

#[test]
fn energy_grows_linearly_with_shell_length() {
    let beam = BeamSpec::new(1.0, 1.0).unwrap();
    let r0 = 0.9;
    let t = 50.0 * PI / beam.k;
    let base = window_energy(&beam, r0, r0 + t);
    for n in [2.0, 3.0] {
        let ratio = window_energy(&beam, r0, r0 + n * t) / base;
        assert!((ratio - n).abs() <= 0.05 * n, "n = {n}: ratio {ratio}");
    }
}

#[test]
fn energy_scales_as_amplitude_squared() {
    let one = window_energy(&BeamSpec::new(1.0, 1.3).unwrap(), 0.5, 20.0);
    for a in [0.5, -2.0, 3.0] {
        let e = window_energy(&BeamSpec::new(a, 1.3).unwrap(), 0.5, 20.0);
        assert!((e - a * a * one).abs() <= 1e-12 * e, "a = {a}");
    }
}

#[test]
fn exports_decode_identically_and_stay_inside_captions() {
    for fig in [Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6] {
        let g = figure_grid(fig, 1.0, 40, 30).unwrap();
        let from_csv: Vec<_> = parse_csv(&to_csv(&g)).unwrap().into_iter().map(|c| c.value).collect();
        let from_json = parse_json(&to_json(&g)).unwrap().values;
        assert_eq!(from_csv, from_json);
        assert_eq!(from_json, g.values);
        for axis in [&g.x_axis, &g.y_axis] {
            if axis.n > 1 {
                let c = axis.centers();
                assert!(c[0] > axis.lo && c[axis.n - 1] < axis.hi);
            }
        }
        assert_eq!(to_csv(&g), to_csv(&figure_grid(fig, 1.0, 40, 30).unwrap()));
    }
}
