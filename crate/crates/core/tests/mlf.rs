use fracflow::mlf::*;
use num_complex::Complex64;
use std::f64::consts::PI;

// mpmath at 60 digits (series summed to 1e-70).
const E_15_1_M3: f64 = -0.17556537379997824292;
const E_15_1_M2: f64 = 0.029430685602826471728;
const E_15_2_M5: f64 = 0.20456444300647947614;
const E_15_1_M50: f64 = -0.0045783851058392779913;
const E_11_2_M100: f64 = 0.0093752758139963551371;
const E_19_125_M77: f64 = -0.26677998592865369537;
const E_15_15_M7: f64 = -0.064944217202865987718;
const OMEGA_15_2_4: f64 = 0.14952387584670125624;
const L_15_1_2: f64 = -0.088020305235263972691;
const L_15_2_5: f64 = 0.10884981967607608106;

fn p(a: f64, b: f64) -> MLParams {
    MLParams::new(a, b).unwrap()
}

fn z(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[test]
fn series_reference_values() {
    let v = ml_series(p(1.5, 1.0), z(-3.0), 1e-15, 500).unwrap();
    assert!((v.value.re - E_15_1_M3).abs() < 1e-14);
    assert_eq!(v.method, Method::Series);
    let v = ml_series(p(1.5, 2.0), z(-5.0), 1e-15, 500).unwrap();
    assert!((v.value.re - E_15_2_M5).abs() < 1e-14);
    let v = ml_series(p(1.5, 1.5), z(-7.0), 1e-15, 500).unwrap();
    assert!((v.value.re - E_15_15_M7).abs() < 1e-14);
}

#[test]
fn dispatch_uses_decomposition_far_out() {
    let v = ml_eval(p(1.5, 1.0), z(-50.0)).unwrap();
    assert_eq!(v.method, Method::Decomposition);
    assert!((v.value.re - E_15_1_M50).abs() < 1e-12);
    assert!(v.est_error.is_finite());
    assert!((ml_eval_neg(p(1.1, 2.0), 100.0).unwrap() - E_11_2_M100).abs() < 1e-12);
    assert!((ml_eval_neg(p(1.9, 1.25), 77.0).unwrap() - E_19_125_M77).abs() < 1e-11);
    // outside the decomposition domain the series is used
    assert_eq!(ml_eval(p(0.8, 1.0), z(-50.0)).unwrap().method, Method::Series);
}

#[test]
fn omega_reference_and_domain() {
    let w = ml_omega(p(1.5, 2.0), 4.0).unwrap();
    assert!((w.re - OMEGA_15_2_4).abs() < 1e-14);
    assert!(w.im.abs() < 1e-15);
    assert!(ml_omega(p(1.5, 1.0), 0.0).is_err());
}

#[test]
fn integral_part_reference_values() {
    let q = QuadratureSpec::default();
    assert!((ml_l(p(1.5, 1.0), 2.0, q).unwrap().re - L_15_1_2).abs() < 1e-10);
    assert!((ml_l(p(1.5, 2.0), 5.0, q).unwrap().re - L_15_2_5).abs() < 1e-10);
    // l → 0 as x grows (like 1/x)
    let far = ml_l(p(1.5, 1.0), 1e5, q).unwrap().re.abs();
    let near = ml_l(p(1.5, 1.0), 10.0, q).unwrap().re.abs();
    assert!(far < 1e-3 * near.max(1e-3));
}

#[test]
fn integral_routes_agree() {
    let q = QuadratureSpec::default();
    for &(a, b, x) in &[(1.5, 1.0, 2.0), (1.3, 1.7, 20.0), (1.8, 2.0, 0.7)] {
        let (l1, _) = ml_l_with(p(a, b), x, q, LRoute::Laplace, Convention::SeriesConsistent).unwrap();
        let (l2, _) = ml_l_with(p(a, b), x, q, LRoute::Kernel, Convention::SeriesConsistent).unwrap();
        assert!((l1 - l2).abs() <= 10.0 * q.rel_tol * l1.abs().max(1e-3), "({a},{b},{x}): {l1} {l2}");
    }
}

#[test]
fn printed_sign_disagrees_with_series() {
    // the sign arbitration: only the series-consistent convention reproduces E
    let q = QuadratureSpec::default();
    let (a, b, x) = (1.5, 1.0, 2.0);
    let w = ml_omega(p(a, b), x).unwrap().re;
    let (lp, _) = ml_l_with(p(a, b), x, q, LRoute::Laplace, Convention::AsPrinted).unwrap();
    let (ls, _) = ml_l_with(p(a, b), x, q, LRoute::Laplace, Convention::SeriesConsistent).unwrap();
    assert!((w + ls - E_15_1_M2).abs() < 1e-10);
    assert!((w + lp - E_15_1_M2).abs() > 0.1);
}

#[test]
fn kernel_h_literal_and_decay() {
    let (a, b) = (1.5, 1.0);
    let s = 1.0;
    let literal = ((a - b) * PI).sin() - s * (b * PI).sin();
    let literal = literal / (a * PI) / (s * s + 2.0 * s * (a * PI).cos() + 1.0);
    let printed = ml_kernel_h_with(p(a, b), s, Convention::AsPrinted).unwrap();
    assert!((printed - literal).abs() < 1e-15);
    // generic β: H ~ s^{-1 + (1-β)/α}; at β = 2 the s sin(βπ) term vanishes
    // and the decay steepens to s^{-2 + (1-β)/α}
    let slope = |b: f64| {
        let h1 = ml_kernel_h(p(1.5, b), 1e6).unwrap().abs();
        let h2 = ml_kernel_h(p(1.5, b), 2e6).unwrap().abs();
        (h2 / h1).log2()
    };
    assert!((slope(1.5) - (-1.0 - 0.5 / 1.5)).abs() < 1e-3);
    assert!((slope(2.0) - (-2.0 - 1.0 / 1.5)).abs() < 1e-3);
}

#[test]
fn decomposition_matches_series_on_a_grid() {
    let q = QuadratureSpec::default();
    for &a in &[1.1, 1.5, 1.9] {
        for &b in &[1.0, 1.25, 1.5, 2.0] {
            for i in 0..12 {
                let x = 0.5 * 200f64.powf(i as f64 / 11.0);
                let s = ml_series(p(a, b), z(-x), 1e-14, 5000).unwrap().value.re;
                let (d, _) = ml_decompose(p(a, b), x, q).unwrap();
                let v = d.omega.re + d.l_part.re;
                assert!(rel(v, s) <= 1e-8, "α={a} β={b} x={x}: {v} vs {s}");
            }
        }
    }
}

#[test]
fn closed_form_anchors() {
    for i in 0..=50 {
        let x = 2.0 * i as f64;
        let e11 = ml_series(p(1.0, 1.0), z(-x), 1e-14, 5000).unwrap().value.re;
        let e21 = ml_series(p(2.0, 1.0), z(-x), 1e-14, 5000).unwrap().value.re;
        let e22 = ml_series(p(2.0, 2.0), z(-x), 1e-14, 5000).unwrap().value.re;
        let w = x.sqrt();
        assert!((e11 - (-x).exp()).abs() <= 1e-12 * (-x).exp().max(1e-300) + 1e-300, "x={x}");
        assert!((e21 - w.cos()).abs() <= 1e-12, "x={x}");
        let sinc = if w == 0.0 { 1.0 } else { w.sin() / w };
        assert!((e22 - sinc).abs() <= 1e-12, "x={x}");
    }
}

#[test]
fn value_at_zero_and_bounded_tail() {
    for &b in &[1.0, 1.5, 2.0, 3.0] {
        assert_eq!(ml_eval(p(1.5, b), z(0.0)).unwrap().value.re, recip_gamma(b));
    }
    for &a in &[1.1, 1.5, 1.9] {
        for i in 0..60 {
            let x = 0.01 * 1e4f64.powf(i as f64 / 59.0);
            assert!(ml_eval_neg(p(a, 1.0), x).unwrap().abs() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn relaxation_mass_is_two_over_alpha_minus_one() {
    for &a in &[1.1, 1.25, 1.5, 1.75, 1.9] {
        let m = ml_relaxation_mass(a).unwrap();
        assert!((m - (1.0 - 2.0 / a)).abs() < 1e-10, "α={a}: {m}");
    }
    // toward α = 1 the magnitude tends to 1, not 0
    assert!((ml_relaxation_mass(1.01).unwrap() + 1.0).abs() < 0.02);
}

#[test]
fn derivative_identity_is_second_order() {
    assert!(ml_derivative_residual(1.5, 1.0, 1.0, 1e-4).unwrap() <= 1e-6);
    assert!(ml_derivative_residual(1.9, 4.0, 0.5, 1e-4).unwrap() <= 1e-5);
    let r1 = ml_derivative_residual(1.5, 1.0, 1.0, 4e-3).unwrap();
    let r2 = ml_derivative_residual(1.5, 1.0, 1.0, 2e-3).unwrap();
    assert!((3.5..=4.5).contains(&(r1 / r2)), "{}", r1 / r2);
}

#[test]
fn integral_identity() {
    let q = QuadratureSpec::default();
    assert_eq!(ml_integral_residual(1.5, 0.0, 1.0, q).unwrap(), 0.0);
    assert!(ml_integral_residual(1.5, 1.0, 2.0, q).unwrap() <= 1e-8);
    assert!(ml_integral_residual(1.1, 10.0, 1.0, q).unwrap() <= 1e-8);
}

#[test]
fn extended_series_matches_reference() {
    let v = ml_series_extended(1.5, 1.0, z(-3.0), 120);
    assert!((v.re - E_15_1_M3).abs() < 1e-16);
}

#[test]
fn parameter_validation() {
    assert!(MLParams::new(0.0, 1.0).is_err());
    assert!(MLParams::new(2.5, 1.0).is_err());
    assert!(MLParams::new(1.5, 0.0).is_err());
    assert!(ml_series(p(1.5, 1.0), z(1.0), 0.0, 10).is_err());
    assert!(ml_series(p(1.5, 1.0), z(1.0), 1e-10, 0).is_err());
}
