use fracflow::norms::*;
use fracflow::solver::data::{gaussian, homogeneous_radial};
use fracflow::spectral::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_field(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn grid(m: usize, l: f64) -> Grid {
    Grid::new(2, m, l).unwrap()
}

#[test]
fn constant_field_on_the_whole_box_is_the_lp_norm() {
    let g = grid(32, 3.0);
    let c = 1.7;
    let f = Field::from_fn(g, |_| c);
    let balls = BallFamily { stride: 1, radii_cells: vec![16] };
    let v = morrey_norm(&f, NormSpec::new(2.5, 0.0, 0.0), &balls).unwrap();
    let expect = c * 3.0f64.powf(2.0 / 2.5);
    assert!((v.norm - expect).abs() < 1e-12 * expect, "{} vs {expect}", v.norm);
}

#[test]
fn mu_zero_largest_cube_equals_discrete_lp() {
    let g = grid(32, 2.0);
    let f = random_field(g, 11);
    let p = 3.0;
    let direct = (f.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * g.cell_volume()).powf(1.0 / p);
    let balls = BallFamily { stride: 5, radii_cells: vec![16] };
    let v = morrey_norm(&f, NormSpec::new(p, 0.0, 0.0), &balls).unwrap().norm;
    assert!((v - direct).abs() <= 1e-13 * direct);
}

#[test]
fn single_cell_spike_peaks_at_smallest_cube() {
    let g = grid(32, 4.0);
    let (p, mu) = (2.0, 1.0);
    let h = g.h();
    let mut f = Field::zeros(g);
    f.values[g.flat([10, 21])] = h.powf(-2.0 / p);
    let v = morrey_norm(&f, NormSpec::new(p, mu, 0.0), &BallFamily::full(&g)).unwrap();
    // a cube of half-width h holds the spike: (h^{-2} h^2)^{1/p} r^{-μ/p}
    let expect = h.powf(-mu / p);
    assert!((v.norm - expect).abs() < 1e-12 * expect);
    assert!((v.argmax_radius - h).abs() < 1e-15);
}

#[test]
fn homogeneous_profile_has_flat_mid_range_profile() {
    // |x|^{-d} with μ = N - dp: r^{-μ/p}‖f‖_{L^p(Q_r(0))} is scale free
    let g = grid(256, 16.0);
    let (d, p) = (0.5, 2.0);
    let mu = 2.0 - d * p;
    let f = homogeneous_radial(g, d, 1.0, g.h());
    let origin = g.points_per_axis / 2;
    let mut vals = Vec::new();
    for k in [16usize, 32, 64, 96] {
        let mut sum = 0.0;
        for i in origin - k..origin + k {
            for j in origin - k..origin + k {
                sum += f.values[g.flat([i, j])].abs().powf(p);
            }
        }
        let r = k as f64 * g.h();
        vals.push(r.powf(-mu / p) * (sum * g.cell_volume()).powf(1.0 / p));
    }
    let (lo, hi) = vals.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    // residual drift is the cell sampling of the core, O(h/r)
    assert!(hi / lo < 1.03, "{vals:?}");
}

#[test]
fn enlarging_the_family_never_decreases_the_norm() {
    let g = grid(64, 5.0);
    let f = random_field(g, 5);
    let spec = NormSpec::new(2.0, 0.7, 0.0);
    let small = morrey_norm(&f, spec, &BallFamily { stride: 8, radii_cells: vec![2, 8] }).unwrap().norm;
    let mid = morrey_norm(&f, spec, &BallFamily::dyadic(&g, 4)).unwrap().norm;
    let big = morrey_norm(&f, spec, &BallFamily::octaves(&g, 1, 3)).unwrap().norm;
    assert!(small <= mid && mid <= big);
}

#[test]
fn sobolev_order_zero_matches_plain_norm() {
    let g = grid(64, 4.0);
    let f = gaussian(g, 0.6, 1.0);
    let b = BallFamily::dyadic(&g, 4);
    let a = morrey_norm(&f, NormSpec::new(2.0, 0.5, 0.0), &b).unwrap().norm;
    let s = sobolev_morrey_norm(&f, NormSpec::new(2.0, 0.5, 0.0), &b).unwrap().norm;
    assert!((a - s).abs() < 1e-12 * a);
}

#[test]
fn sobolev_order_one_of_a_mode() {
    // s = 1 on sin(2π m x/L) gives (2π m/L) cos(...), same Morrey norm as the sine
    let g = grid(64, 4.0);
    let m = 3.0;
    let f = Field::from_fn(g, |[x, _]| (2.0 * PI * m * x / 4.0).sin());
    let rot = Field::from_fn(g, |[x, _]| (2.0 * PI * m * x / 4.0).cos());
    let b = BallFamily::dyadic(&g, 1);
    let s1 = sobolev_morrey_norm(&f, NormSpec::new(2.0, 0.5, 1.0), &b).unwrap().norm;
    let plain = morrey_norm(&rot, NormSpec::new(2.0, 0.5, 0.0), &b).unwrap().norm;
    let k = 2.0 * PI * m / 4.0;
    assert!((s1 - k * plain).abs() < 1e-10 * s1);
}

#[test]
fn morrey_requires_order_zero_and_valid_family() {
    let g = grid(16, 1.0);
    let f = Field::zeros(g);
    assert!(morrey_norm(&f, NormSpec::new(2.0, 0.0, 1.0), &BallFamily::dyadic(&g, 1)).is_err());
    let empty = BallFamily { stride: 1, radii_cells: vec![] };
    assert!(matches!(morrey_norm(&f, NormSpec::new(2.0, 0.0, 0.0), &empty), Err(NormError::EmptyBallFamily)));
}

#[test]
fn scaling_identity_gaussian() {
    let spec = NormSpec::new(2.0, 0.5, 0.0);
    let mut prev = None;
    for m in [64usize, 128] {
        let g = grid(m, 8.0);
        let f = gaussian(g, 1.0, 1.0);
        // identity map: equal up to interpolation rounding
        assert!(scaling_residual(&f, 1.0, spec).unwrap() < 1e-13);
        let r = scaling_residual(&f, 2.0, spec).unwrap();
        assert!(r <= 0.02, "M={m}: {r}");
        if let Some(p) = prev {
            assert!(r / p <= 0.7, "ratio {}", r / p);
        }
        prev = Some(r);
    }
}

#[test]
fn scaling_identity_homogeneous() {
    let g = grid(128, 8.0);
    let f = homogeneous_radial(g, 1.0, 1.0, g.h());
    let r = scaling_residual(&f, 2f64.sqrt(), NormSpec::new(1.5, 0.5, 0.0)).unwrap();
    assert!(r <= 0.02, "{r}");
    assert!(scaling_residual(&f, -1.0, NormSpec::new(1.5, 0.5, 0.0)).is_err());
}

#[test]
fn holder_cases() {
    let g = grid(32, 2.0);
    let f = random_field(g, 1);
    let one = Field::from_fn(g, |_| 1.0);
    let b = BallFamily::full(&g);
    // g ≡ 1 in M_{∞-like}: p2 large with μ2 = 0
    assert_eq!(holder_residual(&f, &one, 2.0, 1e6, 0.5, 0.0, &b).unwrap(), 0.0);
    // Cauchy-Schwarz instance
    assert_eq!(holder_residual(&f, &f, 4.0, 4.0, 1.0, 1.0, &b).unwrap(), 0.0);
    assert!(matches!(holder_residual(&f, &f, 2.0, 2.0, 3.0, 0.0, &b), Err(NormError::ParameterMismatch(_))));
}

#[test]
fn exponent_examples() {
    let e = exponent_report(1.5, 3.0, 1.5, 3.0, 2).unwrap();
    assert!((e.q - 1.5).abs() < 1e-15 && (e.mu - 0.5).abs() < 1e-15 && (e.beta_decay - 0.375).abs() < 1e-15);
    let e = exponent_report(1.2, 4.0, 1.2, 6.0, 2).unwrap();
    assert!((e.q - 1.6).abs() < 1e-15);
    assert!((e.mu - 1.2).abs() < 1e-12);
    assert!((e.beta_decay - 0.32).abs() < 1e-12);
    assert!(e.condition(COND_PR).unwrap().satisfied);
    assert!(!e.condition(COND_RHO).unwrap().satisfied);
    assert!(!e.warnings().is_empty());
    // μ = 0 boundary: p = N(ρ-1)/2
    let e = exponent_report(1.5, 3.0, 2.0, 4.0, 2).unwrap();
    assert_eq!(e.mu, 0.0);
    assert!(exponent_report(1.5, 3.0, 2.5, 4.0, 2).is_err());
}

#[test]
fn first_and_third_hypotheses_never_hold_together() {
    let s = feasibility_scan(60, 60, 40);
    assert_eq!(s.points, 60 * 60 * 40);
    assert!(s.cond_pr > 0 && s.cond_rho > 0);
    assert_eq!(s.both, 0);
    assert!(s.best_joint_margin < 0.0);
}

#[test]
fn xbeta_norm_cases() {
    let g = grid(32, 4.0);
    let e = exponent_report(1.5, 3.0, 1.5, 3.0, 2).unwrap();
    let b = BallFamily::dyadic(&g, 4);
    let z = Field::zeros(g);
    assert_eq!(xbeta_norm(&[0.5, 1.0], &[z.clone(), z], &e, &b).unwrap(), 0.0);
    let f = gaussian(g, 0.7, 1.0);
    let t: f64 = 0.3;
    let one = xbeta_norm(&[t], std::slice::from_ref(&f), &e, &b).unwrap();
    let spec = NormSpec::new(3.0, 0.5, 0.0);
    let expect = t.powf(0.75 + 0.375) * sobolev_morrey_norm(&f, NormSpec { s: 1.0, ..spec }, &b).unwrap().norm
        + t.powf(0.375) * morrey_norm(&f, spec, &b).unwrap().norm;
    assert!((one - expect).abs() < 1e-14 * expect);
    assert!(matches!(xbeta_norm(&[], &[], &e, &b), Err(NormError::EmptyTrajectory)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn holder_never_violated(seed in any::<u64>(), p1 in 1.0f64..6.0, p2 in 1.0f64..6.0, m1 in 0.0f64..1.9, m2 in 0.0f64..1.9) {
        let g = grid(16, 1.5);
        let f = random_field(g, seed);
        let h = random_field(g, seed.wrapping_add(1));
        let r = holder_residual(&f, &h, p1, p2, m1, m2, &BallFamily::full(&g)).unwrap();
        prop_assert_eq!(r, 0.0);
    }

    #[test]
    fn norm_axioms(seed in any::<u64>(), c in -5.0f64..5.0, p in 1.0f64..4.0, mu in 0.0f64..1.9) {
        let g = grid(16, 2.0);
        let f = random_field(g, seed);
        let h = random_field(g, seed ^ 0xabc);
        let spec = NormSpec::new(p, mu, 0.0);
        let b = BallFamily::full(&g);
        let nf = morrey_norm(&f, spec, &b).unwrap().norm;
        let nh = morrey_norm(&h, spec, &b).unwrap().norm;
        let ncf = morrey_norm(&f.scaled(c), spec, &b).unwrap().norm;
        prop_assert!((ncf - c.abs() * nf).abs() <= 1e-12 * nf.max(1.0) * c.abs().max(1.0));
        let nsum = morrey_norm(&f.axpy(1.0, &h), spec, &b).unwrap().norm;
        prop_assert!(nsum <= (nf + nh) * (1.0 + 1e-12));
    }
}
