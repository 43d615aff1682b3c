use fracflow::norms::BallFamily;
use fracflow::solver::{DataSpec, FieldGen, FlowConfig, PanelRule, PicardConfig, ProblemSpec, TimeGrid};
use fracflow::spectral::{Field, Grid, MultIndex};
use fracflow::verify::*;
use proptest::prelude::*;

fn small_flow(m: usize, kappa: f64, phi: FieldGen, n_steps: usize) -> FlowConfig {
    FlowConfig {
        grid: Grid::new(2, m, 16.0).unwrap(),
        problem: ProblemSpec::new(1.5, 3.0, kappa, kappa),
        data: DataSpec { phi, psi: FieldGen::Zero, epsilon_m: None },
        timegrid: TimeGrid::uniform(1.0, n_steps),
        picard: PicardConfig::default(),
    }
}

fn radial(eps: f64) -> FieldGen {
    FieldGen::HomogeneousRadial { degree: 1.0, amplitude: eps }
}

#[test]
fn decomposition_check_on_a_coarse_grid() {
    let r = check_decomposition(&[1.5], &[1.0, 2.0], &log_grid(0.5, 100.0, 8), 1e-8, 1e-6).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
    assert_eq!(r.curves[0].rows.len(), 16);
}

#[test]
fn relaxation_mass_literal_target_holds_only_at_four_thirds() {
    // |1 - 2/α| = 2 - 2/α only at α = 4/3
    assert!(check_relaxation_mass(&[4.0 / 3.0], 1e-6).unwrap().pass);
    let r = check_relaxation_mass(&[1.5], 1e-6).unwrap();
    assert!(!r.pass);
    assert!(r.get("max_dev_two_over_alpha_minus_one").unwrap() < 1e-10);
}

#[test]
#[ignore = "unattainable: the mass magnitude is 2/α - 1"]
fn strict_relaxation_mass_target() {
    assert!(check_relaxation_mass(&[1.1, 1.25, 1.5, 1.75, 1.9], 1e-6).unwrap().pass);
}

#[test]
fn identities_and_closed_forms_pass() {
    assert!(check_identities(1e-4, 1e-6, 1e-8).unwrap().pass);
    assert!(check_closed_forms(100.0, 21, 1e-12).unwrap().pass);
}

#[test]
fn duhamel_forms_converge_together() {
    let r = check_duhamel(&[1.5], 1.0 / 128.0, 3, 1e-3, 0.6).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
}

#[test]
fn right_rule_is_first_order() {
    let r = check_solver_order(1.5, PanelRule::Right, 16, 2, (1.7, 2.3)).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
    assert_eq!(r.get("linear_deviation"), Some(0.0));
}

#[test]
fn midpoint_rule_is_second_order() {
    let r = check_solver_order(1.5, PanelRule::Midpoint, 16, 2, (3.4, 4.6)).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
}

#[test]
#[ignore = "unattainable: the midpoint rule converges at second order"]
fn strict_midpoint_error_halves() {
    assert!(check_solver_order(1.5, PanelRule::Midpoint, 16, 3, (1.7, 2.3)).unwrap().pass);
}

#[test]
fn mikhlin_admissible_symbols_are_bounded() {
    let xi = log_grid(1e-2, 1e2, 41);
    for (beta, delta) in [(1.0, 0.0), (1.5, 1.0), (2.0, 4.0 / 3.0)] {
        let r = check_mikhlin(1.5, beta, 2.0, delta, 2, &xi, 0.1).unwrap();
        assert!(r.pass, "β={beta} δ={delta}: {:?}", r.metrics);
        assert_eq!(r.get("admissible"), Some(1.0));
    }
    // above k the symbol grows like |ξ|^{δ-k}
    let r = check_mikhlin(1.5, 1.0, 2.0, 2.5, 2, &xi, 0.1).unwrap();
    assert!(!r.pass);
    assert!((r.get("slope_order_0").unwrap() - 0.5).abs() < 0.01);
    assert!(check_mikhlin(1.5, 1.0, 2.0, 0.0, 3, &xi, 0.1).is_err());
}

#[test]
#[ignore = "unattainable: at δ = k the symbol tends to a constant"]
fn strict_mikhlin_negative_control() {
    let r = check_mikhlin(1.5, 1.0, 2.0, 2.0, 2, &log_grid(1e-2, 1e2, 61), 0.1).unwrap();
    let slope = (0..3).map(|o| r.get(&format!("slope_order_{o}")).unwrap()).fold(f64::MIN, f64::max);
    assert!(slope > 0.1, "{slope}");
}

#[test]
fn norm_layer_and_feasibility() {
    let r = check_norm_layer(3, 10, 0.02, 1e-6).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
    assert_eq!(r.get("holder_residual"), Some(0.0));
    let f = check_feasibility(20, 20, 20).unwrap();
    assert!(f.pass);
    assert_eq!(f.get("joint_points"), Some(0.0));
}

#[test]
fn smoothing_items_on_a_small_grid() {
    let grid = Grid::new(2, 128, 6.0).unwrap();
    let balls = BallFamily::octaves(&grid, 1, 2);
    let ts = log_grid(1e-2, 1.0, 5);
    for j in [MultIndex::One, MultIndex::Two, MultIndex::AlphaAlpha] {
        let gamma2 = if j == MultIndex::Two { 0.0 } else { 1.0 };
        let s = SmoothingSpec { alpha: 1.5, gamma1: 0.0, gamma2, p1: 2.0, p2: 3.0, mu: 0.5, j, dim: 2 };
        let r = check_smoothing(&s, &smoothing_data(&s, grid).unwrap(), &ts, &balls, 10.0).unwrap();
        assert!(r.pass, "{j:?}: {:?}", r.metrics);
    }
}

#[test]
fn smoothing_rejects_inadmissible_exponents() {
    // λ = 3 + 0.75 - 0.5 > 2
    let s = SmoothingSpec { alpha: 1.5, gamma1: 0.0, gamma2: 3.0, p1: 2.0, p2: 3.0, mu: 0.5, j: MultIndex::One, dim: 2 };
    assert!((s.lambda() - 3.25).abs() < 1e-15);
    let grid = Grid::new(2, 32, 6.0).unwrap();
    let f = smoothing_data(&s, grid).unwrap();
    let e = check_smoothing(&s, &f, &[0.1, 1.0], &BallFamily::dyadic(&grid, 1), 10.0);
    assert!(matches!(e, Err(VerifyError::Precondition(_))));
}

#[test]
fn self_similarity_at_unit_scale_is_exact() {
    let cfg = small_flow(64, 1.0, radial(0.005), 12);
    let r = check_selfsimilarity(&cfg, &[1.0], &ProbeSpec::default(), 0.05).unwrap();
    assert_eq!(r.get("R_gamma_1.000000"), Some(0.0));
    assert!(r.pass);
}

#[test]
fn self_similarity_requires_homogeneous_data() {
    let cfg = small_flow(32, 1.0, FieldGen::Gaussian { width: 1.0, amplitude: 0.1 }, 4);
    assert!(check_selfsimilarity(&cfg, &[2f64.sqrt()], &ProbeSpec::default(), 0.05).is_err());
}

#[test]
fn decay_check_skips_non_homogeneous_data() {
    let cfg = small_flow(32, 1.0, FieldGen::Gaussian { width: 1.0, amplitude: 0.1 }, 4);
    let r = check_decay(&cfg, &DecaySpec::default(), 0.1).unwrap();
    assert!(r.pass);
    assert_eq!(r.get("skipped"), Some(1.0));
}

#[test]
fn decay_window_must_hold_three_nodes() {
    let cfg = small_flow(32, 1.0, radial(0.005), 4);
    let e = check_decay(&cfg, &DecaySpec::default(), 0.1);
    assert!(matches!(e, Err(VerifyError::WindowTooShort(1))), "{e:?}");
}

#[test]
fn symmetry_is_kept_or_broken_as_expected() {
    let inv = check_symmetry(&small_flow(32, 1.0, radial(0.05), 6), &GridMap::DIHEDRAL, 1.0, 1e-10).unwrap();
    assert!(inv.pass, "{:?}", inv.metrics);
    let odd = FieldGen::HarmonicHomogeneous { k: 1, degree: 1.0, amplitude: 0.05 };
    let mut cfg = small_flow(32, 0.0, odd, 6);
    cfg.problem.kappa2 = 1.0;
    assert!(check_symmetry(&cfg, &[GridMap::Rot180], -1.0, 1e-10).unwrap().pass);
    cfg.problem.kappa1 = 1.0;
    let broken = check_symmetry(&cfg, &[GridMap::Rot180], -1.0, 1e-6).unwrap();
    assert!(!broken.pass && broken.get("residual").unwrap() > 1e-6);
}

#[test]
fn small_perturbations_respond_linearly() {
    let cfg = small_flow(32, 1.0, radial(0.01), 6);
    let r = check_stability(&cfg, &[1e-3, 1e-2], Perturb::Phi, 1.5, 3.0, 2.0).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
    let ratio = r.get("max_ratio").unwrap();
    assert!(ratio > 0.5 && ratio < 2.0, "{ratio}");
}

#[test]
fn exact_self_similar_family_collapses() {
    let (alpha, rho) = (1.5, 3.0);
    let grid = Grid::new(2, 128, 16.0).unwrap();
    let times = [0.5, 1.0, 2.0];
    let fields: Vec<Field> = times
        .iter()
        .map(|&t: &f64| {
            let s = t.powf(0.5 * alpha);
            Field::from_fn(grid, |x| t.powf(-alpha / (rho - 1.0)) * (-(x[0] * x[0] + x[1] * x[1]) / (s * s)).exp())
        })
        .collect();
    // what remains is linear interpolation along the ray
    let r = extract_profile(&times, &fields, alpha, rho, 4, 0.4, 0.02).unwrap();
    assert!(r.pass, "{:?}", r.metrics);
    assert!(extract_profile(&[0.0], &fields[..1], alpha, rho, 4, 0.4, 1e-3).is_err());
}

#[test]
fn report_round_trips_through_json() {
    let r = check_closed_forms(10.0, 5, 1e-12).unwrap();
    let back: Report = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    assert!(r.summary_line().starts_with("PASS check_closed_forms"));
    assert_eq!(CHECK_NAMES.len(), 15);
}

#[test]
fn grid_maps_form_the_dihedral_group() {
    let grid = Grid::new(2, 16, 1.0).unwrap();
    let f = Field::new(grid, (0..256).map(|k| (k * k % 17) as f64).collect()).unwrap();
    let r90 = GridMap::Rot90;
    assert_eq!(r90.apply(&r90.apply(&r90.apply(&r90.apply(&f)))), f);
    assert_eq!(r90.apply(&r90.apply(&f)), GridMap::Rot180.apply(&f));
    assert_eq!(GridMap::Rot270.apply(&r90.apply(&f)), f);
    for m in [GridMap::ReflectX, GridMap::ReflectY, GridMap::ReflectDiag, GridMap::ReflectAnti] {
        assert_eq!(m.apply(&m.apply(&f)), f, "{m:?}");
    }
}

proptest! {
    #[test]
    fn ls_slope_recovers_affine_lines(a in -5.0..5.0f64, b in -5.0..5.0f64, n in 3usize..30) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.3 - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((ls_slope(&x, &y) - a).abs() < 1e-10);
    }

    #[test]
    fn log_grid_is_geometric(lo in 1e-3..1.0f64, span in 1.0..1e3f64, n in 3usize..40) {
        let g = log_grid(lo, lo * span, n);
        prop_assert_eq!(g.len(), n);
        prop_assert!((g[0] / lo - 1.0).abs() < 1e-12);
        prop_assert!((g[n - 1] / (lo * span) - 1.0).abs() < 1e-12);
        let q = g[1] / g[0];
        for w in g.windows(2) {
            prop_assert!((w[1] / w[0] / q - 1.0).abs() < 1e-9);
        }
    }
}
