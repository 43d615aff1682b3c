use fracflow::mlf::recip_gamma;
use fracflow::solver::data::*;
use fracflow::solver::*;
use fracflow::spectral::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

// mpmath, 60 digits: α=1.5, λ=1, u0=1, u1=0.5, f = sin
const DUHAMEL_15_T1: f64 = 1.0106061424058537448;
const DUHAMEL_15_T2: f64 = 1.1206091305836954139;
const DUHAMEL_125_T1: f64 = 0.99994737250659100173;

fn gamma_fn(x: f64) -> f64 {
    1.0 / recip_gamma(x)
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values.iter().zip(&b.values).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn rotate(f: &Field) -> Field {
    // (x, y) -> (-y, x) on the node lattice
    let n = f.grid.points_per_axis;
    let mut out = f.clone();
    for i in 0..n {
        for j in 0..n {
            out.values[f.grid.flat([i, j])] = f.values[f.grid.flat([(n - j) % n, i])];
        }
    }
    out
}

#[test]
fn oracle_forms_reduce_to_linear_formula_without_forcing() {
    let a = 1.5;
    let o = scalar_oracle(a, 2.0, 0.7, -0.3, |_| 0.0, &[0.25, 1.0], 1.0 / 64.0).unwrap();
    let sym = Symbols::new(a).unwrap();
    for (i, &t) in o.times.iter().enumerate() {
        let lin = 0.7 * sym.eval(MultIndex::One, t, 2.0).unwrap() - 0.3 * sym.eval(MultIndex::Two, t, 2.0).unwrap();
        assert_eq!(o.nested[i], lin);
        assert_eq!(o.single[i], lin);
    }
}

#[test]
fn single_kernel_form_unit_forcing() {
    for a in [1.25, 1.5, 1.75] {
        let o = scalar_oracle(a, 0.0, 0.0, 0.0, |_| 1.0, &[0.5, 2.0], 1.0 / 256.0).unwrap();
        for (i, &t) in o.times.iter().enumerate() {
            let exact = t.powf(a) / gamma_fn(a + 1.0);
            assert!((o.single[i] - exact).abs() < 1e-12 * exact, "α={a} t={t}");
        }
    }
}

#[test]
fn oracle_matches_extended_precision_reference() {
    let o = scalar_oracle(1.5, 1.0, 1.0, 0.5, f64::sin, &[1.0, 2.0], 1.0 / 512.0).unwrap();
    assert!((o.single[0] - DUHAMEL_15_T1).abs() < 1e-11);
    assert!((o.single[1] - DUHAMEL_15_T2).abs() < 1e-11);
    let o = scalar_oracle(1.25, 1.0, 1.0, 0.5, f64::sin, &[1.0], 1.0 / 512.0).unwrap();
    assert!((o.single[0] - DUHAMEL_125_T1).abs() < 1e-11);
}

#[test]
fn nested_and_single_forms_converge_together() {
    for a in [1.25, 1.5, 1.75] {
        let mut prev: Option<f64> = None;
        for lvl in 0..3 {
            let h = 1.0 / (512.0 * 2f64.powi(lvl));
            let o = scalar_oracle(a, 1.0, 1.0, 0.5, f64::sin, &[0.5, 1.0, 2.0], h).unwrap();
            if let Some(p) = prev {
                assert!(o.max_deviation / p <= 0.6, "α={a}: ratio {}", o.max_deviation / p);
            }
            prev = Some(o.max_deviation);
        }
        assert!(prev.unwrap() <= 1e-4);
    }
}

#[test]
fn oracle_rejects_off_grid_times() {
    assert!(scalar_oracle(1.5, 1.0, 1.0, 0.0, f64::sin, &[0.3], 0.25).is_err());
    assert!(scalar_oracle(2.5, 1.0, 1.0, 0.0, f64::sin, &[0.5], 0.25).is_err());
}

#[test]
fn beta_identity_examples() {
    let r = beta_identity_check(0.0, 0.0, 0.0, 1.3).unwrap();
    assert!((r.numeric - 0.5 * 1.3 * 1.3).abs() < 1e-13);
    assert!(beta_identity_check(0.5, 0.3, 0.2, 1.0).unwrap().residual <= 1e-6);
    let i1 = beta_identity_check(0.5, 0.3, 0.2, 1.0).unwrap().numeric;
    let i2 = beta_identity_check(0.5, 0.3, 0.2, 2.0).unwrap().numeric;
    assert!((i2 / i1 - 2f64.powf(1.0)).abs() < 1e-12);
    assert!(beta_identity_check(0.9, 0.8, -0.4, 0.7).unwrap().residual < 1e-10);
    assert!(beta_identity_check(1.0, 0.0, 0.0, 1.0).is_err());
}

#[test]
fn memory_weights_zero_mode_sum() {
    // exact panel integrals telescope to ∫₀^t τ^{α-1}/Γ(α) = t^α/Γ(α+1)
    let a = 1.5;
    for n in [16usize, 32, 64] {
        let tg = TimeGrid::uniform(1.0, n);
        let w = memory_weights(a, 0.0, &tg, n).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0 / gamma_fn(a + 1.0)).abs() < 1e-14, "n={n}");
    }
    let g = TimeGrid::graded(1.0, 20, 2.0);
    let w = memory_weights(a, 0.0, &g, 20).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0 / gamma_fn(a + 1.0)).abs() < 1e-14);
}

#[test]
fn memory_weights_at_alpha_one_are_exponential_integrals() {
    let c = 3.0;
    let tg = TimeGrid::uniform(1.0, 10);
    let w = memory_weights(1.0, c, &tg, 10).unwrap();
    let dt = 0.1;
    for (j, wj) in w.iter().enumerate() {
        let (a, b) = (j as f64 * dt, (j + 1) as f64 * dt);
        let exact = ((-c * (1.0 - b)).exp() - (-c * (1.0 - a)).exp()) / c;
        assert!((wj - exact).abs() < 1e-14, "j={j}");
    }
    assert!(memory_weights(1.5, 0.0, &tg, 0).is_err());
}

#[test]
fn stiff_modes_keep_their_quasi_static_response() {
    // cΔ^α ≫ 1: u ≈ f/λ, which the weights must carry through the last panel
    for lam in [1e4, 1e6] {
        let o = scalar_oracle(1.5, lam, 0.0, 0.0, |t: f64| 1.0 + t.sin(), &[2.0], 1.0 / 1024.0).unwrap();
        let mut prev = f64::INFINITY;
        for n in [32usize, 64, 128] {
            let r = solve_scalar(1.5, lam, 0.0, 0.0, |t, _| 1.0 + t.sin(), &TimeGrid::uniform(2.0, n), &PicardConfig::default()).unwrap();
            let e = (r.values[n] / o.single[0] - 1.0).abs();
            assert!(e < 0.6 * prev && e < 1e-2, "λ={lam} n={n}: {e}");
            prev = e;
        }
    }
}

#[test]
fn linear_part_cases() {
    let g = Grid::new(2, 32, 2.0).unwrap();
    let phi = Field::from_fn(g, |[x, y]| (PI * x).cos() * (PI * y).sin());
    let data = InitialData::new(phi.clone(), gaussian(g, 0.3, 1.0), Generator::Gaussian, 0.0).unwrap();
    assert!(max_diff(&linear_part(&data, 1.5, 0.0).unwrap(), &phi) < 1e-14);
    // single mode |m| = (1,1), ξ² = 2/L² = 1/2
    let only = InitialData::new(phi.clone(), Field::zeros(g), Generator::File, 0.0).unwrap();
    let t = 0.4;
    let c = 4.0 * PI * PI * 0.5;
    let e = Symbols::new(1.5).unwrap().eval(MultIndex::One, t, c).unwrap();
    assert!(max_diff(&linear_part(&only, 1.5, t).unwrap(), &phi.scaled(e)) < 1e-13);
}

#[test]
fn wave_limit_on_one_mode() {
    // α = 2: cos(2π|ξ|t) φ + sin(2π|ξ|t)/(2π|ξ|) ψ
    let g = Grid::new(1, 16, 1.0).unwrap();
    let phi = Field::from_fn(g, |[x, _]| (2.0 * PI * x).cos());
    let data = InitialData::new(phi.clone(), phi.clone(), Generator::File, 0.0).unwrap();
    let t: f64 = 0.3;
    let w = 2.0 * PI * t;
    let u = linear_part(&data, 2.0, t).unwrap();
    assert!(max_diff(&u, &phi.scaled(w.cos() + w.sin() / (2.0 * PI))) < 1e-13);
}

#[test]
fn nonlinearity_cases() {
    let g = Grid::new(2, 32, 2.0).unwrap();
    let spec = ProblemSpec::new(1.5, 3.0, 0.0, 2.0);
    assert_eq!(nonlinearity(&Field::zeros(g), &spec).unwrap().max_abs(), 0.0);
    let c = 0.7;
    let f = nonlinearity(&Field::from_fn(g, |_| c), &spec).unwrap();
    assert!(f.values.iter().all(|v| (v - 2.0 * c * c * c).abs() < 1e-14));
    assert_eq!(nonlinearity_pointwise(-0.5, 0.0, &spec), 2.0 * -0.125);
    let grad = ProblemSpec { q: Some(1.5), ..ProblemSpec::new(1.5, 3.0, 1.0, 0.0) };
    assert!((nonlinearity_pointwise(0.0, 4.0, &grad) - 2f64.powf(1.5)).abs() < 1e-15);
}

#[test]
fn nonlinearity_local_lipschitz_bound() {
    // |f(a) - f(b)| ≤ C |a - b| (|a|^{ρ-1} + |b|^{ρ-1}) with C = ρ/2 for the power law
    let spec = ProblemSpec::new(1.5, 3.0, 0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let a: f64 = rng.gen_range(-3.0..3.0);
        let b: f64 = rng.gen_range(-3.0..3.0);
        let lhs = (nonlinearity_pointwise(a, 0.0, &spec) - nonlinearity_pointwise(b, 0.0, &spec)).abs();
        let rhs = (a - b).abs() * (a.abs().powi(2) + b.abs().powi(2));
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    assert!(worst <= 1.5 + 1e-12, "{worst}");
}

#[test]
fn zero_coupling_reproduces_linear_part() {
    let g = Grid::new(2, 32, 4.0).unwrap();
    let data = DataSpec::self_similar(1.5, 3.0, 0.1, 0.0).build(g).unwrap();
    let tg = TimeGrid::uniform(0.5, 8);
    let traj = solve(&data, &ProblemSpec::new(1.5, 3.0, 0.0, 0.0), &tg, &PicardConfig::default()).unwrap();
    assert_eq!(traj.status, RunStatus::Completed);
    assert_eq!(traj.times.len(), 9);
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        assert!(max_diff(u, &linear_part(&data, 1.5, *t).unwrap()) <= 1e-12 * u.max_abs().max(1.0));
    }
    assert!(traj.diagnostics.iter().all(|d| d.sweeps == 0));
}

#[test]
fn scalar_solver_converges_to_oracle() {
    let a = 1.5;
    let o = scalar_oracle(a, 1.0, 1.0, 0.5, f64::sin, &[1.0, 2.0], 1.0 / 1024.0).unwrap();
    let err = |n: usize, rule: PanelRule| {
        let cfg = PicardConfig { panel_rule: rule, ..Default::default() };
        let r = solve_scalar(a, 1.0, 1.0, 0.5, |t, _| t.sin(), &TimeGrid::uniform(2.0, n), &cfg).unwrap();
        (r.values[n / 2] - o.single[0]).abs().max((r.values[n] - o.single[1]).abs())
    };
    // right-endpoint sampling is first order
    for n in [32, 64, 128] {
        let ratio = err(n, PanelRule::Right) / err(2 * n, PanelRule::Right);
        assert!((1.7..=2.3).contains(&ratio), "n={n}: {ratio}");
    }
    // midpoint sampling converges at least as fast
    for n in [32, 64] {
        assert!(err(n, PanelRule::Midpoint) / err(2 * n, PanelRule::Midpoint) >= 1.7);
    }
    assert!(err(256, PanelRule::Midpoint) < 1e-4);
}

#[test]
fn scalar_nonlinear_picard_converges() {
    let cfg = PicardConfig::default();
    let r = solve_scalar(1.5, 1.0, 0.3, 0.0, |_, u| -u * u * u, &TimeGrid::uniform(1.0, 40), &cfg).unwrap();
    assert!(r.diagnostics.iter().skip(1).all(|d| d.final_update <= 1e-10 && d.sweeps <= 12));
    assert!(r.values.iter().all(|v| v.is_finite()));
}

#[test]
fn small_homogeneous_data_converges_in_few_sweeps() {
    let g = Grid::new(2, 64, 16.0).unwrap();
    let data = DataSpec::self_similar(1.5, 3.0, 0.02, 0.0).build(g).unwrap();
    let spec = ProblemSpec::new(1.5, 3.0, 1.0, 1.0);
    let traj = solve(&data, &spec, &TimeGrid::uniform(1.0, 20), &PicardConfig::default()).unwrap();
    assert!(traj.max_sweeps() <= 5, "{} {:?}", traj.max_sweeps(), traj.max_contraction());
    assert!(traj.fields.iter().all(Field::is_finite));
}

#[test]
fn contraction_shrinks_with_data() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let spec = ProblemSpec::new(1.5, 3.0, 1.0, 1.0);
    let base = DataSpec::self_similar(1.5, 3.0, 0.4, 0.0).build(g).unwrap();
    let mut prev = f64::INFINITY;
    for s in [1.0, 0.5, 0.25] {
        let traj = solve(&base.scaled(s), &spec, &TimeGrid::uniform(0.5, 10), &PicardConfig::default()).unwrap();
        let c = traj.max_contraction().unwrap();
        assert!(c <= prev, "σ={s}: {c} > {prev}");
        prev = c;
    }
}

#[test]
fn rotation_invariance_is_preserved() {
    let g = Grid::new(2, 32, 6.0).unwrap();
    let data = DataSpec::self_similar(1.5, 3.0, 0.2, 0.0).build(g).unwrap();
    let spec = ProblemSpec::new(1.5, 3.0, 1.0, 1.0);
    let traj = solve(&data, &spec, &TimeGrid::uniform(0.5, 10), &PicardConfig::default()).unwrap();
    for u in &traj.fields {
        assert!(max_diff(u, &rotate(u)) <= 1e-10 * u.max_abs());
    }
}

#[test]
fn large_data_blow_up_is_reported() {
    let g = Grid::new(2, 16, 2.0).unwrap();
    let data = InitialData::new(gaussian(g, 0.5, 50.0), Field::zeros(g), Generator::Gaussian, 0.0).unwrap();
    let spec = ProblemSpec::new(1.5, 3.0, 0.0, 10.0);
    let cfg = PicardConfig { overflow: 1e6, ..Default::default() };
    match solve(&data, &spec, &TimeGrid::uniform(1.0, 20), &cfg) {
        Err(SolveError::Overflow { partial, .. }) => assert_eq!(partial.status, RunStatus::Overflow),
        Err(SolveError::NonContraction { partial, .. }) => {
            assert_eq!(partial.status, RunStatus::NonContraction);
            assert!(!partial.diagnostics.is_empty());
        }
        other => panic!("expected a blow-up report, got {other:?}"),
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let g = Grid::new(2, 16, 2.0).unwrap();
    let data = DataSpec::self_similar(1.5, 3.0, 0.1, 0.0).build(g).unwrap();
    let spec = ProblemSpec::new(1.5, 3.0, 1.0, 1.0);
    let cfg = PicardConfig::default();
    let late = TimeGrid { t_start: 0.1, ..TimeGrid::uniform(1.0, 4) };
    assert!(matches!(solve(&data, &spec, &late, &cfg), Err(SolveError::Domain(_))));
    assert!(solve(&data, &ProblemSpec::new(2.5, 3.0, 0.0, 0.0), &TimeGrid::uniform(1.0, 4), &cfg).is_err());
    let bad = PicardConfig { max_sweeps: 0, ..cfg };
    assert!(solve(&data, &spec, &TimeGrid::uniform(1.0, 4), &bad).is_err());
}

#[test]
fn graded_grid_nodes() {
    let tg = TimeGrid::graded(4.0, 4, 2.0);
    assert_eq!(tg.nodes(), vec![0.0, 0.25, 1.0, 2.25, 4.0]);
    assert!(!tg.is_uniform());
    let g = Grid::new(2, 16, 2.0).unwrap();
    let data = DataSpec::self_similar(1.5, 3.0, 0.1, 0.0).build(g).unwrap();
    let traj = solve(&data, &ProblemSpec::new(1.5, 3.0, 1.0, 1.0), &tg, &PicardConfig::default()).unwrap();
    assert_eq!(traj.times, tg.nodes());
}

#[test]
fn smallness_monitor_warns() {
    let g = Grid::new(2, 16, 2.0).unwrap();
    let data = DataSpec::self_similar(1.5, 3.0, 0.01, 0.0).build(g).unwrap();
    let cfg = PicardConfig { epsilon_data: Some(0.5), ..Default::default() };
    let traj = solve(&data, &ProblemSpec::new(1.5, 3.0, 1.0, 1.0), &TimeGrid::uniform(0.1, 2), &cfg).unwrap();
    assert_eq!(traj.warnings.len(), 1);
    let quiet = PicardConfig { epsilon_data: Some(1e-3), ..Default::default() };
    let traj = solve(&data, &ProblemSpec::new(1.5, 3.0, 1.0, 1.0), &TimeGrid::uniform(0.1, 2), &quiet).unwrap();
    assert!(traj.warnings.is_empty());
}
