//! `verify <check>`: the library checks with their acceptance parameters.

use anyhow::{bail, Result};

use fracflow::norms::BallFamily;
use fracflow::solver::FieldGen;
use fracflow::spectral::Grid;
use fracflow::verify::*;

use crate::config::RunConfig;

/// Run one named check. Checks that scan several cases return one report
/// per case; the check passes iff all of them do.
pub fn run_check(name: &str, cfg: &RunConfig, tol_scale: f64) -> Result<Vec<Report>> {
    let s = tol_scale;
    let v = &cfg.verify;
    let alpha = cfg.problem.alpha;
    let flow = cfg.flow();
    let one = |r: Result<Report, VerifyError>| -> Result<Vec<Report>> { Ok(vec![r?]) };
    match name {
        "check_decomposition" => one(check_decomposition(&[1.1, 1.5, 1.9, 1.999], &[1.0, 1.25, 1.5, 2.0], &log_grid(0.5, 100.0, 40), 1e-8 * s, 1e-6 * s)),
        "check_relaxation_mass" => one(check_relaxation_mass(&[1.1, 1.25, 1.5, 1.75, 1.9], 1e-6 * s)),
        "check_identities" => one(check_identities(1e-4, 1e-6 * s, 1e-8 * s)),
        "check_closed_forms" => one(check_closed_forms(100.0, 1001, 1e-12 * s)),
        "check_duhamel" => one(check_duhamel(&[1.25, 1.5, 1.75], 1.0 / 512.0, 3, 1e-4 * s, 0.6)),
        "check_solver_order" => one(check_solver_order(alpha, cfg.picard.panel_rule, 16, 3, (1.7, 2.3))),
        "check_mikhlin" => {
            let xi = log_grid(1e-2, 1e2, 61);
            let pairs = [(1.0, 0.0), (1.0, 1.0), (1.5, 1.0 / alpha), (2.0, 2.0 / alpha), (2.0, 1.9)];
            pairs.iter().map(|&(b, d)| Ok(check_mikhlin(alpha, b, 2.0, d, 2, &xi, 0.1 * s)?)).collect()
        }
        "check_smoothing" => {
            let g = v.smoothing_grid;
            let grid = Grid::new(g.dim, g.points_per_axis, g.length)?;
            let balls = BallFamily::octaves(&grid, 1, 2);
            let (t0, t1, n) = v.smoothing_times;
            let ts = log_grid(t0, t1, n);
            v.smoothing.iter().map(|sp| Ok(check_smoothing(sp, &smoothing_data(sp, grid)?, &ts, &balls, v.smoothing_tol * s)?)).collect()
        }
        "check_norm_layer" => one(check_norm_layer(cfg.seed, 100, 0.02 * s, 1e-6 * s)),
        "check_feasibility" => one(check_feasibility(120, 120, 120)),
        "check_selfsimilarity" => one(check_selfsimilarity(&flow, &v.gammas, &v.probe, v.selfsim_tol * s)),
        "check_decay" => one(check_decay(&flow, &v.decay, v.decay_tol * s)),
        "check_symmetry" => {
            // odd harmonics are tested for antisymmetry under x → -x
            let odd = matches!(flow.data.phi, FieldGen::HarmonicHomogeneous { k, .. } if k % 2 == 1);
            let (group, parity): (&[GridMap], f64) = if odd { (&[GridMap::Rot180], -1.0) } else { (&GridMap::DIHEDRAL, 1.0) };
            one(check_symmetry(&flow, group, parity, v.symmetry_tol * s))
        }
        "check_stability" => one(check_stability(&flow, &v.stability_scales, Perturb::Phi, v.decay.p, v.decay.r, v.stability_tol * s)),
        "extract_profile" => {
            let nodes = v.decay.nodes(flow.timegrid.n_steps);
            let run = run_flow(&flow, &nodes)?;
            let times: Vec<f64> = nodes.iter().map(|&k| run.times[k]).collect();
            let fields = nodes.iter().filter_map(|&k| run.field(k)).collect::<Vec<_>>();
            let p = &flow.problem;
            one(extract_profile(&times, &fields, p.alpha, p.rho, v.probe.inner_cells, v.probe.outer_fraction, v.profile_tol * s))
        }
        other => bail!("unknown check `{other}`; available: {}", CHECK_NAMES.join(", ")),
    }
}
