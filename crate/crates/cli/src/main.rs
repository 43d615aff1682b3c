use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use fracflow::mlf::{ml_eval, MLParams};
use fracflow::norms::{exponent_report, morrey_norm, sobolev_morrey_norm, BallFamily, NormSpec};
use fracflow::solver::{solve, RunStatus};
use fracflow::spectral::{read_fhf1, write_fhf1};
use fracflow::verify::Report;
use fracflow_cli::checks::run_check;
use fracflow_cli::config::{parse_config, RunConfig};
use fracflow_cli::output::{OutDir, VERSION};

/// Exit codes: 0 success or pass, 1 check failure, 2 error.
#[derive(Parser)]
#[command(name = "fracflow", version, about = "Superdiffusive semilinear heat equations: operators, solver and checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "FRACFLOW_THREADS")]
    threads: Option<usize>,
    /// Multiplies every check tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mittag-Leffler evaluation.
    Ml {
        #[command(subcommand)]
        cmd: MlCmd,
    },
    /// Time-march a configuration; writes fields, diagnostics and a summary.
    Solve,
    /// Morrey norms of a field file, or the exponent report.
    Norms {
        #[command(subcommand)]
        cmd: NormsCmd,
    },
    /// Run one named check and write its report.
    Verify { check: String },
    /// Summarize the check reports found in a directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum MlCmd {
    /// E_{α,β}(z).
    Eval {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        zi: f64,
    },
}

#[derive(Subcommand)]
enum NormsCmd {
    /// ‖f‖ in M^s_{p,μ} for an FHF1 field; p, μ, s default to the configuration.
    Morrey {
        field: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
    },
    /// Derived exponents and the individual hypotheses.
    Exponents {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(common: &Common, required: bool) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => parse_config(p)?,
        None if required => bail!("--config is required"),
        None => RunConfig::reference(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    if c.tolerance_scale.is_nan() || c.tolerance_scale <= 0.0 {
        bail!("--tolerance-scale must be positive");
    }
    match cli.cmd {
        Cmd::Ml { cmd: MlCmd::Eval { alpha, beta, z, zi } } => {
            let v = ml_eval(MLParams::new(alpha, beta)?, Complex64::new(z, zi))?;
            let method = serde_json::to_value(v.method)?;
            if zi == 0.0 {
                println!("{:.17e} {}", v.value.re, method.as_str().unwrap_or_default());
            } else {
                println!("{:.17e} {:+.17e}i {}", v.value.re, v.value.im, method.as_str().unwrap_or_default());
            }
            Ok(true)
        }
        Cmd::Solve => solve_cmd(c),
        Cmd::Norms { cmd } => norms_cmd(c, cmd),
        Cmd::Verify { check } => verify_cmd(c, &check),
        Cmd::Report { dir } => report_cmd(&dir),
    }
}

fn solve_cmd(c: &Common) -> Result<bool> {
    let cfg = load(c, true)?;
    let out = OutDir::create(c.out.as_deref().unwrap_or(Path::new("out/solve")), &cfg)?;
    let flow = cfg.flow();
    let data = flow.build_data()?;
    let traj = solve(&data, &flow.problem, &flow.timegrid, &flow.picard)?;
    let balls = BallFamily::octaves(&flow.grid, cfg.norms.stride, cfg.norms.per_octave);
    let mut files = Vec::new();
    let mut norms = Vec::new();
    for (i, f) in traj.fields.iter().enumerate() {
        let name = format!("u_{i:05}.fhf1");
        write_fhf1(&out.path(&name), f)?;
        files.push(name);
        norms.push(morrey_norm(f, cfg.norms.spec, &balls)?.norm);
    }
    let cols: Vec<String> = ["n", "t", "sweeps", "contraction", "final_update", "l2", "linf"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<f64>> = traj
        .diagnostics
        .iter()
        .map(|d| vec![d.n as f64, d.t, d.sweeps as f64, d.contraction.unwrap_or(f64::NAN), d.final_update, d.l2, d.linf])
        .collect();
    out.csv("diagnostics.csv", &cols, &rows)?;
    let ok = traj.status == RunStatus::Completed;
    out.json(
        "summary.json",
        &json!({
            "version": VERSION,
            "status": traj.status,
            "warnings": traj.warnings,
            "saved_times": traj.times,
            "fields": files,
            "morrey_norm": { "spec": cfg.norms.spec, "values": norms },
            "max_sweeps": traj.max_sweeps(),
            "max_contraction": traj.max_contraction(),
            "seed": cfg.seed,
        }),
    )?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
    println!("{:?}: {} saved fields in {}", traj.status, traj.fields.len(), out.root.display());
    Ok(ok)
}

fn norms_cmd(c: &Common, cmd: NormsCmd) -> Result<bool> {
    match cmd {
        NormsCmd::Morrey { field, p, mu, s } => {
            let cfg = load(c, false)?;
            let f = read_fhf1(&field).with_context(|| format!("cannot read field {}", field.display()))?;
            let d = cfg.norms.spec;
            let spec = NormSpec::new(p.unwrap_or(d.p), mu.unwrap_or(d.mu), s.unwrap_or(d.s));
            let balls = BallFamily::octaves(&f.grid, cfg.norms.stride, cfg.norms.per_octave);
            let v = if spec.s == 0.0 { morrey_norm(&f, spec, &balls)? } else { sobolev_morrey_norm(&f, spec, &balls)? };
            let doc = json!({ "field": field, "spec": spec, "value": v });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            if let Some(o) = &c.out {
                OutDir::create(o, &cfg)?.json("summary.json", &doc)?;
            }
            Ok(true)
        }
        NormsCmd::Exponents { alpha, rho, p, r, dim } => {
            let e = exponent_report(alpha, rho, p, r, dim)?;
            println!("{}", serde_json::to_string_pretty(&e)?);
            Ok(true)
        }
    }
}

fn verify_cmd(c: &Common, check: &str) -> Result<bool> {
    let cfg = load(c, false)?;
    let mut reports = run_check(check, &cfg, c.tolerance_scale)?;
    let out = OutDir::create(c.out.as_deref().unwrap_or(&Path::new("out").join(check)), &cfg)?;
    let many = reports.len() > 1;
    for (i, r) in reports.iter_mut().enumerate() {
        let stem = if many { format!("{check}_{i}") } else { check.to_string() };
        out.report(&stem, r)?;
        println!("{}", r.summary_line());
    }
    let pass = reports.iter().all(|r| r.pass);
    out.json(
        "summary.json",
        &json!({
            "version": VERSION,
            "check": check,
            "pass": pass,
            "tolerance_scale": c.tolerance_scale,
            "seed": cfg.seed,
            "reports": reports.iter().map(|r| json!({ "pass": r.pass, "tolerance": r.tolerance, "metrics": r.metrics, "artifacts": r.artifacts })).collect::<Vec<_>>(),
        }),
    )?;
    Ok(pass)
}

fn report_cmd(dir: &Path) -> Result<bool> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    entries.sort();
    let mut reports = Vec::new();
    for p in entries {
        // config, version and summary files are not reports
        if let Ok(r) = serde_json::from_str::<Report>(&std::fs::read_to_string(&p)?) {
            reports.push((p, r));
        }
    }
    if reports.is_empty() {
        bail!("no reports in {}", dir.display());
    }
    for (p, r) in &reports {
        println!("{}  [{}]", r.summary_line(), p.file_name().unwrap_or_default().to_string_lossy());
    }
    let failed = reports.iter().filter(|(_, r)| !r.pass).count();
    println!("{} reports, {} failed", reports.len(), failed);
    Ok(failed == 0)
}
