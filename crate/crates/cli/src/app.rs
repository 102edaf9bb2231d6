//! `run` and `mesh` commands.

use crate::config::{ConfigError, SceneConfig, Study};
use crate::output::{
    cost_csv, near_field_csv, nodal_field_csv, rcs_csv, relerr_csv, summary_csv, OutputDir,
};
use crate::scene::build_scene;
use crate::study::{near_field_study, rcs_study, solve_pair, study_convergence, study_skin, Pair};
use hybridem::post::cost_report;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] hybridem::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Threads(String),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

impl AppError {
    /// 1 config, 2 mesh, 3 solver, 4 self-check mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Core(hybridem::Error::Mesh(_) | hybridem::Error::Parse { .. }) => 2,
            Self::Core(_) | Self::Io(_) | Self::Threads(_) => 3,
            Self::SelfCheck(_) => 4,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Overrides `run.threads`.
    pub threads: Option<usize>,
    pub self_check: bool,
}

/// Files written and the self-check verdicts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<String>,
    pub checks: Vec<(String, bool)>,
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> Result<T, AppError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| AppError::Threads(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn run(config: &Path, out: &Path, opts: &RunOptions) -> Result<RunReport, AppError> {
    let cfg = SceneConfig::load(config)?;
    run_config(&cfg, out, opts)
}

pub fn run_config(cfg: &SceneConfig, out: &Path, opts: &RunOptions) -> Result<RunReport, AppError> {
    let threads = opts.threads.unwrap_or(cfg.run.threads);
    if threads == 0 {
        return Err(ConfigError::Invalid("threads must be at least 1".into()).into());
    }
    let mut dir = OutputDir::create(out)?;
    let checks = with_threads(threads, || execute(cfg, &mut dir))??;
    let files = dir.finish()?;
    let report = RunReport { files, checks };
    if opts.self_check {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        if !failed.is_empty() {
            return Err(AppError::SelfCheck(failed.join("; ")));
        }
    }
    Ok(report)
}

type Checks = Vec<(String, bool)>;

fn execute(cfg: &SceneConfig, dir: &mut OutputDir) -> Result<Checks, AppError> {
    let tol = &cfg.self_check;
    let mut checks = Vec::new();
    match cfg.run.study {
        Study::Solve | Study::Rcs | Study::Nearfield | Study::Compare => {
            let h = cfg.target_h().unwrap_or(0.0);
            let pair = solve_pair(cfg, h)?;
            dir.write("cost.csv", cost_csv(&pair.cost()?))?;
            if cfg.run.study == Study::Solve {
                solve_outputs(cfg, &pair, dir, &mut checks)?;
            }
            if matches!(cfg.run.study, Study::Rcs | Study::Compare) {
                let r = rcs_study(cfg, &pair)?;
                dir.write("rcs.csv", rcs_csv(&r.hybrid))?;
                dir.write("rcs_fem.csv", rcs_csv(&r.fem))?;
                if let Some(o) = &r.oracle {
                    dir.write("rcs_mie.csv", rcs_csv(o))?;
                }
                let mut s = String::from("method,reference,re\n");
                for e in &r.errors {
                    let _ = writeln!(s, "{},{},{}", e.method, e.reference, e.re);
                }
                dir.write("re_vs_oracle.csv", s)?;
                let (reference, re) = match r.error("hybrid", "mie") {
                    Some(re) => ("mie", re),
                    None => ("fem", r.error("hybrid", "fem").unwrap_or(f64::NAN)),
                };
                checks.push((format!("rcs RE hybrid vs {reference} = {re:.3e} <= {:.1e}", tol.rcs_re_max), re <= tol.rcs_re_max));
            }
            if matches!(cfg.run.study, Study::Nearfield | Study::Compare) {
                let n = near_field_study(cfg, &pair)?;
                dir.write("nearfield_hybrid.csv", near_field_csv(&n.hybrid))?;
                dir.write("nearfield_fem.csv", near_field_csv(&n.fem))?;
                dir.write("relerr.csv", relerr_csv(&n.relerr))?;
                let max = n.relerr.max_unmasked();
                let below = n.relerr.fraction_below(0.02);
                dir.write(
                    "nearfield_summary.csv",
                    summary_csv(&[
                        ("unmasked_samples", n.relerr.unmasked() as f64),
                        ("fraction_below_2pct", below),
                        ("max_relerr", max),
                    ]),
                )?;
                checks.push((format!("near-field max error {max:.3e} <= {:.1e}", tol.nearfield_max), max <= tol.nearfield_max));
            }
        }
        Study::Convergence => {
            let c = study_convergence(cfg)?;
            let mut s = String::from("h,re\n");
            for (h, re) in &c.rows {
                let _ = writeln!(s, "{h},{re}");
            }
            dir.write("convergence.csv", s)?;
            dir.write("cost.csv", cost_csv(&c.cost))?;
            let last = c.rows.last().map_or(f64::NAN, |r| r.1);
            checks.push((format!("finest-mesh RE {last:.3e} <= {:.1e}", tol.rcs_re_max), last <= tol.rcs_re_max));
        }
        Study::Skin => {
            let r = study_skin(cfg)?;
            let mut s = String::from("h_m,unknowns,hybrid_peak_a_m2,fem_peak_a_m2,fem_skipped\n");
            for row in &r.rows {
                let fem = row.fem_peak.map_or(String::new(), |p| p.to_string());
                let _ = writeln!(s, "{},{},{},{},{}", row.h, row.unknowns, row.hybrid_peak, fem, u8::from(row.fem_peak.is_none()));
            }
            dir.write("skin_ladder.csv", s)?;
            let mut s = String::from("method,h_m,x,y,j_a_m2\n");
            let mut runs = vec![("fem", &r.fem)];
            runs.extend(r.hybrid.as_ref().map(|h| ("hybrid", h)));
            for (name, m) in runs {
                for (p, j) in m.samples.points.iter().zip(&m.samples.density.values) {
                    let _ = writeln!(s, "{name},{},{},{},{j}", m.h, p.x, p.y);
                }
            }
            dir.write("current_density.csv", s)?;
            let cost = match &r.cost {
                Some(c) => c.clone(),
                None => {
                    let scene = build_scene(cfg, r.fem.h)?;
                    let hybrid = crate::scene::run_hybrid(&scene)?;
                    cost_report(&r.fem.run.cost, &hybrid.cost)?
                }
            };
            dir.write("cost.csv", cost_csv(&cost))?;
            let ratio = r.peak_ratio().unwrap_or(f64::NAN);
            dir.write(
                "skin_summary.csv",
                summary_csv(&[
                    ("hybrid_spread", r.hybrid_spread()),
                    ("fem_spread", r.fem_spread()),
                    ("fem_h_m", r.fem.h),
                    ("matched_hybrid_h_m", r.hybrid.as_ref().map_or(f64::NAN, |h| h.h)),
                    ("peak_ratio", ratio),
                    ("partial", f64::from(u8::from(r.partial))),
                ]),
            )?;
            let ok = (ratio - 1.0).abs() <= tol.peak_ratio_tol;
            checks.push((format!("matched peak ratio {ratio:.4} within {}", tol.peak_ratio_tol), ok));
        }
    }
    Ok(checks)
}

fn solve_outputs(cfg: &SceneConfig, pair: &Pair, dir: &mut OutputDir, checks: &mut Checks) -> Result<(), AppError> {
    let nodes = &pair.scene.mesh.nodes;
    dir.write("field_hybrid.csv", nodal_field_csv(nodes, &pair.hybrid.system.e))?;
    dir.write("field_fem.csv", nodal_field_csv(nodes, &pair.fem.system.e))?;
    let inside: std::collections::HashSet<usize> =
        pair.scene.sie.iter().flat_map(|&c| pair.scene.mesh.triangles_inside(c)).collect();
    let mut outside = vec![true; nodes.len()];
    for &t in &inside {
        for &v in &pair.scene.mesh.triangles[t].nodes {
            outside[v as usize] = false;
        }
    }
    let peak = (0..nodes.len()).filter(|&i| outside[i]).map(|i| pair.fem.system.e[i].norm()).fold(0.0, f64::max);
    let err = (0..nodes.len())
        .filter(|&i| outside[i])
        .map(|i| (pair.hybrid.system.e[i] - pair.fem.system.e[i]).norm())
        .fold(0.0, f64::max)
        / peak;
    let tol = cfg.self_check.nearfield_max;
    checks.push((format!("nodal field hybrid vs FEM {err:.3e} <= {tol:.1e}"), err <= tol));
    Ok(())
}

/// Writes the mesh of the scene at its first element size.
pub fn mesh(config: &Path, out: &Path) -> Result<RunReport, AppError> {
    let cfg = SceneConfig::load(config)?;
    let h = cfg.ladder().first().copied().unwrap_or(0.0);
    let scene = build_scene(&cfg, h)?;
    let mut dir = OutputDir::create(out)?;
    let mut bytes = Vec::new();
    hybridem::mesh::write_mesh(&scene.mesh, &mut bytes)?;
    dir.write_bytes("mesh.txt", bytes)?;
    let m = &scene.mesh;
    dir.write(
        "mesh_summary.csv",
        summary_csv(&[
            ("nodes", m.node_count() as f64),
            ("triangles", m.triangles.len() as f64),
            ("contours", m.contours.len() as f64),
            ("sie_contours", scene.sie.len() as f64),
            ("conformity_issues", m.check_conformity().issues.len() as f64),
        ]),
    )?;
    Ok(RunReport { files: dir.finish()?, checks: Vec::new() })
}
