//! Reproduction studies built from the single-method pipelines.

use crate::config::{SceneConfig, Shape};
use crate::scene::{build_scene, current_samples, rcs_of, run_fem, run_hybrid, CurrentSamples, MethodRun, Scene};
use hybridem::geometry::Point2;
use hybridem::oracle::{mie_rcs, MieSolution};
use hybridem::post::{
    angle_grid, cost_report, relative_error_field, relative_error_rcs, sample_near_field, CostRow, FieldGrid, RcsCurve,
};
use hybridem::{Complex64, Error, Result};

/// Hybrid and FEM runs of one scene.
pub struct Pair {
    pub scene: Scene,
    pub hybrid: MethodRun,
    pub fem: MethodRun,
}

impl Pair {
    pub fn cost(&self) -> Result<Vec<CostRow>> {
        cost_report(&self.fem.cost, &self.hybrid.cost)
    }
}

pub fn solve_pair(cfg: &SceneConfig, h: f64) -> Result<Pair> {
    let scene = build_scene(cfg, h)?;
    let hybrid = run_hybrid(&scene)?;
    let fem = run_fem(&scene)?;
    Ok(Pair { scene, hybrid, fem })
}

/// One relative error between two curves.
#[derive(Clone, Debug, PartialEq)]
pub struct ReRow {
    pub method: &'static str,
    pub reference: &'static str,
    pub re: f64,
}

pub struct RcsResult {
    pub hybrid: RcsCurve,
    pub fem: RcsCurve,
    /// Modal series, for circular scatterers.
    pub oracle: Option<RcsCurve>,
    pub errors: Vec<ReRow>,
}

impl RcsResult {
    pub fn error(&self, method: &str, reference: &str) -> Option<f64> {
        self.errors.iter().find(|r| r.method == method && r.reference == reference).map(|r| r.re)
    }
}

pub fn rcs_study(cfg: &SceneConfig, pair: &Pair) -> Result<RcsResult> {
    let angles = angle_grid(cfg.rcs.angles);
    let hybrid = rcs_of(&pair.scene, &pair.hybrid, &angles)?;
    let fem = rcs_of(&pair.scene, &pair.fem, &angles)?;
    let oracle = if cfg.geometry.shape == Shape::Circle {
        let sol = MieSolution::new(cfg.extent(), cfg.object_material(), cfg.background(), cfg.run.frequency)?
            .with_incidence(cfg.incident.angle_deg.to_radians(), 1.0);
        Some(mie_rcs(&sol, &angles)?)
    } else {
        None
    };
    let mut errors = vec![ReRow { method: "hybrid", reference: "fem", re: relative_error_rcs(&fem, &hybrid)? }];
    if let Some(o) = &oracle {
        errors.push(ReRow { method: "hybrid", reference: "mie", re: relative_error_rcs(o, &hybrid)? });
        errors.push(ReRow { method: "fem", reference: "mie", re: relative_error_rcs(o, &fem)? });
    }
    Ok(RcsResult { hybrid, fem, oracle, errors })
}

pub struct NearFieldResult {
    pub hybrid: FieldGrid<Complex64>,
    pub fem: FieldGrid<Complex64>,
    /// |hybrid − FEM| / max|FEM|.
    pub relerr: FieldGrid<f64>,
}

pub fn near_field_study(cfg: &SceneConfig, pair: &Pair) -> Result<NearFieldResult> {
    let nf = &cfg.nearfield;
    let half = 1.5 * cfg.extent().max(f64::MIN_POSITIVE);
    let lo = Point2::new(nf.x_min.unwrap_or(-half), nf.y_min.unwrap_or(-half));
    let hi = Point2::new(nf.x_max.unwrap_or(half), nf.y_max.unwrap_or(half));
    let grid = |run: &MethodRun| {
        sample_near_field(&run.mesh, &run.system.e, &run.system.sie_contours, lo, hi, nf.nx, nf.ny)
    };
    let hybrid = grid(&pair.hybrid)?;
    let fem = grid(&pair.fem)?;
    let relerr = relative_error_field(&fem, &hybrid)?;
    Ok(NearFieldResult { hybrid, fem, relerr })
}

pub struct ConvergenceResult {
    /// (h, RE of the hybrid RCS against the reference), coarse to fine.
    pub rows: Vec<(f64, f64)>,
    pub reference_h: f64,
    /// Costs of the finest hybrid and FEM runs.
    pub cost: Vec<CostRow>,
    /// Both methods on the finest mesh.
    pub finest: Pair,
}

/// Hybrid RCS error over a ladder of element sizes against the FEM
/// solution on the finest mesh.
pub fn study_convergence(cfg: &SceneConfig) -> Result<ConvergenceResult> {
    let mut ladder = cfg.convergence.ladder.clone();
    if ladder.len() < 3 {
        return Err(Error::Domain(format!("convergence ladder needs at least 3 sizes, got {}", ladder.len())));
    }
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup();
    let angles = angle_grid(cfg.rcs.angles);
    let finest = *ladder.last().expect("non-empty ladder");
    let pair = solve_pair(cfg, finest)?;
    let reference = rcs_of(&pair.scene, &pair.fem, &angles)?;
    let cost = pair.cost()?;
    let finest_hybrid = rcs_of(&pair.scene, &pair.hybrid, &angles)?;
    let mut rows = Vec::with_capacity(ladder.len());
    for &h in &ladder[..ladder.len() - 1] {
        let scene = build_scene(cfg, h)?;
        let run = run_hybrid(&scene)?;
        rows.push((h, relative_error_rcs(&reference, &rcs_of(&scene, &run, &angles)?)?));
    }
    rows.push((finest, relative_error_rcs(&reference, &finest_hybrid)?));
    Ok(ConvergenceResult { rows, reference_h: finest, cost, finest: pair })
}

/// One rung of the skin-effect ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct SkinRow {
    pub h: f64,
    pub unknowns: usize,
    pub hybrid_peak: f64,
    /// None when the mesh exceeds the FEM element budget.
    pub fem_peak: Option<f64>,
}

pub struct MatchedRun {
    pub h: f64,
    pub samples: CurrentSamples,
    pub run: MethodRun,
}

pub struct SkinResult {
    pub rows: Vec<SkinRow>,
    /// FEM on the finest mesh within budget.
    pub fem: MatchedRun,
    /// Coarsest hybrid run whose peak lies within the match tolerance of `fem`.
    pub hybrid: Option<MatchedRun>,
    pub cost: Option<Vec<CostRow>>,
    /// True when some rung skipped the FEM baseline.
    pub partial: bool,
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    (hi - lo) / lo
}

impl SkinResult {
    /// (max − min)/min of the hybrid peaks over the ladder.
    pub fn hybrid_spread(&self) -> f64 {
        spread(&self.rows.iter().map(|r| r.hybrid_peak).collect::<Vec<_>>())
    }

    pub fn fem_spread(&self) -> f64 {
        spread(&self.rows.iter().filter_map(|r| r.fem_peak).collect::<Vec<_>>())
    }

    pub fn peak_ratio(&self) -> Option<f64> {
        self.hybrid.as_ref().map(|h| h.samples.density.peak / self.fem.samples.density.peak)
    }
}

/// Peak conductor current density over a ladder of meshes for both methods,
/// and the cost of each at matched accuracy.
pub fn study_skin(cfg: &SceneConfig) -> Result<SkinResult> {
    let mut ladder = cfg.ladder();
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup();
    let mut rows = Vec::with_capacity(ladder.len());
    let mut hybrids = Vec::with_capacity(ladder.len());
    let mut fem: Option<MatchedRun> = None;
    let mut partial = false;
    for &h in &ladder {
        let scene = build_scene(cfg, h)?;
        let run = run_hybrid(&scene)?;
        let samples = current_samples(&scene, &run)?;
        let unknowns = scene.mesh.node_count();
        let fem_peak = if unknowns <= cfg.skin.element_budget {
            let f = run_fem(&scene)?;
            let s = current_samples(&scene, &f)?;
            let peak = s.density.peak;
            fem = Some(MatchedRun { h, samples: s, run: f });
            Some(peak)
        } else {
            partial = true;
            None
        };
        rows.push(SkinRow { h, unknowns, hybrid_peak: samples.density.peak, fem_peak });
        hybrids.push(MatchedRun { h, samples, run });
    }
    let fem = fem.ok_or_else(|| Error::Domain("every ladder mesh exceeds the FEM element budget".into()))?;
    let target = fem.samples.density.peak;
    let hybrid = hybrids
        .into_iter()
        .find(|m| (m.samples.density.peak / target - 1.0).abs() <= cfg.skin.match_tolerance);
    let cost = hybrid.as_ref().map(|h| cost_report(&fem.run.cost, &h.run.cost)).transpose()?;
    Ok(SkinResult { rows, fem, hybrid, cost, partial })
}
