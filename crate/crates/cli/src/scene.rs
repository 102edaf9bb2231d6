//! Scenes and single-method pipelines.

use crate::config::{SceneConfig, Shape};
use hybridem::geometry::{point_in_polygon, Point2};
use hybridem::material::{omega, Material};
use hybridem::mesh::{
    generate_annulus_scene, generate_cable_scene, load_mesh, ContourKind, Grading, Mesh, ObjectShape, SceneOptions,
};
use hybridem::pde::{assemble_and_solve, solve_background, HybridSystem, PlaneWave};
use hybridem::post::{compute_rcs, current_density, CurrentDensity, RcsCurve, RunCost};
use hybridem::sie::{build_dsao, recover_interior_fields, BoundaryField, BoundaryOperatorSet, FieldKind};
use hybridem::{Complex64, Error, Result};
use std::f64::consts::TAU;
use std::time::Instant;

/// Conducting region whose current density is reported.
#[derive(Clone, Debug, PartialEq)]
pub struct Conductor {
    pub material: u32,
    pub sigma: f64,
    pub contours: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub mesh: Mesh,
    /// Contours replaced by surface integral equations in the hybrid run.
    pub sie: Vec<usize>,
    /// Far-field integration contour.
    pub rcs_contour: Option<usize>,
    pub conductor: Option<Conductor>,
    pub incident: PlaneWave,
    pub omega: f64,
    pub amplitude: Complex64,
}

/// Builds the scene of `cfg` at element size `h`.
pub fn build_scene(cfg: &SceneConfig, h: f64) -> Result<Scene> {
    let w = omega(cfg.run.frequency);
    let background = cfg.background();
    let amplitude = Complex64::new(cfg.incident.amplitude, 0.0);
    let incident = PlaneWave::new(cfg.incident.angle_deg, amplitude, &background, w);
    let mut scene = Scene { mesh: empty_mesh(), sie: Vec::new(), rcs_contour: None, conductor: None, incident, omega: w, amplitude };
    match cfg.geometry.shape {
        Shape::None | Shape::Circle | Shape::Square => {
            let object = match cfg.geometry.shape {
                Shape::Circle => ObjectShape::Circle { radius: cfg.geometry.radius.unwrap_or(0.0), material: cfg.object_material() },
                Shape::Square => ObjectShape::Square { side: cfg.geometry.side.unwrap_or(0.0), material: cfg.object_material() },
                _ => ObjectShape::None,
            };
            let rt = cfg.mesh.truncation_radius.unwrap_or(0.0);
            let rcs_radius = cfg.mesh.rcs_radius.unwrap_or(0.5 * (object.extent() + rt));
            let grading = match (cfg.mesh.grading_from, cfg.mesh.grading_outer_h) {
                (Some(from_radius), Some(outer_h)) if outer_h > h => Some(Grading { from_radius, outer_h }),
                _ => None,
            };
            let opts = SceneOptions { truncation_radius: rt, target_h: h, background, aux_radii: vec![rcs_radius], grading };
            scene.mesh = generate_annulus_scene(&object, &opts)?;
            scene.rcs_contour = scene.mesh.contours_of(ContourKind::Auxiliary).first().copied();
            if cfg.sie.enabled {
                scene.sie = scene.mesh.contours_of(ContourKind::Interface);
            }
        }
        Shape::Cable => {
            let opts = cfg.cable.options(h);
            scene.mesh = generate_cable_scene(&opts)?;
            let n = opts.conductor_angles_deg.len();
            let contours: Vec<usize> = (0..n).collect();
            if cfg.sie.enabled {
                scene.sie = contours.clone();
            }
            scene.conductor = Some(Conductor { material: opts.conductor_id(), sigma: opts.conductor.sigma, contours });
        }
        Shape::File => {
            let path = cfg.mesh_path().ok_or_else(|| Error::Domain("no mesh file".into()))?;
            scene.mesh = load_mesh(&path)?;
            scene.rcs_contour = scene.mesh.contours_of(ContourKind::Auxiliary).first().copied();
            if cfg.sie.enabled {
                scene.sie = cfg.sie.contours.clone();
            }
        }
    }
    Ok(scene)
}

fn empty_mesh() -> Mesh {
    Mesh { nodes: Vec::new(), triangles: Vec::new(), materials: Vec::new(), contours: Vec::new(), background: 0 }
}

/// One solved method on one mesh.
#[derive(Clone, Debug)]
pub struct MethodRun {
    /// The mesh the system was assembled on (the equivalent model for hybrid runs).
    pub mesh: Mesh,
    pub system: HybridSystem,
    pub sets: Vec<BoundaryOperatorSet>,
    pub cost: RunCost,
}

impl MethodRun {
    pub fn is_hybrid(&self) -> bool {
        !self.sets.is_empty()
    }
}

fn homogeneous_inside(mesh: &Mesh, contour: usize) -> Result<Material> {
    let inside = mesh.triangles_inside(contour);
    let first = inside.first().ok_or_else(|| Error::Mesh(format!("contour {contour} encloses no triangles")))?;
    let id = mesh.triangles[*first].material;
    if inside.iter().any(|&t| mesh.triangles[t].material != id) {
        return Err(Error::Mesh(format!("contour {contour} encloses more than one material")));
    }
    Ok(mesh.materials[id as usize])
}

/// Objects inside the scene's SIE contours replaced by surface admittance
/// operators, the rest solved by finite elements.
pub fn run_hybrid(scene: &Scene) -> Result<MethodRun> {
    let start = Instant::now();
    let inner: Vec<Material> = scene.sie.iter().map(|&c| homogeneous_inside(&scene.mesh, c)).collect::<Result<_>>()?;
    let mesh = scene.mesh.apply_equivalence(&scene.sie)?;
    let sets = scene
        .sie
        .iter()
        .zip(&inner)
        .map(|(&c, m)| {
            let around = mesh.outer_material(c).map(|o| mesh.materials[o as usize]).unwrap_or(Material::VACUUM);
            build_dsao(c, &mesh.contours[c].points(&mesh), m, &around, scene.omega)
        })
        .collect::<Result<Vec<_>>>()?;
    let system = assemble_and_solve(&mesh, &sets, &scene.incident, scene.omega)?;
    let cost = RunCost::from_system(&system, start.elapsed().as_secs_f64());
    Ok(MethodRun { mesh, system, sets, cost })
}

/// Finite elements everywhere on the true-material mesh.
pub fn run_fem(scene: &Scene) -> Result<MethodRun> {
    let start = Instant::now();
    let system = assemble_and_solve(&scene.mesh, &[], &scene.incident, scene.omega)?;
    let cost = RunCost::from_system(&system, start.elapsed().as_secs_f64());
    Ok(MethodRun { mesh: scene.mesh.clone(), system, sets: Vec::new(), cost })
}

/// Scattering width per unit incident amplitude.
pub fn rcs_of(scene: &Scene, run: &MethodRun, angles: &[f64]) -> Result<RcsCurve> {
    let contour = scene.rcs_contour.ok_or_else(|| Error::Mesh("scene has no far-field contour".into()))?;
    let bg = solve_background(&run.mesh, &scene.incident, scene.omega)?;
    let sie = &run.system.sie_contours;
    Ok(compute_rcs(&run.mesh, &run.system.e, &bg.e, contour, sie, scene.omega, angles)?.per_unit_incident(scene.amplitude))
}

/// Current density samples of a conductor: FEM nodes of the conductor
/// triangles, or for a hybrid run the contour nodes plus fields recovered on
/// a polar grid inside each conductor.
#[derive(Clone, Debug)]
pub struct CurrentSamples {
    pub points: Vec<Point2>,
    pub density: CurrentDensity,
}

const RECOVERY_RINGS: usize = 12;
const RECOVERY_SPOKES: usize = 36;

pub fn current_samples(scene: &Scene, run: &MethodRun) -> Result<CurrentSamples> {
    let cond = scene.conductor.as_ref().ok_or_else(|| Error::Domain("scene has no conductor".into()))?;
    let mesh = &run.mesh;
    let mut points = Vec::new();
    let mut e = Vec::new();
    if run.is_hybrid() {
        for set in &run.sets {
            let c = &mesh.contours[set.contour_id];
            let ec: Vec<Complex64> = c.nodes.iter().map(|&v| run.system.e[v as usize]).collect();
            points.extend(c.points(mesh));
            e.extend(ec.iter().copied());
            let centre = set.points.iter().fold(Point2::new(0.0, 0.0), |a, &p| a + p) * (1.0 / set.points.len() as f64);
            let radius = set.points.iter().map(|p| p.dist(centre)).fold(f64::MAX, f64::min);
            let mut grid = vec![centre];
            for i in 1..=RECOVERY_RINGS {
                let r = 0.97 * radius * i as f64 / RECOVERY_RINGS as f64;
                grid.extend((0..RECOVERY_SPOKES).map(|j| centre + Point2::polar(r, TAU * j as f64 / RECOVERY_SPOKES as f64)));
            }
            grid.retain(|p| point_in_polygon(*p, &set.points));
            let rec = recover_interior_fields(set, &BoundaryField::new(ec, FieldKind::E), &grid)?;
            for ((p, v), near) in grid.iter().zip(rec.values).zip(rec.near_boundary) {
                if !near {
                    points.push(*p);
                    e.push(v);
                }
            }
        }
    } else {
        let mut seen = vec![false; mesh.node_count()];
        for t in mesh.triangles.iter().filter(|t| t.material == cond.material) {
            for &v in &t.nodes {
                if !std::mem::replace(&mut seen[v as usize], true) {
                    points.push(mesh.nodes[v as usize]);
                    e.push(run.system.e[v as usize]);
                }
            }
        }
    }
    let density = current_density(&points, &e, cond.sigma)?;
    Ok(CurrentSamples { points, density })
}
