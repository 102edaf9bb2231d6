//! Scene configuration: flat `key = value` sections.

use hybridem::geometry::Point2;
use hybridem::material::Material;
use hybridem::mesh::CableOptions;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Solve,
    Rcs,
    Nearfield,
    Convergence,
    Skin,
    Compare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    None,
    Circle,
    Square,
    Cable,
    File,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub study: Study,
    /// Hz.
    pub frequency: f64,
    #[serde(default = "one")]
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IncidentSection {
    /// Propagation direction, degrees from the x axis.
    pub angle_deg: f64,
    pub amplitude: f64,
}

impl Default for IncidentSection {
    fn default() -> Self {
        Self { angle_deg: 0.0, amplitude: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub shape: Shape,
    pub radius: Option<f64>,
    pub side: Option<f64>,
    /// Relative paths resolve against the config file's directory.
    pub mesh_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialsSection {
    pub object_eps_r: f64,
    pub object_mu_r: f64,
    pub object_sigma: f64,
    pub background_eps_r: f64,
    pub background_mu_r: f64,
    pub background_sigma: f64,
}

impl Default for MaterialsSection {
    fn default() -> Self {
        Self {
            object_eps_r: 1.0,
            object_mu_r: 1.0,
            object_sigma: 0.0,
            background_eps_r: 1.0,
            background_mu_r: 1.0,
            background_sigma: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SieSection {
    pub enabled: bool,
    /// Contour ids for file meshes; built-in scenes pick their object contours.
    pub contours: Vec<usize>,
}

impl Default for SieSection {
    fn default() -> Self {
        Self { enabled: true, contours: Vec::new() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub truncation_radius: Option<f64>,
    pub target_h: Option<f64>,
    /// Radius of the far-field integration contour; midway by default.
    pub rcs_radius: Option<f64>,
    /// Element size stays at target_h up to this radius, then grows.
    pub grading_from: Option<f64>,
    pub grading_outer_h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RcsSection {
    pub angles: usize,
}

impl Default for RcsSection {
    fn default() -> Self {
        Self { angles: 360 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NearfieldSection {
    /// Sampling box; defaults to a square of 1.5 times the object extent.
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl Default for NearfieldSection {
    fn default() -> Self {
        Self { x_min: None, x_max: None, y_min: None, y_max: None, nx: 121, ny: 121 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    /// Element sizes in metres.
    pub ladder: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkinSection {
    /// Element sizes inside the sheath, micrometres.
    pub ladder_um: Vec<f64>,
    /// Largest mesh (nodes) the FEM baseline is run on.
    pub element_budget: usize,
    /// Accuracy that defines the matched hybrid run.
    pub match_tolerance: f64,
}

impl Default for SkinSection {
    fn default() -> Self {
        Self { ladder_um: vec![40.0, 28.0, 20.0, 14.0, 10.0, 7.0, 5.0], element_budget: 400_000, match_tolerance: 0.01 }
    }
}

/// Cable geometry in millimetres; defaults to the scaled three-conductor cable.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CableSection {
    pub conductor_radius_mm: f64,
    pub conductor_offset_mm: f64,
    pub conductor_angles_deg: Vec<f64>,
    pub conductor_sigma: f64,
    pub sheath_radius_mm: f64,
    pub sheath_center_mm: [f64; 2],
    pub sheath_eps_r: f64,
    pub interfaces_y_mm: Vec<f64>,
    pub layers_eps_r: Vec<f64>,
    pub truncation_center_mm: [f64; 2],
    pub truncation_radius_mm: f64,
    pub h_outer_mm: f64,
    pub grading: f64,
}

impl Default for CableSection {
    fn default() -> Self {
        let o = CableOptions::scaled(40e-6);
        let mm = |v: f64| v * 1e3;
        Self {
            conductor_radius_mm: mm(o.conductor_radius),
            conductor_offset_mm: mm(o.conductor_offset),
            conductor_angles_deg: o.conductor_angles_deg.clone(),
            conductor_sigma: o.conductor.sigma,
            sheath_radius_mm: mm(o.sheath_radius),
            sheath_center_mm: [mm(o.sheath_center.x), mm(o.sheath_center.y)],
            sheath_eps_r: o.sheath.eps_r,
            interfaces_y_mm: o.interfaces_y.iter().map(|&y| mm(y)).collect(),
            layers_eps_r: o.layers.iter().map(|m| m.eps_r).collect(),
            truncation_center_mm: [mm(o.truncation_center.x), mm(o.truncation_center.y)],
            truncation_radius_mm: mm(o.truncation_radius),
            h_outer_mm: mm(o.h_outer),
            grading: o.grading,
        }
    }
}

impl CableSection {
    pub fn options(&self, h_inner: f64) -> CableOptions {
        let m = |v: f64| v * 1e-3;
        CableOptions {
            conductor_radius: m(self.conductor_radius_mm),
            conductor_offset: m(self.conductor_offset_mm),
            conductor_angles_deg: self.conductor_angles_deg.clone(),
            sheath_radius: m(self.sheath_radius_mm),
            sheath_center: Point2::new(m(self.sheath_center_mm[0]), m(self.sheath_center_mm[1])),
            interfaces_y: self.interfaces_y_mm.iter().map(|&y| m(y)).collect(),
            layers: self.layers_eps_r.iter().map(|&e| Material::dielectric(e)).collect(),
            sheath: Material::dielectric(self.sheath_eps_r),
            conductor: Material { eps_r: 1.0, mu_r: 1.0, sigma: self.conductor_sigma },
            truncation_center: Point2::new(m(self.truncation_center_mm[0]), m(self.truncation_center_mm[1])),
            truncation_radius: m(self.truncation_radius_mm),
            h_inner,
            h_outer: m(self.h_outer_mm),
            grading: self.grading,
        }
    }
}

/// Tolerances of `--self-check`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelfCheckSection {
    /// Largest RCS relative error against the oracle (or the FEM baseline).
    pub rcs_re_max: f64,
    /// Largest pointwise near-field error against the FEM baseline.
    pub nearfield_max: f64,
    /// Allowed |hybrid/FEM − 1| of the matched peak current density.
    pub peak_ratio_tol: f64,
}

impl Default for SelfCheckSection {
    fn default() -> Self {
        Self { rcs_re_max: 1e-2, nearfield_max: 0.05, peak_ratio_tol: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub run: RunSection,
    #[serde(default)]
    pub incident: IncidentSection,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub materials: MaterialsSection,
    #[serde(default)]
    pub sie: SieSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub rcs: RcsSection,
    #[serde(default)]
    pub nearfield: NearfieldSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub skin: SkinSection,
    #[serde(default)]
    pub cable: CableSection,
    #[serde(default)]
    pub self_check: SelfCheckSection,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> usize {
    1
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn background(&self) -> Material {
        let m = &self.materials;
        Material { eps_r: m.background_eps_r, mu_r: m.background_mu_r, sigma: m.background_sigma }
    }

    pub fn object_material(&self) -> Material {
        let m = &self.materials;
        Material { eps_r: m.object_eps_r, mu_r: m.object_mu_r, sigma: m.object_sigma }
    }

    /// Radius of the smallest origin-centred circle containing the object.
    pub fn extent(&self) -> f64 {
        match self.geometry.shape {
            Shape::Circle => self.geometry.radius.unwrap_or(0.0),
            Shape::Square => self.geometry.side.unwrap_or(0.0) * std::f64::consts::FRAC_1_SQRT_2,
            _ => 0.0,
        }
    }

    pub fn target_h(&self) -> Option<f64> {
        self.mesh.target_h
    }

    /// Element sizes of the study: the ladder for ladder studies, else the
    /// single target size.
    pub fn ladder(&self) -> Vec<f64> {
        match self.run.study {
            Study::Convergence => self.convergence.ladder.clone(),
            Study::Skin => self.skin.ladder_um.iter().map(|h| h / 1e6).collect(),
            _ => self.mesh.target_h.into_iter().collect(),
        }
    }

    pub fn mesh_path(&self) -> Option<PathBuf> {
        self.geometry.mesh_file.as_ref().map(|p| if p.is_absolute() { p.clone() } else { self.base_dir.join(p) })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        positive("run.frequency", self.run.frequency)?;
        if self.run.threads == 0 {
            return bad("run.threads must be at least 1".into());
        }
        positive("incident.amplitude", self.incident.amplitude.abs())?;
        for (name, m) in [("object", self.object_material()), ("background", self.background())] {
            if let Err(e) = m.validate() {
                return bad(format!("{name} material: {e}"));
            }
        }
        let g = &self.geometry;
        match g.shape {
            Shape::Circle if g.radius.is_none() => return bad("geometry.radius is required for a circle".into()),
            Shape::Square if g.side.is_none() => return bad("geometry.side is required for a square".into()),
            Shape::File if g.mesh_file.is_none() => return bad("geometry.mesh_file is required for a file mesh".into()),
            _ => {}
        }
        if let Some(r) = g.radius {
            positive("geometry.radius", r)?;
        }
        if let Some(s) = g.side {
            positive("geometry.side", s)?;
        }
        let builtin = matches!(g.shape, Shape::None | Shape::Circle | Shape::Square);
        if builtin {
            let Some(rt) = self.mesh.truncation_radius else {
                return bad("mesh.truncation_radius is required".into());
            };
            positive("mesh.truncation_radius", rt)?;
            if rt <= self.extent() {
                return bad(format!("truncation radius {rt} does not exceed the object extent {}", self.extent()));
            }
            if let Some(r) = self.mesh.rcs_radius {
                if !(r > self.extent() && r < rt) {
                    return bad(format!("mesh.rcs_radius {r} must lie between the object and the truncation circle"));
                }
            }
        }
        if let Some(h) = self.mesh.grading_outer_h {
            positive("mesh.grading_outer_h", h)?;
            if self.mesh.grading_from.is_none() {
                return bad("mesh.grading_outer_h needs mesh.grading_from".into());
            }
        }
        match self.run.study {
            Study::Convergence => {
                if self.convergence.ladder.len() < 3 {
                    return bad(format!("convergence ladder needs at least 3 sizes, got {}", self.convergence.ladder.len()));
                }
                if !builtin {
                    return bad("convergence studies need a built-in scene".into());
                }
            }
            Study::Skin => {
                if g.shape != Shape::Cable {
                    return bad("skin studies need geometry.shape = \"cable\"".into());
                }
                if self.skin.ladder_um.is_empty() {
                    return bad("skin.ladder_um is empty".into());
                }
                positive("skin.match_tolerance", self.skin.match_tolerance)?;
            }
            _ if g.shape != Shape::Cable && g.shape != Shape::File && self.mesh.target_h.is_none() => {
                return bad("mesh.target_h is required".into());
            }
            _ if g.shape == Shape::Cable && self.mesh.target_h.is_none() => {
                return bad("mesh.target_h (element size inside the sheath) is required".into());
            }
            _ => {}
        }
        for h in self.ladder() {
            positive("element size", h)?;
        }
        if matches!(self.run.study, Study::Rcs | Study::Compare) && self.rcs.angles < 2 {
            return bad("rcs.angles must be at least 2".into());
        }
        let n = &self.nearfield;
        if n.nx < 2 || n.ny < 2 {
            return bad("nearfield.nx and nearfield.ny must be at least 2".into());
        }
        Ok(())
    }
}
