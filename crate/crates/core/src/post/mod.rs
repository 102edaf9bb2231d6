//! Observables computed from solved systems: RCS, near fields, errors,
//! current density and cost accounting.

mod locate;

pub use locate::PointLocator;

use crate::geometry::{point_in_polygon, Point2};
use crate::mesh::{ContourKind, Mesh};
use crate::pde::{HybridSystem, Timings};
use crate::specfun::gauss_legendre_unit;
use crate::{Error, Result};
use num_complex::Complex64;

/// Bistatic 2D scattering width on an angle grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RcsCurve {
    pub angles_deg: Vec<f64>,
    /// σ_2D in metres (linear).
    pub sigma: Vec<f64>,
    pub frequency: f64,
}

impl RcsCurve {
    pub fn new(angles_deg: Vec<f64>, sigma: Vec<f64>, frequency: f64) -> Result<Self> {
        if angles_deg.len() != sigma.len() {
            return Err(Error::Domain("angle and value counts differ".into()));
        }
        if angles_deg.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("RCS angles must be strictly increasing".into()));
        }
        Ok(Self { angles_deg, sigma, frequency })
    }

    /// Divides by |E0|², turning a run with incident amplitude E0 into the
    /// scattering width.
    pub fn per_unit_incident(mut self, amplitude: Complex64) -> Self {
        let a = amplitude.norm_sqr();
        self.sigma.iter_mut().for_each(|s| *s /= a);
        self
    }

    /// 10·log10(σ / 1 m).
    pub fn db(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| 10.0 * s.log10()).collect()
    }
}

/// Uniform angle grid over [0, 360).
pub fn angle_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| 360.0 * i as f64 / count as f64).collect()
}

/// Values on a regular grid; `mask[i]` marks samples without a valid value.
/// Index `i = iy * nx + ix`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid<T> {
    pub origin: Point2,
    pub spacing: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<T>,
    pub mask: Vec<bool>,
}

impl<T> FieldGrid<T> {
    pub fn point(&self, i: usize) -> Point2 {
        let (ix, iy) = (i % self.nx, i / self.nx);
        Point2::new(self.origin.x + ix as f64 * self.spacing.0, self.origin.y + iy as f64 * self.spacing.1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn unmasked(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }
}

impl FieldGrid<f64> {
    /// Fraction of unmasked samples strictly below `threshold`.
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        let n = self.unmasked();
        if n == 0 {
            return 0.0;
        }
        let k = self.values.iter().zip(&self.mask).filter(|(v, m)| !**m && **v < threshold).count();
        k as f64 / n as f64
    }

    pub fn max_unmasked(&self) -> f64 {
        self.values.iter().zip(&self.mask).filter(|(_, m)| !**m).map(|(v, _)| *v).fold(0.0, f64::max)
    }
}

/// Linear interpolation of nodal `e` on an `nx × ny` grid spanning
/// [lo, hi]. Samples outside the mesh or inside an SIE contour are masked.
pub fn sample_near_field(
    mesh: &Mesh,
    e: &[Complex64],
    sie_contours: &[usize],
    lo: Point2,
    hi: Point2,
    nx: usize,
    ny: usize,
) -> Result<FieldGrid<Complex64>> {
    if e.len() != mesh.node_count() {
        return Err(Error::Domain(format!("{} field values for {} nodes", e.len(), mesh.node_count())));
    }
    if nx < 2 || ny < 2 || !(hi.x > lo.x) || !(hi.y > lo.y) {
        return Err(Error::Domain("near-field grid needs nx, ny >= 2 and a non-empty box".into()));
    }
    let polys: Vec<Vec<Point2>> = sie_contours
        .iter()
        .map(|&c| {
            mesh.contours.get(c).map(|c| c.points(mesh)).ok_or_else(|| Error::Mesh(format!("no contour {c}")))
        })
        .collect::<Result<_>>()?;
    let loc = PointLocator::new(mesh);
    let spacing = ((hi.x - lo.x) / (nx - 1) as f64, (hi.y - lo.y) / (ny - 1) as f64);
    let mut grid = FieldGrid {
        origin: lo,
        spacing,
        nx,
        ny,
        values: vec![Complex64::new(0.0, 0.0); nx * ny],
        mask: vec![true; nx * ny],
    };
    for i in 0..nx * ny {
        let p = grid.point(i);
        if polys.iter().any(|poly| point_in_polygon(p, poly)) {
            continue;
        }
        if let Some((t, l)) = loc.locate(p) {
            let n = mesh.triangles[t].nodes;
            grid.values[i] = (0..3).map(|k| e[n[k] as usize] * l[k]).sum();
            grid.mask[i] = false;
        }
    }
    Ok(grid)
}

/// Pointwise |test − ref| / max|ref| over samples valid in both grids.
pub fn relative_error_field(reference: &FieldGrid<Complex64>, test: &FieldGrid<Complex64>) -> Result<FieldGrid<f64>> {
    let same = reference.nx == test.nx
        && reference.ny == test.ny
        && reference.origin.dist(test.origin) <= 1e-12 * reference.origin.norm().max(1.0)
        && (reference.spacing.0 - test.spacing.0).abs() <= 1e-12 * reference.spacing.0
        && (reference.spacing.1 - test.spacing.1).abs() <= 1e-12 * reference.spacing.1;
    if !same {
        return Err(Error::Domain("near-field grids differ".into()));
    }
    let mask: Vec<bool> = reference.mask.iter().zip(&test.mask).map(|(a, b)| *a || *b).collect();
    let peak = reference
        .values
        .iter()
        .zip(&mask)
        .filter(|(_, m)| !**m)
        .map(|(v, _)| v.norm())
        .fold(0.0, f64::max);
    if mask.iter().all(|m| *m) {
        return Err(Error::Domain("no sample is valid in both grids".into()));
    }
    if peak == 0.0 {
        return Err(Error::Domain("reference field vanishes on all valid samples".into()));
    }
    let values = reference
        .values
        .iter()
        .zip(&test.values)
        .zip(&mask)
        .map(|((r, t), m)| if *m { 0.0 } else { (t - r).norm() / peak })
        .collect();
    Ok(FieldGrid { origin: reference.origin, spacing: reference.spacing, nx: reference.nx, ny: reference.ny, values, mask })
}

/// Σ|Δσ|² / Σ|σ_ref|² on linear values over a shared angle grid.
pub fn relative_error_rcs(reference: &RcsCurve, test: &RcsCurve) -> Result<f64> {
    if reference.angles_deg.len() != test.angles_deg.len()
        || reference.angles_deg.iter().zip(&test.angles_deg).any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::Domain("RCS curves use different angle grids".into()));
    }
    let den: f64 = reference.sigma.iter().map(|s| s * s).sum();
    if den == 0.0 {
        return Err(Error::Domain("reference RCS vanishes".into()));
    }
    let num: f64 = reference.sigma.iter().zip(&test.sigma).map(|(r, t)| (t - r).powi(2)).sum();
    Ok(num / den)
}

/// Bistatic scattering width from the scattered field `e − e_inc` on the
/// closed background contour `contour`. The normal derivative enters as
/// the consistent nodal flux of the elements just outside the contour.
/// The result is not divided by the incident amplitude.
pub fn compute_rcs(
    mesh: &Mesh,
    e: &[Complex64],
    e_inc: &[Complex64],
    contour: usize,
    sie_contours: &[usize],
    omega: f64,
    angles_deg: &[f64],
) -> Result<RcsCurve> {
    let n = mesh.node_count();
    if e.len() != n || e_inc.len() != n {
        return Err(Error::Domain("field vectors do not match the mesh".into()));
    }
    let c = mesh.contours.get(contour).ok_or_else(|| Error::Mesh(format!("no contour {contour}")))?;
    if c.kind == ContourKind::Truncation {
        return Err(Error::Mesh("the far-field contour must lie strictly inside the truncation".into()));
    }
    let poly = c.points(mesh);
    let bg = mesh.background;
    for t in 0..mesh.triangles.len() {
        if mesh.triangles[t].material != bg && !point_in_polygon(mesh.centroid(t), &poly) {
            return Err(Error::Mesh(format!("contour {contour} does not enclose all scatterers")));
        }
    }
    for &s in sie_contours {
        let sc = mesh.contours.get(s).ok_or_else(|| Error::Mesh(format!("no contour {s}")))?;
        if s == contour || sc.nodes.iter().any(|&v| !point_in_polygon(mesh.nodes[v as usize], &poly) || c.nodes.contains(&v)) {
            return Err(Error::Mesh(format!("contour {contour} does not enclose SIE contour {s}")));
        }
    }
    let es: Vec<Complex64> = e.iter().zip(e_inc).map(|(a, b)| a - b).collect();
    let (ptr, idx) = mesh.node_triangles();
    let mut outer: Vec<usize> = c
        .nodes
        .iter()
        .flat_map(|&v| idx[ptr[v as usize]..ptr[v as usize + 1]].iter().map(|&t| t as usize))
        .filter(|&t| !point_in_polygon(mesh.centroid(t), &poly))
        .collect();
    outer.sort_unstable();
    outer.dedup();
    let mut on = vec![usize::MAX; n];
    for (i, &v) in c.nodes.iter().enumerate() {
        on[v as usize] = i;
    }
    let mut flux = vec![Complex64::new(0.0, 0.0); c.len()];
    for &t in &outer {
        if mesh.triangles[t].material != bg {
            return Err(Error::Mesh(format!("contour {contour} touches a non-background triangle")));
        }
        let k = crate::pde::element_k(mesh.vertices(t), mesh.material_of(t), omega)?;
        let tn = mesh.triangles[t].nodes;
        for i in 0..3 {
            let slot = on[tn[i] as usize];
            if slot == usize::MAX {
                continue;
            }
            for j in 0..3 {
                flux[slot] += k[i][j] * es[tn[j] as usize];
            }
        }
    }
    let medium = mesh.materials[bg as usize];
    let k = medium.wavenumber(omega);
    let (gx, gw) = gauss_legendre_unit(8)?;
    let m = c.len();
    let j = Complex64::i();
    let sigma = angles_deg
        .iter()
        .map(|&deg| {
            let r = Point2::new(deg.to_radians().cos(), deg.to_radians().sin());
            let mut f = Complex64::new(0.0, 0.0);
            for s in 0..m {
                let (a, b) = (c.nodes[s] as usize, c.nodes[(s + 1) % m] as usize);
                let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
                let len = pa.dist(pb);
                let nrm = (pb - pa).right_normal().unit();
                let dn = j * k * r.dot(nrm);
                for (x, w) in gx.iter().zip(gw) {
                    let u = 0.5 * (x + 1.0);
                    let p = pa.lerp(pb, u);
                    let val = es[a] * (1.0 - u) + es[b] * u;
                    f += dn * val * (j * k * r.dot(p)).exp() * (0.5 * w * len);
                }
                f -= flux[s] * medium.mu_r * (j * k * r.dot(pa)).exp();
            }
            f.norm_sqr() / (4.0 * k.norm())
        })
        .collect();
    RcsCurve::new(angles_deg.to_vec(), sigma, omega / std::f64::consts::TAU)
}

/// Conduction current magnitude σ|E| at sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentDensity {
    pub values: Vec<f64>,
    pub peak: f64,
    pub peak_at: Point2,
}

pub fn current_density(points: &[Point2], e: &[Complex64], sigma: f64) -> Result<CurrentDensity> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("conductivity must be positive, got {sigma}")));
    }
    if points.len() != e.len() || points.is_empty() {
        return Err(Error::Domain("need matching, non-empty points and field values".into()));
    }
    let values: Vec<f64> = e.iter().map(|v| sigma * v.norm()).collect();
    let (i, peak) = values.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(CurrentDensity { values, peak, peak_at: points[i] })
}

/// Resources of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunCost {
    pub unknowns: usize,
    pub peak_bytes: usize,
    pub timings: Timings,
    /// Wall time of the whole run.
    pub total_seconds: f64,
}

impl RunCost {
    pub fn from_system(sys: &HybridSystem, total_seconds: f64) -> Self {
        Self { unknowns: sys.stats.unknowns, peak_bytes: sys.stats.peak_bytes, timings: sys.timings, total_seconds }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostRow {
    pub metric: &'static str,
    pub fem: f64,
    pub hybrid: f64,
    /// hybrid / fem.
    pub ratio: f64,
}

/// FEM versus hybrid cost table. Fails when a run's total differs from the
/// sum of its stages by more than 5 %.
pub fn cost_report(fem: &RunCost, hybrid: &RunCost) -> Result<Vec<CostRow>> {
    for (name, r) in [("fem", fem), ("hybrid", hybrid)] {
        let s = r.timings.total();
        if (r.total_seconds - s).abs() > 0.05 * r.total_seconds.max(s) {
            return Err(Error::Domain(format!(
                "{name} total {:.4} s differs from the stage sum {s:.4} s by more than 5%",
                r.total_seconds
            )));
        }
    }
    let row = |metric, f: f64, h: f64| CostRow { metric, fem: f, hybrid: h, ratio: if f == 0.0 { f64::NAN } else { h / f } };
    let mb = |b: usize| b as f64 / (1024.0 * 1024.0);
    Ok(vec![
        row("unknowns", fem.unknowns as f64, hybrid.unknowns as f64),
        row("peak_memory_mb", mb(fem.peak_bytes), mb(hybrid.peak_bytes)),
        row("time_ys_generation_s", fem.timings.ys_generation, hybrid.timings.ys_generation),
        row("time_matrix_filling_s", fem.timings.matrix_filling, hybrid.timings.matrix_filling),
        row("time_matrix_solving_s", fem.timings.matrix_solving, hybrid.timings.matrix_solving),
        row("time_total_s", fem.total_seconds, hybrid.total_seconds),
    ])
}
