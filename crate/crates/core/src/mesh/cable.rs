use super::cdt::{mesh_from_cdt, subdivide, CdtInput};
use super::{ContourKind, Mesh};
use crate::geometry::{point_in_polygon, Point2};
use crate::material::Material;
use crate::{Error, Result};
use std::f64::consts::TAU;

/// Round conductors inside a dielectric sheath above planar layers, all
/// inside a circular truncation boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct CableOptions {
    pub conductor_radius: f64,
    /// Distance of each conductor centre from the sheath centre.
    pub conductor_offset: f64,
    /// Polar angles of the conductor centres about the sheath centre.
    pub conductor_angles_deg: Vec<f64>,
    pub sheath_radius: f64,
    pub sheath_center: Point2,
    /// Heights of the planar interfaces, strictly decreasing.
    pub interfaces_y: Vec<f64>,
    /// Layer media from the top (which holds the cable) downwards; one more
    /// than the interfaces.
    pub layers: Vec<Material>,
    pub sheath: Material,
    pub conductor: Material,
    pub truncation_center: Point2,
    pub truncation_radius: f64,
    /// Element size inside the sheath and conductors.
    pub h_inner: f64,
    /// Element size far from the sheath.
    pub h_outer: f64,
    /// Growth of the element size per unit distance from the sheath.
    pub grading: f64,
}

impl CableOptions {
    /// Three copper conductors in a polyethylene sheath above four layers,
    /// at millimetre scale, with the given element size in the cable.
    pub fn scaled(h_inner: f64) -> Self {
        let mm = 1e-3;
        Self {
            conductor_radius: 0.25 * mm,
            conductor_offset: 0.5 * mm,
            conductor_angles_deg: vec![90.0, 210.0, 330.0],
            sheath_radius: 1.0 * mm,
            sheath_center: Point2::new(0.0, 1.5 * mm),
            interfaces_y: vec![0.0, -0.5 * mm, -1.0 * mm],
            layers: [1.0, 2.0, 2.5, 3.0].map(Material::dielectric).to_vec(),
            sheath: Material::dielectric(2.3),
            conductor: Material::COPPER,
            truncation_center: Point2::new(0.0, 0.5 * mm),
            truncation_radius: 4.0 * mm,
            h_inner,
            h_outer: 0.2 * mm,
            grading: 0.3,
        }
    }

    pub fn conductor_centers(&self) -> Vec<Point2> {
        self.conductor_angles_deg
            .iter()
            .map(|a| self.sheath_center + Point2::polar(self.conductor_offset, a.to_radians()))
            .collect()
    }

    /// Material ids: layers first (top layer is the background), then the
    /// sheath, then the conductor.
    pub fn sheath_id(&self) -> u32 {
        self.layers.len() as u32
    }

    pub fn conductor_id(&self) -> u32 {
        self.layers.len() as u32 + 1
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(format!("cable scene: {m}")));
        let positive = [self.conductor_radius, self.sheath_radius, self.truncation_radius, self.h_inner, self.h_outer];
        if positive.iter().any(|v| !(*v > 0.0)) || !(self.grading > 0.0) {
            return bad("radii, element sizes and grading must be positive");
        }
        if self.h_outer < self.h_inner {
            return bad("h_outer must not be smaller than h_inner");
        }
        if self.layers.len() != self.interfaces_y.len() + 1 {
            return bad("need exactly one more layer than interfaces");
        }
        if self.interfaces_y.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("interfaces must be strictly decreasing");
        }
        if self.conductor_angles_deg.is_empty() {
            return bad("at least one conductor is required");
        }
        let cs = self.conductor_centers();
        for (i, c) in cs.iter().enumerate() {
            if c.dist(self.sheath_center) + self.conductor_radius > self.sheath_radius - self.h_inner {
                return bad("conductor does not fit inside the sheath");
            }
            for d in &cs[..i] {
                if c.dist(*d) < 2.0 * self.conductor_radius + self.h_inner {
                    return bad("conductors overlap");
                }
            }
        }
        if let Some(&top) = self.interfaces_y.first() {
            if self.sheath_center.y - self.sheath_radius < top + self.h_inner {
                return bad("sheath must lie above the top interface");
            }
        }
        let rt = self.truncation_radius;
        if self.sheath_center.dist(self.truncation_center) + self.sheath_radius > rt - 2.0 * self.h_outer {
            return bad("sheath must lie inside the truncation circle");
        }
        for &y in &self.interfaces_y {
            if (y - self.truncation_center.y).abs() > rt - self.h_outer {
                return bad("interface does not cross the truncation circle");
            }
        }
        Ok(())
    }
}

fn circle_points(c: Point2, r: f64, n: usize) -> Vec<Point2> {
    (0..n).map(|i| c + Point2::polar(r, TAU * i as f64 / n as f64)).collect()
}

pub fn generate_cable_scene(opts: &CableOptions) -> Result<Mesh> {
    opts.validate()?;
    let size = |p: Point2| {
        let d = p.dist(opts.sheath_center) - opts.sheath_radius;
        if d <= 0.0 {
            opts.h_inner
        } else {
            (opts.h_inner + opts.grading * d).min(opts.h_outer)
        }
    };
    let mut vertices: Vec<Point2> = Vec::new();
    let mut loops = Vec::new();
    let mut push_loop = |pts: Vec<Point2>, kind, vertices: &mut Vec<Point2>| {
        let start = vertices.len() as u32;
        let ids: Vec<u32> = (start..start + pts.len() as u32).collect();
        vertices.extend(pts);
        loops.push((ids, kind));
    };
    let ring = |r: f64, h: f64| ((TAU * r / h).round() as usize).max(8);
    for c in opts.conductor_centers() {
        let n = ring(opts.conductor_radius, opts.h_inner);
        push_loop(circle_points(c, opts.conductor_radius, n), ContourKind::Interface, &mut vertices);
    }
    let n = ring(opts.sheath_radius, opts.h_inner);
    push_loop(circle_points(opts.sheath_center, opts.sheath_radius, n), ContourKind::Interface, &mut vertices);

    let (tc, rt) = (opts.truncation_center, opts.truncation_radius);
    let mut fixed: Vec<f64> = Vec::new();
    for &y in &opts.interfaces_y {
        let dy = y - tc.y;
        let dx = (rt * rt - dy * dy).sqrt();
        fixed.push(dy.atan2(dx).rem_euclid(TAU));
        fixed.push(dy.atan2(-dx).rem_euclid(TAU));
    }
    if fixed.is_empty() {
        fixed.push(0.0);
    }
    fixed.sort_by(f64::total_cmp);
    let mut angles = Vec::new();
    for (i, &a) in fixed.iter().enumerate() {
        let b = if i + 1 < fixed.len() { fixed[i + 1] } else { fixed[0] + TAU };
        let m = (((b - a) * rt / opts.h_outer).round() as usize).max(1);
        angles.extend((0..m).map(|k| a + (b - a) * k as f64 / m as f64));
    }
    let trunc_start = vertices.len() as u32;
    let trunc_pts: Vec<Point2> = angles.iter().map(|&t| tc + Point2::polar(rt, t)).collect();
    let id_at = |t: f64| trunc_start + angles.iter().position(|&a| (a - t).abs() < 1e-12).unwrap() as u32;
    let mut polylines = Vec::new();
    let mut line_ends = Vec::new();
    for &y in &opts.interfaces_y {
        let dy = y - tc.y;
        let dx = (rt * rt - dy * dy).sqrt();
        line_ends.push((id_at(dy.atan2(-dx).rem_euclid(TAU)), id_at(dy.atan2(dx).rem_euclid(TAU))));
    }
    push_loop(trunc_pts, ContourKind::Truncation, &mut vertices);
    for (a, b) in line_ends {
        let (pa, pb) = (vertices[a as usize], vertices[b as usize]);
        let inner = subdivide(pa, pb, &size);
        let mut ids = vec![a];
        for p in inner {
            ids.push(vertices.len() as u32);
            vertices.push(p);
        }
        ids.push(b);
        polylines.push(ids);
    }

    let polys: Vec<Vec<Point2>> =
        loops.iter().map(|(ids, _)| ids.iter().map(|&i| vertices[i as usize]).collect()).collect();
    let nc = opts.conductor_angles_deg.len();
    let region = |p: Point2| {
        if polys[..nc].iter().any(|poly| point_in_polygon(p, poly)) {
            opts.conductor_id()
        } else if point_in_polygon(p, &polys[nc]) {
            opts.sheath_id()
        } else {
            opts.interfaces_y.iter().filter(|&&y| y > p.y).count() as u32
        }
    };
    let mut materials = opts.layers.clone();
    materials.push(opts.sheath);
    materials.push(opts.conductor);
    mesh_from_cdt(CdtInput { vertices, loops, polylines, size: &size, base_size: opts.h_inner, region: &region, materials, background: 0 })
}
