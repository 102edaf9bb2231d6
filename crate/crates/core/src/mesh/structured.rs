use super::{Contour, ContourKind, Mesh, Triangle};
use crate::geometry::{orient, Point2};
use crate::material::Material;
use crate::{Error, Result};
use std::f64::consts::TAU;

/// Scatterer placed at the origin of an annulus scene.
#[derive(Clone, Debug, PartialEq)]
pub enum ObjectShape {
    None,
    Circle { radius: f64, material: Material },
    /// Axis-aligned square centred at the origin.
    Square { side: f64, material: Material },
}

impl ObjectShape {
    /// Radius of the smallest origin-centred circle containing the object.
    pub fn extent(&self) -> f64 {
        match self {
            Self::None => 0.0,
            Self::Circle { radius, .. } => *radius,
            Self::Square { side, .. } => side * std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneOptions {
    pub truncation_radius: f64,
    pub target_h: f64,
    pub background: Material,
    /// Radii of extra auxiliary contours, snapped to the nearest mesh ring.
    pub aux_radii: Vec<f64>,
    /// Coarsening of the background annulus towards the truncation circle.
    pub grading: Option<Grading>,
}

/// Element size `target_h` up to `from_radius`, then growing linearly to
/// `outer_h` at the truncation radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grading {
    pub from_radius: f64,
    pub outer_h: f64,
}

struct Ring {
    ids: Vec<u32>,
    /// Polar angles, increasing within [0, 2π).
    ang: Vec<f64>,
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Point2>,
    tris: Vec<Triangle>,
}

impl Builder {
    fn node(&mut self, p: Point2) -> u32 {
        self.nodes.push(p);
        self.nodes.len() as u32 - 1
    }

    fn tri(&mut self, a: u32, b: u32, c: u32, material: u32) -> Result<()> {
        let s = orient(self.nodes[a as usize], self.nodes[b as usize], self.nodes[c as usize]);
        if !(s > 0.0) {
            return Err(Error::Mesh(format!("generator produced an inverted triangle ({a}, {b}, {c})")));
        }
        self.tris.push(Triangle { nodes: [a, b, c], material });
        Ok(())
    }

    fn circle(&mut self, r: f64, n: usize) -> Ring {
        let mut ring = Ring { ids: Vec::with_capacity(n), ang: Vec::with_capacity(n) };
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            ring.ids.push(self.node(Point2::polar(r, t)));
            ring.ang.push(t);
        }
        ring
    }

    /// Ring on the star-shaped curve r(θ), nodes equally spaced in arc length from θ = 0.
    fn star(&mut self, r: impl Fn(f64) -> f64, h: f64) -> Ring {
        const M: usize = 8192;
        let th: Vec<f64> = (0..=M).map(|i| TAU * i as f64 / M as f64).collect();
        let pts: Vec<Point2> = th.iter().map(|&t| Point2::polar(r(t), t)).collect();
        let mut cum = vec![0.0; M + 1];
        for i in 0..M {
            cum[i + 1] = cum[i] + pts[i].dist(pts[i + 1]);
        }
        let n = ((cum[M] / h).round() as usize).max(8);
        let mut ring = Ring { ids: Vec::with_capacity(n), ang: Vec::with_capacity(n) };
        for i in 0..n {
            let s = cum[M] * i as f64 / n as f64;
            let k = cum.partition_point(|&c| c <= s).clamp(1, M) - 1;
            let f = (s - cum[k]) / (cum[k + 1] - cum[k]);
            let t = th[k] + f * (th[k + 1] - th[k]);
            ring.ids.push(self.node(Point2::polar(r(t), t)));
            ring.ang.push(t);
        }
        ring
    }

    fn fan(&mut self, centre: u32, ring: &Ring, material: u32) -> Result<()> {
        let n = ring.ids.len();
        for i in 0..n {
            self.tri(centre, ring.ids[i], ring.ids[(i + 1) % n], material)?;
        }
        Ok(())
    }

    /// Triangulates the band between two nested rings by merging on polar angle.
    fn stitch(&mut self, inner: &Ring, outer: &Ring, material: u32) -> Result<()> {
        let (na, nb) = (inner.ids.len(), outer.ids.len());
        let ua = |i: usize| inner.ang[i % na] + TAU * (i / na) as f64;
        let ub = |j: usize| outer.ang[j % nb] + TAU * (j / nb) as f64;
        let (mut i, mut j) = (0, 0);
        while i < na || j < nb {
            let advance_inner = if i == na {
                false
            } else if j == nb {
                true
            } else {
                ua(i + 1) <= ub(j + 1)
            };
            let (a, b) = (inner.ids[i % na], outer.ids[j % nb]);
            if advance_inner {
                self.tri(a, b, inner.ids[(i + 1) % na], material)?;
                i += 1;
            } else {
                self.tri(a, b, outer.ids[(j + 1) % nb], material)?;
                j += 1;
            }
        }
        Ok(())
    }
}

fn ring_count(r: f64, h: f64) -> usize {
    ((TAU * r / h).round() as usize).max(6)
}

fn layers(span: f64, h: f64) -> usize {
    ((span / (h * 0.75f64.sqrt())).round() as usize).max(1)
}

/// Polar rings from `start` (exclusive) to `end` (inclusive); returns the rings and radii.
fn polar_band(b: &mut Builder, first: Ring, start: f64, end: f64, h: f64, material: u32) -> Result<Vec<(Ring, f64)>> {
    let n = layers(end - start, h);
    let mut out = vec![(first, start)];
    for i in 1..=n {
        let r = start + (end - start) * i as f64 / n as f64;
        let ring = b.circle(r, ring_count(r, h));
        b.stitch(&out.last().unwrap().0, &ring, material)?;
        out.push((ring, r));
    }
    Ok(out)
}

/// Like [`polar_band`] with the ring spacing following `size(r)`.
fn graded_band(
    b: &mut Builder,
    first: Ring,
    start: f64,
    end: f64,
    size: impl Fn(f64) -> f64,
    material: u32,
) -> Result<Vec<(Ring, f64)>> {
    const STEPS: usize = 4000;
    let step = |r: f64| size(r) * 0.75f64.sqrt();
    let dr = (end - start) / STEPS as f64;
    let mut s = vec![0.0; STEPS + 1];
    for i in 0..STEPS {
        let (r0, r1) = (start + dr * i as f64, start + dr * (i + 1) as f64);
        s[i + 1] = s[i] + 0.5 * dr * (1.0 / step(r0) + 1.0 / step(r1));
    }
    let n = (s[STEPS].round() as usize).max(1);
    let mut out = vec![(first, start)];
    let mut seg = 0;
    for i in 1..=n {
        let r = if i == n {
            end
        } else {
            let target = s[STEPS] * i as f64 / n as f64;
            while s[seg + 1] < target {
                seg += 1;
            }
            let t = (target - s[seg]) / (s[seg + 1] - s[seg]);
            start + dr * (seg as f64 + t)
        };
        let ring = b.circle(r, ring_count(r, size(r)));
        b.stitch(&out.last().unwrap().0, &ring, material)?;
        out.push((ring, r));
    }
    Ok(out)
}

/// Disk centred at `center`; its boundary is tagged as the truncation contour.
pub fn generate_disk_mesh(radius: f64, center: Point2, target_h: f64) -> Result<Mesh> {
    if !(radius > 0.0) || !(target_h > 0.0) || target_h >= radius {
        return Err(Error::Domain(format!("need 0 < target_h < radius, got h={target_h}, r={radius}")));
    }
    if ((TAU * radius / target_h).round() as usize) < 8 {
        return Err(Error::Domain("target_h gives fewer than 8 boundary segments".into()));
    }
    let opts = SceneOptions {
        truncation_radius: radius,
        target_h,
        background: Material::VACUUM,
        aux_radii: vec![],
        grading: None,
    };
    let mut mesh = generate_annulus_scene(&ObjectShape::None, &opts)?;
    for p in &mut mesh.nodes {
        *p = *p + center;
    }
    Ok(mesh)
}

/// Disk of radius `truncation_radius` around an origin-centred object, with the
/// object boundary, the truncation circle and any auxiliary rings as contours.
pub fn generate_annulus_scene(object: &ObjectShape, opts: &SceneOptions) -> Result<Mesh> {
    let (rt, h) = (opts.truncation_radius, opts.target_h);
    if !(rt > 0.0) || !(h > 0.0) || h >= rt {
        return Err(Error::Domain(format!("need 0 < target_h < truncation radius, got h={h}, R={rt}")));
    }
    if ((TAU * rt / h).round() as usize) < 8 {
        return Err(Error::Domain("target_h gives fewer than 8 boundary segments".into()));
    }
    let mut b = Builder::default();
    let mut materials = vec![opts.background];
    let mut contours = Vec::new();
    let (first, start) = match object {
        ObjectShape::None => {
            let c = b.node(Point2::new(0.0, 0.0));
            let r1 = rt / layers(rt, h) as f64;
            let ring = b.circle(r1, ring_count(r1, h));
            b.fan(c, &ring, 0)?;
            (ring, r1)
        }
        ObjectShape::Circle { radius, material } => {
            let a = *radius;
            if !(a > 0.0) || a >= rt - 0.5 * h {
                return Err(Error::Domain(format!("object radius {a} does not fit inside truncation radius {rt}")));
            }
            if ((TAU * a / h).round() as usize) < 8 {
                return Err(Error::Domain("target_h gives fewer than 8 object segments".into()));
            }
            materials.push(*material);
            let c = b.node(Point2::new(0.0, 0.0));
            let r1 = a / layers(a, h) as f64;
            let ring = b.circle(r1, ring_count(r1, h));
            b.fan(c, &ring, 1)?;
            let inner = polar_band(&mut b, ring, r1, a, h, 1)?;
            let (obj, _) = inner.into_iter().last().unwrap();
            contours.push(Contour { nodes: obj.ids.clone(), kind: ContourKind::Interface, outward: true });
            (obj, a)
        }
        ObjectShape::Square { side, material } => {
            let a = 0.5 * side;
            let r0 = 2.5 * a;
            if !(a > 0.0) || r0 >= rt - h {
                return Err(Error::Domain(format!("square of side {side} does not fit inside truncation radius {rt}")));
            }
            materials.push(*material);
            let ns = 2 * ((a / h).round() as usize).max(2);
            let id0 = b.nodes.len() as u32;
            for j in 0..=ns {
                for i in 0..=ns {
                    let x = -a + side * i as f64 / ns as f64;
                    let y = -a + side * j as f64 / ns as f64;
                    b.node(Point2::new(x, y));
                }
            }
            let g = |i: usize, j: usize| id0 + (j * (ns + 1) + i) as u32;
            let half = ns / 2;
            for j in 0..ns {
                for i in 0..ns {
                    let (p00, p10, p11, p01) = (g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1));
                    if (i < half) == (j < half) {
                        b.tri(p00, p10, p11, 1)?;
                        b.tri(p00, p11, p01, 1)?;
                    } else {
                        b.tri(p00, p10, p01, 1)?;
                        b.tri(p10, p11, p01, 1)?;
                    }
                }
            }
            let mut walk = Vec::with_capacity(4 * ns);
            walk.extend((half..ns).map(|j| g(ns, j)));
            walk.extend((1..=ns).rev().map(|i| g(i, ns)));
            walk.extend((1..=ns).rev().map(|j| g(0, j)));
            walk.extend((0..ns).map(|i| g(i, 0)));
            walk.extend((0..half).map(|j| g(ns, j)));
            let ang = walk
                .iter()
                .map(|&v| {
                    let p = b.nodes[v as usize];
                    p.y.atan2(p.x).rem_euclid(TAU)
                })
                .collect();
            let sq = Ring { ids: walk, ang };
            contours.push(Contour { nodes: sq.ids.clone(), kind: ContourKind::Interface, outward: true });
            let nt = layers(r0 - a, h);
            let s = move |t: f64| a / t.cos().abs().max(t.sin().abs());
            let mut prev = sq;
            for k in 1..=nt {
                let tk = k as f64 / nt as f64;
                let ring = if k == nt {
                    b.circle(r0, ring_count(r0, h))
                } else {
                    b.star(|t| (1.0 - tk) * s(t) + tk * r0, h)
                };
                b.stitch(&prev, &ring, 0)?;
                prev = ring;
            }
            (prev, r0)
        }
    };
    let outer = match opts.grading {
        None => polar_band(&mut b, first, start, rt, h, 0)?,
        Some(g) => {
            if !(g.outer_h >= h) || !(g.from_radius >= start) || !(g.from_radius < rt) {
                return Err(Error::Domain(format!("invalid grading {g:?} for h={h}, R={rt}")));
            }
            let size = |r: f64| {
                if r <= g.from_radius {
                    h
                } else {
                    h + (g.outer_h - h) * (r - g.from_radius) / (rt - g.from_radius)
                }
            };
            graded_band(&mut b, first, start, rt, size, 0)?
        }
    };
    for &ra in &opts.aux_radii {
        if !(ra > start && ra < rt) {
            return Err(Error::Domain(format!("auxiliary radius {ra} outside the background annulus")));
        }
        let k = (1..outer.len() - 1)
            .min_by(|&p, &q| (outer[p].1 - ra).abs().total_cmp(&(outer[q].1 - ra).abs()))
            .ok_or_else(|| Error::Domain("annulus too thin for auxiliary contours".into()))?;
        contours.push(Contour { nodes: outer[k].0.ids.clone(), kind: ContourKind::Auxiliary, outward: true });
    }
    let (last, _) = outer.last().unwrap();
    contours.push(Contour { nodes: last.ids.clone(), kind: ContourKind::Truncation, outward: true });
    Mesh::new(b.nodes, b.tris, materials, contours, 0)
}
