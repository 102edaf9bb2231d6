//! Conforming triangular meshes with tagged boundary contours.

mod cable;
mod cdt;
mod io;
mod structured;

pub use cable::{generate_cable_scene, CableOptions};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use structured::{generate_annulus_scene, generate_disk_mesh, Grading, ObjectShape, SceneOptions};

use crate::geometry::{orient, point_in_polygon, polygon_area, Point2};
use crate::material::Material;
use crate::{Error, Result};
use std::collections::HashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub nodes: [u32; 3],
    pub material: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContourKind {
    /// Material interface that may host an SIE.
    Interface,
    /// Interface carrying an SIE in the equivalent model.
    Sie,
    /// Outer boundary of the computational domain.
    Truncation,
    /// Bookkeeping curve, e.g. a far-field integration path.
    Auxiliary,
}

impl ContourKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Interface => "interface",
            Self::Sie => "sie",
            Self::Truncation => "truncation",
            Self::Auxiliary => "aux",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "interface" => Self::Interface,
            "sie" => Self::Sie,
            "truncation" => Self::Truncation,
            "aux" => Self::Auxiliary,
            _ => return None,
        })
    }

    pub fn sie_eligible(self) -> bool {
        matches!(self, Self::Interface | Self::Sie)
    }
}

/// Closed polyline through mesh nodes, stored counter-clockwise without
/// repeating the first node.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    pub nodes: Vec<u32>,
    pub kind: ContourKind,
    /// The right-hand normal of each segment points out of the enclosed region.
    pub outward: bool,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Segment endpoints (node ids), cyclic.
    pub fn segments(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let n = self.nodes.len();
        (0..n).map(move |i| (self.nodes[i], self.nodes[(i + 1) % n]))
    }

    pub fn points(&self, mesh: &Mesh) -> Vec<Point2> {
        self.nodes.iter().map(|&i| mesh.nodes[i as usize]).collect()
    }
}

/// Linear shape-function data of one triangle: N_i = (a_i + b_i x + c_i y) / 2Δ.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub area: f64,
}

impl Shape {
    pub fn new(p: [Point2; 3]) -> Self {
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        let mut c = [0.0; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            a[i] = p[j].x * p[k].y - p[k].x * p[j].y;
            b[i] = p[j].y - p[k].y;
            c[i] = p[k].x - p[j].x;
        }
        Self { a, b, c, area: 0.5 * orient(p[0], p[1], p[2]) }
    }

    pub fn eval(&self, q: Point2) -> [f64; 3] {
        let s = 0.5 / self.area;
        [0, 1, 2].map(|i| (self.a[i] + self.b[i] * q.x + self.c[i] * q.y) * s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point2>,
    pub triangles: Vec<Triangle>,
    pub materials: Vec<Material>,
    pub contours: Vec<Contour>,
    pub background: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformityIssue {
    pub contour: usize,
    pub segment: usize,
    pub reason: String,
}

/// Contour segments that are not properly supported by the triangulation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConformityReport {
    pub issues: Vec<ConformityIssue>,
}

impl ConformityReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

impl Mesh {
    /// Validates every invariant. Clockwise triangles and contours are
    /// reoriented rather than rejected.
    pub fn new(
        nodes: Vec<Point2>,
        mut triangles: Vec<Triangle>,
        materials: Vec<Material>,
        mut contours: Vec<Contour>,
        background: u32,
    ) -> Result<Self> {
        let n = nodes.len();
        if let Some(i) = nodes.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Mesh(format!("node {i} has non-finite coordinates")));
        }
        for (i, m) in materials.iter().enumerate() {
            m.validate().map_err(|e| Error::Mesh(format!("material {i}: {e}")))?;
        }
        if background as usize >= materials.len() {
            return Err(Error::Mesh(format!("background material {background} undefined")));
        }
        let mut used = vec![false; n];
        let mut seen = HashSet::with_capacity(triangles.len());
        for (e, t) in triangles.iter_mut().enumerate() {
            let [a, b, c] = t.nodes;
            if t.nodes.iter().any(|&v| v as usize >= n) {
                return Err(Error::Mesh(format!("triangle {e} references a missing node")));
            }
            if a == b || b == c || a == c {
                return Err(Error::Mesh(format!("triangle {e} repeats a node")));
            }
            if t.material as usize >= materials.len() {
                return Err(Error::Mesh(format!("triangle {e} references missing material {}", t.material)));
            }
            let s = orient(nodes[a as usize], nodes[b as usize], nodes[c as usize]);
            if s == 0.0 || !s.is_finite() {
                return Err(Error::Mesh(format!("triangle {e} is degenerate")));
            }
            if s < 0.0 {
                t.nodes.swap(1, 2);
            }
            let mut key = t.nodes;
            key.sort_unstable();
            if !seen.insert(key) {
                return Err(Error::Mesh(format!("triangle {e} duplicates another triangle")));
            }
            for &v in &t.nodes {
                used[v as usize] = true;
            }
        }
        if let Some(i) = used.iter().position(|&u| !u) {
            return Err(Error::Mesh(format!("node {i} is not used by any triangle")));
        }
        for (ci, c) in contours.iter_mut().enumerate() {
            if c.nodes.len() < 3 {
                return Err(Error::Mesh(format!("contour {ci} has fewer than 3 nodes")));
            }
            if c.nodes.iter().any(|&v| v as usize >= n) {
                return Err(Error::Mesh(format!("contour {ci} references a missing node")));
            }
            let mut uniq = c.nodes.clone();
            uniq.sort_unstable();
            uniq.dedup();
            if uniq.len() != c.nodes.len() {
                return Err(Error::Mesh(format!("contour {ci} visits a node twice")));
            }
            let pts: Vec<Point2> = c.nodes.iter().map(|&v| nodes[v as usize]).collect();
            if polygon_area(&pts) < 0.0 {
                c.nodes.reverse();
            }
            c.outward = true;
            let pts: Vec<Point2> = c.nodes.iter().map(|&v| nodes[v as usize]).collect();
            let m = pts.len();
            if m <= 4096 {
                for i in 0..m {
                    for j in i + 2..m {
                        if i == 0 && j == m - 1 {
                            continue;
                        }
                        if segments_cross(pts[i], pts[(i + 1) % m], pts[j], pts[(j + 1) % m]) {
                            return Err(Error::Mesh(format!("contour {ci} self-intersects at segments {i} and {j}")));
                        }
                    }
                }
            }
        }
        Ok(Self { nodes, triangles, materials, contours, background })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn vertices(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].nodes.map(|v| self.nodes[v as usize])
    }

    pub fn shape(&self, t: usize) -> Shape {
        Shape::new(self.vertices(t))
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        0.5 * orient(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.vertices(t);
        (a + b + c) * (1.0 / 3.0)
    }

    pub fn material_of(&self, t: usize) -> &Material {
        &self.materials[self.triangles[t].material as usize]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Triangles incident to each node, in compressed form.
    pub fn node_triangles(&self) -> (Vec<usize>, Vec<u32>) {
        let n = self.nodes.len();
        let mut ptr = vec![0usize; n + 1];
        for t in &self.triangles {
            for &v in &t.nodes {
                ptr[v as usize + 1] += 1;
            }
        }
        for i in 0..n {
            ptr[i + 1] += ptr[i];
        }
        let mut fill = ptr.clone();
        let mut idx = vec![0u32; ptr[n]];
        for (e, t) in self.triangles.iter().enumerate() {
            for &v in &t.nodes {
                idx[fill[v as usize]] = e as u32;
                fill[v as usize] += 1;
            }
        }
        (ptr, idx)
    }

    /// Sorted neighbour lists of every node.
    pub fn node_adjacency(&self) -> Vec<Vec<u32>> {
        let (ptr, idx) = self.node_triangles();
        (0..self.nodes.len())
            .map(|v| {
                let mut nb: Vec<u32> = idx[ptr[v]..ptr[v + 1]]
                    .iter()
                    .flat_map(|&t| self.triangles[t as usize].nodes)
                    .filter(|&u| u as usize != v)
                    .collect();
                nb.sort_unstable();
                nb.dedup();
                nb
            })
            .collect()
    }

    pub fn contours_of(&self, kind: ContourKind) -> Vec<usize> {
        (0..self.contours.len()).filter(|&i| self.contours[i].kind == kind).collect()
    }

    pub fn truncation(&self) -> Option<usize> {
        self.contours_of(ContourKind::Truncation).into_iter().next()
    }

    /// Triangles whose centroid lies inside the contour.
    pub fn triangles_inside(&self, contour: usize) -> Vec<usize> {
        let poly = self.contours[contour].points(self);
        let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
        for p in &poly {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (0..self.triangles.len())
            .filter(|&t| {
                let c = self.centroid(t);
                c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y && point_in_polygon(c, &poly)
            })
            .collect()
    }

    /// Lists contour segments that are not mesh edges with the expected
    /// triangles on each side.
    pub fn check_conformity(&self) -> ConformityReport {
        let (ptr, idx) = self.node_triangles();
        let mut issues = Vec::new();
        for (ci, c) in self.contours.iter().enumerate() {
            for (si, (a, b)) in c.segments().enumerate() {
                let (mut left, mut right) = (0, 0);
                for &t in &idx[ptr[a as usize]..ptr[a as usize + 1]] {
                    let tn = self.triangles[t as usize].nodes;
                    if !tn.contains(&b) {
                        continue;
                    }
                    let ia = tn.iter().position(|&v| v == a).unwrap();
                    if tn[(ia + 1) % 3] == b {
                        left += 1;
                    } else {
                        right += 1;
                    }
                }
                let expect_right = if c.kind == ContourKind::Truncation { 0 } else { 1 };
                if left != 1 || right != expect_right {
                    let reason = if left + right == 0 {
                        "segment is not a mesh edge".to_string()
                    } else {
                        format!("{left} triangle(s) inside and {right} outside")
                    };
                    issues.push(ConformityIssue { contour: ci, segment: si, reason });
                }
            }
        }
        ConformityReport { issues }
    }

    /// Equivalent model: triangles inside each listed contour take the
    /// material surrounding that contour and the contours become SIE contours.
    pub fn apply_equivalence(&self, contour_ids: &[usize]) -> Result<Mesh> {
        let mut out = self.clone();
        for &ci in contour_ids {
            let c = self.contours.get(ci).ok_or_else(|| Error::Mesh(format!("no contour {ci}")))?;
            if !c.kind.sie_eligible() {
                return Err(Error::Mesh(format!("contour {ci} of kind {} cannot host an SIE", c.kind.as_str())));
            }
        }
        for &ci in contour_ids {
            for &cj in contour_ids {
                if ci == cj {
                    continue;
                }
                let outer = self.contours[cj].points(self);
                let p = self.nodes[self.contours[ci].nodes[0] as usize];
                if self.contours[cj].nodes.contains(&self.contours[ci].nodes[0]) || point_in_polygon(p, &outer) {
                    return Err(Error::Mesh(format!("contour {ci} is nested in or touches contour {cj}")));
                }
            }
        }
        for &ci in contour_ids {
            let fill = self
                .outer_material(ci)
                .ok_or_else(|| Error::Mesh(format!("contour {ci} has no triangle outside it")))?;
            for t in self.triangles_inside(ci) {
                out.triangles[t].material = fill;
            }
            out.contours[ci].kind = ContourKind::Sie;
        }
        Ok(out)
    }

    /// Material of the triangles directly inside a contour (from its first segment).
    pub fn inner_material(&self, contour: usize) -> Option<u32> {
        self.side_material(contour, true)
    }

    /// Material of the triangles directly outside a contour.
    pub fn outer_material(&self, contour: usize) -> Option<u32> {
        self.side_material(contour, false)
    }

    fn side_material(&self, contour: usize, inside: bool) -> Option<u32> {
        let c = &self.contours[contour];
        let (a, b) = (c.nodes[0], c.nodes[1]);
        self.triangles
            .iter()
            .find(|t| {
                (0..3).any(|i| {
                    let (p, q) = (t.nodes[i], t.nodes[(i + 1) % 3]);
                    if inside {
                        p == a && q == b
                    } else {
                        p == b && q == a
                    }
                })
            })
            .map(|t| t.material)
    }
}
