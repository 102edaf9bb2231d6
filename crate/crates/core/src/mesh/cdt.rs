use super::{Contour, ContourKind, Mesh, Triangle};
use crate::geometry::{orient, Point2};
use crate::material::Material;
use crate::{Error, Result};
use spade::{ConstrainedDelaunayTriangulation, DelaunayTriangulation, HierarchyHintGenerator, Triangulation};

type SPoint = spade::Point2<f64>;

/// Constrained-Delaunay input: fixed vertices, closed loops and open
/// polylines through them, a size field for interior points and a region
/// classifier returning the material id at a triangle centroid.
pub(crate) struct CdtInput<'a> {
    pub vertices: Vec<Point2>,
    /// Counter-clockwise loops of vertex ids; the truncation loop must be convex.
    pub loops: Vec<(Vec<u32>, ContourKind)>,
    pub polylines: Vec<Vec<u32>>,
    pub size: &'a dyn Fn(Point2) -> f64,
    /// Smallest size in the field; quadtree cells are this times a power of two.
    pub base_size: f64,
    pub region: &'a dyn Fn(Point2) -> u32,
    pub materials: Vec<Material>,
    pub background: u32,
}

/// Leaf centres of a quadtree refined until each cell is no larger than
/// the local size.
fn quadtree_points(lo: Point2, side: f64, size: &dyn Fn(Point2) -> f64, keep: &mut dyn FnMut(Point2, f64)) {
    let mut stack = vec![(lo, side)];
    while let Some((p, s)) = stack.pop() {
        let c = p + Point2::new(0.5 * s, 0.5 * s);
        let h = size(c);
        if s > h * 1.000_001 {
            let q = 0.5 * s;
            for (dx, dy) in [(0.0, 0.0), (q, 0.0), (0.0, q), (q, q)] {
                stack.push((p + Point2::new(dx, dy), q));
            }
        } else {
            keep(c, h);
        }
    }
}

pub(crate) fn mesh_from_cdt(input: CdtInput<'_>) -> Result<Mesh> {
    let trunc = input
        .loops
        .iter()
        .find(|l| l.1 == ContourKind::Truncation)
        .ok_or_else(|| Error::Mesh("no truncation loop".into()))?;
    let hull: Vec<Point2> = trunc.0.iter().map(|&v| input.vertices[v as usize]).collect();
    let inside_hull = |p: Point2, margin: f64| {
        let n = hull.len();
        (0..n).all(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            orient(a, b, p) / a.dist(b) > margin
        })
    };
    let mut fixed: DelaunayTriangulation<SPoint, (), (), (), HierarchyHintGenerator<f64>> = DelaunayTriangulation::new();
    for v in &input.vertices {
        fixed
            .insert(SPoint::new(v.x, v.y))
            .map_err(|e| Error::Mesh(format!("invalid boundary vertex: {e:?}")))?;
    }
    let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
    for p in &hull {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y);
    let mut side = input.base_size;
    while side < span {
        side *= 2.0;
    }
    let mut vertices = input.vertices.clone();
    quadtree_points(lo, side, input.size, &mut |c, h| {
        if !inside_hull(c, 0.6 * h) {
            return;
        }
        let near = fixed.nearest_neighbor(SPoint::new(c.x, c.y)).map(|v| {
            let q = v.position();
            Point2::new(q.x, q.y).dist(c)
        });
        if near.is_some_and(|d| d >= 0.7 * h) {
            vertices.push(c);
        }
    });
    let mut edges = Vec::new();
    for (l, _) in &input.loops {
        let n = l.len();
        edges.extend((0..n).map(|i| [l[i] as usize, l[(i + 1) % n] as usize]));
    }
    for p in &input.polylines {
        edges.extend(p.windows(2).map(|w| [w[0] as usize, w[1] as usize]));
    }
    let pts: Vec<SPoint> = vertices.iter().map(|v| SPoint::new(v.x, v.y)).collect();
    let mut conflict = false;
    let cdt: ConstrainedDelaunayTriangulation<SPoint> =
        ConstrainedDelaunayTriangulation::try_bulk_load_cdt(pts, edges, |_| conflict = true)
            .map_err(|e| Error::Mesh(format!("triangulation failed: {e:?}")))?;
    if conflict || cdt.num_vertices() != vertices.len() {
        return Err(Error::Mesh("constraint edges intersect or vertices coincide".into()));
    }
    let mut tris = Vec::with_capacity(cdt.num_inner_faces());
    for f in cdt.inner_faces() {
        let mut ids = f.vertices().map(|v| v.fix().index() as u32);
        let [a, b, c] = ids.map(|i| vertices[i as usize]);
        let s = orient(a, b, c);
        if s < 0.0 {
            ids.swap(1, 2);
        } else if s == 0.0 {
            return Err(Error::Mesh("degenerate triangle in constrained triangulation".into()));
        }
        let centroid = (a + b + c) * (1.0 / 3.0);
        tris.push(Triangle { nodes: ids, material: (input.region)(centroid) });
    }
    let contours = input
        .loops
        .into_iter()
        .map(|(nodes, kind)| Contour { nodes, kind, outward: true })
        .collect();
    Mesh::new(vertices, tris, input.materials, contours, input.background)
}

/// Points along [a, b] (both ends excluded) spaced by the local size.
pub(crate) fn subdivide(a: Point2, b: Point2, size: &dyn Fn(Point2) -> f64) -> Vec<Point2> {
    const STEPS: usize = 2000;
    let len = a.dist(b);
    let dt = 1.0 / STEPS as f64;
    let mut s = vec![0.0; STEPS + 1];
    for i in 0..STEPS {
        let (u0, u1) = (i as f64 * dt, (i + 1) as f64 * dt);
        s[i + 1] = s[i] + 0.5 * dt * len * (1.0 / size(a.lerp(b, u0)) + 1.0 / size(a.lerp(b, u1)));
    }
    let n = (s[STEPS].round() as usize).max(1);
    let mut out = Vec::with_capacity(n - 1);
    let mut seg = 0;
    for k in 1..n {
        let target = s[STEPS] * k as f64 / n as f64;
        while s[seg + 1] < target {
            seg += 1;
        }
        let t = (target - s[seg]) / (s[seg + 1] - s[seg]);
        out.push(a.lerp(b, (seg as f64 + t) * dt));
    }
    out
}
