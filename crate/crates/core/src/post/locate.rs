use crate::geometry::Point2;
use crate::mesh::Mesh;

/// Bucket grid over triangle bounding boxes.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    lo: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<u32>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
        for p in &mesh.nodes {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nt = mesh.triangles.len().max(1);
        let (w, h) = ((hi.x - lo.x).max(1e-300), (hi.y - lo.y).max(1e-300));
        let cell = (w * h / nt as f64).sqrt() * 1.5;
        let nx = ((w / cell).ceil() as usize).max(1);
        let ny = ((h / cell).ceil() as usize).max(1);
        let mut loc = Self { mesh, lo, cell, nx, ny, start: vec![0; nx * ny + 1], items: Vec::new() };
        let ranges: Vec<_> = (0..mesh.triangles.len()).map(|t| loc.bbox_cells(t)).collect();
        for &(i0, i1, j0, j1) in &ranges {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.start[j * nx + i + 1] += 1;
                }
            }
        }
        for c in 0..nx * ny {
            loc.start[c + 1] += loc.start[c];
        }
        let mut fill = loc.start.clone();
        loc.items = vec![0; loc.start[nx * ny]];
        for (t, &(i0, i1, j0, j1)) in ranges.iter().enumerate() {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let c = j * nx + i;
                    loc.items[fill[c]] = t as u32;
                    fill[c] += 1;
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let i = ((p.x - self.lo.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p.y - self.lo.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    fn bbox_cells(&self, t: usize) -> (usize, usize, usize, usize) {
        let v = self.mesh.vertices(t);
        let lo = Point2::new(v[0].x.min(v[1].x).min(v[2].x), v[0].y.min(v[1].y).min(v[2].y));
        let hi = Point2::new(v[0].x.max(v[1].x).max(v[2].x), v[0].y.max(v[1].y).max(v[2].y));
        let (i0, j0) = self.cell_of(lo);
        let (i1, j1) = self.cell_of(hi);
        (i0, i1, j0, j1)
    }

    /// Triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: Point2) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.cell_of(p);
        let c = j * self.nx + i;
        let tol = -1e-12;
        for &t in &self.items[self.start[c]..self.start[c + 1]] {
            let l = self.mesh.shape(t as usize).eval(p);
            if l.iter().all(|&v| v >= tol) {
                return Some((t as usize, l));
            }
        }
        None
    }
}
