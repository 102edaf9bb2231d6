//! Panel-pair quadrature of the single- and double-layer rooftop integrals.

use crate::geometry::{segment_distance, Point2};
use crate::specfun::{gauss_legendre_unit, green_pair, small_kernel_integrals, SegmentGeometry};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const FAR_ORDER: usize = 8;
const NEAR_ORDER: usize = 10;
const GRADED_ORDER: usize = 6;
const GRADED_BREAKS: [f64; 9] = [0.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 0.5, 0.75, 15.0 / 16.0, 63.0 / 64.0, 1.0];

#[derive(Clone, Copy, Debug)]
pub(crate) struct Panel {
    pub a: Point2,
    pub b: Point2,
    pub len: f64,
    pub normal: Point2,
}

impl Panel {
    fn at(&self, t: f64) -> Point2 {
        self.a.lerp(self.b, t)
    }
}

/// Panels of a closed polygon; panel i runs from node i to node i+1.
pub(crate) fn panels(points: &[Point2]) -> Result<Vec<Panel>> {
    let m = points.len();
    if m < 3 {
        return Err(Error::Domain(format!("contour needs at least 3 nodes, got {m}")));
    }
    (0..m)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % m]);
            let len = a.dist(b);
            if !(len > 0.0) {
                return Err(Error::Domain(format!("contour segment {i} has zero length")));
            }
            Ok(Panel { a, b, len, normal: (b - a).unit().right_normal() })
        })
        .collect()
}

/// ∫ G f and ∫ ∂G/∂n′ f over one source panel for the [rising, falling] halves.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Inner {
    pub g: [Complex64; 2],
    pub dg: [Complex64; 2],
}

fn small_g(k: Complex64, rho: f64) -> Complex64 {
    let a = 1.0 - Complex64::i() * (2.0 / PI) * (crate::specfun::EULER_GAMMA_EXP * k / 2.0).ln();
    -0.25 * Complex64::i() * a - rho.ln() / (2.0 * PI)
}

/// Whether the observation point needs the singularity-subtracted inner rule.
pub(crate) fn is_near(dist: f64, len: f64, k: Complex64) -> bool {
    dist < len || k.norm() * dist < 0.1
}

pub(crate) fn inner(r: Point2, s: &Panel, k: Complex64, near: bool) -> Inner {
    let mut out = Inner::default();
    if !near {
        let (x, w) = gauss_legendre_unit(FAR_ORDER).expect("static order");
        for (&xi, &wi) in x.iter().zip(w) {
            let t = 0.5 * (xi + 1.0);
            let d = r - s.at(t);
            let rho = d.norm();
            let (g, gp) = green_pair(k, rho);
            let dg = k * (d.dot(s.normal) / rho) * gp;
            let wt = 0.5 * wi * s.len;
            out.g[0] += g * t * wt;
            out.g[1] += g * (1.0 - t) * wt;
            out.dg[0] += dg * t * wt;
            out.dg[1] += dg * (1.0 - t) * wt;
        }
        return out;
    }
    let mut geom = SegmentGeometry::new(r, s.a, s.b).expect("panel length checked");
    if geom.p0 <= 1e-12 * geom.l0 {
        geom.p0 = 0.0;
        geom.height = 0.0;
    }
    let sk = small_kernel_integrals(&geom, k);
    out.g = sk.g;
    out.dg = sk.dg;
    let h = geom.height;
    let dgs = |rho: f64| h * (-Complex64::i() * k * k / 8.0 + 1.0 / (2.0 * PI * rho * rho));
    let mut cuts = vec![geom.l1];
    if geom.projects_inside() {
        cuts.push(0.0);
    }
    cuts.push(geom.l2);
    let (x, w) = gauss_legendre_unit(NEAR_ORDER).expect("static order");
    for c in cuts.windows(2) {
        let (mid, half) = (0.5 * (c[0] + c[1]), 0.5 * (c[1] - c[0]));
        for (&xi, &wi) in x.iter().zip(w) {
            let l = mid + half * xi;
            let rho = l.hypot(geom.p0);
            let rise = (l - geom.l1) / geom.l0;
            let (g, gp) = green_pair(k, rho);
            let dg = g - small_g(k, rho);
            let ddg = if h == 0.0 { Complex64::new(0.0, 0.0) } else { k * (h / rho) * gp - dgs(rho) };
            let wt = wi * half;
            out.g[0] += dg * rise * wt;
            out.g[1] += dg * (1.0 - rise) * wt;
            out.dg[0] += ddg * rise * wt;
            out.dg[1] += ddg * (1.0 - rise) * wt;
        }
    }
    out
}

pub(crate) fn panel_distance(p: &Panel, q: &Panel) -> f64 {
    segment_distance(p.a, q.a, q.b)
        .min(segment_distance(p.b, q.a, q.b))
        .min(segment_distance(q.a, p.a, p.b))
        .min(segment_distance(q.b, p.a, p.b))
}

/// Outer rule on [0, 1]: graded towards both ends for close panel pairs.
pub(crate) fn outer_rule(close: bool) -> Vec<(f64, f64)> {
    if !close {
        let (x, w) = gauss_legendre_unit(FAR_ORDER).expect("static order");
        return x.iter().zip(w).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    }
    let (x, w) = gauss_legendre_unit(GRADED_ORDER).expect("static order");
    let mut out = Vec::with_capacity(GRADED_ORDER * (GRADED_BREAKS.len() - 1));
    for c in GRADED_BREAKS.windows(2) {
        let (mid, half) = (0.5 * (c[0] + c[1]), 0.5 * (c[1] - c[0]));
        out.extend(x.iter().zip(w).map(|(&x, &w)| (mid + half * x, half * w)));
    }
    out
}

/// Galerkin 2×2 blocks of ∬ f_test G f_src and ∬ f_test ∂G/∂n′ f_src for a
/// panel pair, indexed [test: start, end][source: start, end].
pub(crate) fn pair_blocks(test: &Panel, src: &Panel, k: Complex64) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let dist = panel_distance(test, src);
    let (mut p, mut u) = ([[Complex64::new(0.0, 0.0); 2]; 2], [[Complex64::new(0.0, 0.0); 2]; 2]);
    // Lossy media: the kernel has decayed below double precision.
    if k.im * dist < -40.0 {
        return (p, u);
    }
    let close = dist < test.len.max(src.len);
    let rule = outer_rule(close);
    for (t, w) in rule {
        let r = test.at(t);
        let near = if close {
            true
        } else {
            let d = segment_distance(r, src.a, src.b);
            is_near(d, src.len, k)
        };
        let v = inner(r, src, k, near);
        let wt = w * test.len;
        let ft = [1.0 - t, t];
        for a in 0..2 {
            // Source start node carries the falling half, end node the rising half.
            p[a][0] += v.g[1] * ft[a] * wt;
            p[a][1] += v.g[0] * ft[a] * wt;
            u[a][0] += v.dg[1] * ft[a] * wt;
            u[a][1] += v.dg[0] * ft[a] * wt;
        }
    }
    (p, u)
}
