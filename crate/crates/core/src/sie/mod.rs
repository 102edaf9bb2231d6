//! Dense boundary operators on SIE contours: Gram, single- and double-layer
//! matrices, the surface admittance operator and its differential form, and
//! interior field recovery.

mod panels;

use crate::geometry::{point_in_polygon, segment_distance, Point2};
use crate::material::Material;
use crate::{Error, Result};
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;
use panels::{inner, is_near, pair_blocks, panels, Panel};
use rayon::prelude::*;
use std::time::Instant;

/// Jump factor of the boundary integral equation for points on a contour.
pub const T_BOUNDARY: f64 = 0.5;

const COND_WARN: f64 = 1e12;
const COND_FAIL: f64 = 1e15;

/// Gram matrix ∫ f_m f_n of the rooftops on a closed polygon.
pub fn assemble_l(points: &[Point2]) -> Result<Mat<f64>> {
    let ps = panels(points)?;
    let m = ps.len();
    let mut l = Mat::zeros(m, m);
    for (i, p) in ps.iter().enumerate() {
        let j = (i + 1) % m;
        l[(i, i)] += p.len / 3.0;
        l[(j, j)] += p.len / 3.0;
        l[(i, j)] += p.len / 6.0;
        l[(j, i)] += p.len / 6.0;
    }
    Ok(l)
}

/// P = jωμ ∬ f_m G f_n and U = −∬ f_m ∂G/∂n′ f_n, assembled together.
fn assemble_pu(ps: &[Panel], k: Complex64, jwmu: Complex64) -> (Mat<Complex64>, Mat<Complex64>) {
    let m = ps.len();
    let zero = Complex64::new(0.0, 0.0);
    let rows: Vec<[Vec<Complex64>; 4]> = ps
        .par_iter()
        .map(|test| {
            let mut acc = [vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m]];
            for (j, src) in ps.iter().enumerate() {
                let (p, u) = pair_blocks(test, src, k);
                let jn = (j + 1) % m;
                for a in 0..2 {
                    acc[a][j] += p[a][0];
                    acc[a][jn] += p[a][1];
                    acc[2 + a][j] += u[a][0];
                    acc[2 + a][jn] += u[a][1];
                }
            }
            acc
        })
        .collect();
    let mut p = Mat::zeros(m, m);
    let mut u = Mat::zeros(m, m);
    for (i, acc) in rows.iter().enumerate() {
        let rows_of = [i, (i + 1) % m];
        for a in 0..2 {
            let r = rows_of[a];
            for c in 0..m {
                p[(r, c)] += jwmu * acc[a][c];
                u[(r, c)] -= acc[2 + a][c];
            }
        }
    }
    (p, u)
}

fn medium(material: &Material, omega: f64) -> Result<(Complex64, Complex64)> {
    material.validate()?;
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("angular frequency {omega} must be positive")));
    }
    Ok((material.wavenumber(omega), material.jwmu(omega)))
}

/// Single-layer matrix [P]_{mn} = jωμ ∬ f_m(r) G(r, r′) f_n(r′).
pub fn assemble_p(points: &[Point2], material: &Material, omega: f64) -> Result<Mat<Complex64>> {
    let ps = panels(points)?;
    let (k, jwmu) = medium(material, omega)?;
    Ok(assemble_pu(&ps, k, jwmu).0)
}

/// Double-layer matrix [U]_{mn} = −∬ f_m(r) ∂G/∂n′ f_n(r′), n̂′ outward.
pub fn assemble_u(points: &[Point2], material: &Material, omega: f64) -> Result<Mat<Complex64>> {
    let ps = panels(points)?;
    let (k, jwmu) = medium(material, omega)?;
    Ok(assemble_pu(&ps, k, jwmu).1)
}

fn norm1(a: &Mat<Complex64>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Hager–Higham estimate of ‖A⁻¹‖₁ from an LU factorization.
fn inverse_norm1(lu: &PartialPivLu<Complex64>, n: usize) -> f64 {
    let mut x = Mat::<Complex64>::from_fn(n, 1, |_, _| Complex64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0;
    let mut last = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x);
        est = (0..n).map(|i| y[(i, 0)].norm()).sum::<f64>();
        let xi = Mat::<Complex64>::from_fn(n, 1, |i, _| {
            let v = y[(i, 0)];
            if v.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                v / v.norm()
            }
        });
        let z = lu.solve_adjoint(&xi);
        let (jmax, zmax) = (0..n).map(|i| (i, z[(i, 0)].norm())).fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[(i, 0)]).re).sum();
        if zmax <= ztx || jmax == last {
            break;
        }
        last = jmax;
        x = Mat::from_fn(n, 1, |i, _| Complex64::new(if i == jmax { 1.0 } else { 0.0 }, 0.0));
    }
    est
}

/// SAO together with the 1-norm condition estimate of P.
fn sao(l: &Mat<f64>, p: &Mat<Complex64>, u: &Mat<Complex64>, t: f64) -> Result<(Mat<Complex64>, f64)> {
    let m = p.nrows();
    if p.ncols() != m || l.nrows() != m || l.ncols() != m || u.nrows() != m || u.ncols() != m {
        return Err(Error::Domain("operator dimensions differ".into()));
    }
    let lu = p.partial_piv_lu();
    let cond = norm1(p) * inverse_norm1(&lu, m);
    if !cond.is_finite() || cond >= COND_FAIL {
        return Err(Error::Singular(format!("P is numerically singular (condition estimate {cond:.3e})")));
    }
    let rhs = Mat::<Complex64>::from_fn(m, m, |i, j| t * l[(i, j)] - u[(i, j)]);
    let y = lu.solve(&rhs);
    Ok((y, cond))
}

/// Surface admittance operator Y = P⁻¹(T·L − U), by LU solve.
pub fn build_sao(l: &Mat<f64>, p: &Mat<Complex64>, u: &Mat<Complex64>, t: f64) -> Result<Mat<Complex64>> {
    Ok(sao(l, p, u, t)?.0)
}

/// Operators of one SIE contour: the original medium, the background that
/// replaces it, and their difference.
#[derive(Clone, Debug)]
pub struct BoundaryOperatorSet {
    pub contour_id: usize,
    pub points: Vec<Point2>,
    pub inner: Material,
    pub background: Material,
    pub omega: f64,
    pub l: Mat<f64>,
    pub p: Mat<Complex64>,
    pub u: Mat<Complex64>,
    pub p_hat: Mat<Complex64>,
    pub u_hat: Mat<Complex64>,
    pub y: Mat<Complex64>,
    pub y_hat: Mat<Complex64>,
    /// Y − Ŷ: maps boundary E to the equivalent electric current J.
    pub y_s: Mat<Complex64>,
    pub cond_p: f64,
    pub cond_p_hat: f64,
    pub warnings: Vec<String>,
    /// Wall time spent building the set.
    pub seconds: f64,
}

impl BoundaryOperatorSet {
    pub fn size(&self) -> usize {
        self.points.len()
    }
}

/// Builds L, P, U, P̂, Û and Y, Ŷ, Y_s = Y − Ŷ for the contour polygon.
pub fn build_dsao(
    contour_id: usize,
    points: &[Point2],
    inner: &Material,
    background: &Material,
    omega: f64,
) -> Result<BoundaryOperatorSet> {
    let start = Instant::now();
    let ps = panels(points)?;
    let l = assemble_l(points)?;
    let (k1, jwmu1) = medium(inner, omega)?;
    let (k0, jwmu0) = medium(background, omega)?;
    let (p, u) = assemble_pu(&ps, k1, jwmu1);
    let (y, cond_p) = sao(&l, &p, &u, T_BOUNDARY)?;
    let (p_hat, u_hat, y_hat, cond_p_hat) = if inner == background {
        (p.clone(), u.clone(), y.clone(), cond_p)
    } else {
        let (p_hat, u_hat) = assemble_pu(&ps, k0, jwmu0);
        let (y_hat, c) = sao(&l, &p_hat, &u_hat, T_BOUNDARY)?;
        (p_hat, u_hat, y_hat, c)
    };
    let y_s = &y - &y_hat;
    let mut warnings = Vec::new();
    for (name, c) in [("P", cond_p), ("P_hat", cond_p_hat)] {
        if c >= COND_WARN {
            warnings.push(format!("contour {contour_id}: {name} condition estimate {c:.3e}"));
        }
    }
    Ok(BoundaryOperatorSet {
        contour_id,
        points: points.to_vec(),
        inner: *inner,
        background: *background,
        omega,
        l,
        p,
        u,
        p_hat,
        u_hat,
        y,
        y_hat,
        y_s,
        cond_p,
        cond_p_hat,
        warnings,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// What a vector of contour-node coefficients represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    E,
    Ht,
    J,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    pub coefficients: Vec<Complex64>,
    pub kind: FieldKind,
}

impl BoundaryField {
    pub fn new(coefficients: Vec<Complex64>, kind: FieldKind) -> Self {
        Self { coefficients, kind }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

fn apply(a: &Mat<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

fn expect_e(set: &BoundaryOperatorSet, e: &BoundaryField) -> Result<()> {
    if e.kind != FieldKind::E || e.len() != set.size() {
        return Err(Error::Domain(format!(
            "expected {} boundary E coefficients, got {} of kind {:?}",
            set.size(),
            e.len(),
            e.kind
        )));
    }
    Ok(())
}

/// Tangential magnetic field H_t = Y·E of the original interior medium.
pub fn tangential_h(set: &BoundaryOperatorSet, e: &BoundaryField) -> Result<BoundaryField> {
    expect_e(set, e)?;
    Ok(BoundaryField::new(apply(&set.y, &e.coefficients), FieldKind::Ht))
}

/// Equivalent electric current J = Y_s·E.
pub fn equivalent_current(set: &BoundaryOperatorSet, e: &BoundaryField) -> Result<BoundaryField> {
    expect_e(set, e)?;
    Ok(BoundaryField::new(apply(&set.y_s, &e.coefficients), FieldKind::J))
}

/// Interior fields and the points that sit too close to the contour for the
/// panel rules to be trusted.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorFields {
    pub values: Vec<Complex64>,
    pub near_boundary: Vec<bool>,
}

/// E(r) = ∮ [G·jωμH_t − (∂G/∂n′)·E] for points strictly inside the contour.
pub fn recover_interior_fields(
    set: &BoundaryOperatorSet,
    boundary_e: &BoundaryField,
    points: &[Point2],
) -> Result<InteriorFields> {
    let ht = tangential_h(set, boundary_e)?;
    let ps = panels(&set.points)?;
    let (k, jwmu) = medium(&set.inner, set.omega)?;
    let m = ps.len();
    if let Some(p) = points.iter().find(|p| !point_in_polygon(**p, &set.points)) {
        return Err(Error::Domain(format!("point ({}, {}) is not inside the contour", p.x, p.y)));
    }
    let out: Vec<(Complex64, bool)> = points
        .par_iter()
        .map(|&r| {
            let mut e = Complex64::new(0.0, 0.0);
            let mut flagged = false;
            for (j, s) in ps.iter().enumerate() {
                let d = segment_distance(r, s.a, s.b);
                if d < 0.1 * s.len {
                    flagged = true;
                }
                let v = inner(r, s, k, is_near(d, s.len, k));
                let jn = (j + 1) % m;
                let (h0, h1) = (ht.coefficients[j], ht.coefficients[jn]);
                let (e0, e1) = (boundary_e.coefficients[j], boundary_e.coefficients[jn]);
                e += jwmu * (v.g[1] * h0 + v.g[0] * h1) - (v.dg[1] * e0 + v.dg[0] * e1);
            }
            (e, flagged)
        })
        .collect();
    Ok(InteriorFields { values: out.iter().map(|v| v.0).collect(), near_boundary: out.iter().map(|v| v.1).collect() })
}
