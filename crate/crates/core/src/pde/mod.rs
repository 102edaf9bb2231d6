//! Nodal finite elements on the equivalent mesh, the first-order absorbing
//! boundary and the coupling to the surface admittances.

use crate::geometry::{circle_curvature, Point2};
use crate::material::{k0, Material, MU0};
use crate::mesh::{ContourKind, Mesh};
use crate::sie::BoundaryOperatorSet;
use crate::solver::{self, CsrMatrix, DenseCoupling, FactorStats, GlobalMatrix};
use crate::specfun::gauss_legendre_unit;
use crate::{Error, Result};
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::Instant;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// E0·exp(−j k d̂·r).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    /// Unit propagation direction.
    pub direction: Point2,
    pub amplitude: Complex64,
    pub k: Complex64,
}

impl PlaneWave {
    /// Wave travelling towards `angle_deg` (measured from +x) in `medium`.
    pub fn new(angle_deg: f64, amplitude: Complex64, medium: &Material, omega: f64) -> Self {
        let t = angle_deg.to_radians();
        Self { direction: Point2::new(t.cos(), t.sin()), amplitude, k: medium.wavenumber(omega) }
    }

    pub fn value(&self, p: Point2) -> Complex64 {
        self.amplitude * (-Complex64::i() * self.k * self.direction.dot(p)).exp()
    }

    /// ∂E/∂n for the unit normal `n`.
    pub fn normal_derivative(&self, p: Point2, n: Point2) -> Complex64 {
        -Complex64::i() * self.k * self.direction.dot(n) * self.value(p)
    }
}

/// Element stiffness-plus-mass matrix −(∇N_i·∇N_j)/μ_r + k0²ε_c N_iN_j.
pub fn element_k(p: [Point2; 3], material: &Material, omega: f64) -> Result<[[Complex64; 3]; 3]> {
    let s = crate::mesh::Shape::new(p);
    if !(s.area > 0.0) {
        return Err(Error::Mesh(format!("degenerate or inverted triangle {p:?}")));
    }
    let kk = k0(omega).powi(2) * material.eps_c(omega);
    let mut m = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let stiff = -(s.b[i] * s.b[j] + s.c[i] * s.c[j]) / (4.0 * s.area * material.mu_r);
            let mass = s.area / 12.0 * if i == j { 2.0 } else { 1.0 };
            m[i][j] = Complex64::new(stiff, 0.0) + kk * mass;
        }
    }
    Ok(m)
}

// Degree-5 seven-point triangle rule: (barycentrics, weight / area).
const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W1: f64 = 0.132_394_152_788_506_2;
    const W2: f64 = 0.125_939_180_544_827_2;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Load vector jωμ0 ∫ N_i J dΩ for an impressed current density.
pub fn element_b(p: [Point2; 3], omega: f64, current: impl Fn(Point2) -> Complex64) -> Result<[Complex64; 3]> {
    let area = 0.5 * crate::geometry::orient(p[0], p[1], p[2]);
    if !(area > 0.0) {
        return Err(Error::Mesh(format!("degenerate or inverted triangle {p:?}")));
    }
    let jwmu0 = Complex64::new(0.0, omega * MU0);
    let mut out = [ZERO; 3];
    for (l, w) in TRI7 {
        let q = p[0] * l[0] + p[1] * l[1] + p[2] * l[2];
        let f = current(q) * (w * area);
        for i in 0..3 {
            out[i] += f * l[i];
        }
    }
    Ok(out.map(|v| v * jwmu0))
}

/// Segment matrix jωμ0 ∫ N_i N_j dl on [p1, p2].
pub fn element_bs(p1: Point2, p2: Point2, omega: f64) -> [[Complex64; 2]; 2] {
    let l = p1.dist(p2);
    let d = Complex64::new(0.0, omega * MU0 * l / 3.0);
    let o = Complex64::new(0.0, omega * MU0 * l / 6.0);
    [[d, o], [o, d]]
}

/// Per-triangle data ready for scatter.
#[derive(Clone, Copy, Debug)]
pub struct ElementMatrices {
    pub nodes: [u32; 3],
    pub k: [[Complex64; 3]; 3],
    pub b: [Complex64; 3],
}

pub fn element_matrices(mesh: &Mesh, t: usize, omega: f64) -> Result<ElementMatrices> {
    Ok(ElementMatrices {
        nodes: mesh.triangles[t].nodes,
        k: element_k(mesh.vertices(t), mesh.material_of(t), omega)?,
        b: [ZERO; 3],
    })
}

/// Signed increments from the absorbing boundary: `matrix` holds −Γ and
/// `rhs` holds −Q, both ready to be added.
#[derive(Clone, Debug, Default)]
pub struct AbcTerms {
    pub matrix: Vec<(u32, u32, Complex64)>,
    pub rhs: Vec<(u32, Complex64)>,
}

/// Directed edge → triangle on its left.
fn left_triangles(mesh: &Mesh) -> HashMap<(u32, u32), usize> {
    let mut m = HashMap::with_capacity(mesh.triangles.len() * 3);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for i in 0..3 {
            m.insert((tri.nodes[i], tri.nodes[(i + 1) % 3]), t);
        }
    }
    m
}

/// First-order absorbing condition on the truncation contour, using the
/// medium of the adjacent triangle and the discrete curvature.
pub fn abc_contributions(mesh: &Mesh, contour: usize, incident: Option<&PlaneWave>, omega: f64) -> Result<AbcTerms> {
    let c = mesh.contours.get(contour).ok_or_else(|| Error::Mesh(format!("no contour {contour}")))?;
    if c.kind != ContourKind::Truncation {
        return Err(Error::Mesh(format!("contour {contour} is not a truncation contour")));
    }
    let pts = c.points(mesh);
    let n = pts.len();
    if n < 3 {
        return Err(Error::Mesh("truncation contour has fewer than 3 nodes".into()));
    }
    let kappa: Vec<f64> = (0..n).map(|i| circle_curvature(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n])).collect();
    let left = left_triangles(mesh);
    let (gx, gw) = gauss_legendre_unit(4)?;
    let mut out = AbcTerms::default();
    for (s, (a, b)) in c.segments().enumerate() {
        let t = *left
            .get(&(a, b))
            .ok_or_else(|| Error::Mesh(format!("truncation segment {s} is not a mesh edge")))?;
        let mat = mesh.material_of(t);
        let k = mat.wavenumber(omega);
        let kap = 0.5 * (kappa[s] + kappa[(s + 1) % n]);
        let gamma = (Complex64::i() * k + kap / 2.0) / mat.mu_r;
        let (p1, p2) = (pts[s], pts[(s + 1) % n]);
        let l = p1.dist(p2);
        let d = gamma * (l / 3.0);
        let o = gamma * (l / 6.0);
        out.matrix.extend([(a, a, -d), (a, b, -o), (b, a, -o), (b, b, -d)]);
        if let Some(w) = incident {
            let nrm = (p2 - p1).right_normal().unit();
            let (mut qa, mut qb) = (ZERO, ZERO);
            for (x, wt) in gx.iter().zip(gw) {
                let u = 0.5 * (x + 1.0);
                let r = p1.lerp(p2, u);
                let q = (w.normal_derivative(r, nrm) + (Complex64::i() * k + kap / 2.0) * w.value(r)) / mat.mu_r;
                let f = q * (0.5 * wt * l);
                qa += f * (1.0 - u);
                qb += f * u;
            }
            out.rhs.extend([(a, -qa), (b, -qb)]);
        }
    }
    Ok(out)
}

/// Maps each operator set onto its contour nodes and returns B·Y_s, where B
/// is the assembled segment matrix of [`element_bs`].
pub fn build_expansion_a(mesh: &Mesh, sets: &[BoundaryOperatorSet]) -> Result<Vec<DenseCoupling>> {
    sets.iter()
        .map(|set| {
            let c = mesh
                .contours
                .get(set.contour_id)
                .ok_or_else(|| Error::Mesh(format!("no contour {}", set.contour_id)))?;
            let m = c.len();
            if m != set.size() {
                return Err(Error::Mesh(format!(
                    "contour {} has {m} nodes but its operators have {}",
                    set.contour_id,
                    set.size()
                )));
            }
            for (i, &v) in c.nodes.iter().enumerate() {
                let d = mesh.nodes[v as usize].dist(set.points[i]);
                let scale = set.points[i].norm().max(1.0);
                if d > 1e-12 * scale {
                    return Err(Error::Mesh(format!("contour {} node {i} moved since the operators were built", set.contour_id)));
                }
            }
            let mut b = Mat::<Complex64>::zeros(m, m);
            for i in 0..m {
                let j = (i + 1) % m;
                let e = element_bs(set.points[i], set.points[j], set.omega);
                b[(i, i)] += e[0][0];
                b[(i, j)] += e[0][1];
                b[(j, i)] += e[1][0];
                b[(j, j)] += e[1][1];
            }
            let block = &b * &set.y_s;
            Ok(DenseCoupling { nodes: c.nodes.iter().map(|&v| v as usize).collect(), block })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub ys_generation: f64,
    pub matrix_filling: f64,
    pub matrix_solving: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.ys_generation + self.matrix_filling + self.matrix_solving
    }
}

#[derive(Clone, Debug, Default)]
pub struct SystemStats {
    pub unknowns: usize,
    pub nonzeros: usize,
    pub dense_entries: usize,
    pub residual: f64,
    pub refinements: usize,
    pub factor: FactorStats,
    /// Estimated peak bytes held by the matrix, the dense blocks and the factors.
    pub peak_bytes: usize,
}

#[derive(Clone, Debug)]
pub struct HybridSystem {
    pub matrix: GlobalMatrix,
    pub rhs: Vec<Complex64>,
    /// Nodal total field.
    pub e: Vec<Complex64>,
    pub sie_contours: Vec<usize>,
    pub omega: f64,
    pub stats: SystemStats,
    pub timings: Timings,
}

fn check_equivalent(mesh: &Mesh, sets: &[BoundaryOperatorSet]) -> Result<()> {
    let report = mesh.check_conformity();
    if !report.is_empty() {
        let first = &report.issues[0];
        return Err(Error::Mesh(format!(
            "{} non-conforming segment(s), first on contour {} segment {}: {}",
            report.issues.len(),
            first.contour,
            first.segment,
            first.reason
        )));
    }
    for set in sets {
        let c = mesh.contours.get(set.contour_id).ok_or_else(|| Error::Mesh(format!("no contour {}", set.contour_id)))?;
        if c.kind != ContourKind::Sie {
            return Err(Error::Mesh(format!("contour {} is not an SIE contour", set.contour_id)));
        }
        let around = mesh
            .outer_material(set.contour_id)
            .map(|m| mesh.materials[m as usize])
            .ok_or_else(|| Error::Mesh(format!("contour {} has no triangle outside it", set.contour_id)))?;
        if mesh.triangles_inside(set.contour_id).iter().any(|&t| *mesh.material_of(t) != around) {
            return Err(Error::Mesh(format!("contour {} still encloses a different material", set.contour_id)));
        }
        if set.background != around {
            return Err(Error::Mesh(format!("contour {} operators use a different surrounding medium", set.contour_id)));
        }
    }
    Ok(())
}

/// Assembles (K − Γ − Σ RᵀB Y_s R) E = b − Q and solves it.
pub fn assemble_and_solve(
    mesh: &Mesh,
    sets: &[BoundaryOperatorSet],
    incident: &PlaneWave,
    omega: f64,
) -> Result<HybridSystem> {
    let fill_start = Instant::now();
    check_equivalent(mesh, sets)?;
    let trunc = mesh.truncation().ok_or_else(|| Error::Mesh("mesh has no truncation contour".into()))?;
    let elems: Vec<ElementMatrices> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| element_matrices(mesh, t, omega))
        .collect::<Result<_>>()?;
    let mut csr = CsrMatrix::from_adjacency(&mesh.node_adjacency());
    let mut rhs = vec![ZERO; mesh.node_count()];
    for e in &elems {
        for i in 0..3 {
            let gi = e.nodes[i] as usize;
            rhs[gi] += e.b[i];
            for j in 0..3 {
                csr.add(gi, e.nodes[j] as usize, e.k[i][j])?;
            }
        }
    }
    drop(elems);
    let abc = abc_contributions(mesh, trunc, Some(incident), omega)?;
    for &(i, j, v) in &abc.matrix {
        csr.add(i as usize, j as usize, v)?;
    }
    for &(i, v) in &abc.rhs {
        rhs[i as usize] += v;
    }
    let mut couplings = build_expansion_a(mesh, sets)?;
    for c in &mut couplings {
        c.block = -&c.block;
    }
    let matrix = GlobalMatrix { sparse: csr, couplings };
    let matrix_filling = fill_start.elapsed().as_secs_f64();
    let solve_start = Instant::now();
    let sol = solver::solve(&matrix, &mesh.nodes, &rhs)?;
    let matrix_solving = solve_start.elapsed().as_secs_f64();
    let dense_entries: usize = matrix.couplings.iter().map(|c| c.nodes.len().pow(2)).sum();
    let nonzeros = matrix.sparse.nnz();
    let zsize = std::mem::size_of::<Complex64>();
    let matrix_bytes = nonzeros * (zsize + 4) + (mesh.node_count() + 1) * 8 + dense_entries * zsize;
    let set_bytes: usize = sets.iter().map(|s| 9 * s.size().pow(2) * zsize).sum();
    let stats = SystemStats {
        unknowns: mesh.node_count(),
        nonzeros,
        dense_entries,
        residual: sol.residual,
        refinements: sol.refinements,
        peak_bytes: matrix_bytes + set_bytes + sol.stats.factor_bytes(),
        factor: sol.stats,
    };
    Ok(HybridSystem {
        matrix,
        rhs,
        e: sol.x,
        sie_contours: sets.iter().map(|s| s.contour_id).collect(),
        omega,
        stats,
        timings: Timings {
            ys_generation: sets.iter().map(|s| s.seconds).fold(0.0, |a, b| a + b),
            matrix_filling,
            matrix_solving,
        },
    })
}

/// Plain FEM over the true-material mesh.
pub fn solve_fem_baseline(mesh: &Mesh, incident: &PlaneWave, omega: f64) -> Result<HybridSystem> {
    assemble_and_solve(mesh, &[], incident, omega)
}

/// Incident field as the discretization sees it: the same mesh with every
/// triangle set to the background medium and no SIE couplings.
pub fn solve_background(mesh: &Mesh, incident: &PlaneWave, omega: f64) -> Result<HybridSystem> {
    let mut bg = mesh.clone();
    for t in &mut bg.triangles {
        t.material = mesh.background;
    }
    solve_fem_baseline(&bg, incident, omega)
}
