use hybridem::geometry::Point2;
use hybridem::material::{k0, omega, Material, MU0};
use hybridem::mesh::{generate_annulus_scene, ContourKind, Mesh, ObjectShape, SceneOptions};
use hybridem::pde::*;
use hybridem::sie::build_dsao;
use hybridem::Complex64;
use proptest::prelude::*;

const F: f64 = 300e6;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn scene(object: ObjectShape, r: f64, h: f64) -> Mesh {
    let opts = SceneOptions { truncation_radius: r, target_h: h, background: Material::VACUUM, aux_radii: vec![], grading: None };
    generate_annulus_scene(&object, &opts).unwrap()
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Gradients by central differences of the barycentric map, mass by a
/// 4^5-fold midpoint subdivision.
fn element_k_oracle(p: [Point2; 3], m: &Material, w: f64) -> [[Complex64; 3]; 3] {
    let bary = |q: Point2| {
        let det = (p[1] - p[0]).cross(p[2] - p[0]);
        let l1 = (q - p[0]).cross(p[2] - p[0]) / det;
        let l2 = (p[1] - p[0]).cross(q - p[0]) / det;
        [1.0 - l1 - l2, l1, l2]
    };
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let o = (p[0] + p[1] + p[2]) * (1.0 / 3.0);
    let d = 1e-3 * area.sqrt();
    let grad = |i: usize| {
        let gx = (bary(o + Point2::new(d, 0.0))[i] - bary(o - Point2::new(d, 0.0))[i]) / (2.0 * d);
        let gy = (bary(o + Point2::new(0.0, d))[i] - bary(o - Point2::new(0.0, d))[i]) / (2.0 * d);
        Point2::new(gx, gy)
    };
    let mut tris = vec![p];
    for _ in 0..5 {
        tris = tris
            .iter()
            .flat_map(|t| {
                let (a, b, c) = (t[0].lerp(t[1], 0.5), t[1].lerp(t[2], 0.5), t[2].lerp(t[0], 0.5));
                [[t[0], a, c], [a, t[1], b], [c, b, t[2]], [a, b, c]]
            })
            .collect();
    }
    let mut mass = [[0.0; 3]; 3];
    for t in &tris {
        let ar = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]);
        // three edge midpoints integrate quadratics exactly
        for q in [t[0].lerp(t[1], 0.5), t[1].lerp(t[2], 0.5), t[2].lerp(t[0], 0.5)] {
            let l = bary(q);
            for i in 0..3 {
                for j in 0..3 {
                    mass[i][j] += ar / 3.0 * l[i] * l[j];
                }
            }
        }
    }
    let kk = k0(w).powi(2) * m.eps_c(w);
    let mut out = [[c(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c(-grad(i).dot(grad(j)) * area / m.mu_r, 0.0) + kk * mass[i][j];
        }
    }
    out
}

#[test]
fn element_k_matches_oracle() {
    let w = omega(F);
    let p = [Point2::new(0.1, -0.05), Point2::new(0.42, 0.07), Point2::new(0.05, 0.31)];
    for m in [Material::VACUUM, Material::new(2.3, 1.7, 0.0).unwrap(), Material::new(4.0, 1.0, 0.02).unwrap()] {
        let got = element_k(p, &m, w).unwrap();
        let want = element_k_oracle(p, &m, w);
        let scale = want.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..3 {
            for j in 0..3 {
                assert!((got[i][j] - want[i][j]).norm() < 1e-8 * scale, "{m:?} ({i},{j})");
            }
        }
    }
}

#[test]
fn element_k_rejects_inverted_triangle() {
    let p = [Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)];
    assert!(element_k(p, &Material::VACUUM, omega(F)).is_err());
    assert!(element_b(p, omega(F), |_| c(1.0, 0.0)).is_err());
}

#[test]
fn element_bs_is_scaled_segment_gram() {
    let w = omega(F);
    let b = element_bs(Point2::new(0.0, 0.0), Point2::new(0.3, 0.4), w);
    let jw = c(0.0, w * MU0 * 0.5);
    assert!((b[0][0] - jw / 3.0).norm() < 1e-15 * jw.norm());
    assert!((b[1][1] - jw / 3.0).norm() < 1e-15 * jw.norm());
    assert!((b[0][1] - jw / 6.0).norm() < 1e-15 * jw.norm());
    assert_eq!(b[0][1], b[1][0]);
}

#[test]
fn element_b_integrates_linear_sources_exactly() {
    let w = omega(F);
    let p = [Point2::new(0.0, 0.0), Point2::new(0.2, 0.05), Point2::new(0.04, 0.18)];
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let jw = c(0.0, w * MU0);
    let b = element_b(p, w, |_| c(2.0, -1.0)).unwrap();
    for v in b {
        assert!((v - jw * c(2.0, -1.0) * area / 3.0).norm() < 1e-14 * v.norm());
    }
    let b = element_b(p, w, |q| c(q.x, 0.0)).unwrap();
    let sx: f64 = p.iter().map(|q| q.x).sum();
    for i in 0..3 {
        let want = jw * (area / 12.0 * (sx + p[i].x));
        assert!((b[i] - want).norm() < 1e-13 * want.norm());
    }
}

#[test]
fn abc_on_circle_sums_to_perimeter_term() {
    let w = omega(F);
    let mesh = scene(ObjectShape::None, 0.5, 0.05);
    let t = mesh.truncation().unwrap();
    let abc = abc_contributions(&mesh, t, None, w).unwrap();
    assert!(abc.rhs.is_empty());
    let pts = mesh.contours[t].points(&mesh);
    let n = pts.len();
    let perim: f64 = (0..n).map(|i| pts[i].dist(pts[(i + 1) % n])).sum();
    let total: Complex64 = abc.matrix.iter().map(|e| e.2).sum();
    let k = Material::VACUUM.wavenumber(w);
    let want = -(Complex64::i() * k + 1.0 / (2.0 * 0.5)) * perim;
    assert!((total - want).norm() < 1e-3 * want.norm(), "{total} vs {want}");
    assert!(abc_contributions(&mesh, 0, None, w).is_ok() == (mesh.contours[0].kind == ContourKind::Truncation));
}

#[test]
fn abc_rhs_matches_fine_quadrature() {
    let w = omega(F);
    let mesh = scene(ObjectShape::None, 0.5, 0.05);
    let t = mesh.truncation().unwrap();
    let wave = PlaneWave::new(30.0, c(1.0, 0.5), &Material::VACUUM, w);
    let abc = abc_contributions(&mesh, t, Some(&wave), w).unwrap();
    let pts = mesh.contours[t].points(&mesh);
    let n = pts.len();
    let kap: Vec<f64> = (0..n)
        .map(|i| hybridem::geometry::circle_curvature(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]))
        .collect();
    // trapezoid with 2000 points per segment
    let mut want = vec![c(0.0, 0.0); mesh.node_count()];
    for (s, (a, b)) in mesh.contours[t].segments().enumerate() {
        let (p1, p2) = (pts[s], pts[(s + 1) % n]);
        let nrm = (p2 - p1).right_normal().unit();
        let g = Complex64::i() * wave.k + 0.25 * (kap[s] + kap[(s + 1) % n]);
        let m = 2000;
        for i in 0..=m {
            let u = i as f64 / m as f64;
            let r = p1.lerp(p2, u);
            let wt = if i == 0 || i == m { 0.5 } else { 1.0 } * p1.dist(p2) / m as f64;
            let q = wave.normal_derivative(r, nrm) + g * wave.value(r);
            want[a as usize] -= q * (1.0 - u) * wt;
            want[b as usize] -= q * u * wt;
        }
    }
    let mut got = vec![c(0.0, 0.0); mesh.node_count()];
    for &(i, v) in &abc.rhs {
        got[i as usize] += v;
    }
    assert!(rel(&got, &want) < 1e-6, "{}", rel(&got, &want));
}

#[test]
fn plane_wave_derivative_matches_difference() {
    let w = omega(F);
    let wave = PlaneWave::new(-70.0, c(0.3, -1.2), &Material::dielectric(2.0), w);
    let p = Point2::new(0.3, -0.2);
    let n = Point2::new(0.6, 0.8);
    let d = 1e-6;
    let fd = (wave.value(p + n * d) - wave.value(p - n * d)) / (2.0 * d);
    assert!((fd - wave.normal_derivative(p, n)).norm() < 1e-6 * fd.norm());
    assert!((wave.value(Point2::new(0.0, 0.0)) - c(0.3, -1.2)).norm() < 1e-15);
}

#[test]
fn free_space_reproduces_the_incident_wave() {
    let w = omega(F);
    let mesh = scene(ObjectShape::None, 1.0, 0.02);
    let wave = PlaneWave::new(20.0, c(1.0, 0.0), &Material::VACUUM, w);
    let sys = solve_fem_baseline(&mesh, &wave, w).unwrap();
    let want: Vec<Complex64> = mesh.nodes.iter().map(|&p| wave.value(p)).collect();
    let e = rel(&sys.e, &want);
    assert!(e < 0.01, "free-space error {e}");
    assert!(sys.stats.residual < 1e-10);
    assert_eq!(sys.stats.unknowns, mesh.node_count());
}

#[test]
fn solution_is_linear_in_the_amplitude() {
    let w = omega(F);
    let mesh = scene(ObjectShape::Circle { radius: 0.2, material: Material::dielectric(3.0) }, 0.5, 0.04);
    let s = c(2.0, -3.0);
    let w1 = PlaneWave::new(0.0, c(1.0, 0.0), &Material::VACUUM, w);
    let w2 = PlaneWave::new(0.0, s, &Material::VACUUM, w);
    let e1 = solve_fem_baseline(&mesh, &w1, w).unwrap().e;
    let e2 = solve_fem_baseline(&mesh, &w2, w).unwrap().e;
    let scaled: Vec<Complex64> = e1.iter().map(|v| v * s).collect();
    assert!(rel(&e2, &scaled) < 1e-12);
}

#[test]
fn transparent_sie_changes_nothing() {
    let w = omega(F);
    let mesh = scene(ObjectShape::Circle { radius: 0.2, material: Material::VACUUM }, 0.5, 0.04);
    let ci = mesh.contours_of(ContourKind::Interface)[0];
    let eq = mesh.apply_equivalence(&[ci]).unwrap();
    let set = build_dsao(ci, &eq.contours[ci].points(&eq), &Material::VACUUM, &Material::VACUUM, w).unwrap();
    let a = build_expansion_a(&eq, std::slice::from_ref(&set)).unwrap();
    assert_eq!(a.len(), 1);
    assert!(a[0].block.norm_max() == 0.0);
    let wave = PlaneWave::new(45.0, c(1.0, 0.0), &Material::VACUUM, w);
    let h = assemble_and_solve(&eq, &[set], &wave, w).unwrap();
    let f = solve_fem_baseline(&mesh, &wave, w).unwrap();
    assert!(rel(&h.e, &f.e) < 1e-12);
    assert_eq!(h.sie_contours, vec![ci]);
}

#[test]
fn hybrid_agrees_with_fem_on_a_dielectric_cylinder() {
    let w = omega(F);
    let mat = Material::dielectric(2.3);
    let mesh = scene(ObjectShape::Circle { radius: 0.3, material: mat }, 0.8, 0.02);
    let ci = mesh.contours_of(ContourKind::Interface)[0];
    let eq = mesh.apply_equivalence(&[ci]).unwrap();
    let set = build_dsao(ci, &eq.contours[ci].points(&eq), &mat, &Material::VACUUM, w).unwrap();
    let wave = PlaneWave::new(0.0, c(1.0, 0.0), &Material::VACUUM, w);
    let h = assemble_and_solve(&eq, &[set], &wave, w).unwrap();
    let f = solve_fem_baseline(&mesh, &wave, w).unwrap();
    let outside: Vec<usize> = (0..mesh.node_count()).filter(|&i| mesh.nodes[i].norm() > 0.3 + 1e-9).collect();
    let he: Vec<Complex64> = outside.iter().map(|&i| h.e[i]).collect();
    let fe: Vec<Complex64> = outside.iter().map(|&i| f.e[i]).collect();
    let e = rel(&he, &fe);
    assert!(e < 0.02, "hybrid vs FEM {e}");
    assert!(h.timings.ys_generation > 0.0);
    assert!(h.stats.dense_entries > 0);
}

#[test]
fn rejects_inconsistent_inputs() {
    let w = omega(F);
    let mat = Material::dielectric(2.3);
    let mesh = scene(ObjectShape::Circle { radius: 0.2, material: mat }, 0.5, 0.05);
    let ci = mesh.contours_of(ContourKind::Interface)[0];
    let set = build_dsao(ci, &mesh.contours[ci].points(&mesh), &mat, &Material::VACUUM, w).unwrap();
    let wave = PlaneWave::new(0.0, c(1.0, 0.0), &Material::VACUUM, w);
    // equivalence not applied
    assert!(assemble_and_solve(&mesh, std::slice::from_ref(&set), &wave, w).is_err());
    let mut bare = mesh.clone();
    bare.contours.retain(|c| c.kind != ContourKind::Truncation);
    assert!(solve_fem_baseline(&bare, &wave, w).is_err());
    let eq = mesh.apply_equivalence(&[ci]).unwrap();
    let mut moved = eq.clone();
    let v = moved.contours[ci].nodes[0] as usize;
    moved.nodes[v] = moved.nodes[v] * 1.001;
    assert!(build_expansion_a(&moved, &[set]).is_err());
}

proptest! {
    #[test]
    fn element_rows_sum_to_mass_row(
        x in prop::array::uniform6(-1.0f64..1.0),
        eps in 1.0f64..10.0,
        mu in 0.5f64..4.0,
    ) {
        let p = [Point2::new(x[0], x[1]), Point2::new(x[2], x[3]), Point2::new(x[4], x[5])];
        let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
        prop_assume!(area.abs() > 1e-2);
        let p = if area > 0.0 { p } else { [p[0], p[2], p[1]] };
        let w = omega(F);
        let m = Material::new(eps, mu, 0.0).unwrap();
        let k = element_k(p, &m, w).unwrap();
        let want = k0(w).powi(2) * eps * area.abs() / 3.0;
        let scale = k.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..3 {
            let s: Complex64 = k[i].iter().sum();
            prop_assert!((s - want).norm() < 1e-12 * scale);
            for j in 0..3 {
                prop_assert_eq!(k[i][j], k[j][i]);
            }
        }
    }
}
