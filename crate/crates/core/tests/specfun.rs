use hybridem::geometry::Point2;
use hybridem::oracle::{adaptive_panel_integral, PanelIntegrand};
use hybridem::specfun::*;
use hybridem::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

const EULER: f64 = 0.577_215_664_901_532_9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Ascending series for J_n with complex argument.
fn series_j(n: u32, z: Complex64) -> Complex64 {
    let q = -z * z / 4.0;
    let mut term = (z / 2.0).powu(n) / (1..=n).map(|i| i as f64).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

fn series_y0(z: Complex64) -> Complex64 {
    let q = -z * z / 4.0;
    let (mut term, mut harm, mut sum) = (c(1.0), 0.0, c(0.0));
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        harm += 1.0 / k as f64;
        sum -= term * harm;
        if term.norm() * harm < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    (2.0 / PI) * (((z / 2.0).ln() + EULER) * series_j(0, z) + sum)
}

fn series_y1(z: Complex64) -> Complex64 {
    let q = -z * z / 4.0;
    let psi = |m: usize| -EULER + (1..m).map(|i| 1.0 / i as f64).sum::<f64>();
    let mut term = z / 2.0;
    let mut sum = term * (psi(1) + psi(2));
    for k in 1..200 {
        term *= q / (k as f64 * (k + 1) as f64);
        let t = term * (psi(k + 1) + psi(k + 2));
        sum += t;
        if t.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    -2.0 / (PI * z) + (2.0 / PI) * (z / 2.0).ln() * series_j(1, z) - sum / PI
}

fn series_h2(order: u32, z: f64) -> Complex64 {
    let z = c(z);
    let y = if order == 0 { series_y0(z) } else { series_y1(z) };
    series_j(order, z) - Complex64::new(0.0, 1.0) * y
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn green_pair_matches_single_orders() {
    for k in [Complex64::new(3.0, 0.0), Complex64::new(8.3e4, -8.3e4), Complex64::new(6.0, -0.4)] {
        for rho in [1e-6, 3e-5, 0.02, 1.7] {
            let (g, gp) = green_pair(k, rho);
            let (a, b) = (green(k, rho), green_prime(k, rho));
            assert!((g - a).norm() <= 1e-14 * a.norm() + 1e-300, "{k} {rho}");
            assert!((gp - b).norm() <= 1e-14 * b.norm() + 1e-300, "{k} {rho}");
        }
    }
}

#[test]
fn hankel_matches_series_at_documented_points() {
    assert!(rel(hankel2(0, 1.0).unwrap(), series_h2(0, 1.0)) < 1e-12);
    assert!(rel(hankel2(1, 2.0).unwrap(), series_h2(1, 2.0)) < 1e-12);
    for z in [0.01, 0.1, 0.5, 3.0, 5.0, 7.5] {
        for order in [0, 1] {
            let e = rel(hankel2(order, z).unwrap(), series_h2(order, z));
            assert!(e < 1e-12, "order {order} z {z}: {e:e}");
        }
    }
}

#[test]
fn hankel_large_argument_matches_asymptotics() {
    let j = Complex64::new(0.0, 1.0);
    for z in [1.0e3, 1.0e4] {
        let lead = (2.0 / (PI * z)).sqrt() * (-j * (z - PI / 4.0)).exp();
        let h0 = lead * (1.0 + j / (8.0 * z) - 9.0 / (128.0 * z * z) - 225.0 * j / (3072.0 * z * z * z));
        let h1 = lead * j * (1.0 - 3.0 * j / (8.0 * z) + 15.0 / (128.0 * z * z) + 315.0 * j / (3072.0 * z * z * z));
        assert!(rel(hankel2(0, z).unwrap(), h0) < 1e-11);
        assert!(rel(hankel2(1, z).unwrap(), h1) < 1e-11);
    }
}

#[test]
fn hankel_rejects_bad_input_and_diverges_at_origin() {
    assert!(hankel2(0, 1e-12).unwrap().norm() > 10.0);
    assert!(hankel2(0, 1e-200).unwrap().norm() > hankel2(0, 1e-12).unwrap().norm());
    assert!(hankel2(0, 0.0).is_err());
    assert!(hankel2(1, -1.0).is_err());
    assert!(hankel2(2, 1.0).is_err());
}

#[test]
fn complex_bessel_matches_series() {
    for z in [Complex64::new(1.0, -1.0), Complex64::new(3.0, -2.5), Complex64::new(0.2, -4.0)] {
        for n in 0..4 {
            assert!(rel(bessel_j(n, z).unwrap(), series_j(n as u32, z)) < 1e-11);
        }
        assert!(rel(bessel_y(0, z).unwrap(), series_y0(z)) < 1e-11);
        assert!(rel(bessel_y(1, z).unwrap(), series_y1(z)) < 1e-11);
        assert!(rel(hankel2_complex(0, z).unwrap(), series_j(0, z) - Complex64::i() * series_y0(z)) < 1e-11);
    }
    let z = Complex64::new(2.0, -1.0);
    assert!(rel(bessel_j(-3, z).unwrap(), -series_j(3, z)) < 1e-11);
}

#[test]
fn wronskian_holds() {
    for i in 0..=200 {
        let z = 0.1 * (1000.0f64).powf(i as f64 / 200.0);
        let h0 = hankel2(0, z).unwrap();
        let h1 = hankel2(1, z).unwrap();
        let (j0, y0, j1, y1) = (h0.re, -h0.im, h1.re, -h1.im);
        // J0′ = −J1, Y0′ = −Y1
        let w = j0 * (-y1) - (-j1) * y0;
        let want = 2.0 / (PI * z);
        assert!((w - want).abs() < 1e-10 * want, "z {z}");
    }
}

#[test]
fn small_argument_forms() {
    let k = c(1.0);
    let e = rel(hankel2_small(0, k, 0.05).unwrap(), hankel2(0, 0.05).unwrap());
    assert!(e < 1e-3, "{e:e}");
    let h1 = hankel2_small(1, k, 0.01).unwrap();
    let dominant = Complex64::new(0.0, 2.0 / (PI * 0.01));
    assert!((h1 - dominant).norm() < 1e-3 * dominant.norm());
    assert!(hankel2_small(1, k, 0.0).is_err());
    assert!(hankel2_small(0, k, 0.0).is_err());
}

#[test]
fn small_argument_error_shrinks_towards_origin() {
    for k in [c(1.0), c(30.0), Complex64::new(2.0, -0.5)] {
        let mut last = f64::INFINITY;
        for i in 0..=40 {
            let z = 0.1 * (0.1f64).powf(i as f64 / 40.0);
            let rho = z / k.norm();
            let exact = hankel2_complex(0, k * rho).unwrap();
            let e = rel(hankel2_small(0, k, rho).unwrap(), exact);
            assert!(e <= 0.01, "k {k} z {z}: {e:e}");
            assert!(e <= last * (1.0 + 1e-9));
            last = e;
        }
    }
}

#[test]
fn gauss_rules() {
    let (x, w) = gauss_legendre(1, -1.0, 1.0).unwrap();
    assert_eq!((x[0], w[0]), (0.0, 2.0));
    let (x, w) = gauss_legendre(4, -1.0, 1.0).unwrap();
    let q = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
    assert!((q(6) - 2.0 / 7.0).abs() < 1e-14);
    assert!((q(8) - 2.0 / 9.0).abs() > 1e-6);
    for n in 1..=64usize {
        let (x, w) = gauss_legendre(n, 1.0, 3.0).unwrap();
        let p = 2 * n as i32 - 1;
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
        let want = (3f64.powi(p + 1) - 1.0) / (p + 1) as f64;
        assert!((got - want).abs() < 1e-12 * want, "n {n}");
    }
    assert!(gauss_legendre(0, 0.0, 1.0).is_err());
    assert!(gauss_legendre(65, 0.0, 1.0).is_err());
}

fn geom(obs: (f64, f64), a: (f64, f64), b: (f64, f64)) -> SegmentGeometry {
    SegmentGeometry::new(Point2::new(obs.0, obs.1), Point2::new(a.0, a.1), Point2::new(b.0, b.1)).unwrap()
}

#[test]
fn segment_geometry_invariants() {
    let g = geom((0.3, 0.7), (-1.0, 0.0), (1.5, 0.2));
    assert!((g.l2 - g.l1 - g.l0).abs() <= 1e-12 * g.l0);
    assert!(g.p0 >= 0.0);
    assert!(SegmentGeometry::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)).is_err());
}

#[test]
fn identities_symmetric_cases() {
    let g = geom((0.0, 0.0), (-1.0, 0.0), (1.0, 0.0));
    assert!(identities_i(&g).is_err());
    let g = geom((0.0, 1.0), (-1.0, 0.0), (1.0, 0.0));
    let id = identities_i(&g).unwrap();
    assert!(id.i1.abs() < 1e-15);
    assert_eq!(id.i4, 2.0);
    assert!((id.i6 - PI / 2.0).abs() < 1e-15);
}

fn identity_array(id: &Identities) -> [f64; 6] {
    [id.i1, id.i2, id.i3, id.i4, id.i5, id.i6]
}

/// Normalised by max(|I|, ∫|integrand|) so cancelling integrals are judged on scale.
fn identity_error(g: &SegmentGeometry) -> f64 {
    let id = identity_array(&identities_i(g).unwrap());
    let mut worst = 0.0f64;
    for (n, v) in id.iter().enumerate() {
        let want = adaptive_panel_integral(PanelIntegrand::Identity(n as u8 + 1), g, c(1.0)).unwrap().re;
        let abs = adaptive_abs(n + 1, g);
        worst = worst.max((v - want).abs() / want.abs().max(abs));
    }
    worst
}

fn adaptive_abs(n: usize, g: &SegmentGeometry) -> f64 {
    let (x, w) = gauss_legendre(64, g.l1, g.l2).unwrap();
    let f = |l: f64| {
        let d2 = l * l + g.p0 * g.p0;
        match n {
            1 => l.abs(),
            2 => (l * 0.5 * d2.ln()).abs(),
            3 => (0.5 * d2.ln()).abs(),
            4 => 1.0,
            5 => (l / d2).abs(),
            _ => 1.0 / d2,
        }
    };
    x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum()
}

#[test]
fn identities_match_quadrature_on_random_geometries() {
    use proptest::strategy::ValueTree;
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let s = (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 1000 {
        let (a, b, cx, cy, ox, oy) = s.new_tree(&mut runner).unwrap().current();
        let Ok(g) = SegmentGeometry::new(Point2::new(ox, oy), Point2::new(a, b), Point2::new(cx, cy)) else { continue };
        if g.l0 < 1e-3 || g.p0 < 1e-6 * g.l0 {
            continue;
        }
        worst = worst.max(identity_error(&g));
        count += 1;
    }
    assert!(worst <= 1e-9, "worst relative error {worst:e}");
}

#[test]
fn half_rooftops_sum_to_constant_density() {
    let k = c(2.0);
    let jwmu = Complex64::new(0.0, 3.0);
    for g in [geom((0.0, 0.0), (0.0, 0.0), (0.03, 0.0)), geom((0.01, 0.01), (-0.02, 0.0), (0.02, 0.005))] {
        let sum = integrate_g_halfrooftop(&g, k, jwmu, true).unwrap() + integrate_g_halfrooftop(&g, k, jwmu, false).unwrap();
        let both = adaptive_panel_integral(PanelIntegrand::SmallGreen { rising: true }, &g, k).unwrap()
            + adaptive_panel_integral(PanelIntegrand::SmallGreen { rising: false }, &g, k).unwrap();
        assert!(rel(sum, jwmu * both) < 1e-9);
        let dsum = integrate_gradg_halfrooftop(&g, k, true).unwrap() + integrate_gradg_halfrooftop(&g, k, false).unwrap();
        let d = adaptive_panel_integral(PanelIntegrand::SmallGreenNormal { rising: true }, &g, k).unwrap()
            + adaptive_panel_integral(PanelIntegrand::SmallGreenNormal { rising: false }, &g, k).unwrap();
        assert!((dsum - d).norm() <= 1e-9 * d.norm().max(1e-12));
    }
}

#[test]
fn self_segment_matches_singular_quadrature() {
    let k = c(1.5);
    let jwmu = Complex64::new(0.0, 2.5);
    for (obs, label) in [((0.0, 0.0), "start"), ((0.04, 0.0), "end"), ((0.013, 0.0), "interior")] {
        let g = geom(obs, (0.0, 0.0), (0.04, 0.0));
        for rising in [true, false] {
            let got = integrate_g_halfrooftop(&g, k, jwmu, rising).unwrap() / jwmu;
            assert!(got.is_finite());
            let small = adaptive_panel_integral(PanelIntegrand::SmallGreen { rising }, &g, k).unwrap();
            assert!(rel(got, small) < 1e-6, "{label}");
            let exact = adaptive_panel_integral(PanelIntegrand::Green { rising }, &g, k).unwrap();
            assert!(rel(got, exact) < 1e-2, "{label}");
            assert_eq!(integrate_gradg_halfrooftop(&g, k, rising).unwrap(), c(0.0));
        }
    }
}

#[test]
fn analytic_and_gauss_agree_at_threshold() {
    let k = c(1.0);
    // ρ_min = 0.09, so |k|ρ_min = 0.09.
    let g = geom((0.0, 0.09), (-0.01, 0.0), (0.01, 0.0));
    let (x, w) = gauss_legendre(16, g.l1, g.l2).unwrap();
    for rising in [true, false] {
        let half = |l: f64| if rising { (l - g.l1) / g.l0 } else { (g.l2 - l) / g.l0 };
        let quad: Complex64 = x.iter().zip(&w).map(|(&l, &w)| green(k, l.hypot(g.p0)) * half(l) * w).sum();
        let an = integrate_g_halfrooftop(&g, k, c(1.0), rising).unwrap();
        assert!(rel(an, quad) < 5e-3);
        let dquad: Complex64 = x
            .iter()
            .zip(&w)
            .map(|(&l, &w)| {
                let r = l.hypot(g.p0);
                k * (g.height / r) * green_prime(k, r) * half(l) * w
            })
            .sum();
        let dan = integrate_gradg_halfrooftop(&g, k, rising).unwrap();
        assert!(rel(dan, dquad) < 2e-2);
    }
}

#[test]
fn threshold_is_enforced() {
    let g = geom((0.0, 0.2), (-0.01, 0.0), (0.01, 0.0));
    assert!(integrate_g_halfrooftop(&g, c(1.0), c(1.0), true).is_err());
    assert!(integrate_gradg_halfrooftop(&g, c(1.0), false).is_err());
}

#[test]
fn near_panels_match_quadrature_oracle() {
    let ks = [c(1.0), c(20.0), Complex64::new(50.0, -50.0)];
    for k in ks {
        let s = 0.02 / k.norm();
        for (ox, oy) in [(0.3, 0.2), (-0.5, -0.1), (1.2, 0.05), (0.5, 1e-4), (1.0, -0.7)] {
            let g = geom((ox * s, oy * s), (0.0, 0.0), (s, 0.3 * s));
            for rising in [true, false] {
                let got = integrate_g_halfrooftop(&g, k, c(1.0), rising).unwrap();
                let want = adaptive_panel_integral(PanelIntegrand::SmallGreen { rising }, &g, k).unwrap();
                assert!(rel(got, want) < 1e-6);
                let got = integrate_gradg_halfrooftop(&g, k, rising).unwrap();
                let want = adaptive_panel_integral(PanelIntegrand::SmallGreenNormal { rising }, &g, k).unwrap();
                assert!(rel(got, want) < 1e-6, "k {k} obs ({ox}, {oy})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn identities_are_rigid_motion_invariant(
        ax in -2.0f64..2.0, ay in -2.0f64..2.0, bx in -2.0f64..2.0, by in -2.0f64..2.0,
        ox in -2.0f64..2.0, oy in -2.0f64..2.0, th in 0.0f64..6.3, tx in -5.0f64..5.0, ty in -5.0f64..5.0,
    ) {
        let (a, b, o) = (Point2::new(ax, ay), Point2::new(bx, by), Point2::new(ox, oy));
        prop_assume!(a.dist(b) > 1e-2);
        let g = SegmentGeometry::new(o, a, b).unwrap();
        prop_assume!(g.p0 > 1e-3);
        let (s, cth) = th.sin_cos();
        let m = |p: Point2| Point2::new(cth * p.x - s * p.y + tx, s * p.x + cth * p.y + ty);
        let h = SegmentGeometry::new(m(o), m(a), m(b)).unwrap();
        let (u, v) = (identity_array(&identities_i(&g).unwrap()), identity_array(&identities_i(&h).unwrap()));
        for i in 0..6 {
            prop_assert!((u[i] - v[i]).abs() <= 1e-9 * (1.0 + u[i].abs()));
        }
    }
}
