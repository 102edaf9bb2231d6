use crate::specfun::{hankel2_complex, hankel2_small, SegmentGeometry};
use crate::{Error, Result};
use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const MAX_DEPTH: u32 = 40;

/// Integrand selector for [`adaptive_panel_integral`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PanelIntegrand {
    /// G f_half
    Green { rising: bool },
    /// ∂G/∂n′ f_half
    GreenNormal { rising: bool },
    /// First-order small-argument G f_half
    SmallGreen { rising: bool },
    /// First-order small-argument ∂G/∂n′ f_half
    SmallGreenNormal { rising: bool },
    /// Kernel of identity I1..I6
    Identity(u8),
}

fn k15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = f(c) * WGK[7];
    let mut abs = s.norm();
    for i in 0..7 {
        let d = h * XGK[i];
        let (u, v) = (f(c - d), f(c + d));
        s += (u + v) * WGK[i];
        abs += (u.norm() + v.norm()) * WGK[i];
    }
    (s * h, abs * h.abs())
}

fn refine<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, whole: Complex64, tol: f64, depth: u32) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let (l, _) = k15(f, a, m);
    let (r, _) = k15(f, m, b);
    let sum = l + r;
    if (sum - whole).norm() <= tol {
        return Ok(sum);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Oracle(format!("adaptive quadrature did not converge on [{a}, {b}]")));
    }
    Ok(refine(f, a, m, l, tol, depth + 1)? + refine(f, m, b, r, tol, depth + 1)?)
}

/// Adaptive Gauss–Kronrod over [a, b] split at `breaks`, to relative tolerance `rel`
/// of ∫|f|.
pub fn adaptive_integral<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, breaks: &[f64], rel: f64) -> Result<Complex64> {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    let pieces: Vec<(f64, f64, Complex64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, s) = k15(&f, w[0], w[1]);
            (w[0], w[1], v, s)
        })
        .collect();
    let scale: f64 = pieces.iter().map(|p| p.3).sum::<f64>().max(pieces.iter().map(|p| p.2).sum::<Complex64>().norm());
    if !scale.is_finite() {
        return Err(Error::Oracle("integrand not finite".into()));
    }
    let tol = (rel * scale / 64.0).max(f64::MIN_POSITIVE);
    let mut total = Complex64::new(0.0, 0.0);
    for (a, b, v, _) in pieces {
        total += refine(&f, a, b, v, tol, 0)?;
    }
    Ok(total)
}

/// Brute-force reference for the closed-form panel integrals, in the
/// projection-centred abscissa l ∈ [l1, l2].
pub fn adaptive_panel_integral(which: PanelIntegrand, g: &SegmentGeometry, k: Complex64) -> Result<Complex64> {
    let (l1, l2, p0, h, l0) = (g.l1, g.l2, g.p0, g.height, g.l0);
    let rho = move |l: f64| l.hypot(p0);
    let half = move |l: f64, rising: bool| if rising { (l - l1) / l0 } else { (l2 - l) / l0 };
    let j = Complex64::new(0.0, 1.0);
    let green = move |r: f64| -0.25 * j * hankel2_complex(0, k * r).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let green_p = move |r: f64| -0.25 * j * hankel2_complex(1, k * r).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let small = move |order: u32, r: f64| hankel2_small(order, k, r).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let re = |x: f64| Complex64::new(x, 0.0);
    let f: Box<dyn Fn(f64) -> Complex64> = match which {
        PanelIntegrand::Green { rising } => Box::new(move |l| green(rho(l)) * half(l, rising)),
        PanelIntegrand::GreenNormal { rising } => {
            Box::new(move |l| k * (h / rho(l)) * green_p(rho(l)) * half(l, rising))
        }
        PanelIntegrand::SmallGreen { rising } => Box::new(move |l| -0.25 * j * small(0, rho(l)) * half(l, rising)),
        PanelIntegrand::SmallGreenNormal { rising } => {
            Box::new(move |l| k * (h / rho(l)) * (-0.25 * j * small(1, rho(l))) * half(l, rising))
        }
        PanelIntegrand::Identity(n) => match n {
            1 => Box::new(move |l| re(l)),
            2 => Box::new(move |l| re(l * rho(l).ln())),
            3 => Box::new(move |l| re(rho(l).ln())),
            4 => Box::new(move |_| re(1.0)),
            5 => Box::new(move |l| re(l / (l * l + p0 * p0))),
            6 => Box::new(move |l| re(1.0 / (l * l + p0 * p0))),
            _ => return Err(Error::Domain(format!("identity index {n} outside 1..=6"))),
        },
    };
    let singular_inside = l1 < 0.0 && l2 > 0.0;
    if p0 == 0.0 && matches!(which, PanelIntegrand::Identity(5 | 6)) && l1 <= 0.0 && l2 >= 0.0 {
        return Err(Error::Oracle("non-integrable kernel on the segment".into()));
    }
    let breaks: &[f64] = if singular_inside { &[0.0] } else { &[] };
    adaptive_integral(f, l1, l2, breaks, 1e-12)
}
