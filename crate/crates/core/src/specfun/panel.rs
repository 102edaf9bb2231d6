use super::bessel::EULER_GAMMA_EXP;
use crate::geometry::Point2;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Observation point relative to a straight source segment r1′ → r2′.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentGeometry {
    pub r_obs: Point2,
    pub r1p: Point2,
    pub r2p: Point2,
    pub tau: Point2,
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    /// Unsigned distance from the observation point to the source line.
    pub p0: f64,
    /// Signed distance (r − r1′)·n̂′ with n̂′ the right-hand normal of τ′.
    pub height: f64,
}

impl SegmentGeometry {
    pub fn new(r_obs: Point2, r1p: Point2, r2p: Point2) -> Result<Self> {
        let d = r2p - r1p;
        let l0 = d.norm();
        if !(l0 > 0.0) || !l0.is_finite() {
            return Err(Error::Domain("degenerate source segment".into()));
        }
        let tau = d * (1.0 / l0);
        let l1 = (r1p - r_obs).dot(tau);
        let height = (r_obs - r1p).dot(tau.right_normal());
        Ok(Self { r_obs, r1p, r2p, tau, l0, l1, l2: l1 + l0, p0: height.abs(), height })
    }

    pub fn normal(&self) -> Point2 {
        self.tau.right_normal()
    }

    /// Point of the source line at signed abscissa `l` measured from the projection.
    pub fn point_at(&self, l: f64) -> Point2 {
        self.r1p + self.tau * (l - self.l1)
    }

    pub fn min_distance(&self) -> f64 {
        if self.l1 <= 0.0 && self.l2 >= 0.0 {
            self.p0
        } else {
            self.l1.abs().min(self.l2.abs()).hypot(self.p0)
        }
    }

    /// True when the foot of the perpendicular falls strictly inside the segment.
    pub fn projects_inside(&self) -> bool {
        self.l1 < 0.0 && self.l2 > 0.0
    }
}

/// The six line integrals of the closed-form panel expressions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Identities {
    /// ∫ l dl
    pub i1: f64,
    /// ∫ l ln ρ dl
    pub i2: f64,
    /// ∫ ln ρ dl
    pub i3: f64,
    /// ∫ dl
    pub i4: f64,
    /// ∫ l/ρ² dl
    pub i5: f64,
    /// ∫ 1/ρ² dl
    pub i6: f64,
}

fn xlnx_half(d2: f64) -> f64 {
    // d² ln d
    if d2 == 0.0 {
        0.0
    } else {
        0.5 * d2 * d2.ln()
    }
}

fn i3_term(l: f64, p0: f64) -> f64 {
    let d2 = l * l + p0 * p0;
    let a = if l == 0.0 { 0.0 } else { 0.5 * l * d2.ln() };
    let b = if p0 > 0.0 { p0 * (l / p0).atan() } else { 0.0 };
    a - l + b
}

/// All six identities; I5 and I6 may be non-finite when ρ vanishes on the segment.
pub(crate) fn identities_raw(g: &SegmentGeometry) -> Identities {
    let (l1, l2, p0) = (g.l1, g.l2, g.p0);
    let d1 = l1 * l1 + p0 * p0;
    let d2 = l2 * l2 + p0 * p0;
    let i1 = 0.5 * g.l0 * (l1 + l2);
    let i2 = 0.5 * (xlnx_half(d2) - xlnx_half(d1)) - 0.25 * g.l0 * (l1 + l2);
    let i3 = i3_term(l2, p0) - i3_term(l1, p0);
    let i5 = 0.5 * (g.l0 * (l1 + l2) / d1).ln_1p();
    let i6 = if p0 > 0.0 {
        (g.l0 * p0).atan2(p0 * p0 + l1 * l2) / p0
    } else if l1 * l2 > 0.0 {
        1.0 / l1 - 1.0 / l2
    } else {
        f64::INFINITY
    };
    Identities { i1, i2, i3, i4: g.l0, i5, i6 }
}

/// Closed forms of I1–I6. Fails when the observation point lies on the
/// closed segment, where I6 diverges.
pub fn identities_i(g: &SegmentGeometry) -> Result<Identities> {
    if g.p0 == 0.0 && g.l1 <= 0.0 && g.l2 >= 0.0 {
        return Err(Error::Domain("observation point on the source segment: I6 diverges".into()));
    }
    Ok(identities_raw(g))
}

/// ∫ G_s f and ∫ ∂G_s/∂n′ f over the rising and falling halves, where G_s is
/// the first-order small-argument Green's function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallKernelIntegrals {
    /// [rising, falling]
    pub g: [Complex64; 2],
    pub dg: [Complex64; 2],
}

pub fn small_kernel_integrals(g: &SegmentGeometry, k: Complex64) -> SmallKernelIntegrals {
    let id = identities_raw(g);
    let (l1, l2, l0) = (g.l1, g.l2, g.l0);
    let a = 1.0 - J * (2.0 / PI) * (EULER_GAMMA_EXP * k / 2.0).ln();
    let c0 = -0.25 * J * a;
    let c1 = -1.0 / (2.0 * PI);
    let g_rise = (c0 * (id.i1 - l1 * id.i4) + c1 * (id.i2 - l1 * id.i3)) / l0;
    let g_fall = (c0 * (l2 * id.i4 - id.i1) + c1 * (l2 * id.i3 - id.i2)) / l0;

    let h = g.height;
    let (hi5, hi6) = if h == 0.0 {
        (0.0, 0.0)
    } else {
        (h * id.i5, h.signum() * (l0 * g.p0).atan2(g.p0 * g.p0 + l1 * l2))
    };
    let c2 = -J * k * k * h / 8.0;
    let c3 = 1.0 / (2.0 * PI);
    let dg_rise = (c2 * (id.i1 - l1 * id.i4) + c3 * (hi5 - l1 * hi6)) / l0;
    let dg_fall = (c2 * (l2 * id.i4 - id.i1) + c3 * (l2 * hi6 - hi5)) / l0;
    SmallKernelIntegrals { g: [g_rise, g_fall], dg: [dg_rise, dg_fall] }
}

fn threshold(g: &SegmentGeometry, k: Complex64) -> Result<()> {
    let z = k.norm() * g.min_distance();
    if z >= 0.1 {
        return Err(Error::Domain(format!("|k|ρ_min = {z:.3} outside the small-argument range")));
    }
    Ok(())
}

/// jωμ ∫ G f_half dl′ in closed form.
pub fn integrate_g_halfrooftop(g: &SegmentGeometry, k: Complex64, jwmu: Complex64, rising: bool) -> Result<Complex64> {
    threshold(g, k)?;
    let s = small_kernel_integrals(g, k);
    Ok(jwmu * s.g[if rising { 0 } else { 1 }])
}

/// ∫ k (ρ⃗·n̂′/ρ) G′ f_half dl′ = ∫ ∂G/∂n′ f_half dl′ in closed form.
pub fn integrate_gradg_halfrooftop(g: &SegmentGeometry, k: Complex64, rising: bool) -> Result<Complex64> {
    threshold(g, k)?;
    let s = small_kernel_integrals(g, k);
    Ok(s.dg[if rising { 0 } else { 1 }])
}
