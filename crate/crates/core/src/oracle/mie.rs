use crate::geometry::Point2;
use crate::material::{k0, omega, Material};
use crate::post::RcsCurve;
use crate::specfun::{bessel_j, hankel2_n};
use crate::{Error, Result};
use num_complex::Complex64;

const MODE_CAP: i32 = 400;

/// Modal solution for a homogeneous circular cylinder centred at the origin,
/// lit by E0·exp(−j k0 d̂·r) with d̂ at `direction` radians.
#[derive(Clone, Debug)]
pub struct MieSolution {
    pub radius: f64,
    pub inner: Material,
    pub background: Material,
    pub frequency: f64,
    pub direction: f64,
    pub amplitude: f64,
    /// Scattering coefficients a_n, n = 0..=N (a_{−n} = a_n).
    pub a: Vec<Complex64>,
    /// Interior coefficients c_n.
    pub c: Vec<Complex64>,
    pub k_out: Complex64,
    pub k_in: Complex64,
}

fn dj(n: i32, z: Complex64) -> Result<Complex64> {
    Ok(bessel_j(n - 1, z)? - (n as f64) / z * bessel_j(n, z)?)
}

fn dh(n: i32, z: Complex64) -> Result<Complex64> {
    Ok(hankel2_n(n - 1, z)? - (n as f64) / z * hankel2_n(n, z)?)
}

fn j_pow(n: i32) -> Complex64 {
    // (−j)^n
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

impl MieSolution {
    pub fn new(radius: f64, inner: Material, background: Material, frequency: f64) -> Result<Self> {
        if !(radius > 0.0) || !(frequency > 0.0) {
            return Err(Error::Domain("radius and frequency must be positive".into()));
        }
        inner.validate()?;
        background.validate()?;
        let w = omega(frequency);
        let (ko, ki) = (background.wavenumber(w), inner.wavenumber(w));
        let (zo, zi) = (ko * radius, ki * radius);
        let (mo, mi) = (background.mu_r, inner.mu_r);
        let mut a = Vec::new();
        let mut c = Vec::new();
        let mut amax = 0.0f64;
        for n in 0..=MODE_CAP {
            let (jo, jpo) = (bessel_j(n, zo)?, dj(n, zo)?);
            let (ho, hpo) = (hankel2_n(n, zo)?, dh(n, zo)?);
            let (ji, jpi) = (bessel_j(n, zi)?, dj(n, zi)?);
            let num = jo * jpi * (ki / mi) - jpo * ji * (ko / mo);
            let den = ko / mo * hpo * ji - ki / mi * ho * jpi;
            let an = num / den;
            let cn = (jo + an * ho) / ji;
            if !an.is_finite() {
                break;
            }
            amax = amax.max(an.norm());
            a.push(an);
            c.push(if cn.is_finite() { cn } else { Complex64::new(0.0, 0.0) });
            let past_edge = (n as f64) > zo.norm().max(zi.norm()) + 4.0;
            if past_edge && an.norm() <= 1e-13 * amax && jo.norm() < 1e-16 {
                return Ok(Self {
                    radius,
                    inner,
                    background,
                    frequency,
                    direction: 0.0,
                    amplitude: 1.0,
                    a,
                    c,
                    k_out: ko,
                    k_in: ki,
                });
            }
        }
        Err(Error::Oracle(format!("Mie series not converged within {MODE_CAP} modes")))
    }

    pub fn with_incidence(mut self, direction_rad: f64, amplitude: f64) -> Self {
        self.direction = direction_rad;
        self.amplitude = amplitude;
        self
    }

    pub fn n_modes(&self) -> usize {
        self.a.len()
    }

    /// Free-space wavenumber of the run, independent of the background medium.
    pub fn k0(&self) -> f64 {
        k0(omega(self.frequency))
    }
}

/// Total field at the given points: the interior series inside, the plane
/// wave plus the scattered series outside.
pub fn mie_fields(sol: &MieSolution, points: &[Point2]) -> Result<Vec<Complex64>> {
    let n_max = sol.a.len() as i32 - 1;
    let d = Point2::new(sol.direction.cos(), sol.direction.sin());
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let rho = p.norm();
        let phi = p.y.atan2(p.x) - sol.direction;
        let inside = rho < sol.radius;
        let mut e = if inside {
            Complex64::new(0.0, 0.0)
        } else {
            (-Complex64::i() * sol.k_out * d.dot(*p)).exp()
        };
        for n in 0..=n_max {
            let w = if n == 0 { 1.0 } else { 2.0 } * (n as f64 * phi).cos();
            let term = if inside {
                sol.c[n as usize] * bessel_j(n, sol.k_in * rho)?
            } else if sol.a[n as usize] == Complex64::new(0.0, 0.0) {
                continue;
            } else {
                sol.a[n as usize] * hankel2_n(n, sol.k_out * rho)?
            };
            e += j_pow(n) * term * w;
        }
        out.push(e * sol.amplitude);
    }
    Ok(out)
}

/// Scattering width σ_2D(φ) = (4/k)|Σ a_n e^{jnφ}|² on the given angles (degrees).
pub fn mie_rcs(sol: &MieSolution, angles_deg: &[f64]) -> Result<RcsCurve> {
    let k = sol.k_out.re;
    let sigma = angles_deg
        .iter()
        .map(|&deg| {
            let phi = deg.to_radians() - sol.direction;
            let s: Complex64 = sol
                .a
                .iter()
                .enumerate()
                .map(|(n, &an)| an * if n == 0 { 1.0 } else { 2.0 } * (n as f64 * phi).cos())
                .sum();
            4.0 / k * s.norm_sqr()
        })
        .collect();
    RcsCurve::new(angles_deg.to_vec(), sigma, sol.frequency)
}
