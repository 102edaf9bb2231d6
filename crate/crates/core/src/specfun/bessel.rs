use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// γ in the small-argument logarithm, e^{Euler–Mascheroni} to four digits.
pub const EULER_GAMMA_EXP: f64 = 1.781;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn order_check(order: u32) -> Result<()> {
    if order > 1 {
        return Err(Error::Domain(format!("Hankel order {order} not in {{0, 1}}")));
    }
    Ok(())
}

fn real_h2(order: u32, z: f64) -> Complex64 {
    if order == 0 {
        Complex64::new(libm::j0(z), -libm::y0(z))
    } else {
        Complex64::new(libm::j1(z), -libm::y1(z))
    }
}

/// H_n^(2)(z) = J_n(z) − jY_n(z) for real z > 0, n ∈ {0, 1}.
pub fn hankel2(order: u32, z: f64) -> Result<Complex64> {
    order_check(order)?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Hankel argument {z} must be positive")));
    }
    Ok(real_h2(order, z))
}

fn cb_err(e: complex_bessel::Error) -> Error {
    Error::Domain(format!("Bessel evaluation failed: {e:?}"))
}

/// H_n^(2)(z) for complex z off the branch cut, n ∈ {0, 1}.
pub fn hankel2_complex(order: u32, z: Complex64) -> Result<Complex64> {
    order_check(order)?;
    if z.im == 0.0 {
        return hankel2(order, z.re);
    }
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("Hankel argument {z} invalid")));
    }
    complex_bessel::hankel2(order as f64, z).map_err(cb_err)
}

fn reflect(n: i32, v: Complex64) -> Complex64 {
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// J_n(z) for integer n.
pub fn bessel_j(n: i32, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Ok(if n == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    }
    let v = complex_bessel::besselj(n.unsigned_abs() as f64, z).map_err(cb_err)?;
    Ok(reflect(n, v))
}

/// Y_n(z) for integer n, z ≠ 0.
pub fn bessel_y(n: i32, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("Y_n at z = 0".into()));
    }
    let v = complex_bessel::bessely(n.unsigned_abs() as f64, z).map_err(cb_err)?;
    Ok(reflect(n, v))
}

/// H_n^(2)(z) for integer n, z ≠ 0.
pub fn hankel2_n(n: i32, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("H_n^(2) at z = 0".into()));
    }
    let v = complex_bessel::hankel2(n.unsigned_abs() as f64, z).map_err(cb_err)?;
    Ok(reflect(n, v))
}

/// First-order small-argument forms of H_0^(2)(kρ) and H_1^(2)(kρ).
pub fn hankel2_small(order: u32, k: Complex64, rho: f64) -> Result<Complex64> {
    order_check(order)?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("small-argument Hankel needs rho > 0, got {rho}")));
    }
    if order == 0 {
        let a = 1.0 - J * (2.0 / PI) * (EULER_GAMMA_EXP * k / 2.0).ln();
        Ok(a - J * (2.0 / PI) * rho.ln())
    } else {
        let z = k * rho;
        Ok(z / 2.0 + 2.0 * J / (PI * z))
    }
}

fn h2_any(order: u32, z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        real_h2(order, z.re)
    } else {
        complex_bessel::hankel2(order as f64, z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}

/// G = −j H_0^(2)(kρ) / 4.
pub fn green(k: Complex64, rho: f64) -> Complex64 {
    -0.25 * J * h2_any(0, k * rho)
}

/// G′ = −j H_1^(2)(kρ) / 4.
pub fn green_prime(k: Complex64, rho: f64) -> Complex64 {
    -0.25 * J * h2_any(1, k * rho)
}

/// (G, G′) from one evaluation of both Hankel orders.
pub fn green_pair(k: Complex64, rho: f64) -> (Complex64, Complex64) {
    let z = k * rho;
    let (h0, h1) = if z.im == 0.0 {
        (real_h2(0, z.re), real_h2(1, z.re))
    } else {
        match complex_bessel::hankel2_seq(0.0, z, 2, complex_bessel::Scaling::Unscaled) {
            Ok(r) => (r.values[0], r.values[1]),
            Err(_) => (Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN)),
        }
    };
    (-0.25 * J * h0, -0.25 * J * h1)
}
