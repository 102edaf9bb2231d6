//! Constitutive parameters and wavenumbers.

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const C0: f64 = 299_792_458.0;
pub const MU0: f64 = 4.0e-7 * PI;
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub eps_r: f64,
    pub mu_r: f64,
    /// Conductivity in S/m.
    pub sigma: f64,
}

impl Material {
    pub const VACUUM: Material = Material { eps_r: 1.0, mu_r: 1.0, sigma: 0.0 };
    pub const COPPER: Material = Material { eps_r: 1.0, mu_r: 1.0, sigma: 5.8e7 };

    pub fn new(eps_r: f64, mu_r: f64, sigma: f64) -> Result<Self> {
        let m = Self { eps_r, mu_r, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn dielectric(eps_r: f64) -> Self {
        Self { eps_r, mu_r: 1.0, sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_r.is_finite()
            && self.eps_r > 0.0
            && self.mu_r.is_finite()
            && self.mu_r > 0.0
            && self.sigma.is_finite()
            && self.sigma >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid material {self:?}")))
        }
    }

    pub fn mu(&self) -> f64 {
        MU0 * self.mu_r
    }

    /// Relative complex permittivity ε_r − jσ/(ωε0).
    pub fn eps_c(&self, omega: f64) -> Complex64 {
        Complex64::new(self.eps_r, -self.sigma / (omega * EPS0))
    }

    /// k = ω√(μ ε0 ε_c), on the branch with Im k ≤ 0.
    pub fn wavenumber(&self, omega: f64) -> Complex64 {
        let k = omega * (self.mu() * EPS0 * self.eps_c(omega)).sqrt();
        if k.im > 0.0 {
            -k
        } else {
            k
        }
    }

    /// jωμ.
    pub fn jwmu(&self, omega: f64) -> Complex64 {
        Complex64::new(0.0, omega * self.mu())
    }

    pub fn skin_depth(&self, omega: f64) -> f64 {
        (2.0 / (omega * self.mu() * self.sigma)).sqrt()
    }
}

pub fn omega(frequency: f64) -> f64 {
    2.0 * PI * frequency
}

/// Free-space wavenumber.
pub fn k0(omega: f64) -> f64 {
    omega / C0
}
