use crate::{Error, Result};
use std::sync::OnceLock;

pub const MAX_POINTS: usize = 64;

fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Nodes and weights on [−1, 1], cached.
pub fn gauss_legendre_unit(n: usize) -> Result<&'static (Vec<f64>, Vec<f64>)> {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    if !(1..=MAX_POINTS).contains(&n) {
        return Err(Error::Domain(format!("Gauss-Legendre order {n} outside 1..={MAX_POINTS}")));
    }
    let rules = RULES.get_or_init(|| (1..=MAX_POINTS).map(compute_rule).collect());
    Ok(&rules[n - 1])
}

/// Nodes and weights mapped to [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_legendre_unit(n)?;
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    Ok((x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect()))
}
