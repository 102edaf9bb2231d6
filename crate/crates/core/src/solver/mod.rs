//! Sparse direct solver for the global FEM/hybrid systems.
//!
//! The sparse part is complex symmetric. Nonsymmetric dense couplings are
//! allowed only among a designated set of "root" unknowns, which are
//! eliminated last with a dense LU. Everything else goes through a
//! multifrontal LDLᵀ on a geometric nested-dissection tree.

mod frontal;
mod ordering;

pub use frontal::{Factorization, FactorStats};
pub use ordering::{nested_dissection, EliminationTree};

use crate::geometry::Point2;
use crate::{Error, Result};
use faer::Mat;
use num_complex::Complex64;

/// Square complex matrix in compressed-row form with sorted column indices.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub vals: Vec<Complex64>,
}

impl CsrMatrix {
    /// Empty matrix over the given symmetric adjacency (diagonal added).
    pub fn from_adjacency(adj: &[Vec<u32>]) -> Self {
        let n = adj.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let total: usize = adj.iter().map(|a| a.len() + 1).sum();
        let mut col_idx = Vec::with_capacity(total);
        let mut row = Vec::new();
        for (i, nb) in adj.iter().enumerate() {
            row.clear();
            row.push(i as u32);
            row.extend_from_slice(nb);
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(&row);
            row_ptr.push(col_idx.len());
        }
        let vals = vec![Complex64::new(0.0, 0.0); col_idx.len()];
        Self { n, row_ptr, col_idx, vals }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[Complex64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.vals[r])
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .binary_search(&(j as u32))
            .ok()
            .map(|p| r.start + p)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.slot(i, j).map_or(Complex64::new(0.0, 0.0), |p| self.vals[p])
    }

    /// Adds `v` at (i, j). Fails if the entry is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) -> Result<()> {
        let p = self
            .slot(i, j)
            .ok_or_else(|| Error::Solver(format!("entry ({i}, {j}) not in pattern")))?;
        self.vals[p] += v;
        Ok(())
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let (c, v) = self.row(i);
            let mut s = Complex64::new(0.0, 0.0);
            for (&j, &a) in c.iter().zip(v) {
                s += a * x[j as usize];
            }
            y[i] = s;
        }
    }

    /// Largest |A_ij − A_ji| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                m = m.max((a - self.get(j as usize, i)).norm());
            }
        }
        m
    }
}

/// Dense block added at `nodes × nodes`.
#[derive(Clone, Debug)]
pub struct DenseCoupling {
    pub nodes: Vec<usize>,
    pub block: Mat<Complex64>,
}

/// Symmetric sparse part plus dense (possibly nonsymmetric) couplings.
#[derive(Clone, Debug)]
pub struct GlobalMatrix {
    pub sparse: CsrMatrix,
    pub couplings: Vec<DenseCoupling>,
}

impl GlobalMatrix {
    pub fn n(&self) -> usize {
        self.sparse.n
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n()];
        self.sparse.matvec(x, &mut y);
        for c in &self.couplings {
            for (a, &i) in c.nodes.iter().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for (b, &j) in c.nodes.iter().enumerate() {
                    s += c.block[(a, b)] * x[j];
                }
                y[i] += s;
            }
        }
        y
    }

    /// Unknowns touched by a dense coupling; these form the root front.
    pub fn coupled_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.couplings.iter().flat_map(|c| c.nodes.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Coordinate dump, one `row col re im` line per nonzero.
    pub fn write_coordinate(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        let mut at: std::collections::HashMap<usize, Vec<(usize, usize)>> = Default::default();
        for (ci, cp) in self.couplings.iter().enumerate() {
            for (p, &i) in cp.nodes.iter().enumerate() {
                at.entry(i).or_default().push((ci, p));
            }
        }
        let dense = |i: usize, j: usize| {
            let mut a = Complex64::new(0.0, 0.0);
            if let (Some(pi), Some(pj)) = (at.get(&i), at.get(&j)) {
                for &(ci, p) in pi {
                    for &(cj, q) in pj {
                        if ci == cj {
                            a += self.couplings[ci].block[(p, q)];
                        }
                    }
                }
            }
            a
        };
        for i in 0..self.n() {
            let (c, v) = self.sparse.row(i);
            for (&j, a) in c.iter().zip(v) {
                let a = *a + dense(i, j as usize);
                writeln!(w, "{} {} {:.17e} {:.17e}", i, j, a.re, a.im)?;
            }
        }
        let mut extra: Vec<(usize, usize)> = Vec::new();
        for cp in &self.couplings {
            for &i in &cp.nodes {
                for &j in &cp.nodes {
                    if self.sparse.slot(i, j).is_none() {
                        extra.push((i, j));
                    }
                }
            }
        }
        extra.sort_unstable();
        extra.dedup();
        for (i, j) in extra {
            let a = dense(i, j);
            writeln!(w, "{} {} {:.17e} {:.17e}", i, j, a.re, a.im)?;
        }
        Ok(())
    }
}

/// Result of a factor-and-solve with refinement.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<Complex64>,
    pub residual: f64,
    pub refinements: usize,
    pub stats: FactorStats,
}

/// Relative residual ‖Ax − b‖ / ‖b‖.
pub fn relative_residual(a: &GlobalMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let r = a.matvec(x);
    let num: f64 = r.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Factors `a` and solves `a x = b`, refining until the residual stalls.
pub fn solve(a: &GlobalMatrix, coords: &[Point2], b: &[Complex64]) -> Result<Solution> {
    let tree = nested_dissection(&a.sparse, coords, &a.coupled_nodes());
    let f = Factorization::new(a, &tree)?;
    solve_with(a, &f, b)
}

/// Solve with an existing factorization plus iterative refinement.
pub fn solve_with(a: &GlobalMatrix, f: &Factorization, b: &[Complex64]) -> Result<Solution> {
    let mut x = f.solve(b);
    let mut res = relative_residual(a, &x, b);
    let mut steps = 0;
    while res > 1e-13 && steps < 4 {
        let ax = a.matvec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let dx = f.solve(&r);
        let trial: Vec<Complex64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
        let tres = relative_residual(a, &trial, b);
        steps += 1;
        if tres >= res {
            break;
        }
        x = trial;
        res = tres;
    }
    if !res.is_finite() || res > 1e-6 {
        return Err(Error::Singular(format!("relative residual {res:.3e} after refinement")));
    }
    Ok(Solution { x, residual: res, refinements: steps, stats: f.stats.clone() })
}
