use super::{EliminationTree, GlobalMatrix};
use crate::{Error, Result};
use faer::linalg::matmul::matmul;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Accum, Mat, MatMut, MatRef, Par};
use num_complex::Complex64;
use std::time::Instant;

const PANEL: usize = 48;
const COL_BLOCK: usize = 192;
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, Default)]
pub struct FactorStats {
    pub unknowns: usize,
    /// Stored factor entries, root block included.
    pub factor_entries: usize,
    pub max_front: usize,
    pub root_size: usize,
    /// Smallest |pivot| relative to the largest seen in the LDLᵀ phase.
    pub pivot_ratio: f64,
    pub seconds: f64,
}

impl FactorStats {
    pub fn factor_bytes(&self) -> usize {
        self.factor_entries * std::mem::size_of::<Complex64>()
    }
}

struct Front {
    vars: Vec<u32>,
    bnd: Vec<u32>,
    /// Unit lower-trapezoidal factor, (s + b) × s, column-major.
    l: Vec<Complex64>,
    d: Vec<Complex64>,
}

struct Update {
    rows: Vec<u32>,
    /// Lower triangle of an m × m block, column-major.
    m: Vec<Complex64>,
}

/// Multifrontal factorization `P A Pᵀ = L D Lᵀ` with a dense LU root.
pub struct Factorization {
    n: usize,
    fronts: Vec<Front>,
    root_vars: Vec<u32>,
    root: Option<PartialPivLu<Complex64>>,
    pub stats: FactorStats,
}

fn factor_front(fr: &mut [Complex64], f: usize, s: usize, dmax: &mut f64, dmin: &mut f64) -> Result<Vec<Complex64>> {
    let mut d = vec![ZERO; s];
    let mut k0 = 0;
    while k0 < s {
        let k1 = (k0 + PANEL).min(s);
        for j in k0..k1 {
            let (left, right) = fr.split_at_mut(j * f);
            let cj = &mut right[..f];
            for p in k0..j {
                let cp = &left[p * f..(p + 1) * f];
                let w = cp[j] * d[p];
                for i in j..f {
                    cj[i] -= cp[i] * w;
                }
            }
            let dj = cj[j];
            let a = dj.norm();
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Singular(format!("zero pivot in front of size {f}")));
            }
            *dmax = dmax.max(a);
            *dmin = dmin.min(a);
            d[j] = dj;
            let inv = dj.inv();
            cj[j] = Complex64::new(1.0, 0.0);
            for v in &mut cj[j + 1..] {
                *v *= inv;
            }
        }
        if k1 < f {
            let m = f - k1;
            let w = k1 - k0;
            let mut wm = Mat::<Complex64>::zeros(m, w);
            for p in 0..w {
                let col = &fr[(k0 + p) * f + k1..(k0 + p + 1) * f];
                let dp = d[k0 + p];
                for i in 0..m {
                    wm[(i, p)] = col[i] * dp;
                }
            }
            let (left, right) = fr.split_at_mut(k1 * f);
            let panel = MatRef::from_column_major_slice_with_stride(&left[k0 * f..], f, w, f);
            let mut c0 = k1;
            while c0 < f {
                let c1 = (c0 + COL_BLOCK).min(f);
                let off = (c0 - k1) * f + c0;
                let dst = MatMut::from_column_major_slice_with_stride_mut(&mut right[off..], f - c0, c1 - c0, f);
                let lhs = wm.as_ref().subrows(c0 - k1, f - c0);
                let rhs = panel.subrows(c0, c1 - c0).transpose();
                matmul(dst, Accum::Add, lhs, rhs, Complex64::new(-1.0, 0.0), Par::Seq);
                c0 = c1;
            }
        }
        k0 = k1;
    }
    Ok(d)
}

impl Factorization {
    pub fn new(a: &GlobalMatrix, tree: &EliminationTree) -> Result<Self> {
        let t0 = Instant::now();
        let n = a.n();
        let root_id = tree.root();
        let mut loc = vec![u32::MAX; n];
        let mut stack: Vec<Update> = Vec::new();
        let mut fronts = Vec::with_capacity(root_id);
        let (mut dmax, mut dmin) = (0.0f64, f64::MAX);
        let mut stats = FactorStats { unknowns: n, ..Default::default() };

        for (t, node) in tree.nodes.iter().enumerate().take(root_id) {
            let s = node.vars.len();
            let f = s + node.bnd.len();
            stats.max_front = stats.max_front.max(f);
            for (i, &v) in node.vars.iter().chain(&node.bnd).enumerate() {
                loc[v as usize] = i as u32;
            }
            let mut fr = vec![ZERO; f * f];
            for (j, &v) in node.vars.iter().enumerate() {
                let (cols, vals) = a.sparse.row(v as usize);
                for (&u, &val) in cols.iter().zip(vals) {
                    let i = loc[u as usize];
                    if i != u32::MAX && i as usize >= j {
                        fr[i as usize + j * f] += val;
                    }
                }
            }
            let nc = node.children.len();
            for up in stack.drain(stack.len() - nc..) {
                extend_add(&mut fr, f, &up, &loc);
            }
            let d = factor_front(&mut fr, f, s, &mut dmax, &mut dmin)?;
            if f > s {
                let b = f - s;
                let mut m = vec![ZERO; b * b];
                for jj in 0..b {
                    let src = &fr[(s + jj) * f + s + jj..(s + jj + 1) * f];
                    m[jj * b + jj..(jj + 1) * b].copy_from_slice(src);
                }
                stack.push(Update { rows: node.bnd.clone(), m });
            }
            fr.truncate(f * s);
            fr.shrink_to_fit();
            stats.factor_entries += f * s;
            for &v in node.vars.iter().chain(&node.bnd) {
                loc[v as usize] = u32::MAX;
            }
            debug_assert!(t < root_id);
            fronts.push(Front { vars: node.vars.clone(), bnd: node.bnd.clone(), l: fr, d });
        }

        let rn = &tree.nodes[root_id];
        let r = rn.vars.len();
        for (i, &v) in rn.vars.iter().enumerate() {
            loc[v as usize] = i as u32;
        }
        let mut m = Mat::<Complex64>::zeros(r, r);
        for (j, &v) in rn.vars.iter().enumerate() {
            let (cols, vals) = a.sparse.row(v as usize);
            for (&u, &val) in cols.iter().zip(vals) {
                let i = loc[u as usize];
                if i != u32::MAX {
                    m[(j, i as usize)] += val;
                }
            }
        }
        let mut dense = vec![ZERO; r * r];
        for up in stack.drain(..) {
            extend_add(&mut dense, r, &up, &loc);
        }
        for j in 0..r {
            for i in j..r {
                let v = dense[i + j * r];
                m[(i, j)] += v;
                if i != j {
                    m[(j, i)] += v;
                }
            }
        }
        drop(dense);
        for c in &a.couplings {
            for (p, &i) in c.nodes.iter().enumerate() {
                let li = loc[i];
                if li == u32::MAX {
                    return Err(Error::Solver("coupled unknown outside the root front".into()));
                }
                for (q, &j) in c.nodes.iter().enumerate() {
                    m[(li as usize, loc[j] as usize)] += c.block[(p, q)];
                }
            }
        }
        let root = if r > 0 { Some(m.partial_piv_lu()) } else { None };
        stats.root_size = r;
        stats.factor_entries += r * r;
        stats.max_front = stats.max_front.max(r);
        stats.pivot_ratio = if dmax > 0.0 { dmin / dmax } else { 1.0 };
        stats.seconds = t0.elapsed().as_secs_f64();
        Ok(Self { n, fronts, root_vars: rn.vars.clone(), root, stats })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        let mut y = Vec::new();
        for fr in &self.fronts {
            let s = fr.vars.len();
            let f = s + fr.bnd.len();
            y.clear();
            y.extend(fr.vars.iter().map(|&v| x[v as usize]));
            for j in 0..s {
                let yj = y[j];
                let col = &fr.l[j * f..(j + 1) * f];
                for i in j + 1..s {
                    y[i] -= col[i] * yj;
                }
                for (k, &u) in fr.bnd.iter().enumerate() {
                    x[u as usize] -= col[s + k] * yj;
                }
            }
            for (k, &v) in fr.vars.iter().enumerate() {
                x[v as usize] = y[k];
            }
        }
        if let Some(lu) = &self.root {
            let r = self.root_vars.len();
            let rhs = Mat::<Complex64>::from_fn(r, 1, |i, _| x[self.root_vars[i] as usize]);
            let sol = lu.solve(&rhs);
            for (i, &v) in self.root_vars.iter().enumerate() {
                x[v as usize] = sol[(i, 0)];
            }
        }
        for fr in self.fronts.iter().rev() {
            let s = fr.vars.len();
            let f = s + fr.bnd.len();
            y.clear();
            y.extend(fr.vars.iter().zip(&fr.d).map(|(&v, &d)| x[v as usize] / d));
            for j in (0..s).rev() {
                let col = &fr.l[j * f..(j + 1) * f];
                let mut acc = y[j];
                for (k, &u) in fr.bnd.iter().enumerate() {
                    acc -= col[s + k] * x[u as usize];
                }
                for i in j + 1..s {
                    acc -= col[i] * y[i];
                }
                y[j] = acc;
            }
            for (k, &v) in fr.vars.iter().enumerate() {
                x[v as usize] = y[k];
            }
        }
        x
    }
}

fn extend_add(dst: &mut [Complex64], ld: usize, up: &Update, loc: &[u32]) {
    let m = up.rows.len();
    let idx: Vec<usize> = up.rows.iter().map(|&u| loc[u as usize] as usize).collect();
    for jj in 0..m {
        let cj = idx[jj] * ld;
        let src = &up.m[jj * m..(jj + 1) * m];
        for ii in jj..m {
            dst[idx[ii] + cj] += src[ii];
        }
    }
}
