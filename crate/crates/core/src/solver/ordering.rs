use super::CsrMatrix;
use crate::geometry::Point2;

const LEAF: usize = 96;

/// Assembly tree in postorder; the last node is the root.
#[derive(Clone, Debug)]
pub struct EliminationTree {
    pub nodes: Vec<TreeNode>,
    /// Tree node that eliminates each unknown.
    pub owner: Vec<u32>,
}

#[derive(Clone, Debug, Default)]
pub struct TreeNode {
    /// Unknowns eliminated at this node, in elimination order.
    pub vars: Vec<u32>,
    /// Ancestor unknowns coupled to this subtree, in elimination order.
    pub bnd: Vec<u32>,
    pub children: Vec<u32>,
}

impl EliminationTree {
    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Predicted number of stored factor entries.
    pub fn factor_entries(&self) -> usize {
        let r = self.root();
        self.nodes
            .iter()
            .enumerate()
            .map(|(t, nd)| {
                let s = nd.vars.len();
                if t == r {
                    s * s
                } else {
                    s * (s + nd.bnd.len())
                }
            })
            .sum()
    }
}

struct Builder<'a> {
    a: &'a CsrMatrix,
    xy: &'a [Point2],
    stamp: Vec<u32>,
    next: u32,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn fresh(&mut self) -> u32 {
        self.next += 1;
        self.next
    }

    fn touches(&self, v: u32, mark: u32) -> bool {
        self.a.row(v as usize).0.iter().any(|&u| self.stamp[u as usize] == mark)
    }

    fn build(&mut self, mut set: Vec<u32>) -> Option<u32> {
        if set.is_empty() {
            return None;
        }
        if set.len() <= LEAF {
            self.nodes.push(TreeNode { vars: set, ..Default::default() });
            return Some(self.nodes.len() as u32 - 1);
        }
        let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
        for &v in &set {
            let p = self.xy[v as usize];
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let xy = self.xy;
        let key = |v: u32| if hi.x - lo.x >= hi.y - lo.y { xy[v as usize].x } else { xy[v as usize].y };
        let mid = set.len() / 2;
        set.select_nth_unstable_by(mid, |&p, &q| key(p).total_cmp(&key(q)).then(p.cmp(&q)));
        let mut right = set.split_off(mid);
        let mut left = set;
        let (tl, tr) = (self.fresh(), self.fresh());
        for &v in &left {
            self.stamp[v as usize] = tl;
        }
        for &v in &right {
            self.stamp[v as usize] = tr;
        }
        let sep_r: Vec<u32> = right.iter().copied().filter(|&v| self.touches(v, tl)).collect();
        let sep_l: Vec<u32> = left.iter().copied().filter(|&v| self.touches(v, tr)).collect();
        let ts = self.fresh();
        let sep = if sep_r.len() <= sep_l.len() { sep_r } else { sep_l };
        for &v in &sep {
            self.stamp[v as usize] = ts;
        }
        left.retain(|&v| self.stamp[v as usize] != ts);
        right.retain(|&v| self.stamp[v as usize] != ts);
        let children: Vec<u32> = [self.build(left), self.build(right)].into_iter().flatten().collect();
        self.nodes.push(TreeNode { vars: sep, bnd: Vec::new(), children });
        Some(self.nodes.len() as u32 - 1)
    }
}

/// Geometric nested dissection. `root_vars` are forced into the root front.
pub fn nested_dissection(a: &CsrMatrix, coords: &[Point2], root_vars: &[usize]) -> EliminationTree {
    let n = a.n;
    assert_eq!(coords.len(), n, "one coordinate per unknown");
    let mut forced = vec![false; n];
    for &v in root_vars {
        forced[v] = true;
    }
    let rest: Vec<u32> = (0..n as u32).filter(|&v| !forced[v as usize]).collect();
    let mut b = Builder { a, xy: coords, stamp: vec![0; n], next: 0, nodes: Vec::new() };
    let top = b.build(rest);
    let mut nodes = b.nodes;
    if !root_vars.is_empty() || top.is_none() {
        nodes.push(TreeNode {
            vars: root_vars.iter().map(|&v| v as u32).collect(),
            bnd: Vec::new(),
            children: top.into_iter().collect(),
        });
    }

    let mut owner = vec![u32::MAX; n];
    for (t, nd) in nodes.iter().enumerate() {
        for &v in &nd.vars {
            owner[v as usize] = t as u32;
        }
    }
    let mut pos = vec![0u32; n];
    let mut k = 0u32;
    for nd in &nodes {
        for &v in &nd.vars {
            pos[v as usize] = k;
            k += 1;
        }
    }

    let mut mark = vec![u32::MAX; n];
    for t in 0..nodes.len() {
        let mut bnd = Vec::new();
        let tt = t as u32;
        for &v in &nodes[t].vars {
            for &u in a.row(v as usize).0 {
                if owner[u as usize] > tt && mark[u as usize] != tt {
                    mark[u as usize] = tt;
                    bnd.push(u);
                }
            }
        }
        for ci in 0..nodes[t].children.len() {
            let c = nodes[t].children[ci] as usize;
            for &u in &nodes[c].bnd {
                if owner[u as usize] > tt && mark[u as usize] != tt {
                    mark[u as usize] = tt;
                    bnd.push(u);
                }
            }
        }
        bnd.sort_unstable_by_key(|&u| pos[u as usize]);
        nodes[t].bnd = bnd;
    }
    EliminationTree { nodes, owner }
}
