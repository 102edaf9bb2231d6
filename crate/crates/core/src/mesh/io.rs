use super::{Contour, ContourKind, Mesh, Triangle};
use crate::geometry::Point2;
use crate::material::Material;
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with comments stripped, as (1-based line number, tokens).
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.it.by_ref() {
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse '{tok}'") })
}

fn header(lines: &mut Lines, key: &str) -> Result<usize> {
    let (ln, t) = lines.expect(key)?;
    if t.len() != 2 || t[0] != key {
        return Err(Error::Parse { line: ln, msg: format!("expected '{key} <count>'") });
    }
    num(ln, t[1])
}

fn fields<'a>(lines: &mut Lines<'a>, what: &str, n: usize) -> Result<(usize, Vec<&'a str>)> {
    let (ln, t) = lines.expect(what)?;
    if t.len() != n {
        return Err(Error::Parse { line: ln, msg: format!("expected {n} fields for {what}, found {}", t.len()) });
    }
    Ok((ln, t))
}

/// Parses the text mesh format. The background material is material 0.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines { it: text.lines().enumerate() };
    let nn = header(&mut lines, "nodes")?;
    let mut nodes = Vec::with_capacity(nn);
    for _ in 0..nn {
        let (ln, t) = fields(&mut lines, "node", 2)?;
        nodes.push(Point2::new(num(ln, t[0])?, num(ln, t[1])?));
    }
    let nm = header(&mut lines, "materials")?;
    let mut materials = Vec::with_capacity(nm);
    for _ in 0..nm {
        let (ln, t) = fields(&mut lines, "material", 3)?;
        materials.push(Material { eps_r: num(ln, t[0])?, mu_r: num(ln, t[1])?, sigma: num(ln, t[2])? });
    }
    let nt = header(&mut lines, "triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, t) = fields(&mut lines, "triangle", 4)?;
        triangles.push(Triangle {
            nodes: [num(ln, t[0])?, num(ln, t[1])?, num(ln, t[2])?],
            material: num(ln, t[3])?,
        });
    }
    let nc = header(&mut lines, "contours")?;
    let mut contours = Vec::with_capacity(nc);
    for ci in 0..nc {
        let (ln, t) = fields(&mut lines, "contour header", 3)?;
        if t[0] != "contour" {
            return Err(Error::Parse { line: ln, msg: "expected 'contour <kind> <count>'".into() });
        }
        let kind = ContourKind::parse(t[1])
            .ok_or_else(|| Error::Parse { line: ln, msg: format!("unknown contour kind '{}'", t[1]) })?;
        let k: usize = num(ln, t[2])?;
        let mut ids: Vec<u32> = Vec::with_capacity(k);
        while ids.len() < k {
            let (ln, t) = lines.expect("contour node ids")?;
            for tok in t {
                ids.push(num(ln, tok)?);
            }
        }
        if ids.len() != k {
            return Err(Error::Parse { line: ln, msg: format!("contour {ci} lists more than {k} ids") });
        }
        if k < 2 || ids[0] != ids[k - 1] {
            return Err(Error::Mesh(format!("contour {ci} is not closed (last id must repeat the first)")));
        }
        ids.pop();
        contours.push(Contour { nodes: ids, kind, outward: true });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln, msg: "trailing content".into() });
    }
    Mesh::new(nodes, triangles, materials, contours, 0)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

/// Writes the text format; floats use shortest round-trip formatting.
pub fn write_mesh(mesh: &Mesh, w: &mut impl Write) -> std::io::Result<()> {
    let mut order: Vec<usize> = (0..mesh.materials.len()).collect();
    order.swap(0, mesh.background as usize);
    let mut remap = vec![0u32; order.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new as u32;
    }
    writeln!(w, "nodes {}", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{:?} {:?}", p.x, p.y)?;
    }
    writeln!(w, "materials {}", order.len())?;
    for &m in &order {
        let m = mesh.materials[m];
        writeln!(w, "{:?} {:?} {:?}", m.eps_r, m.mu_r, m.sigma)?;
    }
    writeln!(w, "triangles {}", mesh.triangles.len())?;
    for t in &mesh.triangles {
        writeln!(w, "{} {} {} {}", t.nodes[0], t.nodes[1], t.nodes[2], remap[t.material as usize])?;
    }
    writeln!(w, "contours {}", mesh.contours.len())?;
    for c in &mesh.contours {
        writeln!(w, "contour {} {}", c.kind.as_str(), c.nodes.len() + 1)?;
        for chunk in c.nodes.chunks(16) {
            let s: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", s.join(" "))?;
        }
        writeln!(w, "{}", c.nodes[0])?;
    }
    Ok(())
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mesh(mesh, &mut f)?;
    f.flush()?;
    Ok(())
}
