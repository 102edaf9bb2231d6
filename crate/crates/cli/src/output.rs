//! CSV writers and the output manifest.

use hybridem::geometry::Point2;
use hybridem::post::{CostRow, FieldGrid, RcsCurve};
use hybridem::Complex64;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

/// Files of one run, written atomically and listed in `manifest.txt`.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<(String, Vec<u8>)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: String) -> io::Result<()> {
        self.write_bytes(name, contents.into_bytes())
    }

    pub fn write_bytes(&mut self, name: &str, bytes: Vec<u8>) -> io::Result<()> {
        replace_file(&self.dir.join(name), &bytes)?;
        self.written.retain(|(n, _)| n != name);
        self.written.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn files(&self) -> Vec<&str> {
        self.written.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes `manifest.txt`: one `sha256  bytes  name` line per file.
    pub fn finish(self) -> io::Result<Vec<String>> {
        let mut text = String::from("# sha256  bytes  file\n");
        let mut names = Vec::with_capacity(self.written.len());
        for (name, bytes) in &self.written {
            let digest = Sha256::digest(bytes);
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            let _ = writeln!(text, "{hex}  {}  {name}", bytes.len());
            names.push(name.clone());
        }
        replace_file(&self.dir.join("manifest.txt"), text.as_bytes())?;
        Ok(names)
    }
}

fn replace_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

pub fn rcs_csv(curve: &RcsCurve) -> String {
    let mut s = String::from("angle_deg,sigma_db\n");
    for (a, d) in curve.angles_deg.iter().zip(curve.db()) {
        let _ = writeln!(s, "{a},{d}");
    }
    s
}

pub fn nodal_field_csv(points: &[Point2], e: &[Complex64]) -> String {
    let mut s = String::from("x,y,e_re,e_im\n");
    for (p, v) in points.iter().zip(e) {
        let _ = writeln!(s, "{},{},{},{}", p.x, p.y, v.re, v.im);
    }
    s
}

pub fn near_field_csv(grid: &FieldGrid<Complex64>) -> String {
    let mut s = String::from("x,y,e_re,e_im,masked\n");
    for i in 0..grid.len() {
        let p = grid.point(i);
        let v = grid.values[i];
        let _ = writeln!(s, "{},{},{},{},{}", p.x, p.y, v.re, v.im, u8::from(grid.mask[i]));
    }
    s
}

pub fn relerr_csv(grid: &FieldGrid<f64>) -> String {
    let mut s = String::from("x,y,relerr,masked\n");
    for i in 0..grid.len() {
        let p = grid.point(i);
        let _ = writeln!(s, "{},{},{},{}", p.x, p.y, grid.values[i], u8::from(grid.mask[i]));
    }
    s
}

pub fn cost_csv(rows: &[CostRow]) -> String {
    let mut s = String::from("metric,fem,hybrid,ratio\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.metric, r.fem, r.hybrid, r.ratio);
    }
    s
}

/// Two-column `metric,value` table.
pub fn summary_csv(rows: &[(&str, f64)]) -> String {
    let mut s = String::from("metric,value\n");
    for (m, v) in rows {
        let _ = writeln!(s, "{m},{v}");
    }
    s
}
