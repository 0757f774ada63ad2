//! File formats: plain-text mesh, CSV field exports, coordinate matrix dump.

use std::fs;
use std::io::Write;
use std::path::Path;

use stiffen_core::fem::CsrMatrix;
use stiffen_core::mesh::Mesh;

/// Uniform numeric formatting: 15 significant digits, round-trippable.
pub fn num(x: f64) -> String {
    format!("{:.15e}", x)
}

/// Load a mesh from the plain-text format: first line `V F`, then V lines
/// `x y b` (b is the boundary flag), then F lines `i j k` zero-based.
///
/// The mesh constructor cross-checks the stored boundary flags against the
/// connectivity and rejects any mismatch.
pub fn load_mesh(path: &Path) -> Result<Mesh, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or("line 1: empty file")?;
    let mut it = header.split_whitespace();
    let nv: usize = parse_field(it.next(), 1, "node count")?;
    let nf: usize = parse_field(it.next(), 1, "triangle count")?;
    if it.next().is_some() {
        return Err("line 1: expected exactly `V F`".into());
    }
    let mut nodes = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| format!("line {}: missing node line", nodes.len() + 2))?;
        let lineno = idx + 1;
        let mut it = line.split_whitespace();
        let x: f64 = parse_field(it.next(), lineno, "x coordinate")?;
        let y: f64 = parse_field(it.next(), lineno, "y coordinate")?;
        let b: u8 = parse_field(it.next(), lineno, "boundary flag")?;
        if b > 1 {
            return Err(format!("line {lineno}: boundary flag must be 0 or 1"));
        }
        if it.next().is_some() {
            return Err(format!("line {lineno}: expected exactly `x y b`"));
        }
        nodes.push([x, y]);
        flags.push(b == 1);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| format!("line {}: missing triangle line", nv + triangles.len() + 2))?;
        let lineno = idx + 1;
        let mut it = line.split_whitespace();
        let i: usize = parse_field(it.next(), lineno, "vertex index")?;
        let j: usize = parse_field(it.next(), lineno, "vertex index")?;
        let k: usize = parse_field(it.next(), lineno, "vertex index")?;
        if it.next().is_some() {
            return Err(format!("line {lineno}: expected exactly `i j k`"));
        }
        for v in [i, j, k] {
            if v >= nv {
                return Err(format!("line {lineno}: vertex index {v} out of range (V = {nv})"));
            }
        }
        let [a, b, c] = [nodes[i], nodes[j], nodes[k]];
        if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) <= 0.0 {
            return Err(format!("line {lineno}: nonpositive area"));
        }
        triangles.push([i, j, k]);
    }
    if let Some((idx, line)) = lines.next() {
        if !line.trim().is_empty() {
            return Err(format!("line {}: trailing content", idx + 1));
        }
    }
    Mesh::new(nodes, triangles, flags).map_err(|e| format!("invalid mesh: {e}"))
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<(), String> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", mesh.nodes.len(), mesh.triangles.len()));
    for (p, &b) in mesh.nodes.iter().zip(&mesh.boundary) {
        out.push_str(&format!("{} {} {}\n", num(p[0]), num(p[1]), b as u8));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
    }
    fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Write a per-triangle or per-node field as CSV `tri_or_node,x,y,value`;
/// triangles are located by centroid.
pub fn write_field_csv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = (usize, f64, f64, f64)>,
) -> Result<(), String> {
    let file = fs::File::create(path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    let inner = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for (i, x, y, v) in rows {
            writeln!(w, "{i},{},{},{}", num(x), num(y), num(v))?;
        }
        Ok(())
    };
    inner(&mut w).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Read a per-triangle density from CSV `tri_or_node,x,y,value`: one row per
/// triangle, indices 0..T in any order, coordinates ignored.
pub fn load_theta_csv(path: &Path, num_triangles: usize) -> Result<Vec<f64>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut values = vec![f64::NAN; num_triangles];
    let mut seen = vec![false; num_triangles];
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "tri_or_node,x,y,value" => {}
        Some((_, h)) => {
            return Err(format!("line 1: expected header `tri_or_node,x,y,value`, got `{h}`"))
        }
        None => return Err("line 1: empty file".into()),
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(format!("line {lineno}: expected 4 comma-separated fields"));
        }
        let t: usize = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("line {lineno}: bad triangle index `{}`", parts[0]))?;
        if t >= num_triangles {
            return Err(format!(
                "line {lineno}: triangle index {t} out of range (mesh has {num_triangles})"
            ));
        }
        if seen[t] {
            return Err(format!("line {lineno}: duplicate triangle index {t}"));
        }
        let v: f64 = parts[3]
            .trim()
            .parse()
            .map_err(|_| format!("line {lineno}: bad value `{}`", parts[3]))?;
        if !v.is_finite() || v < 0.0 {
            return Err(format!("line {lineno}: density must be finite and >= 0"));
        }
        seen[t] = true;
        values[t] = v;
    }
    if let Some(t) = seen.iter().position(|&s| !s) {
        return Err(format!("missing row for triangle {t}"));
    }
    Ok(values)
}

/// Coordinate-format sparse matrix dump: one `i j value` line per entry.
pub fn write_matrix(path: &Path, mat: &CsrMatrix) -> Result<(), String> {
    let file = fs::File::create(path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    for (i, j, v) in mat.triplets() {
        writeln!(w, "{i} {j} {}", num(v))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    lineno: usize,
    what: &str,
) -> Result<T, String> {
    let s = field.ok_or_else(|| format!("line {lineno}: missing {what}"))?;
    s.parse()
        .map_err(|_| format!("line {lineno}: bad {what} `{s}`"))
}
