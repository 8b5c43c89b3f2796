//! Wavefront OBJ / MTL reading and writing.
//!
//! Polygons are fan-triangulated, negative (relative) indices are resolved at the
//! point of use, and normals are read for index validation only.

use std::fmt::Write as _;

use super::mesh::{Corner, IndexedMesh};
use super::AssetError;

pub fn parse_obj(text: &str) -> Result<IndexedMesh, AssetError> {
    let mut mesh = IndexedMesh::default();
    let mut normal_count = 0usize;
    let mut named = false;

    for (line_no, line) in logical_lines(text) {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => &line[..],
        };
        let mut tokens = line.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        let malformed = || AssetError::MalformedStatement { line: line_no };
        match keyword {
            "v" => {
                let xyz = parse_floats::<3>(&mut tokens).ok_or_else(malformed)?;
                mesh.positions.push(xyz);
            }
            "vt" => {
                let u = parse_float(tokens.next()).ok_or_else(malformed)?;
                let v = match tokens.next() {
                    Some(t) => parse_float(Some(t)).ok_or_else(malformed)?,
                    None => 0.0,
                };
                mesh.uvs.push([u, v]);
            }
            "vn" => {
                parse_floats::<3>(&mut tokens).ok_or_else(malformed)?;
                normal_count += 1;
            }
            "f" => {
                let mut corners = Vec::with_capacity(4);
                for tok in tokens {
                    corners.push(parse_corner(tok, &mesh, normal_count, line_no)?);
                }
                if corners.len() < 3 {
                    return Err(malformed());
                }
                for i in 1..corners.len() - 1 {
                    mesh.triangles.push([corners[0], corners[i], corners[i + 1]]);
                }
            }
            "o" | "g" => {
                if !named {
                    let name: Vec<&str> = tokens.collect();
                    if !name.is_empty() {
                        mesh.name = name.join(" ");
                        named = true;
                    }
                }
            }
            "usemtl" => {
                let name: Vec<&str> = tokens.collect();
                if name.is_empty() {
                    return Err(malformed());
                }
                mesh.material = Some(name.join(" "));
            }
            "mtllib" => {
                mesh.material_libraries.extend(tokens.map(str::to_owned));
            }
            // Smoothing groups, free-form and line/point elements carry nothing we render.
            "s" | "l" | "p" | "vp" => {}
            _ => return Err(malformed()),
        }
    }
    Ok(mesh)
}

/// Joins backslash-continued lines, yielding the 1-based number of the first physical line.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let raw = raw.trim_end_matches('\r');
        let (continued, body) = match raw.strip_suffix('\\') {
            Some(b) => (true, b),
            None => (false, raw),
        };
        let entry = pending.get_or_insert_with(|| (i + 1, String::new()));
        entry.1.push_str(body);
        entry.1.push(' ');
        if !continued {
            out.push(pending.take().unwrap());
        }
    }
    out.extend(pending);
    out
}

fn parse_float(tok: Option<&str>) -> Option<f64> {
    let v: f64 = tok?.parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_floats<'a, const N: usize>(tokens: &mut impl Iterator<Item = &'a str>) -> Option<[f64; N]> {
    let mut out = [0.0; N];
    for o in out.iter_mut() {
        *o = parse_float(tokens.next())?;
    }
    // Trailing values (w, vertex colors) are tolerated and ignored.
    Some(out)
}

fn resolve_index(tok: &str, count: usize, line: usize) -> Result<u32, AssetError> {
    let raw: i64 = tok
        .parse()
        .map_err(|_| AssetError::MalformedStatement { line })?;
    let resolved = match raw {
        0 => return Err(AssetError::MalformedStatement { line }),
        r if r > 0 => r - 1,
        r => count as i64 + r,
    };
    if resolved < 0 || resolved as usize >= count {
        return Err(AssetError::IndexOutOfRange { line });
    }
    Ok(resolved as u32)
}

fn parse_corner(
    tok: &str,
    mesh: &IndexedMesh,
    normal_count: usize,
    line: usize,
) -> Result<Corner, AssetError> {
    let mut parts = tok.split('/');
    let pos = parts
        .next()
        .filter(|s| !s.is_empty())
        .ok_or(AssetError::MalformedStatement { line })?;
    let position = resolve_index(pos, mesh.positions.len(), line)?;
    let uv = match parts.next() {
        None | Some("") => None,
        Some(t) => Some(resolve_index(t, mesh.uvs.len(), line)?),
    };
    match parts.next() {
        None | Some("") => {}
        Some(n) => {
            resolve_index(n, normal_count, line)?;
        }
    }
    if parts.next().is_some() {
        return Err(AssetError::MalformedStatement { line });
    }
    Ok(Corner { position, uv })
}

/// Writes the mesh as OBJ text. Every float uses the shortest representation that
/// parses back to the identical `f64`.
pub fn write_obj(mesh: &IndexedMesh) -> String {
    let mut out = String::with_capacity(32 * (mesh.positions.len() + mesh.triangles.len()) + 16);
    out.push_str("# meshqa\n");
    for lib in &mesh.material_libraries {
        let _ = writeln!(out, "mtllib {lib}");
    }
    if !mesh.name.is_empty() {
        let _ = writeln!(out, "o {}", mesh.name);
    }
    for p in &mesh.positions {
        let _ = writeln!(out, "v {:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    for t in &mesh.uvs {
        let _ = writeln!(out, "vt {:?} {:?}", t[0], t[1]);
    }
    if let Some(m) = &mesh.material {
        let _ = writeln!(out, "usemtl {m}");
    }
    for tri in &mesh.triangles {
        out.push('f');
        for c in tri {
            match c.uv {
                Some(u) => {
                    let _ = write!(out, " {}/{}", c.position + 1, u + 1);
                }
                None => {
                    let _ = write!(out, " {}", c.position + 1);
                }
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Material {
    pub name: String,
    pub diffuse_map: Option<String>,
}

/// Reads `newmtl` names and their `map_Kd` texture paths; other parameters are skipped.
pub fn parse_mtl(text: &str) -> Vec<Material> {
    let mut materials: Vec<Material> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut it = line.splitn(2, char::is_whitespace);
        match (it.next(), it.next()) {
            (Some("newmtl"), Some(name)) => materials.push(Material {
                name: name.trim().to_owned(),
                diffuse_map: None,
            }),
            (Some("map_Kd"), Some(rest)) => {
                if let Some(m) = materials.last_mut() {
                    // Options such as `-s 1 1 1` precede the file name.
                    let path = rest.split_whitespace().last().unwrap_or("").to_owned();
                    m.diffuse_map = Some(path);
                }
            }
            _ => {}
        }
    }
    materials
}
