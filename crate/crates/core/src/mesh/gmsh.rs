//! Gmsh MSH 2.2 ASCII reader.
//!
//! Only 2-node lines (type 1) and 3-node triangles (type 2) are kept; the
//! first tag (physical group) becomes the facet tag or element region.
//! The z coordinate of each node is dropped and the y coordinate is used
//! as the vertical axis.

use std::collections::HashMap;
use std::path::Path;

use super::{Facet, Mesh, MeshError, MeshReport};

fn err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_gmsh(text: &str) -> Result<(Mesh, MeshReport), MeshError> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let mut i = 0;
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut elements = Vec::new();
    let mut regions = Vec::new();
    let mut facets = Vec::new();

    while i < lines.len() {
        match lines[i] {
            "$MeshFormat" => {
                let fmt = lines.get(i + 1).ok_or_else(|| err(i + 2, "missing format line"))?;
                let version = fmt.split_whitespace().next().unwrap_or("");
                if !version.starts_with("2.") {
                    return Err(err(i + 2, format!("unsupported MSH version {version}")));
                }
                if fmt.split_whitespace().nth(1) != Some("0") {
                    return Err(err(i + 2, "binary MSH files are not supported"));
                }
                i += 2;
            }
            "$Nodes" => {
                let count: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.parse().ok())
                    .ok_or_else(|| err(i + 2, "bad node count"))?;
                for k in 0..count {
                    let ln = i + 2 + k;
                    let l = lines.get(ln).ok_or_else(|| err(ln + 1, "unexpected end of $Nodes"))?;
                    let p: Vec<&str> = l.split_whitespace().collect();
                    if p.len() < 3 {
                        return Err(err(ln + 1, "node line needs id x y [z]"));
                    }
                    let id: u64 = p[0].parse().map_err(|_| err(ln + 1, "bad node id"))?;
                    let x: f64 = p[1].parse().map_err(|_| err(ln + 1, "bad x coordinate"))?;
                    let y: f64 = p[2].parse().map_err(|_| err(ln + 1, "bad y coordinate"))?;
                    ids.insert(id, nodes.len());
                    nodes.push([x, y]);
                }
                i += 2 + count;
            }
            "$Elements" => {
                let count: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.parse().ok())
                    .ok_or_else(|| err(i + 2, "bad element count"))?;
                for k in 0..count {
                    let ln = i + 2 + k;
                    let l = lines
                        .get(ln)
                        .ok_or_else(|| err(ln + 1, "unexpected end of $Elements"))?;
                    let p: Vec<i64> = l
                        .split_whitespace()
                        .map(|s| s.parse().map_err(|_| err(ln + 1, format!("bad field `{s}`"))))
                        .collect::<Result<_, _>>()?;
                    if p.len() < 3 {
                        return Err(err(ln + 1, "element line too short"));
                    }
                    let kind = p[1];
                    let ntags = p[2] as usize;
                    let tag = if ntags > 0 { *p.get(3).unwrap_or(&0) as i32 } else { 0 };
                    let conn = &p[(3 + ntags).min(p.len())..];
                    let node = |v: i64| {
                        ids.get(&(v as u64))
                            .copied()
                            .ok_or_else(|| err(ln + 1, format!("unknown node id {v}")))
                    };
                    match kind {
                        1 if conn.len() == 2 => facets.push(Facet {
                            nodes: [node(conn[0])?, node(conn[1])?],
                            tag,
                        }),
                        2 if conn.len() == 3 => {
                            elements.push([node(conn[0])?, node(conn[1])?, node(conn[2])?]);
                            regions.push(tag);
                        }
                        1 | 2 => return Err(err(ln + 1, "wrong number of element nodes")),
                        _ => {}
                    }
                }
                i += 2 + count;
            }
            _ => i += 1,
        }
    }
    Mesh::new_reoriented(nodes, elements, facets, regions)
}

pub fn load_gmsh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let (mesh, report) = parse_gmsh(&text)?;
    if !report.reoriented.is_empty() {
        log::warn!(
            "{}: {} clockwise triangles reoriented",
            path.as_ref().display(),
            report.reoriented.len()
        );
    }
    Ok(mesh)
}
