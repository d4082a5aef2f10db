//! Plain-text mesh format.
//!
//! ```text
//! nodes N elements M facets F
//! x z            (N lines)
//! n0 n1 n2 region (M lines)
//! n0 n1 tag       (F lines)
//! ```
//!
//! Indices are 0-based. Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;
use std::path::Path;

use super::{Facet, Mesh, MeshError, MeshReport};

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        msg: msg.into(),
    }
}

fn fields<T: std::str::FromStr>(
    line_no: usize,
    text: &str,
    count: usize,
    what: &str,
) -> Result<Vec<T>, MeshError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != count {
        return Err(parse_err(
            line_no,
            format!("expected {count} fields for {what}, found {}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| parse_err(line_no, format!("bad {what} field `{s}`")))
        })
        .collect()
}

/// Parses the text mesh format. Clockwise elements are reoriented and
/// listed in the returned report.
pub fn parse_mesh(text: &str) -> Result<(Mesh, MeshReport), MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 || h[0] != "nodes" || h[2] != "elements" || h[4] != "facets" {
        return Err(parse_err(
            hline,
            "header must read `nodes N elements M facets F`",
        ));
    }
    let count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(hline, format!("bad count `{s}`")))
    };
    let (n, m, f) = (count(h[1])?, count(h[3])?, count(h[5])?);

    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count(), format!("unexpected end of file reading {what}")))
    };

    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = next("nodes")?;
        let v: Vec<f64> = fields(ln, l, 2, "node")?;
        nodes.push([v[0], v[1]]);
    }
    let mut elements = Vec::with_capacity(m);
    let mut regions = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = next("elements")?;
        let v: Vec<i64> = fields(ln, l, 4, "element")?;
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = usize::try_from(v[k])
                .map_err(|_| parse_err(ln, format!("negative node index {}", v[k])))?;
            if tri[k] >= n {
                return Err(parse_err(ln, format!("node index {} out of range", tri[k])));
            }
        }
        elements.push(tri);
        regions.push(v[3] as i32);
    }
    let mut facets = Vec::with_capacity(f);
    for _ in 0..f {
        let (ln, l) = next("facets")?;
        let v: Vec<i64> = fields(ln, l, 3, "facet")?;
        let a = usize::try_from(v[0]).map_err(|_| parse_err(ln, "negative node index"))?;
        let b = usize::try_from(v[1]).map_err(|_| parse_err(ln, "negative node index"))?;
        if a >= n || b >= n {
            return Err(parse_err(ln, "facet node index out of range"));
        }
        facets.push(Facet {
            nodes: [a, b],
            tag: v[2] as i32,
        });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after facets"));
    }
    Mesh::new_reoriented(nodes, elements, facets, regions)
}

/// Reads a mesh file, logging a warning for each reoriented element.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let (mesh, report) = parse_mesh(&text)?;
    for e in &report.reoriented {
        log::warn!(
            "{}: element {e} was clockwise and has been reoriented",
            path.as_ref().display()
        );
    }
    Ok(mesh)
}

/// Serializes a mesh; coordinates use shortest round-trip formatting so a
/// reload is bitwise identical.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "nodes {} elements {} facets {}",
        mesh.num_nodes(),
        mesh.num_elements(),
        mesh.facets().len()
    );
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
    }
    for (t, r) in mesh.elements().iter().zip(mesh.regions()) {
        let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], r);
    }
    for f in mesh.facets() {
        let _ = writeln!(s, "{} {} {}", f.nodes[0], f.nodes[1], f.tag);
    }
    s
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    crate::output::write_atomic(path.as_ref(), write_mesh(mesh).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_structured;

    #[test]
    fn round_trip_minimal() {
        let m = generate_structured(1, 1, 1.0, 1.0).unwrap();
        let (back, report) = parse_mesh(&write_mesh(&m)).unwrap();
        assert!(report.reoriented.is_empty());
        assert_eq!(back, m);
    }

    #[test]
    fn clockwise_triangle_is_fixed() {
        let text = "nodes 3 elements 1 facets 0\n0 0\n1 0\n0 1\n0 2 1 7\n";
        let (m, report) = parse_mesh(text).unwrap();
        assert_eq!(report.reoriented, vec![0]);
        assert!(m.geometry()[0].area > 0.0);
        assert_eq!(m.regions(), &[7]);
    }

    #[test]
    fn malformed_node_line_names_line() {
        let text = "nodes 3 elements 1 facets 0\n0 0\n1 zero\n0 1\n0 1 2 0\n";
        match parse_mesh(text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_header() {
        assert!(matches!(
            parse_mesh("vertices 3\n"),
            Err(MeshError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn truncated_file() {
        let text = "nodes 3 elements 1 facets 0\n0 0\n1 0\n";
        assert!(matches!(parse_mesh(text), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mesh");
        let m = generate_structured(3, 2, 1.7, 0.3).unwrap();
        save_mesh(&m, &path).unwrap();
        assert_eq!(load_mesh(&path).unwrap(), m);
    }
}
