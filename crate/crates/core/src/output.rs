//! File output: atomic writes, legacy VTK snapshots and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::mesh::Mesh;

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> io::Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Legacy ASCII VTK unstructured grid with nodal and cell fields.
pub fn vtk_string(
    mesh: &Mesh,
    title: &str,
    point_fields: &[(&str, &[f64])],
    cell_vectors: &[(&str, &[[f64; 2]])],
) -> String {
    let mut s = String::new();
    let n = mesh.num_nodes();
    let ne = mesh.num_elements();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:e} {:e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {ne} {}", 4 * ne);
    for t in mesh.elements() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "5");
    }
    if !point_fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {n}");
        for (name, v) in point_fields {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for x in v.iter() {
                let _ = writeln!(s, "{x:e}");
            }
        }
    }
    let _ = writeln!(s, "CELL_DATA {ne}");
    let _ = writeln!(s, "SCALARS region int 1\nLOOKUP_TABLE default");
    for r in mesh.regions() {
        let _ = writeln!(s, "{r}");
    }
    for (name, v) in cell_vectors {
        let _ = writeln!(s, "VECTORS {name} double");
        for q in v.iter() {
            let _ = writeln!(s, "{:e} {:e} 0", q[0], q[1]);
        }
    }
    s
}

pub fn write_vtk(
    path: impl AsRef<Path>,
    mesh: &Mesh,
    title: &str,
    point_fields: &[(&str, &[f64])],
    cell_vectors: &[(&str, &[[f64; 2]])],
) -> io::Result<()> {
    write_atomic(path, vtk_string(mesh, title, point_fields, cell_vectors).as_bytes())
}

/// Simple CSV table builder; values are written with full precision.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> io::Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}
