//! Unstructured triangular meshes with boundary and region tags.
//!
//! A [`Mesh`] is immutable once built. Element geometry (area and the
//! constant gradients of the three P1 basis functions) is computed at
//! construction so assembly loops never recompute it.

mod gmsh;
mod io;
mod locate;
mod lshape;

use std::collections::HashMap;

pub use gmsh::{load_gmsh, parse_gmsh};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use locate::PointLocator;
pub use lshape::{classify_lshape_region, LShape};

/// Structured-mesh boundary tags.
pub const TAG_BOTTOM: i32 = 1;
pub const TAG_RIGHT: i32 = 2;
pub const TAG_TOP: i32 = 3;
pub const TAG_LEFT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("invalid mesh dimensions: {0}")]
    InvalidDimensions(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("node index {index} out of range (mesh has {count} nodes)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("element {0} is degenerate (zero area)")]
    DegenerateElement(usize),
    #[error("boundary facet ({0}, {1}) is not an edge of exactly one element")]
    FacetNotOnBoundary(usize, usize),
    #[error("edge ({0}, {1}) is shared by more than two elements")]
    NonManifoldEdge(usize, usize),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A tagged boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Facet {
    pub nodes: [usize; 2],
    pub tag: i32,
}

/// Per-element geometry: area and the gradients of the three barycentric
/// basis functions, which are constant over a P1 triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grad: [[f64; 2]; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    facets: Vec<Facet>,
    regions: Vec<i32>,
    geometry: Vec<ElementGeometry>,
}

/// Elements whose orientation was flipped while building a mesh.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeshReport {
    pub reoriented: Vec<usize>,
}

fn signed_double_area(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> f64 {
    (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ElementGeometry {
    fn new(p: [[f64; 2]; 3]) -> Self {
        let two_a = signed_double_area(p[0], p[1], p[2]);
        let inv = 1.0 / two_a;
        let grad = [
            [(p[1][1] - p[2][1]) * inv, (p[2][0] - p[1][0]) * inv],
            [(p[2][1] - p[0][1]) * inv, (p[0][0] - p[2][0]) * inv],
            [(p[0][1] - p[1][1]) * inv, (p[1][0] - p[0][0]) * inv],
        ];
        Self {
            area: 0.5 * two_a,
            grad,
        }
    }
}

impl Mesh {
    /// Builds a mesh, rejecting clockwise elements.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        facets: Vec<Facet>,
        regions: Vec<i32>,
    ) -> Result<Self, MeshError> {
        let (mesh, report) = Self::new_reoriented(nodes, elements, facets, regions)?;
        if let Some(&e) = report.reoriented.first() {
            return Err(MeshError::Invalid(format!(
                "element {e} is oriented clockwise"
            )));
        }
        Ok(mesh)
    }

    /// Builds a mesh, swapping two indices of every clockwise element.
    pub fn new_reoriented(
        nodes: Vec<[f64; 2]>,
        mut elements: Vec<[usize; 3]>,
        facets: Vec<Facet>,
        regions: Vec<i32>,
    ) -> Result<(Self, MeshReport), MeshError> {
        let n = nodes.len();
        if nodes.is_empty() || elements.is_empty() {
            return Err(MeshError::Invalid("mesh needs nodes and elements".into()));
        }
        if regions.len() != elements.len() {
            return Err(MeshError::Invalid(format!(
                "{} region tags for {} elements",
                regions.len(),
                elements.len()
            )));
        }
        if let Some(p) = nodes.iter().find(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(MeshError::Invalid(format!("non-finite node {p:?}")));
        }
        let check = |index: usize| {
            if index >= n {
                Err(MeshError::IndexOutOfRange { index, count: n })
            } else {
                Ok(())
            }
        };
        let mut report = MeshReport::default();
        let mut geometry = Vec::with_capacity(elements.len());
        for (e, tri) in elements.iter_mut().enumerate() {
            for &i in tri.iter() {
                check(i)?;
            }
            let p = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
            let two_a = signed_double_area(p[0], p[1], p[2]);
            if two_a == 0.0 || !two_a.is_finite() {
                return Err(MeshError::DegenerateElement(e));
            }
            if two_a < 0.0 {
                tri.swap(1, 2);
                report.reoriented.push(e);
            }
            geometry.push(ElementGeometry::new([
                nodes[tri[0]],
                nodes[tri[1]],
                nodes[tri[2]],
            ]));
        }

        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for tri in &elements {
            for k in 0..3 {
                *edges.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        if let Some((&(a, b), _)) = edges.iter().find(|(_, &c)| c > 2) {
            return Err(MeshError::NonManifoldEdge(a, b));
        }
        for f in &facets {
            check(f.nodes[0])?;
            check(f.nodes[1])?;
            if edges.get(&edge_key(f.nodes[0], f.nodes[1])) != Some(&1) {
                return Err(MeshError::FacetNotOnBoundary(f.nodes[0], f.nodes[1]));
            }
        }

        Ok((
            Self {
                nodes,
                elements,
                facets,
                regions,
                geometry,
            },
            report,
        ))
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn regions(&self) -> &[i32] {
        &self.regions
    }

    pub fn geometry(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let t = self.elements[e];
        let mut c = [0.0; 2];
        for &i in &t {
            c[0] += self.nodes[i][0] / 3.0;
            c[1] += self.nodes[i][1] / 3.0;
        }
        c
    }

    pub fn facet_length(&self, f: &Facet) -> f64 {
        let a = self.nodes[f.nodes[0]];
        let b = self.nodes[f.nodes[1]];
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn facet_midpoint(&self, f: &Facet) -> [f64; 2] {
        let a = self.nodes[f.nodes[0]];
        let b = self.nodes[f.nodes[1]];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Mesh size: the largest element diameter.
    pub fn h(&self) -> f64 {
        self.elements
            .iter()
            .map(|t| {
                (0..3)
                    .map(|k| {
                        let a = self.nodes[t[k]];
                        let b = self.nodes[t[(k + 1) % 3]];
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Axis-aligned bounding box `[xmin, zmin, xmax, zmax]`.
    pub fn bounds(&self) -> [f64; 4] {
        self.nodes.iter().fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |b, p| [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])],
        )
    }

    /// Element touching each boundary facet, with the facet's outward unit normal.
    pub fn facet_elements(&self) -> Vec<(usize, [f64; 2])> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, t) in self.elements.iter().enumerate() {
            for k in 0..3 {
                owner.insert(edge_key(t[k], t[(k + 1) % 3]), e);
            }
        }
        self.facets
            .iter()
            .map(|f| {
                let e = owner[&edge_key(f.nodes[0], f.nodes[1])];
                let a = self.nodes[f.nodes[0]];
                let b = self.nodes[f.nodes[1]];
                let len = self.facet_length(f);
                let mut n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                // orient away from the owning element's centroid
                let c = self.centroid(e);
                let m = self.facet_midpoint(f);
                if n[0] * (m[0] - c[0]) + n[1] * (m[1] - c[1]) < 0.0 {
                    n = [-n[0], -n[1]];
                }
                (e, n)
            })
            .collect()
    }

    /// Nodes lying on facets with the given tag, sorted and deduplicated.
    pub fn nodes_with_tag(&self, tag: i32) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .facets
            .iter()
            .filter(|f| f.tag == tag)
            .flat_map(|f| f.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn has_tag(&self, tag: i32) -> bool {
        self.facets.iter().any(|f| f.tag == tag)
    }

    /// Returns a copy with `new_tag` on every facet tagged `tag` whose
    /// midpoint satisfies `pred`.
    pub fn retag_facets(&self, tag: i32, new_tag: i32, pred: impl Fn([f64; 2]) -> bool) -> Mesh {
        let mut m = self.clone();
        for f in m.facets.iter_mut() {
            if f.tag == tag && pred(self.facet_midpoint(f)) {
                f.tag = new_tag;
            }
        }
        m
    }

    /// Returns a copy with each element's region set by `classify(centroid)`.
    pub fn with_regions(&self, classify: impl Fn([f64; 2]) -> i32) -> Mesh {
        let mut m = self.clone();
        for e in 0..m.elements.len() {
            m.regions[e] = classify(self.centroid(e));
        }
        m
    }

    /// Edge multiplicities: how many elements share each undirected edge.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), u32> {
        let mut edges = HashMap::new();
        for t in &self.elements {
            for k in 0..3 {
                *edges.entry(edge_key(t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        edges
    }
}

/// How each cell of a structured grid is split into two triangles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagonal {
    /// Bottom-left to top-right in every cell.
    #[default]
    Forward,
    /// Forward in the left half and mirrored in the right half, so the
    /// triangulation is symmetric about `x = lx/2` when `nx` is even.
    MirroredX,
}

/// Uniform `nx` × `nz` grid on `[0, lx] × [0, lz]`, each cell split along
/// its bottom-left to top-right diagonal. Facets are tagged bottom = 1,
/// right = 2, top = 3, left = 4; all regions are 0.
pub fn generate_structured(nx: usize, nz: usize, lx: f64, lz: f64) -> Result<Mesh, MeshError> {
    generate_structured_with(nx, nz, lx, lz, Diagonal::Forward)
}

pub fn generate_structured_with(
    nx: usize,
    nz: usize,
    lx: f64,
    lz: f64,
    diagonal: Diagonal,
) -> Result<Mesh, MeshError> {
    if nx < 1 || nz < 1 {
        return Err(MeshError::InvalidDimensions(format!(
            "nx = {nx}, nz = {nz} (both must be >= 1)"
        )));
    }
    if !(lx > 0.0 && lz > 0.0 && lx.is_finite() && lz.is_finite()) {
        return Err(MeshError::InvalidDimensions(format!(
            "lx = {lx}, lz = {lz} (both must be > 0)"
        )));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (nz + 1));
    for j in 0..=nz {
        for i in 0..=nx {
            nodes.push([lx * i as f64 / nx as f64, lz * j as f64 / nz as f64]);
        }
    }
    let mut elements = Vec::with_capacity(2 * nx * nz);
    for j in 0..nz {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if diagonal == Diagonal::MirroredX && 2 * i >= nx {
                elements.push([a, b, d]);
                elements.push([b, c, d]);
            } else {
                elements.push([a, b, c]);
                elements.push([a, c, d]);
            }
        }
    }
    let mut facets = Vec::with_capacity(2 * (nx + nz));
    for i in 0..nx {
        facets.push(Facet {
            nodes: [id(i, 0), id(i + 1, 0)],
            tag: TAG_BOTTOM,
        });
    }
    for j in 0..nz {
        facets.push(Facet {
            nodes: [id(nx, j), id(nx, j + 1)],
            tag: TAG_RIGHT,
        });
    }
    for i in (0..nx).rev() {
        facets.push(Facet {
            nodes: [id(i + 1, nz), id(i, nz)],
            tag: TAG_TOP,
        });
    }
    for j in (0..nz).rev() {
        facets.push(Facet {
            nodes: [id(0, j + 1), id(0, j)],
            tag: TAG_LEFT,
        });
    }
    let regions = vec![0; elements.len()];
    Mesh::new(nodes, elements, facets, regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_structured_mesh() {
        let m = generate_structured(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(m.num_nodes(), 4);
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.facets().len(), 4);
        assert!(m.regions().iter().all(|&r| r == 0));
    }

    #[test]
    fn mirrored_diagonal_is_symmetric() {
        let m = generate_structured_with(4, 3, 2.0, 1.5, Diagonal::MirroredX).unwrap();
        let key = |p: [f64; 2]| ((p[0] * 1e6).round() as i64, (p[1] * 1e6).round() as i64);
        let mut centroids: Vec<_> = (0..m.num_elements()).map(|e| key(m.centroid(e))).collect();
        let mut mirrored: Vec<_> = (0..m.num_elements())
            .map(|e| {
                let c = m.centroid(e);
                key([2.0 - c[0], c[1]])
            })
            .collect();
        centroids.sort_unstable();
        mirrored.sort_unstable();
        assert_eq!(centroids, mirrored);
        assert!((m.total_area() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn green_ampt_mesh_counts() {
        let m = generate_structured(12, 12, 15.24, 15.24).unwrap();
        assert_eq!(m.num_nodes(), 169);
        assert_eq!(m.num_elements(), 288);
    }

    #[test]
    fn area_sums_to_domain() {
        // independent oracle: shoelace formula on the raw coordinates
        let m = generate_structured(2, 1, 2.0, 1.0).unwrap();
        let total: f64 = m
            .elements()
            .iter()
            .map(|t| {
                let p: Vec<[f64; 2]> = t.iter().map(|&i| m.nodes()[i]).collect();
                0.5 * ((p[0][0] * p[1][1] - p[1][0] * p[0][1])
                    + (p[1][0] * p[2][1] - p[2][0] * p[1][1])
                    + (p[2][0] * p[0][1] - p[0][0] * p[2][1]))
            })
            .sum();
        assert!((total - 2.0).abs() < 1e-14);
        assert!((m.total_area() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_dimensions() {
        assert!(matches!(
            generate_structured(0, 3, 1.0, 1.0),
            Err(MeshError::InvalidDimensions(_))
        ));
        assert!(matches!(
            generate_structured(3, 3, -1.0, 1.0),
            Err(MeshError::InvalidDimensions(_))
        ));
    }

    #[test]
    fn edge_multiplicity() {
        let m = generate_structured(5, 4, 1.0, 2.0).unwrap();
        let counts = m.edge_counts();
        let boundary: Vec<_> = counts.iter().filter(|(_, &c)| c == 1).collect();
        assert_eq!(boundary.len(), m.facets().len());
        for f in m.facets() {
            assert_eq!(counts[&edge_key(f.nodes[0], f.nodes[1])], 1);
        }
        assert!(counts.values().all(|&c| c == 1 || c == 2));
    }

    #[test]
    fn outward_normals_on_unit_square() {
        let m = generate_structured(2, 2, 1.0, 1.0).unwrap();
        for (f, (_, n)) in m.facets().iter().zip(m.facet_elements()) {
            let expect = match f.tag {
                TAG_BOTTOM => [0.0, -1.0],
                TAG_RIGHT => [1.0, 0.0],
                TAG_TOP => [0.0, 1.0],
                _ => [-1.0, 0.0],
            };
            assert!((n[0] - expect[0]).abs() < 1e-14 && (n[1] - expect[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn mesh_size_is_diagonal() {
        let m = generate_structured(4, 4, 1.0, 1.0).unwrap();
        assert!((m.h() - 0.25 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_facet_inside_domain() {
        let m = generate_structured(2, 1, 2.0, 1.0).unwrap();
        // edge (1, 4) is the interior vertical edge
        let mut facets = m.facets().to_vec();
        facets.push(Facet { nodes: [1, 4], tag: 9 });
        let err = Mesh::new(
            m.nodes().to_vec(),
            m.elements().to_vec(),
            facets,
            m.regions().to_vec(),
        );
        assert!(matches!(err, Err(MeshError::FacetNotOnBoundary(1, 4))));
    }

    #[test]
    fn rejects_out_of_range_index() {
        let err = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 7]],
            vec![],
            vec![0],
        );
        assert!(matches!(err, Err(MeshError::IndexOutOfRange { index: 7, .. })));
    }

    #[test]
    fn retag_strip() {
        let m = generate_structured(10, 2, 1.0, 1.0).unwrap();
        let m = m.retag_facets(TAG_TOP, 5, |p| (p[0] - 0.5).abs() < 0.1);
        assert_eq!(m.facets().iter().filter(|f| f.tag == 5).count(), 2);
        assert_eq!(m.nodes_with_tag(5).len(), 3);
    }
}
