use super::Mesh;

/// Point-in-triangle lookup accelerated by a uniform grid of element
/// bounding boxes.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

const TOL: f64 = 1e-10;

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let b = mesh.bounds();
        let side = (mesh.num_elements() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell = [
            ((b[2] - b[0]) / side as f64).max(f64::MIN_POSITIVE),
            ((b[3] - b[1]) / side as f64).max(f64::MIN_POSITIVE),
        ];
        let mut loc = Self {
            mesh,
            origin: [b[0], b[1]],
            cell,
            dims,
            buckets: vec![Vec::new(); side * side],
        };
        for (e, t) in mesh.elements().iter().enumerate() {
            let p: Vec<[f64; 2]> = t.iter().map(|&i| mesh.nodes()[i]).collect();
            let lo = [
                p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min),
                p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min),
            ];
            let hi = [
                p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max),
                p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max),
            ];
            let (i0, j0) = loc.cell_of(lo);
            let (i1, j1) = loc.cell_of(hi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * dims[0] + i].push(e);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let f = |k: usize| {
            let v = ((p[k] - self.origin[k]) / self.cell[k]).floor();
            (v.max(0.0) as usize).min(self.dims[k] - 1)
        };
        (f(0), f(1))
    }

    /// Element containing `p` and the barycentric coordinates of `p` in it.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.cell_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &e in &self.buckets[j * self.dims[0] + i] {
            let l = self.barycentric(e, p);
            let worst = l.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= -TOL {
                return Some((e, l));
            }
            if best.is_none_or(|b| worst > b.2) {
                best = Some((e, l, worst));
            }
        }
        // points marginally outside a curved or rounded boundary
        best.filter(|b| b.2 > -1e-6).map(|b| (b.0, b.1))
    }

    pub fn barycentric(&self, e: usize, p: [f64; 2]) -> [f64; 3] {
        let t = self.mesh.elements()[e];
        let g = &self.mesh.geometry()[e];
        let x0 = self.mesh.nodes()[t[0]];
        let d = [p[0] - x0[0], p[1] - x0[1]];
        let l1 = g.grad[1][0] * d[0] + g.grad[1][1] * d[1];
        let l2 = g.grad[2][0] * d[0] + g.grad[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    /// Interpolates a nodal field at `p`; `None` outside the mesh.
    pub fn interpolate(&self, values: &[f64], p: [f64; 2]) -> Option<f64> {
        let (e, l) = self.locate(p)?;
        let t = self.mesh.elements()[e];
        Some(l[0] * values[t[0]] + l[1] * values[t[1]] + l[2] * values[t[2]])
    }
}
