use std::sync::Arc;

use super::sparse::{CsrMatrix, Pattern};
use crate::constitutive::Tensor2;
use crate::mesh::Mesh;

/// Element-wise coefficient of the stiffness operator.
#[derive(Clone, Copy, Debug)]
pub enum ElementCoeff<'a> {
    Scalar(&'a [f64]),
    Tensor(&'a [Tensor2]),
}

/// P1 assembly on a fixed mesh. Every global matrix shares one sparsity
/// pattern, and each element's nine entries map to precomputed value slots.
/// Elements are always visited in index order, so results are bitwise
/// reproducible.
pub struct Assembler<'m> {
    mesh: &'m Mesh,
    pattern: Arc<Pattern>,
    slots: Vec<[usize; 9]>,
    weights: Vec<f64>,
    facet_weights: Vec<f64>,
}

impl<'m> Assembler<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        Self::with_weights(
            mesh,
            vec![1.0; mesh.num_elements()],
            vec![1.0; mesh.facets().len()],
        )
    }

    /// Axisymmetric variant: every element integral is scaled by the
    /// element's centroid radius and every facet integral by the facet
    /// midpoint radius (`x` is the radial coordinate).
    pub fn axisymmetric(mesh: &'m Mesh) -> Self {
        let w = (0..mesh.num_elements()).map(|e| mesh.centroid(e)[0]).collect();
        let fw = mesh.facets().iter().map(|f| mesh.facet_midpoint(f)[0]).collect();
        Self::with_weights(mesh, w, fw)
    }

    fn with_weights(mesh: &'m Mesh, weights: Vec<f64>, facet_weights: Vec<f64>) -> Self {
        let pattern = Arc::new(Pattern::from_mesh(mesh));
        let slots = mesh
            .elements()
            .iter()
            .map(|t| {
                let mut s = [0; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        s[3 * a + b] = pattern.find(t[a], t[b]).expect("element entry in pattern");
                    }
                }
                s
            })
            .collect();
        Self {
            mesh,
            pattern,
            slots,
            weights,
            facet_weights,
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn zeros(&self) -> CsrMatrix {
        CsrMatrix::zeros(self.pattern.clone())
    }

    /// Integration weight of element `e` (1, or the radius when axisymmetric).
    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// Row-sum lumped mass with a nodal coefficient: `M_ii = Σ |κ|/3 · c_i`.
    pub fn lumped_mass(&self, coeff: &[f64]) -> Vec<f64> {
        self.lumped_mass_with(|_, i| coeff[i])
    }

    /// Lumped mass whose nodal coefficient may depend on the element, for
    /// material properties that jump across region interfaces.
    pub fn lumped_mass_with(&self, coeff: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let mut m = vec![0.0; self.mesh.num_nodes()];
        for (e, (t, g)) in self.mesh.elements().iter().zip(self.mesh.geometry()).enumerate() {
            let w = self.weights[e] * g.area / 3.0;
            for &i in t {
                m[i] += w * coeff(e, i);
            }
        }
        m
    }

    /// `A_ij = Σ_κ ∇φ_j · c_κ ∇φ_i |κ|`.
    pub fn stiffness(&self, coeff: ElementCoeff<'_>) -> CsrMatrix {
        let mut a = self.zeros();
        self.add_stiffness(&mut a, 1.0, coeff);
        a
    }

    pub fn add_stiffness(&self, a: &mut CsrMatrix, scale: f64, coeff: ElementCoeff<'_>) {
        let vals = a.values_mut();
        for (e, g) in self.mesh.geometry().iter().enumerate() {
            let d: Tensor2 = match coeff {
                ElementCoeff::Scalar(c) => [[c[e], 0.0], [0.0, c[e]]],
                ElementCoeff::Tensor(t) => t[e],
            };
            let w = scale * self.weights[e] * g.area;
            for i in 0..3 {
                let gi = g.grad[i];
                let dgi = [
                    d[0][0] * gi[0] + d[0][1] * gi[1],
                    d[1][0] * gi[0] + d[1][1] * gi[1],
                ];
                for j in 0..3 {
                    let gj = g.grad[j];
                    vals[self.slots[e][3 * i + j]] += w * (dgi[0] * gj[0] + dgi[1] * gj[1]);
                }
            }
        }
    }

    /// Gravity load `g_i = Σ_κ K_κ ∂φ_i/∂z |κ|`.
    pub fn gravity(&self, k: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.mesh.num_nodes()];
        for (e, (t, geo)) in self.mesh.elements().iter().zip(self.mesh.geometry()).enumerate() {
            let w = self.weights[e] * geo.area * k[e];
            for a in 0..3 {
                g[t[a]] += w * geo.grad[a][1];
            }
        }
        g
    }

    /// Advection operator for the weak term `-∫ c q·∇v`:
    /// `B_ij = -Σ_κ (q_κ·∇φ_i) |κ| / 3`.
    pub fn advection(&self, q: &[[f64; 2]]) -> CsrMatrix {
        let mut b = self.zeros();
        self.add_advection(&mut b, 1.0, q);
        b
    }

    pub fn add_advection(&self, b: &mut CsrMatrix, scale: f64, q: &[[f64; 2]]) {
        let vals = b.values_mut();
        for (e, g) in self.mesh.geometry().iter().enumerate() {
            let w = scale * self.weights[e] * g.area / 3.0;
            for i in 0..3 {
                let qg = q[e][0] * g.grad[i][0] + q[e][1] * g.grad[i][1];
                for j in 0..3 {
                    vals[self.slots[e][3 * i + j]] -= w * qg;
                }
            }
        }
    }

    /// `∫_Γ f v ds` over the selected facets, with `f` linear along each
    /// facet and given by its nodal values.
    pub fn facet_load(&self, facets: &[usize], nodal: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut r = vec![0.0; self.mesh.num_nodes()];
        for &fi in facets {
            let f = &self.mesh.facets()[fi];
            let len = self.mesh.facet_length(f) * self.facet_weights[fi];
            let (a, b) = (f.nodes[0], f.nodes[1]);
            let (fa, fb) = (nodal(a), nodal(b));
            r[a] += len * (2.0 * fa + fb) / 6.0;
            r[b] += len * (fa + 2.0 * fb) / 6.0;
        }
        r
    }

    /// `∫_Γ f v ds` with `f` constant on each selected facet.
    pub fn facet_load_const(&self, facets: &[usize], value: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut r = vec![0.0; self.mesh.num_nodes()];
        for &fi in facets {
            let f = &self.mesh.facets()[fi];
            let half = 0.5 * value(fi) * self.mesh.facet_length(f) * self.facet_weights[fi];
            r[f.nodes[0]] += half;
            r[f.nodes[1]] += half;
        }
        r
    }

    /// Adds `scale · coeff_f ∫_f u v ds` for each selected facet, with
    /// `coeff` constant per facet.
    pub fn add_facet_mass(
        &self,
        a: &mut CsrMatrix,
        scale: f64,
        facets: &[usize],
        coeff: impl Fn(usize) -> f64,
    ) {
        for &fi in facets {
            let f = &self.mesh.facets()[fi];
            let w = scale * coeff(fi) * self.mesh.facet_length(f) * self.facet_weights[fi] / 6.0;
            let (p, q) = (f.nodes[0], f.nodes[1]);
            a.add(p, p, 2.0 * w);
            a.add(q, q, 2.0 * w);
            a.add(p, q, w);
            a.add(q, p, w);
        }
    }
}

pub fn assemble_lumped_mass(mesh: &Mesh, coeff: &[f64]) -> Vec<f64> {
    Assembler::new(mesh).lumped_mass(coeff)
}

pub fn assemble_stiffness(mesh: &Mesh, coeff: ElementCoeff<'_>) -> CsrMatrix {
    Assembler::new(mesh).stiffness(coeff)
}

pub fn assemble_gravity(mesh: &Mesh, k: &[f64]) -> Vec<f64> {
    Assembler::new(mesh).gravity(k)
}

pub fn assemble_advection(mesh: &Mesh, q: &[[f64; 2]]) -> CsrMatrix {
    Assembler::new(mesh).advection(q)
}
