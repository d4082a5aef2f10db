//! Advection–dispersion of a passive solute, driven by precomputed flow
//! levels:
//! `∂(θc)/∂t − ∇·(θD∇c − qc) = 0`.

use std::fmt;

use crate::constitutive::{dispersion_tensor, ConstitutiveError, DispersionParams, Tensor2};
use crate::fem::{
    apply_dirichlet, Assembler, CsrMatrix, DirichletError, ElementCoeff, LinearSolver, SolverError, SolverWorkspace,
};
use crate::flow::{BoundaryFn, FlowState};
use crate::mesh::Mesh;
use crate::scheme::{bdf1_weights, scheme_weights, SchemeSpec, SchemeWeights};

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("boundary tag {0} does not occur in the mesh")]
    UnknownTag(i32),
    #[error("dispersion at t = {time}: {source}")]
    Domain { time: f64, source: ConstitutiveError },
    #[error("linear solve failed at t = {time}: {source}")]
    Solver { time: f64, source: SolverError },
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error("{got} values for {expected} unknowns")]
    Length { expected: usize, got: usize },
}

/// Solute boundary condition on one facet tag.
#[derive(Clone)]
pub enum SoluteBc {
    Concentration(BoundaryFn),
    NoFlux,
    /// Prescribed total solute inflow `q_in c_in`. Without an explicit
    /// water rate the inflow is the computed Darcy flux through the facet.
    Inflow {
        water_rate: Option<f64>,
        concentration: BoundaryFn,
    },
    /// Zero dispersive flux; solute leaves with the outflowing water.
    FreeOutflow,
}

impl fmt::Debug for SoluteBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SoluteBc::Concentration(_) => write!(f, "Concentration(..)"),
            SoluteBc::NoFlux => write!(f, "NoFlux"),
            SoluteBc::Inflow { water_rate, .. } => write!(f, "Inflow {{ water_rate: {water_rate:?}, .. }}"),
            SoluteBc::FreeOutflow => write!(f, "FreeOutflow"),
        }
    }
}

/// Solute boundary conditions by tag; unlisted tags are no-flux.
#[derive(Clone, Debug, Default)]
pub struct SoluteBoundary {
    pub by_tag: Vec<(i32, SoluteBc)>,
}

impl SoluteBoundary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: i32, bc: SoluteBc) -> Self {
        self.by_tag.push((tag, bc));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportState {
    pub c: Vec<f64>,
    /// Water content paired with `c` (the flow level at the same time).
    pub theta: Vec<f64>,
    pub time: f64,
}

struct Inflow {
    facet: usize,
    water_rate: Option<f64>,
    concentration: BoundaryFn,
}

pub struct TransportSolver<'m> {
    asm: Assembler<'m>,
    theta_s: Vec<f64>,
    dispersion: DispersionParams,
    dirichlet: Vec<(usize, BoundaryFn)>,
    inflow: Vec<Inflow>,
    outflow: Vec<usize>,
    facet_geom: Vec<(usize, [f64; 2])>,
    solver: SolverWorkspace,
    linear_solves: usize,
}

/// `Σ_κ |κ|/3 θ_i` per node.
fn theta_mass(asm: &Assembler<'_>, theta: &[f64]) -> Vec<f64> {
    asm.lumped_mass(theta)
}

impl<'m> TransportSolver<'m> {
    /// `theta_s` holds the saturated water content of each element.
    pub fn new(
        mesh: &'m Mesh,
        theta_s: Vec<f64>,
        dispersion: DispersionParams,
        bcs: &SoluteBoundary,
        solver: LinearSolver,
        axisymmetric: bool,
    ) -> Result<Self, TransportError> {
        if theta_s.len() != mesh.num_elements() {
            return Err(TransportError::Length {
                expected: mesh.num_elements(),
                got: theta_s.len(),
            });
        }
        let mut dirichlet = Vec::new();
        let mut fixed = vec![false; mesh.num_nodes()];
        let mut inflow = Vec::new();
        let mut outflow = Vec::new();
        for (tag, bc) in &bcs.by_tag {
            if !mesh.has_tag(*tag) {
                return Err(TransportError::UnknownTag(*tag));
            }
            let facets = mesh.facets().iter().enumerate().filter(|(_, f)| f.tag == *tag).map(|(i, _)| i);
            match bc {
                SoluteBc::Concentration(f) => {
                    for i in mesh.nodes_with_tag(*tag) {
                        if !fixed[i] {
                            fixed[i] = true;
                            dirichlet.push((i, f.clone()));
                        }
                    }
                }
                SoluteBc::NoFlux => {}
                SoluteBc::Inflow {
                    water_rate,
                    concentration,
                } => inflow.extend(facets.map(|facet| Inflow {
                    facet,
                    water_rate: *water_rate,
                    concentration: concentration.clone(),
                })),
                SoluteBc::FreeOutflow => outflow.extend(facets),
            }
        }
        dirichlet.sort_by_key(|(i, _)| *i);
        let asm = if axisymmetric {
            Assembler::axisymmetric(mesh)
        } else {
            Assembler::new(mesh)
        };
        Ok(Self {
            asm,
            theta_s,
            dispersion,
            dirichlet,
            inflow,
            outflow,
            facet_geom: mesh.facet_elements(),
            solver: SolverWorkspace::new(solver),
            linear_solves: 0,
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.asm.mesh()
    }

    pub fn linear_solves(&self) -> usize {
        self.linear_solves
    }

    pub fn initial_state(&self, c0: impl Fn([f64; 2]) -> f64, flow: &FlowState) -> TransportState {
        TransportState {
            c: self.mesh().nodes().iter().map(|&p| c0(p)).collect(),
            theta: flow.theta.clone(),
            time: flow.time,
        }
    }

    fn element_theta(&self, theta: &[f64]) -> Vec<f64> {
        self.mesh()
            .elements()
            .iter()
            .map(|t| (theta[t[0]] + theta[t[1]] + theta[t[2]]) / 3.0)
            .collect()
    }

    /// `θD` per element at a flow level.
    pub fn dispersion_coefficients(&self, flow: &FlowState) -> Result<Vec<Tensor2>, TransportError> {
        let th = self.element_theta(&flow.theta);
        th.iter()
            .zip(&flow.q)
            .zip(&self.theta_s)
            .map(|((&t, &q), &ts)| {
                let d = dispersion_tensor(&self.dispersion, t, ts, q).map_err(|source| TransportError::Domain {
                    time: flow.time,
                    source,
                })?;
                Ok([[t * d[0][0], t * d[0][1]], [t * d[1][0], t * d[1][1]]])
            })
            .collect()
    }

    /// Spatial operator `A(θD) + B(q) + outflow` and inflow load at a level.
    fn operator(&self, flow: &FlowState) -> Result<(CsrMatrix, Vec<f64>), TransportError> {
        let td = self.dispersion_coefficients(flow)?;
        let mut t = self.asm.stiffness(ElementCoeff::Tensor(&td));
        self.asm.add_advection(&mut t, 1.0, &flow.q);
        if !self.outflow.is_empty() {
            self.asm.add_facet_mass(&mut t, 1.0, &self.outflow, |f| {
                let (e, n) = self.facet_geom[f];
                (flow.q[e][0] * n[0] + flow.q[e][1] * n[1]).max(0.0)
            });
        }
        let mut load = vec![0.0; flow.theta.len()];
        if !self.inflow.is_empty() {
            let mesh = self.mesh();
            let facets: Vec<usize> = self.inflow.iter().map(|i| i.facet).collect();
            let flux = |fi: usize| {
                let bc = self.inflow.iter().find(|i| i.facet == fi).expect("inflow facet");
                let (e, n) = self.facet_geom[fi];
                let rate = bc
                    .water_rate
                    .unwrap_or_else(|| (-(flow.q[e][0] * n[0] + flow.q[e][1] * n[1])).max(0.0));
                rate * (bc.concentration)(mesh.facet_midpoint(&mesh.facets()[fi]), flow.time)
            };
            load = self.asm.facet_load_const(&facets, flux);
        }
        Ok((t, load))
    }

    fn solve(&mut self, mut a: CsrMatrix, mut b: Vec<f64>, t: f64) -> Result<Vec<f64>, TransportError> {
        let nodes = self.mesh().nodes();
        let (idx, vals): (Vec<usize>, Vec<f64>) = self.dirichlet.iter().map(|(i, f)| (*i, f(nodes[*i], t))).unzip();
        apply_dirichlet(&mut a, &mut b, &idx, &vals)?;
        self.linear_solves += 1;
        self.solver
            .solve(&a, &b, None)
            .map_err(|source| TransportError::Solver { time: t, source })
    }

    /// Advances the concentration to the time of `flow[0]`, given flow
    /// levels `[n+1, n, n−1]` and concentration levels `[n, n−1]`.
    /// Without the `n−1` levels the step is backward Euler.
    pub fn step(
        &mut self,
        scheme: SchemeSpec,
        flow: [Option<&FlowState>; 3],
        current: &TransportState,
        previous: Option<&TransportState>,
    ) -> Result<TransportState, TransportError> {
        let new = flow[0].expect("new flow level");
        let cur_flow = flow[1].expect("current flow level");
        let dt = new.time - cur_flow.time;
        match (scheme, flow[2], previous) {
            (SchemeSpec::Silf2 { nu }, Some(prev_flow), Some(prev)) => {
                self.silf2(nu, new, cur_flow, current, prev_flow, prev, dt)
            }
            (SchemeSpec::TwoStep { delta, mu }, Some(prev_flow), Some(prev)) => {
                self.two_step(scheme_weights(delta, mu), new, [(cur_flow, current), (prev_flow, prev)], dt)
            }
            _ => self.two_step(bdf1_weights(), new, [(cur_flow, current), (cur_flow, current)], dt),
        }
    }

    fn two_step(
        &mut self,
        w: SchemeWeights,
        new: &FlowState,
        hist: [(&FlowState, &TransportState); 2],
        dt: f64,
    ) -> Result<TransportState, TransportError> {
        let n = new.theta.len();
        let mut rhs = vec![0.0; n];
        for (k, (flow, state)) in hist.iter().enumerate() {
            let (a, b) = (w.lhs[k + 1], w.rhs[k + 1]);
            if a != 0.0 {
                let m = theta_mass(&self.asm, &flow.theta);
                for i in 0..n {
                    rhs[i] -= a / dt * m[i] * state.c[i];
                }
            }
            if b != 0.0 {
                let (t, load) = self.operator(flow)?;
                let tc = t.mul_vec(&state.c);
                for i in 0..n {
                    rhs[i] += b * (load[i] - tc[i]);
                }
            }
        }
        let (mut mat, load) = self.operator(new)?;
        mat.scale(w.rhs[0]);
        let m = theta_mass(&self.asm, &new.theta);
        let diag: Vec<f64> = m.iter().map(|m| w.lhs[0] / dt * m).collect();
        mat.add_diagonal(&diag);
        for i in 0..n {
            rhs[i] += w.rhs[0] * load[i];
        }
        let c = self.solve(mat, rhs, new.time)?;
        Ok(TransportState {
            c,
            theta: new.theta.clone(),
            time: new.time,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn silf2(
        &mut self,
        nu: f64,
        new: &FlowState,
        cur_flow: &FlowState,
        current: &TransportState,
        prev_flow: &FlowState,
        previous: &TransportState,
        dt: f64,
    ) -> Result<TransportState, TransportError> {
        let (t, load) = self.operator(cur_flow)?;
        let mix: Vec<f64> = current
            .c
            .iter()
            .zip(&previous.c)
            .map(|(c, p)| (1.0 - 2.0 * nu) * c + nu * p)
            .collect();
        let tmix = t.mul_vec(&mix);
        let m_old = theta_mass(&self.asm, &prev_flow.theta);
        let m_new = theta_mass(&self.asm, &new.theta);
        let rhs: Vec<f64> = (0..m_new.len())
            .map(|i| m_old[i] * previous.c[i] / (2.0 * dt) - tmix[i] + load[i])
            .collect();
        let mut mat = t;
        mat.scale(nu);
        let diag: Vec<f64> = m_new.iter().map(|m| m / (2.0 * dt)).collect();
        mat.add_diagonal(&diag);
        let c = self.solve(mat, rhs, new.time)?;
        Ok(TransportState {
            c,
            theta: new.theta.clone(),
            time: new.time,
        })
    }

    /// Largest element Péclet number `|q| h / (2 ‖θD‖)`.
    pub fn max_peclet(&self, flow: &FlowState) -> Result<f64, TransportError> {
        let td = self.dispersion_coefficients(flow)?;
        let mesh = self.mesh();
        let nodes = mesh.nodes();
        let mut worst = 0.0f64;
        for (e, t) in mesh.elements().iter().enumerate() {
            let q = flow.q[e];
            let speed = q[0].hypot(q[1]);
            if speed == 0.0 {
                continue;
            }
            let h = (0..3)
                .map(|k| {
                    let (a, b) = (nodes[t[k]], nodes[t[(k + 1) % 3]]);
                    (a[0] - b[0]).hypot(a[1] - b[1])
                })
                .fold(0.0, f64::max);
            let d = td[e];
            let tr = 0.5 * (d[0][0] + d[1][1]);
            let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
            let lmax = tr + (tr * tr - det).max(0.0).sqrt();
            let pe = if lmax > 0.0 { speed * h / (2.0 * lmax) } else { f64::INFINITY };
            worst = worst.max(pe);
        }
        Ok(worst)
    }
}
