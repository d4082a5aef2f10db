//! P1 finite elements on triangles: assembly, Dirichlet constraints and
//! sparse linear solves.

mod assembly;
mod iterative;
mod lu;
mod sparse;

pub use assembly::{
    assemble_advection, assemble_gravity, assemble_lumped_mass, assemble_stiffness, Assembler,
    ElementCoeff,
};
pub use iterative::{bicgstab, Ilu0};
pub use lu::{rcm_ordering, relative_residual, solve_direct, solve_direct_ordered, BandLu, RESIDUAL_TOL};
pub use sparse::{CsrMatrix, Pattern};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SolverError {
    #[error("matrix is singular: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },
    #[error("non-finite entry in linear system")]
    NonFinite,
    #[error("dimension mismatch: matrix {matrix}, rhs {rhs}")]
    Dimension { matrix: usize, rhs: usize },
    #[error("solution residual {residual:e} above tolerance")]
    Inaccurate { residual: f64 },
    #[error("BiCGStab breakdown after {iterations} iterations")]
    Breakdown { iterations: usize },
    #[error("BiCGStab did not converge in {iterations} iterations")]
    NotConverged { iterations: usize },
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DirichletError {
    #[error("node {node} constrained to both {first} and {second}")]
    Conflict { node: usize, first: f64, second: f64 },
    #[error("constrained node {node} out of range ({n} unknowns)")]
    OutOfRange { node: usize, n: usize },
    #[error("{nodes} nodes but {values} values")]
    Length { nodes: usize, values: usize },
}

/// Linear solver choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LinearSolver {
    #[default]
    Direct,
    /// ILU(0)-preconditioned BiCGStab.
    #[serde(rename = "bicgstab")]
    BiCgStab { tol: f64, max_iter: usize },
}

impl LinearSolver {
    pub fn solve(&self, a: &CsrMatrix, b: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>, SolverError> {
        match *self {
            LinearSolver::Direct => solve_direct(a, b),
            LinearSolver::BiCgStab { tol, max_iter } => bicgstab(a, b, guess, tol, max_iter),
        }
    }
}

/// A [`LinearSolver`] that remembers the direct solver's fill-reducing
/// ordering across systems sharing one sparsity pattern.
#[derive(Clone, Debug)]
pub struct SolverWorkspace {
    kind: LinearSolver,
    ordering: Option<Vec<usize>>,
}

impl SolverWorkspace {
    pub fn new(kind: LinearSolver) -> Self {
        Self { kind, ordering: None }
    }

    pub fn kind(&self) -> LinearSolver {
        self.kind
    }

    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>, SolverError> {
        match self.kind {
            LinearSolver::Direct => {
                let perm = match &self.ordering {
                    Some(p) if p.len() == a.n() => p.clone(),
                    _ => {
                        let p = rcm_ordering(a);
                        self.ordering = Some(p.clone());
                        p
                    }
                };
                solve_direct_ordered(a, b, perm)
            }
            LinearSolver::BiCgStab { .. } => self.kind.solve(a, b, guess),
        }
    }
}

/// Direct sparse solve with partial pivoting; handles nonsymmetric systems.
pub fn solve_sparse(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    solve_direct(a, b)
}

fn merge_constraints(
    n: usize,
    nodes: &[usize],
    values: &[f64],
) -> Result<Vec<Option<f64>>, DirichletError> {
    if nodes.len() != values.len() {
        return Err(DirichletError::Length {
            nodes: nodes.len(),
            values: values.len(),
        });
    }
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for (&i, &v) in nodes.iter().zip(values) {
        if i >= n {
            return Err(DirichletError::OutOfRange { node: i, n });
        }
        match fixed[i] {
            Some(prev) if (prev - v).abs() > 1e-12 * (1.0 + prev.abs()) => {
                return Err(DirichletError::Conflict {
                    node: i,
                    first: prev,
                    second: v,
                })
            }
            _ => fixed[i] = Some(v),
        }
    }
    Ok(fixed)
}

/// Replaces each constrained row by an identity row with the prescribed
/// value on the right-hand side.
pub fn apply_dirichlet(
    a: &mut CsrMatrix,
    b: &mut [f64],
    nodes: &[usize],
    values: &[f64],
) -> Result<(), DirichletError> {
    let fixed = merge_constraints(a.n(), nodes, values)?;
    let pattern = a.pattern().clone();
    let vals = a.values_mut();
    for (i, v) in fixed.iter().enumerate() {
        if let Some(v) = *v {
            for k in pattern.row_ptr[i]..pattern.row_ptr[i + 1] {
                vals[k] = if pattern.col_idx[k] == i { 1.0 } else { 0.0 };
            }
            b[i] = v;
        }
    }
    Ok(())
}

/// Row replacement plus column elimination, which keeps a symmetric
/// matrix symmetric.
pub fn apply_dirichlet_symmetric(
    a: &mut CsrMatrix,
    b: &mut [f64],
    nodes: &[usize],
    values: &[f64],
) -> Result<(), DirichletError> {
    let fixed = merge_constraints(a.n(), nodes, values)?;
    let pattern = a.pattern().clone();
    let vals = a.values_mut();
    for i in 0..pattern.n {
        if fixed[i].is_some() {
            continue;
        }
        for k in pattern.row_ptr[i]..pattern.row_ptr[i + 1] {
            if let Some(v) = fixed[pattern.col_idx[k]] {
                b[i] -= vals[k] * v;
                vals[k] = 0.0;
            }
        }
    }
    apply_dirichlet(a, b, nodes, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, Mesh};

    #[test]
    fn constrain_everything() {
        let m = generate_structured(3, 3, 1.0, 1.0).unwrap();
        let mut a = assemble_stiffness(&m, ElementCoeff::Scalar(&vec![1.0; m.num_elements()]));
        let mut b = vec![0.0; m.num_nodes()];
        let nodes: Vec<usize> = (0..m.num_nodes()).collect();
        apply_dirichlet(&mut a, &mut b, &nodes, &vec![5.0; nodes.len()]).unwrap();
        let x = solve_sparse(&a, &b).unwrap();
        assert!(x.iter().all(|&v| (v - 5.0).abs() < 1e-14));
    }

    #[test]
    fn empty_constraint_set() {
        let mut a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let before = a.clone();
        let mut b = vec![1.0, 2.0];
        apply_dirichlet(&mut a, &mut b, &[], &[]).unwrap();
        assert_eq!(a, before);
        assert_eq!(b, vec![1.0, 2.0]);
    }

    #[test]
    fn conflicting_values() {
        let mut a = CsrMatrix::identity(3);
        let mut b = vec![0.0; 3];
        assert_eq!(
            apply_dirichlet(&mut a, &mut b, &[1, 1], &[2.0, 3.0]),
            Err(DirichletError::Conflict {
                node: 1,
                first: 2.0,
                second: 3.0
            })
        );
        assert!(apply_dirichlet(&mut a, &mut b, &[1, 1], &[2.0, 2.0]).is_ok());
    }

    #[test]
    fn laplace_strip_is_linear() {
        // nodes at x = 0, 1, 2 (both rows); ends fixed at 1 and 3
        let m = generate_structured(2, 1, 2.0, 1.0).unwrap();
        let mut a = assemble_stiffness(&m, ElementCoeff::Scalar(&vec![1.0; m.num_elements()]));
        let mut b = vec![0.0; m.num_nodes()];
        let nodes = [0, 3, 2, 5];
        let vals = [1.0, 1.0, 3.0, 3.0];
        apply_dirichlet(&mut a, &mut b, &nodes, &vals).unwrap();
        let x = solve_sparse(&a, &b).unwrap();
        assert!((x[1] - 2.0).abs() < 1e-14 && (x[4] - 2.0).abs() < 1e-14);

        let mut a = assemble_stiffness(&m, ElementCoeff::Scalar(&vec![1.0; m.num_elements()]));
        let mut b = vec![0.0; m.num_nodes()];
        apply_dirichlet_symmetric(&mut a, &mut b, &nodes, &vals).unwrap();
        assert!(a.is_symmetric(0.0));
        let y = solve_sparse(&a, &b).unwrap();
        assert!((y[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn patch_test_linear_field() {
        let m = generate_structured(5, 4, 1.0, 1.0).unwrap();
        let a = assemble_stiffness(&m, ElementCoeff::Scalar(&vec![2.5; m.num_elements()]));
        let u: Vec<f64> = m.nodes().iter().map(|p| 0.7 * p[0] - 1.3 * p[1] + 0.2).collect();
        let r = a.mul_vec(&u);
        let boundary: std::collections::HashSet<usize> =
            m.facets().iter().flat_map(|f| f.nodes).collect();
        for (i, v) in r.iter().enumerate() {
            if !boundary.contains(&i) {
                assert!(v.abs() < 1e-12, "row {i}: {v}");
            }
        }
        let _: &Mesh = &m;
    }

    #[test]
    fn direct_and_iterative_agree() {
        let m = generate_structured(8, 8, 1.0, 1.0).unwrap();
        let q = vec![[1.0, -2.0]; m.num_elements()];
        let mut a = assemble_stiffness(&m, ElementCoeff::Scalar(&vec![0.1; m.num_elements()]));
        a.axpy(1.0, &assemble_advection(&m, &q));
        a.add_diagonal(&assemble_lumped_mass(&m, &vec![10.0; m.num_nodes()]));
        let b: Vec<f64> = (0..m.num_nodes()).map(|i| (i as f64).cos()).collect();
        let x1 = solve_sparse(&a, &b).unwrap();
        let x2 = LinearSolver::BiCgStab {
            tol: 1e-13,
            max_iter: 200,
        }
        .solve(&a, &b, None)
        .unwrap();
        assert!(relative_residual(&a, &x1, &b) <= RESIDUAL_TOL);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}
