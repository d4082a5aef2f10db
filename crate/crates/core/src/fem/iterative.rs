//! BiCGStab with an ILU(0) preconditioner, for meshes too large for the
//! banded direct solver.

use super::sparse::CsrMatrix;
use super::SolverError;

/// Incomplete LU factors on the sparsity pattern of `A`.
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        let mut lu = a.clone();
        let n = a.n();
        let pat = a.pattern().clone();
        let diag: Vec<usize> = (0..n)
            .map(|i| {
                pat.find(i, i).ok_or(SolverError::Singular {
                    row: i,
                    pivot: 0.0,
                })
            })
            .collect::<Result<_, _>>()?;
        let vals = lu.values_mut();
        for i in 1..n {
            let (start, end) = (pat.row_ptr[i], pat.row_ptr[i + 1]);
            for kk in start..end {
                let k = pat.col_idx[kk];
                if k >= i {
                    break;
                }
                let dk = vals[diag[k]];
                if dk == 0.0 {
                    return Err(SolverError::Singular { row: k, pivot: 0.0 });
                }
                let l = vals[kk] / dk;
                vals[kk] = l;
                for jj in kk + 1..end {
                    let j = pat.col_idx[jj];
                    if let Some(pos) = pat.find(k, j) {
                        vals[jj] -= l * vals[pos];
                    }
                }
            }
        }
        Ok(Self { lu, diag })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let pat = self.lu.pattern();
        let v = self.lu.values();
        let mut y = r.to_vec();
        for i in 0..n {
            for k in pat.row_ptr[i]..self.diag[i] {
                y[i] -= v[k] * y[pat.col_idx[k]];
            }
        }
        for i in (0..n).rev() {
            for k in self.diag[i] + 1..pat.row_ptr[i + 1] {
                y[i] -= v[k] * y[pat.col_idx[k]];
            }
            y[i] /= v[self.diag[i]];
        }
        y
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned BiCGStab. Stops when `‖r‖ ≤ tol ‖b‖`.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, SolverError> {
    let n = a.n();
    let pc = Ilu0::new(a)?;
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if dot(&r, &r).sqrt() <= tol * bnorm {
        return Ok(x);
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 {
            return Err(SolverError::Breakdown { iterations: it });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let ph = pc.apply(&p);
        a.mul_vec_into(&ph, &mut v);
        alpha = rho_new / dot(&r0, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if dot(&s, &s).sqrt() <= tol * bnorm {
            x.iter_mut().zip(&ph).for_each(|(xi, pi)| *xi += alpha * pi);
            return Ok(x);
        }
        let sh = pc.apply(&s);
        let t = a.mul_vec(&sh);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        rho = rho_new;
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        if !omega.is_finite() || omega == 0.0 {
            return Err(SolverError::Breakdown { iterations: it });
        }
    }
    Err(SolverError::NotConverged {
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_lumped_mass, assemble_stiffness, ElementCoeff};
    use crate::mesh::generate_structured;

    #[test]
    fn solves_mass_plus_stiffness() {
        let m = generate_structured(20, 20, 1.0, 1.0).unwrap();
        let k = vec![1.0; m.num_elements()];
        let mut a = assemble_stiffness(&m, ElementCoeff::Scalar(&k));
        a.add_diagonal(&assemble_lumped_mass(&m, &vec![50.0; m.num_nodes()]));
        let xt: Vec<f64> = m.nodes().iter().map(|p| (3.0 * p[0]).sin() + p[1]).collect();
        let b = a.mul_vec(&xt);
        let x = bicgstab(&a, &b, None, 1e-12, 500).unwrap();
        let err = x.iter().zip(&xt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "err = {err}");
    }
}
