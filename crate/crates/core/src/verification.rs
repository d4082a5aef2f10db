//! Error norms, convergence orders and mass audits.

use serde::Serialize;

use crate::mesh::{Mesh, PointLocator};
use crate::output::CsvTable;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricError {
    #[error("errors must be positive (got {coarse}, {fine})")]
    NonPositiveError { coarse: f64, fine: f64 },
    #[error("refinement factor must exceed 1 (got {0})")]
    BadFactor(f64),
    #[error("exact mass change is zero; mass balance error undefined")]
    ZeroExactMass,
    #[error("field has {got} values, mesh has {expected} nodes")]
    Length { expected: usize, got: usize },
    #[error("quadrature point ({0}, {1}) lies outside the reference mesh")]
    OutsideReference(f64, f64),
}

fn check_len(mesh: &Mesh, u: &[f64]) -> Result<(), MetricError> {
    if u.len() != mesh.num_nodes() {
        return Err(MetricError::Length {
            expected: mesh.num_nodes(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Edge-midpoint rule on each triangle; exact for quadratics.
fn midpoint_quadrature(mesh: &Mesh, mut f: impl FnMut(usize, [f64; 2], [f64; 3]) -> f64) -> f64 {
    const BARY: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
    let nodes = mesh.nodes();
    let mut total = 0.0;
    for (e, (t, g)) in mesh.elements().iter().zip(mesh.geometry()).enumerate() {
        let mut s = 0.0;
        for b in BARY {
            let x = b[0] * nodes[t[0]][0] + b[1] * nodes[t[1]][0] + b[2] * nodes[t[2]][0];
            let z = b[0] * nodes[t[0]][1] + b[1] * nodes[t[1]][1] + b[2] * nodes[t[2]][1];
            s += f(e, [x, z], b);
        }
        total += g.area / 3.0 * s;
    }
    total
}

fn interp(mesh: &Mesh, u: &[f64], e: usize, b: [f64; 3]) -> f64 {
    let t = mesh.elements()[e];
    b[0] * u[t[0]] + b[1] * u[t[1]] + b[2] * u[t[2]]
}

/// `‖u_h − u_ref‖_{L²}` with `u_ref` evaluated at the quadrature points.
pub fn l2_error(mesh: &Mesh, u_h: &[f64], u_ref: impl Fn([f64; 2]) -> f64) -> Result<f64, MetricError> {
    check_len(mesh, u_h)?;
    let s = midpoint_quadrature(mesh, |e, p, b| {
        let d = interp(mesh, u_h, e, b) - u_ref(p);
        d * d
    });
    Ok(s.sqrt())
}

/// `‖u_h − I_h u_ref‖_{L²}`, with `I_h` the nodal interpolant.
pub fn l2_error_interpolated(
    mesh: &Mesh,
    u_h: &[f64],
    u_ref: impl Fn([f64; 2]) -> f64,
) -> Result<f64, MetricError> {
    check_len(mesh, u_h)?;
    let d: Vec<f64> = mesh.nodes().iter().zip(u_h).map(|(&p, u)| u - u_ref(p)).collect();
    Ok(l2_norm(mesh, &d))
}

/// `‖u_h‖_{L²}`, exact for P1 fields.
pub fn l2_norm(mesh: &Mesh, u: &[f64]) -> f64 {
    midpoint_quadrature(mesh, |e, _, b| interp(mesh, u, e, b).powi(2)).sqrt()
}

/// `‖u_ref‖_{L²}` for an evaluable field.
pub fn l2_norm_of(mesh: &Mesh, u_ref: impl Fn([f64; 2]) -> f64) -> f64 {
    midpoint_quadrature(mesh, |_, p, _| u_ref(p).powi(2)).sqrt()
}

/// Relative error `‖u_h − u_ref‖ / ‖u_ref‖`.
pub fn relative_l2_error(mesh: &Mesh, u_h: &[f64], u_ref: impl Fn([f64; 2]) -> f64) -> Result<f64, MetricError> {
    let err = l2_error(mesh, u_h, &u_ref)?;
    Ok(err / l2_norm_of(mesh, &u_ref))
}

/// Error against a P1 field on a different (typically finer) mesh, sampled
/// at the quadrature points of `mesh` by point location.
pub fn l2_error_against_mesh(
    mesh: &Mesh,
    u_h: &[f64],
    reference: &Mesh,
    u_ref: &[f64],
) -> Result<(f64, f64), MetricError> {
    check_len(mesh, u_h)?;
    check_len(reference, u_ref)?;
    let loc = PointLocator::new(reference);
    let mut outside = None;
    let mut norm = 0.0;
    let err = midpoint_quadrature(mesh, |e, p, b| {
        let r = match loc.interpolate(u_ref, p) {
            Some(v) => v,
            None => {
                outside.get_or_insert(p);
                0.0
            }
        };
        norm += midpoint_weight(mesh, e) * r * r;
        let d = interp(mesh, u_h, e, b) - r;
        d * d
    });
    if let Some(p) = outside {
        return Err(MetricError::OutsideReference(p[0], p[1]));
    }
    Ok((err.sqrt(), err.sqrt() / norm.sqrt()))
}

/// Relative asymmetry `‖u − u∘R‖ / ‖u‖` of a field under reflection `R`
/// about the vertical line `x = axis`. The mesh must cover the mirror image
/// of every node.
pub fn mirror_asymmetry(mesh: &Mesh, u: &[f64], axis: f64) -> Result<f64, MetricError> {
    check_len(mesh, u)?;
    let loc = PointLocator::new(mesh);
    let mut d = Vec::with_capacity(u.len());
    for (&p, &v) in mesh.nodes().iter().zip(u) {
        let q = [2.0 * axis - p[0], p[1]];
        let mirrored = loc.interpolate(u, q).ok_or(MetricError::OutsideReference(q[0], q[1]))?;
        d.push(v - mirrored);
    }
    Ok(l2_norm(mesh, &d) / l2_norm(mesh, u))
}

fn midpoint_weight(mesh: &Mesh, e: usize) -> f64 {
    mesh.geometry()[e].area / 3.0
}

/// Observed order `ln(e_c/e_f)/ln k`.
pub fn convergence_order(e_coarse: f64, e_fine: f64, k: f64) -> Result<f64, MetricError> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(MetricError::NonPositiveError {
            coarse: e_coarse,
            fine: e_fine,
        });
    }
    if !(k > 1.0) {
        return Err(MetricError::BadFactor(k));
    }
    Ok((e_coarse / e_fine).ln() / k.ln())
}

/// `∫ θ dΩ`, exact for P1 fields.
pub fn mass_total(mesh: &Mesh, theta: &[f64]) -> f64 {
    mesh.elements()
        .iter()
        .zip(mesh.geometry())
        .map(|(t, g)| g.area / 3.0 * (theta[t[0]] + theta[t[1]] + theta[t[2]]))
        .sum()
}

/// `∫ θ c dΩ`, exact for P1 × P1.
pub fn solute_mass(mesh: &Mesh, theta: &[f64], c: &[f64]) -> f64 {
    mesh.elements()
        .iter()
        .zip(mesh.geometry())
        .map(|(t, g)| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let w = if i == j { 2.0 } else { 1.0 };
                    s += w * theta[t[i]] * c[t[j]];
                }
            }
            g.area / 12.0 * s
        })
        .sum()
}

/// Relative mass balance error in percent, `|1 − MB_num/MB_ex|·100`.
pub fn mass_balance_error(mb_num: f64, mb_ex: f64) -> Result<f64, MetricError> {
    if mb_ex == 0.0 {
        return Err(MetricError::ZeroExactMass);
    }
    Ok((1.0 - mb_num / mb_ex).abs() * 100.0)
}

/// Mass balance error from nodal water contents.
pub fn mass_balance_error_fields(
    mesh: &Mesh,
    theta_num: &[f64],
    theta_ex: &[f64],
    theta_0: &[f64],
) -> Result<f64, MetricError> {
    for f in [theta_num, theta_ex, theta_0] {
        check_len(mesh, f)?;
    }
    let m0 = mass_total(mesh, theta_0);
    mass_balance_error(mass_total(mesh, theta_num) - m0, mass_total(mesh, theta_ex) - m0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub scheme: String,
    pub h: f64,
    pub dt: f64,
    pub l2_psi: f64,
    pub l2_s: f64,
    pub order: Option<f64>,
    pub cpu_s: f64,
}

pub const REPORT_HEADER: [&str; 7] = ["scheme", "h", "dt", "l2_psi", "l2_S", "order", "cpu_s"];

impl ErrorReport {
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.scheme.clone(),
            format!("{}", self.h),
            format!("{}", self.dt),
            format!("{:e}", self.l2_psi),
            format!("{:e}", self.l2_s),
            self.order.map_or_else(String::new, |p| format!("{p:.4}")),
            format!("{:.3}", self.cpu_s),
        ]
    }
}

/// Table of reports, with orders filled in between consecutive rows of the
/// same scheme (refinement factor `k`).
pub fn report_table(reports: &mut [ErrorReport], k: f64) -> CsvTable {
    for i in 1..reports.len() {
        if reports[i].scheme == reports[i - 1].scheme {
            reports[i].order = convergence_order(reports[i - 1].l2_psi, reports[i].l2_psi, k).ok();
        }
    }
    let mut t = CsvTable::new(REPORT_HEADER);
    for r in reports.iter() {
        t.push(r.csv_row());
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, generate_structured_with, Diagonal};
    use proptest::prelude::*;

    fn unit() -> Mesh {
        generate_structured(6, 5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn mirror_asymmetry_detects_skew() {
        let m = generate_structured_with(8, 4, 2.0, 1.0, Diagonal::MirroredX).unwrap();
        let even: Vec<f64> = m.nodes().iter().map(|p| 1.0 + (p[0] - 1.0).powi(2) + p[1]).collect();
        assert!(mirror_asymmetry(&m, &even, 1.0).unwrap() < 1e-12);
        let skew: Vec<f64> = m.nodes().iter().map(|p| 1.0 + p[0]).collect();
        assert!(mirror_asymmetry(&m, &skew, 1.0).unwrap() > 0.1);
    }

    #[test]
    fn l2_examples() {
        let m = unit();
        let lin: Vec<f64> = m.nodes().iter().map(|p| 2.0 * p[0] - p[1]).collect();
        assert!(l2_error(&m, &lin, |p| 2.0 * p[0] - p[1]).unwrap() < 1e-14);
        let zero = vec![0.0; m.num_nodes()];
        assert!((l2_error(&m, &zero, |_| 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((l2_error(&m, &zero, |p| p[0]).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((relative_l2_error(&m, &zero, |p| p[0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interpolated_error_ignores_interpolation_error() {
        let m = unit();
        let q = |p: [f64; 2]| p[0] * p[0] + p[1];
        let ih: Vec<f64> = m.nodes().iter().map(|&p| q(p)).collect();
        assert_eq!(l2_error_interpolated(&m, &ih, q).unwrap(), 0.0);
        assert!(l2_error(&m, &ih, q).unwrap() > 1e-3);
        let zero = vec![0.0; m.num_nodes()];
        assert!((l2_error_interpolated(&m, &zero, |_| 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norm_is_exact_for_p1() {
        let m = unit();
        let u: Vec<f64> = m.nodes().iter().map(|p| p[0] + p[1]).collect();
        // ∫(x+z)² over the unit square = 7/6
        assert!((l2_norm(&m, &u) - (7.0f64 / 6.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orders() {
        assert_eq!(convergence_order(0.4, 0.1, 2.0).unwrap(), 2.0);
        assert!((convergence_order(0.2982, 0.095769, 2.0).unwrap() - 1.639).abs() < 1e-3);
        assert_eq!(convergence_order(0.3, 0.3, 2.0).unwrap(), 0.0);
        assert!(convergence_order(0.0, 0.1, 2.0).is_err());
        assert!(convergence_order(0.2, 0.1, 1.0).is_err());
    }

    #[test]
    fn mass_examples() {
        let m = generate_structured(4, 4, 15.24, 15.24).unwrap();
        let th = vec![0.45; m.num_nodes()];
        assert!((mass_total(&m, &th) - 0.45 * 232.2576).abs() < 1e-10);
        assert_eq!(mass_total(&m, &vec![0.0; m.num_nodes()]), 0.0);
        let u = unit();
        let aff: Vec<f64> = u.nodes().iter().map(|p| 0.1 + 0.2 * p[0] + 0.3 * p[1]).collect();
        assert!((mass_total(&u, &aff) - 0.35).abs() < 1e-12);
    }

    #[test]
    fn solute_mass_examples() {
        let m = generate_structured(5, 5, 2.0, 2.0).unwrap();
        let th = vec![0.43; m.num_nodes()];
        assert!((solute_mass(&m, &th, &vec![0.1; m.num_nodes()]) - 0.172).abs() < 1e-14);
        assert_eq!(solute_mass(&m, &th, &vec![0.0; m.num_nodes()]), 0.0);
        // ∫ x z over the unit square = 1/4
        let u = unit();
        let x: Vec<f64> = u.nodes().iter().map(|p| p[0]).collect();
        let z: Vec<f64> = u.nodes().iter().map(|p| p[1]).collect();
        assert!((solute_mass(&u, &x, &z) - 0.25).abs() < 1e-14);
        // ∫ x² = 1/3, exact because the product of two P1 fields is P2
        assert!((solute_mass(&u, &x, &x) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn mass_balance() {
        assert_eq!(mass_balance_error(2.0, 2.0).unwrap(), 0.0);
        assert!((mass_balance_error(1.01, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mass_balance_error(1.0, 0.0), Err(MetricError::ZeroExactMass));
    }

    #[test]
    fn against_finer_mesh() {
        let coarse = generate_structured(4, 4, 1.0, 1.0).unwrap();
        let fine = generate_structured(9, 7, 1.0, 1.0).unwrap();
        let f = |p: &[f64; 2]| 1.0 + p[0] - 2.0 * p[1];
        let uc: Vec<f64> = coarse.nodes().iter().map(f).collect();
        let uf: Vec<f64> = fine.nodes().iter().map(f).collect();
        let (abs, rel) = l2_error_against_mesh(&coarse, &uc, &fine, &uf).unwrap();
        assert!(abs < 1e-12 && rel < 1e-12);
    }

    #[test]
    fn table_orders() {
        let mk = |e: f64| ErrorReport {
            scheme: "BDF2".into(),
            h: 1.0,
            dt: 0.1,
            l2_psi: e,
            l2_s: 0.0,
            order: None,
            cpu_s: 0.0,
        };
        let mut r = vec![mk(0.4), mk(0.1)];
        let t = report_table(&mut r, 2.0);
        assert_eq!(r[1].order, Some(2.0));
        assert!(t.render().starts_with("scheme,h,dt,l2_psi,l2_S,order,cpu_s\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn l2_is_a_metric(seed in proptest::collection::vec(-5.0f64..5.0, 126)) {
            let m = unit();
            let n = m.num_nodes();
            let (a, rest) = seed.split_at(n);
            let (b, c) = rest.split_at(n);
            let d = |u: &[f64], v: &[f64]| {
                let w: Vec<f64> = u.iter().zip(v).map(|(x, y)| x - y).collect();
                l2_norm(&m, &w)
            };
            prop_assert!((d(a, b) - d(b, a)).abs() < 1e-12);
            prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
        }

        #[test]
        fn order_scale_invariant(e1 in 1e-6f64..10.0, e2 in 1e-6f64..10.0, s in 1e-3f64..1e3) {
            let p = convergence_order(e1, e2, 2.0).unwrap();
            let q = convergence_order(s * e1, s * e2, 2.0).unwrap();
            prop_assert!((p - q).abs() < 1e-9);
        }
    }
}
