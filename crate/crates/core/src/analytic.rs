//! Exact series solutions of the two-dimensional Green–Ampt infiltration
//! problems for Gardner soils.
//!
//! With the Kirchhoff-type substitution `Φ = exp(αΨ)` the Richards equation
//! becomes linear, `d ∂Φ/∂t = ΔΦ + α ∂Φ/∂z` with `d = αφ/Ks`, and the head is
//! recovered as `Ψ = log(ζ + Ψ₀)/α`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constitutive::{ConstitutiveError, SoilParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenAmptParams {
    pub length: f64,
    pub ks: f64,
    pub theta_s: f64,
    pub theta_r: f64,
    pub alpha: f64,
    pub psi_d: f64,
    pub terms: usize,
}

impl Default for GreenAmptParams {
    fn default() -> Self {
        Self {
            length: 15.24,
            ks: 0.1,
            theta_s: 0.45,
            theta_r: 0.15,
            alpha: 0.164,
            psi_d: -15.24,
            terms: 200,
        }
    }
}

impl GreenAmptParams {
    pub fn soil(&self) -> Result<SoilParams, ConstitutiveError> {
        SoilParams::gardner(self.theta_s, self.theta_r, self.ks, self.alpha)
    }

    pub fn zeta(&self) -> f64 {
        (self.alpha * self.psi_d).exp()
    }

    pub fn d(&self) -> f64 {
        self.alpha * (self.theta_s - self.theta_r) / self.ks
    }

    pub fn beta(&self, i: usize) -> f64 {
        let k = i as f64 * PI / self.length;
        (self.alpha * self.alpha / 4.0 + k * k).sqrt()
    }

    fn head(&self, psi0: f64) -> f64 {
        (self.zeta() + psi0).ln() / self.alpha
    }

    /// Steady profile plus decaying transient for one horizontal mode.
    fn mode(&self, i: usize, z: f64, t: f64) -> f64 {
        let (l, d) = (self.length, self.d());
        let beta = self.beta(i);
        let steady = (beta * z).sinh() / (beta * l).sinh();
        // Kahan summation from the smallest terms upwards
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for p in (1..=self.terms).rev() {
            let lam = PI * p as f64 / l;
            let nu = (beta * beta + lam * lam) / d;
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * lam / nu * (lam * z).sin() * (-nu * t).exp();
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        steady + 2.0 / (l * d) * sum
    }

    fn steady_mode(&self, i: usize, z: f64) -> f64 {
        let beta = self.beta(i);
        (beta * z).sinh() / (beta * self.length).sinh()
    }

    fn envelope(&self, z: f64) -> f64 {
        (1.0 - self.zeta()) * (self.alpha / 2.0 * (self.length - z)).exp()
    }

    /// Top boundary head of Test 1.
    pub fn top_head_test1(&self, x: f64) -> f64 {
        let (zeta, l) = (self.zeta(), self.length);
        let shape = 0.75 * (PI * x / l).sin() - 0.25 * (3.0 * PI * x / l).sin();
        self.head((1.0 - zeta) * shape)
    }

    /// Top boundary head of Test 2 in the `(1 − cos(2πx/L))/2` form.
    pub fn top_head_test2(&self, x: f64) -> f64 {
        let (zeta, l) = (self.zeta(), self.length);
        self.head((1.0 - zeta) * 0.5 * (1.0 - (2.0 * PI * x / l).cos()))
    }

    /// Top trace of [`sine_mode_head`], `log(ζ + (1 − ζ) sin(πx/L))/α`.
    pub fn top_trace_sine_mode(&self, x: f64) -> f64 {
        let zeta = self.zeta();
        self.head((1.0 - zeta) * (PI * x / self.length).sin())
    }
}

fn test1_psi0(p: &GreenAmptParams, x: f64, m1: f64, m3: f64, z: f64) -> f64 {
    let l = p.length;
    p.envelope(z) * (0.75 * (PI * x / l).sin() * m1 - 0.25 * (3.0 * PI * x / l).sin() * m3)
}

pub fn exact_head_test1(x: f64, z: f64, t: f64, p: &GreenAmptParams) -> f64 {
    p.head(test1_psi0(p, x, p.mode(1, z, t), p.mode(3, z, t), z))
}

/// Test 2: top head `(1 − cos(2πx/L))/2` in `Φ`, no-flux lateral sides.
/// The top profile splits into a uniform mode and a `cos(2πx/L)` mode, each
/// of which has zero horizontal derivative at `x = 0, L`.
pub fn exact_head_test2(x: f64, z: f64, t: f64, p: &GreenAmptParams) -> f64 {
    let c = (2.0 * PI * x / p.length).cos();
    p.head(p.envelope(z) * 0.5 * (p.mode(0, z, t) - c * p.mode(2, z, t)))
}

/// Single `sin(πx/L)` mode series with `Ψ = Ψd` on all sides except the
/// top, where it equals [`GreenAmptParams::top_trace_sine_mode`].
pub fn sine_mode_head(x: f64, z: f64, t: f64, p: &GreenAmptParams) -> f64 {
    p.head(p.envelope(z) * (PI * x / p.length).sin() * p.mode(1, z, t))
}

/// Long-time limit of the Test 1 solution.
pub fn steady_head_test1(x: f64, z: f64, p: &GreenAmptParams) -> f64 {
    p.head(test1_psi0(p, x, p.steady_mode(1, z), p.steady_mode(3, z), z))
}

/// Long-time limit of the Test 2 solution.
pub fn steady_head_test2(x: f64, z: f64, p: &GreenAmptParams) -> f64 {
    let c = (2.0 * PI * x / p.length).cos();
    p.head(p.envelope(z) * 0.5 * (p.steady_mode(0, z) - c * p.steady_mode(2, z)))
}
