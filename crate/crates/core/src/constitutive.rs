//! Soil hydraulic relations and solute dispersion.
//!
//! Two retention models are supported. Gardner uses `S = exp(α ψ)` with
//! `Kr = S`. Van Genuchten uses `S = [1 + (α|ψ|)^n]^(-m)` with
//! `m = 1 - 1/n` and Mualem conductivity. Both are saturated (`S = Kr = 1`)
//! for `ψ >= 0`.

use serde::{Deserialize, Serialize};

/// Speed below which dispersion is purely molecular.
pub const VELOCITY_CUTOFF: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConstitutiveError {
    #[error("invalid soil parameters: {0}")]
    InvalidSoil(String),
    #[error("invalid dispersion parameters: {0}")]
    InvalidDispersion(String),
    #[error("water content must be positive, got {0}")]
    NonPositiveTheta(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gardner,
    VanGenuchten,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoilParams {
    pub model: ModelKind,
    pub theta_s: f64,
    pub theta_r: f64,
    pub ks: f64,
    pub alpha: f64,
    /// Van Genuchten exponent; ignored by Gardner.
    #[serde(default = "default_n")]
    pub n: f64,
}

fn default_n() -> f64 {
    2.0
}

impl SoilParams {
    pub fn gardner(theta_s: f64, theta_r: f64, ks: f64, alpha: f64) -> Result<Self, ConstitutiveError> {
        Self {
            model: ModelKind::Gardner,
            theta_s,
            theta_r,
            ks,
            alpha,
            n: default_n(),
        }
        .validated()
    }

    pub fn van_genuchten(
        theta_s: f64,
        theta_r: f64,
        ks: f64,
        alpha: f64,
        n: f64,
    ) -> Result<Self, ConstitutiveError> {
        Self {
            model: ModelKind::VanGenuchten,
            theta_s,
            theta_r,
            ks,
            alpha,
            n,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self, ConstitutiveError> {
        let bad = |m: String| Err(ConstitutiveError::InvalidSoil(m));
        if !(0.0 <= self.theta_r && self.theta_r < self.theta_s && self.theta_s <= 1.0) {
            return bad(format!(
                "need 0 <= theta_r < theta_s <= 1, got theta_r = {}, theta_s = {}",
                self.theta_r, self.theta_s
            ));
        }
        if !(self.ks > 0.0 && self.ks.is_finite()) {
            return bad(format!("ks must be positive, got {}", self.ks));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.model == ModelKind::VanGenuchten && !(self.n > 1.0 && self.n.is_finite()) {
            return bad(format!("van Genuchten n must exceed 1, got {}", self.n));
        }
        Ok(self)
    }

    /// Pore space available to water, `theta_s - theta_r`.
    pub fn phi(&self) -> f64 {
        self.theta_s - self.theta_r
    }

    /// Van Genuchten `m = 1 - 1/n`.
    pub fn m(&self) -> f64 {
        1.0 - 1.0 / self.n
    }

    pub fn with_ks(mut self, ks: f64) -> Self {
        self.ks = ks;
        self
    }

    pub fn saturation(&self, psi: f64) -> f64 {
        saturation(self, psi)
    }

    pub fn moisture_capacity(&self, psi: f64) -> f64 {
        moisture_capacity(self, psi)
    }

    pub fn rel_conductivity(&self, psi: f64) -> f64 {
        rel_conductivity(self, psi)
    }

    pub fn conductivity(&self, psi: f64) -> f64 {
        self.ks * rel_conductivity(self, psi)
    }

    pub fn theta(&self, psi: f64) -> f64 {
        self.theta_r + self.phi() * saturation(self, psi)
    }

    pub fn theta_from_saturation(&self, s: f64) -> f64 {
        self.theta_r + self.phi() * s
    }

    /// Pressure head for a given effective saturation, `ψ = J(S)/α`.
    pub fn head_from_saturation(&self, s: f64) -> f64 {
        head_from_saturation(self, s)
    }

    pub fn head_from_theta(&self, theta: f64) -> f64 {
        head_from_saturation(self, (theta - self.theta_r) / self.phi())
    }
}

pub fn saturation(p: &SoilParams, psi: f64) -> f64 {
    if psi >= 0.0 {
        return 1.0;
    }
    match p.model {
        ModelKind::Gardner => (p.alpha * psi).exp(),
        ModelKind::VanGenuchten => {
            let u = -p.alpha * psi;
            (1.0 + u.powf(p.n)).powf(-p.m())
        }
    }
}

/// `C = dθ/dψ = φ dS/dψ`; zero in the saturated zone.
pub fn moisture_capacity(p: &SoilParams, psi: f64) -> f64 {
    if psi >= 0.0 {
        return 0.0;
    }
    let ds = match p.model {
        ModelKind::Gardner => p.alpha * (p.alpha * psi).exp(),
        ModelKind::VanGenuchten => {
            let (n, m) = (p.n, p.m());
            let u = -p.alpha * psi;
            let un = u.powf(n);
            p.alpha * m * n * u.powf(n - 1.0) * (1.0 + un).powf(-m - 1.0)
        }
    };
    p.phi() * ds
}

pub fn rel_conductivity(p: &SoilParams, psi: f64) -> f64 {
    if psi >= 0.0 {
        return 1.0;
    }
    match p.model {
        ModelKind::Gardner => (p.alpha * psi).exp(),
        ModelKind::VanGenuchten => mualem(saturation(p, psi), p.m()),
    }
}

/// Mualem conductivity `S^½ [1 - (1 - S^(1/m))^m]²`, evaluated through
/// `expm1`/`ln_1p` so it stays accurate for dry soil.
pub fn mualem(s: f64, m: f64) -> f64 {
    if s >= 1.0 {
        return 1.0;
    }
    if s <= 0.0 {
        return 0.0;
    }
    let x = s.powf(1.0 / m);
    let inner = -(m * (-x).ln_1p()).exp_m1();
    s.sqrt() * inner * inner
}

pub fn head_from_saturation(p: &SoilParams, s: f64) -> f64 {
    if s >= 1.0 {
        return 0.0;
    }
    match p.model {
        ModelKind::Gardner => s.ln() / p.alpha,
        ModelKind::VanGenuchten => -(s.powf(-1.0 / p.m()) - 1.0).powf(1.0 / p.n) / p.alpha,
    }
}

/// Millington–Quirk tortuosity `θ^(7/3) / θs²`.
pub fn tortuosity(theta: f64, theta_s: f64) -> f64 {
    theta.max(0.0).powf(7.0 / 3.0) / (theta_s * theta_s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionParams {
    pub lambda_l: f64,
    pub lambda_t: f64,
    /// Molecular diffusion in free water.
    pub lambda_m: f64,
}

impl DispersionParams {
    pub fn new(lambda_l: f64, lambda_t: f64, lambda_m: f64) -> Result<Self, ConstitutiveError> {
        if !(lambda_l >= lambda_t && lambda_t >= 0.0 && lambda_m >= 0.0) {
            return Err(ConstitutiveError::InvalidDispersion(format!(
                "need lambda_l >= lambda_t >= 0 and lambda_m >= 0, got ({lambda_l}, {lambda_t}, {lambda_m})"
            )));
        }
        Ok(Self {
            lambda_l,
            lambda_t,
            lambda_m,
        })
    }
}

/// Symmetric 2×2 tensor stored as `[[xx, xz], [zx, zz]]`.
pub type Tensor2 = [[f64; 2]; 2];

/// Hydrodynamic dispersion tensor for Darcy flux `q` at water content `theta`.
pub fn dispersion_tensor(
    dp: &DispersionParams,
    theta: f64,
    theta_s: f64,
    q: [f64; 2],
) -> Result<Tensor2, ConstitutiveError> {
    if !(theta > 0.0) {
        return Err(ConstitutiveError::NonPositiveTheta(theta));
    }
    let molecular = tortuosity(theta, theta_s) * dp.lambda_m;
    let v = [q[0] / theta, q[1] / theta];
    let speed = v[0].hypot(v[1]);
    if speed < VELOCITY_CUTOFF {
        return Ok([[molecular, 0.0], [0.0, molecular]]);
    }
    let diff = (dp.lambda_l - dp.lambda_t) / speed;
    let base = dp.lambda_t * speed + molecular;
    let xz = diff * v[0] * v[1];
    Ok([
        [base + diff * v[0] * v[0], xz],
        [xz, base + diff * v[1] * v[1]],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gardner() -> SoilParams {
        SoilParams::gardner(0.45, 0.15, 0.1, 0.164).unwrap()
    }

    fn vg() -> SoilParams {
        SoilParams::van_genuchten(0.5, 0.12, 6.944e-5, 0.02, 3.0).unwrap()
    }

    #[test]
    fn saturated_limits() {
        for p in [gardner(), vg()] {
            assert_eq!(saturation(&p, 0.0), 1.0);
            assert_eq!(saturation(&p, 3.0), 1.0);
            assert_eq!(moisture_capacity(&p, 0.0), 0.0);
            assert_eq!(rel_conductivity(&p, 0.0), 1.0);
        }
    }

    #[test]
    fn gardner_dry_saturation() {
        let s = saturation(&gardner(), -15.24);
        assert_relative_eq!(s, (-2.49936f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(s, 0.08215, max_relative = 5e-4);
        // inverse relation recovers the head
        assert_relative_eq!(gardner().head_from_saturation(s), -15.24, max_relative = 1e-14);
    }

    #[test]
    fn gardner_capacity_matches_finite_difference() {
        let p = gardner();
        let c = moisture_capacity(&p, -15.24);
        let h = 1e-6;
        let fd = p.phi() * (saturation(&p, -15.24 + h) - saturation(&p, -15.24 - h)) / (2.0 * h);
        assert_relative_eq!(c, fd, max_relative = 1e-8);
        assert_relative_eq!(c, 4.042e-3, max_relative = 5e-4);
    }

    #[test]
    fn vg_capacity_at_inverse_alpha() {
        let p = vg();
        let psi = -1.0 / p.alpha;
        let h = 1e-4;
        let fd = p.phi() * (saturation(&p, psi + h) - saturation(&p, psi - h)) / (2.0 * h);
        assert_relative_eq!(moisture_capacity(&p, psi), fd, max_relative = 1e-8);
    }

    #[test]
    fn gardner_conductivity_equals_saturation() {
        let p = gardner();
        for psi in [-0.01, -1.0, -15.24, -40.0] {
            assert_eq!(rel_conductivity(&p, psi), saturation(&p, psi));
        }
    }

    #[test]
    fn mualem_half_saturation() {
        let m = 2.0 / 3.0;
        let oracle = 0.5f64.powf(0.5) * (1.0 - (1.0 - 0.5f64.powf(1.5)).powf(m)).powi(2);
        assert_relative_eq!(mualem(0.5, m), oracle, max_relative = 1e-12);
        let p = vg();
        let psi = p.head_from_saturation(0.5);
        assert_relative_eq!(saturation(&p, psi), 0.5, max_relative = 1e-12);
        assert_relative_eq!(rel_conductivity(&p, psi), oracle, max_relative = 1e-12);
    }

    #[test]
    fn tortuosity_values() {
        assert_relative_eq!(tortuosity(0.45, 0.45), 0.45f64.powf(1.0 / 3.0), max_relative = 1e-14);
        assert_relative_eq!(tortuosity(0.45, 0.45), 0.7663, max_relative = 1e-4);
        assert!(tortuosity(1e-12, 0.45) < 1e-20);
    }

    #[test]
    fn dispersion_examples() {
        let dp = DispersionParams::new(0.5, 0.1, 0.02).unwrap();
        let d = dispersion_tensor(&dp, 0.3, 0.45, [0.0, 0.0]).unwrap();
        let mol = tortuosity(0.3, 0.45) * 0.02;
        assert_eq!(d, [[mol, 0.0], [0.0, mol]]);

        let dp = DispersionParams::new(0.5, 0.1, 0.0).unwrap();
        let d = dispersion_tensor(&dp, 0.5, 0.5, [0.5 * 2.0, 0.0]).unwrap();
        assert_relative_eq!(d[0][0], 0.5 * 2.0);
        assert_relative_eq!(d[1][1], 0.1 * 2.0);
        assert_eq!(d[0][1], 0.0);

        let s = 0.5f64.sqrt();
        let d = dispersion_tensor(&dp, 1.0, 1.0, [s, s]).unwrap();
        assert_relative_eq!(d[0][0], 0.3, max_relative = 1e-14);
        assert_relative_eq!(d[1][1], 0.3, max_relative = 1e-14);
        assert_relative_eq!(d[0][1], 0.2, max_relative = 1e-14);
        assert_eq!(d[0][1], d[1][0]);
    }

    #[test]
    fn dispersion_rejects_dry() {
        let dp = DispersionParams::new(0.5, 0.1, 0.0).unwrap();
        assert_eq!(
            dispersion_tensor(&dp, 0.0, 0.4, [1.0, 0.0]),
            Err(ConstitutiveError::NonPositiveTheta(0.0))
        );
    }

    #[test]
    fn invalid_params() {
        assert!(SoilParams::gardner(0.3, 0.4, 1.0, 1.0).is_err());
        assert!(SoilParams::gardner(0.4, 0.1, 0.0, 1.0).is_err());
        assert!(SoilParams::van_genuchten(0.4, 0.1, 1.0, 1.0, 1.0).is_err());
        assert!(DispersionParams::new(0.1, 0.5, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn capacity_is_derivative_of_saturation(frac in 1e-3f64..50.0, use_vg in any::<bool>()) {
            let p = if use_vg { vg() } else { gardner() };
            let psi = -frac / p.alpha;
            let h = 1e-6 / p.alpha;
            let fd = p.phi() * (saturation(&p, psi + h) - saturation(&p, psi - h)) / (2.0 * h);
            let c = moisture_capacity(&p, psi);
            prop_assert!(c >= 0.0);
            prop_assert!((c - fd).abs() <= 1e-6 * c.abs().max(1e-300) + 1e-15, "c = {c}, fd = {fd}");
        }

        #[test]
        fn monotone_in_head(a in -500.0f64..10.0, b in -500.0f64..10.0, use_vg in any::<bool>()) {
            let p = if use_vg { vg() } else { gardner() };
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(saturation(&p, lo) <= saturation(&p, hi));
            prop_assert!(rel_conductivity(&p, lo) <= rel_conductivity(&p, hi));
        }

        #[test]
        fn dispersion_eigenvalues(
            ll in 0.0f64..2.0, ratio in 0.0f64..1.0, lm in 0.0f64..1.0,
            theta in 0.05f64..0.5, qx in -3.0f64..3.0, qz in -3.0f64..3.0,
        ) {
            let dp = DispersionParams::new(ll, ll * ratio, lm).unwrap();
            let d = dispersion_tensor(&dp, theta, 0.5, [qx, qz]).unwrap();
            let mol = tortuosity(theta, 0.5) * lm;
            let speed = (qx / theta).hypot(qz / theta);
            let tr = d[0][0] + d[1][1];
            let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            let (e_hi, e_lo) = (0.5 * tr + disc, 0.5 * tr - disc);
            prop_assert!(e_lo >= -1e-12);
            if speed >= VELOCITY_CUTOFF {
                let scale = 1.0 + e_hi;
                prop_assert!((e_hi - (ll * speed + mol)).abs() < 1e-12 * scale);
                prop_assert!((e_lo - (ll * ratio * speed + mol)).abs() < 1e-12 * scale);
            }
        }

        #[test]
        fn dispersion_frame_covariance(
            angle in 0.0f64..std::f64::consts::TAU, qx in -2.0f64..2.0, qz in -2.0f64..2.0,
            theta in 0.05f64..0.5,
        ) {
            let dp = DispersionParams::new(0.5, 0.1, 0.3).unwrap();
            let (s, c) = angle.sin_cos();
            let rot = [[c, -s], [s, c]];
            let rq = [c * qx - s * qz, s * qx + c * qz];
            let d = dispersion_tensor(&dp, theta, 0.5, [qx, qz]).unwrap();
            let dr = dispersion_tensor(&dp, theta, 0.5, rq).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let mut expect = 0.0;
                    for k in 0..2 {
                        for l in 0..2 {
                            expect += rot[i][k] * d[k][l] * rot[j][l];
                        }
                    }
                    prop_assert!((dr[i][j] - expect).abs() < 1e-12 * (1.0 + expect.abs()));
                }
            }
        }
    }
}
