//! Two-step second-order time schemes.
//!
//! The `(δ, μ)` family centres a two-step difference at `t_{n+δ}`:
//!
//! ```text
//! [(δ+½) φ^{n+1} − 2δ φ^n + (δ−½) φ^{n−1}] / Δt
//!     = (δ+μ) F^{n+1} + (1−δ−2μ) F^n + μ F^{n−1}
//! ```
//!
//! BDF2 is `(1, 0)`, SBDF2 `(1, 1)` and CN2 `(½, 0)`. The stabilized
//! leapfrog (SILF2) centres at `t_n` and evaluates the right-hand side at
//! `ν φ^{n+1} + (1−2ν) φ^n + ν φ^{n−1}` with all coefficients frozen at
//! `t_n`, which makes each step linear.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SchemeError {
    #[error("scheme parameter {name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("unknown scheme `{0}`")]
    Unknown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    TwoStep { delta: f64, mu: f64 },
    Silf2 { nu: f64 },
}

impl SchemeSpec {
    pub const BDF2: Self = SchemeSpec::TwoStep { delta: 1.0, mu: 0.0 };
    pub const SBDF2: Self = SchemeSpec::TwoStep { delta: 1.0, mu: 1.0 };
    pub const CN2: Self = SchemeSpec::TwoStep { delta: 0.5, mu: 0.0 };
    /// First-order startup step (backward Euler).
    pub const BDF1: Self = SchemeSpec::TwoStep { delta: 0.5, mu: -0.5 };

    pub fn silf2(nu: f64) -> Self {
        SchemeSpec::Silf2 { nu }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        match *self {
            SchemeSpec::TwoStep { delta, mu } => {
                if !(0.0..=1.0).contains(&delta) {
                    return Err(SchemeError::OutOfRange {
                        name: "delta",
                        value: delta,
                        range: "[0, 1]",
                    });
                }
                if !(0.0..=1.0).contains(&mu) {
                    return Err(SchemeError::OutOfRange {
                        name: "mu",
                        value: mu,
                        range: "[0, 1]",
                    });
                }
            }
            SchemeSpec::Silf2 { nu } => {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(SchemeError::OutOfRange {
                        name: "nu",
                        value: nu,
                        range: "(0, inf)",
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_iterative(&self) -> bool {
        matches!(self, SchemeSpec::TwoStep { .. })
    }

    /// Parses `bdf2`, `sbdf2`, `cn2`, `silf2` (ν = 1) or `silf2:<nu>`.
    pub fn parse(s: &str) -> Result<Self, SchemeError> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "bdf2" => Ok(Self::BDF2),
            "sbdf2" => Ok(Self::SBDF2),
            "cn2" => Ok(Self::CN2),
            "silf2" => Ok(Self::silf2(1.0)),
            other => {
                if let Some(nu) = other.strip_prefix("silf2:") {
                    let nu: f64 = nu.parse().map_err(|_| SchemeError::Unknown(s.into()))?;
                    let spec = Self::silf2(nu);
                    spec.validate()?;
                    Ok(spec)
                } else {
                    Err(SchemeError::Unknown(s.into()))
                }
            }
        }
    }

    /// The `(lhs, rhs)` weights of the linear-problem form of the scheme.
    /// SILF2 coincides with `δ = 0, μ = ν` on linear problems.
    pub fn weights(&self) -> SchemeWeights {
        match *self {
            SchemeSpec::TwoStep { delta, mu } => scheme_weights(delta, mu),
            SchemeSpec::Silf2 { nu } => scheme_weights(0.0, nu),
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            s if s == Self::BDF2 => write!(f, "BDF2"),
            s if s == Self::SBDF2 => write!(f, "SBDF2"),
            s if s == Self::CN2 => write!(f, "CN2"),
            SchemeSpec::TwoStep { delta, mu } => write!(f, "TwoStep(delta={delta}, mu={mu})"),
            SchemeSpec::Silf2 { nu } if nu == 1.0 => write!(f, "SILF2"),
            SchemeSpec::Silf2 { nu } => write!(f, "SILF2(nu={nu})"),
        }
    }
}

/// Coefficients for levels `(n+1, n, n−1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeWeights {
    pub lhs: [f64; 3],
    pub rhs: [f64; 3],
}

pub fn scheme_weights(delta: f64, mu: f64) -> SchemeWeights {
    SchemeWeights {
        lhs: [delta + 0.5, -2.0 * delta, delta - 0.5],
        rhs: [delta + mu, 1.0 - delta - 2.0 * mu, mu],
    }
}

/// Backward Euler weights used for the first step of every scheme.
pub fn bdf1_weights() -> SchemeWeights {
    SchemeWeights {
        lhs: [1.0, -1.0, 0.0],
        rhs: [1.0, 0.0, 0.0],
    }
}

/// Integrates `y' = λ y` from `t = 0` to `t_end` with the given scheme,
/// starting from `y(0) = y0` and `y(Δt) = y1`. Returns `y(t_end)`.
pub fn integrate_linear_ode(
    scheme: SchemeSpec,
    lambda: f64,
    y0: f64,
    y1: f64,
    dt: f64,
    t_end: f64,
) -> f64 {
    let steps = (t_end / dt).round() as usize;
    let w = scheme.weights();
    let (mut prev, mut cur) = (y0, y1);
    for _ in 1..steps {
        let rhs = lambda * (w.rhs[1] * cur + w.rhs[2] * prev) - (w.lhs[1] * cur + w.lhs[2] * prev) / dt;
        let next = rhs / (w.lhs[0] / dt - lambda * w.rhs[0]);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_weights() {
        let w = scheme_weights(1.0, 0.0);
        assert_eq!(w.lhs, [1.5, -2.0, 0.5]);
        assert_eq!(w.rhs, [1.0, 0.0, 0.0]);
        let w = scheme_weights(1.0, 1.0);
        assert_eq!(w.lhs, [1.5, -2.0, 0.5]);
        assert_eq!(w.rhs, [2.0, -2.0, 1.0]);
        let w = scheme_weights(0.5, 0.0);
        assert_eq!(w.lhs, [1.0, -1.0, 0.0]);
        assert_eq!(w.rhs, [0.5, 0.5, 0.0]);
    }

    #[test]
    fn presets_map_to_parameters() {
        assert_eq!(SchemeSpec::BDF2, SchemeSpec::TwoStep { delta: 1.0, mu: 0.0 });
        assert_eq!(SchemeSpec::SBDF2, SchemeSpec::TwoStep { delta: 1.0, mu: 1.0 });
        assert_eq!(SchemeSpec::CN2, SchemeSpec::TwoStep { delta: 0.5, mu: 0.0 });
    }

    #[test]
    fn weights_are_consistent_on_grid() {
        for i in 0..10 {
            for j in 0..10 {
                let (d, m) = (i as f64 / 9.0, j as f64 / 9.0);
                let w = scheme_weights(d, m);
                assert!(w.lhs.iter().sum::<f64>().abs() < 1e-15);
                assert!((w.rhs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(SchemeSpec::parse("BDF2").unwrap(), SchemeSpec::BDF2);
        assert_eq!(SchemeSpec::parse("silf2:0.6").unwrap(), SchemeSpec::silf2(0.6));
        assert!(SchemeSpec::parse("silf2:0").is_err());
        assert!(SchemeSpec::parse("rk4").is_err());
        assert!(SchemeSpec::TwoStep { delta: 1.2, mu: 0.0 }.validate().is_err());
        assert_eq!(SchemeSpec::silf2(1.0).to_string(), "SILF2");
        assert_eq!(SchemeSpec::CN2.to_string(), "CN2");
    }

    fn observed_order(scheme: SchemeSpec) -> f64 {
        let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&dt: &f64| {
                let y = integrate_linear_ode(scheme, -1.0, 1.0, (-dt).exp(), dt, 2.0);
                (y - (-2.0f64).exp()).abs()
            })
            .collect();
        (errs[2] / errs[3]).log2()
    }

    #[test]
    fn second_order_on_decay() {
        for s in [
            SchemeSpec::BDF2,
            SchemeSpec::SBDF2,
            SchemeSpec::CN2,
            SchemeSpec::TwoStep { delta: 0.75, mu: 0.25 },
            SchemeSpec::silf2(0.6),
            SchemeSpec::silf2(1.0),
        ] {
            let p = observed_order(s);
            assert!((p - 2.0).abs() < 0.05, "{s}: order {p}");
        }
    }
}
