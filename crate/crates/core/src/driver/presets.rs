//! Built-in scenarios. The shipped TOML files under `configs/` are these
//! presets written out.

use crate::analytic::GreenAmptParams;
use crate::constitutive::{DispersionParams, SoilParams};
use crate::fem::LinearSolver;
use crate::flow::FlowOptions;
use crate::mesh::{Diagonal, LShape, TAG_BOTTOM, TAG_LEFT, TAG_RIGHT, TAG_TOP};

use super::config::*;

/// Facet tag given to the top strip in the salt and fertigation scenarios.
pub const TAG_SOURCE: i32 = 5;

fn green_ampt(reference: Reference, n: usize, dt: f64, scheme: &str) -> ScenarioConfig {
    let p = GreenAmptParams::default();
    let soil = p.soil().expect("tabulated Green-Ampt soil is valid");
    let (name, flow_bc) = match reference {
        Reference::GreenAmptTest1 => (
            "green_ampt_test1",
            vec![
                FlowBcSpec::Function {
                    tag: TAG_TOP,
                    id: BoundaryFunction::GreenAmptTest1Top,
                },
                FlowBcSpec::Head {
                    tag: TAG_BOTTOM,
                    value: p.psi_d,
                },
                FlowBcSpec::Head {
                    tag: TAG_RIGHT,
                    value: p.psi_d,
                },
                FlowBcSpec::Head {
                    tag: TAG_LEFT,
                    value: p.psi_d,
                },
            ],
        ),
        Reference::GreenAmptTest2 => (
            "green_ampt_test2",
            vec![
                FlowBcSpec::Function {
                    tag: TAG_TOP,
                    id: BoundaryFunction::GreenAmptTest2Top,
                },
                FlowBcSpec::Head {
                    tag: TAG_BOTTOM,
                    value: p.psi_d,
                },
                FlowBcSpec::NoFlux { tag: TAG_RIGHT },
                FlowBcSpec::NoFlux { tag: TAG_LEFT },
            ],
        ),
    };
    ScenarioConfig {
        name: name.to_owned(),
        scheme: scheme.to_owned(),
        dt,
        t_final: 5.0,
        mesh: MeshSpec::Structured {
            nx: n,
            nz: n,
            lx: p.length,
            lz: p.length,
            diagonal: Diagonal::Forward,
            lshape: None,
            strips: Vec::new(),
        },
        soil,
        soil_regions: Vec::new(),
        flow: FlowOptions::default(),
        flow_bc,
        initial: InitialCondition::UniformHead { value: p.psi_d },
        solute: None,
        output: OutputSpec::default(),
        green_ampt: Some(p),
        reference: Some(reference),
        fertigation: None,
    }
}

/// Green–Ampt Test 1: all sides dry except the wetted top. Units cm, days.
pub fn green_ampt_test1(n: usize, dt: f64, scheme: &str) -> ScenarioConfig {
    green_ampt(Reference::GreenAmptTest1, n, dt, scheme)
}

/// Green–Ampt Test 2: cosine top profile with no-flux sides.
pub fn green_ampt_test2(n: usize, dt: f64, scheme: &str) -> ScenarioConfig {
    green_ampt(Reference::GreenAmptTest2, n, dt, scheme)
}

/// Heterogeneous 100 cm square with an L-shaped inclusion of three times
/// the conductivity. Units cm, seconds.
pub fn lshape(n: usize, dt: f64) -> ScenarioConfig {
    let soil = SoilParams::van_genuchten(0.5, 0.12, 6.944e-5, 0.02, 3.0).expect("valid soil");
    ScenarioConfig {
        name: "lshape".to_owned(),
        scheme: "silf2".to_owned(),
        dt,
        t_final: 48.0 * 3600.0,
        mesh: MeshSpec::Structured {
            nx: n,
            nz: n,
            lx: 100.0,
            lz: 100.0,
            diagonal: Diagonal::Forward,
            lshape: Some(LShape::default()),
            strips: Vec::new(),
        },
        soil,
        soil_regions: vec![RegionSoil {
            region: 1,
            soil: soil.with_ks(3.0 * soil.ks),
        }],
        // the ~6k-node direct factorization dominates otherwise
        flow: FlowOptions {
            solver: LinearSolver::BiCgStab {
                tol: 1e-11,
                max_iter: 5000,
            },
            ..FlowOptions::default()
        },
        flow_bc: vec![
            FlowBcSpec::Head { tag: TAG_TOP, value: 0.0 },
            FlowBcSpec::Head {
                tag: TAG_BOTTOM,
                value: 0.0,
            },
            FlowBcSpec::NoFlux { tag: TAG_LEFT },
            FlowBcSpec::NoFlux { tag: TAG_RIGHT },
        ],
        initial: InitialCondition::Hydrostatic { datum: 0.0 },
        solute: None,
        output: OutputSpec::default(),
        green_ampt: None,
        reference: None,
        fertigation: None,
    }
}

/// Salt infiltration from a 10 cm strip at the top centre of a 2 m square
/// loam. Units m, days. `n` should be a multiple of 40 so the strip is
/// resolved by whole cells.
pub fn salt_transport(n: usize, dt: f64) -> ScenarioConfig {
    let soil = SoilParams::van_genuchten(0.43, 0.078, 0.25, 3.6, 1.56).expect("valid soil");
    ScenarioConfig {
        name: "salt".to_owned(),
        scheme: "silf2".to_owned(),
        dt,
        t_final: 1.0,
        mesh: MeshSpec::Structured {
            nx: n,
            nz: n,
            lx: 2.0,
            lz: 2.0,
            diagonal: Diagonal::MirroredX,
            lshape: None,
            strips: vec![Strip {
                tag: TAG_TOP,
                new_tag: TAG_SOURCE,
                x_min: 0.95,
                x_max: 1.05,
            }],
        },
        soil,
        soil_regions: Vec::new(),
        flow: FlowOptions::default(),
        flow_bc: vec![
            FlowBcSpec::Infiltration {
                tag: TAG_SOURCE,
                rate: 0.1,
            },
            FlowBcSpec::FreeDrainage { tag: TAG_BOTTOM },
            FlowBcSpec::NoFlux { tag: TAG_TOP },
            FlowBcSpec::NoFlux { tag: TAG_LEFT },
            FlowBcSpec::NoFlux { tag: TAG_RIGHT },
        ],
        initial: InitialCondition::UniformHead { value: -0.13 },
        solute: Some(SoluteSpec {
            dispersion: DispersionParams::new(0.5, 0.1, 0.0).expect("valid dispersion"),
            initial: 0.1,
            bc: vec![
                SoluteBcSpec::Inflow {
                    tag: TAG_SOURCE,
                    concentration: 1.0,
                    water_rate: Some(0.1),
                    window: None,
                },
                SoluteBcSpec::FreeOutflow { tag: TAG_BOTTOM },
            ],
        }),
        output: OutputSpec::default(),
        green_ampt: None,
        reference: None,
        fertigation: None,
    }
}

/// Axisymmetric drip fertigation column, 41 cm radius by 40 cm depth, fed
/// from a ponded entry zone of radius 5.6 cm. Units cm, hours.
/// `c0` is the initial nitrate concentration and `c_a` the applied one.
pub fn fertigation(n: usize, dt: f64, c0: f64, c_a: f64) -> ScenarioConfig {
    let soil = SoilParams::van_genuchten(0.41, 0.047, 1.96, 0.015, 1.48).expect("valid soil");
    let duration = 8.0;
    ScenarioConfig {
        name: "fertigation".to_owned(),
        scheme: "silf2".to_owned(),
        dt,
        t_final: duration,
        mesh: MeshSpec::Structured {
            nx: n,
            nz: n,
            lx: 41.0,
            lz: 40.0,
            diagonal: Diagonal::Forward,
            lshape: None,
            strips: vec![Strip {
                tag: TAG_TOP,
                new_tag: TAG_SOURCE,
                x_min: 0.0,
                x_max: 5.6,
            }],
        },
        soil,
        soil_regions: Vec::new(),
        flow: FlowOptions {
            axisymmetric: true,
            ..FlowOptions::default()
        },
        flow_bc: vec![
            FlowBcSpec::Head {
                tag: TAG_SOURCE,
                value: 0.15,
            },
            FlowBcSpec::NoFlux { tag: TAG_TOP },
            FlowBcSpec::NoFlux { tag: TAG_LEFT },
            FlowBcSpec::NoFlux { tag: TAG_RIGHT },
            FlowBcSpec::FreeDrainage { tag: TAG_BOTTOM },
        ],
        initial: InitialCondition::UniformTheta { value: 0.13 },
        solute: Some(SoluteSpec {
            // 0.0015 cm²/min
            dispersion: DispersionParams::new(0.32, 0.0032, 0.09).expect("valid dispersion"),
            initial: c0,
            bc: vec![
                SoluteBcSpec::Concentration {
                    tag: TAG_SOURCE,
                    value: c_a,
                    window: None,
                },
                SoluteBcSpec::FreeOutflow { tag: TAG_BOTTOM },
            ],
        }),
        output: OutputSpec::default(),
        green_ampt: None,
        reference: None,
        fertigation: Some(FertigationSpec {
            duration,
            concentration: c_a,
            tag: TAG_SOURCE,
        }),
    }
}
