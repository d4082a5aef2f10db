use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde_json::json;

use crate::analytic::{exact_head_test1, exact_head_test2, GreenAmptParams};
use crate::flow::{FlowBc, FlowBoundary, FlowSolver, FlowState, SoilMap, SolveStats};
use crate::mesh::{classify_lshape_region, generate_structured_with, load_gmsh, load_mesh, Mesh};
use crate::output::{vtk_string, write_atomic, CsvTable};
use crate::transport::{SoluteBc, SoluteBoundary, TransportSolver, TransportState};
use crate::verification::{
    l2_error_interpolated, mass_balance_error_fields, mass_total, report_table, solute_mass, ErrorReport,
};

use super::config::*;
use super::ScenarioError;

/// Run-time settings that are not part of the scenario itself.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Where VTK, CSV and log files go. Nothing is written when unset.
    pub out_dir: Option<PathBuf>,
    /// Overrides `output.snapshots` from the config.
    pub snapshots: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub psi: Vec<f64>,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub c: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassSample {
    pub time: f64,
    pub water: f64,
    /// Water mass of the interpolated reference solution.
    pub exact: Option<f64>,
    /// Mass balance error in percent against the reference.
    pub mbe: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub mesh: Mesh,
    pub flow: FlowState,
    pub solute: Option<TransportState>,
    /// Errors against the analytic reference, when the scenario has one.
    pub report: Option<ErrorReport>,
    pub flow_stats: SolveStats,
    pub transport_solves: usize,
    pub cpu_s: f64,
    pub mass: Vec<MassSample>,
    pub snapshots: Vec<Snapshot>,
    /// Largest element Péclet number seen at the snapshot and final levels.
    pub max_peclet: Option<f64>,
    /// Smallest and largest nodal saturation seen over all steps.
    pub s_range: [f64; 2],
    pub files: Vec<PathBuf>,
}

pub const METRICS_HEADER: [&str; 12] = [
    "scheme",
    "h",
    "dt",
    "steps",
    "linear_solves",
    "picard_iterations",
    "l2_psi",
    "l2_S",
    "water_mass",
    "solute_mass",
    "max_peclet",
    "cpu_s",
];

impl RunArtifacts {
    pub fn metrics_table(&self, scheme: &str, dt: f64) -> CsvTable {
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let mut t = CsvTable::new(METRICS_HEADER);
        t.push(vec![
            scheme.to_owned(),
            format!("{}", self.mesh.h()),
            format!("{dt}"),
            format!("{}", self.flow_stats.steps),
            format!("{}", self.flow_stats.linear_solves),
            format!("{}", self.flow_stats.picard_iterations),
            opt(self.report.as_ref().map(|r| r.l2_psi)),
            opt(self.report.as_ref().map(|r| r.l2_s)),
            format!("{}", mass_total(&self.mesh, &self.flow.theta)),
            opt(self.solute.as_ref().map(|c| solute_mass(&self.mesh, &c.theta, &c.c))),
            opt(self.max_peclet),
            format!("{:.6}", self.cpu_s),
        ]);
        t
    }

    pub fn mass_table(&self) -> CsvTable {
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let mut t = CsvTable::new(["time", "water_mass", "exact_mass", "mbe_percent"]);
        for m in &self.mass {
            t.push(vec![format!("{}", m.time), format!("{}", m.water), opt(m.exact), opt(m.mbe)]);
        }
        t
    }
}

/// Builds the mesh, applying region classification and strip retagging.
pub fn build_mesh(cfg: &ScenarioConfig) -> Result<Mesh, ScenarioError> {
    let mut mesh = match &cfg.mesh {
        MeshSpec::Structured {
            nx,
            nz,
            lx,
            lz,
            diagonal,
            ..
        } => generate_structured_with(*nx, *nz, *lx, *lz, *diagonal)?,
        MeshSpec::File { path, .. } => {
            if path.extension().is_some_and(|e| e == "msh") {
                load_gmsh(path)?
            } else {
                load_mesh(path)?
            }
        }
    };
    if let Some(shape) = cfg.mesh.lshape() {
        mesh = mesh.with_regions(|c| classify_lshape_region(shape, c));
    }
    for s in cfg.mesh.strips() {
        if !mesh.has_tag(s.tag) {
            return Err(unknown_tag("mesh.strips", s.tag));
        }
        mesh = mesh.retag_facets(s.tag, s.new_tag, |m| s.x_min <= m[0] && m[0] <= s.x_max);
    }
    Ok(mesh)
}

fn unknown_tag(field: &str, tag: i32) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.to_owned(),
        reason: format!("boundary tag {tag} does not occur in the mesh"),
    }
}

fn check_tags(cfg: &ScenarioConfig, mesh: &Mesh) -> Result<(), ScenarioError> {
    if let Some(bc) = cfg.flow_bc.iter().find(|bc| !mesh.has_tag(bc.tag())) {
        return Err(unknown_tag("flow_bc", bc.tag()));
    }
    if let Some(sol) = &cfg.solute {
        if let Some(bc) = sol.bc.iter().find(|bc| !mesh.has_tag(bc.tag())) {
            return Err(unknown_tag("solute.bc", bc.tag()));
        }
    }
    Ok(())
}

fn flow_boundary(cfg: &ScenarioConfig) -> FlowBoundary {
    let p = cfg.green_ampt_params();
    cfg.flow_bc.iter().fold(FlowBoundary::new(), |b, bc| {
        let fbc = match *bc {
            FlowBcSpec::Head { value, .. } => FlowBc::constant_head(value),
            FlowBcSpec::Function { id, .. } => match id {
                BoundaryFunction::GreenAmptTest1Top => FlowBc::head(move |x, _| p.top_head_test1(x[0])),
                BoundaryFunction::GreenAmptTest2Top => FlowBc::head(move |x, _| p.top_head_test2(x[0])),
            },
            FlowBcSpec::NoFlux { .. } => FlowBc::NoFlux,
            FlowBcSpec::FreeDrainage { .. } => FlowBc::FreeDrainage,
            FlowBcSpec::Infiltration { rate, .. } => FlowBc::Infiltration(rate),
        };
        b.with(bc.tag(), fbc)
    })
}

fn windowed(value: f64, window: Option<Window>) -> crate::flow::BoundaryFn {
    Arc::new(move |_, t| match window {
        Some(w) if !w.contains(t) => 0.0,
        _ => value,
    })
}

fn solute_boundary(spec: &SoluteSpec) -> SoluteBoundary {
    spec.bc.iter().fold(SoluteBoundary::new(), |b, bc| {
        let sbc = match *bc {
            SoluteBcSpec::Concentration { value, window, .. } => SoluteBc::Concentration(windowed(value, window)),
            SoluteBcSpec::Inflow {
                concentration,
                water_rate,
                window,
                ..
            } => SoluteBc::Inflow {
                water_rate,
                concentration: windowed(concentration, window),
            },
            SoluteBcSpec::NoFlux { .. } => SoluteBc::NoFlux,
            SoluteBcSpec::FreeOutflow { .. } => SoluteBc::FreeOutflow,
        };
        b.with(bc.tag(), sbc)
    })
}

fn soil_map(cfg: &ScenarioConfig) -> SoilMap {
    SoilMap {
        default: cfg.soil,
        regions: cfg.soil_regions.iter().map(|r| (r.region, r.soil)).collect(),
    }
}

/// Analytic pressure head at `(point, t)` for scenarios with a reference.
fn reference_head(reference: Reference, p: GreenAmptParams) -> impl Fn([f64; 2], f64) -> f64 {
    move |x, t| match reference {
        Reference::GreenAmptTest1 => exact_head_test1(x[0], x[1], t, &p),
        Reference::GreenAmptTest2 => exact_head_test2(x[0], x[1], t, &p),
    }
}

fn step_at(time: f64, dt: f64, steps: usize) -> usize {
    ((time / dt).round().max(0.0) as usize).min(steps)
}

fn snapshot_steps(cfg: &ScenarioConfig, count: usize, steps: usize) -> BTreeSet<usize> {
    let mut set: BTreeSet<usize> = (1..=count).map(|k| (k * steps + count / 2) / count).collect();
    set.extend(cfg.output.snapshot_times.iter().map(|&t| step_at(t, cfg.dt, steps)));
    set
}

struct Recorder<'a> {
    name: String,
    out_dir: Option<&'a Path>,
    log: Vec<String>,
    files: Vec<PathBuf>,
}

impl Recorder<'_> {
    fn event(&mut self, value: serde_json::Value) {
        self.log.push(value.to_string());
    }

    fn write(&mut self, file: &str, bytes: &[u8]) -> Result<(), ScenarioError> {
        if let Some(dir) = self.out_dir {
            let path = dir.join(format!("{}_{file}", self.name));
            write_atomic(&path, bytes)?;
            self.files.push(path);
        }
        Ok(())
    }
}

/// Runs one scenario: BDF1 startup from the interpolated initial state,
/// then the configured scheme. Flow is advanced before transport in every
/// step.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunArtifacts, ScenarioError> {
    cfg.validate()?;
    let scheme = cfg.scheme_spec()?;
    let mesh = build_mesh(cfg)?;
    check_tags(cfg, &mesh)?;
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut rec = Recorder {
        name: cfg.name.clone(),
        out_dir: opts.out_dir.as_deref(),
        log: Vec::new(),
        files: Vec::new(),
    };
    let started = Instant::now();

    let mut flow = FlowSolver::new(&mesh, &soil_map(cfg), &flow_boundary(cfg), cfg.flow)?;
    let psi0: Vec<f64> = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &p)| match cfg.initial {
            InitialCondition::UniformHead { value } => value,
            InitialCondition::Hydrostatic { datum } => datum - p[1],
            InitialCondition::UniformTheta { value } => flow.node_soil(i).head_from_theta(value),
        })
        .collect();
    let state0 = flow.state_from_head(psi0, 0.0);

    let mut transport = match &cfg.solute {
        Some(spec) => {
            let theta_s = (0..mesh.num_elements()).map(|e| flow.element_soil(e).theta_s).collect();
            Some(TransportSolver::new(
                &mesh,
                theta_s,
                spec.dispersion,
                &solute_boundary(spec),
                cfg.flow.solver,
                cfg.flow.axisymmetric,
            )?)
        }
        None => None,
    };
    let c0 = match (&transport, &cfg.solute) {
        (Some(tr), Some(spec)) => Some(tr.initial_state(|_| spec.initial, &state0)),
        _ => None,
    };

    let steps = cfg.steps();
    let count = opts.snapshots.unwrap_or(cfg.output.snapshots);
    let snap_at = snapshot_steps(cfg, count, steps);
    let mass_at: BTreeSet<usize> = cfg.output.mass_times.iter().map(|&t| step_at(t, cfg.dt, steps)).collect();
    let exact = cfg.reference.map(|r| reference_head(r, cfg.green_ampt_params()));

    rec.event(json!({
        "event": "start",
        "name": cfg.name,
        "scheme": scheme.to_string(),
        "dt": cfg.dt,
        "steps": steps,
        "nodes": mesh.num_nodes(),
        "elements": mesh.num_elements(),
    }));

    let theta0 = state0.theta.clone();
    let mut snapshots = Vec::new();
    let mut mass = Vec::new();
    let mut max_peclet: Option<f64> = None;
    let mut s_range = [f64::INFINITY, f64::NEG_INFINITY];

    let mut observe = |step: usize,
                       state: &FlowState,
                       c: Option<&TransportState>,
                       flow: &FlowSolver<'_>,
                       transport: Option<&TransportSolver<'_>>,
                       rec: &mut Recorder<'_>|
     -> Result<(), ScenarioError> {
        for &v in &state.s {
            s_range = [s_range[0].min(v), s_range[1].max(v)];
        }
        if mass_at.contains(&step) {
            let water = mass_total(&mesh, &state.theta);
            let (exact_mass, mbe) = match &exact {
                Some(f) => {
                    let theta_ex: Vec<f64> = mesh
                        .nodes()
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| flow.node_soil(i).theta(f(p, state.time)))
                        .collect();
                    let mbe = if step == 0 {
                        None
                    } else {
                        mass_balance_error_fields(&mesh, &state.theta, &theta_ex, &theta0).ok()
                    };
                    (Some(mass_total(&mesh, &theta_ex)), mbe)
                }
                None => (None, None),
            };
            mass.push(MassSample {
                time: state.time,
                water,
                exact: exact_mass,
                mbe,
            });
        }
        if snap_at.contains(&step) {
            if let Some(tr) = transport {
                let pe = tr.max_peclet(state)?;
                max_peclet = Some(max_peclet.map_or(pe, |m: f64| m.max(pe)));
            }
            let snap = Snapshot {
                step,
                time: state.time,
                psi: state.psi.clone(),
                s: state.s.clone(),
                theta: state.theta.clone(),
                c: c.map(|c| c.c.clone()),
            };
            if rec.out_dir.is_some() {
                let mut fields: Vec<(&str, &[f64])> =
                    vec![("psi", &snap.psi), ("S", &snap.s), ("theta", &snap.theta)];
                if let Some(c) = &snap.c {
                    fields.push(("c", c));
                }
                let title = format!("{} t={}", rec.name, snap.time);
                let vtk = vtk_string(&mesh, &title, &fields, &[("q", &state.q)]);
                rec.write(&format!("{step:06}.vtk"), vtk.as_bytes())?;
            }
            rec.event(json!({"event": "snapshot", "step": step, "time": snap.time}));
            snapshots.push(snap);
        }
        Ok(())
    };

    observe(0, &state0, c0.as_ref(), &flow, transport.as_ref(), &mut rec)?;

    let flow_err = |step: usize| move |source| ScenarioError::FlowStep { step, source };
    let tr_err = |step: usize| move |source| ScenarioError::TransportStep { step, source };

    let mut prev = state0;
    let mut cur = flow.step(scheme, &prev, None, cfg.dt).map_err(flow_err(1))?;
    let (mut c_prev, mut c_cur) = match (&mut transport, c0) {
        (Some(tr), Some(c0)) => {
            let c1 = tr.step(scheme, [Some(&cur), Some(&prev), None], &c0, None).map_err(tr_err(1))?;
            (Some(c0), Some(c1))
        }
        _ => (None, None),
    };
    observe(1, &cur, c_cur.as_ref(), &flow, transport.as_ref(), &mut rec)?;

    for step in 2..=steps {
        let next = flow.step(scheme, &cur, Some(&prev), cfg.dt).map_err(flow_err(step))?;
        if let (Some(tr), Some(cp), Some(cc)) = (&mut transport, &c_prev, &c_cur) {
            let cn = tr
                .step(scheme, [Some(&next), Some(&cur), Some(&prev)], cc, Some(cp))
                .map_err(tr_err(step))?;
            c_prev = c_cur.replace(cn);
        }
        prev = std::mem::replace(&mut cur, next);
        observe(step, &cur, c_cur.as_ref(), &flow, transport.as_ref(), &mut rec)?;
    }
    if let Some(tr) = &transport {
        let pe = tr.max_peclet(&cur)?;
        max_peclet = Some(max_peclet.map_or(pe, |m| m.max(pe)));
    }
    let cpu_s = started.elapsed().as_secs_f64();

    let report = match &exact {
        Some(f) => {
            let t = cur.time;
            // Green-Ampt references are homogeneous
            let soil = cfg.soil;
            let l2_psi = l2_error_interpolated(&mesh, &cur.psi, |p| f(p, t))?;
            let l2_s = l2_error_interpolated(&mesh, &cur.s, |p| soil.saturation(f(p, t)))?;
            Some(ErrorReport {
                scheme: scheme.to_string(),
                h: mesh.h(),
                dt: cfg.dt,
                l2_psi,
                l2_s,
                order: None,
                cpu_s,
            })
        }
        None => None,
    };

    let artifacts = RunArtifacts {
        flow_stats: flow.stats(),
        transport_solves: transport.as_ref().map_or(0, |t| t.linear_solves()),
        flow: cur,
        solute: c_cur,
        report,
        cpu_s,
        mass,
        snapshots,
        max_peclet,
        s_range,
        files: Vec::new(),
        mesh: mesh.clone(),
    };

    rec.event(json!({
        "event": "finish",
        "time": artifacts.flow.time,
        "steps": artifacts.flow_stats.steps,
        "linear_solves": artifacts.flow_stats.linear_solves,
        "picard_iterations": artifacts.flow_stats.picard_iterations,
        "transport_solves": artifacts.transport_solves,
        "l2_psi": artifacts.report.as_ref().map(|r| r.l2_psi),
        "cpu_s": cpu_s,
    }));
    rec.write(
        "metrics.csv",
        artifacts.metrics_table(&scheme.to_string(), cfg.dt).render().as_bytes(),
    )?;
    if !artifacts.mass.is_empty() {
        rec.write("mass.csv", artifacts.mass_table().render().as_bytes())?;
    }
    let mut log = rec.log.join("\n");
    log.push('\n');
    rec.write("log.jsonl", log.as_bytes())?;
    Ok(RunArtifacts {
        files: rec.files,
        ..artifacts
    })
}

/// One refinement level of a convergence sweep on a structured mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepLevel {
    pub nx: usize,
    pub nz: usize,
    pub dt: f64,
}

impl std::str::FromStr for SweepLevel {
    type Err = ScenarioError;

    /// Parses `NXxNZ@DT` or `N@DT`, e.g. `25x25@0.01`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScenarioError::Invalid {
            field: "levels".to_owned(),
            reason: format!("expected NXxNZ@DT, got `{s}`"),
        };
        let (dims, dt) = s.split_once('@').ok_or_else(bad)?;
        let dt: f64 = dt.trim().parse().map_err(|_| bad())?;
        let (nx, nz) = match dims.split_once('x') {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let n = dims.trim().parse().map_err(|_| bad())?;
                (n, n)
            }
        };
        Ok(SweepLevel { nx, nz, dt })
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// One report per level, with the order against the previous level.
    pub reports: Vec<ErrorReport>,
    pub table: CsvTable,
    pub runs: Vec<RunArtifacts>,
}

/// Refinement factor between consecutive sweep levels.
pub const SWEEP_REFINEMENT: f64 = 2.0;

fn level_config(base: &ScenarioConfig, level: &SweepLevel, index: usize) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = base.clone();
    match &mut cfg.mesh {
        MeshSpec::Structured { nx, nz, .. } => {
            *nx = level.nx;
            *nz = level.nz;
        }
        MeshSpec::File { .. } => {
            return Err(ScenarioError::Invalid {
                field: "mesh".to_owned(),
                reason: "convergence sweeps need a structured mesh".to_owned(),
            })
        }
    }
    cfg.dt = level.dt;
    cfg.name = format!("{}_level{index}", base.name);
    Ok(cfg)
}

/// Runs every level and tabulates errors and observed orders. Levels run
/// on separate threads when `parallel` is set, which makes the CPU
/// column meaningless for timing comparisons.
pub fn run_convergence_sweep(
    base: &ScenarioConfig,
    levels: &[SweepLevel],
    opts: &RunOptions,
    parallel: bool,
) -> Result<SweepResult, ScenarioError> {
    if levels.len() < 2 {
        return Err(ScenarioError::Invalid {
            field: "levels".to_owned(),
            reason: format!("a sweep needs at least 2 levels, got {}", levels.len()),
        });
    }
    if base.reference.is_none() {
        return Err(ScenarioError::Invalid {
            field: "reference".to_owned(),
            reason: "a convergence sweep needs an analytic reference".to_owned(),
        });
    }
    let configs = levels
        .iter()
        .enumerate()
        .map(|(i, l)| level_config(base, l, i))
        .collect::<Result<Vec<_>, _>>()?;
    let annotate = |level: usize| {
        move |e: ScenarioError| ScenarioError::Level {
            level,
            source: Box::new(e),
        }
    };
    let runs: Vec<RunArtifacts> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = configs
                .iter()
                .map(|cfg| s.spawn(move || run_scenario(cfg, opts)))
                .collect();
            handles
                .into_iter()
                .enumerate()
                .map(|(i, h)| h.join().expect("sweep worker panicked").map_err(annotate(i)))
                .collect::<Result<Vec<_>, _>>()
        })?
    } else {
        configs
            .iter()
            .enumerate()
            .map(|(i, cfg)| run_scenario(cfg, opts).map_err(annotate(i)))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut reports: Vec<ErrorReport> = runs
        .iter()
        .map(|r| r.report.clone().expect("runs with a reference produce a report"))
        .collect();
    let table = report_table(&mut reports, SWEEP_REFINEMENT);
    if let Some(dir) = &opts.out_dir {
        write_atomic(dir.join(format!("{}_sweep.csv", base.name)), table.render().as_bytes())?;
    }
    Ok(SweepResult { reports, table, runs })
}

/// Timing of the nitrate pulse within the irrigation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Solute for the first half, then water.
    A,
    /// Water for a quarter, solute for a half, water for the last quarter.
    B,
    /// Water for an eighth, solute for a half, water for the rest.
    C,
}

impl Strategy {
    pub fn window(self, duration: f64) -> Window {
        let start = match self {
            Strategy::A => 0.0,
            Strategy::B => duration / 4.0,
            Strategy::C => duration / 8.0,
        };
        Window {
            start,
            end: start + duration / 2.0,
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Strategy::A),
            "B" => Ok(Strategy::B),
            "C" => Ok(Strategy::C),
            _ => Err(ScenarioError::Invalid {
                field: "strategy".to_owned(),
                reason: format!("expected A, B or C, got `{s}`"),
            }),
        }
    }
}

/// Time at which strategy snapshots are taken, as a fraction of the
/// irrigation duration (6 h of 8 h).
pub const STRATEGY_SNAPSHOT_FRACTION: f64 = 0.75;

/// Applies the strategy's solute window to the config's fertigation tag.
pub fn strategy_config(strategy: Strategy, config: &ScenarioConfig) -> Result<ScenarioConfig, ScenarioError> {
    let fert = config.fertigation.ok_or_else(|| ScenarioError::Invalid {
        field: "fertigation".to_owned(),
        reason: "strategy runs need a [fertigation] section".to_owned(),
    })?;
    let mut cfg = config.clone();
    let window = strategy.window(fert.duration);
    let solute = cfg.solute.as_mut().ok_or_else(|| ScenarioError::Invalid {
        field: "solute".to_owned(),
        reason: "strategy runs need a [solute] section".to_owned(),
    })?;
    solute.bc.retain(|bc| bc.tag() != fert.tag);
    solute.bc.insert(
        0,
        SoluteBcSpec::Concentration {
            tag: fert.tag,
            value: fert.concentration,
            window: Some(window),
        },
    );
    cfg.output.snapshot_times.push(STRATEGY_SNAPSHOT_FRACTION * fert.duration);
    cfg.name = format!("{}_{strategy:?}", config.name);
    Ok(cfg)
}

pub fn run_fertigation_strategy(
    strategy: Strategy,
    config: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<RunArtifacts, ScenarioError> {
    run_scenario(&strategy_config(strategy, config)?, opts)
}
