//! One function per experiment. Each returns a [`Report`]; nothing here
//! touches the filesystem.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use topophase::dynamics::{
    adiabatic_sweep, auto_steps, geometric_phase_from_dynamics, q_for_ratio, run_measurement,
    transverse_averaging_check, DriveProtocol, MeasurementSchedule, PointerGrid, ADIABATIC_OVERLAP,
};
use topophase::frame_transform::{
    check_valid_point, frame_unitary_2d, frame_unitary_3d, pure_gauge_potential, Angles, FrameKind, DEFAULT_FD_STEP,
};
use topophase::gauge_field::{a2d, a3d, a3d_reversed, effective_a, field_strength, max_field_strength_norm, Point3};
use topophase::holonomy::{analytic_loop_phase, discrete_berry_phase, line_integral_scalar, LoopPath};
use topophase::spin_algebra::{
    eigh, expectation, make_spin_operators, OperatorMatrix, SpinQuantum, SpinState, SpinTriple,
};
use topophase::{phase_distance, wrap_angle};

use crate::config::{Experiment, FieldChoice, RunConfig, ScheduleChoice};
use crate::error::CliError;

pub const TOL_FIELD_STRENGTH: f64 = 1e-6;
pub const TOL_ORACLE: f64 = 1e-6;
pub const TOL_LINE: f64 = 1e-8;
pub const TOL_BERRY: f64 = 1e-4;
pub const TOL_POINTER: f64 = 1e-8;

pub const HEADER_GAUGE_CHECK: &[&str] = &["x", "y", "z", "max_F_norm", "oracle_dev"];
pub const HEADER_HOLONOMY: &[&str] = &[
    "theta",
    "winding",
    "branch",
    "gamma_line",
    "gamma_berry",
    "gamma_analytic",
    "err_line",
    "err_berry",
];
pub const HEADER_BERRY: &[&str] = &[
    "theta",
    "winding",
    "branch",
    "samples",
    "gamma_raw",
    "gamma_principal",
    "gamma_analytic",
    "abs_err",
];
pub const HEADER_DYNAMICS: &[&str] = &[
    "theta",
    "winding",
    "branch",
    "ratio",
    "steps",
    "gamma_raw",
    "gamma_principal",
    "dynamical_phase",
    "gamma_analytic",
    "abs_err",
    "overlap",
    "adiabatic",
    "mean_abs_sy",
    "mean_abs_sz",
];
pub const HEADER_POINTER: &[&str] = &["state", "axis", "shift", "expected", "abs_err"];
pub const HEADER_HISTOGRAM: &[&str] = &["state", "pointer", "probability"];
pub const HEADER_SWEEP: &[&str] = &[
    "ratio",
    "theta",
    "winding",
    "branch",
    "gamma_sim",
    "gamma_analytic",
    "abs_err",
    "overlap",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }
}

/// Everything an experiment produces, before serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    pub table: Table,
    /// Extra tables written next to the main CSV, keyed by file suffix.
    pub sidecars: Vec<(&'static str, Table)>,
    /// Per-row values that do not fit the fixed CSV header.
    pub row_details: Vec<Value>,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub flags: BTreeMap<&'static str, String>,
    pub extra: BTreeMap<&'static str, Value>,
    pub non_adiabatic_ratios: Vec<f64>,
    pub failures: Vec<String>,
}

impl Report {
    fn new(experiment: Experiment, header: &'static [&'static str]) -> Self {
        Self {
            experiment,
            table: Table::new(header),
            sidecars: Vec::new(),
            row_details: Vec::new(),
            tolerances: BTreeMap::new(),
            flags: BTreeMap::new(),
            extra: BTreeMap::new(),
            non_adiabatic_ratios: Vec::new(),
            failures: Vec::new(),
        }
    }
}

/// Shortest round-trip formatting, with −0 printed as 0.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn phase_json(raw: f64) -> Value {
    json!({ "raw": raw, "principal": wrap_angle(raw) })
}

pub fn run(experiment: Experiment, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate(experiment)?;
    match experiment {
        Experiment::GaugeCheck => gauge_check(cfg),
        Experiment::Holonomy => holonomy(cfg),
        Experiment::Berry => berry(cfg),
        Experiment::Dynamics => dynamics(cfg),
        Experiment::Pointer => pointer(cfg),
        Experiment::Sweep => sweep(cfg),
    }
}

fn spins_for(cfg: &RunConfig) -> SpinTriple {
    make_spin_operators(SpinQuantum::from_twice(cfg.spin_twice))
}

fn common_flags(report: &mut Report) {
    report.flags.insert(
        "three_d_potential",
        "closed-form 3D potential is iU^dagger grad U of the frame unitary; the transcription with the opposite overall sign is not pure gauge and is reported only as a diagnostic".into(),
    );
    report.flags.insert(
        "frame_factor_order",
        "3D frame unitary is exp(-i phi (s_z - c)) exp(-i (theta - pi/2) s_y); this order is the one that maps s_x onto n.s".into(),
    );
}

/// Seeded points with r in [0.5, 2] and sin(theta) > 0.3.
pub fn seeded_points(seed: u64, count: usize) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta_min = 0.3f64.asin();
    (0..count)
        .map(|_| {
            let r = rng.gen_range(0.5..2.0);
            let theta = rng.gen_range(theta_min..PI - theta_min);
            let phi = rng.gen_range(-PI..PI);
            Point3::from_spherical(r, theta, phi)
        })
        .collect()
}

fn max_dev(a: &[OperatorMatrix; 3], b: &[OperatorMatrix; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

fn gauge_check(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Experiment::GaugeCheck, HEADER_GAUGE_CHECK);
    common_flags(&mut report);
    report.tolerances.insert("max_F_norm", TOL_FIELD_STRENGTH);
    report.tolerances.insert("oracle_dev", TOL_ORACLE);
    let s = spins_for(cfg);
    let points = match &cfg.points {
        Some(list) => list.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect(),
        None => seeded_points(cfg.seed, cfg.point_count),
    };
    let field = match cfg.field {
        FieldChoice::TwoD => a2d(&s),
        FieldChoice::ThreeD => a3d(&s),
    };
    let reversed = a3d_reversed(&s);
    let mut worst_f = 0.0f64;
    let mut worst_dev = 0.0f64;
    let mut worst_reversed = 0.0f64;
    for p in &points {
        check_valid_point(p)?;
        let f = max_field_strength_norm(&field_strength(&field, p, cfg.fd_step)?);
        let oracle = match cfg.field {
            FieldChoice::TwoD => pure_gauge_potential(|a| frame_unitary_2d(a.phi, &s), p, DEFAULT_FD_STEP)?,
            FieldChoice::ThreeD => pure_gauge_potential(|a| frame_unitary_3d(a, &s), p, DEFAULT_FD_STEP)?,
        };
        let dev = max_dev(&field.eval(p)?, &oracle);
        if cfg.field == FieldChoice::ThreeD {
            worst_reversed = worst_reversed.max(max_dev(&reversed.eval(p)?, &oracle));
        }
        worst_f = worst_f.max(f);
        worst_dev = worst_dev.max(dev);
        report
            .table
            .rows
            .push(vec![num(p.x), num(p.y), num(p.z), num(f), num(dev)]);
    }
    if worst_f > TOL_FIELD_STRENGTH {
        report
            .failures
            .push(format!("max field strength {worst_f:e} exceeds {TOL_FIELD_STRENGTH:e}"));
    }
    if worst_dev > TOL_ORACLE {
        report
            .failures
            .push(format!("max oracle deviation {worst_dev:e} exceeds {TOL_ORACLE:e}"));
    }
    report.extra.insert("field", json!(field.label));
    report.extra.insert("fd_step", json!(cfg.fd_step));
    report.extra.insert("oracle_fd_step", json!(DEFAULT_FD_STEP));
    report.extra.insert("point_count", json!(points.len()));
    if cfg.field == FieldChoice::ThreeD {
        report
            .extra
            .insert("alternative_transcription_max_dev", json!(worst_reversed));
    }
    Ok(report)
}

fn holonomy(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Experiment::Holonomy, HEADER_HOLONOMY);
    report.tolerances.insert("err_line", TOL_LINE);
    report.tolerances.insert("err_berry", TOL_BERRY);
    report.flags.insert(
        "phase_comparison",
        "phases are compared modulo 2pi; CSV columns hold raw (unreduced) values".into(),
    );
    let spin = SpinQuantum::from_twice(cfg.spin_twice);
    for theta in cfg.thetas() {
        for n in cfg.windings() {
            for branch in cfg.branches() {
                let m = branch.projection(spin);
                let field = effective_a(FrameKind::ThreeD, m, spin)?;
                let path = LoopPath::circle(cfg.radius, theta, n)?;
                let line = line_integral_scalar(&field, &path, cfg.samples)?;
                let berry = discrete_berry_phase(theta, n, branch, spin, cfg.samples)?;
                let analytic = analytic_loop_phase(theta, n, m, spin);
                let err_line = phase_distance(line.raw, analytic);
                let err_berry = phase_distance(berry.raw, analytic);
                if err_line > TOL_LINE || err_berry > TOL_BERRY {
                    report.failures.push(format!(
                        "theta={theta} n={n} {}: err_line {err_line:e}, err_berry {err_berry:e}",
                        branch.label()
                    ));
                }
                report.table.rows.push(vec![
                    num(theta),
                    n.to_string(),
                    branch.label().into(),
                    num(line.raw),
                    num(berry.raw),
                    num(analytic),
                    num(err_line),
                    num(err_berry),
                ]);
                report.row_details.push(json!({
                    "gamma_line": phase_json(line.raw),
                    "gamma_berry": phase_json(berry.raw),
                    "gamma_analytic": phase_json(analytic),
                    "samples": cfg.samples,
                }));
            }
        }
    }
    Ok(report)
}

fn berry(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Experiment::Berry, HEADER_BERRY);
    report.tolerances.insert("abs_err", TOL_BERRY);
    let spin = SpinQuantum::from_twice(cfg.spin_twice);
    for theta in cfg.thetas() {
        for n in cfg.windings() {
            for branch in cfg.branches() {
                let analytic = analytic_loop_phase(theta, n, branch.projection(spin), spin);
                let mut errs = Vec::new();
                for samples in [cfg.samples, 2 * cfg.samples] {
                    let phase = discrete_berry_phase(theta, n, branch, spin, samples)?;
                    let err = phase_distance(phase.raw, analytic);
                    errs.push(err);
                    report.table.rows.push(vec![
                        num(theta),
                        n.to_string(),
                        branch.label().into(),
                        samples.to_string(),
                        num(phase.raw),
                        num(phase.principal),
                        num(analytic),
                        num(err),
                    ]);
                }
                if errs[0] > TOL_BERRY {
                    report.failures.push(format!(
                        "theta={theta} n={n} {}: error {:e} at {} samples",
                        branch.label(),
                        errs[0],
                        cfg.samples
                    ));
                }
                let order = if errs[1] > 0.0 {
                    (errs[0] / errs[1]).log2()
                } else {
                    f64::INFINITY
                };
                report.row_details.push(json!({
                    "theta": theta,
                    "winding": n,
                    "branch": branch.label(),
                    "observed_order": if order.is_finite() { json!(order) } else { Value::Null },
                }));
            }
        }
    }
    Ok(report)
}

fn protocol_for(cfg: &RunConfig, theta: f64, n: i64) -> Result<DriveProtocol, CliError> {
    Ok(DriveProtocol::new(theta, n, cfg.t_loop)?.with_free_spin(cfg.h_s))
}

fn dynamics_flags(report: &mut Report) {
    report.flags.insert(
        "adiabaticity_ratio",
        "ratio is |q| g T_loop / (2 pi |n|) with g = 1/T_loop".into(),
    );
    report.flags.insert(
        "geometric_phase",
        "arg<psi(0)|psi(T)> plus the midpoint-rule dynamical phase, compared modulo 2pi".into(),
    );
    report.tolerances.insert("adiabatic_overlap", ADIABATIC_OVERLAP);
}

fn dynamics(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Experiment::Dynamics, HEADER_DYNAMICS);
    dynamics_flags(&mut report);
    let s = spins_for(cfg);
    let spin = s.quantum;
    for theta in cfg.thetas() {
        for n in cfg.windings() {
            let protocol = protocol_for(cfg, theta, n)?;
            let q = q_for_ratio(cfg.ratio, &protocol);
            let steps = cfg
                .steps
                .unwrap_or_else(|| auto_steps(&s, q, &protocol, cfg.step_phase));
            for branch in cfg.branches() {
                let run = geometric_phase_from_dynamics(&s, &protocol, q, branch, steps)?;
                let (sy, sz) = transverse_averaging_check(&s, &protocol, q, branch, steps)?;
                let analytic = analytic_loop_phase(theta, n, branch.projection(spin), spin);
                let err = phase_distance(run.phase.raw, analytic);
                if !run.adiabatic {
                    report.non_adiabatic_ratios.push(cfg.ratio);
                }
                report.table.rows.push(vec![
                    num(theta),
                    n.to_string(),
                    branch.label().into(),
                    num(cfg.ratio),
                    steps.to_string(),
                    num(run.phase.raw),
                    num(run.phase.principal),
                    num(run.dynamical_phase),
                    num(analytic),
                    num(err),
                    num(run.overlap),
                    run.adiabatic.to_string(),
                    num(sy),
                    num(sz),
                ]);
            }
        }
    }
    report.non_adiabatic_ratios.dedup();
    report.extra.insert("t_loop", json!(cfg.t_loop));
    report.extra.insert("h_s", json!(cfg.h_s));
    Ok(report)
}

fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Experiment::Sweep, HEADER_SWEEP);
    dynamics_flags(&mut report);
    let s = spins_for(cfg);
    for theta in cfg.thetas() {
        for n in cfg.windings() {
            let protocol = protocol_for(cfg, theta, n)?;
            for branch in cfg.branches() {
                let rows = adiabatic_sweep(&s, &protocol, branch, &cfg.ratios, cfg.step_phase)?;
                let adiabatic_errs: Vec<f64> = rows.iter().filter(|r| r.adiabatic).map(|r| r.abs_err).collect();
                if adiabatic_errs.windows(2).any(|w| w[1] >= w[0]) {
                    report.failures.push(format!(
                        "theta={theta} n={n} {}: error does not decrease with ratio",
                        branch.label()
                    ));
                }
                for r in rows {
                    if !r.adiabatic {
                        report.non_adiabatic_ratios.push(r.ratio);
                    }
                    report.table.rows.push(vec![
                        num(r.ratio),
                        num(theta),
                        n.to_string(),
                        branch.label().into(),
                        num(r.gamma_sim.principal),
                        num(r.gamma_analytic),
                        num(r.abs_err),
                        num(r.overlap),
                    ]);
                    report.row_details.push(json!({
                        "gamma_sim": phase_json(r.gamma_sim.raw),
                        "gamma_analytic": phase_json(r.gamma_analytic),
                        "steps": r.steps,
                        "adiabatic": r.adiabatic,
                    }));
                }
            }
        }
    }
    report.non_adiabatic_ratios.sort_by(f64::total_cmp);
    report.non_adiabatic_ratios.dedup();
    report.extra.insert("t_loop", json!(cfg.t_loop));
    report.extra.insert("step_phase", json!(cfg.step_phase));
    Ok(report)
}

fn parse_state(label: &str, s: &SpinTriple, measured: &OperatorMatrix) -> Result<SpinState, CliError> {
    let dim = s.dim();
    match label {
        "up_z" => Ok(SpinState::basis(dim, 0)),
        "down_z" => Ok(SpinState::basis(dim, dim - 1)),
        "up_x" | "down_x" => {
            let (_, vectors) = eigh(&s.sx)?;
            Ok(if label == "up_x" {
                vectors[0].clone()
            } else {
                vectors[dim - 1].clone()
            })
        }
        other => {
            let k = other
                .strip_prefix("eigen:")
                .and_then(|k| k.parse::<usize>().ok())
                .ok_or_else(|| CliError::Config(format!("unknown pointer state '{other}'")))?;
            if k >= dim {
                return Err(CliError::Config(format!(
                    "eigenstate index {k} out of range for dimension {dim}"
                )));
            }
            Ok(eigh(measured)?.1[k].clone())
        }
    }
}

fn pointer(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report::new(Experiment::Pointer, HEADER_POINTER);
    report.tolerances.insert("abs_err", TOL_POINTER);
    report.flags.insert(
        "pointer_sign",
        "pointer reading is +i d/dq (minus the canonical momentum) so the shift equals +<n.s>".into(),
    );
    let pc = &cfg.pointer;
    let s = spins_for(cfg);
    let grid = PointerGrid::new(pc.n, pc.q_max, pc.dp_q)?;
    let schedule = match pc.schedule {
        ScheduleChoice::Impulsive => MeasurementSchedule::impulsive(),
        ScheduleChoice::Window => MeasurementSchedule::constant_window(pc.window)?,
    };
    let angles = Angles::new(pc.axis_theta.radians, pc.axis_phi.radians)?;
    let axis_label = |a: &crate::config::AngleValue| a.text.clone().unwrap_or_else(|| num(a.radians));
    let axis = format!("theta={};phi={}", axis_label(&pc.axis_theta), axis_label(&pc.axis_phi));
    let measured = s.dot(angles.unit_vector(FrameKind::ThreeD));
    let mut hist = Table::new(HEADER_HISTOGRAM);
    for label in &pc.states {
        let state = parse_state(label, &s, &measured)?;
        let expected = expectation(&state, &measured)?;
        let res = run_measurement(&s, &state, &grid, &schedule, &angles)?;
        let err = (res.pointer_shift - expected).abs();
        if err > TOL_POINTER {
            report.failures.push(format!(
                "state {label}: shift {} vs expected {expected}",
                res.pointer_shift
            ));
        }
        report.table.rows.push(vec![
            label.clone(),
            axis.clone(),
            num(res.pointer_shift),
            num(expected),
            num(err),
        ]);
        report.row_details.push(json!({
            "state": label,
            "peaks": topophase::dynamics::distribution_peaks(&res.pointer_distribution, 0.1),
            "max_norm_defect": res.max_norm_defect(),
        }));
        for (value, p) in &res.pointer_distribution {
            hist.rows.push(vec![label.clone(), num(*value), num(*p)]);
        }
    }
    report.sidecars.push(("hist", hist));
    report.extra.insert(
        "grid",
        json!({ "n": pc.n, "q_max": pc.q_max, "dp_q": pc.dp_q, "spacing": grid.spacing() }),
    );
    Ok(report)
}
