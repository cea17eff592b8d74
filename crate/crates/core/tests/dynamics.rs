use std::f64::consts::PI;

use topophase::dynamics::{
    adiabatic_sweep, auto_steps, geometric_phase_from_dynamics, q_for_ratio, transverse_averaging_check, DriveProtocol,
};
use topophase::frame_transform::FrameKind;
use topophase::gauge_field::effective_a;
use topophase::holonomy::{analytic_loop_phase, line_integral_scalar, Branch, LoopPath};
use topophase::phase_distance;
use topophase::spin_algebra::{make_spin_operators, SpinQuantum};

#[test]
fn transverse_components_average_out() {
    let s = make_spin_operators(SpinQuantum::HALF);
    let p = DriveProtocol::new(PI / 2.0, 1, 1.0).unwrap();
    let q3 = q_for_ratio(1e3, &p);
    let (sy3, sz3) = transverse_averaging_check(&s, &p, q3, Branch::Plus, auto_steps(&s, q3, &p, 0.05)).unwrap();
    assert!(sy3 <= 0.05 && sz3 <= 0.05, "{sy3} {sz3}");
    let q4 = q_for_ratio(1e4, &p);
    let (sy4, sz4) = transverse_averaging_check(&s, &p, q4, Branch::Plus, auto_steps(&s, q4, &p, 0.05)).unwrap();
    assert!(sy4 < sy3 && sz4 < sz3, "{sy4} {sz4}");
}

#[test]
fn minus_branch_and_higher_spin_follow_closed_form() {
    for (spin, branch) in [
        (SpinQuantum::HALF, Branch::Minus),
        (SpinQuantum::ONE, Branch::Plus),
        (SpinQuantum::THREE_HALVES, Branch::Plus),
    ] {
        let s = make_spin_operators(spin);
        let p = DriveProtocol::new(PI / 3.0, 1, 1.0).unwrap();
        let q = q_for_ratio(1e3, &p);
        let run = geometric_phase_from_dynamics(&s, &p, q, branch, auto_steps(&s, q, &p, 0.02)).unwrap();
        let analytic = analytic_loop_phase(PI / 3.0, 1, branch.projection(spin), spin);
        assert!(run.adiabatic);
        assert!(phase_distance(run.phase.raw, analytic) < 0.05, "s={spin} {branch:?}");
    }
}

#[test]
fn dynamical_route_agrees_with_line_integral() {
    let s = make_spin_operators(SpinQuantum::HALF);
    let p = DriveProtocol::new(2.0 * PI / 3.0, 1, 1.0).unwrap();
    let rows = adiabatic_sweep(&s, &p, Branch::Plus, &[1e3], 0.02).unwrap();
    let field = effective_a(FrameKind::ThreeD, 0.5, SpinQuantum::HALF).unwrap();
    let line = line_integral_scalar(&field, &LoopPath::circle(1.0, 2.0 * PI / 3.0, 1).unwrap(), 4096).unwrap();
    assert!(phase_distance(rows[0].gamma_sim.raw, line.raw) < 0.05 * line.raw.abs());
}

#[test]
fn low_ratio_is_flagged() {
    let s = make_spin_operators(SpinQuantum::HALF);
    let p = DriveProtocol::new(PI / 3.0, 1, 1.0).unwrap();
    let rows = adiabatic_sweep(&s, &p, Branch::Plus, &[1.5, 1e3], 0.02).unwrap();
    assert!(!rows[0].adiabatic);
    assert!(rows[1].adiabatic);
}
