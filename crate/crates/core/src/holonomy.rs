//! Closed-path phases: line integrals of the effective potential,
//! path-ordered Wilson loops of the matrix potential, and the discrete
//! overlap-product Berry phase of the instantaneous relative-spin eigenstates.

use std::f64::consts::PI;

use crate::frame_transform::{relative_spin_op, Angles, FrameKind, AXIS_EPSILON};
use crate::gauge_field::{GaugeField, Point3, ScalarField3};
use crate::spin_algebra::{eigh, exp_hermitian, make_spin_operators, OperatorMatrix, SpinQuantum, SpinState};
use crate::{wrap_angle, Error, Result, C64};

/// Overlaps below this magnitude are treated as a degeneracy crossing.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Which eigenvector of n̂·s is transported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Largest eigenvalue, m = +s.
    Plus,
    /// Smallest eigenvalue, m = −s.
    Minus,
}

impl Branch {
    pub fn projection(&self, spin: SpinQuantum) -> f64 {
        match self {
            Branch::Plus => spin.s(),
            Branch::Minus => -spin.s(),
        }
    }

    pub fn sign(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(Error::InvalidArgument(format!("unknown branch '{other}'"))),
        }
    }
}

/// Closed curve in 3-space.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopPath {
    /// Circle of latitude at polar angle `theta` on the sphere of `radius`,
    /// traversed `winding` times with increasing φ (negative: decreasing).
    Circle { radius: f64, theta: f64, winding: i64 },
    /// Closed polygon; the last vertex must repeat the first.
    Piecewise { vertices: Vec<Point3> },
}

impl LoopPath {
    pub fn circle(radius: f64, theta: f64, winding: i64) -> Result<Self> {
        let path = LoopPath::Circle { radius, theta, winding };
        path.validate()?;
        Ok(path)
    }

    pub fn piecewise(vertices: Vec<Point3>) -> Result<Self> {
        let path = LoopPath::Piecewise { vertices };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LoopPath::Circle { radius, theta, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
                }
                if !(0.0..=PI).contains(theta) {
                    return Err(Error::InvalidArgument(format!("theta {theta} outside [0, pi]")));
                }
                if !(theta.sin() > AXIS_EPSILON) {
                    return Err(Error::Singularity(format!(
                        "circle at theta = {theta} touches the z-axis"
                    )));
                }
                Ok(())
            }
            LoopPath::Piecewise { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidArgument(
                        "piecewise loop needs at least 3 vertices".into(),
                    ));
                }
                let first = vertices[0].as_array();
                let last = vertices[vertices.len() - 1].as_array();
                if first.iter().zip(last).any(|(a, b)| (a - b).abs() > 1e-12) {
                    return Err(Error::InvalidArgument("piecewise loop is not closed".into()));
                }
                Ok(())
            }
        }
    }

    /// Ordered sample points x_0 … x_N with x_N = x_0 (N = `samples` for circles).
    pub fn discretize(&self, samples: usize) -> Vec<Point3> {
        match self {
            LoopPath::Circle { radius, theta, winding } => {
                let span = 2.0 * PI * *winding as f64;
                (0..=samples)
                    .map(|k| {
                        if k == samples {
                            Point3::from_spherical(*radius, *theta, 0.0)
                        } else {
                            Point3::from_spherical(*radius, *theta, span * k as f64 / samples as f64)
                        }
                    })
                    .collect()
            }
            LoopPath::Piecewise { vertices } => {
                let lengths: Vec<f64> = vertices.windows(2).map(|w| distance(&w[0], &w[1])).collect();
                let total: f64 = lengths.iter().sum();
                let mut pts = Vec::with_capacity(samples + vertices.len());
                for (w, len) in vertices.windows(2).zip(&lengths) {
                    let m = ((samples as f64 * len / total).round() as usize).max(1);
                    for j in 0..m {
                        pts.push(lerp(&w[0], &w[1], j as f64 / m as f64));
                    }
                }
                pts.push(vertices[0]);
                pts
            }
        }
    }

    fn is_trivial(&self) -> bool {
        matches!(self, LoopPath::Circle { winding: 0, .. })
    }
}

fn distance(a: &Point3, b: &Point3) -> f64 {
    Point3::new(b.x - a.x, b.y - a.y, b.z - a.z).r()
}

fn lerp(a: &Point3, b: &Point3, t: f64) -> Point3 {
    Point3::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z))
}

/// An accumulated phase together with its reduction into (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseResult {
    pub raw: f64,
    pub principal: f64,
    pub samples: usize,
}

impl PhaseResult {
    pub fn new(raw: f64, samples: usize) -> Self {
        Self {
            raw,
            principal: wrap_angle(raw),
            samples,
        }
    }
}

/// Trapezoid-rule ∮ A·dl of a real vector field.
pub fn line_integral_scalar(field: &ScalarField3, path: &LoopPath, samples: usize) -> Result<PhaseResult> {
    if samples < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 samples, got {samples}"
        )));
    }
    path.validate()?;
    if path.is_trivial() {
        return Ok(PhaseResult::new(0.0, samples));
    }
    let raw = match path {
        LoopPath::Circle { radius, theta, winding } => {
            // Periodic trapezoid rule in the path parameter t ∈ [0, 1).
            let span = 2.0 * PI * *winding as f64;
            let rho = radius * theta.sin();
            let mut sum = 0.0;
            for k in 0..samples {
                let phi = span * k as f64 / samples as f64;
                let a = field.eval(&Point3::from_spherical(*radius, *theta, phi))?;
                let (sp, cp) = phi.sin_cos();
                sum += (-a[0] * sp + a[1] * cp) * rho * span;
            }
            sum / samples as f64
        }
        LoopPath::Piecewise { .. } => {
            let pts = path.discretize(samples);
            let mut sum = 0.0;
            for w in pts.windows(2) {
                let d = [w[1].x - w[0].x, w[1].y - w[0].y, w[1].z - w[0].z];
                let a0 = field.eval(&w[0])?;
                let a1 = field.eval(&w[1])?;
                sum += 0.5 * (0..3).map(|i| (a0[i] + a1[i]) * d[i]).sum::<f64>();
            }
            sum
        }
    };
    Ok(PhaseResult::new(raw, samples))
}

/// Path-ordered product Π exp(i A(x_k)·Δx_k), later points to the left.
///
/// For a pure gauge A = iU†∂U this approximates U†(x_N) U(x_0), with an
/// error that is first order in the segment length.
pub fn wilson_loop(field: &GaugeField, path: &LoopPath, samples: usize) -> Result<OperatorMatrix> {
    if samples < 256 {
        return Err(Error::InvalidArgument(format!(
            "need at least 256 samples, got {samples}"
        )));
    }
    path.validate()?;
    let mut w = OperatorMatrix::identity(field.dim);
    if path.is_trivial() {
        return Ok(w);
    }
    let pts = path.discretize(samples);
    for seg in pts.windows(2) {
        let dx = [seg[1].x - seg[0].x, seg[1].y - seg[0].y, seg[1].z - seg[0].z];
        let generator = field.contract(&seg[0], dx)?;
        let step = exp_hermitian(&generator, -1.0)?;
        w = &step * &w;
    }
    Ok(w)
}

/// Rotates the largest-magnitude component (lowest index on ties) to real positive.
pub fn fix_phase(state: &SpinState) -> SpinState {
    let mags: Vec<f64> = state.0.iter().map(|z| z.norm()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let idx = mags.iter().position(|&m| m >= max - 1e-12).unwrap_or(0);
    let z = state.0[idx];
    if z.norm() == 0.0 {
        return state.clone();
    }
    SpinState(state.0.map(|a| a * z.conj() / z.norm()))
}

/// Eigenvector of n̂(θ, φ)·s for the requested branch, phase-fixed.
pub fn instantaneous_eigenstate(phi: f64, theta: f64, branch: Branch, spin: SpinQuantum) -> Result<SpinState> {
    let raw = if spin == SpinQuantum::HALF {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        match branch {
            Branch::Plus => SpinState::new(vec![C64::new(c, 0.0), C64::from_polar(s, phi)])?,
            Branch::Minus => SpinState::new(vec![C64::from_polar(-s, -phi), C64::new(c, 0.0)])?,
        }
    } else {
        let spins = make_spin_operators(spin);
        let angles = Angles { theta, phi };
        let (_, vecs) = eigh(&relative_spin_op(&angles, &spins, FrameKind::ThreeD))?;
        match branch {
            Branch::Plus => vecs[0].clone(),
            Branch::Minus => vecs[vecs.len() - 1].clone(),
        }
    };
    Ok(fix_phase(&raw))
}

/// γ = −Σ arg⟨u_k|u_{k+1}⟩ over a closed loop of states (the last links back
/// to the first). Each segment contributes a value in (−π, π].
pub fn berry_phase_from_states(states: &[SpinState]) -> Result<PhaseResult> {
    let n = states.len();
    let mut raw = 0.0;
    for k in 0..n {
        let overlap = states[k].inner(&states[(k + 1) % n]);
        let magnitude = overlap.norm();
        if magnitude < DEGENERACY_TOL {
            return Err(Error::Degeneracy { index: k, magnitude });
        }
        raw -= overlap.arg();
    }
    Ok(PhaseResult::new(raw, n))
}

/// Overlap-product Berry phase of the transported eigenstate around the
/// circle of latitude θ, winding `winding` times.
pub fn discrete_berry_phase(
    theta: f64,
    winding: i64,
    branch: Branch,
    spin: SpinQuantum,
    samples: usize,
) -> Result<PhaseResult> {
    if samples < 64 {
        return Err(Error::InvalidArgument(format!(
            "need at least 64 samples, got {samples}"
        )));
    }
    let span = 2.0 * PI * winding as f64;
    let states = (0..samples)
        .map(|k| instantaneous_eigenstate(span * k as f64 / samples as f64, theta, branch, spin))
        .collect::<Result<Vec<_>>>()?;
    berry_phase_from_states(&states)
}

/// Double-valued spin-1/2 eigenstate (e^{−iφ/2}|↑⟩ ± e^{iφ/2}|↓⟩)/√2.
pub fn double_valued_state(phi: f64, branch: Branch) -> SpinState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    SpinState(nalgebra::DVector::from_vec(vec![
        C64::from_polar(r, -phi / 2.0),
        C64::from_polar(r, phi / 2.0) * branch.sign(),
    ]))
}

/// Single-valued spin-1/2 eigenstate (e^{−iφ}|↑⟩ ± |↓⟩)/√2.
pub fn single_valued_state(phi: f64, branch: Branch) -> SpinState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    SpinState(nalgebra::DVector::from_vec(vec![
        C64::from_polar(r, -phi),
        C64::new(r * branch.sign(), 0.0),
    ]))
}

/// ⟨ψ(φ)|ψ(φ + 2π)⟩ for the double-valued states; equals −1.
pub fn double_valuedness_check(phi: f64, branch: Branch) -> C64 {
    double_valued_state(phi, branch).inner(&double_valued_state(phi + 2.0 * PI, branch))
}

/// ⟨Ψ(φ)|Ψ(φ + 2π)⟩ for the single-valued states; equals +1.
pub fn single_valuedness_check(phi: f64, branch: Branch) -> C64 {
    single_valued_state(phi, branch).inner(&single_valued_state(phi + 2.0 * PI, branch))
}

/// Solid angle 2π(1 − cos θ) enclosed by the circle of latitude θ.
pub fn solid_angle(theta: f64) -> f64 {
    2.0 * PI * (1.0 - theta.cos())
}

/// Closed-form loop phase of the effective potential for projection `m`:
/// 2πn (m cosθ − c). For spin 1/2 and m = +1/2 this is −nπ(1 − cosθ).
pub fn analytic_loop_phase(theta: f64, winding: i64, m: f64, spin: SpinQuantum) -> f64 {
    2.0 * PI * winding as f64 * (m * theta.cos() - spin.half_shift())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge_field::{a2d, a3d, effective_a};
    use crate::phase_distance;
    use crate::spin_algebra::make_spin_operators;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn phase_result_principal() {
        let p = PhaseResult::new(-PI, 10);
        assert!((p.principal - PI).abs() < 1e-15);
        let p = PhaseResult::new(-2.0 * PI, 10);
        assert!(p.principal.abs() < 1e-15);
    }

    #[test]
    fn line_integral_examples() {
        let eff = effective_a(FrameKind::ThreeD, 0.5, SpinQuantum::HALF).unwrap();
        let r = line_integral_scalar(&eff, &LoopPath::circle(1.0, FRAC_PI_2, 1).unwrap(), 4096).unwrap();
        assert!((r.raw + PI).abs() < 1e-9);
        let r = line_integral_scalar(&eff, &LoopPath::circle(1.0, PI / 3.0, 1).unwrap(), 4096).unwrap();
        assert!((r.raw + FRAC_PI_2).abs() < 1e-9);
        let r = line_integral_scalar(&eff, &LoopPath::circle(1.0, PI / 3.0, 0).unwrap(), 4096).unwrap();
        assert_eq!(r.raw, 0.0);
        assert!(line_integral_scalar(&eff, &LoopPath::circle(1.0, 1.0, 1).unwrap(), 8).is_err());
    }

    #[test]
    fn line_integral_piecewise_square() {
        // A square around the z-axis picks up the same topological phase.
        let eff = effective_a(FrameKind::TwoD, 0.5, SpinQuantum::HALF).unwrap();
        let v = |x, y| Point3::new(x, y, 0.0);
        let sq = LoopPath::piecewise(vec![
            v(1.0, -1.0),
            v(1.0, 1.0),
            v(-1.0, 1.0),
            v(-1.0, -1.0),
            v(1.0, -1.0),
        ])
        .unwrap();
        let r = line_integral_scalar(&eff, &sq, 40_000).unwrap();
        assert!((r.raw + PI).abs() < 1e-6, "{}", r.raw);
        // not enclosing the axis: zero
        let off = LoopPath::piecewise(vec![v(2.0, 0.0), v(3.0, 0.0), v(3.0, 1.0), v(2.0, 1.0), v(2.0, 0.0)]).unwrap();
        assert!(line_integral_scalar(&eff, &off, 4000).unwrap().raw.abs() < 1e-6);
    }

    #[test]
    fn path_validation() {
        assert!(matches!(LoopPath::circle(1.0, 0.0, 1), Err(Error::Singularity(_))));
        assert!(LoopPath::circle(-1.0, 1.0, 1).is_err());
        let v = |x, y| Point3::new(x, y, 0.0);
        assert!(LoopPath::piecewise(vec![v(1.0, 0.0), v(0.0, 1.0), v(-1.0, 0.0)]).is_err());
    }

    #[test]
    fn piecewise_through_axis_is_rejected() {
        let eff = effective_a(FrameKind::ThreeD, 0.5, SpinQuantum::HALF).unwrap();
        let p = |x, y, z| Point3::new(x, y, z);
        let path = LoopPath::piecewise(vec![
            p(0.0, 0.0, 1.0),
            p(1.0, 0.0, 0.0),
            p(0.0, 1.0, 0.0),
            p(0.0, 0.0, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            line_integral_scalar(&eff, &path, 64),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn wilson_loop_examples() {
        let s = make_spin_operators(SpinQuantum::HALF);
        let id = OperatorMatrix::identity(2);
        let w = wilson_loop(&a2d(&s), &LoopPath::circle(1.0, FRAC_PI_2, 1).unwrap(), 8192).unwrap();
        assert!(w.max_abs_diff(&id) < 1e-3);
        let w = wilson_loop(&a3d(&s), &LoopPath::circle(1.0, PI / 3.0, 1).unwrap(), 8192).unwrap();
        assert!(w.max_abs_diff(&id) < 1e-3);
        let w = wilson_loop(&a3d(&s), &LoopPath::circle(1.0, PI / 3.0, 0).unwrap(), 8192).unwrap();
        assert_eq!(w, id);
        assert!(wilson_loop(&a3d(&s), &LoopPath::circle(1.0, 1.0, 1).unwrap(), 100).is_err());
    }

    #[test]
    fn eigenstate_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u = instantaneous_eigenstate(0.0, FRAC_PI_2, Branch::Plus, SpinQuantum::HALF).unwrap();
        assert!((u.0[0] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((u.0[1] - C64::new(r, 0.0)).norm() < 1e-15);
        let u = instantaneous_eigenstate(PI, FRAC_PI_2, Branch::Plus, SpinQuantum::HALF).unwrap();
        let lit = SpinState(nalgebra::DVector::from_vec(vec![
            C64::from_polar(r, -FRAC_PI_2),
            C64::from_polar(r, FRAC_PI_2),
        ]));
        assert!((u.inner(&lit).norm() - 1.0).abs() < 1e-14);
        let up = instantaneous_eigenstate(0.7, 0.0, Branch::Plus, SpinQuantum::HALF).unwrap();
        assert!((up.inner(&SpinState::up_z()) - C64::new(1.0, 0.0)).norm() < 1e-15);
        let dn = instantaneous_eigenstate(0.7, 0.0, Branch::Minus, SpinQuantum::HALF).unwrap();
        assert!((dn.inner(&SpinState::down_z()) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigenstates_solve_eigen_equation() {
        for twice in 1..=3 {
            let spin = SpinQuantum::from_twice(twice);
            let s = make_spin_operators(spin);
            for branch in [Branch::Plus, Branch::Minus] {
                let (theta, phi) = (1.1, -0.6);
                let u = instantaneous_eigenstate(phi, theta, branch, spin).unwrap();
                let op = relative_spin_op(&Angles { theta, phi }, &s, FrameKind::ThreeD);
                let lhs = op.apply(&u).unwrap();
                let m = branch.projection(spin);
                assert!((lhs.0 - u.0.map(|z| z * m)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn berry_phase_examples() {
        let b = discrete_berry_phase(FRAC_PI_2, 1, Branch::Plus, SpinQuantum::HALF, 8192).unwrap();
        assert!((b.raw + PI).abs() < 1e-9);
        assert!(phase_distance(b.principal, PI) < 1e-9);
        let b = discrete_berry_phase(PI / 3.0, 1, Branch::Plus, SpinQuantum::HALF, 8192).unwrap();
        assert!(phase_distance(b.raw, -FRAC_PI_2) < 1e-4);
        let b = discrete_berry_phase(FRAC_PI_2, 2, Branch::Plus, SpinQuantum::HALF, 8192).unwrap();
        assert!((b.raw + 2.0 * PI).abs() < 1e-9);
        assert!(b.principal.abs() < 1e-9);
        assert!(discrete_berry_phase(1.0, 1, Branch::Plus, SpinQuantum::HALF, 32).is_err());
    }

    #[test]
    fn berry_phase_higher_spin_is_minus_m_solid_angle() {
        for twice in 2..=3 {
            let spin = SpinQuantum::from_twice(twice);
            for branch in [Branch::Plus, Branch::Minus] {
                let theta = 0.9;
                let b = discrete_berry_phase(theta, 1, branch, spin, 4096).unwrap();
                let m = branch.projection(spin);
                assert!(phase_distance(b.raw, -m * solid_angle(theta)) < 1e-5);
                assert!(phase_distance(b.raw, analytic_loop_phase(theta, 1, m, spin)) < 1e-5);
            }
        }
    }

    #[test]
    fn degenerate_overlap_is_an_error() {
        let states = vec![SpinState::up_z(), SpinState::down_z()];
        assert!(matches!(
            berry_phase_from_states(&states),
            Err(Error::Degeneracy { .. })
        ));
    }

    #[test]
    fn spinor_sign_structure() {
        for (phi, branch) in [(0.0, Branch::Plus), (1.3, Branch::Minus), (-2.2, Branch::Plus)] {
            assert!((double_valuedness_check(phi, branch) - C64::new(-1.0, 0.0)).norm() < 1e-12);
            assert!((single_valuedness_check(phi, branch) - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_valued_state_is_rotated_up_x() {
        // e^{−iφ(s_z + 1/2)}|↑x⟩ = (e^{−iφ}|↑⟩ + |↓⟩)/√2
        let s = make_spin_operators(SpinQuantum::HALF);
        let gen = &s.sz + &OperatorMatrix::identity(2).scale(0.5);
        for phi in [0.0, 0.4, 3.0] {
            let psi = exp_hermitian(&gen, phi).unwrap().apply(&SpinState::up_x()).unwrap();
            assert!((psi.0 - single_valued_state(phi, Branch::Plus).0).norm() < 1e-14);
        }
    }

    #[test]
    fn solid_angle_examples() {
        assert!((solid_angle(FRAC_PI_2) - 2.0 * PI).abs() < 1e-15);
        assert_eq!(solid_angle(0.0), 0.0);
        assert!((solid_angle(PI) - 4.0 * PI).abs() < 1e-15);
    }
}
