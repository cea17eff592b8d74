//! Quantum-reference-frame unitaries.
//!
//! The frame unitary `U` maps the bare spin component `s_x` onto the relative
//! spin `n̂·s = U s_x U†`. In the 2D case `U = exp(−iφ(s_z − c))`; in 3D
//! `U = exp(−iφ(s_z − c)) · exp(−i(θ − π/2) s_y)`, where `c = 1/2` for
//! half-integer spin and `0` otherwise. The shift `c` keeps `U` single-valued
//! in φ.
//!
//! [`pure_gauge_potential`] differentiates any frame numerically and serves as
//! the oracle the closed-form potentials in [`crate::gauge_field`] are
//! checked against.

use std::f64::consts::FRAC_PI_2;

use crate::gauge_field::Point3;
use crate::spin_algebra::{exp_hermitian, OperatorMatrix, SpinQuantum, SpinTriple, MATRIX_TOL};
use crate::{Error, Result, C64};

/// Minimum sinθ accepted near the z-axis.
pub const AXIS_EPSILON: f64 = 1e-6;
/// Minimum radius accepted near the origin.
pub const R_EPSILON: f64 = 1e-9;
/// Default central-difference step; truncation error is O(step²).
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Polar and azimuthal angle of the reference direction. φ is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub theta: f64,
    pub phi: f64,
}

impl Angles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in [0, pi] and phi be finite (theta={theta}, phi={phi})"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// In-plane direction, θ = π/2.
    pub fn planar(phi: f64) -> Self {
        Self { theta: FRAC_PI_2, phi }
    }

    pub fn unit_vector(&self, kind: FrameKind) -> [f64; 3] {
        match kind {
            FrameKind::TwoD => [self.phi.cos(), self.phi.sin(), 0.0],
            FrameKind::ThreeD => {
                let st = self.theta.sin();
                [st * self.phi.cos(), st * self.phi.sin(), self.theta.cos()]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameKind {
    TwoD,
    ThreeD,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameUnitary {
    pub u: OperatorMatrix,
    pub kind: FrameKind,
    pub spin: SpinQuantum,
    pub half_shift: bool,
}

/// n̂·s with n̂ = (cos φ, sin φ, 0) in 2D or the full spherical direction in 3D.
pub fn relative_spin_op(angles: &Angles, spins: &SpinTriple, kind: FrameKind) -> OperatorMatrix {
    spins.dot(angles.unit_vector(kind))
}

/// Generator of the azimuthal frame rotation, s_z − c.
pub fn frame_generator(spins: &SpinTriple) -> OperatorMatrix {
    let c = spins.quantum.half_shift();
    &spins.sz - &OperatorMatrix::identity(spins.dim()).scale(c)
}

pub fn frame_unitary_2d(phi: f64, spins: &SpinTriple) -> FrameUnitary {
    let u = exp_hermitian(&frame_generator(spins), phi).expect("generator is Hermitian");
    FrameUnitary {
        u,
        kind: FrameKind::TwoD,
        spin: spins.quantum,
        half_shift: spins.quantum.is_half_integer(),
    }
}

pub fn frame_unitary_3d(angles: &Angles, spins: &SpinTriple) -> FrameUnitary {
    let azimuthal = frame_unitary_2d(angles.phi, spins).u;
    let polar = exp_hermitian(&spins.sy, angles.theta - FRAC_PI_2).expect("s_y is Hermitian");
    FrameUnitary {
        u: &azimuthal * &polar,
        kind: FrameKind::ThreeD,
        spin: spins.quantum,
        half_shift: spins.quantum.is_half_integer(),
    }
}

pub fn frame_unitary(kind: FrameKind, angles: &Angles, spins: &SpinTriple) -> FrameUnitary {
    match kind {
        FrameKind::TwoD => frame_unitary_2d(angles.phi, spins),
        FrameKind::ThreeD => frame_unitary_3d(angles, spins),
    }
}

/// Relative-frame counterpart of `op`: U op U†.
///
/// `conjugate(s_x)` is the relative spin n̂·s, `conjugate(s_z)` in 2D is s_z.
pub fn conjugate(op: &OperatorMatrix, frame: &FrameUnitary) -> Result<OperatorMatrix> {
    if op.dim() != frame.u.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.u.dim(),
            found: op.dim(),
        });
    }
    Ok(&(&frame.u * op) * &frame.u.adjoint())
}

/// Rejects points near the z-axis or the origin.
pub fn check_valid_point(point: &Point3) -> Result<()> {
    let r = point.r();
    if !(r > R_EPSILON) {
        return Err(Error::Singularity(format!(
            "point {point} is within {R_EPSILON:e} of the origin"
        )));
    }
    let sin_theta = point.rho() / r;
    if !(sin_theta > AXIS_EPSILON) {
        return Err(Error::Singularity(format!(
            "point {point} has sin(theta) = {sin_theta:e} <= {AXIS_EPSILON:e} (z-axis)"
        )));
    }
    Ok(())
}

/// A_μ = i U† ∂_μ U by central differences, Cartesian components.
///
/// With this sign the transformed kinetic momentum is p − A and the
/// vanishing field strength is ∂_μA_ν − ∂_νA_μ − i[A_μ, A_ν].
pub fn pure_gauge_potential<F>(frame_builder: F, point: &Point3, step: f64) -> Result<[OperatorMatrix; 3]>
where
    F: Fn(&Angles) -> FrameUnitary,
{
    check_valid_point(point)?;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let u_dag = frame_builder(&point.angles()?).u.adjoint();
    let i_over_2h = C64::new(0.0, 1.0 / (2.0 * step));
    let mut out = Vec::with_capacity(3);
    for axis in 0..3 {
        let plus = point.shifted(axis, step);
        let minus = point.shifted(axis, -step);
        check_valid_point(&plus)?;
        check_valid_point(&minus)?;
        let du = &frame_builder(&plus.angles()?).u - &frame_builder(&minus.angles()?).u;
        out.push((&u_dag * &du).scale_complex(i_over_2h));
    }
    let [ax, ay, az]: [OperatorMatrix; 3] = out.try_into().expect("three components");
    Ok([ax, ay, az])
}

/// True when `frame.u` is unitary to the crate tolerance.
pub fn is_valid_frame(frame: &FrameUnitary) -> bool {
    frame.u.is_unitary(MATRIX_TOL)
}
