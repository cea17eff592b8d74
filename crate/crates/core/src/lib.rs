//! Measurement-induced topological phases.
//!
//! Measuring a spin along the direction of a reference particle couples the
//! two through the measuring device. Transforming to the reference particle's
//! frame turns that back-reaction into an induced vector potential: a
//! semi-fluxon in two dimensions and a monopole in three. This crate provides
//! the pieces needed to compute and cross-check the resulting phases:
//!
//! - [`spin_algebra`]: dense spin-s operators, Hermitian exponentials.
//! - [`frame_transform`]: reference-frame unitaries and the pure-gauge oracle.
//! - [`gauge_field`]: closed-form potentials, field strength, monopole field.
//! - [`holonomy`]: line integrals, Wilson loops, discrete Berry phases.
//! - [`dynamics`]: the driven measurement Hamiltonian and pointer readout.
//!
//! Units are dimensionless with ħ = 1.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod frame_transform;
pub mod gauge_field;
pub mod holonomy;
pub mod spin_algebra;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Reduce an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut y = x.rem_euclid(two_pi);
    if y > PI {
        y -= two_pi;
    }
    y
}

/// Absolute distance between two phases modulo 2π, in [0, π].
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}
