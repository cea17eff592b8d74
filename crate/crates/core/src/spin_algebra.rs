//! Finite-dimensional spin-s operator algebra.
//!
//! All matrices are expressed in the s_z eigenbasis ordered by decreasing
//! magnetic quantum number, m = +s, s−1, …, −s.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, C64};

/// Entrywise tolerance used for the Hermitian/unitary checks.
pub const MATRIX_TOL: f64 = 1e-12;

/// Spin quantum number stored as 2s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinQuantum {
    twice_s: u32,
}

impl SpinQuantum {
    pub const HALF: SpinQuantum = SpinQuantum { twice_s: 1 };
    pub const ONE: SpinQuantum = SpinQuantum { twice_s: 2 };
    pub const THREE_HALVES: SpinQuantum = SpinQuantum { twice_s: 3 };

    pub fn from_twice(twice_s: u32) -> Self {
        Self { twice_s }
    }

    pub fn twice_s(&self) -> u32 {
        self.twice_s
    }

    pub fn s(&self) -> f64 {
        f64::from(self.twice_s) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn is_half_integer(&self) -> bool {
        self.twice_s % 2 == 1
    }

    /// The 1/2 subtracted from s_z in the frame generator; zero for integer spin.
    pub fn half_shift(&self) -> f64 {
        if self.is_half_integer() {
            0.5
        } else {
            0.0
        }
    }

    /// Magnetic quantum numbers in basis order, +s down to −s.
    pub fn m_values(&self) -> Vec<f64> {
        let s = self.s();
        (0..self.dim()).map(|i| s - i as f64).collect()
    }

    /// Whether `m` is one of the allowed projections (within 1e-9).
    pub fn contains_projection(&self, m: f64) -> bool {
        self.m_values().iter().any(|v| (v - m).abs() < 1e-9)
    }
}

impl fmt::Display for SpinQuantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_half_integer() {
            write!(f, "{}/2", self.twice_s)
        } else {
            write!(f, "{}", self.twice_s / 2)
        }
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(pub DMatrix<C64>);

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.0.is_square() && self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.adjoint().0 * &self.0;
        OperatorMatrix(prod).max_abs_diff(&Self::identity(self.dim())) <= tol
    }

    /// Largest |eigenvalue|; only meaningful for Hermitian input.
    pub fn spectral_radius_hermitian(&self) -> f64 {
        let eig = SymmetricEigen::new(self.0.clone());
        eig.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, state: &SpinState) -> Result<SpinState> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        Ok(SpinState(&self.0 * &state.0))
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(self.0 + rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-&self.0)
    }
}

/// Normalized spin state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState(pub DVector<C64>);

impl SpinState {
    /// Builds a state, normalizing the amplitudes.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let n = v.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::InvalidArgument("state has zero norm".into()));
        }
        Ok(Self(v / C64::new(n, 0.0)))
    }

    /// Basis state with magnetic quantum number index `index` (0 ↔ m = +s).
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn up_z() -> Self {
        Self::basis(2, 0)
    }

    pub fn down_z() -> Self {
        Self::basis(2, 1)
    }

    pub fn up_x() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self(DVector::from_vec(vec![a, a]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &SpinState) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn scale_phase(&self, phase: f64) -> Self {
        Self(&self.0 * C64::from_polar(1.0, phase))
    }
}

/// The three spin operators for a given spin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTriple {
    pub sx: OperatorMatrix,
    pub sy: OperatorMatrix,
    pub sz: OperatorMatrix,
    pub quantum: SpinQuantum,
}

impl SpinTriple {
    pub fn dim(&self) -> usize {
        self.quantum.dim()
    }

    pub fn components(&self) -> [&OperatorMatrix; 3] {
        [&self.sx, &self.sy, &self.sz]
    }

    /// n·s for an arbitrary (not necessarily unit) real vector.
    pub fn dot(&self, n: [f64; 3]) -> OperatorMatrix {
        OperatorMatrix(self.sx.0.map(|z| z * n[0]) + self.sy.0.map(|z| z * n[1]) + self.sz.0.map(|z| z * n[2]))
    }
}

/// Ladder-operator construction of s_x, s_y, s_z.
pub fn make_spin_operators(q: SpinQuantum) -> SpinTriple {
    let d = q.dim();
    let s = q.s();
    let m = q.m_values();
    // s_+ |m⟩ = √(s(s+1) − m(m+1)) |m+1⟩; |m+1⟩ sits one row above |m⟩.
    let mut raise = DMatrix::<C64>::zeros(d, d);
    for col in 1..d {
        let mc = m[col];
        raise[(col - 1, col)] = C64::new((s * (s + 1.0) - mc * (mc + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower).map(|z| z * 0.5);
    let sy = (&raise - &lower).map(|z| z * C64::new(0.0, -0.5));
    let sz = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(m[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    SpinTriple {
        sx: OperatorMatrix(sx),
        sy: OperatorMatrix(sy),
        sz: OperatorMatrix(sz),
        quantum: q,
    }
}

/// ab − ba.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.check_same_dim(b)?;
    Ok(OperatorMatrix(&a.0 * &b.0 - &b.0 * &a.0))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn eigh(h: &OperatorMatrix) -> Result<(Vec<f64>, Vec<SpinState>)> {
    let tol = MATRIX_TOL * h.frobenius_norm().max(1.0);
    let deviation = h.hermiticity_defect();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = SymmetricEigen::new(h.0.clone());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| SpinState(eig.eigenvectors.column(k).into_owned()))
        .collect();
    Ok((values, vectors))
}

/// exp(−i·scale·h) for Hermitian `h`, via exact eigendecomposition.
pub fn exp_hermitian(h: &OperatorMatrix, scale: f64) -> Result<OperatorMatrix> {
    let tol = MATRIX_TOL * h.frobenius_norm().max(1.0);
    let deviation = h.hermiticity_defect();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    if scale == 0.0 {
        return Ok(OperatorMatrix::identity(h.dim()));
    }
    let eig = SymmetricEigen::new(h.0.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_fn(h.dim(), h.dim(), |i, j| {
        if i == j {
            C64::from_polar(1.0, -scale * eig.eigenvalues[i])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(OperatorMatrix(v * phases * v.adjoint()))
}

/// ⟨ψ|op|ψ⟩ for Hermitian `op`.
pub fn expectation(state: &SpinState, op: &OperatorMatrix) -> Result<f64> {
    let value = state.inner(&op.apply(state)?);
    let tol = MATRIX_TOL * op.frobenius_norm().max(1.0);
    if value.im.abs() > tol {
        return Err(Error::ComplexExpectation { imag: value.im });
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn spin_half_matrices() {
        let s = make_spin_operators(SpinQuantum::HALF);
        assert_eq!(s.sz, OperatorMatrix::from_real_diagonal(&[0.5, -0.5]));
        assert!((s.sx.get(0, 1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((s.sx.get(1, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(s.sx.get(0, 0), c(0.0, 0.0));
        assert!((s.sy.get(0, 1) - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn spin_one_sz() {
        let s = make_spin_operators(SpinQuantum::ONE);
        assert_eq!(s.sz, OperatorMatrix::from_real_diagonal(&[1.0, 0.0, -1.0]));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.sx.get(0, 1).re - r).abs() < 1e-15);
        assert!((s.sx.get(1, 2).re - r).abs() < 1e-15);
    }

    #[test]
    fn spin_zero_is_trivial() {
        let s = make_spin_operators(SpinQuantum::from_twice(0));
        assert_eq!(s.dim(), 1);
        assert!(s.sx.frobenius_norm() == 0.0);
    }

    #[test]
    fn commutator_examples() {
        let s = make_spin_operators(SpinQuantum::HALF);
        let xy = commutator(&s.sx, &s.sy).unwrap();
        assert!(xy.max_abs_diff(&s.sz.scale_complex(c(0.0, 1.0))) < 1e-15);
        assert!(commutator(&s.sz, &s.sz).unwrap().frobenius_norm() == 0.0);
        let id = OperatorMatrix::identity(2);
        assert!(commutator(&id, &s.sx).unwrap().frobenius_norm() < 1e-15);
        let s1 = make_spin_operators(SpinQuantum::ONE);
        assert!(matches!(
            commutator(&s.sx, &s1.sx),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn algebra_for_small_spins() {
        for twice in 1..=6 {
            let s = make_spin_operators(SpinQuantum::from_twice(twice));
            let i = c(0.0, 1.0);
            let checks = [(&s.sx, &s.sy, &s.sz), (&s.sy, &s.sz, &s.sx), (&s.sz, &s.sx, &s.sy)];
            for (a, b, k) in checks {
                let lhs = commutator(a, b).unwrap();
                assert!(lhs.max_abs_diff(&k.scale_complex(i)) < 1e-12, "2s={twice}");
            }
            let casimir = &(&(&s.sx * &s.sx) + &(&s.sy * &s.sy)) + &(&s.sz * &s.sz);
            let ss = s.quantum.s() * (s.quantum.s() + 1.0);
            let expected = OperatorMatrix::identity(s.dim()).scale(ss);
            assert!(casimir.max_abs_diff(&expected) < 1e-12, "2s={twice}");
            for m in s.components() {
                assert!(m.is_hermitian(1e-15));
            }
        }
    }

    #[test]
    fn exp_examples() {
        let half = make_spin_operators(SpinQuantum::HALF);
        let u = exp_hermitian(&half.sz, 2.0 * PI).unwrap();
        assert!(u.max_abs_diff(&OperatorMatrix::identity(2).scale(-1.0)) < 1e-12);
        let one = make_spin_operators(SpinQuantum::ONE);
        let u = exp_hermitian(&one.sz, 2.0 * PI).unwrap();
        assert!(u.max_abs_diff(&OperatorMatrix::identity(3)) < 1e-12);
        let u = exp_hermitian(&one.sx, 0.0).unwrap();
        assert_eq!(u, OperatorMatrix::identity(3));
    }

    #[test]
    fn spinorial_sign_flip() {
        for twice in 0..=6 {
            let s = make_spin_operators(SpinQuantum::from_twice(twice));
            let u = exp_hermitian(&s.sz, 2.0 * PI).unwrap();
            let sign = if twice % 2 == 1 { -1.0 } else { 1.0 };
            assert!(u.max_abs_diff(&OperatorMatrix::identity(s.dim()).scale(sign)) < 1e-12);
        }
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let s = make_spin_operators(SpinQuantum::HALF);
        let raise = &s.sx + &s.sy.scale_complex(c(0.0, 1.0));
        assert!(matches!(exp_hermitian(&raise, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exp_matches_rotation_closed_form() {
        // exp(−iα s_y) for spin-1/2 is [[cos α/2, −sin α/2], [sin α/2, cos α/2]].
        let s = make_spin_operators(SpinQuantum::HALF);
        let alpha = 0.731;
        let u = exp_hermitian(&s.sy, alpha).unwrap();
        let (ch, sh) = ((alpha / 2.0).cos(), (alpha / 2.0).sin());
        let expected = OperatorMatrix(DMatrix::from_row_slice(
            2,
            2,
            &[c(ch, 0.0), c(-sh, 0.0), c(sh, 0.0), c(ch, 0.0)],
        ));
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn expectation_examples() {
        let s = make_spin_operators(SpinQuantum::HALF);
        assert!((expectation(&SpinState::up_z(), &s.sz).unwrap() - 0.5).abs() < 1e-15);
        assert!(expectation(&SpinState::up_z(), &s.sx).unwrap().abs() < 1e-15);
        assert!((expectation(&SpinState::up_x(), &s.sx).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expectation_flags_non_hermitian() {
        let s = make_spin_operators(SpinQuantum::HALF);
        let anti = s.sy.scale_complex(c(0.0, 1.0));
        let psi = SpinState::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(matches!(
            expectation(&psi, &anti),
            Err(Error::ComplexExpectation { .. })
        ));
        let s1 = make_spin_operators(SpinQuantum::ONE);
        assert!(matches!(
            expectation(&psi, &s1.sz),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigh_sorts_descending() {
        let s = make_spin_operators(SpinQuantum::THREE_HALVES);
        let (vals, vecs) = eigh(&s.sx).unwrap();
        for (v, m) in vals.iter().zip([1.5, 0.5, -0.5, -1.5]) {
            assert!((v - m).abs() < 1e-12);
        }
        for (v, psi) in vals.iter().zip(&vecs) {
            let lhs = s.sx.apply(psi).unwrap();
            assert!((lhs.0 - psi.0.map(|z| z * *v)).norm() < 1e-12);
        }
    }
}
