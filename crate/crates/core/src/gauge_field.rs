//! Induced vector potentials and their field strengths.
//!
//! Matrix-valued potentials follow the convention A_μ = i U† ∂_μ U of
//! [`crate::frame_transform::pure_gauge_potential`]. In that convention the
//! three-dimensional potential reads
//!
//! ```text
//! A = s_y θ̂ / r + (s_z sinθ + s_x cosθ − c) φ̂ / (r sinθ)
//! ```
//!
//! which is the negative of the component-wise form returned by
//! [`a3d_reversed`]. The latter is kept for comparison only; [`a3d`] is the
//! unitary-derived form.

use std::fmt;
use std::sync::Arc;

use crate::frame_transform::{check_valid_point, Angles, FrameKind, AXIS_EPSILON, R_EPSILON};
use crate::spin_algebra::{eigh, OperatorMatrix, SpinQuantum, SpinTriple};
use crate::{Error, Result, C64};

/// Cartesian point in dimensionless length units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_spherical(r: f64, theta: f64, phi: f64) -> Self {
        let st = theta.sin();
        Self::new(r * st * phi.cos(), r * st * phi.sin(), r * theta.cos())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn r(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Distance from the z-axis.
    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    fn require_off_origin(&self) -> Result<f64> {
        let r = self.r();
        if !(r > R_EPSILON) {
            return Err(Error::Singularity(format!("point {self} is at the origin")));
        }
        Ok(r)
    }

    pub fn theta(&self) -> Result<f64> {
        let r = self.require_off_origin()?;
        Ok((self.z / r).clamp(-1.0, 1.0).acos())
    }

    pub fn phi(&self) -> Result<f64> {
        self.require_off_origin()?;
        Ok(self.y.atan2(self.x))
    }

    pub fn angles(&self) -> Result<Angles> {
        Ok(Angles {
            theta: self.theta()?,
            phi: self.phi()?,
        })
    }

    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut a = self.as_array();
        a[axis] += delta;
        Self::new(a[0], a[1], a[2])
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

type MatrixEvaluator = dyn Fn(&Point3) -> Result<[OperatorMatrix; 3]> + Send + Sync;
type VectorEvaluator = dyn Fn(&Point3) -> Result<[f64; 3]> + Send + Sync;

/// Position-dependent matrix-valued vector potential.
#[derive(Clone)]
pub struct GaugeField {
    pub label: String,
    pub dim: usize,
    evaluator: Arc<MatrixEvaluator>,
}

impl GaugeField {
    pub fn new<F>(label: impl Into<String>, dim: usize, evaluator: F) -> Self
    where
        F: Fn(&Point3) -> Result<[OperatorMatrix; 3]> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            dim,
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn eval(&self, point: &Point3) -> Result<[OperatorMatrix; 3]> {
        (self.evaluator)(point)
    }

    /// A(point)·v, Hermitian when the components are.
    pub fn contract(&self, point: &Point3, v: [f64; 3]) -> Result<OperatorMatrix> {
        let [ax, ay, az] = self.eval(point)?;
        Ok(&(&ax.scale(v[0]) + &ay.scale(v[1])) + &az.scale(v[2]))
    }
}

impl fmt::Debug for GaugeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .finish()
    }
}

/// Position-dependent real 3-vector field.
#[derive(Clone)]
pub struct ScalarField3 {
    pub label: String,
    evaluator: Arc<VectorEvaluator>,
}

impl ScalarField3 {
    pub fn new<F>(label: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(&Point3) -> Result<[f64; 3]> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn eval(&self, point: &Point3) -> Result<[f64; 3]> {
        (self.evaluator)(point)
    }
}

impl fmt::Debug for ScalarField3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField3").field("label", &self.label).finish()
    }
}

struct SphericalFrame {
    r: f64,
    sin_t: f64,
    cos_t: f64,
    sin_p: f64,
    cos_p: f64,
}

impl SphericalFrame {
    fn at(point: &Point3) -> Result<Self> {
        check_valid_point(point)?;
        let r = point.r();
        let rho = point.rho();
        Ok(Self {
            r,
            sin_t: rho / r,
            cos_t: point.z / r,
            sin_p: point.y / rho,
            cos_p: point.x / rho,
        })
    }

    fn theta_hat(&self) -> [f64; 3] {
        [self.cos_t * self.cos_p, self.cos_t * self.sin_p, -self.sin_t]
    }

    fn phi_hat(&self) -> [f64; 3] {
        [-self.sin_p, self.cos_p, 0.0]
    }

    fn rho(&self) -> f64 {
        self.r * self.sin_t
    }
}

fn along(op: &OperatorMatrix, dir: [f64; 3], factor: f64) -> [OperatorMatrix; 3] {
    [
        op.scale(dir[0] * factor),
        op.scale(dir[1] * factor),
        op.scale(dir[2] * factor),
    ]
}

fn add3(a: [OperatorMatrix; 3], b: [OperatorMatrix; 3]) -> [OperatorMatrix; 3] {
    let [a0, a1, a2] = a;
    let [b0, b1, b2] = b;
    [a0 + b0, a1 + b1, a2 + b2]
}

/// Two-dimensional semi-fluxon potential (s_z − c) φ̂ / ρ, ρ the distance to the z-axis.
pub fn a2d(spins: &SpinTriple) -> GaugeField {
    let c = spins.quantum.half_shift();
    let flux = &spins.sz - &OperatorMatrix::identity(spins.dim()).scale(c);
    GaugeField::new(format!("a2d(s={})", spins.quantum), spins.dim(), move |p| {
        let f = SphericalFrame::at(p)?;
        Ok(along(&flux, f.phi_hat(), 1.0 / f.rho()))
    })
}

/// Three-dimensional non-Abelian potential derived from the 3D frame unitary.
pub fn a3d(spins: &SpinTriple) -> GaugeField {
    let s = spins.clone();
    GaugeField::new(format!("a3d(s={})", spins.quantum), spins.dim(), move |p| {
        let f = SphericalFrame::at(p)?;
        let flux = flux_operator_at(&s, f.sin_t, f.cos_t);
        Ok(add3(
            along(&s.sy, f.theta_hat(), 1.0 / f.r),
            along(&flux, f.phi_hat(), 1.0 / f.rho()),
        ))
    })
}

/// Component form with the opposite overall sign, kept as a diagnostic.
/// Equal to `−a3d`; it is not a pure gauge under the
/// `−i[A_μ, A_ν]` field-strength convention used here.
pub fn a3d_reversed(spins: &SpinTriple) -> GaugeField {
    let s = spins.clone();
    GaugeField::new(format!("a3d_reversed(s={})", spins.quantum), spins.dim(), move |p| {
        let f = SphericalFrame::at(p)?;
        let flux = flux_operator_at(&s, f.sin_t, f.cos_t);
        let ax = &s.sy.scale(-f.cos_t * f.cos_p / f.r) + &flux.scale(f.sin_p / f.rho());
        let ay = &s.sy.scale(-f.cos_t * f.sin_p / f.r) - &flux.scale(f.cos_p / f.rho());
        let az = s.sy.scale(f.sin_t / f.r);
        Ok([ax, ay, az])
    })
}

/// Spatially constant potential, used for checks.
pub fn constant_field(label: &str, components: [OperatorMatrix; 3]) -> GaugeField {
    let dim = components[0].dim();
    GaugeField::new(label, dim, move |_| Ok(components.clone()))
}

/// s_z sinθ + s_x cosθ − c.
fn flux_operator_at(spins: &SpinTriple, sin_t: f64, cos_t: f64) -> OperatorMatrix {
    let c = spins.quantum.half_shift();
    &(&spins.sz.scale(sin_t) + &spins.sx.scale(cos_t)) - &OperatorMatrix::identity(spins.dim()).scale(c)
}

/// Eigenvalues of s_z sinθ + s_x cosθ − c, sorted descending.
pub fn flux_operator_spectrum(theta: f64, spins: &SpinTriple) -> Result<Vec<f64>> {
    let op = flux_operator_at(spins, theta.sin(), theta.cos());
    Ok(eigh(&op)?.0)
}

/// Adiabatic expectation of the induced potential for the relative-spin
/// eigenvalue `m`, with the transverse components averaged to zero.
///
/// 2D: −c φ̂/ρ (⟨s_z⟩ = 0). 3D: (m cosθ − c) φ̂ / (r sinθ).
pub fn effective_a(kind: FrameKind, m: f64, spin: SpinQuantum) -> Result<ScalarField3> {
    if !spin.contains_projection(m) {
        return Err(Error::InvalidArgument(format!(
            "m = {m} is not an eigenvalue of a spin-{spin} component"
        )));
    }
    let c = spin.half_shift();
    Ok(match kind {
        FrameKind::TwoD => ScalarField3::new(format!("<A2d>(s={spin})"), move |p| {
            let f = SphericalFrame::at(p)?;
            let a = -c / f.rho();
            let ph = f.phi_hat();
            Ok([a * ph[0], a * ph[1], 0.0])
        }),
        FrameKind::ThreeD => ScalarField3::new(format!("<A3d>(s={spin}, m={m})"), move |p| {
            let f = SphericalFrame::at(p)?;
            let a = (m * f.cos_t - c) / f.rho();
            let ph = f.phi_hat();
            Ok([a * ph[0], a * ph[1], 0.0])
        }),
    })
}

/// Antisymmetric array of field-strength components.
pub type FieldStrength = [[OperatorMatrix; 3]; 3];

/// F_μν = ∂_μA_ν − ∂_νA_μ − i[A_μ, A_ν], with derivatives from the
/// five-point central stencil (truncation error O(step⁴)).
pub fn field_strength(field: &GaugeField, point: &Point3, step: f64) -> Result<FieldStrength> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let centre = field.eval(point)?;
    // derivs[μ][ν] = ∂_μ A_ν
    let mut derivs: Vec<[OperatorMatrix; 3]> = Vec::with_capacity(3);
    for mu in 0..3 {
        let p1 = field.eval(&point.shifted(mu, step))?;
        let m1 = field.eval(&point.shifted(mu, -step))?;
        let p2 = field.eval(&point.shifted(mu, 2.0 * step))?;
        let m2 = field.eval(&point.shifted(mu, -2.0 * step))?;
        let d: Vec<OperatorMatrix> = (0..3)
            .map(|nu| {
                let near = (&p1[nu] - &m1[nu]).scale(8.0);
                let far = &p2[nu] - &m2[nu];
                (&near - &far).scale(1.0 / (12.0 * step))
            })
            .collect();
        derivs.push(d.try_into().expect("three components"));
    }
    let minus_i = C64::new(0.0, -1.0);
    let zero = OperatorMatrix::zeros(field.dim);
    let mut f: FieldStrength = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    for mu in 0..3 {
        for nu in (mu + 1)..3 {
            let curl = &derivs[mu][nu] - &derivs[nu][mu];
            let comm = &(&centre[mu] * &centre[nu]) - &(&centre[nu] * &centre[mu]);
            let value = &curl + &comm.scale_complex(minus_i);
            f[nu][mu] = -&value;
            f[mu][nu] = value;
        }
    }
    Ok(f)
}

/// Largest Frobenius norm over the field-strength components.
pub fn max_field_strength_norm(f: &FieldStrength) -> f64 {
    f.iter()
        .flat_map(|row| row.iter())
        .map(OperatorMatrix::frobenius_norm)
        .fold(0.0, f64::max)
}

/// Central-difference curl of a real vector field.
pub fn curl_numeric(field: &ScalarField3, point: &Point3, step: f64) -> Result<[f64; 3]> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    // d[μ][ν] = ∂_μ A_ν
    let mut d = [[0.0; 3]; 3];
    for (mu, row) in d.iter_mut().enumerate() {
        let plus = field.eval(&point.shifted(mu, step))?;
        let minus = field.eval(&point.shifted(mu, -step))?;
        for nu in 0..3 {
            row[nu] = (plus[nu] - minus[nu]) / (2.0 * step);
        }
    }
    Ok([d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]])
}

/// Monopole field m r̂ / r².
pub fn monopole_field(point: &Point3, m: f64) -> Result<[f64; 3]> {
    let r = point.r();
    if !(r > R_EPSILON) {
        return Err(Error::Singularity(format!("monopole field at origin {point}")));
    }
    let k = m / (r * r * r);
    Ok([k * point.x, k * point.y, k * point.z])
}

/// Latitude–longitude midpoint grid used for sphere flux integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl SphereGrid {
    pub const DEFAULT: SphereGrid = SphereGrid {
        n_theta: 400,
        n_phi: 800,
    };
}

/// Outward flux ∮ B·dS through the sphere of the given radius.
pub fn sphere_flux<F>(field: F, radius: f64, grid: SphereGrid) -> Result<f64>
where
    F: Fn(&Point3) -> Result<[f64; 3]>,
{
    if grid.n_theta < 200 || grid.n_phi < 400 {
        return Err(Error::InvalidArgument(format!(
            "sphere grid {}x{} is below the 200x400 minimum",
            grid.n_theta, grid.n_phi
        )));
    }
    let dt = std::f64::consts::PI / grid.n_theta as f64;
    let dp = 2.0 * std::f64::consts::PI / grid.n_phi as f64;
    let mut total = 0.0;
    for i in 0..grid.n_theta {
        let theta = (i as f64 + 0.5) * dt;
        let (st, ct) = theta.sin_cos();
        let mut ring = 0.0;
        for j in 0..grid.n_phi {
            let phi = (j as f64 + 0.5) * dp;
            let (sp, cp) = phi.sin_cos();
            let normal = [st * cp, st * sp, ct];
            let b = field(&Point3::new(radius * normal[0], radius * normal[1], radius * normal[2]))?;
            ring += b[0] * normal[0] + b[1] * normal[1] + b[2] * normal[2];
        }
        total += ring * st;
    }
    Ok(total * radius * radius * dt * dp)
}

/// True when the point lies in the region where the guard bands allow evaluation.
pub fn in_valid_region(point: &Point3) -> bool {
    let r = point.r();
    r > R_EPSILON && point.rho() / r > AXIS_EPSILON
}
