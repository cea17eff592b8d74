//! Driven measurement dynamics.
//!
//! The Hamiltonian is H(t) = g(t)·q·n̂(θ, φ(t))·s + h_s·s_z, with the reference
//! direction rotated classically at constant angular velocity. Since the
//! pointer coordinate q commutes with H, each q-sector evolves independently;
//! a sector is propagated with exact exponentials of the midpoint Hamiltonian.
//!
//! Two uses:
//! - [`run_measurement`] reads the pointer momentum after a static
//!   measurement and checks the von Neumann shift.
//! - [`geometric_phase_from_dynamics`] extracts the adiabatic loop phase by
//!   subtracting the dynamical phase ∫⟨H⟩dt from the total phase.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::frame_transform::{conjugate, frame_unitary_3d, Angles, FrameKind};
use crate::holonomy::{analytic_loop_phase, instantaneous_eigenstate, Branch, PhaseResult};
use crate::spin_algebra::{eigh, exp_hermitian, expectation, OperatorMatrix, SpinState, SpinTriple};
use crate::{phase_distance, Error, Result, C64};

/// Upper bound on dt·‖H‖ per step.
pub const MAX_STEP_PHASE: f64 = 0.1;
/// Final overlap below which a run is flagged as non-adiabatic.
pub const ADIABATIC_OVERLAP: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// g(t) = strength·δ(t).
    Impulsive,
    /// g(t) = strength/T on [0, T].
    ConstantWindow,
}

/// Time profile of the coupling; ∫g dt = `strength` (1 for a measurement).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSchedule {
    pub kind: ScheduleKind,
    pub duration: f64,
    pub strength: f64,
}

impl MeasurementSchedule {
    pub fn impulsive() -> Self {
        Self {
            kind: ScheduleKind::Impulsive,
            duration: 0.0,
            strength: 1.0,
        }
    }

    pub fn constant_window(duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "window duration must be positive, got {duration}"
            )));
        }
        Ok(Self {
            kind: ScheduleKind::ConstantWindow,
            duration,
            strength: 1.0,
        })
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    /// Smooth part of g(t); the impulsive kick is handled separately.
    pub fn coupling(&self, t: f64) -> f64 {
        match self.kind {
            ScheduleKind::Impulsive => 0.0,
            ScheduleKind::ConstantWindow => {
                if (0.0..=self.duration).contains(&t) {
                    self.strength / self.duration
                } else {
                    0.0
                }
            }
        }
    }

    fn peak_coupling(&self) -> f64 {
        match self.kind {
            ScheduleKind::Impulsive => 0.0,
            ScheduleKind::ConstantWindow => (self.strength / self.duration).abs(),
        }
    }
}

/// Classical drive of the reference direction: φ(t) = 2πn·t/T_loop at fixed θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveProtocol {
    pub theta: f64,
    pub winding: i64,
    pub t_loop: f64,
    /// Coefficient of the free spin term h_s·s_z.
    pub h_s_strength: f64,
    /// Reference-particle mass; carried as metadata, unused by the driven model.
    pub mass: Option<f64>,
}

impl DriveProtocol {
    pub fn new(theta: f64, winding: i64, t_loop: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta {theta} outside [0, pi]")));
        }
        if !(t_loop > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "loop duration must be positive, got {t_loop}"
            )));
        }
        Ok(Self {
            theta,
            winding,
            t_loop,
            h_s_strength: 0.0,
            mass: None,
        })
    }

    pub fn with_free_spin(mut self, h_s: f64) -> Self {
        self.h_s_strength = h_s;
        self
    }

    pub fn phi(&self, t: f64) -> f64 {
        2.0 * PI * self.winding as f64 * t / self.t_loop
    }

    pub fn angles(&self, t: f64) -> Angles {
        Angles {
            theta: self.theta,
            phi: self.phi(t),
        }
    }

    /// Loop angular frequency ω_r = 2π|n|/T_loop.
    pub fn loop_frequency(&self) -> f64 {
        2.0 * PI * self.winding.unsigned_abs() as f64 / self.t_loop
    }
}

/// Adiabaticity ratio ω_s/ω_r := |q|·g·T_loop / (2π|n|).
pub fn adiabaticity_ratio(q: f64, coupling: f64, protocol: &DriveProtocol) -> f64 {
    if protocol.winding == 0 {
        return f64::INFINITY;
    }
    (q * coupling).abs() / protocol.loop_frequency()
}

/// Pointer-frame spin components ⟨s_x'⟩, ⟨s_y'⟩, ⟨s_z'⟩ at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub relative: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorEvolution {
    pub state: SpinState,
    pub dynamical_phase: f64,
    pub trajectory: Vec<TrajectorySample>,
}

/// ⟨U s_i U†⟩ for the 3D frame at `angles`.
pub fn relative_components(spins: &SpinTriple, state: &SpinState, angles: &Angles) -> Result<[f64; 3]> {
    let frame = frame_unitary_3d(angles, spins);
    let mut out = [0.0; 3];
    for (slot, op) in out.iter_mut().zip(spins.components()) {
        *slot = expectation(state, &conjugate(op, &frame)?)?;
    }
    Ok(out)
}

fn hamiltonian(spins: &SpinTriple, coupling_q: f64, angles: &Angles, h_s: f64) -> OperatorMatrix {
    let n = angles.unit_vector(FrameKind::ThreeD);
    let mut h = spins.dot([coupling_q * n[0], coupling_q * n[1], coupling_q * n[2]]);
    if h_s != 0.0 {
        h = &h + &spins.sz.scale(h_s);
    }
    h
}

/// Propagates one q-sector over [0, T_loop]; see [`evolve_sector_recorded`].
pub fn evolve_sector(
    spins: &SpinTriple,
    initial: &SpinState,
    q: f64,
    protocol: &DriveProtocol,
    schedule: &MeasurementSchedule,
    steps: usize,
) -> Result<SectorEvolution> {
    evolve_sector_recorded(spins, initial, q, protocol, schedule, steps, 0)
}

/// Propagates one q-sector over [0, T_loop] with `steps` midpoint
/// exponentials, recording the relative-frame spin every `record_every`
/// steps (0 disables recording).
pub fn evolve_sector_recorded(
    spins: &SpinTriple,
    initial: &SpinState,
    q: f64,
    protocol: &DriveProtocol,
    schedule: &MeasurementSchedule,
    steps: usize,
    record_every: usize,
) -> Result<SectorEvolution> {
    if initial.dim() != spins.dim() {
        return Err(Error::DimensionMismatch {
            expected: spins.dim(),
            found: initial.dim(),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let dt = protocol.t_loop / steps as f64;
    let s = spins.quantum.s();
    let norm_bound = (schedule.peak_coupling() * q.abs() + protocol.h_s_strength.abs()) * s;
    if dt * norm_bound >= MAX_STEP_PHASE {
        return Err(Error::StepSize {
            value: dt * norm_bound,
            limit: MAX_STEP_PHASE,
        });
    }

    let mut psi = initial.clone();
    let mut dynamical_phase = 0.0;
    let mut trajectory = Vec::new();

    if schedule.kind == ScheduleKind::Impulsive && schedule.strength != 0.0 {
        let kick = hamiltonian(spins, q * schedule.strength, &protocol.angles(0.0), 0.0);
        dynamical_phase += expectation(&psi, &kick)?;
        psi = exp_hermitian(&kick, 1.0)?.apply(&psi)?;
    }
    if record_every > 0 {
        trajectory.push(TrajectorySample {
            t: 0.0,
            relative: relative_components(spins, &psi, &protocol.angles(0.0))?,
        });
    }

    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let g = schedule.coupling(t_mid);
        if g * q == 0.0 && protocol.h_s_strength == 0.0 {
            // H vanishes on this step.
        } else {
            let h = hamiltonian(spins, g * q, &protocol.angles(t_mid), protocol.h_s_strength);
            dynamical_phase += expectation(&psi, &h)? * dt;
            psi = exp_hermitian(&h, dt)?.apply(&psi)?;
        }
        if record_every > 0 && (k + 1) % record_every == 0 {
            let t = (k + 1) as f64 * dt;
            trajectory.push(TrajectorySample {
                t,
                relative: relative_components(spins, &psi, &protocol.angles(t))?,
            });
        }
    }
    Ok(SectorEvolution {
        state: psi,
        dynamical_phase,
        trajectory,
    })
}

/// Step count that keeps dt·‖H‖ at `target` for a constant-window loop run.
pub fn auto_steps(spins: &SpinTriple, q: f64, protocol: &DriveProtocol, target: f64) -> usize {
    let norm = (q.abs() / protocol.t_loop + protocol.h_s_strength.abs()) * spins.quantum.s();
    let steps = (norm * protocol.t_loop / target).ceil() as usize;
    steps.max(1024)
}

/// Discretized measuring-device coordinate q with an initial Gaussian whose
/// conjugate-momentum spread is `dp_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerGrid {
    pub n: usize,
    pub q_max: f64,
    pub dp_q: f64,
    weights: Vec<f64>,
}

impl PointerGrid {
    pub fn new(n: usize, q_max: f64, dp_q: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("grid size {n} is not a power of two")));
        }
        if !(dp_q > 0.0) || !(q_max > 0.0) {
            return Err(Error::InvalidArgument("q_max and dp_q must be positive".into()));
        }
        if q_max < 6.0 / dp_q {
            return Err(Error::GridResolution(format!(
                "extent {q_max} is below 6/dP_q = {}",
                6.0 / dp_q
            )));
        }
        let spacing = 2.0 * q_max / n as f64;
        if spacing > 1.0 / (8.0 * dp_q) {
            return Err(Error::GridResolution(format!(
                "spacing {spacing} exceeds 1/(8 dP_q) = {}",
                1.0 / (8.0 * dp_q)
            )));
        }
        // |w|² ∝ exp(−2 q² dP²): position spread 1/(2 dP), momentum spread dP.
        let raw: Vec<f64> = (0..n)
            .map(|j| {
                let q = -q_max + j as f64 * spacing;
                (-q * q * dp_q * dp_q).exp()
            })
            .collect();
        let norm = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
        Ok(Self {
            n,
            q_max,
            dp_q,
            weights: raw.into_iter().map(|w| w / norm).collect(),
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.q_max / self.n as f64
    }

    pub fn q_values(&self) -> Vec<f64> {
        (0..self.n).map(|j| -self.q_max + j as f64 * self.spacing()).collect()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest resolvable pointer momentum, π/spacing.
    pub fn momentum_cutoff(&self) -> f64 {
        PI / self.spacing()
    }

    /// FFT-ordered momentum of bin j.
    fn momentum(&self, j: usize) -> f64 {
        let n = self.n as isize;
        let jj = j as isize;
        let k = if jj < n / 2 { jj } else { jj - n };
        2.0 * PI * k as f64 / (self.n as f64 * self.spacing())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub q_values: Vec<f64>,
    pub final_states: Vec<SpinState>,
    pub dynamical_phases: Vec<f64>,
    pub geometric_phase: Option<PhaseResult>,
    pub pointer_initial: f64,
    pub pointer_final: f64,
    /// Pointer reading P_q(T) − P_q(0).
    pub pointer_shift: f64,
    /// (pointer value, probability) sorted by pointer value.
    pub pointer_distribution: Vec<(f64, f64)>,
    pub trajectory: Vec<TrajectorySample>,
}

impl EvolutionResult {
    pub fn max_norm_defect(&self) -> f64 {
        self.final_states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Pointer reading and its distribution for sector amplitudes ψ_m(q_j).
///
/// The reading is +i∂_q, i.e. minus the canonical momentum, so that an
/// eigenstate of n̂·s with eigenvalue λ shifts the reading by +λ.
fn pointer_readout(grid: &PointerGrid, sector_states: &[SpinState]) -> (f64, Vec<(f64, f64)>) {
    let n = grid.n;
    let dim = sector_states[0].dim();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut probs = vec![0.0; n];
    for m in 0..dim {
        let mut buf: Vec<C64> = sector_states
            .iter()
            .zip(grid.weights())
            .map(|(s, w)| s.0[m] * *w)
            .collect();
        fft.process(&mut buf);
        for (p, z) in probs.iter_mut().zip(&buf) {
            *p += z.norm_sqr() / n as f64;
        }
    }
    let mut reading = 0.0;
    let mut dist: Vec<(f64, f64)> = probs
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let value = -grid.momentum(j);
            reading += value * p;
            (value, *p)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    (reading, dist)
}

/// Static measurement of n̂(angles)·s on `initial` with the pointer prepared
/// in the grid's Gaussian.
pub fn run_measurement(
    spins: &SpinTriple,
    initial: &SpinState,
    pointer: &PointerGrid,
    schedule: &MeasurementSchedule,
    angles: &Angles,
) -> Result<EvolutionResult> {
    if initial.dim() != spins.dim() {
        return Err(Error::DimensionMismatch {
            expected: spins.dim(),
            found: initial.dim(),
        });
    }
    let s = spins.quantum.s();
    let cutoff = pointer.momentum_cutoff();
    let needed = s * schedule.strength.abs() + 8.0 * pointer.dp_q;
    if cutoff < needed {
        return Err(Error::GridResolution(format!(
            "momentum cutoff {cutoff} cannot hold shifts up to {needed}"
        )));
    }
    let observable = spins.dot(angles.unit_vector(FrameKind::ThreeD));
    let (values, vectors) = eigh(&observable)?;
    let amplitudes: Vec<C64> = vectors.iter().map(|v| v.inner(initial)).collect();
    let mean = expectation(initial, &observable)?;
    let q_values = pointer.q_values();

    // ∫g dt = strength for both schedules and n̂ is static, so each sector
    // picks up exp(−i q strength n̂·s) exactly.
    let sectors: Vec<(SpinState, f64)> = q_values
        .par_iter()
        .map(|&q| {
            let mut out = nalgebra::DVector::<C64>::zeros(spins.dim());
            for ((v, lam), a) in vectors.iter().zip(&values).zip(&amplitudes) {
                let phase = C64::from_polar(1.0, -q * schedule.strength * lam);
                out += &v.0 * (a * phase);
            }
            (SpinState(out), q * schedule.strength * mean)
        })
        .collect();

    let initial_states = vec![initial.clone(); pointer.n];
    let (pointer_initial, _) = pointer_readout(pointer, &initial_states);
    let final_states: Vec<SpinState> = sectors.iter().map(|(s, _)| s.clone()).collect();
    let (pointer_final, pointer_distribution) = pointer_readout(pointer, &final_states);
    Ok(EvolutionResult {
        q_values,
        dynamical_phases: sectors.iter().map(|(_, d)| *d).collect(),
        final_states,
        geometric_phase: None,
        pointer_initial,
        pointer_final,
        pointer_shift: pointer_final - pointer_initial,
        pointer_distribution,
        trajectory: Vec::new(),
    })
}

/// Local maxima of a distribution exceeding `rel_threshold` × the global maximum.
pub fn distribution_peaks(dist: &[(f64, f64)], rel_threshold: f64) -> Vec<f64> {
    let max = dist.iter().map(|d| d.1).fold(0.0, f64::max);
    (1..dist.len().saturating_sub(1))
        .filter(|&i| {
            let p = dist[i].1;
            p >= rel_threshold * max && p > dist[i - 1].1 && p >= dist[i + 1].1
        })
        .map(|i| dist[i].0)
        .collect()
}

/// Geometric phase extracted from one driven loop.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricPhaseRun {
    pub phase: PhaseResult,
    pub dynamical_phase: f64,
    /// |⟨u(φ_end)|ψ(T)⟩| with u the transported eigenstate.
    pub overlap: f64,
    pub ratio: f64,
    pub steps: usize,
    pub adiabatic: bool,
}

/// Drives the reference direction once around the loop with g = 1/T_loop,
/// starting from the `branch` eigenstate, and returns
/// arg⟨ψ(0)|ψ(T)⟩ + ∫⟨H⟩dt.
pub fn geometric_phase_from_dynamics(
    spins: &SpinTriple,
    protocol: &DriveProtocol,
    q: f64,
    branch: Branch,
    steps: usize,
) -> Result<GeometricPhaseRun> {
    let spin = spins.quantum;
    let initial = instantaneous_eigenstate(0.0, protocol.theta, branch, spin)?;
    let schedule = MeasurementSchedule::constant_window(protocol.t_loop)?;
    let run = evolve_sector(spins, &initial, q, protocol, &schedule, steps)?;
    let transported = instantaneous_eigenstate(protocol.phi(protocol.t_loop), protocol.theta, branch, spin)?;
    let overlap = transported.inner(&run.state).norm();
    let total = initial.inner(&run.state).arg();
    let raw = total + run.dynamical_phase;
    Ok(GeometricPhaseRun {
        phase: PhaseResult::new(raw, steps),
        dynamical_phase: run.dynamical_phase,
        overlap,
        ratio: adiabaticity_ratio(q, 1.0 / protocol.t_loop, protocol),
        steps,
        adiabatic: overlap >= ADIABATIC_OVERLAP,
    })
}

/// One row of an adiabaticity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: f64,
    pub gamma_sim: PhaseResult,
    pub gamma_analytic: f64,
    pub abs_err: f64,
    pub overlap: f64,
    pub adiabatic: bool,
    pub steps: usize,
}

/// Pointer coordinate that realizes a given adiabaticity ratio at g = 1/T_loop.
pub fn q_for_ratio(ratio: f64, protocol: &DriveProtocol) -> f64 {
    ratio * protocol.loop_frequency() * protocol.t_loop
}

/// Runs [`geometric_phase_from_dynamics`] for each ratio. `step_phase` is
/// the dt·‖H‖ target passed to [`auto_steps`]. Rows are returned in input
/// order.
pub fn adiabatic_sweep(
    spins: &SpinTriple,
    protocol: &DriveProtocol,
    branch: Branch,
    ratios: &[f64],
    step_phase: f64,
) -> Result<Vec<SweepRow>> {
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("no ratios given".into()));
    }
    if protocol.winding == 0 {
        return Err(Error::InvalidArgument("sweep needs a non-zero winding".into()));
    }
    if ratios.iter().any(|r| !(*r > 1.0)) {
        return Err(Error::InvalidArgument("every ratio must exceed 1".into()));
    }
    if ratios.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("ratios must be sorted ascending".into()));
    }
    let m = branch.projection(spins.quantum);
    let analytic = analytic_loop_phase(protocol.theta, protocol.winding, m, spins.quantum);
    ratios
        .par_iter()
        .map(|&ratio| {
            let q = q_for_ratio(ratio, protocol);
            let steps = auto_steps(spins, q, protocol, step_phase);
            let run = geometric_phase_from_dynamics(spins, protocol, q, branch, steps)?;
            Ok(SweepRow {
                ratio,
                abs_err: phase_distance(run.phase.raw, analytic),
                gamma_sim: run.phase,
                gamma_analytic: analytic,
                overlap: run.overlap,
                adiabatic: run.adiabatic,
                steps,
            })
        })
        .collect()
}

/// Time averages of |⟨s_y'⟩| and |⟨s_z'⟩| along a driven loop started in the
/// `branch` eigenstate.
pub fn transverse_averaging_check(
    spins: &SpinTriple,
    protocol: &DriveProtocol,
    q: f64,
    branch: Branch,
    steps: usize,
) -> Result<(f64, f64)> {
    let initial = instantaneous_eigenstate(0.0, protocol.theta, branch, spins.quantum)?;
    let schedule = MeasurementSchedule::constant_window(protocol.t_loop)?;
    let every = (steps / 4096).max(1);
    let run = evolve_sector_recorded(spins, &initial, q, protocol, &schedule, steps, every)?;
    let n = run.trajectory.len() as f64;
    let sy = run.trajectory.iter().map(|s| s.relative[1].abs()).sum::<f64>() / n;
    let sz = run.trajectory.iter().map(|s| s.relative[2].abs()).sum::<f64>() / n;
    Ok((sy, sz))
}
