//! Helpers for the acceptance run: a criterion runner that prints one
//! PASS/FAIL line per criterion, and seeded evaluation points.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topophase::gauge_field::Point3;
use topophase::Result;

/// Checks and notes collected while a criterion runs.
#[derive(Debug, Default)]
pub struct Outcome {
    failed: bool,
    details: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.failed
    }

    pub fn details(&self) -> &[String] {
        &self.details
    }

    pub fn check(&mut self, ok: bool, line: String) {
        self.failed |= !ok;
        self.details
            .push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    pub fn note(&mut self, line: String) {
        self.details.push(format!("     {line}"));
    }
}

/// Runs one criterion, enforcing an optional wall-clock limit, and prints
/// its result line followed by indented details. Returns whether it passed.
pub fn run_criterion(
    id: u32,
    name: &str,
    limit: Option<Duration>,
    body: impl FnOnce(&mut Outcome) -> Result<()>,
) -> bool {
    let mut out = Outcome::default();
    let start = Instant::now();
    if let Err(e) = body(&mut out) {
        out.check(false, format!("error: {e}"));
    }
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        out.check(elapsed < limit, format!("runtime {elapsed:.2?} (limit {limit:?})"));
    }
    println!(
        "[{}] criterion {id}: {name} ({elapsed:.2?})",
        if out.passed() { "PASS" } else { "FAIL" }
    );
    for d in out.details() {
        println!("        {d}");
    }
    out.passed()
}

/// `count` points with r ∈ [0.5, 2] and sinθ > 0.3, drawn from ChaCha8 with `seed`.
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

/// `count` angles uniform in [0, π).
pub fn seeded_angles(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0.0..PI)).collect()
}
