//! JSON run configuration. Every key is optional; unknown keys are rejected.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use topophase::holonomy::Branch;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GaugeCheck,
    Holonomy,
    Berry,
    Dynamics,
    Pointer,
    Sweep,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::GaugeCheck => "gauge-check",
            Experiment::Holonomy => "holonomy",
            Experiment::Berry => "berry",
            Experiment::Dynamics => "dynamics",
            Experiment::Pointer => "pointer",
            Experiment::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An angle in radians, written either as a number or as a multiple of π
/// such as `"pi/3"`, `"2pi/3"` or `"-pi/2"`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleValue {
    pub radians: f64,
    pub text: Option<String>,
}

impl AngleValue {
    pub fn radians(value: f64) -> Self {
        Self {
            radians: value,
            text: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = compact.to_ascii_lowercase();
        let Some(pos) = lower.find("pi") else {
            return lower
                .parse::<f64>()
                .map(Self::radians)
                .map_err(|_| format!("cannot parse angle '{text}'"));
        };
        let coeff = lower[..pos].trim_end_matches('*');
        let numerator = match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| format!("cannot parse angle '{text}'"))?,
        };
        let rest = &lower[pos + 2..];
        let denominator = if rest.is_empty() {
            1.0
        } else if let Some(d) = rest.strip_prefix('/') {
            d.parse::<f64>().map_err(|_| format!("cannot parse angle '{text}'"))?
        } else {
            return Err(format!("cannot parse angle '{text}'"));
        };
        Ok(Self {
            radians: numerator * PI / denominator,
            text: Some(text.to_string()),
        })
    }
}

impl<'de> Deserialize<'de> for AngleValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(x) => Ok(Self::radians(x)),
            Raw::Text(t) => Self::parse(&t).map_err(de::Error::custom),
        }
    }
}

impl Serialize for AngleValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => serializer.serialize_str(t),
            None => serializer.serialize_f64(self.radians),
        }
    }
}

/// Accepts a single value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchName {
    Plus,
    Minus,
}

impl From<BranchName> for Branch {
    fn from(b: BranchName) -> Self {
        match b {
            BranchName::Plus => Branch::Plus,
            BranchName::Minus => Branch::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldChoice {
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3d")]
    ThreeD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleChoice {
    Impulsive,
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointerConfig {
    pub n: usize,
    pub q_max: f64,
    pub dp_q: f64,
    pub schedule: ScheduleChoice,
    pub window: f64,
    pub axis_theta: AngleValue,
    pub axis_phi: AngleValue,
    /// `up_z`, `down_z`, `up_x`, `down_x` or `eigen:<k>` (k-th eigenvector of
    /// the measured component, largest eigenvalue first).
    pub states: Vec<String>,
}

impl Default for PointerConfig {
    fn default() -> Self {
        Self {
            n: 512,
            q_max: 60.0,
            dp_q: 0.1,
            schedule: ScheduleChoice::Impulsive,
            window: 1.0,
            axis_theta: AngleValue::radians(PI / 2.0),
            axis_phi: AngleValue::radians(0.0),
            states: vec!["up_x".into(), "up_z".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    /// Twice the spin quantum number (1 for spin 1/2).
    pub spin_twice: u32,
    pub thetas: OneOrMany<AngleValue>,
    pub windings: OneOrMany<i64>,
    pub branches: OneOrMany<BranchName>,
    /// Loop discretization for holonomy and berry.
    pub samples: usize,
    /// Time steps for dynamics; chosen from `step_phase` when absent.
    pub steps: Option<usize>,
    /// Target dt·‖H‖ when choosing steps automatically.
    pub step_phase: f64,
    pub ratios: Vec<f64>,
    /// Adiabaticity ratio for the dynamics experiment.
    pub ratio: f64,
    pub t_loop: f64,
    pub h_s: f64,
    pub radius: f64,
    pub field: FieldChoice,
    /// Explicit evaluation points for gauge-check; seeded random points otherwise.
    pub points: Option<Vec<[f64; 3]>>,
    pub point_count: usize,
    pub fd_step: f64,
    pub pointer: PointerConfig,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            spin_twice: 1,
            thetas: OneOrMany::One(AngleValue::radians(PI / 2.0)),
            windings: OneOrMany::One(1),
            branches: OneOrMany::One(BranchName::Plus),
            samples: 8192,
            steps: None,
            step_phase: 0.02,
            ratios: vec![10.0, 100.0, 1000.0],
            ratio: 1000.0,
            t_loop: 1.0,
            h_s: 0.0,
            radius: 1.0,
            field: FieldChoice::ThreeD,
            points: None,
            point_count: 100,
            fd_step: 1e-4,
            pointer: PointerConfig::default(),
            seed: 0,
            output: None,
        }
    }
}

/// Largest supported 2s (Hilbert-space dimension 7).
pub const MAX_TWICE_SPIN: u32 = 6;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.thetas.to_vec().into_iter().map(|a| a.radians).collect()
    }

    pub fn windings(&self) -> Vec<i64> {
        self.windings.to_vec()
    }

    pub fn branches(&self) -> Vec<Branch> {
        self.branches.to_vec().into_iter().map(Branch::from).collect()
    }

    /// Range checks that do not need the numerical engine.
    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if let Some(e) = self.experiment {
            if e != experiment {
                return fail(format!("config is for '{e}' but '{experiment}' was requested"));
            }
        }
        if self.spin_twice == 0 || self.spin_twice > MAX_TWICE_SPIN {
            return fail(format!(
                "spin_twice must be in 1..={MAX_TWICE_SPIN}, got {}",
                self.spin_twice
            ));
        }
        let thetas = self.thetas();
        if thetas.is_empty() {
            return fail("thetas is empty".into());
        }
        if let Some(t) = thetas.iter().find(|t| !(0.0..=PI).contains(*t)) {
            return fail(format!("theta {t} outside [0, pi]"));
        }
        if self.windings.to_vec().is_empty() {
            return fail("windings is empty".into());
        }
        if self.branches.to_vec().is_empty() {
            return fail("branches is empty".into());
        }
        for (name, v) in [
            ("t_loop", self.t_loop),
            ("radius", self.radius),
            ("fd_step", self.fd_step),
            ("step_phase", self.step_phase),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.step_phase >= topophase::dynamics::MAX_STEP_PHASE {
            return fail(format!(
                "step_phase must be below {}, got {}",
                topophase::dynamics::MAX_STEP_PHASE,
                self.step_phase
            ));
        }
        match experiment {
            Experiment::Sweep => {
                if self.ratios.is_empty() {
                    return fail("ratios is empty".into());
                }
                if self.windings().contains(&0) {
                    return fail("sweep needs non-zero windings".into());
                }
            }
            Experiment::Dynamics => {
                if !(self.ratio > 0.0) {
                    return fail(format!("ratio must be positive, got {}", self.ratio));
                }
            }
            Experiment::Pointer => {
                if !self.pointer.n.is_power_of_two() || self.pointer.n < 2 {
                    return fail(format!("pointer.n must be a power of two, got {}", self.pointer.n));
                }
                if self.pointer.states.is_empty() {
                    return fail("pointer.states is empty".into());
                }
            }
            Experiment::GaugeCheck => {
                if self.points.is_none() && self.point_count == 0 {
                    return fail("point_count must be positive".into());
                }
            }
            Experiment::Holonomy | Experiment::Berry => {}
        }
        Ok(())
    }
}
