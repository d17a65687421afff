use serde::{Deserialize, Serialize};

use super::frequency::{CircleScale, Frequency};
use crate::error::{Error, Result};

/// Integer label `n` in `Z^d`. One-dimensional patterns leave the second slot at zero.
pub type Label = [i64; 2];

/// A point on the flat hull, one coordinate per label axis.
pub type HullPoint = [f64; 2];

/// A point of the pattern in ambient space. Unused trailing coordinates are zero.
pub type Point = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// Chain `n + r (sin 2pi(x + n alpha) - sin 2pi x)` on the unit circle.
    ExampleI,
    /// Quasi one-dimensional bilayer driven by a figure-eight loop.
    #[serde(rename = "example_ii")]
    ExampleII,
    /// Two-dimensional product of two sine-modulated chains.
    #[serde(rename = "example_iii")]
    ExampleIII,
    /// Quasi two-dimensional bilayer driven by a folded torus.
    #[serde(rename = "example_iv")]
    ExampleIV,
    /// Two-letter Sturmian chain.
    CutProject,
    /// The `g = 0` limit of `ExampleII`: two incommensurate chains with a sharp step.
    IdealBilayer,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::ExampleI,
        PatternKind::ExampleII,
        PatternKind::ExampleIII,
        PatternKind::ExampleIV,
        PatternKind::CutProject,
        PatternKind::IdealBilayer,
    ];

    pub fn label_dim(self) -> usize {
        match self {
            PatternKind::ExampleIII | PatternKind::ExampleIV => 2,
            _ => 1,
        }
    }

    pub fn space_dim(self) -> usize {
        match self {
            PatternKind::ExampleI | PatternKind::CutProject => 1,
            PatternKind::ExampleII | PatternKind::ExampleIII | PatternKind::IdealBilayer => 2,
            PatternKind::ExampleIV => 3,
        }
    }

    pub(crate) fn circle_scale(self) -> CircleScale {
        match self {
            PatternKind::ExampleII | PatternKind::ExampleIV | PatternKind::IdealBilayer => {
                CircleScale::Enlarged
            }
            _ => CircleScale::Unit,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::ExampleI => "example_i",
            PatternKind::ExampleII => "example_ii",
            PatternKind::ExampleIII => "example_iii",
            PatternKind::ExampleIV => "example_iv",
            PatternKind::CutProject => "cut_project",
            PatternKind::IdealBilayer => "ideal_bilayer",
        }
    }
}

fn default_r() -> f64 {
    0.4
}
fn default_g() -> f64 {
    0.01
}
fn default_delta() -> f64 {
    0.2
}
fn default_spacing_a() -> f64 {
    1.0
}
fn default_spacing_b() -> f64 {
    0.618
}

/// Which generator to use and its parameters.
///
/// `omega` is the seed point on the flat hull, one coordinate per label
/// axis, measured in the hull's own length units (the circle has
/// circumference 1, or `1 + alpha` for the bilayer examples).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub alpha: Vec<Frequency>,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_delta")]
    pub delta_prime: f64,
    #[serde(default = "default_spacing_a")]
    pub spacing_a: f64,
    #[serde(default = "default_spacing_b")]
    pub spacing_b: f64,
    #[serde(default)]
    pub omega: Vec<f64>,
}

impl PatternSpec {
    fn base(kind: PatternKind, alpha: Vec<Frequency>) -> Self {
        let d = kind.label_dim();
        PatternSpec {
            kind,
            alpha,
            r: default_r(),
            g: default_g(),
            delta: default_delta(),
            delta_prime: default_delta(),
            spacing_a: default_spacing_a(),
            spacing_b: default_spacing_b(),
            omega: vec![0.0; d],
        }
    }

    pub fn example_i(alpha: Frequency, r: f64) -> Self {
        PatternSpec {
            r,
            ..Self::base(PatternKind::ExampleI, vec![alpha])
        }
    }

    pub fn example_ii(alpha: Frequency, g: f64, delta: f64) -> Self {
        PatternSpec {
            g,
            delta,
            ..Self::base(PatternKind::ExampleII, vec![alpha])
        }
    }

    pub fn example_iii(alpha1: Frequency, alpha2: Frequency, r: f64) -> Self {
        PatternSpec {
            r,
            ..Self::base(PatternKind::ExampleIII, vec![alpha1, alpha2])
        }
    }

    pub fn example_iv(
        alpha1: Frequency,
        alpha2: Frequency,
        g: f64,
        delta: f64,
        delta_prime: f64,
    ) -> Self {
        PatternSpec {
            g,
            delta,
            delta_prime,
            ..Self::base(PatternKind::ExampleIV, vec![alpha1, alpha2])
        }
    }

    pub fn cut_project(alpha: Frequency, spacing_a: f64, spacing_b: f64) -> Self {
        PatternSpec {
            spacing_a,
            spacing_b,
            ..Self::base(PatternKind::CutProject, vec![alpha])
        }
    }

    pub fn ideal_bilayer(alpha: Frequency, delta: f64) -> Self {
        PatternSpec {
            g: 0.0,
            delta,
            ..Self::base(PatternKind::IdealBilayer, vec![alpha])
        }
    }

    /// Same spec with a new seed, reduced onto the flat hull.
    pub fn with_omega(&self, omega: &[f64]) -> Self {
        let mut out = self.clone();
        out.omega = omega.to_vec();
        out.omega.resize(self.label_dim(), 0.0);
        for axis in 0..out.omega.len().min(out.alpha.len()) {
            out.omega[axis] = self
                .kind
                .circle_scale()
                .reduce(self.alpha[axis], out.omega[axis]);
        }
        out
    }

    /// Same spec with all frequencies replaced.
    pub fn with_alpha(&self, alpha: Vec<Frequency>) -> Self {
        let mut out = self.clone();
        out.alpha = alpha;
        let omega = out.omega.clone();
        out.with_omega(&omega)
    }

    pub fn label_dim(&self) -> usize {
        self.kind.label_dim()
    }

    pub fn space_dim(&self) -> usize {
        self.kind.space_dim()
    }

    pub fn circumference(&self, axis: usize) -> f64 {
        self.kind.circle_scale().circumference(self.alpha[axis])
    }

    /// Label period of the hull rotation along `axis`, when the frequency is exact.
    pub fn orbit_period(&self, axis: usize) -> Option<u64> {
        self.kind.circle_scale().orbit_period(self.alpha[axis])
    }

    /// Seed as a hull point.
    pub fn seed(&self) -> HullPoint {
        let mut w = [0.0; 2];
        for (axis, slot) in w.iter_mut().enumerate().take(self.label_dim()) {
            let x = self.omega.get(axis).copied().unwrap_or(0.0);
            *slot = self.kind.circle_scale().reduce(self.alpha[axis], x);
        }
        w
    }

    /// The hull action `tau_n`.
    pub fn tau(&self, omega: HullPoint, n: Label) -> HullPoint {
        let mut out = omega;
        let scale = self.kind.circle_scale();
        for axis in 0..self.label_dim() {
            if n[axis] != 0 {
                out[axis] = scale.rotate(self.alpha[axis], omega[axis], n[axis]);
            }
        }
        out
    }

    /// `tau_n` applied to the seed.
    pub fn orbit(&self, n: Label) -> HullPoint {
        self.tau(self.seed(), n)
    }

    /// Check parameter invariants and return a copy with `omega` reduced onto the hull.
    pub fn validated(&self) -> Result<Self> {
        let d = self.label_dim();
        if self.alpha.len() != d {
            return Err(Error::InvalidSpec(format!(
                "{} needs {d} frequencies, got {}",
                self.kind.name(),
                self.alpha.len()
            )));
        }
        if self.omega.len() > d {
            return Err(Error::InvalidSpec(format!(
                "{} takes {d} seed coordinates, got {}",
                self.kind.name(),
                self.omega.len()
            )));
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidSpec("seed must be finite".into()));
        }
        match self.kind {
            PatternKind::ExampleI | PatternKind::ExampleIII => {
                if !(0.0..0.5).contains(&self.r) {
                    return Err(Error::InvalidSpec(format!(
                        "amplitude r = {} must satisfy 0 <= r < 1/2",
                        self.r
                    )));
                }
            }
            PatternKind::ExampleII | PatternKind::ExampleIV => {
                if !(self.g >= 0.0 && self.g.is_finite()) {
                    return Err(Error::InvalidSpec(format!("smoothing g = {} must be >= 0", self.g)));
                }
                if !self.delta.is_finite() || !self.delta_prime.is_finite() {
                    return Err(Error::InvalidSpec("layer separations must be finite".into()));
                }
            }
            PatternKind::IdealBilayer => {
                if !self.delta.is_finite() {
                    return Err(Error::InvalidSpec("layer separation must be finite".into()));
                }
            }
            PatternKind::CutProject => {
                if !(self.spacing_a > 0.0 && self.spacing_b > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "tile lengths ({}, {}) must be positive",
                        self.spacing_a, self.spacing_b
                    )));
                }
            }
        }
        Ok(self.with_omega(&self.omega))
    }
}
