use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dynpat::edge::EdgeConfig;
use dynpat::gap_label::{DEFAULT_FIT_TOL, DEFAULT_MAX_COEFF};
use dynpat::hamiltonian::HoppingRule;
use dynpat::pattern::{Frequency, PatternKind, PatternSpec, Window};
use dynpat::spectral::SweepConfig;
use dynpat::{Error, Parallelism, Result};

fn golden() -> Vec<Frequency> {
    vec![Frequency::from_f64((5f64.sqrt() - 1.0) / 2.0).expect("in range")]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternBlock {
    pub kind: PatternKind,
    pub alpha: Vec<Frequency>,
    pub r: f64,
    pub g: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub spacing_a: f64,
    pub spacing_b: f64,
    pub omega: Vec<f64>,
    /// Inclusive label range `[lo, hi]` per axis.
    pub window: Vec<[i64; 2]>,
}

impl Default for PatternBlock {
    fn default() -> Self {
        let spec = PatternSpec::example_i(golden()[0], 0.4);
        PatternBlock {
            kind: spec.kind,
            alpha: spec.alpha,
            r: spec.r,
            g: spec.g,
            delta: spec.delta,
            delta_prime: spec.delta_prime,
            spacing_a: spec.spacing_a,
            spacing_b: spec.spacing_b,
            omega: Vec::new(),
            window: Vec::new(),
        }
    }
}

impl PatternBlock {
    pub fn spec(&self) -> Result<PatternSpec> {
        let d = self.kind.label_dim();
        let mut alpha = self.alpha.clone();
        if alpha.len() == 1 && d == 2 {
            alpha.push(alpha[0]);
        }
        let spec = PatternSpec {
            kind: self.kind,
            alpha,
            r: self.r,
            g: self.g,
            delta: self.delta,
            delta_prime: self.delta_prime,
            spacing_a: self.spacing_a,
            spacing_b: self.spacing_b,
            omega: vec![0.0; d],
        };
        let omega = if self.omega.is_empty() { vec![0.0; d] } else { self.omega.clone() };
        if omega.len() != d {
            return Err(Error::InvalidSpec(format!("{} takes {d} seed coordinates", self.kind.name())));
        }
        spec.with_omega(&omega).validated()
    }

    pub fn window(&self) -> Result<Window> {
        let d = self.kind.label_dim();
        let ranges = if self.window.is_empty() {
            vec![if d == 1 { [0, 999] } else { [0, 29] }; d]
        } else {
            self.window.clone()
        };
        match ranges.as_slice() {
            [a] if d == 1 => Ok(Window::line(a[0], a[1])),
            [a, b] if d == 2 => Ok(Window::rect((a[0], a[1]), (b[0], b[1]))),
            _ => Err(Error::Window(format!("{} needs {d} label ranges", self.kind.name()))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoppingBlock {
    pub beta: f64,
    pub cutoff: f64,
}

impl Default for HoppingBlock {
    fn default() -> Self {
        let h = HoppingRule::default();
        HoppingBlock {
            beta: h.beta,
            cutoff: h.cutoff_dist,
        }
    }
}

impl HoppingBlock {
    pub fn rule(&self) -> Result<HoppingRule> {
        HoppingRule::new(self.beta, self.cutoff)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub q_max: u64,
    pub size_floor: usize,
    pub omega_samples: usize,
    /// Thread count, `"auto"` or `"sequential"`. Never changes results, so it
    /// is left out of the config hash.
    #[serde(skip_serializing)]
    pub parallelism: String,
}

impl Default for SweepBlock {
    fn default() -> Self {
        let s = SweepConfig::default();
        SweepBlock {
            q_max: s.q_max,
            size_floor: s.size_floor,
            omega_samples: s.omega_samples,
            parallelism: "auto".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapBlock {
    pub min_width: f64,
    pub max_coeff: i64,
    pub tol: f64,
}

impl Default for GapBlock {
    fn default() -> Self {
        GapBlock {
            min_width: SweepConfig::default().min_width,
            max_coeff: DEFAULT_MAX_COEFF,
            tol: DEFAULT_FIT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeBlock {
    /// Number of cut offsets `0..cuts`.
    pub cuts: usize,
    pub width: usize,
    /// Coverage resolution as a fraction of the gap width.
    pub epsilon: f64,
    pub threshold: f64,
    /// Label axis (1-based) normal to the cut.
    pub cut_axis: usize,
    /// Sites per axis; defaults to the bulk approximant sizes.
    pub size: Vec<usize>,
}

impl Default for EdgeBlock {
    fn default() -> Self {
        let e = EdgeConfig::default();
        EdgeBlock {
            cuts: 100,
            width: e.width,
            epsilon: e.epsilon_frac,
            threshold: e.threshold,
            cut_axis: 1,
            size: Vec::new(),
        }
    }
}

impl EdgeBlock {
    pub fn config(&self) -> EdgeConfig {
        EdgeConfig {
            width: self.width,
            threshold: self.threshold,
            epsilon_frac: self.epsilon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HullBlock {
    pub depth: usize,
}

impl Default for HullBlock {
    fn default() -> Self {
        HullBlock { depth: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub pattern: PatternBlock,
    pub hopping: HoppingBlock,
    pub sweep: SweepBlock,
    pub gap: GapBlock,
    pub edge: EdgeBlock,
    pub hull: HullBlock,
    #[serde(skip_serializing)]
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }

    pub fn parallelism(&self) -> Result<Parallelism> {
        self.sweep.parallelism.parse()
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            q_max: self.sweep.q_max,
            size_floor: self.sweep.size_floor,
            omega_samples: self.sweep.omega_samples,
            seed: self.seed,
            min_width: self.gap.min_width,
        }
    }

    /// Canonical text of every setting that can change the results.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}
