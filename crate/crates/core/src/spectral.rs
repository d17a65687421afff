//! Eigenvalues, integrated density of states, gap detection and butterfly sweeps.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_bulk_pbc, Boundary, HamiltonianMatrix, HoppingRule};
use crate::parallel::Parallelism;
use crate::pattern::{Frequency, HullPoint, PatternKind, PatternSpec};

/// Relative residual `|Hv - lambda v| / |H|` allowed on spot-checked pairs.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord {
    pub alpha: Vec<Frequency>,
    pub omega_idx: usize,
    pub omega: HullPoint,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub bc: Boundary,
    pub truncation_error: f64,
}

impl SpectrumRecord {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub alpha: Vec<Frequency>,
    pub gap_lo: f64,
    pub gap_hi: f64,
    pub ids: f64,
}

impl GapRecord {
    pub fn width(&self) -> f64 {
        self.gap_hi - self.gap_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.gap_lo + self.gap_hi)
    }
}

/// Eigenvalues and orthonormal eigenvectors (as columns), ascending.
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn sorted_eigen(m: DMatrix<f64>) -> Result<Eigensystem> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    if n == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let reference = m.clone();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100 * n + 1000)
        .ok_or_else(|| Error::Solver(format!("no convergence for a {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite eigenvalue".into()));
    }
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let norm = values[0].abs().max(values[n - 1].abs()).max(f64::MIN_POSITIVE);
    let mut probes = vec![0, n / 2, n - 1];
    probes.dedup();
    for c in probes {
        let v = vectors.column(c);
        let residual = (&reference * v - v * values[c]).norm();
        if residual > EIGEN_RESIDUAL_TOL * norm {
            return Err(Error::Solver(format!(
                "eigenpair {c} has residual {residual:e} against norm {norm:e}"
            )));
        }
    }
    Ok(Eigensystem { values, vectors })
}

/// All eigenvalues of a Hamiltonian, ascending.
pub fn eigvals_sym(h: &HamiltonianMatrix) -> Result<Vec<f64>> {
    Ok(sorted_eigen(h.entries.clone())?.values)
}

/// Eigenvalues of a dense symmetric matrix, ascending.
pub fn eigvals_dense(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(sorted_eigen(m.clone())?.values)
}

pub fn eigh(h: &HamiltonianMatrix) -> Result<Eigensystem> {
    sorted_eigen(h.entries.clone())
}

/// Fraction of eigenvalues `<= e`. Works on any ordering of `eigs`.
pub fn ids_at(e: f64, eigs: &[f64]) -> f64 {
    if eigs.is_empty() {
        return 0.0;
    }
    eigs.iter().filter(|&&x| x <= e).count() as f64 / eigs.len() as f64
}

/// Maximal gaps of the merged eigenvalue multiset whose width is at least
/// `min_width` times the total span, sorted by energy. The IDS is taken at
/// the gap midpoint.
pub fn detect_gaps(eigs: &[f64], min_width: f64) -> Vec<GapRecord> {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let Some((&lo, &hi)) = sorted.first().zip(sorted.last()) else {
        return Vec::new();
    };
    let span = hi - lo;
    if !(span > 0.0) {
        return Vec::new();
    }
    let total = sorted.len() as f64;
    sorted
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] >= min_width * span)
        .map(|(i, w)| GapRecord {
            alpha: Vec::new(),
            gap_lo: w[0],
            gap_hi: w[1],
            ids: (i + 1) as f64 / total,
        })
        .collect()
}

/// Reduced fractions `p/q` with `0 <= p < q <= q_max`, ordered by `(q, p)`.
pub fn farey(q_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        for p in 0..q {
            if crate::pattern::gcd(p, q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// Deterministic low-discrepancy seeds on the flat hull. A random offset
/// drawn from `seed` is added to the regular grid `j / count` (one axis) or
/// to the additive-recurrence sequence built on the plastic number (two axes).
pub fn omega_grid(spec: &PatternSpec, count: usize, seed: u64) -> Vec<HullPoint> {
    const PLASTIC: f64 = 1.324_717_957_244_746;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.label_dim();
    let offset: [f64; 2] = [rng.random(), rng.random()];
    let steps = [1.0 / PLASTIC, 1.0 / (PLASTIC * PLASTIC)];
    (0..count)
        .map(|j| {
            let mut w = [0.0; 2];
            for axis in 0..d {
                let u = if d == 1 {
                    offset[0] + j as f64 / count as f64
                } else {
                    offset[axis] + j as f64 * steps[axis]
                };
                w[axis] = u.fract() * spec.circumference(axis);
            }
            w
        })
        .collect()
}

/// Smallest multiple of the orbit period along each axis that reaches `floor`.
pub fn approximant_sizes(spec: &PatternSpec, floor: usize) -> Result<Vec<usize>> {
    (0..spec.label_dim())
        .map(|axis| {
            let period = spec.orbit_period(axis).ok_or_else(|| Error::Incommensurate {
                alpha: spec.alpha[axis].to_string(),
                size: floor,
                axis,
            })? as usize;
            Ok(period * floor.max(1).div_ceil(period))
        })
        .collect()
}

/// Spectra of the periodic approximant at each seed.
pub fn sampled_spectra(
    spec: &PatternSpec,
    sizes: &[usize],
    hopping: &HoppingRule,
    omegas: &[HullPoint],
    parallelism: Parallelism,
) -> Result<Vec<SpectrumRecord>> {
    let d = spec.label_dim();
    let indexed: Vec<(usize, HullPoint)> = omegas.iter().copied().enumerate().collect();
    parallelism.try_map(&indexed, |&(idx, w)| {
        let h = build_bulk_pbc(spec, sizes, hopping, &w[..d])?;
        Ok(SpectrumRecord {
            alpha: spec.alpha.clone(),
            omega_idx: idx,
            omega: w,
            eigenvalues: eigvals_sym(&h)?,
            truncation_error: h.truncation_error,
            bc: h.bc,
        })
    })
}

/// Gaps of the multiset union of several spectra.
pub fn merged_gaps(spectra: &[SpectrumRecord], min_width: f64) -> Vec<GapRecord> {
    let all: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
    let alpha = spectra.first().map(|s| s.alpha.clone()).unwrap_or_default();
    detect_gaps(&all, min_width)
        .into_iter()
        .map(|g| GapRecord { alpha: alpha.clone(), ..g })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub q_max: u64,
    /// Each approximant size is the smallest multiple of the orbit period at least this large.
    pub size_floor: usize,
    pub omega_samples: usize,
    pub seed: u64,
    pub min_width: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            q_max: 10,
            size_floor: 100,
            omega_samples: 8,
            seed: 0,
            min_width: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub alpha: Vec<Frequency>,
    pub sizes: Vec<usize>,
    pub spectra: Vec<SpectrumRecord>,
    pub gaps: Vec<GapRecord>,
}

/// Frequencies visited by a sweep. Two-dimensional kinds move along the
/// diagonal `alpha_1 = alpha_2`. The bilayer kinds skip `alpha = 0`, where
/// the small circle collapses and sites coincide.
pub fn sweep_frequencies(kind: PatternKind, q_max: u64) -> Vec<(u64, u64)> {
    let skip_zero = matches!(
        kind,
        PatternKind::ExampleII | PatternKind::ExampleIV | PatternKind::IdealBilayer
    );
    farey(q_max)
        .into_iter()
        .filter(|&(p, _)| !(skip_zero && p == 0))
        .collect()
}

/// Periodic-approximant spectra and merged gaps for every frequency `p/q`
/// with `q <= q_max`, ordered by `(q, p)`.
pub fn butterfly_sweep(
    template: &PatternSpec,
    config: &SweepConfig,
    hopping: &HoppingRule,
    parallelism: Parallelism,
) -> Result<Vec<SweepPoint>> {
    if config.q_max < 2 {
        return Err(Error::InvalidArgument(format!("q_max = {} must be at least 2", config.q_max)));
    }
    if !(config.min_width > 0.0 && config.min_width < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "min_width = {} must lie in (0, 1)",
            config.min_width
        )));
    }
    hopping.validate()?;
    let fractions = sweep_frequencies(template.kind, config.q_max);
    let d = template.label_dim();
    // Parallelise over grid points; each point runs its seeds in order.
    parallelism.try_map(&fractions, |&(p, q)| {
        let alpha = Frequency::ratio(p, q)?;
        let spec = template.with_alpha(vec![alpha; d]);
        let sizes = approximant_sizes(&spec, config.size_floor)?;
        let omegas = omega_grid(&spec, config.omega_samples.max(1), config.seed);
        let spectra = sampled_spectra(&spec, &sizes, hopping, &omegas, Parallelism::Sequential)?;
        let gaps = merged_gaps(&spectra, config.min_width);
        Ok(SweepPoint {
            alpha: spec.alpha.clone(),
            sizes,
            spectra,
            gaps,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_eigenvalues() {
        assert_eq!(eigvals_dense(&DMatrix::from_element(1, 1, 1.0)).unwrap(), vec![1.0]);
        let t = 0.3;
        let m = DMatrix::from_row_slice(2, 2, &[1.0, t, t, 1.0]);
        let e = eigvals_dense(&m).unwrap();
        assert!((e[0] - 0.7).abs() < 1e-15 && (e[1] - 1.3).abs() < 1e-15);
    }

    #[test]
    fn ids_counts() {
        let e = [1.0, 2.0, 3.0];
        assert_eq!(ids_at(2.5, &e), 2.0 / 3.0);
        assert_eq!(ids_at(0.0, &e), 0.0);
        assert_eq!(ids_at(9.0, &e), 1.0);
    }

    #[test]
    fn single_gap() {
        let gaps = detect_gaps(&[0.0, 0.1, 0.9, 1.0], 0.5);
        assert_eq!(gaps.len(), 1);
        assert_eq!((gaps[0].gap_lo, gaps[0].gap_hi, gaps[0].ids), (0.1, 0.9, 0.5));
        let uniform: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(detect_gaps(&uniform, 0.5).is_empty());
    }

    #[test]
    fn farey_small() {
        assert_eq!(farey(2), vec![(0, 1), (1, 2)]);
        assert_eq!(farey(4).len(), 1 + 1 + 2 + 2);
    }

    #[test]
    fn bilayer_sweep_skips_zero() {
        assert_eq!(sweep_frequencies(PatternKind::ExampleII, 3), vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(sweep_frequencies(PatternKind::ExampleI, 2), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn sizes_rule() {
        let spec = PatternSpec::example_i(Frequency::ratio(2, 7).unwrap(), 0.4);
        assert_eq!(approximant_sizes(&spec, 100).unwrap(), vec![105]);
        let spec = PatternSpec::example_ii(Frequency::ratio(1, 2).unwrap(), 0.01, 0.2);
        assert_eq!(approximant_sizes(&spec, 10).unwrap(), vec![12]);
    }

    #[test]
    fn omega_grid_is_reproducible_and_on_hull() {
        let spec = PatternSpec::example_ii(Frequency::ratio(1, 2).unwrap(), 0.01, 0.2);
        let a = omega_grid(&spec, 8, 42);
        assert_eq!(a, omega_grid(&spec, 8, 42));
        assert!(a.iter().all(|w| (0.0..1.5).contains(&w[0])));
        assert_ne!(a, omega_grid(&spec, 8, 43));
    }

    #[test]
    fn solver_rejects_non_square() {
        assert!(eigvals_dense(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn q_max_guard() {
        let spec = PatternSpec::example_i(Frequency::zero(), 0.4);
        let cfg = SweepConfig {
            q_max: 1,
            ..SweepConfig::default()
        };
        assert!(butterfly_sweep(&spec, &cfg, &HoppingRule::default(), Parallelism::Sequential).is_err());
    }
}
