//! Boundary spectra of half-space bundles: in-gap states, their weight near
//! the cut, and how densely they fill each bulk gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_half_space, HamiltonianMatrix, HoppingRule};
use crate::parallel::Parallelism;
use crate::pattern::PatternSpec;
use crate::spectral::{eigh, Eigensystem, GapRecord};

/// Points of the regular grid on which coverage is measured.
pub const COVERAGE_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    /// Number of layers next to the cut counted as boundary.
    pub width: usize,
    /// States with at least this much weight on the boundary layers are edge states.
    pub threshold: f64,
    /// Coverage resolution as a fraction of the gap width.
    pub epsilon_frac: f64,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        EdgeConfig {
            width: 10,
            threshold: 0.5,
            epsilon_frac: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeState {
    pub cut_k: i64,
    pub energy: f64,
    /// Squared amplitude on the first `width` layers.
    pub localization: f64,
    pub gap_id: usize,
    pub edge_localized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCoverage {
    pub gap_id: usize,
    /// Number of cuts whose states were pooled.
    pub cuts: usize,
    pub epsilon: f64,
    pub coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    /// In-gap eigenvalues sorted by `(cut_k, energy)`.
    pub states: Vec<EdgeState>,
    pub coverage: Vec<GapCoverage>,
    pub config: EdgeConfig,
}

impl EdgeReport {
    /// Energies of edge-localized states in one gap from the first `cuts` cut offsets.
    pub fn edge_energies(&self, gap_id: usize, cut_set: &[i64]) -> Vec<f64> {
        self.states
            .iter()
            .filter(|s| s.gap_id == gap_id && s.edge_localized && cut_set.contains(&s.cut_k))
            .map(|s| s.energy)
            .collect()
    }
}

fn cut_offset(h: &HamiltonianMatrix) -> Result<i64> {
    match &h.bc {
        crate::hamiltonian::Boundary::DirichletHalf { cut_offset, .. } => Ok(*cut_offset),
        _ => Err(Error::InvalidArgument("edge spectra need half-space matrices".into())),
    }
}

/// Weight of eigenvector `col` on rows less than `width` layers from the cut.
pub fn boundary_weight(h: &HamiltonianMatrix, eig: &Eigensystem, col: usize, width: usize) -> f64 {
    (0..h.dim())
        .filter(|&i| h.depth(i) < width as i64)
        .map(|i| eig.vectors[(i, col)].powi(2))
        .sum()
}

/// Fraction of `COVERAGE_GRID` midpoints of `(gap_lo, gap_hi)` that lie within
/// `epsilon` of some energy.
pub fn gap_coverage(energies: &[f64], gap: &GapRecord, epsilon: f64) -> Result<f64> {
    if !(gap.gap_hi > gap.gap_lo) {
        return Err(Error::InvalidArgument(format!(
            "empty gap ({}, {})",
            gap.gap_lo, gap.gap_hi
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let w = gap.width();
    let covered = (0..COVERAGE_GRID)
        .filter(|&i| {
            let x = gap.gap_lo + (i as f64 + 0.5) * w / COVERAGE_GRID as f64;
            let j = sorted.partition_point(|&e| e < x);
            let near = |k: usize| sorted.get(k).is_some_and(|&e| (e - x).abs() <= epsilon);
            near(j) || (j > 0 && near(j - 1))
        })
        .count();
    Ok(covered as f64 / COVERAGE_GRID as f64)
}

/// Collect the in-gap eigenvalues of every bundle member. Coverage is
/// reported for the whole bundle, pooling edge-localized states only.
pub fn edge_spectrum(
    bundle: &[(HamiltonianMatrix, Eigensystem)],
    gaps: &[GapRecord],
    config: &EdgeConfig,
) -> Result<EdgeReport> {
    let mut states = Vec::new();
    for (h, eig) in bundle {
        if eig.values.len() != h.dim() || eig.vectors.nrows() != h.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenpairs for a {}-dimensional matrix",
                eig.values.len(),
                h.dim()
            )));
        }
        let k = cut_offset(h)?;
        for (col, &energy) in eig.values.iter().enumerate() {
            let Some(gap_id) = gaps.iter().position(|g| energy > g.gap_lo && energy < g.gap_hi) else {
                continue;
            };
            let localization = boundary_weight(h, eig, col, config.width);
            states.push(EdgeState {
                cut_k: k,
                energy,
                localization,
                gap_id,
                edge_localized: localization > config.threshold,
            });
        }
    }
    states.sort_by(|a, b| a.cut_k.cmp(&b.cut_k).then(a.energy.total_cmp(&b.energy)));
    let cuts: Vec<i64> = {
        let mut c: Vec<i64> = bundle.iter().map(|(h, _)| cut_offset(h)).collect::<Result<_>>()?;
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut report = EdgeReport {
        states,
        coverage: Vec::new(),
        config: *config,
    };
    for (gap_id, gap) in gaps.iter().enumerate() {
        let eps = config.epsilon_frac * gap.width();
        let energies = report.edge_energies(gap_id, &cuts);
        report.coverage.push(GapCoverage {
            gap_id,
            cuts: cuts.len(),
            epsilon: eps,
            coverage: gap_coverage(&energies, gap, eps)?,
        });
    }
    Ok(report)
}

/// Coverage of each gap using only the cuts `0..K` for each `K` in `ks`.
pub fn coverage_by_cut_count(report: &EdgeReport, gaps: &[GapRecord], ks: &[usize]) -> Result<Vec<GapCoverage>> {
    let mut cuts: Vec<i64> = report.states.iter().map(|s| s.cut_k).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::new();
    for (gap_id, gap) in gaps.iter().enumerate() {
        let eps = report.config.epsilon_frac * gap.width();
        for &k in ks {
            let set: Vec<i64> = (0..k as i64).collect();
            let energies = report.edge_energies(gap_id, &set);
            out.push(GapCoverage {
                gap_id,
                cuts: k,
                epsilon: eps,
                coverage: gap_coverage(&energies, gap, eps)?,
            });
        }
    }
    Ok(out)
}

/// Build and diagonalise the half-space matrices for `cuts`, then report
/// their boundary spectrum in `gaps`.
#[allow(clippy::too_many_arguments)]
pub fn bundle_edge_spectrum(
    spec: &PatternSpec,
    cut_axis: usize,
    cuts: &[i64],
    sizes: &[usize],
    hopping: &HoppingRule,
    omega: &[f64],
    gaps: &[GapRecord],
    config: &EdgeConfig,
    parallelism: Parallelism,
) -> Result<EdgeReport> {
    if cuts.is_empty() {
        return Err(Error::EmptyRestriction("no cuts requested".into()));
    }
    let bundle = parallelism.try_map(cuts, |&k| {
        let h = build_half_space(spec, cut_axis, k, sizes, hopping, omega)?;
        let eig = eigh(&h)?;
        Ok((h, eig))
    })?;
    edge_spectrum(&bundle, gaps, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Frequency;

    fn gap(lo: f64, hi: f64) -> GapRecord {
        GapRecord {
            alpha: Vec::new(),
            gap_lo: lo,
            gap_hi: hi,
            ids: 0.5,
        }
    }

    #[test]
    fn coverage_geometry() {
        let g = gap(0.0, 1.0);
        assert_eq!(gap_coverage(&[], &g, 0.01).unwrap(), 0.0);
        assert_eq!(gap_coverage(&[0.5], &g, 0.5).unwrap(), 1.0);
        let grid: Vec<f64> = (0..COVERAGE_GRID).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert_eq!(gap_coverage(&grid, &g, 1e-9).unwrap(), 1.0);
        assert!(gap_coverage(&[0.5], &gap(1.0, 1.0), 0.1).is_err());
        // a single energy covers 2 eps of the gap
        assert!((gap_coverage(&[0.5], &g, 0.1).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn periodic_chain_has_no_in_gap_states() {
        let spec = PatternSpec::example_i(Frequency::zero(), 0.0);
        let report = bundle_edge_spectrum(
            &spec,
            0,
            &[0, 1, 2],
            &[40],
            &HoppingRule::default(),
            &[0.0],
            &[],
            &EdgeConfig::default(),
            Parallelism::Sequential,
        )
        .unwrap();
        assert!(report.states.is_empty());
        assert!(report.coverage.is_empty());
    }

    #[test]
    fn bulk_matrix_is_rejected() {
        let spec = PatternSpec::example_i(Frequency::zero(), 0.0);
        let h = crate::hamiltonian::build_bulk_pbc(&spec, &[4], &HoppingRule::default(), &[0.0]).unwrap();
        let eig = eigh(&h).unwrap();
        assert!(edge_spectrum(&[(h, eig)], &[gap(5.0, 6.0)], &EdgeConfig::default()).is_err());
    }

    #[test]
    fn localization_is_a_probability() {
        let spec = PatternSpec::example_i(Frequency::ratio(3, 7).unwrap(), 0.4);
        let h = build_half_space(&spec, 0, 0, &[30], &HoppingRule::default(), &[0.1]).unwrap();
        let eig = eigh(&h).unwrap();
        for col in 0..h.dim() {
            let w = boundary_weight(&h, &eig, col, 10);
            assert!((0.0..=1.0 + 1e-12).contains(&w));
            assert!((boundary_weight(&h, &eig, col, 30) - 1.0).abs() < 1e-10);
        }
    }
}
