//! Gap-labelling arithmetic over the noncommutative torus of a pattern.
//!
//! A gap label is a tuple of integers `c_J`, one per even-cardinality subset
//! `J` of the algebra generators `{1..n}`, and predicts the IDS
//! `sum_J c_J Pf(Theta_J)`. Subsets are bitmasks (bit `i - 1` stands for
//! generator `i`) listed by cardinality, then lexicographically.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{PatternKind, PatternSpec};
use crate::spectral::GapRecord;

pub const DEFAULT_MAX_COEFF: i64 = 5;
pub const DEFAULT_FIT_TOL: f64 = 1e-6;
/// Tolerance for comparing labels across different approximants.
pub const CROSS_APPROXIMANT_TOL: f64 = 1e-3;

/// Residuals closer than this are treated as equal when ranking fits.
const RESIDUAL_TIE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMatrix {
    pub entries: DMatrix<f64>,
    pub source: PatternKind,
}

impl ThetaMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Pfaffian of the principal submatrix on the generators in `mask`.
    pub fn pfaffian_of(&self, mask: u32) -> f64 {
        let idx: Vec<usize> = (0..self.n()).filter(|i| mask & (1 << i) != 0).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])]);
        pfaffian(&sub).expect("even subsets only")
    }
}

fn antisymmetric(n: usize, pairs: &[(usize, usize, f64)], source: PatternKind) -> ThetaMatrix {
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, v) in pairs {
        m[(i - 1, j - 1)] = v;
        m[(j - 1, i - 1)] = -v;
    }
    ThetaMatrix { entries: m, source }
}

/// The angle matrix of the torus algebra for a pattern kind, with generator
/// list (hull generators, then shift generators).
pub fn theta_for(spec: &PatternSpec) -> ThetaMatrix {
    let a = |i: usize| spec.alpha[i].value();
    let folded = |x: f64| x / (1.0 + x);
    match spec.kind {
        PatternKind::ExampleI | PatternKind::CutProject => antisymmetric(2, &[(1, 2, a(0))], spec.kind),
        PatternKind::ExampleII | PatternKind::IdealBilayer => {
            antisymmetric(2, &[(1, 2, folded(a(0)))], spec.kind)
        }
        PatternKind::ExampleIII => antisymmetric(4, &[(1, 3, a(0)), (2, 4, a(1))], spec.kind),
        PatternKind::ExampleIV => {
            antisymmetric(4, &[(1, 3, folded(a(0))), (2, 4, folded(a(1)))], spec.kind)
        }
    }
}

/// Pfaffian by expansion along the first row. The empty matrix has Pfaffian 1.
pub fn pfaffian(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", n, m.ncols())));
    }
    if n % 2 == 1 {
        return Err(Error::OddPfaffian(n));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(pf_rec(m, &idx))
}

fn pf_rec(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut total = 0.0;
    for k in 1..idx.len() {
        let a = m[(first, idx[k])];
        if a == 0.0 {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[k]).collect();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * a * pf_rec(m, &rest);
    }
    total
}

/// Even subsets of `{1..n}` by cardinality, then lexicographically.
pub fn even_subsets(n: usize) -> Vec<u32> {
    let mut all: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() % 2 == 0).collect();
    all.sort_by_key(|&m| (m.count_ones(), subset_indices(m)));
    all
}

fn subset_indices(mask: u32) -> Vec<u32> {
    (0..32).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect()
}

pub fn subset_name(mask: u32) -> String {
    if mask == 0 {
        "empty".into()
    } else {
        subset_indices(mask).iter().map(|i| i.to_string()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelTuple {
    /// Subset masks in the fixed order of [`even_subsets`].
    pub subsets: Vec<u32>,
    pub coeffs: Vec<i64>,
}

impl LabelTuple {
    pub fn zero(n: usize) -> Self {
        let subsets = even_subsets(n);
        let coeffs = vec![0; subsets.len()];
        LabelTuple { subsets, coeffs }
    }

    pub fn from_coeffs(n: usize, coeffs: &[i64]) -> Result<Self> {
        let mut t = Self::zero(n);
        if coeffs.len() != t.coeffs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} subsets",
                coeffs.len(),
                t.coeffs.len()
            )));
        }
        t.coeffs.copy_from_slice(coeffs);
        Ok(t)
    }

    pub fn get(&self, mask: u32) -> i64 {
        self.subsets
            .iter()
            .position(|&m| m == mask)
            .map_or(0, |i| self.coeffs[i])
    }

    pub fn set(&mut self, mask: u32, value: i64) {
        if let Some(i) = self.subsets.iter().position(|&m| m == mask) {
            self.coeffs[i] = value;
        }
    }

    pub fn value(&self, theta: &ThetaMatrix) -> f64 {
        self.subsets
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0)
            .map(|(&m, &c)| c as f64 * theta.pfaffian_of(m))
            .sum()
    }

    pub fn l1(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Column names `c_empty`, `c_12`, ... in subset order.
    pub fn column_names(n: usize) -> Vec<String> {
        even_subsets(n).into_iter().map(|m| format!("c_{}", subset_name(m))).collect()
    }
}

impl fmt::Display for LabelTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Subsets whose Pfaffian is nonzero, other than the empty set. Coefficients
/// on the remaining subsets cannot change the predicted value and stay 0.
fn active_subsets(theta: &ThetaMatrix) -> Vec<(u32, f64)> {
    even_subsets(theta.n())
        .into_iter()
        .filter(|&m| m != 0)
        .map(|m| (m, theta.pfaffian_of(m)))
        .filter(|&(_, pf)| pf != 0.0)
        .collect()
}

fn for_each_tuple(ranges: usize, max_coeff: i64, mut f: impl FnMut(&[i64])) {
    let mut c = vec![-max_coeff; ranges];
    loop {
        f(&c);
        let mut i = 0;
        loop {
            if i == ranges {
                return;
            }
            if c[i] < max_coeff {
                c[i] += 1;
                break;
            }
            c[i] = -max_coeff;
            i += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictedValue {
    pub value: f64,
    pub labels: Vec<LabelTuple>,
}

/// All values `sum_J c_J Pf(Theta_J)` in `[0, N]` with `|c_J| <= max_coeff`
/// on the nonempty subsets, sorted ascending. The constant coefficient
/// ranges over `|c_empty| <= max(max_coeff, N)`. Values equal to `1e-12` are
/// merged and keep every tuple that produces them.
pub fn predicted_ids_set(theta: &ThetaMatrix, max_coeff: i64, degrees: usize) -> Vec<PredictedValue> {
    let active = active_subsets(theta);
    let n_const = max_coeff.max(degrees as i64);
    let mut raw: Vec<(f64, LabelTuple)> = Vec::new();
    for_each_tuple(active.len(), max_coeff.max(0), |c| {
        let partial: f64 = c.iter().zip(&active).map(|(&ci, &(_, pf))| ci as f64 * pf).sum();
        for c0 in -n_const..=n_const {
            let v = c0 as f64 + partial;
            if v >= -RESIDUAL_TIE && v <= degrees as f64 + RESIDUAL_TIE {
                let mut t = LabelTuple::zero(theta.n());
                t.set(0, c0);
                for (&ci, &(m, _)) in c.iter().zip(&active) {
                    t.set(m, ci);
                }
                raw.push((v, t));
            }
        }
    });
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| rank_key(&a.1).cmp(&rank_key(&b.1))));
    let mut out: Vec<PredictedValue> = Vec::new();
    for (v, t) in raw {
        match out.last_mut() {
            Some(last) if (v - last.value).abs() <= RESIDUAL_TIE => last.labels.push(t),
            _ => out.push(PredictedValue {
                value: v,
                labels: vec![t],
            }),
        }
    }
    out
}

fn rank_key(t: &LabelTuple) -> (i64, Vec<i64>) {
    (t.l1(), t.coeffs.clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelFit {
    pub label: LabelTuple,
    pub residual: f64,
    /// Other tuples within tolerance, best first.
    pub alternatives: Vec<(LabelTuple, f64)>,
}

impl LabelFit {
    pub fn is_ambiguous(&self) -> bool {
        !self.alternatives.is_empty()
    }
}

/// Integer label closest to `ids`. Candidates within `tol` are ranked by
/// residual, then by `sum |c_J|`, then lexicographically in subset order.
pub fn fit_labels(ids: f64, theta: &ThetaMatrix, max_coeff: i64, tol: f64) -> Result<LabelFit> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if !ids.is_finite() {
        return Err(Error::InvalidArgument(format!("IDS {ids} is not finite")));
    }
    let active = active_subsets(theta);
    let n_const = max_coeff.max(1);
    let mut candidates: Vec<(LabelTuple, f64)> = Vec::new();
    let mut best_seen = f64::INFINITY;
    for_each_tuple(active.len(), max_coeff.max(0), |c| {
        let partial: f64 = c.iter().zip(&active).map(|(&ci, &(_, pf))| ci as f64 * pf).sum();
        let target = ids - partial;
        let mut tried = [target.floor() as i64, target.ceil() as i64];
        if tried[0] == tried[1] {
            tried[1] = tried[0] + 1;
        }
        for c0 in tried {
            if c0.abs() > n_const {
                continue;
            }
            let residual = (ids - (c0 as f64 + partial)).abs();
            best_seen = best_seen.min(residual);
            if residual <= tol {
                let mut t = LabelTuple::zero(theta.n());
                t.set(0, c0);
                for (&ci, &(m, _)) in c.iter().zip(&active) {
                    t.set(m, ci);
                }
                candidates.push((t, residual));
            }
        }
    });
    if candidates.is_empty() {
        return Err(Error::NoLabel {
            ids,
            tol,
            best: best_seen,
        });
    }
    candidates.sort_by(|a, b| {
        let ra = (a.1 / RESIDUAL_TIE).floor();
        let rb = (b.1 / RESIDUAL_TIE).floor();
        ra.total_cmp(&rb).then_with(|| rank_key(&a.0).cmp(&rank_key(&b.0)))
    });
    let mut iter = candidates.into_iter();
    let (label, residual) = iter.next().unwrap();
    Ok(LabelFit {
        label,
        residual,
        alternatives: iter.collect(),
    })
}

/// Index (1-based) of the shift generator cut by a boundary normal to label
/// axis `label_axis` (1-based): `n - d + j`.
pub fn cut_generator_index(theta: &ThetaMatrix, label_dim: usize, label_axis: usize) -> usize {
    theta.n() - label_dim + label_axis
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgePrediction {
    pub predicted: bool,
    /// Set when the prediction rests on an unproven identification of the hull.
    pub conjectural: bool,
    pub reason: String,
}

/// Whether a cut through generator `cut_index` should produce edge states
/// filling the gap with this label.
pub fn predict_edge(label: &LabelTuple, cut_index: usize, kind: PatternKind) -> EdgePrediction {
    let bit = 1u32 << (cut_index - 1);
    let hit: Vec<String> = label
        .subsets
        .iter()
        .zip(&label.coeffs)
        .filter(|(&m, &c)| c != 0 && m & bit != 0)
        .map(|(&m, &c)| format!("c_{}={c}", subset_name(m)))
        .collect();
    let conjectural = kind == PatternKind::IdealBilayer;
    if kind == PatternKind::CutProject {
        return EdgePrediction {
            predicted: false,
            conjectural,
            reason: "hull is a Cantor set, boundary K1 group is trivial".into(),
        };
    }
    if hit.is_empty() {
        EdgePrediction {
            predicted: false,
            conjectural,
            reason: format!("no nonzero coefficient involves generator {cut_index}"),
        }
    } else {
        EdgePrediction {
            predicted: true,
            conjectural,
            reason: format!("{} involve generator {cut_index}", hit.join(", ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    pub points: usize,
    /// Real-valued regression of IDS against `theta_12` (two-generator algebras only).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Integer label shared by the whole track.
    pub label: LabelTuple,
    /// Largest `|IDS - label value|` over the track.
    pub residual: f64,
    /// Every point's own fitted label equals the shared label.
    pub pointwise_agree: bool,
}

impl ContinuityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.residual < tol && self.pointwise_agree
    }
}

/// Check that a tracked gap keeps one integer label across a sweep.
///
/// For two-generator algebras the IDS is regressed linearly on `theta_12`
/// and the rounded intercept and slope form the shared label. For larger
/// algebras the label fitted at the first point is tested against the rest.
pub fn label_continuity(
    track: &[(ThetaMatrix, f64)],
    max_coeff: i64,
    tol: f64,
) -> Result<ContinuityReport> {
    if track.len() < 3 {
        return Err(Error::TrackTooShort(track.len()));
    }
    let n = track[0].0.n();
    if track.iter().any(|(t, _)| t.n() != n) {
        return Err(Error::DimensionMismatch("track mixes algebra sizes".into()));
    }
    let pointwise: Vec<Option<LabelTuple>> = track
        .iter()
        .map(|(t, ids)| fit_labels(*ids, t, max_coeff, tol).ok().map(|f| f.label))
        .collect();

    let (label, slope, intercept) = if n == 2 {
        let xs: Vec<f64> = track.iter().map(|(t, _)| t.entries[(0, 1)]).collect();
        let ys: Vec<f64> = track.iter().map(|(_, y)| *y).collect();
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if !(sxx > 0.0) {
            return Err(Error::InvalidArgument("track does not vary theta".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let label = LabelTuple::from_coeffs(2, &[intercept.round() as i64, slope.round() as i64])?;
        (label, Some(slope), Some(intercept))
    } else {
        let label = pointwise[0].clone().ok_or(Error::NoLabel {
            ids: track[0].1,
            tol,
            best: f64::NAN,
        })?;
        (label, None, None)
    };
    let residual = track
        .iter()
        .map(|(t, ids)| (ids - label.value(t)).abs())
        .fold(0.0, f64::max);
    let pointwise_agree = pointwise.iter().all(|p| p.as_ref() == Some(&label));
    Ok(ContinuityReport {
        points: track.len(),
        slope,
        intercept,
        label,
        residual,
        pointwise_agree,
    })
}

fn overlap(a: &GapRecord, b: &GapRecord) -> f64 {
    a.gap_hi.min(b.gap_hi) - a.gap_lo.max(b.gap_lo)
}

/// Follow gap `start` of the first sweep point through the later ones,
/// stepping each time to the gap with the largest energy overlap. The track
/// ends at the first point with no overlapping gap.
pub fn track_gap(sweep: &[Vec<GapRecord>], start: usize) -> Vec<GapRecord> {
    let Some(first) = sweep.first().and_then(|g| g.get(start)) else {
        return Vec::new();
    };
    let mut track = vec![first.clone()];
    for gaps in &sweep[1..] {
        let current = track.last().unwrap();
        let next = gaps
            .iter()
            .map(|g| (overlap(current, g), g))
            .filter(|(o, _)| *o > 0.0)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        match next {
            Some((_, g)) => track.push(g.clone()),
            None => break,
        }
    }
    track
}
