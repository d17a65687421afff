//! Finite hopping Hamiltonians `H_nm = exp(-beta |p_n - p_m|)` over generated patterns.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::Parallelism;
use crate::pattern::{generate, HullPoint, Label, PatternSpec, Point, Window, DELONE_MIN_SEPARATION};

/// Couplings beyond `cutoff + TAIL_REACH / beta` are below `e^-40` and are
/// left out of the measured truncation error.
const TAIL_REACH: f64 = 40.0;

/// Relative slack on the cutoff, so that distances equal to the cutoff up to
/// rounding are kept or dropped consistently.
const CUTOFF_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoppingRule {
    pub beta: f64,
    pub cutoff_dist: f64,
}

impl Default for HoppingRule {
    fn default() -> Self {
        HoppingRule {
            beta: 1.0,
            cutoff_dist: 7.0,
        }
    }
}

impl HoppingRule {
    pub fn new(beta: f64, cutoff_dist: f64) -> Result<Self> {
        let rule = HoppingRule { beta, cutoff_dist };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta = {} must be positive", self.beta)));
        }
        if !(self.cutoff_dist > 0.0 && self.cutoff_dist.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cutoff_dist = {} must be positive",
                self.cutoff_dist
            )));
        }
        Ok(())
    }

    pub fn coupling(&self, d: f64) -> f64 {
        (-self.beta * d).exp()
    }

    pub fn within_cutoff(&self, d: f64) -> bool {
        d <= self.cutoff_dist * (1.0 + CUTOFF_SLACK)
    }

    /// `2 e^{-beta c} / (1 - e^{-beta})`: the dropped tail of a unit-spaced chain.
    pub fn tail_bound(&self) -> f64 {
        2.0 * (-self.beta * self.cutoff_dist).exp() / (1.0 - (-self.beta).exp())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    PeriodicApproximant {
        period: Vec<usize>,
    },
    DirichletHalf {
        cut_axis: usize,
        cut_offset: i64,
        sizes: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    pub entries: DMatrix<f64>,
    /// Row `i` belongs to the site with label `index_map[i]`.
    pub index_map: Vec<Label>,
    pub positions: Vec<Point>,
    pub bc: Boundary,
    /// Upper bound on the operator norm of the dropped couplings, measured
    /// as the largest row sum of hoppings beyond the cutoff.
    pub truncation_error: f64,
    /// Smallest separation seen between two sites or periodic images.
    pub r_min: f64,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn row_of(&self, n: Label) -> Option<usize> {
        self.index_map.iter().position(|&m| m == n)
    }

    /// Distance of row `i` from the cut, in layers. Zero for bulk matrices.
    pub fn depth(&self, i: usize) -> i64 {
        match &self.bc {
            Boundary::DirichletHalf {
                cut_axis, cut_offset, ..
            } => self.index_map[i][*cut_axis] - cut_offset,
            Boundary::PeriodicApproximant { .. } => 0,
        }
    }

    /// Coordinate list `row col value` of the nonzero upper triangle, 0-based.
    pub fn write_coo<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                let v = self.entries[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

/// A period vector along one ambient coordinate.
#[derive(Clone, Copy, Debug)]
struct Period {
    coord: usize,
    length: f64,
}

fn axis_period(spec: &PatternSpec, axis: usize, size: usize) -> Result<()> {
    let alpha = spec.alpha[axis];
    let period = spec.orbit_period(axis).ok_or_else(|| Error::Incommensurate {
        alpha: alpha.to_string(),
        size,
        axis,
    })?;
    if size == 0 || !(size as u64).is_multiple_of(period) {
        return Err(Error::Incommensurate {
            alpha: alpha.to_string(),
            size,
            axis,
        });
    }
    Ok(())
}

/// Read off the physical period `p_{n + L e_axis} - p_n` and require it to be
/// aligned with a single ambient coordinate.
fn physical_period(a: Point, b: Point, axis: usize, size: usize) -> Result<Period> {
    let v = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let (coord, _) = v
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .unwrap();
    let length = v[coord].abs();
    if length <= DELONE_MIN_SEPARATION {
        // p_{n + L e} and p_n coincide
        return Err(Error::NotDelone { r_min: length });
    }
    let off: f64 = (0..3).filter(|&c| c != coord).map(|c| v[c].abs()).sum();
    if off > 1e-9 * length.max(1.0) {
        return Err(Error::InvalidSpec(format!(
            "period vector {v:?} along axis {axis} (size {size}) is not aligned with a coordinate axis"
        )));
    }
    Ok(Period { coord, length })
}

struct Couplings {
    entries: DMatrix<f64>,
    truncation_error: f64,
    r_min: f64,
}

fn image_range(delta: f64, p: &Period, reach: f64) -> std::ops::RangeInclusive<i64> {
    let lo = ((-reach - delta) / p.length).ceil() as i64;
    let hi = ((reach - delta) / p.length).floor() as i64;
    lo..=hi
}

/// Sum `exp(-beta |x_i - x_j + images|)` over all periodic images within the
/// cutoff. Self-images of a site are left out, so the diagonal is exactly 1.
fn couplings(points: &[Point], periods: &[Period], hopping: &HoppingRule) -> Result<Couplings> {
    let n = points.len();
    let reach = hopping.cutoff_dist + TAIL_REACH / hopping.beta;
    if periods.len() == 2 && periods[0].coord == periods[1].coord {
        return Err(Error::InvalidSpec("period vectors are parallel".into()));
    }
    let mut entries = DMatrix::<f64>::zeros(n, n);
    let mut dropped = vec![0.0f64; n];
    let mut r_min = f64::INFINITY;

    for i in 0..n {
        entries[(i, i)] = 1.0;
        for j in i..n {
            let base = [
                points[j][0] - points[i][0],
                points[j][1] - points[i][1],
                points[j][2] - points[i][2],
            ];
            let mut kept = 0.0;
            let mut lost = 0.0;
            let mut visit = |shift: [f64; 3]| {
                let d = ((base[0] + shift[0]).powi(2) + (base[1] + shift[1]).powi(2) + (base[2] + shift[2]).powi(2))
                    .sqrt();
                if i == j && shift == [0.0; 3] {
                    return;
                }
                r_min = r_min.min(d);
                if hopping.within_cutoff(d) {
                    if i != j {
                        kept += hopping.coupling(d);
                    }
                } else if d <= reach {
                    lost += hopping.coupling(d);
                }
            };
            match periods {
                [] => visit([0.0; 3]),
                [p] => {
                    for s in image_range(base[p.coord], p, reach) {
                        let mut shift = [0.0; 3];
                        shift[p.coord] = s as f64 * p.length;
                        visit(shift);
                    }
                }
                [p, q] => {
                    for s in image_range(base[p.coord], p, reach) {
                        for t in image_range(base[q.coord], q, reach) {
                            let mut shift = [0.0; 3];
                            shift[p.coord] = s as f64 * p.length;
                            shift[q.coord] = t as f64 * q.length;
                            visit(shift);
                        }
                    }
                }
                _ => unreachable!("at most two periodic axes"),
            }
            if i != j {
                entries[(i, j)] = kept;
                dropped[i] += lost;
                dropped[j] += lost;
            } else {
                dropped[i] += lost;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            entries[(i, j)] = entries[(j, i)];
        }
    }
    if r_min <= DELONE_MIN_SEPARATION {
        return Err(Error::NotDelone { r_min });
    }
    Ok(Couplings {
        entries,
        truncation_error: dropped.into_iter().fold(0.0, f64::max),
        r_min,
    })
}

fn with_seed(spec: &PatternSpec, omega: &[f64]) -> Result<PatternSpec> {
    if omega.len() > spec.label_dim() {
        return Err(Error::InvalidSpec(format!(
            "{} takes {} seed coordinates, got {}",
            spec.kind.name(),
            spec.label_dim(),
            omega.len()
        )));
    }
    spec.with_omega(omega).validated()
}

fn check_sizes(spec: &PatternSpec, sizes: &[usize]) -> Result<()> {
    if sizes.len() != spec.label_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} needs {} sizes, got {}",
            spec.kind.name(),
            spec.label_dim(),
            sizes.len()
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::EmptyRestriction("zero size".into()));
    }
    Ok(())
}

/// Periodic approximant over labels `[0, L_j)` per axis. Every frequency must
/// be an exact ratio whose orbit period divides the size on its axis.
pub fn build_bulk_pbc(
    spec: &PatternSpec,
    sizes: &[usize],
    hopping: &HoppingRule,
    omega: &[f64],
) -> Result<HamiltonianMatrix> {
    hopping.validate()?;
    let spec = with_seed(spec, omega)?;
    check_sizes(&spec, sizes)?;
    let d = spec.label_dim();
    for (axis, &size) in sizes.iter().enumerate() {
        axis_period(&spec, axis, size)?;
    }
    let window = if d == 1 {
        Window::line(0, sizes[0] as i64)
    } else {
        Window::rect((0, sizes[0] as i64), (0, sizes[1] as i64))
    };
    let pattern = generate(&spec, window)?;
    let origin = pattern.point([0, 0]).unwrap();
    let mut periods = Vec::with_capacity(d);
    for (axis, &size) in sizes.iter().enumerate() {
        let mut n = [0, 0];
        n[axis] = size as i64;
        periods.push(physical_period(origin, pattern.point(n).unwrap(), axis, size)?);
    }

    let labels: Vec<Label> = window
        .labels()
        .into_iter()
        .filter(|n| (0..d).all(|a| n[a] < sizes[a] as i64))
        .collect();
    let positions: Vec<Point> = labels.iter().map(|&n| pattern.point(n).unwrap()).collect();
    let c = couplings(&positions, &periods, hopping)?;
    Ok(HamiltonianMatrix {
        entries: c.entries,
        index_map: labels,
        positions,
        bc: Boundary::PeriodicApproximant {
            period: sizes.to_vec(),
        },
        truncation_error: c.truncation_error,
        r_min: c.r_min,
    })
}

/// Dirichlet restriction to `n[cut_axis] >= k`, keeping `sizes[cut_axis]`
/// layers (the far end is open as well). In two dimensions the other axis is
/// periodic and must be commensurate. Rows run over the cut axis slowest.
pub fn build_half_space(
    spec: &PatternSpec,
    cut_axis: usize,
    k: i64,
    sizes: &[usize],
    hopping: &HoppingRule,
    omega: &[f64],
) -> Result<HamiltonianMatrix> {
    hopping.validate()?;
    let spec = with_seed(spec, omega)?;
    let d = spec.label_dim();
    if cut_axis >= d {
        return Err(Error::InvalidArgument(format!(
            "cut axis {} does not exist for a {d}-dimensional label lattice",
            cut_axis + 1
        )));
    }
    check_sizes(&spec, sizes)?;
    let depth = sizes[cut_axis] as i64;
    let (lo, hi) = (k.min(0), (k + depth - 1).max(0));

    let (pattern, periods, uncut) = if d == 1 {
        (generate(&spec, Window::line(lo, hi))?, Vec::new(), None)
    } else {
        let u = 1 - cut_axis;
        axis_period(&spec, u, sizes[u])?;
        let mut range = [(0, 0); 2];
        range[cut_axis] = (lo, hi);
        range[u] = (0, sizes[u] as i64);
        let pattern = generate(&spec, Window::rect(range[0], range[1]))?;
        let mut a = [0, 0];
        a[cut_axis] = k;
        let mut b = a;
        b[u] = sizes[u] as i64;
        let p0 = physical_period([0.0; 3], {
            let mut e = [0, 0];
            e[u] = sizes[u] as i64;
            pattern.point(e).unwrap()
        }, u, sizes[u])?;
        let pk = physical_period(pattern.point(a).unwrap(), pattern.point(b).unwrap(), u, sizes[u])?;
        if pk.coord != p0.coord || (pk.length - p0.length).abs() > 1e-9 * p0.length.max(1.0) {
            return Err(Error::InvalidSpec(format!(
                "period along axis {} changes across the cut axis",
                u + 1
            )));
        }
        (pattern, vec![p0], Some(u))
    };

    let mut labels = Vec::with_capacity(sizes.iter().product());
    for c in k..k + depth {
        match uncut {
            None => labels.push([c, 0]),
            Some(u) => {
                for m in 0..sizes[u] as i64 {
                    let mut n = [0, 0];
                    n[cut_axis] = c;
                    n[u] = m;
                    labels.push(n);
                }
            }
        }
    }
    let positions: Vec<Point> = labels.iter().map(|&n| pattern.point(n).unwrap()).collect();
    let c = couplings(&positions, &periods, hopping)?;
    Ok(HamiltonianMatrix {
        entries: c.entries,
        index_map: labels,
        positions,
        bc: Boundary::DirichletHalf {
            cut_axis,
            cut_offset: k,
            sizes: sizes.to_vec(),
        },
        truncation_error: c.truncation_error,
        r_min: c.r_min,
    })
}

/// One half-space matrix per cut offset, in the order given.
pub fn build_bundle(
    spec: &PatternSpec,
    cut_axis: usize,
    cuts: &[i64],
    sizes: &[usize],
    hopping: &HoppingRule,
    omega: &[f64],
    parallelism: Parallelism,
) -> Result<Vec<HamiltonianMatrix>> {
    if cuts.is_empty() {
        return Err(Error::EmptyRestriction("no cuts requested".into()));
    }
    parallelism.try_map(cuts, |&k| build_half_space(spec, cut_axis, k, sizes, hopping, omega))
}

/// Seed reached from `omega` after shifting by `k` layers along `axis`.
pub fn shifted_seed(spec: &PatternSpec, omega: &[f64], axis: usize, k: i64) -> HullPoint {
    let spec = spec.with_omega(omega);
    let mut n = [0, 0];
    n[axis] = k;
    spec.orbit(n)
}
