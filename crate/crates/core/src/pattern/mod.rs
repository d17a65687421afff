//! Dynamically generated point patterns.
//!
//! A pattern is produced from a seed `omega` on the hull by walking the label
//! lattice: `p_0 = 0` and `p_{n+e} = p_n + Gamma_e(tau_n omega)`.

mod delone;
mod export;
mod frequency;
mod generators;
mod spec;

pub use delone::{delone_check, DeloneCertificate, DELONE_MIN_SEPARATION};
pub use export::write_pattern_csv;
pub use frequency::Frequency;
pub use generators::{check_consistency, gamma, ConsistencyReport, Generator, CONSISTENCY_TOLERANCE};
pub use spec::{HullPoint, Label, PatternKind, PatternSpec, Point};

pub(crate) use frequency::gcd;

use std::sync::Arc;

use crate::error::{Error, Result};

/// Inclusive label ranges, one per label axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: Label,
    pub hi: Label,
    pub dim: usize,
}

impl Window {
    pub fn line(lo: i64, hi: i64) -> Self {
        Window {
            lo: [lo, 0],
            hi: [hi, 0],
            dim: 1,
        }
    }

    pub fn rect(axis0: (i64, i64), axis1: (i64, i64)) -> Self {
        Window {
            lo: [axis0.0, axis1.0],
            hi: [axis0.1, axis1.1],
            dim: 2,
        }
    }

    pub fn extent(&self, axis: usize) -> usize {
        if axis >= self.dim || self.hi[axis] < self.lo[axis] {
            if axis >= self.dim {
                1
            } else {
                0
            }
        } else {
            (self.hi[axis] - self.lo[axis] + 1) as usize
        }
    }

    pub fn len(&self) -> usize {
        (0..self.dim).map(|a| self.extent(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, n: Label) -> bool {
        (0..2).all(|a| {
            if a < self.dim {
                n[a] >= self.lo[a] && n[a] <= self.hi[a]
            } else {
                n[a] == 0
            }
        })
    }

    /// Storage index of a label: axis 0 runs fastest.
    pub fn index(&self, n: Label) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let i0 = (n[0] - self.lo[0]) as usize;
        if self.dim == 1 {
            Some(i0)
        } else {
            Some((n[1] - self.lo[1]) as usize * self.extent(0) + i0)
        }
    }

    /// All labels in storage order.
    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::with_capacity(self.len());
        if self.dim == 1 {
            for n0 in self.lo[0]..=self.hi[0] {
                out.push([n0, 0]);
            }
        } else {
            for n1 in self.lo[1]..=self.hi[1] {
                for n0 in self.lo[0]..=self.hi[0] {
                    out.push([n0, n1]);
                }
            }
        }
        out
    }

    fn shifted(&self, k: Label) -> Window {
        let mut w = *self;
        for (a, ka) in k.iter().enumerate().take(self.dim) {
            w.lo[a] -= ka;
            w.hi[a] -= ka;
        }
        w
    }
}

/// The pattern as first generated, before any relabeling.
#[derive(Debug, PartialEq)]
struct Generated {
    spec: PatternSpec,
    window: Window,
    points: Vec<Point>,
}

/// A finite piece of a generated pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct PointPattern {
    spec: PatternSpec,
    window: Window,
    points: Vec<Point>,
    lipschitz: f64,
    root: Arc<Generated>,
    /// Total relabeling applied to `root`.
    offset: Label,
}

impl PointPattern {
    pub fn spec(&self) -> &PatternSpec {
        &self.spec
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim_label(&self) -> usize {
        self.window.dim
    }

    pub fn dim_space(&self) -> usize {
        self.spec.space_dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in window storage order.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, n: Label) -> Option<Point> {
        self.window.index(n).map(|i| self.points[i])
    }

    /// Labels paired with points, in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Label, Point)> + '_ {
        self.window.labels().into_iter().zip(self.points.iter().copied())
    }

    /// `D = d * max |Gamma_e|` over the steps taken inside this window, so that
    /// `|p_{n+m} - p_n| <= D |m|` holds for any two labels of the window.
    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }
}

pub(crate) fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Generate the pattern of `spec` over `window`, walking axis 0 first.
pub fn generate(spec: &PatternSpec, window: Window) -> Result<PointPattern> {
    generate_along(spec, window, [0, 1])
}

/// Generate along a chosen axis order. For two-dimensional labels the walk
/// first covers the line through the origin along `order[0]`, then every
/// line along `order[1]`. The result is path independent up to rounding.
pub fn generate_along(spec: &PatternSpec, window: Window, order: [usize; 2]) -> Result<PointPattern> {
    let spec = spec.validated()?;
    let d = spec.label_dim();
    if window.dim != d {
        return Err(Error::Window(format!(
            "{} needs a {d}-dimensional window, got {}",
            spec.kind.name(),
            window.dim
        )));
    }
    if !window.contains([0, 0]) {
        return Err(Error::Window("window must contain label 0".into()));
    }
    if d == 2 && !(order == [0, 1] || order == [1, 0]) {
        return Err(Error::InvalidArgument(format!("bad axis order {order:?}")));
    }

    let report = check_consistency(&spec, 16, 0x5eed)?;
    if !report.passed() {
        return Err(Error::Consistency {
            residual: report.max_residual,
            tolerance: report.tolerance,
        });
    }

    let seed = spec.seed();
    let mut points: Vec<Option<Point>> = vec![None; window.len()];
    let mut max_step = 0.0f64;
    let origin = [0, 0];
    points[window.index(origin).unwrap()] = Some([0.0; 3]);

    let mut walk = |points: &mut Vec<Option<Point>>, start: Label, axis: usize| -> Result<()> {
        for positive in [true, false] {
            let e = if positive {
                Generator::plus(axis)
            } else {
                Generator::minus(axis)
            };
            let mut n = start;
            let mut p = points[window.index(n).unwrap()].unwrap();
            loop {
                let mut next = n;
                next[axis] += if positive { 1 } else { -1 };
                let Some(idx) = window.index(next) else { break };
                let step = gamma(&spec, e, spec.tau(seed, n))?;
                max_step = max_step.max(distance(&step, &[0.0; 3]));
                p = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
                points[idx] = Some(p);
                n = next;
            }
        }
        Ok(())
    };

    if d == 1 {
        walk(&mut points, origin, 0)?;
    } else {
        let (first, second) = (order[0], order[1]);
        walk(&mut points, origin, first)?;
        for m in window.lo[first]..=window.hi[first] {
            let mut start = [0, 0];
            start[first] = m;
            walk(&mut points, start, second)?;
        }
    }

    let points: Vec<Point> = points
        .into_iter()
        .map(|p| p.expect("every label is reached by the walk"))
        .collect();
    let root = Arc::new(Generated {
        spec: spec.clone(),
        window,
        points: points.clone(),
    });
    Ok(PointPattern {
        spec,
        window,
        points,
        lipschitz: d as f64 * max_step,
        root,
        offset: [0, 0],
    })
}

/// Relabel so that the point at label `k` becomes the origin:
/// `p'_n = p_{n+k} - p_k`, with seed `tau_k omega`. Relabelings compose
/// through the originally generated points, so undoing a shift restores
/// the pattern bit for bit.
pub fn shift_relabel(pattern: &PointPattern, k: Label) -> Result<PointPattern> {
    let window = pattern.window;
    let k = if window.dim == 1 { [k[0], 0] } else { k };
    if !window.contains(k) {
        return Err(Error::Window(format!(
            "shift {k:?} leaves the generated window {:?}..{:?}",
            window.lo, window.hi
        )));
    }
    let root = &pattern.root;
    let offset = [pattern.offset[0] + k[0], pattern.offset[1] + k[1]];
    let (points, spec) = if offset == [0, 0] {
        (root.points.clone(), root.spec.clone())
    } else {
        let i = root.window.index(offset).expect("shift stays inside the generated window");
        let pk = root.points[i];
        let points = root
            .points
            .iter()
            .map(|p| [p[0] - pk[0], p[1] - pk[1], p[2] - pk[2]])
            .collect();
        let omega = root.spec.tau(root.spec.seed(), offset);
        (points, root.spec.with_omega(&omega[..root.spec.label_dim()]))
    };
    Ok(PointPattern {
        spec,
        window: root.window.shifted(offset),
        points,
        lipschitz: pattern.lipschitz,
        root: Arc::clone(root),
        offset,
    })
}
