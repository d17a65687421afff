//! Stroboscopic embedding: tuples of consecutive spacings trace out the hull.

use std::io::Write;

use crate::error::{Error, Result};
use crate::pattern::PointPattern;

#[derive(Clone, Debug, PartialEq)]
pub struct StrobeCloud {
    pub depth: usize,
    /// Label of the first spacing of tuple 0.
    pub start: i64,
    /// `points[i] = (s_{start+i}, ..., s_{start+i+m-1})` with `s_n = x(p_{n+1}) - x(p_n)`.
    pub points: Vec<Vec<f64>>,
}

impl StrobeCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points that differ from all earlier ones by more than `tol` (max norm).
    pub fn distinct(&self, tol: f64) -> usize {
        let mut seen: Vec<&Vec<f64>> = Vec::new();
        for p in &self.points {
            let new = seen
                .iter()
                .all(|q| p.iter().zip(q.iter()).any(|(a, b)| (a - b).abs() > tol));
            if new {
                seen.push(p);
            }
        }
        seen.len()
    }

    /// CSV `i,s_1,...,s_m`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let cols: Vec<String> = (1..=self.depth).map(|j| format!("s_{j}")).collect();
        writeln!(out, "i,{}", cols.join(","))?;
        for (i, p) in self.points.iter().enumerate() {
            let vals: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{},{}", self.start + i as i64, vals.join(","))?;
        }
        Ok(())
    }
}

/// Tuples of `depth` consecutive spacings along a one-dimensional label
/// window. For patterns in more than one ambient dimension the spacing is
/// the longitudinal (first) coordinate of the step.
pub fn strobe_embed(pattern: &PointPattern, depth: usize) -> Result<StrobeCloud> {
    if pattern.dim_label() != 1 {
        return Err(Error::InvalidArgument(
            "stroboscopic embedding needs a one-dimensional label lattice".into(),
        ));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let pts = pattern.points();
    if pts.len() <= depth {
        return Err(Error::Window(format!(
            "window of {} sites is too short for depth {depth}",
            pts.len()
        )));
    }
    let spacings: Vec<f64> = pts.windows(2).map(|w| w[1][0] - w[0][0]).collect();
    let points = spacings.windows(depth).map(|w| w.to_vec()).collect();
    Ok(StrobeCloud {
        depth,
        start: pattern.window().lo[0],
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{generate, Frequency, PatternSpec, Window};

    #[test]
    fn periodic_cloud_is_one_point() {
        let spec = PatternSpec::example_i(Frequency::zero(), 0.3);
        let cloud = strobe_embed(&generate(&spec, Window::line(0, 50)).unwrap(), 3).unwrap();
        assert_eq!(cloud.len(), 51 - 3);
        assert_eq!(cloud.distinct(1e-12), 1);
        assert_eq!(cloud.points[0], vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rational_cloud_saturates() {
        let spec = PatternSpec::example_i(Frequency::ratio(2, 7).unwrap(), 0.3).with_omega(&[0.05]);
        let short = strobe_embed(&generate(&spec, Window::line(0, 40)).unwrap(), 2).unwrap();
        let long = strobe_embed(&generate(&spec, Window::line(0, 400)).unwrap(), 2).unwrap();
        assert_eq!(short.distinct(1e-9), 7);
        assert_eq!(long.distinct(1e-9), 7);
    }

    #[test]
    fn too_short() {
        let spec = PatternSpec::example_i(Frequency::zero(), 0.3);
        let pat = generate(&spec, Window::line(0, 2)).unwrap();
        assert!(strobe_embed(&pat, 3).is_err());
        assert!(strobe_embed(&pat, 2).is_ok());
    }

    #[test]
    fn csv_header() {
        let spec = PatternSpec::example_i(Frequency::zero(), 0.3);
        let cloud = strobe_embed(&generate(&spec, Window::line(0, 3)).unwrap(), 2).unwrap();
        let mut buf = Vec::new();
        cloud.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,s_1,s_2\n0,1.0,1.0\n1,1.0,1.0\n");
    }
}
