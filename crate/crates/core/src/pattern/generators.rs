//! Closed-form displacement generators `Gamma_e` for every pattern kind.
//!
//! Only the positive generators are written out. The negative ones follow
//! from `Gamma_{-e} = -Gamma_e o tau_{-e}`, which makes the second
//! consistency relation hold by construction.

use std::f64::consts::TAU;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{HullPoint, Label, PatternKind, PatternSpec, Point};
use crate::error::{Error, Result};

/// A signed generator `+e_axis` or `-e_axis` of `Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub axis: usize,
    pub positive: bool,
}

impl Generator {
    pub fn plus(axis: usize) -> Self {
        Generator {
            axis,
            positive: true,
        }
    }

    pub fn minus(axis: usize) -> Self {
        Generator {
            axis,
            positive: false,
        }
    }

    pub fn inverse(self) -> Self {
        Generator {
            axis: self.axis,
            positive: !self.positive,
        }
    }

    pub fn label(self) -> Label {
        let mut n = [0; 2];
        n[self.axis] = if self.positive { 1 } else { -1 };
        n
    }

    /// All `2d` signed generators.
    pub fn all(dim: usize) -> Vec<Generator> {
        (0..dim)
            .flat_map(|axis| [Generator::plus(axis), Generator::minus(axis)])
            .collect()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}", if self.positive { "+" } else { "-" }, self.axis + 1)
    }
}

/// `Gamma_e(omega)`: the displacement from `p_n` to `p_{n+e}` when `tau_n omega = omega`.
pub fn gamma(spec: &PatternSpec, e: Generator, omega: HullPoint) -> Result<Point> {
    if e.axis >= spec.label_dim() || spec.alpha.len() != spec.label_dim() {
        return Err(Error::UnsupportedGenerator {
            generator: e.to_string(),
            dim: spec.label_dim(),
        });
    }
    if e.positive {
        Ok(gamma_plus(spec, e.axis, omega))
    } else {
        let back = spec.tau(omega, e.label());
        let v = gamma_plus(spec, e.axis, back);
        Ok([-v[0], -v[1], -v[2]])
    }
}

fn gamma_plus(spec: &PatternSpec, axis: usize, omega: HullPoint) -> Point {
    let step = spec.tau(omega, Generator::plus(axis).label());
    match spec.kind {
        PatternKind::ExampleI => [sine_step(spec.r, omega[0], step[0]), 0.0, 0.0],
        PatternKind::ExampleIII => {
            let mut v = [0.0; 3];
            v[axis] = sine_step(spec.r, omega[axis], step[axis]);
            v
        }
        PatternKind::CutProject => [sturmian_step(spec, omega[0]), 0.0, 0.0],
        PatternKind::ExampleII | PatternKind::IdealBilayer => {
            let alpha = spec.alpha[0].value();
            let c = spec.circumference(0);
            let dx = bilayer_horizontal_step(alpha, c, alpha, step[0]);
            let dy = loop_height(spec, step[0]) - loop_height(spec, omega[0]);
            [dx, dy, 0.0]
        }
        PatternKind::ExampleIV => {
            let alpha = spec.alpha[axis].value();
            let c = spec.circumference(axis);
            // J' sits at flat coordinate 0 on both torus directions.
            let d = bilayer_horizontal_step(alpha, c, 0.0, step[axis]);
            let dz = surface_height(spec, step) - surface_height(spec, omega);
            let mut v = [0.0, 0.0, dz];
            v[axis] = d;
            v
        }
    }
}

/// `1 + r (sin 2pi x' - sin 2pi x)` for the rotation `x -> x'`.
fn sine_step(r: f64, x: f64, x_next: f64) -> f64 {
    1.0 + r * ((TAU * x_next).sin() - (TAU * x).sin())
}

/// Length of the tile following the hull point `x` of a Sturmian rotation.
fn sturmian_step(spec: &PatternSpec, x: f64) -> f64 {
    if sturmian_bit(spec, x) {
        spec.spacing_b
    } else {
        spec.spacing_a
    }
}

/// `floor(x + alpha)` for `x` in `[0, 1)`, with the threshold `1 - alpha`
/// evaluated as `(q - p)/q` for exact frequencies so that orbit points `k/q`
/// compare without rounding ambiguity.
pub(crate) fn sturmian_bit(spec: &PatternSpec, x: f64) -> bool {
    let threshold = match spec.alpha[0].as_ratio() {
        Some((p, q)) => (q - p) as f64 / q as f64,
        None => 1.0 - spec.alpha[0].value(),
    };
    x >= threshold
}

/// `min{alpha, d_+(y), d_-(y)}` where `d_+` and `d_-` are the distances
/// from the landing point `y` to the junction `J'` going forward and
/// backward along the flat hull of circumference `c`.
fn bilayer_horizontal_step(alpha: f64, c: f64, junction: f64, y: f64) -> f64 {
    let d_plus = (junction - y).rem_euclid(c);
    let d_minus = (y - junction).rem_euclid(c);
    alpha.min(d_plus).min(d_minus)
}

fn smooth_sign(x: f64, g: f64) -> f64 {
    if g > 0.0 {
        (x / g).tanh()
    } else if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Vertical profile of the figure-eight loop at flat coordinate `t`.
///
/// For `g > 0` this is the smoothed three-kink profile with `g' = g^1.1`.
/// For `g = 0` (and always for the ideal bilayer) it is the sharp step:
/// `-delta/2` on the small circle `(0, alpha]`, `+delta/2` on the large one.
pub(crate) fn loop_height(spec: &PatternSpec, t: f64) -> f64 {
    let alpha = spec.alpha[0].value();
    let g = if spec.kind == PatternKind::IdealBilayer {
        0.0
    } else {
        spec.g
    };
    if g == 0.0 {
        return if t > 0.0 && t <= alpha {
            -0.5 * spec.delta
        } else {
            0.5 * spec.delta
        };
    }
    let gp = g.powf(1.1);
    0.5 * spec.delta
        * (smooth_sign(t + 1.0, g) - smooth_sign(t - gp, g) + smooth_sign(t - alpha, g))
}

/// Height of the folded torus above the flat point `(u, v)`.
pub(crate) fn surface_height(spec: &PatternSpec, w: HullPoint) -> f64 {
    let profile = |x: f64, alpha: f64| -> f64 {
        if spec.g == 0.0 {
            // Small strip (1, 1 + alpha) together with J' at 0 sits low.
            return if x == 0.0 || x > 1.0 { -1.0 } else { 1.0 };
        }
        let gp = spec.g.powf(1.1);
        smooth_sign(x, spec.g) - smooth_sign(x - 1.0 - gp, spec.g)
            + smooth_sign(x - 1.0 - alpha, spec.g)
    };
    let a1 = spec.alpha[0].value();
    let a2 = spec.alpha[1].value();
    (2.0 * spec.delta + spec.delta_prime) / 4.0 * profile(w[0], a1)
        - spec.delta_prime / 4.0 * profile(w[1], a2)
}

/// Outcome of a numerical check of the consistency relations.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

pub const CONSISTENCY_TOLERANCE: f64 = 1e-12;

fn sample_point(spec: &PatternSpec, rng: &mut ChaCha8Rng) -> HullPoint {
    let mut w = [0.0; 2];
    for (axis, slot) in w.iter_mut().enumerate().take(spec.label_dim()) {
        *slot = rng.random::<f64>() * spec.circumference(axis);
    }
    w
}

fn max_abs_diff(a: Point, b: Point) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Evaluate both consistency relations on `samples` pseudorandom hull points
/// drawn from a generator seeded with `seed`. The relations are checked on
/// the positive basis generators; the mixed-sign cases follow from them.
pub fn check_consistency(spec: &PatternSpec, samples: usize, seed: u64) -> Result<ConsistencyReport> {
    let spec = spec.validated()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.label_dim();
    let mut worst = 0.0f64;
    for _ in 0..samples.max(1) {
        let w = sample_point(&spec, &mut rng);
        for a in 0..d {
            let e = Generator::plus(a);
            // Gamma_{-e} = -Gamma_e o tau_{-e}
            let lhs = gamma(&spec, e.inverse(), w)?;
            let rhs = gamma(&spec, e, spec.tau(w, e.inverse().label()))?;
            worst = worst.max(max_abs_diff(lhs, [-rhs[0], -rhs[1], -rhs[2]]));
            for b in a + 1..d {
                let f = Generator::plus(b);
                // Gamma_f + Gamma_e o tau_f = Gamma_e + Gamma_f o tau_e
                let left = add(gamma(&spec, f, w)?, gamma(&spec, e, spec.tau(w, f.label()))?);
                let right = add(gamma(&spec, e, w)?, gamma(&spec, f, spec.tau(w, e.label()))?);
                worst = worst.max(max_abs_diff(left, right));
            }
        }
    }
    Ok(ConsistencyReport {
        samples: samples.max(1),
        max_residual: worst,
        tolerance: CONSISTENCY_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Frequency;

    fn freq(v: f64) -> Frequency {
        Frequency::from_f64(v).unwrap()
    }

    #[test]
    fn periodic_chain_has_unit_steps() {
        let spec = PatternSpec::example_i(Frequency::zero(), 0.3);
        for w in [0.0, 0.17, 0.5, 0.93] {
            let g = gamma(&spec, Generator::plus(0), [w, 0.0]).unwrap();
            assert_eq!(g[0], 1.0);
        }
    }

    #[test]
    fn quarter_rotation_step() {
        let spec = PatternSpec::example_i(Frequency::ratio(1, 4).unwrap(), 0.4);
        let g = gamma(&spec, Generator::plus(0), [0.0, 0.0]).unwrap();
        assert!((g[0] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn example_iii_periodic_generators() {
        let spec = PatternSpec::example_iii(Frequency::zero(), Frequency::zero(), 0.3);
        let g1 = gamma(&spec, Generator::plus(0), [0.3, 0.7]).unwrap();
        let g2 = gamma(&spec, Generator::plus(1), [0.3, 0.7]).unwrap();
        assert_eq!(g1, [1.0, 0.0, 0.0]);
        assert_eq!(g2, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn unsupported_axis_is_an_error() {
        let spec = PatternSpec::example_i(freq(0.3), 0.3);
        assert!(matches!(
            gamma(&spec, Generator::plus(1), [0.0, 0.0]),
            Err(Error::UnsupportedGenerator { .. })
        ));
    }

    #[test]
    fn example_i_consistency_is_exact() {
        for a in [0.0, 0.1, 0.618_033_988_749_895, 0.9] {
            let spec = PatternSpec::example_i(freq(a), 0.4);
            let rep = check_consistency(&spec, 64, 7).unwrap();
            assert_eq!(rep.max_residual, 0.0);
        }
    }

    #[test]
    fn example_iii_consistency() {
        let spec = PatternSpec::example_iii(
            Frequency::ratio(1, 3).unwrap(),
            Frequency::ratio(2, 5).unwrap(),
            0.4,
        );
        let rep = check_consistency(&spec, 64, 11).unwrap();
        assert!(rep.max_residual < 1e-12, "{rep:?}");
    }

    #[test]
    fn example_iv_consistency() {
        let a = Frequency::ratio(1, 3).unwrap();
        let spec = PatternSpec::example_iv(a, a, 0.1, 0.2, 0.2);
        let rep = check_consistency(&spec, 64, 3).unwrap();
        assert!(rep.max_residual < 1e-12, "{rep:?}");
    }

    #[test]
    fn bilayer_step_matches_small_circle_overlap() {
        // Horizontal advance is alpha minus the length of [x, x+alpha] lying on the
        // small circle (0, alpha], computed here by brute-force sampling.
        let alpha = 0.37;
        let c = 1.0 + alpha;
        let spec = PatternSpec::example_ii(freq(alpha), 0.05, 0.2);
        for i in 0..200 {
            let x = c * i as f64 / 200.0;
            let g = gamma(&spec, Generator::plus(0), [x, 0.0]).unwrap();
            let n = 20_000;
            let on_small = (0..n)
                .filter(|&j| {
                    let t = (x + alpha * (j as f64 + 0.5) / n as f64).rem_euclid(c);
                    t > 0.0 && t <= alpha
                })
                .count();
            let expected = alpha - alpha * on_small as f64 / n as f64;
            assert!((g[0] - expected).abs() < 1e-3, "x={x} got {} want {expected}", g[0]);
        }
    }

    #[test]
    fn ideal_bilayer_layers() {
        let spec = PatternSpec::ideal_bilayer(freq(0.3), 0.25);
        assert_eq!(loop_height(&spec, 0.1), -0.125);
        assert_eq!(loop_height(&spec, 0.3), -0.125);
        assert_eq!(loop_height(&spec, 0.0), 0.125);
        assert_eq!(loop_height(&spec, 0.8), 0.125);
    }
}
