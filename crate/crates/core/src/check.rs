//! Self-test suite over the core invariants: consistency, Delone bounds,
//! covariance of the bulk spectrum, relabeling, Pfaffians and label fits.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gap_label::{fit_labels, pfaffian, predicted_ids_set, theta_for};
use crate::hamiltonian::{build_bulk_pbc, shifted_seed, HoppingRule};
use crate::pattern::{
    check_consistency, delone_check, generate, shift_relabel, Frequency, PatternKind, PatternSpec,
    Window, CONSISTENCY_TOLERANCE,
};
use crate::spectral::eigvals_sym;

pub const COVARIANCE_TOL: f64 = 1e-10;
pub const PFAFFIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64, passed: bool) {
        self.items.push(CheckItem {
            name: name.into(),
            value,
            tolerance,
            passed,
        });
    }
}

fn irrational(x: f64) -> Frequency {
    Frequency::from_f64(x).expect("finite frequency")
}

/// A representative spec of each kind at irrational frequencies.
pub fn sample_spec(kind: PatternKind) -> PatternSpec {
    let a = irrational(std::f64::consts::FRAC_1_SQRT_2);
    let b = irrational((5f64.sqrt() - 1.0) / 2.0);
    match kind {
        PatternKind::ExampleI => PatternSpec::example_i(a, 0.4),
        PatternKind::ExampleII => PatternSpec::example_ii(a, 0.01, 0.2),
        PatternKind::ExampleIII => PatternSpec::example_iii(a, b, 0.4),
        PatternKind::ExampleIV => PatternSpec::example_iv(a, b, 0.01, 0.2, 0.2),
        PatternKind::CutProject => PatternSpec::cut_project(irrational((3.0 - 5f64.sqrt()) / 2.0), 1.0, 0.618),
        PatternKind::IdealBilayer => PatternSpec::ideal_bilayer(a, 0.2),
    }
}

fn consistency(report: &mut CheckReport, seed: u64) -> Result<()> {
    for kind in PatternKind::ALL {
        let r = check_consistency(&sample_spec(kind), 64, seed)?;
        report.push(
            format!("consistency_{}", kind.name()),
            r.max_residual,
            CONSISTENCY_TOLERANCE,
            r.max_residual < CONSISTENCY_TOLERANCE,
        );
    }
    Ok(())
}

fn delone(report: &mut CheckReport) -> Result<()> {
    let pat = generate(&sample_spec(PatternKind::ExampleI), Window::line(0, 1000))?;
    let cert = delone_check(&pat);
    report.push("delone_r_min", cert.r_min, 0.2 - 1e-9, cert.r_min >= 0.2 - 1e-9);
    report.push("delone_r_max", cert.r_max, 1.8 + 1e-9, cert.r_max <= 1.8 + 1e-9);
    Ok(())
}

fn covariance(report: &mut CheckReport) -> Result<()> {
    let hop = HoppingRule::default();
    let f = |p, q| Frequency::ratio(p, q).expect("valid ratio");
    let cases = [
        (PatternSpec::example_i(f(3, 7), 0.4), vec![21]),
        (PatternSpec::cut_project(f(3, 8), 1.0, 0.618), vec![24]),
        (PatternSpec::example_ii(f(2, 5), 0.01, 0.2), vec![14]),
        (PatternSpec::example_iii(f(1, 3), f(1, 2), 0.4), vec![6, 4]),
    ];
    for (spec, sizes) in cases {
        let omega = vec![0.137; spec.label_dim()];
        let base = eigvals_sym(&build_bulk_pbc(&spec, &sizes, &hop, &omega)?)?;
        let mut worst: f64 = 0.0;
        for axis in 0..spec.label_dim() {
            for k in [1, 2, 5] {
                let w = shifted_seed(&spec, &omega, axis, k);
                let shifted = eigvals_sym(&build_bulk_pbc(&spec, &sizes, &hop, &w[..spec.label_dim()])?)?;
                for (a, b) in base.iter().zip(&shifted) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        report.push(
            format!("covariance_{}", spec.kind.name()),
            worst,
            COVARIANCE_TOL,
            worst < COVARIANCE_TOL,
        );
    }
    Ok(())
}

fn shift_identity(report: &mut CheckReport) -> Result<()> {
    let cases = [
        (PatternKind::ExampleI, Window::line(-20, 20), [7, 0]),
        (PatternKind::CutProject, Window::line(0, 50), [13, 0]),
        (PatternKind::ExampleIII, Window::rect((-4, 4), (-3, 5)), [2, -3]),
    ];
    for (kind, window, k) in cases {
        let pat = generate(&sample_spec(kind), window)?;
        let back = shift_relabel(&shift_relabel(&pat, k)?, [-k[0], -k[1]])?;
        let exact = back.window() == pat.window() && back.points() == pat.points();
        report.push(
            format!("shift_identity_{}", kind.name()),
            if exact { 0.0 } else { 1.0 },
            0.0,
            exact,
        );
    }
    Ok(())
}

fn pfaffians(report: &mut CheckReport, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for n in [0, 2, 4, 6] {
        for _ in 0..20 {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    let v = rng.random_range(-1.0..1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = -v;
                }
            }
            let pf = pfaffian(&m)?;
            worst = worst.max((pf * pf - m.determinant()).abs());
        }
    }
    report.push("pfaffian_squared_is_determinant", worst, PFAFFIAN_TOL, worst < PFAFFIAN_TOL);
    Ok(())
}

fn label_round_trip(report: &mut CheckReport) -> Result<()> {
    for kind in [PatternKind::ExampleI, PatternKind::ExampleIII] {
        let theta = theta_for(&sample_spec(kind));
        let max_coeff = if theta.n() == 2 { 5 } else { 2 };
        let mut failures = 0usize;
        for v in predicted_ids_set(&theta, max_coeff, 1) {
            let fit = fit_labels(v.value, &theta, max_coeff, 1e-9)?;
            if v.labels.len() != 1 || fit.label != v.labels[0] || fit.is_ambiguous() {
                failures += 1;
            }
        }
        report.push(
            format!("label_round_trip_{}", kind.name()),
            failures as f64,
            0.0,
            failures == 0,
        );
    }
    Ok(())
}

/// Run every check. Randomised checks draw from a generator seeded with `seed`.
pub fn run_checks(seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    consistency(&mut report, seed)?;
    delone(&mut report)?;
    covariance(&mut report)?;
    shift_identity(&mut report)?;
    pfaffians(&mut report, seed)?;
    label_round_trip(&mut report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let report = run_checks(0).unwrap();
        for item in &report.items {
            assert!(item.passed, "{item:?}");
        }
        assert!(report.items.len() >= 16);
    }
}
