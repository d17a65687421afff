use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use dynpat::check::run_checks;
use dynpat::edge::{coverage_by_cut_count, edge_spectrum};
use dynpat::gap_label::{cut_generator_index, fit_labels, predict_edge, theta_for, LabelTuple, ThetaMatrix};
use dynpat::hamiltonian::build_bundle;
use dynpat::hull::strobe_embed;
use dynpat::pattern::{check_consistency, delone_check, generate, write_pattern_csv, Frequency, PatternSpec};
use dynpat::spectral::{
    approximant_sizes, butterfly_sweep, eigh, merged_gaps, omega_grid, sampled_spectra, GapRecord, SpectrumRecord,
};
use dynpat::Error;

use crate::config::RunConfig;

/// Samples used when validating a spec before generation.
const VALIDATION_SAMPLES: usize = 16;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

pub type Outcome<T = ()> = std::result::Result<T, Failure>;

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn ratio_of(f: &Frequency) -> Outcome<(u64, u64)> {
    f.as_ratio()
        .ok_or_else(|| Failure::Validation(format!("frequency {f} must be an exact ratio p/q for periodic approximants")))
}

fn alpha_header(d: usize) -> Vec<String> {
    if d == 1 {
        vec!["alpha_num".into(), "alpha_den".into()]
    } else {
        (1..=d).flat_map(|j| [format!("alpha{j}_num"), format!("alpha{j}_den")]).collect()
    }
}

fn alpha_cells(alpha: &[Frequency]) -> Outcome<Vec<String>> {
    let mut out = Vec::new();
    for f in alpha {
        let (p, q) = ratio_of(f)?;
        out.push(p.to_string());
        out.push(q.to_string());
    }
    Ok(out)
}

#[derive(Serialize)]
struct Truncation {
    /// Largest row sum of dropped couplings over every matrix built.
    max_measured: f64,
    /// Dropped tail of a unit-spaced chain with the same hopping.
    unit_chain_bound: f64,
}

/// Writes the files of one run into the output directory.
pub struct Run<'a> {
    config: &'a RunConfig,
    dir: PathBuf,
    written: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn new(config: &'a RunConfig) -> Outcome<Self> {
        let dir = config.output.dir.clone();
        std::fs::create_dir_all(&dir)?;
        Ok(Run {
            config,
            dir,
            written: Vec::new(),
        })
    }

    fn file(&mut self, name: &str, body: &[u8]) -> Outcome {
        std::fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Outcome {
        let mut s = header.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.file(name, s.as_bytes())
    }

    fn sidecar(mut self, command: &str, truncation: Option<f64>, extra: Value) -> Outcome {
        let digest = Sha256::digest(self.config.canonical().as_bytes());
        let mut hash = String::new();
        for b in digest.iter() {
            write!(hash, "{b:02x}").expect("writing to a string");
        }
        let truncation = match truncation {
            Some(max_measured) => Some(Truncation {
                max_measured,
                unit_chain_bound: self.config.hopping.rule()?.tail_bound(),
            }),
            None => None,
        };
        let doc = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": hash,
            "config": self.config,
            "truncation_error": truncation,
            "outputs": self.written,
            "details": extra,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json");
        text.push('\n');
        let name = format!("{command}.json");
        self.file(&name, text.as_bytes())?;
        for f in &self.written {
            println!("wrote {}", self.dir.join(f).display());
        }
        Ok(())
    }
}

pub fn generate_cmd(config: &RunConfig) -> Outcome {
    let spec = config.pattern.spec()?;
    let window = config.pattern.window()?;
    let consistency = check_consistency(&spec, VALIDATION_SAMPLES, config.seed)?;
    if !consistency.passed() {
        return Err(Failure::Validation(format!(
            "consistency residual {:e} exceeds {:e}",
            consistency.max_residual, consistency.tolerance
        )));
    }
    let pattern = generate(&spec, window).map_err(|e| match e {
        Error::Consistency { .. } | Error::NotDelone { .. } => Failure::Validation(e.to_string()),
        e => e.into(),
    })?;
    let cert = delone_check(&pattern);
    if !cert.is_delone() {
        return Err(Failure::Validation(format!("pattern is not Delone: r_min = {:e}", cert.r_min)));
    }
    let mut body = Vec::new();
    write_pattern_csv(&pattern, &mut body)?;
    let mut run = Run::new(config)?;
    run.file("pattern.csv", &body)?;
    run.sidecar(
        "generate",
        None,
        json!({
            "points": pattern.len(),
            "consistency_residual": consistency.max_residual,
            "r_min": cert.r_min,
            "r_max": cert.r_max,
            "lipschitz": pattern.lipschitz_constant(),
        }),
    )
}

fn max_truncation(spectra: &[SpectrumRecord]) -> f64 {
    spectra.iter().map(|s| s.truncation_error).fold(0.0, f64::max)
}

fn gap_rows(gaps: &[GapRecord]) -> Outcome<Vec<Vec<String>>> {
    gaps.iter()
        .map(|g| {
            let mut row = alpha_cells(&g.alpha)?;
            row.extend([num(g.gap_lo), num(g.gap_hi), num(g.ids)]);
            Ok(row)
        })
        .collect()
}

pub fn butterfly_cmd(config: &RunConfig) -> Outcome {
    let template = config.pattern.spec()?;
    let d = template.label_dim();
    let sweep = butterfly_sweep(&template, &config.sweep_config(), &config.hopping.rule()?, config.parallelism()?)?;
    let mut spectrum_rows = Vec::new();
    let mut gaps = Vec::new();
    let mut truncation: f64 = 0.0;
    for point in &sweep {
        let (p, q) = ratio_of(&point.alpha[0])?;
        truncation = truncation.max(max_truncation(&point.spectra));
        for rec in &point.spectra {
            for (i, e) in rec.eigenvalues.iter().enumerate() {
                spectrum_rows.push(vec![p.to_string(), q.to_string(), rec.omega_idx.to_string(), i.to_string(), num(*e)]);
            }
        }
        gaps.extend(point.gaps.iter().cloned());
    }
    let gaps: Vec<GapRecord> = gaps
        .into_iter()
        .map(|g| GapRecord {
            alpha: g.alpha[..1].to_vec(),
            ..g
        })
        .collect();
    let header = |tail: &[&str]| -> Vec<String> {
        let mut h = alpha_header(1);
        h.extend(tail.iter().map(|s| s.to_string()));
        h
    };
    let mut run = Run::new(config)?;
    run.csv("butterfly.csv", &header(&["omega_idx", "eig_idx", "energy"]), &spectrum_rows)?;
    run.csv("gaps.csv", &header(&["gap_lo", "gap_hi", "ids"]), &gap_rows(&gaps)?)?;
    run.sidecar(
        "butterfly",
        Some(truncation),
        json!({
            "frequencies": sweep.len(),
            "diagonal": d == 2,
            "sizes": sweep.iter().map(|p| p.sizes.clone()).collect::<Vec<_>>(),
        }),
    )
}

/// Bulk gaps of the approximant of `spec`, sampled at `omega_samples` seeds.
fn bulk_gaps(config: &RunConfig, spec: &PatternSpec, sizes: &[usize]) -> Outcome<(Vec<GapRecord>, f64)> {
    for f in &spec.alpha {
        ratio_of(f)?;
    }
    let omegas = omega_grid(spec, config.sweep.omega_samples.max(1), config.seed);
    let spectra = sampled_spectra(spec, sizes, &config.hopping.rule()?, &omegas, config.parallelism()?)?;
    Ok((merged_gaps(&spectra, config.gap.min_width), max_truncation(&spectra)))
}

fn cut_index(config: &RunConfig, theta: &ThetaMatrix, d: usize) -> Outcome<usize> {
    let axis = config.edge.cut_axis;
    if axis == 0 || axis > d {
        return Err(Failure::Validation(format!("cut axis {axis} must lie in 1..={d}")));
    }
    Ok(cut_generator_index(theta, d, axis))
}

fn label_rows(
    config: &RunConfig,
    spec: &PatternSpec,
    gaps: &[GapRecord],
    rows: &mut Vec<Vec<String>>,
    notes: &mut Vec<Value>,
) -> Outcome {
    let theta = theta_for(spec);
    let d = spec.label_dim();
    let cut = cut_index(config, &theta, d)?;
    for g in gaps {
        let mut row = alpha_cells(&spec.alpha)?;
        row.extend([num(g.gap_lo), num(g.gap_hi), num(g.ids)]);
        match fit_labels(g.ids, &theta, config.gap.max_coeff, config.gap.tol) {
            Ok(fit) => {
                let pred = predict_edge(&fit.label, cut, spec.kind);
                row.extend(fit.label.coeffs.iter().map(|c| c.to_string()));
                row.push(num(fit.residual));
                row.push(pred.predicted.to_string());
                if fit.is_ambiguous() || pred.conjectural {
                    notes.push(json!({
                        "alpha": spec.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                        "ids": g.ids,
                        "label": fit.label.to_string(),
                        "alternatives": fit.alternatives.iter().map(|(l, _)| l.to_string()).collect::<Vec<_>>(),
                        "conjectural": pred.conjectural,
                        "reason": pred.reason,
                    }));
                }
            }
            Err(Error::NoLabel { best, .. }) => {
                row.extend((0..LabelTuple::column_names(theta.n()).len()).map(|_| String::new()));
                row.push(num(best));
                row.push(String::new());
            }
            Err(e) => return Err(e.into()),
        }
        rows.push(row);
    }
    Ok(())
}

pub fn labels_cmd(config: &RunConfig, sweep: bool) -> Outcome {
    let spec = config.pattern.spec()?;
    let d = spec.label_dim();
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut truncation: f64 = 0.0;
    if sweep {
        let points = butterfly_sweep(&spec, &config.sweep_config(), &config.hopping.rule()?, config.parallelism()?)?;
        for point in &points {
            let s = spec.with_alpha(point.alpha.clone());
            truncation = truncation.max(max_truncation(&point.spectra));
            label_rows(config, &s, &point.gaps, &mut rows, &mut notes)?;
        }
    } else {
        let sizes = approximant_sizes(&spec, config.sweep.size_floor)?;
        let (gaps, t) = bulk_gaps(config, &spec, &sizes)?;
        truncation = t;
        label_rows(config, &spec, &gaps, &mut rows, &mut notes)?;
    }
    let mut header = alpha_header(d);
    header.extend(["gap_lo", "gap_hi", "ids"].map(String::from));
    header.extend(LabelTuple::column_names(theta_for(&spec).n()));
    header.extend(["residual", "edge_predicted"].map(String::from));
    let mut run = Run::new(config)?;
    run.csv("labels.csv", &header, &rows)?;
    run.sidecar("labels", Some(truncation), json!({ "gaps": rows.len(), "flagged": notes }))
}

/// Nested cut counts `1, 2, 5, 10, 20, 50, ...` up to and including `k`.
fn cut_ladder(k: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut scale = 1;
    'outer: loop {
        for m in [1, 2, 5] {
            let v = m * scale;
            if v >= k {
                break 'outer;
            }
            out.push(v);
        }
        scale *= 10;
    }
    out.push(k);
    out
}

pub fn edge_cmd(config: &RunConfig) -> Outcome {
    let spec = config.pattern.spec()?;
    let d = spec.label_dim();
    let hop = config.hopping.rule()?;
    let theta = theta_for(&spec);
    cut_index(config, &theta, d)?;
    if config.edge.cuts == 0 {
        return Err(Failure::Validation("edge.cuts must be at least 1".into()));
    }
    let sizes = if config.edge.size.is_empty() {
        approximant_sizes(&spec, config.sweep.size_floor)?
    } else {
        config.edge.size.clone()
    };
    let (gaps, bulk_truncation) = bulk_gaps(config, &spec, &sizes)?;
    let cuts: Vec<i64> = (0..config.edge.cuts as i64).collect();
    let axis = config.edge.cut_axis - 1;
    let par = config.parallelism()?;
    let matrices = build_bundle(&spec, axis, &cuts, &sizes, &hop, &spec.omega, par)?;
    let truncation = matrices.iter().map(|h| h.truncation_error).fold(bulk_truncation, f64::max);
    let eigen = par.try_map(&matrices, eigh)?;
    let bundle: Vec<_> = matrices.into_iter().zip(eigen).collect();
    let edge_config = config.edge.config();
    let report = edge_spectrum(&bundle, &gaps, &edge_config)?;
    let ladder = cut_ladder(config.edge.cuts);
    let coverage = coverage_by_cut_count(&report, &gaps, &ladder)?;

    let states: Vec<Vec<String>> = report
        .states
        .iter()
        .map(|s| vec![s.cut_k.to_string(), num(s.energy), num(s.localization), s.gap_id.to_string()])
        .collect();
    let cov: Vec<Vec<String>> = coverage
        .iter()
        .map(|c| vec![c.gap_id.to_string(), c.cuts.to_string(), num(c.epsilon), num(c.coverage)])
        .collect();
    let gap_table: Vec<Vec<String>> = gaps
        .iter()
        .enumerate()
        .map(|(i, g)| vec![i.to_string(), num(g.gap_lo), num(g.gap_hi), num(g.ids)])
        .collect();
    let h = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut run = Run::new(config)?;
    run.csv("edge.csv", &h(&["cut_k", "energy", "localization", "gap_id"]), &states)?;
    run.csv("coverage.csv", &h(&["gap_id", "K", "epsilon", "coverage"]), &cov)?;
    run.csv("edge_gaps.csv", &h(&["gap_id", "gap_lo", "gap_hi", "ids"]), &gap_table)?;
    let localized = report.states.iter().filter(|s| s.edge_localized).count();
    run.sidecar(
        "edge",
        Some(truncation),
        json!({
            "sizes": sizes,
            "cut_axis": config.edge.cut_axis,
            "in_gap_states": report.states.len(),
            "edge_localized": localized,
        }),
    )
}

pub fn hull_cmd(config: &RunConfig) -> Outcome {
    let spec = config.pattern.spec()?;
    let pattern = generate(&spec, config.pattern.window()?)?;
    let cloud = strobe_embed(&pattern, config.hull.depth)?;
    let mut body = Vec::new();
    cloud.write_csv(&mut body)?;
    let mut run = Run::new(config)?;
    run.file("strobe.csv", &body)?;
    run.sidecar(
        "hull",
        None,
        json!({ "tuples": cloud.len(), "distinct_1e-9": cloud.distinct(1e-9) }),
    )
}

/// Returns whether every check passed.
pub fn check_cmd(config: &RunConfig) -> Outcome<bool> {
    let report = run_checks(config.seed)?;
    for item in &report.items {
        println!(
            "{} {:<40} {:.3e} (tolerance {:.3e})",
            if item.passed { "ok  " } else { "FAIL" },
            item.name,
            item.value,
            item.tolerance
        );
    }
    let passed = report.passed();
    let run = Run::new(config)?;
    run.sidecar("check", None, json!({ "passed": passed, "items": report.items }))?;
    Ok(passed)
}
