//! Per-matrix work for each subcommand. Every entry becomes a JSON object;
//! verdicts and per-matrix failures are data, never process errors.

use std::collections::BTreeMap;

use permkit_core::classify::{self, ClassificationReport};
use permkit_core::divisibility::{self, CertificateVerdict, SeriesVerdict};
use permkit_core::kernelcheck;
use permkit_core::sampleverify;
use permkit_core::spectra::{self, SweepVerdict};
use permkit_core::{Error, Kernel, Matrix};
use serde_json::{json, Map, Value};

use crate::input::Entry;

#[derive(Clone, Debug)]
pub struct CheckOpts {
    pub sweep_rmax: f64,
    pub series_degree: usize,
}

#[derive(Clone, Debug)]
pub struct SampleOpts {
    pub beta: f64,
    pub n: usize,
    pub seed: u64,
    pub alpha_grid: usize,
}

#[derive(Clone, Debug)]
pub enum Command {
    Classify,
    Check(CheckOpts),
    Sample(SampleOpts),
    Metric,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Check(_) => "check",
            Command::Sample(_) => "sample",
            Command::Metric => "metric",
        }
    }
}

/// Outcome of one entry; `numeric_failure` marks a non-converged eigensolve.
pub struct EntryResult {
    pub value: Value,
    pub numeric_failure: bool,
}

fn rows(m: &Matrix) -> Value {
    json!(m.to_rows())
}

fn error_name(e: &Error) -> String {
    let debug = format!("{e:?}");
    debug.split(['(', ' ', '{']).next().unwrap_or("Error").to_string()
}

fn note(e: &Error) -> Value {
    json!({ "error": error_name(e), "message": e.to_string() })
}

pub fn run(cmd: &Command, entry: &Entry) -> EntryResult {
    let mut obj = Map::new();
    obj.insert("label".into(), json!(entry.label));
    let kernel = match Kernel::from_rows(&entry.rows) {
        Ok(k) => k,
        Err(e) => {
            obj.insert("dimension_error".into(), note(&e));
            return EntryResult { value: Value::Object(obj), numeric_failure: false };
        }
    };
    obj.insert("dim".into(), json!(kernel.dim()));
    let mut failed = false;
    let body = match cmd {
        Command::Classify => classify_entry(&kernel),
        Command::Check(o) => check_entry(&kernel, o),
        Command::Sample(o) => sample_entry(&kernel, o),
        Command::Metric => metric_entry(&kernel),
    };
    match body {
        Ok(fields) => obj.extend(fields),
        Err(e) => {
            failed = e == Error::NoConvergence;
            obj.insert("failure".into(), note(&e));
        }
    }
    EntryResult { value: Value::Object(obj), numeric_failure: failed }
}

fn report_fields(r: &ClassificationReport) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("verdict".into(), json!(format!("{:?}", r.verdict)));
    m.insert("classification_failure".into(), json!(r.failure));
    m.insert("admissible_beta".into(), json!(r.admissible_beta));
    m.insert(
        "class1_witness".into(),
        r.class1_witness
            .as_ref()
            .map(|w| json!({ "scaling": w.scaling.as_ref().map(|d| d.0.clone()), "target": rows(&w.target) }))
            .unwrap_or(Value::Null),
    );
    m.insert(
        "class2_witness".into(),
        r.class2_witness
            .as_ref()
            .map(|w| json!({ "scaling": w.scaling.0, "mmatrix": rows(&w.mmatrix) }))
            .unwrap_or(Value::Null),
    );
    m.insert(
        "conditions".into(),
        Value::Array(r.notes.iter().map(|n| json!({ "name": n.name, "value": n.value, "passed": n.passed })).collect()),
    );
    m
}

fn classify_entry(k: &Kernel) -> Result<Map<String, Value>, Error> {
    let report = if k.dim() == 3 { classify::classify3(k)? } else { classify::classify(k)? };
    let mut m = report_fields(&report);
    let ind = classify::independence_report(k);
    m.insert(
        "independence".into(),
        json!({
            "pairwise_independent": ind.pairwise_independent,
            "product_form": ind.product_form,
            "c_coefficient": ind.c_coefficient,
            "fully_independent": ind.fully_independent,
        }),
    );
    Ok(m)
}

fn series_verdict(v: &SeriesVerdict) -> Value {
    match v {
        SeriesVerdict::Nonneg => json!("Nonneg"),
        SeriesVerdict::NegativeAt(e) => json!({ "NegativeAt": e }),
    }
}

fn check_entry(k: &Kernel, o: &CheckOpts) -> Result<Map<String, Value>, Error> {
    let mut m = Map::new();
    let nec = kernelcheck::check_necessary(k);
    m.insert(
        "necessary".into(),
        json!({
            "overall": nec.overall,
            "det": nec.det,
            "real_eigs_positive": nec.real_eigs_positive,
            "first_failure": nec.first_failure().map(|(name, value)| json!({ "name": name, "value": value })),
        }),
    );
    if k.dim() == 3 {
        let r = classify::classify3(k)?;
        m.insert("verdict".into(), json!(format!("{:?}", r.verdict)));
        m.insert("classification_failure".into(), json!(r.failure));
    }

    let sweep = spectra::vere_jones_sweep(k, o.sweep_rmax, 40);
    let (verdict, at) = match sweep.verdict {
        SweepVerdict::AllNonneg => ("AllNonneg", None),
        SweepVerdict::FailsAt(r) => ("FailsAt", Some(r)),
        SweepVerdict::DetFailsAt(r) => ("DetFailsAt", Some(r)),
    };
    let min_det = sweep.per_r.iter().map(|p| p.det).fold(f64::INFINITY, f64::min);
    let min_entry = sweep.per_r.iter().map(|p| p.min_entry).fold(f64::INFINITY, f64::min);
    m.insert(
        "resolvent_sweep".into(),
        json!({
            "verdict": verdict,
            "r": at,
            "r_max": o.sweep_rmax,
            "grid_points": sweep.r_grid.len(),
            "min_det": min_det,
            "min_relative_entry": if min_entry.is_finite() { json!(min_entry) } else { Value::Null },
            "signature": sweep.signature.map(|d| d.0),
        }),
    );

    let mut notes = Vec::new();
    if o.series_degree == 0 {
        notes.push(json!("series skipped: degree 0"));
    } else if k.dim() > divisibility::MAX_SERIES_DIM {
        notes.push(json!(format!("series skipped: n > {}", divisibility::MAX_SERIES_DIM)));
    } else {
        let s = divisibility::log_det_series(k, o.series_degree)?;
        m.insert(
            "series".into(),
            json!({
                "degree": o.series_degree,
                "verdict": series_verdict(&s.verdict),
                "min_coefficient": s.min_coefficient,
                "tol": s.tol,
                "monomials": s.coefficients.len(),
            }),
        );
    }
    match divisibility::certify_all_beta(k, o.series_degree) {
        Ok(c) => {
            let (name, reason, series) = match &c {
                CertificateVerdict::CertifiedAllBeta { series, .. } => ("CertifiedAllBeta", None, series),
                CertificateVerdict::NotCertified { reason, series } => ("NotCertified", Some(reason.clone()), series),
            };
            m.insert(
                "certificate".into(),
                json!({
                    "verdict": name,
                    "reason": reason,
                    "resolvent_series": series.as_ref().map(|s| json!({
                        "verdict": series_verdict(&s.verdict),
                        "indeterminate": s.indeterminate,
                        "worst_t": s.worst_t,
                        "min_coefficient": s.worst.min_coefficient,
                    })),
                }),
            );
        }
        Err(Error::NoConvergence) => return Err(Error::NoConvergence),
        Err(e) => {
            m.insert("certificate".into(), note(&e));
        }
    }
    m.insert("notes".into(), Value::Array(notes));
    Ok(m)
}

fn sample_entry(k: &Kernel, o: &SampleOpts) -> Result<Map<String, Value>, Error> {
    let mut m = Map::new();
    m.insert("beta".into(), json!(o.beta));
    m.insert("n".into(), json!(o.n));
    m.insert("seed".into(), json!(o.seed));
    let batch = match sampleverify::sample_gaussian_squares(k, o.beta, o.n, o.seed) {
        Ok(b) => b,
        Err(Error::NoConvergence) => return Err(Error::NoConvergence),
        Err(e) => {
            m.insert("sampling".into(), note(&e));
            return Ok(m);
        }
    };
    match sampleverify::moment_report(&batch) {
        Ok(r) => {
            m.insert(
                "moments".into(),
                json!({
                    "means": r.means,
                    "mean_analytic": r.mean_analytic,
                    "mean_z": r.mean_z,
                    "cov": r.cov,
                    "cov_analytic": r.cov_analytic,
                    "cov_z": r.cov_z,
                    "max_abs_z": r.max_abs_z(),
                }),
            );
        }
        Err(e) => {
            m.insert("moments".into(), note(&e));
        }
    }
    let mut worst: f64 = 0.0;
    let mut table = Vec::new();
    for alpha in sampleverify::alpha_grid(k.dim(), o.alpha_grid) {
        let e = sampleverify::empirical_laplace(&batch, &alpha)?;
        worst = worst.max(e.z().abs());
        table.push(json!({
            "alpha": alpha,
            "estimate": e.estimate,
            "std_error": e.std_error,
            "analytic": e.analytic,
            "z": e.z(),
        }));
    }
    m.insert("laplace".into(), Value::Array(table));
    m.insert("laplace_max_abs_z".into(), json!(worst));
    Ok(m)
}

fn metric_entry(k: &Kernel) -> Result<Map<String, Value>, Error> {
    let mut m = Map::new();
    match sampleverify::metric_table(k) {
        Ok(t) => {
            m.insert("d".into(), json!(t.d));
            m.insert("worst_slack".into(), json!(t.worst_slack));
            m.insert("worst_triple".into(), json!(t.worst_triple.map(|(x, y, z)| [x + 1, y + 1, z + 1])));
            m.insert("accepted_kernel".into(), json!(kernelcheck::check_necessary(k).overall));
        }
        Err(e) => {
            m.insert("metric".into(), note(&e));
            return Ok(m);
        }
    }
    if k.dim() == 3 {
        match sampleverify::symmetrized_psd_check(k) {
            Ok(b) => m.insert("symmetrized_psd".into(), json!(b)),
            Err(e) => m.insert("symmetrized_psd".into(), note(&e)),
        };
    }
    Ok(m)
}

pub fn summary(cmd: &Command, entries: &[Value]) -> Value {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut errors = 0;
    for e in entries {
        if e.get("dimension_error").is_some() || e.get("failure").is_some() {
            errors += 1;
        }
        let key = match cmd {
            Command::Classify => e.get("verdict").and_then(Value::as_str).map(str::to_string),
            Command::Check(_) => e.pointer("/certificate/verdict").and_then(Value::as_str).map(str::to_string),
            Command::Sample(_) => Some(if e.get("laplace").is_some() { "sampled" } else { "skipped" }.to_string()),
            Command::Metric => Some(
                match e.get("worst_slack").and_then(Value::as_f64) {
                    Some(s) if s >= -1e-10 => "triangle_ok",
                    Some(_) => "triangle_violated",
                    None if e.get("d").is_some() => "fewer_than_three_points",
                    None => "no_metric",
                }
                .to_string(),
            ),
        };
        if let Some(k) = key {
            *counts.entry(k).or_default() += 1;
        }
    }
    json!({ "matrices": entries.len(), "errors": errors, "counts": counts })
}
