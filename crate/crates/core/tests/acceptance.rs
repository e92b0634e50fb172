//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use permkit_core::classify::{self, Verdict};
use permkit_core::divisibility::{self, ReductionSpec, ReductionVerdict, SeriesVerdict};
use permkit_core::kernelcheck::{self, Kernel};
use permkit_core::matcore::{self, Matrix};
use permkit_core::sampleverify;
use permkit_core::spectra::{self, Ordering, SweepVerdict};
use rand::Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> std::result::Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("runtime {:.1}s over {:.0}s", t.as_secs_f64(), limit.as_secs_f64()))
}

/// Independent evidence against a rejected matrix.
fn corroborated(k: &Kernel) -> Option<&'static str> {
    let sweep = spectra::vere_jones_sweep(k, 1e3, 40);
    if sweep.verdict != SweepVerdict::AllNonneg {
        return Some("resolvent sweep");
    }
    if let Ok(r) = divisibility::reduction_sign_test(k) {
        if matches!(r.verdict, ReductionVerdict::Violation { .. }) {
            return Some("reduction sign test");
        }
    }
    if !kernelcheck::row_scaled_perron_test(k, 500, 11).passed {
        return Some("row-scaled Perron test");
    }
    None
}

fn classification_consistency() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut total = 0;
    let mut rejected = 0;
    let mut by_source = std::collections::BTreeMap::<&str, usize>::new();
    let mut check = |m: Matrix, must_accept: bool, total: &mut usize| -> std::result::Result<(), String> {
        *total += 1;
        let k = Kernel::candidate(m);
        let report = classify::classify3(&k).map_err(|e| format!("classify3 error {e} on {:?}", k.m))?;
        if report.verdict != Verdict::NotKernel {
            return Ok(());
        }
        ensure(!must_accept, || format!("accepted family rejected: {:?} ({:?})", k.m, report.failure))?;
        rejected += 1;
        let src = corroborated(&k).ok_or_else(|| format!("uncorroborated rejection of {:?}", k.m))?;
        *by_source.entry(src).or_default() += 1;
        Ok(())
    };
    for _ in 0..3000 {
        let m = random_psd(&mut r, 3);
        let m = if r.random::<bool>() { disguise(&mut r, &m) } else { m };
        check(m, true, &mut total)?;
    }
    for _ in 0..3000 {
        let m = random_inverse_m(&mut r);
        let m = if r.random::<bool>() { disguise(&mut r, &m) } else { m };
        check(m, true, &mut total)?;
    }
    for _ in 0..3000 {
        check(sign_coupled_perturbation(&mut r), false, &mut total)?;
    }
    for m in paper_families(&mut r) {
        check(m, false, &mut total)?;
    }
    ensure(total >= 10_000, || format!("only {total} matrices"))?;
    within(Duration::from_secs(120), start)?;
    Ok(format!(
        "{total} matrices, {rejected} rejected, all corroborated {:?}, {:.1}s",
        by_source,
        start.elapsed().as_secs_f64()
    ))
}

fn rho_factorization() -> Outcome {
    let mut r = rng(2);
    let mut worst_res: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    for _ in 0..1000 {
        let h = random_unit_symmetric(&mut r);
        let c = spectra::rho_factorization_check(&h).map_err(|e| format!("{e} on {h:?}"))?;
        worst_res = worst_res.max(c.residual);
        let mut d: Vec<f64> = c.eigenvalues.iter().map(|z| (z - 1.0).norm()).collect();
        d.sort_by(f64::total_cmp);
        worst_eig = worst_eig.max(d[1]);
        ensure(c.residual <= 1e-9, || format!("residual {:.3e} on {h:?}", c.residual))?;
        ensure(d[1] <= 1e-7, || format!("double eigenvalue off by {:.3e} on {h:?}", d[1]))?;
    }
    Ok(format!("1000 matrices, worst residual {worst_res:.2e}, worst distance to double root {worst_eig:.2e}"))
}

fn dichotomies() -> Outcome {
    let mut r = rng(3);
    for _ in 0..1000 {
        let a = random_a_minus(&mut r, 0.15);
        let a = matcore::row_scale(&random_positive_diag(&mut r, 3), &a).unwrap();
        let d = spectra::negative_case_dichotomy(&a).map_err(|e| format!("{e} on {a:?}"))?;
        ensure(d.real_count == 1 && d.ordering == Ordering::RealBelow, || format!("negative case {a:?}: {d:?}"))?;
    }
    let mut done = 0;
    while done < 1000 {
        let a = random_inverse_m(&mut r);
        // the lemma excludes kernels equivalent (possibly only effectively) to symmetric ones
        let w = kernelcheck::diag_equiv_symmetric(&Kernel::candidate(a.clone())).unwrap();
        if w.kind != kernelcheck::EquivalenceKind::NotEquivalent {
            continue;
        }
        done += 1;
        let d = spectra::positive_case_dichotomy(&a).map_err(|e| format!("{e} on {a:?}"))?;
        ensure(d.real_count == 1 && d.ordering == Ordering::RealAbove, || format!("positive case {a:?}: {d:?}"))?;
    }
    Ok("1000 negative and 1000 positive instances, no violations".into())
}

fn series_cross_check() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut kernels = Vec::new();
    while kernels.len() < 100 {
        let g = matcore::inverse(&random_symmetric_mmatrix(&mut r)).unwrap();
        kernels.push((disguise_signature(&mut r, &g), true));
    }
    let mut without = 0;
    while without < 100 {
        let g = random_unit_psd_positive(&mut r, 0.05, 0.95);
        let b = matcore::inverse(&g).unwrap();
        // curated away from the class boundary: every normalized inverse
        // off-diagonal at least 0.02 in magnitude
        let off = |i: usize, j: usize| (b[(i, j)] / (b[(i, i)] * b[(j, j)]).sqrt()).abs();
        if classify::is_mmatrix(&b).is_mmatrix || off(0, 1).min(off(1, 2)).min(off(0, 2)) < 0.02 {
            continue;
        }
        kernels.push((disguise_signature(&mut r, &g), false));
        without += 1;
    }
    let mut agree = 0;
    let mut flagged = 0;
    let mut misclassified = Vec::new();
    for (g, has_m) in &kernels {
        let k = Kernel::candidate(g.clone());
        let class2 = classify::is_class2(&k).unwrap().is_some();
        if class2 != *has_m {
            return Err(format!("generator label disagrees with class-2 test on {g:?}"));
        }
        let cert =
            divisibility::resolvent_series_certificate(&k, 8, &divisibility::default_t_grid(&k)).map_err(|e| e.to_string())?;
        let nonneg = cert.verdict == SeriesVerdict::Nonneg;
        if cert.indeterminate {
            flagged += 1;
        } else if nonneg == class2 {
            agree += 1;
        } else {
            misclassified.push(g.clone());
        }
    }
    ensure(misclassified.is_empty(), || format!("misclassified {:?}", misclassified))?;
    ensure(agree >= 198 && flagged <= 2, || format!("agree {agree}, flagged {flagged}"))?;
    within(Duration::from_secs(300), start)?;
    Ok(format!("{agree}/200 agree, {flagged} flagged indeterminate, {:.1}s", start.elapsed().as_secs_f64()))
}

fn disguise_signature(r: &mut rand_chacha::ChaCha8Rng, m: &Matrix) -> Matrix {
    matcore::diag_conjugate(&random_signature(r, m.dim()), m).unwrap()
}

fn class1_samples() -> Vec<Matrix> {
    let sym = m3([[1.0, 0.5, 0.2], [0.5, 1.0, 0.4], [0.2, 0.4, 1.0]]);
    vec![
        sym.clone(),
        matcore::diag_conjugate(&permkit_core::Diagonal(vec![1.0, 2.0, 0.5]), &sym).unwrap(),
        m3([[1.0, -0.6, 0.3], [-0.6, 1.5, -0.2], [0.3, -0.2, 0.8]]),
        m3([[1.0, 0.9, 0.1], [0.9, 1.0, 0.5], [0.1, 0.5, 1.0]]),
        m3([[1.0, 0.0, 2.0], [0.7, 1.0, 0.3], [0.5, 0.0, 1.0]]),
    ]
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let grid = sampleverify::alpha_grid(3, 20);
    let mut worst: f64 = 0.0;
    for (ki, g) in class1_samples().into_iter().enumerate() {
        let k = Kernel::candidate(g);
        for (bi, beta) in [0.5, 1.0, 1.5].into_iter().enumerate() {
            let seed = 1000 + 10 * ki as u64 + bi as u64;
            let batch = sampleverify::sample_gaussian_squares(&k, beta, 1_000_000, seed).map_err(|e| e.to_string())?;
            for a in &grid {
                let e = sampleverify::empirical_laplace(&batch, a).unwrap();
                worst = worst.max(e.z().abs());
                ensure(e.z().abs() <= 4.0, || format!("kernel {ki} beta {beta} alpha {a:?}: {e:?}"))?;
            }
            let m = sampleverify::moment_report(&batch).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max(m.cov_z[i][j].abs());
                    ensure(m.cov_z[i][j].abs() <= 4.0, || {
                        format!("kernel {ki} beta {beta} cov({i},{j}) {} vs {}", m.cov[i][j], m.cov_analytic[i][j])
                    })?;
                }
            }
        }
    }
    within(Duration::from_secs(180), start)?;
    Ok(format!("5 kernels x 3 indices, worst |z| {worst:.2}, {:.1}s", start.elapsed().as_secs_f64()))
}

fn metric_triangle() -> Outcome {
    let mut r = rng(6);
    let mut accepted = 0;
    let mut worst = f64::INFINITY;
    let mut source = paper_families(&mut r).into_iter();
    while accepted < 10_000 {
        let m = match accepted % 3 {
            0 => {
                let m = random_psd(&mut r, 3);
                disguise(&mut r, &m)
            }
            1 => {
                let m = random_inverse_m(&mut r);
                disguise(&mut r, &m)
            }
            _ => source.next().unwrap_or_else(|| sign_coupled_perturbation(&mut r)),
        };
        let k = Kernel::candidate(m);
        let v = classify::classify3(&k).unwrap().verdict;
        if !matches!(v, Verdict::Class1 | Verdict::Class2 | Verdict::Both) {
            // keep the rotation moving when a source yields a rejection
            if accepted % 3 == 2 {
                continue;
            }
            return Err(format!("generated kernel rejected: {:?}", k.m));
        }
        accepted += 1;
        let t = sampleverify::metric_table(&k).map_err(|e| format!("{e} on {:?}", k.m))?;
        let s = t.worst_slack.unwrap();
        worst = worst.min(s);
        ensure(s >= -1e-10, || format!("slack {s:.3e} on {:?}", k.m))?;
        let psd = sampleverify::symmetrized_psd_check(&k).map_err(|e| e.to_string())?;
        ensure(psd, || format!("symmetrization not PSD on {:?}", k.m))?;
    }
    Ok(format!("10000 accepted kernels, worst slack {worst:.3e}"))
}

fn obstruction_desk_check() -> Outcome {
    let mut r = rng(7);
    for _ in 0..200 {
        let (a, b, c) = (r.random_range(0.05..2.0), r.random_range(0.05..2.0), r.random_range(0.05..2.0));
        for m in [obstruction(a, b, c), obstruction(a, b, c).transpose()] {
            let v = classify::classify3(&Kernel::candidate(m.clone())).unwrap().verdict;
            ensure(v == Verdict::NotKernel, || format!("{m:?} gave {v:?}"))?;
        }
    }
    let mut worst_z: f64 = 0.0;
    for (idx, zero) in [0usize, 1, 2].into_iter().enumerate() {
        let mut v = [0.8, 1.3, 0.6];
        v[zero] = 0.0;
        let k = Kernel::candidate(obstruction(v[0], v[1], v[2]));
        let ind = classify::independence_report(&k);
        ensure(ind.c_coefficient.abs() <= 1e-10 && ind.fully_independent, || format!("{ind:?}"))?;
        let batch = sampleverify::sample_gaussian_squares(&k, 0.5, 200_000, 70 + idx as u64).map_err(|e| e.to_string())?;
        let m = sampleverify::moment_report(&batch).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst_z = worst_z.max(m.cov_z[i][j].abs());
                    ensure(m.cov_analytic[i][j] == 0.0 && m.cov_z[i][j].abs() <= 4.0, || format!("{m:?}"))?;
                }
            }
        }
    }
    Ok(format!("400 nonzero-product matrices rejected, zero-product covariances worst |z| {worst_z:.2}"))
}

fn exact_values() -> Outcome {
    for a in [0.0, 0.5, 1.0] {
        let adj = matcore::adjugate(&classify::singular_a_family(a));
        let e = 1.0 - a * a;
        let want = m3([[0.0, 0.0, 0.0], [0.0, e, -e], [0.0, -e, e]]);
        ensure(adj.max_diff(&want) <= f64::EPSILON, || format!("adjugate at {a}: {adj:?}"))?;
    }
    let mut r = rng(8);
    let mut worst_red: f64 = 0.0;
    for _ in 0..1000 {
        let [a1, a2, b1, b2, c1, c2]: [f64; 6] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let u = r.random_range(0.0..10.0);
        let k = Kernel::candidate(m3([[1.0, a1, c2], [a2, 1.0, b1], [c1, b2, 1.0]]));
        let red = divisibility::reduce_kernel(&k, &ReductionSpec::pin(3, &[(2, u)]).unwrap()).unwrap();
        let v = u / (1.0 + u);
        let want = Matrix::from_rows(&[[1.0 - v * c1 * c2, a1 - v * c2 * b2], [a2 - v * b1 * c1, 1.0 - v * b1 * b2]]).unwrap();
        worst_red = worst_red.max(red.m.max_diff(&want));
    }
    ensure(worst_red <= 1e-12, || format!("reduction residual {worst_red:.3e}"))?;
    let mut worst_resid: f64 = 0.0;
    let mut sym_pd = 0;
    for _ in 0..1000 {
        let b = random_mmatrix(&mut r, 3);
        let d = divisibility::mmatrix_decompose(&b).map_err(|e| format!("{e} on {b:?}"))?;
        let bd = Matrix::from_fn(3, |i, j| b[(i, j)] * d.d.0[j]);
        let gap = d.lambda - matcore::spectral_radius(&d.c).unwrap();
        worst_resid = worst_resid.max(d.residual);
        ensure(d.residual <= 1e-10 && gap > 0.0, || format!("decomposition of {b:?}: {d:?}"))?;
        ensure(d.c.as_slice().iter().all(|&x| x >= 0.0), || format!("C has a negative entry for {b:?}"))?;
        let dom = divisibility::dominance_pd_check(&bd);
        ensure(dom.strictly_dominant, || format!("BD not dominant for {b:?}"))?;
        let min_re = matcore::eigenvalues(&bd).unwrap().eigenvalues.iter().fold(f64::INFINITY, |m, z| m.min(z.re));
        ensure(min_re > 0.0, || format!("BD eigenvalue with Re <= 0 for {b:?}"))?;
        if dom.symmetric_part_pd {
            sym_pd += 1;
        }
    }
    Ok(format!(
        "adjugates exact, reduction residual {worst_red:.1e}, 1000 decompositions (residual {worst_resid:.1e}, symmetric part PD on {sym_pd})"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 classification consistency", classification_consistency),
        ("2 rho factorization", rho_factorization),
        ("3 eigenvalue dichotomies", dichotomies),
        ("4 series vs M-matrix inverse", series_cross_check),
        ("5 Monte Carlo Laplace and covariance", monte_carlo),
        ("6 metric triangle inequality", metric_triangle),
        ("7 three-zero obstruction", obstruction_desk_check),
        ("8 exact values", exact_values),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
