//! Random and structured 3x3 generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use permkit_core::classify::{self, Branch};
use permkit_core::matcore::{self, Diagonal, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn m3(rows: [[f64; 3]; 3]) -> Matrix {
    Matrix::from_rows(&rows).unwrap()
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + r.random::<f64>() * (hi / lo).ln()).exp()
}

pub fn random_positive_diag(r: &mut ChaCha8Rng, n: usize) -> Diagonal {
    Diagonal((0..n).map(|_| log_uniform(r, 0.2, 5.0)).collect())
}

pub fn random_signature(r: &mut ChaCha8Rng, n: usize) -> Diagonal {
    Diagonal((0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect())
}

/// Random conjugation `SDΓD⁻¹S` with `S` a signature and `D` positive.
pub fn disguise(r: &mut ChaCha8Rng, m: &Matrix) -> Matrix {
    let d = random_positive_diag(r, m.dim()).compose(&random_signature(r, m.dim()));
    matcore::diag_conjugate(&d, m).unwrap()
}

/// `AAᵀ` for Gaussian `A`, optionally scaled to unit diagonal.
pub fn random_psd(r: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = Matrix::new(n, (0..n * n).map(|_| r.sample::<f64, _>(StandardNormal)).collect()).unwrap();
    let g = &a * &a.transpose();
    if r.random::<bool>() {
        let s: Vec<f64> = (0..n).map(|i| g[(i, i)].sqrt()).collect();
        Matrix::from_fn(n, |i, j| g[(i, j)] / (s[i] * s[j]))
    } else {
        g
    }
}

/// Symmetric unit-diagonal PSD matrix with off-diagonals in `(lo, hi)`.
pub fn random_unit_psd_positive(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Matrix {
    loop {
        let (a, b, c) = (r.random_range(lo..hi), r.random_range(lo..hi), r.random_range(lo..hi));
        let m = m3([[1.0, a, c], [a, 1.0, b], [c, b, 1.0]]);
        if classify::is_psd(&m).unwrap() && matcore::det(&m) > 1e-3 {
            return m;
        }
    }
}

/// `sI − P` with `P ≥ 0` (about a fifth of the entries zeroed), `s` above
/// `ρ(P)`, then row scaled by a positive diagonal.
pub fn random_mmatrix(r: &mut ChaCha8Rng, n: usize) -> Matrix {
    let entries: Vec<f64> = (0..n * n)
        .map(|idx| {
            let v: f64 = r.random();
            if idx % (n + 1) == 0 || r.random::<f64>() < 0.2 {
                0.0
            } else {
                v
            }
        })
        .collect();
    let p = Matrix::new(n, entries).unwrap();
    let rho = matcore::spectral_radius(&p).unwrap().max(0.05);
    let s = rho * (1.0 + r.random_range(0.05..1.5));
    let b = &Matrix::identity(n).scale(s) - &p;
    matcore::row_scale(&random_positive_diag(r, n), &b).unwrap()
}

/// Symmetric M-matrix `sI − P` with `P = Pᵀ ≥ 0`.
pub fn random_symmetric_mmatrix(r: &mut ChaCha8Rng) -> Matrix {
    let (a, b, c) = (r.random_range(0.05..1.0), r.random_range(0.05..1.0), r.random_range(0.05..1.0));
    let p = m3([[0.0, a, c], [a, 0.0, b], [c, b, 0.0]]);
    let rho = matcore::spectral_radius(&p).unwrap();
    &Matrix::identity(3).scale(rho * (1.0 + r.random_range(0.05..1.0))) - &p
}

pub fn random_inverse_m(r: &mut ChaCha8Rng) -> Matrix {
    matcore::inverse(&random_mmatrix(r, 3)).unwrap()
}

/// Nonpositive off-diagonals, unit diagonal, unequal cycle products and
/// nonnegative determinant. Zero entries appear with probability `p_zero`
/// (never both entries of a pair).
pub fn random_a_minus(r: &mut ChaCha8Rng, p_zero: f64) -> Matrix {
    loop {
        let mut m = Matrix::identity(3);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let zero_side = if r.random::<f64>() < p_zero { Some(r.random::<bool>()) } else { None };
            let u = -r.random_range(0.02..0.9);
            let v = -r.random_range(0.02..0.9);
            m[(i, j)] = if zero_side == Some(true) { 0.0 } else { u };
            m[(j, i)] = if zero_side == Some(false) { 0.0 } else { v };
        }
        let x = m[(0, 1)] * m[(1, 2)] * m[(2, 0)];
        let y = m[(1, 0)] * m[(2, 1)] * m[(0, 2)];
        if matcore::det(&m) >= 1e-6 && (x - y).abs() > 1e-6 {
            return m;
        }
    }
}

/// Symmetric unit-diagonal `H` whose ρ denominators are at least `1e-3`
/// in magnitude.
pub fn random_unit_symmetric(r: &mut ChaCha8Rng) -> Matrix {
    loop {
        let (a, b, c) = (r.random_range(-0.95..0.95), r.random_range(-0.95..0.95), r.random_range(-0.95..0.95));
        if [b - a * c, c - a * b, a - b * c].iter().all(|d: &f64| d.abs() >= 1e-3) {
            return m3([[1.0, a, c], [a, 1.0, b], [c, b, 1.0]]);
        }
    }
}

/// Symmetric matrix with entries perturbed pairwise as `(tΓ(i,j), Γ(j,i)/t)`
/// with the pair's sign kept, so pair products survive but cycle products
/// generally split.
pub fn sign_coupled_perturbation(r: &mut ChaCha8Rng) -> Matrix {
    let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
    let mut m = random_unit_psd_positive(r, 0.05, 0.95);
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let t = log_uniform(r, 0.3, 3.0);
        let s = if r.random::<f64>() < 0.8 { sign } else { -sign };
        m[(i, j)] *= s * t;
        m[(j, i)] *= s / t;
    }
    m
}

/// Singular families over a grid, the zero-entry negative families, their
/// nonnegative mirrors, and the three-zero obstruction matrices.
pub fn paper_families(r: &mut ChaCha8Rng) -> Vec<Matrix> {
    let mut out = Vec::new();
    let steps = 24;
    for i in 0..=steps {
        for j in 0..=steps {
            let (x, y) = (FRAC_PI_2 * i as f64 / steps as f64, FRAC_PI_2 * j as f64 / steps as f64);
            for b in [Branch::Plus, Branch::Minus] {
                if let Ok(m) = classify::singular_family(x, y, b) {
                    out.push(m);
                }
            }
        }
    }
    for i in 0..=100 {
        out.push(classify::singular_a_family(i as f64 / 100.0));
    }
    for _ in 0..300 {
        let m = random_a_minus(r, 0.5);
        out.push(m.clone());
        out.push(Matrix::from_fn(3, |i, j| m[(i, j)].abs()));
    }
    for _ in 0..300 {
        out.push(obstruction(r.random_range(0.0..2.0), r.random_range(0.0..2.0), r.random_range(0.0..2.0)));
    }
    for _ in 0..50 {
        let v: [f64; 3] = [r.random_range(0.0..2.0), r.random_range(0.0..2.0), r.random_range(0.0..2.0)];
        let k = r.random_range(0..3);
        let mut v2 = v;
        v2[k] = 0.0;
        out.push(obstruction(v2[0], v2[1], v2[2]));
    }
    out
}

/// `[[1,0,a],[b,1,0],[0,c,1]]`.
pub fn obstruction(a: f64, b: f64, c: f64) -> Matrix {
    m3([[1.0, 0.0, a], [b, 1.0, 0.0], [0.0, c, 1.0]])
}
