//! Eigenvalue structure of 3x3 kernels under diagonal scalings, and the
//! modified-resolvent sweep.
//!
//! Pair magnitudes are written `a = |Γ(1,2)Γ(2,1)|^½`, `b` for the (2,3)
//! pair and `c` for the (1,3) pair throughout.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify;
use crate::error::{Error, Result};
use crate::kernelcheck::{self, Kernel};
use crate::matcore::{self, Diagonal, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingKind {
    Rho,
    Phi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralScaling {
    pub entries: [f64; 3],
    pub kind: ScalingKind,
}

impl SpectralScaling {
    pub fn diagonal(&self) -> Diagonal {
        Diagonal(self.entries.to_vec())
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn product(&self) -> f64 {
        self.entries.iter().product()
    }
}

/// `ρ = (b/(b−ac), c/(c−ab), a/(a−bc))`.
pub fn rho_scaling(a: f64, b: f64, c: f64) -> Result<SpectralScaling> {
    let d = [(b - a * c, "b - ac"), (c - a * b, "c - ab"), (a - b * c, "a - bc")];
    if let Some(&(_, name)) = d.iter().find(|(v, _)| *v == 0.0) {
        return Err(Error::ZeroDenominator(name));
    }
    Ok(SpectralScaling { entries: [b / d[0].0, c / d[1].0, a / d[2].0], kind: ScalingKind::Rho })
}

/// `Φ = (b/(b+ac), c/(c+ab), a/(a+bc))` for strictly positive `a, b, c`.
pub fn phi_scaling(a: f64, b: f64, c: f64) -> Result<SpectralScaling> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::NonPositiveInput);
    }
    Ok(SpectralScaling {
        entries: [b / (b + a * c), c / (c + a * b), a / (a + b * c)],
        kind: ScalingKind::Phi,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoCheck {
    pub scaling: SpectralScaling,
    /// Max coefficient difference divided by `max(1, max|coefficient|)`.
    pub residual: f64,
    pub abs_residual: f64,
    /// Eigenvalues of `ρH` from the QR path, which keeps the double root at 1
    /// well conditioned.
    pub eigenvalues: Vec<Complex64>,
}

/// Compares `det(ρH − λI)` with `(λ−1)²(ρ₁ρ₂ρ₃|H| − λ)` for a symmetric
/// unit-diagonal `H`.
pub fn rho_factorization_check(h: &Matrix) -> Result<RhoCheck> {
    if h.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: h.dim() });
    }
    if !h.is_symmetric(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let (a, b, c) = (h[(0, 1)], h[(1, 2)], h[(0, 2)]);
    let scaling = rho_scaling(a, b, c)?;
    let rh = matcore::left_diag_mul(&scaling.diagonal(), h)?;
    let got = matcore::char_poly(&rh);
    let p = scaling.product() * matcore::det(h);
    let want = [-1.0, p + 2.0, -(2.0 * p + 1.0), p];
    let abs_residual = got.iter().zip(want).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = want.iter().chain(got.iter()).fold(1.0f64, |m, x| m.max(x.abs()));
    let eigenvalues = matcore::eigenvalues_qr(&rh)?.eigenvalues;
    Ok(RhoCheck { scaling, residual: abs_residual / scale, abs_residual, eigenvalues })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    RealBelow,
    RealAbove,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDichotomy {
    pub real_count: usize,
    pub real_value: Option<f64>,
    pub complex_real_part: Option<f64>,
    pub ordering: Ordering,
    /// The diagonal scaling the spectrum was computed for.
    pub scaling: Diagonal,
    pub eigenvalues: Vec<Complex64>,
}

fn dichotomy(scaling: Diagonal, m: &Matrix) -> Result<EigenDichotomy> {
    let sm = matcore::row_scale(&scaling, m)?;
    let spec = matcore::eigenvalues(&sm)?;
    let real_count = spec.real_count();
    let (real_value, complex_real_part, ordering) = if real_count == 1 {
        let r = spec.eigenvalues.iter().find(|z| matcore::is_real(**z)).unwrap().re;
        let cz = spec.eigenvalues.iter().find(|z| !matcore::is_real(**z)).unwrap().re;
        let ord = if cz > r {
            Ordering::RealBelow
        } else if cz < r {
            Ordering::RealAbove
        } else {
            Ordering::NotApplicable
        };
        (Some(r), Some(cz), ord)
    } else {
        (None, None, Ordering::NotApplicable)
    };
    Ok(EigenDichotomy { real_count, real_value, complex_real_part, ordering, scaling, eigenvalues: spec.eigenvalues })
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

/// Φ from pair magnitudes `p` given in [`PAIRS`] order.
fn phi_from_pairs(p: [f64; 3]) -> Result<SpectralScaling> {
    phi_scaling(p[0], p[1], p[2])
}

fn unit_diagonal(k: &Kernel) -> Result<(Matrix, Diagonal)> {
    let m = &k.m;
    let g: Vec<f64> = (0..3).map(|i| m[(i, i)]).collect();
    if let Some(i) = g.iter().position(|&x| x <= 0.0) {
        return Err(Error::PreconditionViolated(format!("diagonal entry {} is not positive", i + 1)));
    }
    let inv = Diagonal(g.iter().map(|x| 1.0 / x).collect());
    Ok((matcore::row_scale(&inv, m)?, inv))
}

/// The Φ scaling for a unit-diagonal 3x3 with nonpositive off-diagonals and
/// unequal cycle products. Full pairs contribute their geometric mean;
/// pairs with one zero entry get the auxiliary magnitude that makes the
/// comparison polynomial differ from the symmetric one by a multiple of λ.
fn negative_case_phi(a: &Matrix) -> Result<SpectralScaling> {
    let kk = Kernel::candidate(a.clone());
    let t = kk.tol.scaled(a, 1);
    let (x, y) = kernelcheck::cycle_condition(&kk)?;
    let cycle = x.abs().max(y.abs());
    let mag = |(i, j): (usize, usize)| (a[(i, j)] * a[(j, i)]).max(0.0).sqrt();
    let half: Vec<usize> =
        (0..3).filter(|&p| (a[PAIRS[p]].abs() <= t) != (a[(PAIRS[p].1, PAIRS[p].0)].abs() <= t)).collect();
    let mut p = [mag(PAIRS[0]), mag(PAIRS[1]), mag(PAIRS[2])];
    match half.len() {
        0 => {}
        1 => {
            // one half-zero pair: q² + 2·(p₁p₂)·q − |cycle| = 0
            let h = half[0];
            let prod: f64 = (0..3).filter(|&i| i != h).map(|i| p[i]).product();
            p[h] = -prod + (prod * prod + cycle).sqrt();
        }
        2 => {
            // two half-zero pairs share the magnitude s with 2s²(1+q) = |cycle|,
            // where q is the full pair's magnitude (|cycle| = q times the half entries)
            let full = (0..3).find(|i| !half.contains(i)).unwrap();
            let q = p[full];
            let s = (cycle / (2.0 * (1.0 + q))).sqrt();
            for &h in &half {
                p[h] = s;
            }
        }
        _ => {
            // all pairs half-zero: the (1,2) magnitude solves q² + 2q·b'c' − a'b'c' = 0,
            // then the other two follow the two-pair rule
            let raw = |k: usize| a[PAIRS[k]].abs().max(a[(PAIRS[k].1, PAIRS[k].0)].abs());
            let bc = raw(1) * raw(2);
            let q = -bc + (bc * bc + cycle).sqrt();
            let s = (q * bc / (2.0 * (1.0 + q))).sqrt();
            p = [q, s, s];
        }
    }
    phi_from_pairs(p)
}

/// Validated unit-diagonal form of a candidate for the negative case.
fn negative_case_input(a_minus: &Matrix) -> Result<(Matrix, Diagonal, bool)> {
    if a_minus.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: a_minus.dim() });
    }
    let k = Kernel::candidate(a_minus.clone());
    let (u, inv) = unit_diagonal(&k)?;
    let t = k.tol.scaled(&u, 1);
    for i in 0..3 {
        for j in 0..3 {
            if i != j && u[(i, j)] > t {
                return Err(Error::PreconditionViolated(format!("entry ({},{}) is positive", i + 1, j + 1)));
            }
        }
    }
    for (i, j) in PAIRS {
        if u[(i, j)] * u[(j, i)] > 1.0 + t {
            return Err(Error::PreconditionViolated(format!("pair ({},{}) has product above 1", i + 1, j + 1)));
        }
    }
    if matcore::det(&u) < -k.tol.scaled(&u, 3) {
        return Err(Error::PreconditionViolated("determinant is negative".into()));
    }
    let uk = Kernel::candidate(u.clone());
    let (x, y) = kernelcheck::cycle_condition(&uk)?;
    let equivalent = (x - y).abs() <= uk.tol.scaled(&u, 3);
    Ok((u, inv, equivalent))
}

/// Eigenvalue structure of `ΦA₋` for a kernel with nonpositive
/// off-diagonals. When `A₋` is not diagonally equivalent to a symmetric
/// matrix the expected outcome is one real eigenvalue lying below the real
/// part of the complex pair. Symmetric-equivalent input is still evaluated
/// (with Φ from the pair magnitudes, or the identity when a pair vanishes).
pub fn negative_case_dichotomy(a_minus: &Matrix) -> Result<EigenDichotomy> {
    let (u, _, equivalent) = negative_case_input(a_minus)?;
    let phi = if equivalent {
        let mags = PAIRS.map(|(i, j)| (u[(i, j)] * u[(j, i)]).max(0.0).sqrt());
        phi_from_pairs(mags).map(|s| s.diagonal()).unwrap_or_else(|_| Diagonal::identity(3))
    } else {
        negative_case_phi(&u)?.diagonal()
    };
    dichotomy(phi, &u)
}

/// Eigenvalue structure of `ρA₊` for a class-2 kernel with nonnegative
/// off-diagonals; `ρ` comes from the symmetric matrix of pair magnitudes.
/// Expected: one real eigenvalue above the real part of the complex pair.
pub fn positive_case_dichotomy(a_plus: &Matrix) -> Result<EigenDichotomy> {
    if a_plus.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: a_plus.dim() });
    }
    let k = Kernel::candidate(a_plus.clone());
    let (u, _) = unit_diagonal(&k)?;
    let t = k.tol.scaled(&u, 1);
    if (0..3).any(|i| (0..3).any(|j| i != j && u[(i, j)] < -t)) {
        return Err(Error::PreconditionViolated("an off-diagonal entry is negative".into()));
    }
    let b = matcore::inverse(&u).map_err(|_| Error::PreconditionViolated("matrix is singular".into()))?;
    if !classify::is_mmatrix(&b).is_mmatrix {
        return Err(Error::PreconditionViolated("inverse is not an M-matrix".into()));
    }
    let mags = PAIRS.map(|(i, j)| (u[(i, j)] * u[(j, i)]).max(0.0).sqrt());
    let scaling = match rho_scaling(mags[0], mags[1], mags[2]) {
        Ok(r) if r.entries.iter().all(|&x| x > 0.0 && x.is_finite()) => r.diagonal(),
        _ => Diagonal::identity(3),
    };
    dichotomy(scaling, &u)
}

/// Row scalings that the Perron test should always try: for a 3x3 kernel
/// whose sign-normalized form has nonpositive off-diagonals and unequal
/// cycle products, the Φ scaling of [`negative_case_dichotomy`].
pub fn planted_row_scalings(k: &Kernel) -> Vec<Diagonal> {
    let planted = || -> Result<Diagonal> {
        let (norm, _) = kernelcheck::sign_normalize(k)?;
        let (u, inv, equivalent) = negative_case_input(&norm.m)?;
        if equivalent {
            return Err(Error::NotNormalizable);
        }
        let phi = negative_case_phi(&u)?;
        Ok(phi.diagonal().compose(&inv))
    };
    if k.dim() != 3 {
        return Vec::new();
    }
    planted().map(|d| vec![d]).unwrap_or_default()
}

/// `Γ_r = Γ (I + rΓ)⁻¹`.
pub fn modified_resolvent(k: &Kernel, r: f64) -> Result<Matrix> {
    let n = k.dim();
    let shifted = &Matrix::identity(n) + &k.m.scale(r);
    let inv = matcore::inverse(&shifted)?;
    Ok(&k.m * &inv)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SweepVerdict {
    AllNonneg,
    FailsAt(f64),
    DetFailsAt(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r: f64,
    pub det: f64,
    pub min_entry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventSweep {
    pub r_grid: Vec<f64>,
    pub per_r: Vec<SweepPoint>,
    pub verdict: SweepVerdict,
    /// Signature under which entries were tested; entry signs of `SΓ_rS`
    /// are what the nonnegativity condition is about.
    pub signature: Option<Diagonal>,
    /// All real nonzero eigenvalues of Γ are positive.
    pub real_eigs_positive: bool,
}

/// Sweep grid: 0, `steps` geometric points on `[1e-3·r_max, r_max]` and 16
/// uniform points on `(0, r_max]`.
pub fn sweep_grid(r_max: f64, steps: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    let lo = 1e-3 * r_max;
    for i in 0..steps {
        let t = if steps == 1 { 1.0 } else { i as f64 / (steps - 1) as f64 };
        g.push(lo * (r_max / lo).powf(t));
    }
    for i in 1..=16 {
        g.push(r_max * i as f64 / 16.0);
    }
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    g
}

/// A signature `S` with `SΓS` entrywise nonnegative, if one exists.
pub fn nonneg_signature(m: &Matrix, tol: f64) -> Option<Diagonal> {
    let n = m.dim();
    let mut s: Vec<Option<f64>> = vec![None; n];
    for start in 0..n {
        if s[start].is_some() {
            continue;
        }
        s[start] = Some(1.0);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let si = s[i].unwrap();
            for j in 0..n {
                if j == i {
                    continue;
                }
                for v in [m[(i, j)], m[(j, i)]] {
                    if v.abs() <= tol {
                        continue;
                    }
                    let want = si * v.signum();
                    match s[j] {
                        None => {
                            s[j] = Some(want);
                            stack.push(j);
                        }
                        Some(sj) if sj != want => return None,
                        _ => {}
                    }
                }
            }
        }
    }
    if (0..n).any(|i| m[(i, i)] < -tol) {
        return None;
    }
    Some(Diagonal(s.into_iter().map(|x| x.unwrap()).collect()))
}

/// Grid check of the sufficient resolvent condition (entries of `Γ_r`
/// nonnegative up to a signature, `det(I + rΓ) > 0`). A grid is evidence,
/// not proof: a passing verdict says nothing between grid points.
pub fn vere_jones_sweep(k: &Kernel, r_max: f64, steps: usize) -> ResolventSweep {
    let n = k.dim();
    let tol = k.tol.scaled(&k.m, 1);
    let grid = sweep_grid(r_max, steps);
    let signature = nonneg_signature(&k.m, tol);
    let sig = signature.clone().unwrap_or_else(|| Diagonal::identity(n));
    let per_r: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&r| {
            let shifted = &Matrix::identity(n) + &k.m.scale(r);
            let det = matcore::det(&shifted);
            let min_entry = match modified_resolvent(k, r) {
                Ok(gr) => {
                    let s = matcore::diag_conjugate(&sig, &gr).expect("signature entries are ±1");
                    // relative to the size of Γ_r, which shrinks like 1/r
                    let scale = gr.max_abs().max(f64::MIN_POSITIVE);
                    s.as_slice().iter().fold(f64::INFINITY, |m, &x| m.min(x / scale))
                }
                Err(_) => f64::NEG_INFINITY,
            };
            SweepPoint { r, det, min_entry }
        })
        .collect();
    let mut verdict = SweepVerdict::AllNonneg;
    for p in &per_r {
        if p.det <= 0.0 {
            verdict = SweepVerdict::DetFailsAt(p.r);
            break;
        }
        if signature.is_none() || p.min_entry < -k.tol.rel {
            verdict = SweepVerdict::FailsAt(p.r);
            break;
        }
    }
    let real_eigs_positive = match matcore::eigenvalues(&k.m) {
        Ok(s) => s.real_values().iter().all(|&x| x > 0.0 || x.abs() <= tol),
        Err(_) => false,
    };
    ResolventSweep { r_grid: grid, per_r, verdict, signature, real_eigs_positive }
}
