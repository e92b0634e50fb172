//! Infinite divisibility: M-matrix decompositions, the log-determinant
//! power series and its nonnegativity certificate, and conditioning
//! reductions that pin components of the Laplace transform.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{self, Class2Witness};
use crate::error::{Error, Result};
use crate::kernelcheck::{self, Kernel};
use crate::matcore::{self, Diagonal, Matrix};

pub const MAX_SERIES_DEGREE: usize = 12;
pub const MAX_SERIES_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MDecomposition {
    pub d: Diagonal,
    pub lambda: f64,
    pub c: Matrix,
    pub delta0: f64,
    /// `max |BD − (λI − C)|`.
    pub residual: f64,
}

/// Writes an M-matrix as `BD = λI − C` with `D` the row sums of `B⁻¹`,
/// `C ≥ 0` and `λ > ρ(C)`.
pub fn mmatrix_decompose(b: &Matrix) -> Result<MDecomposition> {
    let diag = classify::is_mmatrix(b);
    if !diag.is_mmatrix {
        return Err(Error::NotMMatrix(format!("{:?}", diag.failed.expect("failure recorded"))));
    }
    let n = b.dim();
    let binv = matcore::inverse(b)?;
    let d = Diagonal((0..n).map(|i| (0..n).map(|j| binv[(i, j)]).sum()).collect());
    let bd = Matrix::from_fn(n, |i, j| b[(i, j)] * d.0[j]);
    let mu = (0..n).map(|i| bd[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let c_prime = &Matrix::identity(n).scale(mu) - &bd;
    let step = c_prime.max_abs();
    let rho_prime = matcore::spectral_radius(&c_prime)?;
    // smallest multiple k ≥ 1 of max|C'| that clears the margin; ρ(C' + δI) = ρ(C') + δ for C' ≥ 0
    let mut delta0 = step;
    for k in 1..=64 {
        delta0 = k as f64 * step;
        if mu + delta0 > rho_prime + delta0 + 1e-6 {
            break;
        }
    }
    let lambda = mu + delta0;
    let c = &c_prime + &Matrix::identity(n).scale(delta0);
    let recon = &Matrix::identity(n).scale(lambda) - &c;
    let residual = recon.max_diff(&bd);
    Ok(MDecomposition { d, lambda, c, delta0, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceCheck {
    pub strictly_dominant: bool,
    pub symmetric_part_pd: bool,
    pub passed: bool,
}

/// Strict row diagonal dominance of `BD` and positive definiteness of
/// `BD + (BD)ᵀ`.
pub fn dominance_pd_check(bd: &Matrix) -> DominanceCheck {
    let n = bd.dim();
    let strictly_dominant = (0..n).all(|i| {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| bd[(i, j)].abs()).sum();
        off < bd[(i, i)]
    });
    let sym = bd + &bd.transpose();
    let symmetric_part_pd = matcore::symmetric_eigen(&sym).map(|(v, _)| v.iter().all(|&x| x > 0.0)).unwrap_or(false);
    DominanceCheck { strictly_dominant, symmetric_part_pd, passed: strictly_dominant && symmetric_part_pd }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeriesVerdict {
    Nonneg,
    NegativeAt(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesCertificate {
    pub max_degree: usize,
    /// Exponent vector → coefficient, for every monomial of total degree ≤ K.
    pub coefficients: BTreeMap<Vec<u32>, f64>,
    pub min_coefficient: f64,
    pub tol: f64,
    pub verdict: SeriesVerdict,
}

impl SeriesCertificate {
    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        self.coefficients.get(exponents).copied().unwrap_or(0.0)
    }

    pub fn is_nonneg(&self) -> bool {
        self.verdict == SeriesVerdict::Nonneg
    }
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Dense accumulator for exponent vectors in `{0..=K}^n`.
struct Accumulator {
    base: usize,
    data: Vec<f64>,
}

impl Accumulator {
    fn new(n: usize, k: usize) -> Self {
        Self { base: k + 1, data: vec![0.0; (k + 1).pow(n as u32)] }
    }
}

/// Adds every closed walk starting at `first` of each length `1..=K`,
/// weighted by `1/length`.
fn walks_from(m: &Matrix, first: usize, max_degree: usize) -> Accumulator {
    let n = m.dim();
    let mut acc = Accumulator::new(n, max_degree);
    let stride: Vec<usize> = (0..n).map(|i| acc.base.pow(i as u32)).collect();
    // stack of (current vertex, length so far, running product, flat exponent index)
    let mut stack = vec![(first, 1usize, 1.0f64, stride[first])];
    while let Some((v, len, prod, idx)) = stack.pop() {
        let closing = prod * m[(v, first)];
        if closing != 0.0 {
            acc.data[idx] += closing / len as f64;
        }
        if len == max_degree {
            continue;
        }
        for w in 0..n {
            let p = prod * m[(v, w)];
            if p != 0.0 {
                stack.push((w, len + 1, p, idx + stride[w]));
            }
        }
    }
    acc
}

fn decode(mut flat: usize, n: usize, base: usize) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let e = flat % base;
            flat /= base;
            e as u32
        })
        .collect()
}

/// Coefficients of `−log det(I − ZM) = Σ_k tr((ZM)^k)/k` for `Z = diag(z)`
/// up to total degree `K`. The coefficient of a monomial is the sum of
/// `M(i₁,i₂)···M(i_k,i₁)/k` over index sequences realizing it.
fn series_coefficients(m: &Matrix, max_degree: usize) -> (BTreeMap<Vec<u32>, f64>, f64) {
    let n = m.dim();
    let parts: Vec<Accumulator> = (0..n).into_par_iter().map(|i| walks_from(m, i, max_degree)).collect();
    let base = max_degree + 1;
    let mut coefficients = BTreeMap::new();
    let mut min = f64::INFINITY;
    for flat in 0..base.pow(n as u32) {
        let e = decode(flat, n, base);
        if e.iter().sum::<u32>() as usize > max_degree {
            continue;
        }
        let vals: Vec<f64> = parts.iter().map(|p| p.data[flat]).collect();
        let c = pairwise_sum(&vals);
        if flat != 0 {
            min = min.min(c);
        }
        coefficients.insert(e, c);
    }
    (coefficients, min)
}

fn certificate(m: &Matrix, max_degree: usize) -> Result<SeriesCertificate> {
    if max_degree > MAX_SERIES_DEGREE {
        return Err(Error::DegreeTooLarge { got: max_degree, max: MAX_SERIES_DEGREE });
    }
    if m.dim() > MAX_SERIES_DIM {
        return Err(Error::BadDimension { got: m.dim(), max: MAX_SERIES_DIM });
    }
    let (coefficients, min) = series_coefficients(m, max_degree);
    let tol = 1e-10 * (1.0 + m.max_abs()).powi(max_degree as i32);
    let verdict = if min < -tol {
        let worst = coefficients
            .iter()
            .filter(|(e, _)| e.iter().any(|&x| x > 0))
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(e, _)| e.clone())
            .expect("at least one monomial");
        SeriesVerdict::NegativeAt(worst)
    } else {
        SeriesVerdict::Nonneg
    };
    let min_coefficient = if min.is_finite() { min } else { 0.0 };
    Ok(SeriesCertificate { max_degree, coefficients, min_coefficient, tol, verdict })
}

/// The truncated expansion of `−log det(I − ZΓ)` in `z₁…zₙ`, with a
/// nonnegativity verdict at tolerance `1e-10·(1 + max|Γ|)^K`.
pub fn log_det_series(k: &Kernel, max_degree: usize) -> Result<SeriesCertificate> {
    certificate(&k.m, max_degree)
}

/// `Q_t = I − (I + tΓ)⁻¹ = tΓ(I + tΓ)⁻¹`.
pub fn resolvent_q(k: &Kernel, t: f64) -> Result<Matrix> {
    let n = k.dim();
    let inv = matcore::inverse(&(&Matrix::identity(n) + &k.m.scale(t)))?;
    Ok(&Matrix::identity(n) - &inv)
}

/// Default `t` grid for [`resolvent_series_certificate`]: 25 geometric
/// points on `[1e-2, 1e6] / max|Γ|`.
pub fn default_t_grid(k: &Kernel) -> Vec<f64> {
    let s = k.m.max_abs().max(f64::MIN_POSITIVE);
    (0..25).map(|i| 1e-2 * 10f64.powf(i as f64 / 3.0) / s).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventCertificate {
    pub t_grid: Vec<f64>,
    /// Most negative coefficient at each `t`.
    pub min_per_t: Vec<f64>,
    /// Certificate at the `t` with the most negative coefficient relative to
    /// its tolerance (the first `t` when all are nonnegative).
    pub worst: SeriesCertificate,
    pub worst_t: f64,
    pub verdict: SeriesVerdict,
    /// Nonnegative verdict although some coefficient is negative beyond
    /// rounding (below `−1e-6·tol`) without clearing the tolerance. Kernels
    /// near the boundary of the M-matrix class land here.
    pub indeterminate: bool,
}

/// Series certificate for the Laplace transform itself: substituting
/// `α = t(I − S)` gives `det(I + αΓ) = det(I + tΓ)·det(I − S·Q_t)`, so
/// `det(I + αΓ)^(−β)` is infinitely divisible exactly when the expansion
/// of `−log det(I − S·Q_t)` in `s` has nonnegative coefficients for every
/// `t`. The expansion is checked on a grid of `t`.
pub fn resolvent_series_certificate(k: &Kernel, max_degree: usize, t_grid: &[f64]) -> Result<ResolventCertificate> {
    let mut certs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let q = resolvent_q(k, t)?;
        certs.push(certificate(&q, max_degree)?);
    }
    let min_per_t: Vec<f64> = certs.iter().map(|c| c.min_coefficient).collect();
    let worst_idx = certs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.min_coefficient / a.1.tol).total_cmp(&(b.1.min_coefficient / b.1.tol)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let verdict = certs
        .iter()
        .find_map(|c| match &c.verdict {
            SeriesVerdict::NegativeAt(e) => Some(SeriesVerdict::NegativeAt(e.clone())),
            _ => None,
        })
        .unwrap_or(SeriesVerdict::Nonneg);
    let indeterminate =
        verdict == SeriesVerdict::Nonneg && certs.iter().any(|c| c.min_coefficient < -1e-6 * c.tol);
    let worst = certs.swap_remove(worst_idx);
    Ok(ResolventCertificate { t_grid: t_grid.to_vec(), min_per_t, worst, worst_t: t_grid[worst_idx], verdict, indeterminate })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CertificateVerdict {
    CertifiedAllBeta { class2: Class2Witness, series: Option<ResolventCertificate> },
    NotCertified { reason: String, series: Option<ResolventCertificate> },
}

impl CertificateVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, CertificateVerdict::CertifiedAllBeta { .. })
    }
}

/// Class-2 witness plus the series view on the sign-normalized kernel; both
/// must agree for a certificate. The series is skipped above n = 4 or when
/// `max_degree` is 0.
pub fn certify_all_beta(k: &Kernel, max_degree: usize) -> Result<CertificateVerdict> {
    let class2 = classify::is_class2(k)?;
    let want_series = max_degree > 0 && k.dim() <= MAX_SERIES_DIM;
    match class2 {
        Some(w) => {
            let sig = Diagonal(w.scaling.0.iter().map(|x| x.signum()).collect());
            let normalized = Kernel { m: matcore::diag_conjugate(&sig, &k.m)?, tol: k.tol };
            let series = if want_series {
                let grid = default_t_grid(&normalized);
                Some(resolvent_series_certificate(&normalized, max_degree, &grid)?)
            } else {
                None
            };
            match &series {
                Some(s) if s.verdict != SeriesVerdict::Nonneg => {
                    Ok(CertificateVerdict::NotCertified { reason: "SeriesNegative".into(), series })
                }
                _ => Ok(CertificateVerdict::CertifiedAllBeta { class2: w, series }),
            }
        }
        None => {
            let series = if want_series {
                Some(resolvent_series_certificate(k, max_degree, &default_t_grid(k))?)
            } else {
                None
            };
            Ok(CertificateVerdict::NotCertified { reason: "InverseNotM".into(), series })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionSpec {
    /// Pinned index → value `u ≥ 0`.
    pub fixed: BTreeMap<usize, f64>,
    pub remaining: Vec<usize>,
}

impl ReductionSpec {
    pub fn pin(n: usize, pins: &[(usize, f64)]) -> Result<Self> {
        let mut fixed = BTreeMap::new();
        for &(i, u) in pins {
            if i >= n {
                return Err(Error::PreconditionViolated(format!("pin index {i} out of range")));
            }
            if !(u >= 0.0) {
                return Err(Error::PreconditionViolated(format!("pin value {u} is negative")));
            }
            fixed.insert(i, u);
        }
        let remaining = (0..n).filter(|i| !fixed.contains_key(i)).collect();
        Ok(Self { fixed, remaining })
    }
}

/// Eliminates pinned indices, last index first. Pinning index `p` at `u`
/// maps `Γ(i,j)` to `Γ(i,j) − u·Γ(i,p)Γ(p,j)/(1 + u·Γ(p,p))` on the
/// remaining indices; the reduced matrix is the kernel of the conditioned
/// Laplace transform.
pub fn reduce_kernel(k: &Kernel, spec: &ReductionSpec) -> Result<Kernel> {
    let n = k.dim();
    let covered = spec.fixed.len() + spec.remaining.len() == n
        && spec.remaining.iter().all(|i| *i < n && !spec.fixed.contains_key(i));
    if !covered {
        return Err(Error::PreconditionViolated("pins and remaining indices must partition 0..n".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut m = k.m.clone();
    for (&p, &u) in spec.fixed.iter().rev() {
        let pos = idx.iter().position(|&i| i == p).expect("pin present");
        let denom = 1.0 + u * m[(pos, pos)];
        if denom == 0.0 {
            return Err(Error::ZeroDenominator("1 + u Γ(p,p)"));
        }
        let keep: Vec<usize> = (0..idx.len()).filter(|&i| i != pos).collect();
        let next = Matrix::from_fn(keep.len(), |a, b| {
            let (i, j) = (keep[a], keep[b]);
            m[(i, j)] - u * m[(i, pos)] * m[(pos, j)] / denom
        });
        idx.remove(pos);
        m = next;
    }
    Ok(Kernel { m, tol: k.tol })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinScan {
    pub pin: usize,
    /// The two roots `v` where each factor of the reduced pair product vanishes.
    pub roots: (f64, f64),
    pub min_value: f64,
    pub argmin_v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReductionVerdict {
    /// All six inequalities `Γ(i,j) ≥ Γ(i,p)Γ(p,j)` hold.
    Inequalities,
    /// The cyclic products agree.
    CycleEquality,
    /// The reduced pair product goes negative at `v` when pinning `pin`.
    Violation { pin: usize, v: f64, value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub verdict: ReductionVerdict,
    pub scans: Vec<PinScan>,
}

/// For each pinned index `p` of a nonnegative 3x3 kernel (scaled to unit
/// diagonal), scans `(Γ(i,j) − vΓ(i,p)Γ(p,j))(Γ(j,i) − vΓ(j,p)Γ(p,i))` over
/// `v ∈ (0,1)`. A negative value contradicts kernel-hood.
pub fn reduction_sign_test(k: &Kernel) -> Result<ReductionReport> {
    if k.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: k.dim() });
    }
    let m0 = &k.m;
    let t = k.tol.scaled(m0, 1);
    for i in 0..3 {
        if m0[(i, i)] <= 0.0 {
            return Err(Error::PreconditionViolated(format!("diagonal entry {} is not positive", i + 1)));
        }
        for j in 0..3 {
            if i != j && m0[(i, j)] < -t {
                return Err(Error::PreconditionViolated("an off-diagonal entry is negative".into()));
            }
            if i != j && m0[(i, j)].abs() <= t {
                return Err(Error::PreconditionViolated("an off-diagonal entry is zero".into()));
            }
        }
    }
    // G^{-1/2} Γ G^{-1/2} keeps the sign pattern and the pair and cycle structure
    let g: Vec<f64> = (0..3).map(|i| m0[(i, i)].sqrt()).collect();
    let m = Matrix::from_fn(3, |i, j| m0[(i, j)] / (g[i] * g[j]));
    let kk = Kernel { m: m.clone(), tol: k.tol };
    let tol2 = k.tol.scaled(&m, 2);

    let mut scans = Vec::new();
    let mut all_ineq = true;
    let mut violation: Option<(usize, f64, f64)> = None;
    for p in (0..3).rev() {
        let (i, j) = match p {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (x1, y1) = (m[(i, j)], m[(i, p)] * m[(p, j)]);
        let (x2, y2) = (m[(j, i)], m[(j, p)] * m[(p, i)]);
        all_ineq &= x1 >= y1 - tol2 && x2 >= y2 - tol2;
        let f = |v: f64| (x1 - v * y1) * (x2 - v * y2);
        let r1 = x1 / y1;
        let r2 = x2 / y2;
        let mut candidates: Vec<f64> = (1..200).map(|s| s as f64 / 200.0).collect();
        let (lo, hi) = (r1.min(r2), r1.max(r2).min(1.0));
        if lo < 1.0 && hi > lo {
            candidates.push(0.5 * (lo + hi));
        }
        let (argmin_v, min_value) = candidates
            .into_iter()
            .map(|v| (v, f(v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty grid");
        if min_value < -tol2 && violation.is_none() {
            violation = Some((p, argmin_v, min_value));
        }
        scans.push(PinScan { pin: p, roots: (r1, r2), min_value, argmin_v });
    }
    let (x, y) = kernelcheck::cycle_condition(&kk)?;
    let verdict = if all_ineq {
        ReductionVerdict::Inequalities
    } else if (x - y).abs() <= kk.tol.scaled(&m, 3) {
        ReductionVerdict::CycleEquality
    } else if let Some((pin, v, value)) = violation {
        ReductionVerdict::Violation { pin, v, value }
    } else {
        // unequal cycles with a failed inequality always give a sign change;
        // only rounding at the tolerance boundary lands here
        ReductionVerdict::CycleEquality
    };
    Ok(ReductionReport { verdict, scans })
}
