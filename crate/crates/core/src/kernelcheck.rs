//! Necessary conditions for a matrix to be a permanental kernel, plus the
//! sign, balancing and diagonal-equivalence reductions used at n = 3.
//!
//! Off-diagonal positions of a 3x3 kernel follow the layout
//!
//! ```text
//! [ 1   a1  c2 ]
//! [ a2  1   b1 ]
//! [ c1  b2  1  ]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, Diagonal, Matrix};

/// Relative tolerance context. Absolute thresholds scale with the matrix so
/// that a quantity of polynomial degree `k` in the entries is compared
/// against `rel * max(1, max|entry|)^k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Self { rel }
    }

    pub fn scaled(&self, m: &Matrix, degree: i32) -> f64 {
        self.rel * m.max_abs().max(1.0).powi(degree)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub m: Matrix,
    pub tol: Tolerance,
}

impl Kernel {
    /// A candidate kernel: no conditions enforced beyond finiteness.
    pub fn candidate(m: Matrix) -> Self {
        Self { m, tol: Tolerance::default() }
    }

    /// A kernel with nonnegative diagonal.
    pub fn validated(m: Matrix) -> Result<Self> {
        let tol = Tolerance::default();
        let t = tol.scaled(&m, 1);
        if let Some(i) = (0..m.dim()).find(|&i| m[(i, i)] < -t) {
            return Err(Error::NegativeDiagonal(i));
        }
        Ok(Self { m, tol })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Ok(Self::candidate(Matrix::from_rows(rows)?))
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    fn replace(&self, m: Matrix) -> Self {
        Self { m, tol: self.tol }
    }

    fn require3(&self) -> Result<()> {
        if self.dim() != 3 {
            return Err(Error::WrongDimension { expected: 3, got: self.dim() });
        }
        Ok(())
    }

    /// Off-diagonal entries `[a1, a2, b1, b2, c1, c2]` of a 3x3 kernel.
    pub fn named_entries(&self) -> Result<[f64; 6]> {
        self.require3()?;
        let m = &self.m;
        Ok([m[(0, 1)], m[(1, 0)], m[(1, 2)], m[(2, 1)], m[(2, 0)], m[(0, 2)]])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub diag_nonneg: Vec<bool>,
    pub pair_products_nonneg: Vec<PairCheck>,
    pub minors2_nonneg: Vec<PairCheck>,
    pub det: f64,
    pub det_nonneg: bool,
    pub real_eigs_positive: bool,
    pub overall: bool,
}

impl NecessaryReport {
    /// Name and value of the first failing condition, if any.
    pub fn first_failure(&self) -> Option<(String, f64)> {
        if let Some(i) = self.diag_nonneg.iter().position(|p| !p) {
            return Some((format!("DiagonalNegative({})", i + 1), f64::NAN));
        }
        if let Some(p) = self.pair_products_nonneg.iter().find(|p| !p.passed) {
            return Some((format!("PairProductNegative({},{})", p.i + 1, p.j + 1), p.value));
        }
        if let Some(p) = self.minors2_nonneg.iter().find(|p| !p.passed) {
            return Some((format!("MinorNegative({},{})", p.i + 1, p.j + 1), p.value));
        }
        if !self.det_nonneg {
            return Some(("DeterminantNegative".into(), self.det));
        }
        if !self.real_eigs_positive {
            return Some(("NegativeRealEigenvalue".into(), f64::NAN));
        }
        None
    }
}

pub fn check_necessary(k: &Kernel) -> NecessaryReport {
    let m = &k.m;
    let n = m.dim();
    let t1 = k.tol.scaled(m, 1);
    let t2 = k.tol.scaled(m, 2);
    let diag_nonneg: Vec<bool> = (0..n).map(|i| m[(i, i)] >= -t1).collect();
    let mut pairs = Vec::new();
    let mut minors = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = m[(i, j)] * m[(j, i)];
            pairs.push(PairCheck { i, j, value: p, passed: p >= -t2 });
            let mi = m[(i, i)] * m[(j, j)] - p;
            minors.push(PairCheck { i, j, value: mi, passed: mi >= -t2 });
        }
    }
    let det = matcore::det(m);
    let det_nonneg = det >= -k.tol.scaled(m, n as i32);
    let real_eigs_positive = match matcore::eigenvalues(m) {
        Ok(s) => s.real_values().iter().all(|&x| x >= -t1),
        Err(_) => false,
    };
    let overall = diag_nonneg.iter().all(|&b| b)
        && pairs.iter().all(|p| p.passed)
        && minors.iter().all(|p| p.passed)
        && det_nonneg
        && real_eigs_positive;
    NecessaryReport {
        diag_nonneg,
        pair_products_nonneg: pairs,
        minors2_nonneg: minors,
        det,
        det_nonneg,
        real_eigs_positive,
        overall,
    }
}

fn signatures3() -> impl Iterator<Item = Diagonal> {
    (0..8u32).map(|mask| Diagonal((0..3).map(|i| if mask & (1 << i) != 0 { -1.0 } else { 1.0 }).collect()))
}

fn off_diagonal_all(m: &Matrix, pred: impl Fn(f64) -> bool) -> bool {
    let n = m.dim();
    (0..n).all(|i| (0..n).all(|j| i == j || pred(m[(i, j)])))
}

/// Finds a signature `S` with `S Γ S` having off-diagonals all `>= 0`, or
/// failing that all `<= 0`. Zero entries match either sign.
pub fn sign_normalize(k: &Kernel) -> Result<(Kernel, Diagonal)> {
    k.require3()?;
    let t = k.tol.scaled(&k.m, 1);
    for want_nonneg in [true, false] {
        for s in signatures3() {
            let c = matcore::diag_conjugate(&s, &k.m)?;
            let ok = if want_nonneg {
                off_diagonal_all(&c, |x| x >= -t)
            } else {
                off_diagonal_all(&c, |x| x <= t)
            };
            if ok {
                return Ok((k.replace(c), s));
            }
        }
    }
    Err(Error::NotNormalizable)
}

/// Symmetrizes the (1,2) and (1,3) pairs by a diagonal similarity; the
/// (2,3) pair keeps its product. Returns the balanced kernel and `D`.
pub fn balance(k: &Kernel) -> Result<(Kernel, Diagonal)> {
    let [a1, a2, _b1, _b2, c1, c2] = k.named_entries()?;
    let all_pos = off_diagonal_all(&k.m, |x| x > 0.0);
    let all_neg = off_diagonal_all(&k.m, |x| x < 0.0);
    if !all_pos && !all_neg {
        return Err(Error::MixedSigns);
    }
    let d = Diagonal(vec![1.0, (a1 / a2).sqrt(), (c2 / c1).sqrt()]);
    let e = matcore::diag_conjugate(&d, &k.m)?;
    Ok((k.replace(e), d))
}

/// The two cyclic products `(a1 b1 c1, a2 b2 c2)`.
pub fn cycle_condition(k: &Kernel) -> Result<(f64, f64)> {
    let [a1, a2, b1, b2, c1, c2] = k.named_entries()?;
    Ok((a1 * b1 * c1, a2 * b2 * c2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquivalenceKind {
    Symmetric,
    EffectivelySymmetric,
    NotEquivalent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    pub kind: EquivalenceKind,
    pub scaling: Option<Diagonal>,
    pub target: Option<Matrix>,
    /// Pairs with exactly one zero entry; their target entries are zero and
    /// no diagonal similarity can symmetrize them.
    pub half_zero_pairs: Vec<(usize, usize)>,
}

impl EquivalenceWitness {
    fn not_equivalent() -> Self {
        Self { kind: EquivalenceKind::NotEquivalent, scaling: None, target: None, half_zero_pairs: vec![] }
    }
}

pub fn diag_equiv_symmetric(k: &Kernel) -> Result<EquivalenceWitness> {
    k.require3()?;
    let m = &k.m;
    let t1 = k.tol.scaled(m, 1);
    let t2 = k.tol.scaled(m, 2);
    let pairs = [(0, 1), (1, 2), (0, 2)];
    if pairs.iter().any(|&(i, j)| m[(i, j)] * m[(j, i)] < -t2) {
        return Ok(EquivalenceWitness::not_equivalent());
    }
    let (x, y) = cycle_condition(k)?;
    if (x - y).abs() > k.tol.scaled(m, 3) {
        return Ok(EquivalenceWitness::not_equivalent());
    }
    let zero = |v: f64| v.abs() <= t1;
    // sign convention follows the entries above the cycle: (1,2), (2,3), (3,1)
    let sign_of = |i: usize, j: usize| {
        let (p, q) = if (i, j) == (0, 2) { (m[(2, 0)], m[(0, 2)]) } else { (m[(i, j)], m[(j, i)]) };
        let s = if !zero(p) { p } else { q };
        if s < 0.0 { -1.0 } else { 1.0 }
    };
    let mut target = m.clone();
    let mut half_zero = Vec::new();
    for &(i, j) in &pairs {
        let (p, q) = (m[(i, j)], m[(j, i)]);
        if zero(p) != zero(q) {
            half_zero.push((i, j));
        }
        let v = if zero(p) || zero(q) { 0.0 } else { sign_of(i, j) * (p * q).sqrt() };
        target[(i, j)] = v;
        target[(j, i)] = v;
    }
    if !half_zero.is_empty() {
        return Ok(EquivalenceWitness {
            kind: EquivalenceKind::EffectivelySymmetric,
            scaling: None,
            target: Some(target),
            half_zero_pairs: half_zero,
        });
    }
    // propagate d along nonzero pairs from d_1 = 1; (d_i/d_j)^2 = Γ(j,i)/Γ(i,j)
    let mut d: [Option<f64>; 3] = [Some(1.0), None, None];
    for _ in 0..3 {
        for &(i, j) in &pairs {
            let (p, q) = (m[(i, j)], m[(j, i)]);
            if zero(p) {
                continue;
            }
            match (d[i], d[j]) {
                (Some(di), None) => d[j] = Some(di * (p / q).sqrt()),
                (None, Some(dj)) => d[i] = Some(dj * (q / p).sqrt()),
                _ => {}
            }
        }
    }
    let scaling = Diagonal(d.iter().map(|x| x.unwrap_or(1.0)).collect());
    Ok(EquivalenceWitness {
        kind: EquivalenceKind::Symmetric,
        scaling: Some(scaling),
        target: Some(target),
        half_zero_pairs: vec![],
    })
}

/// The matrix with the same diagonal and off-diagonals `sqrt(Γ(i,j)Γ(j,i))`.
pub fn symmetrize(k: &Kernel) -> Result<Matrix> {
    let m = &k.m;
    let n = m.dim();
    let t2 = k.tol.scaled(m, 2);
    let mut out = m.clone();
    for i in 0..n {
        for j in i + 1..n {
            let p = m[(i, j)] * m[(j, i)];
            if p < -t2 {
                return Err(Error::NegativePairProduct(i, j));
            }
            let v = p.max(0.0).sqrt();
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronTestResult {
    pub passed: bool,
    pub trials: usize,
    pub counterexample: Option<Diagonal>,
}

/// True when some eigenvalue of maximal modulus of `U Γ` is real and
/// positive (or the spectrum is zero).
pub fn has_positive_perron_root(m: &Matrix) -> Result<bool> {
    let s = matcore::eigenvalues(m)?;
    let rho = s.spectral_radius();
    if rho <= 1e-14 * m.max_abs().max(1.0) {
        return Ok(true);
    }
    let cut = rho * (1.0 - 1e-9);
    Ok(s.eigenvalues.iter().any(|z| z.norm() >= cut && matcore::is_real(*z) && z.re > 0.0))
}

fn random_scaling(rng: &mut ChaCha8Rng, n: usize, draw: usize) -> Diagonal {
    Diagonal(
        (0..n)
            .map(|_| match draw % 3 {
                0 => rng.random::<f64>(),
                1 => 10.0 * rng.random::<f64>(),
                _ => {
                    if rng.random::<f64>() < 0.3 {
                        0.0
                    } else {
                        rng.random::<f64>()
                    }
                }
            })
            .collect(),
    )
}

/// Checks that every nonnegative row scaling `U Γ` has a positive eigenvalue
/// of maximal modulus, over `planted` diagonals followed by `trials` random
/// ones. Returns the first counterexample.
pub fn row_scaled_perron_test_with(k: &Kernel, trials: usize, seed: u64, planted: &[Diagonal]) -> PerronTestResult {
    let n = k.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = 0;
    let randoms = (0..trials).map(|t| random_scaling(&mut rng, n, t));
    for u in planted.iter().cloned().chain(randoms) {
        run += 1;
        let ok = matcore::row_scale(&u, &k.m)
            .and_then(|um| has_positive_perron_root(&um))
            .unwrap_or(false);
        if !ok {
            return PerronTestResult { passed: false, trials: run, counterexample: Some(u) };
        }
    }
    PerronTestResult { passed: true, trials: run, counterexample: None }
}

/// Random row-scaling test with the dichotomy scaling of the spectra module
/// planted as the first trial when it applies.
pub fn row_scaled_perron_test(k: &Kernel, trials: usize, seed: u64) -> PerronTestResult {
    let planted: Vec<Diagonal> = crate::spectra::planted_row_scalings(k);
    row_scaled_perron_test_with(k, trials, seed, &planted)
}
