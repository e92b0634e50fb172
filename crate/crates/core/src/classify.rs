//! Class membership of kernels.
//!
//! Class 1: diagonally equivalent to a symmetric positive semi-definite
//! matrix. Class 2: the inverse is diagonally equivalent to an M-matrix.
//! Every 3x3 kernel lies in at least one of the two, so at n = 3 a matrix in
//! neither class is rejected outright.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcheck::{self, EquivalenceKind, Kernel};
use crate::matcore::{self, Diagonal, Matrix};

const PSD_TOL: f64 = 1e-9;
const SIGNATURE_SEARCH_MAX: usize = 8;

/// True iff all eigenvalues of the symmetric matrix are `>= -tol`.
pub fn is_psd(m: &Matrix) -> Result<bool> {
    let (vals, _) = matcore::symmetric_eigen(m)?;
    let tol = PSD_TOL * m.max_abs().max(1.0);
    Ok(vals.iter().all(|&v| v >= -tol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Class1Witness {
    /// `D` with `D Γ D⁻¹ = target`, or `None` when the equivalence is only
    /// effective (same `det(I + αΓ)` for all diagonal α).
    pub scaling: Option<Diagonal>,
    pub target: Matrix,
}

pub fn is_class1(k: &Kernel) -> Option<Class1Witness> {
    if k.dim() != 3 {
        // only the already-symmetric case is decided away from n = 3
        if k.m.is_symmetric(k.tol.rel) && is_psd(&k.m).ok()? {
            return Some(Class1Witness { scaling: Some(Diagonal::identity(k.dim())), target: k.m.clone() });
        }
        return None;
    }
    let (norm, sig) = kernelcheck::sign_normalize(k).unwrap_or_else(|_| (k.clone(), Diagonal::identity(3)));
    let w = kernelcheck::diag_equiv_symmetric(&norm).ok()?;
    let target = w.target?;
    if w.kind == EquivalenceKind::NotEquivalent || !is_psd(&target).ok()? {
        return None;
    }
    let scaling = match w.kind {
        EquivalenceKind::Symmetric => w.scaling.map(|d| d.compose(&sig)),
        _ => None,
    };
    Some(Class1Witness { scaling, target })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MClause {
    PositiveOffDiagonal(usize, usize),
    Singular,
    InverseNegative(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MMatrixDiagnosis {
    pub is_mmatrix: bool,
    pub failed: Option<MClause>,
}

/// Nonpositive off-diagonals, invertible, entrywise nonnegative inverse.
pub fn is_mmatrix(b: &Matrix) -> MMatrixDiagnosis {
    let n = b.dim();
    let tol = PSD_TOL * b.max_abs().max(1.0);
    let fail = |c| MMatrixDiagnosis { is_mmatrix: false, failed: Some(c) };
    for i in 0..n {
        for j in 0..n {
            if i != j && b[(i, j)] > tol {
                return fail(MClause::PositiveOffDiagonal(i, j));
            }
        }
    }
    let inv = match matcore::inverse(b) {
        Ok(inv) => inv,
        Err(_) => return fail(MClause::Singular),
    };
    let itol = PSD_TOL * inv.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if inv[(i, j)] < -itol {
                return fail(MClause::InverseNegative(i, j));
            }
        }
    }
    MMatrixDiagnosis { is_mmatrix: true, failed: None }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Class2Witness {
    /// `S` (a signature, possibly composed with a positive balancing
    /// diagonal) such that `S Γ⁻¹ S⁻¹` is an M-matrix.
    pub scaling: Diagonal,
    pub mmatrix: Matrix,
}

fn signatures(n: usize) -> impl Iterator<Item = Diagonal> {
    // the first sign is fixed: S and −S give the same conjugate
    (0..1u32 << (n - 1)).map(move |mask| {
        Diagonal((0..n).map(|i| if i > 0 && mask & (1 << (i - 1)) != 0 { -1.0 } else { 1.0 }).collect())
    })
}

pub fn is_class2(k: &Kernel) -> Result<Option<Class2Witness>> {
    let b = matcore::inverse(&k.m)?;
    let n = k.dim();
    if n > SIGNATURE_SEARCH_MAX {
        return Ok(is_mmatrix(&b).is_mmatrix.then(|| Class2Witness { scaling: Diagonal::identity(n), mmatrix: b }));
    }
    for s in signatures(n) {
        let sbs = matcore::diag_conjugate(&s, &b)?;
        if !is_mmatrix(&sbs).is_mmatrix {
            continue;
        }
        let mut scaling = s.clone();
        if n == 3 {
            let sgs = Kernel::candidate(matcore::diag_conjugate(&s, &k.m)?);
            if let Ok((_, d)) = kernelcheck::balance(&sgs) {
                scaling = d.compose(&s);
            }
        }
        let mmatrix = matcore::diag_conjugate(&scaling, &b)?;
        if is_mmatrix(&mmatrix).is_mmatrix {
            return Ok(Some(Class2Witness { scaling, mmatrix }));
        }
        return Ok(Some(Class2Witness { scaling: s, mmatrix: sbs }));
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Class1,
    Class2,
    Both,
    NotKernel,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

impl Note {
    fn new(name: impl Into<String>, value: f64, passed: bool) -> Self {
        Self { name: name.into(), value, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub class1_witness: Option<Class1Witness>,
    pub class2_witness: Option<Class2Witness>,
    pub failure: Option<String>,
    pub notes: Vec<Note>,
    /// Admissible β: every β > 0 for class 2; only β ∈ {k/2} is certified
    /// for class-1-only kernels.
    pub admissible_beta: Option<String>,
}

fn necessary_notes(r: &kernelcheck::NecessaryReport) -> Vec<Note> {
    let mut notes = Vec::new();
    for (i, &p) in r.diag_nonneg.iter().enumerate() {
        notes.push(Note::new(format!("diag_nonneg({})", i + 1), f64::NAN, p));
    }
    for p in &r.pair_products_nonneg {
        notes.push(Note::new(format!("pair_product({},{})", p.i + 1, p.j + 1), p.value, p.passed));
    }
    for p in &r.minors2_nonneg {
        notes.push(Note::new(format!("minor2({},{})", p.i + 1, p.j + 1), p.value, p.passed));
    }
    notes.push(Note::new("det", r.det, r.det_nonneg));
    notes.push(Note::new("real_eigs_positive", f64::NAN, r.real_eigs_positive));
    notes
}

fn beta_note(verdict: Verdict) -> Option<String> {
    match verdict {
        Verdict::Class2 | Verdict::Both => Some("all beta > 0".into()),
        Verdict::Class1 => Some("beta in {k/2 : k >= 1}".into()),
        _ => None,
    }
}

/// The two-class decision for a 3x3 candidate.
pub fn classify3(k: &Kernel) -> Result<ClassificationReport> {
    if k.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: k.dim() });
    }
    let nec = kernelcheck::check_necessary(k);
    let mut notes = necessary_notes(&nec);
    if let Some((name, _)) = nec.first_failure() {
        return Ok(ClassificationReport {
            verdict: Verdict::NotKernel,
            class1_witness: None,
            class2_witness: None,
            failure: Some(name),
            notes,
            admissible_beta: None,
        });
    }
    let normalizable = kernelcheck::sign_normalize(k).is_ok();
    notes.push(Note::new("sign_normalizable", f64::NAN, normalizable));
    let (x, y) = kernelcheck::cycle_condition(k)?;
    let cycle_ok = (x - y).abs() <= k.tol.scaled(&k.m, 3);
    notes.push(Note::new("cycle_difference", x - y, cycle_ok));
    let c1 = is_class1(k);
    let c2 = match is_class2(k) {
        Ok(w) => w,
        Err(Error::Singular { .. }) => {
            notes.push(Note::new("invertible", matcore::det(&k.m), false));
            None
        }
        Err(e) => return Err(e),
    };
    notes.push(Note::new("class1", f64::NAN, c1.is_some()));
    notes.push(Note::new("class2", f64::NAN, c2.is_some()));
    let verdict = match (&c1, &c2) {
        (Some(_), Some(_)) => Verdict::Both,
        (Some(_), None) => Verdict::Class1,
        (None, Some(_)) => Verdict::Class2,
        (None, None) if !normalizable && !cycle_ok => Verdict::Undetermined,
        (None, None) => Verdict::NotKernel,
    };
    let failure = (verdict == Verdict::NotKernel).then(|| {
        if !cycle_ok {
            "CycleConditionFails+InverseNotM".to_string()
        } else {
            "TargetNotPSD+InverseNotM".to_string()
        }
    });
    Ok(ClassificationReport {
        verdict,
        class1_witness: c1,
        class2_witness: c2,
        failure,
        notes,
        admissible_beta: beta_note(verdict),
    })
}

/// Class flags at any dimension. NotKernel is only issued at n = 3.
pub fn classify(k: &Kernel) -> Result<ClassificationReport> {
    if k.dim() == 3 {
        return classify3(k);
    }
    let nec = kernelcheck::check_necessary(k);
    let mut notes = necessary_notes(&nec);
    let c1 = is_class1(k);
    let c2 = is_class2(k).unwrap_or(None);
    notes.push(Note::new("class1", f64::NAN, c1.is_some()));
    notes.push(Note::new("class2", f64::NAN, c2.is_some()));
    let verdict = match (&c1, &c2) {
        (Some(_), Some(_)) => Verdict::Both,
        (Some(_), None) => Verdict::Class1,
        (None, Some(_)) => Verdict::Class2,
        (None, None) => Verdict::Undetermined,
    };
    Ok(ClassificationReport {
        verdict,
        class1_witness: c1,
        class2_witness: c2,
        failure: nec.first_failure().map(|(n, _)| n),
        notes,
        admissible_beta: beta_note(verdict),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub pairwise_independent: bool,
    pub product_form: bool,
    pub c_coefficient: f64,
    pub fully_independent: bool,
    /// Largest misfit of the multi-affine interpolant on the `{0,1,2}^n` grid
    /// (`None` above n = 4, where coefficients come from principal minors).
    pub fit_residual: Option<f64>,
}

/// Coefficients of the multi-affine polynomial `det(I + diag(α)Γ)`, indexed
/// by subset bitmask, recovered by Möbius inversion of its values on the
/// corners of the unit cube.
fn multi_affine_coefficients(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    let eval = |mask: u32| {
        let alpha = Diagonal((0..n).map(|i| if mask & (1 << i) != 0 { 1.0 } else { 0.0 }).collect());
        let am = matcore::row_scale(&alpha, m).expect("0/1 scaling is nonnegative");
        matcore::det(&(&Matrix::identity(n) + &am))
    };
    let mut coef: Vec<f64> = (0..1u32 << n).map(eval).collect();
    for i in 0..n {
        for mask in 0..1usize << n {
            if mask & (1 << i) != 0 {
                coef[mask] -= coef[mask ^ (1 << i)];
            }
        }
    }
    coef
}

pub fn independence_report(k: &Kernel) -> IndependenceReport {
    let m = &k.m;
    let n = m.dim();
    let t2 = k.tol.scaled(m, 2);
    let pairwise_independent = (0..n).all(|i| (0..n).all(|j| i == j || (m[(i, j)] * m[(j, i)]).abs() <= t2));
    let full = (1usize << n) - 1;
    let (coef, fit_residual) = if n <= 4 {
        let coef = multi_affine_coefficients(m);
        let mut worst = 0.0f64;
        for idx in 0..3usize.pow(n as u32) {
            let alpha: Vec<f64> = (0..n).map(|i| ((idx / 3usize.pow(i as u32)) % 3) as f64).collect();
            let direct = matcore::det(&(&Matrix::identity(n) + &matcore::row_scale(&Diagonal(alpha.clone()), m).unwrap()));
            let fit: f64 = coef
                .iter()
                .enumerate()
                .map(|(mask, c)| c * (0..n).filter(|i| mask & (1 << i) != 0).map(|i| alpha[i]).product::<f64>())
                .sum();
            worst = worst.max((fit - direct).abs() / direct.abs().max(1.0));
        }
        (coef, Some(worst))
    } else {
        let coef = (0..=full)
            .map(|mask| {
                let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                if idx.is_empty() { 1.0 } else { matcore::det(&m.principal(&idx)) }
            })
            .collect();
        (coef, None)
    };
    let diag_product = |mask: usize| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| m[(i, i)]).product::<f64>();
    let tol = k.tol.scaled(m, n as i32);
    let shape_ok = fit_residual.is_none_or(|r| r <= 1e-8);
    let product_form = shape_ok && (0..full).all(|mask| (coef[mask] - diag_product(mask)).abs() <= tol);
    let c_coefficient = coef[full] - diag_product(full);
    let fully_independent = pairwise_independent && product_form && c_coefficient.abs() <= tol;
    IndependenceReport { pairwise_independent, product_form, c_coefficient, fully_independent, fit_residual }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// The symmetric singular matrix with `a = sin x`, `Γ(1,3) = cos y` and
/// `Γ(2,3) = sin(x ± y)`.
pub fn singular_family(x: f64, y: f64, branch: Branch) -> Result<Matrix> {
    let a = x.sin();
    let c = y.cos();
    let b = match branch {
        Branch::Plus => (x + y).sin(),
        Branch::Minus => (x - y).sin(),
    };
    if a < -1e-12 || b < -1e-12 || c < -1e-12 {
        return Err(Error::SignConstraint("sin x, cos y and sin(x ± y) must be nonnegative"));
    }
    Matrix::from_rows(&[[1.0, a, c], [a, 1.0, b], [c, b, 1.0]])
}

/// `[[1,a,a],[a,1,1],[a,1,1]]`, singular with a singular M-matrix adjugate.
pub fn singular_a_family(a: f64) -> Matrix {
    Matrix::from_rows(&[[1.0, a, a], [a, 1.0, 1.0], [a, 1.0, 1.0]]).expect("finite entries")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(rows: [[f64; 3]; 3]) -> Kernel {
        Kernel::from_rows(&rows).unwrap()
    }

    fn g_sym() -> Kernel {
        k([[1.0, 0.5, 0.2], [0.5, 1.0, 0.4], [0.2, 0.4, 1.0]])
    }

    fn g_bad() -> Kernel {
        k([[1.0, 0.9, 0.1], [0.1, 1.0, 0.9], [0.9, 0.1, 1.0]])
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&Matrix::identity(3)).unwrap());
        assert!(!is_psd(&Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap()).unwrap());
        let s = singular_family(0.3, 0.4, Branch::Plus).unwrap();
        assert!(is_psd(&s).unwrap());
        let (vals, _) = matcore::symmetric_eigen(&s).unwrap();
        assert!(vals[2].abs() < 1e-12);
        assert_eq!(is_psd(&Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap()), Err(Error::NotSymmetric));
    }

    #[test]
    fn class1_examples() {
        let w = is_class1(&Kernel::candidate(Matrix::identity(3))).unwrap();
        assert_eq!(w.target, Matrix::identity(3));
        assert_eq!(w.scaling.unwrap(), Diagonal::identity(3));

        let g = k([[1.0, 2.0, 2.0], [0.5, 1.0, 1.0], [0.5, 1.0, 1.0]]);
        let w = is_class1(&g).unwrap();
        assert!(w.target.max_diff(&k([[1.0; 3]; 3]).m) < 1e-15);
        let (vals, _) = matcore::symmetric_eigen(&w.target).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12 && vals[1].abs() < 1e-12 && vals[2].abs() < 1e-12);
        let conj = matcore::diag_conjugate(w.scaling.as_ref().unwrap(), &g.m).unwrap();
        assert!(conj.max_diff(&w.target) < 1e-14);

        assert!(is_class1(&g_bad()).is_none());
    }

    #[test]
    fn class1_through_signature() {
        let g = k([[1.0, -0.5, -0.2], [-0.5, 1.0, 0.4], [-0.2, 0.4, 1.0]]);
        let w = is_class1(&g).unwrap();
        let conj = matcore::diag_conjugate(w.scaling.as_ref().unwrap(), &g.m).unwrap();
        assert!(conj.max_diff(&w.target) < 1e-14);
    }

    #[test]
    fn mmatrix_examples() {
        assert!(is_mmatrix(&Matrix::from_rows(&[[2.0, -1.0], [-1.0, 2.0]]).unwrap()).is_mmatrix);
        assert!(is_mmatrix(&Matrix::identity(3)).is_mmatrix);
        let d = is_mmatrix(&Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap());
        assert_eq!(d.failed, Some(MClause::PositiveOffDiagonal(0, 1)));
        let d = is_mmatrix(&Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap());
        assert_eq!(d.failed, Some(MClause::Singular));
        let d = is_mmatrix(&Matrix::from_rows(&[[1.0, -2.0], [-2.0, 1.0]]).unwrap());
        assert!(matches!(d.failed, Some(MClause::InverseNegative(..))));
    }

    #[test]
    fn class2_examples() {
        let w = is_class2(&Kernel::candidate(Matrix::identity(3))).unwrap().unwrap();
        assert_eq!(w.mmatrix, Matrix::identity(3));

        let g = g_sym();
        let w = is_class2(&g).unwrap().unwrap();
        assert!(is_mmatrix(&w.mmatrix).is_mmatrix);
        // cofactors: off-diagonals of adj(Γ) are (-0.42, 0, -0.3)
        let adj = matcore::adjugate(&g.m);
        assert!((adj[(0, 1)] + 0.42).abs() < 1e-15);
        assert!(adj[(0, 2)].abs() < 1e-15);
        assert!((adj[(1, 2)] + 0.3).abs() < 1e-15);
        assert!((matcore::det(&g.m) - 0.63).abs() < 1e-15);

        assert!(is_class2(&g_bad()).unwrap().is_none());
        let singular = k([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(is_class2(&singular), Err(Error::Singular { .. })));
    }

    #[test]
    fn class2_witness_with_signature() {
        let s = Diagonal(vec![1.0, -1.0, 1.0]);
        let g = Kernel::candidate(matcore::diag_conjugate(&s, &g_sym().m).unwrap());
        let w = is_class2(&g).unwrap().unwrap();
        assert!(is_mmatrix(&w.mmatrix).is_mmatrix);
        let b = matcore::inverse(&g.m).unwrap();
        assert!(matcore::diag_conjugate(&w.scaling, &b).unwrap().max_diff(&w.mmatrix) < 1e-14);
    }

    #[test]
    fn classify3_examples() {
        assert_eq!(classify3(&Kernel::candidate(Matrix::identity(3))).unwrap().verdict, Verdict::Both);
        let r = classify3(&g_sym()).unwrap();
        assert_eq!(r.verdict, Verdict::Both);
        assert_eq!(r.admissible_beta.as_deref(), Some("all beta > 0"));
        let r = classify3(&g_bad()).unwrap();
        assert_eq!(r.verdict, Verdict::NotKernel);
        assert!(r.failure.is_some());
        assert!(matches!(
            classify3(&Kernel::candidate(Matrix::identity(2))),
            Err(Error::WrongDimension { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn classify3_class1_only() {
        // symmetric PSD with a positive inverse off-diagonal
        let g = k([[1.0, 0.9, 0.1], [0.9, 1.0, 0.5], [0.1, 0.5, 1.0]]);
        assert!(is_psd(&g.m).unwrap());
        let r = classify3(&g).unwrap();
        assert_eq!(r.verdict, Verdict::Class1);
        assert_eq!(r.admissible_beta.as_deref(), Some("beta in {k/2 : k >= 1}"));
    }

    #[test]
    fn classify3_necessary_failure() {
        let r = classify3(&k([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])).unwrap();
        assert_eq!(r.verdict, Verdict::NotKernel);
        assert_eq!(r.failure.as_deref(), Some("MinorNegative(1,2)"));
    }

    #[test]
    fn classify_other_dimensions() {
        let r = classify(&Kernel::candidate(Matrix::identity(4))).unwrap();
        assert_eq!(r.verdict, Verdict::Both);
        let bad = Kernel::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        let r = classify(&bad).unwrap();
        assert_eq!(r.verdict, Verdict::Undetermined);
        assert_eq!(r.failure.as_deref(), Some("MinorNegative(1,2)"));
    }

    #[test]
    fn independence_examples() {
        let d = k([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]]);
        let r = independence_report(&d);
        assert!(r.pairwise_independent && r.product_form && r.fully_independent);
        assert_eq!(r.c_coefficient, 0.0);

        let (a, b, c) = (1.0, 0.5, 1.0);
        let w = k([[1.0, 0.0, a], [b, 1.0, 0.0], [0.0, c, 1.0]]);
        let r = independence_report(&w);
        assert!(r.pairwise_independent && r.product_form);
        assert!((r.c_coefficient - 0.5).abs() < 1e-14);
        assert!(!r.fully_independent);
        assert!(r.fit_residual.unwrap() <= 1e-8);
        assert_eq!(classify3(&w).unwrap().verdict, Verdict::NotKernel);

        let w0 = k([[1.0, 0.0, 0.7], [0.0, 1.0, 0.0], [0.0, 0.4, 1.0]]);
        let r = independence_report(&w0);
        assert!(r.fully_independent);
    }

    #[test]
    fn independence_rejects_correlated() {
        let r = independence_report(&g_sym());
        assert!(!r.pairwise_independent && !r.product_form && !r.fully_independent);
    }

    #[test]
    fn singular_family_examples() {
        let s = singular_family(0.0, 0.0, Branch::Plus).unwrap();
        assert_eq!(s, k([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]]).m);
        assert_eq!(matcore::det(&s), 0.0);
        let s = singular_family(std::f64::consts::FRAC_PI_2, 0.0, Branch::Plus).unwrap();
        assert!(s.max_diff(&k([[1.0; 3]; 3]).m) < 1e-15);
        assert!(matcore::det(&s).abs() < 1e-15);
        let s = singular_family(0.3, 0.4, Branch::Plus).unwrap();
        assert!(matcore::det(&s).abs() < 1e-12);
        assert!(matches!(singular_family(-0.5, 0.0, Branch::Plus), Err(Error::SignConstraint(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn singular_family_is_psd(x in 0.0f64..1.5, y in 0.0f64..1.5) {
            let s = singular_family(x, y, Branch::Plus).unwrap();
            prop_assert!(matcore::det(&s).abs() < 1e-10);
            prop_assert!(is_psd(&s).unwrap());
        }

        #[test]
        fn verdict_invariant_under_conjugation(
            v in prop::collection::vec(0.05f64..0.6, 6),
            d in prop::collection::vec(0.2f64..5.0, 3),
            flip in prop::collection::vec(prop::bool::ANY, 3),
        ) {
            let g = Matrix::from_rows(&[[1.0, v[0], v[5]], [v[1], 1.0, v[2]], [v[4], v[3], 1.0]]).unwrap();
            let dd = Diagonal(d.iter().zip(&flip).map(|(x, f)| if *f { -x } else { *x }).collect());
            let gc = matcore::diag_conjugate(&dd, &g).unwrap();
            let a = classify3(&Kernel::candidate(g)).unwrap();
            let b = classify3(&Kernel::candidate(gc)).unwrap();
            prop_assert_eq!(a.verdict, b.verdict);
        }
    }
}
