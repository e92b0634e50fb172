//! Small dense real matrices and the spectral primitives used by every
//! other module.
//!
//! Matrices are row-major, at most [`MAX_DIM`] wide. Dimension three is the
//! hot path: determinants use cofactor expansion and eigenvalues come from
//! the closed-form cubic. Everything else goes through LU with partial
//! pivoting or a Hessenberg QR iteration.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;

/// An eigenvalue counts as real when `|Im| <= REAL_EIG_TOL * (1 + |Re|)`.
pub const REAL_EIG_TOL: f64 = 1e-8;

const QR_MAX_ITERATIONS: usize = 60;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::BadDimension { got: n, max: MAX_DIM });
        }
        if data.len() != n * n {
            return Err(Error::EntryCount { expected: n * n, got: data.len() });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(k / n, k % n));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::RaggedRow { row: i, got: row.len(), expected: n });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| 0.0)
    }

    /// Builds a matrix from an entry function. Panics on a bad dimension or a
    /// non-finite entry; use [`Matrix::new`] for untrusted input.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::new(n, data).expect("Matrix::from_fn produced an invalid matrix")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Largest absolute entrywise difference.
    pub fn max_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let tol = tol * self.max_abs().max(1.0);
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn diagonal(&self) -> Diagonal {
        Diagonal((0..self.n).map(|i| self[(i, i)]).collect())
    }

    /// The principal submatrix on `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    fn check_same(&self, other: &Matrix) {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.check_same(rhs);
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        Matrix { n, data: out }
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.check_same(rhs);
        Matrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.check_same(rhs);
        Matrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n)).finish()
    }
}

/// A diagonal matrix stored as its diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagonal(pub Vec<f64>);

impl Diagonal {
    pub fn identity(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.len(), |i, j| if i == j { self.0[i] } else { 0.0 })
    }

    /// Entrywise product, i.e. the diagonal of `self * other`.
    pub fn compose(&self, other: &Diagonal) -> Diagonal {
        Diagonal(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by real part descending, then imaginary part descending.
    pub eigenvalues: Vec<Complex64>,
    pub max_modulus_index: usize,
}

impl Spectrum {
    fn from_unsorted(mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        let max_modulus_index = eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bm), (i, z)| {
                let m = z.norm();
                if m > bm { (i, m) } else { (bi, bm) }
            })
            .0;
        Self { eigenvalues, max_modulus_index }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues[self.max_modulus_index].norm()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().filter(|z| is_real(**z)).map(|z| z.re).collect()
    }

    pub fn real_count(&self) -> usize {
        self.eigenvalues.iter().filter(|z| is_real(**z)).count()
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    pub fn product(&self) -> Complex64 {
        self.eigenvalues.iter().product()
    }
}

pub fn is_real(z: Complex64) -> bool {
    z.im.abs() <= REAL_EIG_TOL * (1.0 + z.re.abs())
}

/// Scale-aware singularity threshold `1e-12 * max(1, max|entry|)^n`.
pub fn singular_tol(m: &Matrix) -> f64 {
    1e-12 * m.max_abs().max(1.0).powi(m.dim() as i32)
}

pub fn det(m: &Matrix) -> f64 {
    match m.dim() {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => det3(m),
        4 => (0..4)
            .map(|j| {
                let minor = m.principal_minor_excluding(0, j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * det3(&minor)
            })
            .sum(),
        _ => lu_det(m),
    }
}

fn det3(m: &Matrix) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

fn lu_det(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut a = m.data.clone();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            d = -d;
        }
        let p = a[col * n + col];
        d *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
            }
        }
    }
    d
}

impl Matrix {
    /// The (n-1)x(n-1) matrix with row `r` and column `c` removed.
    fn principal_minor_excluding(&self, r: usize, c: usize) -> Matrix {
        let rows: Vec<usize> = (0..self.n).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..self.n).filter(|&j| j != c).collect();
        Matrix::from_fn(self.n - 1, |i, j| self[(rows[i], cols[j])])
    }
}

pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let d = det(m);
    let tol = singular_tol(m);
    if d.abs() <= tol {
        return Err(Error::Singular { det: d, tol });
    }
    let n = m.dim();
    let mut a = m.data.clone();
    let mut inv = Matrix::identity(n).data;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 {
            return Err(Error::Singular { det: d, tol });
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let p = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= p;
            inv[col * n + j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f != 0.0 {
                for j in 0..n {
                    a[r * n + j] -= f * a[col * n + j];
                    inv[r * n + j] -= f * inv[col * n + j];
                }
            }
        }
    }
    Matrix::new(n, inv)
}

/// Classical adjoint: the transposed cofactor matrix. Defined for singular
/// input, where `m * adj(m) = 0`.
pub fn adjugate(m: &Matrix) -> Matrix {
    let n = m.dim();
    if n == 1 {
        return Matrix::identity(1);
    }
    Matrix::from_fn(n, |i, j| {
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * det(&m.principal_minor_excluding(j, i))
    })
}

/// Coefficients of `det(m - lambda I)`, highest power first. The leading
/// coefficient is `(-1)^n`.
pub fn char_poly(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    // e[k] = sum of k x k principal minors, so det(lambda I - m) = sum_k (-1)^k e[k] lambda^(n-k)
    let e: Vec<f64> = if n <= 8 { principal_minor_sums(m) } else { hessenberg_char_poly(m) };
    let outer = if n % 2 == 0 { 1.0 } else { -1.0 };
    e.iter()
        .enumerate()
        .map(|(k, ek)| outer * if k % 2 == 0 { *ek } else { -ek })
        .collect()
}

fn principal_minor_sums(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        e[idx.len()] += det(&m.principal(&idx));
    }
    e
}

/// Elementary symmetric sums via the Hessenberg characteristic-polynomial
/// recurrence; used above dimension 8 where enumerating minors gets slow.
fn hessenberg_char_poly(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    let h = hessenberg(m);
    // p[k] holds det(lambda I - H_k) as ascending coefficients
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 0..n {
        let mut next = vec![0.0; k + 2];
        for (d, c) in p[k].iter().enumerate() {
            next[d + 1] += c;
            next[d] -= h[(k, k)] * c;
        }
        let mut prod = 1.0;
        for i in (0..k).rev() {
            prod *= h[(i + 1, i)];
            let coef = h[(i, k)] * prod;
            for (d, c) in p[i].iter().enumerate() {
                next[d] -= coef * c;
            }
        }
        p.push(next);
    }
    let asc = &p[n];
    (0..=n).map(|k| if k % 2 == 0 { asc[n - k] } else { -asc[n - k] }).collect()
}

/// Eigenvalues: closed-form cubic at n = 3, Hessenberg QR otherwise.
pub fn eigenvalues(m: &Matrix) -> Result<Spectrum> {
    let raw = match m.dim() {
        1 => vec![Complex64::new(m[(0, 0)], 0.0)],
        3 => {
            let cp = char_poly(m);
            // det(m - l I) = -l^3 + e1 l^2 - e2 l + e3
            cubic_roots(-cp[1], -cp[2], -cp[3]).to_vec()
        }
        _ => hqr_eigenvalues(m)?,
    };
    Ok(Spectrum::from_unsorted(raw))
}

/// Eigenvalues by balanced Hessenberg QR regardless of dimension.
pub fn eigenvalues_qr(m: &Matrix) -> Result<Spectrum> {
    Ok(Spectrum::from_unsorted(hqr_eigenvalues(m)?))
}

/// Roots of a polynomial (coefficients highest power first) from the QR
/// iteration on its companion matrix.
pub fn companion_eigenvalues(poly: &[f64]) -> Result<Spectrum> {
    let lead = poly[0];
    let n = poly.len() - 1;
    let comp = Matrix::from_fn(n, |i, j| {
        if i == 0 {
            -poly[j + 1] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    Ok(Spectrum::from_unsorted(hqr_eigenvalues(&comp)?))
}

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.spectral_radius())
}

/// Roots of `l^3 + a l^2 + b l + c`.
pub(crate) fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let polish = |x: f64| {
        let mut x = x;
        for _ in 0..2 {
            let f = ((x + a) * x + b) * x + c;
            let df = (3.0 * x + 2.0 * a) * x + b;
            if df.abs() > f64::EPSILON * (1.0 + x.abs()) {
                let nx = x - f / df;
                if nx.is_finite() && (((nx + a) * nx + b) * nx + c).abs() < f.abs() {
                    x = nx;
                }
            }
        }
        x
    };
    if disc <= 0.0 && p < 0.0 {
        // three real roots, trigonometric form
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = std::f64::consts::TAU / 3.0;
        let mut roots = [0.0; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            *root = polish(2.0 * r * (phi - tau * k as f64).cos() - shift);
        }
        roots.map(|x| Complex64::new(x, 0.0))
    } else if p == 0.0 && q == 0.0 {
        [Complex64::new(-shift, 0.0); 3]
    } else {
        // one real root (Cardano); the pair follows from Vieta
        let sq = disc.max(0.0).sqrt();
        let u = (-q / 2.0 - q.signum() * sq).cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let t = u + v;
        let real = polish(t - shift);
        // remaining quadratic: l^2 + (a + real) l + (b + real (a + real))
        let s = a + real;
        let prod = b + real * s;
        let h = -s / 2.0;
        let d = h * h - prod;
        if d >= 0.0 {
            let sd = d.sqrt();
            let r1 = h + h.signum() * sd;
            let r1 = if h == 0.0 { sd } else { r1 };
            let r2 = if r1 != 0.0 { prod / r1 } else { h - sd };
            [Complex64::new(real, 0.0), Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
        } else {
            let im = (-d).sqrt();
            [Complex64::new(real, 0.0), Complex64::new(h, im), Complex64::new(h, -im)]
        }
    }
}

/// `D m D^{-1}`, entry `(i, j)` is `d_i m(i, j) / d_j`.
pub fn diag_conjugate(d: &Diagonal, m: &Matrix) -> Result<Matrix> {
    if d.len() != m.dim() {
        return Err(Error::DimensionMismatch(d.len(), m.dim()));
    }
    if let Some(i) = d.0.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroDiagonal(i));
    }
    Ok(Matrix::from_fn(m.dim(), |i, j| d.0[i] * m[(i, j)] / d.0[j]))
}

/// `U m` for a nonnegative diagonal `U`.
pub fn row_scale(u: &Diagonal, m: &Matrix) -> Result<Matrix> {
    if u.len() != m.dim() {
        return Err(Error::DimensionMismatch(u.len(), m.dim()));
    }
    if let Some(i) = u.0.iter().position(|&x| x < 0.0) {
        return Err(Error::NegativeScale(i));
    }
    Ok(Matrix::from_fn(m.dim(), |i, j| u.0[i] * m[(i, j)]))
}

/// `D m` for an arbitrary real diagonal `D`.
pub fn left_diag_mul(d: &Diagonal, m: &Matrix) -> Result<Matrix> {
    if d.len() != m.dim() {
        return Err(Error::DimensionMismatch(d.len(), m.dim()));
    }
    Ok(Matrix::from_fn(m.dim(), |i, j| d.0[i] * m[(i, j)]))
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (descending) and the matching eigenvectors as columns.
pub fn symmetric_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !m.is_symmetric(1e-9) {
        return Err(Error::NotSymmetric);
    }
    let n = m.dim();
    let mut a = Matrix::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut v = Matrix::identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let scale: f64 = a.as_slice().iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Similarity reduction to upper Hessenberg form by stabilized elimination.
fn hessenberg(m: &Matrix) -> Matrix {
    let n = m.dim();
    let mut a = m.clone();
    for col in 1..n.saturating_sub(1) {
        let piv = (col..n).max_by(|&r, &s| a[(r, col - 1)].abs().total_cmp(&a[(s, col - 1)].abs())).unwrap();
        let x = a[(piv, col - 1)];
        if piv != col {
            for j in 0..n {
                let t = a[(piv, j)];
                a[(piv, j)] = a[(col, j)];
                a[(col, j)] = t;
            }
            for j in 0..n {
                let t = a[(j, piv)];
                a[(j, piv)] = a[(j, col)];
                a[(j, col)] = t;
            }
        }
        if x != 0.0 {
            for i in col + 1..n {
                let y = a[(i, col - 1)] / x;
                if y != 0.0 {
                    for j in 0..n {
                        a[(i, j)] -= y * a[(col, j)];
                    }
                    for j in 0..n {
                        a[(j, col)] += y * a[(j, i)];
                    }
                }
                a[(i, col - 1)] = 0.0;
            }
        }
    }
    a
}

fn balance(m: &Matrix) -> Matrix {
    const RADIX: f64 = 2.0;
    let n = m.dim();
    let mut a = m.clone();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= RADIX * RADIX;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= RADIX * RADIX;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    for j in 0..n {
                        a[(i, j)] /= f;
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
    a
}

/// Francis double-shift QR on the balanced Hessenberg form (EISPACK `hqr`).
#[allow(unused_assignments)]
fn hqr_eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = m.dim();
    if n == 1 {
        return Ok(vec![Complex64::new(m[(0, 0)], 0.0)]);
    }
    let h = hessenberg(&balance(m));
    // 1-based working copy keeps the index arithmetic identical to the reference algorithm
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = h[(i, j)];
        }
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let sign = |a: f64, b: f64| if b >= 0.0 { a.abs() } else { -a.abs() };
    let mut nn = n as isize;
    let mut t = 0.0;
    let (mut p, mut q, mut r, mut x, mut y, mut z, mut w, mut s);
    p = 0.0;
    q = 0.0;
    r = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let lu = l as usize;
                s = a[lu - 1][lu - 1].abs() + a[lu][lu].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[lu][lu - 1].abs() + s == s {
                    a[lu][lu - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let nu = nn as usize;
            x = a[nu][nu];
            if l == nn {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
            } else {
                y = a[nu - 1][nu - 1];
                w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != 0.0 {
                            wr[nu] = x - w / z;
                        }
                        wi[nu - 1] = 0.0;
                        wi[nu] = 0.0;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if its >= QR_MAX_ITERATIONS {
                        return Err(Error::NoConvergence);
                    }
                    if its > 0 && its % 10 == 0 {
                        t += x;
                        for i in 1..=nu {
                            a[i][i] -= x;
                        }
                        s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let lu = l as usize;
                    let mut m = nu - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == lu {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nu {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nu - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if lu != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nu - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nu < k + 3 { nu } else { k + 3 };
                            for i in lu..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nu - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}
