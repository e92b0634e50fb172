//! Monte Carlo validation of class-1 kernels through halved Gaussian
//! squares, plus the pseudo-metric built from a kernel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify;
use crate::error::{Error, Result};
use crate::kernelcheck::{self, Kernel};
use crate::matcore::{self, Diagonal, Matrix};

pub const MIN_MOMENT_SAMPLES: usize = 10_000;
const BLOCK: usize = 4096;
const CLIP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub kernel: Kernel,
    pub beta: f64,
    pub count: usize,
    pub seed: u64,
    /// Row-major `count × n`.
    pub draws: Vec<f64>,
}

impl SampleBatch {
    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn sample(&self, s: usize) -> &[f64] {
        let n = self.dim();
        &self.draws[s * n..(s + 1) * n]
    }
}

/// Sums in a fixed binary tree so results do not depend on chunking.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `2β` for a positive half-integer `β`.
pub fn half_integer_count(beta: f64) -> Result<usize> {
    let k = (2.0 * beta).round();
    if !beta.is_finite() || k < 1.0 || (2.0 * beta - k).abs() > 1e-12 {
        return Err(Error::BadBeta(beta));
    }
    Ok(k as usize)
}

/// `L` with `LLᵀ = Σ`, eigenvalues down to `−1e-10` clipped to zero.
fn gaussian_factor(sigma: &Matrix) -> Result<Matrix> {
    let (vals, vecs) = matcore::symmetric_eigen(sigma)?;
    let tol = CLIP * sigma.max_abs().max(1.0);
    if let Some(&v) = vals.iter().find(|&&v| v < -tol) {
        return Err(Error::PreconditionViolated(format!("target has eigenvalue {v}")));
    }
    let n = sigma.dim();
    Ok(Matrix::from_fn(n, |i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt()))
}

/// Draws `θᵢ = ½ Σ_{m≤k} G_{m,i}²` with `k = 2β` independent `N(0, Σ)`
/// vectors, Σ the symmetric PSD matrix of the class-1 witness. Each block
/// of 4096 samples has its own ChaCha8 stream, so the output is bit-exact
/// for a given seed whatever the thread count.
pub fn sample_gaussian_squares(k: &Kernel, beta: f64, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    let reps = half_integer_count(beta)?;
    let witness = classify::is_class1(k).ok_or(Error::NotClass1)?;
    let l = gaussian_factor(&witness.target)?;
    let n = k.dim();
    let blocks = n_samples.div_ceil(BLOCK);
    let chunks: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BLOCK.min(n_samples - b * BLOCK);
            let mut out = vec![0.0; len * n];
            let mut z = vec![0.0; n];
            for s in 0..len {
                let row = &mut out[s * n..(s + 1) * n];
                for _ in 0..reps {
                    for zi in z.iter_mut() {
                        *zi = StandardNormal.sample(&mut rng);
                    }
                    for (i, r) in row.iter_mut().enumerate() {
                        let g: f64 = (0..n).map(|j| l[(i, j)] * z[j]).sum();
                        *r += 0.5 * g * g;
                    }
                }
            }
            out
        })
        .collect();
    Ok(SampleBatch { kernel: k.clone(), beta, count: n_samples, seed, draws: chunks.concat() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: f64,
}

impl LaplaceEstimate {
    /// `|estimate − analytic|` in units of the standard error.
    pub fn z(&self) -> f64 {
        z_score(self.estimate - self.analytic, self.std_error)
    }
}

fn z_score(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / se.max(f64::MIN_POSITIVE)
    }
}

/// `det(I + diag(α)Γ)^(−β)`.
pub fn analytic_laplace(k: &Kernel, beta: f64, alpha: &[f64]) -> Result<f64> {
    if alpha.len() != k.dim() {
        return Err(Error::WrongDimension { expected: k.dim(), got: alpha.len() });
    }
    let am = matcore::row_scale(&Diagonal(alpha.to_vec()), &k.m)?;
    Ok(matcore::det(&(&Matrix::identity(k.dim()) + &am)).powf(-beta))
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let dev: Vec<f64> = values.par_iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Sample mean of `exp(−Σ αᵢθᵢ)` with its CLT standard error, against the
/// closed form for the batch kernel.
pub fn empirical_laplace(batch: &SampleBatch, alpha: &[f64]) -> Result<LaplaceEstimate> {
    if alpha.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::PreconditionViolated("alpha must be nonnegative".into()));
    }
    let analytic = analytic_laplace(&batch.kernel, batch.beta, alpha)?;
    let n = batch.dim();
    let values: Vec<f64> = batch
        .draws
        .par_chunks(n)
        .map(|row| (-row.iter().zip(alpha).map(|(t, a)| t * a).sum::<f64>()).exp())
        .collect();
    let (estimate, std_error) = mean_and_se(&values);
    Ok(LaplaceEstimate { estimate, std_error, analytic })
}

/// 20 (or `points`) scales log-spaced on `[0.1, 10]`, alternating between
/// the all-ones direction and the ramp `(1, 2, …, n)/n`.
pub fn alpha_grid(n: usize, points: usize) -> Vec<Vec<f64>> {
    (0..points)
        .map(|p| {
            let t = if points > 1 { p as f64 / (points - 1) as f64 } else { 0.5 };
            let scale = 10f64.powf(-1.0 + 2.0 * t);
            (0..n)
                .map(|i| if p % 2 == 0 { scale } else { scale * (i + 1) as f64 / n as f64 })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub means: Vec<f64>,
    pub mean_analytic: Vec<f64>,
    pub mean_z: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub cov_analytic: Vec<Vec<f64>>,
    pub cov_z: Vec<Vec<f64>>,
}

impl MomentReport {
    pub fn max_abs_z(&self) -> f64 {
        self.mean_z.iter().chain(self.cov_z.iter().flatten()).fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Empirical means and covariances against `E θᵢ = βΓ(i,i)` and
/// `cov(θᵢ, θⱼ) = βΓ(i,j)Γ(j,i)`, with plug-in standard errors.
pub fn moment_report(batch: &SampleBatch) -> Result<MomentReport> {
    if batch.count < MIN_MOMENT_SAMPLES {
        return Err(Error::TooFewSamples { min: MIN_MOMENT_SAMPLES, got: batch.count });
    }
    let n = batch.dim();
    let g = &batch.kernel.m;
    let beta = batch.beta;
    let column = |i: usize| -> Vec<f64> { batch.draws.iter().skip(i).step_by(n).copied().collect() };
    let cols: Vec<Vec<f64>> = (0..n).map(column).collect();
    let stats: Vec<(f64, f64)> = cols.iter().map(|c| mean_and_se(c)).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let mean_analytic: Vec<f64> = (0..n).map(|i| beta * g[(i, i)]).collect();
    let mean_z = (0..n).map(|i| z_score(means[i] - mean_analytic[i], stats[i].1)).collect();

    let mut cov = vec![vec![0.0; n]; n];
    let mut cov_analytic = vec![vec![0.0; n]; n];
    let mut cov_z = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let prods: Vec<f64> =
                cols[i].par_iter().zip(&cols[j]).map(|(a, b)| (a - means[i]) * (b - means[j])).collect();
            let (c, se) = mean_and_se(&prods);
            let a = beta * g[(i, j)] * g[(j, i)];
            let z = z_score(c - a, se);
            cov[i][j] = c;
            cov[j][i] = c;
            cov_analytic[i][j] = a;
            cov_analytic[j][i] = a;
            cov_z[i][j] = z;
            cov_z[j][i] = z;
        }
    }
    Ok(MomentReport { means, mean_analytic, mean_z, cov, cov_analytic, cov_z })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub d: Vec<Vec<f64>>,
    /// Smallest `d(x,z) + d(z,y) − d(x,y)` over distinct triples; `None`
    /// below three points.
    pub worst_slack: Option<f64>,
    pub worst_triple: Option<(usize, usize, usize)>,
    /// Largest negative `d²` clamped to zero (rounding only).
    pub clamped: f64,
}

/// `d(x,y) = (Γ(x,x) + Γ(y,y) − 2√(Γ(x,y)Γ(y,x)))^{1/2}` and its worst
/// triangle slack.
pub fn metric_table(k: &Kernel) -> Result<MetricTable> {
    let g = &k.m;
    let n = g.dim();
    let t2 = k.tol.scaled(g, 2);
    let mut d = vec![vec![0.0; n]; n];
    let mut clamped: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let p = g[(x, y)] * g[(y, x)];
            if p < -t2 {
                return Err(Error::NegativePairProduct(x, y));
            }
            let d2 = g[(x, x)] + g[(y, y)] - 2.0 * p.max(0.0).sqrt();
            if d2 < 0.0 {
                clamped = clamped.min(d2);
            }
            let v = d2.max(0.0).sqrt();
            d[x][y] = v;
            d[y][x] = v;
        }
    }
    let mut worst: Option<(f64, (usize, usize, usize))> = None;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || x == z {
                    continue;
                }
                let s = d[x][z] + d[z][y] - d[x][y];
                if worst.is_none_or(|(w, _)| s < w) {
                    worst = Some((s, (x, y, z)));
                }
            }
        }
    }
    Ok(MetricTable { d, worst_slack: worst.map(|w| w.0), worst_triple: worst.map(|w| w.1), clamped })
}

/// Whether the matrix with entries `√(Γ(i,j)Γ(j,i))` is PSD, which makes `d`
/// the canonical metric of a Gaussian vector.
pub fn symmetrized_psd_check(k: &Kernel) -> Result<bool> {
    if k.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: k.dim() });
    }
    classify::is_psd(&kernelcheck::symmetrize(k)?)
}
