//! Dominant eigenpairs of the adjacency matrix.
//!
//! Three routes:
//!
//! * [`power_dominant`]: deterministic power iteration with deflation, the
//!   reference solution. Works on any [`SymmetricOperator`], dense or
//!   matrix-free.
//! * [`sketch_svd`]: left singular vectors of the column sketch
//!   `C = A(:, J)`, singular values rescaled by `√(n/l)`.
//! * [`nystrom`]: eigendecomposition of `W = A(J, J)` extended to all nodes
//!   through `C`, with eigenvalues rescaled by `n/l` and vectors by `√(l/n)`.
//!
//! Eigenvalues are reported in descending algebraic order. Every returned
//! eigenvector has unit norm and is oriented so its largest-magnitude entry is
//! positive (lowest index wins ties).

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AdjacencyOperator;
use crate::par;
use crate::sampling::SampleIndexSet;

/// A symmetric linear map that can be applied to vectors.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// The `n × l` matrix of the listed columns.
    fn columns(&self, indices: &[usize]) -> Result<Mat<f64>>;
}

impl SymmetricOperator for AdjacencyOperator {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        AdjacencyOperator::apply(self, x, y)
    }

    fn columns(&self, indices: &[usize]) -> Result<Mat<f64>> {
        AdjacencyOperator::columns(self, indices)
    }
}

/// A dense symmetric matrix. Only the columns are read, so `y_i` is the dot
/// product of column `i` with `x`.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    mat: Mat<f64>,
}

impl DenseSymmetric {
    pub fn new(mat: Mat<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self {
            mat: Mat::from_fn(n, n, f),
        }
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.mat.as_ref()
    }
}

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.mat.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = &self.mat;
        par::fill_with(y, |i| {
            let col = m.col(i).try_as_col_major().expect("owned columns are contiguous");
            dot8(col.as_slice(), x)
        });
    }

    fn columns(&self, indices: &[usize]) -> Result<Mat<f64>> {
        let n = self.mat.nrows();
        if let Some(&index) = indices.iter().find(|&&j| j >= n) {
            return Err(Error::IndexOutOfBounds { index, n });
        }
        Ok(Mat::from_fn(n, indices.len(), |i, c| self.mat[(i, indices[c])]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Power,
    SketchSvd,
    Nystrom,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Power => "power",
            Method::SketchSvd => "sketch_svd",
            Method::Nystrom => "nystrom",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "power" => Ok(Method::Power),
            "sketch" | "sketch_svd" | "sketch-svd" => Ok(Method::SketchSvd),
            "nystrom" => Ok(Method::Nystrom),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// Wall time in seconds of each phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub sketch: f64,
    pub decompose: f64,
    pub reconstruct: f64,
}

impl PhaseTimes {
    pub fn total(&self) -> f64 {
        self.sketch + self.decompose + self.reconstruct
    }
}

#[derive(Debug, Clone)]
pub struct EigenApproximation {
    vectors: Mat<f64>,
    values: Vec<f64>,
    method: Method,
    sample: Option<SampleIndexSet>,
    times: PhaseTimes,
    /// Fewer than the requested pairs were numerically available.
    rank_deficient: bool,
    /// Column norms before renormalisation (Nyström only).
    raw_norms: Option<Vec<f64>>,
    /// Iterations per pair (power only).
    iterations: Vec<usize>,
}

impl EigenApproximation {
    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    /// Column `i` as an owned vector.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.col(i).iter().copied().collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn sample(&self) -> Option<&SampleIndexSet> {
        self.sample.as_ref()
    }

    pub fn times(&self) -> PhaseTimes {
        self.times
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    pub fn raw_norms(&self) -> Option<&[f64]> {
        self.raw_norms.as_deref()
    }

    pub fn iterations(&self) -> &[usize] {
        &self.iterations
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn k(&self) -> usize {
        self.vectors.ncols()
    }

    /// Builds an approximation from externally supplied vectors (e.g. read back
    /// from CSV). Columns are normalised and sign-fixed.
    pub fn from_parts(vectors: Mat<f64>, values: Vec<f64>, method: Method) -> Result<Self> {
        if vectors.ncols() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.ncols(),
                found: values.len(),
            });
        }
        let mut vectors = vectors;
        normalize_columns(&mut vectors)?;
        fix_signs(&mut vectors);
        Ok(Self {
            vectors,
            values,
            method,
            sample: None,
            times: PhaseTimes::default(),
            rank_deficient: false,
            raw_norms: None,
            iterations: Vec::new(),
        })
    }

    /// One row per node: `node,u0,u1,…`, 17 significant digits, LF endings.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "node")?;
        for c in 0..self.k() {
            write!(w, ",u{c}")?;
        }
        writeln!(w)?;
        for i in 0..self.n() {
            write!(w, "{i}")?;
            for c in 0..self.k() {
                write!(w, ",{:.16e}", self.vectors[(i, c)])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn metadata(&self) -> EigenMetadata {
        EigenMetadata {
            method: self.method,
            sampler: self.sample.as_ref().map(|s| s.sampler().to_string()),
            seed: self.sample.as_ref().map(|s| s.seed()),
            n: self.n(),
            l: self.sample.as_ref().map(|s| s.l()),
            k: self.k(),
            eigenvalues: self.values.clone(),
            timings_s: self.times,
            rank_deficient: self.rank_deficient,
            prenormalization_norms: self.raw_norms.clone(),
            iterations: if self.iterations.is_empty() {
                None
            } else {
                Some(self.iterations.clone())
            },
            note: match self.method {
                Method::SketchSvd => Some(
                    "eigenvalues are rescaled singular values of C and approximate |lambda|; \
                     pairs are ordered by magnitude"
                        .to_string(),
                ),
                _ => None,
            },
            grid: None,
        }
    }
}

/// JSON sidecar written next to an eigenvector CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMetadata {
    pub method: Method,
    pub sampler: Option<String>,
    pub seed: Option<u64>,
    pub n: usize,
    pub l: Option<usize>,
    pub k: usize,
    pub eigenvalues: Vec<f64>,
    pub timings_s: PhaseTimes,
    pub rank_deficient: bool,
    pub prenormalization_norms: Option<Vec<f64>>,
    pub iterations: Option<Vec<usize>>,
    pub note: Option<String>,
    /// `[nx, ny, dx, dy]` of the source field, when known.
    pub grid: Option<(usize, usize, f64, f64)>,
}

/// Reads an eigenvector CSV written by [`EigenApproximation::write_csv`].
pub fn read_vectors_csv(path: impl AsRef<Path>) -> Result<Mat<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vectors_csv(&text)
}

pub fn parse_vectors_csv(text: &str) -> Result<Mat<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"node") || cols.len() < 2 {
        return Err(Error::MalformedHeader(format!(
            "expected \"node,u0,…\", got {header:?}"
        )));
    }
    let k = cols.len() - 1;
    let mut data = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != k + 1 {
            return Err(Error::MalformedData(format!(
                "row {row} has {} fields, expected {}",
                fields.len(),
                k + 1
            )));
        }
        if fields[0].parse::<usize>().ok() != Some(row) {
            return Err(Error::MalformedData(format!(
                "row {row} has node id {:?}",
                fields[0]
            )));
        }
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::MalformedData(format!("bad value {f:?}")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite { index: row });
            }
            data.push(v);
        }
    }
    let n = data.len() / k;
    Ok(Mat::from_fn(n, k, |i, j| data[i * k + j]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            seed: 0,
        }
    }
}

/// Default relative cutoff for pseudo-inverses and numerical rank.
pub const DEFAULT_PINV_RTOL: f64 = 1e-12;

/// Dot product over eight interleaved partial sums, combined in a fixed
/// order so results do not depend on scheduling.
pub(crate) fn dot8(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, ra) = a.as_chunks::<8>();
    let (cb, rb) = b.as_chunks::<8>();
    for (x, y) in ca.iter().zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let c = dot(v, u);
        for (x, ui) in v.iter_mut().zip(u) {
            *x -= c * ui;
        }
    }
}

/// The `k` algebraically largest eigenpairs by power iteration with deflation.
///
/// Each pass converges to the largest-magnitude eigenvalue of the operator
/// restricted to the complement of the pairs found so far, so pairs arrive in
/// decreasing `|λ|`. Negative pairs are kept for deflation and iteration stops
/// once `k` nonnegative pairs are found: every eigenvalue not yet found is then
/// bounded by all of them.
pub fn power_dominant(
    op: &impl SymmetricOperator,
    k: usize,
    opts: PowerOptions,
) -> Result<EigenApproximation> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in [1, {n}]"
        )));
    }
    if !(opts.tol > 0.0) || opts.max_iters == 0 {
        return Err(Error::InvalidArgument(
            "tolerance and iteration cap must be positive".into(),
        ));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new(); // (λ, index into found, iterations)
    let mut nonneg = 0;
    let mut w = vec![0.0; n];

    while nonneg < k && found.len() < n {
        let pair = found.len();
        let mut v = random_start(&mut rng, n, &found)?;
        let mut prev = v.clone();
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        let mut iters = 0;
        while iters < opts.max_iters {
            iters += 1;
            op.apply(&v, &mut w);
            project_out(&mut w, &found);
            project_out(&mut w, &found);
            let len = norm(&w);
            if len == 0.0 {
                // v lies in the null space of the deflated operator.
                converged = true;
                last_step = 0.0;
                break;
            }
            let flip = if dot(&w, &v) < 0.0 { -1.0 } else { 1.0 };
            let scale = flip / len;
            let mut step = 0.0;
            let mut cycle = 0.0;
            for ((wi, vi), pi) in w.iter_mut().zip(v.iter_mut()).zip(prev.iter_mut()) {
                let next = *wi * scale;
                step += (next - *vi) * (next - *vi);
                cycle += (next - *pi) * (next - *pi);
                *pi = *vi;
                *vi = next;
            }
            last_step = step.sqrt();
            if last_step < opts.tol {
                converged = true;
                break;
            }
            if iters >= 2 && cycle.sqrt() < opts.tol {
                // Period-two orbit: v spans the eigenvectors of a ±μ pair.
                split_pair(op, &mut v, &mut w, &found);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                pair,
                iterations: iters,
                residual: last_step,
            });
        }
        op.apply(&v, &mut w);
        let lambda = dot(&v, &w);
        if lambda >= 0.0 {
            nonneg += 1;
        }
        pairs.push((lambda, found.len(), iters));
        found.push(v);
    }

    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    pairs.truncate(k);
    let mut vectors = Mat::from_fn(n, pairs.len(), |i, c| found[pairs[c].1][i]);
    normalize_columns(&mut vectors)?;
    fix_signs(&mut vectors);
    Ok(EigenApproximation {
        vectors,
        values: pairs.iter().map(|p| p.0).collect(),
        method: Method::Power,
        sample: None,
        times: PhaseTimes {
            sketch: 0.0,
            decompose: start.elapsed().as_secs_f64(),
            reconstruct: 0.0,
        },
        rank_deficient: false,
        raw_norms: None,
        iterations: pairs.iter().map(|p| p.2).collect(),
    })
}

/// Separates a period-two iterate into the eigenvector of `+μ` or `−μ`,
/// whichever carries more of it. The other is picked up after deflation.
fn split_pair(op: &impl SymmetricOperator, v: &mut [f64], w: &mut [f64], found: &[Vec<f64>]) {
    op.apply(v, w);
    project_out(w, found);
    project_out(w, found);
    let mu = norm(w);
    let plus: Vec<f64> = v.iter().zip(w.iter()).map(|(a, b)| a + b / mu).collect();
    let minus: Vec<f64> = v.iter().zip(w.iter()).map(|(a, b)| a - b / mu).collect();
    let pick = if norm(&plus) >= norm(&minus) { plus } else { minus };
    let len = norm(&pick);
    for (x, p) in v.iter_mut().zip(&pick) {
        *x = p / len;
    }
}

fn random_start(rng: &mut ChaCha8Rng, n: usize, found: &[Vec<f64>]) -> Result<Vec<f64>> {
    for _ in 0..16 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        project_out(&mut v, found);
        project_out(&mut v, found);
        let len = norm(&v);
        if len > 1e-8 {
            v.iter_mut().for_each(|x| *x /= len);
            return Ok(v);
        }
    }
    Err(Error::Decomposition(
        "could not draw a start vector outside the deflated subspace".into(),
    ))
}

fn check_sample(op: &impl SymmetricOperator, sample: &SampleIndexSet, k: usize) -> Result<()> {
    if sample.n() != op.dim() {
        return Err(Error::SampleMismatch {
            sample_n: sample.n(),
            op_n: op.dim(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > sample.l() {
        return Err(Error::RankTooLarge { k, l: sample.l() });
    }
    Ok(())
}

/// Rank-k eigen-approximation from the left singular vectors of `C = A(:, J)`.
///
/// With `gram = false` the thin SVD of `C` is taken directly. With
/// `gram = true` the `l × l` Gram matrix `CᵀC` is eigendecomposed and the left
/// singular vectors recovered as `C w / σ`.
///
/// `A` is indefinite, so singular values approximate `|λ|` and the pairs come
/// out ordered by magnitude.
pub fn sketch_svd(
    op: &impl SymmetricOperator,
    sample: &SampleIndexSet,
    k: usize,
    gram: bool,
) -> Result<EigenApproximation> {
    check_sample(op, sample, k)?;
    let (n, l) = (op.dim(), sample.l());
    let t0 = Instant::now();
    let c = op.columns(sample.indices())?;
    let sketch = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (basis, sigma, cutoff) = if gram {
        let mut g = Mat::<f64>::zeros(l, l);
        matmul(
            g.as_mut(),
            Accum::Replace,
            c.transpose(),
            c.as_ref(),
            1.0,
            Par::Seq,
        );
        let eig = g
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let mu = eig.S().column_vector();
        // ascending -> descending
        let order: Vec<usize> = (0..l).rev().collect();
        let sigma: Vec<f64> = order.iter().map(|&i| mu[i].max(0.0).sqrt()).collect();
        let w = Mat::from_fn(l, l.min(k), |r, c| eig.U()[(r, order[c])]);
        // Gram eigenvalues carry absolute error ~eps·σ_max², hence the looser cutoff.
        (w, sigma, f64::EPSILON.sqrt())
    } else {
        let svd = c
            .thin_svd()
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = svd.S().column_vector();
        let sigma: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
        let u = svd.U().subcols(0, l.min(k)).to_owned();
        (u, sigma, DEFAULT_PINV_RTOL)
    };
    let decompose = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let keep = sigma
        .iter()
        .take(k)
        .take_while(|&&s| smax > 0.0 && s > cutoff * smax)
        .count();
    if keep == 0 {
        return Err(Error::DegenerateSample);
    }
    let mut vectors = if gram {
        let mut u = Mat::<f64>::zeros(n, keep);
        matmul(
            u.as_mut(),
            Accum::Replace,
            c.as_ref(),
            basis.subcols(0, keep),
            1.0,
            Par::Seq,
        );
        for j in 0..keep {
            let inv = 1.0 / sigma[j];
            u.col_mut(j).iter_mut().for_each(|x| *x *= inv);
        }
        u
    } else {
        basis.subcols(0, keep).to_owned()
    };
    normalize_columns(&mut vectors)?;
    fix_signs(&mut vectors);
    let scale = (n as f64 / l as f64).sqrt();
    let values = sigma[..keep].iter().map(|s| scale * s).collect();
    let reconstruct = t2.elapsed().as_secs_f64();

    Ok(EigenApproximation {
        vectors,
        values,
        method: Method::SketchSvd,
        sample: Some(sample.clone()),
        times: PhaseTimes {
            sketch,
            decompose,
            reconstruct,
        },
        rank_deficient: keep < k,
        raw_norms: None,
        iterations: Vec::new(),
    })
}

/// Nyström eigen-approximation from `C = A(:, J)` and `W = C(J, :) = A(J, J)`.
///
/// `W = U_W D_W U_Wᵀ` with eigenvalues sorted descending. Returns
/// `D̃ = (n/l)·D_W[:k]` and `Ũ = √(l/n)·C·U_W[:, :k]·D_W[:k]^†`, where the
/// pseudo-inverse zeroes eigenvalues with `|d| ≤ pinv_rtol·max|d|`. Columns are
/// renormalised to unit length; the norms before that step are kept.
pub fn nystrom(
    op: &impl SymmetricOperator,
    sample: &SampleIndexSet,
    k: usize,
    pinv_rtol: f64,
) -> Result<EigenApproximation> {
    check_sample(op, sample, k)?;
    if !(pinv_rtol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pseudo-inverse tolerance {pinv_rtol} must be nonnegative"
        )));
    }
    let (n, l) = (op.dim(), sample.l());
    let idx = sample.indices();

    let t0 = Instant::now();
    let c = op.columns(idx)?;
    let w = Mat::from_fn(l, l, |a, b| c[(idx[a], b)]);
    let sketch = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let eig = w
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let d_asc = eig.S().column_vector();
    let order: Vec<usize> = (0..l).rev().collect();
    let d: Vec<f64> = order.iter().map(|&i| d_asc[i]).collect();
    let decompose = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cutoff = pinv_rtol * dmax;
    if dmax == 0.0 || d.iter().all(|x| x.abs() <= cutoff) {
        return Err(Error::DegenerateSample);
    }
    // Pairs whose pseudo-inverse entry is zero would reconstruct to zero vectors.
    let keep = d.iter().take(k).take_while(|x| x.abs() > cutoff).count();
    if keep == 0 {
        return Err(Error::DegenerateSample);
    }
    let uw = Mat::from_fn(l, keep, |r, col| eig.U()[(r, order[col])]);
    let mut vectors = Mat::<f64>::zeros(n, keep);
    matmul(
        vectors.as_mut(),
        Accum::Replace,
        c.as_ref(),
        uw.as_ref(),
        1.0,
        Par::Seq,
    );
    let vec_scale = (l as f64 / n as f64).sqrt();
    for j in 0..keep {
        let s = vec_scale / d[j];
        vectors.col_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    let raw_norms = normalize_columns(&mut vectors)?;
    fix_signs(&mut vectors);
    let val_scale = n as f64 / l as f64;
    let values = d[..keep].iter().map(|x| val_scale * x).collect();
    let reconstruct = t2.elapsed().as_secs_f64();

    Ok(EigenApproximation {
        vectors,
        values,
        method: Method::Nystrom,
        sample: Some(sample.clone()),
        times: PhaseTimes {
            sketch,
            decompose,
            reconstruct,
        },
        rank_deficient: keep < k,
        raw_norms: Some(raw_norms),
        iterations: Vec::new(),
    })
}

/// Scales every column to unit norm, returning the original norms.
pub fn normalize_columns(m: &mut Mat<f64>) -> Result<Vec<f64>> {
    let mut norms = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let len = m.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::ZeroVector);
        }
        m.col_mut(j).iter_mut().for_each(|x| *x /= len);
        norms.push(len);
    }
    Ok(norms)
}

/// Flips each column so its largest-magnitude entry is positive; the lowest
/// index wins ties.
pub fn fix_signs(m: &mut Mat<f64>) {
    for j in 0..m.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (i, x) in m.col(j).iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if m[(best, j)] < 0.0 {
            m.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
}
