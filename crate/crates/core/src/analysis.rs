//! Error metrics, centrality and spectral clustering on eigenpairs.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::EigenApproximation;
use crate::error::{Error, Result};
use crate::par;

/// Acute angle between two vectors in radians; sign- and scale-invariant.
pub fn angle_error_rad(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: w.len(),
        });
    }
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nv == 0.0 || nw == 0.0 {
        return Err(Error::ZeroVector);
    }
    // atan2 form stays accurate near 0 where acos loses half the digits.
    let sign = if v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in v.iter().zip(w) {
        let (x, y) = (a / nv, sign * b / nw);
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    Ok(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

/// [`angle_error_rad`] in degrees, within `[0, 90]`.
pub fn angle_error(v: &[f64], w: &[f64]) -> Result<f64> {
    angle_error_rad(v, w).map(f64::to_degrees)
}

/// Absolute entries of the leading eigenvector.
pub fn eigenvector_centrality(approx: &EigenApproximation) -> Vec<f64> {
    approx.vectors().col(0).iter().map(|x| x.abs()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub c: usize,
    /// `c` rows in score coordinates.
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning run.
    pub inertia_trace: Vec<f64>,
    /// Empty clusters reseeded during the winning run.
    pub repairs: usize,
}

impl ClusterAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.c];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// `node,label` rows.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "node,label")?;
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(w, "{i},{l}")?;
        }
        Ok(())
    }
}

pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels_csv(&text)
}

pub fn parse_labels_csv(text: &str) -> Result<Vec<usize>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "node,label" => {}
        other => {
            return Err(Error::MalformedHeader(format!(
                "expected \"node,label\", got {other:?}"
            )))
        }
    }
    lines
        .enumerate()
        .map(|(row, line)| {
            let (node, label) = line
                .split_once(',')
                .ok_or_else(|| Error::MalformedData(format!("bad row {line:?}")))?;
            if node.trim().parse::<usize>().ok() != Some(row) {
                return Err(Error::MalformedData(format!("row {row} has node {node:?}")));
            }
            label
                .trim()
                .parse()
                .map_err(|_| Error::MalformedData(format!("bad label {label:?}")))
        })
        .collect()
}

/// The `n × use_k` score rows: node `i` at `(u_0[i], …, u_{use_k−1}[i])`.
pub fn scores(approx: &EigenApproximation, use_k: usize) -> Result<Vec<Vec<f64>>> {
    if use_k == 0 || use_k > approx.k() {
        return Err(Error::InvalidArgument(format!(
            "use-k = {use_k} but only {} eigenvectors are available",
            approx.k()
        )));
    }
    let v = approx.vectors();
    Ok((0..approx.n())
        .map(|i| (0..use_k).map(|j| v[(i, j)]).collect())
        .collect())
}

/// `node,s0,…` rows of score coordinates.
pub fn write_scores_csv(points: &[Vec<f64>], mut w: impl Write) -> std::io::Result<()> {
    let dims = points.first().map_or(0, Vec::len);
    write!(w, "node")?;
    for d in 0..dims {
        write!(w, ",s{d}")?;
    }
    writeln!(w)?;
    for (i, p) in points.iter().enumerate() {
        write!(w, "{i}")?;
        for x in p {
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Groups nodes by the sign pattern of their first `depth` eigenvector
/// entries (zero counts as nonnegative). Codes are compacted to consecutive
/// labels in ascending code order.
pub fn sign_partition(approx: &EigenApproximation, depth: usize) -> Result<ClusterAssignment> {
    let pts = scores(approx, depth)?;
    if depth >= usize::BITS as usize {
        return Err(Error::InvalidArgument(format!("depth {depth} is too large")));
    }
    let codes: Vec<usize> = pts
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .fold(0usize, |acc, (b, &x)| acc | (usize::from(x < 0.0) << b))
        })
        .collect();
    let mut used: Vec<usize> = codes.clone();
    used.sort_unstable();
    used.dedup();
    let labels: Vec<usize> = codes
        .iter()
        .map(|c| used.binary_search(c).expect("code present"))
        .collect();
    let c = used.len();
    let centroids = centroids_of(&pts, &labels, c);
    let inertia = inertia_of(&pts, &labels, &centroids);
    Ok(ClusterAssignment {
        labels,
        c,
        centroids,
        inertia,
        inertia_trace: vec![inertia],
        repairs: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub use_k: usize,
    pub clusters: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
    /// Independent k-means++ starts; the lowest final inertia wins.
    pub restarts: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            use_k: 3,
            clusters: 7,
            seed: 0,
            max_iters: 300,
            tol: 1e-10,
            restarts: 10,
        }
    }
}

/// k-means on the score rows of `approx`.
pub fn kmeans_cluster(approx: &EigenApproximation, opts: KMeansOptions) -> Result<ClusterAssignment> {
    let pts = scores(approx, opts.use_k)?;
    kmeans(&pts, opts)
}

/// k-means++ seeding followed by Lloyd iterations, repeated `restarts` times
/// from one seeded stream.
pub fn kmeans(points: &[Vec<f64>], opts: KMeansOptions) -> Result<ClusterAssignment> {
    let n = points.len();
    if opts.clusters == 0 || opts.clusters > n {
        return Err(Error::ClusterCount {
            c: opts.clusters,
            n,
        });
    }
    if opts.max_iters == 0 || !(opts.tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "k-means needs max-iters >= 1 and tol >= 0".into(),
        ));
    }
    let dims = points[0].len();
    if points.iter().any(|p| p.len() != dims) {
        return Err(Error::InvalidArgument("ragged score rows".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<ClusterAssignment> = None;
    for _ in 0..opts.restarts.max(1) {
        let init = plus_plus(points, opts.clusters, &mut rng);
        let run = lloyd(points, init, opts.max_iters, opts.tol);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus(points: &[Vec<f64>], c: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < c {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let center = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &center));
        }
        centers.push(center);
    }
    centers
}

/// Nearest centroid, lowest index on exact ties.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iters: usize, tol: f64) -> ClusterAssignment {
    let c = centroids.len();
    let mut trace = Vec::new();
    let mut repairs = 0;
    let mut assigned: Vec<(usize, f64)>;
    let mut iter = 0;
    loop {
        assigned = par::map_slice(points, |p| nearest(p, &centroids));
        trace.push(assigned.iter().map(|a| a.1).sum());
        iter += 1;

        let mut labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        // Reseed empty clusters at the point farthest from its centroid.
        let mut counts = vec![0usize; c];
        labels.iter().for_each(|&l| counts[l] += 1);
        for j in 0..c {
            if counts[j] == 0 {
                let (far, _) = assigned
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| counts[labels[*i]] > 1)
                    .fold((usize::MAX, -1.0), |acc, (i, a)| if a.1 > acc.1 { (i, a.1) } else { acc });
                if far == usize::MAX {
                    continue;
                }
                counts[labels[far]] -= 1;
                labels[far] = j;
                counts[j] = 1;
                assigned[far] = (j, 0.0);
                repairs += 1;
            }
        }

        let next = centroids_of(points, &labels, c);
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < tol || iter >= max_iters {
            let inertia = inertia_of(points, &labels, &centroids);
            return ClusterAssignment {
                labels,
                c,
                centroids,
                inertia,
                inertia_trace: trace,
                repairs,
            };
        }
    }
}

fn centroids_of(points: &[Vec<f64>], labels: &[usize], c: usize) -> Vec<Vec<f64>> {
    let dims = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dims]; c];
    let mut counts = vec![0usize; c];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &m) in sums.iter_mut().zip(&counts) {
        if m > 0 {
            s.iter_mut().for_each(|x| *x /= m as f64);
        }
    }
    sums
}

fn inertia_of(points: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, &centroids[l]))
        .sum()
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method
/// with potentials). Returns `assignment[row] = col`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    // 1-based arrays with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Fraction of nodes on which two labelings agree after the best one-to-one
/// matching of label ids.
pub fn matched_accuracy(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let m = a.iter().chain(b).max().copied().unwrap_or(0) + 1;
    let mut confusion = vec![vec![0.0; m]; m];
    for (&x, &y) in a.iter().zip(b) {
        confusion[x][y] += 1.0;
    }
    let cost: Vec<Vec<f64>> = confusion
        .iter()
        .map(|r| r.iter().map(|&x| -x).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    let matched: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| confusion[i][j])
        .sum();
    Ok(matched / a.len() as f64)
}
