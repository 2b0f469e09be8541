//! Column index sets `J` for the sketches.
//!
//! The sketching matrix `S` in `C = A S` is never formed; it is represented by
//! the ordered list of sampled column indices.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Uniform,
    Halton,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Halton => "halton",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(SamplerKind::Uniform),
            "halton" => Ok(SamplerKind::Halton),
            other => Err(Error::InvalidArgument(format!("unknown sampler {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleIndexSet {
    indices: Vec<usize>,
    sampler: SamplerKind,
    /// RNG seed for uniform sampling, sequence offset for Halton.
    seed: u64,
    n: usize,
}

impl SampleIndexSet {
    /// Wraps an explicit index list after checking bounds and distinctness.
    pub fn from_indices(
        indices: Vec<usize>,
        n: usize,
        sampler: SamplerKind,
        seed: u64,
    ) -> Result<Self> {
        check_size(indices.len(), n)?;
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in &indices {
            if i >= n {
                return Err(Error::IndexOutOfBounds { index: i, n });
            }
            if !seen.insert(i) {
                return Err(Error::InvalidArgument(format!("duplicate index {i}")));
            }
        }
        Ok(Self {
            indices,
            sampler,
            seed,
            n,
        })
    }

    /// Every column in natural order; the `l = n` identity sample.
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            sampler: SamplerKind::Uniform,
            seed: 0,
            n,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn sampler(&self) -> SamplerKind {
        self.sampler
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.indices.len()
    }

    /// One index per line.
    pub fn write_lines(&self, mut w: impl Write) -> std::io::Result<()> {
        for i in &self.indices {
            writeln!(w, "{i}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_lines(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a one-index-per-line dump; provenance is supplied by the caller.
    pub fn parse_lines(text: &str, n: usize, sampler: SamplerKind, seed: u64) -> Result<Self> {
        let indices = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<usize>()
                    .map_err(|_| Error::MalformedData(format!("bad index line {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(indices, n, sampler, seed)
    }
}

fn check_size(l: usize, n: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if l > n {
        return Err(Error::SampleTooLarge { l, n });
    }
    Ok(())
}

/// `l` indices drawn uniformly without replacement (partial Fisher–Yates),
/// in draw order.
pub fn sample_uniform(n: usize, l: usize, seed: u64) -> Result<SampleIndexSet> {
    check_size(l, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for t in 0..l {
        let pick = rng.random_range(t..n);
        pool.swap(t, pick);
    }
    pool.truncate(l);
    Ok(SampleIndexSet {
        indices: pool,
        sampler: SamplerKind::Uniform,
        seed,
        n,
    })
}

/// Radical inverse of `t` in base `base`: the digits of `t` mirrored about the
/// radix point.
pub fn radical_inverse(mut t: u64, base: u64) -> f64 {
    debug_assert!(base >= 2);
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while t > 0 {
        acc += (t % base) as f64 * scale;
        t /= base;
        scale *= inv;
    }
    acc
}

/// The 2D Halton point with bases (2, 3) at sequence position `t`.
pub fn halton_point(t: u64) -> (f64, f64) {
    (radical_inverse(t, 2), radical_inverse(t, 3))
}

/// Maps a point of the unit square to the node of the cell containing it.
pub fn point_to_node(grid: &GridSpec, (hx, hy): (f64, f64)) -> usize {
    let c = ((hx * grid.nx as f64) as usize).min(grid.nx - 1);
    let r = ((hy * grid.ny as f64) as usize).min(grid.ny - 1);
    grid.index(r, c)
}

/// `l` distinct nodes hit by the Halton points `t = offset+1, offset+2, …`;
/// points landing in an already-sampled cell are skipped.
pub fn sample_halton(grid: &GridSpec, l: usize, offset: u64) -> Result<SampleIndexSet> {
    let n = grid.len();
    check_size(l, n)?;
    let mut seen = vec![false; n];
    let mut indices = Vec::with_capacity(l);
    let mut t = offset;
    while indices.len() < l {
        t = t
            .checked_add(1)
            .ok_or_else(|| Error::InvalidArgument("Halton offset overflow".into()))?;
        let node = point_to_node(grid, halton_point(t));
        if !seen[node] {
            seen[node] = true;
            indices.push(node);
        }
    }
    Ok(SampleIndexSet {
        indices,
        sampler: SamplerKind::Halton,
        seed: offset,
        n,
    })
}

/// Number of sampled columns for a sampling fraction: `round(fraction·n)`
/// clamped to `[k, n]`.
pub fn sample_count(fraction: f64, n: usize, k: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} must lie in (0, 1]"
        )));
    }
    if k > n {
        return Err(Error::RankTooLarge { k, l: n });
    }
    let l = (fraction * n as f64).round() as usize;
    Ok(l.clamp(k.max(1), n))
}

/// Draws a sample of the given kind. For Halton, trial seed `s` starts the
/// sequence at offset `s·l` so that successive trials use successive blocks.
pub fn draw_sample(
    kind: SamplerKind,
    grid: &GridSpec,
    l: usize,
    seed: u64,
) -> Result<SampleIndexSet> {
    match kind {
        SamplerKind::Uniform => sample_uniform(grid.len(), l, seed),
        SamplerKind::Halton => {
            let offset = seed
                .checked_mul(l as u64)
                .ok_or_else(|| Error::InvalidArgument("Halton offset overflow".into()))?;
            sample_halton(grid, l, offset)
        }
    }
}

/// Grid star-discrepancy: the largest gap, over all origin-anchored
/// rectangles of whole cells, between the share of samples inside and the
/// rectangle's share of the grid.
pub fn star_discrepancy(grid: &GridSpec, indices: &[usize]) -> f64 {
    let (nx, ny) = (grid.nx, grid.ny);
    // prefix[r][c] = samples with row < r and col < c
    let mut prefix = vec![0u32; (nx + 1) * (ny + 1)];
    for &i in indices {
        let (r, c) = grid.coords(i);
        prefix[(r + 1) * (nx + 1) + (c + 1)] += 1;
    }
    for r in 1..=ny {
        for c in 1..=nx {
            let k = r * (nx + 1) + c;
            prefix[k] += prefix[k - 1] + prefix[k - nx - 1] - prefix[k - nx - 2];
        }
    }
    let l = indices.len() as f64;
    let total = (nx * ny) as f64;
    let mut worst: f64 = 0.0;
    for r in 1..=ny {
        for c in 1..=nx {
            let inside = prefix[r * (nx + 1) + c] as f64 / l;
            worst = worst.max((inside - (r * c) as f64 / total).abs());
        }
    }
    worst
}
