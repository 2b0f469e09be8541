//! The vortical interaction network as an implicit matrix.
//!
//! `A_ij = ½(|u_{i→j}| + |u_{j→i}|) = (|Γ_i| + |Γ_j|) / (4π d_ij)` for `i ≠ j`,
//! zero on the diagonal, with `Γ_i = ω_i·dx·dy` and `d_ij` the distance
//! between node positions. Columns are generated on demand; the dense matrix
//! is only built when explicitly requested and under a memory cap.

use std::f64::consts::PI;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::field::VorticityField;
use crate::par;

const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone)]
pub struct AdjacencyOperator {
    field: VorticityField,
    circulation: Vec<f64>,
    abs_circulation: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl AdjacencyOperator {
    pub fn new(field: VorticityField) -> Self {
        let grid = *field.grid();
        let area = grid.cell_area();
        let circulation: Vec<f64> = field.omega().iter().map(|w| w * area).collect();
        let abs_circulation = circulation.iter().map(|g| g.abs()).collect();
        let (xs, ys) = (0..grid.len()).map(|i| grid.position(i)).unzip();
        Self {
            field,
            circulation,
            abs_circulation,
            xs,
            ys,
        }
    }

    pub fn field(&self) -> &VorticityField {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.circulation.len()
    }

    pub fn circulation(&self) -> &[f64] {
        &self.circulation
    }

    fn check(&self, index: usize) -> Result<()> {
        if index < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfBounds {
                index,
                n: self.n(),
            })
        }
    }

    #[inline]
    fn distance(&self, i: usize, j: usize) -> f64 {
        let dx = self.xs[i] - self.xs[j];
        let dy = self.ys[i] - self.ys[j];
        (dx * dx + dy * dy).sqrt()
    }

    /// Signed velocity magnitude induced by node `i` at node `j`.
    pub fn induced_velocity(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(Error::SelfInteraction(i));
        }
        Ok(self.circulation[i] / (TWO_PI * self.distance(i, j)))
    }

    /// Unchecked entry; the one evaluation order shared by every access path.
    #[inline]
    pub(crate) fn value(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            (self.abs_circulation[i] + self.abs_circulation[j]) / (FOUR_PI * self.distance(i, j))
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.value(i, j))
    }

    /// Writes column `j` into `out` in O(n) time.
    pub fn column(&self, j: usize, out: &mut [f64]) -> Result<()> {
        self.check(j)?;
        if out.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: out.len(),
            });
        }
        self.fill_column(j, out);
        Ok(())
    }

    #[inline]
    fn fill_column(&self, j: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.value(i, j);
        }
    }

    /// `C = A(:, J)` as an `n × l` matrix; columns are generated in parallel.
    pub fn columns(&self, indices: &[usize]) -> Result<Mat<f64>> {
        for &j in indices {
            self.check(j)?;
        }
        let n = self.n();
        let mut buf = vec![0.0; n * indices.len()];
        if n > 0 {
            par::for_each_chunk_mut(&mut buf, n, |c, out| self.fill_column(indices[c], out));
        }
        Ok(MatRef::from_column_major_slice(&buf, n, indices.len()).to_owned())
    }

    /// Dense `n × n` matrix, refused when it would need more than `cap_bytes`.
    pub fn materialize(&self, cap_bytes: u128) -> Result<Mat<f64>> {
        let needed = memory_estimate(self.n());
        if needed > cap_bytes {
            return Err(Error::MemoryCapExceeded {
                needed,
                cap: cap_bytes,
            });
        }
        let all: Vec<usize> = (0..self.n()).collect();
        self.columns(&all)
    }

    /// `s_i = Σ_j A_ij`, accumulated in ascending `j` without materializing `A`.
    pub fn node_strength(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        par::fill_with(&mut out, |i| (0..n).map(|j| self.value(i, j)).sum());
        out
    }

    /// Matrix-free product `y = A x`; each `y_i` is summed in ascending `j`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        par::fill_with(y, |i| {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.value(i, j) * xj;
            }
            acc
        });
    }
}

/// Bytes needed to store a dense `n × n` matrix of f64.
pub fn memory_estimate(n: usize) -> u128 {
    let n = n as u128;
    n * n * 8
}

pub const GIB: f64 = 1024.0 * 1024.0 * 1024.0;

pub fn bytes_to_gib(bytes: u128) -> f64 {
    bytes as f64 / GIB
}
