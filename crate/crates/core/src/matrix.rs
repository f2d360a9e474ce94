//! Row-stochastic matrices with validated construction.
//!
//! Construction clamps near-zero entries to exact zero and renormalizes
//! rows, so downstream code can rely on two invariants: structural zeros are
//! bitwise `0.0`, and every row sums to 1 up to a few ulps.  The transform
//! is idempotent: validating an already-validated matrix changes nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vertex_set::VertexSet;

/// Numeric tolerances used during validation and structural checks.
/// All three must be finite, non-negative and below `1e-3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed deviation of raw row sums (and column sums when checking
    /// double stochasticity) from 1.
    #[serde(default = "Tolerances::default_row_sum_tol")]
    pub row_sum_tol: f64,
    /// Entries with absolute value at or below this are clamped to exact 0.
    #[serde(default = "Tolerances::default_zero_tol")]
    pub zero_tol: f64,
    /// Allowed disagreement when comparing quantities that must be equal,
    /// such as per-row block sums under common influence.
    #[serde(default = "Tolerances::default_equality_tol")]
    pub equality_tol: f64,
}

impl Tolerances {
    const MAX: f64 = 1e-3;

    fn default_row_sum_tol() -> f64 {
        1e-9
    }

    fn default_zero_tol() -> f64 {
        1e-12
    }

    fn default_equality_tol() -> f64 {
        1e-9
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("row_sum_tol", self.row_sum_tol),
            ("zero_tol", self.zero_tol),
            ("equality_tol", self.equality_tol),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 || value >= Self::MAX {
                return Err(Error::ToleranceOutOfRange {
                    name,
                    value,
                    max: Self::MAX,
                });
            }
        }
        Ok(())
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            row_sum_tol: Self::default_row_sum_tol(),
            zero_tol: Self::default_zero_tol(),
            equality_tol: Self::default_equality_tol(),
        }
    }
}

/// A validated `n x n` row-stochastic matrix with a display name.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    name: String,
    n: usize,
    /// Row-major entries; structural zeros are exact `0.0`.
    entries: Vec<f64>,
    tol: Tolerances,
}

/// Row sums after renormalization land within a few ulps of 1; anything
/// inside this band is left untouched so that validation is idempotent.
const RENORM_SKIP_ULPS: f64 = 64.0;

impl StochasticMatrix {
    /// Validates `rows` and builds the matrix.
    ///
    /// Checks, in order: square shape, finiteness, no entry below
    /// `-zero_tol`, every raw row sum within `row_sum_tol` of 1.  Entries
    /// with absolute value at or below `zero_tol` are then clamped to exact
    /// 0 and each row is renormalized; clamping and renormalization repeat
    /// until stable.
    pub fn from_rows(name: impl Into<String>, rows: Vec<Vec<f64>>, tol: Tolerances) -> Result<Self> {
        let name = name.into();
        tol.validate()?;
        let n = rows.len();
        if n == 0 {
            return Err(Error::NonSquare {
                name,
                rows: 0,
                row: 0,
                cols: 0,
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NonSquare {
                    name,
                    rows: n,
                    row: i,
                    cols: row.len(),
                });
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in &rows {
            entries.extend_from_slice(row);
        }
        for (idx, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    name,
                    row: idx / n,
                    col: idx % n,
                    value: v,
                });
            }
            if v < -tol.zero_tol {
                return Err(Error::NegativeEntry {
                    name,
                    row: idx / n,
                    col: idx % n,
                    value: v,
                    zero_tol: tol.zero_tol,
                });
            }
        }
        for i in 0..n {
            let sum: f64 = entries[i * n..(i + 1) * n].iter().sum();
            if (sum - 1.0).abs() > tol.row_sum_tol {
                return Err(Error::RowSumViolation {
                    name,
                    row: i,
                    sum,
                    row_sum_tol: tol.row_sum_tol,
                });
            }
        }
        for i in 0..n {
            clean_row(&mut entries[i * n..(i + 1) * n], tol.zero_tol);
        }
        Ok(StochasticMatrix {
            name,
            n,
            entries,
            tol,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> Tolerances {
        self.tol
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Support of row `i`: column indices with strictly positive entries.
    /// After validation this coincides with entries above `zero_tol`.
    pub fn row_support(&self, i: usize) -> VertexSet {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    /// `self * other`, revalidated through the same clamp/renormalize path.
    pub fn product(&self, other: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
                context: "matrix product",
            });
        }
        let n = self.n;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let other_row = other.row(k);
                for j in 0..n {
                    rows[i][j] += a * other_row[j];
                }
            }
        }
        StochasticMatrix::from_rows(format!("{}*{}", self.name, other.name), rows, self.tol)
    }

    /// Whether every column also sums to 1 within `row_sum_tol`.
    pub fn is_doubly_stochastic(&self) -> bool {
        (0..self.n).all(|j| {
            let sum: f64 = (0..self.n).map(|i| self.get(i, j)).sum();
            (sum - 1.0).abs() <= self.tol.row_sum_tol
        })
    }

    /// Whether every diagonal entry is strictly positive.
    pub fn has_positive_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) > 0.0)
    }

    /// Whether the zero pattern is symmetric: `p_ij > 0` iff `p_ji > 0`.
    pub fn has_symmetric_pattern(&self) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) > 0.0) != (self.get(j, i) > 0.0) {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest strictly positive entry.  Always exists: every row sums
    /// to 1, so each row carries at least one positive entry.
    pub fn min_positive_entry(&self) -> f64 {
        self.entries
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest constant `C >= 1` such that for every vertex cut `S`, the
    /// total mass leaving `S` is at most `C` times the mass entering it:
    /// `sum_{i in S, j notin S} p_ij <= C * sum_{i notin S, j in S} p_ji`.
    ///
    /// Returns `None` when no such constant exists, i.e. some cut has
    /// positive forward mass and zero reverse mass.  Cuts with zero mass in
    /// both directions impose nothing; a matrix with no cross-cut mass at
    /// all (such as the identity) gets `C = 1`.  Exhausts all `2^n` cuts,
    /// so the dimension is capped.
    pub fn cut_balance(&self) -> Result<Option<f64>> {
        const CAP: usize = 20;
        let n = self.n;
        if n > CAP {
            return Err(Error::DimensionTooLarge {
                n,
                cap: CAP,
                context: "cut balance enumeration",
            });
        }
        // forward[m] = total mass from vertices in m to vertices outside m.
        let size = 1usize << n;
        let mut forward = vec![0.0f64; size];
        for m in 0..size {
            let mut total = 0.0;
            for i in 0..n {
                if m & (1 << i) == 0 {
                    continue;
                }
                for j in 0..n {
                    if m & (1 << j) == 0 {
                        total += self.get(i, j);
                    }
                }
            }
            forward[m] = total;
        }
        let mut best = 1.0f64;
        let full = size - 1;
        for m in 1..full {
            let f = forward[m];
            let r = forward[full & !m];
            if f <= 0.0 {
                continue;
            }
            if r <= 0.0 {
                return Ok(None);
            }
            best = best.max(f / r);
        }
        Ok(Some(best))
    }
}

/// Clamp near-zeros and renormalize until stable.  Division can push a
/// previously clean entry under the clamp threshold, hence the loop; it
/// terminates because each clamping pass zeroes at least one more entry.
fn clean_row(row: &mut [f64], zero_tol: f64) {
    loop {
        let mut changed = false;
        for v in row.iter_mut() {
            if *v != 0.0 && *v <= zero_tol {
                *v = 0.0;
                changed = true;
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > RENORM_SKIP_ULPS * f64::EPSILON {
            for v in row.iter_mut() {
                *v /= sum;
            }
            changed = true;
        }
        if !changed {
            return;
        }
    }
}
