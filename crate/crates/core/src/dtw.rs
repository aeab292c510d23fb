//! Dynamic time warping between univariate sequences.
//!
//! Local cost is the squared difference `(x_u - y_v)^2`; the cumulative cost follows the
//! classic three-predecessor recurrence
//!
//! ```text
//! D[u, v] = C[u, v] + min(D[u-1, v], D[u, v-1], D[u-1, v-1])
//! ```
//!
//! with `D[0, 0] = C[0, 0]` and the first row/column accumulated along their single
//! predecessor. The distance is `sqrt(D[Tx-1, Ty-1])`. Nothing is normalized by path
//! length and inputs are compared raw.

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DtwError {
    #[error("dtw input is empty")]
    Empty,
    #[error("dtw input contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("dtw failed for pair ({row}, {col}): {source}")]
    Pair {
        row: usize,
        col: usize,
        #[source]
        source: Box<DtwError>,
    },
}

fn check(x: &[f64]) -> Result<(), DtwError> {
    if x.is_empty() {
        return Err(DtwError::Empty);
    }
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(DtwError::NonFinite(i)),
        None => Ok(()),
    }
}

/// DTW distance with no warping window.
pub fn dtw_distance(x: &[f64], y: &[f64]) -> Result<f64, DtwError> {
    dtw_distance_banded(x, y, None)
}

/// DTW distance restricted to cells with `|u - v| <= band`.
///
/// The band is widened to `|Tx - Ty|` when narrower, so the end cell is always
/// reachable. `None` disables the window.
pub fn dtw_distance_banded(x: &[f64], y: &[f64], band: Option<usize>) -> Result<f64, DtwError> {
    check(x)?;
    check(y)?;
    let band = band.map(|b| b.max(x.len().abs_diff(y.len())));
    Ok(cumulative_cost(x, y, band).sqrt())
}

/// Final cumulative cost using two rolling rows over `y`.
fn cumulative_cost(x: &[f64], y: &[f64], band: Option<usize>) -> f64 {
    let cols = y.len();
    let mut prev = vec![f64::INFINITY; cols];
    let mut curr = vec![f64::INFINITY; cols];
    for (u, &xu) in x.iter().enumerate() {
        let (lo, hi) = match band {
            Some(b) => (u.saturating_sub(b), (u + b).min(cols - 1)),
            None => (0, cols - 1),
        };
        curr.fill(f64::INFINITY);
        for v in lo..=hi {
            let cost = (xu - y[v]) * (xu - y[v]);
            curr[v] = if u == 0 && v == 0 {
                cost
            } else if u == 0 {
                cost + curr[v - 1]
            } else if v == 0 {
                cost + prev[v]
            } else {
                cost + prev[v].min(curr[v - 1]).min(prev[v - 1])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[cols - 1]
}

/// Distances between every `a[n]` and `b[m]`, row-major by `a`.
///
/// Rows are computed in parallel; each cell is an independent call to [`dtw_distance`],
/// so the result equals the sequential double loop exactly.
pub fn pairwise_distances<A, B>(a: &[A], b: &[B]) -> Result<Vec<Vec<f64>>, DtwError>
where
    A: AsRef<[f64]> + Sync,
    B: AsRef<[f64]> + Sync,
{
    a.par_iter()
        .enumerate()
        .map(|(n, x)| {
            b.iter()
                .enumerate()
                .map(|(m, y)| {
                    dtw_distance(x.as_ref(), y.as_ref()).map_err(|e| DtwError::Pair {
                        row: n,
                        col: m,
                        source: Box::new(e),
                    })
                })
                .collect()
        })
        .collect()
}

/// Full local cost matrix. Used for inspection and tests; the distance itself never
/// materializes it.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

impl CostMatrix {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self, DtwError> {
        check(x)?;
        check(y)?;
        let cells = x
            .iter()
            .flat_map(|&xu| y.iter().map(move |&yv| (xu - yv) * (xu - yv)))
            .collect();
        Ok(Self {
            rows: x.len(),
            cols: y.len(),
            cells,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.cells[u * self.cols + v]
    }
}

/// Full cumulative cost matrix built from a [`CostMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

impl CumulativeMatrix {
    pub fn from_cost(cost: &CostMatrix) -> Self {
        let (rows, cols) = (cost.rows, cost.cols);
        let mut cells = vec![0.0; rows * cols];
        for u in 0..rows {
            for v in 0..cols {
                let c = cost.get(u, v);
                cells[u * cols + v] = match (u, v) {
                    (0, 0) => c,
                    (0, _) => c + cells[v - 1],
                    (_, 0) => c + cells[(u - 1) * cols],
                    _ => {
                        let up = cells[(u - 1) * cols + v];
                        let left = cells[u * cols + v - 1];
                        let diag = cells[(u - 1) * cols + v - 1];
                        c + up.min(left).min(diag)
                    }
                };
            }
        }
        Self { rows, cols, cells }
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.cells[u * self.cols + v]
    }

    pub fn distance(&self) -> f64 {
        self.get(self.rows - 1, self.cols - 1).sqrt()
    }
}
