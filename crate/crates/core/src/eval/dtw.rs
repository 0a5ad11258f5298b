use ndarray::{ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone alignment between two frame sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtwPath {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

pub(crate) fn euclidean(a: ArrayView1<'_, f32>, b: ArrayView1<'_, f32>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Aligns the frames (columns) of `a` and `b` minimising the summed
/// Euclidean distance, with steps (1,1), (1,0) and (0,1).
///
/// Equal-cost predecessors resolve to the diagonal first, then to the step
/// that advances `a` only.
pub fn dtw_align(a: ArrayView2<'_, f32>, b: ArrayView2<'_, f32>) -> Result<DtwPath> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "DTW feature dimensions differ: {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let (n, m) = (a.ncols(), b.ncols());
    if n == 0 || m == 0 {
        return Err(Error::Empty(
            "DTW needs at least one frame on each side".into(),
        ));
    }

    let mut cost = vec![f64::INFINITY; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        let fa = a.index_axis(Axis(1), i);
        for j in 0..m {
            let d = euclidean(fa, b.index_axis(Axis(1), j));
            let prev = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    cost[at(i - 1, j - 1)]
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 {
                    cost[at(i - 1, j)]
                } else {
                    f64::INFINITY
                };
                let left = if j > 0 {
                    cost[at(i, j - 1)]
                } else {
                    f64::INFINITY
                };
                diag.min(up).min(left)
            };
            cost[at(i, j)] = d + prev;
        }
    }

    let mut pairs = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 {
            cost[at(i - 1, j - 1)]
        } else {
            f64::INFINITY
        };
        let up = if i > 0 {
            cost[at(i - 1, j)]
        } else {
            f64::INFINITY
        };
        let left = if j > 0 {
            cost[at(i, j - 1)]
        } else {
            f64::INFINITY
        };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        pairs.push((i, j));
    }
    pairs.reverse();
    Ok(DtwPath {
        pairs,
        total_cost: cost[at(n - 1, m - 1)],
    })
}
