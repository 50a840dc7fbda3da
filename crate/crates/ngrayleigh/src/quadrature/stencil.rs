//! Finite-difference weights and sparse row operators.

/// Fornberg's recursion: weights at `z` for derivatives `0..=m` on the
/// points `xs`. Entry `[k][j]` multiplies `f(xs[j])` in the `k`-th derivative.
pub(crate) fn fornberg(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Half-width of every stencil; the schemes are sixth order.
pub(crate) const HALF: usize = 3;

/// Centred weights for offsets `-3..=3`: (first, second) derivative, unit spacing.
pub(crate) fn centred() -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (-(HALF as i64)..=HALF as i64).map(|o| o as f64).collect();
    let c = fornberg(0.0, &xs, 2);
    (c[1].clone(), c[2].clone())
}

/// A linear map stored as explicit rows of `(column, coefficient)`.
#[derive(Debug, Clone)]
pub(crate) struct RowOperator {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl RowOperator {
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, c)| c * u[j]).sum())
            .collect()
    }

    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (row, &vi) in self.rows.iter().zip(v) {
            for &(j, c) in row {
                out[j] += c * vi;
            }
        }
        out
    }
}

/// Adds `c` to the entry for column `j`, merging folded ghost contributions.
pub(crate) fn push(row: &mut Vec<(usize, f64)>, j: usize, c: f64) {
    if let Some(e) = row.iter_mut().find(|e| e.0 == j) {
        e.1 += c;
    } else {
        row.push((j, c));
    }
}

/// Maps a possibly negative node index through the even reflection about
/// `r = 0`: the ghost at index `-1 - k` carries the value of node `k`.
pub(crate) fn fold(j: i64) -> i64 {
    if j < 0 {
        -1 - j
    } else {
        j
    }
}
