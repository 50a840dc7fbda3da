//! Small dense and banded direct solvers.
//!
//! Every linear system in the crate is either tiny (quadrature correction
//! weights) or a radial operator with half-bandwidth three, so a general
//! sparse package would be dead weight.

/// Solves `a x = b` in place for a row-major `n x n` matrix by Gaussian
/// elimination with partial pivoting. Returns `None` for a singular matrix.
pub fn solve_dense(a: &mut [f64], b: &mut [f64]) -> Option<()> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))?;
        if a[piv * n + k] == 0.0 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        for i in k + 1..n {
            let l = a[i * n + k] / a[k * n + k];
            if l == 0.0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] -= l * a[k * n + j];
            }
            b[i] -= l * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k * n + j] * b[j];
        }
        b[k] = s / a[k * n + k];
    }
    Some(())
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Rows are stored with `kl` extra super-diagonals of headroom so the LU
/// factorisation with row pivoting can run in place.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)`. Panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, &v) in d.iter().enumerate() {
            self.add(i, i, v);
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = 0.0;
            for j in lo..=hi {
                s += self.data[self.idx(i, j)] * x[j];
            }
            y[i] = s;
        }
    }

    /// LU factorisation with partial pivoting. `None` when singular.
    pub fn factor(mut self) -> Option<BandedLu> {
        let n = self.n;
        let reach = self.kl + self.ku;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            piv[k] = p;
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Some(BandedLu { m: self, piv })
    }
}

/// Factored form of a [`BandedMatrix`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.m.n
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.m;
        let n = m.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + m.kl).min(n - 1) {
                b[i] -= m.data[m.idx(i, k)] * bk;
            }
        }
        let reach = m.kl + m.ku;
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= m.data[m.idx(k, j)] * b[j];
            }
            b[k] = s / m.data[m.idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves the bordered system
    ///
    /// ```text
    /// [ A   col ] [x]   [rhs]
    /// [ rowᵀ  d ] [s] = [rhs_s]
    /// ```
    ///
    /// by block elimination. `None` if the Schur complement vanishes.
    pub fn solve_bordered(
        &self,
        col: &[f64],
        row: &[f64],
        d: f64,
        rhs: &[f64],
        rhs_s: f64,
    ) -> Option<(Vec<f64>, f64)> {
        let y = self.solve(rhs);
        let z = self.solve(col);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let schur = d - dot(row, &z);
        if schur == 0.0 || !schur.is_finite() {
            return None;
        }
        let s = (rhs_s - dot(row, &y)) / schur;
        let x = y.iter().zip(&z).map(|(yi, zi)| yi - zi * s).collect();
        Some((x, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> BandedMatrix {
        let mut a = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, 2.0 + i as f64 * 0.01);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.3);
            }
        }
        a
    }

    #[test]
    fn banded_solve_matches_product() {
        let n = 40;
        let a = tridiag(n);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&x, &mut b);
        let lu = a.factor().unwrap();
        let sol = lu.solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0,1],[1,0]] needs a row swap.
        let mut a = BandedMatrix::zeros(2, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        let lu = a.factor().unwrap();
        let x = lu.solve(&[3.0, 5.0]);
        assert_eq!(x, vec![5.0, 3.0]);
    }

    #[test]
    fn bordered_matches_dense() {
        let n = 12;
        let a = tridiag(n);
        let col: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let row: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let d = 0.7;
        let rhs: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let rhs_s = 2.0;

        let m = n + 1;
        let mut dense = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                dense[i * m + j] = a.get(i, j);
            }
            dense[i * m + n] = col[i];
            dense[n * m + i] = row[i];
        }
        dense[n * m + n] = d;
        let mut b: Vec<f64> = rhs.clone();
        b.push(rhs_s);
        solve_dense(&mut dense, &mut b).unwrap();

        let (x, s) = a.factor().unwrap().solve_bordered(&col, &row, d, &rhs, rhs_s).unwrap();
        for i in 0..n {
            assert!((x[i] - b[i]).abs() < 1e-10 * (1.0 + b[i].abs()), "{} vs {}", x[i], b[i]);
        }
        assert!((s - b[n]).abs() < 1e-12);
    }

    #[test]
    fn singular_dense_detected() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 1.0];
        assert!(solve_dense(&mut a, &mut b).is_none());
    }
}
