//! Small linear-algebra kernels: banded matrices per grid line with LU
//! factorization (partial pivoting), a dense matrix for test oracles and
//! low-dimensional work, and a matrix-free BiCGStab.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular matrix at pivot {0}")]
    Singular(usize),
    #[error("iterative solve did not converge: residual {residual:.3e} after {iters} iterations")]
    NoConvergence { iters: usize, residual: f64 },
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Entry (i, i+off) for off in [-kl, ku] lives at `diags[off + kl][i]`.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    diags: Vec<Vec<f64>>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let diags = (0..kl + ku + 1).map(|_| vec![0.0; n]).collect();
        Banded { n, kl, ku, diags }
    }

    /// Identity scaled by `c`.
    pub fn scaled_identity(n: usize, kl: usize, ku: usize, c: f64) -> Self {
        let mut m = Self::zeros(n, kl, ku);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn kl(&self) -> usize {
        self.kl
    }
    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let off = j as isize - i as isize;
        if off < -(self.kl as isize) || off > self.ku as isize {
            0.0
        } else {
            self.diags[(off + self.kl as isize) as usize][i]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let off = j as isize - i as isize;
        assert!(
            off >= -(self.kl as isize) && off <= self.ku as isize,
            "entry ({i},{j}) outside band"
        );
        self.diags[(off + self.kl as isize) as usize][i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let off = j as isize - i as isize;
        assert!(
            off >= -(self.kl as isize) && off <= self.ku as isize,
            "entry ({i},{j}) outside band"
        );
        self.diags[(off + self.kl as isize) as usize][i] += v;
    }

    /// Zero out row `i`.
    pub fn clear_row(&mut self, i: usize) {
        for d in 0..self.diags.len() {
            self.diags[d][i] = 0.0;
        }
    }

    /// y = A x (y is overwritten).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let kl = self.kl as isize;
        for i in 0..self.n {
            let mut acc = 0.0;
            let lo = (i as isize - kl).max(0);
            let hi = (i as isize + self.ku as isize).min(self.n as isize - 1);
            for j in lo..=hi {
                acc += self.diags[(j - i as isize + kl) as usize][i] * x[j as usize];
            }
            y[i] = acc;
        }
    }

    /// y = A^T x.
    pub fn apply_transposed(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        let kl = self.kl as isize;
        for i in 0..self.n {
            let lo = (i as isize - kl).max(0);
            let hi = (i as isize + self.ku as isize).min(self.n as isize - 1);
            for j in lo..=hi {
                y[j as usize] += self.diags[(j - i as isize + kl) as usize][i] * x[i];
            }
        }
    }

    pub fn transpose(&self) -> Banded {
        let mut t = Banded::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                let v = self.get(i, j);
                if v != 0.0 {
                    t.set(j, i, v);
                }
            }
        }
        t
    }

    /// Scale every row by `s[i]` in place.
    pub fn scale_rows(&mut self, s: &[f64]) {
        for d in 0..self.diags.len() {
            for i in 0..self.n {
                self.diags[d][i] *= s[i];
            }
        }
    }

    /// self += c * other (bands must fit).
    pub fn axpy(&mut self, c: f64, other: &Banded) {
        for i in 0..self.n {
            let lo = i.saturating_sub(other.kl);
            let hi = (i + other.ku).min(self.n - 1);
            for j in lo..=hi {
                let v = other.get(i, j);
                if v != 0.0 {
                    self.add(i, j, c * v);
                }
            }
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        (lo..=hi).map(|j| self.get(i, j)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.diags
            .iter()
            .flat_map(|d| d.iter())
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Dense {
        let mut d = Dense::zeros(self.n, self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                d[(i, j)] = self.get(i, j);
            }
        }
        d
    }

    /// LU factorization with partial pivoting (LAPACK band layout with `kl`
    /// fill rows on top).
    pub fn factor(&self) -> Result<BandedLu, LinalgError> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let kv = kl + ku; // row index of the diagonal in the working array
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        // ab[r * n + j] = A[r - kv + j, j]
        for j in 0..n {
            let ilo = j.saturating_sub(ku);
            let ihi = (j + kl).min(n - 1);
            for i in ilo..=ihi {
                ab[(kv + i - j) * n + j] = self.get(i, j);
            }
        }
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let km = kl.min(n - 1 - j); // rows below the diagonal inside the band
            let mut jp = 0;
            let mut pmax = ab[kv * n + j].abs();
            for k in 1..=km {
                let v = ab[(kv + k) * n + j].abs();
                if v > pmax {
                    pmax = v;
                    jp = k;
                }
            }
            ipiv[j] = j + jp;
            let ju = (j + ku + kl).min(n - 1);
            if pmax == 0.0 {
                return Err(LinalgError::Singular(j));
            }
            if jp != 0 {
                // swap rows j and j+jp over columns j..=ju
                for c in j..=ju {
                    let r1 = (kv + j - c) as isize + jp as isize;
                    let r0 = kv as isize + j as isize - c as isize;
                    let (r0, r1) = (r0 as usize, r1 as usize);
                    ab.swap(r0 * n + c, r1 * n + c);
                }
            }
            let piv = ab[kv * n + j];
            if km > 0 {
                for k in 1..=km {
                    ab[(kv + k) * n + j] /= piv;
                }
                for c in j + 1..=ju {
                    let t = ab[(kv + j - c) * n + c];
                    if t != 0.0 {
                        for k in 1..=km {
                            ab[(kv + j + k - c) * n + c] -= ab[(kv + k) * n + j] * t;
                        }
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            ab,
            ipiv,
        })
    }
}

/// Factored form of [`Banded::factor`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let kl = self.kl;
        let kv = kl + self.ku;
        // L (unit lower, with row interchanges)
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            for k in 1..=km {
                b[j + k] -= self.ab[(kv + k) * n + j] * b[j];
            }
        }
        // U (upper, bandwidth kl+ku)
        for j in (0..n).rev() {
            b[j] /= self.ab[kv * n + j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                b[i] -= self.ab[(kv + i - j) * n + j] * b[j];
            }
        }
    }
}

/// Dense row-major matrix for oracles and low-dimensional work.
#[derive(Debug, Clone)]
pub struct Dense {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense {
            rows,
            cols,
            a: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for i in 0..self.rows {
            let row = &self.a[i * self.cols..(i + 1) * self.cols];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn transpose(&self) -> Dense {
        let mut t = Dense::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut out = Dense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self[(i, k)];
                if v == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += v * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&mut self, c: f64) {
        self.a.iter_mut().for_each(|v| *v *= c);
    }

    pub fn add_assign(&mut self, other: &Dense) {
        assert_eq!(self.a.len(), other.a.len());
        self.a.iter_mut().zip(&other.a).for_each(|(a, b)| *a += b);
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.a[i * self.cols..(i + 1) * self.cols].iter().sum()
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&self) -> Result<DenseLu, LinalgError> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.a.clone();
        let mut ipiv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut pmax = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(LinalgError::Singular(k));
            }
            ipiv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let m = a[i * n + k] / piv;
                a[i * n + k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= m * a[k * n + j];
                    }
                }
            }
        }
        Ok(DenseLu { n, a, ipiv })
    }

    /// A^{-1} via LU solves against identity columns.
    pub fn inverse(&self) -> Result<Dense, LinalgError> {
        let lu = self.factor()?;
        let n = self.rows;
        let mut inv = Dense::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            lu.solve(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    /// Adequate for the moderate norms met in the tests.
    pub fn expm(&self) -> Dense {
        assert_eq!(self.rows, self.cols);
        let norm = self
            .a
            .chunks(self.cols)
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        let s = norm.log2().ceil().max(0.0) as u32 + 4;
        let mut b = self.clone();
        b.scale(1.0 / f64::powi(2.0, s as i32));
        // Taylor to order 16 on the scaled matrix
        let n = self.rows;
        let mut result = Dense::identity(n);
        let mut term = Dense::identity(n);
        for k in 1..=16 {
            term = term.matmul(&b);
            term.scale(1.0 / k as f64);
            result.add_assign(&term);
        }
        for _ in 0..s {
            result = result.matmul(&result);
        }
        result
    }
}

impl std::ops::Index<(usize, usize)> for Dense {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Dense {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * self.cols + j]
    }
}

/// Factored form of [`Dense::factor`].
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    a: Vec<f64>,
    ipiv: Vec<usize>,
}

impl DenseLu {
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(k, p);
            }
        }
        for k in 0..n {
            for i in k + 1..n {
                b[i] -= self.a[i * n + k] * b[k];
            }
        }
        for k in (0..n).rev() {
            b[k] /= self.a[k * n + k];
            for i in 0..k {
                b[i] -= self.a[i * n + k] * b[k];
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
}

/// Right-preconditioned BiCGStab for `A x = b`.
///
/// `apply_a(x, y)` writes y = A x; `precond(r, z)` writes z = M^{-1} r.
/// `x` holds the initial guess on entry and the solution on exit.
pub fn bicgstab(
    apply_a: &mut dyn FnMut(&[f64], &mut [f64]),
    precond: &mut dyn FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<usize, LinalgError> {
    let n = b.len();
    let mut r = vec![0.0; n];
    apply_a(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = norm_inf(b).max(1e-300);
    if norm_inf(&r) <= tol * bnorm {
        return Ok(0);
    }
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iters {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            return Err(LinalgError::NoConvergence {
                iters: it,
                residual: norm_inf(&r) / bnorm,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut phat);
        apply_a(&phat, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm_inf(&s) <= tol * bnorm {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok(it);
        }
        precond(&s, &mut shat);
        apply_a(&shat, &mut t);
        omega = dot(&t, &s) / dot(&t, &t).max(1e-300);
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm_inf(&r) <= tol * bnorm {
            return Ok(it);
        }
        if omega.abs() < 1e-300 {
            break;
        }
    }
    Err(LinalgError::NoConvergence {
        iters: max_iters,
        residual: norm_inf(&r) / bnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> Banded {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = Banded::zeros(n, kl, ku);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
            // diagonal dominance keeps the systems well conditioned
            m.add(i, i, 4.0);
        }
        m
    }

    #[test]
    fn banded_lu_solves_against_dense() {
        for seed in 0..5 {
            let n = 17;
            let m = random_banded(n, 2, 2, seed);
            let lu = m.factor().unwrap();
            let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut b = vec![0.0; n];
            m.apply(&x_true, &mut b);
            lu.solve(&mut b);
            for i in 0..n {
                assert!((b[i] - x_true[i]).abs() < 1e-12, "i={i}");
            }
        }
    }

    #[test]
    fn transpose_roundtrip_and_apply() {
        let m = random_banded(11, 2, 1, 7);
        let t = m.transpose();
        let x: Vec<f64> = (0..11).map(|i| 1.0 + i as f64).collect();
        let mut y1 = vec![0.0; 11];
        let mut y2 = vec![0.0; 11];
        m.apply_transposed(&x, &mut y1);
        t.apply(&x, &mut y2);
        for i in 0..11 {
            assert!((y1[i] - y2[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn dense_inverse_2x2() {
        // worked 2x2 example: M = [[0.7,0.3],[0.2,0.8]]
        let mut m = Dense::zeros(2, 2);
        m[(0, 0)] = 0.7;
        m[(0, 1)] = 0.3;
        m[(1, 0)] = 0.2;
        m[(1, 1)] = 0.8;
        let inv = m.inverse().unwrap();
        assert!((inv[(0, 0)] - 1.6).abs() < 1e-14);
        assert!((inv[(0, 1)] + 0.6).abs() < 1e-14);
        assert!((inv[(1, 0)] + 0.4).abs() < 1e-14);
        assert!((inv[(1, 1)] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn expm_matches_scalar_exponential() {
        let mut m = Dense::zeros(2, 2);
        m[(0, 0)] = -0.3;
        m[(1, 1)] = 0.7;
        let e = m.expm();
        assert!((e[(0, 0)] - (-0.3_f64).exp()).abs() < 1e-12);
        assert!((e[(1, 1)] - 0.7_f64.exp()).abs() < 1e-12);
        assert!(e[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn bicgstab_solves_banded_system() {
        let n = 40;
        let m = random_banded(n, 2, 2, 3);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
        let mut b = vec![0.0; n];
        m.apply(&x_true, &mut b);
        let lu = Banded::scaled_identity(n, 0, 0, 4.0).factor().unwrap();
        let mut x = vec![0.0; n];
        let mut apply = |v: &[f64], y: &mut [f64]| m.apply(v, y);
        let mut pre = |r: &[f64], z: &mut [f64]| {
            z.copy_from_slice(r);
            lu.solve(z);
        };
        let iters = bicgstab(&mut apply, &mut pre, &b, &mut x, 1e-13, 200).unwrap();
        assert!(iters <= 200);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn banded_solve_random(seed in 0u64..50) {
            let n = 23;
            let m = random_banded(n, 2, 2, seed);
            let lu = m.factor().unwrap();
            let x_true: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.7 + seed as f64).sin()).collect();
            let mut b = vec![0.0; n];
            m.apply(&x_true, &mut b);
            lu.solve(&mut b);
            for i in 0..n {
                prop_assert!((b[i] - x_true[i]).abs() < 1e-10);
            }
        }
    }
}
