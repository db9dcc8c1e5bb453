//! Complex tridiagonal linear algebra: LU with partial pivoting, 1-norm
//! condition estimation, Arnoldi iteration, and a small dense complex
//! Hessenberg QR eigensolver.
//!
//! Everything here is sized for 1-d P1 finite-element systems: the matrices
//! are tridiagonal (solves are O(n)), and dense work only ever happens on
//! Krylov-sized Hessenberg matrices.

use crate::{C64, Error, Result};

fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Complex tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone)]
pub struct Tridiag {
    /// subdiagonal, length n-1
    pub dl: Vec<C64>,
    /// diagonal, length n
    pub d: Vec<C64>,
    /// superdiagonal, length n-1
    pub du: Vec<C64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            dl: vec![C64::new(0.0, 0.0); n.saturating_sub(1)],
            d: vec![C64::new(0.0, 0.0); n],
            du: vec![C64::new(0.0, 0.0); n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = self.d[i] * x[i];
            if i > 0 {
                acc += self.dl[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.du[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// `A^H x`.
    pub fn matvec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = self.d[i].conj() * x[i];
            if i + 1 < n {
                acc += self.dl[i].conj() * x[i + 1];
            }
            if i > 0 {
                acc += self.du[i - 1].conj() * x[i - 1];
            }
            y[i] = acc;
        }
        y
    }

    /// `self + c * other`, entrywise on the three diagonals.
    pub fn add_scaled(&self, c: C64, other: &Tridiag) -> Tridiag {
        assert_eq!(self.dim(), other.dim());
        Tridiag {
            dl: self
                .dl
                .iter()
                .zip(&other.dl)
                .map(|(a, b)| a + c * b)
                .collect(),
            d: self
                .d
                .iter()
                .zip(&other.d)
                .map(|(a, b)| a + c * b)
                .collect(),
            du: self
                .du
                .iter()
                .zip(&other.du)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    /// Matrix 1-norm (max absolute column sum).
    pub fn norm_1(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut s = self.d[j].norm();
                if j > 0 {
                    s += self.du[j - 1].norm();
                }
                if j + 1 < n {
                    s += self.dl[j].norm();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting (LAPACK `zgttrf` layout).
    pub fn factor(&self) -> Result<TriLu> {
        let n = self.dim();
        let mut dl = self.dl.clone();
        let mut d = self.d.clone();
        let mut du = self.du.clone();
        let mut du2 = vec![C64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let zero = C64::new(0.0, 0.0);
        for i in 0..n.saturating_sub(1) {
            if cabs1(d[i]) >= cabs1(dl[i]) {
                if d[i] != zero {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else if dl[i] == zero {
                    dl[i] = zero;
                } else {
                    return Err(Error::Singular);
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == zero {
            return Err(Error::Singular);
        }
        Ok(TriLu {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }
}

/// Pivoted LU factors of a [`Tridiag`].
#[derive(Debug, Clone)]
pub struct TriLu {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    swapped: Vec<bool>,
}

impl TriLu {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            let t = self.dl[i] * x[i];
            x[i + 1] -= t;
        }
        x[n - 1] /= self.d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }

    /// Solve `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        // forward: U^H y = b (U^H is lower with two subdiagonals)
        x[0] /= self.d[0].conj();
        if n >= 2 {
            x[1] = (x[1] - self.du[0].conj() * x[0]) / self.d[1].conj();
        }
        for i in 2..n {
            x[i] = (x[i] - self.du[i - 1].conj() * x[i - 1] - self.du2[i - 2].conj() * x[i - 2])
                / self.d[i].conj();
        }
        // backward: L^H with pivots applied in reverse
        for i in (0..n.saturating_sub(1)).rev() {
            if self.swapped[i] {
                let temp = x[i + 1];
                x[i + 1] = x[i] - self.dl[i].conj() * temp;
                x[i] = temp;
            } else {
                let t = self.dl[i].conj() * x[i + 1];
                x[i] -= t;
            }
        }
        x
    }

    /// Hager/Higham estimate of `||A^{-1}||_1` from the factorization.
    pub fn inv_norm_1_estimate(&self) -> f64 {
        let n = self.dim();
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = y.iter().map(|z| z.norm()).sum();
            let xi: Vec<C64> = y
                .iter()
                .map(|z| {
                    if z.norm() > 0.0 {
                        z / z.norm()
                    } else {
                        C64::new(1.0, 0.0)
                    }
                })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, 0.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            let zx: f64 = z
                .iter()
                .zip(&x)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
                .abs();
            if zmax <= zx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![C64::new(0.0, 0.0); n];
            x[j] = C64::new(1.0, 0.0);
        }
        est
    }

    /// Smallest singular value via power iteration on `A^{-1} A^{-H}`.
    pub fn sigma_min_estimate(&self, iters: usize) -> f64 {
        let n = self.dim();
        let mut v: Vec<C64> = (0..n)
            .map(|i| C64::new((i as f64 * 0.7391).sin() + 0.5, (i as f64 * 1.173).cos()))
            .collect();
        normalize(&mut v);
        let mut s2 = 0.0;
        for _ in 0..iters {
            let w = self.solve(&self.solve_adjoint(&v));
            s2 = v
                .iter()
                .zip(&w)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>();
            v = w;
            normalize(&mut v);
        }
        if s2 <= 0.0 {
            0.0
        } else {
            1.0 / s2.sqrt()
        }
    }
}

fn normalize(v: &mut [C64]) {
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for z in v.iter_mut() {
            *z /= nrm;
        }
    }
}

/// Arnoldi iteration: builds an orthonormal Krylov basis of `apply` and
/// returns the Ritz values of the projected Hessenberg matrix, sorted by
/// decreasing magnitude.
///
/// `apply` need not be a matrix; tridiagonal solve-and-multiply maps are the
/// intended use.  On happy breakdown the Ritz values are exact eigenvalues
/// of the restriction to the Krylov subspace found so far.
pub fn arnoldi_eigenvalues<F>(apply: F, n: usize, krylov_dim: usize, start: &[C64]) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    assert_eq!(start.len(), n);
    let m = krylov_dim.min(n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![C64::new(0.0, 0.0); m]; m + 1];
    let mut v0 = start.to_vec();
    normalize(&mut v0);
    basis.push(v0);
    let mut effective = m;
    for j in 0..m {
        let mut w = apply(&basis[j]);
        // modified Gram-Schmidt, two passes
        for _ in 0..2 {
            for (i, vi) in basis.iter().enumerate() {
                let coeff: C64 = vi
                    .iter()
                    .zip(&w)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                h[i][j] += coeff;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= coeff * vk;
                }
            }
        }
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        h[j + 1][j] = C64::new(nrm, 0.0);
        if nrm < 1e-13 {
            effective = j + 1;
            break;
        }
        for z in w.iter_mut() {
            *z /= nrm;
        }
        basis.push(w);
    }
    let mut square = vec![vec![C64::new(0.0, 0.0); effective]; effective];
    for i in 0..effective {
        for j in 0..effective {
            square[i][j] = h[i][j];
        }
    }
    let mut eigs = hessenberg_eigenvalues(square)?;
    eigs.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    Ok(eigs)
}

/// Eigenvalues of a small dense complex upper Hessenberg matrix by explicit
/// single-shift QR with Wilkinson shifts and deflation.
pub fn hessenberg_eigenvalues(mut h: Vec<Vec<C64>>) -> Result<Vec<C64>> {
    let n = h.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols [lo, hi)
    let eps = f64::EPSILON;
    let max_sweeps = 60 * n + 200;
    let mut sweeps = 0usize;
    while hi > 0 {
        // deflate negligible subdiagonals
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[lo - 1][lo - 1].norm() + h[lo][lo].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[lo][lo - 1].norm() <= eps * s {
                h[lo][lo - 1] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs.push(h[lo][lo]);
            hi -= 1;
            continue;
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::Eigen(format!(
                "Hessenberg QR did not converge after {max_sweeps} sweeps"
            )));
        }
        // Wilkinson shift from the trailing 2x2 of the active block
        let a = h[hi - 2][hi - 2];
        let b = h[hi - 2][hi - 1];
        let c = h[hi - 1][hi - 2];
        let d = h[hi - 1][hi - 1];
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        let mut mu = if (l1 - d).norm() < (l2 - d).norm() {
            l1
        } else {
            l2
        };
        // exceptional shift every 12 sweeps to break symmetry stalls
        if sweeps % 12 == 0 {
            mu += C64::new(h[hi - 1][hi - 2].norm(), 0.0);
        }
        // explicit shifted QR step on the active block via Givens rotations
        let m = hi - lo;
        for i in lo..hi {
            h[i][i] -= mu;
        }
        let mut rot = Vec::with_capacity(m - 1);
        for i in lo..hi - 1 {
            let (cs, sn) = givens(h[i][i], h[i + 1][i]);
            apply_givens_left(&mut h, i, i + 1, cs, sn, lo, hi);
            rot.push((i, cs, sn));
        }
        for &(i, cs, sn) in &rot {
            apply_givens_right(&mut h, i, i + 1, cs, sn, lo, hi);
        }
        for i in lo..hi {
            h[i][i] += mu;
        }
    }
    Ok(eigs)
}

/// Complex Givens rotation zeroing `b`: returns `(c, s)` with `c` real,
/// such that `[c, s; -conj(s), c] [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    if b.norm() == 0.0 {
        (1.0, C64::new(0.0, 0.0))
    } else if a.norm() == 0.0 {
        (0.0, b.conj() / b.norm())
    } else {
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let c = a.norm() / r;
        let s = (a / a.norm()) * b.conj() / r;
        (c, s)
    }
}

fn apply_givens_left(h: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: C64, lo: usize, hi: usize) {
    for col in lo..hi {
        let hi_c = h[i][col];
        let hj_c = h[j][col];
        h[i][col] = c * hi_c + s * hj_c;
        h[j][col] = -s.conj() * hi_c + c * hj_c;
    }
}

fn apply_givens_right(h: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: C64, lo: usize, hi: usize) {
    for row in lo..hi {
        let h_ri = h[row][i];
        let h_rj = h[row][j];
        h[row][i] = c * h_ri + s.conj() * h_rj;
        h[row][j] = -s * h_ri + c * h_rj;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_tridiag(n: usize, rng: &mut ChaCha8Rng) -> Tridiag {
        let mut t = Tridiag::zeros(n);
        for i in 0..n {
            t.d[i] = C64::new(rng.gen::<f64>() + 1.0, rng.gen::<f64>() - 0.5);
        }
        for i in 0..n - 1 {
            t.dl[i] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            t.du[i] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        t
    }

    #[test]
    fn lu_solve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 3, 17, 200] {
            let a = random_tridiag(n, &mut rng);
            let b: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let lu = a.factor().unwrap();
            let x = lu.solve(&b);
            let r = a.matvec(&x);
            let err: f64 = r
                .iter()
                .zip(&b)
                .map(|(u, v)| (u - v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let bn: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(err / bn < 1e-12, "n = {n}: rel residual {}", err / bn);
        }
    }

    #[test]
    fn adjoint_solve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 50;
        let a = random_tridiag(n, &mut rng);
        let b: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let lu = a.factor().unwrap();
        let x = lu.solve_adjoint(&b);
        let r = a.matvec_adjoint(&x);
        let err: f64 = r
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-11, "adjoint residual {err}");
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs a row swap
        let mut a = Tridiag::zeros(2);
        a.du[0] = C64::new(1.0, 0.0);
        a.dl[0] = C64::new(1.0, 0.0);
        let lu = a.factor().unwrap();
        let x = lu.solve(&[C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        assert_abs_diff_eq!(x[0].re, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1].re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = Tridiag::zeros(3);
        assert!(matches!(a.factor(), Err(Error::Singular)));
    }

    #[test]
    fn condition_estimate_order_of_magnitude() {
        // diag(1, 1e-6): cond_1 = 1e6
        let mut a = Tridiag::zeros(2);
        a.d[0] = C64::new(1.0, 0.0);
        a.d[1] = C64::new(1e-6, 0.0);
        let lu = a.factor().unwrap();
        let cond = a.norm_1() * lu.inv_norm_1_estimate();
        assert!((0.5e6..2e6).contains(&cond), "cond = {cond}");
    }

    #[test]
    fn sigma_min_of_diagonal() {
        let mut a = Tridiag::zeros(3);
        a.d[0] = C64::new(3.0, 0.0);
        a.d[1] = C64::new(0.01, 0.0);
        a.d[2] = C64::new(1.0, 0.0);
        let lu = a.factor().unwrap();
        assert_abs_diff_eq!(lu.sigma_min_estimate(100), 0.01, epsilon = 1e-6);
    }

    #[test]
    fn hessenberg_eigenvalues_known() {
        // companion matrix of z^3 - 6z^2 + 11z - 6 = (z-1)(z-2)(z-3)
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let h = vec![
            vec![C64::new(6.0, 0.0), C64::new(-11.0, 0.0), C64::new(6.0, 0.0)],
            vec![one, z, z],
            vec![z, one, z],
        ];
        let mut eigs = hessenberg_eigenvalues(h).unwrap();
        eigs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (e, want) in eigs.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(e.re, want, epsilon = 1e-9);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn hessenberg_complex_spectrum() {
        // 2x2 rotation-like complex matrix with eigenvalues 1 +/- 2i
        let h = vec![
            vec![C64::new(1.0, 0.0), C64::new(-2.0, 0.0)],
            vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0)],
        ];
        let mut eigs = hessenberg_eigenvalues(h).unwrap();
        eigs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_abs_diff_eq!(eigs[0].im, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1].im, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn arnoldi_recovers_dominant_eigenvalues() {
        // diagonal operator with known spectrum
        let n = 200;
        let diag: Vec<C64> = (0..n)
            .map(|i| C64::new(1.0 / (i + 1) as f64, 0.5 / (i + 1) as f64))
            .collect();
        let apply = |v: &[C64]| -> Vec<C64> {
            v.iter().zip(&diag).map(|(x, d)| x * d).collect()
        };
        let start: Vec<C64> = (0..n).map(|i| C64::new(1.0 + i as f64 * 1e-3, 0.3)).collect();
        let eigs = arnoldi_eigenvalues(apply, n, 40, &start).unwrap();
        assert_abs_diff_eq!(eigs[0].re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[0].im, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[1].re, 0.5, epsilon = 1e-8);
    }
}
