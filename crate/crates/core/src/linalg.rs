//! Small dense linear algebra: complex 2x2 / 4x4 matrices, a cyclic Jacobi
//! eigensolver for real symmetric matrices, Hermitian eigendecomposition via
//! the real embedding, complex Cholesky, and Gaussian elimination.
//!
//! Everything here is sized for two-qubit work (n <= 16), where a dependency
//! on a full linear-algebra stack buys nothing.

use crate::scalar::{czero, Real, C};

/// 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub m: [[C<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub fn identity() -> Self {
        let o = C::new(T::one(), T::zero());
        let z = czero();
        Self::new(o, z, z, o)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = [[czero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        Self { m: out }
    }

    pub fn mul_vec(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn det(&self) -> C<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Max-element residual of `U^dagger U - I`.
    pub fn unitarity_residual(&self) -> T {
        let p = self.adjoint().mul(self);
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { T::one() } else { T::zero() };
                let d = (p.m[i][j] - C::new(target, T::zero())).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// 4x4 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4<T> {
    pub m: [[C<T>; 4]; 4],
}

impl<T: Real> Mat4<T> {
    pub fn zero() -> Self {
        Self {
            m: [[czero(); 4]; 4],
        }
    }

    pub fn identity() -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            out.m[i][i] = C::new(T::one(), T::zero());
        }
        out
    }

    pub fn from_rows(m: [[C<T>; 4]; 4]) -> Self {
        Self { m }
    }

    /// Outer product `v v^dagger`.
    pub fn outer(v: [C<T>; 4]) -> Self {
        let mut out = Self::zero();
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                out.m[i][j] = *vi * vj.conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = czero();
                for (k, rrow) in rhs.m.iter().enumerate() {
                    acc += self.m[i][k] * rrow[j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: [C<T>; 4]) -> [C<T>; 4] {
        let mut out = [czero(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = czero();
            for (k, vk) in v.iter().enumerate() {
                acc += self.m[i][k] * *vk;
            }
            *o = acc;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C<T> {
        self.m[0][0] + self.m[1][1] + self.m[2][2] + self.m[3][3]
    }

    /// Max-element residual of `A - A^dagger`.
    pub fn hermiticity_residual(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let d = (self.m[i][j] - self.m[j][i].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// `(A + A^dagger) / 2`.
    pub fn symmetrized(&self) -> Self {
        let half = C::new(T::of(0.5), T::zero());
        self.add(&self.adjoint()).scale(half)
    }

    /// Quadratic form `v^dagger A v`.
    pub fn quadratic_form(&self, v: [C<T>; 4]) -> C<T> {
        let av = self.mul_vec(v);
        let mut acc = czero();
        for (vi, avi) in v.iter().zip(av.iter()) {
            acc += vi.conj() * *avi;
        }
        acc
    }
}

/// Tensor (Kronecker) product of two single-qubit vectors in (HH, HV, VH, VV)
/// ordering: index = 2*first + second.
pub fn kron2<T: Real>(a: [C<T>; 2], b: [C<T>; 2]) -> [C<T>; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching orthonormal
/// eigenvectors (each inner `Vec` is one eigenvector).
pub fn sym_eigen<T: Real>(a: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row = vec![T::zero(); n];
            row[i] = T::one();
            row
        })
        .collect();

    let off = |m: &[Vec<T>]| -> T {
        let mut s = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[i][j] * m[i][j];
            }
        }
        s
    };

    let tol = T::epsilon() * T::epsilon() * T::of(n as f64 * n as f64);
    for _sweep in 0..100 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() <= T::epsilon() * T::of(1e-3) {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (T::of(2.0) * apq);
                // Stable tangent of the rotation angle.
                let t = {
                    let sign = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[i][i]
            .partial_cmp(&m[j][j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&i| m[i][i]).collect();
    let vectors: Vec<Vec<T>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    (values, vectors)
}

/// Hermitian eigendecomposition of a 4x4 complex matrix.
///
/// Uses the real embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is the
/// Hermitian spectrum doubled; complex eigenvectors are recovered as
/// `x + i y` from the real pairs and re-orthonormalized within degenerate
/// clusters.
pub fn herm_eigen4<T: Real>(a: &Mat4<T>) -> (Vec<T>, Vec<[C<T>; 4]>) {
    let n = 4usize;
    let mut big = vec![vec![T::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let re = (a.m[i][j].re + a.m[j][i].re) * T::of(0.5);
            let im = (a.m[i][j].im - a.m[j][i].im) * T::of(0.5);
            big[i][j] = re;
            big[i + n][j + n] = re;
            big[i][j + n] = -im;
            big[i + n][j] = im;
        }
    }
    let (vals, vecs) = sym_eigen(&big);

    // Each Hermitian eigenvalue appears twice; take every other one and
    // rebuild an orthonormal complex basis by modified Gram-Schmidt.
    let mut out_vals = Vec::with_capacity(n);
    let mut out_vecs: Vec<[C<T>; 4]> = Vec::with_capacity(n);
    for k in 0..(2 * n) {
        let mut cand = [czero(); 4];
        for i in 0..n {
            cand[i] = C::new(vecs[k][i], vecs[k][i + n]);
        }
        for prev in &out_vecs {
            let mut dot = czero();
            for (p, c) in prev.iter().zip(cand.iter()) {
                dot += p.conj() * *c;
            }
            for (c, p) in cand.iter_mut().zip(prev.iter()) {
                *c -= *p * dot;
            }
        }
        let norm = cand
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt();
        if norm > T::of(1e-6) {
            let inv = C::new(T::one() / norm, T::zero());
            for c in cand.iter_mut() {
                *c *= inv;
            }
            out_vals.push(vals[k]);
            out_vecs.push(cand);
        }
        if out_vecs.len() == n {
            break;
        }
    }
    debug_assert_eq!(out_vecs.len(), n);
    (out_vals, out_vecs)
}

/// Eigenvalues only, ascending.
pub fn herm_eigenvalues4<T: Real>(a: &Mat4<T>) -> Vec<T> {
    herm_eigen4(a).0
}

/// Cholesky factor `L` (lower triangular) of a Hermitian PSD 4x4 matrix,
/// `A = L L^dagger`. Small negative pivots from rounding are clamped to zero.
pub fn cholesky4<T: Real>(a: &Mat4<T>) -> Mat4<T> {
    let mut l = Mat4::zero();
    for j in 0..4 {
        let mut d = a.m[j][j].re;
        for k in 0..j {
            d -= l.m[j][k].norm_sqr();
        }
        let d = if d > T::zero() { d.sqrt() } else { T::zero() };
        l.m[j][j] = C::new(d, T::zero());
        for i in (j + 1)..4 {
            if d == T::zero() {
                continue;
            }
            let mut s = a.m[i][j];
            for k in 0..j {
                s -= l.m[i][k] * l.m[j][k].conj();
            }
            l.m[i][j] = s / C::new(d, T::zero());
        }
    }
    l
}

/// Solve `A x = b` for a real square system by Gaussian elimination with
/// partial pivoting. `a` is modified in place.
pub fn solve_real<T: Real>(
    a: &mut [Vec<T>],
    b: &mut [T],
    context: &'static str,
) -> crate::error::Result<Vec<T>> {
    let n = a.len();
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < T::of(1e-12) {
            return Err(crate::error::Error::SingularSystem { context });
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let upper = a[col][k];
                a[row][k] -= f * upper;
            }
            let bc = b[col];
            b[row] -= f * bc;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for col in (row + 1)..n {
            s -= a[row][col] * x[col];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}
