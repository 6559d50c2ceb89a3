//! Dense complex linear algebra helpers shared by every module.
//!
//! Everything here is a thin layer over `nalgebra`: Hermitian
//! eigendecompositions, spectral norms, positive-semidefinite functional
//! calculus, and the matrix geometric mean used by the factorization
//! balancer. Matrices are small (a few hundred rows at most), so the pure
//! Rust paths are more than fast enough.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::Error;
use crate::Result;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = nalgebra::DVector<C64>;

pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const ZERO: C64 = Complex::new(0.0, 0.0);

/// Complex scalar from a real value.
#[inline]
pub fn re(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// n-by-n identity.
pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Matrix unit `e_{i,j}` of side `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// Standard basis vector `e_i` of length `n`.
pub fn basis_vector(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = ONE;
    v
}

/// Conjugate transpose.
#[inline]
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Kronecker product. Row-major index convention: entry
/// `((i, k), (j, l))` of the result is `a[(i, j)] * b[(k, l)]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of column vectors.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// `dst += coeff * (a ⊗ b)` without allocating the Kronecker product.
pub fn kron_acc(dst: &mut CMat, coeff: C64, a: &CMat, b: &CMat) {
    let (br, bc) = b.shape();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let f = coeff * a[(i, j)];
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    dst[(i * br + k, j * bc + l)] += f * b[(k, l)];
                }
            }
        }
    }
}

/// Hermitian eigendecomposition: ascending eigenvalues with matching
/// eigenvector columns.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Cyclic-Jacobi eigendecomposition of a Hermitian matrix.
///
/// Shifted tridiagonal iterations can fail to converge (returning NaN) on
/// highly degenerate spectra such as rank-one Choi matrices; two-sided
/// Jacobi rotations are unconditionally convergent, and the matrices here
/// are small enough that the extra sweeps cost nothing.
pub fn hermitian_eigen(m: &CMat) -> HermitianEigen {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut v = CMat::identity(n, n);
    let scale = a.norm().max(1.0);
    let tol = 1e-15 * scale;
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[(p, q)];
                let h = z.norm();
                if h <= tol / (n as f64) {
                    continue;
                }
                // Phase-rotate column q so the pivot becomes real, then
                // apply the classical real rotation.
                let omega = z / h;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * h);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column operations: col_q *= conj(omega); then mix.
                for r in 0..n {
                    let aq = a[(r, q)] * omega.conj();
                    let ap = a[(r, p)];
                    a[(r, p)] = ap * re(c) - aq * re(s);
                    a[(r, q)] = ap * re(s) + aq * re(c);
                    let vq = v[(r, q)] * omega.conj();
                    let vp = v[(r, p)];
                    v[(r, p)] = vp * re(c) - vq * re(s);
                    v[(r, q)] = vp * re(s) + vq * re(c);
                }
                // Matching row operations (conjugate transposed).
                for r in 0..n {
                    let aq = a[(q, r)] * omega;
                    let ap = a[(p, r)];
                    a[(p, r)] = ap * re(c) - aq * re(s);
                    a[(q, r)] = ap * re(s) + aq * re(c);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)];
        }
    }
    HermitianEigen { values, vectors }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).values
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)
        .last()
        .copied()
        .unwrap_or(0.0)
}

/// Operator (spectral) norm: largest singular value, computed as
/// `sqrt(lambda_max(A^dag A))`.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // Use the Gram matrix of the smaller side.
    let g = if m.nrows() <= m.ncols() {
        m * dagger(m)
    } else {
        dagger(m) * m
    };
    max_eigenvalue(&g).max(0.0).sqrt()
}

/// Frobenius norm.
#[inline]
pub fn fro_norm(m: &CMat) -> f64 {
    m.norm()
}

/// Bilinear entrywise dot `sum_{i,j} a[i,j] * b[i,j]` (no conjugation).
pub fn bilinear_dot(a: &CMat, b: &CMat) -> C64 {
    debug_assert_eq!(a.shape(), b.shape());
    let mut s = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        s += x * y;
    }
    s
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let eig = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let col = eig.vectors.column(k);
        let lam = re(f(eig.values[k]));
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += lam * col[i] * col[j].conj();
            }
        }
    }
    out
}

/// Positive-semidefinite square root; negative eigenvalues (rounding noise)
/// are clamped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    hermitian_map(m, |l| l.max(0.0).sqrt())
}

/// Inverse square root with eigenvalue floor `eps`.
pub fn psd_inv_sqrt(m: &CMat, eps: f64) -> CMat {
    hermitian_map(m, |l| 1.0 / l.max(eps).sqrt())
}

/// Inverse with eigenvalue floor `eps` (Hermitian positive input).
pub fn psd_inv(m: &CMat, eps: f64) -> CMat {
    hermitian_map(m, |l| 1.0 / l.max(eps))
}

/// Riemannian geometric mean of two Hermitian positive matrices:
/// the unique positive solution `X` of `X P^{-1} X = Q`, computed as
/// `P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{1/2}`.
pub fn geometric_mean(p: &CMat, q: &CMat, eps: f64) -> CMat {
    let ph = psd_sqrt(p);
    let phi = psd_inv_sqrt(p, eps);
    let inner = &phi * q * &phi;
    &ph * psd_sqrt(&inner) * &ph
}

/// Checks that every entry is finite.
pub fn ensure_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Deterministic pseudo-random stream of f64/complex draws, seeded per use.
///
/// Wraps ChaCha12 and exposes the few distributions the crate needs; keeping
/// the mapping from bits to floats in one place makes sampled certificates
/// reproducible across platforms.
pub struct SeededRng {
    inner: rand_chacha::ChaCha12Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        use rand_core::SeedableRng;
        Self {
            inner: rand_chacha::ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent substream `i` of a base seed; used for parallel sampling
    /// so the aggregate is independent of scheduling order.
    pub fn substream(seed: u64, i: u64) -> Self {
        use rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(i.wrapping_add(1));
        Self { inner: rng }
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        use rand_core::RngCore;
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u = loop {
            let u = self.uniform();
            if u > 0.0 {
                break u;
            }
        };
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }

    /// Standard complex Gaussian entry.
    pub fn complex_normal(&mut self) -> C64 {
        Complex::new(self.normal(), self.normal())
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }

    /// Complex Ginibre matrix (independent standard complex Gaussians).
    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| self.complex_normal())
    }

    /// Uniformly random permutation of 0..n (Fisher-Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            p.swap(i, j);
        }
        p
    }
}
