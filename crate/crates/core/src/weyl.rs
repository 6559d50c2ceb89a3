//! Clock/shift unitaries, Weyl operators, and the generalized Bell basis.
//!
//! Conventions (kept throughout the crate): the *clock* operator is the
//! diagonal phase matrix `clock(e_j) = omega^j e_j`, the *shift* operator is
//! the cyclic shift `shift(e_j) = e_{j+1 mod n}`, and the Weyl operators are
//! the composed products `T_{k,l} = clock^k * shift^l`. Phases `omega^m` are
//! always evaluated with the exponent reduced modulo `n` first, so no
//! argument error accumulates for large `k*l`.

use num_complex::Complex;

use crate::error::Error;
use crate::linalg::{self, basis_vector, kron, kron_vec, CMat, CVec, C64, ONE};
use crate::Result;

/// Dimension-`n` Weyl system: primitive root of unity, clock and shift
/// generators, and all `n^2` operators `T_{k,l}`.
#[derive(Debug, Clone)]
pub struct WeylFamily {
    n: usize,
    omega: C64,
    clock: CMat,
    shift: CMat,
    weyl: Vec<CMat>,
}

impl WeylFamily {
    /// Builds the family for dimension `n >= 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let omega = root_of_unity(n, 1);
        let mut clock = CMat::zeros(n, n);
        for j in 0..n {
            clock[(j, j)] = root_of_unity(n, j as i64);
        }
        let mut shift = CMat::zeros(n, n);
        for j in 0..n {
            shift[((j + 1) % n, j)] = ONE;
        }

        // T_{k,l} = clock^k * shift^l as composed products.
        let mut clock_pow = vec![linalg::identity(n)];
        let mut shift_pow = vec![linalg::identity(n)];
        for k in 1..n {
            let c = &clock_pow[k - 1] * &clock;
            clock_pow.push(c);
            let s = &shift_pow[k - 1] * &shift;
            shift_pow.push(s);
        }
        let mut weyl = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                weyl.push(&clock_pow[k] * &shift_pow[l]);
            }
        }

        Ok(Self {
            n,
            omega,
            clock,
            shift,
            weyl,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> C64 {
        self.omega
    }

    pub fn clock(&self) -> &CMat {
        &self.clock
    }

    pub fn shift(&self) -> &CMat {
        &self.shift
    }

    /// `T_{k,l}`; indices are reduced modulo `n`.
    pub fn weyl(&self, k: usize, l: usize) -> &CMat {
        &self.weyl[(k % self.n) * self.n + (l % self.n)]
    }

    /// `omega^m` with the exponent reduced modulo `n` before exponentiation.
    pub fn phase(&self, m: i64) -> C64 {
        root_of_unity(self.n, m)
    }

    /// Scalar `c` with `T_{k,l} T_{k',l'} = c * T_{k',l'} T_{k,l}`,
    /// namely `omega^(k l' - l k')`.
    pub fn commutation_phase(&self, k: usize, l: usize, kp: usize, lp: usize) -> C64 {
        self.phase(k as i64 * lp as i64 - l as i64 * kp as i64)
    }
}

/// `exp(2 pi i m / n)` with `m` reduced modulo `n` first.
fn root_of_unity(n: usize, m: i64) -> C64 {
    let r = m.rem_euclid(n as i64) as f64;
    let arg = 2.0 * std::f64::consts::PI * r / n as f64;
    Complex::new(arg.cos(), arg.sin())
}

/// Builds the dimension-`n` Weyl family.
pub fn make_weyl_family(n: usize) -> Result<WeylFamily> {
    WeylFamily::new(n)
}

/// The maximally entangled vector and the `n^2` vectors
/// `eta_{k,l} = (T_{k,l} ⊗ Id) phi`, an orthonormal basis of `C^{n^2}`.
#[derive(Debug, Clone)]
pub struct BellBasis {
    n: usize,
    phi: CVec,
    vectors: Vec<CVec>,
}

impl BellBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `(1/sqrt(n)) sum_j e_j ⊗ e_j`.
    pub fn phi(&self) -> &CVec {
        &self.phi
    }

    /// `eta_{k,l}`; indices reduced modulo `n`.
    pub fn vector(&self, k: usize, l: usize) -> &CVec {
        &self.vectors[(k % self.n) * self.n + (l % self.n)]
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    /// Frobenius distance of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> f64 {
        let m = self.n * self.n;
        let mut acc = 0.0f64;
        for p in 0..m {
            for q in 0..m {
                let g: C64 = self.vectors[p].dotc(&self.vectors[q]);
                let target = if p == q { ONE } else { linalg::ZERO };
                acc += (g - target).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Builds the generalized Bell basis of the family.
pub fn bell_basis(family: &WeylFamily) -> BellBasis {
    let n = family.n();
    let mut phi = CVec::zeros(n * n);
    let scale = linalg::re(1.0 / (n as f64).sqrt());
    for j in 0..n {
        phi[j * n + j] = scale;
    }
    let id = linalg::identity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            let op = kron(family.weyl(k, l), &id);
            vectors.push(&op * &phi);
        }
    }
    BellBasis { n, phi, vectors }
}

/// Euclidean norm of the defect in the teleportation expansion
///
/// `h ⊗ sum_i e_i ⊗ e_i  -  (1/sqrt(n)) sum_{k,l} eta_{k,l} ⊗ T_{k,l}^dag h`.
pub fn teleportation_residual(family: &WeylFamily, h: &CVec) -> Result<f64> {
    let n = family.n();
    if h.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.len(),
        });
    }
    let basis = bell_basis(family);
    let mut sum_ee = CVec::zeros(n * n);
    for i in 0..n {
        sum_ee[i * n + i] = ONE;
    }
    let lhs = kron_vec(h, &sum_ee);
    let mut rhs = CVec::zeros(n * n * n);
    let scale = linalg::re(1.0 / (n as f64).sqrt());
    for k in 0..n {
        for l in 0..n {
            let th = family.weyl(k, l).adjoint() * h;
            let term = kron_vec(basis.vector(k, l), &th);
            rhs += term * scale;
        }
    }
    Ok((lhs - rhs).norm())
}

/// Frobenius norm of the defect in the rank-one frame expansion
///
/// `rho ⊗ phi - (1/n) sum H_{k,l}^{k',l'} ⊗ T_{k,l}^dag rho T_{k',l'}`,
///
/// where `phi` is the *unnormalized* matrix `sum_{i,j} e_{i,j} ⊗ e_{i,j}`
/// and `H_{k,l}^{k',l'} = |eta_{k,l}><eta_{k',l'}|` acts on the first two
/// tensor legs.
pub fn rank_one_frame_residual(family: &WeylFamily, rho: &CMat) -> Result<f64> {
    let n = family.n();
    if rho.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho.nrows(),
        });
    }
    linalg::ensure_finite(rho)?;
    let basis = bell_basis(family);
    let phi_mat = unnormalized_phi_matrix(n);
    let lhs = kron(rho, &phi_mat);

    let dim = n * n * n;
    let mut rhs = CMat::zeros(dim, dim);
    let scale = linalg::re(1.0 / n as f64);
    for k in 0..n {
        for l in 0..n {
            let left = family.weyl(k, l).adjoint() * rho;
            for kp in 0..n {
                for lp in 0..n {
                    let h = outer(basis.vector(k, l), basis.vector(kp, lp));
                    let mat = &left * family.weyl(kp, lp);
                    linalg::kron_acc(&mut rhs, scale, &h, &mat);
                }
            }
        }
    }
    Ok(linalg::fro_norm(&(lhs - rhs)))
}

/// `sum_{i,j} e_{i,j} ⊗ e_{i,j}` in `M_{n^2}`.
pub fn unnormalized_phi_matrix(n: usize) -> CMat {
    let mut m = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(i * n + i, j * n + j)] = ONE;
        }
    }
    m
}

/// `|u><v|` (conjugation on the second argument).
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    let mut m = CMat::zeros(u.len(), v.len());
    for i in 0..u.len() {
        for j in 0..v.len() {
            m[(i, j)] = u[i] * v[j].conj();
        }
    }
    m
}

/// Max deviation from unitarity over all `T_{k,l}`.
pub fn unitarity_residual(family: &WeylFamily) -> f64 {
    let n = family.n();
    let id = linalg::identity(n);
    let mut worst = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            let t = family.weyl(k, l);
            let defect = t.adjoint() * t - &id;
            worst = worst.max(linalg::op_norm(&defect));
        }
    }
    worst
}

/// Max deviation in `clock * shift = omega * shift * clock`.
pub fn clock_shift_residual(family: &WeylFamily) -> f64 {
    let lhs = family.clock() * family.shift();
    let rhs = (family.shift() * family.clock()).map(|z| z * family.omega());
    (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max deviation in the pairwise Weyl commutation relation over all
/// `(k,l,k',l')`.
pub fn weyl_commutation_residual(family: &WeylFamily) -> f64 {
    let n = family.n();
    let mut worst = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            for kp in 0..n {
                for lp in 0..n {
                    let lhs = family.weyl(k, l) * family.weyl(kp, lp);
                    let phase = family.commutation_phase(k, l, kp, lp);
                    let rhs = (family.weyl(kp, lp) * family.weyl(k, l)).map(|z| z * phase);
                    worst = worst.max(linalg::fro_norm(&(lhs - rhs)));
                }
            }
        }
    }
    worst
}

/// Canonical basis vector of `C^n`, re-exported for call sites that build
/// teleportation inputs.
pub fn canonical_vector(n: usize, i: usize) -> CVec {
    basis_vector(n, i)
}
