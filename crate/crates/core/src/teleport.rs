//! Teleportation-style transfer maps between matrix spaces and diagonal
//! spaces, with their positivity and factorization certificates.
//!
//! `J` sends `rho` to the `n^2` components `(1/n) T_{k,l}^dag rho T_{k,l}`
//! (trace-class into matrix-valued diagonals); `W` sends `rho` to the
//! components `T_{k,l}^T rho conj(T_{k,l})` and is unital and completely
//! positive componentwise. The Bell projection `P` reads off the diagonal
//! of an `n^2 x n^2` matrix in the generalized Bell basis; its adjoint is a
//! unital completely positive map, which certifies that `P` is a complete
//! contraction. `J` factorizes as `(P ⊗ Id)` after tensoring with the
//! unnormalized maximally entangled matrix, and the factorization is checked
//! numerically as a residual.

use crate::error::Error;
use crate::linalg::{self, CMat, C64};
use crate::weyl::{bell_basis, outer, unnormalized_phi_matrix, BellBasis, WeylFamily};
use crate::Result;

/// The transfer map `rho -> (1/n) sum T^dag rho T ⊗ e_{k,l}`.
#[derive(Debug, Clone, Copy)]
pub struct TransferMapJ<'a> {
    pub family: &'a WeylFamily,
}

impl<'a> TransferMapJ<'a> {
    pub fn new(family: &'a WeylFamily) -> Self {
        Self { family }
    }

    /// The `(k, l)` component `(1/n) T_{k,l}^dag rho T_{k,l}`.
    pub fn component(&self, k: usize, l: usize, rho: &CMat) -> CMat {
        let t = self.family.weyl(k, l);
        (t.adjoint() * rho * t) / linalg::re(self.family.n() as f64)
    }

    /// All `n^2` components, indexed `k * n + l`.
    pub fn apply(&self, rho: &CMat) -> Result<Vec<CMat>> {
        let n = self.family.n();
        if rho.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rho.nrows(),
            });
        }
        linalg::ensure_finite(rho)?;
        let mut out = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                out.push(self.component(k, l, rho));
            }
        }
        Ok(out)
    }
}

/// The transfer map `rho -> sum T^T rho conj(T) ⊗ e_{k,l}`.
#[derive(Debug, Clone, Copy)]
pub struct TransferMapW<'a> {
    pub family: &'a WeylFamily,
}

impl<'a> TransferMapW<'a> {
    pub fn new(family: &'a WeylFamily) -> Self {
        Self { family }
    }

    /// The `(k, l)` component `T_{k,l}^T rho conj(T_{k,l})`.
    pub fn component(&self, k: usize, l: usize, rho: &CMat) -> CMat {
        let t = self.family.weyl(k, l);
        t.transpose() * rho * t.map(|z| z.conj())
    }

    /// All `n^2` components, indexed `k * n + l`.
    pub fn apply(&self, rho: &CMat) -> Result<Vec<CMat>> {
        let n = self.family.n();
        if rho.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rho.nrows(),
            });
        }
        linalg::ensure_finite(rho)?;
        let mut out = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                out.push(self.component(k, l, rho));
            }
        }
        Ok(out)
    }

    /// Choi matrix of the `(k, l)` component map `rho -> A rho A^dag` with
    /// `A = T^T`, assembled in row-major matrix-unit ordering.
    pub fn component_choi(&self, k: usize, l: usize) -> CMat {
        let n = self.family.n();
        let mut choi = CMat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let image = self.component(k, l, &linalg::matrix_unit(n, i, j));
                linalg::kron_acc(
                    &mut choi,
                    linalg::ONE,
                    &linalg::matrix_unit(n, i, j),
                    &image,
                );
            }
        }
        choi
    }

    /// Max deviation of `W(I)` components from the identity.
    pub fn unitality_residual(&self) -> f64 {
        let n = self.family.n();
        let id = linalg::identity(n);
        let comps = self.apply(&id).expect("identity has the right shape");
        comps
            .iter()
            .map(|c| linalg::fro_norm(&(c - &id)))
            .fold(0.0, f64::max)
    }

    /// Smallest Choi eigenvalue over all component maps.
    pub fn choi_floor(&self) -> f64 {
        let n = self.family.n();
        let mut floor = f64::INFINITY;
        for k in 0..n {
            for l in 0..n {
                floor = floor.min(linalg::min_eigenvalue(&self.component_choi(k, l)));
            }
        }
        floor
    }
}

/// Convenience wrapper: all components of `J(rho)`.
pub fn apply_j(family: &WeylFamily, rho: &CMat) -> Result<Vec<CMat>> {
    TransferMapJ::new(family).apply(rho)
}

/// Convenience wrapper: all components of `W(rho)`.
pub fn apply_w(family: &WeylFamily, rho: &CMat) -> Result<Vec<CMat>> {
    TransferMapW::new(family).apply(rho)
}

/// Bell-basis diagonal of an `n^2 x n^2` matrix:
/// `P(A)_{k,l} = <eta_{k,l}, A eta_{k,l}>`.
pub fn bell_projection(basis: &BellBasis, a: &CMat) -> Result<Vec<C64>> {
    let m = basis.n() * basis.n();
    if a.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: a.nrows(),
        });
    }
    let mut out = Vec::with_capacity(m);
    for k in 0..basis.n() {
        for l in 0..basis.n() {
            let v = basis.vector(k, l);
            out.push(v.dotc(&(a * v)));
        }
    }
    Ok(out)
}

/// Adjoint of the Bell projection: diagonal weights to
/// `sum lambda_{k,l} |eta_{k,l}><eta_{k,l}|`.
pub fn bell_projection_adjoint(basis: &BellBasis, weights: &[C64]) -> Result<CMat> {
    let m = basis.n() * basis.n();
    if weights.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: weights.len(),
        });
    }
    let mut out = CMat::zeros(m, m);
    for (idx, w) in weights.iter().enumerate() {
        let v = &basis.vectors()[idx];
        out += outer(v, v) * *w;
    }
    Ok(out)
}

/// Per-label Choi blocks of the adjoint map; the full Choi matrix is block
/// diagonal over the diagonal input index, so positivity reduces to the
/// positivity of each block `|eta_{k,l}><eta_{k,l}|`.
pub fn bell_adjoint_choi_blocks(basis: &BellBasis) -> Vec<CMat> {
    basis.vectors().iter().map(|v| outer(v, v)).collect()
}

/// Frobenius distance of `sum |eta><eta|` from the identity.
pub fn frame_completeness_residual(basis: &BellBasis) -> f64 {
    let m = basis.n() * basis.n();
    let mut s = CMat::zeros(m, m);
    for v in basis.vectors() {
        s += outer(v, v);
    }
    linalg::fro_norm(&(s - linalg::identity(m)))
}

/// Residual of the factorization of `J` through the Bell projection:
/// compares `apply_j(rho)` against the partial Bell diagonal of
/// `rho ⊗ phi` (`phi` the unnormalized entangled matrix), taken over the
/// first two tensor legs with the third leg free.
pub fn j_factorization_residual(family: &WeylFamily, rho: &CMat) -> Result<f64> {
    let n = family.n();
    if rho.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho.nrows(),
        });
    }
    linalg::ensure_finite(rho)?;
    let basis = bell_basis(family);
    let direct = apply_j(family, rho)?;
    let big = linalg::kron(rho, &unnormalized_phi_matrix(n));

    let mut acc = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            let eta = basis.vector(k, l);
            // M[m, m'] = sum_{p,q} conj(eta[p]) big[p*n+m, q*n+m'] eta[q].
            let mut m_mat = CMat::zeros(n, n);
            for p in 0..n * n {
                let ep = eta[p].conj();
                if ep.norm() == 0.0 {
                    continue;
                }
                for q in 0..n * n {
                    let eq = eta[q];
                    if eq.norm() == 0.0 {
                        continue;
                    }
                    for mi in 0..n {
                        for mj in 0..n {
                            m_mat[(mi, mj)] += ep * big[(p * n + mi, q * n + mj)] * eq;
                        }
                    }
                }
            }
            let diff = &m_mat - &direct[k * n + l];
            acc += linalg::fro_norm(&diff).powi(2);
        }
    }
    Ok(acc.sqrt())
}

/// Sum of component traces of `J(rho)` minus `n * tr(rho)` in magnitude;
/// each component carries trace `tr(rho) / n` and there are `n^2` of them.
pub fn j_trace_residual(family: &WeylFamily, rho: &CMat) -> Result<f64> {
    let n = family.n();
    let comps = apply_j(family, rho)?;
    let expected_each = rho.trace() / linalg::re(n as f64);
    let mut worst = 0.0f64;
    let mut total = linalg::ZERO;
    for c in &comps {
        let t = c.trace();
        worst = worst.max((t - expected_each).norm());
        total += t;
    }
    let sum_defect = (total - rho.trace() * linalg::re(n as f64)).norm();
    Ok(worst.max(sum_defect))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_unit, re, SeededRng};
    use approx::assert_relative_eq;

    #[test]
    fn j_fixes_identity_up_to_scale() {
        let family = WeylFamily::new(3).unwrap();
        let comps = apply_j(&family, &linalg::identity(3)).unwrap();
        for c in comps {
            assert!(linalg::fro_norm(&(c - linalg::identity(3) / re(3.0))) < 1e-12);
        }
    }

    #[test]
    fn j_components_on_matrix_unit_n2() {
        // Independent oracle: conjugate e_{0,0} by each explicit 2x2 Weyl
        // operator and scale by 1/2.
        let family = WeylFamily::new(2).unwrap();
        let rho = matrix_unit(2, 0, 0);
        let comps = apply_j(&family, &rho).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let t = family.weyl(k, l);
                let expect = (t.adjoint() * &rho * t) / re(2.0);
                assert!(linalg::fro_norm(&(&comps[k * 2 + l] - &expect)) < 1e-14);
                // Rank-one projection scaled by 1/2: trace 1/2, idempotent
                // after scaling by 2.
                let twice = &comps[k * 2 + l] * re(2.0);
                assert!(linalg::fro_norm(&(&twice * &twice - &twice)) < 1e-12);
            }
        }
    }

    #[test]
    fn j_trace_bookkeeping_random_inputs() {
        let family = WeylFamily::new(3).unwrap();
        let mut rng = SeededRng::new(8);
        for _ in 0..20 {
            let rho = rng.ginibre(3, 3);
            assert!(j_trace_residual(&family, &rho).unwrap() < 1e-12);
        }
    }

    #[test]
    fn w_is_unital() {
        for n in [2usize, 3, 5, 7, 11, 13] {
            let family = WeylFamily::new(n).unwrap();
            let w = TransferMapW::new(&family);
            assert!(w.unitality_residual() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn w_components_are_completely_positive() {
        for n in [2usize, 3, 5] {
            let family = WeylFamily::new(n).unwrap();
            let w = TransferMapW::new(&family);
            assert!(w.choi_floor() >= -1e-12, "n = {n}");
        }
    }

    #[test]
    fn w_on_matrix_units_matches_transposed_conjugation() {
        // W(e_{a,x}) component (k,l) must equal T^T e_{a,x} conj(T), which
        // reduces to a phase times a shifted matrix unit.
        let n = 3;
        let family = WeylFamily::new(n).unwrap();
        let w = TransferMapW::new(&family);
        for a in 0..n {
            for x in 0..n {
                let comps = w.apply(&matrix_unit(n, a, x)).unwrap();
                for k in 0..n {
                    for l in 0..n {
                        let expect = matrix_unit(n, (a + n - l) % n, (x + n - l) % n)
                            * family.phase((k as i64) * (a as i64 - x as i64));
                        assert!(
                            linalg::fro_norm(&(&comps[k * n + l] - &expect)) < 1e-12,
                            "a={a} x={x} k={k} l={l}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bell_projection_on_basis_projector() {
        let family = WeylFamily::new(2).unwrap();
        let basis = bell_basis(&family);
        let proj = outer(basis.vector(0, 0), basis.vector(0, 0));
        let diag = bell_projection(&basis, &proj).unwrap();
        assert_relative_eq!(diag[0].re, 1.0, epsilon = 1e-12);
        for v in &diag[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn bell_projection_on_scaled_identity() {
        let family = WeylFamily::new(3).unwrap();
        let basis = bell_basis(&family);
        let a = linalg::identity(9) / re(9.0);
        let diag = bell_projection(&basis, &a).unwrap();
        for v in diag {
            assert_relative_eq!(v.re, 1.0 / 9.0, epsilon = 1e-12);
            assert!(v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn bell_projection_psd_inputs_give_subnormalized_weights() {
        let family = WeylFamily::new(2).unwrap();
        let basis = bell_basis(&family);
        let mut rng = SeededRng::new(3);
        for _ in 0..20 {
            let g = rng.ginibre(4, 4);
            let psd = &g * g.adjoint();
            let tr = psd.trace().re;
            let state = psd / re(tr);
            let diag = bell_projection(&basis, &state).unwrap();
            let mut total = 0.0;
            for v in diag {
                assert!(v.re >= -1e-12);
                total += v.re;
            }
            assert!(total <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bell_adjoint_is_unital_and_cp() {
        for n in [2usize, 3, 5] {
            let family = WeylFamily::new(n).unwrap();
            let basis = bell_basis(&family);
            let ones = vec![linalg::ONE; n * n];
            let image = bell_projection_adjoint(&basis, &ones).unwrap();
            assert!(
                linalg::fro_norm(&(&image - linalg::identity(n * n))) < 1e-12,
                "n = {n}"
            );
            for block in bell_adjoint_choi_blocks(&basis) {
                assert!(linalg::min_eigenvalue(&block) >= -1e-12);
            }
        }
    }

    #[test]
    fn frame_completeness_up_to_thirteen() {
        for n in [2usize, 3, 5, 7, 11, 13] {
            let family = WeylFamily::new(n).unwrap();
            let basis = bell_basis(&family);
            assert!(frame_completeness_residual(&basis) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn factorization_residual_zero_input() {
        let family = WeylFamily::new(2).unwrap();
        assert_eq!(
            j_factorization_residual(&family, &CMat::zeros(2, 2)).unwrap(),
            0.0
        );
    }

    #[test]
    fn factorization_residual_identity_n2() {
        let family = WeylFamily::new(2).unwrap();
        assert!(j_factorization_residual(&family, &linalg::identity(2)).unwrap() < 1e-12);
    }

    #[test]
    fn factorization_residual_random_n3() {
        let family = WeylFamily::new(3).unwrap();
        let mut rng = SeededRng::new(13);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let rho = rng.ginibre(3, 3);
            worst = worst.max(j_factorization_residual(&family, &rho).unwrap());
        }
        assert!(worst < 1e-11, "max residual {worst}");
    }

    #[test]
    fn transfer_maps_reject_wrong_shapes() {
        let family = WeylFamily::new(3).unwrap();
        let bad = CMat::zeros(2, 2);
        assert!(apply_j(&family, &bad).is_err());
        assert!(apply_w(&family, &bad).is_err());
        let basis = bell_basis(&family);
        assert!(bell_projection(&basis, &bad).is_err());
    }
}
