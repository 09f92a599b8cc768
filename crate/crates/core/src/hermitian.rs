//! Small helpers for complex Hermitian matrices.
//!
//! A Hermitian `M x M` matrix is stored as `M^2` real parameters: the `M`
//! diagonal entries first, then for every pair `k < l` the real and the
//! imaginary part of entry `(k, l)`. The real symmetric embedding
//!
//! ```text
//! X = [ Re W  -Im W ]
//!     [ Im W   Re W ]
//! ```
//!
//! has dimension `2M`, `tr X = 2 tr W` and `det X = det(W)^2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Number of real parameters of an `m x m` Hermitian matrix.
pub fn param_count(m: usize) -> usize {
    m * m
}

fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |k| (k + 1..m).map(move |l| (k, l)))
}

pub fn from_params(params: &[f64], m: usize) -> CMatrix {
    debug_assert_eq!(params.len(), param_count(m));
    let mut w = CMatrix::zeros(m, m);
    for k in 0..m {
        w[(k, k)] = Complex64::new(params[k], 0.0);
    }
    for (p, (k, l)) in pairs(m).enumerate() {
        let re = params[m + 2 * p];
        let im = params[m + 2 * p + 1];
        w[(k, l)] = Complex64::new(re, im);
        w[(l, k)] = Complex64::new(re, -im);
    }
    w
}

pub fn to_params(w: &CMatrix) -> Vec<f64> {
    let m = w.nrows();
    let mut params = vec![0.0; param_count(m)];
    for k in 0..m {
        params[k] = w[(k, k)].re;
    }
    for (p, (k, l)) in pairs(m).enumerate() {
        // average with the mirrored entry so slightly non-Hermitian input maps
        // to its Hermitian part
        let v = (w[(k, l)] + w[(l, k)].conj()) * 0.5;
        params[m + 2 * p] = v.re;
        params[m + 2 * p + 1] = v.im;
    }
    params
}

/// Coefficients `c` with `a^H W a = c . params(W)`.
pub fn quad_form_coeffs(a: &CVector) -> Vec<f64> {
    let m = a.len();
    let mut c = vec![0.0; param_count(m)];
    for k in 0..m {
        c[k] = a[k].norm_sqr();
    }
    for (p, (k, l)) in pairs(m).enumerate() {
        // conj(a_k) W_kl a_l + conj(a_l) W_lk a_k = 2 Re(conj(a_k) a_l (re + i im))
        let cross = a[k].conj() * a[l];
        c[m + 2 * p] = 2.0 * cross.re;
        c[m + 2 * p + 1] = -2.0 * cross.im;
    }
    c
}

/// Coefficients of `tr W` in parameter space.
pub fn trace_coeffs(m: usize) -> Vec<f64> {
    let mut c = vec![0.0; param_count(m)];
    c[..m].iter_mut().for_each(|v| *v = 1.0);
    c
}

/// `a^H Q a`, real part (the imaginary part vanishes for Hermitian `Q`).
pub fn quad_form(a: &CVector, q: &CMatrix) -> f64 {
    (a.adjoint() * q * a)[(0, 0)].re
}

pub fn trace_re(q: &CMatrix) -> f64 {
    q.diagonal().iter().map(|v| v.re).sum()
}

pub fn identity_scaled(m: usize, scale: f64) -> CMatrix {
    CMatrix::identity(m, m) * Complex64::new(scale, 0.0)
}

/// Smallest eigenvalue of the Hermitian part of `q`.
pub fn min_eigenvalue(q: &CMatrix) -> f64 {
    let h = (q + q.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest deviation from Hermitian symmetry.
pub fn hermitian_defect(q: &CMatrix) -> f64 {
    (q - q.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Real symmetric embedding of dimension `2m`.
pub fn embed(w: &CMatrix) -> DMatrix<f64> {
    let m = w.nrows();
    let mut x = DMatrix::zeros(2 * m, 2 * m);
    for r in 0..m {
        for c in 0..m {
            let v = w[(r, c)];
            x[(r, c)] = v.re;
            x[(r + m, c + m)] = v.re;
            x[(r, c + m)] = -v.im;
            x[(r + m, c)] = v.im;
        }
    }
    x
}

/// Nonzero entries `(row, col, value)` of the embedding of each basis
/// matrix, in parameter order.
pub fn embedding_basis(m: usize) -> Vec<Vec<(usize, usize, f64)>> {
    let mut basis = Vec::with_capacity(param_count(m));
    for k in 0..m {
        basis.push(vec![(k, k, 1.0), (k + m, k + m, 1.0)]);
    }
    for (k, l) in pairs(m) {
        basis.push(vec![(k, l, 1.0), (l, k, 1.0), (k + m, l + m, 1.0), (l + m, k + m, 1.0)]);
        basis.push(vec![
            (k, l + m, -1.0),
            (l + m, k, -1.0),
            (l, k + m, 1.0),
            (k + m, l, 1.0),
        ]);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_vec() -> CVector {
        CVector::from_vec(vec![
            Complex64::new(0.3, -1.2),
            Complex64::new(-0.7, 0.4),
            Complex64::new(1.1, 0.9),
        ])
    }

    fn sample_herm() -> CMatrix {
        let b = CMatrix::from_fn(3, 3, |r, c| {
            Complex64::new((r + 2 * c) as f64 * 0.1, (r as f64 - c as f64) * 0.3)
        });
        &b * b.adjoint()
    }

    #[test]
    fn params_roundtrip() {
        let w = sample_herm();
        let back = from_params(&to_params(&w), 3);
        assert!((back - &w).iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn quad_form_coefficients_match_direct_product() {
        let a = sample_vec();
        let w = sample_herm();
        let direct = quad_form(&a, &w);
        let via: f64 = quad_form_coeffs(&a).iter().zip(to_params(&w)).map(|(c, p)| c * p).sum();
        assert!((direct - via).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn embedding_matches_basis_expansion() {
        let w = sample_herm();
        let params = to_params(&w);
        let mut x = DMatrix::<f64>::zeros(6, 6);
        for (p, entries) in embedding_basis(3).iter().enumerate() {
            for &(r, c, v) in entries {
                x[(r, c)] += v * params[p];
            }
        }
        assert!((x - embed(&w)).abs().max() < 1e-14);
    }

    #[test]
    fn embedding_doubles_trace_and_squares_det() {
        let w = sample_herm() + identity_scaled(3, 0.5);
        let x = embed(&w);
        assert!((x.trace() - 2.0 * trace_re(&w)).abs() < 1e-12);
        let det_w = w.clone().determinant().re;
        assert!((x.determinant() - det_w * det_w).abs() < 1e-9 * (det_w * det_w));
    }

    #[test]
    fn min_eigenvalue_of_rank_one() {
        let a = sample_vec();
        let q = &a * a.adjoint();
        assert!(min_eigenvalue(&q).abs() < 1e-12);
        assert!(hermitian_defect(&q) < 1e-15);
    }
}
