//! Hermitian eigensolver (cyclic complex Jacobi) and spectral norms built on it.

use log::debug;

use crate::error::Result;
use crate::opalg::linsolve::Lu;
use crate::opalg::matrix::{ComplexMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and unit eigenvectors (matching columns) of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }
}

fn symmetrized(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_hermitian()?;
    let dev = a.hermiticity_deviation();
    if dev > 0.0 {
        debug!("symmetrizing input before eigensolve (deviation {dev:.3e})");
    }
    Ok(a.hermitian_part())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut m = symmetrized(a)?;
    Ok(jacobi(&mut m, None))
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigh(a: &ComplexMatrix) -> Result<Eigh> {
    let mut m = symmetrized(a)?;
    let n = m.rows();
    let mut v = ComplexMatrix::identity(n);
    let mut values = jacobi(&mut m, Some(&mut v));
    // jacobi returns values sorted together with a permutation applied to v
    let order = sort_order(&values);
    values = order.iter().map(|&k| values[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eigh { values, vectors })
}

fn sort_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// In-place cyclic Jacobi. Without eigenvectors the returned values are sorted; with them
/// the order matches the columns of `vecs`.
fn jacobi(a: &mut ComplexMatrix, mut vecs: Option<&mut ComplexMatrix>) -> Vec<f64> {
    let n = a.rows();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let total: f64 = a.frobenius_norm().powi(2);
    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= f64::EPSILON * f64::EPSILON * total * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag; // e^{iφ}
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // W = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q); A <- W† A W
                let wqp = -phase.conj() * s;
                let wqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * wqp;
                    a[(k, q)] = akp * s + akq * wqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * wqp.conj();
                    a[(q, k)] = apk * s + aqk * wqq.conj();
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                if let Some(v) = vecs.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c + vkq * wqp;
                        v[(k, q)] = vkp * s + vkq * wqq;
                    }
                }
            }
        }
    }
    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    if vecs.is_some() {
        values
    } else {
        let mut sorted = values;
        sorted.sort_by(|x, y| x.total_cmp(y));
        sorted
    }
}

/// Sum of absolute eigenvalues. Only Hermitian inputs are supported; the general
/// (singular-value) trace norm is not needed anywhere in this crate.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(a)?.iter().map(|x| x.abs()).sum())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(a)?[0])
}

/// Cheap positive-semidefiniteness test: Cholesky factorisation of `A + shift·I`.
/// Succeeds iff the smallest eigenvalue of the Hermitian part exceeds `-shift` (up to rounding).
pub fn is_psd_with_shift(a: &ComplexMatrix, shift: f64) -> bool {
    let n = a.rows();
    if !a.is_square() {
        return false;
    }
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re + shift;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return false;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    true
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    let gram = a.adjoint().matmul(a).hermitian_part();
    Ok(hermitian_eigen(&gram)?.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// 2-norm condition number `‖A‖₂·‖A⁻¹‖₂`; infinite for singular input.
///
/// The inverse is formed explicitly so that the small singular values are not lost to the
/// squaring in `A†A`.
pub fn condition_number_2(a: &ComplexMatrix) -> Result<f64> {
    let lu = Lu::factor(a)?;
    if !lu.condition_estimate().is_finite() {
        return Ok(f64::INFINITY);
    }
    let inv = lu.inverse();
    let c = spectral_norm(a)? * spectral_norm(&inv)?;
    Ok(if c.is_finite() { c } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::testutil::*;
    use crate::error::Error;
    use crate::opalg::tensor::{partial_transpose, DimList};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_and_pauli_spectra() {
        let ev = hermitian_eigen(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
        let sx = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let ev = hermitian_eigen(&sx).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eigen(&m), Err(Error::NotHermitian { .. })));
        assert!(trace_norm(&m).is_err());
    }

    #[test]
    fn random_hermitian_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [2, 5, 12, 24] {
            let h = random_hermitian(&mut rng, n);
            let eig = hermitian_eigh(&h).unwrap();
            for k in 0..n {
                let v = eig.vector(k);
                let hv = h.matvec(&v);
                let res: f64 = hv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * eig.values[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-9, "n={n} k={k} residual {res}");
            }
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = eig.values.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10 * n as f64 * h.max_abs());
        }
    }

    #[test]
    fn eigenvalue_product_is_determinant_2x2_and_3x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_hermitian(&mut rng, 2);
        let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
        let ev = hermitian_eigen(&h).unwrap();
        assert!((ev[0] * ev[1] - det.re).abs() < 1e-8 * det.norm().max(1.0));

        let h = random_hermitian(&mut rng, 3);
        let m = |i, j| h[(i, j)];
        let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        let ev = hermitian_eigen(&h).unwrap();
        assert!((ev.iter().product::<f64>() - det.re).abs() < 1e-8 * det.norm().max(1.0));
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&ComplexMatrix::diag_real(&[1.0, -2.0])).unwrap() - 3.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(&mut rng, 5);
        assert!((trace_norm(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        let s = 0.5f64.sqrt();
        let ket = [ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), ZERO];
        let singlet = ComplexMatrix::outer(&ket, &ket);
        let pt = partial_transpose(&singlet, &DimList::new(vec![2, 2]).unwrap(), 0).unwrap();
        // oracle: PT(singlet) = ½(|01><01| + |10><10|) - ½(|00><11| + |11><00|);
        // eigenvectors |01>, |10>, (|00> ± |11>)/√2 with eigenvalues ½, ½, ∓½
        let ev = hermitian_eigen(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let plus = [C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let r = pt.matvec(&plus);
        assert!(r.iter().zip(&plus).all(|(a, b)| (a + b * 0.5).norm() < 1e-15));
        assert!((trace_norm(&pt).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn psd_shift_test() {
        assert!(is_psd_with_shift(&ComplexMatrix::diag_real(&[0.0, 1.0]), 1e-12));
        assert!(!is_psd_with_shift(&ComplexMatrix::diag_real(&[-1e-6, 1.0]), 1e-8));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        assert!(is_psd_with_shift(&random_density(&mut rng, 6), 1e-12));
    }

    #[test]
    fn condition_number_of_diagonal() {
        let c = condition_number_2(&ComplexMatrix::diag_real(&[1.0, 1e-3])).unwrap();
        assert!((c - 1e3).abs() < 1e-6);
        let c = condition_number_2(&ComplexMatrix::diag_real(&[1.0, 1e-12])).unwrap();
        assert!((c / 1e12 - 1.0).abs() < 1e-9);
        assert!(condition_number_2(&ComplexMatrix::diag_real(&[1.0, 0.0])).unwrap().is_infinite());
    }
}
