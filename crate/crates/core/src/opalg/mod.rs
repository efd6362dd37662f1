//! Operator algebra and dense linear algebra.

pub mod eigen;
pub mod linsolve;
pub mod matrix;
pub mod tensor;

pub use eigen::{condition_number_2, spectral_norm, hermitian_eigen, hermitian_eigh, is_psd_with_shift, min_eigenvalue, trace_norm, Eigh};
pub use linsolve::{solve_linear, Lu};
pub use matrix::{ComplexMatrix, C64, I, ONE, ZERO};
pub use tensor::{embed, kron, kron_all, make_destroy, partial_trace, partial_transpose, DimList};

#[cfg(test)]
pub(crate) mod testutil {
    use super::matrix::{ComplexMatrix, C64};
    use rand::Rng;

    pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        random_matrix(rng, n).hermitian_part()
    }

    pub fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n);
        let p = a.matmul(&a.adjoint());
        let tr = p.trace().re;
        p.scale_real(1.0 / tr)
    }
}
