//! Master-equation generator in operator and superoperator form.
//!
//! Vectorisation is column stacking: `vec(ρ)[i + d·j] = ρ[i][j]`, hence
//! `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::opalg::{ComplexMatrix, C64, I, ZERO};

/// Largest Hilbert dimension for which the superoperator is materialised.
pub const MAX_SUPEROPERATOR_DIM: usize = 64;

/// `dρ/dt = -i H_eff ρ + i ρ H_eff† + Σ r LρL†`
pub fn rhs(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = model.dim();
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, model acts on dimension {d}",
            rho.rows(),
            rho.cols()
        )));
    }
    let h = &model.h_eff;
    let mut out = h.matmul(rho).scale(-I);
    out += &rho.matmul(&h.adjoint()).scale(I);
    for j in &model.jumps {
        if j.rate == 0.0 {
            continue;
        }
        out += &j.op.matmul(rho).matmul(&j.op.adjoint()).scale_real(j.rate);
    }
    Ok(out)
}

/// Dense superoperator acting on column-stacked `d x d` matrices.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub matrix: ComplexMatrix,
    pub dim: usize,
}

impl Superoperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.rows();
        let dim = (n as f64).sqrt().round() as usize;
        if !matrix.is_square() || dim * dim != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not a superoperator shape",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Superoperator { matrix, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Superoperator {
            matrix: ComplexMatrix::identity(dim * dim),
            dim,
        }
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator acts on {0}x{0}, got {1}x{2}",
                self.dim,
                rho.rows(),
                rho.cols()
            )));
        }
        ComplexMatrix::unvectorize(self.dim, &self.matrix.matvec(&rho.vectorize()))
    }

    /// `vec(I)† S`, i.e. the trace functional pulled back through `S`.
    pub fn trace_row(&self) -> Vec<C64> {
        let d = self.dim;
        let n = d * d;
        (0..n)
            .map(|col| (0..d).map(|i| self.matrix[(i + d * i, col)]).sum())
            .collect()
    }

    pub fn compose(&self, first: &Superoperator) -> Superoperator {
        Superoperator {
            matrix: self.matrix.matmul(&first.matrix),
            dim: self.dim,
        }
    }
}

/// Compressed-row form of the generator, used by the time steppers.
#[derive(Clone, Debug)]
pub struct SparseGenerator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

fn nonzeros(m: &ComplexMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl SparseGenerator {
    pub fn from_model(model: &LindbladModel) -> Result<Self> {
        let d = model.dim();
        if d > MAX_SUPEROPERATOR_DIM {
            return Err(Error::InvalidParameter(format!(
                "Hilbert dimension {d} exceeds the superoperator limit {MAX_SUPEROPERATOR_DIM}"
            )));
        }
        let n = d * d;
        let h = nonzeros(&model.h_eff);
        let mut trip: Vec<(usize, usize, C64)> = Vec::new();
        // I ⊗ (-i H)
        for &(i, k, v) in &h {
            for j in 0..d {
                trip.push((j * d + i, j * d + k, -I * v));
            }
        }
        // (i conj(H)) ⊗ I
        for &(j, l, v) in &h {
            for i in 0..d {
                trip.push((j * d + i, l * d + i, I * v.conj()));
            }
        }
        // r conj(L) ⊗ L
        for jump in &model.jumps {
            if jump.rate == 0.0 {
                continue;
            }
            let l = nonzeros(&jump.op);
            for &(j, lcol, a) in &l {
                for &(i, k, b) in &l {
                    trip.push((j * d + i, lcol * d + k, a.conj() * b * jump.rate));
                }
            }
        }
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseGenerator {
            n,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = L·x`
    #[inline]
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

/// Dense Liouvillian of the model.
pub fn liouvillian_matrix(model: &LindbladModel) -> Result<Superoperator> {
    let gen = SparseGenerator::from_model(model)?;
    Ok(Superoperator {
        matrix: gen.to_dense(),
        dim: model.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_full_model, build_markovian_dephasing_model, ModelParams};

    #[test]
    fn closed_system_rhs_is_commutator() {
        let p = ModelParams {
            damping: [0.0, 0.0],
            ..ModelParams::default()
        };
        let m = build_full_model(&p).unwrap();
        let mut rho = ComplexMatrix::zeros(18, 18);
        rho[(9, 9)] = C64::new(0.5, 0.0);
        rho[(0, 0)] = C64::new(0.5, 0.0);
        rho[(0, 9)] = C64::new(0.1, 0.2);
        rho[(9, 0)] = C64::new(0.1, -0.2);
        let r = rhs(&m, &rho).unwrap();
        let expected = m.h_eff.commutator(&rho).scale(-I);
        assert!(r.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn rhs_dimension_mismatch() {
        let m = build_markovian_dephasing_model(0.1, &ModelParams::default()).unwrap();
        assert!(rhs(&m, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn generator_is_trace_preserving() {
        let m = build_full_model(&ModelParams::default()).unwrap();
        let l = liouvillian_matrix(&m).unwrap();
        let row = l.trace_row();
        assert!(row.iter().all(|z| z.norm() < 1e-10));
        let gen = SparseGenerator::from_model(&m).unwrap();
        assert!(gen.nnz() < 324 * 40);
    }
}
