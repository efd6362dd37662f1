//! Tensor-product structure: Kronecker products, slot embedding, partial trace and transpose.
//!
//! Composite bases are ordered lexicographically over the [`DimList`], slot 0 being the
//! most significant digit. This matches `kron(A, B)` placing `A` in slot 0.

use crate::error::{Error, Result};
use crate::opalg::matrix::{ComplexMatrix, C64, ZERO};

/// Ordered subsystem dimensions of a composite Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimList(Vec<usize>);

impl DimList {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions must be non-empty and positive, got {dims:?}"
            )));
        }
        Ok(DimList(dims))
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Split a composite index into per-slot digits.
    pub fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &d) in self.0.iter().enumerate().rev() {
            out[slot] = index % d;
            index /= d;
        }
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        self.0.iter().zip(digits).fold(0, |acc, (&d, &x)| acc * d + x)
    }

    fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        let n = self.total();
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but dims {:?} require {n}x{n}",
                m.rows(),
                m.cols(),
                self.0
            )));
        }
        Ok(())
    }
}

/// (A ⊗ B)[(i·rB + k), (j·cB + l)] = A[i][j]·B[k][l]
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut it = factors.iter();
    let first = (*it.next().expect("kron_all needs at least one factor")).clone();
    it.fold(first, |acc, f| kron(&acc, f))
}

/// Lift `op` acting on `slot` to the full space, identity elsewhere.
pub fn embed(op: &ComplexMatrix, slot: usize, dims: &DimList) -> Result<ComplexMatrix> {
    let d = dims.as_slice();
    if slot >= d.len() {
        return Err(Error::DimensionMismatch(format!(
            "slot {slot} out of range for dims {d:?}"
        )));
    }
    if !op.is_square() || op.rows() != d[slot] {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but slot {slot} has dimension {}",
            op.rows(),
            op.cols(),
            d[slot]
        )));
    }
    let left: usize = d[..slot].iter().product();
    let right: usize = d[slot + 1..].iter().product();
    let lifted = kron(&ComplexMatrix::identity(left), op);
    Ok(kron(&lifted, &ComplexMatrix::identity(right)))
}

/// Truncated bosonic annihilation operator with `n_fock` levels.
pub fn make_destroy(n_fock: usize) -> Result<ComplexMatrix> {
    if n_fock < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fock cutoff must be at least 2, got {n_fock}"
        )));
    }
    Ok(ComplexMatrix::from_fn(n_fock, n_fock, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    }))
}

/// Trace out every slot not listed in `keep`. The kept slots retain their original order.
pub fn partial_trace(rho: &ComplexMatrix, dims: &DimList, keep: &[usize]) -> Result<ComplexMatrix> {
    dims.check_square(rho)?;
    let d = dims.as_slice();
    if let Some(&bad) = keep.iter().find(|&&s| s >= d.len()) {
        return Err(Error::DimensionMismatch(format!(
            "slot {bad} out of range for dims {d:?}"
        )));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..d.len()).filter(|s| !keep_sorted.contains(s)).collect();

    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&s| d[s]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&s| d[s]).collect();
    let n_keep: usize = kept_dims.iter().product();
    let n_trace: usize = traced_dims.iter().product();

    // full index for (kept multi-index a, traced multi-index t)
    let mut digits = vec![0usize; d.len()];
    let mut index_of = vec![0usize; n_keep * n_trace];
    for a in 0..n_keep {
        let mut rem = a;
        for (pos, &s) in keep_sorted.iter().enumerate().rev() {
            digits[s] = rem % kept_dims[pos];
            rem /= kept_dims[pos];
        }
        for t in 0..n_trace {
            let mut rem = t;
            for (pos, &s) in traced.iter().enumerate().rev() {
                digits[s] = rem % traced_dims[pos];
                rem /= traced_dims[pos];
            }
            index_of[a * n_trace + t] = dims.compose(&digits);
        }
    }

    let mut out = ComplexMatrix::zeros(n_keep, n_keep);
    for a in 0..n_keep {
        for b in 0..n_keep {
            let mut acc = ZERO;
            for t in 0..n_trace {
                acc += rho[(index_of[a * n_trace + t], index_of[b * n_trace + t])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Transpose the indices belonging to `slot`.
pub fn partial_transpose(rho: &ComplexMatrix, dims: &DimList, slot: usize) -> Result<ComplexMatrix> {
    dims.check_square(rho)?;
    if slot >= dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "slot {slot} out of range for dims {:?}",
            dims.as_slice()
        )));
    }
    let n = dims.total();
    let mut di = vec![0usize; dims.len()];
    let mut dj = vec![0usize; dims.len()];
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        dims.digits(i, &mut di);
        for j in 0..n {
            dims.digits(j, &mut dj);
            std::mem::swap(&mut di[slot], &mut dj[slot]);
            out[(dims.compose(&di), dims.compose(&dj))] = rho[(i, j)];
            std::mem::swap(&mut di[slot], &mut dj[slot]);
        }
    }
    Ok(out)
}
