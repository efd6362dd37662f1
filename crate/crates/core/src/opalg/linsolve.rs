//! LU factorisation with partial pivoting and a 1-norm condition estimate.

use crate::error::{Error, Result};
use crate::opalg::matrix::{ComplexMatrix, C64, ZERO};

/// Systems whose estimated 1-norm condition number exceeds this are reported as singular.
pub const SINGULAR_CONDITION: f64 = 1e14;

/// `PA = LU`, stored compactly. Row `i` of `PA` is row `perm[i]` of `A`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: ComplexMatrix,
    perm: Vec<usize>,
    norm1: f64,
    min_pivot: f64,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            min_pivot = min_pivot.min(pmag);
            if p != k {
                perm.swap(p, k);
                let s = lu.as_mut_slice();
                for j in 0..n {
                    s.swap(k * n + j, p * n + j);
                }
            }
            let pivot = lu[(k, k)];
            if pivot == ZERO {
                continue;
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                if factor == ZERO {
                    continue;
                }
                lu[(i, k)] = factor;
                let s = lu.as_mut_slice();
                let (upper, lower) = s.split_at_mut(i * n);
                let krow = &upper[k * n + k + 1..k * n + n];
                let irow = &mut lower[k + 1..n];
                for (x, y) in irow.iter_mut().zip(krow) {
                    *x -= factor * y;
                }
            }
        }
        Ok(Lu {
            n,
            lu,
            perm,
            norm1,
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn exactly_singular(&self) -> bool {
        self.min_pivot <= f64::EPSILON * self.norm1 * 1e-3 || self.min_pivot == 0.0
    }

    /// Solve `A x = b` (no conditioning checks).
    pub fn solve_unchecked(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solve `A† y = c`.
    fn solve_adjoint_unchecked(&self, c: &[C64]) -> Vec<C64> {
        let n = self.n;
        // A = Pᵀ L U  =>  A† = U† L† P
        let mut w = c.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for k in 0..i {
                s -= self.lu[(k, i)].conj() * w[k];
            }
            w[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= self.lu[(k, i)].conj() * w[k];
            }
            w[i] = s;
        }
        let mut y = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = w[i];
        }
        y
    }

    /// Hager–Higham estimate of `‖A‖₁·‖A⁻¹‖₁`.
    pub fn condition_estimate(&self) -> f64 {
        if self.exactly_singular() {
            return f64::INFINITY;
        }
        let n = self.n;
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for iter in 0..5 {
            let y = self.solve_unchecked(&x);
            let ynorm: f64 = y.iter().map(|z| z.norm()).sum();
            if !ynorm.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && ynorm <= est {
                break;
            }
            est = ynorm;
            let xi: Vec<C64> = y
                .iter()
                .map(|z| if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) })
                .collect();
            let z = self.solve_adjoint_unchecked(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if iter > 0 && zmax <= ztx {
                break;
            }
            x = vec![ZERO; n];
            x[j] = C64::new(1.0, 0.0);
        }
        est * self.norm1
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.n;
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve_unchecked(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Solve `A x = b`, refusing singular or numerically rank-deficient systems.
pub fn solve_linear(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {} for a {}x{} system",
            b.len(),
            a.rows(),
            a.cols()
        )));
    }
    let lu = Lu::factor(a)?;
    let condition = lu.condition_estimate();
    if condition > SINGULAR_CONDITION {
        return Err(Error::Singular { condition });
    }
    let x = lu.solve_unchecked(b);
    let ax = a.matvec(&x);
    let resid = norm2_diff(&ax, b);
    let scale = lu.norm1 * norm2(&x) + norm2(b);
    if resid > 1e-9 * scale {
        return Err(Error::Singular { condition });
    }
    Ok(x)
}

pub(crate) fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn norm2_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
