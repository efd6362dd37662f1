use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::opalg::linsolve::norm2;
use crate::opalg::{min_eigenvalue, ComplexMatrix, Lu, C64, ONE, ZERO};

use super::liouvillian::liouvillian_matrix;
use super::{QuantumState, STATE_POSITIVITY_TOL};

/// Bordered systems with a larger estimated condition number signal a degenerate kernel.
pub const STEADY_STATE_UNIQUENESS_CONDITION: f64 = 1e12;

const RESIDUAL_TOL: f64 = 1e-9;

/// Unique stationary state of the model.
///
/// The first row of `L vec(ρ) = 0` is replaced by `tr ρ = 1`. When the kernel of `L` is more
/// than one-dimensional the bordered matrix is singular, which the condition estimate detects.
pub fn steady_state(model: &LindbladModel) -> Result<QuantumState> {
    let d = model.dim();
    let l = liouvillian_matrix(model)?;
    let n = d * d;
    let mut a = l.matrix.clone();
    for col in 0..n {
        a[(0, col)] = ZERO;
    }
    for i in 0..d {
        a[(0, i + d * i)] = ONE;
    }
    let mut b = vec![ZERO; n];
    b[0] = ONE;

    let lu = Lu::factor(&a)?;
    let condition = lu.condition_estimate();
    if !(condition <= STEADY_STATE_UNIQUENESS_CONDITION) {
        return Err(Error::NonUniqueSteadyState { condition });
    }
    let x = lu.solve_unchecked(&b);

    let residual = norm2(&l.matrix.matvec(&x));
    if residual > RESIDUAL_TOL {
        return Err(Error::InvariantViolation {
            t: f64::INFINITY,
            what: "steady-state residual",
            value: residual,
            dt: 0.0,
        });
    }
    let rho = ComplexMatrix::unvectorize(d, &x)?.hermitian_part();
    let tr: C64 = rho.trace();
    let rho = rho.scale_real(1.0 / tr.re);
    let lowest = min_eigenvalue(&rho)?;
    if lowest < -STATE_POSITIVITY_TOL {
        return Err(Error::InvariantViolation {
            t: f64::INFINITY,
            what: "steady-state minimum eigenvalue",
            value: lowest,
            dt: 0.0,
        });
    }
    log::debug!("steady state: condition {condition:.3e}, residual {residual:.3e}, min eigenvalue {lowest:.3e}");
    QuantumState::new(rho, model.dims.clone())
}
