//! Master-equation dynamics: generator, RK4 integration, steady states and observables.

mod integrate;
mod liouvillian;
mod propagate;
mod steady;

use std::collections::BTreeMap;

pub use integrate::{default_dt, integrate, integrate_with, IntegrateOptions};
pub use liouvillian::{liouvillian_matrix, rhs, SparseGenerator, Superoperator, MAX_SUPEROPERATOR_DIM};
pub use propagate::Stepping;
pub use steady::{steady_state, STEADY_STATE_UNIQUENESS_CONDITION};

pub(crate) use propagate::{ChunkAdvancer, Rk4, Rk4Scratch};

use crate::error::{Error, Result};
use crate::model::{delocalized_to_site, LindbladModel, SectorBasis};
use crate::opalg::{is_psd_with_shift, kron, min_eigenvalue, ComplexMatrix, DimList, C64};

pub const INVERSION: &str = "inversion";
pub const LOG_NEGATIVITY: &str = "log_negativity";
pub const SINGLET_OVERLAP: &str = "singlet_overlap";
pub const MODE_EXCITATION: &str = "mode_excitation";

/// Tolerances a stored state must meet.
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-9;
pub const STATE_POSITIVITY_TOL: f64 = 1e-8;

/// Density matrix with its tensor structure.
#[derive(Clone, Debug)]
pub struct QuantumState {
    pub rho: ComplexMatrix,
    pub dims: DimList,
}

impl QuantumState {
    pub fn new(rho: ComplexMatrix, dims: DimList) -> Result<Self> {
        let n = dims.total();
        if rho.rows() != n || rho.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "state is {}x{} but dims {:?} require {n}x{n}",
                rho.rows(),
                rho.cols(),
                dims.as_slice()
            )));
        }
        Ok(QuantumState { rho, dims })
    }

    /// `|10><10| ⊗ ρ_env` expressed in the model's sector basis: one excitation on site 1,
    /// modes in their environment state.
    pub fn site_one_excited(model: &LindbladModel) -> Result<Self> {
        let mut sector = ComplexMatrix::zeros(2, 2);
        sector[(1, 1)] = C64::new(1.0, 0.0);
        if model.sector_basis == SectorBasis::Delocalized {
            let u = delocalized_to_site();
            sector = u.matmul(&sector).matmul(&u);
        }
        Self::new(kron(&sector, &model.environment_state()), model.dims.clone())
    }

    pub fn trace_error(&self) -> f64 {
        (self.rho.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.rho.hermitian_part())
    }

    /// Hermitian to 1e-10, unit trace to 1e-9, eigenvalues above -1e-8.
    pub fn satisfies_invariants(&self) -> bool {
        self.rho.hermiticity_deviation() <= STATE_HERMITIAN_TOL
            && self.trace_error() <= STATE_TRACE_TOL
            && is_psd_with_shift(&self.rho, STATE_POSITIVITY_TOL)
    }
}

/// `tr(ρ O)` for Hermitian `O`.
pub fn expectation(state: &QuantumState, op: &ComplexMatrix) -> Result<f64> {
    let d = state.rho.rows();
    if op.rows() != d || op.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, state is {d}x{d}",
            op.rows(),
            op.cols()
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += state.rho[(i, k)] * op[(k, i)];
        }
    }
    let scale = op.max_abs().max(1.0);
    if acc.im.abs() > 1e-10 * scale {
        return Err(Error::NotHermitian {
            deviation: acc.im.abs(),
            allowed: 1e-10 * scale,
        });
    }
    Ok(acc.re)
}

/// Stored time samples of an integration.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observables.get(name).map(|v| v.as_slice())
    }

    pub fn final_state(&self) -> Option<&QuantumState> {
        self.states.last()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_full_model, ModelParams};
    use crate::opalg::embed;

    #[test]
    fn expectation_examples() {
        let m = build_full_model(&ModelParams::default()).unwrap();
        let s = QuantumState::site_one_excited(&m).unwrap();
        assert!((expectation(&s, &ComplexMatrix::identity(18)).unwrap() - 1.0).abs() < 1e-15);
        let inv = embed(&ComplexMatrix::diag_real(&[-1.0, 1.0]), 0, &m.dims).unwrap();
        assert!((expectation(&s, &inv).unwrap() - 1.0).abs() < 1e-15);
        let mut other = ComplexMatrix::zeros(18, 18);
        other[(0, 0)] = C64::new(1.0, 0.0);
        let s2 = QuantumState::new(other, m.dims.clone()).unwrap();
        assert!((expectation(&s2, &inv).unwrap() + 1.0).abs() < 1e-15);
        assert!(expectation(&s, &ComplexMatrix::identity(4)).is_err());
        let mut skew = ComplexMatrix::zeros(18, 18);
        skew[(9, 9)] = C64::new(0.0, 1.0);
        assert!(expectation(&s, &skew).is_err());
    }

    #[test]
    fn initial_state_is_valid() {
        let m = build_full_model(&ModelParams::default()).unwrap();
        let s = QuantumState::site_one_excited(&m).unwrap();
        assert!(s.satisfies_invariants());
        assert!(QuantumState::new(ComplexMatrix::identity(3), m.dims.clone()).is_err());
    }
}
