//! Reduced dimer states, logarithmic negativity and singlet overlap.
//!
//! Entanglement is always evaluated between the two sites, so delocalized-basis states are
//! rotated to the site basis first.

use crate::dynamics::QuantumState;
use crate::error::{Error, Result};
use crate::model::{delocalized_to_site, SectorBasis};
use crate::opalg::{partial_trace, partial_transpose, trace_norm, ComplexMatrix, DimList, C64};

/// 2x2 density matrix of the one-excitation sector with its basis tag.
#[derive(Clone, Debug)]
pub struct DimerState {
    pub rho: ComplexMatrix,
    pub basis: SectorBasis,
}

impl DimerState {
    pub fn new(rho: ComplexMatrix, basis: SectorBasis) -> Result<Self> {
        if rho.rows() != 2 || rho.cols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "dimer state must be 2x2, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(DimerState { rho, basis })
    }

    /// `|d><d|` in the requested basis.
    pub fn singlet(basis: SectorBasis) -> Self {
        let delocalized = DimerState {
            rho: ComplexMatrix::diag_real(&[0.0, 1.0]),
            basis: SectorBasis::Delocalized,
        };
        basis_change(&delocalized, basis)
    }

    pub fn in_site_basis(&self) -> ComplexMatrix {
        basis_change(self, SectorBasis::Site).rho
    }
}

/// Trace out every mode slot.
pub fn reduce_to_dimer(state: &QuantumState, basis: SectorBasis) -> Result<DimerState> {
    if state.dims.as_slice().first() != Some(&2) {
        return Err(Error::DimensionMismatch(format!(
            "slot 0 must be the two-dimensional sector, dims are {:?}",
            state.dims.as_slice()
        )));
    }
    let rho = if state.dims.len() == 1 {
        state.rho.clone()
    } else {
        partial_trace(&state.rho, &state.dims, &[0])?
    };
    DimerState::new(rho, basis)
}

pub fn basis_change(s: &DimerState, target: SectorBasis) -> DimerState {
    if s.basis == target {
        return s.clone();
    }
    let u = delocalized_to_site();
    DimerState {
        rho: u.matmul(&s.rho).matmul(&u),
        basis: target,
    }
}

/// `⟨01|ρ|10⟩`
pub fn site_coherence(s: &DimerState) -> C64 {
    s.in_site_basis()[(0, 1)]
}

/// `log₂(1 + 2|c|)` with `c = ⟨01|ρ|10⟩`.
pub fn log_negativity(s: &DimerState) -> f64 {
    (1.0 + 2.0 * site_coherence(s).norm()).log2()
}

/// Sector state placed in the two-qubit space (`|01>` at index 1, `|10>` at index 2).
pub fn embed_two_qubit(s: &DimerState) -> ComplexMatrix {
    let site = s.in_site_basis();
    let idx = [1usize, 2];
    let mut full = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            full[(idx[a], idx[b])] = site[(a, b)];
        }
    }
    full
}

/// Log negativity by partial transposition of the embedded two-qubit state.
pub fn log_negativity_pipeline(s: &DimerState) -> Result<f64> {
    let full = embed_two_qubit(s);
    let dims = DimList::new(vec![2, 2])?;
    let pt = partial_transpose(&full, &dims, 0)?;
    Ok(trace_norm(&pt)?.log2())
}

/// `⟨d|ρ|d⟩`
pub fn singlet_overlap(s: &DimerState) -> f64 {
    basis_change(s, SectorBasis::Delocalized).rho[(1, 1)].re
}

/// `⟨10|ρ|10⟩ − ⟨01|ρ|01⟩`
pub fn inversion(s: &DimerState) -> f64 {
    let site = s.in_site_basis();
    site[(1, 1)].re - site[(0, 0)].re
}
