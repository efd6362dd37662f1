//! Physical models of the dephased dimer.
//!
//! The dimer is always represented by its one-excitation sector, a two-dimensional space
//! occupying slot 0 of the model's [`DimList`]. In the site basis index 0 is `|01>` (site 2
//! excited) and index 1 is `|10>` (site 1 excited). In the delocalized basis index 0 is
//! `|u> = (|01> + |10>)/√2` and index 1 is the singlet `|d> = (|01> - |10>)/√2`.
//!
//! Dissipator convention: each jump `(L, r)` contributes `r·LρL†` and the effective Hamiltonian
//! carries the matching `-(i/2)·r·L†L`. A mode damped at rate κ therefore appears as the jump
//! `(a, 2κ)` together with `-iκ a†a` inside `H_eff`, so "κ" is the amplitude damping rate.

use crate::error::{Error, Result};
use crate::opalg::{embed, kron, make_destroy, ComplexMatrix, DimList, C64, I};

/// Which basis the sector slot of a model (or a [`DimerState`](crate::entanglement::DimerState)) uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorBasis {
    /// `{|01>, |10>}`
    Site,
    /// `{|u>, |d>}`
    Delocalized,
}

/// Unitary taking delocalized-basis coordinates to site-basis coordinates. Real, symmetric
/// and its own inverse.
pub fn delocalized_to_site() -> ComplexMatrix {
    let s = 0.5f64.sqrt();
    ComplexMatrix::from_real(&[&[s, s], &[s, -s]])
}

/// Physical parameters, in units where the exchange coupling `J` sets the energy scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// ω₁, ω₂
    pub site_freq: [f64; 2],
    /// J
    pub exchange: f64,
    /// Ω₁, Ω₂
    pub mode_freq: [f64; 2],
    /// g₁, g₂
    pub coupling: [f64; 2],
    /// κ₁, κ₂
    pub damping: [f64; 2],
    /// Fock cutoff dimension per mode.
    pub n_fock: usize,
    /// Thermal occupation of the damping bath.
    pub n_th: f64,
}

impl Default for ModelParams {
    /// ω = 0, J = 1, Ω = 2J, g = J, κ = 20J, three Fock levels, zero temperature.
    fn default() -> Self {
        ModelParams {
            site_freq: [0.0, 0.0],
            exchange: 1.0,
            mode_freq: [2.0, 2.0],
            coupling: [1.0, 1.0],
            damping: [20.0, 20.0],
            n_fock: 3,
            n_th: 0.0,
        }
    }
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .site_freq
            .iter()
            .chain(&self.mode_freq)
            .chain(&self.coupling)
            .chain(&self.damping)
            .chain([&self.exchange, &self.n_th]);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.exchange <= 0.0 {
            return Err(Error::InvalidParameter(format!("J must be positive, got {}", self.exchange)));
        }
        if self.damping.iter().any(|&k| k < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "damping rates must be non-negative, got {:?}",
                self.damping
            )));
        }
        if self.n_fock < 2 {
            return Err(Error::InvalidParameter(format!(
                "Fock cutoff must be at least 2, got {}",
                self.n_fock
            )));
        }
        if self.n_th < 0.0 {
            return Err(Error::InvalidParameter(format!("n_th must be non-negative, got {}", self.n_th)));
        }
        Ok(())
    }

    /// Both sites, modes, couplings and damping rates identical.
    pub fn is_symmetric(&self) -> bool {
        approx_eq(self.site_freq[0], self.site_freq[1])
            && approx_eq(self.mode_freq[0], self.mode_freq[1])
            && approx_eq(self.coupling[0], self.coupling[1])
            && approx_eq(self.damping[0], self.damping[1])
    }

    /// Largest per-site γ_eff = 2g²/κ, if any site is damped.
    pub fn dephasing_rate(&self) -> Option<f64> {
        (0..2)
            .filter(|&i| self.damping[i] > 0.0)
            .map(|i| 2.0 * self.coupling[i].powi(2) / self.damping[i])
            .reduce(f64::max)
    }
}

/// The Markovianity index: `g = √f·g₀`, `κ = f·κ₀`, so `g²/κ` does not depend on `f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FParametrization {
    pub f: f64,
    pub g0: [f64; 2],
    pub kappa0: [f64; 2],
}

impl FParametrization {
    /// Takes `g₀`, `κ₀` from the couplings and damping rates of `base`.
    pub fn from_base(f: f64, base: &ModelParams) -> Self {
        FParametrization {
            f,
            g0: base.coupling,
            kappa0: base.damping,
        }
    }

    pub fn apply(&self, base: &ModelParams) -> Result<ModelParams> {
        if !(self.f > 0.0) || !self.f.is_finite() {
            return Err(Error::InvalidParameter(format!("f must be positive, got {}", self.f)));
        }
        let sf = self.f.sqrt();
        Ok(ModelParams {
            coupling: [sf * self.g0[0], sf * self.g0[1]],
            damping: [self.f * self.kappa0[0], self.f * self.kappa0[1]],
            ..base.clone()
        })
    }
}

/// Rescale the couplings and damping rates of `base` (read as g₀, κ₀) by the index `f`.
pub fn apply_f(f: f64, base: &ModelParams) -> Result<ModelParams> {
    FParametrization::from_base(f, base).apply(base)
}

/// γ_eff = 2g²/κ. The constant 2 reproduces γ_eff = J/10 at g = J, κ = 20J.
pub fn effective_dephasing_rate(g: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "damping rate must be positive, got {kappa}"
        )));
    }
    Ok(2.0 * g * g / kappa)
}

/// A jump operator and its rate.
#[derive(Clone, Debug)]
pub struct Jump {
    pub op: ComplexMatrix,
    pub rate: f64,
}

/// Effective non-Hermitian Hamiltonian plus jumps, on a tensor-structured space.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    pub h_eff: ComplexMatrix,
    pub jumps: Vec<Jump>,
    pub dims: DimList,
    pub labels: Vec<String>,
    pub sector_basis: SectorBasis,
    /// Bath occupation; sets the mode state used as environment for tomography.
    pub n_th: f64,
    /// Effective dephasing rate of the noise, when meaningful.
    pub dephasing_rate: Option<f64>,
}

impl LindbladModel {
    /// Assemble `H_eff = H - (i/2) Σ r L†L` from a Hermitian `h`.
    pub fn from_parts(
        h: ComplexMatrix,
        jumps: Vec<Jump>,
        dims: DimList,
        labels: Vec<String>,
        sector_basis: SectorBasis,
        n_th: f64,
        dephasing_rate: Option<f64>,
    ) -> Result<Self> {
        let n = dims.total();
        if h.rows() != n || !h.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian is {}x{}, dims {:?} require {n}x{n}",
                h.rows(),
                h.cols(),
                dims.as_slice()
            )));
        }
        h.require_hermitian()?;
        if labels.len() != dims.len() {
            return Err(Error::DimensionMismatch("one label per subsystem is required".into()));
        }
        let mut h_eff = h;
        for j in &jumps {
            if j.op.rows() != n || !j.op.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "jump operator is {}x{}, expected {n}x{n}",
                    j.op.rows(),
                    j.op.cols()
                )));
            }
            if !(j.rate >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative jump rate {}", j.rate)));
            }
            let ldl = j.op.adjoint().matmul(&j.op);
            h_eff += &ldl.scale(-I * (0.5 * j.rate));
        }
        Ok(LindbladModel {
            h_eff,
            jumps,
            dims,
            labels,
            sector_basis,
            n_th,
            dephasing_rate,
        })
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    /// Hermitian part of `H_eff`, i.e. the physical Hamiltonian.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        self.h_eff.hermitian_part()
    }

    /// `(H_eff - H_eff†)/(-2i)`, which equals `½ Σ r L†L`.
    pub fn damping_operator(&self) -> ComplexMatrix {
        let diff = &self.h_eff - &self.h_eff.adjoint();
        diff.scale(C64::new(0.0, 0.5))
    }

    /// Slots other than the sector slot 0.
    pub fn mode_slots(&self) -> std::ops::Range<usize> {
        1..self.dims.len()
    }

    /// Product of (truncated) thermal states over all mode slots; `1x1` identity without modes.
    pub fn environment_state(&self) -> ComplexMatrix {
        let mut env = ComplexMatrix::identity(1);
        for slot in self.mode_slots() {
            env = kron(&env, &thermal_state(self.dims.as_slice()[slot], self.n_th));
        }
        env
    }

    /// `⟨a†a⟩` operators for every mode slot, lifted to the full space.
    pub fn number_operators(&self) -> Vec<ComplexMatrix> {
        self.mode_slots()
            .map(|slot| {
                let a = make_destroy(self.dims.as_slice()[slot]).expect("mode dimension >= 2");
                embed(&a.adjoint().matmul(&a), slot, &self.dims).expect("slot in range")
            })
            .collect()
    }
}

/// Truncated Bose–Einstein state with mean occupation `n_th` (vacuum when `n_th = 0`).
pub fn thermal_state(n_levels: usize, n_th: f64) -> ComplexMatrix {
    let ratio = if n_th > 0.0 { n_th / (1.0 + n_th) } else { 0.0 };
    let weights: Vec<f64> = (0..n_levels).map(|k| ratio.powi(k as i32)).collect();
    let z: f64 = weights.iter().sum();
    ComplexMatrix::diag_real(&weights.iter().map(|w| w / z).collect::<Vec<_>>())
}

/// Sector Hamiltonian `[[ω₂, J], [J, ω₁]]` in the site basis.
fn sector_hamiltonian(p: &ModelParams) -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[p.site_freq[1], p.exchange], &[p.exchange, p.site_freq[0]]])
}

/// σ₁ᶻ and σ₂ᶻ restricted to the sector, site basis.
pub fn sector_sigma_z() -> [ComplexMatrix; 2] {
    [
        ComplexMatrix::diag_real(&[-1.0, 1.0]),
        ComplexMatrix::diag_real(&[1.0, -1.0]),
    ]
}

fn mode_jumps(a: &ComplexMatrix, kappa: f64, n_th: f64) -> Vec<Jump> {
    let mut jumps = vec![Jump {
        op: a.clone(),
        rate: 2.0 * kappa * (1.0 + n_th),
    }];
    if n_th > 0.0 {
        jumps.push(Jump {
            op: a.adjoint(),
            rate: 2.0 * kappa * n_th,
        });
    }
    jumps
}

/// Dimer with one damped local mode per site; dims `[2, n_fock, n_fock]`, site basis.
pub fn build_full_model(p: &ModelParams) -> Result<LindbladModel> {
    p.validate()?;
    let n = p.n_fock;
    let dims = DimList::new(vec![2, n, n])?;
    let a = make_destroy(n)?;
    let num = a.adjoint().matmul(&a);
    let x = &a + &a.adjoint();
    let [sz1, sz2] = sector_sigma_z();

    let mut h = embed(&sector_hamiltonian(p), 0, &dims)?;
    let mut jumps = Vec::new();
    for (site, sz) in [sz1, sz2].iter().enumerate() {
        let slot = site + 1;
        h += &embed(&num, slot, &dims)?.scale_real(p.mode_freq[site]);
        let coupling = embed(sz, 0, &dims)?.matmul(&embed(&x, slot, &dims)?);
        h += &coupling.scale_real(p.coupling[site]);
        let a_full = embed(&a, slot, &dims)?;
        jumps.extend(mode_jumps(&a_full, p.damping[site], p.n_th));
    }
    LindbladModel::from_parts(
        h,
        jumps,
        dims,
        vec!["dimer".into(), "mode1".into(), "mode2".into()],
        SectorBasis::Site,
        p.n_th,
        p.dephasing_rate(),
    )
}

fn single_mode_model(
    p: &ModelParams,
    dimer_h: ComplexMatrix,
    coupling: f64,
    label: &str,
    dephasing_rate: Option<f64>,
) -> Result<LindbladModel> {
    let n = p.n_fock;
    let dims = DimList::new(vec![2, n])?;
    let a = make_destroy(n)?;
    let x = &a + &a.adjoint();
    let sx = ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let mut h = kron(&dimer_h, &ComplexMatrix::identity(n));
    h += &kron(&ComplexMatrix::identity(2), &a.adjoint().matmul(&a)).scale_real(p.mode_freq[0]);
    h += &kron(&sx, &x).scale_real(coupling);
    let a_full = kron(&ComplexMatrix::identity(2), &a);
    LindbladModel::from_parts(
        h,
        mode_jumps(&a_full, p.damping[0], p.n_th),
        dims,
        vec!["dimer".into(), label.into()],
        SectorBasis::Delocalized,
        p.n_th,
        dephasing_rate,
    )
}

/// Symmetric dimer reduced to the single relative mode `a_m`; dims `[2, n_fock]`,
/// delocalized basis, coupling `√2·g`.
pub fn build_symmetric_model(p: &ModelParams) -> Result<LindbladModel> {
    p.validate()?;
    if !p.is_symmetric() {
        return Err(Error::InvalidParameter(
            "symmetric model needs equal site frequencies, mode frequencies, couplings and damping rates; \
             use the full model instead"
                .into(),
        ));
    }
    let w = p.site_freq[0];
    let j = p.exchange;
    let dimer_h = ComplexMatrix::diag_real(&[w + j, w - j]);
    single_mode_model(p, dimer_h, 2f64.sqrt() * p.coupling[0], "mode_rel", p.dephasing_rate())
}

/// Both sites coupled to one shared damped mode; dims `[2, n_fock]`, delocalized basis.
/// Projecting `(g₁σ₁ᶻ + g₂σ₂ᶻ)(a + a†)` onto the sector leaves `(g₁ - g₂)` times the
/// `|u><d| + |d><u|` flip, with no √2 factor since the mode is not a relative coordinate.
pub fn build_global_mode_model(p: &ModelParams) -> Result<LindbladModel> {
    p.validate()?;
    if !approx_eq(p.mode_freq[0], p.mode_freq[1]) || !approx_eq(p.damping[0], p.damping[1]) {
        return Err(Error::InvalidParameter(
            "global-mode model needs equal mode frequencies and damping rates".into(),
        ));
    }
    let u = delocalized_to_site();
    let dimer_h = u.matmul(&sector_hamiltonian(p)).matmul(&u);
    let g = p.coupling[0] - p.coupling[1];
    let rate = if p.damping[0] > 0.0 {
        Some(2.0 * g * g / p.damping[0])
    } else {
        None
    };
    single_mode_model(p, dimer_h, g, "mode_global", rate)
}

/// Sector-only Lindblad model with local σᶻ dephasing at rate `gamma_eff` on each site.
pub fn build_markovian_dephasing_model(gamma_eff: f64, p: &ModelParams) -> Result<LindbladModel> {
    p.validate()?;
    if !(gamma_eff >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dephasing rate must be non-negative, got {gamma_eff}"
        )));
    }
    let dims = DimList::new(vec![2])?;
    let jumps = sector_sigma_z()
        .into_iter()
        .map(|op| Jump { op, rate: gamma_eff })
        .collect();
    LindbladModel::from_parts(
        sector_hamiltonian(p),
        jumps,
        dims,
        vec!["dimer".into()],
        SectorBasis::Site,
        0.0,
        Some(gamma_eff),
    )
}

/// Two-level-mode approximation of the steady-state singlet population:
/// `(4g² + κ² + (2J+Ω)²) / (2(4g² + κ² + 4J² + Ω²))`.
pub fn steady_state_dd_closed_form(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if !p.is_symmetric() {
        return Err(Error::InvalidParameter("closed form needs symmetric parameters".into()));
    }
    let g2 = p.coupling[0].powi(2);
    let k2 = p.damping[0].powi(2);
    let j = p.exchange;
    let om = p.mode_freq[0];
    Ok((4.0 * g2 + k2 + (2.0 * j + om).powi(2)) / (2.0 * (4.0 * g2 + k2 + 4.0 * j * j + om * om)))
}
