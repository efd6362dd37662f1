//! Non-Markovianity of the reduced dimer dynamics, measured by the failure of
//! complete positivity of the intermediate maps `E(t+ε, t) = Λ(t+ε)Λ(t)⁻¹`.
//!
//! `g(t) = (‖(E ⊗ id)|Φ><Φ|‖₁ − 1)/ε`, `I = ∫ g dt` and `D_NM = I/(I+1)`.
//! All maps act on column-stacked 2x2 sector matrices in the site basis.

use rayon::prelude::*;

use crate::dynamics::{ChunkAdvancer, Rk4, Rk4Scratch, SparseGenerator, Stepping, Superoperator};
use crate::error::{Error, Result};
use crate::model::{delocalized_to_site, LindbladModel, ModelParams, SectorBasis};
use crate::opalg::{condition_number_2, kron, partial_trace, trace_norm, ComplexMatrix, Lu, C64, ONE};

/// Maps with a larger 2-norm condition number are not inverted.
pub const MAP_SINGULAR_CONDITION: f64 = 1e10;
const TRACE_DRIFT_ABORT: f64 = 1e-6;

/// `Λ(t,0)` sampled on a uniform grid `t_k = k·spacing`.
#[derive(Clone, Debug)]
pub struct DynamicalMapFamily {
    pub spacing: f64,
    pub times: Vec<f64>,
    pub maps: Vec<Superoperator>,
    /// Mode state the sector is paired with at `t = 0`.
    pub environment_state: ComplexMatrix,
    pub dephasing_rate: Option<f64>,
    /// Integration step actually used.
    pub dt: f64,
}

impl DynamicalMapFamily {
    /// Grid index of `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = (t / self.spacing).round();
        if k < 0.0 || (k * self.spacing - t).abs() > 1e-9 * t.abs().max(1.0) {
            return None;
        }
        let k = k as usize;
        (k < self.times.len()).then_some(k)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Apply `Λ(t_k, 0)` to a site-basis sector state.
    pub fn apply(&self, k: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.maps[k].apply(rho)
    }
}

/// `|i><j|` for the 2x2 sector, column-stacked index `i + 2j`.
fn sector_unit(index: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(2, 2);
    e[(index % 2, index / 2)] = ONE;
    e
}

fn rotate(rho: &ComplexMatrix, basis: SectorBasis) -> ComplexMatrix {
    match basis {
        SectorBasis::Site => rho.clone(),
        SectorBasis::Delocalized => {
            let u = delocalized_to_site();
            u.matmul(rho).matmul(&u)
        }
    }
}

/// Process tomography of the reduced dynamics on the grid `0, spacing, …, horizon`.
///
/// Each unit matrix `|i><j| ⊗ ρ_env` is propagated under the full model and traced over the
/// modes; the results form the columns of `Λ(t,0)`. The RK4 step is the largest step not
/// exceeding `dt` that divides `spacing`.
pub fn tomography(model: &LindbladModel, spacing: f64, horizon: f64, dt: f64) -> Result<DynamicalMapFamily> {
    tomography_with(model, spacing, horizon, dt, Stepping::Auto)
}

pub fn tomography_with(
    model: &LindbladModel,
    spacing: f64,
    horizon: f64,
    dt: f64,
    stepping: Stepping,
) -> Result<DynamicalMapFamily> {
    if !(spacing > 0.0) || !(horizon >= spacing) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tomography needs 0 < spacing <= horizon and dt > 0 (spacing = {spacing}, horizon = {horizon}, dt = {dt})"
        )));
    }
    if model.dims.as_slice()[0] != 2 {
        return Err(Error::DimensionMismatch("slot 0 must be the two-dimensional sector".into()));
    }
    let n_intervals = (horizon / spacing - 1e-9).ceil() as usize;
    let steps = (spacing / dt - 1e-9).ceil().max(1.0) as usize;
    let h = spacing / steps as f64;
    let d = model.dim();
    let env = model.environment_state();
    let rk4 = Rk4::new(SparseGenerator::from_model(model)?, h);
    let advancer = ChunkAdvancer::new(&rk4, steps, n_intervals, 4, stepping);
    log::debug!(
        "tomography: {} intervals of {steps} steps (h = {h:.3e}), dense propagator: {}",
        n_intervals,
        advancer.is_dense()
    );

    let reduce = |y: &[C64]| -> Result<[C64; 4]> {
        let rho = ComplexMatrix::unvectorize(d, y)?;
        let sector = if model.dims.len() == 1 {
            rho
        } else {
            partial_trace(&rho, &model.dims, &[0])?
        };
        let v = rotate(&sector, model.sector_basis).vectorize();
        Ok([v[0], v[1], v[2], v[3]])
    };

    // columns[c][k] = vec of Λ(t_k)(E_c) in the site basis
    let columns: Vec<Result<Vec<[C64; 4]>>> = (0..4)
        .into_par_iter()
        .map(|c| {
            let input = rotate(&sector_unit(c), model.sector_basis);
            let mut y = kron(&input, &env).vectorize();
            let mut scratch = Rk4Scratch::new(d * d);
            let mut out = Vec::with_capacity(n_intervals + 1);
            out.push(reduce(&y)?);
            for _ in 0..n_intervals {
                advancer.advance(&mut y, &mut scratch);
                out.push(reduce(&y)?);
            }
            Ok(out)
        })
        .collect();
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;

    let mut times = Vec::with_capacity(n_intervals + 1);
    let mut maps = Vec::with_capacity(n_intervals + 1);
    for k in 0..=n_intervals {
        let t = k as f64 * spacing;
        let m = ComplexMatrix::from_fn(4, 4, |r, c| columns[c][k][r]);
        for c in 0..4 {
            let target = if c == 0 || c == 3 { 1.0 } else { 0.0 };
            let drift = (m[(0, c)] + m[(3, c)] - C64::new(target, 0.0)).norm();
            if drift > TRACE_DRIFT_ABORT {
                return Err(Error::InvariantViolation {
                    t,
                    what: "map trace preservation",
                    value: drift,
                    dt: h,
                });
            }
        }
        times.push(t);
        maps.push(Superoperator::new(m)?);
    }
    Ok(DynamicalMapFamily {
        spacing,
        times,
        maps,
        environment_state: env,
        dephasing_rate: model.dephasing_rate,
        dt: h,
    })
}

fn grid_index(family: &DynamicalMapFamily, t: f64, what: &str) -> Result<usize> {
    family
        .index_of(t)
        .ok_or_else(|| Error::InvalidParameter(format!("{what} = {t} is not on the tomography grid")))
}

/// `E(t+ε, t) = Λ(t+ε)·Λ(t)⁻¹`.
pub fn intermediate_map(family: &DynamicalMapFamily, t: f64, eps: f64) -> Result<Superoperator> {
    let k = grid_index(family, t, "t")?;
    let k2 = grid_index(family, t + eps, "t + ε")?;
    if k2 <= k {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be a positive grid multiple")));
    }
    let base = &family.maps[k].matrix;
    let condition = condition_number_2(base)?;
    if !(condition <= MAP_SINGULAR_CONDITION) {
        return Err(Error::SingularMap { t, condition });
    }
    let inv = Lu::factor(base)?.inverse();
    Superoperator::new(family.maps[k2].matrix.matmul(&inv))
}

/// `(E ⊗ id)|Φ><Φ|` with `|Φ> = (|00> + |11>)/√2`, output factor first.
pub fn choi_matrix(e: &Superoperator) -> Result<ComplexMatrix> {
    if e.dim != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Choi matrix is defined here for maps on 2x2 matrices, got dimension {}",
            e.dim
        )));
    }
    let mut choi = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let col = i + 2 * j;
            for a in 0..2 {
                for b in 0..2 {
                    choi[(2 * a + i, 2 * b + j)] = e.matrix[(a + 2 * b, col)] * 0.5;
                }
            }
        }
    }
    Ok(choi)
}

/// Rate of CP violation of `E(t+ε, t)`, clamped at zero.
pub fn g_of_t(family: &DynamicalMapFamily, t: f64, eps: f64) -> Result<f64> {
    let e = intermediate_map(family, t, eps)?;
    let choi = choi_matrix(&e)?.hermitian_part();
    Ok(((trace_norm(&choi)? - 1.0) / eps).max(0.0))
}

#[derive(Clone, Debug)]
pub struct NMResult {
    /// `(t, g(t))`, with skipped times filled in.
    pub g_series: Vec<(f64, f64)>,
    pub integral: f64,
    pub d_nm: f64,
    pub epsilon: f64,
    pub horizon: f64,
    /// Times where `Λ(t)` was too ill-conditioned to invert.
    pub skipped: Vec<f64>,
    /// Set when the horizon is shorter than `5/γ_eff`.
    pub horizon_warning: bool,
}

/// `ε = 0.2/κ_max` clamped to `[0.001/J, 0.01/J]`.
///
/// The finite difference has to resolve the mode memory time `1/κ`, which drops below
/// `0.01/J` once `κ` exceeds `20J`. Below `0.001/J` the `1/ε` amplification of rounding noise
/// in `g` outweighs the gain in resolution.
pub fn default_epsilon(p: &ModelParams) -> f64 {
    let kappa = p.damping[0].max(p.damping[1]);
    let (lo, hi) = (0.001 / p.exchange, 0.01 / p.exchange);
    if kappa > 0.0 {
        (0.2 / kappa).clamp(lo, hi)
    } else {
        hi
    }
}

/// `D_NM = I/(I+1)`
pub fn normalized_measure(integral: f64) -> f64 {
    integral / (integral + 1.0)
}

/// Integrate `g` over `[0, horizon]` by the trapezoid rule.
///
/// Times with an ill-conditioned `Λ(t)` are skipped; interior gaps are bridged linearly and a
/// trailing gap (the map has become singular for good) contributes zero.
pub fn nm_measure(family: &DynamicalMapFamily, eps: f64, horizon: f64) -> Result<NMResult> {
    let m = (eps / family.spacing).round() as usize;
    if m == 0 || (m as f64 * family.spacing - eps).abs() > 1e-9 * eps {
        return Err(Error::InvalidParameter(format!(
            "ε = {eps} must be a positive multiple of the grid spacing {}",
            family.spacing
        )));
    }
    if horizon > family.horizon() + 1e-9 * horizon.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} exceeds the tomography range {}",
            family.horizon()
        )));
    }
    let last = ((horizon / family.spacing) + 1e-9).floor() as usize;
    let n_eval = last.saturating_sub(m) + 1;

    let mut raw: Vec<Option<f64>> = Vec::with_capacity(n_eval);
    let mut skipped = Vec::new();
    for k in 0..n_eval {
        let t = family.times[k];
        match g_of_t(family, t, eps) {
            Ok(g) => raw.push(Some(g)),
            Err(Error::SingularMap { t, condition }) => {
                log::debug!("skipping t = {t}: condition {condition:.3e}");
                skipped.push(t);
                raw.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    if !skipped.is_empty() {
        log::info!(
            "{} of {} times skipped as ill-conditioned (first at t = {})",
            skipped.len(),
            n_eval,
            skipped[0]
        );
    }
    let times: Vec<f64> = family.times[..n_eval].to_vec();
    let g = fill_gaps(&times, &raw);
    let integral = trapezoid(&times, &g);
    let horizon_warning = family
        .dephasing_rate
        .is_some_and(|gamma| gamma > 0.0 && horizon < 5.0 / gamma);
    if horizon_warning {
        log::warn!("horizon {horizon} is shorter than 5/γ_eff; the measure may be underestimated");
    }
    Ok(NMResult {
        g_series: times.into_iter().zip(g).collect(),
        integral,
        d_nm: normalized_measure(integral),
        epsilon: eps,
        horizon,
        skipped,
        horizon_warning,
    })
}

fn fill_gaps(times: &[f64], raw: &[Option<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    let mut prev: Option<usize> = None;
    for k in 0..raw.len() {
        if let Some(v) = raw[k] {
            out[k] = v;
            if let Some(p) = prev {
                for j in p + 1..k {
                    let w = (times[j] - times[p]) / (times[k] - times[p]);
                    out[j] = out[p] + w * (v - out[p]);
                }
            }
            prev = Some(k);
        }
    }
    out
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Tomography followed by [`nm_measure`] with `ε` equal to the grid spacing.
pub fn measure_non_markovianity(model: &LindbladModel, eps: f64, horizon: f64, dt: f64) -> Result<NMResult> {
    let family = tomography(model, eps, horizon, dt)?;
    nm_measure(&family, eps, family.horizon().min(horizon))
}
