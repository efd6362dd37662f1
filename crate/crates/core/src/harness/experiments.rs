//! Experiment drivers. Each returns a [`Table`]; per-`f` work runs on the rayon pool and
//! rows come back in ascending `f`.

use rayon::prelude::*;

use crate::dynamics::{default_dt, integrate_with, steady_state, IntegrateOptions, QuantumState, Stepping};
use crate::entanglement::{log_negativity, reduce_to_dimer, singlet_overlap};
use crate::error::{Error, Result};
use crate::model::{
    apply_f, build_full_model, build_global_mode_model, build_markovian_dephasing_model, build_symmetric_model,
    steady_state_dd_closed_form, LindbladModel, ModelParams,
};
use crate::nonmarkov::{default_epsilon, nm_measure, tomography, NMResult};

use super::config::{Experiment, ModelKind, RunConfig, Series};
use super::output::{format_number, Cell, Table};

/// Table plus `key = value` details for the metadata file.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: Table,
    pub details: Vec<(String, String)>,
}

pub fn build_model(kind: ModelKind, p: &ModelParams) -> Result<LindbladModel> {
    match kind {
        ModelKind::Full => build_full_model(p),
        ModelKind::Symmetric => build_symmetric_model(p),
        ModelKind::Global => build_global_mode_model(p),
    }
}

/// Short machine-readable reason for the status column.
pub fn status_code(e: &Error) -> &'static str {
    match e {
        Error::NonUniqueSteadyState { .. } => "non_unique_steady_state",
        Error::SingularMap { .. } => "singular_map",
        Error::Singular { .. } => "singular",
        Error::InvariantViolation { .. } => "invariant_violation",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::InvalidParameter(_) | Error::Config(_) => "invalid_parameter",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::Io(_) => "io_error",
    }
}

/// Integration step for index `f`: the configured step, capped by the stiffness guard above `f = 1`.
pub fn step_for(cfg: &RunConfig, f: f64) -> f64 {
    let guard = default_dt(f, cfg.base.exchange);
    match cfg.dt {
        Some(dt) if f > 1.0 => dt.min(guard),
        Some(dt) => dt,
        None => guard,
    }
}

fn column_label(prefix: &str, f: f64) -> String {
    format!("{prefix}_f={}", format_number(f))
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Evolve => run_evolve(cfg),
        Experiment::Steady | Experiment::Eq8check => run_steady_sweep(cfg),
        Experiment::Nmm => run_nmm_sweep(cfg),
        Experiment::Sweep => run_sweep(cfg),
        Experiment::Convergence => run_convergence(cfg),
    }
}

/// `t, inversion_f=…` for every `f`.
pub fn run_population_trace(cfg: &RunConfig) -> Result<RunOutput> {
    run_evolve(&RunConfig {
        series: vec![Series::Inversion],
        ..cfg.clone()
    })
}

/// `t, logneg_f=…` for every `f`.
pub fn run_entanglement_trace(cfg: &RunConfig) -> Result<RunOutput> {
    run_evolve(&RunConfig {
        series: vec![Series::LogNegativity],
        ..cfg.clone()
    })
}

/// Time traces from `|10> ⊗ environment` on a common output grid.
///
/// Samples are spaced by `store_every · dt` (with `dt` the configured step, or `0.001/J`);
/// each `f` integrates with its own step, chosen to divide the sample spacing.
pub fn run_evolve(cfg: &RunConfig) -> Result<RunOutput> {
    let fs = cfg.f_grid.values();
    let base_dt = cfg.dt.unwrap_or(1e-3 / cfg.base.exchange);
    let interval = cfg.store_every as f64 * base_dt;
    let n_samples = ((cfg.t_end / interval) - 1e-9).ceil().max(1.0) as usize;
    let t_end = n_samples as f64 * interval;
    if (t_end - cfg.t_end).abs() > 1e-9 * cfg.t_end {
        log::warn!("t_end rounded up from {} to {t_end} to fit the output grid", cfg.t_end);
    }

    let runs: Vec<Result<(f64, crate::dynamics::Trajectory)>> = fs
        .par_iter()
        .map(|&f| {
            let p = apply_f(f, &cfg.base)?;
            let model = build_model(cfg.model, &p)?;
            let steps = (interval / step_for(cfg, f) - 1e-9).ceil().max(1.0) as usize;
            let dt = interval / steps as f64;
            let rho0 = QuantumState::site_one_excited(&model)?;
            let opts = IntegrateOptions {
                dt,
                store_every: steps,
                stepping: Stepping::Auto,
                keep_states: false,
            };
            log::info!("evolve f = {f}: dt = {dt:.4e}, {} steps", steps * n_samples);
            Ok((dt, integrate_with(&model, &rho0, t_end, &opts)?))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut header = vec!["t".to_string()];
    for s in &cfg.series {
        for &f in &fs {
            header.push(column_label(s.name(), f));
        }
    }
    let mut table = Table::new(header);
    for k in 0..=n_samples {
        let mut row: Vec<Cell> = vec![(k as f64 * interval).into()];
        for s in &cfg.series {
            for (_, traj) in &runs {
                row.push(traj.series(s.observable()).expect("observable recorded")[k].into());
            }
        }
        table.push(row);
    }
    let details = fs
        .iter()
        .zip(&runs)
        .map(|(f, (dt, _))| (format!("dt_f={}", format_number(*f)), format_number(*dt)))
        .chain([("t_end_used".to_string(), format_number(t_end))])
        .collect();
    Ok(RunOutput { table, details })
}

fn horizon_for(cfg: &RunConfig, model: &LindbladModel) -> Result<f64> {
    match cfg.horizon {
        Some(h) => Ok(h),
        None => match model.dephasing_rate {
            Some(g) if g > 0.0 => Ok(20.0 / g),
            _ => Err(Error::Config(
                "horizon = auto needs a positive effective dephasing rate".into(),
            )),
        },
    }
}

/// Grid-aligned horizon: the largest multiple of `epsilon` not above `horizon`.
fn align_horizon(horizon: f64, eps: f64) -> f64 {
    ((horizon / eps) + 1e-9).floor().max(1.0) * eps
}

fn nm_for(cfg: &RunConfig, f: f64) -> Result<NMResult> {
    let p = apply_f(f, &cfg.base)?;
    let model = build_model(cfg.model, &p)?;
    let eps = cfg.epsilon.unwrap_or_else(|| default_epsilon(&p));
    let horizon = align_horizon(horizon_for(cfg, &model)?, eps);
    let family = tomography(&model, eps, horizon, step_for(cfg, f))?;
    nm_measure(&family, eps, horizon)
}

/// `f, D_NM, I, epsilon, horizon, skipped_times_count, status`
pub fn run_nmm_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    let fs = cfg.f_grid.values();
    let results: Vec<Result<NMResult>> = fs.par_iter().map(|&f| nm_for(cfg, f)).collect();
    let mut table = Table::new(
        ["f", "D_NM", "I", "epsilon", "horizon", "skipped_times_count", "status"]
            .map(String::from)
            .to_vec(),
    );
    let mut details = Vec::new();
    for (&f, r) in fs.iter().zip(results) {
        match r {
            Ok(r) => {
                if r.horizon_warning {
                    details.push((format!("horizon_warning_f={}", format_number(f)), "true".into()));
                }
                table.push(vec![
                    f.into(),
                    r.d_nm.into(),
                    r.integral.into(),
                    r.epsilon.into(),
                    r.horizon.into(),
                    r.skipped.len().into(),
                    "ok".into(),
                ]);
            }
            Err(e) => {
                log::warn!("f = {f}: {e}");
                table.push(vec![
                    f.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    cfg.epsilon.unwrap_or(f64::NAN).into(),
                    f64::NAN.into(),
                    Cell::Int(0),
                    status_code(&e).into(),
                ]);
            }
        }
    }
    Ok(RunOutput { table, details })
}

struct SteadyRow {
    rho_dd: f64,
    logneg: f64,
    singlet: f64,
}

fn steady_for(kind: ModelKind, p: &ModelParams) -> Result<SteadyRow> {
    let model = build_model(kind, p)?;
    let ss = steady_state(&model)?;
    let dimer = reduce_to_dimer(&ss, model.sector_basis)?;
    let singlet = singlet_overlap(&dimer);
    Ok(SteadyRow {
        rho_dd: singlet,
        logneg: log_negativity(&dimer),
        singlet,
    })
}

fn markov_baseline(kind: ModelKind, p: &ModelParams) -> Result<f64> {
    let rate = build_model(kind, p)?
        .dephasing_rate
        .ok_or_else(|| Error::InvalidParameter("no effective dephasing rate".into()))?;
    let model = build_markovian_dephasing_model(rate, p)?;
    let ss = steady_state(&model)?;
    Ok(log_negativity(&reduce_to_dimer(&ss, model.sector_basis)?))
}

/// `f, rho_dd_nullspace, rho_dd_eq8, logneg_ss, singlet_overlap_ss, logneg_markov_baseline, status`;
/// `eq8check` forces the symmetric model with two Fock levels and adds `eq8_rel_diff`.
pub fn run_steady_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    let eq8 = cfg.experiment == Experiment::Eq8check;
    let (kind, base) = if eq8 {
        (
            ModelKind::Symmetric,
            ModelParams {
                n_fock: 2,
                ..cfg.base.clone()
            },
        )
    } else {
        (cfg.model, cfg.base.clone())
    };
    let fs = cfg.f_grid.values();
    let rows: Vec<Vec<Cell>> = fs
        .par_iter()
        .map(|&f| {
            let p = match apply_f(f, &base) {
                Ok(p) => p,
                Err(e) => return error_row(f, &e, if eq8 { 7 } else { 6 }),
            };
            let closed = steady_state_dd_closed_form(&p).unwrap_or(f64::NAN);
            let baseline = markov_baseline(kind, &p).unwrap_or(f64::NAN);
            match steady_for(kind, &p) {
                Ok(r) => {
                    let mut row: Vec<Cell> = vec![
                        f.into(),
                        r.rho_dd.into(),
                        closed.into(),
                        r.logneg.into(),
                        r.singlet.into(),
                        baseline.into(),
                    ];
                    if eq8 {
                        row.push(((r.rho_dd - closed).abs() / closed.abs()).into());
                    }
                    row.push("ok".into());
                    row
                }
                Err(e) => {
                    log::warn!("f = {f}: {e}");
                    let mut row = error_row(f, &e, if eq8 { 7 } else { 6 });
                    row[2] = closed.into();
                    row[5] = baseline.into();
                    row
                }
            }
        })
        .collect();
    let mut header: Vec<String> = [
        "f",
        "rho_dd_nullspace",
        "rho_dd_eq8",
        "logneg_ss",
        "singlet_overlap_ss",
        "logneg_markov_baseline",
    ]
    .map(String::from)
    .to_vec();
    if eq8 {
        header.push("eq8_rel_diff".into());
    }
    header.push("status".into());
    let mut table = Table::new(header);
    rows.into_iter().for_each(|r| table.push(r));
    let details = vec![
        ("model_used".into(), kind.name().into()),
        ("n_fock_used".into(), base.n_fock.to_string()),
    ];
    Ok(RunOutput { table, details })
}

/// `f` followed by `width - 1` NaNs and the status code.
fn error_row(f: f64, e: &Error, width: usize) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![f.into()];
    row.extend((1..width).map(|_| Cell::Num(f64::NAN)));
    row.push(status_code(e).into());
    row
}

/// Non-Markovianity and steady-state entanglement side by side:
/// `f, D_NM, I, logneg_ss, singlet_overlap_ss, status`.
pub fn run_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    let fs = cfg.f_grid.values();
    let rows: Vec<Vec<Cell>> = fs
        .par_iter()
        .map(|&f| {
            let res = nm_for(cfg, f).and_then(|nm| {
                let p = apply_f(f, &cfg.base)?;
                Ok((nm, steady_for(cfg.model, &p)?))
            });
            match res {
                Ok((nm, ss)) => vec![
                    f.into(),
                    nm.d_nm.into(),
                    nm.integral.into(),
                    ss.logneg.into(),
                    ss.singlet.into(),
                    "ok".into(),
                ],
                Err(e) => {
                    log::warn!("f = {f}: {e}");
                    error_row(f, &e, 5)
                }
            }
        })
        .collect();
    let mut table = Table::new(
        ["f", "D_NM", "I", "logneg_ss", "singlet_overlap_ss", "status"]
            .map(String::from)
            .to_vec(),
    );
    rows.into_iter().for_each(|r| table.push(r));
    Ok(RunOutput {
        table,
        details: Vec::new(),
    })
}

/// Fock-cutoff and step-size refinement at the first `f` of the grid:
/// `n_fock, dt, final_logneg, max_mode_excitation, delta_fock, delta_dt, status`.
///
/// `delta_fock` compares with the previous cutoff at the same step, `delta_dt` with the
/// previous (larger) step at the same cutoff.
pub fn run_convergence(cfg: &RunConfig) -> Result<RunOutput> {
    let f = cfg.f_grid.values()[0];
    let mut focks = cfg.fock_levels.clone();
    focks.sort_unstable();
    focks.dedup();
    let mut dts = cfg.dt_levels.clone();
    dts.sort_by(|a, b| b.total_cmp(a));
    dts.dedup();

    let jobs: Vec<(usize, f64)> = focks.iter().flat_map(|&n| dts.iter().map(move |&dt| (n, dt))).collect();
    let results: Vec<Result<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(n, dt)| {
            let p = apply_f(
                f,
                &ModelParams {
                    n_fock: n,
                    ..cfg.base.clone()
                },
            )?;
            let model = build_model(cfg.model, &p)?;
            let rho0 = QuantumState::site_one_excited(&model)?;
            let opts = IntegrateOptions {
                dt,
                store_every: cfg.store_every,
                stepping: Stepping::Auto,
                keep_states: false,
            };
            let traj = integrate_with(&model, &rho0, cfg.t_end, &opts)?;
            let logneg = *traj.series(crate::dynamics::LOG_NEGATIVITY).unwrap().last().unwrap();
            let exc = traj
                .series(crate::dynamics::MODE_EXCITATION)
                .unwrap()
                .iter()
                .copied()
                .fold(0.0, f64::max);
            Ok((logneg, exc))
        })
        .collect();

    let value = |n: usize, dt: f64| -> Option<f64> {
        jobs.iter()
            .position(|&j| j == (n, dt))
            .and_then(|i| results[i].as_ref().ok().map(|r| r.0))
    };
    let mut table = Table::new(
        [
            "n_fock",
            "dt",
            "final_logneg",
            "max_mode_excitation",
            "delta_fock",
            "delta_dt",
            "status",
        ]
        .map(String::from)
        .to_vec(),
    );
    for (i, &(n, dt)) in jobs.iter().enumerate() {
        let fi = focks.iter().position(|&x| x == n).unwrap();
        let di = dts.iter().position(|&x| x == dt).unwrap();
        let delta = |other: Option<f64>, me: f64| other.map_or(f64::NAN, |o| (me - o).abs());
        match &results[i] {
            Ok((logneg, exc)) => {
                let prev_fock = if fi > 0 { value(focks[fi - 1], dt) } else { None };
                let prev_dt = if di > 0 { value(n, dts[di - 1]) } else { None };
                table.push(vec![
                    n.into(),
                    dt.into(),
                    (*logneg).into(),
                    (*exc).into(),
                    delta(prev_fock, *logneg).into(),
                    delta(prev_dt, *logneg).into(),
                    "ok".into(),
                ]);
            }
            Err(e) => {
                log::warn!("n_fock = {n}, dt = {dt}: {e}");
                let mut row = error_row(n as f64, e, 6);
                row[0] = n.into();
                row[1] = dt.into();
                table.push(row);
            }
        }
    }
    Ok(RunOutput {
        table,
        details: vec![("f_used".into(), format_number(f))],
    })
}
