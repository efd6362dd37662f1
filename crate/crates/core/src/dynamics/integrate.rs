use std::collections::BTreeMap;

use crate::entanglement::{inversion, log_negativity, reduce_to_dimer, singlet_overlap};
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::opalg::{is_psd_with_shift, min_eigenvalue, ComplexMatrix, C64};

use super::liouvillian::SparseGenerator;
use super::propagate::{ChunkAdvancer, Rk4, Rk4Scratch, Stepping};
use super::{expectation, QuantumState, Trajectory, INVERSION, LOG_NEGATIVITY, MODE_EXCITATION, SINGLET_OVERLAP};

// Abort thresholds; looser than the tolerances asserted on stored states.
const ABORT_TRACE_DRIFT: f64 = 1e-6;
const ABORT_HERMITICITY: f64 = 1e-8;
const ABORT_NEGATIVITY: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    /// Upper bound on the step; the actual step divides `t_end` evenly.
    pub dt: f64,
    /// Store every n-th step (the final step is always stored).
    pub store_every: usize,
    pub stepping: Stepping,
    /// Keep every stored density matrix; when false only observables and the final state
    /// are recorded.
    pub keep_states: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            dt: 1e-3,
            store_every: 10,
            stepping: Stepping::Auto,
            keep_states: true,
        }
    }
}

/// `0.001/J` for `f ≤ 1`, `0.001/(fJ)` above, since the damping rate grows with `f`.
pub fn default_dt(f: f64, exchange: f64) -> f64 {
    if f <= 1.0 {
        1e-3 / exchange
    } else {
        1e-3 / (f * exchange)
    }
}

/// Integrate with the default storage thinning (every 10th step).
pub fn integrate(model: &LindbladModel, rho0: &QuantumState, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(
        model,
        rho0,
        t_end,
        &IntegrateOptions {
            dt,
            ..Default::default()
        },
    )
}

struct Observer {
    number_ops: Vec<ComplexMatrix>,
}

impl Observer {
    fn record(&self, model: &LindbladModel, state: &QuantumState, obs: &mut BTreeMap<String, Vec<f64>>) -> Result<()> {
        let dimer = reduce_to_dimer(state, model.sector_basis)?;
        let mut push = |k: &str, v: f64| obs.entry(k.to_string()).or_default().push(v);
        push(INVERSION, inversion(&dimer));
        push(LOG_NEGATIVITY, log_negativity(&dimer));
        push(SINGLET_OVERLAP, singlet_overlap(&dimer));
        let mut excitation: f64 = 0.0;
        for n in &self.number_ops {
            excitation = excitation.max(expectation(state, n)?);
        }
        push(MODE_EXCITATION, excitation);
        Ok(())
    }
}

fn check_state(state: &QuantumState, t: f64, dt: f64) -> Result<()> {
    let drift = state.trace_error();
    if !(drift <= ABORT_TRACE_DRIFT) {
        return Err(Error::InvariantViolation {
            t,
            what: "trace drift",
            value: drift,
            dt,
        });
    }
    let herm = state.rho.hermiticity_deviation();
    if herm > ABORT_HERMITICITY {
        return Err(Error::InvariantViolation {
            t,
            what: "hermiticity deviation",
            value: herm,
            dt,
        });
    }
    if !is_psd_with_shift(&state.rho, ABORT_NEGATIVITY) {
        let value = min_eigenvalue(&state.rho.hermitian_part())?;
        return Err(Error::InvariantViolation {
            t,
            what: "minimum eigenvalue",
            value,
            dt,
        });
    }
    Ok(())
}

/// Fixed-step RK4 from `rho0` to `t_end`, storing states and observables.
pub fn integrate_with(
    model: &LindbladModel,
    rho0: &QuantumState,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let d = model.dim();
    if rho0.rho.rows() != d || rho0.dims != model.dims {
        return Err(Error::DimensionMismatch(format!(
            "initial state dims {:?} do not match model dims {:?}",
            rho0.dims.as_slice(),
            model.dims.as_slice()
        )));
    }
    if !(opts.dt > 0.0) || !(t_end > 0.0) || opts.store_every == 0 {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0, t_end > 0 and store_every >= 1 (dt = {}, t_end = {t_end}, store_every = {})",
            opts.dt, opts.store_every
        )));
    }
    let n_steps = ((t_end / opts.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / n_steps as f64;
    let rk4 = Rk4::new(SparseGenerator::from_model(model)?, dt);

    let every = opts.store_every.min(n_steps);
    let full_chunks = n_steps / every;
    let remainder = n_steps % every;
    let chunk = ChunkAdvancer::new(&rk4, every, full_chunks, 1, opts.stepping);
    let tail = (remainder > 0).then(|| ChunkAdvancer::new(&rk4, remainder, 1, 1, opts.stepping));

    let observer = Observer {
        number_ops: model.number_operators(),
    };
    let mut traj = Trajectory::default();
    let mut y: Vec<C64> = rho0.rho.vectorize();
    let mut scratch = Rk4Scratch::new(d * d);

    let store = |traj: &mut Trajectory, y: &[C64], step: usize| -> Result<()> {
        let t = step as f64 * dt;
        let state = QuantumState::new(ComplexMatrix::unvectorize(d, y)?, model.dims.clone())?;
        check_state(&state, t, dt)?;
        observer.record(model, &state, &mut traj.observables)?;
        traj.times.push(t);
        if opts.keep_states || step == n_steps {
            traj.states.push(state);
        }
        Ok(())
    };

    store(&mut traj, &y, 0)?;
    let mut step = 0;
    for _ in 0..full_chunks {
        chunk.advance(&mut y, &mut scratch);
        step += every;
        store(&mut traj, &y, step)?;
    }
    if let Some(tail) = tail {
        tail.advance(&mut y, &mut scratch);
        step += remainder;
        store(&mut traj, &y, step)?;
    }
    debug_assert_eq!(step, n_steps);
    Ok(traj)
}
