//! Trajectory ensemble against direct integration of the master equation.

use anyhow::Result;
use serde::Serialize;
use sqent_core::ising::{initial_state, LindbladIntegrator, McwfStepper, QuenchProtocol};
use sqent_core::measures::trace_distance;
use sqent_core::Execution;

pub const ORACLE_TIMES: [f64; 5] = [10.0, 50.0, 100.0, 170.0, 250.0];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OraclePoint {
    pub t: f64,
    pub trace_distance: f64,
    pub purity_trajectories: f64,
    pub purity_lindblad: f64,
}

/// Trace distance between the ensemble average and the integrated state at
/// each (sorted) time.
pub fn dynamics_oracle(proto: &QuenchProtocol, times: &[f64], exec: Execution) -> Result<Vec<OraclePoint>> {
    let mut stepper = McwfStepper::new(proto, exec)?;
    let mut lindblad = LindbladIntegrator::new(&initial_state(proto.n_qubits)?.density(), proto)?;
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(sorted.len());
    for t in sorted {
        stepper.advance_to(t)?;
        lindblad.advance_to(t)?;
        let ens = stepper.snapshot()?.density()?;
        let exact = lindblad.state()?;
        out.push(OraclePoint {
            t,
            trace_distance: trace_distance(&ens, &exact)?.value,
            purity_trajectories: ens.purity(),
            purity_lindblad: exact.purity(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_system_ensemble_is_exact() {
        let proto = QuenchProtocol {
            n_qubits: 3,
            gamma: 0.0,
            n_traj: 2,
            t_up: 4.0,
            t_hold: 0.0,
            t_down: 0.0,
            ..Default::default()
        };
        let pts = dynamics_oracle(&proto, &[1.0, 3.0], Execution::Sequential).unwrap();
        assert!(pts.iter().all(|p| p.trace_distance < 1e-4), "{pts:?}");
    }
}
