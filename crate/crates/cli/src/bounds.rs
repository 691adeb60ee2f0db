//! One-shot `tsq_upper` on a state file.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use sqent_core::measures::qcmi;
use sqent_core::qstate::RegionPartition;
use sqent_core::squashed::tsq_upper;

use crate::config::ExperimentConfig;
use crate::statefile;

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub n_qubits: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub d: Vec<usize>,
    pub tsq_upper: f64,
    pub bound_kind: &'static str,
    pub restarts_used: usize,
    pub converged: bool,
    /// `1/2 I(A;C|B)`, the trivial-extension value.
    pub half_qcmi: f64,
    /// `1/2 I(A;C|D)`, the purification value; zero when D is empty.
    pub half_qcmi_given_d: f64,
}

/// `partition` names a configured partition; without it A, B, C are
/// qubits 0, 1, 2.
pub fn run_bounds(path: &Path, partition: Option<&str>, cfg: &ExperimentConfig) -> Result<BoundsReport> {
    let rho = statefile::read(path)?;
    let n = rho.n_qubits();
    let part = match partition {
        Some(name) => cfg
            .partitions
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| anyhow::anyhow!("unknown partition {name:?}"))?
            .resolve(n)?,
        None => RegionPartition::single_qubits(n)?,
    };
    let report = tsq_upper(&rho, &part, &cfg.squash_options())?;
    let half_d = if part.d().is_empty() { 0.0 } else { 0.5 * qcmi(&rho, &part.conditioned_on_spectator())?.value };
    Ok(BoundsReport {
        n_qubits: n,
        a: part.a().to_vec(),
        b: part.b().to_vec(),
        c: part.c().to_vec(),
        d: part.d().to_vec(),
        tsq_upper: report.value,
        bound_kind: report.kind.as_str(),
        restarts_used: report.restarts_used,
        converged: report.converged,
        half_qcmi: 0.5 * qcmi(&rho, &part)?.value,
        half_qcmi_given_d: half_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sqent_core::measures::make_w;

    #[test]
    fn pure_file_gives_half_qcmi() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w4.state");
        statefile::write(&path, &make_w(4).unwrap().density()).unwrap();
        let r = run_bounds(&path, None, &ExperimentConfig::default()).unwrap();
        assert_eq!(r.bound_kind, "exact_pure");
        assert!((r.tsq_upper - r.half_qcmi).abs() < 1e-9);
        assert!((r.half_qcmi - r.half_qcmi_given_d).abs() < 1e-9);
        assert!(run_bounds(&path, Some("nope"), &ExperimentConfig::default()).is_err());
    }
}
