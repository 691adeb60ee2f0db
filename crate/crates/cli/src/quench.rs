//! Quench orchestration: one trajectory pass, all partitions measured at
//! every checkpoint, CSV and JSON artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use log::info;
use serde::Serialize;
use sqent_core::exec::map_indexed;
use sqent_core::ising::{EnsembleSnapshot, McwfStepper, Observables, QuenchProtocol};
use sqent_core::measures::{qcmi_pure, tau3, tmi};
use sqent_core::qstate::{PureState, RegionPartition};
use sqent_core::Execution;

use crate::checks::{qualitative_checks, CheckVerdict};
use crate::config::{ExperimentConfig, NamedPartition, OptimizerConfig};
use crate::series::{sha256_hex, MeasureRow, MeasureSeries};

pub const ESTIMATOR_LABEL: &str = "tsq_flag_bound is an upper bound on T_sq: the classical-flag extension of the \
trajectory ensemble, 1/2 times the trajectory average of I(A;C|B) on the pure trajectory states";

#[derive(Debug, Clone)]
pub struct QuenchRun {
    pub series: Vec<MeasureSeries>,
    pub mean_jumps: f64,
    pub wall_time_s: f64,
}

/// `1/2 I(A;C|B)` of every trajectory state, in trajectory order.
pub fn flag_bound_terms(snap: &EnsembleSnapshot, part: &RegionPartition, exec: Execution) -> Result<Vec<f64>> {
    let terms = map_indexed(snap.states.len(), exec, |k| {
        let psi = PureState::new(snap.states[k].clone(), snap.register.clone())?;
        Ok(0.5 * qcmi_pure(&psi, part)?)
    });
    terms.into_iter().collect::<sqent_core::Result<Vec<f64>>>().map_err(Into::into)
}

/// Mean and standard error of the mean.
fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn measure_row(
    snap: &EnsembleSnapshot,
    part: &RegionPartition,
    h: f64,
    obs: &Observables,
    exec: Execution,
) -> Result<MeasureRow> {
    let (flag, err) = mean_and_error(&flag_bound_terms(snap, part, exec)?);
    let rho_abc = snap.marginal(&part.abc())?;
    let local = part.without_spectator();
    Ok(MeasureRow {
        t: snap.t,
        h,
        tsq_flag_bound: flag,
        i3: tmi(&rho_abc, &local)?.value,
        tau3: tau3(&rho_abc, &local)?.value,
        mean_z: obs.mean_z,
        mean_x: obs.mean_x,
        nn_corr: obs.nn_corr,
        purity: obs.purity,
        traj_stat_err: err,
    })
}

pub fn run_quench(cfg: &ExperimentConfig) -> Result<QuenchRun> {
    cfg.validate()?;
    let proto = &cfg.protocol;
    let parts: Vec<(NamedPartition, RegionPartition)> = cfg
        .active_partitions()?
        .into_iter()
        .map(|p| {
            let r = p.resolve(proto.n_qubits)?;
            Ok((p, r))
        })
        .collect::<Result<_>>()?;
    let start = Instant::now();
    let mut stepper = McwfStepper::new(proto, cfg.exec)?;
    let mut rows: Vec<Vec<MeasureRow>> = vec![Vec::new(); parts.len()];
    let checkpoints = proto.checkpoints(cfg.checkpoint_every);
    for (step, &t) in checkpoints.iter().enumerate() {
        stepper.advance_to(t).with_context(|| format!("advancing trajectories to t = {t}"))?;
        let snap = stepper.snapshot()?;
        let obs = snap.observables();
        for (k, (named, part)) in parts.iter().enumerate() {
            let row = measure_row(&snap, part, proto.ramp(t), &obs, cfg.exec)
                .with_context(|| format!("measuring partition {} at t = {t}", named.name))?;
            rows[k].push(row);
        }
        if step % 20 == 0 {
            info!("t = {t:.1} / {:.1}, purity {:.4}", proto.total_time(), obs.purity);
        }
    }
    let jumps = stepper.jump_counts();
    let series: Vec<MeasureSeries> = parts
        .iter()
        .zip(rows)
        .map(|((named, _), rows)| MeasureSeries { partition: named.name.clone(), rows })
        .collect();
    for s in &series {
        s.validate()?;
    }
    Ok(QuenchRun {
        series,
        mean_jumps: jumps.iter().sum::<usize>() as f64 / jumps.len() as f64,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolEcho {
    pub n_qubits: usize,
    pub j: f64,
    pub h_max: f64,
    pub t_up: f64,
    pub t_hold: f64,
    pub t_down: f64,
    pub gamma: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
}

impl From<&QuenchProtocol> for ProtocolEcho {
    fn from(p: &QuenchProtocol) -> Self {
        Self {
            n_qubits: p.n_qubits,
            j: p.j,
            h_max: p.h_max,
            t_up: p.t_up,
            t_hold: p.t_hold,
            t_down: p.t_down,
            gamma: p.gamma,
            dt: p.dt,
            n_traj: p.n_traj,
            seed: p.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionEcho {
    #[serde(flatten)]
    pub named: NamedPartition,
    pub d: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub protocol: ProtocolEcho,
    pub checkpoint_every: f64,
    pub partitions: Vec<PartitionEcho>,
    pub optimizer: OptimizerConfig,
    pub deterministic: bool,
}

impl ConfigEcho {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let partitions = cfg
            .active_partitions()?
            .into_iter()
            .map(|p| {
                let d = p.resolve(cfg.protocol.n_qubits)?.d().to_vec();
                Ok(PartitionEcho { named: p, d })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            protocol: (&cfg.protocol).into(),
            checkpoint_every: cfg.checkpoint_every,
            partitions,
            optimizer: cfg.optimizer.clone(),
            deterministic: cfg.deterministic,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileChecksum {
    pub partition: String,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuenchSummary {
    pub estimator: &'static str,
    pub config: ConfigEcho,
    pub seed: u64,
    /// `None` under the determinism flag so that the summary is reproducible too.
    pub wall_time_s: Option<f64>,
    pub mean_jumps_per_trajectory: f64,
    pub checks: Vec<CheckVerdict>,
    pub files: Vec<FileChecksum>,
}

pub fn csv_path(out: &Path, partition: &str) -> PathBuf {
    out.join(format!("quench_{partition}.csv"))
}

pub fn summary_path(out: &Path) -> PathBuf {
    out.join("summary.json")
}

/// Writes one CSV per partition and `summary.json` into the output directory.
pub fn write_outputs(cfg: &ExperimentConfig, run: &QuenchRun) -> Result<QuenchSummary> {
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
    let mut files = Vec::new();
    for s in &run.series {
        let bytes = s.to_csv()?;
        let path = csv_path(out, &s.partition);
        std::fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        files.push(FileChecksum {
            partition: s.partition.clone(),
            file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            sha256: sha256_hex(&bytes),
        });
    }
    let summary = QuenchSummary {
        estimator: ESTIMATOR_LABEL,
        config: ConfigEcho::new(cfg)?,
        seed: cfg.protocol.seed,
        wall_time_s: (!cfg.deterministic).then_some(run.wall_time_s),
        mean_jumps_per_trajectory: run.mean_jumps,
        checks: qualitative_checks(&run.series, &cfg.protocol),
        files,
    };
    let path = summary_path(out);
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(summary)
}
