//! Experiment configuration: defaults, flat `key = value` files, overrides.
//!
//! ```text
//! # comments start with '#'
//! n_traj = 200
//! gamma = 0.5
//! partition.lw = 0,1 / 2,3 / 4,5     # A / B / C, D is the rest
//! partitions = lw,distant            # which ones to run
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use sqent_core::ising::QuenchProtocol;
use sqent_core::qstate::{RegionPartition, Register};
use sqent_core::squashed::SquashOptions;
use sqent_core::Execution;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedPartition {
    pub name: String,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl NamedPartition {
    pub fn new(name: &str, a: &[usize], b: &[usize], c: &[usize]) -> Self {
        Self { name: name.to_string(), a: a.to_vec(), b: b.to_vec(), c: c.to_vec() }
    }

    /// Parses `a / b / c` with comma-separated labels in each region.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let regions: Vec<&str> = text.split('/').collect();
        if regions.len() != 3 {
            bail!("partition {name}: expected three regions separated by '/', got {text:?}");
        }
        let parse_region = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().with_context(|| format!("partition {name}: bad label {t:?}")))
                .collect()
        };
        Ok(Self {
            name: name.to_string(),
            a: parse_region(regions[0])?,
            b: parse_region(regions[1])?,
            c: parse_region(regions[2])?,
        })
    }

    /// The partition on an `n`-qubit register, with D holding every other qubit.
    pub fn resolve(&self, n: usize) -> Result<RegionPartition> {
        let reg = Register::new(n)?;
        RegionPartition::with_rest(self.a.clone(), self.b.clone(), self.c.clone(), &reg)
            .with_context(|| format!("partition {} on {n} qubits", self.name))
    }
}

pub fn default_partitions() -> Vec<NamedPartition> {
    vec![
        NamedPartition::new("lw", &[0, 1], &[2, 3], &[4, 5]),
        NamedPartition::new("adjacent", &[0], &[1], &[2]),
        NamedPartition::new("distant", &[0], &[4], &[2]),
    ]
}

/// Knobs of the `tsq_upper` search exposed on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub m_max: Option<usize>,
    pub e_dim: Option<usize>,
    pub f_dim: Option<usize>,
    pub tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let d = SquashOptions::default();
        Self { restarts: d.restarts, m_max: d.m_max, e_dim: d.e_dim, f_dim: d.f_dim, tol: d.tol }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub protocol: QuenchProtocol,
    pub checkpoint_every: f64,
    /// Every defined partition, in definition order.
    pub partitions: Vec<NamedPartition>,
    /// Names to run; `None` runs all of them.
    pub selected: Option<Vec<String>>,
    pub optimizer: OptimizerConfig,
    pub out_dir: PathBuf,
    pub deterministic: bool,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            protocol: QuenchProtocol::default(),
            checkpoint_every: 1.0,
            partitions: default_partitions(),
            selected: None,
            optimizer: OptimizerConfig::default(),
            out_dir: PathBuf::from("out"),
            deterministic: false,
            exec: Execution::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_opt(key: &str, value: &str) -> Result<Option<usize>> {
    if value.eq_ignore_ascii_case("auto") || value.is_empty() {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => bail!("{key}: expected a boolean, got {value:?}"),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text).with_context(|| format!("in config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", lineno + 1))?;
            self.set(key.trim(), value.trim()).with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.protocol;
        match key {
            "n_qubits" => p.n_qubits = parse_num(key, value)?,
            "j" => p.j = parse_num(key, value)?,
            "h_max" => p.h_max = parse_num(key, value)?,
            "t_up" => p.t_up = parse_num(key, value)?,
            "t_hold" => p.t_hold = parse_num(key, value)?,
            "t_down" => p.t_down = parse_num(key, value)?,
            "gamma" => p.gamma = parse_num(key, value)?,
            "dt" => p.dt = parse_num(key, value)?,
            "n_traj" => p.n_traj = parse_num(key, value)?,
            "seed" => p.seed = parse_num(key, value)?,
            "checkpoint_every" => self.checkpoint_every = parse_num(key, value)?,
            "restarts" => self.optimizer.restarts = parse_num(key, value)?,
            "m_max" => self.optimizer.m_max = parse_opt(key, value)?,
            "e_dim" => self.optimizer.e_dim = parse_opt(key, value)?,
            "f_dim" => self.optimizer.f_dim = parse_opt(key, value)?,
            "tol" => self.optimizer.tol = parse_num(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "deterministic" => self.deterministic = parse_bool(key, value)?,
            "parallel" => self.exec = if parse_bool(key, value)? { Execution::Parallel } else { Execution::Sequential },
            "partitions" => {
                self.selected = Some(value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            }
            _ => match key.strip_prefix("partition.") {
                Some(name) if !name.is_empty() => {
                    let part = NamedPartition::parse(name, value)?;
                    match self.partitions.iter_mut().find(|q| q.name == name) {
                        Some(slot) => *slot = part,
                        None => self.partitions.push(part),
                    }
                }
                _ => bail!("unknown key {key:?}"),
            },
        }
        Ok(())
    }

    /// Partitions to run, in selection order.
    pub fn active_partitions(&self) -> Result<Vec<NamedPartition>> {
        match &self.selected {
            None => Ok(self.partitions.clone()),
            Some(names) => names
                .iter()
                .map(|n| {
                    self.partitions
                        .iter()
                        .find(|p| &p.name == n)
                        .cloned()
                        .ok_or_else(|| anyhow!("unknown partition {n:?}"))
                })
                .collect(),
        }
    }

    pub fn squash_options(&self) -> SquashOptions {
        SquashOptions {
            restarts: self.optimizer.restarts,
            m_max: self.optimizer.m_max,
            e_dim: self.optimizer.e_dim,
            f_dim: self.optimizer.f_dim,
            tol: self.optimizer.tol,
            seed: self.protocol.seed,
            exec: self.exec,
            ..SquashOptions::default()
        }
    }

    /// Checks the protocol, the cadence and every active partition.
    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        if !(self.checkpoint_every > 0.0 && self.checkpoint_every.is_finite()) {
            bail!("checkpoint_every must be positive, got {}", self.checkpoint_every);
        }
        for p in self.active_partitions()? {
            if p.b.is_empty() {
                bail!("partition {}: region B must be nonempty for the witness", p.name);
            }
            p.resolve(self.protocol.n_qubits)?;
        }
        Ok(())
    }
}
