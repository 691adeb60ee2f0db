//! Per-checkpoint measure rows and their CSV form.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Lowest tolerated value of the flag bound (round-off around zero).
pub const FLAG_BOUND_FLOOR: f64 = -1e-8;

/// One checkpoint. Field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub t: f64,
    pub h: f64,
    /// Classical-flag upper bound on `T_sq` from the trajectory ensemble.
    pub tsq_flag_bound: f64,
    pub i3: f64,
    pub tau3: f64,
    #[serde(rename = "mean_Z")]
    pub mean_z: f64,
    #[serde(rename = "mean_X")]
    pub mean_x: f64,
    pub nn_corr: f64,
    pub purity: f64,
    /// Standard error of the trajectory mean behind `tsq_flag_bound`.
    pub traj_stat_err: f64,
}

pub const CSV_HEADER: &str = "t,h,tsq_flag_bound,i3,tau3,mean_Z,mean_X,nn_corr,purity,traj_stat_err";

impl MeasureRow {
    fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.h,
            self.tsq_flag_bound,
            self.i3,
            self.tau3,
            self.mean_z,
            self.mean_x,
            self.nn_corr,
            self.purity,
            self.traj_stat_err,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub partition: String,
    pub rows: Vec<MeasureRow>,
}

impl MeasureSeries {
    /// Strictly increasing times, finite values, flag bound above the floor.
    pub fn validate(&self) -> Result<()> {
        for (k, row) in self.rows.iter().enumerate() {
            if row.values().iter().any(|v| !v.is_finite()) {
                bail!("{}: non-finite value in row {k}: {row:?}", self.partition);
            }
            if row.tsq_flag_bound < FLAG_BOUND_FLOOR {
                bail!("{}: flag bound {} below zero at t = {}", self.partition, row.tsq_flag_bound, row.t);
            }
            if k > 0 && row.t <= self.rows[k - 1].t {
                bail!("{}: times not strictly increasing at row {k}", self.partition);
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        w.into_inner().context("flushing CSV buffer")
    }

    pub fn from_csv(partition: &str, bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != CSV_HEADER {
            bail!("unexpected CSV header {header:?}");
        }
        let rows = r.deserialize().collect::<std::result::Result<Vec<MeasureRow>, _>>()?;
        Ok(Self { partition: partition.to_string(), rows })
    }

    pub fn read(partition: &str, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_csv(partition, &bytes)
    }

    /// Row whose time is closest to `t`.
    pub fn at(&self, t: f64) -> Option<&MeasureRow> {
        self.rows.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> MeasureRow {
        MeasureRow {
            t,
            h: 0.1 * t,
            tsq_flag_bound: 0.0,
            i3: 0.25,
            tau3: 0.0,
            mean_z: -1.0,
            mean_x: 0.0,
            nn_corr: 1.0,
            purity: 1.0,
            traj_stat_err: 0.0,
        }
    }

    #[test]
    fn csv_round_trip_with_fixed_header() {
        let s = MeasureSeries { partition: "x".into(), rows: vec![row(0.0), row(1.0), row(2.5)] };
        let bytes = s.to_csv().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(MeasureSeries::from_csv("x", &bytes).unwrap(), s);
        let empty = MeasureSeries { partition: "x".into(), rows: vec![] };
        assert_eq!(String::from_utf8(empty.to_csv().unwrap()).unwrap().trim(), CSV_HEADER);
    }

    #[test]
    fn invariants() {
        let mut s = MeasureSeries { partition: "x".into(), rows: vec![row(0.0), row(1.0)] };
        s.validate().unwrap();
        s.rows[1].t = 0.0;
        assert!(s.validate().is_err());
        s.rows[1].t = 1.0;
        s.rows[1].i3 = f64::NAN;
        assert!(s.validate().is_err());
        s.rows[1].i3 = 0.0;
        s.rows[1].tsq_flag_bound = -1e-6;
        assert!(s.validate().is_err());
    }

    #[test]
    fn checksum_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
