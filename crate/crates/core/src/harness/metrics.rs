//! Append-only CSV metrics, one row per (episode, phase, scenario).

use crate::error::{Result, SimError};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Train => "train",
            Phase::Eval => "eval",
        })
    }
}

impl FromStr for Phase {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Phase::Train),
            "eval" => Ok(Phase::Eval),
            other => Err(SimError::Metrics(format!("unknown phase `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    /// Number of training episodes completed when the row was produced.
    pub episode: usize,
    pub phase: Phase,
    /// "random" for training episodes, the preset id for evaluations.
    pub scenario: String,
    pub mean_reward: f64,
    pub mean_fair_rate: f64,
    pub mean_sum_throughput_mbps: f64,
    /// Per HAPS, mean horizontal distance to its hotspot centroid (m).
    pub mean_distance_m: Vec<f64>,
    pub wind_mean_mps: f64,
    pub wind_max_mps: f64,
}

const FIXED: [&str; 6] = [
    "episode",
    "phase",
    "scenario",
    "mean_reward",
    "mean_fair_rate",
    "mean_sum_throughput_mbps",
];

impl MetricsRow {
    pub fn header(num_haps: usize) -> String {
        let mut cols: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
        cols.extend((1..=num_haps).map(|d| format!("haps{d}_distance_m")));
        cols.push("wind_mean_mps".into());
        cols.push("wind_max_mps".into());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut cols = vec![
            self.episode.to_string(),
            self.phase.to_string(),
            self.scenario.clone(),
            self.mean_reward.to_string(),
            self.mean_fair_rate.to_string(),
            self.mean_sum_throughput_mbps.to_string(),
        ];
        cols.extend(self.mean_distance_m.iter().map(|d| d.to_string()));
        cols.push(self.wind_mean_mps.to_string());
        cols.push(self.wind_max_mps.to_string());
        cols.join(",")
    }

    pub fn parse(line: &str, num_haps: usize) -> Result<Self> {
        let cols: Vec<&str> = line.split(',').collect();
        let expected = FIXED.len() + num_haps + 2;
        if cols.len() != expected {
            return Err(SimError::Metrics(format!(
                "row has {} columns, expected {expected}: `{line}`",
                cols.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            cols[i]
                .parse()
                .map_err(|e| SimError::Metrics(format!("column {}: {e}", i + 1)))
        };
        Ok(Self {
            episode: cols[0]
                .parse()
                .map_err(|e| SimError::Metrics(format!("episode: {e}")))?,
            phase: cols[1].parse()?,
            scenario: cols[2].to_string(),
            mean_reward: num(3)?,
            mean_fair_rate: num(4)?,
            mean_sum_throughput_mbps: num(5)?,
            mean_distance_m: (0..num_haps).map(|d| num(6 + d)).collect::<Result<_>>()?,
            wind_mean_mps: num(6 + num_haps)?,
            wind_max_mps: num(7 + num_haps)?,
        })
    }
}

/// Parses a whole metrics file, inferring the HAPS count from the header.
pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SimError::Metrics("empty metrics file".into()))?;
    let num_haps = header.split(',').filter(|c| c.ends_with("_distance_m")).count();
    if header != MetricsRow::header(num_haps) {
        return Err(SimError::Metrics(format!("unexpected header `{header}`")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| MetricsRow::parse(l, num_haps))
        .collect()
}

/// Writes rows as they arrive, flushing each one.
pub struct MetricsWriter<W: Write> {
    out: W,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(mut out: W, num_haps: usize) -> Result<Self> {
        writeln!(out, "{}", MetricsRow::header(num_haps))?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<()> {
        writeln!(self.out, "{}", row.to_csv())?;
        self.out.flush()?;
        Ok(())
    }
}
