//! Performance profiles over benchmark records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: String,
    pub weight: i64,
    /// Time to best, seconds.
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Fraction of instances with weight ≥ τ·best.
    Quality,
    /// Fraction of instances with time ≤ τ·fastest.
    Time,
}

impl FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quality" => Ok(ProfileKind::Quality),
            "time" => Ok(ProfileKind::Time),
            _ => Err(format!("unknown profile kind {s:?}")),
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Quality => "quality",
            ProfileKind::Time => "time",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("no record for algorithm {algorithm} on instance {instance}")]
    Missing { algorithm: String, instance: String },
    #[error("two records for algorithm {algorithm} on instance {instance}")]
    Duplicate { algorithm: String, instance: String },
    #[error("line {0}: {1}")]
    Parse(usize, String),
}

/// Step function as (τ, fraction) breakpoints. Quality curves list τ from 1
/// downwards, time curves from 1 upwards, so fractions never decrease.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub algorithm: String,
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Value of the step function at `tau`.
    pub fn at(&self, kind: ProfileKind, tau: f64) -> f64 {
        let mut value = 0.0;
        for &(t, f) in &self.points {
            let reached = match kind {
                ProfileKind::Quality => t >= tau,
                ProfileKind::Time => t <= tau,
            };
            if reached {
                value = f;
            }
        }
        value
    }
}

/// Ratio of each record to the instance's reference value, per algorithm and
/// instance.
fn ratios(
    records: &[RunRecord],
    kind: ProfileKind,
) -> Result<BTreeMap<String, Vec<f64>>, ProfileError> {
    let instances: BTreeSet<&str> = records.iter().map(|r| r.instance.as_str()).collect();
    let algorithms: BTreeSet<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
    let mut table: BTreeMap<(&str, &str), &RunRecord> = BTreeMap::new();
    for r in records {
        if table.insert((&r.algorithm, &r.instance), r).is_some() {
            return Err(ProfileError::Duplicate {
                algorithm: r.algorithm.clone(),
                instance: r.instance.clone(),
            });
        }
    }
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for &inst in &instances {
        let mut row = Vec::new();
        for &alg in &algorithms {
            match table.get(&(alg, inst)) {
                Some(r) => row.push((alg, *r)),
                None => {
                    return Err(ProfileError::Missing {
                        algorithm: alg.to_string(),
                        instance: inst.to_string(),
                    })
                }
            }
        }
        let best = row.iter().map(|(_, r)| r.weight).max().unwrap();
        let fastest = row
            .iter()
            .map(|(_, r)| r.time)
            .fold(f64::INFINITY, f64::min);
        for (alg, r) in row {
            let ratio = match kind {
                ProfileKind::Quality if best == 0 => 1.0,
                ProfileKind::Quality => r.weight as f64 / best as f64,
                ProfileKind::Time if r.time == fastest => 1.0,
                ProfileKind::Time => r.time / fastest,
            };
            out.entry(alg.to_string()).or_default().push(ratio);
        }
    }
    Ok(out)
}

pub fn perf_profile(
    records: &[RunRecord],
    kind: ProfileKind,
) -> Result<Vec<ProfileCurve>, ProfileError> {
    let table = ratios(records, kind)?;
    let mut taus: Vec<f64> = table.values().flatten().copied().chain([1.0]).collect();
    taus.retain(|t| t.is_finite());
    match kind {
        ProfileKind::Quality => taus.sort_by(|a, b| b.total_cmp(a)),
        ProfileKind::Time => taus.sort_by(|a, b| a.total_cmp(b)),
    }
    taus.dedup();
    Ok(table
        .into_iter()
        .map(|(algorithm, rs)| {
            let total = rs.len() as f64;
            let points = taus
                .iter()
                .map(|&tau| {
                    let hits = rs
                        .iter()
                        .filter(|&&r| match kind {
                            ProfileKind::Quality => r >= tau,
                            ProfileKind::Time => r <= tau,
                        })
                        .count();
                    (tau, hits as f64 / total)
                })
                .collect();
            ProfileCurve { algorithm, points }
        })
        .collect())
}

/// Fraction of instances at one τ, straight from the definition.
pub fn fraction_at(
    records: &[RunRecord],
    kind: ProfileKind,
    algorithm: &str,
    tau: f64,
) -> Result<f64, ProfileError> {
    let table = ratios(records, kind)?;
    let rs = table.get(algorithm).ok_or_else(|| ProfileError::Missing {
        algorithm: algorithm.to_string(),
        instance: String::from("*"),
    })?;
    let hits = rs
        .iter()
        .filter(|&&r| match kind {
            ProfileKind::Quality => r >= tau,
            ProfileKind::Time => r <= tau,
        })
        .count();
    Ok(hits as f64 / rs.len() as f64)
}

pub const RECORD_HEADER: &str = "instance,algorithm,weight,time";

pub fn parse_records(text: &str) -> Result<Vec<RunRecord>, ProfileError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == RECORD_HEADER || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| ProfileError::Parse(i + 1, m.to_string());
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(err("expected instance,algorithm,weight,time"));
        }
        let weight = cols[2].parse().map_err(|_| err("bad weight"))?;
        let time: f64 = cols[3].parse().map_err(|_| err("bad time"))?;
        if time.is_nan() || time < 0.0 {
            return Err(err("bad time"));
        }
        out.push(RunRecord {
            instance: cols[0].to_string(),
            algorithm: cols[1].to_string(),
            weight,
            time,
        });
    }
    Ok(out)
}

pub fn write_records(records: &[RunRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.instance, r.algorithm, r.weight, r.time
        ));
    }
    out
}

/// Curves as "algorithm,tau,fraction" lines.
pub fn write_curves(curves: &[ProfileCurve]) -> String {
    let mut out = String::from("algorithm,tau,fraction\n");
    for c in curves {
        for (t, f) in &c.points {
            out.push_str(&format!("{},{},{}\n", c.algorithm, t, f));
        }
    }
    out
}
