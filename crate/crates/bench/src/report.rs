//! Result rows, CSV I/O and summary statistics.

use crate::BenchError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const CSV_HEADER: &str = "variant,qubits,gates,run,circuit,candidate,gate_red_pct,depth_red_pct,density_mse";

/// One candidate measured against its transpiled source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub variant: String,
    pub qubits: usize,
    pub gates: usize,
    pub run: usize,
    pub circuit: usize,
    pub candidate: usize,
    pub gate_red_pct: f64,
    pub depth_red_pct: f64,
    pub density_mse: f64,
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), BenchError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| BenchError::io(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(BenchError::Validation(format!(
            "{}: unexpected header {}",
            path.display(),
            header.join(",")
        )));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Mean, median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dist {
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Dist {
    pub fn of(values: &[f64]) -> Option<Dist> {
        if values.is_empty() {
            return None;
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Some(Dist {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            q1: quantile(&s, 0.25),
            median: quantile(&s, 0.5),
            q3: quantile(&s, 0.75),
            min: s[0],
            max: s[s.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub variant: String,
    pub qubits: usize,
    pub gates: usize,
    pub rows: usize,
    pub gate_red: Dist,
    pub depth_red: Dist,
    pub mse_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: String,
    pub rows: usize,
    pub gate_red_mean: f64,
    pub depth_red_mean: f64,
    pub mse_mean: f64,
}

type Key = (String, usize, usize);

fn grouped(rows: &[ResultRow]) -> BTreeMap<Key, Vec<&ResultRow>> {
    let mut m: BTreeMap<Key, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        m.entry((r.variant.clone(), r.qubits, r.gates)).or_default().push(r);
    }
    m
}

/// Per (variant, qubits, gates) distributions.
pub fn group_summaries(rows: &[ResultRow]) -> Vec<GroupSummary> {
    grouped(rows)
        .into_iter()
        .map(|((variant, qubits, gates), rs)| {
            let col = |f: fn(&ResultRow) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            GroupSummary {
                variant,
                qubits,
                gates,
                rows: rs.len(),
                gate_red: Dist::of(&col(|r| r.gate_red_pct)).expect("non-empty group"),
                depth_red: Dist::of(&col(|r| r.depth_red_pct)).expect("non-empty group"),
                mse_mean: col(|r| r.density_mse).iter().sum::<f64>() / rs.len() as f64,
            }
        })
        .collect()
}

/// Per-variant averages, computed as row-weighted means of the group means.
pub fn variant_summaries(groups: &[GroupSummary]) -> Vec<VariantSummary> {
    let mut m: BTreeMap<&str, Vec<&GroupSummary>> = BTreeMap::new();
    for g in groups {
        m.entry(&g.variant).or_default().push(g);
    }
    m.into_iter()
        .map(|(v, gs)| {
            let n: usize = gs.iter().map(|g| g.rows).sum();
            let w = |f: fn(&GroupSummary) -> f64| gs.iter().map(|g| f(g) * g.rows as f64).sum::<f64>() / n as f64;
            VariantSummary {
                variant: v.to_string(),
                rows: n,
                gate_red_mean: w(|g| g.gate_red.mean),
                depth_red_mean: w(|g| g.depth_red.mean),
                mse_mean: w(|g| g.mse_mean),
            }
        })
        .collect()
}

pub fn write_group_csv(path: &Path, groups: &[GroupSummary]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant", "qubits", "gates", "rows", "gate_red_mean", "gate_red_q1", "gate_red_median", "gate_red_q3",
        "depth_red_mean", "depth_red_q1", "depth_red_median", "depth_red_q3", "density_mse_mean",
    ])?;
    for g in groups {
        w.write_record([
            g.variant.clone(),
            g.qubits.to_string(),
            g.gates.to_string(),
            g.rows.to_string(),
            g.gate_red.mean.to_string(),
            g.gate_red.q1.to_string(),
            g.gate_red.median.to_string(),
            g.gate_red.q3.to_string(),
            g.depth_red.mean.to_string(),
            g.depth_red.q1.to_string(),
            g.depth_red.median.to_string(),
            g.depth_red.q3.to_string(),
            g.mse_mean.to_string(),
        ])?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

pub fn write_variant_csv(path: &Path, variants: &[VariantSummary]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["variant", "rows", "gate_red_mean", "depth_red_mean", "density_mse_mean"])?;
    for v in variants {
        w.write_record([
            v.variant.clone(),
            v.rows.to_string(),
            v.gate_red_mean.to_string(),
            v.depth_red_mean.to_string(),
            v.mse_mean.to_string(),
        ])?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(variant: &str, qubits: usize, g: f64, d: f64, mse: f64) -> ResultRow {
        ResultRow {
            variant: variant.into(),
            qubits,
            gates: 16,
            run: 0,
            circuit: 0,
            candidate: 0,
            gate_red_pct: g,
            depth_red_pct: d,
            density_mse: mse,
        }
    }

    #[test]
    fn quartiles_interpolate() {
        let d = Dist::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((d.min, d.q1, d.median, d.q3, d.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        assert_eq!(d.mean, 2.5);
        assert!(Dist::of(&[]).is_none());
    }

    #[test]
    fn csv_round_trip_keeps_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let rows = vec![row("gru", 2, 12.5, -3.0, 0.001), row("gcn", 4, 0.0, 1.0 / 3.0, 0.0)];
        write_csv(&p, &rows).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_csv(&p).unwrap(), rows);
        write_csv(&p, &[]).unwrap();
        assert!(read_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn grand_mean_is_weighted_mean_of_groups() {
        let rows = vec![
            row("gru", 2, 10.0, 0.0, 0.0),
            row("gru", 2, 20.0, 0.0, 0.0),
            row("gru", 4, 40.0, 8.0, 0.5),
        ];
        let g = group_summaries(&rows);
        assert_eq!(g.len(), 2);
        let v = variant_summaries(&g);
        assert_eq!(v[0].rows, 3);
        assert!((v[0].gate_red_mean - 70.0 / 3.0).abs() < 1e-12);
    }
}
