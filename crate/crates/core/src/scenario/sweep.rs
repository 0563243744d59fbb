//! Parameter sweeps: the Cartesian product of a grid and a set of seeds,
//! one independent run per cell.

use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{config_from_value, ConfigError, Scenario};
use super::engine::run;
use super::output::RunResult;
use super::ScenarioError;
use crate::num::format_fixed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    /// Dotted path into the scenario document, e.g. `advocacy.lobby_gain`
    /// or `parties.0.trust`.
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<GridAxis>,
}

impl Grid {
    /// Grid points in row-major order (the last axis varies fastest).
    pub fn points(&self) -> Vec<Vec<Value>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.clone());
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: usize,
    pub values: Vec<Value>,
    pub seed: u64,
    pub result: RunResult,
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut cur = doc;
    for seg in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(seg).ok_or_else(|| format!("`{path}`: no key `{seg}`"))?,
            Value::Array(items) => {
                let i: usize = seg.parse().map_err(|_| format!("`{path}`: `{seg}` is not an index"))?;
                items.get_mut(i).ok_or_else(|| format!("`{path}`: index {i} out of range"))?
            }
            _ => return Err(format!("`{path}`: `{seg}` descends into a scalar")),
        };
    }
    *cur = value;
    Ok(())
}

/// One validated scenario per grid point; every path and value is checked
/// before anything runs.
pub fn expand(base: &Scenario, grid: &Grid, base_dir: &Path) -> Result<Vec<(Vec<Value>, Scenario)>, ConfigError> {
    let doc = serde_json::to_value(&base.config).expect("config serialises");
    let mut violations = Vec::new();
    for axis in &grid.axes {
        if axis.values.is_empty() {
            violations.push(format!("grid axis `{}` has no values", axis.path));
        }
        if let Err(e) = set_path(&mut doc.clone(), &axis.path, Value::Null) {
            violations.push(format!("grid path {e}"));
        }
    }
    if !violations.is_empty() {
        return Err(ConfigError { violations });
    }
    let mut out = Vec::new();
    for point in grid.points() {
        let mut d = doc.clone();
        for (axis, v) in grid.axes.iter().zip(&point) {
            set_path(&mut d, &axis.path, v.clone()).map_err(ConfigError::single)?;
        }
        match config_from_value(d, base_dir) {
            Ok(s) => out.push((point, s)),
            Err(e) => {
                let at: Vec<String> = grid.axes.iter().zip(&point).map(|(a, v)| format!("{}={v}", a.path)).collect();
                violations.extend(e.violations.into_iter().map(|m| format!("grid point [{}]: {m}", at.join(", "))));
            }
        }
    }
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(ConfigError { violations })
    }
}

/// Runs every (grid point, seed) cell on a pool of `jobs` threads. Rows come
/// back ordered by grid point, then seed, whatever the thread count.
pub fn sweep(
    base: &Scenario,
    grid: &Grid,
    seeds: &[u64],
    jobs: usize,
    base_dir: &Path,
) -> Result<Vec<SweepRow>, ScenarioError> {
    let scenarios = expand(base, grid, base_dir)?;
    let cells: Vec<(usize, u64)> = (0..scenarios.len()).flat_map(|p| seeds.iter().map(move |s| (p, *s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ScenarioError::Sweep(e.to_string()))?;
    let results: Vec<Result<RunResult, ScenarioError>> =
        pool.install(|| cells.par_iter().map(|&(p, seed)| run(&scenarios[p].1, seed).map(|o| o.result)).collect());
    cells
        .iter()
        .zip(results)
        .map(|(&(p, seed), r)| Ok(SweepRow { point: p, values: scenarios[p].0.clone(), seed, result: r? }))
        .collect()
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_fixed(n.as_f64().unwrap_or(0.0)),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn joined<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

pub fn write_csv<W: io::Write>(rows: &[SweepRow], grid: &Grid, w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["point".to_string(), "seed".to_string()];
    header.extend(grid.axes.iter().map(|a| a.path.clone()));
    header.extend(
        [
            "outcome",
            "decided",
            "ticks_executed",
            "ticks_to_decision",
            "revision_rounds",
            "final_support_share",
            "config_hash",
        ]
        .map(String::from),
    );
    out.write_record(&header)?;
    for row in rows {
        let r = &row.result;
        let mut rec = vec![row.point.to_string(), row.seed.to_string()];
        rec.extend(row.values.iter().map(cell));
        rec.push(joined(&r.proposals, |p| p.outcome.to_string()));
        rec.push(joined(&r.proposals, |p| p.decided.to_string()));
        rec.push(r.ticks_executed.to_string());
        rec.push(joined(&r.proposals, |p| p.ticks_to_decision.map_or(String::new(), |t| t.to_string())));
        rec.push(joined(&r.proposals, |p| p.revision_rounds.to_string()));
        rec.push(format_fixed(r.final_support_share));
        rec.push(r.config_hash.clone());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn grid_points_are_row_major() {
        let g = Grid {
            axes: vec![
                GridAxis { path: "a".into(), values: vec![json!(1), json!(2)] },
                GridAxis { path: "b".into(), values: vec![json!("x"), json!("y"), json!("z")] },
            ],
        };
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], vec![json!(1), json!("y")]);
        assert_eq!(Grid::default().points(), vec![Vec::<Value>::new()]);
    }

    #[test]
    fn set_path_reports_bad_paths() {
        let mut d = json!({"a": {"b": [1, 2]}});
        set_path(&mut d, "a.b.1", json!(5)).unwrap();
        assert_eq!(d, json!({"a": {"b": [1, 5]}}));
        assert!(set_path(&mut d, "a.c", json!(0)).is_err());
        assert!(set_path(&mut d, "a.b.7", json!(0)).is_err());
        assert!(set_path(&mut d, "a.b.0.x", json!(0)).is_err());
    }
}
