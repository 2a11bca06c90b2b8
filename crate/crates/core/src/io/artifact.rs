use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::config::{Command, ExperimentConfig};

/// Nodal data of a run. Per-cell quantities (`k`, `p`) are averaged onto
/// interior nodes and copied from the adjacent cell at the ends.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodalTable {
    pub t: Vec<f64>,
    pub phase: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub shear: Vec<f64>,
    pub adjoint: Vec<f64>,
    pub flux: Vec<f64>,
}

impl NodalTable {
    pub const HEADER: [&'static str; 7] = ["t", "K", "v", "theta", "k", "P", "p"];

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn columns(&self) -> [&[f64]; 7] {
        [
            &self.t,
            &self.phase,
            &self.v,
            &self.theta,
            &self.shear,
            &self.adjoint,
            &self.flux,
        ]
    }

    /// Writes the table with 17 significant digits per value.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        w.write_record(Self::HEADER).map_err(csv_error)?;
        let cols = self.columns();
        for row in 0..self.len() {
            w.write_record(cols.iter().map(|c| format!("{:.16e}", c[row])))
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
        let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
        if header != Self::HEADER {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        let mut cols: [Vec<f64>; 7] = Default::default();
        for record in r.records() {
            let record = record.map_err(csv_error)?;
            for (col, field) in cols.iter_mut().zip(record.iter()) {
                col.push(
                    field
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad number `{field}`")))?,
                );
            }
        }
        let [t, phase, v, theta, shear, adjoint, flux] = cols;
        Ok(Self {
            t,
            phase,
            v,
            theta,
            shear,
            adjoint,
            flux,
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Cell values onto nodes: neighbour average inside, adjacent cell at the ends.
pub fn cells_to_nodes(cells: &[f64]) -> Vec<f64> {
    let n = cells.len();
    if n == 0 {
        return Vec::new();
    }
    (0..=n)
        .map(|i| match i {
            0 => cells[0],
            i if i == n => cells[n - 1],
            i => 0.5 * (cells[i - 1] + cells[i]),
        })
        .collect()
}

/// Machine-readable record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub command: Command,
    pub config: ExperimentConfig,
    /// No error and no violations.
    pub success: bool,
    pub error: Option<String>,
    pub violations: Vec<String>,
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub table: Option<NodalTable>,
    pub curve: Option<Vec<[f64; 2]>>,
    /// Sub-runs of a sweep, written to directories named by `label`.
    pub children: Vec<RunArtifact>,
    pub label: String,
}

impl RunArtifact {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            command: config.command,
            config: config.clone(),
            success: true,
            error: None,
            violations: Vec::new(),
            scalars: BTreeMap::new(),
            flags: BTreeMap::new(),
            series: BTreeMap::new(),
            table: None,
            curve: None,
            children: Vec::new(),
            label: config.command.to_string(),
        }
    }

    /// Records a scalar; non-finite values become violations since JSON
    /// cannot hold them.
    pub fn scalar(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.scalars.insert(name.to_string(), value);
        } else {
            self.violate(format!("{name} is not finite ({value})"));
        }
    }

    pub fn flag(&mut self, name: &str, value: bool) {
        self.flags.insert(name.to_string(), value);
    }

    pub fn series(&mut self, name: &str, values: Vec<f64>) {
        if values.iter().all(|x| x.is_finite()) {
            self.series.insert(name.to_string(), values);
        } else {
            self.violate(format!("{name} holds non-finite values"));
        }
    }

    /// Records a failed check; the run no longer counts as successful.
    pub fn violate(&mut self, what: impl Into<String>) {
        self.violations.push(what.into());
        self.success = false;
    }

    pub fn fail(&mut self, error: &Error) {
        self.error = Some(error.to_string());
        self.success = false;
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunArtifact {
        let config = ExperimentConfig::defaults(Command::SolveState);
        let mut a = RunArtifact::new(&config);
        a.scalar("energy", -38.62604417_f64.sqrt() * 0.1 + 1e-17);
        a.scalar("third", 1.0 / 3.0);
        a.flag("converged", true);
        a.series("history", vec![0.1, 0.2 + 0.1, -1e-300]);
        a.table = Some(NodalTable {
            t: vec![0.0, 0.5, 1.0],
            phase: vec![0.0, -0.1, -0.30000000000000004],
            v: vec![1.0; 3],
            theta: vec![1.0; 3],
            shear: vec![0.1, 0.05, 0.0],
            adjoint: vec![0.0, 1.0 / 7.0, 2.0 / 7.0],
            flux: vec![-0.5, -0.2, 0.0],
        });
        a.curve = Some(vec![[0.0, 0.0], [0.5, -1.0 / 3.0]]);
        a
    }

    #[test]
    fn json_round_trip() {
        let a = sample();
        let text = a.to_json().unwrap();
        let back = RunArtifact::from_json(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let table = sample().table.unwrap();
        table.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,K,v,theta,k,P,p\n"));
        assert_eq!(NodalTable::read_csv(&path).unwrap(), table);
    }

    #[test]
    fn non_finite_scalars_are_violations() {
        let mut a = sample();
        a.scalar("bad", f64::NAN);
        assert!(!a.success);
        assert!(!a.scalars.contains_key("bad"));
        assert!(a.to_json().is_ok());
    }

    #[test]
    fn cell_averaging() {
        assert_eq!(cells_to_nodes(&[1.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert!(cells_to_nodes(&[]).is_empty());
    }
}
