//! JSON interchange format for spaces and the processes living on them.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::prob_space::{Adaptedness, FilteredSpace, Process};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProcessFile {
    pub name: String,
    pub dim: usize,
    /// `values[time][atom * dim + coord]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub outcomes: Vec<String>,
    pub probs: Vec<f64>,
    pub horizon: usize,
    pub partitions: Vec<Vec<Vec<usize>>>,
    #[serde(default)]
    pub processes: Vec<ProcessFile>,
}

impl SpaceFile {
    pub fn from_parts(space: &FilteredSpace, processes: &[(&str, &Process)]) -> Self {
        Self {
            outcomes: space.outcomes().to_vec(),
            probs: space.probs().to_vec(),
            horizon: space.horizon(),
            partitions: space.partitions().to_vec(),
            processes: processes
                .iter()
                .map(|(name, p)| ProcessFile {
                    name: (*name).into(),
                    dim: p.dim(),
                    values: p.slices().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_space(&self) -> Result<FilteredSpace> {
        FilteredSpace::new(
            self.outcomes.clone(),
            self.probs.clone(),
            self.horizon,
            self.partitions.clone(),
        )
    }

    /// Revalidates the named process on the decoded space with the given
    /// measurability flag.
    pub fn process(
        &self,
        space: &FilteredSpace,
        name: &str,
        adaptedness: Adaptedness,
    ) -> Result<Process> {
        let pf = self
            .processes
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| EngineError::Structural(format!("no process named {name:?}")))?;
        Process::new(space, pf.dim, pf.values.clone(), adaptedness)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
