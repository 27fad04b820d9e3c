//! JSON density-matrix files.
//!
//! ```json
//! { "n_parties": 1, "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]] }
//! ```
//!
//! Each entry is an `[re, im]` pair; rows follow the computational basis with
//! party 1 as the most significant bit.

use std::path::Path;

use bellwb::linalg::{ComplexMatrix, C64};
use bellwb::quantum::DensityMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_parties: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let matrix = rho
            .matrix()
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        Self {
            n_parties: rho.n_parties(),
            matrix,
        }
    }

    /// Checks shape, Hermiticity, trace and positivity.
    pub fn to_density(&self) -> Result<DensityMatrix, String> {
        let dim = 1usize
            .checked_shl(self.n_parties as u32)
            .filter(|_| self.n_parties >= 1)
            .ok_or_else(|| format!("bad party count {}", self.n_parties))?;
        if self.matrix.len() != dim || self.matrix.iter().any(|r| r.len() != dim) {
            return Err(format!(
                "{} parties need a {dim}x{dim} matrix",
                self.n_parties
            ));
        }
        let rows: Vec<Vec<C64>> = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        let m = ComplexMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        let rho = DensityMatrix::new(m).map_err(|e| e.to_string())?;
        if rho.n_parties() != self.n_parties {
            return Err(format!(
                "matrix describes {} parties, header says {}",
                rho.n_parties(),
                self.n_parties
            ));
        }
        Ok(rho)
    }
}

pub fn load(path: &Path) -> Result<DensityMatrix, CliError> {
    let bad = |reason: String| CliError::StateFile {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: StateFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    file.to_density().map_err(bad)
}
