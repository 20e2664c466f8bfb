use serde::{Deserialize, Serialize};

use super::spec::ScenarioSpec;
use crate::density::{HERMITIAN_TOL, POSITIVITY_FLOOR, TRACE_TOL};
use crate::error::{invalid, Result};
use crate::liouvillian::{NULL_SPACE_TOL, STEADY_RESIDUAL_TOL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Column {
            name: name.to_string(),
            unit: unit.to_string(),
        }
    }
}

/// A quoted value carried alongside the computed rows for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub steady_residual: f64,
    pub null_space: f64,
    pub evolve: f64,
    pub hermitian: f64,
    pub trace: f64,
    pub positivity_floor: f64,
}

/// Provenance of a table: enough to rerun it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub engine: String,
    pub engine_version: String,
    pub spec: ScenarioSpec,
    pub tolerances: Tolerances,
}

impl Manifest {
    pub fn for_spec(spec: &ScenarioSpec) -> Self {
        Manifest {
            scenario: spec.scenario.name().to_string(),
            engine: env!("CARGO_PKG_NAME").to_string(),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            spec: spec.clone(),
            tolerances: Tolerances {
                steady_residual: STEADY_RESIDUAL_TOL,
                null_space: NULL_SPACE_TOL,
                evolve: spec.solver.evolve_tol,
                hermitian: HERMITIAN_TOL,
                trace: TRACE_TOL,
                positivity_floor: POSITIVITY_FLOOR,
            },
        }
    }
}

/// Rows of (swept parameter, observables…); column 0 is the parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub references: Vec<Reference>,
    pub manifest: Manifest,
}

impl ScanTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// All values of the named column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn parameter_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn reference(&self, name: &str) -> Option<f64> {
        self.references.iter().find(|r| r.name == name).map(|r| r.value)
    }

    /// Shape and finiteness checks.
    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(invalid("table", "no columns"));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(invalid(
                    "table",
                    format!("row {i} has {} cells, expected {}", row.len(), self.columns.len()),
                ));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(invalid(
                    "table",
                    format!("non-finite value in row {i}, column '{}'", self.columns[j].name),
                ));
            }
        }
        Ok(())
    }
}
