//! Serializable detection reports: rates, spectra and time series together
//! with the full provenance needed to reproduce them (model parameters,
//! truncation, broadening, response model, library version).
//!
//! JSON is the machine format (lossless round trip through serde); CSV is
//! the plotting format, wide layout with one column per series and the
//! provenance in `#`-prefixed header comments. Field names and units are
//! stable; identical inputs produce byte-identical output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityKind {
    Rate,
    Spectrum,
    TimeSeries,
}

/// Name and unit of one data axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub unit: String,
}

impl AxisSpec {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// One named data series over the shared abscissa.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

/// The model a report was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
}

/// Reproducibility block attached to every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub library_version: String,
    pub truncation: Vec<usize>,
    pub degeneracy_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    /// Truncation the run was asked for.
    pub requested: usize,
    /// Whether that truncation itself passed the doubling test.
    pub certified: bool,
    pub converged: bool,
    pub recommended: Option<usize>,
    pub max_drift: Option<f64>,
    pub tolerance: f64,
    pub levels: usize,
}

/// A complete detection result: one quantity kind, one abscissa, any number
/// of series over it, scalar summary values, and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    /// Scenario identifier, e.g. "ground-test".
    pub scenario: String,
    /// Slug used for output file names, unique within a scenario run.
    pub name: String,
    pub model: ModelDescriptor,
    pub quantity: QuantityKind,
    pub abscissa: AxisSpec,
    pub value: AxisSpec,
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub summary: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

impl DetectionReport {
    /// Validate the structural invariants: finite data, strictly
    /// monotone abscissa, and every series matching the grid length.
    pub fn validate(&self) -> Result<()> {
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite abscissa value".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "abscissa must be strictly increasing".into(),
            ));
        }
        for s in &self.series {
            if s.values.len() != self.grid.len() {
                return Err(Error::Validation(format!(
                    "series '{}' has {} values for {} grid points",
                    s.label,
                    s.values.len(),
                    self.grid.len()
                )));
            }
            if s.values.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "series '{}' contains a non-finite value",
                    s.label
                )));
            }
        }
        if self.summary.values().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite summary value".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Serialization(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        report.validate()?;
        Ok(report)
    }

    /// Wide-format CSV: provenance in `#` comments, then a header row
    /// `abscissa,label...`, then one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# scenario: {} ({}), quantity: {:?}\n",
            self.scenario, self.name, self.quantity
        ));
        out.push_str(&format!("# model: {}", self.model.kind));
        for (k, v) in &self.model.params {
            out.push_str(&format!(" {k}={v}"));
        }
        out.push('\n');
        out.push_str(&format!(
            "# provenance: library_version={} truncation={:?} degeneracy_tol={}",
            self.provenance.library_version,
            self.provenance.truncation,
            self.provenance.degeneracy_tol
        ));
        if let Some(eta) = self.provenance.eta {
            out.push_str(&format!(" eta={eta}"));
        }
        if let Some(resp) = &self.provenance.response {
            out.push_str(&format!(" response={resp}"));
        }
        out.push('\n');
        for w in &self.provenance.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary: {k} = {v}\n"));
        }
        out.push_str(&format!(
            "# units: {} [{}], values [{}]\n",
            self.abscissa.name, self.abscissa.unit, self.value.unit
        ));
        out.push_str(&self.abscissa.name);
        for s in &self.series {
            out.push(',');
            out.push_str(&s.label);
        }
        out.push('\n');
        for (i, x) in self.grid.iter().enumerate() {
            out.push_str(&format!("{x}"));
            for s in &self.series {
                out.push_str(&format!(",{}", s.values[i]));
            }
            out.push('\n');
        }
        out
    }
}
