//! Method tags and the JSON envelope shared by reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// How a number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Oracle,
    Optimized,
    Quadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::Oracle => "oracle",
            Self::Optimized => "optimized",
            Self::Quadrature => "quadrature",
        }
    }
}

/// A named scalar with its method tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub name: String,
    pub value: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl ReportRecord {
    pub fn new(name: impl Into<String>, value: f64, method: Method) -> Self {
        Self {
            name: name.into(),
            value,
            method,
            tolerance: None,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }
}

pub const FORMAT_VERSION: u32 = 1;

/// Metadata wrapper around a command's rows. Contains no timestamps, so the
/// same inputs always serialize to the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub version: u32,
    pub command: String,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub parameters: serde_json::Value,
    pub data: T,
}
