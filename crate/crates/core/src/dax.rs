//! Pegasus DAX (3.x) import: `<job id runtime>` elements become tasks and
//! `<child ref><parent ref/></child>` elements become edges.

use std::collections::HashSet;

use thiserror::Error;

use crate::platform::Platform;
use crate::workflow::{Workflow, WorkflowError};

#[derive(Debug, Error)]
pub enum DaxError {
    #[error("invalid XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("root element is <{0}>, expected <adag>")]
    NotDax(String),
    #[error("a <job> element has no id")]
    MissingId,
    #[error("job {0} has no runtime attribute")]
    MissingRuntime(String),
    #[error("job {job}: runtime {value:?} is not a positive number")]
    BadRuntime { job: String, value: String },
    #[error("dependency refers to unknown job {0}")]
    UnknownJob(String),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
}

/// Values the DAX format does not carry.
#[derive(Debug, Clone, PartialEq)]
pub struct DaxDefaults {
    pub arrival: f64,
    /// `D_w = A_w + df * critical-path time` on the fastest VM.
    pub deadline_factor: f64,
    pub reliability: f64,
    /// MI executed per second of recorded runtime.
    pub reference_mips: f64,
}

impl Default for DaxDefaults {
    fn default() -> Self {
        Self { arrival: 0.0, deadline_factor: 1.5, reliability: 0.95, reference_mips: 1000.0 }
    }
}

/// Parses a DAX document into a workflow with the deadline derived from
/// `defaults.deadline_factor` on `p`.
pub fn parse_dax(document: &str, name: &str, defaults: &DaxDefaults, p: &Platform) -> Result<Workflow, DaxError> {
    let doc = roxmltree::Document::parse(document)?;
    let root = doc.root_element();
    if root.tag_name().name() != "adag" {
        return Err(DaxError::NotDax(root.tag_name().name().to_string()));
    }

    let mut tasks = Vec::new();
    let mut ids = HashSet::new();
    for job in root.children().filter(|n| n.tag_name().name() == "job") {
        let id = job.attribute("id").ok_or(DaxError::MissingId)?.to_string();
        let raw = job.attribute("runtime").ok_or_else(|| DaxError::MissingRuntime(id.clone()))?;
        let runtime: f64 = raw
            .trim()
            .parse()
            .ok()
            .filter(|r: &f64| *r > 0.0 && r.is_finite())
            .ok_or_else(|| DaxError::BadRuntime { job: id.clone(), value: raw.to_string() })?;
        ids.insert(id.clone());
        tasks.push((id, runtime * defaults.reference_mips));
    }

    let mut edges = Vec::new();
    for child in root.children().filter(|n| n.tag_name().name() == "child") {
        let to = child.attribute("ref").ok_or(DaxError::MissingId)?;
        if !ids.contains(to) {
            return Err(DaxError::UnknownJob(to.to_string()));
        }
        for parent in child.children().filter(|n| n.tag_name().name() == "parent") {
            let from = parent.attribute("ref").ok_or(DaxError::MissingId)?;
            if !ids.contains(from) {
                return Err(DaxError::UnknownJob(from.to_string()));
            }
            edges.push((from.to_string(), to.to_string()));
        }
    }

    // placeholder deadline, replaced once the critical path is known
    let w = Workflow::new(name, tasks, edges, defaults.arrival, defaults.arrival + 1.0, defaults.reliability)?;
    Ok(w.with_deadline_factor(defaults.deadline_factor, p)?)
}

/// Converts a DAX document to the canonical workflow JSON.
pub fn import_dax(document: &str, name: &str, defaults: &DaxDefaults, p: &Platform) -> Result<String, DaxError> {
    Ok(parse_dax(document, name, defaults, p)?.to_json())
}
