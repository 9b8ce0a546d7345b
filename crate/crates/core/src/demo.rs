use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoSource {
    Generated,
    Imported,
}

/// One reversed-disassembly demonstration with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Demo {
    pub id: String,
    pub path: Path,
    pub source: DemoSource,
    pub seed: u64,
}

/// All demonstrations for a single assembly. Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoSet {
    assembly_id: String,
    demos: Vec<Demo>,
}

impl DemoSet {
    pub fn new(assembly_id: impl Into<String>, demos: Vec<Demo>) -> Result<Self> {
        if demos.is_empty() {
            return Err(Error::EmptyDemoSet);
        }
        Ok(DemoSet {
            assembly_id: assembly_id.into(),
            demos,
        })
    }

    /// Wraps bare paths as imported demos with sequential ids.
    pub fn from_paths(assembly_id: impl Into<String>, paths: Vec<Path>) -> Result<Self> {
        let demos = paths
            .into_iter()
            .enumerate()
            .map(|(i, path)| Demo {
                id: format!("demo-{i:04}"),
                path,
                source: DemoSource::Imported,
                seed: 0,
            })
            .collect();
        DemoSet::new(assembly_id, demos)
    }

    pub fn assembly_id(&self) -> &str {
        &self.assembly_id
    }

    pub fn demos(&self) -> &[Demo] {
        &self.demos
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    pub fn paths(&self) -> impl ExactSizeIterator<Item = &Path> {
        self.demos.iter().map(|d| &d.path)
    }

    pub fn push(&mut self, demo: Demo) {
        self.demos.push(demo);
    }

    /// Every demo shifted into another frame, e.g. goal frame to world frame.
    pub fn translated(&self, offset: &Point3) -> DemoSet {
        DemoSet {
            assembly_id: self.assembly_id.clone(),
            demos: self
                .demos
                .iter()
                .map(|d| Demo {
                    path: d.path.translated(offset),
                    ..d.clone()
                })
                .collect(),
        }
    }
}
