//! JSON fixtures for sets, wires, morphisms, quantum functions and graphs.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{QsyncError, Result};
use crate::graphs::QuantumGraph;
use crate::qset::{QuantumSet, SetRegistry};
use crate::strategies::QuantumFunction;
use crate::tensor::{CMatrix, Morphism, Wire, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetJson {
    pub name: String,
    pub blocks: Vec<usize>,
}

impl SetJson {
    pub fn of(set: &QuantumSet) -> Self {
        SetJson {
            name: set.name().to_string(),
            blocks: set.blocks().to_vec(),
        }
    }

    pub fn build(&self) -> Result<Arc<QuantumSet>> {
        QuantumSet::new(self.name.clone(), &self.blocks)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WireJson {
    Qset {
        name: String,
        #[serde(default)]
        op: bool,
        /// Optional inline profile; otherwise the name is looked up.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        blocks: Option<Vec<usize>>,
    },
    Space {
        dim: usize,
        #[serde(default)]
        dual: bool,
    },
}

impl WireJson {
    pub fn of(w: &Wire) -> Self {
        match w {
            Wire::QSet { set, op } => WireJson::Qset {
                name: set.name().to_string(),
                op: *op,
                blocks: Some(set.blocks().to_vec()),
            },
            Wire::Space { dim, dual } => WireJson::Space {
                dim: *dim,
                dual: *dual,
            },
        }
    }

    pub fn build(&self, sets: &SetRegistry) -> Result<Wire> {
        match self {
            WireJson::Qset { name, op, blocks } => {
                let set = match (blocks, sets.get(name)) {
                    (Some(b), Some(known)) if known.blocks() != b.as_slice() => {
                        return Err(QsyncError::Malformed(format!(
                            "set {name} given as {b:?} but registered as {:?}",
                            known.blocks()
                        )))
                    }
                    (Some(b), _) => QuantumSet::new(name.clone(), b)?,
                    (None, Some(known)) => known.clone(),
                    (None, None) => return Err(QsyncError::UnboundName(name.clone())),
                };
                Ok(Wire::QSet { set, op: *op })
            }
            WireJson::Space { dim, dual } => {
                if *dim == 0 {
                    return Err(QsyncError::Malformed("space of dimension 0".into()));
                }
                Ok(Wire::Space {
                    dim: *dim,
                    dual: *dual,
                })
            }
        }
    }
}

/// A matrix entry: a bare real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Complex([re, im]) => C64::new(re, im),
            Entry::Real(re) => C64::new(re, 0.0),
        }
    }
}

fn matrix_to_json(m: &CMatrix) -> Vec<Vec<Entry>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| Entry::Complex([z.re, z.im])).collect())
        .collect()
}

fn matrix_from_json(rows: &[Vec<Entry>]) -> Result<CMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != cols) {
        return Err(QsyncError::Malformed(format!(
            "row {i} has {} entries, expected {cols}",
            row.len()
        )));
    }
    Ok(CMatrix::from_fn(r, cols, |i, j| rows[i][j].value()))
}

/// Rows index the codomain, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub dom: Vec<WireJson>,
    pub cod: Vec<WireJson>,
    pub matrix: Vec<Vec<Entry>>,
}

impl MorphismJson {
    pub fn of(m: &Morphism) -> Self {
        MorphismJson {
            dom: m.dom().iter().map(WireJson::of).collect(),
            cod: m.cod().iter().map(WireJson::of).collect(),
            matrix: matrix_to_json(m.matrix()),
        }
    }

    pub fn build(&self, sets: &SetRegistry) -> Result<Morphism> {
        let wires = |ws: &[WireJson]| ws.iter().map(|w| w.build(sets)).collect::<Result<Vec<_>>>();
        let (dom, cod) = (wires(&self.dom)?, wires(&self.cod)?);
        Morphism::new(dom, cod, matrix_from_json(&self.matrix)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFuncJson {
    pub resource_dim: usize,
    #[serde(rename = "X")]
    pub x: SetJson,
    #[serde(rename = "A")]
    pub a: SetJson,
    pub map: MorphismJson,
}

impl QFuncJson {
    pub fn of(e: &QuantumFunction) -> Result<Self> {
        let set = |ws: &[Wire]| -> Result<SetJson> {
            match ws {
                [w] => w
                    .qset()
                    .map(|(s, _)| SetJson::of(s))
                    .ok_or_else(|| QsyncError::Malformed(format!("{w} is not a quantum set"))),
                _ => Err(QsyncError::Malformed(
                    "only single question and answer wires are serialized".into(),
                )),
            }
        };
        Ok(QFuncJson {
            resource_dim: e.resource_dim(),
            x: set(e.questions())?,
            a: set(e.answers())?,
            map: MorphismJson::of(e.map()),
        })
    }

    /// Builds the map without running the quantum-function checks.
    pub fn build(&self) -> Result<Morphism> {
        let mut sets = SetRegistry::new();
        sets.insert(self.x.build()?);
        sets.insert(self.a.build()?);
        let m = self.map.build(&sets)?;
        if m.dom().first().map(Wire::dim) != Some(self.resource_dim) {
            return Err(QsyncError::Malformed(format!(
                "resource_dim {} does not match the map's first input wire",
                self.resource_dim
            )));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub qset: SetJson,
    pub matrix: Vec<Vec<Entry>>,
}

impl GraphJson {
    pub fn of(g: &QuantumGraph) -> Self {
        GraphJson {
            qset: SetJson::of(g.set()),
            matrix: matrix_to_json(g.adjacency().matrix()),
        }
    }

    pub fn build(&self, tol: f64) -> Result<QuantumGraph> {
        let set = self.qset.build()?;
        let w = vec![crate::qset::wire(&set)];
        let g = Morphism::new(w.clone(), w, matrix_from_json(&self.matrix)?)?;
        QuantumGraph::new(set, g, tol)
    }
}

/// A state vector as a list of entries.
pub fn state_from_json(entries: &[Entry]) -> Vec<C64> {
    entries.iter().map(|e| e.value()).collect()
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}
