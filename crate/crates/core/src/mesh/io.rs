use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CellKind, Mesh};
use crate::error::{Error, Result};

/// On-disk mesh representation: index-ordered vertex and cell arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub tdim: usize,
    pub gdim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
}

impl MeshJson {
    pub fn from_mesh(mesh: &Mesh) -> MeshJson {
        let g = mesh.geometry();
        MeshJson {
            tdim: mesh.tdim(),
            gdim: mesh.gdim(),
            vertices: (0..g.num_vertices()).map(|v| g.point(v).to_vec()).collect(),
            cells: (0..mesh.num_cells())
                .map(|c| mesh.cell_vertices(c).to_vec())
                .collect(),
        }
    }

    pub fn to_mesh(&self) -> Result<Arc<Mesh>> {
        let kind = CellKind::from_tdim(self.tdim)
            .ok_or_else(|| Error::Parse(format!("unsupported tdim {}", self.tdim)))?;
        let mut coords = Vec::with_capacity(self.vertices.len() * self.gdim);
        for v in &self.vertices {
            if v.len() != self.gdim {
                return Err(Error::Parse(format!(
                    "vertex has {} coordinates, expected {}",
                    v.len(),
                    self.gdim
                )));
            }
            coords.extend_from_slice(v);
        }
        let mut cells = Vec::with_capacity(self.cells.len() * kind.num_vertices());
        for c in &self.cells {
            if c.len() != kind.num_vertices() {
                return Err(Error::Parse(format!(
                    "cell has {} vertices, expected {}",
                    c.len(),
                    kind.num_vertices()
                )));
            }
            cells.extend_from_slice(c);
        }
        Mesh::new(kind, self.gdim, coords, cells)
    }
}

impl Mesh {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MeshJson::from_mesh(self))?)
    }

    pub fn from_json(text: &str) -> Result<Arc<Mesh>> {
        let m: MeshJson = serde_json::from_str(text)?;
        m.to_mesh()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Arc<Mesh>> {
        Mesh::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square_mesh;

    #[test]
    fn json_round_trip() {
        let mesh = unit_square_mesh(3).unwrap();
        let text = mesh.to_json().unwrap();
        let back = Mesh::from_json(&text).unwrap();
        assert_eq!(MeshJson::from_mesh(&mesh), MeshJson::from_mesh(&back));
        assert_ne!(mesh.id(), back.id());
    }

    #[test]
    fn json_field_names() {
        let text = r#"{"tdim": 1, "gdim": 1, "vertices": [[0.0],[1.0]], "cells": [[0,1]]}"#;
        let mesh = Mesh::from_json(text).unwrap();
        assert_eq!(mesh.num_cells(), 1);
        let bad = r#"{"tdim": 2, "gdim": 2, "vertices": [[0.0,0.0]], "cells": [[0,1]]}"#;
        assert!(Mesh::from_json(bad).is_err());
    }
}
