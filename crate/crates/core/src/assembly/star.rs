use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::meshview::{build_mapping, root_of};

/// The cells of a higher-dimensional mesh sharing a lower-dimensional cell
/// `cell` as a facet, each with the local index of that facet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Star {
    pub cell: usize,
    pub members: Vec<(usize, usize)>,
}

/// Resolves the star of cell `cell` of `lower` in `higher`
/// (`higher.tdim() == lower.tdim() + 1`).
pub fn build_star(lower: &Arc<Mesh>, higher: &Arc<Mesh>, cell: usize) -> Result<Star> {
    let mapping = build_mapping(lower, higher)?;
    star_from_facet(lower, higher, cell, mapping.target(cell))
}

pub(crate) fn star_from_facet(
    lower: &Arc<Mesh>,
    higher: &Arc<Mesh>,
    cell: usize,
    facet: Option<usize>,
) -> Result<Star> {
    let tdim = higher.tdim();
    let Some(f) = facet else {
        return Err(Error::InconsistentView {
            facet: parent_facet(lower, cell),
            target: higher.id().value(),
        });
    };
    let f2c = higher.compute_connectivity(tdim - 1, tdim)?;
    let c2f = higher.compute_connectivity(tdim, tdim - 1)?;
    let members = f2c
        .links(f)
        .iter()
        .map(|&c| {
            let lf = c2f
                .links(c)
                .iter()
                .position(|&x| x == f)
                .expect("facet belongs to its adjacent cells");
            (c, lf)
        })
        .collect();
    Ok(Star { cell, members })
}

/// Index of the root-mesh entity underlying `cell` (for error reports).
fn parent_facet(lower: &Arc<Mesh>, cell: usize) -> usize {
    let root = root_of(lower);
    lower
        .topology()
        .mesh_view(root.id())
        .and_then(|m| m.target(cell))
        .unwrap_or(cell)
}
