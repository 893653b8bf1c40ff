//! Submeshes carved from a parent mesh and the entity maps relating them.
//!
//! A submesh stores a [`MeshViewMapping`] to its parent (cell map and vertex
//! map). Maps between two submeshes of the same parent are built on demand
//! with [`build_mapping`] and cached in the registry of the first mesh.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh, MeshFunction, MeshId};

/// Child-to-target entity maps.
///
/// `cell_map[c]` is the target entity of child cell `c`: a target cell when
/// both meshes have the same dimension, a target facet when the child has
/// codimension one. `None` marks cells outside the overlap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshViewMapping {
    #[serde(skip)]
    pub source_mesh_id: MeshId,
    #[serde(skip)]
    pub target_mesh_id: MeshId,
    #[serde(skip)]
    pub target_entity_dim: usize,
    pub cell_map: Vec<Option<usize>>,
    pub vertex_map: Vec<usize>,
}

impl MeshViewMapping {
    /// True when no child cell has a counterpart in the target.
    pub fn is_empty(&self) -> bool {
        self.cell_map.iter().all(Option::is_none)
    }

    pub fn target(&self, cell: usize) -> Option<usize> {
        self.cell_map.get(cell).copied().flatten()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Builds the submesh made of the entities tagged `tag` in `marker`.
///
/// Child vertices are numbered by ascending parent index. Child cells keep
/// the parent entity's vertex order (parent cell order for codimension zero,
/// sorted order for facets).
pub fn create_submesh(marker: &MeshFunction, tag: usize) -> Result<Arc<Mesh>> {
    let parent = marker.mesh();
    if parent.parent().is_some() {
        return Err(Error::UnsupportedNesting);
    }
    let tdim = parent.tdim();
    let dim = marker.dim();
    if dim + 1 < tdim {
        return Err(Error::UnsupportedCodimension {
            entity_dim: dim,
            tdim,
        });
    }
    let tagged = marker.indices_with(tag);
    if tagged.is_empty() {
        return Err(Error::EmptySelection { tag });
    }
    let entities = parent.topology().entities(dim)?;

    let mut vertex_map: Vec<usize> = tagged
        .iter()
        .flat_map(|&e| entities.vertices(e).iter().copied())
        .collect();
    vertex_map.sort_unstable();
    vertex_map.dedup();
    let local_of: HashMap<usize, usize> = vertex_map
        .iter()
        .enumerate()
        .map(|(local, &global)| (global, local))
        .collect();

    let geometry = parent.geometry();
    let coords: Vec<f64> = vertex_map
        .iter()
        .flat_map(|&v| geometry.point(v).iter().copied())
        .collect();
    let cells: Vec<usize> = tagged
        .iter()
        .flat_map(|&e| entities.vertices(e).iter().map(|v| local_of[v]))
        .collect();

    let kind = CellKind::from_tdim(dim).expect("entity dimension is at most 3");
    let child = Mesh::build(kind, parent.gdim(), coords, cells, Some(parent.clone()))?;
    child.topology().register_view(MeshViewMapping {
        source_mesh_id: child.id(),
        target_mesh_id: parent.id(),
        target_entity_dim: dim,
        cell_map: tagged.into_iter().map(Some).collect(),
        vertex_map,
    });
    Ok(Arc::new(child))
}

/// The mesh at the top of the parent chain.
pub fn root_of(mesh: &Arc<Mesh>) -> &Arc<Mesh> {
    mesh.parent().unwrap_or(mesh)
}

/// Entity of the root mesh (of dimension `mesh.tdim()`) underlying each cell.
fn cells_in_root(mesh: &Arc<Mesh>) -> Vec<usize> {
    match mesh.parent() {
        None => (0..mesh.num_cells()).collect(),
        Some(p) => {
            let view = mesh
                .topology()
                .mesh_view(p.id())
                .expect("a submesh always carries its parent mapping");
            view.cell_map
                .iter()
                .map(|c| c.expect("parent mapping is total"))
                .collect()
        }
    }
}

fn vertices_in_root(mesh: &Arc<Mesh>) -> Vec<usize> {
    match mesh.parent() {
        None => (0..mesh.num_vertices()).collect(),
        Some(p) => mesh
            .topology()
            .mesh_view(p.id())
            .expect("a submesh always carries its parent mapping")
            .vertex_map
            .clone(),
    }
}

/// Inverse of [`cells_in_root`]: root entity -> cell of `mesh`.
fn root_to_cells(mesh: &Arc<Mesh>) -> Result<Vec<Option<usize>>> {
    let root = root_of(mesh);
    let n = root.num_entities(mesh.tdim())?;
    let mut inv = vec![None; n];
    for (c, e) in cells_in_root(mesh).into_iter().enumerate() {
        inv[e] = Some(c);
    }
    Ok(inv)
}

/// Builds (or fetches from the registry of `mesh_i`) the cell map from
/// `mesh_i` into `mesh_j`.
///
/// Both meshes must be the same mesh, a parent/child pair, or two children
/// of a common parent. For `tdim(i) == tdim(j)` the map targets cells of
/// `mesh_j`; for `tdim(i) + 1 == tdim(j)` it targets facets of `mesh_j`.
pub fn build_mapping(mesh_i: &Arc<Mesh>, mesh_j: &Arc<Mesh>) -> Result<Arc<MeshViewMapping>> {
    if let Some(m) = mesh_i.topology().mesh_view(mesh_j.id()) {
        return Ok(m);
    }
    let (di, dj) = (mesh_i.tdim(), mesh_j.tdim());
    if mesh_i.id() == mesh_j.id() {
        return Ok(mesh_i.topology().register_view(MeshViewMapping {
            source_mesh_id: mesh_i.id(),
            target_mesh_id: mesh_j.id(),
            target_entity_dim: dj,
            cell_map: (0..mesh_i.num_cells()).map(Some).collect(),
            vertex_map: (0..mesh_i.num_vertices()).collect(),
        }));
    }
    let root = root_of(mesh_i);
    if root.id() != root_of(mesh_j).id() {
        return Err(Error::NoCommonParent(
            mesh_i.id().value(),
            mesh_j.id().value(),
        ));
    }
    let root_tdim = root.tdim();
    let in_root = cells_in_root(mesh_i);
    let j_of_root = root_to_cells(mesh_j)?;

    let cell_map = if di == dj {
        in_root.iter().map(|&e| j_of_root[e]).collect()
    } else if di + 1 == dj && dj == root_tdim {
        let root_f2c = root.compute_connectivity(root_tdim - 1, root_tdim)?;
        let root_facets = root.topology().entities(root_tdim - 1)?;
        let j_c2f = mesh_j.compute_connectivity(dj, dj - 1)?;
        let j_facets = mesh_j.topology().entities(dj - 1)?;
        let j_vertices = vertices_in_root(mesh_j);
        in_root
            .iter()
            .map(|&pf| {
                let target = root_facets.vertices(pf);
                root_f2c
                    .links(pf)
                    .iter()
                    .filter_map(|&rc| j_of_root[rc])
                    .find_map(|jc| {
                        j_c2f.links(jc).iter().copied().find(|&jf| {
                            let mut vs: Vec<usize> = j_facets
                                .vertices(jf)
                                .iter()
                                .map(|&v| j_vertices[v])
                                .collect();
                            vs.sort_unstable();
                            vs == target
                        })
                    })
            })
            .collect()
    } else if di + 1 == dj {
        return Err(Error::UnsupportedCodimension {
            entity_dim: di,
            tdim: root_tdim,
        });
    } else {
        return Err(Error::InvalidArgument(format!(
            "cannot map cells of a {di}-dimensional mesh into a {dj}-dimensional mesh"
        )));
    };

    Ok(mesh_i.topology().register_view(MeshViewMapping {
        source_mesh_id: mesh_i.id(),
        target_mesh_id: mesh_j.id(),
        target_entity_dim: if di == dj { dj } else { dj - 1 },
        cell_map,
        vertex_map: Vec::new(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{mark_entities, unit_cube_mesh, unit_interval_mesh, unit_square_mesh};

    const EPS: f64 = 1e-10;

    fn interface(mesh: &Arc<Mesh>) -> Arc<Mesh> {
        let marker = mark_entities(mesh, mesh.tdim() - 1, |x| (x[0] - 0.5).abs() < EPS).unwrap();
        create_submesh(&marker, 1).unwrap()
    }

    fn half(mesh: &Arc<Mesh>, left: bool) -> Arc<Mesh> {
        let marker = mark_entities(mesh, mesh.tdim(), |x| (x[0] < 0.5) == left).unwrap();
        create_submesh(&marker, 1).unwrap()
    }

    #[test]
    fn figure_three_interface_maps() {
        let mesh = unit_square_mesh(2).unwrap();
        let gamma = interface(&mesh);
        assert_eq!((gamma.num_vertices(), gamma.num_cells()), (3, 2));
        let view = gamma.topology().mesh_view(mesh.id()).unwrap();
        assert_eq!(view.vertex_map, vec![1, 4, 7]);
        assert_eq!(view.cell_map, vec![Some(4), Some(11)]);
    }

    #[test]
    fn identity_selection_is_bijection() {
        let mesh = unit_square_mesh(3).unwrap();
        let all = MeshFunction::new(&mesh, 2, 1).unwrap();
        let sub = create_submesh(&all, 1).unwrap();
        let view = sub.topology().mesh_view(mesh.id()).unwrap();
        let expected: Vec<Option<usize>> = (0..mesh.num_cells()).map(Some).collect();
        assert_eq!(view.cell_map, expected);
        assert_eq!(sub.num_vertices(), mesh.num_vertices());
    }

    #[test]
    fn left_half_counts() {
        let mesh = unit_square_mesh(2).unwrap();
        let left = half(&mesh, true);
        assert_eq!((left.num_cells(), left.num_vertices()), (4, 6));
    }

    #[test]
    fn empty_selection_and_codimension_errors() {
        let mesh = unit_square_mesh(2).unwrap();
        let none = MeshFunction::new(&mesh, 1, 0).unwrap();
        assert!(matches!(create_submesh(&none, 1), Err(Error::EmptySelection { tag: 1 })));
        let verts = MeshFunction::new(&mesh, 0, 1).unwrap();
        assert!(matches!(
            create_submesh(&verts, 1),
            Err(Error::UnsupportedCodimension { .. })
        ));
    }

    #[test]
    fn nesting_is_rejected() {
        let mesh = unit_square_mesh(2).unwrap();
        let left = half(&mesh, true);
        let all = MeshFunction::new(&left, 2, 1).unwrap();
        assert!(matches!(create_submesh(&all, 1), Err(Error::UnsupportedNesting)));
    }

    #[test]
    fn interval_boundary_points() {
        let mesh = unit_interval_mesh(4).unwrap();
        let marker = mark_entities(&mesh, 0, |x| x[0] < EPS || x[0] > 1.0 - EPS).unwrap();
        let ends = create_submesh(&marker, 1).unwrap();
        assert_eq!(ends.cell_kind(), CellKind::Point);
        assert_eq!(ends.num_cells(), 2);
    }

    #[test]
    fn geometry_is_preserved() {
        let mesh = unit_square_mesh(4).unwrap();
        let left = half(&mesh, true);
        let view = left.topology().mesh_view(mesh.id()).unwrap();
        for c in 0..left.num_cells() {
            let pc = view.cell_map[c].unwrap();
            assert_eq!(left.cell_coordinates(c), mesh.cell_coordinates(pc));
        }
        for (v, &pv) in view.vertex_map.iter().enumerate() {
            assert_eq!(left.geometry().point(v), mesh.geometry().point(pv));
        }
    }

    #[test]
    fn codim_one_vertex_sets_match() {
        let mesh = unit_cube_mesh(2).unwrap();
        let gamma = interface(&mesh);
        let view = gamma.topology().mesh_view(mesh.id()).unwrap();
        let facets = mesh.topology().entities(2).unwrap();
        for c in 0..gamma.num_cells() {
            let mut child: Vec<usize> = gamma.cell_vertices(c).iter().map(|&v| view.vertex_map[v]).collect();
            child.sort_unstable();
            assert_eq!(child, facets.vertices(view.cell_map[c].unwrap()));
        }
    }

    #[test]
    fn sibling_identity_and_round_trip() {
        let mesh = unit_square_mesh(4).unwrap();
        let a = half(&mesh, true);
        let b = half(&mesh, true);
        let ab = build_mapping(&a, &b).unwrap();
        let ba = build_mapping(&b, &a).unwrap();
        for c in 0..a.num_cells() {
            assert_eq!(ab.cell_map[c], Some(c));
            assert_eq!(ba.cell_map[ab.cell_map[c].unwrap()], Some(c));
        }
        // cached on second call
        assert!(Arc::ptr_eq(&ab, &build_mapping(&a, &b).unwrap()));
    }

    #[test]
    fn disjoint_siblings_map_to_nothing() {
        let mesh = unit_square_mesh(4).unwrap();
        let left = half(&mesh, true);
        let right = half(&mesh, false);
        let m = build_mapping(&left, &right).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn interface_into_left_half() {
        let mesh = unit_square_mesh(2).unwrap();
        let gamma = interface(&mesh);
        let left = half(&mesh, true);
        let m = build_mapping(&gamma, &left).unwrap();
        let f2c = left.compute_connectivity(1, 2).unwrap();
        let facets = left.topology().entities(1).unwrap();
        let lv = left.topology().mesh_view(mesh.id()).unwrap().vertex_map.clone();
        let gv = gamma.topology().mesh_view(mesh.id()).unwrap().vertex_map.clone();
        for c in 0..gamma.num_cells() {
            let f = m.cell_map[c].expect("interface lies on the boundary of the left half");
            // exterior facet of the left half: a single member star
            assert_eq!(f2c.links(f).len(), 1);
            let mut a: Vec<usize> = facets.vertices(f).iter().map(|&v| lv[v]).collect();
            let mut b: Vec<usize> = gamma.cell_vertices(c).iter().map(|&v| gv[v]).collect();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn interface_into_parent() {
        let mesh = unit_square_mesh(2).unwrap();
        let gamma = interface(&mesh);
        let m = build_mapping(&gamma, &mesh).unwrap();
        assert_eq!(m.cell_map, vec![Some(4), Some(11)]);
    }

    #[test]
    fn unrelated_meshes_fail() {
        let a = unit_square_mesh(2).unwrap();
        let b = unit_square_mesh(2).unwrap();
        let ga = interface(&a);
        assert!(matches!(build_mapping(&ga, &b), Err(Error::NoCommonParent(..))));
    }

    #[test]
    fn mapping_json_shape() {
        let mesh = unit_square_mesh(2).unwrap();
        let gamma = interface(&mesh);
        let view = gamma.topology().mesh_view(mesh.id()).unwrap();
        assert_eq!(view.to_json().unwrap(), r#"{"cell_map":[4,11],"vertex_map":[1,4,7]}"#);
    }
}
