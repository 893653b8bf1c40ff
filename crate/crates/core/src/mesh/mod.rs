//! Simplicial meshes: geometry, topology, connectivity and entity markers.

mod affine;
mod cell;
mod generators;
mod io;

pub use affine::AffineMap;
pub use cell::CellKind;
pub use generators::{unit_cube_mesh, unit_interval_mesh, unit_square_mesh};
pub use io::MeshJson;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::meshview::MeshViewMapping;

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

/// Process-unique identity of a mesh.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeshId(u64);

impl MeshId {
    fn next() -> MeshId {
        MeshId(NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed))
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for MeshId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Vertex coordinates, stored flat with stride `gdim`.
#[derive(Clone, Debug)]
pub struct MeshGeometry {
    gdim: usize,
    coords: Vec<f64>,
}

impl MeshGeometry {
    pub fn gdim(&self) -> usize {
        self.gdim
    }

    pub fn num_vertices(&self) -> usize {
        if self.gdim == 0 {
            0
        } else {
            self.coords.len() / self.gdim
        }
    }

    pub fn point(&self, v: usize) -> &[f64] {
        &self.coords[v * self.gdim..(v + 1) * self.gdim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Entities of one dimension, each a vertex tuple.
///
/// Cells keep their construction vertex order; all other entities store
/// sorted tuples and are numbered lexicographically.
#[derive(Debug)]
pub struct Entities {
    stride: usize,
    vertices: Vec<usize>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl Entities {
    pub fn len(&self) -> usize {
        self.vertices.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self, i: usize) -> &[usize] {
        &self.vertices[i * self.stride..(i + 1) * self.stride]
    }

    /// Index of the entity with the given vertex set, in any order.
    pub fn find(&self, vertices: &[usize]) -> Option<usize> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.lookup.get(&key).copied()
    }
}

/// Adjacency lists between entities of two dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connectivity {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Connectivity {
    fn from_lists(lists: Vec<Vec<usize>>) -> Connectivity {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for l in lists {
            targets.extend_from_slice(&l);
            offsets.push(targets.len());
        }
        Connectivity { offsets, targets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn links(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    fn transpose(&self, n_targets: usize) -> Connectivity {
        let mut lists = vec![Vec::new(); n_targets];
        for i in 0..self.len() {
            for &t in self.links(i) {
                lists[t].push(i);
            }
        }
        Connectivity::from_lists(lists)
    }
}

/// Topology of a simplicial mesh plus its registry of mesh-view mappings.
pub struct MeshTopology {
    kind: CellKind,
    num_vertices: usize,
    cells: Vec<usize>,
    entities: Vec<OnceLock<Arc<Entities>>>,
    connectivity: RwLock<HashMap<(usize, usize), Arc<Connectivity>>>,
    mesh_views: RwLock<HashMap<MeshId, Arc<MeshViewMapping>>>,
}

impl fmt::Debug for MeshTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeshTopology")
            .field("kind", &self.kind)
            .field("num_vertices", &self.num_vertices)
            .field("num_cells", &(self.cells.len() / self.kind.num_vertices()))
            .finish()
    }
}

impl MeshTopology {
    pub fn tdim(&self) -> usize {
        self.kind.tdim()
    }

    pub fn cell_kind(&self) -> CellKind {
        self.kind
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / self.kind.num_vertices()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        let nv = self.kind.num_vertices();
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn entities(&self, dim: usize) -> Result<Arc<Entities>> {
        let tdim = self.tdim();
        if dim > tdim {
            return Err(Error::InvalidArgument(format!(
                "entity dimension {dim} exceeds topological dimension {tdim}"
            )));
        }
        Ok(self.entities[dim]
            .get_or_init(|| Arc::new(self.build_entities(dim)))
            .clone())
    }

    pub fn num_entities(&self, dim: usize) -> Result<usize> {
        Ok(self.entities(dim)?.len())
    }

    fn build_entities(&self, dim: usize) -> Entities {
        let tdim = self.tdim();
        if dim == tdim {
            let mut lookup = HashMap::with_capacity(self.num_cells());
            for c in 0..self.num_cells() {
                let mut key = self.cell_vertices(c).to_vec();
                key.sort_unstable();
                lookup.insert(key, c);
            }
            return Entities {
                stride: tdim + 1,
                vertices: self.cells.clone(),
                lookup,
            };
        }
        if dim == 0 {
            let vertices: Vec<usize> = (0..self.num_vertices).collect();
            let lookup = vertices.iter().map(|&v| (vec![v], v)).collect();
            return Entities {
                stride: 1,
                vertices,
                lookup,
            };
        }
        let local = self.kind.sub_entities(dim);
        let mut tuples: Vec<Vec<usize>> = Vec::with_capacity(self.num_cells() * local.len());
        for c in 0..self.num_cells() {
            let cv = self.cell_vertices(c);
            for sub in &local {
                let mut t: Vec<usize> = sub.iter().map(|&l| cv[l]).collect();
                t.sort_unstable();
                tuples.push(t);
            }
        }
        tuples.sort_unstable();
        tuples.dedup();
        let mut lookup = HashMap::with_capacity(tuples.len());
        let mut vertices = Vec::with_capacity(tuples.len() * (dim + 1));
        for (i, t) in tuples.into_iter().enumerate() {
            vertices.extend_from_slice(&t);
            lookup.insert(t, i);
        }
        Entities {
            stride: dim + 1,
            vertices,
            lookup,
        }
    }

    /// Connectivity `d1 -> d2`, computed once and cached.
    ///
    /// For `d1 > d2` the links of each entity follow the local sub-entity
    /// order of the reference simplex; for `d1 < d2` they are ascending.
    pub fn connectivity(&self, d1: usize, d2: usize) -> Result<Arc<Connectivity>> {
        let tdim = self.tdim();
        if d1 > tdim || d2 > tdim {
            return Err(Error::InvalidArgument(format!(
                "connectivity ({d1}, {d2}) out of range for tdim {tdim}"
            )));
        }
        if let Some(c) = self.connectivity.read().unwrap().get(&(d1, d2)) {
            return Ok(c.clone());
        }
        let conn = Arc::new(self.build_connectivity(d1, d2)?);
        let mut cache = self.connectivity.write().unwrap();
        Ok(cache.entry((d1, d2)).or_insert(conn).clone())
    }

    fn build_connectivity(&self, d1: usize, d2: usize) -> Result<Connectivity> {
        let from = self.entities(d1)?;
        if d1 == d2 {
            return Ok(Connectivity::from_lists(
                (0..from.len()).map(|i| vec![i]).collect(),
            ));
        }
        if d1 < d2 {
            let down = self.connectivity(d2, d1)?;
            return Ok(down.transpose(from.len()));
        }
        let to = self.entities(d2)?;
        let local = cell::sub_entities(d1, d2);
        let lists = (0..from.len())
            .map(|i| {
                let ev = from.vertices(i);
                local
                    .iter()
                    .map(|sub| {
                        let t: Vec<usize> = sub.iter().map(|&l| ev[l]).collect();
                        to.find(&t).expect("sub-entity of a mesh entity must exist")
                    })
                    .collect()
            })
            .collect();
        Ok(Connectivity::from_lists(lists))
    }

    pub fn mesh_view(&self, target: MeshId) -> Option<Arc<MeshViewMapping>> {
        self.mesh_views.read().unwrap().get(&target).cloned()
    }

    /// Registers a mapping unless one is already present; returns the stored one.
    pub(crate) fn register_view(&self, mapping: MeshViewMapping) -> Arc<MeshViewMapping> {
        let mut views = self.mesh_views.write().unwrap();
        views
            .entry(mapping.target_mesh_id)
            .or_insert_with(|| Arc::new(mapping))
            .clone()
    }

    pub fn registered_views(&self) -> Vec<MeshId> {
        let mut ids: Vec<MeshId> = self.mesh_views.read().unwrap().keys().copied().collect();
        ids.sort();
        ids
    }
}

/// A simplicial mesh. Shared through `Arc`; connectivity is cached lazily.
#[derive(Debug)]
pub struct Mesh {
    id: MeshId,
    geometry: MeshGeometry,
    topology: MeshTopology,
    parent: Option<Arc<Mesh>>,
}

impl Mesh {
    /// Builds a mesh from flat coordinates (stride `gdim`) and flat cell
    /// vertex lists (stride `kind.num_vertices()`).
    pub fn new(kind: CellKind, gdim: usize, coords: Vec<f64>, cells: Vec<usize>) -> Result<Arc<Mesh>> {
        Ok(Arc::new(Mesh::build(kind, gdim, coords, cells, None)?))
    }

    pub(crate) fn build(
        kind: CellKind,
        gdim: usize,
        coords: Vec<f64>,
        cells: Vec<usize>,
        parent: Option<Arc<Mesh>>,
    ) -> Result<Mesh> {
        if gdim == 0 || gdim > 3 || gdim < kind.tdim() {
            return Err(Error::InvalidArgument(format!(
                "geometric dimension {gdim} incompatible with {kind:?} cells"
            )));
        }
        if coords.len() % gdim != 0 {
            return Err(Error::InvalidArgument(
                "coordinate array length is not a multiple of gdim".into(),
            ));
        }
        let nv = coords.len() / gdim;
        let stride = kind.num_vertices();
        if cells.len() % stride != 0 {
            return Err(Error::InvalidArgument(
                "cell array length is not a multiple of the cell vertex count".into(),
            ));
        }
        if let Some(&bad) = cells.iter().find(|&&v| v >= nv) {
            return Err(Error::InvalidArgument(format!(
                "cell references vertex {bad} but only {nv} vertices exist"
            )));
        }
        let topology = MeshTopology {
            kind,
            num_vertices: nv,
            cells,
            entities: (0..=kind.tdim()).map(|_| OnceLock::new()).collect(),
            connectivity: RwLock::new(HashMap::new()),
            mesh_views: RwLock::new(HashMap::new()),
        };
        Ok(Mesh {
            id: MeshId::next(),
            geometry: MeshGeometry { gdim, coords },
            topology,
            parent,
        })
    }

    pub fn id(&self) -> MeshId {
        self.id
    }

    pub fn cell_kind(&self) -> CellKind {
        self.topology.kind
    }

    pub fn tdim(&self) -> usize {
        self.topology.tdim()
    }

    pub fn gdim(&self) -> usize {
        self.geometry.gdim
    }

    pub fn geometry(&self) -> &MeshGeometry {
        &self.geometry
    }

    pub fn topology(&self) -> &MeshTopology {
        &self.topology
    }

    /// The mesh this one was carved from, if any.
    pub fn parent(&self) -> Option<&Arc<Mesh>> {
        self.parent.as_ref()
    }

    pub fn num_cells(&self) -> usize {
        self.topology.num_cells()
    }

    pub fn num_vertices(&self) -> usize {
        self.topology.num_vertices
    }

    pub fn num_facets(&self) -> usize {
        if self.tdim() == 0 {
            return 0;
        }
        self.topology
            .num_entities(self.tdim() - 1)
            .expect("facet dimension is in range")
    }

    pub fn num_entities(&self, dim: usize) -> Result<usize> {
        self.topology.num_entities(dim)
    }

    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        self.topology.cell_vertices(c)
    }

    pub fn compute_connectivity(&self, d1: usize, d2: usize) -> Result<Arc<Connectivity>> {
        self.topology.connectivity(d1, d2)
    }

    /// Vertex coordinates of cell `c`, flattened with stride `gdim`.
    pub fn cell_coordinates(&self, c: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cell_kind().num_vertices() * self.gdim());
        for &v in self.cell_vertices(c) {
            out.extend_from_slice(self.geometry.point(v));
        }
        out
    }

    pub fn entity_midpoint(&self, dim: usize, index: usize) -> Result<Vec<f64>> {
        let ents = self.topology.entities(dim)?;
        if index >= ents.len() {
            return Err(Error::InvalidArgument(format!(
                "entity {index} of dimension {dim} out of range ({} entities)",
                ents.len()
            )));
        }
        let verts = ents.vertices(index);
        let gdim = self.gdim();
        let mut mid = vec![0.0; gdim];
        for &v in verts {
            for (m, x) in mid.iter_mut().zip(self.geometry.point(v)) {
                *m += x;
            }
        }
        let n = verts.len() as f64;
        mid.iter_mut().for_each(|m| *m /= n);
        Ok(mid)
    }

    /// Facets with exactly one adjacent cell, ascending.
    pub fn exterior_facets(&self) -> Result<Vec<usize>> {
        let tdim = self.tdim();
        if tdim == 0 {
            return Ok(Vec::new());
        }
        let f2c = self.topology.connectivity(tdim - 1, tdim)?;
        Ok((0..f2c.len()).filter(|&f| f2c.links(f).len() == 1).collect())
    }
}

/// One unsigned tag per entity of a fixed dimension.
#[derive(Clone, Debug)]
pub struct MeshFunction {
    mesh: Arc<Mesh>,
    dim: usize,
    values: Vec<usize>,
}

impl MeshFunction {
    pub fn new(mesh: &Arc<Mesh>, dim: usize, value: usize) -> Result<MeshFunction> {
        let n = mesh.num_entities(dim)?;
        Ok(MeshFunction {
            mesh: mesh.clone(),
            dim,
            values: vec![value; n],
        })
    }

    pub fn from_values(mesh: &Arc<Mesh>, dim: usize, values: Vec<usize>) -> Result<MeshFunction> {
        let n = mesh.num_entities(dim)?;
        if values.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} tags for {n} entities of dimension {dim}",
                values.len()
            )));
        }
        Ok(MeshFunction {
            mesh: mesh.clone(),
            dim,
            values,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn set(&mut self, entity: usize, value: usize) {
        self.values[entity] = value;
    }

    /// Entities carrying `tag`, ascending.
    pub fn indices_with(&self, tag: usize) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.values[i] == tag)
            .collect()
    }
}

/// Tags entities whose midpoint satisfies `predicate` with 1, all others with 0.
pub fn mark_entities<F>(mesh: &Arc<Mesh>, dim: usize, predicate: F) -> Result<MeshFunction>
where
    F: Fn(&[f64]) -> bool,
{
    let n = mesh.num_entities(dim)?;
    let mut values = Vec::with_capacity(n);
    for e in 0..n {
        let mid = mesh.entity_midpoint(dim, e)?;
        values.push(usize::from(predicate(&mid)));
    }
    MeshFunction::from_values(mesh, dim, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_facet_cell_adjacency() {
        let mesh = unit_square_mesh(2).unwrap();
        let f2c = mesh.compute_connectivity(1, 2).unwrap();
        assert_eq!(f2c.len(), 16);
        let mut exterior = 0;
        for f in 0..16 {
            let n = f2c.links(f).len();
            assert!(n == 1 || n == 2);
            if n == 1 {
                exterior += 1;
            }
        }
        assert_eq!(exterior, 8);
    }

    #[test]
    fn identity_connectivity() {
        let mesh = unit_square_mesh(2).unwrap();
        let c2c = mesh.compute_connectivity(2, 2).unwrap();
        for c in 0..mesh.num_cells() {
            assert_eq!(c2c.links(c), &[c]);
        }
    }

    #[test]
    fn connectivity_is_cached() {
        let mesh = unit_square_mesh(3).unwrap();
        let a = mesh.compute_connectivity(1, 2).unwrap();
        let b = mesh.compute_connectivity(1, 2).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, *b);
    }

    #[test]
    fn connectivity_out_of_range() {
        let mesh = unit_interval_mesh(2).unwrap();
        assert!(matches!(
            mesh.compute_connectivity(2, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn interval_vertex_cell_adjacency() {
        let mesh = unit_interval_mesh(2).unwrap();
        let v2c = mesh.compute_connectivity(0, 1).unwrap();
        let counts: Vec<usize> = (0..3).map(|v| v2c.links(v).len()).collect();
        assert_eq!(counts, vec![1, 2, 1]);
    }

    #[test]
    fn transpose_relation_holds() {
        let mesh = unit_cube_mesh(2).unwrap();
        for (d1, d2) in [(0, 3), (1, 3), (2, 3), (1, 2), (0, 2)] {
            let up = mesh.compute_connectivity(d1, d2).unwrap();
            let down = mesh.compute_connectivity(d2, d1).unwrap();
            for e in 0..up.len() {
                for &t in up.links(e) {
                    assert!(down.links(t).contains(&e));
                }
            }
            for t in 0..down.len() {
                for &e in down.links(t) {
                    assert!(up.links(e).contains(&t));
                }
            }
        }
    }

    #[test]
    fn midpoints() {
        let mesh = unit_interval_mesh(2).unwrap();
        assert_eq!(mesh.entity_midpoint(1, 0).unwrap(), vec![0.25]);
        let tri = Mesh::new(CellKind::Triangle, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2]).unwrap();
        let m = tri.entity_midpoint(2, 0).unwrap();
        assert!((m[0] - 1.0 / 3.0).abs() < 1e-15 && (m[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            mesh.entity_midpoint(1, 7),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn marking_interface_and_bottom() {
        let mesh = unit_square_mesh(2).unwrap();
        let none = mark_entities(&mesh, 1, |_| false).unwrap();
        assert!(none.values().iter().all(|&t| t == 0));

        let mid = mark_entities(&mesh, 1, |x| (x[0] - 0.5).abs() < 1e-10).unwrap();
        let tagged = mid.indices_with(1);
        assert_eq!(tagged.len(), 2);
        for f in tagged {
            assert_eq!(mesh.entity_midpoint(1, f).unwrap()[0], 0.5);
        }

        let bottom = mark_entities(&mesh, 1, |x| x[1] < 1e-10).unwrap();
        assert_eq!(bottom.indices_with(1).len(), 2);
    }

    #[test]
    fn rejects_out_of_range_vertex() {
        let r = Mesh::new(CellKind::Interval, 1, vec![0.0, 1.0], vec![0, 2]);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ids_are_unique() {
        let a = unit_interval_mesh(1).unwrap();
        let b = unit_interval_mesh(1).unwrap();
        assert_ne!(a.id(), b.id());
    }
}
