//! Function spaces, mixed spaces, discrete functions and Dirichlet data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::element::ReferenceElement;
use crate::error::{Error, Result};
use crate::mesh::{AffineMap, Mesh};
use crate::meshview::MeshViewMapping;

/// Cell-wise local-to-global dof table of a continuous Lagrange space.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    n_local: usize,
    cell_dofs: Vec<usize>,
    global_dim: usize,
    gdim: usize,
    dof_coords: Vec<f64>,
}

impl DofMap {
    fn build(mesh: &Mesh, element: &ReferenceElement) -> Result<DofMap> {
        let tdim = mesh.tdim();
        let gdim = mesh.gdim();
        let vs = element.value_size();
        let n_nodes = element.num_nodes();

        let per_entity: Vec<usize> = (0..=tdim).map(|d| element.nodes_per_entity(d)).collect();
        let mut offsets = vec![0usize; tdim + 2];
        for d in 0..=tdim {
            let count = if per_entity[d] == 0 { 0 } else { mesh.num_entities(d)? };
            offsets[d + 1] = offsets[d] + count * per_entity[d];
        }
        let connectivity = (0..tdim)
            .map(|d| {
                if per_entity[d] > 0 {
                    mesh.compute_connectivity(tdim, d).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if tdim > 2 && per_entity[2] > 1 {
            return Err(Error::UnsupportedElement(
                "more than one node per shared face".into(),
            ));
        }

        // slot of each node among the nodes of its own entity
        let mut slot = vec![0usize; n_nodes];
        for n in 0..n_nodes {
            let key = element.node_entity(n);
            slot[n] = (0..n).filter(|&m| element.node_entity(m) == key).count();
        }
        let edges = mesh.cell_kind().sub_entities(1.min(tdim));

        let num_cells = mesh.num_cells();
        let n_local = element.n_local();
        let global_dim = offsets[tdim + 1] * vs;
        let mut cell_dofs = vec![0usize; num_cells * n_local];
        let mut dof_coords = vec![0.0; global_dim * gdim];
        let points = element.dof_points();
        for c in 0..num_cells {
            let cv = mesh.cell_vertices(c);
            let map = AffineMap::for_cell(mesh, c);
            for n in 0..n_nodes {
                let (d, e) = element.node_entity(n);
                let entity = if d == tdim {
                    c
                } else {
                    connectivity[d].as_ref().expect("connectivity computed")
                        .links(c)[e]
                };
                let mut s = slot[n];
                if d == 1 && d < tdim && cv[edges[e][0]] > cv[edges[e][1]] {
                    s = per_entity[1] - 1 - s;
                }
                let node = offsets[d] + entity * per_entity[d] + s;
                let x = map.push_forward(&points[n * tdim..(n + 1) * tdim]);
                for comp in 0..vs {
                    let dof = node * vs + comp;
                    cell_dofs[c * n_local + n * vs + comp] = dof;
                    dof_coords[dof * gdim..(dof + 1) * gdim].copy_from_slice(&x);
                }
            }
        }
        Ok(DofMap {
            n_local,
            cell_dofs,
            global_dim,
            gdim,
            dof_coords,
        })
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn num_cells(&self) -> usize {
        self.cell_dofs.len() / self.n_local
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell * self.n_local..(cell + 1) * self.n_local]
    }

    pub fn global_dim(&self) -> usize {
        self.global_dim
    }

    pub fn dof_coordinates(&self, dof: usize) -> &[f64] {
        &self.dof_coords[dof * self.gdim..(dof + 1) * self.gdim]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lagrange,
}

/// Finite element space over one mesh. Shared through `Arc`; identity is
/// pointer identity.
#[derive(Debug)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    element: ReferenceElement,
    dofmap: DofMap,
}

pub fn build_function_space(
    mesh: &Arc<Mesh>,
    family: Family,
    degree: usize,
    value_size: usize,
) -> Result<Arc<FunctionSpace>> {
    let Family::Lagrange = family;
    let element = ReferenceElement::lagrange(mesh.cell_kind(), degree, value_size)?;
    let dofmap = DofMap::build(mesh, &element)?;
    Ok(Arc::new(FunctionSpace {
        mesh: mesh.clone(),
        element,
        dofmap,
    }))
}

impl FunctionSpace {
    /// Scalar (`value_size == 1`) Lagrange space of the given degree.
    pub fn lagrange(mesh: &Arc<Mesh>, degree: usize) -> Result<Arc<FunctionSpace>> {
        build_function_space(mesh, Family::Lagrange, degree, 1)
    }

    /// Vector Lagrange space with one component per geometric dimension.
    pub fn vector_lagrange(mesh: &Arc<Mesh>, degree: usize) -> Result<Arc<FunctionSpace>> {
        build_function_space(mesh, Family::Lagrange, degree, mesh.gdim())
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn dim(&self) -> usize {
        self.dofmap.global_dim
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn value_size(&self) -> usize {
        self.element.value_size()
    }
}

/// Global dofs of `space` on the cell that foreign cell `foreign_cell`
/// corresponds to under `view`.
pub fn transfer_cell_dofs(
    space: &FunctionSpace,
    view: &MeshViewMapping,
    foreign_cell: usize,
) -> Result<Vec<usize>> {
    if view.target_mesh_id != space.mesh.id() || view.target_entity_dim != space.mesh.tdim() {
        return Err(Error::InvalidArgument(
            "mapping does not target the cells of the space's mesh".into(),
        ));
    }
    let cell = view.target(foreign_cell).ok_or(Error::AbsentMapping {
        mesh: view.source_mesh_id.value(),
        cell: foreign_cell,
        target: view.target_mesh_id.value(),
    })?;
    Ok(space.dofmap.cell_dofs(cell).to_vec())
}

static NEXT_MIXED_ID: AtomicU64 = AtomicU64::new(1);

/// Ordered tuple of spaces; the block index of a subspace is its position.
#[derive(Debug)]
pub struct MixedFunctionSpace {
    id: u64,
    spaces: Vec<Arc<FunctionSpace>>,
}

impl MixedFunctionSpace {
    pub fn new(spaces: Vec<Arc<FunctionSpace>>) -> Result<Arc<MixedFunctionSpace>> {
        if spaces.is_empty() {
            return Err(Error::InvalidArgument("a mixed space needs at least one subspace".into()));
        }
        Ok(Arc::new(MixedFunctionSpace {
            id: NEXT_MIXED_ID.fetch_add(1, Ordering::Relaxed),
            spaces,
        }))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn num_blocks(&self) -> usize {
        self.spaces.len()
    }

    pub fn subspace(&self, i: usize) -> &Arc<FunctionSpace> {
        &self.spaces[i]
    }

    pub fn subspaces(&self) -> &[Arc<FunctionSpace>] {
        &self.spaces
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim()).collect()
    }

    /// Prefix sums of the block dimensions (length `num_blocks + 1`).
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for s in &self.spaces {
            out.push(out.last().unwrap() + s.dim());
        }
        out
    }

    pub fn block_of(&self, space: &Arc<FunctionSpace>) -> Option<usize> {
        self.spaces.iter().position(|s| Arc::ptr_eq(s, space))
    }
}

/// Discrete field: dof coefficients over a space.
#[derive(Clone, Debug)]
pub struct Function {
    space: Arc<FunctionSpace>,
    coefficients: Vec<f64>,
}

impl Function {
    pub fn new(space: &Arc<FunctionSpace>) -> Function {
        Function {
            coefficients: vec![0.0; space.dim()],
            space: space.clone(),
        }
    }

    pub fn from_coefficients(space: &Arc<FunctionSpace>, coefficients: Vec<f64>) -> Result<Function> {
        if coefficients.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a space of dimension {}",
                coefficients.len(),
                space.dim()
            )));
        }
        Ok(Function {
            space: space.clone(),
            coefficients,
        })
    }

    /// Nodal interpolation of `f`, which returns `value_size` components.
    pub fn interpolate<F>(space: &Arc<FunctionSpace>, f: F) -> Function
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let vs = space.value_size();
        let dm = space.dofmap();
        let mut coefficients = vec![0.0; space.dim()];
        for node in 0..space.dim() / vs {
            let v = f(dm.dof_coordinates(node * vs));
            coefficients[node * vs..(node + 1) * vs].copy_from_slice(&v[..vs]);
        }
        Function {
            space: space.clone(),
            coefficients,
        }
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    /// Value (all components) at reference point `xref` of `cell`.
    pub fn eval(&self, cell: usize, xref: &[f64]) -> Vec<f64> {
        let el = self.space.element();
        let vs = el.value_size();
        let mut phi = vec![0.0; el.num_nodes()];
        el.scalar_values(xref, &mut phi);
        let dofs = self.space.dofmap().cell_dofs(cell);
        let mut out = vec![0.0; vs];
        for (n, p) in phi.iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += p * self.coefficients[dofs[n * vs + c]];
            }
        }
        out
    }

    /// Physical gradient at `xref` of `cell`, laid out `[component][direction]`.
    pub fn eval_gradient(&self, cell: usize, xref: &[f64]) -> Vec<f64> {
        let el = self.space.element();
        let mesh = self.space.mesh();
        let (tdim, gdim, vs) = (mesh.tdim(), mesh.gdim(), el.value_size());
        let g = AffineMap::for_cell(mesh, cell).gradient_transform();
        let mut dphi = vec![0.0; el.num_nodes() * tdim];
        el.scalar_gradients(xref, &mut dphi);
        let dofs = self.space.dofmap().cell_dofs(cell);
        let mut out = vec![0.0; vs * gdim];
        for n in 0..el.num_nodes() {
            for k in 0..gdim {
                let d: f64 = (0..tdim).map(|t| g[k * tdim + t] * dphi[n * tdim + t]).sum();
                for c in 0..vs {
                    out[c * gdim + k] += d * self.coefficients[dofs[n * vs + c]];
                }
            }
        }
        out
    }

    /// CSV with columns `dof_index,x,y[,z],value`.
    pub fn to_csv(&self) -> String {
        let gdim = self.space.mesh().gdim();
        let axes = ["x", "y", "z"];
        let mut s = String::from("dof_index");
        for a in &axes[..gdim] {
            s.push(',');
            s.push_str(a);
        }
        s.push_str(",value\n");
        let dm = self.space.dofmap();
        for (i, v) in self.coefficients.iter().enumerate() {
            write!(s, "{i}").unwrap();
            for x in dm.dof_coordinates(i) {
                write!(s, ",{x}").unwrap();
            }
            writeln!(s, ",{v:.17e}").unwrap();
        }
        s
    }

    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

type ValueFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type RegionFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Strong boundary condition on the exterior facets selected by `region`
/// (tested at facet midpoints).
#[derive(Clone)]
pub struct DirichletBC {
    space: Arc<FunctionSpace>,
    value: ValueFn,
    region: RegionFn,
}

impl std::fmt::Debug for DirichletBC {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletBC")
            .field("space_dim", &self.space.dim())
            .finish_non_exhaustive()
    }
}

impl DirichletBC {
    pub fn new<V, R>(space: &Arc<FunctionSpace>, value: V, region: R) -> DirichletBC
    where
        V: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        R: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        DirichletBC {
            space: space.clone(),
            value: Arc::new(value),
            region: Arc::new(region),
        }
    }

    /// Same constant for every component.
    pub fn constant<R>(space: &Arc<FunctionSpace>, value: f64, region: R) -> DirichletBC
    where
        R: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        let vs = space.value_size();
        DirichletBC::new(space, move |_| vec![value; vs], region)
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }
}

/// Constrained dofs (ascending) and their prescribed values.
pub fn collect_bc_dofs(bc: &DirichletBC) -> Result<(Vec<usize>, Vec<f64>)> {
    let space = &bc.space;
    let mesh = space.mesh();
    let tdim = mesh.tdim();
    if tdim == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let f2c = mesh.compute_connectivity(tdim - 1, tdim)?;
    let c2f = mesh.compute_connectivity(tdim, tdim - 1)?;
    let el = space.element();
    let vs = el.value_size();
    let closures: Vec<Vec<usize>> = (0..mesh.cell_kind().num_facets())
        .map(|lf| el.closure_nodes(tdim - 1, lf))
        .collect();
    let mut selected = BTreeMap::new();
    for f in mesh.exterior_facets()? {
        if !(bc.region)(&mesh.entity_midpoint(tdim - 1, f)?) {
            continue;
        }
        let c = f2c.links(f)[0];
        let lf = c2f.links(c).iter().position(|&x| x == f).expect("facet of its cell");
        let dofs = space.dofmap().cell_dofs(c);
        for &n in &closures[lf] {
            for comp in 0..vs {
                let d = dofs[n * vs + comp];
                if let std::collections::btree_map::Entry::Vacant(e) = selected.entry(d) {
                    e.insert((bc.value)(space.dofmap().dof_coordinates(d))[comp]);
                }
            }
        }
    }
    Ok(selected.into_iter().unzip())
}
