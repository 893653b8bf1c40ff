//! Runtime integrand interpreter and per-entity local tensors.

use std::collections::HashSet;
use std::sync::Arc;

use super::star::star_from_facet;
use super::AssemblyOptions;
use crate::element::{facet_embedding, quadrature_rule, QuadratureRule, ReferenceElement, MAX_QUADRATURE_DEGREE};
use crate::error::{Error, Result};
use crate::forms::{estimate_degree, Expr, Integral, IntegralType, Node};
use crate::mesh::{AffineMap, CellKind, Connectivity, Mesh};
use crate::meshview::{build_mapping, MeshViewMapping};
use crate::space::{Function, FunctionSpace};

/// Reference tabulation of a scalar element at a fixed point set.
#[derive(Clone, Debug)]
struct RefTable {
    points: Vec<f64>,
    values: Vec<f64>,
    grads: Vec<f64>,
}

impl RefTable {
    fn new(el: &ReferenceElement, points: &[f64]) -> RefTable {
        let tdim = el.cell_kind().tdim();
        let nn = el.num_nodes();
        let np = if tdim == 0 { 1 } else { points.len() / tdim };
        let mut values = vec![0.0; np * nn];
        let mut grads = vec![0.0; np * nn * tdim];
        for q in 0..np {
            let x = &points[q * tdim..(q + 1) * tdim];
            el.scalar_values(x, &mut values[q * nn..(q + 1) * nn]);
            if tdim > 0 {
                el.scalar_gradients(x, &mut grads[q * nn * tdim..(q + 1) * nn * tdim]);
            }
        }
        RefTable {
            points: points.to_vec(),
            values,
            grads,
        }
    }

    fn matches(&self, points: &[f64]) -> bool {
        self.points.len() == points.len()
            && self.points.iter().zip(points).all(|(a, b)| (a - b).abs() < 1e-12)
    }
}

/// Quadrature rule on the integration entity plus cached tabulations of each
/// argument element: at the rule points (same-mesh cell integrals) and at
/// the rule points embedded in every local facet (trace evaluation).
#[derive(Clone, Debug)]
pub struct QuadraturePlan {
    pub rule: QuadratureRule,
    pub entity_kind: CellKind,
    cell_tables: Vec<Option<RefTable>>,
    facet_tables: Vec<Vec<RefTable>>,
}

impl QuadraturePlan {
    pub fn num_points(&self) -> usize {
        self.rule.num_points()
    }

    fn build(rule: QuadratureRule, entity_kind: CellKind, elements: &[(&ReferenceElement, bool, bool)]) -> Result<QuadraturePlan> {
        let mut cell_tables = Vec::new();
        let mut facet_tables = Vec::new();
        for &(el, on_entity, on_facets) in elements {
            cell_tables.push(on_entity.then(|| RefTable::new(el, &rule.points)));
            let mut per_facet = Vec::new();
            if on_facets {
                let kind = el.cell_kind();
                for lf in 0..kind.num_facets() {
                    let emb = facet_embedding(kind, lf)?;
                    let fd = kind.tdim() - 1;
                    let pts: Vec<f64> = (0..rule.num_points())
                        .flat_map(|q| emb.apply(&rule.points[q * fd..(q + 1) * fd]))
                        .collect();
                    per_facet.push(RefTable::new(el, &pts));
                }
            }
            facet_tables.push(per_facet);
        }
        Ok(QuadraturePlan {
            rule,
            entity_kind,
            cell_tables,
            facet_tables,
        })
    }
}

/// How an argument's mesh relates to the integration mesh.
enum Relation {
    Same,
    SameDim(Arc<MeshViewMapping>),
    Codim(Arc<MeshViewMapping>),
}

struct ArgSlot {
    space: Arc<FunctionSpace>,
    relation: Relation,
    needs_grad: bool,
}

struct CoefSlot {
    function: Arc<Function>,
    mapping: Option<Arc<MeshViewMapping>>,
    needs_grad: bool,
}

/// Basis functions of one argument on one member cell, at the entity points.
pub(crate) struct Basis {
    nodes: usize,
    vs: usize,
    gdim: usize,
    values: Vec<f64>,
    grads: Vec<f64>,
}

/// Raw element tensor of one member tuple.
#[derive(Clone, Debug)]
pub struct LocalTensor {
    /// (cell, local facet) in each argument's mesh.
    pub members: Vec<(usize, Option<usize>)>,
    /// Global dofs per argument.
    pub dofs: Vec<Vec<usize>>,
    /// Row-major over arguments (test slowest).
    pub values: Vec<f64>,
}

/// A compiled integral of one block subform.
pub(crate) struct IntegralKernel {
    integrand: Expr,
    kind: IntegralType,
    mesh: Arc<Mesh>,
    plan: QuadraturePlan,
    args: Vec<ArgSlot>,
    coefs: Vec<CoefSlot>,
    pub(crate) entities: Vec<usize>,
    facet_topology: Option<(Arc<Connectivity>, Arc<Connectivity>)>,
}

fn uses_derivative(e: &Expr, pred: &dyn Fn(&Node) -> bool) -> bool {
    let mut found = false;
    e.visit(&mut |n| {
        if let Node::Grad(c) | Node::Div(c) = n.node() {
            found |= pred(c.node());
        }
    });
    found
}

impl IntegralKernel {
    pub(crate) fn compile(
        integral: &Integral,
        spaces: &[Arc<FunctionSpace>],
        opts: &AssemblyOptions,
    ) -> Result<IntegralKernel> {
        let measure = &integral.measure;
        if let Some(msg) = measure.check() {
            return Err(Error::InvalidMeasure(msg));
        }
        let mesh = measure.domain.clone();
        let tdim = mesh.tdim();
        let entity_kind = match measure.kind {
            IntegralType::Cell => mesh.cell_kind(),
            IntegralType::ExteriorFacet => mesh.cell_kind().facet_kind().ok_or_else(|| {
                Error::InvalidMeasure("point meshes have no facets".into())
            })?,
        };
        let degree = match opts.quadrature_degree {
            Some(q) => q,
            None => estimate_degree(&integral.integrand).min(MAX_QUADRATURE_DEGREE),
        };
        let rule = quadrature_rule(entity_kind, degree)?;

        let mut args = Vec::with_capacity(spaces.len());
        let mut elements = Vec::with_capacity(spaces.len());
        for (number, space) in spaces.iter().enumerate() {
            let am = space.mesh();
            let relation = if am.id() == mesh.id() {
                Relation::Same
            } else if measure.kind == IntegralType::Cell && am.tdim() == tdim {
                Relation::SameDim(build_mapping(&mesh, am)?)
            } else if measure.kind == IntegralType::Cell && am.tdim() == tdim + 1 {
                Relation::Codim(build_mapping(&mesh, am)?)
            } else {
                return Err(Error::InvalidArgument(format!(
                    "argument {number} cannot be evaluated on this integration domain"
                )));
            };
            let needs_grad = uses_derivative(&integral.integrand, &|n| {
                matches!(n, Node::Argument(a) if a.number == number)
            });
            let on_entity = matches!(relation, Relation::Same | Relation::SameDim(_))
                && measure.kind == IntegralType::Cell;
            let on_facets = matches!(relation, Relation::Codim(_))
                || measure.kind == IntegralType::ExteriorFacet;
            elements.push((space.element(), on_entity, on_facets));
            args.push(ArgSlot {
                space: space.clone(),
                relation,
                needs_grad,
            });
        }
        let plan = QuadraturePlan::build(rule, entity_kind, &elements)?;

        let mut coefs: Vec<CoefSlot> = Vec::new();
        let mut err = None;
        integral.integrand.visit(&mut |e| {
            if let Node::Coefficient(f) = e.node() {
                if coefs.iter().any(|c| Arc::ptr_eq(&c.function, f)) {
                    return;
                }
                let cm = f.space().mesh();
                let mapping = if cm.id() == mesh.id() {
                    None
                } else if measure.kind == IntegralType::Cell && cm.tdim() == tdim {
                    match build_mapping(&mesh, cm) {
                        Ok(m) => Some(m),
                        Err(e) => {
                            err = Some(e);
                            None
                        }
                    }
                } else {
                    err = Some(Error::InvalidArgument(
                        "coefficient mesh incompatible with the integration domain".into(),
                    ));
                    None
                };
                let needs_grad = uses_derivative(&integral.integrand, &|n| {
                    matches!(n, Node::Coefficient(g) if Arc::ptr_eq(g, f))
                });
                coefs.push(CoefSlot {
                    function: f.clone(),
                    mapping,
                    needs_grad,
                });
            }
        });
        if let Some(e) = err {
            return Err(e);
        }

        let mut entities: Vec<usize> = match measure.kind {
            IntegralType::Cell => (0..mesh.num_cells()).collect(),
            IntegralType::ExteriorFacet => mesh.exterior_facets()?,
        };
        if let (Some(data), Some(tag)) = (&measure.subdomain_data, measure.tag) {
            entities.retain(|&e| data.values()[e] == tag);
        }
        let facet_topology = match measure.kind {
            IntegralType::Cell => None,
            IntegralType::ExteriorFacet => Some((
                mesh.compute_connectivity(tdim - 1, tdim)?,
                mesh.compute_connectivity(tdim, tdim - 1)?,
            )),
        };
        Ok(IntegralKernel {
            integrand: integral.integrand.clone(),
            kind: measure.kind,
            mesh,
            plan,
            args,
            coefs,
            entities,
            facet_topology,
        })
    }

    pub(crate) fn plan(&self) -> &QuadraturePlan {
        &self.plan
    }

    /// Physical quadrature points, scaled weights, and for facet integrals
    /// the owning (cell, local facet).
    fn entity_geometry(&self, entity: usize) -> Result<(Vec<f64>, Vec<f64>, Option<(usize, usize)>)> {
        let rule = &self.plan.rule;
        let gdim = self.mesh.gdim();
        let (map, owner) = match self.kind {
            IntegralType::Cell => (AffineMap::for_cell(&self.mesh, entity), None),
            IntegralType::ExteriorFacet => {
                let (f2c, c2f) = self.facet_topology.as_ref().expect("facet topology");
                let c = f2c.links(entity)[0];
                let lf = c2f.links(c).iter().position(|&x| x == entity).expect("facet of cell");
                let local = &self.mesh.cell_kind().sub_entities(self.mesh.tdim() - 1)[lf];
                let cv = self.mesh.cell_vertices(c);
                let coords: Vec<f64> = local
                    .iter()
                    .flat_map(|&l| self.mesh.geometry().point(cv[l]).iter().copied())
                    .collect();
                (
                    AffineMap::from_vertices(self.mesh.tdim() - 1, gdim, &coords),
                    Some((c, lf)),
                )
            }
        };
        map.check_nondegenerate(entity)?;
        let fd = self.plan.entity_kind.tdim();
        let np = rule.num_points();
        let mut points = Vec::with_capacity(np * gdim);
        for q in 0..np {
            points.extend(map.push_forward(&rule.points[q * fd..(q + 1) * fd]));
        }
        let weights = rule.weights.iter().map(|w| w * map.scale).collect();
        Ok((points, weights, owner))
    }

    fn members(&self, r: usize, entity: usize, owner: Option<(usize, usize)>) -> Result<Vec<(usize, Option<usize>)>> {
        let slot = &self.args[r];
        match &slot.relation {
            Relation::Same => Ok(vec![match owner {
                Some((c, lf)) => (c, Some(lf)),
                None => (entity, None),
            }]),
            Relation::SameDim(m) => {
                let c = m.target(entity).ok_or(Error::AbsentMapping {
                    mesh: self.mesh.id().value(),
                    cell: entity,
                    target: slot.space.mesh().id().value(),
                })?;
                Ok(vec![(c, None)])
            }
            Relation::Codim(m) => {
                let star = star_from_facet(&self.mesh, slot.space.mesh(), entity, m.target(entity))?;
                Ok(star.members.into_iter().map(|(c, lf)| (c, Some(lf))).collect())
            }
        }
    }

    fn basis(&self, r: usize, cell: usize, lf: Option<usize>, points: &[f64]) -> Result<Basis> {
        let slot = &self.args[r];
        let mesh = slot.space.mesh();
        let el = slot.space.element();
        let (tdim, gdim) = (mesh.tdim(), mesh.gdim());
        let map = AffineMap::for_cell(mesh, cell);
        map.check_nondegenerate(cell)?;
        let refs: Vec<f64> = points.chunks(gdim).flat_map(|x| map.pull_back(x)).collect();
        let cached = match lf {
            None => self.plan.cell_tables[r].as_ref(),
            Some(f) => self.plan.facet_tables[r].get(f),
        };
        let fresh;
        let table = match cached {
            Some(t) if t.matches(&refs) => t,
            _ => {
                fresh = RefTable::new(el, &refs);
                &fresh
            }
        };
        let nodes = el.num_nodes();
        let np = points.len() / gdim;
        let mut grads = Vec::new();
        if slot.needs_grad {
            let g = map.gradient_transform();
            grads = vec![0.0; np * nodes * gdim];
            for q in 0..np {
                for n in 0..nodes {
                    let rg = &table.grads[(q * nodes + n) * tdim..(q * nodes + n + 1) * tdim];
                    for k in 0..gdim {
                        grads[(q * nodes + n) * gdim + k] =
                            (0..tdim).map(|t| g[k * tdim + t] * rg[t]).sum();
                    }
                }
            }
        }
        Ok(Basis {
            nodes,
            vs: el.value_size(),
            gdim,
            values: table.values.clone(),
            grads,
        })
    }

    fn coefficient_values(&self, entity: usize, owner: Option<(usize, usize)>, points: &[f64]) -> Result<Vec<CoefValues>> {
        let gdim = self.mesh.gdim();
        self.coefs
            .iter()
            .map(|slot| {
                let cell = match (&slot.mapping, owner) {
                    (_, Some((c, _))) => c,
                    (None, None) => entity,
                    (Some(m), None) => m.target(entity).ok_or(Error::AbsentMapping {
                        mesh: self.mesh.id().value(),
                        cell: entity,
                        target: slot.function.space().mesh().id().value(),
                    })?,
                };
                let map = AffineMap::for_cell(slot.function.space().mesh(), cell);
                let mut values = Vec::new();
                let mut grads = Vec::new();
                for x in points.chunks(gdim) {
                    let xr = map.pull_back(x);
                    values.extend(slot.function.eval(cell, &xr));
                    if slot.needs_grad {
                        grads.extend(slot.function.eval_gradient(cell, &xr));
                    }
                }
                Ok(CoefValues {
                    function: slot.function.clone(),
                    vs: slot.function.space().value_size(),
                    gdim,
                    values,
                    grads,
                })
            })
            .collect()
    }

    /// Raw element tensors of every member tuple of `entity`.
    pub(crate) fn local_tensors(&self, entity: usize) -> Result<Vec<LocalTensor>> {
        let (points, weights, owner) = self.entity_geometry(entity)?;
        let coefs = self.coefficient_values(entity, owner, &points)?;
        let member_lists = (0..self.args.len())
            .map(|r| self.members(r, entity, owner))
            .collect::<Result<Vec<_>>>()?;

        let mut tuples: Vec<Vec<(usize, Option<usize>)>> = vec![Vec::new()];
        for list in &member_lists {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    list.iter().map(move |m| {
                        let mut t = t.clone();
                        t.push(*m);
                        t
                    })
                })
                .collect();
        }

        let gdim = self.mesh.gdim();
        let mut out = Vec::with_capacity(tuples.len());
        for tuple in tuples {
            let bases = tuple
                .iter()
                .enumerate()
                .map(|(r, &(c, lf))| self.basis(r, c, lf, &points))
                .collect::<Result<Vec<_>>>()?;
            let dims: Vec<usize> = bases.iter().map(|b| b.nodes * b.vs).collect();
            let size: usize = dims.iter().product();
            let mut values = vec![0.0; size];
            for (q, w) in weights.iter().enumerate() {
                let ctx = PointCtx {
                    q,
                    x: &points[q * gdim..(q + 1) * gdim],
                    bases: &bases,
                    coefs: &coefs,
                };
                let v = eval(&self.integrand, &ctx);
                debug_assert_eq!(v.nc, 1);
                for (acc, val) in values.iter_mut().zip(&v.data) {
                    *acc += w * val;
                }
            }
            let dofs = tuple
                .iter()
                .enumerate()
                .map(|(r, &(c, _))| self.args[r].space.dofmap().cell_dofs(c).to_vec())
                .collect();
            out.push(LocalTensor {
                members: tuple,
                dofs,
                values,
            });
        }
        Ok(out)
    }

    /// Element tensors of `entity` with repeated global index tuples zeroed,
    /// so contributions shared by several star members are counted once.
    pub(crate) fn entity_contributions(&self, entity: usize) -> Result<Vec<LocalTensor>> {
        let mut tensors = self.local_tensors(entity)?;
        if tensors.len() > 1 {
            zero_repeated(&mut tensors);
        }
        Ok(tensors)
    }
}

pub(crate) fn zero_repeated(tensors: &mut [LocalTensor]) {
    let mut seen: HashSet<[usize; 2]> = HashSet::new();
    for t in tensors {
        match t.dofs.len() {
            0 => {}
            1 => {
                for (a, &row) in t.dofs[0].iter().enumerate() {
                    if !seen.insert([row, usize::MAX]) {
                        t.values[a] = 0.0;
                    }
                }
            }
            _ => {
                let nc = t.dofs[1].len();
                for (a, &row) in t.dofs[0].iter().enumerate() {
                    for (b, &col) in t.dofs[1].iter().enumerate() {
                        if !seen.insert([row, col]) {
                            t.values[a * nc + b] = 0.0;
                        }
                    }
                }
            }
        }
    }
}

struct CoefValues {
    function: Arc<Function>,
    vs: usize,
    gdim: usize,
    values: Vec<f64>,
    grads: Vec<f64>,
}

struct PointCtx<'a> {
    q: usize,
    x: &'a [f64],
    bases: &'a [Basis],
    coefs: &'a [CoefValues],
}

/// Value of a subexpression at one point, for every (test, trial) pair:
/// `data[(a * nu + b) * nc + c]`.
struct Val {
    nt: usize,
    nu: usize,
    nc: usize,
    data: Vec<f64>,
}

impl Val {
    fn plain(data: Vec<f64>) -> Val {
        Val {
            nt: 1,
            nu: 1,
            nc: data.len(),
            data,
        }
    }

    fn zip(&self, other: &Val, nc: usize, op: impl Fn(&[f64], &[f64], &mut [f64])) -> Val {
        let nt = self.nt.max(other.nt);
        let nu = self.nu.max(other.nu);
        let mut data = vec![0.0; nt * nu * nc];
        for a in 0..nt {
            for b in 0..nu {
                let l = self.at(a, b);
                let r = other.at(a, b);
                op(l, r, &mut data[(a * nu + b) * nc..(a * nu + b + 1) * nc]);
            }
        }
        Val { nt, nu, nc, data }
    }

    fn at(&self, a: usize, b: usize) -> &[f64] {
        let a = if self.nt == 1 { 0 } else { a };
        let b = if self.nu == 1 { 0 } else { b };
        let start = (a * self.nu + b) * self.nc;
        &self.data[start..start + self.nc]
    }
}

enum Derivative {
    Value,
    Grad,
    Div,
}

fn argument_val(basis: &Basis, number: usize, q: usize, d: Derivative) -> Val {
    let (nodes, vs, gdim) = (basis.nodes, basis.vs, basis.gdim);
    let n = nodes * vs;
    let nc = match d {
        Derivative::Value => vs,
        Derivative::Grad => vs * gdim,
        Derivative::Div => 1,
    };
    let mut data = vec![0.0; n * nc];
    for node in 0..nodes {
        for comp in 0..vs {
            let dof = node * vs + comp;
            let out = &mut data[dof * nc..(dof + 1) * nc];
            match d {
                Derivative::Value => out[comp] = basis.values[q * nodes + node],
                Derivative::Grad => {
                    let g = &basis.grads[(q * nodes + node) * gdim..(q * nodes + node + 1) * gdim];
                    out[comp * gdim..(comp + 1) * gdim].copy_from_slice(g);
                }
                Derivative::Div => out[0] = basis.grads[(q * nodes + node) * gdim + comp],
            }
        }
    }
    let (nt, nu) = if number == 0 { (n, 1) } else { (1, n) };
    Val { nt, nu, nc, data }
}

fn coefficient_val(c: &CoefValues, q: usize, d: Derivative) -> Val {
    match d {
        Derivative::Value => Val::plain(c.values[q * c.vs..(q + 1) * c.vs].to_vec()),
        Derivative::Grad => {
            let n = c.vs * c.gdim;
            Val::plain(c.grads[q * n..(q + 1) * n].to_vec())
        }
        Derivative::Div => {
            let n = c.vs * c.gdim;
            let g = &c.grads[q * n..(q + 1) * n];
            Val::plain(vec![(0..c.vs).map(|i| g[i * c.gdim + i]).sum()])
        }
    }
}

fn terminal(e: &Expr, ctx: &PointCtx, d: Derivative) -> Val {
    match e.node() {
        Node::Argument(a) => argument_val(&ctx.bases[a.number], a.number, ctx.q, d),
        Node::Coefficient(f) => {
            let c = ctx
                .coefs
                .iter()
                .find(|c| Arc::ptr_eq(&c.function, f))
                .expect("coefficient evaluated for this entity");
            coefficient_val(c, ctx.q, d)
        }
        _ => unreachable!("derivatives of non-terminals are rejected by validation"),
    }
}

fn eval(e: &Expr, ctx: &PointCtx) -> Val {
    match e.node() {
        Node::Argument(_) | Node::Coefficient(_) => terminal(e, ctx, Derivative::Value),
        Node::Grad(c) => terminal(c, ctx, Derivative::Grad),
        Node::Div(c) => terminal(c, ctx, Derivative::Div),
        Node::Analytic(a) => Val::plain((a.f)(ctx.x)),
        Node::Constant(v) => Val::plain(v.clone()),
        Node::SpatialCoordinate(_) => Val::plain(ctx.x.to_vec()),
        Node::Inner(a, b) => {
            let (l, r) = (eval(a, ctx), eval(b, ctx));
            l.zip(&r, 1, |x, y, o| o[0] = x.iter().zip(y).map(|(p, q)| p * q).sum())
        }
        Node::Product(a, b) => {
            let (l, r) = (eval(a, ctx), eval(b, ctx));
            l.zip(&r, 1, |x, y, o| o[0] = x[0] * y[0])
        }
        Node::ComponentMul(s, v) => {
            let (l, r) = (eval(s, ctx), eval(v, ctx));
            let nc = r.nc;
            l.zip(&r, nc, |x, y, o| {
                for (oi, yi) in o.iter_mut().zip(y) {
                    *oi = x[0] * yi;
                }
            })
        }
        Node::Sum(a, b) => {
            let (l, r) = (eval(a, ctx), eval(b, ctx));
            let nc = l.nc;
            l.zip(&r, nc, |x, y, o| {
                for i in 0..o.len() {
                    o[i] = x[i] + y[i];
                }
            })
        }
    }
}
