//! Continuous Lagrange elements on reference simplices, quadrature, and
//! facet embeddings used to evaluate traces.

mod facet;
mod quadrature;

pub use facet::{facet_embedding, FacetEmbedding};
pub use quadrature::{gauss_legendre, quadrature_rule, QuadratureRule, MAX_QUADRATURE_DEGREE};

use crate::error::{Error, Result};
use crate::linalg::dense;
use crate::mesh::CellKind;

const INSIDE_TOL: f64 = 1e-12;

/// Nodal Lagrange element of degree `degree` with `value_size` components.
///
/// Vector elements are blocked: local dof `node * value_size + component`.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    kind: CellKind,
    degree: usize,
    value_size: usize,
    /// Reference coordinates of the scalar nodes, stride `tdim`.
    nodes: Vec<f64>,
    /// Owning (entity dimension, local entity index) per scalar node.
    node_entity: Vec<(usize, usize)>,
    /// Monomial exponents spanning P_k.
    monomials: Vec<[u32; 3]>,
    /// Expansion coefficients, `coeffs[m * n_nodes + i]` for basis `i`.
    coeffs: Vec<f64>,
}

impl ReferenceElement {
    pub fn lagrange(kind: CellKind, degree: usize, value_size: usize) -> Result<ReferenceElement> {
        let max = match kind {
            CellKind::Point => usize::MAX,
            CellKind::Interval | CellKind::Triangle => 3,
            CellKind::Tetrahedron => 2,
        };
        if (degree == 0 && kind != CellKind::Point) || degree > max {
            return Err(Error::UnsupportedElement(format!(
                "Lagrange degree {degree} on {kind:?}"
            )));
        }
        if value_size == 0 || value_size > 3 {
            return Err(Error::UnsupportedElement(format!(
                "value size {value_size}"
            )));
        }
        let tdim = kind.tdim();
        let (nodes, node_entity) = lattice_nodes(kind, degree);
        let monomials = monomial_exponents(tdim, degree);
        let n = node_entity.len();
        debug_assert_eq!(n, monomials.len());
        let mut vandermonde = vec![0.0; n * n];
        for i in 0..n {
            let x = &nodes[i * tdim..(i + 1) * tdim];
            for (m, e) in monomials.iter().enumerate() {
                vandermonde[i * n + m] = monomial(e, x);
            }
        }
        let coeffs = dense::invert(n, &vandermonde)
            .ok_or_else(|| Error::UnsupportedElement("singular nodal basis".into()))?;
        Ok(ReferenceElement {
            kind,
            degree,
            value_size,
            nodes,
            node_entity,
            monomials,
            coeffs,
        })
    }

    pub fn cell_kind(&self) -> CellKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value_size(&self) -> usize {
        self.value_size
    }

    pub fn num_nodes(&self) -> usize {
        self.node_entity.len()
    }

    /// Local dimension: scalar nodes times value size.
    pub fn n_local(&self) -> usize {
        self.num_nodes() * self.value_size
    }

    /// Reference coordinates of the scalar nodes, stride `tdim`.
    pub fn dof_points(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_entity(&self, node: usize) -> (usize, usize) {
        self.node_entity[node]
    }

    /// Owning (entity dimension, local entity index) of local dof `dof`.
    pub fn dof_entity(&self, dof: usize) -> (usize, usize) {
        self.node_entity[dof / self.value_size]
    }

    /// Number of scalar nodes on the interior of each entity of dimension `dim`.
    pub fn nodes_per_entity(&self, dim: usize) -> usize {
        self.node_entity
            .iter()
            .filter(|&&(d, e)| d == dim && e == 0)
            .count()
    }

    /// Scalar nodes lying on the closure of local sub-entity `(dim, index)`.
    pub fn closure_nodes(&self, dim: usize, index: usize) -> Vec<usize> {
        let target = &self.kind.sub_entities(dim)[index];
        (0..self.num_nodes())
            .filter(|&n| {
                let (d, e) = self.node_entity[n];
                d <= dim && self.kind.sub_entities(d)[e].iter().all(|v| target.contains(v))
            })
            .collect()
    }

    /// Scalar basis values at one reference point, written into `out[n_nodes]`.
    pub(crate) fn scalar_values(&self, x: &[f64], out: &mut [f64]) {
        let n = self.num_nodes();
        out[..n].fill(0.0);
        for (m, e) in self.monomials.iter().enumerate() {
            let v = monomial(e, x);
            if v == 0.0 {
                continue;
            }
            let row = &self.coeffs[m * n..(m + 1) * n];
            for (o, c) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
    }

    /// Scalar basis gradients at one reference point, `out[node * tdim + k]`.
    pub(crate) fn scalar_gradients(&self, x: &[f64], out: &mut [f64]) {
        let n = self.num_nodes();
        let tdim = self.kind.tdim();
        out[..n * tdim].fill(0.0);
        for (m, e) in self.monomials.iter().enumerate() {
            let row = &self.coeffs[m * n..(m + 1) * n];
            for k in 0..tdim {
                let d = monomial_derivative(e, x, k);
                if d == 0.0 {
                    continue;
                }
                for (i, c) in row.iter().enumerate() {
                    out[i * tdim + k] += c * d;
                }
            }
        }
    }

    fn check_points(&self, points: &[f64]) -> Result<usize> {
        let tdim = self.kind.tdim();
        if tdim == 0 {
            return Ok(1);
        }
        if points.len() % tdim != 0 {
            return Err(Error::InvalidArgument(
                "point array length is not a multiple of tdim".into(),
            ));
        }
        for p in points.chunks(tdim) {
            if !self.kind.contains(p, INSIDE_TOL) {
                return Err(Error::InvalidArgument(format!(
                    "point {p:?} lies outside the reference {:?}",
                    self.kind
                )));
            }
        }
        Ok(points.len() / tdim)
    }

    /// Basis values, laid out `[point][local dof][component]`.
    pub fn tabulate(&self, points: &[f64]) -> Result<Vec<f64>> {
        let np = self.check_points(points)?;
        let tdim = self.kind.tdim();
        let (n, vs) = (self.num_nodes(), self.value_size);
        let mut scalar = vec![0.0; n];
        let mut out = vec![0.0; np * n * vs * vs];
        for p in 0..np {
            self.scalar_values(&points[p * tdim..(p + 1) * tdim], &mut scalar);
            for (node, &v) in scalar.iter().enumerate() {
                for c in 0..vs {
                    let dof = node * vs + c;
                    out[(p * n * vs + dof) * vs + c] = v;
                }
            }
        }
        Ok(out)
    }

    /// Reference gradients, laid out `[point][local dof][component][direction]`.
    pub fn tabulate_gradient(&self, points: &[f64]) -> Result<Vec<f64>> {
        let np = self.check_points(points)?;
        let tdim = self.kind.tdim();
        let (n, vs) = (self.num_nodes(), self.value_size);
        let mut scalar = vec![0.0; n * tdim];
        let mut out = vec![0.0; np * n * vs * vs * tdim];
        for p in 0..np {
            self.scalar_gradients(&points[p * tdim..(p + 1) * tdim], &mut scalar);
            for node in 0..n {
                for c in 0..vs {
                    let dof = node * vs + c;
                    let base = ((p * n * vs + dof) * vs + c) * tdim;
                    out[base..base + tdim].copy_from_slice(&scalar[node * tdim..(node + 1) * tdim]);
                }
            }
        }
        Ok(out)
    }
}

fn monomial(e: &[u32; 3], x: &[f64]) -> f64 {
    x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product()
}

fn monomial_derivative(e: &[u32; 3], x: &[f64], k: usize) -> f64 {
    if e[k] == 0 {
        return 0.0;
    }
    let mut v = e[k] as f64;
    for (j, xj) in x.iter().enumerate() {
        let p = if j == k { e[j] - 1 } else { e[j] };
        v *= xj.powi(p as i32);
    }
    v
}

fn monomial_exponents(tdim: usize, degree: usize) -> Vec<[u32; 3]> {
    let k = degree as u32;
    let mut out = Vec::new();
    match tdim {
        0 => out.push([0, 0, 0]),
        1 => (0..=k).for_each(|a| out.push([a, 0, 0])),
        2 => {
            for s in 0..=k {
                for b in 0..=s {
                    out.push([s - b, b, 0]);
                }
            }
        }
        3 => {
            for s in 0..=k {
                for b in 0..=s {
                    for c in 0..=s - b {
                        out.push([s - b - c, b, c]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Interior lattice multi-indices of a `d`-simplex at degree `k`: all
/// `d + 1` entries >= 1 and summing to `k`, ordered lexicographically by
/// the trailing entries.
fn interior_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, remaining: usize, slots: usize, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            if remaining >= 1 {
                let mut v = prefix.clone();
                v.push(remaining);
                out.push(v);
            }
            return;
        }
        for a in 1..remaining {
            prefix.push(a);
            rec(prefix, remaining - a, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), k, d + 1, &mut out);
    out.sort_by(|a, b| a[1..].cmp(&b[1..]));
    out
}

fn lattice_nodes(kind: CellKind, degree: usize) -> (Vec<f64>, Vec<(usize, usize)>) {
    let tdim = kind.tdim();
    if tdim == 0 {
        return (vec![], vec![(0, 0)]);
    }
    let verts = kind.reference_vertices();
    let mut nodes = Vec::new();
    let mut owner = Vec::new();
    for d in 0..=tdim {
        for (e, sub) in kind.sub_entities(d).iter().enumerate() {
            let indices = if d == 0 {
                vec![vec![degree]]
            } else {
                interior_indices(d, degree)
            };
            for alpha in indices {
                for k in 0..tdim {
                    let x: f64 = alpha
                        .iter()
                        .zip(sub)
                        .map(|(&a, &v)| a as f64 * verts[v * tdim + k])
                        .sum();
                    nodes.push(x / degree as f64);
                }
                owner.push((d, e));
            }
        }
    }
    (nodes, owner)
}
