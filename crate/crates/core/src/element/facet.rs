use crate::error::{Error, Result};
use crate::mesh::CellKind;

/// Affine map `x = origin + jacobian * s` from the reference facet to the
/// reference cell. `jacobian` is `tdim x (tdim - 1)`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FacetEmbedding {
    pub origin: Vec<f64>,
    pub jacobian: Vec<f64>,
}

impl FacetEmbedding {
    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        let tdim = self.origin.len();
        let fdim = tdim.saturating_sub(1);
        (0..tdim)
            .map(|r| {
                self.origin[r]
                    + (0..fdim)
                        .map(|c| self.jacobian[r * fdim + c] * s[c])
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Embedding of facet `local_facet` whose reference vertices land on the
/// cell vertices of that facet, in local facet-vertex order.
pub fn facet_embedding(kind: CellKind, local_facet: usize) -> Result<FacetEmbedding> {
    if local_facet >= kind.num_facets() {
        return Err(Error::InvalidArgument(format!(
            "{kind:?} has {} facets, requested {local_facet}",
            kind.num_facets()
        )));
    }
    let tdim = kind.tdim();
    let verts = kind.reference_vertices();
    let facet = &kind.sub_entities(tdim - 1)[local_facet];
    let v = |i: usize| &verts[facet[i] * tdim..(facet[i] + 1) * tdim];
    let origin = v(0).to_vec();
    let fdim = tdim - 1;
    let mut jacobian = vec![0.0; tdim * fdim];
    for c in 0..fdim {
        let vc = v(c + 1);
        for r in 0..tdim {
            jacobian[r * fdim + c] = vc[r] - origin[r];
        }
    }
    Ok(FacetEmbedding { origin, jacobian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::ReferenceElement;

    #[test]
    fn triangle_facet_zero() {
        let e = facet_embedding(CellKind::Triangle, 0).unwrap();
        assert_eq!(e.apply(&[0.0]), vec![1.0, 0.0]);
        assert_eq!(e.apply(&[1.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn interval_endpoints() {
        let e0 = facet_embedding(CellKind::Interval, 0).unwrap();
        let e1 = facet_embedding(CellKind::Interval, 1).unwrap();
        assert_eq!(e0.apply(&[]), vec![0.0]);
        assert_eq!(e1.apply(&[]), vec![1.0]);
        assert!(e0.jacobian.is_empty());
    }

    #[test]
    fn tetrahedron_facet_zero_hits_vertices() {
        let e = facet_embedding(CellKind::Tetrahedron, 0).unwrap();
        assert_eq!(e.apply(&[0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        assert_eq!(e.apply(&[1.0, 0.0]), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.apply(&[0.0, 1.0]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            facet_embedding(CellKind::Triangle, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn trace_matches_facet_element() {
        for (kind, max) in [(CellKind::Triangle, 3), (CellKind::Tetrahedron, 2)] {
            let fkind = kind.facet_kind().unwrap();
            for k in 1..=max {
                let cell = ReferenceElement::lagrange(kind, k, 1).unwrap();
                let fel = ReferenceElement::lagrange(fkind, k, 1).unwrap();
                let fd = fkind.tdim();
                let t = kind.tdim();
                let pts: Vec<f64> = match fd {
                    1 => vec![0.0, 0.21, 0.5, 0.77],
                    _ => vec![0.1, 0.2, 0.3, 0.3, 0.6, 0.05],
                };
                for lf in 0..kind.num_facets() {
                    let emb = facet_embedding(kind, lf).unwrap();
                    let cpts: Vec<f64> = pts.chunks(fd).flat_map(|s| emb.apply(s)).collect();
                    let cvals = cell.tabulate(&cpts).unwrap();
                    let fvals = fel.tabulate(&pts).unwrap();
                    // pair each facet node with the cell node at the same location
                    for fnode in 0..fel.num_nodes() {
                        let s = &fel.dof_points()[fnode * fd..(fnode + 1) * fd];
                        let x = emb.apply(s);
                        let cnode = (0..cell.num_nodes())
                            .find(|&i| {
                                cell.dof_points()[i * t..(i + 1) * t]
                                    .iter()
                                    .zip(&x)
                                    .all(|(a, b)| (a - b).abs() < 1e-13)
                            })
                            .expect("facet node lies on a cell node");
                        for p in 0..pts.len() / fd {
                            let a = cvals[p * cell.n_local() + cnode];
                            let b = fvals[p * fel.n_local() + fnode];
                            assert!((a - b).abs() < 1e-13);
                        }
                    }
                }
            }
        }
    }
}
