use serde::{Deserialize, Serialize};

/// Simplex shapes supported by the mesh and element layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Point,
    Interval,
    Triangle,
    Tetrahedron,
}

impl CellKind {
    pub fn from_tdim(tdim: usize) -> Option<CellKind> {
        match tdim {
            0 => Some(CellKind::Point),
            1 => Some(CellKind::Interval),
            2 => Some(CellKind::Triangle),
            3 => Some(CellKind::Tetrahedron),
            _ => None,
        }
    }

    pub fn tdim(self) -> usize {
        match self {
            CellKind::Point => 0,
            CellKind::Interval => 1,
            CellKind::Triangle => 2,
            CellKind::Tetrahedron => 3,
        }
    }

    pub fn num_vertices(self) -> usize {
        self.tdim() + 1
    }

    pub fn num_facets(self) -> usize {
        if self == CellKind::Point {
            0
        } else {
            self.num_vertices()
        }
    }

    /// Kind of the facets of this cell.
    pub fn facet_kind(self) -> Option<CellKind> {
        match self {
            CellKind::Point => None,
            CellKind::Interval => Some(CellKind::Point),
            CellKind::Triangle => Some(CellKind::Interval),
            CellKind::Tetrahedron => Some(CellKind::Triangle),
        }
    }

    /// Measure of the reference cell.
    pub fn reference_volume(self) -> f64 {
        match self {
            CellKind::Point => 1.0,
            CellKind::Interval => 1.0,
            CellKind::Triangle => 0.5,
            CellKind::Tetrahedron => 1.0 / 6.0,
        }
    }

    /// Reference vertex coordinates, flattened with stride `tdim`.
    pub fn reference_vertices(self) -> Vec<f64> {
        match self {
            CellKind::Point => vec![],
            CellKind::Interval => vec![0.0, 1.0],
            CellKind::Triangle => vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            CellKind::Tetrahedron => vec![
                0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
            ],
        }
    }

    /// Local vertex lists of the sub-entities of dimension `dim`.
    ///
    /// Facets of triangles and tetrahedra are numbered by their opposite
    /// vertex; the facets of an interval are its vertices, in order.
    /// Tetrahedron edges follow the usual UFC ordering.
    pub fn sub_entities(self, dim: usize) -> Vec<Vec<usize>> {
        sub_entities(self.tdim(), dim)
    }

    /// Whether `x` (reference coordinates) lies in the closed reference cell.
    pub fn contains(self, x: &[f64], tol: f64) -> bool {
        let s: f64 = x.iter().sum();
        x.iter().all(|&c| c >= -tol) && s <= 1.0 + tol
    }
}

pub(crate) fn sub_entities(simplex_dim: usize, dim: usize) -> Vec<Vec<usize>> {
    if dim == simplex_dim {
        return vec![(0..=simplex_dim).collect()];
    }
    if dim == 0 {
        return (0..=simplex_dim).map(|v| vec![v]).collect();
    }
    match (simplex_dim, dim) {
        (2, 1) => vec![vec![1, 2], vec![0, 2], vec![0, 1]],
        (3, 1) => vec![
            vec![2, 3],
            vec![1, 3],
            vec![1, 2],
            vec![0, 3],
            vec![0, 2],
            vec![0, 1],
        ],
        (3, 2) => vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]],
        _ => vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facets_are_opposite_vertices() {
        assert_eq!(CellKind::Interval.sub_entities(0), vec![vec![0], vec![1]]);
        for kind in [CellKind::Triangle, CellKind::Tetrahedron] {
            let facets = kind.sub_entities(kind.tdim() - 1);
            assert_eq!(facets.len(), kind.num_facets());
            for (i, f) in facets.iter().enumerate() {
                assert!(!f.contains(&i));
                assert_eq!(f.len(), kind.tdim());
            }
        }
    }

    #[test]
    fn tetrahedron_edge_count() {
        assert_eq!(CellKind::Tetrahedron.sub_entities(1).len(), 6);
        assert_eq!(CellKind::Tetrahedron.sub_entities(0).len(), 4);
    }
}
