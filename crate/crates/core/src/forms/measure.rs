use std::sync::Arc;

use serde::Serialize;

use crate::mesh::{Mesh, MeshFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralType {
    Cell,
    ExteriorFacet,
}

/// Integration domain: the cells or exterior facets of one mesh, optionally
/// restricted to the entities carrying `tag` in `subdomain_data`.
#[derive(Clone, Debug)]
pub struct Measure {
    pub kind: IntegralType,
    pub domain: Arc<Mesh>,
    pub subdomain_data: Option<Arc<MeshFunction>>,
    pub tag: Option<usize>,
}

impl Measure {
    pub fn cell(domain: &Arc<Mesh>) -> Measure {
        Measure {
            kind: IntegralType::Cell,
            domain: domain.clone(),
            subdomain_data: None,
            tag: None,
        }
    }

    pub fn exterior_facet(domain: &Arc<Mesh>) -> Measure {
        Measure {
            kind: IntegralType::ExteriorFacet,
            ..Measure::cell(domain)
        }
    }

    pub fn with_subdomain_data(mut self, data: MeshFunction) -> Measure {
        self.subdomain_data = Some(Arc::new(data));
        self
    }

    /// Restricts to entities tagged `tag`.
    pub fn subdomain(&self, tag: usize) -> Measure {
        Measure {
            tag: Some(tag),
            ..self.clone()
        }
    }

    /// Dimension of the integration entities.
    pub fn entity_dim(&self) -> usize {
        match self.kind {
            IntegralType::Cell => self.domain.tdim(),
            IntegralType::ExteriorFacet => self.domain.tdim().saturating_sub(1),
        }
    }

    /// Description of why the subdomain selection is malformed, if it is.
    pub fn check(&self) -> Option<String> {
        if self.kind == IntegralType::ExteriorFacet && self.domain.tdim() == 0 {
            return Some("point meshes have no facets".into());
        }
        match (&self.subdomain_data, self.tag) {
            (None, Some(t)) => Some(format!("tag {t} given without subdomain data")),
            (Some(d), _) if d.mesh().id() != self.domain.id() => {
                Some("subdomain data defined on a different mesh".into())
            }
            (Some(d), _) if d.dim() != self.entity_dim() => Some(format!(
                "subdomain data on dimension {} but integration entities have dimension {}",
                d.dim(),
                self.entity_dim()
            )),
            _ => None,
        }
    }

    /// Same integration domain and selection.
    pub fn same_as(&self, other: &Measure) -> bool {
        self.kind == other.kind
            && self.domain.id() == other.domain.id()
            && self.tag == other.tag
            && match (&self.subdomain_data, &other.subdomain_data) {
                (None, None) => true,
                (Some(a), Some(b)) => Arc::ptr_eq(a, b),
                _ => false,
            }
    }
}
