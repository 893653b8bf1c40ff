use thiserror::Error;

use crate::forms::FormError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no entity carries tag {tag}")]
    EmptySelection { tag: usize },

    #[error("unsupported codimension: entities of dimension {entity_dim} in a mesh of dimension {tdim}")]
    UnsupportedCodimension { entity_dim: usize, tdim: usize },

    #[error("submeshes of submeshes are not supported")]
    UnsupportedNesting,

    #[error("meshes {0} and {1} share no common parent")]
    NoCommonParent(u64, u64),

    #[error("cell {cell} of mesh {mesh} has no counterpart in mesh {target}")]
    AbsentMapping { mesh: u64, cell: usize, target: u64 },

    #[error("inconsistent view: facet {facet} of the parent has no adjacent cell in mesh {target}")]
    InconsistentView { facet: usize, target: u64 },

    #[error("unsupported element: {0}")]
    UnsupportedElement(String),

    #[error("quadrature degree {requested} exceeds the supported maximum {max}")]
    UnsupportedDegree { requested: usize, max: usize },

    #[error("degenerate cell {cell} (|det J| = {det:e})")]
    DegenerateCell { cell: usize, det: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid form: {}", format_form_errors(.0))]
    InvalidForm(Vec<(usize, FormError)>),

    #[error("block ({row}, {col}): {source}")]
    Block {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("iterative solver stopped after {iterations} iterations with relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("resolution n = {n}: {source}")]
    Resolution {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_form_errors(errors: &[(usize, FormError)]) -> String {
    errors
        .iter()
        .map(|(i, e)| format!("integral {i}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn in_block(self, row: usize, col: usize) -> Error {
        Error::Block {
            row,
            col,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
