//! Finite elements for coupled problems posed on several meshes of possibly
//! different topological dimension.
//!
//! Submeshes are carved from a parent mesh ([`meshview`]), function spaces
//! are built on any of them ([`space`]), and multi-domain variational forms
//! are written once with a small expression language ([`forms`]). The form
//! is split into blocks and assembled into a nest of sparse matrices
//! ([`assembly`], [`linalg`]), with coupling terms between a mesh and its
//! codimension-one submeshes handled automatically.

pub mod assembly;
pub mod element;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod meshview;
pub mod parallel;
pub mod space;
pub mod study;

pub use error::{Error, Result};
