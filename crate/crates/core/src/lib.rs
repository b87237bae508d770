//! Finite windows of the curve complex of the three-holed projective plane.
//!
//! The complex is generated from the tree of tetrahedra of the auxiliary
//! complex `D` ([`tet_tree`]), subdivided into the curve graph
//! ([`curve_graph`]), and acted on by mapping classes realized as ordered
//! tetrahedron correspondences ([`rigidity`]). [`metric`] holds the distance,
//! bottleneck and thinness machinery; [`farey`] the exact slope arithmetic
//! used for vertex links. [`verify`] runs the structural checks.

pub mod curve_graph;
pub mod error;
pub mod farey;
pub mod metric;
pub mod rigidity;
pub mod tet_tree;
pub mod verify;

pub use error::{Error, Result};
