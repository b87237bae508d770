use thiserror::Error;

use crate::farey::Slope;
use crate::tet_tree::{TetAddress, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid slope: {0}")]
    InvalidSlope(String),

    #[error("slopes {} and {} are not Farey neighbours", .0.0, .0.1)]
    NotFareyAdjacent(Box<(Slope, Slope)>),

    #[error("{0} is not a Farey triangle")]
    NotATriangle(String),

    #[error("edge {{{}, {}}} is not an edge of the triangle", .0.0, .0.1)]
    EdgeNotInTriangle(Box<(Slope, Slope)>),

    #[error("matrix determinant is {0}, expected +1 or -1")]
    NotUnimodular(String),

    #[error("radius {radius} exceeds the configured cap {cap}")]
    RadiusCap { radius: usize, cap: usize },

    #[error("codomain too small: {0}")]
    CodomainTooSmall(String),

    #[error("triangle is outside the domain patch")]
    OutsideDomain,

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("unknown tetrahedron {0}")]
    UnknownTetrahedron(TetAddress),

    #[error("{0} and {1} do not span an edge of D")]
    NotAnEdge(VertexId, VertexId),

    #[error("vertices {0:?} do not span a triangle of the ball")]
    NotABallTriangle([VertexId; 3]),

    #[error("invalid address {0:?}")]
    InvalidAddress(String),

    #[error("invalid ordering of tetrahedron {0}")]
    InvalidOrdering(TetAddress),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("pair lies outside the exactness margin of the ball")]
    OutsideMargin,

    #[error("distance tables describe different graphs")]
    MismatchedSources,

    #[error("enumeration exceeded the resource cap of {0} partial assignments")]
    ResourceCap(u64),

    #[error("ball too small: {0}")]
    BallTooSmall(String),
}

pub type Result<T> = std::result::Result<T, Error>;
