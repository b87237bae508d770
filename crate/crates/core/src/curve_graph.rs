//! The curve graph of the three-holed projective plane, as the subdivision of
//! the 1-skeleton of a [`DBall`].
//!
//! One-sided curves are the vertices of `D`. Each D-edge `{α, α′}` (curves
//! meeting once) determines exactly one two-sided curve disjoint from both,
//! and that curve is adjacent to nothing else; so the curve graph is bipartite
//! and every two-sided vertex has degree 2.
//!
//! For the two-holed projective plane the curve complex is just two one-sided
//! vertices meeting once and no edges; nothing here models it.

use std::collections::HashMap;
use std::fmt;

use serde::ser::{Serialize, SerializeTuple, Serializer};

use crate::error::{Error, Result};
use crate::tet_tree::{DBall, TetAddress, Tetrahedron, VertexId};

/// A D-edge as an ordered pair `lo < hi`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeKey(VertexId, VertexId);

impl EdgeKey {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }

    pub fn lo(self) -> VertexId {
        self.0
    }

    pub fn hi(self) -> VertexId {
        self.1
    }

    pub fn contains(self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CurveVertex {
    OneSided(VertexId),
    /// The two-sided curve determined by the edge's endpoints.
    TwoSided(EdgeKey),
}

impl CurveVertex {
    pub fn two_sided(a: VertexId, b: VertexId) -> Self {
        CurveVertex::TwoSided(EdgeKey::new(a, b))
    }

    pub fn is_one_sided(self) -> bool {
        matches!(self, CurveVertex::OneSided(_))
    }
}

impl fmt::Display for CurveVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveVertex::OneSided(v) => write!(f, "{v}"),
            CurveVertex::TwoSided(e) => write!(f, "{}_{}", e.0, e.1),
        }
    }
}

/// One-sided vertices serialize as integers, two-sided ones as `[u, v]`.
impl Serialize for CurveVertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CurveVertex::OneSided(v) => v.serialize(s),
            CurveVertex::TwoSided(e) => {
                let mut t = s.serialize_tuple(2)?;
                t.serialize_element(&e.0)?;
                t.serialize_element(&e.1)?;
                t.end()
            }
        }
    }
}

/// Subdivided 1-skeleton of a ball.
///
/// Vertex indices: one-sided vertex `v` has index `v.0`; the two-sided vertex
/// of the `k`-th D-edge (in [`DBall::edges`] order) has index `|V_1| + k`.
#[derive(Clone, Debug)]
pub struct CurveGraphBall<'a> {
    source: &'a DBall,
    vertices: Vec<CurveVertex>,
    index: HashMap<CurveVertex, usize>,
    adjacency: Vec<Vec<usize>>,
}

/// Replaces every D-edge by a two-sided vertex joined to both endpoints.
pub fn subdivide(ball: &DBall) -> CurveGraphBall<'_> {
    let one_sided = ball.vertex_count();
    let edges = ball.edges();
    let mut vertices: Vec<CurveVertex> = ball.vertices().map(CurveVertex::OneSided).collect();
    let mut adjacency = vec![Vec::new(); one_sided + edges.len()];
    for (k, &(u, w)) in edges.iter().enumerate() {
        let t = one_sided + k;
        vertices.push(CurveVertex::two_sided(u, w));
        adjacency[t] = vec![u.index(), w.index()];
        adjacency[u.index()].push(t);
        adjacency[w.index()].push(t);
    }
    let index = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    CurveGraphBall {
        source: ball,
        vertices,
        index,
        adjacency,
    }
}

impl<'a> CurveGraphBall<'a> {
    pub fn source(&self) -> &'a DBall {
        self.source
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[CurveVertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> CurveVertex {
        self.vertices[i]
    }

    pub fn index_of(&self, v: CurveVertex) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn contains(&self, v: CurveVertex) -> bool {
        self.index.contains_key(&v)
    }

    pub fn one_sided_count(&self) -> usize {
        self.source.vertex_count()
    }

    pub fn two_sided_count(&self) -> usize {
        self.vertices.len() - self.source.vertex_count()
    }

    /// Neighbor indices of vertex index `i`.
    pub fn neighbor_indices(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn neighbors(&self, v: CurveVertex) -> Vec<CurveVertex> {
        self.index_of(v)
            .map(|i| self.adjacency[i].iter().map(|&j| self.vertices[j]).collect())
            .unwrap_or_default()
    }

    pub fn degree(&self, v: CurveVertex) -> usize {
        self.index_of(v).map_or(0, |i| self.adjacency[i].len())
    }

    pub fn adjacent(&self, a: CurveVertex, b: CurveVertex) -> bool {
        match (a, b) {
            (CurveVertex::OneSided(v), CurveVertex::TwoSided(e))
            | (CurveVertex::TwoSided(e), CurveVertex::OneSided(v)) => {
                e.contains(v) && self.contains(CurveVertex::TwoSided(e))
            }
            _ => false,
        }
    }

    /// Edges as `(one-sided, two-sided)` pairs, sorted.
    pub fn edges(&self) -> Vec<(CurveVertex, CurveVertex)> {
        let mut out = Vec::with_capacity(2 * self.two_sided_count());
        for &v in &self.vertices {
            if let CurveVertex::TwoSided(e) = v {
                out.push((CurveVertex::OneSided(e.0), v));
                out.push((CurveVertex::OneSided(e.1), v));
            }
        }
        out.sort();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "radius": self.source.radius(),
            "vertices": self.vertices,
            "edges": self.edges(),
        })
    }

    /// Circles for one-sided vertices, squares for two-sided ones.
    pub fn to_dot(&self) -> String {
        let mut s = format!("graph C_ball_{} {{\n", self.source.radius());
        for v in &self.vertices {
            let shape = if v.is_one_sided() { "circle" } else { "square" };
            s.push_str(&format!("  \"{v}\" [shape={shape}];\n"));
        }
        for (a, b) in self.edges() {
            s.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// The two-sided vertex determined by two one-sided vertices meeting once.
pub fn determined_vertex(a: VertexId, b: VertexId, cg: &CurveGraphBall<'_>) -> Result<CurveVertex> {
    if !cg.source.adjacent(a, b) {
        return Err(Error::NotAnEdge(a, b));
    }
    Ok(CurveVertex::two_sided(a, b))
}

/// The full subgraph `T*` on a tetrahedron's 4 one-sided and 6 two-sided vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TStar {
    pub address: TetAddress,
    pub vertices: Vec<CurveVertex>,
    pub edges: Vec<(CurveVertex, CurveVertex)>,
}

pub fn tstar(t: &Tetrahedron, cg: &CurveGraphBall<'_>) -> Result<TStar> {
    if cg.source.tet(&t.address).map(|x| x.verts) != Some(t.verts) {
        return Err(Error::UnknownTetrahedron(t.address.clone()));
    }
    Ok(tstar_of(t))
}

pub(crate) fn tstar_of(t: &Tetrahedron) -> TStar {
    let mut vertices: Vec<CurveVertex> = t.verts.iter().map(|&v| CurveVertex::OneSided(v)).collect();
    let mut edges = Vec::with_capacity(12);
    for i in 0..4 {
        for j in i + 1..4 {
            let b = CurveVertex::two_sided(t.verts[i], t.verts[j]);
            vertices.push(b);
            edges.push((CurveVertex::OneSided(t.verts[i]), b));
            edges.push((CurveVertex::OneSided(t.verts[j]), b));
        }
    }
    vertices.sort();
    edges.sort();
    TStar {
        address: t.address.clone(),
        vertices,
        edges,
    }
}
