//! Finite balls of the tetrahedral complex `D`.
//!
//! The tetrahedra of `D` are the vertices of a 4-regular tree: two tetrahedra
//! are adjacent when they share a triangle, and every triangle lies in exactly
//! two tetrahedra. A tetrahedron is therefore named by the reduced word of
//! faces crossed on the way from the root, and a ball of radius `n` is grown
//! by crossing faces breadth-first. Crossing face `i` keeps the three face
//! vertices in place and puts a new vertex at local position `i`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{triangle_unfold, FareyTriangle, Slope};

/// Default largest radius accepted by [`generate_ball`] (13 121 tetrahedra).
pub const DEFAULT_RADIUS_CAP: usize = 8;

/// A reduced word over the faces `{0,1,2,3}`; the empty word is the root.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TetAddress(Vec<u8>);

#[allow(clippy::len_without_is_empty)]
impl TetAddress {
    pub fn root() -> Self {
        TetAddress(Vec::new())
    }

    pub fn from_faces(faces: &[u8]) -> Result<Self> {
        let ok = faces.iter().all(|&f| f < 4) && faces.windows(2).all(|w| w[0] != w[1]);
        if !ok {
            return Err(Error::InvalidAddress(format!("{faces:?}")));
        }
        Ok(TetAddress(faces.to_vec()))
    }

    pub fn faces(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn parent(&self) -> Option<TetAddress> {
        let (_, rest) = self.0.split_last()?;
        Some(TetAddress(rest.to_vec()))
    }

    /// Digits only; the root is the empty string.
    pub fn word(&self) -> String {
        self.0.iter().map(|f| char::from(b'0' + f)).collect()
    }
}

impl fmt::Display for TetAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            f.write_str("ε")
        } else {
            f.write_str(&self.word())
        }
    }
}

impl fmt::Debug for TetAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for TetAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(TetAddress::root());
        }
        let faces: Option<Vec<u8>> = s.chars().map(|c| c.to_digit(4).map(|d| d as u8)).collect();
        faces
            .ok_or_else(|| Error::InvalidAddress(s.to_string()))
            .and_then(|f| TetAddress::from_faces(&f))
    }
}

/// The tetrahedron across `face`: drops the last letter when it equals `face`,
/// otherwise appends it.
pub fn neighbor(a: &TetAddress, face: u8) -> TetAddress {
    assert!(face < 4, "face index {face} out of range");
    let mut w = a.0.clone();
    if a.last() == Some(face) {
        w.pop();
    } else {
        w.push(face);
    }
    TetAddress(w)
}

/// Path length between two tetrahedra in the tree.
pub fn tree_distance(a: &TetAddress, b: &TetAddress) -> usize {
    let common = a.0.iter().zip(&b.0).take_while(|(x, y)| x == y).count();
    a.len() + b.len() - 2 * common
}

/// The tree geodesic from `a` to `b`, both endpoints included.
pub fn tree_path(a: &TetAddress, b: &TetAddress) -> Vec<TetAddress> {
    let common = a.0.iter().zip(&b.0).take_while(|(x, y)| x == y).count();
    let mut path = Vec::with_capacity(tree_distance(a, b) + 1);
    for k in (common..=a.len()).rev() {
        path.push(TetAddress(a.0[..k].to_vec()));
    }
    for k in common + 1..=b.len() {
        path.push(TetAddress(b.0[..k].to_vec()));
    }
    path
}

/// A one-sided vertex of `D`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tetrahedron {
    pub address: TetAddress,
    /// Local positions 0–3; face `i` omits `verts[i]`.
    pub verts: [VertexId; 4],
}

impl Tetrahedron {
    pub fn contains(&self, v: VertexId) -> bool {
        self.verts.contains(&v)
    }

    pub fn local_index(&self, v: VertexId) -> Option<usize> {
        self.verts.iter().position(|&w| w == v)
    }

    pub fn face(&self, i: usize) -> [VertexId; 3] {
        let mut out = [VertexId(0); 3];
        let mut k = 0;
        for (j, &v) in self.verts.iter().enumerate() {
            if j != i {
                out[k] = v;
                k += 1;
            }
        }
        out
    }

    pub fn sorted_verts(&self) -> [VertexId; 4] {
        let mut v = self.verts;
        v.sort();
        v
    }
}

/// All tetrahedra within tree distance `radius` of the root.
#[derive(Clone, Debug)]
pub struct DBall {
    radius: usize,
    tets: Vec<Tetrahedron>,
    index: HashMap<TetAddress, usize>,
    by_vertices: HashMap<[VertexId; 4], usize>,
    adjacency: Vec<Vec<VertexId>>,
    support: Vec<Vec<usize>>,
}

/// `2·3^n − 1`.
pub fn expected_tet_count(n: usize) -> usize {
    2 * 3usize.pow(n as u32) - 1
}

/// `2·3^n + 2`.
pub fn expected_vertex_count(n: usize) -> usize {
    2 * 3usize.pow(n as u32) + 2
}

/// `6·3^n`.
pub fn expected_edge_count(n: usize) -> usize {
    6 * 3usize.pow(n as u32)
}

pub fn generate_ball(n: usize) -> Result<DBall> {
    generate_ball_capped(n, DEFAULT_RADIUS_CAP)
}

pub fn generate_ball_capped(n: usize, cap: usize) -> Result<DBall> {
    if n > cap {
        return Err(Error::RadiusCap { radius: n, cap });
    }
    let root = Tetrahedron {
        address: TetAddress::root(),
        verts: [VertexId(0), VertexId(1), VertexId(2), VertexId(3)],
    };
    let mut tets = vec![root];
    let mut next_id = 4u32;
    let mut level = 0..1;
    for _ in 0..n {
        let start = tets.len();
        for t in level.clone() {
            let parent = tets[t].clone();
            for face in 0..4u8 {
                if parent.address.last() == Some(face) {
                    continue;
                }
                let mut verts = parent.verts;
                verts[face as usize] = VertexId(next_id);
                next_id += 1;
                tets.push(Tetrahedron {
                    address: neighbor(&parent.address, face),
                    verts,
                });
            }
        }
        level = start..tets.len();
    }
    Ok(DBall::from_tets(n, tets, next_id as usize))
}

impl DBall {
    fn from_tets(radius: usize, tets: Vec<Tetrahedron>, vertex_count: usize) -> DBall {
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut support = vec![Vec::new(); vertex_count];
        let mut index = HashMap::with_capacity(tets.len());
        let mut by_vertices = HashMap::with_capacity(tets.len());
        for (i, t) in tets.iter().enumerate() {
            index.insert(t.address.clone(), i);
            by_vertices.insert(t.sorted_verts(), i);
            for &u in &t.verts {
                support[u.index()].push(i);
                for &w in &t.verts {
                    if u != w {
                        adjacency[u.index()].push(w);
                    }
                }
            }
        }
        for row in &mut adjacency {
            row.sort();
            row.dedup();
        }
        DBall {
            radius,
            tets,
            index,
            by_vertices,
            adjacency,
            support,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Tetrahedra in breadth-first, lexicographic order.
    pub fn tets(&self) -> &[Tetrahedron] {
        &self.tets
    }

    pub fn tet(&self, a: &TetAddress) -> Option<&Tetrahedron> {
        self.index.get(a).map(|&i| &self.tets[i])
    }

    pub fn tet_index(&self, a: &TetAddress) -> Option<usize> {
        self.index.get(a).copied()
    }

    /// The tetrahedron with exactly these four vertices, if it is in the ball.
    pub fn tet_spanned_by(&self, verts: [VertexId; 4]) -> Option<&Tetrahedron> {
        let mut v = verts;
        v.sort();
        self.by_vertices.get(&v).map(|&i| &self.tets[i])
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count() as u32).map(VertexId)
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v.index() < self.vertex_count()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.index()]
    }

    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.contains_vertex(u) && self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    /// D-edges as sorted pairs `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for u in self.vertices() {
            for &w in self.neighbors(u) {
                if u < w {
                    out.push((u, w));
                }
            }
        }
        out
    }

    /// Indices (into [`DBall::tets`]) of the tetrahedra containing `v`, ascending.
    pub fn vertex_support(&self, v: VertexId) -> &[usize] {
        &self.support[v.index()]
    }

    /// The shallowest tetrahedron containing `v`; it is where `v` was created.
    pub fn creator(&self, v: VertexId) -> &Tetrahedron {
        &self.tets[self.support[v.index()][0]]
    }

    /// Tree depth of [`DBall::creator`].
    pub fn vertex_depth(&self, v: VertexId) -> usize {
        self.creator(v).address.len()
    }

    /// The sub-ball of radius `k`; vertex ids and addresses are unchanged.
    pub fn prefix(&self, k: usize) -> DBall {
        if k >= self.radius {
            return self.clone();
        }
        let tets: Vec<Tetrahedron> = self.tets.iter().take_while(|t| t.address.len() <= k).cloned().collect();
        DBall::from_tets(k, tets, expected_vertex_count(k))
    }

    /// True when both tetrahedra on either side of `tri` are in the ball.
    pub fn is_interior_triangle(&self, tri: [VertexId; 3]) -> bool {
        triangle_cofaces(self, tri).map(|c| c.len() == 2).unwrap_or(false)
    }

    /// `{"radius": n, "tets": [{"addr": "203", "verts": [..]}, …], "edges": [[u, v], …]}`
    pub fn to_json(&self) -> serde_json::Value {
        let tets: Vec<serde_json::Value> = self
            .tets
            .iter()
            .map(|t| serde_json::json!({"addr": t.address.word(), "verts": t.verts}))
            .collect();
        let edges: Vec<[VertexId; 2]> = self.edges().into_iter().map(|(u, v)| [u, v]).collect();
        serde_json::json!({"radius": self.radius, "tets": tets, "edges": edges})
    }

    /// The 1-skeleton in Graphviz format.
    pub fn to_dot(&self) -> String {
        let mut s = format!("graph D_ball_{} {{\n  node [shape=circle];\n", self.radius);
        for v in self.vertices() {
            s.push_str(&format!("  {v};\n"));
        }
        for (u, v) in self.edges() {
            s.push_str(&format!("  {u} -- {v};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// The link of a vertex, restricted to the ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkGraph {
    pub center: VertexId,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    /// One per tetrahedron containing the center.
    pub triangles: Vec<[VertexId; 3]>,
}

pub fn link(ball: &DBall, v: VertexId) -> Result<LinkGraph> {
    if !ball.contains_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    let mut edges = Vec::new();
    let mut triangles = Vec::new();
    for &t in ball.vertex_support(v) {
        let tet = &ball.tets[t];
        let i = tet.local_index(v).expect("support contains v");
        let mut tri = tet.face(i);
        tri.sort();
        triangles.push(tri);
        edges.extend([(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])]);
    }
    edges.sort();
    edges.dedup();
    triangles.sort();
    Ok(LinkGraph {
        center: v,
        vertices: ball.neighbors(v).to_vec(),
        edges,
        triangles,
    })
}

/// Farey labels on a vertex's link.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaLabeling {
    pub center: VertexId,
    pub labels: BTreeMap<VertexId, Slope>,
    /// Link edges whose second link triangle lies outside the ball.
    pub boundary_edges: Vec<(VertexId, VertexId)>,
}

/// Labels the link of `v` by slopes, starting from `base ↦ (0/1, 1/0, 1/1)`
/// and following each crossed face with the matching Farey unfold.
pub fn theta_labeling(ball: &DBall, v: VertexId, base: [VertexId; 3]) -> Result<ThetaLabeling> {
    if !ball.contains_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    let start = ball
        .tet_spanned_by([v, base[0], base[1], base[2]])
        .ok_or_else(|| Error::Precondition(format!("{base:?} is not a triangle of the link of {v}")))?;
    let start_idx = ball.index[&start.address];

    let mut labels = BTreeMap::new();
    labels.insert(base[0], Slope::zero());
    labels.insert(base[1], Slope::infinity());
    labels.insert(base[2], Slope::one());

    let mut boundary_edges = Vec::new();
    let mut seen = HashMap::from([(start_idx, ())]);
    let mut queue = VecDeque::from([start_idx]);
    while let Some(ti) = queue.pop_front() {
        let tet = &ball.tets[ti];
        let vi = tet.local_index(v).expect("tetrahedron contains the center");
        let tri_labels: Vec<Slope> = tet
            .verts
            .iter()
            .filter(|&&w| w != v)
            .map(|w| labels[w].clone())
            .collect();
        let label_tri = FareyTriangle::new(tri_labels[0].clone(), tri_labels[1].clone(), tri_labels[2].clone())?;
        for face in 0..4 {
            if face == vi {
                continue;
            }
            let across = neighbor(&tet.address, face as u8);
            let edge: Vec<VertexId> = tet
                .verts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != vi && j != face)
                .map(|(_, &w)| w)
                .collect();
            let (a, b) = (edge[0].min(edge[1]), edge[0].max(edge[1]));
            let Some(&ni) = ball.index.get(&across) else {
                boundary_edges.push((a, b));
                continue;
            };
            if seen.insert(ni, ()).is_some() {
                continue;
            }
            let fresh = ball.tets[ni].verts[face];
            let unfolded = triangle_unfold(&label_tri, (&labels[&a], &labels[&b]))?;
            let new_label = unfolded
                .vertices()
                .iter()
                .find(|s| *s != &labels[&a] && *s != &labels[&b])
                .expect("unfolded triangle has a third vertex")
                .clone();
            if let Some(old) = labels.insert(fresh, new_label.clone()) {
                if old != new_label {
                    return Err(Error::Precondition(format!(
                        "link of {v} relabels {fresh}: {old} vs {new_label}"
                    )));
                }
            }
            queue.push_back(ni);
        }
    }
    boundary_edges.sort();
    Ok(ThetaLabeling {
        center: v,
        labels,
        boundary_edges,
    })
}

/// Addresses of the tetrahedra of the ball containing all three vertices.
pub fn triangle_cofaces(ball: &DBall, tri: [VertexId; 3]) -> Result<Vec<TetAddress>> {
    let distinct = tri[0] != tri[1] && tri[0] != tri[2] && tri[1] != tri[2];
    if !distinct || tri.iter().any(|&v| !ball.contains_vertex(v)) {
        return Err(Error::NotABallTriangle(tri));
    }
    let out: Vec<TetAddress> = ball
        .vertex_support(tri[0])
        .iter()
        .map(|&i| &ball.tets[i])
        .filter(|t| t.contains(tri[1]) && t.contains(tri[2]))
        .map(|t| t.address.clone())
        .collect();
    if out.is_empty() {
        return Err(Error::NotABallTriangle(tri));
    }
    Ok(out)
}

/// Addresses of the tetrahedra of the ball containing both endpoints.
pub fn edge_cofaces(ball: &DBall, u: VertexId, v: VertexId) -> Result<Vec<TetAddress>> {
    if !ball.adjacent(u, v) {
        return Err(Error::NotAnEdge(u, v));
    }
    Ok(ball
        .vertex_support(u)
        .iter()
        .map(|&i| &ball.tets[i])
        .filter(|t| t.contains(v))
        .map(|t| t.address.clone())
        .collect())
}
