//! Distances on `D^1` and on the curve graph, geodesic intervals, the
//! separating-triangle construction behind the bottleneck property, and
//! interval-based thinness of geodesic triangles.
//!
//! Distances are exact breadth-first distances inside a finite ball. A ball
//! is geodesically convex in the full complex (a path leaving it must leave
//! and re-enter through one boundary triangle, and the detour can be replaced
//! by at most one edge of that triangle), so these are also distances in the
//! infinite complex. [`distance_stability`] checks this empirically.

use std::borrow::Cow;
use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve_graph::{CurveGraphBall, CurveVertex};
use crate::error::{Error, Result};
use crate::tet_tree::{tree_distance, tree_path, DBall, TetAddress, VertexId};

/// Above this many (side, apex) combinations thinness falls back to sampling.
pub const EXHAUSTIVE_TRIPLE_LIMIT: u64 = 10_000_000;

/// Default seed for every sampled check.
pub const DEFAULT_SEED: u64 = 0x5eed_1313;

const UNREACHABLE: u8 = u8::MAX;

/// A finite graph with unit edge lengths, given by adjacency lists.
pub trait UnitGraph {
    fn adjacency_lists(&self) -> Cow<'_, [Vec<usize>]>;
}

impl UnitGraph for DBall {
    fn adjacency_lists(&self) -> Cow<'_, [Vec<usize>]> {
        Cow::Owned(
            self.vertices()
                .map(|v| self.neighbors(v).iter().map(|w| w.index()).collect())
                .collect(),
        )
    }
}

impl UnitGraph for CurveGraphBall<'_> {
    fn adjacency_lists(&self) -> Cow<'_, [Vec<usize>]> {
        Cow::Borrowed(self.adjacency())
    }
}

impl UnitGraph for [Vec<usize>] {
    fn adjacency_lists(&self) -> Cow<'_, [Vec<usize>]> {
        Cow::Borrowed(self)
    }
}

/// All-pairs hop distances, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    edge_count: usize,
    dist: Vec<u8>,
}

impl fmt::Debug for DistanceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceTable")
            .field("n", &self.n)
            .field("edge_count", &self.edge_count)
            .finish()
    }
}

fn bfs_row(adj: &[Vec<usize>], src: usize, row: &mut [u8]) {
    row.fill(UNREACHABLE);
    row[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = row[u];
        assert!(du < UNREACHABLE - 1, "graph diameter exceeds the distance table range");
        for &w in &adj[u] {
            if row[w] == UNREACHABLE {
                row[w] = du + 1;
                queue.push_back(w);
            }
        }
    }
}

/// Breadth-first search from every vertex; rows are computed in parallel and
/// written to fixed slots, so the table does not depend on scheduling.
pub fn all_pairs_distances<G: UnitGraph + ?Sized>(g: &G) -> DistanceTable {
    let adj = g.adjacency_lists();
    let n = adj.len();
    let mut dist = vec![0u8; n * n];
    if n > 0 {
        dist.par_chunks_mut(n)
            .enumerate()
            .for_each(|(src, row)| bfs_row(&adj, src, row));
    }
    let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
    DistanceTable { n, edge_count, dist }
}

impl DistanceTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// `None` when the vertices lie in different components.
    pub fn get(&self, a: usize, b: usize) -> Option<u32> {
        let d = self.dist[a * self.n + b];
        (d != UNREACHABLE).then_some(d as u32)
    }

    /// Distance between vertices known to be connected.
    pub fn d(&self, a: usize, b: usize) -> u32 {
        self.get(a, b).expect("vertices are connected")
    }

    pub fn row(&self, a: usize) -> &[u8] {
        &self.dist[a * self.n..(a + 1) * self.n]
    }

    pub fn diameter(&self) -> u32 {
        self.dist
            .iter()
            .filter(|&&d| d != UNREACHABLE)
            .map(|&d| d as u32)
            .max()
            .unwrap_or(0)
    }
}

/// `{v : d(x,v) + d(v,y) = d(x,y)}`, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub x: usize,
    pub y: usize,
    pub members: Vec<usize>,
}

impl Interval {
    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

pub fn interval(x: usize, y: usize, table: &DistanceTable) -> Interval {
    let dxy = table.row(x)[y] as u32;
    let (rx, ry) = (table.row(x), table.row(y));
    let members = (0..table.n)
        .filter(|&v| rx[v] != UNREACHABLE && ry[v] != UNREACHABLE && rx[v] as u32 + ry[v] as u32 == dxy)
        .collect();
    Interval { x, y, members }
}

/// Outcome of comparing `d_C` with `2·d_D`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IsometryReport {
    pub pairs_checked: u64,
    /// `(a, b, expected, found)`, at most 16 kept.
    pub violations: Vec<(String, String, u32, u32)>,
    pub violation_count: u64,
}

impl IsometryReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Checks `d_C = 2·d_D` on one-sided pairs and the midpoint formulas for pairs
/// involving two-sided vertices:
/// `d_C(β{u,v}, w) = min(2·d_D(u,w), 2·d_D(v,w)) + 1` and, for distinct
/// two-sided vertices, `min over endpoints of 2·d_D + 2`.
pub fn check_subdivision_isometry(
    cg: &CurveGraphBall<'_>,
    d_table: &DistanceTable,
    c_table: &DistanceTable,
) -> Result<IsometryReport> {
    let ball = cg.source();
    if d_table.len() != ball.vertex_count()
        || d_table.edge_count() != cg.two_sided_count()
        || c_table.len() != cg.len()
        || c_table.edge_count() != 2 * cg.two_sided_count()
    {
        return Err(Error::MismatchedSources);
    }
    let n = cg.len();
    let per_row: Vec<IsometryReport> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rep = IsometryReport::default();
            let a = cg.vertex(i);
            for j in i..n {
                let b = cg.vertex(j);
                let expected = subdivided_distance(a, b, d_table);
                let found = c_table.d(i, j);
                rep.pairs_checked += 1;
                if expected != found {
                    rep.violation_count += 1;
                    if rep.violations.len() < 16 {
                        rep.violations.push((a.to_string(), b.to_string(), expected, found));
                    }
                }
            }
            rep
        })
        .collect();
    let mut out = IsometryReport::default();
    for r in per_row {
        out.pairs_checked += r.pairs_checked;
        out.violation_count += r.violation_count;
        for v in r.violations {
            if out.violations.len() < 16 {
                out.violations.push(v);
            }
        }
    }
    Ok(out)
}

fn subdivided_distance(a: CurveVertex, b: CurveVertex, d: &DistanceTable) -> u32 {
    use CurveVertex::*;
    match (a, b) {
        (OneSided(u), OneSided(v)) => 2 * d.d(u.index(), v.index()),
        (TwoSided(e), OneSided(w)) | (OneSided(w), TwoSided(e)) => {
            2 * d.d(e.lo().index(), w.index()).min(d.d(e.hi().index(), w.index())) + 1
        }
        (TwoSided(e), TwoSided(f)) if e == f => 0,
        (TwoSided(e), TwoSided(f)) => {
            let m = [e.lo(), e.hi()]
                .iter()
                .flat_map(|x| [f.lo(), f.hi()].map(|y| d.d(x.index(), y.index())))
                .min()
                .expect("four endpoint pairs");
            2 * m + 2
        }
    }
}

/// Number of vertex pairs of `small` whose distance differs in `large`.
///
/// Vertex ids of a smaller ball are preserved by the larger one, so rows can be
/// compared index by index.
pub fn distance_stability(small: &DistanceTable, large: &DistanceTable) -> Result<u64> {
    if small.len() > large.len() {
        return Err(Error::MismatchedSources);
    }
    let n = small.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = (small.row(i), &large.row(i)[..n]);
            a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
        })
        .sum())
}

/// A pair is within the margin of `ball(n)` when both endpoints lie in
/// tetrahedra of address length ≤ n − 1.
pub fn in_margin(ball: &DBall, v: VertexId) -> bool {
    ball.radius() >= 1 && ball.vertex_depth(v) < ball.radius()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottleneckTriangle {
    pub triangle: [VertexId; 3],
    /// The vertex preceding `p` on the chosen geodesic from `x`.
    pub preceding: VertexId,
    /// The tree geodesic of tetrahedra from one containing `preceding` to one containing `y`.
    pub tets: Vec<TetAddress>,
    pub contains_p: bool,
}

/// The separating triangle through `p`.
///
/// `q` is the least neighbor of `p` one step closer to `x`. Take the shortest
/// tree path `T_0, …, T_k` from a tetrahedron containing `q` to one containing
/// `y`, the first `T_i` missing `q`, and return `T_{i−1} ∩ T_i`.
pub fn bottleneck_triangle(
    ball: &DBall,
    table: &DistanceTable,
    x: VertexId,
    y: VertexId,
    p: VertexId,
) -> Result<BottleneckTriangle> {
    for v in [x, y, p] {
        if !ball.contains_vertex(v) {
            return Err(Error::UnknownVertex(v));
        }
    }
    if !in_margin(ball, x) || !in_margin(ball, y) {
        return Err(Error::OutsideMargin);
    }
    let (dxp, dpy, dxy) = (
        table.d(x.index(), p.index()),
        table.d(p.index(), y.index()),
        table.d(x.index(), y.index()),
    );
    if dxp + dpy != dxy || dxp < 1 || dpy < 1 {
        return Err(Error::Precondition(format!(
            "{p} is not an interior vertex of a geodesic from {x} to {y}"
        )));
    }
    let q = *ball
        .neighbors(p)
        .iter()
        .find(|w| table.d(x.index(), w.index()) + 1 == dxp)
        .expect("a geodesic vertex has a predecessor");

    let tets = ball.tets();
    let mut best: Option<(usize, &TetAddress, &TetAddress)> = None;
    for &a in ball.vertex_support(q) {
        for &b in ball.vertex_support(y) {
            let (ta, tb) = (&tets[a].address, &tets[b].address);
            let d = tree_distance(ta, tb);
            if best.is_none_or(|(bd, ba, bb)| (d, ta, tb) < (bd, ba, bb)) {
                best = Some((d, ta, tb));
            }
        }
    }
    let (_, from, to) = best.expect("supports are non-empty");
    let path = tree_path(from, to);
    let tet_at = |a: &TetAddress| ball.tet(a).expect("tree geodesics stay inside the ball");
    let i = path
        .iter()
        .position(|a| !tet_at(a).contains(q))
        .ok_or_else(|| Error::Precondition(format!("{q} and {y} share a tetrahedron")))?;
    let (prev, cur) = (tet_at(&path[i - 1]), tet_at(&path[i]));
    let mut shared: Vec<VertexId> = prev.verts.iter().copied().filter(|&v| cur.contains(v)).collect();
    shared.sort();
    let triangle: [VertexId; 3] = shared
        .try_into()
        .map_err(|_| Error::Precondition("consecutive tetrahedra must share a triangle".into()))?;
    Ok(BottleneckTriangle {
        triangle,
        preceding: q,
        contains_p: triangle.contains(&p),
        tets: path,
    })
}

/// True when deleting `removed` disconnects `x` from `y` in the 1-skeleton.
pub fn separates(ball: &DBall, removed: &[VertexId], x: VertexId, y: VertexId) -> bool {
    if removed.contains(&x) || removed.contains(&y) {
        return true;
    }
    let mut seen = vec![false; ball.vertex_count()];
    for r in removed {
        seen[r.index()] = true;
    }
    seen[x.index()] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        if u == y {
            return false;
        }
        for &w in ball.neighbors(u) {
            if !seen[w.index()] {
                seen[w.index()] = true;
                queue.push_back(w);
            }
        }
    }
    true
}

/// A geodesic midpoint: a vertex, or the midpoint of an edge `(a, b)` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Midpoint {
    Vertex(VertexId),
    Edge(VertexId, VertexId),
}

impl Midpoint {
    /// Twice the distance from the midpoint to `w`.
    pub fn half_units_to(self, w: VertexId, table: &DistanceTable) -> u32 {
        match self {
            Midpoint::Vertex(m) => 2 * table.d(m.index(), w.index()),
            Midpoint::Edge(a, b) => 2 * table.d(a.index(), w.index()).min(table.d(b.index(), w.index())) + 1,
        }
    }
}

/// The lexicographically least midpoint of a geodesic from `x` to `y`, and the
/// vertex `p` within 1/2 of it.
pub fn geodesic_midpoint(table: &DistanceTable, x: VertexId, y: VertexId) -> (Midpoint, VertexId) {
    let d = table.d(x.index(), y.index());
    let iv = interval(x.index(), y.index(), table);
    let at = |k: u32| iv.members.iter().copied().filter(move |&v| table.d(x.index(), v) == k);
    if d.is_multiple_of(2) {
        let m = VertexId(at(d / 2).next().expect("interval has every level") as u32);
        (Midpoint::Vertex(m), m)
    } else {
        let (a, b) = at(d / 2)
            .flat_map(|a| at(d / 2 + 1).filter(move |&b| table.d(a, b) == 1).map(move |b| (a, b)))
            .map(|(a, b)| (a.min(b), a.max(b)))
            .min()
            .expect("consecutive interval levels are joined by an edge");
        let (a, b) = (VertexId(a as u32), VertexId(b as u32));
        (Midpoint::Edge(a, b), a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BottleneckFailure {
    pub x: VertexId,
    pub y: VertexId,
    pub p: VertexId,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BottleneckReport {
    pub radius: usize,
    /// Ordered in-margin pairs with `d_D ≥ 3`.
    pub pairs_examined: u64,
    pub pairs_skipped_short: u64,
    /// Largest distance from a midpoint to a vertex of its triangle, in half units.
    pub worst_half_units: u32,
    pub worst_witness: Option<(VertexId, VertexId)>,
    pub failures: Vec<BottleneckFailure>,
}

impl BottleneckReport {
    /// Every triangle contains `p`, separates, and lies within 3/2 of the midpoint.
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.worst_half_units <= 3
    }
}

/// Runs the separating-triangle construction at the midpoint of every ordered
/// in-margin pair at distance at least 3.
pub fn check_bottleneck_property(ball: &DBall, table: &DistanceTable) -> BottleneckReport {
    let margin: Vec<VertexId> = ball.vertices().filter(|&v| in_margin(ball, v)).collect();
    let partial: Vec<BottleneckReport> = margin
        .par_iter()
        .map(|&x| {
            let mut rep = BottleneckReport::default();
            for &y in &margin {
                if x == y {
                    continue;
                }
                if table.d(x.index(), y.index()) < 3 {
                    rep.pairs_skipped_short += 1;
                    continue;
                }
                rep.pairs_examined += 1;
                check_pair(ball, table, x, y, &mut rep);
            }
            rep
        })
        .collect();
    let mut out = BottleneckReport {
        radius: ball.radius(),
        ..Default::default()
    };
    for r in partial {
        out.pairs_examined += r.pairs_examined;
        out.pairs_skipped_short += r.pairs_skipped_short;
        if r.worst_witness.is_some() && (out.worst_witness.is_none() || r.worst_half_units > out.worst_half_units) {
            out.worst_half_units = r.worst_half_units;
            out.worst_witness = r.worst_witness;
        }
        out.failures.extend(r.failures);
    }
    out
}

fn check_pair(ball: &DBall, table: &DistanceTable, x: VertexId, y: VertexId, rep: &mut BottleneckReport) {
    let (m, p) = geodesic_midpoint(table, x, y);
    let fail = |reason: String| BottleneckFailure { x, y, p, reason };
    let bt = match bottleneck_triangle(ball, table, x, y, p) {
        Ok(bt) => bt,
        Err(e) => {
            rep.failures.push(fail(e.to_string()));
            return;
        }
    };
    if !bt.contains_p {
        rep.failures.push(fail(format!("triangle {:?} misses p", bt.triangle)));
    }
    if !separates(ball, &bt.triangle, x, y) {
        rep.failures
            .push(fail(format!("triangle {:?} does not separate", bt.triangle)));
    }
    let worst = bt
        .triangle
        .iter()
        .map(|&w| m.half_units_to(w, table))
        .max()
        .unwrap_or(0);
    if worst > 3 {
        rep.failures.push(fail(format!(
            "triangle {:?} is {worst}/2 from the midpoint",
            bt.triangle
        )));
    }
    // Every path from x to y must come within 3/2 of m.
    let near: Vec<VertexId> = ball
        .vertices()
        .filter(|&w| w != x && w != y && m.half_units_to(w, table) <= 3)
        .collect();
    if !separates(ball, &near, x, y) {
        rep.failures
            .push(fail("a path avoids the 3/2-neighbourhood of the midpoint".into()));
    }
    if rep.worst_witness.is_none() || worst > rep.worst_half_units {
        rep.worst_half_units = worst;
        rep.worst_witness = Some((x, y));
    }
}

/// A non-negative multiple of 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct HalfInteger(u32);

impl HalfInteger {
    pub fn from_halves(h: u32) -> Self {
        HalfInteger(h)
    }

    pub fn from_integer(k: u32) -> Self {
        HalfInteger(2 * k)
    }

    pub fn halves(self) -> u32 {
        self.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScanMode {
    Exhaustive,
    Sampled { seed: u64, samples: u64 },
}

/// `(x, y, z, p)`: `p ∈ I(x, y)` realizing the maximum.
pub type ThinnessWitness = (usize, usize, usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThinnessReport {
    pub vertices: usize,
    pub mode: ScanMode,
    pub triples_examined: u64,
    /// `max dist(p, I(x,z) ∪ I(y,z))` over the examined triples and `p ∈ I(x,y)`.
    pub max: u32,
    pub witness: Option<ThinnessWitness>,
    pub bound: HalfInteger,
}

impl ThinnessReport {
    pub fn passed(&self) -> bool {
        2 * self.max <= self.bound.halves()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ThinnessOptions {
    pub seed: u64,
    /// Number of triples drawn when the exhaustive scan is too large.
    pub sample_cap: u64,
    pub exhaustive_limit: u64,
}

impl Default for ThinnessOptions {
    fn default() -> Self {
        ThinnessOptions {
            seed: DEFAULT_SEED,
            sample_cap: 1_000_000,
            exhaustive_limit: EXHAUSTIVE_TRIPLE_LIMIT,
        }
    }
}

/// Fixed-width bit rows.
struct BitRows {
    words: usize,
    data: Vec<u64>,
}

impl BitRows {
    fn new(rows: usize, bits: usize) -> Self {
        let words = bits.div_ceil(64);
        BitRows {
            words,
            data: vec![0; rows * words],
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.words..(r + 1) * self.words]
    }
}

fn set_bit(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

fn test_bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn fill_interval(table: &DistanceTable, x: usize, y: usize, out: &mut [u64]) {
    out.fill(0);
    let (rx, ry) = (table.row(x), table.row(y));
    let dxy = rx[y] as u16;
    for v in 0..table.n {
        if rx[v] as u16 + ry[v] as u16 == dxy {
            set_bit(out, v);
        }
    }
}

struct ThinnessScanner<'a> {
    table: &'a DistanceTable,
    /// `balls[r]` row `p`: vertices within distance `r` of `p`.
    balls: Vec<BitRows>,
}

impl<'a> ThinnessScanner<'a> {
    fn new(table: &'a DistanceTable, max_radius: usize) -> Self {
        let n = table.n;
        let balls = (0..=max_radius)
            .map(|r| {
                let mut rows = BitRows::new(n, n);
                for p in 0..n {
                    let row = table.row(p);
                    let out = rows.row_mut(p);
                    for (v, &d) in row.iter().enumerate() {
                        if (d as usize) <= r {
                            set_bit(out, v);
                        }
                    }
                }
                rows
            })
            .collect();
        ThinnessScanner { table, balls }
    }

    fn words(&self) -> usize {
        self.n().div_ceil(64)
    }

    fn n(&self) -> usize {
        self.table.n
    }

    fn dist_to_set(&self, p: usize, set: &[u64]) -> u32 {
        for (r, rows) in self.balls.iter().enumerate() {
            if intersects(rows.row(p), set) {
                return r as u32;
            }
        }
        (0..self.n())
            .filter(|&v| test_bit(set, v))
            .map(|v| self.table.d(p, v))
            .min()
            .unwrap_or(0)
    }

    /// Worst `p` for side `(x, y)` against apex `z`.
    fn side(&self, side: &[u64], union: &[u64]) -> (u32, usize) {
        let mut best = (0, usize::MAX);
        for (w, &bits) in side.iter().enumerate() {
            let mut bits = bits & !union[w];
            while bits != 0 {
                let p = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let d = self.dist_to_set(p, union);
                if d > best.0 {
                    best = (d, p);
                }
            }
        }
        best
    }
}

fn better(a: (u32, Option<ThinnessWitness>), b: (u32, Option<ThinnessWitness>)) -> (u32, Option<ThinnessWitness>) {
    match (a.1, b.1) {
        (None, _) => b,
        (_, None) => a,
        (Some(wa), Some(wb)) => {
            if b.0 > a.0 || (b.0 == a.0 && wb < wa) {
                b
            } else {
                a
            }
        }
    }
}

/// Interval-based thinness of geodesic triangles.
///
/// For triples `(x, y, z)` and `p ∈ I(x, y)`, measures `dist(p, I(x,z) ∪ I(y,z))`
/// and reports the maximum. Every geodesic side lies in the corresponding
/// interval, so `δ`-thin triangles force this quantity to be at most `δ`.
/// Exhaustive over unordered sides and all apexes when that is at most
/// `exhaustive_limit` combinations; otherwise `sample_cap` triples are drawn
/// from a ChaCha stream per chunk, so results do not depend on the thread count.
pub fn thinness_report(table: &DistanceTable, bound: HalfInteger, opts: &ThinnessOptions) -> ThinnessReport {
    let n = table.n;
    let scanner = ThinnessScanner::new(table, (bound.halves() as usize).div_ceil(2) + 2);
    let words = scanner.words();
    let total = if n < 3 {
        0
    } else {
        (n * (n - 1) / 2) as u64 * (n as u64 - 2)
    };

    let (mode, examined, best) = if total <= opts.exhaustive_limit {
        let mut intervals = BitRows::new(n * n, n);
        for x in 0..n {
            for y in 0..n {
                fill_interval(table, x, y, intervals.row_mut(x * n + y));
            }
        }
        let best = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut best = (0u32, None);
                let mut union = vec![0u64; words];
                for y in x + 1..n {
                    let side = intervals.row(x * n + y);
                    for z in 0..n {
                        if z == x || z == y {
                            continue;
                        }
                        let (a, b) = (intervals.row(x * n + z), intervals.row(y * n + z));
                        for (u, (p, q)) in union.iter_mut().zip(a.iter().zip(b)) {
                            *u = p | q;
                        }
                        let (d, p) = scanner.side(side, &union);
                        if d > 0 {
                            best = better(best, (d, Some((x, y, z, p))));
                        }
                    }
                }
                best
            })
            .reduce(|| (0, None), better);
        (ScanMode::Exhaustive, total, best)
    } else {
        const CHUNK: u64 = 4096;
        let samples = opts.sample_cap;
        let chunks = samples.div_ceil(CHUNK);
        let best = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(c);
                let mut best = (0u32, None);
                let (mut side, mut a, mut b, mut union) = (
                    vec![0u64; words],
                    vec![0u64; words],
                    vec![0u64; words],
                    vec![0u64; words],
                );
                let count = CHUNK.min(samples - c * CHUNK);
                for _ in 0..count {
                    let x = rng.gen_range(0..n);
                    let y = loop {
                        let y = rng.gen_range(0..n);
                        if y != x {
                            break y;
                        }
                    };
                    let z = loop {
                        let z = rng.gen_range(0..n);
                        if z != x && z != y {
                            break z;
                        }
                    };
                    let (x, y) = (x.min(y), x.max(y));
                    fill_interval(table, x, y, &mut side);
                    fill_interval(table, x, z, &mut a);
                    fill_interval(table, y, z, &mut b);
                    for (u, (p, q)) in union.iter_mut().zip(a.iter().zip(&b)) {
                        *u = p | q;
                    }
                    let (d, p) = scanner.side(&side, &union);
                    if d > 0 {
                        best = better(best, (d, Some((x, y, z, p))));
                    }
                }
                best
            })
            .reduce(|| (0, None), better);
        (
            ScanMode::Sampled {
                seed: opts.seed,
                samples,
            },
            samples,
            best,
        )
    };
    ThinnessReport {
        vertices: n,
        mode,
        triples_examined: examined,
        max: best.0,
        witness: best.1,
        bound,
    }
}

/// Gromov four-point constant, in half units, over all quadruples.
///
/// For each quadruple the three pair sums are sorted and the gap between the
/// two largest is the doubled four-point `δ`.
pub fn four_point_delta_halves(table: &DistanceTable) -> u32 {
    let n = table.n;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0;
            for j in i + 1..n {
                let dij = table.d(i, j);
                for k in j + 1..n {
                    let (dik, djk) = (table.d(i, k), table.d(j, k));
                    for l in k + 1..n {
                        let mut s = [dij + table.d(k, l), dik + table.d(j, l), table.d(i, l) + djk];
                        s.sort_unstable();
                        best = best.max(s[2] - s[1]);
                    }
                }
            }
            best
        })
        .max()
        .unwrap_or(0)
}

/// Empirical comparison of `d_D` with the tree distance between creating tetrahedra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeComparison {
    pub pairs: u64,
    /// `min/max of d_D − d_T`.
    pub min_difference: i64,
    pub max_difference: i64,
    /// `min/max of d_D / d_T` over pairs with `d_T > 0`.
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Sends each vertex to the least address in its support (its creating
/// tetrahedron) and compares distances over all unordered pairs.
pub fn tree_comparison(ball: &DBall, table: &DistanceTable) -> TreeComparison {
    let addr: Vec<&TetAddress> = ball.vertices().map(|v| &ball.creator(v).address).collect();
    let mut out = TreeComparison {
        pairs: 0,
        min_difference: i64::MAX,
        max_difference: i64::MIN,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
    };
    let n = addr.len();
    for u in 0..n {
        for v in u + 1..n {
            let dd = table.d(u, v) as i64;
            let dt = tree_distance(addr[u], addr[v]) as i64;
            out.pairs += 1;
            out.min_difference = out.min_difference.min(dd - dt);
            out.max_difference = out.max_difference.max(dd - dt);
            if dt > 0 {
                let r = dd as f64 / dt as f64;
                out.min_ratio = out.min_ratio.min(r);
                out.max_ratio = out.max_ratio.max(r);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_graph::subdivide;
    use crate::tet_tree::generate_ball;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn root_distances() {
        let b = generate_ball(2).unwrap();
        let t = all_pairs_distances(&b);
        assert_eq!(t.d(0, 1), 1);
        // vertex 4 is the fresh vertex of tetrahedron "0"
        assert_eq!(t.d(0, 4), 2);
        assert_eq!(t.d(3, 3), 0);
    }

    #[test]
    fn curve_graph_distances() {
        let b = generate_ball(1).unwrap();
        let cg = subdivide(&b);
        let dd = all_pairs_distances(&b);
        let dc = all_pairs_distances(&cg);
        let i0 = cg.index_of(CurveVertex::OneSided(v(0))).unwrap();
        let i1 = cg.index_of(CurveVertex::OneSided(v(1))).unwrap();
        let i4 = cg.index_of(CurveVertex::OneSided(v(4))).unwrap();
        let b01 = cg.index_of(CurveVertex::two_sided(v(0), v(1))).unwrap();
        assert_eq!((dd.d(0, 1), dc.d(i0, i1)), (1, 2));
        assert_eq!(dc.d(i0, i4), 4);
        assert_eq!(dc.d(b01, i0), 1);
        let rep = check_subdivision_isometry(&cg, &dd, &dc).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let other = all_pairs_distances(&generate_ball(0).unwrap());
        assert_eq!(
            check_subdivision_isometry(&cg, &other, &dc),
            Err(Error::MismatchedSources)
        );
    }

    #[test]
    fn interval_examples() {
        let b = generate_ball(2).unwrap();
        let t = all_pairs_distances(&b);
        assert_eq!(interval(5, 5, &t).members, vec![5]);
        assert_eq!(interval(0, 1, &t).members, vec![0, 1]);
        let iv = interval(0, 4, &t);
        let common: Vec<usize> = b
            .neighbors(v(0))
            .iter()
            .filter(|w| b.adjacent(**w, v(4)))
            .map(|w| w.index())
            .collect();
        assert_eq!(iv.members, [vec![0], common, vec![4]].concat());
    }

    #[test]
    fn bottleneck_hand_trace() {
        // x = 0, y = 8 (fresh vertex of "01"); geodesic 0 – {2,3} – 8.
        let b = generate_ball(3).unwrap();
        let t = all_pairs_distances(&b);
        assert_eq!(t.d(0, 8), 2);
        for p in [v(2), v(3)] {
            let bt = bottleneck_triangle(&b, &t, v(0), v(8), p).unwrap();
            assert_eq!(bt.preceding, v(0));
            assert_eq!(bt.triangle, [v(1), v(2), v(3)]);
            assert_eq!(bt.tets[..2], [TetAddress::root(), "0".parse().unwrap()]);
            assert!(bt.contains_p);
            assert!(separates(&b, &bt.triangle, v(0), v(8)));
        }
        assert!(matches!(
            bottleneck_triangle(&b, &t, v(0), v(8), v(1)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            bottleneck_triangle(&b, &t, v(0), v(0), v(0)),
            Err(Error::Precondition(_))
        ));
        let edge = b.tets().last().unwrap();
        let outer = edge.verts[edge.address.last().unwrap() as usize];
        assert_eq!(
            bottleneck_triangle(&b, &t, v(0), outer, v(1)),
            Err(Error::OutsideMargin)
        );
    }

    #[test]
    fn bottleneck_small_ball() {
        let b = generate_ball(3).unwrap();
        let t = all_pairs_distances(&b);
        let rep = check_bottleneck_property(&b, &t);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.pairs_skipped_short > 0);
    }

    #[test]
    fn thinness_degenerate_apex_contributes_nothing() {
        let b = generate_ball(2).unwrap();
        let t = all_pairs_distances(&b);
        let scanner = ThinnessScanner::new(&t, 4);
        let w = scanner.words();
        let (mut side, mut a, mut c, mut u) = (vec![0; w], vec![0; w], vec![0; w], vec![0; w]);
        for (x, y) in [(0, 8), (1, 19), (4, 7)] {
            fill_interval(&t, x, y, &mut side);
            for z in [x, y] {
                fill_interval(&t, x, z, &mut a);
                fill_interval(&t, y, z, &mut c);
                for (o, (p, q)) in u.iter_mut().zip(a.iter().zip(&c)) {
                    *o = p | q;
                }
                assert_eq!(scanner.side(&side, &u).0, 0);
            }
        }
        // An apex inside I(x, y) can still leave other geodesics uncovered:
        // 0 – 3 – 8 is a geodesic avoiding I(0, 2) ∪ I(2, 8) = {0, 2, 8}.
        fill_interval(&t, 0, 8, &mut side);
        fill_interval(&t, 0, 2, &mut a);
        fill_interval(&t, 8, 2, &mut c);
        for (o, (p, q)) in u.iter_mut().zip(a.iter().zip(&c)) {
            *o = p | q;
        }
        assert_eq!(scanner.side(&side, &u), (1, 3));
    }

    #[test]
    fn thinness_sampling_is_seeded() {
        let b = generate_ball(2).unwrap();
        let t = all_pairs_distances(&b);
        let opts = ThinnessOptions {
            seed: 7,
            sample_cap: 5000,
            exhaustive_limit: 0,
        };
        let r1 = thinness_report(&t, HalfInteger::from_halves(3), &opts);
        let r2 = thinness_report(&t, HalfInteger::from_halves(3), &opts);
        assert_eq!(r1, r2);
        assert_eq!(r1.mode, ScanMode::Sampled { seed: 7, samples: 5000 });
        let ex = thinness_report(&t, HalfInteger::from_halves(3), &ThinnessOptions::default());
        assert_eq!(ex.mode, ScanMode::Exhaustive);
        assert!(r1.max <= ex.max);
    }

    #[test]
    fn half_integer_display() {
        assert_eq!(HalfInteger::from_halves(3).to_string(), "3/2");
        assert_eq!(HalfInteger::from_integer(3).to_string(), "3");
    }

    #[test]
    fn tree_comparison_root() {
        let b = generate_ball(3).unwrap();
        let t = all_pairs_distances(&b);
        let c = tree_comparison(&b, &t);
        assert!(c.max_difference <= 1);
        for u in 0..4 {
            for w in u + 1..4 {
                assert_eq!(t.d(u, w), 1);
            }
        }
        assert_eq!(c, tree_comparison(&b, &t));
    }
}
