//! Mapping classes as ordered-tetrahedron correspondences, and finite
//! rigidity checks.
//!
//! For any two ordered tetrahedra of `D` there is exactly one mapping class
//! taking one to the other, so an element is recorded by the image of the
//! root tetrahedron with its vertices in slot order. The whole map is then
//! recovered by propagation: once a tetrahedron's image is known, the
//! neighbor across face `i` must go to the neighbor of the image across the
//! image of face `i`, because each triangle lies in exactly two tetrahedra.
//!
//! The finite sets `Y_n` are unions of `T*` over the tetrahedra at tree
//! distance ≤ n − 1 from the root. Locally injective simplicial maps from
//! `Y_n` into a curve-graph ball are enumerated by brute force and compared
//! against propagated elements.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::curve_graph::{CurveGraphBall, CurveVertex, EdgeKey};
use crate::error::{Error, Result};
use crate::tet_tree::{expected_vertex_count, neighbor, DBall, TetAddress, VertexId};

/// Default bound on partial assignments explored by [`enumerate_locally_injective`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000_000;

/// A tetrahedron with its vertices assigned to slots 0–3.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OrderedTet {
    pub address: TetAddress,
    pub order: [VertexId; 4],
}

impl OrderedTet {
    /// The root tetrahedron with slot `i` holding vertex `i`.
    pub fn root() -> Self {
        OrderedTet {
            address: TetAddress::root(),
            order: [VertexId(0), VertexId(1), VertexId(2), VertexId(3)],
        }
    }

    /// Checks that `order` lists exactly the vertices of the tetrahedron at `address`.
    pub fn new(ball: &DBall, address: TetAddress, order: [VertexId; 4]) -> Result<Self> {
        let tet = ball
            .tet(&address)
            .ok_or_else(|| Error::UnknownTetrahedron(address.clone()))?;
        let mut sorted = order;
        sorted.sort();
        if sorted != tet.sorted_verts() {
            return Err(Error::InvalidOrdering(address));
        }
        Ok(OrderedTet { address, order })
    }
}

impl fmt::Display for OrderedTet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.order;
        write!(f, "{}:[{},{},{},{}]", self.address, o[0], o[1], o[2], o[3])
    }
}

/// The mapping class sending the root ordered tetrahedron to `dst`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MappingClassElement {
    dst: OrderedTet,
}

impl MappingClassElement {
    pub fn identity() -> Self {
        MappingClassElement {
            dst: OrderedTet::root(),
        }
    }

    pub fn new(dst: OrderedTet) -> Self {
        MappingClassElement { dst }
    }

    pub fn dst(&self) -> &OrderedTet {
        &self.dst
    }

    pub fn is_identity(&self) -> bool {
        self.dst == OrderedTet::root()
    }
}

impl fmt::Display for MappingClassElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.dst.fmt(f)
    }
}

/// All 24 orderings of `verts`, lexicographic in slot positions.
pub fn orderings(verts: [VertexId; 4]) -> Vec<[VertexId; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let idx = [a, b, c, d];
                    let distinct = (0..4).all(|i| (i + 1..4).all(|j| idx[i] != idx[j]));
                    if distinct {
                        out.push(idx.map(|k| verts[k]));
                    }
                }
            }
        }
    }
    out
}

/// Every element whose `dst` has address length ≤ `depth`, in generation order.
pub fn elements_within(ball: &DBall, depth: usize) -> Vec<MappingClassElement> {
    ball.tets()
        .iter()
        .take_while(|t| t.address.len() <= depth)
        .flat_map(|t| {
            orderings(t.verts).into_iter().map(|order| {
                MappingClassElement::new(OrderedTet {
                    address: t.address.clone(),
                    order,
                })
            })
        })
        .collect()
}

/// A propagated map on the tetrahedra of depth ≤ `domain_radius`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMap {
    domain_radius: usize,
    images: Vec<VertexId>,
    /// Image address per domain tetrahedron, in the domain's generation order.
    tet_images: Vec<TetAddress>,
}

impl VertexMap {
    pub fn domain_radius(&self) -> usize {
        self.domain_radius
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.images.get(v.index()).copied()
    }

    /// Images of vertices `0, 1, 2, …` of the domain.
    pub fn images(&self) -> &[VertexId] {
        &self.images
    }

    pub fn tet_images(&self) -> &[TetAddress] {
        &self.tet_images
    }

    /// Two-sided vertices go to the vertex determined by the image endpoints.
    pub fn curve_image(&self, v: CurveVertex) -> Option<CurveVertex> {
        match v {
            CurveVertex::OneSided(u) => self.get(u).map(CurveVertex::OneSided),
            CurveVertex::TwoSided(e) => Some(CurveVertex::two_sided(self.get(e.lo())?, self.get(e.hi())?)),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, v)| v.index() == i)
    }
}

/// Propagates `e` over all of `domain`, with images looked up in `codomain`.
pub fn propagate_map(e: &MappingClassElement, domain: &DBall, codomain: &DBall) -> Result<VertexMap> {
    propagate_to_depth(e, domain, domain.radius(), codomain)
}

/// Propagates `e` over the tetrahedra of `ball` with address length ≤ `depth`.
pub fn propagate_to_depth(e: &MappingClassElement, ball: &DBall, depth: usize, codomain: &DBall) -> Result<VertexMap> {
    if depth > ball.radius() {
        return Err(Error::BallTooSmall(format!(
            "domain depth {depth} exceeds ball radius {}",
            ball.radius()
        )));
    }
    let too_small = |a: &TetAddress| {
        Error::CodomainTooSmall(format!(
            "image tetrahedron {a} lies outside the radius-{} codomain",
            codomain.radius()
        ))
    };
    let root_image = codomain.tet(&e.dst.address).ok_or_else(|| too_small(&e.dst.address))?;
    let mut sorted = e.dst.order;
    sorted.sort();
    if sorted != root_image.sorted_verts() {
        return Err(Error::InvalidOrdering(e.dst.address.clone()));
    }

    let n_verts = expected_vertex_count(depth);
    let mut images: Vec<Option<VertexId>> = vec![None; n_verts];
    let tets = ball.tets();
    let n_tets = tets.iter().take_while(|t| t.address.len() <= depth).count();
    // Per domain tetrahedron: image address and images of its local positions.
    let mut placed: Vec<(TetAddress, [VertexId; 4])> = Vec::with_capacity(n_tets);

    for (slot, &v) in tets[0].verts.iter().enumerate() {
        images[v.index()] = Some(e.dst.order[slot]);
    }
    placed.push((e.dst.address.clone(), e.dst.order));

    for t in &tets[1..n_tets] {
        let face = t.address.last().expect("non-root") as usize;
        let parent = t.address.parent().expect("non-root");
        let pi = ball.tet_index(&parent).expect("parents precede children");
        let (ref paddr, plocal) = placed[pi];
        let pimage = codomain.tet(paddr).expect("placed tetrahedra exist");
        let k = pimage
            .local_index(plocal[face])
            .expect("image of a local vertex lies in the image tetrahedron");
        let addr = neighbor(paddr, k as u8);
        let image = codomain.tet(&addr).ok_or_else(|| too_small(&addr))?;
        let w = image.verts[k];
        let fresh = t.verts[face];
        match images[fresh.index()] {
            None => images[fresh.index()] = Some(w),
            Some(old) if old == w => {}
            Some(old) => {
                return Err(Error::Precondition(format!(
                    "propagation assigns {fresh} both {old} and {w}"
                )))
            }
        }
        let mut local = plocal;
        local[face] = w;
        placed.push((addr, local));
    }

    Ok(VertexMap {
        domain_radius: depth,
        images: images
            .into_iter()
            .map(|v| v.expect("every vertex of the domain is reached"))
            .collect(),
        tet_images: placed.into_iter().map(|(a, _)| a).collect(),
    })
}

/// The element undoing `e`.
pub fn inverse(e: &MappingClassElement, work: &DBall) -> Result<MappingClassElement> {
    let r = e.dst.address.len();
    need(work, 2 * r, "inverse")?;
    let f = propagate_to_depth(e, work, r, work)?;
    let ti = f
        .tet_images
        .iter()
        .position(|a| a.is_root())
        .expect("an isometry of the tree returns to the root within distance r");
    let t = &work.tets()[ti];
    let mut order = [VertexId(0); 4];
    for &u in &t.verts {
        let img = f.get(u).expect("domain vertex");
        order[img.index()] = u;
    }
    Ok(MappingClassElement::new(OrderedTet {
        address: t.address.clone(),
        order,
    }))
}

/// `b ∘ a`: apply `a`, then `b`.
pub fn compose(a: &MappingClassElement, b: &MappingClassElement, work: &DBall) -> Result<MappingClassElement> {
    let ra = a.dst.address.len();
    need(work, ra + b.dst.address.len(), "compose")?;
    let f = propagate_to_depth(b, work, ra, work)?;
    let ti = work.tet_index(&a.dst.address).expect("within radius");
    Ok(MappingClassElement::new(OrderedTet {
        address: f.tet_images[ti].clone(),
        order: a.dst.order.map(|v| f.get(v).expect("domain vertex")),
    }))
}

fn need(work: &DBall, radius: usize, what: &str) -> Result<()> {
    if work.radius() < radius {
        return Err(Error::BallTooSmall(format!(
            "{what} needs a work ball of radius {radius}, got {}",
            work.radius()
        )));
    }
    Ok(())
}

/// A finite set of curve-graph vertices; for `Y_n` it is the union of `T*`
/// over tetrahedra of address length ≤ n − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidSet {
    pub level: usize,
    pub one_sided: BTreeSet<VertexId>,
    pub two_sided: BTreeSet<EdgeKey>,
}

impl RigidSet {
    pub fn from_parts(level: usize, one_sided: BTreeSet<VertexId>, two_sided: BTreeSet<EdgeKey>) -> Self {
        RigidSet {
            level,
            one_sided,
            two_sided,
        }
    }

    pub fn len(&self) -> usize {
        self.one_sided.len() + self.two_sided.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One-sided vertices first, then two-sided, each ascending.
    pub fn vertices(&self) -> Vec<CurveVertex> {
        self.one_sided
            .iter()
            .map(|&v| CurveVertex::OneSided(v))
            .chain(self.two_sided.iter().map(|&e| CurveVertex::TwoSided(e)))
            .collect()
    }

    pub fn contains(&self, v: CurveVertex) -> bool {
        match v {
            CurveVertex::OneSided(u) => self.one_sided.contains(&u),
            CurveVertex::TwoSided(e) => self.two_sided.contains(&e),
        }
    }

    /// The induced subgraph: `β{u,v}` is adjacent to `u` and `v` when present.
    pub fn edges(&self) -> Vec<(CurveVertex, CurveVertex)> {
        let mut out = Vec::new();
        for &e in &self.two_sided {
            for u in [e.lo(), e.hi()] {
                if self.one_sided.contains(&u) {
                    out.push((CurveVertex::OneSided(u), CurveVertex::TwoSided(e)));
                }
            }
        }
        out.sort();
        out
    }
}

/// `Y_n` for `n ≥ 1`.
pub fn ystar_exhaustion(n: usize, ball: &DBall) -> Result<RigidSet> {
    if n == 0 {
        return Err(Error::Precondition("the exhaustion starts at Y_1".into()));
    }
    if ball.radius() + 1 < n {
        return Err(Error::BallTooSmall(format!(
            "Y_{n} needs radius {}, got {}",
            n - 1,
            ball.radius()
        )));
    }
    let mut one_sided = BTreeSet::new();
    let mut two_sided = BTreeSet::new();
    for t in ball.tets().iter().take_while(|t| t.address.len() < n) {
        one_sided.extend(t.verts);
        for i in 0..4 {
            for j in i + 1..4 {
                two_sided.insert(EdgeKey::new(t.verts[i], t.verts[j]));
            }
        }
    }
    Ok(RigidSet {
        level: n,
        one_sided,
        two_sided,
    })
}

/// A finite map between curve-graph vertices.
pub type CurveMap = BTreeMap<CurveVertex, CurveVertex>;

/// Checks that `map` (defined on all of `src`) is simplicial into `codomain`
/// and injective on the closed star of every source vertex.
pub fn check_locally_injective(
    map: &CurveMap,
    src: &RigidSet,
    codomain: &CurveGraphBall<'_>,
) -> std::result::Result<(), String> {
    let verts = src.vertices();
    for &v in &verts {
        let img = map.get(&v).ok_or_else(|| format!("{v} has no image"))?;
        if !codomain.contains(*img) {
            return Err(format!("image {img} of {v} is outside the codomain"));
        }
    }
    let edges = src.edges();
    for &(a, b) in &edges {
        if !codomain.adjacent(map[&a], map[&b]) {
            return Err(format!("edge {a}–{b} maps to non-edge {}–{}", map[&a], map[&b]));
        }
    }
    let mut stars: BTreeMap<CurveVertex, Vec<CurveVertex>> = verts.iter().map(|&v| (v, vec![v])).collect();
    for &(a, b) in &edges {
        stars.get_mut(&a).expect("vertex").push(b);
        stars.get_mut(&b).expect("vertex").push(a);
    }
    for (v, star) in stars {
        let mut imgs: Vec<CurveVertex> = star.iter().map(|x| map[x]).collect();
        imgs.sort();
        if imgs.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("not injective on the star of {v}"));
        }
    }
    Ok(())
}

/// Source graph prepared for backtracking: vertices in a connected order.
struct SearchPlan {
    order: Vec<CurveVertex>,
    /// For each position, earlier positions adjacent to it.
    back_edges: Vec<Vec<usize>>,
    /// For each position, the positions in its closed star.
    stars: Vec<Vec<usize>>,
}

impl SearchPlan {
    fn new(src: &RigidSet) -> Result<Self> {
        let verts = src.vertices();
        let edges = src.edges();
        let idx: BTreeMap<CurveVertex, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); verts.len()];
        for (a, b) in &edges {
            adj[idx[a]].push(idx[b]);
            adj[idx[b]].push(idx[a]);
        }
        // Greedy order: most placed neighbors first, then nearest to the latest
        // placement, then least. Cycles close as early as possible.
        let mut pos = vec![usize::MAX; verts.len()];
        let mut order = Vec::with_capacity(verts.len());
        pos[0] = 0;
        order.push(0);
        while order.len() < verts.len() {
            let best = (0..verts.len())
                .filter(|&u| pos[u] == usize::MAX)
                .filter_map(|u| {
                    let placed: Vec<usize> = adj[u].iter().map(|&w| pos[w]).filter(|&p| p != usize::MAX).collect();
                    let latest = *placed.iter().max()?;
                    Some((placed.len(), latest, std::cmp::Reverse(u)))
                })
                .max()
                .ok_or_else(|| Error::Precondition("source set must be connected".into()))?;
            let u = best.2 .0;
            pos[u] = order.len();
            order.push(u);
        }
        let back_edges = order
            .iter()
            .enumerate()
            .map(|(i, &u)| adj[u].iter().map(|&w| pos[w]).filter(|&j| j < i).collect())
            .collect();
        let stars = order
            .iter()
            .map(|&u| {
                let mut s: Vec<usize> = adj[u].iter().map(|&w| pos[w]).collect();
                s.push(pos[u]);
                s
            })
            .collect();
        Ok(SearchPlan {
            order: order.into_iter().map(|i| verts[i]).collect(),
            back_edges,
            stars,
        })
    }
}

struct Search<'p, 'c, 'g> {
    plan: &'p SearchPlan,
    cg: &'c CurveGraphBall<'g>,
    assigned: Vec<usize>,
    found: Vec<Vec<usize>>,
    steps: u64,
    cap: u64,
}

impl Search<'_, '_, '_> {
    fn fits(&self, i: usize, c: usize) -> bool {
        let plan = self.plan;
        if !plan.back_edges[i]
            .iter()
            .all(|&j| self.cg.neighbor_indices(self.assigned[j]).contains(&c))
        {
            return false;
        }
        // Local injectivity on every closed star containing position i.
        plan.stars[i].iter().all(|&w| {
            plan.stars[w]
                .iter()
                .all(|&s| s == i || s >= self.assigned.len() || self.assigned[s] != c)
        })
    }

    fn run(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.cap {
            return Err(Error::ResourceCap(self.cap));
        }
        let i = self.assigned.len();
        if i == self.plan.order.len() {
            self.found.push(self.assigned.clone());
            return Ok(());
        }
        let anchor = self.plan.back_edges[i][0];
        let candidates = self.cg.neighbor_indices(self.assigned[anchor]).to_vec();
        for c in candidates {
            if self.fits(i, c) {
                self.assigned.push(c);
                self.run()?;
                self.assigned.pop();
            }
        }
        Ok(())
    }
}

/// Every locally injective simplicial map from `src` into `codomain`, found
/// by unrestricted backtracking (no assumption on where one-sided vertices
/// go), sorted by the images of the source vertices in ascending order.
pub fn enumerate_locally_injective(src: &RigidSet, codomain: &CurveGraphBall<'_>) -> Result<Vec<CurveMap>> {
    enumerate_locally_injective_capped(src, codomain, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_locally_injective_capped(
    src: &RigidSet,
    codomain: &CurveGraphBall<'_>,
    cap: u64,
) -> Result<Vec<CurveMap>> {
    if src.is_empty() {
        return Ok(vec![CurveMap::new()]);
    }
    let plan = SearchPlan::new(src)?;
    let per_start: Vec<Result<Vec<Vec<usize>>>> = (0..codomain.len())
        .into_par_iter()
        .map(|c0| {
            let mut s = Search {
                plan: &plan,
                cg: codomain,
                assigned: vec![c0],
                found: Vec::new(),
                steps: 0,
                cap,
            };
            s.run()?;
            Ok(s.found)
        })
        .collect();
    let mut maps = Vec::new();
    for r in per_start {
        for assignment in r? {
            let map: CurveMap = plan
                .order
                .iter()
                .zip(&assignment)
                .map(|(&v, &c)| (v, codomain.vertex(c)))
                .collect();
            maps.push(map);
        }
    }
    maps.sort_by(|a, b| a.values().cmp(b.values()));
    Ok(maps)
}

/// The element whose propagation agrees with `map` on the root tetrahedron.
pub fn element_from_map(map: &CurveMap, codomain: &DBall) -> Option<MappingClassElement> {
    let mut order = [VertexId(0); 4];
    for (slot, o) in order.iter_mut().enumerate() {
        match map.get(&CurveVertex::OneSided(VertexId(slot as u32)))? {
            CurveVertex::OneSided(v) => *o = *v,
            CurveVertex::TwoSided(_) => return None,
        }
    }
    let t = codomain.tet_spanned_by(order)?;
    Some(MappingClassElement::new(OrderedTet {
        address: t.address.clone(),
        order,
    }))
}

/// `24 × #{tetrahedra of the codomain at depth ≤ r − (n − 1)}`: the number
/// of elements whose image of `Y_n` fits inside a radius-`r` ball.
pub fn expected_map_count(level: usize, codomain_radius: usize) -> usize {
    if level == 0 || codomain_radius + 1 < level {
        return 0;
    }
    24 * crate::tet_tree::expected_tet_count(codomain_radius + 1 - level)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizerReport {
    pub elements_examined: usize,
    pub fixers: Vec<String>,
    pub trivial: bool,
}

/// Tests every element whose `dst` lies within reach of `work` and reports
/// those fixing every vertex of `y`.
pub fn pointwise_stabilizer_check(y: &RigidSet, work: &DBall) -> Result<StabilizerReport> {
    let mut depth = 0;
    for v in y.vertices() {
        let ends = match v {
            CurveVertex::OneSided(u) => vec![u],
            CurveVertex::TwoSided(e) => vec![e.lo(), e.hi()],
        };
        for u in ends {
            if !work.contains_vertex(u) {
                return Err(Error::UnknownVertex(u));
            }
            depth = depth.max(work.vertex_depth(u));
        }
    }
    if work.radius() < depth {
        return Err(Error::BallTooSmall("set extends past the work ball".into()));
    }
    let elements = elements_within(work, work.radius() - depth);
    let fixers: Vec<String> = elements
        .par_iter()
        .filter_map(|e| {
            let f = propagate_to_depth(e, work, depth, work).ok()?;
            y.vertices()
                .iter()
                .all(|&v| f.curve_image(v) == Some(v))
                .then(|| e.to_string())
        })
        .collect();
    let trivial = fixers.len() == 1 && fixers[0] == MappingClassElement::identity().to_string();
    Ok(StabilizerReport {
        elements_examined: elements.len(),
        fixers,
        trivial,
    })
}

/// Outcome of forcing one new tetrahedron during the induction step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForcingOutcome {
    pub address: String,
    /// Locally injective extensions of the identity on `Y_n` to `Y_n ∪ T*`.
    pub extensions: usize,
    pub forced_identity: bool,
}

/// For each tetrahedron at depth `n`, searches all extensions of the identity
/// on `Y_n` to `Y_n ∪ T*` that stay locally injective and simplicial.
pub fn induction_step(n: usize, codomain: &CurveGraphBall<'_>) -> Result<Vec<ForcingOutcome>> {
    let ball = codomain.source();
    if n == 0 || ball.radius() < n {
        return Err(Error::BallTooSmall(format!(
            "induction step at level {n} needs radius ≥ {n}, got {}",
            ball.radius()
        )));
    }
    let y = ystar_exhaustion(n, ball)?;
    let new_tets: Vec<_> = ball.tets().iter().filter(|t| t.address.len() == n).collect();
    new_tets
        .par_iter()
        .map(|t| {
            let face = t.address.last().expect("depth ≥ 1") as usize;
            let fresh = t.verts[face];
            let others: Vec<VertexId> = t.face(face).to_vec();
            let mut ext = y.clone();
            ext.one_sided.insert(fresh);
            for &a in &others {
                ext.two_sided.insert(EdgeKey::new(fresh, a));
            }
            let base: CurveMap = y.vertices().into_iter().map(|v| (v, v)).collect();
            let nb = |v: CurveVertex| codomain.neighbors(v);
            let betas = others
                .iter()
                .map(|&a| CurveVertex::two_sided(fresh, a))
                .collect::<Vec<_>>();

            let mut extensions = Vec::new();
            for b0 in nb(CurveVertex::OneSided(others[0])) {
                for w in nb(b0) {
                    let wn = nb(w);
                    for b1 in nb(CurveVertex::OneSided(others[1]))
                        .into_iter()
                        .filter(|c| wn.contains(c))
                    {
                        for b2 in nb(CurveVertex::OneSided(others[2]))
                            .into_iter()
                            .filter(|c| wn.contains(c))
                        {
                            let mut map = base.clone();
                            map.insert(CurveVertex::OneSided(fresh), w);
                            map.insert(betas[0], b0);
                            map.insert(betas[1], b1);
                            map.insert(betas[2], b2);
                            if check_locally_injective(&map, &ext, codomain).is_ok() {
                                extensions.push(map);
                            }
                        }
                    }
                }
            }
            let forced_identity = extensions.len() == 1 && extensions[0].iter().all(|(k, v)| k == v);
            Ok(ForcingOutcome {
                address: t.address.word(),
                extensions: extensions.len(),
                forced_identity,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RigidityReport {
    pub check: String,
    pub level: usize,
    pub radius: usize,
    pub count_found: usize,
    pub count_expected: usize,
    pub witnesses_of_failure: Vec<String>,
}

impl RigidityReport {
    pub fn passed(&self) -> bool {
        self.count_found == self.count_expected && self.witnesses_of_failure.is_empty()
    }
}

/// Level `n ≤ 2`: enumerate all locally injective maps `Y_n → codomain` and
/// match each with exactly one propagated element. Always: run the induction
/// step from `Y_n` to `Y_{n+1}` when the codomain reaches depth `n`.
pub fn rigidity_check_level(n: usize, codomain: &CurveGraphBall<'_>) -> Result<Vec<RigidityReport>> {
    let ball = codomain.source();
    let mut reports = Vec::new();
    if n <= 2 {
        reports.push(enumeration_report(n, codomain)?);
    }
    if ball.radius() >= n {
        let outcomes = induction_step(n, codomain)?;
        let witnesses = outcomes
            .iter()
            .filter(|o| !o.forced_identity)
            .map(|o| format!("{}: {} extensions", o.address, o.extensions))
            .collect();
        reports.push(RigidityReport {
            check: "induction_step".into(),
            level: n,
            radius: ball.radius(),
            count_found: outcomes.iter().filter(|o| o.forced_identity).count(),
            count_expected: 4 * 3usize.pow(n as u32 - 1),
            witnesses_of_failure: witnesses,
        });
    }
    Ok(reports)
}

fn enumeration_report(n: usize, codomain: &CurveGraphBall<'_>) -> Result<RigidityReport> {
    let ball = codomain.source();
    let y = ystar_exhaustion(n, ball)?;
    let maps = enumerate_locally_injective(&y, codomain)?;
    let mut witnesses = Vec::new();
    let mut seen = BTreeSet::new();
    for map in &maps {
        let describe = || {
            map.iter()
                .take(4)
                .map(|(k, v)| format!("{k}->{v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let Some(e) = element_from_map(map, ball) else {
            witnesses.push(format!("no element matches map {}", describe()));
            continue;
        };
        let ok = propagate_to_depth(&e, ball, n - 1, ball)
            .map(|f| map.iter().all(|(&k, &v)| f.curve_image(k) == Some(v)))
            .unwrap_or(false);
        if !ok {
            witnesses.push(format!("map {} differs from {e}", describe()));
        }
        if !seen.insert(e.clone()) {
            witnesses.push(format!("element {e} matched twice"));
        }
    }
    Ok(RigidityReport {
        check: "enumerate_locally_injective".into(),
        level: n,
        radius: ball.radius(),
        count_found: maps.len(),
        count_expected: expected_map_count(n, ball.radius()),
        witnesses_of_failure: witnesses,
    })
}

/// Every element with `dst` at depth ≤ `depth` sends the root ordered
/// tetrahedron to its own `dst`, distinct elements have distinct images, and
/// exactly one element fixes the root pointwise (24 fix it setwise).
pub fn torsor_check(work: &DBall, depth: usize) -> Result<RigidityReport> {
    need(work, depth, "torsor check")?;
    let elements = elements_within(work, depth);
    let root = OrderedTet::root();
    let mut witnesses = Vec::new();
    let mut images = BTreeSet::new();
    let (mut setwise, mut pointwise) = (0, 0);
    for e in &elements {
        let f = propagate_to_depth(e, work, 0, work)?;
        let image = OrderedTet {
            address: f.tet_images[0].clone(),
            order: root.order.map(|v| f.get(v).expect("root vertex")),
        };
        if &image != e.dst() {
            witnesses.push(format!("{e} sends the root to {image}"));
        }
        if !images.insert(image.clone()) {
            witnesses.push(format!("{image} reached twice"));
        }
        if image.address.is_root() {
            setwise += 1;
            pointwise += usize::from(image == root);
        }
    }
    if setwise != 24 || pointwise != 1 {
        witnesses.push(format!("root fixed setwise by {setwise}, pointwise by {pointwise}"));
    }
    Ok(RigidityReport {
        check: "ordered_tet_bijection".into(),
        level: depth,
        radius: work.radius(),
        count_found: images.len(),
        count_expected: 24 * crate::tet_tree::expected_tet_count(depth),
        witnesses_of_failure: witnesses,
    })
}

/// Draws `pairs` seeded triples of elements with `dst` at depth ≤ `depth` and
/// checks identity, inverse and associativity laws, and that composing
/// elements agrees with composing their propagated maps on the root's
/// neighbors. Needs a work ball of radius at least `3 · depth`.
pub fn group_law_check(work: &DBall, depth: usize, pairs: usize, seed: u64) -> Result<RigidityReport> {
    use rand::{Rng, SeedableRng};
    need(work, 3 * depth, "group law check")?;
    let elements = elements_within(work, depth);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<[usize; 3]> = (0..pairs)
        .map(|_| std::array::from_fn(|_| rng.gen_range(0..elements.len())))
        .collect();
    let id = MappingClassElement::identity();
    let witnesses: Vec<String> = draws
        .par_iter()
        .map(|&[i, j, k]| -> Result<Option<String>> {
            let (a, b, c) = (&elements[i], &elements[j], &elements[k]);
            let ab = compose(a, b, work)?;
            let inv = inverse(a, work)?;
            let laws = [
                ("left identity", compose(&id, a, work)? == *a),
                ("right identity", compose(a, &id, work)? == *a),
                ("right inverse", compose(a, &inv, work)? == id),
                ("left inverse", compose(&inv, a, work)? == id),
                (
                    "associativity",
                    compose(&ab, c, work)? == compose(a, &compose(b, c, work)?, work)?,
                ),
            ];
            if let Some((law, _)) = laws.iter().find(|(_, ok)| !ok) {
                return Ok(Some(format!("{law} fails for {a}, {b}, {c}")));
            }
            let fa = propagate_to_depth(a, work, 1, work)?;
            let fb = propagate_to_depth(b, work, depth + 1, work)?;
            let fab = propagate_to_depth(&ab, work, 1, work)?;
            let agrees = fa
                .images()
                .iter()
                .zip(fab.images())
                .all(|(&x, &y)| fb.get(x) == Some(y));
            Ok((!agrees).then(|| format!("compose({a}, {b}) disagrees with map composition")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(RigidityReport {
        check: "group_laws".into(),
        level: depth,
        radius: work.radius(),
        count_found: pairs - witnesses.len(),
        count_expected: pairs,
        witnesses_of_failure: witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_graph::subdivide;
    use crate::tet_tree::generate_ball;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn addr(s: &str) -> TetAddress {
        s.parse().unwrap()
    }

    #[test]
    fn identity_propagates_to_identity() {
        let b = generate_ball(3).unwrap();
        let f = propagate_map(&MappingClassElement::identity(), &b, &b).unwrap();
        assert!(f.is_identity());
        assert_eq!(
            f.tet_images(),
            b.tets().iter().map(|t| t.address.clone()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn slot_swap_moves_face_zero_to_face_one() {
        let b = generate_ball(2).unwrap();
        let dom = b.prefix(1);
        let e = MappingClassElement::new(OrderedTet::new(&b, TetAddress::root(), [v(1), v(0), v(2), v(3)]).unwrap());
        let f = propagate_map(&e, &dom, &b).unwrap();
        let i0 = dom.tet_index(&addr("0")).unwrap();
        assert_eq!(f.tet_images()[i0], addr("1"));
        // fresh vertex 4 of "0" goes to fresh vertex 5 of "1"
        assert_eq!(f.get(v(4)), Some(v(5)));
    }

    #[test]
    fn codomain_too_small() {
        let b = generate_ball(2).unwrap();
        let small = b.prefix(1);
        let e = MappingClassElement::new(OrderedTet::new(&b, addr("0"), [v(4), v(1), v(2), v(3)]).unwrap());
        assert!(matches!(propagate_map(&e, &b, &small), Err(Error::CodomainTooSmall(_))));
    }

    #[test]
    fn ordered_tet_validation() {
        let b = generate_ball(1).unwrap();
        assert!(OrderedTet::new(&b, addr("0"), [v(0), v(1), v(2), v(3)]).is_err());
        assert!(OrderedTet::new(&b, addr("01"), [v(0), v(1), v(2), v(3)]).is_err());
        assert_eq!(orderings([v(0), v(1), v(2), v(3)]).len(), 24);
    }

    #[test]
    fn inverse_and_compose() {
        let b = generate_ball(4).unwrap();
        let id = MappingClassElement::identity();
        for e in elements_within(&b, 2).into_iter().step_by(7) {
            let inv = inverse(&e, &b).unwrap();
            assert_eq!(compose(&e, &inv, &b).unwrap(), id);
            assert_eq!(compose(&inv, &e, &b).unwrap(), id);
            assert_eq!(compose(&id, &e, &b).unwrap(), e);
            assert_eq!(compose(&e, &id, &b).unwrap(), e);
        }
        let r = MappingClassElement::new(OrderedTet::new(&b, addr("0"), [v(4), v(1), v(2), v(3)]).unwrap());
        let s = MappingClassElement::new(OrderedTet::new(&b, addr("1"), [v(0), v(5), v(2), v(3)]).unwrap());
        let rs = compose(&r, &s, &b).unwrap();
        assert!(rs.dst().address.len() <= 2);
        assert!(matches!(compose(&r, &s, &b.prefix(1)), Err(Error::BallTooSmall(_))));
    }

    #[test]
    fn exhaustion_counts() {
        let b = generate_ball(3).unwrap();
        let y1 = ystar_exhaustion(1, &b).unwrap();
        assert_eq!((y1.one_sided.len(), y1.two_sided.len()), (4, 6));
        let y2 = ystar_exhaustion(2, &b).unwrap();
        assert_eq!((y2.one_sided.len(), y2.two_sided.len()), (8, 18));
        assert!(ystar_exhaustion(5, &b).is_err());
    }

    #[test]
    fn root_enumeration() {
        let b = generate_ball(0).unwrap();
        let cg = subdivide(&b);
        let y = ystar_exhaustion(1, &b).unwrap();
        let maps = enumerate_locally_injective(&y, &cg).unwrap();
        assert_eq!(maps.len(), 24);
        for m in &maps {
            assert!(check_locally_injective(m, &y, &cg).is_ok());
            let mut imgs: Vec<_> = m.values().collect();
            imgs.sort();
            imgs.dedup();
            assert_eq!(imgs.len(), 10);
        }
    }

    #[test]
    fn corrupted_map_rejected() {
        let b = generate_ball(1).unwrap();
        let cg = subdivide(&b);
        let y = ystar_exhaustion(1, &b).unwrap();
        let mut map: CurveMap = y.vertices().into_iter().map(|x| (x, x)).collect();
        assert!(check_locally_injective(&map, &y, &cg).is_ok());
        let (b01, b02) = (CurveVertex::two_sided(v(0), v(1)), CurveVertex::two_sided(v(0), v(2)));
        map.insert(b01, b02);
        map.insert(b02, b01);
        assert!(check_locally_injective(&map, &y, &cg).is_err());
    }

    #[test]
    fn stabilizers() {
        let b = generate_ball(3).unwrap();
        for n in [1, 2] {
            let y = ystar_exhaustion(n, &b).unwrap();
            assert!(pointwise_stabilizer_check(&y, &b).unwrap().trivial);
        }
        let single = RigidSet::from_parts(0, BTreeSet::from([v(0)]), BTreeSet::new());
        let rep = pointwise_stabilizer_check(&single, &b).unwrap();
        assert!(!rep.trivial);
        assert!(rep.fixers.contains(&"ε:[0,2,1,3]".to_string()));
    }

    #[test]
    fn torsor_and_group_laws() {
        let b = generate_ball(4).unwrap();
        let t = torsor_check(&b, 2).unwrap();
        assert!(t.passed(), "{t:?}");
        assert_eq!(t.count_found, 408);
        let g = group_law_check(&b, 1, 50, 7).unwrap();
        assert!(g.passed(), "{g:?}");
        assert!(group_law_check(&b, 2, 1, 7).is_err());
    }

    #[test]
    fn expected_counts() {
        assert_eq!(expected_map_count(1, 0), 24);
        assert_eq!(expected_map_count(1, 1), 120);
        assert_eq!(expected_map_count(2, 2), 120);
        assert_eq!(expected_map_count(2, 3), 408);
    }
}
