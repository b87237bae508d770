//! Exhaustive structural checks on a generated ball and its subdivision.
//!
//! Every check produces a [`CheckRow`]; the rows of a suite come out in a
//! fixed order whatever order the checks finish in.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::curve_graph::{subdivide, CurveGraphBall, CurveVertex};
use crate::farey::{farey_adjacent, mobius_oracle, FareyTriangle, Matrix2, OrderedFareyTriangle};
use crate::tet_tree::{
    edge_cofaces, expected_edge_count, expected_tet_count, expected_vertex_count, generate_ball, link, neighbor,
    theta_labeling, tree_distance, triangle_cofaces, DBall, ThetaLabeling, VertexId,
};
use crate::Result;

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub radius: usize,
    pub examined: u64,
    pub worst: String,
    pub witness: String,
    pub passed: bool,
}

impl CheckRow {
    fn new(name: &str, radius: usize, examined: u64, worst: impl ToString, witness: Option<String>) -> Self {
        CheckRow {
            name: name.into(),
            radius,
            examined,
            worst: worst.to_string(),
            passed: witness.is_none(),
            witness: witness.unwrap_or_default(),
        }
    }
}

pub const CSV_HEADER: &str = "name,radius,examined,worst,witness,passed";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header plus one line per row.
pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&r.name),
            r.radius,
            r.examined,
            csv_field(&r.worst),
            csv_field(&r.witness),
            r.passed
        ));
    }
    out
}

/// Counts from direct enumeration against `2·3^n − 1`, `2·3^n + 2`, `6·3^n`
/// and `12·3^n` subdivision edges.
pub fn check_counts(ball: &DBall, cg: &CurveGraphBall<'_>) -> CheckRow {
    let n = ball.radius();
    let tets = ball.tets().len();
    let verts: HashSet<VertexId> = ball.tets().iter().flat_map(|t| t.verts).collect();
    let edges: HashSet<(VertexId, VertexId)> = ball
        .tets()
        .iter()
        .flat_map(|t| {
            let v = t.sorted_verts();
            (0..4).flat_map(move |i| (i + 1..4).map(move |j| (v[i], v[j])))
        })
        .collect();
    let found = [tets, verts.len(), edges.len(), cg.two_sided_count(), cg.edges().len()];
    let expected = [
        expected_tet_count(n),
        expected_vertex_count(n),
        expected_edge_count(n),
        expected_edge_count(n),
        2 * expected_edge_count(n),
    ];
    let worst = format!(
        "tets={} one_sided={} d_edges={} two_sided={} c_edges={}",
        found[0], found[1], found[2], found[3], found[4]
    );
    let witness = (found != expected).then(|| format!("expected {expected:?}"));
    CheckRow::new("counts", n, 1, worst, witness)
}

/// Every curve-graph edge joins a one-sided vertex to a two-sided one.
pub fn check_bipartite(cg: &CurveGraphBall<'_>) -> CheckRow {
    let mut bad = None;
    let mut examined = 0;
    for (i, &v) in cg.vertices().iter().enumerate() {
        for &j in cg.neighbor_indices(i) {
            examined += 1;
            if v.is_one_sided() == cg.vertex(j).is_one_sided() && bad.is_none() {
                bad = Some(format!("{v} -- {}", cg.vertex(j)));
            }
        }
    }
    CheckRow::new("bipartite", cg.source().radius(), examined / 2, "-", bad)
}

pub fn check_two_sided_degree(cg: &CurveGraphBall<'_>) -> CheckRow {
    let mut worst = 0;
    let mut bad = None;
    for &v in cg.vertices().iter().filter(|v| !v.is_one_sided()) {
        let d = cg.degree(v);
        worst = worst.max(d);
        if d != 2 && bad.is_none() {
            bad = Some(format!("{v} has degree {d}"));
        }
    }
    CheckRow::new(
        "two_sided_degree",
        cg.source().radius(),
        cg.two_sided_count() as u64,
        worst,
        bad,
    )
}

/// For every D-edge, the two one-sided endpoints have exactly one common
/// neighbor in the curve graph, and it is the determined two-sided vertex.
pub fn check_determined_vertex(cg: &CurveGraphBall<'_>) -> CheckRow {
    let edges = cg.source().edges();
    let mut bad = None;
    for &(u, w) in &edges {
        let a: BTreeSet<CurveVertex> = cg.neighbors(CurveVertex::OneSided(u)).into_iter().collect();
        let common: Vec<CurveVertex> = cg
            .neighbors(CurveVertex::OneSided(w))
            .into_iter()
            .filter(|x| a.contains(x))
            .collect();
        if common != [CurveVertex::two_sided(u, w)] && bad.is_none() {
            bad = Some(format!("{u},{w}: common neighbors {common:?}"));
        }
    }
    CheckRow::new(
        "determined_vertex_unique",
        cg.source().radius(),
        edges.len() as u64,
        "-",
        bad,
    )
}

/// Triangles whose both sides are in the ball have exactly two cofaces, and
/// those are tree-adjacent; boundary triangles have one.
pub fn check_triangle_cofaces(ball: &DBall) -> CheckRow {
    let n = ball.radius();
    let mut seen = HashSet::new();
    let mut bad = None;
    let mut interior = 0u64;
    for t in ball.tets() {
        for face in 0..4 {
            let mut tri = t.face(face);
            tri.sort();
            if !seen.insert(tri) {
                continue;
            }
            let across = neighbor(&t.address, face as u8);
            let inside = across.len() <= n;
            let cofaces = match triangle_cofaces(ball, tri) {
                Ok(c) => c,
                Err(e) => {
                    bad.get_or_insert_with(|| format!("{tri:?}: {e}"));
                    continue;
                }
            };
            let ok = if inside {
                interior += 1;
                cofaces.len() == 2 && cofaces.contains(&across) && tree_distance(&cofaces[0], &cofaces[1]) == 1
            } else {
                cofaces.len() == 1
            };
            if !ok {
                bad.get_or_insert_with(|| format!("{tri:?}: cofaces {cofaces:?}"));
            }
        }
    }
    CheckRow::new(
        "triangle_cofaces",
        n,
        seen.len() as u64,
        format!("interior={interior}"),
        bad,
    )
}

/// Lists every 4-clique of the 1-skeleton, checks each spans a tetrahedron of
/// the ball, and checks that no 5-clique exists.
pub fn check_cliques(ball: &DBall) -> CheckRow {
    let (fours, fives): (Vec<[VertexId; 4]>, u64) = ball
        .vertices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| {
            let up = |x: VertexId| ball.neighbors(x).iter().copied().filter(move |&y| y > x);
            let mut fours = Vec::new();
            let mut fives = 0;
            for b in up(a) {
                for c in up(b).filter(|&c| ball.adjacent(a, c)) {
                    for d in up(c).filter(|&d| ball.adjacent(a, d) && ball.adjacent(b, d)) {
                        fours.push([a, b, c, d]);
                        fives += up(d)
                            .filter(|&e| [a, b, c].iter().all(|&x| ball.adjacent(x, e)))
                            .count() as u64;
                    }
                }
            }
            (fours, fives)
        })
        .reduce(
            || (Vec::new(), 0),
            |mut l, r| {
                l.0.extend(r.0);
                (l.0, l.1 + r.1)
            },
        );
    let stray = fours.iter().find(|q| ball.tet_spanned_by(**q).is_none());
    let witness = if fives > 0 {
        Some(format!("{fives} five-cliques"))
    } else if let Some(q) = stray {
        Some(format!("4-clique {q:?} is not a tetrahedron"))
    } else if fours.len() != ball.tets().len() {
        Some(format!(
            "{} four-cliques for {} tetrahedra",
            fours.len(),
            ball.tets().len()
        ))
    } else {
        None
    };
    let max = if fives > 0 {
        5
    } else if fours.is_empty() {
        0
    } else {
        4
    };
    CheckRow::new("max_clique", ball.radius(), fours.len() as u64, max, witness)
}

/// Each vertex support is a subtree: exactly one member has its parent outside.
pub fn check_support_connectivity(ball: &DBall) -> CheckRow {
    let mut worst = 0;
    let mut bad = None;
    for v in ball.vertices() {
        let support = ball.vertex_support(v);
        let members: HashSet<usize> = support.iter().copied().collect();
        let tops = support
            .iter()
            .filter(|&&i| {
                ball.tets()[i]
                    .address
                    .parent()
                    .and_then(|p| ball.tet_index(&p))
                    .is_none_or(|p| !members.contains(&p))
            })
            .count();
        worst = worst.max(tops);
        if tops != 1 && bad.is_none() {
            bad = Some(format!("support of {v} has {tops} components"));
        }
    }
    CheckRow::new(
        "support_connectivity",
        ball.radius(),
        ball.vertex_count() as u64,
        worst,
        bad,
    )
}

/// `ball` agrees with a freshly generated ball of the next radius on every
/// tetrahedron of address length ≤ radius, and one-sided degrees only grow.
pub fn check_prefix_stability(ball: &DBall) -> Result<CheckRow> {
    let n = ball.radius();
    let next = generate_ball(n + 1)?;
    let mut bad = None;
    let restricted = next.prefix(n);
    if restricted.tets() != ball.tets() {
        bad = Some("tetrahedra differ".to_string());
    }
    for v in ball.vertices() {
        if next.neighbors(v).len() < ball.neighbors(v).len() && bad.is_none() {
            bad = Some(format!("degree of {v} shrinks"));
        }
    }
    Ok(CheckRow::new("prefix_stability", n, ball.tets().len() as u64, "-", bad))
}

/// Vertices whose link is labeled through at least one full layer of tetrahedra.
pub fn theta_candidates(ball: &DBall) -> Vec<VertexId> {
    let n = ball.radius();
    ball.vertices()
        .filter(|&v| n >= 1 && ball.vertex_depth(v) < n)
        .collect()
}

/// Labels the link of `v` from its creating tetrahedron.
pub fn default_labeling(ball: &DBall, v: VertexId) -> Result<ThetaLabeling> {
    let t = ball.creator(v);
    let base: Vec<VertexId> = t.verts.iter().copied().filter(|&w| w != v).collect();
    theta_labeling(ball, v, [base[0], base[1], base[2]])
}

/// Checks one labeling: injective, and link edges correspond exactly to
/// Farey-adjacent pairs of labels. Returns the number of pairs examined.
pub fn check_theta_bijection(ball: &DBall, lab: &ThetaLabeling) -> std::result::Result<u64, String> {
    let lk = link(ball, lab.center).map_err(|e| e.to_string())?;
    let verts: Vec<VertexId> = lk.vertices.clone();
    if lab.labels.len() != verts.len() || verts.iter().any(|w| !lab.labels.contains_key(w)) {
        return Err(format!(
            "labels cover {} of {} link vertices",
            lab.labels.len(),
            verts.len()
        ));
    }
    let distinct: BTreeSet<_> = lab.labels.values().collect();
    if distinct.len() != verts.len() {
        return Err("labeling is not injective".into());
    }
    let edges: HashSet<(VertexId, VertexId)> = lk.edges.iter().copied().collect();
    let mut pairs = 0;
    for (i, &a) in verts.iter().enumerate() {
        for &b in &verts[i + 1..] {
            pairs += 1;
            let linked = edges.contains(&(a.min(b), a.max(b)));
            if linked != farey_adjacent(&lab.labels[&a], &lab.labels[&b]) {
                return Err(format!(
                    "{a}:{} and {b}:{} link-adjacent={linked}",
                    lab.labels[&a], lab.labels[&b]
                ));
            }
        }
    }
    Ok(pairs)
}

/// Relabels from the last tetrahedron of the support and checks the two
/// labelings differ by the unimodular map sending one base to the other.
pub fn check_theta_mobius(ball: &DBall, v: VertexId, lab: &ThetaLabeling) -> std::result::Result<(), String> {
    let last = &ball.tets()[*ball.vertex_support(v).last().expect("nonempty support")];
    let base: Vec<VertexId> = last.verts.iter().copied().filter(|&w| w != v).rev().collect();
    let other = theta_labeling(ball, v, [base[0], base[1], base[2]]).map_err(|e| e.to_string())?;
    let src = OrderedFareyTriangle::new(
        lab.labels[&base[0]].clone(),
        lab.labels[&base[1]].clone(),
        lab.labels[&base[2]].clone(),
    )
    .map_err(|e| e.to_string())?;
    let m = Matrix2::between(&src, &OrderedFareyTriangle::base());
    for (w, s) in &lab.labels {
        let image = mobius_oracle(&m, s).map_err(|e| e.to_string())?;
        if other.labels.get(w) != Some(&image) {
            return Err(format!(
                "{w}: oracle gives {image}, relabeling gives {:?}",
                other.labels.get(w)
            ));
        }
    }
    Ok(())
}

/// Edge cofaces at `v` correspond to the labeled Farey triangles containing
/// the label of the other endpoint.
pub fn check_edge_cofaces(ball: &DBall, lab: &ThetaLabeling) -> std::result::Result<u64, String> {
    let v = lab.center;
    let mut examined = 0;
    for &u in ball.neighbors(v) {
        let cofaces = edge_cofaces(ball, v, u).map_err(|e| e.to_string())?;
        let su = &lab.labels[&u];
        let mut from_tets = BTreeSet::new();
        for a in &cofaces {
            let t = ball.tet(a).expect("coface exists");
            let others: Vec<_> = t
                .verts
                .iter()
                .filter(|&&w| w != v)
                .map(|w| lab.labels[w].clone())
                .collect();
            let tri = FareyTriangle::new(others[0].clone(), others[1].clone(), others[2].clone())
                .map_err(|e| format!("coface {a} labels no Farey triangle: {e}"))?;
            from_tets.insert(tri);
        }
        let near: Vec<(&VertexId, _)> = lab.labels.iter().filter(|(_, s)| farey_adjacent(s, su)).collect();
        let mut from_labels = BTreeSet::new();
        for (i, (_, a)) in near.iter().enumerate() {
            for (_, b) in &near[i + 1..] {
                if farey_adjacent(a, b) {
                    from_labels
                        .insert(FareyTriangle::new(su.clone(), (*a).clone(), (*b).clone()).expect("pairwise adjacent"));
                }
            }
        }
        examined += 1;
        if from_tets.len() != cofaces.len() || from_tets != from_labels {
            return Err(format!(
                "edge {v},{u}: {} cofaces, {} labeled Farey triangles",
                cofaces.len(),
                from_labels.len()
            ));
        }
    }
    Ok(examined)
}

/// Theta labeling, Möbius cross-validation and edge-coface bijection at
/// every vertex of [`theta_candidates`].
pub fn check_theta_links(ball: &DBall) -> Vec<CheckRow> {
    let n = ball.radius();
    let vs = theta_candidates(ball);
    let results: Vec<_> = vs
        .par_iter()
        .map(|&v| {
            let lab = default_labeling(ball, v).map_err(|e| format!("{v}: {e}"));
            let bij = lab
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|l| check_theta_bijection(ball, l).map_err(|e| format!("{v}: {e}")));
            let mob = lab
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|l| check_theta_mobius(ball, v, l).map_err(|e| format!("{v}: {e}")));
            let cof = lab
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|l| check_edge_cofaces(ball, l).map_err(|e| format!("{v}: {e}")));
            let size = lab.as_ref().map(|l| l.labels.len()).unwrap_or(0);
            (bij, mob, cof, size)
        })
        .collect();
    let largest = results.iter().map(|r| r.3).max().unwrap_or(0);
    let pairs: u64 = results.iter().filter_map(|r| r.0.as_ref().ok()).sum();
    let edges: u64 = results.iter().filter_map(|r| r.2.as_ref().ok()).sum();
    vec![
        CheckRow::new(
            "theta_edge_bijection",
            n,
            pairs,
            format!("vertices={} largest_link={largest}", vs.len()),
            results.iter().find_map(|r| r.0.clone().err()),
        ),
        CheckRow::new(
            "theta_mobius_oracle",
            n,
            vs.len() as u64,
            "-",
            results.iter().find_map(|r| r.1.clone().err()),
        ),
        CheckRow::new(
            "edge_cofaces_farey",
            n,
            edges,
            "-",
            results.iter().find_map(|r| r.2.clone().err()),
        ),
    ]
}

/// The full structural suite at radius `n`, in a fixed row order.
pub fn structural_suite(n: usize) -> Result<Vec<CheckRow>> {
    let ball = generate_ball(n)?;
    let cg = subdivide(&ball);
    let (mut rows, rest) = rayon::join(
        || {
            vec![
                check_counts(&ball, &cg),
                check_bipartite(&cg),
                check_two_sided_degree(&cg),
                check_determined_vertex(&cg),
                check_triangle_cofaces(&ball),
                check_cliques(&ball),
                check_support_connectivity(&ball),
            ]
        },
        || -> Result<Vec<CheckRow>> {
            let mut r = vec![check_prefix_stability(&ball)?];
            r.extend(check_theta_links(&ball));
            Ok(r)
        },
    );
    rows.extend(rest?);
    Ok(rows)
}
