use curvecomplex::curve_graph::{subdivide, CurveVertex};
use curvecomplex::farey::{
    common_neighbors, farey_adjacent, farey_ball, mediant, mobius_oracle, ordered_triangle_map, triangle_unfold,
    FareyTriangle, Matrix2, OrderedFareyTriangle, Slope,
};
use curvecomplex::rigidity::{compose, elements_within, inverse, propagate_to_depth, MappingClassElement};
use curvecomplex::tet_tree::{generate_ball, neighbor, tree_distance, tree_path, DBall, TetAddress};
use proptest::prelude::*;
use std::sync::OnceLock;

fn ball5() -> &'static DBall {
    static B: OnceLock<DBall> = OnceLock::new();
    B.get_or_init(|| generate_ball(5).unwrap())
}

fn reduced_word(max_len: usize) -> impl Strategy<Value = TetAddress> {
    prop::collection::vec(0u8..4, 0..max_len).prop_map(|raw| {
        let mut a = TetAddress::root();
        for f in raw {
            // skip immediate backtracking
            let f = if a.last() == Some(f) { (f + 1) % 4 } else { f };
            a = neighbor(&a, f);
        }
        a
    })
}

fn slope() -> impl Strategy<Value = Slope> {
    (-200i64..200, 0i64..200)
        .prop_filter("0/0", |(p, q)| *p != 0 || *q != 0)
        .prop_map(|(p, q)| Slope::new(p, q).unwrap())
}

/// Unfolds from the base triangle across the chosen edge at each step.
fn walk(choices: &[usize]) -> FareyTriangle {
    let mut t = FareyTriangle::base();
    for &c in choices {
        let edges = t.edges();
        let ((a, b), _) = edges[c % 3];
        let (a, b) = (a.clone(), b.clone());
        t = triangle_unfold(&t, (&a, &b)).unwrap();
    }
    t
}

proptest! {
    #[test]
    fn neighbor_is_an_involution(a in reduced_word(10), f in 0u8..4) {
        let b = neighbor(&a, f);
        prop_assert_eq!(tree_distance(&a, &b), 1);
        prop_assert_eq!(neighbor(&b, f), a);
    }

    #[test]
    fn tree_paths_are_geodesics(a in reduced_word(8), b in reduced_word(8)) {
        let p = tree_path(&a, &b);
        prop_assert_eq!(p.len(), tree_distance(&a, &b) + 1);
        prop_assert_eq!(p.first(), Some(&a));
        prop_assert_eq!(p.last(), Some(&b));
        for w in p.windows(2) {
            prop_assert_eq!(tree_distance(&w[0], &w[1]), 1);
        }
    }

    #[test]
    fn address_text_round_trip(a in reduced_word(10)) {
        prop_assert_eq!(a.to_string().parse::<TetAddress>().unwrap(), a);
    }

    #[test]
    fn slope_text_round_trip(s in slope()) {
        prop_assert_eq!(s.to_string().parse::<Slope>().unwrap(), s);
    }

    #[test]
    fn mediant_and_common_neighbors(choices in prop::collection::vec(0usize..3, 0..10), k in 0usize..3) {
        let t = walk(&choices);
        let ((a, b), c) = t.edges()[k];
        prop_assert!(farey_adjacent(a, b) && farey_adjacent(b, a));
        let m = mediant(a, b).unwrap();
        prop_assert!(farey_adjacent(&m, a) && farey_adjacent(&m, b));
        let both = common_neighbors(a, b).unwrap();
        prop_assert!(both.contains(c));
        prop_assert!(both.contains(&m) || both.contains(&mediant(b, a).unwrap()));
    }

    /// Parallel unfolding agrees with the fractional-linear oracle on a patch.
    #[test]
    fn propagation_matches_mobius(choices in prop::collection::vec(0usize..3, 0..8), perm in 0usize..6) {
        let t = walk(&choices);
        let v = t.vertices().clone();
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let o = orders[perm];
        let dst = OrderedFareyTriangle::new(v[o[0]].clone(), v[o[1]].clone(), v[o[2]].clone()).unwrap();
        let src = OrderedFareyTriangle::base();
        let domain = farey_ball(&FareyTriangle::base(), 3).unwrap();
        let map = ordered_triangle_map(&src, &dst, &domain).unwrap();
        let m = Matrix2::between(&src, &dst);
        prop_assert_eq!(map.len(), domain.slopes().len());
        for (s, img) in map.iter() {
            prop_assert_eq!(&mobius_oracle(&m, s).unwrap(), img);
        }
    }

    /// Restricting a propagation on a larger domain gives the smaller propagation.
    #[test]
    fn propagation_commutes_with_restriction(i in 0usize..(17 * 24)) {
        let b = ball5();
        let e = &elements_within(b, 2)[i];
        let small = propagate_to_depth(e, b, 2, b).unwrap();
        let large = propagate_to_depth(e, b, 3, b).unwrap();
        prop_assert_eq!(&large.images()[..small.images().len()], small.images());
        prop_assert_eq!(&large.tet_images()[..small.tet_images().len()], small.tet_images());
    }

    /// Propagated maps are injective, preserve D-adjacency both ways, and send
    /// determined two-sided vertices to determined two-sided vertices.
    #[test]
    fn propagation_is_simplicial(i in 0usize..(17 * 24)) {
        let b = ball5();
        let e = &elements_within(b, 2)[i];
        let dom = b.prefix(3);
        let f = propagate_to_depth(e, b, 3, b).unwrap();
        let mut seen = std::collections::HashSet::new();
        for v in dom.vertices() {
            prop_assert!(seen.insert(f.get(v).unwrap()));
        }
        let cg = subdivide(b);
        for (u, w) in dom.edges() {
            let (fu, fw) = (f.get(u).unwrap(), f.get(w).unwrap());
            prop_assert!(b.adjacent(fu, fw));
            let beta = CurveVertex::two_sided(u, w);
            prop_assert_eq!(f.curve_image(beta), Some(CurveVertex::two_sided(fu, fw)));
            prop_assert!(cg.contains(f.curve_image(beta).unwrap()));
        }
        for (k, t) in dom.tets().iter().enumerate() {
            let img = b.tet(&f.tet_images()[k]).unwrap();
            let mut mapped = t.verts.map(|v| f.get(v).unwrap());
            mapped.sort();
            prop_assert_eq!(mapped, img.sorted_verts());
        }
        let images: std::collections::HashSet<_> = dom.vertices().map(|v| f.get(v).unwrap()).collect();
        for x in dom.vertices() {
            for y in dom.vertices() {
                if x < y {
                    let (fx, fy) = (f.get(x).unwrap(), f.get(y).unwrap());
                    prop_assert_eq!(dom.adjacent(x, y), b.adjacent(fx, fy) && images.contains(&fy));
                }
            }
        }
    }

    #[test]
    fn group_laws(i in 0usize..(17 * 24), j in 0usize..(17 * 24), k in 0usize..(5 * 24)) {
        let b = ball5();
        let elems = elements_within(b, 2);
        let (x, y, z) = (&elems[i], &elems[j], &elems[k]);
        let id = MappingClassElement::identity();
        prop_assert_eq!(compose(x, &inverse(x, b).unwrap(), b).unwrap(), id.clone());
        prop_assert_eq!(compose(&id, y, b).unwrap(), y.clone());
        let xy = compose(x, y, b).unwrap();
        let left = compose(&xy, z, b).unwrap();
        let right = compose(x, &compose(y, z, b).unwrap(), b).unwrap();
        prop_assert_eq!(left, right);
    }
}
