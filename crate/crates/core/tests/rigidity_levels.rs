use curvecomplex::curve_graph::subdivide;
use curvecomplex::rigidity::{induction_step, rigidity_check_level};
use curvecomplex::tet_tree::generate_ball;

#[test]
fn level_one_into_radius_one() {
    let b = generate_ball(1).unwrap();
    let cg = subdivide(&b);
    let reps = rigidity_check_level(1, &cg).unwrap();
    for r in &reps {
        assert!(r.passed(), "{r:?}");
    }
    assert_eq!(reps[0].count_found, 120);
}

#[test]
fn level_two_into_radius_three() {
    let b = generate_ball(3).unwrap();
    let cg = subdivide(&b);
    let reps = rigidity_check_level(2, &cg).unwrap();
    assert_eq!(reps.len(), 2);
    for r in &reps {
        assert!(r.passed(), "{r:?}");
    }
    assert_eq!(reps[0].count_found, 408);
    assert_eq!(reps[1].count_found, 12);
}

#[test]
fn induction_step_at_level_three() {
    let b = generate_ball(4).unwrap();
    let cg = subdivide(&b);
    let out = induction_step(3, &cg).unwrap();
    assert_eq!(out.len(), 36);
    assert!(out.iter().all(|o| o.forced_identity));
}

#[test]
fn exhaustion_nests_and_counts() {
    use curvecomplex::rigidity::ystar_exhaustion;
    let b = generate_ball(5).unwrap();
    let mut prev: Option<curvecomplex::rigidity::RigidSet> = None;
    for n in 1..=6 {
        let y = ystar_exhaustion(n, &b).unwrap();
        let p = 3usize.pow(n as u32 - 1);
        assert_eq!(y.one_sided.len(), 2 * p + 2);
        assert_eq!(y.two_sided.len(), 6 * p);
        if let Some(q) = prev {
            assert!(q.one_sided.is_subset(&y.one_sided));
            assert!(q.two_sided.is_subset(&y.two_sided));
        }
        prev = Some(y);
    }
}

#[test]
fn enumerated_maps_keep_sides() {
    use curvecomplex::rigidity::{enumerate_locally_injective, ystar_exhaustion};
    let b = generate_ball(2).unwrap();
    let cg = subdivide(&b);
    let y = ystar_exhaustion(1, &b).unwrap();
    let maps = enumerate_locally_injective(&y, &cg).unwrap();
    assert_eq!(maps.len(), 24 * 17);
    for m in &maps {
        assert!(m.iter().all(|(k, v)| k.is_one_sided() == v.is_one_sided()));
    }
    let keys: Vec<_> = maps
        .iter()
        .map(|m| m.values().take(4).copied().collect::<Vec<_>>())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}
