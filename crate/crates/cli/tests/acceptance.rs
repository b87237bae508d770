//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use curvecomplex::curve_graph::{subdivide, CurveVertex};
use curvecomplex::metric::{
    all_pairs_distances, check_bottleneck_property, check_subdivision_isometry, distance_stability, thinness_report,
    HalfInteger, ScanMode, ThinnessOptions, DEFAULT_SEED,
};
use curvecomplex::rigidity::{
    check_locally_injective, element_from_map, enumerate_locally_injective, expected_map_count, group_law_check,
    induction_step, pointwise_stabilizer_check, propagate_to_depth, torsor_check, ystar_exhaustion, CurveMap, RigidSet,
};
use curvecomplex::tet_tree::{generate_ball, VertexId};
use curvecomplex::verify::{check_counts, check_theta_links, structural_suite, theta_candidates};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn counting() -> Outcome {
    for n in 0..=8 {
        let b = generate_ball(n).map_err(|e| e.to_string())?;
        let cg = subdivide(&b);
        let row = check_counts(&b, &cg);
        ensure(row.passed, || format!("n={n}: {} {}", row.worst, row.witness))?;
    }
    Ok("n = 0..8 match 2·3^n − 1, 2·3^n + 2, 6·3^n, 12·3^n".into())
}

fn structural() -> Outcome {
    let rows = structural_suite(4).map_err(|e| e.to_string())?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.passed).collect();
    ensure(failed.is_empty(), || format!("{failed:?}"))?;
    Ok(format!("{} checks at n = 4", rows.len()))
}

fn farey_links() -> Outcome {
    let b = generate_ball(5).map_err(|e| e.to_string())?;
    let rows = check_theta_links(&b);
    let failed: Vec<_> = rows.iter().filter(|r| !r.passed).collect();
    ensure(failed.is_empty(), || format!("{failed:?}"))?;
    let vs = theta_candidates(&b).len();
    ensure(vs == 164, || format!("expected 164 labeled vertices, got {vs}"))?;
    Ok(format!("{vs} links labeled, bijective, oracle-consistent"))
}

fn metric() -> Outcome {
    let mut tables = Vec::new();
    for n in 0..=6 {
        tables.push(all_pairs_distances(&generate_ball(n).map_err(|e| e.to_string())?));
    }
    for n in 0..=5 {
        let b = generate_ball(n).map_err(|e| e.to_string())?;
        let cg = subdivide(&b);
        let dc = all_pairs_distances(&cg);
        let rep = check_subdivision_isometry(&cg, &tables[n], &dc).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || format!("isometry n={n}: {:?}", rep.violations))?;
        let moved = distance_stability(&tables[n], &tables[n + 1]).map_err(|e| e.to_string())?;
        ensure(moved == 0, || {
            format!("{moved} distances change from n={n} to n={}", n + 1)
        })?;
    }
    let b4 = generate_ball(4).map_err(|e| e.to_string())?;
    let rep = check_bottleneck_property(&b4, &tables[4]);
    ensure(rep.passed() && rep.pairs_examined > 0, || {
        format!("{:?}", rep.failures.first())
    })?;
    Ok(format!(
        "isometry and stability for n ≤ 5; bottleneck on {} pairs at n = 4, worst {}",
        rep.pairs_examined,
        HalfInteger::from_halves(rep.worst_half_units)
    ))
}

fn hyperbolicity() -> Outcome {
    let opts = ThinnessOptions::default();
    let mut summary = Vec::new();
    for (n, exhaustive) in [(3, true), (5, false)] {
        let b = generate_ball(n).map_err(|e| e.to_string())?;
        let cg = subdivide(&b);
        for (name, table, bound) in [
            ("D", all_pairs_distances(&b), HalfInteger::from_halves(3)),
            ("C", all_pairs_distances(&cg), HalfInteger::from_integer(3)),
        ] {
            let r = thinness_report(&table, bound, &opts);
            ensure(r.passed(), || {
                format!("{name} n={n}: max {} witness {:?}", r.max, r.witness)
            })?;
            match (exhaustive, r.mode) {
                (true, ScanMode::Exhaustive) => {}
                (false, ScanMode::Sampled { seed, samples }) => {
                    ensure(seed == DEFAULT_SEED && samples >= 1_000_000, || format!("{:?}", r.mode))?
                }
                _ => return Err(format!("{name} n={n}: unexpected mode {:?}", r.mode)),
            }
            summary.push(format!("{name}(n={n})={}", r.max));
        }
    }
    Ok(format!("thinness maxima {}", summary.join(" ")))
}

fn rigidity() -> Outcome {
    let mut found = Vec::new();
    for r in 0..=3 {
        let b = generate_ball(r).map_err(|e| e.to_string())?;
        let cg = subdivide(&b);
        let y1 = ystar_exhaustion(1, &b).map_err(|e| e.to_string())?;
        let maps = enumerate_locally_injective(&y1, &cg).map_err(|e| e.to_string())?;
        ensure(maps.len() == expected_map_count(1, r), || {
            format!("radius {r}: {} maps, expected {}", maps.len(), expected_map_count(1, r))
        })?;
        let mut elements = BTreeSet::new();
        for m in &maps {
            ensure(m.iter().all(|(k, v)| k.is_one_sided() == v.is_one_sided()), || {
                "side swapped".into()
            })?;
            let e = element_from_map(m, &b).ok_or("map matches no element")?;
            let f = propagate_to_depth(&e, &b, 0, &b).map_err(|e| e.to_string())?;
            ensure(m.iter().all(|(&k, &v)| f.curve_image(k) == Some(v)), || {
                format!("{e} differs")
            })?;
            ensure(elements.insert(e.clone()), || format!("{e} matched twice"))?;
        }
        found.push(maps.len().to_string());
    }

    let b3 = generate_ball(3).map_err(|e| e.to_string())?;
    for n in [1, 2] {
        let y = ystar_exhaustion(n, &b3).map_err(|e| e.to_string())?;
        let st = pointwise_stabilizer_check(&y, &b3).map_err(|e| e.to_string())?;
        ensure(st.trivial, || format!("Y_{n} fixers: {:?}", st.fixers))?;
    }
    let single = RigidSet::from_parts(0, BTreeSet::from([VertexId(0)]), BTreeSet::new());
    let st = pointwise_stabilizer_check(&single, &b3).map_err(|e| e.to_string())?;
    ensure(!st.trivial, || "a single vertex has trivial stabilizer".into())?;

    let cg3 = subdivide(&b3);
    let steps = induction_step(2, &cg3).map_err(|e| e.to_string())?;
    ensure(steps.len() == 12 && steps.iter().all(|s| s.forced_identity), || {
        format!("{steps:?}")
    })?;

    let y1 = ystar_exhaustion(1, &b3).map_err(|e| e.to_string())?;
    let mut bad: CurveMap = y1.vertices().into_iter().map(|v| (v, v)).collect();
    let (x, z) = (
        CurveVertex::two_sided(VertexId(0), VertexId(1)),
        CurveVertex::two_sided(VertexId(0), VertexId(2)),
    );
    bad.insert(x, z);
    bad.insert(z, x);
    ensure(check_locally_injective(&bad, &y1, &cg3).is_err(), || {
        "corrupted map accepted".into()
    })?;

    Ok(format!(
        "maps of Y_1 into radius 0..3: {}; Y_1, Y_2 stabilizers trivial; 12/12 forced at level 2",
        found.join(", ")
    ))
}

fn torsor() -> Outcome {
    let b6 = generate_ball(6).map_err(|e| e.to_string())?;
    let t = torsor_check(&b6, 6).map_err(|e| e.to_string())?;
    ensure(t.passed(), || format!("{t:?}"))?;
    let g = group_law_check(&b6, 2, 500, DEFAULT_SEED).map_err(|e| e.to_string())?;
    ensure(g.passed(), || format!("{:?}", g.witnesses_of_failure))?;
    Ok(format!(
        "{} ordered tetrahedra, {} seeded triples",
        t.count_found, g.count_found
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let exe = env!("CARGO_BIN_EXE_curvecx");
    let mut outputs = Vec::new();
    for (i, args) in [
        ["verify", "--radius", "4", "--format", "json"],
        ["verify", "--radius", "4", "--format", "json"],
        ["verify", "--radius", "4", "--format", "csv"],
        ["verify", "--radius", "4", "--format", "csv"],
    ]
    .iter()
    .enumerate()
    {
        let path = dir.path().join(format!("run{i}"));
        let status = Command::new(exe)
            .args(*args)
            .arg("--out")
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("{args:?} exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "json runs differ".into())?;
    ensure(outputs[2] == outputs[3], || "csv runs differ".into())?;

    let sampled: Vec<_> = (0..2)
        .map(|_| {
            Command::new(exe)
                .args(["hyperbolicity", "--radius", "4", "--format", "csv"])
                .output()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(sampled.iter().all(|o| o.status.success()), || {
        "hyperbolicity failed".into()
    })?;
    ensure(sampled[0].stdout == sampled[1].stdout, || "sampled runs differ".into())?;
    Ok(format!(
        "{} bytes json, {} bytes csv, sampled report stable",
        outputs[0].len(),
        outputs[2].len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("counting", counting, Duration::from_secs(60)),
        ("structural", structural, Duration::from_secs(120)),
        ("farey links", farey_links, Duration::from_secs(120)),
        ("metric", metric, Duration::from_secs(300)),
        ("hyperbolicity", hyperbolicity, Duration::from_secs(600)),
        ("rigidity", rigidity, Duration::from_secs(300)),
        ("group torsor", torsor, Duration::from_secs(120)),
        ("determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed > *limit {
                Err(format!("took {elapsed:.1?}, limit {limit:?}"))
            } else {
                Ok(detail)
            }
        });
        match result {
            Ok(detail) => println!("criterion {} ({name}): PASS in {elapsed:.2?}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
