//! `curvecx`: generate balls of the tetrahedron complex and run the
//! verification suites from the command line.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use curvecomplex::curve_graph::subdivide;
use curvecomplex::farey::{
    common_neighbors, farey_adjacent, farey_ball, mediant, mobius_oracle, triangle_unfold, FareyTriangle, Matrix2,
    Slope,
};
use curvecomplex::metric::{
    all_pairs_distances, check_bottleneck_property, check_subdivision_isometry, distance_stability,
    four_point_delta_halves, thinness_report, tree_comparison, HalfInteger, ScanMode, ThinnessOptions, DEFAULT_SEED,
};
use curvecomplex::rigidity::{
    group_law_check, pointwise_stabilizer_check, rigidity_check_level, torsor_check, ystar_exhaustion, RigidityReport,
};
use curvecomplex::tet_tree::{
    expected_edge_count, expected_tet_count, expected_vertex_count, generate_ball_capped, DEFAULT_RADIUS_CAP,
};
use curvecomplex::verify::{rows_to_csv, structural_suite, CheckRow};

pub const RADIUS_CAP_ENV: &str = "CURVECX_RADIUS_CAP";

/// Quadruple count above which the four-point scan is skipped.
const FOUR_POINT_LIMIT: u64 = 1_000_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "curvecx",
    version,
    about = "Finite windows of the curve complex of the three-holed projective plane"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Ball radius (tree distance from the root tetrahedron).
    #[arg(long, global = true)]
    pub radius: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Triples drawn when a thinness scan is too large to be exhaustive.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub sample_cap: u64,
    #[arg(long, global = true, env = RADIUS_CAP_ENV, default_value_t = DEFAULT_RADIUS_CAP)]
    pub radius_cap: usize,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Export a ball of D and its curve graph.
    Generate,
    /// Structural invariants of the ball and its subdivision.
    Verify,
    /// Distance, bottleneck and thinness checks.
    Hyperbolicity,
    /// Enumeration, stabilizer, induction-step and group-law checks.
    Rigidity {
        #[arg(long, default_value_t = 2)]
        level: usize,
    },
    /// Element counts against their closed forms.
    Stats,
    /// Farey complex queries.
    Farey {
        #[command(subcommand)]
        query: FareyQuery,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum FareyQuery {
    Adjacent {
        a: Slope,
        b: Slope,
    },
    Mediant {
        a: Slope,
        b: Slope,
    },
    CommonNeighbors {
        a: Slope,
        b: Slope,
    },
    /// The other triangle on the edge `a b` of the triangle `a b c`.
    Unfold {
        a: Slope,
        b: Slope,
        c: Slope,
    },
    /// Triangles within `--radius` of the base triangle.
    Ball,
    /// Fractional-linear image of `s` under the matrix `[[a, b], [c, d]]`.
    Mobius {
        #[arg(allow_hyphen_values = true)]
        a: i64,
        #[arg(allow_hyphen_values = true)]
        b: i64,
        #[arg(allow_hyphen_values = true)]
        c: i64,
        #[arg(allow_hyphen_values = true)]
        d: i64,
        s: Slope,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
    Csv,
}

/// Validated settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub radius: usize,
    pub format: Format,
    pub seed: u64,
    pub sample_cap: u64,
    pub radius_cap: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let c = cli.common;
        let radius = c.radius.unwrap_or(match &cli.command {
            Command::Verify => 4,
            Command::Rigidity { level } => level.max(&2) + 1,
            Command::Farey { .. } => 2,
            _ => 3,
        });
        ensure!(
            radius <= c.radius_cap,
            "radius {radius} exceeds the cap {}",
            c.radius_cap
        );
        ensure!(c.sample_cap > 0, "--sample-cap must be positive");
        let format = c.format.unwrap_or(match cli.command {
            Command::Stats | Command::Farey { .. } => Format::Csv,
            _ => Format::Json,
        });
        Ok(RunConfig {
            command: cli.command,
            radius,
            format,
            seed: c.seed,
            sample_cap: c.sample_cap,
            radius_cap: c.radius_cap,
            out: c.out,
        })
    }
}

/// Rendered output and whether every asserted check held.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Generate => generate(cfg),
        Command::Verify => rows_outcome(structural_suite(cfg.radius)?, cfg.format),
        Command::Hyperbolicity => rows_outcome(hyperbolicity_rows(cfg)?, cfg.format),
        Command::Rigidity { level } => rigidity(cfg, *level),
        Command::Stats => stats(cfg),
        Command::Farey { query } => farey(cfg, query),
    }
}

/// Writes the outcome to `--out` or stdout.
pub fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", outcome.text);
            Ok(())
        }
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn rows_outcome(rows: Vec<CheckRow>, format: Format) -> Result<Outcome> {
    let passed = rows.iter().all(|r| r.passed);
    let text = match format {
        Format::Json => json(&rows)?,
        Format::Csv => rows_to_csv(&rows),
        Format::Dot => bail!("reports are available as json or csv"),
    };
    Ok(Outcome { text, passed })
}

fn generate(cfg: &RunConfig) -> Result<Outcome> {
    let ball = generate_ball_capped(cfg.radius, cfg.radius_cap)?;
    let cg = subdivide(&ball);
    let text = match cfg.format {
        Format::Json => json(&serde_json::json!({"d_ball": ball.to_json(), "curve_graph": cg.to_json()}))?,
        Format::Dot => ball.to_dot() + &cg.to_dot(),
        Format::Csv => {
            let mut s = String::from("addr,v0,v1,v2,v3\n");
            for t in ball.tets() {
                let v = t.verts;
                s.push_str(&format!("{},{},{},{},{}\n", t.address.word(), v[0], v[1], v[2], v[3]));
            }
            s
        }
    };
    Ok(Outcome { text, passed: true })
}

fn thinness_row(name: &str, radius: usize, r: &curvecomplex::metric::ThinnessReport) -> CheckRow {
    let mode = match r.mode {
        ScanMode::Exhaustive => "exhaustive".to_string(),
        ScanMode::Sampled { seed, samples } => format!("sampled seed={seed} samples={samples}"),
    };
    let witness = r
        .witness
        .map(|(x, y, z, p)| format!("x={x} y={y} z={z} p={p}"))
        .unwrap_or_default();
    CheckRow {
        name: name.into(),
        radius,
        examined: r.triples_examined,
        worst: format!("{} (bound {}, {mode})", r.max, r.bound),
        witness: if r.passed() { String::new() } else { witness },
        passed: r.passed(),
    }
}

fn plain_row(name: &str, radius: usize, examined: u64, worst: String, witness: String) -> CheckRow {
    CheckRow {
        name: name.into(),
        radius,
        examined,
        passed: witness.is_empty(),
        worst,
        witness,
    }
}

/// Metric rows in a fixed order.
pub fn hyperbolicity_rows(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let n = cfg.radius;
    ensure!(
        n < cfg.radius_cap,
        "the stability check needs radius {} within the cap",
        n + 1
    );
    let ball = generate_ball_capped(n, cfg.radius_cap)?;
    let next = generate_ball_capped(n + 1, cfg.radius_cap)?;
    let cg = subdivide(&ball);
    let (dd, (dc, dnext)) = rayon::join(
        || all_pairs_distances(&ball),
        || rayon::join(|| all_pairs_distances(&cg), || all_pairs_distances(&next)),
    );
    let opts = ThinnessOptions {
        seed: cfg.seed,
        sample_cap: cfg.sample_cap,
        ..ThinnessOptions::default()
    };
    let mut rows = Vec::new();

    let iso = check_subdivision_isometry(&cg, &dd, &dc)?;
    let iso_witness = iso.violations.first().map(|v| format!("{v:?}")).unwrap_or_default();
    rows.push(plain_row(
        "subdivision_isometry",
        n,
        iso.pairs_checked,
        format!("violations={}", iso.violation_count),
        iso_witness,
    ));

    let moved = distance_stability(&dd, &dnext)?;
    let pairs = (dd.len() * dd.len()) as u64;
    rows.push(plain_row(
        "distance_stability",
        n,
        pairs,
        format!("changed={moved}"),
        if moved == 0 {
            String::new()
        } else {
            format!("{moved} distances change at radius {}", n + 1)
        },
    ));

    let bn = check_bottleneck_property(&ball, &dd);
    let bn_witness = match bn.failures.first() {
        Some(f) => format!("x={} y={} p={}: {}", f.x, f.y, f.p, f.reason),
        None if !bn.passed() => format!("{:?}", bn.worst_witness),
        None => String::new(),
    };
    rows.push(plain_row(
        "bottleneck",
        n,
        bn.pairs_examined,
        format!("{} (bound 3/2)", HalfInteger::from_halves(bn.worst_half_units)),
        bn_witness,
    ));

    let (td, tc) = rayon::join(
        || thinness_report(&dd, HalfInteger::from_halves(3), &opts),
        || thinness_report(&dc, HalfInteger::from_integer(3), &opts),
    );
    rows.push(thinness_row("thinness_d", n, &td));
    rows.push(thinness_row("thinness_c", n, &tc));

    for (name, table, thin) in [("four_point_d", &dd, &td), ("four_point_c", &dc, &tc)] {
        let m = table.len() as u64;
        let quads = m * m.saturating_sub(1) * m.saturating_sub(2) * m.saturating_sub(3) / 24;
        if quads > FOUR_POINT_LIMIT {
            rows.push(plain_row(name, n, 0, "skipped".into(), String::new()));
            continue;
        }
        let delta = four_point_delta_halves(table);
        // smoke relation: delta ≤ 2·thinness + 1
        let ok = delta <= 4 * thin.max + 2;
        rows.push(plain_row(
            name,
            n,
            quads,
            format!("{} (thinness {})", HalfInteger::from_halves(delta), thin.max),
            if ok {
                String::new()
            } else {
                "exceeds 2·thinness + 1".into()
            },
        ));
    }

    let tc_stats = tree_comparison(&ball, &dd);
    rows.push(plain_row(
        "tree_comparison",
        n,
        tc_stats.pairs,
        format!(
            "difference {}..{} ratio {:.3}..{:.3}",
            tc_stats.min_difference, tc_stats.max_difference, tc_stats.min_ratio, tc_stats.max_ratio
        ),
        String::new(),
    ));
    Ok(rows)
}

/// Rigidity reports for `level`, with the codomain at `cfg.radius`.
pub fn rigidity_reports(cfg: &RunConfig, level: usize) -> Result<Vec<RigidityReport>> {
    ensure!(level >= 1, "--level starts at 1");
    let r = cfg.radius;
    ensure!(r >= level, "rigidity at level {level} needs --radius ≥ {level}");
    let ball = generate_ball_capped(r, cfg.radius_cap)?;
    let cg = subdivide(&ball);
    let mut out = Vec::new();
    for n in 1..=level {
        out.extend(rigidity_check_level(n, &cg)?);
    }
    for n in 1..=level.min(2) {
        let y = ystar_exhaustion(n, &ball)?;
        let st = pointwise_stabilizer_check(&y, &ball)?;
        out.push(RigidityReport {
            check: "pointwise_stabilizer".into(),
            level: n,
            radius: r,
            count_found: st.fixers.len(),
            count_expected: 1,
            witnesses_of_failure: if st.trivial { Vec::new() } else { st.fixers },
        });
    }
    out.push(torsor_check(&ball, r)?);
    let depth = r / 3;
    if depth >= 1 {
        out.push(group_law_check(&ball, depth, 500, cfg.seed)?);
    }
    Ok(out)
}

fn rigidity(cfg: &RunConfig, level: usize) -> Result<Outcome> {
    let reports = rigidity_reports(cfg, level)?;
    let passed = reports.iter().all(RigidityReport::passed);
    let text = match cfg.format {
        Format::Json => json(&reports)?,
        Format::Csv => {
            let mut s = String::from("check,level,radius,count_found,count_expected,witnesses_of_failure\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{},\"{}\"\n",
                    r.check,
                    r.level,
                    r.radius,
                    r.count_found,
                    r.count_expected,
                    r.witnesses_of_failure.join("; ").replace('"', "\"\"")
                ));
            }
            s
        }
        Format::Dot => bail!("reports are available as json or csv"),
    };
    Ok(Outcome { text, passed })
}

#[derive(Serialize)]
struct StatLine {
    quantity: &'static str,
    found: usize,
    expected: usize,
}

fn stats(cfg: &RunConfig) -> Result<Outcome> {
    let n = cfg.radius;
    let ball = generate_ball_capped(n, cfg.radius_cap)?;
    let cg = subdivide(&ball);
    let lines = [
        StatLine {
            quantity: "tets",
            found: ball.tets().len(),
            expected: expected_tet_count(n),
        },
        StatLine {
            quantity: "one-sided",
            found: ball.vertex_count(),
            expected: expected_vertex_count(n),
        },
        StatLine {
            quantity: "D-edges",
            found: ball.edges().len(),
            expected: expected_edge_count(n),
        },
        StatLine {
            quantity: "two-sided",
            found: cg.two_sided_count(),
            expected: expected_edge_count(n),
        },
        StatLine {
            quantity: "C-edges",
            found: cg.edges().len(),
            expected: 2 * expected_edge_count(n),
        },
    ];
    let passed = lines.iter().all(|l| l.found == l.expected);
    let text = match cfg.format {
        Format::Json => json(&serde_json::json!({"radius": n, "counts": lines}))?,
        Format::Csv => {
            let mut s = String::from("quantity,found,expected\n");
            for l in &lines {
                s.push_str(&format!("{},{},{}\n", l.quantity, l.found, l.expected));
            }
            s
        }
        Format::Dot => bail!("stats are available as json or csv"),
    };
    Ok(Outcome { text, passed })
}

fn farey(cfg: &RunConfig, q: &FareyQuery) -> Result<Outcome> {
    let line = |s: String| Outcome {
        text: s + "\n",
        passed: true,
    };
    Ok(match q {
        FareyQuery::Adjacent { a, b } => line(farey_adjacent(a, b).to_string()),
        FareyQuery::Mediant { a, b } => line(mediant(a, b)?.to_string()),
        FareyQuery::CommonNeighbors { a, b } => {
            let [x, y] = common_neighbors(a, b)?;
            line(format!("{x} {y}"))
        }
        FareyQuery::Unfold { a, b, c } => {
            let t = FareyTriangle::new(a.clone(), b.clone(), c.clone())?;
            let u = triangle_unfold(&t, (a, b))?;
            let [x, y, z] = u.vertices();
            line(format!("{x} {y} {z}"))
        }
        FareyQuery::Ball => {
            let patch = farey_ball(&FareyTriangle::base(), cfg.radius)?;
            Outcome {
                text: json(&patch.to_json())?,
                passed: true,
            }
        }
        FareyQuery::Mobius { a, b, c, d, s } => {
            let m = Matrix2::new(*a, *b, *c, *d);
            line(mobius_oracle(&m, s)?.to_string())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> RunConfig {
        let mut full = vec!["curvecx"];
        full.extend_from_slice(args);
        RunConfig::from_cli(Cli::try_parse_from(full).unwrap()).unwrap()
    }

    #[test]
    fn stats_radius_three() {
        let out = run(&config(&["stats", "--radius", "3"])).unwrap();
        assert!(out.passed);
        assert_eq!(
            out.text,
            "quantity,found,expected\ntets,53,53\none-sided,56,56\nD-edges,162,162\ntwo-sided,162,162\nC-edges,324,324\n"
        );
    }

    #[test]
    fn radius_cap_enforced() {
        let cli = Cli::try_parse_from(["curvecx", "stats", "--radius", "9"]).unwrap();
        assert!(RunConfig::from_cli(cli).is_err());
        let cli = Cli::try_parse_from(["curvecx", "stats", "--radius", "3", "--radius-cap", "2"]).unwrap();
        assert!(RunConfig::from_cli(cli).is_err());
        let cli = Cli::try_parse_from(["curvecx", "stats", "--sample-cap", "0"]).unwrap();
        assert!(RunConfig::from_cli(cli).is_err());
    }

    #[test]
    fn farey_queries() {
        let text = |a: &[&str]| run(&config(a)).unwrap().text;
        assert_eq!(text(&["farey", "adjacent", "0/1", "1/0"]), "true\n");
        assert_eq!(text(&["farey", "adjacent", "1/2", "2/1"]), "false\n");
        assert_eq!(text(&["farey", "mediant", "1/2", "1/1"]), "2/3\n");
        assert_eq!(text(&["farey", "common-neighbors", "0/1", "1/0"]), "-1/1 1/1\n");
        assert_eq!(text(&["farey", "unfold", "0/1", "1/0", "1/1"]), "-1/1 0/1 1/0\n");
        assert_eq!(text(&["farey", "mobius", "0", "-1", "1", "0", "2/1"]), "-1/2\n");
        assert!(text(&["farey", "ball", "--radius", "0"]).contains("\"0/1\""));
    }

    #[test]
    fn reports_reject_dot() {
        assert!(run(&config(&["verify", "--radius", "1", "--format", "dot"])).is_err());
    }

    #[test]
    fn hyperbolicity_small() {
        let out = run(&config(&["hyperbolicity", "--radius", "2", "--format", "csv"])).unwrap();
        assert!(out.passed, "{}", out.text);
        assert!(out
            .text
            .starts_with("name,radius,examined,worst,witness,passed\nsubdivision_isometry,2,"));
    }

    #[test]
    fn rigidity_level_one() {
        let out = run(&config(&["rigidity", "--level", "1", "--radius", "2"])).unwrap();
        assert!(out.passed, "{}", out.text);
        let v: serde_json::Value = serde_json::from_str(&out.text).unwrap();
        assert_eq!(v[0]["check"], "enumerate_locally_injective");
        assert_eq!(v[0]["count_found"], 24 * 17);
    }
}
