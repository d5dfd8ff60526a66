//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs as a plain binary (no libtest harness) so the report is always
//! printed by `cargo test`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use impulse_attain::attainability::{
    coincidence_check, fan_slack, relaxed_reach, universal_mp, CheckSettings, ReachConfig, Relaxation,
};
use impulse_attain::dynamics::{
    build_double_integrator, double_integrator_system, gen_moments, moments, BoxSet, ConstraintSpec,
};
use impulse_attain::geometry::{hausdorff_distance, PlanarSet};
use impulse_attain::intervals::{common_refinement, is_finer};
use impulse_attain::{Cell, FAMeasure, PiecewiseFn, Rat, Side};
use rand::Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed <= Duration::from_secs(limit_secs), || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    workspace().join("scenarios").join(name)
}

fn attain(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_attain")).args(args).output().map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("attain {args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn r(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

fn ones() -> PiecewiseFn<Rat> {
    PiecewiseFn::constant(Rat::zero(), Rat::one(), Rat::one()).unwrap()
}

fn segment(a: [f64; 2], b: [f64; 2]) -> PlanarSet<f64> {
    let mut s = PlanarSet::empty();
    s.segments.push([a.to_vec(), b.to_vec()]);
    s
}

fn sorted(mut v: Vec<Value>) -> Vec<Value> {
    v.sort_by_key(|x| x.to_string());
    v
}

fn zigzag_reproduction() -> Outcome {
    let start = Instant::now();
    let stdout = attain(&["short-impulse", "--scenario", scenario("zigzag.json").to_str().unwrap()])?;
    let elapsed = start.elapsed();
    let out: Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
    let set = &out["set"];
    let expect_points = vec![json!(["1", "1"]), json!(["0", "-1"])];
    let got_points = set["points"].as_array().cloned().unwrap_or_default();
    check(sorted(got_points) == sorted(expect_points), || format!("points {}", set["points"]))?;
    let segs = set["segments"].as_array().cloned().unwrap_or_default();
    check(segs.len() == 1, || format!("segments {}", set["segments"]))?;
    let ends = sorted(segs[0].as_array().cloned().unwrap());
    check(ends == sorted(vec![json!(["1/2", "1"]), json!(["-1/2", "-1"])]), || {
        format!("segment {}", segs[0])
    })?;
    let arcs = sorted(set["arcs"].as_array().cloned().unwrap_or_default());
    let expect_arcs = sorted(vec![
        json!({"param": ["0", "1/2"], "coeffs_x": ["1", "-1"], "coeffs_y": ["1"]}),
        json!({"param": ["1/2", "1"], "coeffs_x": ["-1", "1"], "coeffs_y": ["-1"]}),
    ]);
    check(arcs == expect_arcs, || format!("arcs {}", set["arcs"]))?;
    check(set["polygons"].as_array().is_none_or(|p| p.is_empty()), || "unexpected polygons".into())?;
    within(elapsed, 1)?;
    Ok(format!("exact match, {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

fn averaging_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let mu = measure(&mut rng, false);
        let h = step_fn(&mut rng, true);
        let mut cuts: Vec<Rat> = h.breakpoints().to_vec();
        cuts.extend(mu.atoms().iter().map(|a| a.loc.clone()));
        cuts.extend(interior_points(&mut rng, 6));
        let k = partition_of(&mut rng, &unit(), &cuts, false);
        let lhs = h.multiply(&mu.averaging(&k).map_err(|e| e.to_string())?).unwrap().integral();
        let rhs = mu.integral(&h).unwrap();
        check(lhs == rhs, || format!("case {case}: ∫hΘ dη = {lhs}, ∫h dμ = {rhs}"))?;
        let (mf, hf) = (mu.to_f64(), h.to_f64());
        let lhs_f = hf.multiply(&mf.averaging(&k).map_err(|e| e.to_string())?).unwrap().integral();
        let rhs_f = mf.integral(&hf).unwrap();
        worst = worst.max((lhs_f - rhs_f).abs());
        check(worst <= 1e-12, || format!("case {case}: float gap {worst:e}"))?;
    }
    within(start.elapsed(), 5)?;
    Ok(format!("100 pairs exact, float gap ≤ {worst:.1e}"))
}

fn finite_additivity() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(3);
    for case in 0..1000 {
        let mu = measure(&mut rng, true);
        let l = cell(&mut rng);
        let p = partition(&mut rng);
        let pieces: Vec<Cell> = p.cells().iter().map(|c| l.intersect(c)).filter(|c| !c.is_empty()).collect();
        // the pieces tile L: disjoint, and together they cover it
        let union = pieces.iter().fold(Cell::empty(), |acc, c| acc.union(c));
        check(union == l, || format!("case {case}: pieces do not cover L"))?;
        let sum: Rat = pieces.iter().map(|c| mu.eval_cell(c).unwrap()).sum();
        let whole = mu.eval_cell(&l).unwrap();
        check(sum == whole, || format!("case {case}: μ(L) = {whole}, Σ μ(Lᵢ) = {sum}"))?;
    }
    within(start.elapsed(), 5)?;
    Ok("1000 cases exact".into())
}

fn integral_bound_and_bilinearity() -> Outcome {
    let mut rng = rng(4);
    let mut float_gap = 0.0f64;
    for case in 0..1000 {
        let (mu, nu) = (measure(&mut rng, true), measure(&mut rng, true));
        let (u, v) = (poly_fn(&mut rng, 2), poly_fn(&mut rng, 2));
        let (a, b) = (small_rat(&mut rng, true), small_rat(&mut rng, true));
        let iu = mu.integral(&u).unwrap();
        check(iu.abs() <= u.sup_norm() * mu.variation(), || format!("case {case}: bound violated"))?;
        let uv = PiecewiseFn::lin_comb(&a, &u, &b, &v).unwrap();
        check(mu.integral(&uv).unwrap() == &a * &iu + &b * &mu.integral(&v).unwrap(), || {
            format!("case {case}: not linear in the integrand")
        })?;
        let munu = FAMeasure::lin_comb(&a, &mu, &b, &nu).unwrap();
        check(munu.integral(&u).unwrap() == &a * &iu + &b * &nu.integral(&u).unwrap(), || {
            format!("case {case}: not linear in the measure")
        })?;
        let (af, bf) = (a.to_f64(), b.to_f64());
        let lhs = FAMeasure::lin_comb(&af, &mu.to_f64(), &bf, &nu.to_f64())
            .unwrap()
            .integral(&uv.to_f64())
            .unwrap();
        let rhs = af * af * mu.to_f64().integral(&u.to_f64()).unwrap()
            + af * bf * mu.to_f64().integral(&v.to_f64()).unwrap()
            + bf * af * nu.to_f64().integral(&u.to_f64()).unwrap()
            + bf * bf * nu.to_f64().integral(&v.to_f64()).unwrap();
        let gap = (lhs - rhs).abs() / (1.0 + rhs.abs());
        float_gap = float_gap.max(gap);
        check(gap <= 1e-12, || format!("case {case}: float bilinearity gap {gap:e}"))?;
    }
    Ok(format!("1000 cases exact, float relative gap ≤ {float_gap:.1e}"))
}

/// Subset test through the membership oracle of the common module.
fn finer_by_probe(fine: &impulse_attain::Partition, coarse: &impulse_attain::Partition) -> bool {
    let coarse_probes: Vec<Vec<bool>> = coarse.cells().iter().map(probe).collect();
    fine.cells().iter().all(|f| {
        let pf = probe(f);
        coarse_probes.iter().any(|pc| pf.iter().zip(pc).all(|(x, y)| !*x || *y))
    })
}

fn refinement_direction() -> Outcome {
    let mut rng = rng(5);
    for case in 0..500 {
        let (a, b) = (partition(&mut rng), partition(&mut rng));
        let c = common_refinement(&a, &b).unwrap();
        check(is_finer(&c, &a) && is_finer(&c, &b), || format!("pair {case}: refinement is not finer"))?;
        check(finer_by_probe(&c, &a) && finer_by_probe(&c, &b), || format!("pair {case}: oracle disagrees"))?;
        check(is_finer(&a, &b) == finer_by_probe(&a, &b), || {
            format!("pair {case}: is_finer disagrees with the membership oracle")
        })?;
    }
    let mut chains = 0;
    for case in 0..500 {
        let top = partition(&mut rng);
        let mid = if rng.gen_bool(0.8) {
            common_refinement(&top, &partition(&mut rng)).unwrap()
        } else {
            partition(&mut rng)
        };
        let low = if rng.gen_bool(0.8) {
            common_refinement(&mid, &partition(&mut rng)).unwrap()
        } else {
            partition(&mut rng)
        };
        if is_finer(&low, &mid) && is_finer(&mid, &top) {
            chains += 1;
            check(is_finer(&low, &top), || format!("triple {case}: transitivity fails"))?;
        }
    }
    check(chains >= 300, || format!("only {chains} chains exercised"))?;
    Ok(format!("500 pairs, {chains} transitive chains"))
}

fn reach_convergence() -> Outcome {
    let sys = double_integrator_system(&ones(), Rat::one()).unwrap();
    let cons = ConstraintSpec::unconstrained();
    let limit = segment([0.0, 1.0], [1.0, 1.0]);
    let mut distances = Vec::new();
    let mut slow = Duration::ZERO;
    for m in [4usize, 16, 64, 256] {
        let start = Instant::now();
        let set = relaxed_reach(&sys, &cons, &ReachConfig::new(m, 0.01, 360, Relaxation::Full))
            .map_err(|e| e.to_string())?;
        slow = slow.max(start.elapsed());
        if m == 4 {
            check(set == segment([0.125, 1.0], [0.875, 1.0]), || format!("mesh 4 gives {set:?}"))?;
        }
        let d = hausdorff_distance(&set, &limit, 2000.0).map_err(|e| e.to_string())?;
        let bound = 1.0 / m as f64 + fan_slack(set.diameter(), 360);
        check(d <= bound, || format!("mesh {m}: distance {d} above {bound}"))?;
        if let Some(&prev) = distances.last() {
            check(d < prev, || format!("mesh {m}: distance {d} not below {prev}"))?;
        }
        distances.push(d);
    }
    within(slow, 30)?;
    Ok(format!("distances {distances:?}, slowest mesh {:.2}s", slow.as_secs_f64()))
}

fn coincidence() -> Outcome {
    let start = Instant::now();
    let sys = double_integrator_system(&ones(), Rat::one()).unwrap();
    let early = PiecewiseFn::new(
        vec![r(0, 1), r(1, 2), r(1, 1)],
        vec![impulse_attain::Poly::constant(Rat::one()), impulse_attain::Poly::zero()],
        vec![Rat::one(), Rat::one(), Rat::zero()],
    )
    .unwrap();
    let cons = ConstraintSpec::new(vec![early], vec![BoxSet::point(&[0.0]).unwrap()], vec![0]).unwrap();
    let density = 2000.0;
    let dist =
        |a: &PlanarSet<f64>, b: &PlanarSet<f64>| hausdorff_distance(a, b, density).map_err(|e| e.to_string());
    let full = relaxed_reach(&sys, &cons, &ReachConfig::new(256, 2e-3, 360, Relaxation::Full))
        .map_err(|e| e.to_string())?;
    let partial = relaxed_reach(&sys, &cons, &ReachConfig::new(256, 2e-3, 360, Relaxation::Partial(vec![0])))
        .map_err(|e| e.to_string())?;
    let mp = universal_mp(&sys, &cons, 512, 360).map_err(|e| e.to_string())?;
    let limit = segment([0.0, 1.0], [0.5, 1.0]);
    let d_fp = dist(&full, &partial)?;
    let d_fm = dist(&full, &mp)?;
    let d_pm = dist(&partial, &mp)?;
    check(d_fp <= 0.01, || format!("full vs partial {d_fp}"))?;
    check(d_fm <= 0.01, || format!("full vs mp {d_fm}"))?;
    check(d_pm <= 0.01, || format!("partial vs mp {d_pm}"))?;
    for (name, set) in [("full", &full), ("partial", &partial), ("mp", &mp)] {
        let d = dist(set, &limit)?;
        check(d <= 0.01, || format!("{name} is {d} away from the limit segment"))?;
    }
    let settings = CheckSettings { directions: 360, t_grid: 512, sample_density: 400 };
    let report = coincidence_check(&sys, &cons, &[(64, 0.05), (128, 0.01), (256, 0.002)], &settings)
        .map_err(|e| e.to_string())?;
    check(report.containment && report.monotone, || format!("schedule report {:?}", report.entries))?;
    within(start.elapsed(), 60)?;
    Ok(format!("d(full,partial)={d_fp:.2e} d(full,mp)={d_fm:.2e} d(partial,mp)={d_pm:.2e}"))
}

fn null_sets() -> Outcome {
    let mut rng = rng(8);
    let mut zoo: Vec<FAMeasure<Rat>> = vec![
        FAMeasure::zero(Rat::zero(), Rat::one()).unwrap(),
        FAMeasure::atom(Rat::zero(), Rat::one(), r(1, 2), Side::Left, Rat::one()).unwrap(),
        FAMeasure::atom(Rat::zero(), Rat::one(), r(1, 2), Side::Right, r(-3, 2)).unwrap(),
        FAMeasure::atom(Rat::zero(), Rat::one(), Rat::zero(), Side::Right, Rat::one()).unwrap(),
        FAMeasure::atom(Rat::zero(), Rat::one(), Rat::one(), Side::Left, Rat::one()).unwrap(),
        FAMeasure::indefinite(&ones()).unwrap(),
    ];
    for _ in 0..20 {
        let (mu, nu) = (measure(&mut rng, true), measure(&mut rng, true));
        zoo.push(
            FAMeasure::lin_comb(&small_rat(&mut rng, true), &mu, &small_rat(&mut rng, true), &nu).unwrap(),
        );
        zoo.push(FAMeasure::indefinite(&poly_fn(&mut rng, 0)).unwrap());
        let pos = measure(&mut rng, false);
        let cuts = interior_points(&mut rng, 5);
        let k = partition_of(&mut rng, &unit(), &cuts, true);
        zoo.push(FAMeasure::indefinite(&pos.averaging(&k).unwrap()).unwrap());
        zoo.push(mu);
    }
    for case in 0..500 {
        let l = null_cell(&mut rng);
        for (k, mu) in zoo.iter().enumerate() {
            let v = mu.eval_cell(&l).unwrap();
            check(v.is_zero(), || format!("cell {case}, measure {k}: value {v}"))?;
        }
    }
    Ok(format!("500 null cells × {} measures", zoo.len()))
}

fn factorization() -> Outcome {
    let mut rng = rng(9);
    for case in 0..200 {
        let c = step_fn(&mut rng, true);
        let b = Rat::new(rng.gen_range(1..=9), rng.gen_range(1..=4));
        let (t1, t2) = (grid_point(&mut rng), grid_point(&mut rng));
        let di = build_double_integrator(&c, &t1, &t2, b.clone()).unwrap();
        let cons = ConstraintSpec::new(
            vec![di.position_kernel.clone(), di.velocity_kernel.clone()],
            vec![BoxSet::whole(2)],
            vec![],
        )
        .unwrap();
        let raw = step_fn(&mut rng, false);
        let spent = raw.integral();
        let f = if spent.is_zero() {
            PiecewiseFn::constant(Rat::zero(), Rat::one(), b.clone()).unwrap()
        } else {
            raw.scale(&(&b / &spent))
        };
        let direct = moments(&f, &di.system, &cons).map_err(|e| e.to_string())?;
        let lifted =
            gen_moments(&FAMeasure::indefinite(&f).unwrap(), &di.system, &cons).map_err(|e| e.to_string())?;
        check(direct == lifted, || format!("case {case}: {direct:?} vs {lifted:?}"))?;
    }
    Ok("200 controls exact".into())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let runs: Vec<(Vec<String>, Vec<String>)> = vec![
        (
            vec![
                "reach".into(),
                "--scenario".into(),
                scenario("coincidence.json").to_str().unwrap().into(),
                "--mesh".into(),
                "64".into(),
                "--seed".into(),
                "7".into(),
            ],
            vec!["reach".into()],
        ),
        (
            vec![
                "mp".into(),
                "--scenario".into(),
                scenario("midcourse.json").to_str().unwrap().into(),
                "--seed".into(),
                "7".into(),
            ],
            vec!["mp".into()],
        ),
        (
            vec![
                "short-impulse".into(),
                "--scenario".into(),
                scenario("zigzag.json").to_str().unwrap().into(),
            ],
            vec!["short".into()],
        ),
    ];
    let mut compared = 0;
    for (args, tag) in runs {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let (json_path, svg_path) =
                (path(&format!("{}-{round}.json", tag[0])), path(&format!("{}-{round}.svg", tag[0])));
            let mut full = args.clone();
            full.extend(["--out".to_string(), json_path.clone(), "--svg".to_string(), svg_path.clone()]);
            attain(&full.iter().map(String::as_str).collect::<Vec<_>>())?;
            let read = |p: &str| std::fs::read(p).map_err(|e| e.to_string());
            outputs.push((read(&json_path)?, read(&svg_path)?));
        }
        check(outputs[0] == outputs[1], || format!("{} output differs between runs", tag[0]))?;
        compared += 2;
    }
    Ok(format!("{compared} files byte-identical across runs"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("zigzag reproduction", zigzag_reproduction),
        ("averaging exactness", averaging_exactness),
        ("finite additivity", finite_additivity),
        ("integral bound and bilinearity", integral_bound_and_bilinearity),
        ("refinement direction", refinement_direction),
        ("reach convergence", reach_convergence),
        ("coincidence of relaxations", coincidence),
        ("null-set vanishing", null_sets),
        ("factorization", factorization),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
