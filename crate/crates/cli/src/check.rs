//! `attain check`: invariant suites run on the objects of one scenario.

use std::fmt::Write as _;

use impulse_attain::attainability::{
    coincidence_check, fan_slack, relaxed_reach, short_impulse_mp, universal_mp, CheckSettings, ReachConfig,
    Relaxation,
};
use impulse_attain::dynamics::{gen_moments, moments};
use impulse_attain::geometry::{directed_distance, PlanarSet};
use impulse_attain::intervals::Partition;
use impulse_attain::{Cell, FAMeasure, Interval, PiecewiseFn, Poly, Rat, Side, SideAtom};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::Scenario;
use crate::{directions, emit, t_grid, CliError, CliResult, Opts};

const DENSITY: f64 = 400.0;
const CASES: usize = 50;

type Outcome = std::result::Result<(), String>;

/// Random objects on the scenario's time domain, on a grid of 24ths.
struct Gen {
    rng: ChaCha8Rng,
    t0: Rat,
    len: Rat,
}

impl Gen {
    fn grid_point(&mut self) -> Rat {
        &self.t0 + &(&self.len * &Rat::new(self.rng.gen_range(0..=24), 24))
    }

    fn interior(&mut self, max: usize) -> Vec<Rat> {
        let theta0 = &self.t0 + &self.len;
        let n = self.rng.gen_range(0..=max);
        let mut pts: Vec<Rat> = (0..n).map(|_| self.grid_point()).collect();
        pts.retain(|t| *t != self.t0 && *t != theta0);
        pts.sort();
        pts.dedup();
        pts
    }

    fn value(&mut self, signed: bool) -> Rat {
        let lo = if signed { -6 } else { 0 };
        Rat::new(self.rng.gen_range(lo..=6), self.rng.gen_range(1..=4))
    }

    fn step(&mut self, signed: bool) -> PiecewiseFn<Rat> {
        let mut bps = vec![self.t0.clone()];
        bps.extend(self.interior(4));
        bps.push(&self.t0 + &self.len);
        let values = (1..bps.len()).map(|_| self.value(signed)).collect();
        PiecewiseFn::step(bps, values).expect("valid step")
    }

    fn measure(&mut self, signed: bool) -> FAMeasure<Rat> {
        let theta0 = &self.t0 + &self.len;
        let mut atoms: Vec<SideAtom<Rat>> = Vec::new();
        for _ in 0..self.rng.gen_range(0..=3) {
            let loc = self.grid_point();
            let side = if loc == self.t0 {
                Side::Right
            } else if loc == theta0 {
                Side::Left
            } else {
                *[Side::Left, Side::Right].choose(&mut self.rng).unwrap()
            };
            if !atoms.iter().any(|a| a.loc == loc && a.side == side) {
                atoms.push(SideAtom::new(loc, side, self.value(signed)));
            }
        }
        let density = self.step(signed);
        FAMeasure::new(density, atoms).expect("valid measure")
    }

    fn partition(&mut self, extra: &[Rat]) -> Partition {
        let mut pts = self.interior(6);
        pts.extend(extra.iter().cloned());
        let domain = Interval::closed(self.t0.clone(), &self.t0 + &self.len).expect("domain");
        Partition::from_breakpoints(&domain, &pts).expect("partition")
    }
}

fn ensure(ok: bool, detail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

fn lib<T>(r: impulse_attain::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn kernels_normalize(sc: &Scenario) -> Outcome {
    for (k, f) in sc.system.pi().iter().chain(sc.constraints.kernels()).enumerate() {
        ensure(f.coalesce().same_function(f), || format!("kernel {} changes under coalescing", k + 1))?;
    }
    Ok(())
}

fn finite_additivity(g: &mut Gen) -> Outcome {
    for _ in 0..CASES {
        let mu = g.measure(true);
        let p = g.partition(&[]);
        let values =
            lib(p.cells().iter().map(|c| mu.eval_cell(c)).collect::<impulse_attain::Result<Vec<_>>>())?;
        let sum: Rat = values.into_iter().sum();
        ensure(sum == mu.total(), || format!("cell values sum to {sum}, total is {}", mu.total()))?;
    }
    Ok(())
}

fn null_sets(g: &mut Gen) -> Outcome {
    for _ in 0..CASES {
        let mu = g.measure(true);
        let mut pts: Vec<Rat> = mu.atoms().iter().map(|a| a.loc.clone()).collect();
        pts.push(g.grid_point());
        let v = lib(mu.eval_cell(&Cell::points(pts)))?;
        ensure(v.is_zero(), || format!("a finite point set has measure {v}"))?;
    }
    Ok(())
}

fn averaging_exactness(g: &mut Gen) -> Outcome {
    for _ in 0..CASES {
        let mu = g.measure(false);
        let h = g.step(true);
        let mut extra: Vec<Rat> = h.breakpoints().to_vec();
        extra.extend(mu.atoms().iter().map(|a| a.loc.clone()));
        let avg = lib(mu.averaging(&g.partition(&extra)))?;
        let lhs = lib(h.multiply(&avg))?.integral();
        let rhs = lib(mu.integral(&h))?;
        ensure(lhs == rhs, || format!("∫hΘ dη = {lhs} but ∫h dμ = {rhs}"))?;
    }
    Ok(())
}

fn factorization(sc: &Scenario, g: &mut Gen) -> Outcome {
    let b = sc.system.b();
    for _ in 0..CASES {
        let raw = g.step(false);
        let spent = raw.integral();
        let f = if spent.is_zero() {
            PiecewiseFn::polynomial(raw.t0().clone(), raw.theta0().clone(), Poly::constant(b / &g.len))
                .expect("constant control")
        } else {
            raw.scale(&(b / &spent))
        };
        let direct = lib(moments(&f, &sc.system, &sc.constraints))?;
        let lifted = lib(gen_moments(&lib(FAMeasure::indefinite(&f))?, &sc.system, &sc.constraints))?;
        ensure(direct == lifted, || format!("moments {direct:?} differ from {lifted:?}"))?;
    }
    Ok(())
}

fn excess(a: &PlanarSet<f64>, b: &PlanarSet<f64>) -> std::result::Result<f64, String> {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => Ok(0.0),
        (false, true) => Ok(f64::INFINITY),
        _ => lib(directed_distance(a, b, DENSITY)),
    }
}

fn contained(inner: &PlanarSet<f64>, outer: &PlanarSet<f64>, dirs: usize, what: &str) -> Outcome {
    let slack = fan_slack(outer.diameter(), dirs) + 2.0 / DENSITY + 1e-9;
    let e = excess(inner, outer)?;
    ensure(e <= slack, || format!("{what}: excess {e} exceeds slack {slack}"))
}

pub fn run_checks(opts: &Opts) -> CliResult<()> {
    let sc = Scenario::load(&opts.scenario)?;
    let dirs = directions(opts, &sc);
    let mesh = opts.mesh.or(sc.params.mesh).unwrap_or(32);
    let eps = opts.epsilon.or(sc.params.epsilon).unwrap_or(0.01);
    let grid = t_grid(opts, &sc).min(128);
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        t0: sc.system.t0().clone(),
        len: sc.system.theta0() - sc.system.t0(),
    };
    let sys = &sc.system;
    let cons = &sc.constraints;
    let reach = |eps: f64, relaxation: Relaxation| {
        lib(relaxed_reach(
            sys,
            cons,
            &ReachConfig { mesh, epsilon: eps, directions: dirs, relaxation, seed: opts.seed },
        ))
    };

    let mut results: Vec<(&str, Outcome)> = vec![
        ("kernels-normalize", kernels_normalize(&sc)),
        ("finite-additivity", finite_additivity(&mut g)),
        ("null-sets", null_sets(&mut g)),
        ("averaging-exactness", averaging_exactness(&mut g)),
        ("factorization", factorization(&sc, &mut g)),
    ];
    results.push((
        "epsilon-monotonicity",
        (|| {
            contained(
                &reach(eps, Relaxation::Full)?,
                &reach(2.0 * eps, Relaxation::Full)?,
                dirs,
                "reach(ε) ⊆ reach(2ε)",
            )
        })(),
    ));
    results.push((
        "partial-within-full",
        (|| {
            let partial = reach(eps, Relaxation::Partial(cons.exact().to_vec()))?;
            contained(&partial, &reach(eps, Relaxation::Full)?, dirs, "partial ⊆ full")
        })(),
    ));
    results.push((
        "t-grid-monotonicity",
        (|| {
            let coarse = lib(universal_mp(sys, cons, grid / 2, dirs))?;
            contained(&coarse, &lib(universal_mp(sys, cons, grid, dirs))?, dirs, "coarse ⊆ fine")
        })(),
    ));
    results.push((
        "short-impulse-b-scaling",
        (|| {
            let two = Rat::int(2);
            let base = lib(short_impulse_mp(sys))?;
            let doubled = lib(short_impulse_mp(&lib(sys.with_b(sys.b() * &two))?))?;
            let scale = |v: &Vec<Rat>| v.iter().map(|x| x * &two).collect::<Vec<_>>();
            let ok = doubled.points == base.points.iter().map(scale).collect::<Vec<_>>()
                && doubled.segments
                    == base.segments.iter().map(|[a, b]| [scale(a), scale(b)]).collect::<Vec<_>>();
            ensure(ok, || "doubling b does not double the set".into())
        })(),
    ));
    if !sc.params.schedule.is_empty() {
        let settings =
            CheckSettings { directions: dirs, t_grid: t_grid(opts, &sc), sample_density: DENSITY as usize };
        results.push((
            "coincidence",
            (|| {
                let report = lib(coincidence_check(sys, cons, &sc.params.schedule, &settings))?;
                ensure(report.containment && report.monotone, || {
                    format!(
                        "containment {} monotone {} entries {:?}",
                        report.containment, report.monotone, report.entries
                    )
                })
            })(),
        ));
    }

    let mut text = String::new();
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(()) => {
                let _ = writeln!(text, "PASS {name}");
            }
            Err(detail) => {
                failed += 1;
                let _ = writeln!(text, "FAIL {name}: {detail}");
            }
        }
    }
    let _ = writeln!(text, "{} passed, {failed} failed", results.len() - failed);
    emit(opts.out.as_deref(), &text)?;
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}
