//! Reachable sets under relaxed moment constraints and the attraction sets
//! they converge to.
//!
//! All projections go through the same linear program: nonnegative weights
//! `x_k` on a finite family of "columns" (mesh cells for step controls,
//! one-sided atoms for generalized controls), total weight `b`, constraint
//! moments inside a box, and the terminal moment pushed as far as possible
//! along each direction of a fan. The support points found this way are
//! attained, so their convex hull is an inner approximation of the
//! projected polytope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{BoxSet, ConstraintSpec, ImpulseSystem};
use crate::error::{Error, Result};
use crate::geometry::{directed_distance, hausdorff_distance, hull_set, Arc, PlanarSet};
use crate::intervals::Partition;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::piecewise::{PiecewiseFn, Side};
use crate::scalar::{Rat, Scalar};

/// Which constraint coordinates are relaxed by `epsilon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relaxation {
    /// Every coordinate inflated in the sup-norm.
    Full,
    /// Coordinates in the list (0-based) kept exact, the rest inflated.
    Partial(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachConfig {
    /// Number of equal cells of the control mesh.
    pub mesh: usize,
    pub epsilon: f64,
    /// Size of the direction fan.
    pub directions: usize,
    pub relaxation: Relaxation,
    /// Seed for direction sampling in dimension three and higher.
    pub seed: u64,
}

impl ReachConfig {
    pub fn new(mesh: usize, epsilon: f64, directions: usize, relaxation: Relaxation) -> ReachConfig {
        ReachConfig { mesh, epsilon, directions, relaxation, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh == 0 {
            return Err(Error::Invalid("mesh must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.directions < 3 {
            return Err(Error::Invalid("at least three directions are needed".into()));
        }
        Ok(())
    }
}

/// Unit directions: the circle fan in the plane, `±1` on the line, and
/// seeded uniform samples of the sphere above that.
pub fn direction_fan(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        0 => vec![Vec::new()],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out: Vec<Vec<f64>> = Vec::with_capacity(count + 2 * dim);
            // coordinate axes keep the bounding box exact
            for k in 0..dim {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; dim];
                    e[k] = s;
                    out.push(e);
                }
            }
            while out.len() < count.max(2 * dim) {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-3 && norm <= 1.0 {
                    out.push(v.into_iter().map(|x| x / norm).collect());
                }
            }
            out
        }
    }
}

/// Upper bound on how far the support-point hull of a fan of `directions`
/// can fall short of a convex set of the given diameter.
pub fn fan_slack(diameter: f64, directions: usize) -> f64 {
    diameter * (1.0 - (std::f64::consts::PI / directions as f64).cos())
}

/// Columns of the projection program: terminal and constraint moments per
/// unit of weight.
struct Columns {
    terminal: Vec<Vec<f64>>,
    constraint: Vec<Vec<f64>>,
}

impl Columns {
    fn len(&self) -> usize {
        self.terminal.len()
    }

    /// Support-point hull of `{Σ x_k π_k : x ≥ 0, Σ x_k = total, Σ x_k s_k ∈ bx}`.
    fn project(&self, total: f64, bx: &BoxSet, fan: &[Vec<f64>], dim: usize) -> Result<PlanarSet<f64>> {
        let m = self.len();
        let mut lp = LinearProgram::new(m);
        lp.add_constraint(vec![1.0; m], Relation::Eq, total)?;
        for (j, &(lo, hi)) in bx.bounds().iter().enumerate() {
            let row: Vec<f64> = self.constraint.iter().map(|s| s[j]).collect();
            if lo == hi {
                lp.add_constraint(row, Relation::Eq, lo)?;
                continue;
            }
            if lo.is_finite() {
                lp.add_constraint(row.clone(), Relation::Ge, lo)?;
            }
            if hi.is_finite() {
                lp.add_constraint(row, Relation::Le, hi)?;
            }
        }
        let supports: Vec<Option<Vec<f64>>> = fan
            .par_iter()
            .map(|d| {
                let objective: Vec<f64> =
                    self.terminal.iter().map(|p| p.iter().zip(d).map(|(a, b)| a * b).sum()).collect();
                match lp.maximize(&objective)? {
                    LpOutcome::Optimal { x, .. } => {
                        let mut point = vec![0.0; dim];
                        for (w, p) in x.iter().zip(&self.terminal) {
                            if *w != 0.0 {
                                for k in 0..dim {
                                    point[k] += w * p[k];
                                }
                            }
                        }
                        Ok(Some(point))
                    }
                    LpOutcome::Infeasible => Ok(None),
                    LpOutcome::Unbounded => Err(Error::Numeric("bounded program reported unbounded".into())),
                }
            })
            .collect::<Result<_>>()?;
        let points: Vec<Vec<f64>> = supports.into_iter().flatten().collect();
        Ok(points_to_set(&points, dim))
    }
}

fn points_to_set(points: &[Vec<f64>], dim: usize) -> PlanarSet<f64> {
    let mut set = PlanarSet::empty();
    if points.is_empty() {
        return set;
    }
    match dim {
        0 => set.points.push(Vec::new()),
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                set.points.push(vec![lo]);
            } else {
                set.segments.push([vec![lo], vec![hi]]);
            }
        }
        2 => {
            let flat: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
            set = hull_set(&flat);
        }
        _ => {
            let mut pts = points.to_vec();
            pts.sort_by(|a, b| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            pts.dedup();
            set.points = pts;
        }
    }
    set
}

fn relaxed_boxes<S: Scalar>(cons: &ConstraintSpec<S>, epsilon: f64, relaxation: &Relaxation) -> Vec<BoxSet> {
    let exact: &[usize] = match relaxation {
        Relaxation::Full => &[],
        Relaxation::Partial(j) => j,
    };
    cons.boxes().iter().map(|b| b.inflate(epsilon, exact)).collect()
}

fn check_relaxation<S: Scalar>(cons: &ConstraintSpec<S>, relaxation: &Relaxation) -> Result<()> {
    if let Relaxation::Partial(j) = relaxation {
        if let Some(&k) = j.iter().find(|&&k| k >= cons.dim()) {
            return Err(Error::Invalid(format!("exact index {k} out of range for {} kernels", cons.dim())));
        }
    }
    Ok(())
}

/// Reachable set of step controls on a uniform mesh under ε-relaxed
/// constraints, as a union over the boxes of `Y` of convex pieces. Boxes
/// that no control can meet contribute nothing.
pub fn relaxed_reach<S: Scalar>(
    sys: &ImpulseSystem<S>,
    cons: &ConstraintSpec<S>,
    cfg: &ReachConfig,
) -> Result<PlanarSet<f64>> {
    cfg.validate()?;
    cons.check_against(sys)?;
    check_relaxation(cons, &cfg.relaxation)?;
    let mesh = Partition::uniform(&sys.domain(), cfg.mesh)?;
    let averages = |kernels: &[PiecewiseFn<S>]| -> Result<Vec<Vec<f64>>> {
        mesh.cells()
            .iter()
            .map(|cell| {
                let len = S::from_rat(&cell.eta());
                kernels.iter().map(|k| Ok((k.integrate_eta(cell)? / len.clone()).to_f64())).collect()
            })
            .collect()
    };
    let columns = Columns { terminal: averages(sys.pi())?, constraint: averages(cons.kernels())? };
    let fan = direction_fan(sys.dim(), cfg.directions, cfg.seed);
    let total = sys.b().to_f64();
    let mut out = PlanarSet::empty();
    for bx in relaxed_boxes(cons, cfg.epsilon, &cfg.relaxation) {
        out.extend(columns.project(total, &bx, &fan, sys.dim())?);
    }
    Ok(out)
}

/// Inner approximation of the image of the constraint-respecting
/// generalized controls under the terminal map.
///
/// The joint moment image of all nonnegative measures of mass `b` is the
/// convex hull of `b·(π(t±), s(t±))` over one-sided atoms; it is sampled at
/// both sides of a uniform grid of `t_grid_size` cells and of every kernel
/// breakpoint, sliced by each box of `Y`, and projected.
pub fn universal_mp<S: Scalar>(
    sys: &ImpulseSystem<S>,
    cons: &ConstraintSpec<S>,
    t_grid_size: usize,
    directions: usize,
) -> Result<PlanarSet<f64>> {
    cons.check_conditions()?;
    cons.check_against(sys)?;
    if t_grid_size == 0 {
        return Err(Error::Invalid("t_grid_size must be at least 1".into()));
    }
    if directions < 3 {
        return Err(Error::Invalid("at least three directions are needed".into()));
    }
    let (t0, theta0) = (sys.t0(), sys.theta0());
    let width = (theta0 - t0) / Rat::int(t_grid_size as i64);
    let mut times: Vec<Rat> = (0..=t_grid_size).map(|k| t0 + &(&width * &Rat::int(k as i64))).collect();
    for k in sys.pi().iter().chain(cons.kernels()) {
        times.extend(k.breakpoints().iter().cloned());
    }
    times.sort();
    times.dedup();
    let mut columns = Columns { terminal: Vec::new(), constraint: Vec::new() };
    for t in &times {
        for side in [Side::Left, Side::Right] {
            if (side == Side::Left && t == t0) || (side == Side::Right && t == theta0) {
                continue;
            }
            let limits = |kernels: &[PiecewiseFn<S>]| -> Result<Vec<f64>> {
                kernels.iter().map(|k| Ok(k.side_limit(t, side)?.to_f64())).collect()
            };
            columns.terminal.push(limits(sys.pi())?);
            columns.constraint.push(limits(cons.kernels())?);
        }
    }
    let fan = direction_fan(sys.dim(), directions, 0);
    let total = sys.b().to_f64();
    let mut out = PlanarSet::empty();
    for bx in cons.boxes() {
        out.extend(columns.project(total, bx, &fan, sys.dim())?);
    }
    Ok(out)
}

/// Attraction set under the short-impulse constraint family:
/// the jump segments `[b·π(t-), b·π(t+)]` at interior breakpoints, the arcs
/// `b·π(t)` between them, and the end points `b·π(t0+)`, `b·π(θ0-)`.
/// Exact in `S`.
pub fn short_impulse_mp<S: Scalar>(sys: &ImpulseSystem<S>) -> Result<PlanarSet<S>> {
    let b = sys.b();
    let kernels: Vec<PiecewiseFn<S>> = sys.pi().iter().map(PiecewiseFn::coalesce).collect();
    let mut times: Vec<Rat> = kernels.iter().flat_map(|k| k.breakpoints().iter().cloned()).collect();
    times.sort();
    times.dedup();
    let (t0, theta0) = (sys.t0(), sys.theta0());
    let limit = |t: &Rat, side: Side| -> Result<Vec<S>> {
        kernels.iter().map(|k| Ok(b.clone() * k.side_limit(t, side)?)).collect()
    };
    let mut set = PlanarSet::empty();
    set.points.push(limit(t0, Side::Right)?);
    set.points.push(limit(theta0, Side::Left)?);
    let mut arc_start = t0.clone();
    for t in times.iter().filter(|t| *t != t0 && *t != theta0) {
        let mut same_pieces = true;
        for k in &kernels {
            if k.side_piece(t, Side::Left)? != k.side_piece(t, Side::Right)? {
                same_pieces = false;
                break;
            }
        }
        if same_pieces {
            continue;
        }
        set.arcs.push(arc_between(&kernels, b, &arc_start, t)?);
        let (up, down) = (limit(t, Side::Left)?, limit(t, Side::Right)?);
        if up == down {
            set.points.push(up);
        } else {
            set.segments.push([up, down]);
        }
        arc_start = t.clone();
    }
    set.arcs.push(arc_between(&kernels, b, &arc_start, theta0)?);
    Ok(set)
}

fn arc_between<S: Scalar>(kernels: &[PiecewiseFn<S>], b: &S, lo: &Rat, hi: &Rat) -> Result<Arc<S>> {
    let coeffs =
        kernels.iter().map(|k| Ok(k.side_piece(lo, Side::Right)?.scale(b))).collect::<Result<Vec<_>>>()?;
    Ok(Arc { param: (lo.clone(), hi.clone()), coeffs })
}

/// Free-function form of [`hausdorff_distance`] for sets of any scalar type.
pub fn set_distance<S: Scalar, T: Scalar>(
    a: &PlanarSet<S>,
    b: &PlanarSet<T>,
    sample_density: usize,
) -> Result<f64> {
    hausdorff_distance(&a.to_f64(), &b.to_f64(), sample_density as f64)
}

/// One schedule entry of [`coincidence_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceEntry {
    pub mesh: usize,
    pub epsilon: f64,
    /// Hausdorff distance between the fully and partially relaxed sets.
    pub full_vs_partial: Option<f64>,
    pub full_vs_mp: Option<f64>,
    pub partial_vs_mp: Option<f64>,
    /// How far the partially relaxed set sticks out of the fully relaxed one.
    pub partial_excess: Option<f64>,
    /// Allowed excess from direction-fan discretization.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceReport {
    pub entries: Vec<CoincidenceEntry>,
    pub mp: PlanarSet<f64>,
    /// Partial ⊆ Full up to slack at every entry.
    pub containment: bool,
    /// Distances to the attraction set never increase along the schedule.
    pub monotone: bool,
}

impl CoincidenceReport {
    pub fn final_distance(&self) -> Option<f64> {
        let last = self.entries.last()?;
        Some(last.full_vs_mp?.max(last.partial_vs_mp?))
    }
}

/// Settings shared by every schedule entry of [`coincidence_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct CheckSettings {
    pub directions: usize,
    pub t_grid: usize,
    pub sample_density: usize,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings { directions: 360, t_grid: 512, sample_density: 400 }
    }
}

/// Compares full and partial relaxations along a `(mesh, ε)` schedule with
/// each other and with [`universal_mp`].
pub fn coincidence_check<S: Scalar>(
    sys: &ImpulseSystem<S>,
    cons: &ConstraintSpec<S>,
    schedule: &[(usize, f64)],
    settings: &CheckSettings,
) -> Result<CoincidenceReport> {
    let mp = universal_mp(sys, cons, settings.t_grid, settings.directions)?;
    let density = settings.sample_density as f64;
    let dist = |a: &PlanarSet<f64>, b: &PlanarSet<f64>| -> Result<Option<f64>> {
        if a.is_empty() || b.is_empty() {
            return Ok(None);
        }
        hausdorff_distance(a, b, density).map(Some)
    };
    let mut entries = Vec::with_capacity(schedule.len());
    for &(mesh, epsilon) in schedule {
        let full_cfg = ReachConfig::new(mesh, epsilon, settings.directions, Relaxation::Full);
        let partial_cfg =
            ReachConfig { relaxation: Relaxation::Partial(cons.exact().to_vec()), ..full_cfg.clone() };
        let full = relaxed_reach(sys, cons, &full_cfg)?;
        let partial = relaxed_reach(sys, cons, &partial_cfg)?;
        let partial_excess = if partial.is_empty() {
            Some(0.0)
        } else if full.is_empty() {
            None
        } else {
            Some(directed_distance(&partial, &full, density)?)
        };
        let slack = fan_slack(full.diameter(), settings.directions) + 2.0 / density + 1e-9;
        entries.push(CoincidenceEntry {
            mesh,
            epsilon,
            full_vs_partial: dist(&full, &partial)?,
            full_vs_mp: dist(&full, &mp)?,
            partial_vs_mp: dist(&partial, &mp)?,
            partial_excess,
            slack,
        });
    }
    let containment = entries.iter().all(|e| e.partial_excess.is_some_and(|x| x <= e.slack));
    let monotone = entries.windows(2).all(|w| {
        let step = |a: Option<f64>, b: Option<f64>, slack: f64| match (a, b) {
            (Some(a), Some(b)) => b <= a + slack,
            (_, None) => false,
            (None, Some(_)) => true,
        };
        step(w[0].full_vs_mp, w[1].full_vs_mp, w[1].slack)
            && step(w[0].partial_vs_mp, w[1].partial_vs_mp, w[1].slack)
    });
    Ok(CoincidenceReport { entries, mp, containment, monotone })
}
