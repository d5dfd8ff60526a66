//! Impulse-controlled linear systems: terminal-moment kernels, constraint
//! kernels, the moment maps for step controls and for measures, and
//! generalized trajectories of the double integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{Cell, Interval};
use crate::measures::FAMeasure;
use crate::piecewise::{PiecewiseFn, Poly};
use crate::scalar::{Rat, Scalar};

/// Terminal state as linear functionals of the control: `x(θ0)_i = ∫ π_i dμ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseSystem<S> {
    t0: Rat,
    theta0: Rat,
    b: S,
    pi: Vec<PiecewiseFn<S>>,
    c: Option<PiecewiseFn<S>>,
}

impl<S: Scalar> ImpulseSystem<S> {
    /// `b` is the total impulse every admissible control must spend.
    pub fn new(b: S, pi: Vec<PiecewiseFn<S>>, c: Option<PiecewiseFn<S>>) -> Result<Self> {
        let first = pi.first().ok_or_else(|| Error::Invalid("a system needs at least one kernel".into()))?;
        let (t0, theta0) = (first.t0().clone(), first.theta0().clone());
        if pi.iter().chain(c.iter()).any(|k| *k.t0() != t0 || *k.theta0() != theta0) {
            return Err(Error::Domain("all kernels must share one time domain".into()));
        }
        if b <= S::zero() {
            return Err(Error::Invalid(format!("total impulse must be positive, got {b}")));
        }
        Ok(ImpulseSystem { t0, theta0, b, pi, c })
    }

    pub fn t0(&self) -> &Rat {
        &self.t0
    }

    pub fn theta0(&self) -> &Rat {
        &self.theta0
    }

    pub fn domain(&self) -> Interval {
        Interval::closed(self.t0.clone(), self.theta0.clone()).expect("t0 < theta0")
    }

    pub fn b(&self) -> &S {
        &self.b
    }

    pub fn pi(&self) -> &[PiecewiseFn<S>] {
        &self.pi
    }

    pub fn c(&self) -> Option<&PiecewiseFn<S>> {
        self.c.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    /// Same system with every impulse scaled by `b`.
    pub fn with_b(&self, b: S) -> Result<Self> {
        ImpulseSystem::new(b, self.pi.clone(), self.c.clone())
    }

    pub fn to_f64(&self) -> ImpulseSystem<f64> {
        ImpulseSystem {
            t0: self.t0.clone(),
            theta0: self.theta0.clone(),
            b: self.b.to_f64(),
            pi: self.pi.iter().map(PiecewiseFn::to_f64).collect(),
            c: self.c.as_ref().map(PiecewiseFn::to_f64),
        }
    }
}

/// Product of closed coordinate intervals; bounds may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxSet {
    bounds: Vec<(f64, f64)>,
}

impl BoxSet {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<BoxSet> {
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Invalid(format!("empty bound [{lo}, {hi}] in coordinate {k}")));
            }
        }
        Ok(BoxSet { bounds })
    }

    /// `{y}` as a degenerate box.
    pub fn point(y: &[f64]) -> Result<BoxSet> {
        BoxSet::new(y.iter().map(|&v| (v, v)).collect())
    }

    /// The whole space of dimension `n`.
    pub fn whole(n: usize) -> BoxSet {
        BoxSet { bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n] }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.bounds.len() && y.iter().zip(&self.bounds).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Sup-norm inflation by `eps` of every coordinate not in `exact`.
    pub fn inflate(&self, eps: f64, exact: &[usize]) -> BoxSet {
        let bounds = self
            .bounds
            .iter()
            .enumerate()
            .map(|(k, &(lo, hi))| if exact.contains(&k) { (lo, hi) } else { (lo - eps, hi + eps) })
            .collect();
        BoxSet { bounds }
    }
}

/// Moment constraints `(∫ s_j f dη)_j ∈ Y` with `Y` a finite union of boxes,
/// and the index set `J` of coordinates to be enforced exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpec<S> {
    s: Vec<PiecewiseFn<S>>,
    boxes: Vec<BoxSet>,
    exact: Vec<usize>,
}

impl<S: Scalar> ConstraintSpec<S> {
    /// `exact` holds 0-based coordinate indices.
    pub fn new(s: Vec<PiecewiseFn<S>>, boxes: Vec<BoxSet>, mut exact: Vec<usize>) -> Result<Self> {
        let n = s.len();
        if let Some(b) = boxes.iter().find(|b| b.dim() != n) {
            return Err(Error::Invalid(format!("box of dimension {} for {n} constraint kernels", b.dim())));
        }
        if let Some(&j) = exact.iter().find(|&&j| j >= n) {
            return Err(Error::Invalid(format!("exact index {j} out of range for {n} kernels")));
        }
        if s.windows(2).any(|w| !w[0].same_domain(&w[1])) {
            return Err(Error::Domain("constraint kernels must share one time domain".into()));
        }
        exact.sort_unstable();
        exact.dedup();
        Ok(ConstraintSpec { s, boxes, exact })
    }

    /// No constraint at all: `N = 0`, `Y = ℝ⁰`.
    pub fn unconstrained() -> Self {
        ConstraintSpec { s: Vec::new(), boxes: vec![BoxSet::whole(0)], exact: Vec::new() }
    }

    pub fn kernels(&self) -> &[PiecewiseFn<S>] {
        &self.s
    }

    pub fn boxes(&self) -> &[BoxSet] {
        &self.boxes
    }

    pub fn exact(&self) -> &[usize] {
        &self.exact
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    /// Same kernels and boxes with a different exact set.
    pub fn with_exact(&self, exact: Vec<usize>) -> Result<Self> {
        ConstraintSpec::new(self.s.clone(), self.boxes.clone(), exact)
    }

    /// Every exactly-enforced kernel must be a step function. Closedness of
    /// `Y` holds by construction (closed boxes).
    pub fn check_conditions(&self) -> Result<()> {
        match self.exact.iter().find(|&&j| !self.s[j].is_step()) {
            Some(j) => Err(Error::Precondition(format!(
                "constraint kernel {} is enforced exactly but is not a step function",
                j + 1
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn check_against(&self, sys: &ImpulseSystem<S>) -> Result<()> {
        if self.s.iter().any(|k| k.t0() != sys.t0() || k.theta0() != sys.theta0()) {
            return Err(Error::Domain(
                "constraint kernels and system kernels live on different domains".into(),
            ));
        }
        Ok(())
    }

    pub fn to_f64(&self) -> ConstraintSpec<f64> {
        ConstraintSpec {
            s: self.s.iter().map(PiecewiseFn::to_f64).collect(),
            boxes: self.boxes.clone(),
            exact: self.exact.clone(),
        }
    }
}

/// Kernels of the double integrator `x1' = x2, x2' = c(t) f(t)` on `[0, 1]`
/// started at rest in the origin.
#[derive(Clone, Debug)]
pub struct DoubleIntegrator<S> {
    pub system: ImpulseSystem<S>,
    /// Position at `t1`: `(t1 - t) c(t)` on `[0, t1]`, zero after.
    pub position_kernel: PiecewiseFn<S>,
    /// Velocity at `t2`: `c(t)` on `[0, t2]`, zero after.
    pub velocity_kernel: PiecewiseFn<S>,
}

fn check_unit_domain<S: Scalar>(c: &PiecewiseFn<S>) -> Result<()> {
    if *c.t0() != Rat::zero() || *c.theta0() != Rat::one() {
        return Err(Error::Domain(format!(
            "thrust orientation must live on [0, 1], got [{}, {}]",
            c.t0(),
            c.theta0()
        )));
    }
    Ok(())
}

fn check_time_in_unit(name: &str, t: &Rat) -> Result<()> {
    if t.is_negative() || *t > Rat::one() {
        return Err(Error::Domain(format!("{name} = {t} lies outside [0, 1]")));
    }
    Ok(())
}

/// Constraint kernel for the position `x1(t1)`.
pub fn position_kernel<S: Scalar>(c: &PiecewiseFn<S>, t1: &Rat) -> Result<PiecewiseFn<S>> {
    check_unit_domain(c)?;
    check_time_in_unit("t1", t1)?;
    let lever = PiecewiseFn::polynomial(
        c.t0().clone(),
        c.theta0().clone(),
        Poly::linear(S::from_rat(t1), -S::one()),
    )?;
    let window = Interval::closed(Rat::zero(), t1.clone())?;
    lever.multiply(c)?.multiply(&PiecewiseFn::indicator(&Cell::from(window), &c.domain())?)
}

/// Constraint kernel for the velocity `x2(t2)`.
pub fn velocity_kernel<S: Scalar>(c: &PiecewiseFn<S>, t2: &Rat) -> Result<PiecewiseFn<S>> {
    check_unit_domain(c)?;
    check_time_in_unit("t2", t2)?;
    let window = Interval::closed(Rat::zero(), t2.clone())?;
    c.multiply(&PiecewiseFn::indicator(&Cell::from(window), &c.domain())?)
}

/// `π1 = (1 - t) c`, `π2 = c`, plus the position/velocity constraint kernels
/// for the intermediate times `t1`, `t2`.
pub fn build_double_integrator<S: Scalar>(
    c: &PiecewiseFn<S>,
    t1: &Rat,
    t2: &Rat,
    b: S,
) -> Result<DoubleIntegrator<S>> {
    check_unit_domain(c)?;
    let position_kernel = position_kernel(c, t1)?;
    let velocity_kernel = velocity_kernel(c, t2)?;
    let system = double_integrator_system(c, b)?;
    Ok(DoubleIntegrator { system, position_kernel, velocity_kernel })
}

/// Terminal kernels of the double integrator alone.
pub fn double_integrator_system<S: Scalar>(c: &PiecewiseFn<S>, b: S) -> Result<ImpulseSystem<S>> {
    check_unit_domain(c)?;
    let one_minus_t =
        PiecewiseFn::polynomial(c.t0().clone(), c.theta0().clone(), Poly::linear(S::one(), -S::one()))?;
    let pi1 = one_minus_t.multiply(c)?;
    ImpulseSystem::new(b, vec![pi1, c.clone()], Some(c.clone()))
}

/// Terminal and constraint moments of one measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments<S> {
    pub terminal: Vec<S>,
    pub constraint: Vec<S>,
}

/// `(Π(f), S(f))` for a step control with `f ≥ 0` and `∫ f dη = b`.
pub fn moments<S: Scalar>(
    f: &PiecewiseFn<S>,
    sys: &ImpulseSystem<S>,
    cons: &ConstraintSpec<S>,
) -> Result<Moments<S>> {
    cons.check_against(sys)?;
    if !f.is_step() {
        return Err(Error::Precondition("controls must be step functions".into()));
    }
    if f.t0() != sys.t0() || f.theta0() != sys.theta0() {
        return Err(Error::Domain("control and kernels live on different domains".into()));
    }
    if !f.is_nonnegative_ae() {
        return Err(Error::Precondition("control takes negative values".into()));
    }
    let spent = f.integral();
    if !spent.approx_eq(sys.b()) {
        return Err(Error::Precondition(format!(
            "control spends {spent} instead of the total impulse {}",
            sys.b()
        )));
    }
    let moment = |k: &PiecewiseFn<S>| k.multiply(f).map(|p| p.integral());
    Ok(Moments {
        terminal: sys.pi().iter().map(moment).collect::<Result<_>>()?,
        constraint: cons.kernels().iter().map(moment).collect::<Result<_>>()?,
    })
}

/// `(Π̃(μ), S̃(μ))` for a nonnegative measure of total mass `b`.
pub fn gen_moments<S: Scalar>(
    mu: &FAMeasure<S>,
    sys: &ImpulseSystem<S>,
    cons: &ConstraintSpec<S>,
) -> Result<Moments<S>> {
    cons.check_against(sys)?;
    if mu.t0() != sys.t0() || mu.theta0() != sys.theta0() {
        return Err(Error::Domain("measure and kernels live on different domains".into()));
    }
    if !mu.membership_xi(sys.b()) {
        return Err(Error::Precondition(format!(
            "measure is not a nonnegative measure of total mass {}",
            sys.b()
        )));
    }
    Ok(Moments {
        terminal: sys.pi().iter().map(|k| mu.integral(k)).collect::<Result<_>>()?,
        constraint: cons.kernels().iter().map(|k| mu.integral(k)).collect::<Result<_>>()?,
    })
}

/// Generalized double-integrator state at time `t` from rest at the origin:
/// `(∫_[t0,t] (t - ξ) c dμ, ∫_[t0,t] c dμ)`.
///
/// A left atom at `t` itself is counted, a right atom at `t` is not.
pub fn trajectory_eval<S: Scalar>(mu: &FAMeasure<S>, t: &Rat, sys: &ImpulseSystem<S>) -> Result<[S; 2]> {
    let c =
        sys.c().ok_or_else(|| Error::Precondition("trajectories need the thrust orientation c".into()))?;
    if t < sys.t0() || t > sys.theta0() {
        return Err(Error::Domain(format!("time {t} outside [{}, {}]", sys.t0(), sys.theta0())));
    }
    let window = Cell::from(Interval::closed(sys.t0().clone(), t.clone())?);
    let cut = PiecewiseFn::indicator(&window, &sys.domain())?;
    let velocity_kernel = c.multiply(&cut)?;
    let lever = PiecewiseFn::polynomial(
        sys.t0().clone(),
        sys.theta0().clone(),
        Poly::linear(S::from_rat(t), -S::one()),
    )?;
    let position_kernel = lever.multiply(&velocity_kernel)?;
    Ok([mu.integral(&position_kernel)?, mu.integral(&velocity_kernel)?])
}
