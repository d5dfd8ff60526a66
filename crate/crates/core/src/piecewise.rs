//! Piecewise-polynomial functions on `[t0, theta0]` with explicit values at
//! the breakpoints.
//!
//! Degree-0 functions are the step functions. Higher degrees (up to
//! [`MAX_DEGREE`]) stand in for the uniform-limit ("tiered") class: every
//! such function has one-sided limits everywhere, which is all the measure
//! integral needs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{Cell, Interval};
use crate::scalar::{Rat, Scalar};

/// Largest polynomial degree a piece may carry.
pub const MAX_DEGREE: usize = 4;

/// Which one-sided neighbourhood of a point is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "L",
            Side::Right => "R",
        })
    }
}

/// Polynomial in absolute time `t`, coefficients in ascending order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "S: Scalar")]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Poly<S> {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly<S> {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Poly<S> {
        Poly::new(vec![c])
    }

    /// `c0 + c1 t`
    pub fn linear(c0: S, c1: S) -> Poly<S> {
        Poly::new(vec![c0, c1])
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial counted as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_at(&self, t: &Rat) -> S {
        self.eval(&S::from_rat(t))
    }

    pub fn scale(&self, a: &S) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * a.clone()).collect())
    }

    pub fn add(&self, other: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly<S>, k: usize| p.coeffs.get(k).cloned().unwrap_or_else(S::zero);
        Poly::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn mul(&self, other: &Poly<S>) -> Poly<S> {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly<S> {
        Poly::new(
            self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c.clone() * S::from_i64(k as i64)).collect(),
        )
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn antiderivative(&self) -> Poly<S> {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(S::zero());
        out.extend(self.coeffs.iter().enumerate().map(|(k, c)| c.clone() / S::from_i64(k as i64 + 1)));
        Poly::new(out)
    }

    /// `∫_a^b p(t) dt`
    pub fn integrate(&self, a: &Rat, b: &Rat) -> S {
        let anti = self.antiderivative();
        anti.eval_at(b) - anti.eval_at(a)
    }

    pub fn to_f64(&self) -> Poly<f64> {
        Poly::new(self.coeffs.iter().map(Scalar::to_f64).collect())
    }

    /// Maximum of `|p|` over `[a, b]`.
    fn abs_max_on(&self, a: &Rat, b: &Rat) -> S {
        let mut best = self.eval_at(a).abs();
        let end = self.eval_at(b).abs();
        if end > best {
            best = end;
        }
        let d = self.derivative();
        let mut candidates: Vec<S> = Vec::new();
        match d.degree() {
            0 => {}
            1 => {
                // Linear derivative: the vertex is exact in S.
                let root = -d.coeffs[0].clone() / d.coeffs[1].clone();
                candidates.push(root);
            }
            _ => {
                let df = d.to_f64();
                for x in real_roots_in(df.coeffs(), a.to_f64(), b.to_f64()) {
                    candidates.push(S::from_f64_lossy(x));
                }
            }
        }
        let (sa, sb) = (S::from_rat(a), S::from_rat(b));
        for x in candidates {
            if x > sa && x < sb {
                let v = self.eval(&x).abs();
                if v > best {
                    best = v;
                }
            }
        }
        best
    }
}

impl<S: fmt::Debug> fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c:?}")?,
                1 => write!(f, "{c:?}·t")?,
                _ => write!(f, "{c:?}·t^{k}")?,
            }
        }
        Ok(())
    }
}

/// Real roots of a float polynomial inside `(a, b)`; degree at most 3 in
/// practice, handled recursively through the roots of the derivative.
fn real_roots_in(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    let eval = |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x + k);
    match c.len() {
        0 | 1 => Vec::new(),
        2 => {
            let x = -c[0] / c[1];
            if x > a && x < b {
                vec![x]
            } else {
                Vec::new()
            }
        }
        _ => {
            let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect();
            let mut knots = vec![a];
            knots.extend(real_roots_in(&dc, a, b));
            knots.push(b);
            let mut roots = Vec::new();
            for w in knots.windows(2) {
                let (mut lo, mut hi) = (w[0], w[1]);
                let (flo, fhi) = (eval(lo), eval(hi));
                if flo == 0.0 {
                    if lo > a {
                        roots.push(lo);
                    }
                    continue;
                }
                if flo.signum() == fhi.signum() {
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if eval(mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            roots
        }
    }
}

/// Piecewise polynomial on `[t0, theta0]`.
///
/// `pieces[i]` applies on the open interval `(breakpoints[i], breakpoints[i+1])`
/// and `point_values[i]` is the value at `breakpoints[i]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise<S>", bound = "S: Scalar")]
pub struct PiecewiseFn<S> {
    breakpoints: Vec<Rat>,
    pieces: Vec<Poly<S>>,
    point_values: Vec<S>,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawPiecewise<S> {
    breakpoints: Vec<Rat>,
    pieces: Vec<Vec<S>>,
    #[serde(default)]
    point_values: Option<Vec<S>>,
}

impl<S: Scalar> TryFrom<RawPiecewise<S>> for PiecewiseFn<S> {
    type Error = Error;

    fn try_from(raw: RawPiecewise<S>) -> Result<PiecewiseFn<S>> {
        let pieces = raw.pieces.into_iter().map(Poly::new).collect();
        match raw.point_values {
            Some(pv) => PiecewiseFn::new(raw.breakpoints, pieces, pv),
            None => PiecewiseFn::right_continuous(raw.breakpoints, pieces),
        }
    }
}

impl<S: Scalar> PiecewiseFn<S> {
    pub fn new(breakpoints: Vec<Rat>, pieces: Vec<Poly<S>>, point_values: Vec<S>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Invalid("need at least two breakpoints".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(Error::Invalid(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        if point_values.len() != breakpoints.len() {
            return Err(Error::Invalid("one point value per breakpoint required".into()));
        }
        if let Some(p) = pieces.iter().find(|p| p.degree() > MAX_DEGREE) {
            return Err(Error::Capacity(format!(
                "piece of degree {} exceeds the cap {MAX_DEGREE}",
                p.degree()
            )));
        }
        let finite = pieces
            .iter()
            .flat_map(|p| p.coeffs.iter())
            .chain(point_values.iter())
            .all(|c| c.to_f64().is_finite());
        if !finite {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        Ok(PiecewiseFn { breakpoints, pieces, point_values })
    }

    /// Point values taken from the piece on the right (the left piece at
    /// the final breakpoint).
    pub fn right_continuous(breakpoints: Vec<Rat>, pieces: Vec<Poly<S>>) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() != breakpoints.len() - 1 {
            return Err(Error::Invalid("piece count must be breakpoint count minus one".into()));
        }
        let last = pieces.len() - 1;
        let point_values =
            breakpoints.iter().enumerate().map(|(i, t)| pieces[i.min(last)].eval_at(t)).collect();
        PiecewiseFn::new(breakpoints, pieces, point_values)
    }

    /// Step function with `values[i]` on `[breakpoints[i], breakpoints[i+1])`,
    /// right-continuous, closed at the end.
    pub fn step(breakpoints: Vec<Rat>, values: Vec<S>) -> Result<Self> {
        let pieces = values.into_iter().map(Poly::constant).collect();
        PiecewiseFn::right_continuous(breakpoints, pieces)
    }

    pub fn polynomial(t0: Rat, theta0: Rat, p: Poly<S>) -> Result<Self> {
        PiecewiseFn::right_continuous(vec![t0, theta0], vec![p])
    }

    pub fn constant(t0: Rat, theta0: Rat, c: S) -> Result<Self> {
        PiecewiseFn::polynomial(t0, theta0, Poly::constant(c))
    }

    /// The zero function 𝒪_E.
    pub fn zero(t0: Rat, theta0: Rat) -> Result<Self> {
        PiecewiseFn::polynomial(t0, theta0, Poly::zero())
    }

    /// Characteristic function of `cell` on `domain`.
    pub fn indicator(cell: &Cell, domain: &Interval) -> Result<Self> {
        if !cell.is_subset(&Cell::from(domain.clone())) {
            return Err(Error::Domain(format!("cell {cell} is not contained in {domain}")));
        }
        if domain.is_singleton() {
            return Err(Error::Invalid("function domain must have positive length".into()));
        }
        let mut bps = cell.endpoints();
        bps.push(domain.lo().clone());
        bps.push(domain.hi().clone());
        bps.sort();
        bps.dedup();
        let one_if = |inside: bool| if inside { S::one() } else { S::zero() };
        let pieces = bps
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / Rat::int(2);
                Poly::constant(one_if(cell.contains(&mid)))
            })
            .collect();
        let point_values = bps.iter().map(|t| one_if(cell.contains(t))).collect();
        PiecewiseFn::new(bps, pieces, point_values)
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Poly<S>] {
        &self.pieces
    }

    pub fn point_values(&self) -> &[S] {
        &self.point_values
    }

    pub fn t0(&self) -> &Rat {
        &self.breakpoints[0]
    }

    pub fn theta0(&self) -> &Rat {
        self.breakpoints.last().expect("at least two breakpoints")
    }

    /// The closed segment `[t0, theta0]`.
    pub fn domain(&self) -> Interval {
        Interval::closed(self.t0().clone(), self.theta0().clone()).expect("t0 < theta0")
    }

    pub fn same_domain(&self, other: &PiecewiseFn<S>) -> bool {
        self.t0() == other.t0() && self.theta0() == other.theta0()
    }

    pub fn is_step(&self) -> bool {
        self.pieces.iter().all(|p| p.degree() == 0)
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// Whether every piece is nonnegative on its open interval, i.e. the
    /// function is nonnegative η-almost everywhere.
    pub fn is_nonnegative_ae(&self) -> bool {
        let zero = S::zero();
        self.pieces.iter().zip(self.breakpoints.windows(2)).all(|(p, w)| {
            let ends = p.eval_at(&w[0]) >= zero && p.eval_at(&w[1]) >= zero;
            ends && (p.degree() < 2 || {
                let d = p.derivative().to_f64();
                real_roots_in(d.coeffs(), w[0].to_f64(), w[1].to_f64())
                    .into_iter()
                    .all(|x| p.eval(&S::from_f64_lossy(x)) >= zero)
            })
        })
    }

    fn check_inside(&self, t: &Rat) -> Result<()> {
        if t < self.t0() || t > self.theta0() {
            return Err(Error::Domain(format!("time {t} outside [{}, {}]", self.t0(), self.theta0())));
        }
        Ok(())
    }

    pub fn eval(&self, t: &Rat) -> Result<S> {
        self.check_inside(t)?;
        match self.breakpoints.binary_search(t) {
            Ok(i) => Ok(self.point_values[i].clone()),
            Err(i) => Ok(self.pieces[i - 1].eval_at(t)),
        }
    }

    /// Index of the piece whose open interval abuts `t` from `side`.
    fn piece_at(&self, t: &Rat, side: Side) -> Result<usize> {
        self.check_inside(t)?;
        match side {
            Side::Left if t == self.t0() => {
                Err(Error::Boundary(format!("no left limit at the initial time {t}")))
            }
            Side::Right if t == self.theta0() => {
                Err(Error::Boundary(format!("no right limit at the final time {t}")))
            }
            _ => Ok(match (self.breakpoints.binary_search(t), side) {
                (Ok(i), Side::Left) => i - 1,
                (Ok(i), Side::Right) => i,
                (Err(i), _) => i - 1,
            }),
        }
    }

    /// `lim f(s)` as `s → t` from the given side.
    pub fn side_limit(&self, t: &Rat, side: Side) -> Result<S> {
        let i = self.piece_at(t, side)?;
        Ok(self.pieces[i].eval_at(t))
    }

    /// The polynomial governing the one-sided neighbourhood of `t`.
    pub fn side_piece(&self, t: &Rat, side: Side) -> Result<&Poly<S>> {
        let i = self.piece_at(t, side)?;
        Ok(&self.pieces[i])
    }

    /// Same function on a superset of the breakpoints.
    pub fn refine(&self, points: &[Rat]) -> Self {
        let mut bps: Vec<Rat> = self
            .breakpoints
            .iter()
            .chain(points.iter().filter(|t| *t > self.t0() && *t < self.theta0()))
            .cloned()
            .collect();
        bps.sort();
        bps.dedup();
        let mut pieces = Vec::with_capacity(bps.len() - 1);
        let mut src = 0;
        for w in bps.windows(2) {
            while self.breakpoints[src + 1] <= w[0] {
                src += 1;
            }
            pieces.push(self.pieces[src].clone());
        }
        let point_values =
            bps.iter().map(|t| self.eval(t).expect("refinement point inside domain")).collect();
        PiecewiseFn { breakpoints: bps, pieces, point_values }
    }

    /// Drop interior breakpoints across which nothing changes.
    pub fn coalesce(&self) -> Self {
        let mut bps = vec![self.breakpoints[0].clone()];
        let mut pvs = vec![self.point_values[0].clone()];
        let mut pieces: Vec<Poly<S>> = vec![self.pieces[0].clone()];
        for i in 1..self.pieces.len() {
            let t = &self.breakpoints[i];
            let prev = pieces.last().expect("nonempty");
            let redundant = *prev == self.pieces[i] && prev.eval_at(t) == self.point_values[i];
            if !redundant {
                bps.push(t.clone());
                pvs.push(self.point_values[i].clone());
                pieces.push(self.pieces[i].clone());
            }
        }
        bps.push(self.theta0().clone());
        pvs.push(self.point_values.last().expect("nonempty").clone());
        PiecewiseFn { breakpoints: bps, pieces, point_values: pvs }
    }

    /// Pointwise equality regardless of redundant breakpoints.
    pub fn same_function(&self, other: &Self) -> bool {
        self.coalesce() == other.coalesce()
    }

    fn aligned(f: &Self, g: &Self) -> Result<(Self, Self)> {
        if !f.same_domain(g) {
            return Err(Error::Domain(format!(
                "functions on different domains [{}, {}] and [{}, {}]",
                f.t0(),
                f.theta0(),
                g.t0(),
                g.theta0()
            )));
        }
        Ok((f.refine(&g.breakpoints), g.refine(&f.breakpoints)))
    }

    /// `alpha·f + beta·g`
    pub fn lin_comb(alpha: &S, f: &Self, beta: &S, g: &Self) -> Result<Self> {
        let (f, g) = PiecewiseFn::aligned(f, g)?;
        let pieces =
            f.pieces.iter().zip(&g.pieces).map(|(p, q)| p.scale(alpha).add(&q.scale(beta))).collect();
        let point_values = f
            .point_values
            .iter()
            .zip(&g.point_values)
            .map(|(a, b)| alpha.clone() * a.clone() + beta.clone() * b.clone())
            .collect();
        Ok(PiecewiseFn { breakpoints: f.breakpoints, pieces, point_values }.coalesce())
    }

    pub fn scale(&self, alpha: &S) -> Self {
        PiecewiseFn {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(alpha)).collect(),
            point_values: self.point_values.iter().map(|v| v.clone() * alpha.clone()).collect(),
        }
        .coalesce()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        PiecewiseFn::lin_comb(&S::one(), self, &S::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        PiecewiseFn::lin_comb(&S::one(), self, &-S::one(), other)
    }

    /// Pointwise product; fails when a product piece would exceed [`MAX_DEGREE`].
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let (f, g) = PiecewiseFn::aligned(self, other)?;
        let mut pieces = Vec::with_capacity(f.pieces.len());
        for (p, q) in f.pieces.iter().zip(&g.pieces) {
            let prod = p.mul(q);
            if p.degree() + q.degree() > MAX_DEGREE {
                return Err(Error::Capacity(format!(
                    "product degree {} exceeds the cap {MAX_DEGREE}",
                    p.degree() + q.degree()
                )));
            }
            pieces.push(prod);
        }
        let point_values =
            f.point_values.iter().zip(&g.point_values).map(|(a, b)| a.clone() * b.clone()).collect();
        Ok(PiecewiseFn { breakpoints: f.breakpoints, pieces, point_values }.coalesce())
    }

    /// `sup |f|` over the domain, point values included.
    ///
    /// Exact for pieces of degree ≤ 2; for higher degrees the interior
    /// extrema are located in floating point and evaluated in `S`.
    pub fn sup_norm(&self) -> S {
        let mut best = S::zero();
        for v in &self.point_values {
            let a = v.abs();
            if a > best {
                best = a;
            }
        }
        for (p, w) in self.pieces.iter().zip(self.breakpoints.windows(2)) {
            let m = p.abs_max_on(&w[0], &w[1]);
            if m > best {
                best = m;
            }
        }
        best
    }

    /// `∫_cell f dη`; values at individual points do not contribute.
    pub fn integrate_eta(&self, cell: &Cell) -> Result<S> {
        if !cell.is_subset(&Cell::from(self.domain())) {
            return Err(Error::Domain(format!(
                "cell {cell} is not contained in [{}, {}]",
                self.t0(),
                self.theta0()
            )));
        }
        let mut total = S::zero();
        for part in cell.parts() {
            total = total + self.integrate_between(part.lo(), part.hi());
        }
        Ok(total)
    }

    /// `∫_a^b f dt` for `t0 ≤ a ≤ b ≤ theta0`.
    pub(crate) fn integrate_between(&self, a: &Rat, b: &Rat) -> S {
        let mut total = S::zero();
        if a >= b {
            return total;
        }
        let start = match self.breakpoints.binary_search(a) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        for i in start..self.pieces.len() {
            let (lo, hi) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
            if lo >= b {
                break;
            }
            let from = lo.max(a);
            let to = hi.min(b);
            if from < to {
                total = total + self.pieces[i].integrate(from, to);
            }
        }
        total
    }

    /// `∫_E f dη`
    pub fn integral(&self) -> S {
        self.integrate_between(self.t0(), self.theta0())
    }

    /// `|f|` for a step function.
    pub fn abs_step(&self) -> Result<Self> {
        if !self.is_step() {
            return Err(Error::Capacity("|f| is only representable for step functions".into()));
        }
        Ok(PiecewiseFn {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| Poly::constant(p.eval(&S::zero()).abs())).collect(),
            point_values: self.point_values.iter().map(Scalar::abs).collect(),
        })
    }

    pub fn to_f64(&self) -> PiecewiseFn<f64> {
        PiecewiseFn {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(Poly::to_f64).collect(),
            point_values: self.point_values.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for PiecewiseFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PiecewiseFn[")?;
        for i in 0..self.pieces.len() {
            write!(f, "{:?}@{} ({:?}) ", self.point_values[i], self.breakpoints[i], self.pieces[i])?;
        }
        write!(
            f,
            "{:?}@{}]",
            self.point_values.last().expect("nonempty"),
            self.breakpoints.last().expect("nonempty")
        )
    }
}

/// Free-function form of [`PiecewiseFn::lin_comb`].
pub fn lin_comb<S: Scalar>(
    alpha: &S,
    f: &PiecewiseFn<S>,
    beta: &S,
    g: &PiecewiseFn<S>,
) -> Result<PiecewiseFn<S>> {
    PiecewiseFn::lin_comb(alpha, f, beta, g)
}

/// Free-function form of [`PiecewiseFn::multiply`].
pub fn multiply<S: Scalar>(f: &PiecewiseFn<S>, g: &PiecewiseFn<S>) -> Result<PiecewiseFn<S>> {
    f.multiply(g)
}
